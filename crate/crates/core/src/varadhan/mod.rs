//! Pairings, cocycle splitting, the linear-growth functions `𝔄^j_ξ`, the uniformity
//! criterion and the decomposition engine.

mod afunction;
mod decompose;
mod pairing;
mod splitting;
mod uniformity;

pub use afunction::{a_function, a_identity_check, dim_dv_check, xi_total, AFunction, DimensionReport};
pub use decompose::{
    decompose, Certificate, CertificateEntry, CertificateEntryJson, CertificateJson, ClosednessJson,
    DecomposeOptions, DecompositionJson, DecompositionResult, GeometryJson, Provenance, RadiusAttempt,
    RepresentativeJson, SplittingJson,
};
pub use pairing::{
    add, closed_pairs, cocycle_residuals, graph_separated, l1_ball, pairing, pairing_local, pairing_table,
    radius_for, realize, show_charge, symmetry_violations, translation_norm, BallPair, CocycleViolation,
    PairingEntryJson, PairingTable, PairingTableJson,
};
pub use splitting::{split_cocycle, MonoidKind, SplittingFunction};
pub use uniformity::{uniformity_check, UniformityReport, UniformityWitness};
