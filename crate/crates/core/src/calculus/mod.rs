//! Functions and forms on configuration spaces: local and uniform functions, the
//! unique expansion, the differential, path integrals and potentials.

mod form;
mod function;
mod potential;

pub use form::{
    alternation_scan, integrate, is_shift_invariant, AlternationViolation, CompiledForm, Differential,
    EdgeOrbit, EdgeOrbitJson, FormEntryJson, OrbitForm, OrbitFormJson, ShiftInvariance,
};
pub use function::{
    anchored_supports, canonical_support, expand, iota_restrict, ConservedFunction, Expansion, LocalFunction,
    Metric, OrbitFunction, OrbitFunctionJson, OrbitTerm, OrbitTermJson, TermEntryJson, UniformFunction,
};
pub use potential::{potential, CycleReport, PotentialResult, TransportPotential, WindowPotential};

use crate::configspace::Configuration;
use crate::crystal::LatticeEdge;
use crate::{Result, Q};

/// A function on finitely supported configurations.
pub trait LatticeFunction: Sync {
    fn eval(&self, eta: &Configuration) -> Result<Q>;
}

/// A form: a value on every transition `(η, e)`.
pub trait LatticeForm: Sync {
    fn eval(&self, eta: &Configuration, e: &LatticeEdge) -> Result<Q>;
}

impl<T: LatticeFunction + ?Sized> LatticeFunction for &T {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        (**self).eval(eta)
    }
}

impl<T: LatticeForm + ?Sized> LatticeForm for &T {
    fn eval(&self, eta: &Configuration, e: &LatticeEdge) -> Result<Q> {
        (**self).eval(eta, e)
    }
}

/// Adapts a closure into a [`LatticeFunction`].
pub struct FnFunction<F>(pub F);

impl<F: Fn(&Configuration) -> Result<Q> + Sync> LatticeFunction for FnFunction<F> {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        (self.0)(eta)
    }
}

/// Sum of functions with rational coefficients.
pub struct Combination<'a> {
    pub parts: Vec<(Q, &'a dyn LatticeFunction)>,
}

impl LatticeFunction for Combination<'_> {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut acc = Q::default();
        for (c, f) in &self.parts {
            acc += c * f.eval(eta)?;
        }
        Ok(acc)
    }
}
