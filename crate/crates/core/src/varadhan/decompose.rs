use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::afunction::{a_function, AFunction};
use super::pairing::{closed_pairs, pairing_table, radius_for, show_charge, translation_norm, BallPair, PairingTableJson};
use super::splitting::{split_cocycle, MonoidKind, SplittingFunction};
use crate::calculus::{
    anchored_supports, canonical_support, potential, Differential, LatticeForm, LatticeFunction, OrbitForm,
    OrbitFunction, OrbitFunctionJson, OrbitTerm, PotentialResult, TransportPotential,
};
use crate::configspace::{apply_edge, charge, lex_least, Configuration, ConfigurationJson, Transition};
use crate::crystal::{essentially_euclidean_equivalent, unit, Cell, Equivalence, LatticeEdge, LatticeVertex, PeriodicLattice, Window};
use crate::interaction::{decode, default_locales, state_space_size, Interaction, MonoidShape, State};
use crate::{linalg, rational, Error, Result, Q};

/// Tuning knobs of [`decompose`].
#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    /// Radius of the expansion of `g`; escalated from `R−1` when absent.
    pub radius: Option<usize>,
    /// Cells per axis of the working window, centred at the origin.
    pub window: Option<Vec<i64>>,
    /// Bound on exhaustive enumerations.
    pub cap: u128,
    /// Bound on the states visited by each local transport search.
    pub search_limit: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            radius: None,
            window: None,
            cap: 1 << 22,
            search_limit: 1 << 18,
        }
    }
}

/// One checked transition of the certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateEntry {
    pub transition: Transition,
    pub omega: Q,
    pub exact: Q,
    pub residual: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Orbit patterns on which `ω` and `∂g + Σ ∂𝔄ʲ_ζ` agree; equality there is equality everywhere.
    pub orbit_patterns: usize,
    /// Box in which every transition was recomputed from `g` and the `𝔄ʲ` directly.
    pub box_lo: Cell,
    pub box_hi: Cell,
    pub box_transitions: usize,
    /// Sampled configurations on which `(1−σ_k)g = 0` was verified before extraction.
    pub shift_samples: usize,
    pub samples: Vec<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RadiusAttempt {
    pub radius: usize,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosednessJson {
    pub lo: Cell,
    pub hi: Cell,
    pub configurations: usize,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeometryJson {
    pub essentially_euclidean: bool,
    /// Constants of the essentially Euclidean lattice on the same vertex set.
    pub equivalence: Option<Equivalence>,
    pub translation_norm: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentativeJson {
    pub charge: Vec<String>,
    pub states: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingJson {
    pub monoid: String,
    pub values: Vec<(Vec<String>, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub window_lo: Cell,
    pub window_hi: Cell,
    pub form_radius: usize,
    pub separation: usize,
    pub term_radius: usize,
    pub max_support: usize,
    pub geometry: GeometryJson,
    pub closedness: ClosednessJson,
    /// Vertices `(b, 0)` whose cells define `n_j` in `𝔄ʲ`.
    pub fundamental_domain: Vec<LatticeVertex>,
    /// Potential normalisation: zero on the lexicographically least configuration of each charge.
    pub representatives: Vec<RepresentativeJson>,
    pub pairing: PairingTableJson,
    pub splitting: SplittingJson,
    pub radii_tried: Vec<RadiusAttempt>,
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub g: OrbitFunction,
    pub zetas: Vec<Vec<Q>>,
    pub certificate: Certificate,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateEntryJson {
    pub config: ConfigurationJson,
    pub edge: LatticeEdge,
    pub omega: String,
    pub exact: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateJson {
    pub orbit_patterns: usize,
    pub box_lo: Cell,
    pub box_hi: Cell,
    pub box_transitions: usize,
    pub shift_samples: usize,
    pub max_residual: String,
    pub samples: Vec<CertificateEntryJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionJson {
    pub lattice: String,
    pub states: Vec<String>,
    pub g: OrbitFunctionJson,
    pub zetas: Vec<BTreeMap<String, String>>,
    pub certificate: CertificateJson,
    pub provenance: Provenance,
}

impl DecompositionResult {
    pub fn to_json(&self, interaction: &Interaction) -> DecompositionJson {
        let c = &self.certificate;
        DecompositionJson {
            lattice: self.g.lattice().name().to_string(),
            states: interaction.names().to_vec(),
            g: self.g.to_json(interaction),
            zetas: self
                .zetas
                .iter()
                .map(|z| {
                    z.iter()
                        .enumerate()
                        .map(|(s, v)| (interaction.name(s as State).to_string(), rational::format(v)))
                        .collect()
                })
                .collect(),
            certificate: CertificateJson {
                orbit_patterns: c.orbit_patterns,
                box_lo: c.box_lo.clone(),
                box_hi: c.box_hi.clone(),
                box_transitions: c.box_transitions,
                shift_samples: c.shift_samples,
                max_residual: rational::format(&Q::zero()),
                samples: c
                    .samples
                    .iter()
                    .map(|s| CertificateEntryJson {
                        config: s.transition.config.to_json(interaction),
                        edge: s.transition.edge.clone(),
                        omega: rational::format(&s.omega),
                        exact: rational::format(&s.exact),
                        residual: rational::format(&s.residual),
                    })
                    .collect(),
            },
            provenance: self.provenance.clone(),
        }
    }
}

/// Decomposes a shift-invariant closed uniform form as `ω = ∂g + Σⱼ ∂𝔄ʲ_{ζⱼ}` with `g`
/// shift-invariant uniform and `ζⱼ` conserved quantities.
pub fn decompose(form: &OrbitForm, opts: &DecomposeOptions) -> Result<DecompositionResult> {
    let lattice = form.lattice();
    let interaction = form.interaction();
    check_interaction(lattice, interaction, opts.cap)?;
    let r_form = form.effective_radius().max(1);
    let closedness = check_closed(form, r_form, opts.cap)?;
    let t = translation_norm(lattice);
    let separation = t * r_form;
    let ee = lattice.is_essentially_euclidean();
    let geometry = GeometryJson {
        essentially_euclidean: ee.essentially_euclidean,
        equivalence: (!ee.essentially_euclidean).then(|| essentially_euclidean_equivalent(lattice).1),
        translation_norm: t,
    };
    let radii: Vec<usize> = match opts.radius {
        Some(r) => vec![r],
        None => (r_form.saturating_sub(1)..=r_form + 2).collect(),
    };
    let mut tried = Vec::new();
    let mut last_err = None;
    for &r_g in &radii {
        let attempt = Attempt {
            form,
            r_form,
            r_g,
            separation,
            opts,
            geometry: &geometry,
            closedness: &closedness,
        };
        match attempt.run() {
            Ok(mut out) => {
                tried.push(RadiusAttempt {
                    radius: r_g,
                    outcome: "certified".into(),
                });
                out.provenance.radii_tried = tried;
                return Ok(out);
            }
            Err(e @ (Error::Internal(_) | Error::Inconclusive(_) | Error::CapExceeded { .. })) => {
                tried.push(RadiusAttempt {
                    radius: r_g,
                    outcome: e.to_string(),
                });
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let summary = tried
        .iter()
        .map(|a| format!("radius {}: {}", a.radius, a.outcome))
        .collect::<Vec<_>>()
        .join("; ");
    Err(match last_err {
        Some(Error::Internal(_)) => Error::internal(format!("no term radius certified the decomposition ({summary})")),
        Some(Error::CapExceeded { size, cap }) if tried.len() == 1 => Error::CapExceeded { size, cap },
        _ => Error::inconclusive(format!("no term radius certified the decomposition ({summary})")),
    })
}

fn check_interaction(lattice: &PeriodicLattice, interaction: &Interaction, cap: u128) -> Result<()> {
    interaction.validate()?;
    for ev in interaction.irreducibility_evidence(&default_locales(4), cap)? {
        if !ev.pass {
            let (a, b) = ev.witness.unwrap_or_default();
            return Err(Error::validation(format!(
                "interaction is not irreducibly quantified: on {} the configurations {} and {} share a charge but are not connected",
                ev.locale,
                a.join(""),
                b.join("")
            )));
        }
    }
    if lattice.rank() == 1 && !interaction.is_simple() {
        return Err(Error::validation("a lattice of dimension 1 requires a simple interaction"));
    }
    Ok(())
}

fn check_closed(form: &OrbitForm, r: usize, cap: u128) -> Result<ClosednessJson> {
    let lattice = form.lattice();
    let interaction = form.interaction();
    let d = lattice.rank() as u32;
    let budget = cap.min(1 << 16);
    let q = interaction.len();
    let side = (1..=(2 * r + 1) as i64)
        .rev()
        .find(|&s| state_space_size(q, (s.pow(d) as usize) * lattice.cell_size()) <= budget)
        .ok_or(Error::CapExceeded {
            size: state_space_size(q, lattice.cell_size()),
            cap: budget,
        })?;
    let lo = vec![-(side - 1) / 2; d as usize];
    let hi: Cell = lo.iter().map(|x| x + side - 1).collect();
    let w = Window::new(lattice, lo.clone(), hi.clone())?;
    match potential(form, &w, interaction, budget)? {
        PotentialResult::Exact(p) => Ok(ClosednessJson {
            lo,
            hi,
            configurations: state_space_size(q, w.len()) as usize,
            components: p.component_count(),
        }),
        PotentialResult::NotClosed(c) => {
            let steps: Vec<String> = c
                .cycle
                .iter()
                .map(|t| format!("{:?} along {:?}", interaction.render(&w.to_dense(&t.config).unwrap_or_default()), t.edge))
                .collect();
            Err(Error::validation(format!(
                "form is not closed: a cycle of {} transitions has integral {} ({})",
                c.cycle.len(),
                rational::format(&c.integral),
                steps.join(" → ")
            )))
        }
    }
}

struct Attempt<'a> {
    form: &'a OrbitForm,
    r_form: usize,
    r_g: usize,
    separation: usize,
    opts: &'a DecomposeOptions,
    geometry: &'a GeometryJson,
    closedness: &'a ClosednessJson,
}

/// `g₀ − Σⱼ 𝔄ʲ_{ζⱼ}` with `g₀ = f + h∘𝝃_X`.
struct Corrected<'a> {
    f: &'a TransportPotential<'a>,
    interaction: &'a Interaction,
    h: &'a SplittingFunction,
    a: Vec<AFunction>,
}

impl Corrected<'_> {
    fn g0(&self, eta: &Configuration) -> Result<Q> {
        let alpha = charge(self.interaction, eta);
        let h = self
            .h
            .get(&alpha)
            .ok_or_else(|| Error::inconclusive(format!("splitting is not tabulated at charge {}", show_charge(&alpha))))?;
        Ok(self.f.eval(eta)? + h)
    }
}

impl LatticeFunction for Corrected<'_> {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut v = self.g0(eta)?;
        for a in &self.a {
            v -= a.eval(eta)?;
        }
        Ok(v)
    }
}

impl Attempt<'_> {
    fn run(&self) -> Result<DecompositionResult> {
        let form = self.form;
        let lattice = form.lattice();
        let interaction = form.interaction();
        let d = lattice.rank();
        let supports = anchored_supports(lattice, self.r_g, usize::MAX);
        let n = supports.iter().map(Vec::len).max().unwrap_or(1);
        let k = radius_for(lattice, n);
        let (mut lo, mut hi) = BallPair::required_box(d, k, self.separation);
        let reach = (translation_norm(lattice) * self.r_g.max(1) + 2) as i64;
        for j in 0..d {
            lo[j] = lo[j].min(-reach);
            hi[j] = hi[j].max(reach);
        }
        let window = match &self.opts.window {
            Some(sizes) => {
                if sizes.len() != d {
                    return Err(Error::input(format!("window needs {d} sizes")));
                }
                let wlo: Cell = sizes.iter().map(|s| -(s - 1).div_euclid(2)).collect();
                let whi: Cell = wlo.iter().zip(sizes).map(|(a, s)| a + s - 1).collect();
                if (0..d).any(|j| wlo[j] > lo[j] || whi[j] < hi[j]) {
                    return Err(Error::inconclusive(format!(
                        "window {wlo:?}..{whi:?} does not contain the box {lo:?}..{hi:?} needed for term radius {}",
                        self.r_g
                    )));
                }
                Window::new(lattice, wlo, whi)?
            }
            None => Window::new(lattice, lo, hi)?,
        };
        let f = TransportPotential::new(form, &window, interaction, (2 * n).min(window.len()), self.opts.search_limit)?;

        let pair = BallPair::canonical(d, k, self.separation);
        let catalog = interaction.charge_catalog(n);
        let wanted = closed_pairs(&catalog, n);
        let table = pairing_table(&f, lattice, interaction, &pair, &wanted)?;
        let kind = if d == 1 {
            let s = interaction.simplicity();
            let unit = vec![s.unit.clone().ok_or_else(|| Error::validation("interaction is not simple"))?];
            match s.shape {
                Some(MonoidShape::Integers) => MonoidKind::Integers { unit },
                _ => MonoidKind::Naturals { unit },
            }
        } else {
            MonoidKind::Symmetric
        };
        let h = split_cocycle(&table.values(), &kind)?;

        let basis = interaction.conserved_basis();
        let q = interaction.len();
        let o = LatticeVertex::new(0, lattice.zero_cell());
        let mut zetas = Vec::with_capacity(d);
        for j in 0..d {
            let back = o.translated(&unit(d, j, -1));
            let mut z = vec![Q::zero(); q];
            for (s, slot) in z.iter_mut().enumerate().skip(1) {
                let s = s as State;
                *slot = f.eval(&Configuration::single(o.clone(), s))? - f.eval(&Configuration::single(back.clone(), s))?;
            }
            let mut rows = basis.clone();
            let r0 = linalg::rank(&rows, q);
            rows.push(z.clone());
            if linalg::rank(&rows, q) != r0 {
                return Err(Error::internal(format!(
                    "translation defect along axis {j} is not a conserved quantity: {:?}",
                    z.iter().map(rational::format).collect::<Vec<_>>()
                )));
            }
            zetas.push(z);
        }
        let a = zetas
            .iter()
            .enumerate()
            .map(|(j, z)| a_function(lattice, z, j))
            .collect::<Result<Vec<_>>>()?;
        let g = Corrected {
            f: &f,
            interaction,
            h: &h,
            a,
        };
        let shift_samples = shift_check(&g, lattice, interaction, self.r_g, n)?;

        let terms: Vec<OrbitTerm> = supports
            .par_iter()
            .map(|support| extract_term(&g, support, q))
            .collect::<Result<_>>()?;
        let g_orbit = OrbitFunction::new(lattice, strip_conserved(lattice, interaction, terms))?;
        let exact = OrbitForm::exact(&g_orbit, &zetas, interaction, self.opts.cap)?;
        let (orbit_patterns, mismatch) = form.compare(&exact, self.opts.cap)?;
        if let Some((t, x, y)) = mismatch {
            return Err(Error::internal(format!(
                "ω = {} but ∂g + Σ ∂𝔄ʲ_ζ = {} at {:?} along {:?}",
                rational::format(&x),
                rational::format(&y),
                interaction.render(&t.config.support().map(|(_, s)| s).collect::<Vec<_>>()),
                t.edge
            )));
        }
        let (box_lo, box_hi, box_transitions, samples) = box_certificate(form, &g_orbit, &zetas)?;

        let fundamental_domain = lattice
            .fundamental_domain()
            .into_iter()
            .map(|b| LatticeVertex::new(b, lattice.zero_cell()))
            .collect();
        let representatives = catalog
            .realizable(n)
            .into_iter()
            .filter_map(|c| {
                lex_least(interaction, &catalog, n, &c).map(|states| RepresentativeJson {
                    charge: c.iter().map(rational::format).collect(),
                    states: interaction.render(&states),
                })
            })
            .collect();
        Ok(DecompositionResult {
            g: g_orbit,
            zetas,
            certificate: Certificate {
                orbit_patterns,
                box_lo,
                box_hi,
                box_transitions,
                shift_samples,
                samples,
            },
            provenance: Provenance {
                window_lo: window.lo().to_vec(),
                window_hi: window.hi().to_vec(),
                form_radius: self.r_form,
                separation: self.separation,
                term_radius: self.r_g,
                max_support: n,
                geometry: self.geometry.clone(),
                closedness: self.closedness.clone(),
                fundamental_domain,
                representatives,
                pairing: table.to_json(),
                splitting: SplittingJson {
                    monoid: kind.describe(),
                    values: h.to_json(),
                },
                radii_tried: vec![],
            },
        })
    }
}

/// `(1−σ_k)g = 0` on pseudo-random configurations near the origin.
fn shift_check(g: &Corrected<'_>, lattice: &PeriodicLattice, interaction: &Interaction, r: usize, n: usize) -> Result<usize> {
    let d = lattice.rank();
    let q = interaction.len() as State;
    let ball = super::pairing::l1_ball(lattice, &lattice.zero_cell(), r.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for _ in 0..32 {
        let m = rng.gen_range(1..=n.min(ball.len()));
        let mut eta = Configuration::empty();
        for _ in 0..m {
            let v = ball[rng.gen_range(0..ball.len())].clone();
            eta.set(v, rng.gen_range(1..q));
        }
        for k in 0..d {
            let moved = eta.translated(&unit(d, k, 1));
            let (a, b) = (g.eval(&eta)?, g.eval(&moved)?);
            checked += 1;
            if a != b {
                return Err(Error::internal(format!(
                    "corrected potential is not invariant along axis {k}: {} versus {} after translation",
                    rational::format(&a),
                    rational::format(&b)
                )));
            }
        }
    }
    Ok(checked)
}

/// `g_Λ(η) = Σ_{Λ''⊆Λ} (−1)^{|Λ∖Λ''|} g(η|Λ'')` on every non-base pattern of `Λ`.
/// Removes from `g` the multiple of `Σ_x ξ(η_x)`, `ξ ∈ Consv(S)`, fixed by the single-site term
/// at the first fundamental-domain vertex vanishing at the pivot states of the conserved basis.
fn strip_conserved(lattice: &PeriodicLattice, interaction: &Interaction, mut terms: Vec<OrbitTerm>) -> Vec<OrbitTerm> {
    let q = interaction.len();
    let basis = linalg::rref(&interaction.conserved_basis(), q);
    let domain: Vec<Vec<LatticeVertex>> = lattice
        .fundamental_domain()
        .into_iter()
        .map(|b| vec![LatticeVertex::new(b, lattice.zero_cell())])
        .collect();
    let Some(first) = terms.iter().find(|t| t.support == domain[0]) else {
        return terms;
    };
    let lambda: Vec<Q> = basis
        .pivots
        .iter()
        .map(|&p| first.table.get(&vec![p as State]).cloned().unwrap_or_else(Q::zero))
        .collect();
    if lambda.iter().all(Q::is_zero) {
        return terms;
    }
    let xi: Vec<Q> = (0..q)
        .map(|s| lambda.iter().zip(&basis.rows).map(|(l, row)| l * &row[s]).sum())
        .collect();
    for support in domain {
        let idx = match terms.iter().position(|t| t.support == support) {
            Some(i) => i,
            None => {
                terms.push(OrbitTerm {
                    support,
                    table: BTreeMap::new(),
                });
                terms.len() - 1
            }
        };
        let table = &mut terms[idx].table;
        for (s, x) in xi.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let v = table.entry(vec![s as State]).or_insert_with(Q::zero);
            *v -= x;
            if v.is_zero() {
                table.remove(&vec![s as State]);
            }
        }
    }
    terms.retain(|t| !t.table.is_empty());
    terms.sort_by(|a, b| a.support.cmp(&b.support));
    terms
}

fn extract_term(g: &dyn LatticeFunction, support: &[LatticeVertex], q: usize) -> Result<OrbitTerm> {
    let m = support.len();
    let mut table = BTreeMap::new();
    let mut pattern = vec![0 as State; m];
    for code in 0..state_space_size(q - 1, m) as usize {
        decode(code, q - 1, &mut pattern);
        let states: Vec<State> = pattern.iter().map(|s| s + 1).collect();
        let mut acc = Q::zero();
        for mask in 0u64..(1 << m) {
            let eta = Configuration::from_sites(
                (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| (support[i].clone(), states[i])),
            );
            let v = g.eval(&eta)?;
            if (m - mask.count_ones() as usize).is_multiple_of(2) {
                acc += v;
            } else {
                acc -= v;
            }
        }
        if !acc.is_zero() {
            table.insert(states, acc);
        }
    }
    debug_assert_eq!(canonical_support(support).0, support);
    Ok(OrbitTerm {
        support: support.to_vec(),
        table,
    })
}

/// Recomputes `ω − ∂g − Σⱼ ∂𝔄ʲ_{ζⱼ}` on every transition of a small box around the origin.
fn box_certificate(
    form: &OrbitForm,
    g: &OrbitFunction,
    zetas: &[Vec<Q>],
) -> Result<(Cell, Cell, usize, Vec<CertificateEntry>)> {
    let lattice = form.lattice();
    let interaction = form.interaction();
    let d = lattice.rank();
    let q = interaction.len();
    let budget: u128 = 1 << 12;
    let mut side = 1i64;
    while state_space_size(q, ((side + 1).pow(d as u32) as usize) * lattice.cell_size()) <= budget && side < 5 {
        side += 1;
    }
    let lo = vec![-(side - 1) / 2; d];
    let hi: Cell = lo.iter().map(|x| x + side - 1).collect();
    let w = Window::new(lattice, lo.clone(), hi.clone())?;
    let size = state_space_size(q, w.len()) as usize;
    let dg = Differential { f: g, lattice, interaction };
    let a: Vec<AFunction> = zetas
        .iter()
        .enumerate()
        .map(|(j, z)| a_function(lattice, z, j))
        .collect::<Result<_>>()?;
    let da: Vec<Differential<'_>> = a
        .iter()
        .map(|a| Differential { f: a, lattice, interaction })
        .collect();
    let mut count = 0;
    let mut samples = Vec::new();
    let mut dense = vec![0; w.len()];
    for code in 0..size {
        decode(code, q, &mut dense);
        let eta = w.to_config(&dense);
        for e in w.edges() {
            if apply_edge(lattice, interaction, &eta, e) == eta {
                continue;
            }
            let omega = form.eval(&eta, e)?;
            let mut exact = dg.eval(&eta, e)?;
            for x in &da {
                exact += x.eval(&eta, e)?;
            }
            count += 1;
            let residual = &omega - &exact;
            let transition = Transition {
                config: eta.clone(),
                edge: e.clone(),
            };
            if !residual.is_zero() {
                return Err(Error::internal(format!(
                    "residual {} at {:?} along {:?}",
                    rational::format(&residual),
                    interaction.render(&dense),
                    transition.edge
                )));
            }
            if samples.len() < 8 && !omega.is_zero() {
                samples.push(CertificateEntry {
                    transition,
                    omega,
                    exact,
                    residual,
                });
            }
        }
    }
    Ok((lo, hi, count, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{euclidean, hexagonal};
    use crate::rational::{frac, int};

    fn term(support: Vec<LatticeVertex>, entries: &[(&[State], Q)]) -> OrbitTerm {
        OrbitTerm {
            support,
            table: entries.iter().map(|(k, v)| (k.to_vec(), v.clone())).collect(),
        }
    }

    fn v(b: usize, c: &[i64]) -> LatticeVertex {
        LatticeVertex::new(b, c.to_vec())
    }

    /// `∂(g − g₀) = 0` as orbit data.
    fn same_up_to_kernel(g: &OrbitFunction, g0: &OrbitFunction, interaction: &Interaction) -> bool {
        let mut terms: BTreeMap<Vec<LatticeVertex>, BTreeMap<Vec<State>, Q>> = BTreeMap::new();
        for t in g.terms() {
            terms.entry(t.support.clone()).or_default().extend(t.table.clone());
        }
        for t in g0.terms() {
            let e = terms.entry(t.support.clone()).or_default();
            for (k, x) in &t.table {
                *e.entry(k.clone()).or_insert_with(Q::zero) -= x;
            }
        }
        let diff = OrbitFunction::new(
            g.lattice(),
            terms
                .into_iter()
                .map(|(support, table)| OrbitTerm { support, table })
                .collect(),
        )
        .unwrap();
        let d = g.lattice().rank();
        OrbitForm::exact(&diff, &vec![vec![Q::zero(); interaction.len()]; d], interaction, 1 << 20)
            .unwrap()
            .is_zero()
    }

    #[test]
    fn zero_form_decomposes_to_zero() {
        let e2 = euclidean(2).unwrap();
        let ex = Interaction::exclusion();
        let r = decompose(&OrbitForm::zero(&e2, &ex), &DecomposeOptions::default()).unwrap();
        assert!(r.g.terms().is_empty());
        assert!(r.zetas.iter().flatten().all(Zero::is_zero));
        assert!(r.certificate.box_transitions > 0);
    }

    #[test]
    fn linear_growth_form_recovers_xi() {
        let e2 = euclidean(2).unwrap();
        let ex = Interaction::exclusion();
        let xi = vec![int(0), int(1)];
        let zetas = vec![xi.clone(), vec![int(0), int(0)]];
        let form = OrbitForm::exact(&OrbitFunction::zero(&e2), &zetas, &ex, 1 << 20).unwrap();
        let r = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.zetas, zetas);
        assert!(r.g.terms().is_empty());
    }

    #[test]
    fn exact_form_round_trip_on_euclidean_plane() {
        let e2 = euclidean(2).unwrap();
        let ex = Interaction::exclusion();
        let g0 = OrbitFunction::new(
            &e2,
            vec![
                term(vec![v(0, &[0, 0])], &[(&[1], int(3))]),
                term(vec![v(0, &[0, 0]), v(0, &[1, 0])], &[(&[1, 1], frac(2, 3))]),
                term(vec![v(0, &[0, 0]), v(0, &[0, 1])], &[(&[1, 1], int(-5))]),
            ],
        )
        .unwrap();
        let zero = vec![vec![int(0), int(0)]; 2];
        let form = OrbitForm::exact(&g0, &zero, &ex, 1 << 20).unwrap();
        let r = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.zetas, zero);
        assert!(same_up_to_kernel(&r.g, &g0, &ex));
        let json = serde_json::to_string(&r.to_json(&ex)).unwrap();
        let again = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(json, serde_json::to_string(&again.to_json(&ex)).unwrap());
    }

    #[test]
    fn mixed_form_on_euclidean_line() {
        let e1 = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let g0 = OrbitFunction::new(
            &e1,
            vec![term(vec![v(0, &[0]), v(0, &[1])], &[(&[1, 1], int(4))])],
        )
        .unwrap();
        let zetas = vec![vec![int(0), frac(-7, 2)]];
        let form = OrbitForm::exact(&g0, &zetas, &ex, 1 << 20).unwrap();
        let r = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.zetas, zetas);
        assert!(same_up_to_kernel(&r.g, &g0, &ex));
        let rebuilt = OrbitForm::exact(&r.g, &r.zetas, &ex, 1 << 20).unwrap();
        assert_eq!(decompose(&rebuilt, &DecomposeOptions::default()).unwrap().zetas, zetas);
    }

    #[test]
    fn hexagonal_round_trip() {
        let hex = hexagonal();
        let ex = Interaction::exclusion();
        let g0 = OrbitFunction::new(
            &hex,
            vec![
                term(vec![v(1, &[0, 0])], &[(&[1], int(2))]),
                term(vec![v(0, &[0, 0]), v(1, &[0, 0])], &[(&[1, 1], int(1))]),
            ],
        )
        .unwrap();
        let zetas = vec![vec![int(0), int(1)], vec![int(0), int(-2)]];
        let form = OrbitForm::exact(&g0, &zetas, &ex, 1 << 20).unwrap();
        let r = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.zetas, zetas);
        assert!(same_up_to_kernel(&r.g, &g0, &ex));
        assert_eq!(r.provenance.fundamental_domain, vec![v(0, &[0, 0]), v(1, &[0, 0])]);
    }

    #[test]
    fn two_species_round_trip() {
        let e2 = euclidean(2).unwrap();
        let ts = Interaction::two_species_exclusion();
        let g0 = OrbitFunction::new(
            &e2,
            vec![term(
                vec![v(0, &[0, 0]), v(0, &[1, 0])],
                &[(&[1, 2], int(1)), (&[2, 2], frac(1, 2))],
            )],
        )
        .unwrap();
        let zetas = vec![vec![int(0), int(1), int(2)], vec![int(0), int(0), int(-1)]];
        let form = OrbitForm::exact(&g0, &zetas, &ts, 1 << 20).unwrap();
        let r = decompose(&form, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.zetas, zetas);
        assert!(same_up_to_kernel(&r.g, &g0, &ts));
    }

    #[test]
    fn non_closed_form_is_rejected() {
        // a forward jump earns 1 when the site behind the jumper is occupied
        let e1 = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let fwd = (0..2).find(|&e| e1.translation(e) == [1]).unwrap();
        let mut orbits = vec![
            crate::calculus::EdgeOrbit {
                sites: vec![],
                values: BTreeMap::new(),
            };
            2
        ];
        orbits[fwd] = crate::calculus::EdgeOrbit {
            sites: vec![v(0, &[-1]), v(0, &[0]), v(0, &[1])],
            values: [(vec![1, 1, 0], int(1))].into_iter().collect(),
        };
        orbits[1 - fwd] = crate::calculus::EdgeOrbit {
            sites: vec![v(0, &[-2]), v(0, &[-1]), v(0, &[0])],
            values: [(vec![1, 0, 1], int(-1))].into_iter().collect(),
        };
        let form = OrbitForm::new(&e1, &ex, 2, orbits, 1 << 20).unwrap();
        let err = decompose(&form, &DecomposeOptions::default()).unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("not closed")), "{err}");
    }

    #[test]
    fn small_user_window_is_inconclusive() {
        let e1 = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let opts = DecomposeOptions {
            window: Some(vec![5]),
            ..DecomposeOptions::default()
        };
        let err = decompose(&OrbitForm::zero(&e1, &ex), &opts).unwrap_err();
        assert!(matches!(err, Error::Inconclusive(_)), "{err}");
    }

    #[test]
    fn reducible_interaction_is_rejected() {
        let e2 = euclidean(2).unwrap();
        let id = Interaction::identity(2);
        let err = decompose(&OrbitForm::zero(&e2, &id), &DecomposeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }
}
