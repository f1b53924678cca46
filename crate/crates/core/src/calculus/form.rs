use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::function::pattern_config;
use super::{LatticeForm, LatticeFunction, OrbitFunction};
use crate::configspace::{apply_edge, Configuration, ConfigurationJson, Transition};
use crate::crystal::{unit, LatticeEdge, LatticeVertex, PeriodicLattice, Window};
use crate::interaction::{decode, state_space_size, Interaction, State};
use crate::rational;
use crate::{Error, Result, Q};

/// `∂f = (∇_e f)_e` with `∇_e f(η) = f(η^e) − f(η)`.
pub struct Differential<'a> {
    pub f: &'a dyn LatticeFunction,
    pub lattice: &'a PeriodicLattice,
    pub interaction: &'a Interaction,
}

impl LatticeForm for Differential<'_> {
    fn eval(&self, eta: &Configuration, e: &LatticeEdge) -> Result<Q> {
        let next = apply_edge(self.lattice, self.interaction, eta, e);
        if &next == eta {
            return Ok(Q::zero());
        }
        Ok(self.f.eval(&next)? - self.f.eval(eta)?)
    }
}

/// `∫_γ ω = Σ_i ω(φ_i)` along a composable path.
pub fn integrate(
    form: &dyn LatticeForm,
    lattice: &PeriodicLattice,
    interaction: &Interaction,
    path: &[Transition],
) -> Result<Q> {
    let mut acc = Q::zero();
    for (i, t) in path.iter().enumerate() {
        if i > 0 {
            let prev = path[i - 1].target(lattice, interaction);
            if prev != t.config {
                return Err(Error::input(format!("transition {i} does not start where transition {} ends", i - 1)));
            }
        }
        acc += form.eval(&t.config, &t.edge)?;
    }
    Ok(acc)
}

/// A transition at which the alternating condition fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternationViolation {
    pub transition: Transition,
    pub value: Q,
    /// `ω(ι(φ))`, or `None` when `φ` is a fixed transition (where `ω` must vanish).
    pub reverse_value: Option<Q>,
}

fn each_window_config(window: &Window, interaction: &Interaction, cap: u128, mut visit: impl FnMut(&[State]) -> Result<()>) -> Result<()> {
    let q = interaction.len();
    let size = state_space_size(q, window.len());
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut buf = vec![0; window.len()];
    for code in 0..size as usize {
        decode(code, q, &mut buf);
        visit(&buf)?;
    }
    Ok(())
}

/// Checks `ω_e(η) = −ω_ē(η^e)` (or `0` on fixed transitions) on every transition of
/// every configuration supported in the window.
pub fn alternation_scan(
    form: &dyn LatticeForm,
    window: &Window,
    interaction: &Interaction,
    cap: u128,
) -> Result<Vec<AlternationViolation>> {
    let lattice = window.lattice();
    let mut out = Vec::new();
    each_window_config(window, interaction, cap, |dense| {
        let eta = window.to_config(dense);
        for e in window.edges() {
            let v = form.eval(&eta, e)?;
            let next = apply_edge(lattice, interaction, &eta, e);
            let transition = || Transition {
                config: eta.clone(),
                edge: e.clone(),
            };
            if next == eta {
                if !v.is_zero() {
                    out.push(AlternationViolation {
                        transition: transition(),
                        value: v,
                        reverse_value: None,
                    });
                }
            } else {
                let w = form.eval(&next, &lattice.inverse(e))?;
                if &v + &w != Q::zero() {
                    out.push(AlternationViolation {
                        transition: transition(),
                        value: v,
                        reverse_value: Some(w),
                    });
                }
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Outcome of a shift-invariance check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftInvariance {
    pub invariant: bool,
    /// `(φ, j, ω(φ), ω(σ_j φ))` for the first failure.
    pub witness: Option<(Transition, usize, Q, Q)>,
    pub checked: usize,
}

/// Checks `ω_{σe}(ση) = ω_e(η)` for every generator and every window transition.
pub fn is_shift_invariant(
    form: &dyn LatticeForm,
    window: &Window,
    interaction: &Interaction,
    cap: u128,
) -> Result<ShiftInvariance> {
    let lattice = window.lattice();
    if window.edges().is_empty() {
        return Err(Error::inconclusive("window has no transitions to compare"));
    }
    let d = lattice.rank();
    let mut checked = 0;
    let mut witness = None;
    each_window_config(window, interaction, cap, |dense| {
        if witness.is_some() {
            return Ok(());
        }
        let eta = window.to_config(dense);
        for e in window.edges() {
            let v = form.eval(&eta, e)?;
            for j in 0..d {
                let s = unit(d, j, 1);
                let shifted = LatticeEdge {
                    seed_edge: e.seed_edge,
                    cell: crate::crystal::cell_add(&e.cell, &s),
                };
                let w = form.eval(&eta.translated(&s), &shifted)?;
                checked += 1;
                if v != w {
                    witness = Some((
                        Transition {
                            config: eta.clone(),
                            edge: e.clone(),
                        },
                        j,
                        v.clone(),
                        w,
                    ));
                    return Ok(());
                }
            }
        }
        Ok(())
    })?;
    Ok(ShiftInvariance {
        invariant: witness.is_none(),
        witness,
        checked,
    })
}

/// The data of one edge orbit: `ω_e` as a function of the states on `sites`
/// (cell-0 frame), extended to `(e, c)` by translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeOrbit {
    pub sites: Vec<LatticeVertex>,
    pub values: BTreeMap<Vec<State>, Q>,
}

/// A shift-invariant `R`-uniform form stored by edge-orbit data.
#[derive(Clone, Debug)]
pub struct OrbitForm {
    lattice: PeriodicLattice,
    interaction: Interaction,
    radius: usize,
    orbits: Vec<EdgeOrbit>,
}

impl OrbitForm {
    /// Validates `R`-uniformity and the alternating condition.
    pub fn new(
        lattice: &PeriodicLattice,
        interaction: &Interaction,
        radius: usize,
        orbits: Vec<EdgeOrbit>,
        cap: u128,
    ) -> Result<Self> {
        let seed = lattice.seed();
        if orbits.len() != seed.edge_count() {
            return Err(Error::input(format!(
                "form has {} edge orbits, the seed has {} edges",
                orbits.len(),
                seed.edge_count()
            )));
        }
        for (e, orbit) in orbits.iter().enumerate() {
            let edge = LatticeEdge {
                seed_edge: e,
                cell: lattice.zero_cell(),
            };
            let o = lattice.origin(&edge);
            let ball: BTreeSet<LatticeVertex> = lattice.graph_ball(&o, radius).into_iter().collect();
            let distinct: BTreeSet<&LatticeVertex> = orbit.sites.iter().collect();
            if distinct.len() != orbit.sites.len() {
                return Err(Error::input(format!("edge orbit {e} lists a site twice")));
            }
            for v in &orbit.sites {
                lattice.check_vertex(v)?;
                if !ball.contains(v) {
                    return Err(Error::validation(format!(
                        "edge orbit {e} depends on {v}, outside the radius-{radius} ball of its origin"
                    )));
                }
            }
            if !distinct.contains(&o) || !distinct.contains(&lattice.target(&edge)) {
                return Err(Error::input(format!("edge orbit {e} must include both endpoints of the edge")));
            }
            if let Some(k) = orbit.values.keys().find(|k| {
                k.len() != orbit.sites.len() || k.iter().any(|&s| s as usize >= interaction.len())
            }) {
                return Err(Error::input(format!("edge orbit {e} has malformed pattern {k:?}")));
            }
        }
        let orbits = orbits
            .into_iter()
            .map(|o| EdgeOrbit {
                sites: o.sites,
                values: o.values.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
            })
            .collect();
        let form = OrbitForm {
            lattice: lattice.clone(),
            interaction: interaction.clone(),
            radius,
            orbits,
        };
        if let Some(v) = form.alternation_violations(cap)?.into_iter().next() {
            return Err(Error::validation(format!(
                "form is not alternating at edge {:?} from {:?}: value {} against reverse {}",
                v.transition.edge,
                v.transition.config,
                rational::format(&v.value),
                v.reverse_value.as_ref().map(rational::format).unwrap_or_else(|| "fixed".into())
            )));
        }
        Ok(form)
    }

    pub fn zero(lattice: &PeriodicLattice, interaction: &Interaction) -> Self {
        let orbits = (0..lattice.seed().edge_count())
            .map(|e| {
                let edge = LatticeEdge {
                    seed_edge: e,
                    cell: lattice.zero_cell(),
                };
                let mut sites = vec![lattice.origin(&edge), lattice.target(&edge)];
                sites.sort();
                EdgeOrbit {
                    sites,
                    values: BTreeMap::new(),
                }
            })
            .collect();
        OrbitForm {
            lattice: lattice.clone(),
            interaction: interaction.clone(),
            radius: 1,
            orbits,
        }
    }

    /// `∂g + Σ_j ∂𝔄^j_{ζ_j}` for a shift-invariant `g` and state functions `ζ_j`.
    pub fn exact(g: &OrbitFunction, zetas: &[Vec<Q>], interaction: &Interaction, cap: u128) -> Result<Self> {
        let lattice = g.lattice();
        let q = interaction.len();
        let mut orbits = Vec::new();
        let mut radius = 1;
        for e in 0..lattice.seed().edge_count() {
            let edge = LatticeEdge {
                seed_edge: e,
                cell: lattice.zero_cell(),
            };
            let (o, t) = (lattice.origin(&edge), lattice.target(&edge));
            let sites: Vec<LatticeVertex> = g.dependency(&[o.clone(), t.clone()]).into_iter().collect();
            for v in &sites {
                radius = radius.max(lattice.graph_distance(&o, v));
            }
            let size = state_space_size(q, sites.len());
            if size > cap {
                return Err(Error::CapExceeded { size, cap });
            }
            let tau = lattice.translation(e).to_vec();
            let mut values = BTreeMap::new();
            let mut buf = vec![0; sites.len()];
            for code in 0..size as usize {
                decode(code, q, &mut buf);
                let eta = pattern_config(&sites, &buf);
                let next = apply_edge(lattice, interaction, &eta, &edge);
                if next == eta {
                    continue;
                }
                let mut v = g.eval(&next)? - g.eval(&eta)?;
                for (j, zeta) in zetas.iter().enumerate() {
                    if tau[j] != 0 {
                        let dz = &zeta[next.get(&t) as usize] - &zeta[eta.get(&t) as usize];
                        v += Q::from_integer(tau[j].into()) * dz;
                    }
                }
                if !v.is_zero() {
                    values.insert(buf.clone(), v);
                }
            }
            orbits.push(EdgeOrbit { sites, values });
        }
        OrbitForm::new(lattice, interaction, radius, orbits, cap)
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Smallest `R` with every orbit depending only on `B(o(e), R)`.
    pub fn effective_radius(&self) -> usize {
        let mut r = 0;
        for (e, orbit) in self.orbits.iter().enumerate() {
            if orbit.values.is_empty() {
                continue;
            }
            let o = self.lattice.origin(&LatticeEdge {
                seed_edge: e,
                cell: self.lattice.zero_cell(),
            });
            for v in &orbit.sites {
                r = r.max(self.lattice.graph_distance(&o, v));
            }
        }
        r
    }

    pub fn orbits(&self) -> &[EdgeOrbit] {
        &self.orbits
    }

    pub fn is_zero(&self) -> bool {
        self.orbits.iter().all(|o| o.values.is_empty())
    }

    fn key(&self, eta: &Configuration, e: &LatticeEdge) -> Vec<State> {
        self.orbits[e.seed_edge]
            .sites
            .iter()
            .map(|v| eta.get(&v.translated(&e.cell)))
            .collect()
    }

    /// Alternation check over every completion of each stored pattern.
    pub fn alternation_violations(&self, cap: u128) -> Result<Vec<AlternationViolation>> {
        let q = self.interaction.len();
        let mut out = Vec::new();
        for (e, orbit) in self.orbits.iter().enumerate() {
            let edge = LatticeEdge {
                seed_edge: e,
                cell: self.lattice.zero_cell(),
            };
            let inv = self.lattice.inverse(&edge);
            let own: BTreeSet<&LatticeVertex> = orbit.sites.iter().collect();
            let free: Vec<LatticeVertex> = self.orbits[inv.seed_edge]
                .sites
                .iter()
                .map(|v| v.translated(&inv.cell))
                .filter(|v| !own.contains(v))
                .collect();
            let size = state_space_size(q, free.len());
            if size > cap {
                return Err(Error::CapExceeded { size, cap });
            }
            let mut buf = vec![0; free.len()];
            for (pattern, v) in &orbit.values {
                for code in 0..size as usize {
                    decode(code, q, &mut buf);
                    let eta = Configuration::from_sites(
                        orbit
                            .sites
                            .iter()
                            .cloned()
                            .zip(pattern.iter().copied())
                            .chain(free.iter().cloned().zip(buf.iter().copied())),
                    );
                    let next = apply_edge(&self.lattice, &self.interaction, &eta, &edge);
                    let transition = Transition {
                        config: eta.clone(),
                        edge: edge.clone(),
                    };
                    if next == eta {
                        out.push(AlternationViolation {
                            transition,
                            value: v.clone(),
                            reverse_value: None,
                        });
                        break;
                    }
                    let w = self.value(&next, &inv);
                    if v + &w != Q::zero() {
                        out.push(AlternationViolation {
                            transition,
                            value: v.clone(),
                            reverse_value: Some(w),
                        });
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn value(&self, eta: &Configuration, e: &LatticeEdge) -> Q {
        self.orbits[e.seed_edge]
            .values
            .get(&self.key(eta, e))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Compares two forms on every pattern of the union of their orbit supports, which
    /// decides equality on all transitions of the lattice. Returns the number of
    /// patterns compared and the first transition where the values differ.
    pub fn compare(&self, other: &OrbitForm, cap: u128) -> Result<(usize, Option<(Transition, Q, Q)>)> {
        if self.lattice != other.lattice || self.interaction != other.interaction {
            return Err(Error::input("forms live on different configuration spaces"));
        }
        let q = self.interaction.len();
        let mut count = 0;
        for (e, (a, b)) in self.orbits.iter().zip(&other.orbits).enumerate() {
            let sites: Vec<LatticeVertex> = a
                .sites
                .iter()
                .chain(&b.sites)
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let size = state_space_size(q, sites.len());
            if size > cap {
                return Err(Error::CapExceeded { size, cap });
            }
            let edge = LatticeEdge {
                seed_edge: e,
                cell: self.lattice.zero_cell(),
            };
            let mut buf = vec![0; sites.len()];
            for code in 0..size as usize {
                decode(code, q, &mut buf);
                let eta = pattern_config(&sites, &buf);
                let (x, y) = (self.value(&eta, &edge), other.value(&eta, &edge));
                count += 1;
                if x != y {
                    return Ok((count, Some((Transition { config: eta, edge }, x, y))));
                }
            }
        }
        Ok((count, None))
    }

    /// Precomputes window indices of every orbit site for fast dense evaluation.
    pub fn compile<'a>(&'a self, window: &Window) -> CompiledForm<'a> {
        let edges = window
            .edges()
            .iter()
            .map(|e| {
                let idx = self.orbits[e.seed_edge]
                    .sites
                    .iter()
                    .map(|v| window.index(&v.translated(&e.cell)))
                    .collect();
                (e.seed_edge, idx)
            })
            .collect();
        CompiledForm { form: self, edges }
    }

    pub fn to_json(&self) -> OrbitFormJson {
        OrbitFormJson {
            radius: self.radius,
            orbit_data: self
                .orbits
                .iter()
                .enumerate()
                .map(|(e, o)| EdgeOrbitJson {
                    edge_orbit: e,
                    support: Some(o.sites.clone()),
                    entries: o
                        .values
                        .iter()
                        .map(|(k, v)| FormEntryJson {
                            pattern: pattern_config(&o.sites, k).to_json(&self.interaction),
                            value: v.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &OrbitFormJson, lattice: &PeriodicLattice, interaction: &Interaction, cap: u128) -> Result<Self> {
        let mut orbits: Vec<Option<EdgeOrbit>> = vec![None; lattice.seed().edge_count()];
        for data in &j.orbit_data {
            let e = data.edge_orbit;
            if e >= orbits.len() {
                return Err(Error::input(format!("edge orbit {e} does not exist in the seed")));
            }
            if orbits[e].is_some() {
                return Err(Error::input(format!("edge orbit {e} listed twice")));
            }
            let edge = LatticeEdge {
                seed_edge: e,
                cell: lattice.zero_cell(),
            };
            let sites = match &data.support {
                Some(s) => s.clone(),
                None => lattice.graph_ball(&lattice.origin(&edge), j.radius),
            };
            let index: BTreeMap<&LatticeVertex, usize> = sites.iter().enumerate().map(|(i, v)| (v, i)).collect();
            let mut values = BTreeMap::new();
            for entry in &data.entries {
                let pattern = Configuration::from_json(&entry.pattern, lattice, interaction)?;
                let mut key = vec![Interaction::BASE; sites.len()];
                for (v, s) in pattern.support() {
                    let i = index.get(v).ok_or_else(|| {
                        Error::validation(format!("pattern site {v} of edge orbit {e} is outside its support"))
                    })?;
                    key[*i] = s;
                }
                if values.insert(key, entry.value.clone()).is_some() {
                    return Err(Error::input(format!("edge orbit {e} lists a pattern twice")));
                }
            }
            orbits[e] = Some(EdgeOrbit { sites, values });
        }
        let zero = OrbitForm::zero(lattice, interaction);
        let orbits = orbits
            .into_iter()
            .enumerate()
            .map(|(e, o)| o.unwrap_or_else(|| zero.orbits[e].clone()))
            .collect();
        OrbitForm::new(lattice, interaction, j.radius, orbits, cap)
    }
}

impl LatticeForm for OrbitForm {
    fn eval(&self, eta: &Configuration, e: &LatticeEdge) -> Result<Q> {
        Ok(self.value(eta, e))
    }
}

/// An [`OrbitForm`] bound to a window for evaluation on dense configurations.
pub struct CompiledForm<'a> {
    form: &'a OrbitForm,
    edges: Vec<(usize, Vec<Option<usize>>)>,
}

impl CompiledForm<'_> {
    pub fn eval(&self, dense: &[State], window_edge: usize) -> Q {
        let (seed, idx) = &self.edges[window_edge];
        let key: Vec<State> = idx
            .iter()
            .map(|i| i.map_or(Interaction::BASE, |i| dense[i]))
            .collect();
        self.form.orbits[*seed].values.get(&key).cloned().unwrap_or_else(Q::zero)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FormEntryJson {
    pub pattern: ConfigurationJson,
    #[serde(with = "rational")]
    pub value: Q,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeOrbitJson {
    pub edge_orbit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<LatticeVertex>>,
    pub entries: Vec<FormEntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OrbitFormJson {
    pub radius: usize,
    pub orbit_data: Vec<EdgeOrbitJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{ConservedFunction, LocalFunction, OrbitTerm};
    use crate::crystal::{euclidean, hexagonal};
    use crate::rational::{frac, int};

    fn v(c: &[i64]) -> LatticeVertex {
        LatticeVertex::new(0, c.to_vec())
    }

    fn pair_energy(l: &PeriodicLattice) -> OrbitFunction {
        let d = l.rank();
        let mut terms = vec![OrbitTerm {
            support: vec![v(&vec![0; d])],
            table: BTreeMap::from([(vec![1], frac(3, 2))]),
        }];
        for j in 0..d {
            terms.push(OrbitTerm {
                support: vec![v(&vec![0; d]), v(&unit(d, j, 1))],
                table: BTreeMap::from([(vec![1, 1], int(j as i64 + 2))]),
            });
        }
        OrbitFunction::new(l, terms).unwrap()
    }

    #[test]
    fn differential_of_conserved_is_zero() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let xi = ConservedFunction {
            values: vec![int(0), int(1)],
        };
        let d = Differential {
            f: &xi,
            lattice: &l,
            interaction: &ex,
        };
        let w = Window::sized(&l, &[4]).unwrap();
        let mut all_zero = true;
        each_window_config(&w, &ex, 1000, |dense| {
            let eta = w.to_config(dense);
            for e in w.edges() {
                all_zero &= d.eval(&eta, e)?.is_zero();
            }
            Ok(())
        })
        .unwrap();
        assert!(all_zero);
        assert!(alternation_scan(&d, &w, &ex, 1000).unwrap().is_empty());
    }

    #[test]
    fn single_site_gradient() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let f = LocalFunction::from_fn(vec![v(&[0])], 2, 10, |s| int(s[0] as i64)).unwrap();
        let d = Differential {
            f: &f,
            lattice: &l,
            interaction: &ex,
        };
        let into = LatticeEdge {
            seed_edge: 0,
            cell: vec![-1],
        };
        let eta = Configuration::single(v(&[-1]), 1);
        assert_eq!(d.eval(&eta, &into).unwrap(), int(1));
        let out = LatticeEdge {
            seed_edge: 0,
            cell: vec![0],
        };
        assert_eq!(d.eval(&Configuration::single(v(&[0]), 1), &out).unwrap(), int(-1));
        let w = Window::sized(&l, &[3]).unwrap();
        let inv = is_shift_invariant(&d, &w, &ex, 1000).unwrap();
        assert!(!inv.invariant);
        assert!(inv.witness.is_some());
    }

    #[test]
    fn integrals_telescope() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let g = pair_energy(&l);
        let d = Differential {
            f: &g,
            lattice: &l,
            interaction: &ex,
        };
        assert_eq!(integrate(&d, &l, &ex, &[]).unwrap(), int(0));
        let mut path = Vec::new();
        let mut eta = Configuration::from_sites([(v(&[0]), 1), (v(&[2]), 1)]);
        let start = eta.clone();
        for c in [0, 2, 1, 3] {
            let e = LatticeEdge {
                seed_edge: 0,
                cell: vec![c],
            };
            path.push(Transition {
                config: eta.clone(),
                edge: e.clone(),
            });
            eta = apply_edge(&l, &ex, &eta, &e);
        }
        let total = integrate(&d, &l, &ex, &path).unwrap();
        assert_eq!(total, g.eval(&eta).unwrap() - g.eval(&start).unwrap());
        let mut back: Vec<Transition> = path
            .iter()
            .rev()
            .map(|t| crate::configspace::invert_transition(&l, &ex, t))
            .collect();
        let mut round = path.clone();
        round.append(&mut back);
        assert_eq!(integrate(&d, &l, &ex, &round).unwrap(), int(0));
        let broken = vec![path[0].clone(), path[2].clone()];
        assert!(integrate(&d, &l, &ex, &broken).is_err());
    }

    #[test]
    fn orbit_form_matches_differential() {
        for l in [euclidean(1).unwrap(), euclidean(2).unwrap(), hexagonal()] {
            let ex = Interaction::exclusion();
            let g = if l.cell_size() == 1 { pair_energy(&l) } else { hex_energy(&l) };
            let zetas: Vec<Vec<Q>> = (0..l.rank()).map(|j| vec![int(0), frac(j as i64 + 1, 3)]).collect();
            let form = OrbitForm::exact(&g, &zetas, &ex, 1 << 20).unwrap();
            let d = Differential {
                f: &g,
                lattice: &l,
                interaction: &ex,
            };
            let sizes = vec![if l.cell_size() == 1 { 3 } else { 2 }; l.rank()];
            let w = Window::sized(&l, &sizes).unwrap();
            each_window_config(&w, &ex, 1 << 12, |dense| {
                let eta = w.to_config(dense);
                for e in w.edges() {
                    let next = apply_edge(&l, &ex, &eta, e);
                    let mut expect = d.eval(&eta, e)?;
                    let tau = l.translation(e.seed_edge);
                    let t = l.target(e);
                    for (j, z) in zetas.iter().enumerate() {
                        expect += Q::from_integer(tau[j].into()) * (&z[next.get(&t) as usize] - &z[eta.get(&t) as usize]);
                    }
                    assert_eq!(form.eval(&eta, e)?, expect);
                }
                Ok(())
            })
            .unwrap();
            assert!(alternation_scan(&form, &w, &ex, 1 << 12).unwrap().is_empty());
            assert!(is_shift_invariant(&form, &w, &ex, 1 << 12).unwrap().invariant);
            let back = OrbitForm::from_json(&form.to_json(), &l, &ex, 1 << 20).unwrap();
            assert_eq!(back.orbits(), form.orbits());
        }
    }

    fn hex_energy(l: &PeriodicLattice) -> OrbitFunction {
        let terms = vec![
            OrbitTerm {
                support: vec![LatticeVertex::new(1, vec![0, 0])],
                table: BTreeMap::from([(vec![1], int(-1))]),
            },
            OrbitTerm {
                support: vec![LatticeVertex::new(0, vec![0, 0]), LatticeVertex::new(1, vec![0, 0])],
                table: BTreeMap::from([(vec![1, 1], frac(5, 7))]),
            },
        ];
        OrbitFunction::new(l, terms).unwrap()
    }

    #[test]
    fn non_alternating_data_rejected() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let mut orbits = OrbitForm::zero(&l, &ex).orbits().to_vec();
        // particle hops right with weight 1 but nothing on the way back
        let sites = orbits[0].sites.clone();
        let key: Vec<State> = sites.iter().map(|s| if s.cell == [0] { 1 } else { 0 }).collect();
        orbits[0].values.insert(key, int(1));
        assert!(OrbitForm::new(&l, &ex, 1, orbits.clone(), 1000).is_err());
        // nonzero on a fixed transition
        let mut fixed = OrbitForm::zero(&l, &ex).orbits().to_vec();
        fixed[0].values.insert(vec![1, 1], int(1));
        assert!(OrbitForm::new(&l, &ex, 1, fixed, 1000).is_err());
    }
}
