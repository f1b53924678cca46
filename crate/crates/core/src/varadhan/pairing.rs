use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::LatticeFunction;
use crate::configspace::{lex_least, Configuration};
use crate::crystal::{box_cells, cell_add, cell_sub, l1, unit, Cell, LatticeVertex, PeriodicLattice};
use crate::interaction::{Charge, ChargeCatalog, Interaction};
use crate::{rational, Error, Result, Q};

/// Two ℓ¹ cell balls `D₁ = 𝔅(first, radius)`, `D₂ = 𝔅(second, radius)` in block coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BallPair {
    pub radius: usize,
    pub first: Cell,
    pub second: Cell,
}

impl BallPair {
    /// Balls centred at `∓(2s+2k+2)·e₁` for separation `s` and radius `k`.
    pub fn canonical(d: usize, k: usize, separation: usize) -> Self {
        let m = (2 * separation + 2 * k + 2) as i64;
        BallPair {
            radius: k,
            first: unit(d, 0, -m),
            second: unit(d, 0, m),
        }
    }

    /// The canonical pair followed by further admissible pairs inside [`Self::required_box`].
    pub fn family(d: usize, k: usize, separation: usize) -> Vec<Self> {
        let c = Self::canonical(d, k, separation);
        let zero = vec![0; d];
        let mut out = vec![
            c.clone(),
            BallPair {
                radius: k,
                first: c.first.clone(),
                second: zero.clone(),
            },
            BallPair {
                radius: k,
                first: zero,
                second: c.second.clone(),
            },
            BallPair {
                radius: k,
                first: cell_add(&c.first, &unit(d, 0, 1)),
                second: c.second.clone(),
            },
        ];
        if d > 1 {
            out.push(BallPair {
                radius: k,
                first: c.first.clone(),
                second: cell_add(&cell_add(&c.second, &unit(d, 0, -1)), &unit(d, 1, 1)),
            });
        }
        out
    }

    /// Cells `(lo, hi)` of a box containing every pair of [`Self::family`].
    pub fn required_box(d: usize, k: usize, separation: usize) -> (Cell, Cell) {
        let m = (2 * separation + 3 * k + 2) as i64;
        let side = k as i64 + 1;
        let lo = (0..d).map(|j| if j == 0 { -m } else { -side }).collect();
        let hi = (0..d).map(|j| if j == 0 { m } else { side }).collect();
        (lo, hi)
    }

    /// ℓ¹ gap between the balls.
    pub fn gap(&self) -> i64 {
        l1(&cell_sub(&self.first, &self.second)) - 2 * self.radius as i64
    }

    pub fn admissible(&self, separation: usize) -> bool {
        self.gap() > separation as i64
    }

    pub fn balls(&self, lattice: &PeriodicLattice) -> (Vec<LatticeVertex>, Vec<LatticeVertex>) {
        (l1_ball(lattice, &self.first, self.radius), l1_ball(lattice, &self.second, self.radius))
    }

    pub fn swapped(&self) -> Self {
        BallPair {
            radius: self.radius,
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// Vertices of all cells within ℓ¹ distance `r` of `center`, sorted.
pub fn l1_ball(lattice: &PeriodicLattice, center: &[i64], r: usize) -> Vec<LatticeVertex> {
    let r = r as i64;
    let lo: Cell = center.iter().map(|c| c - r).collect();
    let hi: Cell = center.iter().map(|c| c + r).collect();
    let mut out: Vec<LatticeVertex> = box_cells(&lo, &hi)
        .into_iter()
        .filter(|c| l1(&cell_sub(c, center)) <= r)
        .flat_map(|c| (0..lattice.cell_size()).map(move |b| LatticeVertex::new(b, c.clone())))
        .collect();
    out.sort();
    out
}

/// Smallest ball radius whose ℓ¹ cell ball holds at least `sites` vertices.
pub fn radius_for(lattice: &PeriodicLattice, sites: usize) -> usize {
    let d = lattice.rank();
    (0..)
        .find(|&r| l1_ball(lattice, &vec![0; d], r).len() >= sites)
        .expect("balls grow without bound")
}

/// `max_e ‖τ(e)‖₁`: graph distance `≤ R` implies ℓ¹ cell distance `≤ R·T`.
pub fn translation_norm(lattice: &PeriodicLattice) -> usize {
    lattice.translations().iter().map(|t| l1(t) as usize).max().unwrap_or(0).max(1)
}

/// `true` iff every vertex of `b` is at graph distance `> r` from `a`.
pub fn graph_separated(lattice: &PeriodicLattice, a: &[LatticeVertex], b: &[LatticeVertex], r: usize) -> bool {
    let targets: HashSet<&LatticeVertex> = b.iter().collect();
    let mut dist: BTreeMap<LatticeVertex, usize> = a.iter().map(|v| (v.clone(), 0)).collect();
    let mut queue: VecDeque<LatticeVertex> = a.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        if targets.contains(&v) {
            return false;
        }
        let dv = dist[&v];
        if dv == r {
            continue;
        }
        for w in lattice.neighbors(&v) {
            if !dist.contains_key(&w) {
                dist.insert(w.clone(), dv + 1);
                queue.push_back(w);
            }
        }
    }
    true
}

/// `ι^{Λ₁∪Λ₂}f(η) − ι^{Λ₁}f(η) − ι^{Λ₂}f(η)` for `Λ₁, Λ₂` at graph distance `> r`.
pub fn pairing_local(
    f: &dyn LatticeFunction,
    lattice: &PeriodicLattice,
    l1_set: &[LatticeVertex],
    l2_set: &[LatticeVertex],
    eta: &Configuration,
    r: usize,
) -> Result<Q> {
    if !graph_separated(lattice, l1_set, l2_set, r) {
        return Err(Error::validation(format!("regions are within graph distance {r} of each other")));
    }
    let a: BTreeSet<&LatticeVertex> = l1_set.iter().collect();
    let b: BTreeSet<&LatticeVertex> = l2_set.iter().collect();
    let both = eta.restrict(|v| a.contains(v) || b.contains(v));
    let first = eta.restrict(|v| a.contains(v));
    let second = eta.restrict(|v| b.contains(v));
    Ok(f.eval(&both)? - f.eval(&first)? - f.eval(&second)?)
}

/// A configuration on `sites` (in order) with charge `alpha`, packed at the end.
pub fn realize(
    interaction: &Interaction,
    catalog: &ChargeCatalog,
    sites: &[LatticeVertex],
    alpha: &Charge,
) -> Result<Configuration> {
    let states = lex_least(interaction, catalog, sites.len(), alpha).ok_or_else(|| {
        Error::inconclusive(format!("charge {} is not realizable on {} sites", show_charge(alpha), sites.len()))
    })?;
    Ok(Configuration::from_sites(sites.iter().cloned().zip(states)))
}

/// `h_f(α, β)` via the given ball pair.
pub fn pairing(
    f: &dyn LatticeFunction,
    lattice: &PeriodicLattice,
    interaction: &Interaction,
    catalog: &ChargeCatalog,
    pair: &BallPair,
    alpha: &Charge,
    beta: &Charge,
) -> Result<Q> {
    let (d1, d2) = pair.balls(lattice);
    let a = realize(interaction, catalog, &d1, alpha)?;
    let b = realize(interaction, catalog, &d2, beta)?;
    let mut both = a.clone();
    for (v, s) in b.support() {
        both.set(v.clone(), s);
    }
    Ok(f.eval(&both)? - f.eval(&a)? - f.eval(&b)?)
}

/// Sampled pairing values with the ball pair used for each entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingTable {
    pub pairs: Vec<BallPair>,
    pub entries: BTreeMap<(Charge, Charge), (Q, usize)>,
}

impl PairingTable {
    pub fn value(&self, alpha: &Charge, beta: &Charge) -> Option<&Q> {
        self.entries.get(&(alpha.clone(), beta.clone())).map(|(v, _)| v)
    }

    pub fn values(&self) -> BTreeMap<(Charge, Charge), Q> {
        self.entries.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect()
    }

    pub fn to_json(&self) -> PairingTableJson {
        PairingTableJson {
            pairs: self.pairs.clone(),
            entries: self
                .entries
                .iter()
                .map(|((a, b), (v, p))| PairingEntryJson {
                    alpha: a.iter().map(rational::format).collect(),
                    beta: b.iter().map(rational::format).collect(),
                    value: rational::format(v),
                    pair: *p,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingEntryJson {
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    pub value: String,
    pub pair: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingTableJson {
    pub pairs: Vec<BallPair>,
    pub entries: Vec<PairingEntryJson>,
}

/// `h_f` on every requested pair of charges, computed via `pair`.
pub fn pairing_table(
    f: &dyn LatticeFunction,
    lattice: &PeriodicLattice,
    interaction: &Interaction,
    pair: &BallPair,
    wanted: &[(Charge, Charge)],
) -> Result<PairingTable> {
    let sites = pair.balls(lattice).0.len();
    let catalog = interaction.charge_catalog(sites);
    let values: Vec<Q> = wanted
        .par_iter()
        .map(|(a, b)| pairing(f, lattice, interaction, &catalog, pair, a, b))
        .collect::<Result<_>>()?;
    Ok(PairingTable {
        pairs: vec![pair.clone()],
        entries: wanted.iter().cloned().zip(values.into_iter().map(|v| (v, 0))).collect(),
    })
}

/// Charge pairs `(α, β)` with `α, β, α+β ∈ ℳ_n`.
pub fn closed_pairs(catalog: &ChargeCatalog, n: usize) -> Vec<(Charge, Charge)> {
    let charges = catalog.realizable(n);
    let set: BTreeSet<&Charge> = charges.iter().collect();
    let mut out = Vec::new();
    for a in &charges {
        for b in &charges {
            if set.contains(&add(a, b)) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

pub fn add(a: &Charge, b: &Charge) -> Charge {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn show_charge(c: &Charge) -> String {
    format!("({})", c.iter().map(rational::format).collect::<Vec<_>>().join(","))
}

/// A failing instance of the cocycle identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleViolation {
    pub alpha: Charge,
    pub beta: Charge,
    pub gamma: Charge,
    pub residual: Q,
}

/// `H(α,β) + H(α+β,γ) − H(β,γ) − H(α,β+γ)` on every triple whose four entries are tabulated.
pub fn cocycle_residuals(table: &BTreeMap<(Charge, Charge), Q>) -> (usize, Vec<CocycleViolation>) {
    let charges: BTreeSet<&Charge> = table.keys().flat_map(|(a, b)| [a, b]).collect();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (a, b) in table.keys() {
        for g in &charges {
            let ab = add(a, b);
            let bg = add(b, g);
            let (Some(h1), Some(h2), Some(h3), Some(h4)) = (
                table.get(&(a.clone(), b.clone())),
                table.get(&(ab.clone(), (*g).clone())),
                table.get(&(b.clone(), (*g).clone())),
                table.get(&(a.clone(), bg.clone())),
            ) else {
                continue;
            };
            checked += 1;
            let r = h1 + h2 - h3 - h4;
            if r != Q::default() {
                bad.push(CocycleViolation {
                    alpha: a.clone(),
                    beta: b.clone(),
                    gamma: (*g).clone(),
                    residual: r,
                });
            }
        }
    }
    (checked, bad)
}

/// Pairs with `H(α,β) ≠ H(β,α)`.
pub fn symmetry_violations(table: &BTreeMap<(Charge, Charge), Q>) -> Vec<(Charge, Charge)> {
    table
        .iter()
        .filter(|((a, b), v)| a < b && table.get(&(b.clone(), a.clone())).is_some_and(|w| w != *v))
        .map(|(k, _)| k.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{ConservedFunction, FnFunction};
    use crate::crystal::{euclidean, hexagonal};
    use crate::rational::int;
    use crate::varadhan::xi_total;

    #[test]
    fn balls_and_geometry() {
        let e2 = euclidean(2).unwrap();
        assert_eq!(l1_ball(&e2, &[0, 0], 1).len(), 5);
        assert_eq!(l1_ball(&hexagonal(), &[0, 0], 1).len(), 10);
        assert_eq!(radius_for(&e2, 6), 2);
        let fam = BallPair::family(2, 1, 1);
        assert!(fam.iter().all(|p| p.admissible(1)));
        let (lo, hi) = BallPair::required_box(2, 1, 1);
        for p in &fam {
            for v in p.balls(&e2).0.iter().chain(p.balls(&e2).1.iter()) {
                assert!(v.cell.iter().zip(lo.iter().zip(&hi)).all(|(x, (a, b))| a <= x && x <= b));
            }
        }
        assert!(graph_separated(&e2, &l1_ball(&e2, &[0, 0], 0), &l1_ball(&e2, &[2, 0], 0), 1));
        assert!(!graph_separated(&e2, &l1_ball(&e2, &[0, 0], 0), &l1_ball(&e2, &[2, 0], 0), 2));
        assert_eq!(translation_norm(&crate::crystal::triangular()), 2);
    }

    #[test]
    fn conserved_quantity_has_zero_pairing() {
        let e2 = euclidean(2).unwrap();
        let ex = Interaction::exclusion();
        let xi = ConservedFunction {
            values: vec![int(0), int(1)],
        };
        let catalog = ex.charge_catalog(5);
        let pair = BallPair::canonical(2, 1, 1);
        for a in 0..=3 {
            for b in 0..=3 {
                let v = pairing(&xi, &e2, &ex, &catalog, &pair, &vec![int(a)], &vec![int(b)]).unwrap();
                assert_eq!(v, int(0));
            }
        }
        assert_eq!(pairing(&xi, &e2, &ex, &catalog, &pair, &vec![int(0)], &vec![int(0)]).unwrap(), int(0));
    }

    #[test]
    fn injected_coupling_is_recovered() {
        // f = u + h∘ξ with u uniform of radius 1: pairing = h(α+β)−h(α)−h(β)
        let e2 = euclidean(2).unwrap();
        let ex = Interaction::exclusion();
        let h = |n: i64| int(n * n * n - 2 * n);
        let f = FnFunction(|eta: &Configuration| {
            let n = xi_total(&[int(0), int(1)], eta);
            let mut near = int(0);
            for (v, _) in eta.support() {
                if eta.get(&v.translated(&[1, 0])) != 0 {
                    near += int(3);
                }
            }
            Ok(near + h(n.to_integer().try_into().unwrap()))
        });
        let catalog = ex.charge_catalog(5);
        for pair in BallPair::family(2, 1, 1) {
            for a in 0..=3 {
                for b in 0..=3 {
                    let v = pairing(&f, &e2, &ex, &catalog, &pair, &vec![int(a)], &vec![int(b)]).unwrap();
                    assert_eq!(v, h(a + b) - h(a) - h(b));
                }
            }
        }
        let d1 = l1_ball(&e2, &[-4, 0], 1);
        let d2 = l1_ball(&e2, &[4, 0], 1);
        let eta = Configuration::from_sites([(d1[0].clone(), 1), (d1[2].clone(), 1), (d2[1].clone(), 1)]);
        assert_eq!(pairing_local(&f, &e2, &d1, &d2, &eta, 1).unwrap(), h(3) - h(2) - h(1));
        assert!(pairing_local(&f, &e2, &d1, &l1_ball(&e2, &[-2, 0], 0), &eta, 1).is_err());
    }

    #[test]
    fn cocycle_of_coboundary_vanishes() {
        let mut t = BTreeMap::new();
        let h = |n: i64| int(n * n);
        for a in 0..4i64 {
            for b in 0..4i64 {
                t.insert((vec![int(a)], vec![int(b)]), h(a) + h(b) - h(a + b));
            }
        }
        let (checked, bad) = cocycle_residuals(&t);
        assert!(checked > 0 && bad.is_empty());
        assert!(symmetry_violations(&t).is_empty());
        t.insert((vec![int(1)], vec![int(2)]), int(7));
        assert!(!cocycle_residuals(&t).1.is_empty());
        assert_eq!(symmetry_violations(&t), vec![(vec![int(1)], vec![int(2)])]);
    }
}
