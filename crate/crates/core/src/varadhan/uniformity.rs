use std::collections::HashMap;
use std::sync::Mutex;

use itertools::Itertools;
use rayon::prelude::*;

use crate::calculus::LatticeFunction;
use crate::configspace::Configuration;
use crate::crystal::{cell_sub, Cell, LatticeVertex, PeriodicLattice, Window};
use crate::interaction::{decode, state_space_size, State};
use crate::{Error, Result, Q};

/// A failing instance of `ι^Λf − ι^{Λ∖𝔅(x,0)}f = ι^{Λ∩𝔅(x,R)}f − ι^{Λ∩𝔅*(x,R)}f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityWitness {
    pub lambda: Vec<LatticeVertex>,
    pub x: LatticeVertex,
    pub eta: Configuration,
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityReport {
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<UniformityWitness>,
}

struct BlockMetric<'a> {
    lattice: &'a PeriodicLattice,
    cache: Mutex<HashMap<Cell, usize>>,
}

impl BlockMetric<'_> {
    fn distance(&self, a: &LatticeVertex, b: &LatticeVertex) -> usize {
        let diff = cell_sub(&b.cell, &a.cell);
        if let Some(&d) = self.cache.lock().unwrap().get(&diff) {
            return d;
        }
        let d = self.lattice.block_cell_distance(&a.cell, &b.cell);
        self.cache.lock().unwrap().insert(diff, d);
        d
    }
}

/// Checks the local criterion for every `Λ ⊂ region` with `|Λ| ≤ max_size`, every
/// `x ∈ Λ` and every configuration that is non-base on all of `Λ`.
pub fn uniformity_check(
    f: &dyn LatticeFunction,
    region: &Window,
    states: usize,
    r: usize,
    max_size: usize,
    cap: u128,
) -> Result<UniformityReport> {
    let lattice = region.lattice();
    let d = lattice.rank();
    let need = if d == 1 { 2 * r + 2 } else { 2 * r } as i64 + 1;
    if region.lo().iter().zip(region.hi()).any(|(a, b)| b - a + 1 < need) {
        return Err(Error::inconclusive(format!(
            "region must span at least {need} cells along every axis to separate blocks at distance {r}"
        )));
    }
    let vertices = region.vertices();
    let subsets: Vec<Vec<usize>> = (1..=max_size.min(vertices.len()))
        .flat_map(|k| (0..vertices.len()).combinations(k))
        .collect();
    let work: u128 = subsets
        .iter()
        .map(|s| state_space_size(states - 1, s.len()))
        .sum();
    if work > cap {
        return Err(Error::CapExceeded { size: work, cap });
    }
    let metric = BlockMetric {
        lattice,
        cache: Mutex::new(HashMap::new()),
    };
    let results: Vec<(usize, Option<UniformityWitness>)> = subsets
        .par_iter()
        .map(|subset| check_subset(f, &metric, vertices, subset, states, r))
        .collect::<Result<_>>()?;
    let checked = results.iter().map(|(c, _)| c).sum();
    let witness = results.into_iter().find_map(|(_, w)| w);
    Ok(UniformityReport {
        pass: witness.is_none(),
        checked,
        witness,
    })
}

fn check_subset(
    f: &dyn LatticeFunction,
    metric: &BlockMetric<'_>,
    vertices: &[LatticeVertex],
    subset: &[usize],
    states: usize,
    r: usize,
) -> Result<(usize, Option<UniformityWitness>)> {
    let lambda: Vec<LatticeVertex> = subset.iter().map(|&i| vertices[i].clone()).collect();
    let n = lambda.len();
    let mut pattern = vec![0 as State; n];
    let mut checked = 0;
    for code in 0..state_space_size(states - 1, n) as usize {
        decode(code, states - 1, &mut pattern);
        let eta = Configuration::from_sites(lambda.iter().cloned().zip(pattern.iter().map(|s| s + 1)));
        let whole = f.eval(&eta)?;
        for x in &lambda {
            let dist: Vec<usize> = lambda.iter().map(|y| metric.distance(x, y)).collect();
            let without_cell = restrict(&lambda, &eta, |i| dist[i] > 0);
            let near = restrict(&lambda, &eta, |i| dist[i] <= r);
            let near_punctured = restrict(&lambda, &eta, |i| dist[i] <= r && dist[i] > 0);
            let lhs = &whole - f.eval(&without_cell)?;
            let rhs = f.eval(&near)? - f.eval(&near_punctured)?;
            checked += 1;
            if lhs != rhs {
                return Ok((
                    checked,
                    Some(UniformityWitness {
                        lambda: lambda.clone(),
                        x: x.clone(),
                        eta,
                        lhs,
                        rhs,
                    }),
                ));
            }
        }
    }
    Ok((checked, None))
}

fn restrict(lambda: &[LatticeVertex], eta: &Configuration, keep: impl Fn(usize) -> bool) -> Configuration {
    Configuration::from_sites(
        lambda
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, v)| (v.clone(), eta.get(v))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{ConservedFunction, FnFunction};
    use crate::crystal::{euclidean, hexagonal};
    use crate::rational::int;
    use crate::varadhan::xi_total;

    #[test]
    fn conserved_quantity_passes() {
        let xi = ConservedFunction {
            values: vec![int(0), int(1)],
        };
        let e2 = euclidean(2).unwrap();
        let w = Window::from_extents(&e2, &[(-1, 1), (-1, 1)]).unwrap();
        let rep = uniformity_check(&xi, &w, 2, 0, 3, 1 << 20).unwrap();
        assert!(rep.pass && rep.checked > 0);
        let zero = FnFunction(|_: &Configuration| Ok(int(0)));
        assert!(uniformity_check(&zero, &w, 2, 1, 3, 1 << 20).unwrap().pass);
    }

    #[test]
    fn neighbour_energy_passes_at_its_radius() {
        let hex = hexagonal();
        let f = FnFunction(|eta: &Configuration| {
            let mut acc = int(0);
            for (v, s) in eta.support() {
                if v.base == 0 && eta.get(&LatticeVertex::new(1, v.cell.clone())) != 0 {
                    acc += int(2 * s as i64);
                }
            }
            Ok(acc)
        });
        let w = Window::from_extents(&hex, &[(-1, 1), (-1, 1)]).unwrap();
        assert!(uniformity_check(&f, &w, 2, 1, 2, 1 << 20).unwrap().pass);
    }

    #[test]
    fn injected_coupling_fails() {
        let f = FnFunction(|eta: &Configuration| {
            let n = xi_total(&[int(0), int(1)], eta);
            Ok(&n * &n)
        });
        let e1 = euclidean(1).unwrap();
        let w = Window::from_extents(&e1, &[(-3, 3)]).unwrap();
        let rep = uniformity_check(&f, &w, 2, 1, 2, 1 << 20).unwrap();
        assert!(!rep.pass);
        let wit = rep.witness.unwrap();
        assert_eq!(wit.lambda.len(), 2);
        assert_ne!(wit.lhs, wit.rhs);
        let narrow = Window::from_extents(&e1, &[(0, 2)]).unwrap();
        assert!(matches!(uniformity_check(&f, &narrow, 2, 1, 2, 1 << 20), Err(Error::Inconclusive(_))));
    }
}
