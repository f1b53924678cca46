use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use crate::calculus::LatticeFunction;
use crate::configspace::{apply_edge, Configuration};
use crate::crystal::{unit, PeriodicLattice, Window};
use crate::interaction::{decode, state_space_size, Interaction};
use crate::linalg;
use crate::{Error, Result, Q};

/// `𝔄ʲ_ξ(η) = Σ_x n_j(cell x)·ξ(η_x)` for the fundamental domain of cell-0 vertices.
#[derive(Clone, Debug)]
pub struct AFunction {
    pub xi: Vec<Q>,
    pub direction: usize,
    pub rank: usize,
}

pub fn a_function(lattice: &PeriodicLattice, xi: &[Q], direction: usize) -> Result<AFunction> {
    if direction >= lattice.rank() {
        return Err(Error::input(format!("direction {direction} exceeds the lattice rank {}", lattice.rank())));
    }
    Ok(AFunction {
        xi: xi.to_vec(),
        direction,
        rank: lattice.rank(),
    })
}

impl LatticeFunction for AFunction {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut acc = Q::zero();
        for (v, s) in eta.support() {
            acc += Q::from_integer(v.cell[self.direction].into()) * &self.xi[s as usize];
        }
        Ok(acc)
    }
}

/// `ξ_X(η) = Σ_x ξ(η_x)`.
pub fn xi_total(xi: &[Q], eta: &Configuration) -> Q {
    eta.support().map(|(_, s)| xi[s as usize].clone()).sum()
}

/// Checks `((1−σ_k)𝔄ʲ_ξ)(η) = δ_{jk} ξ_X(η)` on every sample; returns the first failure.
pub fn a_identity_check(a: &AFunction, k: usize, samples: &[Configuration]) -> Result<Option<Configuration>> {
    for eta in samples {
        let back = eta.translated(&unit(a.rank, k, -1));
        let lhs = a.eval(eta)? - a.eval(&back)?;
        let rhs = if a.direction == k { xi_total(&a.xi, eta) } else { Q::zero() };
        if lhs != rhs {
            return Ok(Some(eta.clone()));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub dimension: usize,
    pub expected: usize,
    pub distinct_rows: usize,
}

/// Rank of the evaluation matrix of `{∂𝔄ʲ_{ξ_b}}` on every transition of the window.
pub fn dim_dv_check(lattice: &PeriodicLattice, interaction: &Interaction, window: &Window, cap: u128) -> Result<DimensionReport> {
    let basis = interaction.conserved_basis();
    let d = lattice.rank();
    let q = interaction.len();
    let size = state_space_size(q, window.len());
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let cols = d * basis.len();
    let mut rows: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut buf = vec![0; window.len()];
    for code in 0..size as usize {
        decode(code, q, &mut buf);
        let eta = window.to_config(&buf);
        for e in window.edges() {
            let next = apply_edge(lattice, interaction, &eta, e);
            if next == eta {
                continue;
            }
            let t = lattice.target(e);
            let (before, after) = (eta.get(&t) as usize, next.get(&t) as usize);
            let tau = lattice.translation(e.seed_edge);
            let row: Vec<Q> = (0..d)
                .flat_map(|j| {
                    basis
                        .iter()
                        .map(move |b| Q::from_integer(tau[j].into()) * (&b[after] - &b[before]))
                })
                .collect();
            if !linalg::is_zero_vec(&row) {
                rows.insert(row);
            }
        }
    }
    let rows: Vec<Vec<Q>> = rows.into_iter().collect();
    let dimension = linalg::rank(&rows, cols);
    let report = DimensionReport {
        dimension,
        expected: cols,
        distinct_rows: rows.len(),
    };
    if dimension < cols {
        return Err(Error::inconclusive(format!(
            "window transitions span only {dimension} of {cols} dimensions"
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{euclidean, hexagonal, LatticeVertex};
    use crate::rational::int;

    #[test]
    fn a_function_examples() {
        let xi = vec![int(0), int(1)];
        let e1 = euclidean(1).unwrap();
        let e2 = euclidean(2).unwrap();
        let a = a_function(&e1, &xi, 0).unwrap();
        assert_eq!(a.eval(&Configuration::empty()).unwrap(), int(0));
        let eta = Configuration::single(LatticeVertex::new(0, vec![5]), 1);
        assert_eq!(a.eval(&eta).unwrap(), int(5));
        let samples = [
            eta.clone(),
            Configuration::from_sites([(LatticeVertex::new(0, vec![-2, 3]), 1), (LatticeVertex::new(0, vec![4, 4]), 1)]),
        ];
        assert!(a_identity_check(&a, 0, &samples[..1]).unwrap().is_none());
        assert!(a_function(&e1, &xi, 1).is_err());
        let a2 = a_function(&e2, &xi, 1).unwrap();
        assert!(a_identity_check(&a2, 0, &samples[1..]).unwrap().is_none());
        assert!(a_identity_check(&a2, 1, &samples[1..]).unwrap().is_none());
        assert!(a_identity_check(&a_function(&e2, &xi, 0).unwrap(), 1, &samples[1..]).unwrap().is_none());
    }

    #[test]
    fn dimension_of_dv() {
        let ex = Interaction::exclusion();
        let two = Interaction::two_species_exclusion();
        let e2 = euclidean(2).unwrap();
        let w = Window::sized(&e2, &[2, 2]).unwrap();
        assert_eq!(dim_dv_check(&e2, &ex, &w, 1 << 20).unwrap().dimension, 2);
        assert_eq!(dim_dv_check(&e2, &two, &w, 1 << 20).unwrap().dimension, 4);
        let hex = hexagonal();
        let wh = Window::sized(&hex, &[2, 2]).unwrap();
        assert_eq!(dim_dv_check(&hex, &ex, &wh, 1 << 20).unwrap().dimension, 2);
        let tiny = Window::sized(&e2, &[1, 1]).unwrap();
        assert!(matches!(dim_dv_check(&e2, &ex, &tiny, 1 << 20), Err(Error::Inconclusive(_))));
    }
}
