use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LatticeFunction;
use crate::configspace::Configuration;
use crate::crystal::{cell_sub, LatticeVertex, PeriodicLattice};
use crate::interaction::{decode, state_space_size, Interaction, State};
use crate::rational;
use crate::{Error, Result, Q};

/// Which diameter a uniform function's radius is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Graph,
    Block,
}

/// A function of the states on a finite vertex set `Λ`.
///
/// Missing table entries are zero. With the vanishing flag set the function lies
/// in `C_Λ`: it is zero whenever some site of `Λ` is at the base state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFunction {
    support: Vec<LatticeVertex>,
    table: BTreeMap<Vec<State>, Q>,
    vanishing: bool,
}

impl LocalFunction {
    pub fn new(support: Vec<LatticeVertex>, table: BTreeMap<Vec<State>, Q>) -> Result<Self> {
        let distinct: BTreeSet<_> = support.iter().collect();
        if distinct.len() != support.len() {
            return Err(Error::input("local function support has repeated vertices"));
        }
        if let Some(k) = table.keys().find(|k| k.len() != support.len()) {
            return Err(Error::input(format!(
                "pattern of length {} on a support of size {}",
                k.len(),
                support.len()
            )));
        }
        let table = table.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(LocalFunction {
            support,
            table,
            vanishing: false,
        })
    }

    /// Tabulates `f` on every pattern of `S^Λ`.
    pub fn from_fn(
        support: Vec<LatticeVertex>,
        states: usize,
        cap: u128,
        f: impl Fn(&[State]) -> Q,
    ) -> Result<Self> {
        let size = state_space_size(states, support.len());
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        let mut table = BTreeMap::new();
        let mut buf = vec![0; support.len()];
        for code in 0..size as usize {
            decode(code, states, &mut buf);
            let v = f(&buf);
            if !v.is_zero() {
                table.insert(buf.clone(), v);
            }
        }
        LocalFunction::new(support, table)
    }

    /// Marks the function as an element of `C_Λ`, checking the vanishing condition.
    pub fn vanishing(mut self) -> Result<Self> {
        if let Some(k) = self.table.keys().find(|k| k.contains(&Interaction::BASE)) {
            return Err(Error::validation(format!(
                "term on {} sites is nonzero at {k:?}, which has a base coordinate",
                self.support.len()
            )));
        }
        self.vanishing = true;
        Ok(self)
    }

    pub fn is_vanishing(&self) -> bool {
        self.vanishing
    }

    pub fn support(&self) -> &[LatticeVertex] {
        &self.support
    }

    pub fn table(&self) -> &BTreeMap<Vec<State>, Q> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    pub fn value_at(&self, states: &[State]) -> Q {
        self.table.get(states).cloned().unwrap_or_else(Q::zero)
    }
}

impl LatticeFunction for LocalFunction {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let states: Vec<State> = self.support.iter().map(|v| eta.get(v)).collect();
        Ok(self.value_at(&states))
    }
}

/// A finite sum of `C_Λ` terms with distinct supports of bounded diameter.
#[derive(Clone, Debug)]
pub struct UniformFunction {
    terms: Vec<LocalFunction>,
    metric: Metric,
    radius: usize,
}

impl UniformFunction {
    pub fn new(lattice: &PeriodicLattice, terms: Vec<LocalFunction>, metric: Metric) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut radius = 0;
        for t in &terms {
            if !t.is_vanishing() {
                return Err(Error::validation("uniform function terms must be C_Λ-flagged"));
            }
            let key: BTreeSet<_> = t.support().iter().cloned().collect();
            if !seen.insert(key) {
                return Err(Error::validation("uniform function terms must have distinct supports"));
            }
            radius = radius.max(set_diameter(lattice, t.support(), metric));
        }
        Ok(UniformFunction { terms, metric, radius })
    }

    pub fn terms(&self) -> &[LocalFunction] {
        &self.terms
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

impl LatticeFunction for UniformFunction {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut acc = Q::zero();
        for t in &self.terms {
            acc += t.eval(eta)?;
        }
        Ok(acc)
    }
}

fn set_diameter(lattice: &PeriodicLattice, set: &[LatticeVertex], metric: Metric) -> usize {
    let mut d = 0;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            let x = match metric {
                Metric::Graph => lattice.graph_distance(a, b),
                Metric::Block => lattice.block_distance(a, b),
            };
            d = d.max(x);
        }
    }
    d
}

/// `ξ_X = Σ_x ξ(η_x)` for a state function `ξ` with `ξ(*) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservedFunction {
    pub values: Vec<Q>,
}

impl LatticeFunction for ConservedFunction {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        Ok(eta.support().map(|(_, s)| self.values[s as usize].clone()).sum())
    }
}

/// `ι^Λ f(η) = f(η|_Λ)`.
pub fn iota_restrict(f: &dyn LatticeFunction, lambda: &[LatticeVertex], eta: &Configuration) -> Result<Q> {
    let keep: BTreeSet<&LatticeVertex> = lambda.iter().collect();
    f.eval(&eta.restrict(|v| keep.contains(v)))
}

/// The expansion `f = Σ_Λ f_Λ` restricted to configurations supported on `sites`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub sites: Vec<LatticeVertex>,
    /// `f_∅ = f(⋆)`.
    pub constant: Q,
    /// Nonzero terms keyed by the sorted site indices of their support.
    pub terms: BTreeMap<Vec<usize>, LocalFunction>,
}

impl LatticeFunction for Expansion {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut acc = self.constant.clone();
        for t in self.terms.values() {
            acc += t.eval(eta)?;
        }
        Ok(acc)
    }
}

/// Computes `f_Λ(η) = Σ_{Λ'⊆Λ} (−1)^{|Λ∖Λ'|} f(η|_{Λ'})` for every `Λ ⊆ sites`.
pub fn expand(f: &dyn LatticeFunction, sites: &[LatticeVertex], states: usize, cap: u128) -> Result<Expansion> {
    let n = sites.len();
    let size = state_space_size(states, n);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let size = size as usize;
    let mut values: Vec<Q> = (0..size)
        .into_par_iter()
        .map(|code| {
            let mut buf = vec![0; n];
            decode(code, states, &mut buf);
            f.eval(&pattern_config(sites, &buf))
        })
        .collect::<Result<_>>()?;
    // Möbius inversion one coordinate at a time; site 0 is the most significant digit.
    for i in 0..n {
        let stride = states.pow((n - 1 - i) as u32);
        for code in 0..size {
            let digit = (code / stride) % states;
            if digit != 0 {
                let base = values[code - digit * stride].clone();
                values[code] -= base;
            }
        }
    }
    let constant = values[0].clone();
    let mut grouped: BTreeMap<Vec<usize>, BTreeMap<Vec<State>, Q>> = BTreeMap::new();
    let mut buf = vec![0; n];
    for (code, v) in values.into_iter().enumerate().skip(1) {
        if v.is_zero() {
            continue;
        }
        decode(code, states, &mut buf);
        let idx: Vec<usize> = (0..n).filter(|&i| buf[i] != Interaction::BASE).collect();
        let key: Vec<State> = idx.iter().map(|&i| buf[i]).collect();
        grouped.entry(idx).or_default().insert(key, v);
    }
    let mut terms = BTreeMap::new();
    for (idx, table) in grouped {
        let support = idx.iter().map(|&i| sites[i].clone()).collect();
        terms.insert(idx, LocalFunction::new(support, table)?.vanishing()?);
    }
    Ok(Expansion {
        sites: sites.to_vec(),
        constant,
        terms,
    })
}

pub(crate) fn pattern_config(sites: &[LatticeVertex], states: &[State]) -> Configuration {
    Configuration::from_sites(sites.iter().cloned().zip(states.iter().copied()))
}

/// Translates `set` so that its lexicographically least cell is the origin; returns
/// the sorted translate and the cell that was subtracted.
pub fn canonical_support(set: &[LatticeVertex]) -> (Vec<LatticeVertex>, Vec<i64>) {
    let min = set.iter().map(|v| v.cell.clone()).min().expect("nonempty support");
    let neg: Vec<i64> = min.iter().map(|x| -x).collect();
    let mut out: Vec<LatticeVertex> = set.iter().map(|v| v.translated(&neg)).collect();
    out.sort();
    (out, min)
}

/// Canonical representatives of all vertex sets of graph diameter `≤ r` and size
/// `≤ max_size`, up to translation.
pub fn anchored_supports(lattice: &PeriodicLattice, r: usize, max_size: usize) -> Vec<Vec<LatticeVertex>> {
    let mut found: BTreeSet<Vec<LatticeVertex>> = BTreeSet::new();
    for b in 0..lattice.cell_size() {
        let center = LatticeVertex::new(b, lattice.zero_cell());
        let ball = lattice.graph_ball(&center, r);
        let dist: Vec<Vec<usize>> = ball
            .iter()
            .map(|a| ball.iter().map(|c| lattice.graph_distance(a, c)).collect())
            .collect();
        let ci = ball.iter().position(|v| v == &center).unwrap();
        let mut chosen = vec![ci];
        grow(&ball, &dist, r, max_size, &mut chosen, &mut found);
    }
    found.into_iter().collect()
}

fn grow(
    ball: &[LatticeVertex],
    dist: &[Vec<usize>],
    r: usize,
    max_size: usize,
    chosen: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<LatticeVertex>>,
) {
    let set: Vec<LatticeVertex> = chosen.iter().map(|&i| ball[i].clone()).collect();
    found.insert(canonical_support(&set).0);
    if chosen.len() == max_size {
        return;
    }
    let from = if chosen.len() > 1 { chosen[chosen.len() - 1] + 1 } else { 0 };
    for next in from..ball.len() {
        if next == chosen[0] || chosen.iter().any(|&c| dist[c][next] > r) {
            continue;
        }
        chosen.push(next);
        grow(ball, dist, r, max_size, chosen, found);
        chosen.pop();
    }
}

/// One translation orbit of terms of a shift-invariant uniform function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitTerm {
    /// Canonical support (least cell at the origin), sorted.
    pub support: Vec<LatticeVertex>,
    /// Values on non-base patterns; missing entries are zero.
    pub table: BTreeMap<Vec<State>, Q>,
}

/// A shift-invariant uniform function `Σ_τ Σ_Λ g_Λ ∘ τ⁻¹` stored by orbit data.
#[derive(Clone, Debug)]
pub struct OrbitFunction {
    lattice: PeriodicLattice,
    terms: Vec<OrbitTerm>,
}

impl OrbitFunction {
    pub fn new(lattice: &PeriodicLattice, terms: Vec<OrbitTerm>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in terms {
            for v in &t.support {
                lattice.check_vertex(v)?;
            }
            let (canon, _) = canonical_support(&t.support);
            if canon != t.support {
                return Err(Error::input("orbit term support is not in canonical position"));
            }
            if !seen.insert(canon) {
                return Err(Error::input("two orbit terms share a support orbit"));
            }
            if let Some(k) = t.table.keys().find(|k| k.len() != t.support.len() || k.contains(&Interaction::BASE)) {
                return Err(Error::validation(format!("orbit term pattern {k:?} is not a non-base pattern on its support")));
            }
            let table: BTreeMap<_, _> = t.table.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            if !table.is_empty() {
                out.push(OrbitTerm {
                    support: t.support,
                    table,
                });
            }
        }
        Ok(OrbitFunction {
            lattice: lattice.clone(),
            terms: out,
        })
    }

    pub fn zero(lattice: &PeriodicLattice) -> Self {
        OrbitFunction {
            lattice: lattice.clone(),
            terms: vec![],
        }
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn terms(&self) -> &[OrbitTerm] {
        &self.terms
    }

    /// Largest graph diameter of a term support.
    pub fn radius(&self) -> usize {
        self.terms
            .iter()
            .map(|t| set_diameter(&self.lattice, &t.support, Metric::Graph))
            .max()
            .unwrap_or(0)
    }

    /// Sites whose state can change `Σ` terms touching any of `sites`.
    pub fn dependency(&self, sites: &[LatticeVertex]) -> BTreeSet<LatticeVertex> {
        let mut out: BTreeSet<LatticeVertex> = sites.iter().cloned().collect();
        for t in &self.terms {
            for anchor in &t.support {
                for v in sites {
                    if v.base != anchor.base {
                        continue;
                    }
                    let shift = cell_sub(&v.cell, &anchor.cell);
                    out.extend(t.support.iter().map(|w| w.translated(&shift)));
                }
            }
        }
        out
    }

    pub fn to_json(&self, interaction: &Interaction) -> OrbitFunctionJson {
        OrbitFunctionJson {
            terms: self
                .terms
                .iter()
                .map(|t| OrbitTermJson {
                    support: t.support.clone(),
                    entries: t
                        .table
                        .iter()
                        .map(|(k, v)| TermEntryJson {
                            states: k.iter().map(|&s| interaction.name(s).to_string()).collect(),
                            value: v.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &OrbitFunctionJson, lattice: &PeriodicLattice, interaction: &Interaction) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &j.terms {
            let mut table = BTreeMap::new();
            for e in &t.entries {
                let key = e.states.iter().map(|s| interaction.state(s)).collect::<Result<Vec<_>>>()?;
                if table.insert(key, e.value.clone()).is_some() {
                    return Err(Error::input("orbit term lists a pattern twice"));
                }
            }
            terms.push(OrbitTerm {
                support: t.support.clone(),
                table,
            });
        }
        OrbitFunction::new(lattice, terms)
    }
}

impl LatticeFunction for OrbitFunction {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        let mut acc = Q::zero();
        let mut states = Vec::new();
        for t in &self.terms {
            let anchor = &t.support[0];
            for (v, _) in eta.support() {
                if v.base != anchor.base {
                    continue;
                }
                let shift = cell_sub(&v.cell, &anchor.cell);
                states.clear();
                states.extend(t.support.iter().map(|w| eta.get(&w.translated(&shift))));
                if states.contains(&Interaction::BASE) {
                    continue;
                }
                if let Some(x) = t.table.get(&states) {
                    acc += x;
                }
            }
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermEntryJson {
    pub states: Vec<String>,
    #[serde(with = "rational")]
    pub value: Q,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OrbitTermJson {
    pub support: Vec<LatticeVertex>,
    pub entries: Vec<TermEntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct OrbitFunctionJson {
    pub terms: Vec<OrbitTermJson>,
}
