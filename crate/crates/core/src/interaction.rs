//! Interactions `φ: S×S → S×S`, conserved quantities, simplicity and
//! irreducibility evidence on small locales.
//!
//! States are stored as indices with the base state at index 0; the remaining
//! states keep their presentation order. This index order is also the state
//! order used for lexicographic comparisons of configurations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{kernel, rref};
use crate::multigraph::MultiGraph;
use crate::rational::Q;
use crate::{Error, Result};

pub type State = u8;

/// Coordinates of `𝝃_Λ(η)` with respect to the conserved-quantity basis.
pub type Charge = Vec<Q>;

pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interaction {
    names: Vec<String>,
    table: Vec<(State, State)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PhiEntry {
    #[serde(rename = "in")]
    pub input: [String; 2],
    #[serde(rename = "out")]
    pub output: [String; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct InteractionJson {
    pub states: Vec<String>,
    pub base: String,
    pub phi: Vec<PhiEntry>,
}

/// A pair on which `φ̄∘φ` fails to return the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub input: (String, String),
    pub image: (String, String),
    pub returned: (String, String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "φ({},{}) = ({},{}) but φ̄ sends it to ({},{})",
            self.input.0, self.input.1, self.image.0, self.image.1, self.returned.0, self.returned.1
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MonoidShape {
    /// The monoid `ℕ`.
    Naturals,
    /// The group `ℤ`.
    Integers,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicityReport {
    pub simple: bool,
    pub c_phi: usize,
    /// Values of the primitive integer rescaling of the conserved quantity, by state.
    pub integer_values: Option<Vec<i64>>,
    pub shape: Option<MonoidShape>,
    /// Smallest positive element of the charge monoid (in basis coordinates) when simple.
    #[serde(serialize_with = "crate::rational::serialize_opt")]
    pub unit: Option<Q>,
    /// Explanation when the monoid is close to, but not isomorphic to, `ℕ`.
    pub near_miss: Option<String>,
}

impl Interaction {
    /// Builds an interaction from names. Pairs absent from `phi` are fixed points.
    /// Validity of `φ̄∘φ` is checked separately by [`Interaction::validate`].
    pub fn new(states: &[String], base: &str, phi: &[PhiEntry]) -> Result<Self> {
        let distinct: BTreeSet<&String> = states.iter().collect();
        if distinct.len() != states.len() {
            return Err(Error::input("state names must be distinct"));
        }
        if states.len() > State::MAX as usize {
            return Err(Error::input("too many states"));
        }
        let base_pos = states
            .iter()
            .position(|s| s == base)
            .ok_or_else(|| Error::input(format!("base state {base:?} is not a state")))?;
        let mut names = vec![states[base_pos].clone()];
        names.extend(states.iter().enumerate().filter(|(i, _)| *i != base_pos).map(|(_, s)| s.clone()));
        let index: HashMap<&str, State> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i as State)).collect();
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::input(format!("unknown state {s:?} in interaction table")))
        };
        let n = names.len();
        let mut table: Vec<(State, State)> = (0..n * n).map(|k| ((k / n) as State, (k % n) as State)).collect();
        let mut seen = vec![false; n * n];
        for entry in phi {
            let (a, b) = (lookup(&entry.input[0])?, lookup(&entry.input[1])?);
            let out = (lookup(&entry.output[0])?, lookup(&entry.output[1])?);
            let k = a as usize * n + b as usize;
            if seen[k] {
                return Err(Error::input(format!(
                    "pair ({},{}) appears twice in the interaction table",
                    entry.input[0], entry.input[1]
                )));
            }
            seen[k] = true;
            table[k] = out;
        }
        Ok(Interaction { names, table })
    }

    pub fn from_json(j: &InteractionJson) -> Result<Self> {
        Interaction::new(&j.states, &j.base, &j.phi)
    }

    pub fn to_json(&self) -> InteractionJson {
        let mut phi = Vec::new();
        for a in 0..self.len() as State {
            for b in 0..self.len() as State {
                let out = self.apply(a, b);
                if out != (a, b) {
                    phi.push(PhiEntry {
                        input: [self.name(a).into(), self.name(b).into()],
                        output: [self.name(out.0).into(), self.name(out.1).into()],
                    });
                }
            }
        }
        InteractionJson {
            states: self.names.clone(),
            base: self.names[0].clone(),
            phi,
        }
    }

    /// Builds from an index-level table closure over `0..n` (state 0 is base).
    pub fn from_fn(names: &[&str], f: impl Fn(State, State) -> (State, State)) -> Self {
        let n = names.len();
        Interaction {
            names: names.iter().map(|s| s.to_string()).collect(),
            table: (0..n * n).map(|k| f((k / n) as State, (k % n) as State)).collect(),
        }
    }

    /// Simple exclusion: `S = {0, 1}`, `φ(a, b) = (b, a)`.
    pub fn exclusion() -> Self {
        Interaction::from_fn(&["0", "1"], |a, b| (b, a))
    }

    /// Two-species exclusion: `S = {0, A, B}` with all swaps.
    pub fn two_species_exclusion() -> Self {
        Interaction::from_fn(&["0", "A", "B"], |a, b| (b, a))
    }

    /// The identity interaction on `n` states named `0..n`.
    pub fn identity(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Interaction::from_fn(&refs, |a, b| (a, b))
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "exclusion" => Ok(Interaction::exclusion()),
            "two_species_exclusion" | "2-species" => Ok(Interaction::two_species_exclusion()),
            _ => {
                if let Some(n) = name.strip_prefix("identity(").and_then(|r| r.strip_suffix(')')) {
                    let n: usize = n.parse().map_err(|_| Error::input(format!("bad size in {name:?}")))?;
                    if n == 0 {
                        return Err(Error::input("identity interaction needs at least one state"));
                    }
                    return Ok(Interaction::identity(n));
                }
                Err(Error::input(format!(
                    "unknown interaction {name:?}; expected exclusion, two_species_exclusion or identity(n)"
                )))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub const BASE: State = 0;

    pub fn name(&self, s: State) -> &str {
        &self.names[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state(&self, name: &str) -> Result<State> {
        self.names
            .iter()
            .position(|s| s == name)
            .map(|i| i as State)
            .ok_or_else(|| Error::input(format!("unknown state {name:?}")))
    }

    pub fn apply(&self, a: State, b: State) -> (State, State) {
        self.table[a as usize * self.len() + b as usize]
    }

    /// `φ̄ = ι∘φ∘ι`.
    pub fn apply_bar(&self, a: State, b: State) -> (State, State) {
        let (x, y) = self.apply(b, a);
        (y, x)
    }

    /// All pairs where `φ(s,t) ≠ (s,t)` but `φ̄∘φ(s,t) ≠ (s,t)`.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for a in 0..self.len() as State {
            for b in 0..self.len() as State {
                let img = self.apply(a, b);
                if img == (a, b) {
                    continue;
                }
                let back = self.apply_bar(img.0, img.1);
                if back != (a, b) {
                    out.push(Violation {
                        input: (self.name(a).into(), self.name(b).into()),
                        image: (self.name(img.0).into(), self.name(img.1).into()),
                        returned: (self.name(back.0).into(), self.name(back.1).into()),
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            return Ok(());
        }
        let listed: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(Error::validation(format!(
            "interaction violates the inversion identity at {} pair(s): {}",
            v.len(),
            listed.join("; ")
        )))
    }

    /// Echelonized basis of `Consv(S)`; each vector lists `ξ(s)` by state index.
    pub fn conserved_basis(&self) -> Vec<Vec<Q>> {
        let n = self.len();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        let mut normal = vec![Q::zero(); n];
        normal[0] = Q::one();
        rows.push(normal);
        for a in 0..n as State {
            for b in 0..n as State {
                let (c, d) = self.apply(a, b);
                let mut row = vec![Q::zero(); n];
                row[a as usize] += Q::one();
                row[b as usize] += Q::one();
                row[c as usize] -= Q::one();
                row[d as usize] -= Q::one();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let k = kernel(&rows, n);
        rref(&k, n).rows
    }

    pub fn c_phi(&self) -> usize {
        self.conserved_basis().len()
    }

    /// Charge-coordinate contribution of each state: `ξ_b(s)` for every basis vector `b`.
    pub fn state_charges(&self) -> Vec<Charge> {
        let basis = self.conserved_basis();
        (0..self.len())
            .map(|s| basis.iter().map(|b| b[s].clone()).collect())
            .collect()
    }

    /// Strict monoid-isomorphism test for simplicity; near misses are explained.
    pub fn simplicity(&self) -> SimplicityReport {
        let basis = self.conserved_basis();
        let mut report = SimplicityReport {
            simple: false,
            c_phi: basis.len(),
            integer_values: None,
            shape: None,
            unit: None,
            near_miss: None,
        };
        if basis.len() != 1 {
            return report;
        }
        let xi = &basis[0];
        let denom_lcm = xi.iter().fold(num_bigint::BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<num_bigint::BigInt> = xi.iter().map(|q| (q * Q::from_integer(denom_lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
        let scaled: Vec<i64> = ints
            .iter()
            .map(|x| i64::try_from(x / &g).expect("conserved quantity values fit in i64"))
            .collect();
        let pos = scaled.iter().any(|&v| v > 0);
        let neg = scaled.iter().any(|&v| v < 0);
        let scale = Q::new(g.clone(), denom_lcm);
        report.integer_values = Some(scaled.clone());
        if pos && neg {
            report.simple = true;
            report.shape = Some(MonoidShape::Integers);
            report.unit = Some(scale);
        } else if scaled.iter().any(|v| v.abs() == 1) {
            report.simple = true;
            report.shape = Some(MonoidShape::Naturals);
            report.unit = Some(if neg { -scale } else { scale });
        } else {
            let mut gens: Vec<i64> = scaled.iter().map(|v| v.abs()).filter(|&v| v > 0).collect();
            gens.sort_unstable();
            gens.dedup();
            report.near_miss = Some(format!(
                "values generate the numerical semigroup ⟨{}⟩, which has finite complement in ℕ but needs more than one generator, so it is not isomorphic to ℕ",
                gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
            ));
        }
        report
    }

    pub fn is_simple(&self) -> bool {
        self.simplicity().simple
    }

    /// Charges realizable on at most `max_sites` sites, each with its minimal site count.
    pub fn charge_catalog(&self, max_sites: usize) -> ChargeCatalog {
        let contributions = self.state_charges();
        let c = contributions.first().map_or(0, |v| v.len());
        let mut min_sites: BTreeMap<Charge, usize> = BTreeMap::from([(vec![Q::zero(); c], 0)]);
        let mut frontier: Vec<Charge> = vec![vec![Q::zero(); c]];
        for k in 1..=max_sites {
            let mut next = Vec::new();
            for m in &frontier {
                for contrib in contributions.iter().skip(1) {
                    let sum: Charge = m.iter().zip(contrib).map(|(a, b)| a + b).collect();
                    if !min_sites.contains_key(&sum) {
                        min_sites.insert(sum.clone(), k);
                        next.push(sum);
                    }
                }
            }
            frontier = next;
        }
        ChargeCatalog { max_sites, min_sites }
    }

    pub fn charge_of(&self, states: &[State]) -> Charge {
        let contributions = self.state_charges();
        charge_with(&contributions, states)
    }

    /// Exhaustive connectivity evidence on each locale.
    pub fn irreducibility_evidence(&self, locales: &[(String, MultiGraph)], cap: u128) -> Result<Vec<LocaleEvidence>> {
        let contributions = self.state_charges();
        locales
            .iter()
            .map(|(name, g)| self.evidence_on(name, g, &contributions, cap))
            .collect()
    }

    fn evidence_on(&self, name: &str, g: &MultiGraph, contributions: &[Charge], cap: u128) -> Result<LocaleEvidence> {
        if !g.is_connected() {
            return Err(Error::validation(format!("locale {name} is not connected")));
        }
        let n = g.vertex_count();
        let q = self.len();
        let total = state_space_size(q, n);
        if total > cap {
            return Err(Error::CapExceeded { size: total, cap });
        }
        let total = total as usize;
        let mut uf = UnionFind::new(total);
        let mut config = vec![0 as State; n];
        for code in 0..total {
            decode(code, q, &mut config);
            for e in g.edges() {
                let (o, t) = (g.origin(e), g.target(e));
                if o == t {
                    continue;
                }
                let (a, b) = self.apply(config[o], config[t]);
                if (a, b) != (config[o], config[t]) {
                    let mut next = config.clone();
                    next[o] = a;
                    next[t] = b;
                    uf.union(code, encode(&next, q));
                }
            }
        }
        let mut classes: BTreeMap<Charge, BTreeSet<usize>> = BTreeMap::new();
        let mut witness = None;
        let mut first_root: BTreeMap<Charge, (usize, usize)> = BTreeMap::new();
        let mut roots = BTreeSet::new();
        for code in 0..total {
            decode(code, q, &mut config);
            let charge = charge_with(contributions, &config);
            let root = uf.find(code);
            roots.insert(root);
            match first_root.get(&charge) {
                Some(&(r0, c0)) if r0 != root && witness.is_none() => {
                    let mut a = vec![0; n];
                    decode(c0, q, &mut a);
                    witness = Some((self.render(&a), self.render(&config)));
                }
                None => {
                    first_root.insert(charge.clone(), (root, code));
                }
                _ => {}
            }
            classes.entry(charge).or_default().insert(root);
        }
        Ok(LocaleEvidence {
            locale: name.to_string(),
            sites: n,
            configurations: total,
            charge_classes: classes.len(),
            components: roots.len(),
            pass: witness.is_none(),
            witness,
        })
    }

    pub fn render(&self, config: &[State]) -> Vec<String> {
        config.iter().map(|&s| self.name(s).to_string()).collect()
    }
}

pub fn charge_with(contributions: &[Charge], states: &[State]) -> Charge {
    let c = contributions.first().map_or(0, |v| v.len());
    let mut out = vec![Q::zero(); c];
    for &s in states {
        if s != Interaction::BASE {
            for (o, x) in out.iter_mut().zip(&contributions[s as usize]) {
                *o += x;
            }
        }
    }
    out
}

pub fn state_space_size(states: usize, sites: usize) -> u128 {
    (states as u128).checked_pow(sites as u32).unwrap_or(u128::MAX)
}

/// Mixed-radix code of a dense configuration (site 0 most significant).
pub fn encode(config: &[State], q: usize) -> usize {
    config.iter().fold(0, |acc, &s| acc * q + s as usize)
}

pub fn decode(mut code: usize, q: usize, out: &mut [State]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % q) as State;
        code /= q;
    }
}

/// `ℳ_k` for `k ≤ max_sites`, keyed by charge with the minimal number of sites needed.
#[derive(Clone, Debug)]
pub struct ChargeCatalog {
    pub max_sites: usize,
    pub min_sites: BTreeMap<Charge, usize>,
}

impl ChargeCatalog {
    /// `ℳ_k` as a sorted list.
    pub fn realizable(&self, k: usize) -> Vec<Charge> {
        assert!(k <= self.max_sites, "catalog built for at most {} sites", self.max_sites);
        self.min_sites.iter().filter(|(_, &m)| m <= k).map(|(c, _)| c.clone()).collect()
    }

    pub fn min_sites(&self, charge: &Charge) -> Option<usize> {
        self.min_sites.get(charge).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocaleEvidence {
    pub locale: String,
    pub sites: usize,
    pub configurations: usize,
    pub charge_classes: usize,
    pub components: usize,
    pub pass: bool,
    /// Two configurations with equal charge in different components.
    pub witness: Option<(Vec<String>, Vec<String>)>,
}

/// Paths on `2..=n` vertices and cycles on `3..=n` vertices.
pub fn default_locales(n: usize) -> Vec<(String, MultiGraph)> {
    let mut out: Vec<(String, MultiGraph)> = (2..=n).map(|k| (format!("path({k})"), MultiGraph::path(k))).collect();
    out.extend((3..=n).map(|k| (format!("cycle({k})"), MultiGraph::cycle(k))));
    out
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Rational values as an integer vector when every entry is integral.
pub fn as_integers(v: &[Q]) -> Option<Vec<i64>> {
    v.iter()
        .map(|q| {
            if q.is_integer() {
                i64::try_from(q.to_integer()).ok()
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn entry(a: &str, b: &str, c: &str, d: &str) -> PhiEntry {
        PhiEntry {
            input: [a.into(), b.into()],
            output: [c.into(), d.into()],
        }
    }

    #[test]
    fn validation_examples() {
        assert!(Interaction::exclusion().validate().is_ok());
        assert!(Interaction::identity(3).validate().is_ok());
        // one-directional hopping satisfies the identity: φ̄(1,0) = ι(φ(0,1)) = (0,1)
        let one_way = Interaction::new(
            &names(&["0", "1"]),
            "0",
            &[entry("0", "1", "1", "0"), entry("1", "0", "1", "0")],
        )
        .unwrap();
        assert!(one_way.validate().is_ok());
        let bad = Interaction::new(&names(&["0", "1"]), "0", &[entry("0", "1", "1", "1")]).unwrap();
        let v = bad.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].input, ("0".to_string(), "1".to_string()));
    }

    #[test]
    fn conserved_bases() {
        assert_eq!(Interaction::exclusion().conserved_basis(), vec![vec![int(0), int(1)]]);
        assert_eq!(Interaction::identity(3).c_phi(), 2);
        let two = Interaction::two_species_exclusion().conserved_basis();
        assert_eq!(two, vec![vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]);
    }

    #[test]
    fn base_reindexed_first() {
        let i = Interaction::new(&names(&["a", "b", "0"]), "0", &[]).unwrap();
        assert_eq!(i.names(), &names(&["0", "a", "b"]));
        assert_eq!(i.state("b").unwrap(), 2);
    }

    #[test]
    fn simplicity_cases() {
        assert!(Interaction::exclusion().is_simple());
        let r = Interaction::identity(3).simplicity();
        assert_eq!(r.c_phi, 2);
        assert!(!r.simple);
    }

    /// States worth 0, 2, 3, 4 with exchanges (p,p) ↔ (0,r) and (q,q) ↔ (p,r).
    fn two_three_semigroup() -> Interaction {
        Interaction::from_fn(&["0", "p", "q", "r"], |a, b| match (a, b) {
            (1, 1) => (0, 3),
            (3, 0) => (1, 1),
            (2, 2) => (1, 3),
            (3, 1) => (2, 2),
            _ => (b, a),
        })
    }

    #[test]
    fn numerical_semigroup_is_near_miss() {
        let i = two_three_semigroup();
        assert!(i.validate().is_ok());
        let r = i.simplicity();
        assert_eq!(r.c_phi, 1);
        assert_eq!(r.integer_values, Some(vec![0, 2, 3, 4]));
        assert!(!r.simple);
        assert!(r.near_miss.is_some());
    }

    #[test]
    fn mixed_signs_give_integers() {
        let i = Interaction::from_fn(&["0", "+", "-"], |a, b| match (a, b) {
            (0, 0) => (1, 2),
            (2, 1) => (0, 0),
            _ => (b, a),
        });
        assert!(i.validate().is_ok());
        let r = i.simplicity();
        assert!(r.simple);
        assert_eq!(r.shape, Some(MonoidShape::Integers));
        assert_eq!(r.unit, Some(int(1)));
    }

    #[test]
    fn evidence_examples() {
        let ex = Interaction::exclusion();
        let edge = vec![("edge".to_string(), MultiGraph::path(2))];
        let r = ex.irreducibility_evidence(&edge, DEFAULT_CAP).unwrap();
        assert!(r[0].pass);
        assert_eq!(r[0].configurations, 4);
        let path3 = vec![("path(3)".to_string(), MultiGraph::path(3))];
        let r = ex.irreducibility_evidence(&path3, DEFAULT_CAP).unwrap();
        assert!(r[0].pass);
        assert_eq!(r[0].components, 4);
        let id = Interaction::identity(2);
        let r = id.irreducibility_evidence(&edge, DEFAULT_CAP).unwrap();
        assert!(!r[0].pass);
        assert!(r[0].witness.is_some());
        let big = vec![("path(30)".to_string(), MultiGraph::path(30))];
        assert!(matches!(
            ex.irreducibility_evidence(&big, DEFAULT_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn charge_catalog_for_exclusion() {
        let cat = Interaction::exclusion().charge_catalog(3);
        assert_eq!(cat.realizable(3), vec![vec![int(0)], vec![int(1)], vec![int(2)], vec![int(3)]]);
        assert_eq!(cat.min_sites(&vec![int(2)]), Some(2));
    }

    #[test]
    fn json_round_trip() {
        let i = Interaction::two_species_exclusion();
        assert_eq!(Interaction::from_json(&i.to_json()).unwrap(), i);
        let text = r#"{"states":["0","1"],"base":"0","phi":[{"in":["0","1"],"out":["1","0"]},{"in":["1","0"],"out":["0","1"]}]}"#;
        let j: InteractionJson = serde_json::from_str(text).unwrap();
        assert_eq!(Interaction::from_json(&j).unwrap(), Interaction::exclusion());
    }
}
