//! Configurations, transitions `(η, e) ↦ η^e`, charges and reachability.
//!
//! Lattice-level configurations are sparse maps from vertices to non-base states.
//! Exhaustive work happens on a [`Window`] with dense state vectors indexed by
//! window vertex; sites outside the window are frozen at the base state.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::crystal::{LatticeEdge, LatticeVertex, PeriodicLattice, Window};
use crate::interaction::{
    charge_with, decode, encode, state_space_size, Charge, ChargeCatalog, Interaction, State,
};
use crate::{Error, Result};

/// A finitely supported configuration; absent vertices are at the base state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    sites: BTreeMap<LatticeVertex, State>,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration::default()
    }

    pub fn from_sites(sites: impl IntoIterator<Item = (LatticeVertex, State)>) -> Self {
        let mut c = Configuration::empty();
        for (v, s) in sites {
            c.set(v, s);
        }
        c
    }

    pub fn single(v: LatticeVertex, s: State) -> Self {
        Configuration::from_sites([(v, s)])
    }

    pub fn get(&self, v: &LatticeVertex) -> State {
        self.sites.get(v).copied().unwrap_or(Interaction::BASE)
    }

    pub fn set(&mut self, v: LatticeVertex, s: State) {
        if s == Interaction::BASE {
            self.sites.remove(&v);
        } else {
            self.sites.insert(v, s);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&LatticeVertex, State)> {
        self.sites.iter().map(|(v, s)| (v, *s))
    }

    pub fn support_len(&self) -> usize {
        self.sites.len()
    }

    /// `η|_Λ`: keeps the sites accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&LatticeVertex) -> bool) -> Self {
        Configuration {
            sites: self.sites.iter().filter(|(v, _)| keep(v)).map(|(v, s)| (v.clone(), *s)).collect(),
        }
    }

    /// Moves every state by the cell vector `by`.
    pub fn translated(&self, by: &[i64]) -> Self {
        Configuration {
            sites: self.sites.iter().map(|(v, s)| (v.translated(by), *s)).collect(),
        }
    }

    pub fn to_json(&self, interaction: &Interaction) -> ConfigurationJson {
        ConfigurationJson {
            sites: self
                .sites
                .iter()
                .map(|(v, s)| SiteJson {
                    vertex: v.clone(),
                    state: interaction.name(*s).to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ConfigurationJson, lattice: &PeriodicLattice, interaction: &Interaction) -> Result<Self> {
        let mut c = Configuration::empty();
        for site in &j.sites {
            lattice.check_vertex(&site.vertex)?;
            if c.sites.contains_key(&site.vertex) {
                return Err(Error::input(format!("vertex {} listed twice", site.vertex)));
            }
            c.set(site.vertex.clone(), interaction.state(&site.state)?);
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SiteJson {
    pub vertex: LatticeVertex,
    pub state: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct ConfigurationJson {
    pub sites: Vec<SiteJson>,
}

/// `η^e`; loops and fixed pairs leave `η` unchanged.
pub fn apply_edge(
    lattice: &PeriodicLattice,
    interaction: &Interaction,
    eta: &Configuration,
    e: &LatticeEdge,
) -> Configuration {
    let o = lattice.origin(e);
    let t = lattice.target(e);
    if o == t {
        return eta.clone();
    }
    let (a, b) = interaction.apply(eta.get(&o), eta.get(&t));
    let mut out = eta.clone();
    out.set(o, a);
    out.set(t, b);
    out
}

/// A transition `(η, e)` of the configuration space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub config: Configuration,
    pub edge: LatticeEdge,
}

impl Transition {
    pub fn target(&self, lattice: &PeriodicLattice, interaction: &Interaction) -> Configuration {
        apply_edge(lattice, interaction, &self.config, &self.edge)
    }
}

/// `ι(η, e)`: `(η^e, ē)` when the transition moves, otherwise itself.
pub fn invert_transition(lattice: &PeriodicLattice, interaction: &Interaction, t: &Transition) -> Transition {
    let next = t.target(lattice, interaction);
    if next == t.config {
        t.clone()
    } else {
        Transition {
            config: next,
            edge: lattice.inverse(&t.edge),
        }
    }
}

/// `𝝃_X(η)` in basis coordinates.
pub fn charge(interaction: &Interaction, eta: &Configuration) -> Charge {
    let states: Vec<State> = eta.support().map(|(_, s)| s).collect();
    interaction.charge_of(&states)
}

impl Window {
    /// Dense state vector of a configuration supported in the window.
    pub fn to_dense(&self, eta: &Configuration) -> Result<Vec<State>> {
        let mut out = vec![Interaction::BASE; self.len()];
        for (v, s) in eta.support() {
            let i = self
                .index(v)
                .ok_or_else(|| Error::input(format!("configuration site {v} lies outside the window")))?;
            out[i] = s;
        }
        Ok(out)
    }

    pub fn to_config(&self, dense: &[State]) -> Configuration {
        Configuration::from_sites(
            dense
                .iter()
                .enumerate()
                .filter(|(_, s)| **s != Interaction::BASE)
                .map(|(i, s)| (self.vertex(i).clone(), *s)),
        )
    }
}

/// Applies window edge `e` in place; returns whether the configuration changed.
pub fn step(window: &Window, interaction: &Interaction, eta: &mut [State], e: usize) -> bool {
    let g = window.graph();
    let (o, t) = (g.origin(e), g.target(e));
    if o == t {
        return false;
    }
    let (a, b) = interaction.apply(eta[o], eta[t]);
    if (a, b) == (eta[o], eta[t]) {
        return false;
    }
    eta[o] = a;
    eta[t] = b;
    true
}

/// A window transition `(η, e)` in dense form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTransition {
    pub config: Vec<State>,
    pub edge: usize,
}

/// BFS path of transitions from `from` to `to` inside the window, or `None` if
/// they lie in different components.
pub fn component_reachability(
    window: &Window,
    interaction: &Interaction,
    from: &Configuration,
    to: &Configuration,
    cap: u128,
) -> Result<Option<Vec<Transition>>> {
    let q = interaction.len();
    let size = state_space_size(q, window.len());
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let start = window.to_dense(from)?;
    let goal = window.to_dense(to)?;
    if start == goal {
        return Ok(Some(vec![]));
    }
    let goal_code = encode(&goal, q);
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let start_code = encode(&start, q);
    parent.insert(start_code, (usize::MAX, usize::MAX));
    let mut queue = VecDeque::from([start_code]);
    let mut cur = vec![0; window.len()];
    while let Some(code) = queue.pop_front() {
        decode(code, q, &mut cur);
        for e in window.graph().edges() {
            let mut next = cur.clone();
            if !step(window, interaction, &mut next, e) {
                continue;
            }
            let nc = encode(&next, q);
            if parent.contains_key(&nc) {
                continue;
            }
            parent.insert(nc, (code, e));
            if nc == goal_code {
                let mut path = Vec::new();
                let mut c = nc;
                while c != start_code {
                    let (p, e) = parent[&c];
                    let mut conf = vec![0; window.len()];
                    decode(p, q, &mut conf);
                    path.push(Transition {
                        config: window.to_config(&conf),
                        edge: window.edge(e).clone(),
                    });
                    c = p;
                }
                path.reverse();
                return Ok(Some(path));
            }
            queue.push_back(nc);
        }
    }
    Ok(None)
}

/// Lexicographically least configuration on `n` ordered sites with the given
/// charge (state order: base lowest), or `None` if the charge needs more sites.
pub fn lex_least(interaction: &Interaction, catalog: &ChargeCatalog, n: usize, target: &Charge) -> Option<Vec<State>> {
    let contributions = interaction.state_charges();
    let fits = |rest: &Charge, sites: usize| catalog.min_sites(rest).is_some_and(|m| m <= sites);
    if !fits(target, n) {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut rest = target.clone();
    for i in 0..n {
        let remaining = n - i - 1;
        let s = (0..interaction.len() as State).find(|&s| {
            let r: Charge = rest.iter().zip(&contributions[s as usize]).map(|(a, b)| a - b).collect();
            fits(&r, remaining)
        })?;
        rest = rest.iter().zip(&contributions[s as usize]).map(|(a, b)| a - b).collect();
        out.push(s);
    }
    Some(out)
}

/// Exhaustive view of `S^W` for a window `W` under a size cap.
pub struct ConfigSpace<'a> {
    pub window: &'a Window,
    pub interaction: &'a Interaction,
    pub size: usize,
}

impl<'a> ConfigSpace<'a> {
    pub fn new(window: &'a Window, interaction: &'a Interaction, cap: u128) -> Result<Self> {
        let size = state_space_size(interaction.len(), window.len());
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(ConfigSpace {
            window,
            interaction,
            size: size as usize,
        })
    }

    pub fn decode(&self, code: usize) -> Vec<State> {
        let mut out = vec![0; self.window.len()];
        decode(code, self.interaction.len(), &mut out);
        out
    }

    pub fn encode(&self, eta: &[State]) -> usize {
        encode(eta, self.interaction.len())
    }

    /// Component label of every configuration code, labels in first-seen order.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.size];
        let mut next = 0;
        for start in 0..self.size {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(code) = queue.pop_front() {
                let cur = self.decode(code);
                for e in self.window.graph().edges() {
                    let mut n = cur.clone();
                    if step(self.window, self.interaction, &mut n, e) {
                        let nc = self.encode(&n);
                        if label[nc] == usize::MAX {
                            label[nc] = next;
                            queue.push_back(nc);
                        }
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn charge(&self, eta: &[State]) -> Charge {
        charge_with(&self.interaction.state_charges(), eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::euclidean;
    use crate::rational::int;

    fn v1(c: i64) -> LatticeVertex {
        LatticeVertex::new(0, vec![c])
    }

    fn line_edge(c: i64) -> LatticeEdge {
        // seed edge 0 of euclidean(1) goes +e₁
        LatticeEdge {
            seed_edge: 0,
            cell: vec![c],
        }
    }

    #[test]
    fn apply_edge_examples() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let eta = Configuration::single(v1(0), 1);
        let moved = apply_edge(&l, &ex, &eta, &line_edge(0));
        assert_eq!(moved, Configuration::single(v1(1), 1));
        let empty = Configuration::empty();
        assert_eq!(apply_edge(&l, &ex, &empty, &line_edge(0)), empty);
    }

    #[test]
    fn inversion_round_trip() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let t = Transition {
            config: Configuration::single(v1(0), 1),
            edge: line_edge(0),
        };
        let back = invert_transition(&l, &ex, &t);
        assert_eq!(back.config, Configuration::single(v1(1), 1));
        assert_eq!(back.target(&l, &ex), t.config);
        assert_eq!(invert_transition(&l, &ex, &back), t);
        let fixed = Transition {
            config: Configuration::empty(),
            edge: line_edge(3),
        };
        assert_eq!(invert_transition(&l, &ex, &fixed), fixed);
    }

    #[test]
    fn charges() {
        let ex = Interaction::exclusion();
        assert_eq!(charge(&ex, &Configuration::empty()), vec![int(0)]);
        let eta = Configuration::from_sites([(v1(0), 1), (v1(4), 1), (v1(-7), 1)]);
        assert_eq!(charge(&ex, &eta), vec![int(3)]);
    }

    #[test]
    fn reachability() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let w = Window::sized(&l, &[2]).unwrap();
        let a = Configuration::single(v1(0), 1);
        let b = Configuration::single(v1(1), 1);
        assert_eq!(component_reachability(&w, &ex, &a, &a, 1000).unwrap(), Some(vec![]));
        assert_eq!(component_reachability(&w, &ex, &a, &b, 1000).unwrap().unwrap().len(), 1);
        let two = Configuration::from_sites([(v1(0), 1), (v1(1), 1)]);
        assert_eq!(component_reachability(&w, &ex, &a, &two, 1000).unwrap(), None);
    }

    #[test]
    fn lex_least_packs_tail() {
        let ex = Interaction::exclusion();
        let cat = ex.charge_catalog(5);
        assert_eq!(lex_least(&ex, &cat, 5, &vec![int(2)]), Some(vec![0, 0, 0, 1, 1]));
        assert_eq!(lex_least(&ex, &cat, 1, &vec![int(2)]), None);
        let two = Interaction::two_species_exclusion();
        let cat = two.charge_catalog(4);
        // A before B in state order, so B goes last
        assert_eq!(lex_least(&two, &cat, 4, &vec![int(1), int(1)]), Some(vec![0, 0, 1, 2]));
    }

    #[test]
    fn components_match_charge_classes() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let w = Window::sized(&l, &[4]).unwrap();
        let cs = ConfigSpace::new(&w, &ex, 1000).unwrap();
        let labels = cs.components();
        let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn json_round_trip() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let eta = Configuration::from_sites([(v1(2), 1), (v1(-1), 1)]);
        let j = eta.to_json(&ex);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, r#"{"sites":[{"vertex":{"base":0,"cell":[-1]},"state":"1"},{"vertex":{"base":0,"cell":[2]},"state":"1"}]}"#);
        assert_eq!(Configuration::from_json(&j, &l, &ex).unwrap(), eta);
    }
}
