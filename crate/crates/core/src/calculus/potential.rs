use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use num_traits::Zero;

use super::{integrate, LatticeForm, LatticeFunction};
use crate::configspace::{invert_transition, lex_least, step, Configuration, Transition};
use crate::crystal::Window;
use crate::interaction::{charge_with, decode, encode, state_space_size, Charge, ChargeCatalog, Interaction, State};
use crate::{Error, Result, Q};

/// A closed path with nonzero integral: the form is not closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub cycle: Vec<Transition>,
    pub integral: Q,
}

/// Exhaustive potential on `S^W`, normalised to vanish on the lexicographically
/// least configuration of every component.
#[derive(Clone, Debug)]
pub struct WindowPotential {
    window: Window,
    states: usize,
    values: Vec<Q>,
    component: Vec<usize>,
    representatives: Vec<usize>,
}

pub enum PotentialResult {
    Exact(WindowPotential),
    NotClosed(CycleReport),
}

impl WindowPotential {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn component_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn component_of(&self, dense: &[State]) -> usize {
        self.component[encode(dense, self.states)]
    }

    pub fn representative(&self, component: usize) -> Vec<State> {
        let mut out = vec![0; self.window.len()];
        decode(self.representatives[component], self.states, &mut out);
        out
    }

    pub fn value_dense(&self, dense: &[State]) -> Q {
        self.values[encode(dense, self.states)].clone()
    }
}

impl LatticeFunction for WindowPotential {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        Ok(self.value_dense(&self.window.to_dense(eta)?))
    }
}

/// Integrates `ω` over `S^W` by BFS; reports a cycle with nonzero integral if `ω`
/// is not closed on the window.
pub fn potential(form: &dyn LatticeForm, window: &Window, interaction: &Interaction, cap: u128) -> Result<PotentialResult> {
    let q = interaction.len();
    let size = state_space_size(q, window.len());
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let size = size as usize;
    let lattice = window.lattice();
    let mut values: Vec<Option<Q>> = vec![None; size];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); size];
    let mut component = vec![usize::MAX; size];
    let mut representatives = Vec::new();
    let mut cur = vec![0; window.len()];
    let path_to = |parent: &[(usize, usize)], mut code: usize| {
        let mut path = Vec::new();
        let mut buf = vec![0; window.len()];
        while parent[code].0 != usize::MAX {
            let (p, e) = parent[code];
            decode(p, q, &mut buf);
            path.push(Transition {
                config: window.to_config(&buf),
                edge: window.edge(e).clone(),
            });
            code = p;
        }
        path.reverse();
        path
    };
    for start in 0..size {
        if values[start].is_some() {
            continue;
        }
        let label = representatives.len();
        representatives.push(start);
        values[start] = Some(Q::zero());
        component[start] = label;
        let mut queue = VecDeque::from([start]);
        while let Some(code) = queue.pop_front() {
            decode(code, q, &mut cur);
            let here = values[code].clone().unwrap();
            let eta = window.to_config(&cur);
            for e in window.graph().edges() {
                let mut next = cur.clone();
                if !step(window, interaction, &mut next, e) {
                    continue;
                }
                let nc = encode(&next, q);
                let expect = &here + form.eval(&eta, window.edge(e))?;
                match &values[nc] {
                    None => {
                        values[nc] = Some(expect);
                        parent[nc] = (code, e);
                        component[nc] = label;
                        queue.push_back(nc);
                    }
                    Some(v) if *v == expect => {}
                    Some(_) => {
                        let mut cycle = path_to(&parent, code);
                        cycle.push(Transition {
                            config: eta.clone(),
                            edge: window.edge(e).clone(),
                        });
                        let back = path_to(&parent, nc);
                        cycle.extend(back.iter().rev().map(|t| invert_transition(lattice, interaction, t)));
                        let integral = integrate(form, lattice, interaction, &cycle)?;
                        if integral.is_zero() {
                            return Err(Error::internal("inconsistent potential along a cycle of zero integral"));
                        }
                        return Ok(PotentialResult::NotClosed(CycleReport { cycle, integral }));
                    }
                }
            }
        }
    }
    Ok(PotentialResult::Exact(WindowPotential {
        window: window.clone(),
        states: q,
        values: values.into_iter().map(Option::unwrap).collect(),
        component,
        representatives,
    }))
}

/// Lazily evaluated potential of a closed form on a large window.
///
/// `f(η) = −∫ ω` along a transport path from `η` to the lexicographically least
/// configuration `b(α)` of its charge, so `f(b(α)) = 0`. Content outside a
/// connected staging suffix of the window order is moved into it by local searches
/// along shortest paths, then the staged configuration is carried to `b(α)`.
pub struct TransportPotential<'a> {
    form: &'a dyn LatticeForm,
    window: &'a Window,
    interaction: &'a Interaction,
    contributions: Vec<Charge>,
    catalog: ChargeCatalog,
    limit: usize,
    staging: Mutex<HashMap<usize, usize>>,
    cache: Mutex<HashMap<Vec<State>, Q>>,
}

impl<'a> TransportPotential<'a> {
    /// `max_content` bounds the number of non-base sites of evaluated configurations;
    /// `limit` bounds the states visited by each local search.
    pub fn new(
        form: &'a dyn LatticeForm,
        window: &'a Window,
        interaction: &'a Interaction,
        max_content: usize,
        limit: usize,
    ) -> Result<Self> {
        if !window.is_connected() {
            return Err(Error::input("transport potential needs a connected window"));
        }
        if max_content > window.len() {
            return Err(Error::input("window too small for the requested content"));
        }
        Ok(TransportPotential {
            form,
            window,
            interaction,
            contributions: interaction.state_charges(),
            catalog: interaction.charge_catalog(max_content),
            limit,
            staging: Mutex::new(HashMap::new()),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn window(&self) -> &Window {
        self.window
    }

    /// Start index of the shortest connected suffix with at least `m` sites.
    fn staging_start(&self, m: usize) -> Result<usize> {
        if let Some(&s) = self.staging.lock().unwrap().get(&m) {
            return Ok(s);
        }
        let n = self.window.len();
        let g = self.window.graph();
        let mut found = None;
        for len in m.max(1)..=n {
            let s = n - len;
            if connected_subset(g, s) {
                found = Some(s);
                break;
            }
        }
        let s = found.ok_or_else(|| Error::inconclusive("no connected staging region in the window"))?;
        self.staging.lock().unwrap().insert(m, s);
        Ok(s)
    }

    fn eval_step(&self, cur: &mut [State], e: usize, acc: &mut Q) -> Result<()> {
        let eta = self.window.to_config(cur);
        let v = self.form.eval(&eta, self.window.edge(e))?;
        if !step(self.window, self.interaction, cur, e) {
            return Err(Error::internal("transport path uses a fixed transition"));
        }
        *acc += v;
        Ok(())
    }

    /// BFS over configurations that agree with `cur` off `sites`; returns the edges
    /// of a path to the chosen goal.
    fn local_search(&self, cur: &[State], sites: &[usize], goal: Goal<'_>) -> Result<Vec<usize>> {
        let g = self.window.graph();
        let mut pos = vec![usize::MAX; self.window.len()];
        for (i, &v) in sites.iter().enumerate() {
            pos[v] = i;
        }
        let local_edges: Vec<(usize, usize, usize)> = sites
            .iter()
            .flat_map(|&v| g.out_edges(v).iter().copied())
            .filter(|&e| pos[g.target(e)] != usize::MAX && g.origin(e) != g.target(e))
            .map(|e| (e, pos[g.origin(e)], pos[g.target(e)]))
            .collect();
        let start: Vec<State> = sites.iter().map(|&v| cur[v]).collect();
        let mut seen: Vec<Vec<State>> = vec![start.clone()];
        let mut index: HashMap<Vec<State>, usize> = HashMap::from([(start, 0)]);
        let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX)];
        let mut head = 0;
        let mut best = 0;
        let score = |s: &[State]| -> usize { s.iter().zip(sites).filter(|(x, _)| **x != Interaction::BASE).map(|(_, v)| *v).sum() };
        let mut best_key = (score(&seen[0]), seen[0].clone());
        let mut hit = None;
        if let Goal::Exact(t) = goal {
            if seen[0] == t {
                hit = Some(0);
            }
        }
        while hit.is_none() && head < seen.len() {
            let here = seen[head].clone();
            for &(e, a, b) in &local_edges {
                let (x, y) = self.interaction.apply(here[a], here[b]);
                if (x, y) == (here[a], here[b]) {
                    continue;
                }
                let mut next = here.clone();
                next[a] = x;
                next[b] = y;
                if index.contains_key(&next) {
                    continue;
                }
                if seen.len() >= self.limit {
                    return Err(Error::CapExceeded {
                        size: seen.len() as u128 + 1,
                        cap: self.limit as u128,
                    });
                }
                let id = seen.len();
                index.insert(next.clone(), id);
                parent.push((head, e));
                match goal {
                    Goal::Exact(t) if next == t => hit = Some(id),
                    Goal::MaxRank => {
                        let key = (score(&next), next.clone());
                        if key > best_key {
                            best_key = key;
                            best = id;
                        }
                    }
                    _ => {}
                }
                seen.push(next);
                if hit.is_some() {
                    break;
                }
            }
            head += 1;
        }
        let mut at = match goal {
            Goal::Exact(_) => hit.ok_or_else(|| Error::internal("transport target not reachable in the staging region"))?,
            Goal::MaxRank => best,
        };
        let mut path = Vec::new();
        while parent[at].0 != usize::MAX {
            path.push(parent[at].1);
            at = parent[at].0;
        }
        path.reverse();
        Ok(path)
    }

    /// Vertices of a window path from `u` to a base site at index `≥ s` that crosses
    /// the fewest occupied sites.
    fn route(&self, cur: &[State], u: usize, s: usize) -> Vec<usize> {
        let g = self.window.graph();
        let mut prev = vec![usize::MAX; self.window.len()];
        let mut cost = vec![usize::MAX; self.window.len()];
        prev[u] = u;
        cost[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(v) = queue.pop_front() {
            if v >= s && cur[v] == Interaction::BASE {
                let mut path = vec![v];
                let mut x = v;
                while x != u {
                    x = prev[x];
                    path.push(x);
                }
                path.reverse();
                return path;
            }
            for &e in g.out_edges(v) {
                let w = g.target(e);
                let step = usize::from(cur[w] != Interaction::BASE);
                if cost[v] + step < cost[w] {
                    cost[w] = cost[v] + step;
                    prev[w] = v;
                    if step == 0 {
                        queue.push_front(w);
                    } else {
                        queue.push_back(w);
                    }
                }
            }
        }
        unreachable!("staging region always has a free site")
    }

    /// `∫ ω` along the transport path from `η` to `b(α)`.
    pub fn transport_integral(&self, dense: &[State]) -> Result<Q> {
        let n = self.window.len();
        let alpha = charge_with(&self.contributions, dense);
        let content = dense.iter().filter(|&&s| s != Interaction::BASE).count();
        let min = self
            .catalog
            .min_sites(&alpha)
            .ok_or_else(|| Error::input("configuration exceeds the content bound of the potential"))?;
        let target = lex_least(self.interaction, &self.catalog, n, &alpha)
            .ok_or_else(|| Error::inconclusive("charge does not fit in the window"))?;
        let s = self.staging_start(content.max(min))?;
        let mut cur = dense.to_vec();
        let mut acc = Q::zero();
        while let Some(u) = (0..s).rev().find(|&i| cur[i] != Interaction::BASE) {
            let sites = self.route(&cur, u, s);
            for e in self.local_search(&cur, &sites, Goal::MaxRank)? {
                self.eval_step(&mut cur, e, &mut acc)?;
            }
        }
        let sites: Vec<usize> = (s..n).collect();
        for e in self.local_search(&cur, &sites, Goal::Exact(&target[s..]))? {
            self.eval_step(&mut cur, e, &mut acc)?;
        }
        debug_assert_eq!(cur, target);
        Ok(acc)
    }

    pub fn value_dense(&self, dense: &[State]) -> Result<Q> {
        if let Some(v) = self.cache.lock().unwrap().get(dense) {
            return Ok(v.clone());
        }
        let v = -self.transport_integral(dense)?;
        self.cache.lock().unwrap().insert(dense.to_vec(), v.clone());
        Ok(v)
    }
}

impl LatticeFunction for TransportPotential<'_> {
    fn eval(&self, eta: &Configuration) -> Result<Q> {
        self.value_dense(&self.window.to_dense(eta)?)
    }
}

#[derive(Clone, Copy)]
enum Goal<'t> {
    MaxRank,
    Exact(&'t [State]),
}

fn connected_subset(g: &crate::multigraph::MultiGraph, s: usize) -> bool {
    let n = g.vertex_count();
    if s >= n {
        return false;
    }
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut stack = vec![s];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &e in g.out_edges(v) {
            let w = g.target(e);
            if w >= s && !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n - s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Differential, OrbitForm, OrbitFunction, OrbitTerm};
    use crate::crystal::{euclidean, hexagonal, LatticeEdge, LatticeVertex, PeriodicLattice};
    use crate::rational::{frac, int};
    use std::collections::BTreeMap;

    struct Table(HashMap<(Configuration, LatticeEdge), Q>);

    impl LatticeForm for Table {
        fn eval(&self, eta: &Configuration, e: &LatticeEdge) -> Result<Q> {
            Ok(self.0.get(&(eta.clone(), e.clone())).cloned().unwrap_or_default())
        }
    }

    #[test]
    fn exact_form_recovers_differences() {
        let l = euclidean(1).unwrap();
        let ex = Interaction::exclusion();
        let g = energy(&l);
        let d = Differential {
            f: &g,
            lattice: &l,
            interaction: &ex,
        };
        let w = Window::sized(&l, &[5]).unwrap();
        let PotentialResult::Exact(p) = potential(&d, &w, &ex, 1 << 10).unwrap() else {
            panic!("exact form reported as not closed");
        };
        assert_eq!(p.component_count(), 6);
        let mut buf = vec![0; 5];
        for code in 0..32 {
            decode(code, 2, &mut buf);
            let rep = p.representative(p.component_of(&buf));
            let diff = g.eval(&w.to_config(&buf)).unwrap() - g.eval(&w.to_config(&rep)).unwrap();
            assert_eq!(p.value_dense(&buf), diff);
        }
    }

    #[test]
    fn non_closed_cycle_is_reported() {
        // two parallel edges join the sites; only one of them carries weight
        let l = euclidean_nearest_two();
        let ex = Interaction::exclusion();
        let w = Window::sized(&l, &[2]).unwrap();
        let a = Configuration::single(LatticeVertex::new(0, vec![0]), 1);
        let b = Configuration::single(LatticeVertex::new(0, vec![1]), 1);
        let hops: Vec<&LatticeEdge> = w.edges().iter().filter(|e| e.cell == vec![0] && l.translation(e.seed_edge)[0] == 1).collect();
        assert_eq!(hops.len(), 2);
        let mut t = HashMap::new();
        t.insert((a.clone(), hops[0].clone()), int(1));
        t.insert((b.clone(), l.inverse(hops[0])), int(-1));
        let form = Table(t);
        assert!(crate::calculus::alternation_scan(&form, &w, &ex, 100).unwrap().is_empty());
        let PotentialResult::NotClosed(report) = potential(&form, &w, &ex, 100).unwrap() else {
            panic!("non-closed form accepted");
        };
        assert!(!report.integral.is_zero());
        assert_eq!(report.cycle.first().unwrap().config, report.cycle.last().unwrap().target(&l, &ex));
        assert_eq!(integrate(&form, &l, &ex, &report.cycle).unwrap(), report.integral);
    }

    fn euclidean_nearest_two() -> PeriodicLattice {
        let seed = crate::multigraph::MultiGraph::new(1, vec![0, 0, 0, 0], vec![0, 0, 0, 0], vec![1, 0, 3, 2], true).unwrap();
        PeriodicLattice::new(1, seed, vec![vec![1], vec![-1], vec![1], vec![-1]], vec!["e1".into()], "doubled").unwrap()
    }

    fn energy(l: &PeriodicLattice) -> OrbitFunction {
        let d = l.rank();
        let o = LatticeVertex::new(0, vec![0; d]);
        let mut terms = vec![OrbitTerm {
            support: vec![o.clone()],
            table: BTreeMap::from([(vec![1], frac(1, 3))]),
        }];
        for j in 0..d {
            terms.push(OrbitTerm {
                support: vec![o.clone(), o.translated(&crate::crystal::unit(d, j, 1))],
                table: BTreeMap::from([(vec![1, 1], int(2 + j as i64))]),
            });
        }
        OrbitFunction::new(l, terms).unwrap()
    }

    fn check_transport(l: &PeriodicLattice, interaction: &Interaction, sizes: &[i64], zetas: &[Vec<Q>]) {
        let g = if l.cell_size() == 1 { energy(l) } else { OrbitFunction::zero(l) };
        let form = OrbitForm::exact(&g, zetas, interaction, 1 << 20).unwrap();
        let w = Window::sized(l, sizes).unwrap();
        let PotentialResult::Exact(p) = potential(&form, &w, interaction, 1 << 16).unwrap() else {
            panic!("exact form reported as not closed");
        };
        let t = TransportPotential::new(&form, &w, interaction, w.len(), 100_000).unwrap();
        let q = interaction.len();
        let size = state_space_size(q, w.len()) as usize;
        let mut buf = vec![0; w.len()];
        for code in 0..size {
            decode(code, q, &mut buf);
            // representatives agree since both pick the lexicographically least member
            assert_eq!(t.value_dense(&buf).unwrap(), p.value_dense(&buf), "mismatch at {buf:?}");
        }
    }

    #[test]
    fn transport_matches_exhaustive_potential() {
        let ex = Interaction::exclusion();
        check_transport(&euclidean(1).unwrap(), &ex, &[7], &[vec![int(0), int(1)]]);
        check_transport(&euclidean(2).unwrap(), &ex, &[3, 3], &[vec![int(0), int(1)], vec![int(0), frac(1, 2)]]);
        check_transport(&hexagonal(), &ex, &[2, 3], &[vec![int(0), int(3)], vec![int(0), int(-1)]]);
        let two = Interaction::two_species_exclusion();
        check_transport(&euclidean(1).unwrap(), &two, &[5], &[vec![int(0), int(1), frac(2, 5)]]);
    }
}
