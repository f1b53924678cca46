//! Symmetric directed multi-graphs with explicit inversion, paths, morphisms,
//! quotients by finite group actions and covering checks.
//!
//! Vertices and edges are dense integer ids. The inversion `e ↦ ē` is stored as a
//! permutation array and must satisfy `o(ē) = t(e)`, `t(ē) = o(e)`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Graph distance; `Infinite` when no path exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: usize,
    origin: Vec<VertexId>,
    target: Vec<VertexId>,
    inverse: Vec<EdgeId>,
    strictly_symmetric: bool,
    out: Vec<Vec<EdgeId>>,
}

impl MultiGraph {
    /// Builds and validates a multi-graph. `strictly_symmetric` asserts `ē ≠ e`.
    pub fn new(
        vertices: usize,
        origin: Vec<VertexId>,
        target: Vec<VertexId>,
        inverse: Vec<EdgeId>,
        strictly_symmetric: bool,
    ) -> Result<Self> {
        let m = origin.len();
        if target.len() != m || inverse.len() != m {
            return Err(Error::input("origin/target/inverse arrays differ in length"));
        }
        for e in 0..m {
            if origin[e] >= vertices || target[e] >= vertices {
                return Err(Error::input(format!("edge {e} has an endpoint out of range")));
            }
            let inv = inverse[e];
            if inv >= m {
                return Err(Error::input(format!("edge {e} has inverse {inv} out of range")));
            }
            if inverse[inv] != e {
                return Err(Error::validation(format!("inversion is not an involution at edge {e}")));
            }
            if origin[inv] != target[e] || target[inv] != origin[e] {
                return Err(Error::validation(format!(
                    "inverse of edge {e} does not reverse its endpoints"
                )));
            }
            if strictly_symmetric && inv == e {
                return Err(Error::validation(format!(
                    "edge {e} is its own inverse in a strictly symmetric graph"
                )));
            }
        }
        let mut out = vec![Vec::new(); vertices];
        for (e, &o) in origin.iter().enumerate() {
            out[o].push(e);
        }
        Ok(MultiGraph {
            vertices,
            origin,
            target,
            inverse,
            strictly_symmetric,
            out,
        })
    }

    /// Builds a graph from undirected pairs; each pair becomes an edge and its inverse
    /// (a pair `(v, v)` becomes two distinct loop edges).
    pub fn from_pairs(vertices: usize, pairs: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut origin = Vec::new();
        let mut target = Vec::new();
        let mut inverse = Vec::new();
        for &(a, b) in pairs {
            let e = origin.len();
            origin.extend([a, b]);
            target.extend([b, a]);
            inverse.extend([e + 1, e]);
        }
        MultiGraph::new(vertices, origin, target, inverse, true)
    }

    pub fn path(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        MultiGraph::from_pairs(n, &pairs).expect("path graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least three vertices");
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        MultiGraph::from_pairs(n, &pairs).expect("cycle graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self, e: EdgeId) -> VertexId {
        self.origin[e]
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.target[e]
    }

    pub fn inverse(&self, e: EdgeId) -> EdgeId {
        self.inverse[e]
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        self.origin[e] == self.target[e]
    }

    pub fn is_strictly_symmetric(&self) -> bool {
        (0..self.edge_count()).all(|e| self.inverse[e] != e)
    }

    pub fn declared_strictly_symmetric(&self) -> bool {
        self.strictly_symmetric
    }

    /// Outgoing star `E_x`.
    pub fn out_edges(&self, x: VertexId) -> &[EdgeId] {
        &self.out[x]
    }

    pub fn edges(&self) -> std::ops::Range<EdgeId> {
        0..self.edge_count()
    }

    fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x >= self.vertices {
            return Err(Error::input(format!("unknown vertex {x}")));
        }
        Ok(())
    }

    /// BFS distances from `x` restricted to `allowed` vertices (all if `None`).
    pub fn bfs_from(&self, x: VertexId, allowed: Option<&dyn Fn(VertexId) -> bool>) -> Vec<Distance> {
        let mut dist = vec![Distance::Infinite; self.vertices];
        dist[x] = Distance::Finite(0);
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            let Distance::Finite(dv) = dist[v] else { unreachable!() };
            for &e in &self.out[v] {
                let w = self.target[e];
                if dist[w] == Distance::Infinite && allowed.is_none_or(|ok| ok(w)) {
                    dist[w] = Distance::Finite(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<Distance> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.bfs_from(x, None)[y])
    }

    /// A shortest path from `x` to `y`, if any.
    pub fn shortest_path(&self, x: VertexId, y: VertexId) -> Result<Option<Path>> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        let mut via: Vec<Option<EdgeId>> = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            if v == y {
                break;
            }
            for &e in &self.out[v] {
                let w = self.target[e];
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        if !seen[y] {
            return Ok(None);
        }
        let mut edges = Vec::new();
        let mut v = y;
        while v != x {
            let e = via[v].expect("bfs parent");
            edges.push(e);
            v = self.origin[e];
        }
        edges.reverse();
        Ok(Some(Path { edges }))
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        self.bfs_from(0, None)
            .iter()
            .all(|d| *d != Distance::Infinite)
    }

    /// Connected components restricted to the vertices accepted by `keep`.
    pub fn components(&self, keep: &dyn Fn(VertexId) -> bool) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.vertices];
        let mut comps = Vec::new();
        for s in 0..self.vertices {
            if seen[s] || !keep(s) {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &e in &self.out[v] {
                    let w = self.target[e];
                    if !seen[w] && keep(w) {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// The sub-multi-graph induced on `vertices` (listed order becomes the new ids).
    /// Returns the graph and, for each new edge, the original edge id.
    pub fn induced(&self, vertices: &[VertexId]) -> (MultiGraph, Vec<EdgeId>) {
        let mut new_id = vec![usize::MAX; self.vertices];
        for (i, &v) in vertices.iter().enumerate() {
            new_id[v] = i;
        }
        let kept: Vec<EdgeId> = self
            .edges()
            .filter(|&e| new_id[self.origin[e]] != usize::MAX && new_id[self.target[e]] != usize::MAX)
            .collect();
        let mut edge_new = vec![usize::MAX; self.edge_count()];
        for (i, &e) in kept.iter().enumerate() {
            edge_new[e] = i;
        }
        let g = MultiGraph::new(
            vertices.len(),
            kept.iter().map(|&e| new_id[self.origin[e]]).collect(),
            kept.iter().map(|&e| new_id[self.target[e]]).collect(),
            kept.iter().map(|&e| edge_new[self.inverse[e]]).collect(),
            self.strictly_symmetric,
        )
        .expect("induced subgraph of a valid graph is valid");
        (g, kept)
    }

    /// Diameter of a vertex set in this graph's distance.
    pub fn set_diameter(&self, set: &[VertexId]) -> Distance {
        let mut best = Distance::Finite(0);
        for &x in set {
            let d = self.bfs_from(x, None);
            for &y in set {
                best = best.max(d[y]);
            }
        }
        best
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices,
            edges: self
                .edges()
                .map(|e| EdgeJson {
                    id: e,
                    origin: self.origin[e],
                    target: self.target[e],
                    inverse: self.inverse[e],
                })
                .collect(),
            strictly_symmetric: self.strictly_symmetric,
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let m = j.edges.len();
        let mut origin = vec![usize::MAX; m];
        let mut target = vec![usize::MAX; m];
        let mut inverse = vec![usize::MAX; m];
        for e in &j.edges {
            if e.id >= m || origin[e.id] != usize::MAX {
                return Err(Error::input(format!("edge ids must be a permutation of 0..{m}; bad id {}", e.id)));
            }
            origin[e.id] = e.origin;
            target[e.id] = e.target;
            inverse[e.id] = e.inverse;
        }
        MultiGraph::new(j.vertices, origin, target, inverse, j.strictly_symmetric)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub id: EdgeId,
    pub origin: VertexId,
    pub target: VertexId,
    pub inverse: EdgeId,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub strictly_symmetric: bool,
}

/// A path `(e¹,…,e^N)` with `t(eⁱ) = o(eⁱ⁺¹)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Path {
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn new(g: &MultiGraph, edges: Vec<EdgeId>) -> Result<Self> {
        for w in edges.windows(2) {
            if g.target(w[0]) != g.origin(w[1]) {
                return Err(Error::validation(format!(
                    "edges {} and {} do not compose",
                    w[0], w[1]
                )));
            }
        }
        Ok(Path { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// A morphism `(u, u_E)` compatible with incidence and inversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: Vec<VertexId>,
    pub edge_map: Vec<EdgeId>,
}

impl GraphMorphism {
    pub fn identity(g: &MultiGraph) -> Self {
        GraphMorphism {
            vertex_map: (0..g.vertex_count()).collect(),
            edge_map: g.edges().collect(),
        }
    }

    pub fn validate(&self, from: &MultiGraph, to: &MultiGraph) -> Result<()> {
        if self.vertex_map.len() != from.vertex_count() || self.edge_map.len() != from.edge_count() {
            return Err(Error::input("morphism maps have the wrong length"));
        }
        if self.vertex_map.iter().any(|&y| y >= to.vertex_count())
            || self.edge_map.iter().any(|&f| f >= to.edge_count())
        {
            return Err(Error::input("morphism maps outside the target graph"));
        }
        for e in from.edges() {
            let f = self.edge_map[e];
            if to.origin(f) != self.vertex_map[from.origin(e)] || to.target(f) != self.vertex_map[from.target(e)] {
                return Err(Error::validation(format!("edge {e} breaks incidence")));
            }
            if to.inverse(f) != self.edge_map[from.inverse(e)] {
                return Err(Error::validation(format!("edge {e} breaks inversion")));
            }
        }
        Ok(())
    }

    pub fn is_bijective(&self, g: &MultiGraph) -> bool {
        let vs: HashSet<_> = self.vertex_map.iter().collect();
        let es: HashSet<_> = self.edge_map.iter().collect();
        vs.len() == g.vertex_count() && es.len() == g.edge_count()
    }

    fn compose(&self, other: &GraphMorphism) -> GraphMorphism {
        // self ∘ other
        GraphMorphism {
            vertex_map: other.vertex_map.iter().map(|&v| self.vertex_map[v]).collect(),
            edge_map: other.edge_map.iter().map(|&e| self.edge_map[e]).collect(),
        }
    }
}

/// `true` iff both maps are surjective and every outgoing star maps bijectively.
pub fn is_covering(m: &GraphMorphism, from: &MultiGraph, to: &MultiGraph) -> Result<bool> {
    m.validate(from, to)?;
    let vs: HashSet<_> = m.vertex_map.iter().copied().collect();
    let es: HashSet<_> = m.edge_map.iter().copied().collect();
    if vs.len() != to.vertex_count() || es.len() != to.edge_count() {
        return Ok(false);
    }
    for x in 0..from.vertex_count() {
        let image: BTreeSet<EdgeId> = from.out_edges(x).iter().map(|&e| m.edge_map[e]).collect();
        let star: BTreeSet<EdgeId> = to.out_edges(m.vertex_map[x]).iter().copied().collect();
        if image.len() != from.out_edges(x).len() || image != star {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of quotienting by a group generated by automorphisms.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: MultiGraph,
    pub projection: GraphMorphism,
    /// Whether the generated group acts freely on vertices.
    pub free: bool,
    pub group_order: usize,
}

/// Quotient of `g` by the group generated by `generators` (each must be an automorphism).
pub fn quotient(g: &MultiGraph, generators: &[GraphMorphism]) -> Result<Quotient> {
    for (i, s) in generators.iter().enumerate() {
        s.validate(g, g)
            .map_err(|e| Error::validation(format!("generator {i} is not an automorphism: {e}")))?;
        if !s.is_bijective(g) {
            return Err(Error::validation(format!("generator {i} is not bijective")));
        }
    }
    // Close the generators into the full (finite) group.
    let id = GraphMorphism::identity(g);
    let mut group = vec![id.clone()];
    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    let mut seen_full: HashSet<(Vec<VertexId>, Vec<EdgeId>)> = HashSet::new();
    seen_full.insert((id.vertex_map.clone(), id.edge_map.clone()));
    seen.insert(id.vertex_map.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(h) = queue.pop_front() {
        for s in generators {
            let k = s.compose(&h);
            if seen_full.insert((k.vertex_map.clone(), k.edge_map.clone())) {
                seen.insert(k.vertex_map.clone());
                group.push(k.clone());
                queue.push_back(k);
            }
        }
    }
    let free = group.iter().all(|h| {
        h.vertex_map == (0..g.vertex_count()).collect::<Vec<_>>()
            && h.edge_map == g.edges().collect::<Vec<_>>()
            || (0..g.vertex_count()).all(|x| h.vertex_map[x] != x)
    });

    let orbit_ids = |n: usize, act: &dyn Fn(&GraphMorphism, usize) -> usize| {
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        for x in 0..n {
            if id[x] != usize::MAX {
                continue;
            }
            for h in &group {
                id[act(h, x)] = next;
            }
            next += 1;
        }
        (id, next)
    };
    let (vid, nv) = orbit_ids(g.vertex_count(), &|h, x| h.vertex_map[x]);
    let (eid, ne) = orbit_ids(g.edge_count(), &|h, e| h.edge_map[e]);
    let mut origin = vec![0; ne];
    let mut target = vec![0; ne];
    let mut inverse = vec![0; ne];
    for e in g.edges() {
        origin[eid[e]] = vid[g.origin(e)];
        target[eid[e]] = vid[g.target(e)];
        inverse[eid[e]] = eid[g.inverse(e)];
    }
    let strict = (0..ne).all(|e| inverse[e] != e);
    let graph = MultiGraph::new(nv, origin, target, inverse, strict)?;
    Ok(Quotient {
        graph,
        projection: GraphMorphism {
            vertex_map: vid,
            edge_map: eid,
        },
        free,
        group_order: group.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> MultiGraph {
        MultiGraph::cycle(4)
    }

    #[test]
    fn trivial_distances() {
        let g = MultiGraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(g.distance(0, 0).unwrap(), Distance::Finite(0));
        assert_eq!(g.distance(0, 1).unwrap(), Distance::Finite(1));
        assert!(g.distance(0, 5).is_err());
    }

    #[test]
    fn four_cycle_opposite_corners() {
        let g = four_cycle();
        let g = &g;
        assert_eq!(g.distance(0, 2).unwrap(), Distance::Finite(2));
        // Oracle: enumerate all edge sequences of length <= 4 from vertex 0.
        let mut best = None;
        let mut frontier = vec![(0usize, 0usize)];
        for len in 0..=4 {
            if frontier.iter().any(|&(v, _)| v == 2) {
                best = Some(len);
                break;
            }
            frontier = frontier
                .iter()
                .flat_map(|&(v, l)| g.out_edges(v).iter().map(move |&e| (g.target(e), l + 1)))
                .collect();
        }
        assert_eq!(best, Some(2));
    }

    #[test]
    fn unreachable_is_infinite() {
        let g = MultiGraph::new(2, vec![], vec![], vec![], true).unwrap();
        assert_eq!(g.distance(0, 1).unwrap(), Distance::Infinite);
        assert!(!g.is_connected());
        let single = MultiGraph::new(1, vec![], vec![], vec![], true).unwrap();
        assert!(single.is_connected());
    }

    #[test]
    fn rejects_bad_inversion() {
        assert!(MultiGraph::new(2, vec![0, 1], vec![1, 0], vec![0, 1], false).is_err());
        // a self-inverse loop is fine unless strict symmetry is asserted
        assert!(MultiGraph::new(1, vec![0], vec![0], vec![0], false).is_ok());
        assert!(MultiGraph::new(1, vec![0], vec![0], vec![0], true).is_err());
    }

    #[test]
    fn path_validation() {
        let g = MultiGraph::path(3);
        assert!(Path::new(&g, vec![0, 2]).is_ok());
        assert!(Path::new(&g, vec![0, 3]).is_err());
    }

    #[test]
    fn identity_is_covering_and_trivial_quotient() {
        let g = four_cycle();
        assert!(is_covering(&GraphMorphism::identity(&g), &g, &g).unwrap());
        let q = quotient(&g, &[]).unwrap();
        assert_eq!(q.graph.vertex_count(), 4);
        assert_eq!(q.graph.edge_count(), 8);
    }

    #[test]
    fn antipodal_fold_of_four_cycle() {
        let g = four_cycle();
        // edges of cycle(n): pair i is (2i: i -> i+1, 2i+1: i+1 -> i)
        let rot2 = GraphMorphism {
            vertex_map: vec![2, 3, 0, 1],
            edge_map: vec![4, 5, 6, 7, 0, 1, 2, 3],
        };
        let q = quotient(&g, &[rot2]).unwrap();
        assert!(q.free);
        assert_eq!(q.group_order, 2);
        assert_eq!(q.graph.vertex_count(), 2);
        assert_eq!(q.graph.edge_count(), 4);
        assert!(is_covering(&q.projection, &g, &q.graph).unwrap());
    }

    #[test]
    fn collapse_with_distinct_degrees_is_not_covering() {
        // path 0-1-2 collapsed onto a single edge pair 0-1 by 0,2 -> 0 and 1 -> 1
        let g = MultiGraph::path(3);
        let h = MultiGraph::from_pairs(2, &[(0, 1)]).unwrap();
        let m = GraphMorphism {
            vertex_map: vec![0, 1, 0],
            edge_map: vec![0, 1, 1, 0],
        };
        assert!(!is_covering(&m, &g, &h).unwrap());
    }

    #[test]
    fn non_automorphism_generator_rejected() {
        let g = MultiGraph::path(3);
        let bad = GraphMorphism {
            vertex_map: vec![1, 2, 0],
            edge_map: vec![2, 3, 0, 1],
        };
        assert!(quotient(&g, &[bad]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = MultiGraph::cycle(5);
        let back = MultiGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }
}
