//! Crystal lattices in block-coordinate presentation.
//!
//! A [`PeriodicLattice`] is a finite seed crystal together with a translation
//! vector in ℤ^d for every seed edge. Lattice vertices are pairs `(base, cell)`;
//! the lattice edge `(e, c)` runs from `(o(e), c)` to `(t(e), c + τ(e))` and its
//! inverse is `(ē, c + τ(e))`. Every seed vertex at cell 0 forms the fundamental
//! domain, so block coordinates are simply the stored cells.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::lattice_index;
use crate::multigraph::{Distance, EdgeId, GraphJson, MultiGraph, VertexId};
use crate::{Error, Result};

pub type Cell = Vec<i64>;

pub fn cell_add(a: &[i64], b: &[i64]) -> Cell {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn cell_sub(a: &[i64], b: &[i64]) -> Cell {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn cell_neg(a: &[i64]) -> Cell {
    a.iter().map(|x| -x).collect()
}

pub fn l1(a: &[i64]) -> i64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn unit(d: usize, j: usize, sign: i64) -> Cell {
    let mut v = vec![0; d];
    v[j] = sign;
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVertex {
    pub base: VertexId,
    pub cell: Cell,
}

impl LatticeVertex {
    pub fn new(base: VertexId, cell: Cell) -> Self {
        LatticeVertex { base, cell }
    }

    pub fn translated(&self, by: &[i64]) -> Self {
        LatticeVertex {
            base: self.base,
            cell: cell_add(&self.cell, by),
        }
    }
}

impl fmt::Display for LatticeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}@{:?}", self.base, self.cell)
    }
}

/// The lattice edge of seed edge `seed_edge` leaving cell `cell`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeEdge {
    pub seed_edge: EdgeId,
    pub cell: Cell,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicLattice {
    rank: usize,
    seed: MultiGraph,
    translations: Vec<Cell>,
    generators: Vec<String>,
    name: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitJson {
    pub edge: EdgeId,
    pub translation: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeJson {
    pub rank: usize,
    pub seed: GraphJson,
    pub orbits: Vec<OrbitJson>,
    pub fundamental_domain: Vec<VertexId>,
    pub generators: Vec<String>,
}

fn default_generators(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("sigma{j}")).collect()
}

impl PeriodicLattice {
    /// Validates a presentation: strictly symmetric connected seed,
    /// `τ(ē) = −τ(e)`, a fundamental domain connected through `τ = 0` edges, and
    /// cycle translations generating ℤ^d (torsion-free, connected realization).
    pub fn new(
        rank: usize,
        seed: MultiGraph,
        translations: Vec<Cell>,
        generators: Vec<String>,
        name: impl Into<String>,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::validation("lattice rank must be at least 1"));
        }
        if seed.vertex_count() == 0 {
            return Err(Error::validation("seed crystal has no vertices"));
        }
        if translations.len() != seed.edge_count() {
            return Err(Error::input(format!(
                "expected {} translation vectors, got {}",
                seed.edge_count(),
                translations.len()
            )));
        }
        if generators.len() != rank {
            return Err(Error::input(format!(
                "expected {rank} generator names, got {}",
                generators.len()
            )));
        }
        if !seed.is_strictly_symmetric() {
            return Err(Error::validation("seed crystal must be strictly symmetric"));
        }
        if !seed.is_connected() {
            return Err(Error::validation("seed crystal must be connected"));
        }
        for (e, t) in translations.iter().enumerate() {
            if t.len() != rank {
                return Err(Error::input(format!("translation of edge {e} has wrong dimension")));
            }
            if translations[seed.inverse(e)] != cell_neg(t) {
                return Err(Error::validation(format!(
                    "translation of the inverse of edge {e} is not the negation"
                )));
            }
            if seed.is_loop(e) && t.iter().all(|&x| x == 0) {
                return Err(Error::validation(format!(
                    "edge {e} is a loop with zero translation; the realized lattice would not be strictly symmetric"
                )));
            }
        }
        let lattice = PeriodicLattice {
            rank,
            seed,
            translations,
            generators,
            name: name.into(),
        };
        if !lattice.fundamental_domain_connected() {
            return Err(Error::validation(
                "fundamental domain (cell 0) is not connected through zero-translation edges",
            ));
        }
        match lattice_index(&lattice.cycle_translations(), rank) {
            Some(1) => {}
            Some(k) => {
                return Err(Error::validation(format!(
                    "cycle translations span a sublattice of index {k}; the realized graph is disconnected (or the group has torsion)"
                )))
            }
            None => {
                return Err(Error::validation(
                    "cycle translations do not span ℤ^d; the realized graph is disconnected",
                ))
            }
        }
        Ok(lattice)
    }

    fn fundamental_domain_connected(&self) -> bool {
        let n = self.seed.vertex_count();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in self.seed.out_edges(v) {
                let w = self.seed.target(e);
                if !seen[w] && self.translations[e].iter().all(|&x| x == 0) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Translations of a generating set of closed walks in the seed: for a BFS
    /// potential `p`, every edge yields `p(o) + τ(e) − p(t)`.
    pub fn cycle_translations(&self) -> Vec<Cell> {
        let n = self.seed.vertex_count();
        let mut pot: Vec<Option<Cell>> = vec![None; n];
        pot[0] = Some(vec![0; self.rank]);
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in self.seed.out_edges(v) {
                let w = self.seed.target(e);
                if pot[w].is_none() {
                    pot[w] = Some(cell_add(pot[v].as_ref().unwrap(), &self.translations[e]));
                    queue.push_back(w);
                }
            }
        }
        self.seed
            .edges()
            .map(|e| {
                let po = pot[self.seed.origin(e)].as_ref().unwrap();
                let pt = pot[self.seed.target(e)].as_ref().unwrap();
                cell_sub(&cell_add(po, &self.translations[e]), pt)
            })
            .filter(|c| c.iter().any(|&x| x != 0))
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn seed(&self) -> &MultiGraph {
        &self.seed
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn translation(&self, e: EdgeId) -> &[i64] {
        &self.translations[e]
    }

    pub fn translations(&self) -> &[Cell] {
        &self.translations
    }

    /// Vertices per cell, `|Λ_F|`.
    pub fn cell_size(&self) -> usize {
        self.seed.vertex_count()
    }

    pub fn fundamental_domain(&self) -> Vec<VertexId> {
        (0..self.seed.vertex_count()).collect()
    }

    pub fn zero_cell(&self) -> Cell {
        vec![0; self.rank]
    }

    pub fn origin(&self, e: &LatticeEdge) -> LatticeVertex {
        LatticeVertex::new(self.seed.origin(e.seed_edge), e.cell.clone())
    }

    pub fn target(&self, e: &LatticeEdge) -> LatticeVertex {
        LatticeVertex::new(
            self.seed.target(e.seed_edge),
            cell_add(&e.cell, &self.translations[e.seed_edge]),
        )
    }

    pub fn inverse(&self, e: &LatticeEdge) -> LatticeEdge {
        LatticeEdge {
            seed_edge: self.seed.inverse(e.seed_edge),
            cell: cell_add(&e.cell, &self.translations[e.seed_edge]),
        }
    }

    pub fn out_edges(&self, v: &LatticeVertex) -> Vec<LatticeEdge> {
        self.seed
            .out_edges(v.base)
            .iter()
            .map(|&e| LatticeEdge {
                seed_edge: e,
                cell: v.cell.clone(),
            })
            .collect()
    }

    pub fn neighbors(&self, v: &LatticeVertex) -> Vec<LatticeVertex> {
        self.out_edges(v).iter().map(|e| self.target(e)).collect()
    }

    pub fn check_vertex(&self, v: &LatticeVertex) -> Result<()> {
        if v.base >= self.cell_size() || v.cell.len() != self.rank {
            return Err(Error::input(format!("{v} is not a vertex of this lattice")));
        }
        Ok(())
    }

    /// Block coordinate `u_{𝒮⁺}(v)`.
    pub fn block_coordinate(&self, v: &LatticeVertex) -> Cell {
        v.cell.clone()
    }

    /// Graph ball `B(center, r)` in the infinite lattice, sorted.
    pub fn graph_ball(&self, center: &LatticeVertex, r: usize) -> Vec<LatticeVertex> {
        let mut dist: HashMap<LatticeVertex, usize> = HashMap::from([(center.clone(), 0)]);
        let mut queue = VecDeque::from([center.clone()]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            if dv == r {
                continue;
            }
            for w in self.neighbors(&v) {
                if !dist.contains_key(&w) {
                    dist.insert(w.clone(), dv + 1);
                    queue.push_back(w);
                }
            }
        }
        let mut out: Vec<_> = dist.into_keys().collect();
        out.sort();
        out
    }

    /// Graph distance in the infinite lattice (always finite: lattices are connected).
    pub fn graph_distance(&self, a: &LatticeVertex, b: &LatticeVertex) -> usize {
        if a == b {
            return 0;
        }
        let mut seen: HashMap<LatticeVertex, usize> = HashMap::from([(a.clone(), 0)]);
        let mut queue = VecDeque::from([a.clone()]);
        while let Some(v) = queue.pop_front() {
            let dv = seen[&v];
            for w in self.neighbors(&v) {
                if &w == b {
                    return dv + 1;
                }
                if !seen.contains_key(&w) {
                    seen.insert(w.clone(), dv + 1);
                    queue.push_back(w);
                }
            }
        }
        unreachable!("lattice validated connected")
    }

    /// The nonzero difference vectors of the block graph `ℤ_𝒮`.
    pub fn block_steps(&self) -> Vec<Cell> {
        let set: BTreeSet<Cell> = self
            .translations
            .iter()
            .filter(|t| t.iter().any(|&x| x != 0))
            .cloned()
            .collect();
        set.into_iter().collect()
    }

    /// Full difference set `𝔼_𝒮` (including 0 when some edge stays in its cell).
    pub fn block_geometry(&self) -> BlockGeometry {
        BlockGeometry {
            differences: self.translations.iter().cloned().collect(),
        }
    }

    pub fn block_cell_distance(&self, a: &[i64], b: &[i64]) -> usize {
        if a == b {
            return 0;
        }
        let steps = self.block_steps();
        let target = cell_sub(b, a);
        let mut seen: HashMap<Cell, usize> = HashMap::from([(vec![0; self.rank], 0)]);
        let mut queue = VecDeque::from([vec![0; self.rank]]);
        while let Some(c) = queue.pop_front() {
            let dc = seen[&c];
            for s in &steps {
                let n = cell_add(&c, s);
                if n == target {
                    return dc + 1;
                }
                if !seen.contains_key(&n) {
                    seen.insert(n.clone(), dc + 1);
                    queue.push_back(n);
                }
            }
        }
        unreachable!("block steps generate ℤ^d")
    }

    /// Block distance `d_𝒮(v, w)`.
    pub fn block_distance(&self, v: &LatticeVertex, w: &LatticeVertex) -> usize {
        self.block_cell_distance(&v.cell, &w.cell)
    }

    /// Cells within block distance `r` of `center`, sorted.
    pub fn block_ball_cells(&self, center: &[i64], r: usize) -> Vec<Cell> {
        let steps = self.block_steps();
        let mut seen: BTreeMap<Cell, usize> = BTreeMap::from([(center.to_vec(), 0)]);
        let mut queue = VecDeque::from([center.to_vec()]);
        while let Some(c) = queue.pop_front() {
            let dc = seen[&c];
            if dc == r {
                continue;
            }
            for s in &steps {
                let n = cell_add(&c, s);
                if !seen.contains_key(&n) {
                    seen.insert(n.clone(), dc + 1);
                    queue.push_back(n);
                }
            }
        }
        seen.into_keys().collect()
    }

    /// Block ball `𝔅(v, r)`: every vertex of every cell within block distance `r`.
    pub fn block_ball(&self, v: &LatticeVertex, r: usize) -> Vec<LatticeVertex> {
        self.block_ball_cells(&v.cell, r)
            .into_iter()
            .flat_map(|c| (0..self.cell_size()).map(move |b| LatticeVertex::new(b, c.clone())))
            .collect()
    }

    pub fn is_essentially_euclidean(&self) -> EeReport {
        let d = self.rank;
        let allowed: BTreeSet<Cell> = (0..d)
            .flat_map(|j| [unit(d, j, 1), unit(d, j, -1)])
            .collect();
        let diffs: BTreeSet<Cell> = self.block_steps().into_iter().collect();
        let extra = diffs.difference(&allowed).next().cloned();
        let missing = allowed.difference(&diffs).next().cloned();
        let edges = self.seed.edge_count() as i64;
        let vertices = self.seed.vertex_count() as i64;
        let rank_formula = 1 - vertices + edges / 2;
        EeReport {
            essentially_euclidean: extra.is_none() && missing.is_none(),
            extra_difference: extra,
            missing_difference: missing,
            rank_formula,
            rank_criterion: rank_formula == d as i64,
        }
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            rank: self.rank,
            seed: self.seed.to_json(),
            orbits: self
                .translations
                .iter()
                .enumerate()
                .map(|(e, t)| OrbitJson {
                    edge: e,
                    translation: t.clone(),
                })
                .collect(),
            fundamental_domain: self.fundamental_domain(),
            generators: self.generators.clone(),
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let seed = MultiGraph::from_json(&j.seed)?;
        let mut translations: Vec<Option<Cell>> = vec![None; seed.edge_count()];
        for o in &j.orbits {
            if o.edge >= seed.edge_count() {
                return Err(Error::input(format!("orbit refers to unknown edge {}", o.edge)));
            }
            if translations[o.edge].replace(o.translation.clone()).is_some() {
                return Err(Error::input(format!("edge {} has two orbit entries", o.edge)));
            }
        }
        let translations = translations
            .into_iter()
            .enumerate()
            .map(|(e, t)| t.ok_or_else(|| Error::input(format!("edge {e} has no translation"))))
            .collect::<Result<Vec<_>>>()?;
        let mut fd = j.fundamental_domain.clone();
        fd.sort_unstable();
        if fd != (0..seed.vertex_count()).collect::<Vec<_>>() {
            return Err(Error::input(
                "fundamental_domain must list every seed vertex exactly once",
            ));
        }
        PeriodicLattice::new(j.rank, seed, translations, j.generators.clone(), "custom")
    }

    /// Parses names such as `euclidean(2)`, `euclidean_nearest_n(2,2)`, `hexagonal`.
    pub fn builtin(desc: &str) -> Result<Self> {
        let desc = desc.trim();
        let (name, args) = match desc.find('(') {
            Some(i) => {
                let inner = desc[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::input(format!("malformed lattice name {desc:?}")))?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        a.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::input(format!("bad parameter {a:?} in {desc:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (&desc[..i], args)
            }
            None => (desc, vec![]),
        };
        match (name, args.as_slice()) {
            ("euclidean", [d]) => euclidean(*d),
            ("euclidean_nearest_n", [d, n]) => euclidean_nearest_n(*d, *n),
            ("hexagonal", []) => Ok(hexagonal()),
            ("triangular", []) => Ok(triangular()),
            ("diamond", []) => Ok(diamond()),
            _ => Err(Error::input(format!(
                "unknown lattice {desc:?}; expected euclidean(d), euclidean_nearest_n(d,n), hexagonal, triangular or diamond"
            ))),
        }
    }
}

/// Builds a seed from forward edges `(origin, target, translation)`; each gets an inverse.
fn from_forward_edges(
    vertices: usize,
    rank: usize,
    forward: &[(VertexId, VertexId, Cell)],
    name: &str,
) -> Result<PeriodicLattice> {
    let pairs: Vec<_> = forward.iter().map(|(a, b, _)| (*a, *b)).collect();
    let seed = MultiGraph::from_pairs(vertices, &pairs)?;
    let translations = forward
        .iter()
        .flat_map(|(_, _, t)| [t.clone(), cell_neg(t)])
        .collect();
    PeriodicLattice::new(rank, seed, translations, default_generators(rank), name)
}

/// `ℤ^d` with nearest-neighbour edges: one vertex, loop pairs `±e_j`.
pub fn euclidean(d: usize) -> Result<PeriodicLattice> {
    if d == 0 {
        return Err(Error::input("euclidean lattice needs d >= 1"));
    }
    let fwd: Vec<_> = (0..d).map(|j| (0, 0, unit(d, j, 1))).collect();
    from_forward_edges(1, d, &fwd, &format!("euclidean({d})"))
}

/// `ℤ^d_n`: edges between points at ℓ¹ distance in `1..=n`.
pub fn euclidean_nearest_n(d: usize, n: usize) -> Result<PeriodicLattice> {
    if d == 0 || n == 0 {
        return Err(Error::input("euclidean_nearest_n needs d >= 1 and n >= 1"));
    }
    let n = n as i64;
    let mut fwd = Vec::new();
    let mut v = vec![-n; d];
    loop {
        let norm = l1(&v);
        let first_nonzero = v.iter().find(|&&x| x != 0);
        if norm > 0 && norm <= n && first_nonzero.is_some_and(|&x| x > 0) {
            fwd.push((0, 0, v.clone()));
        }
        let mut j = d;
        loop {
            if j == 0 {
                return from_forward_edges(1, d, &fwd, &format!("euclidean_nearest_n({d},{n})"));
            }
            j -= 1;
            if v[j] < n {
                v[j] += 1;
                break;
            }
            v[j] = -n;
        }
    }
}

/// Honeycomb: `x0 → x1` with translations `0, −e₁, −e₂`.
pub fn hexagonal() -> PeriodicLattice {
    from_forward_edges(
        2,
        2,
        &[(0, 1, vec![0, 0]), (0, 1, vec![-1, 0]), (0, 1, vec![0, -1])],
        "hexagonal",
    )
    .expect("hexagonal presentation is valid")
}

/// Triangular lattice: one vertex, loop pairs `e₁, e₂, e₁+e₂`.
pub fn triangular() -> PeriodicLattice {
    from_forward_edges(
        1,
        2,
        &[(0, 0, vec![1, 0]), (0, 0, vec![0, 1]), (0, 0, vec![1, 1])],
        "triangular",
    )
    .expect("triangular presentation is valid")
}

/// Diamond: `x0 → x1` with translations `0, −e₁, −e₂, −e₃`.
pub fn diamond() -> PeriodicLattice {
    from_forward_edges(
        2,
        3,
        &[
            (0, 1, vec![0, 0, 0]),
            (0, 1, vec![-1, 0, 0]),
            (0, 1, vec![0, -1, 0]),
            (0, 1, vec![0, 0, -1]),
        ],
        "diamond",
    )
    .expect("diamond presentation is valid")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockGeometry {
    pub differences: BTreeSet<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EeReport {
    /// Verdict for the stored coordinate.
    pub essentially_euclidean: bool,
    /// A block step outside `{±e_j}`, if any.
    pub extra_difference: Option<Cell>,
    /// A unit step `±e_j` not realized by any edge, if any.
    pub missing_difference: Option<Cell>,
    /// `1 − |X₀| + |E₀|/2`.
    pub rank_formula: i64,
    /// Whether the rank formula equals `d`, which certifies some coordinate is Euclidean.
    pub rank_criterion: bool,
}

/// Maximal abelian cover of a connected crystal: tree edges get translation 0,
/// each cotree pair gets `±` a fresh basis vector.
pub fn maximal_abelian_cover(seed: &MultiGraph) -> Result<PeriodicLattice> {
    if !seed.is_strictly_symmetric() {
        return Err(Error::validation("seed crystal must be strictly symmetric"));
    }
    if !seed.is_connected() || seed.vertex_count() == 0 {
        return Err(Error::validation("seed crystal must be connected and nonempty"));
    }
    let rank = 1 + seed.edge_count() / 2 - seed.vertex_count();
    if seed.edge_count() / 2 < seed.vertex_count() {
        return Err(Error::validation(
            "seed crystal has no independent cycles; the abelian cover would have rank 0",
        ));
    }
    let n = seed.vertex_count();
    let mut in_tree = vec![false; seed.edge_count()];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &e in seed.out_edges(v) {
            let w = seed.target(e);
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                in_tree[seed.inverse(e)] = true;
                queue.push_back(w);
            }
        }
    }
    let mut translations = vec![vec![0; rank]; seed.edge_count()];
    let mut next = 0;
    for e in seed.edges() {
        let inv = seed.inverse(e);
        if in_tree[e] || e > inv {
            continue;
        }
        translations[e] = unit(rank, next, 1);
        translations[inv] = unit(rank, next, -1);
        next += 1;
    }
    debug_assert_eq!(next, rank);
    PeriodicLattice::new(
        rank,
        seed.clone(),
        translations,
        default_generators(rank),
        "abelian-cover",
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    /// `max d_𝒳(o(e′), t(e′))` over edge representatives of the new lattice.
    pub c: usize,
    /// `max d_𝒳′(o(e), t(e))` over edge representatives of the original lattice.
    pub c_prime: usize,
}

/// The essentially Euclidean lattice on the same vertex set: a complete graph on
/// each cell plus all edges between vertices of cells differing by `±e_j`.
pub fn essentially_euclidean_equivalent(l: &PeriodicLattice) -> (PeriodicLattice, Equivalence) {
    let n = l.cell_size();
    let d = l.rank();
    let mut fwd = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            fwd.push((x, y, vec![0; d]));
        }
    }
    for j in 0..d {
        for x in 0..n {
            for y in 0..n {
                fwd.push((x, y, unit(d, j, 1)));
            }
        }
    }
    let ee = from_forward_edges(n, d, &fwd, &format!("ee-equivalent({})", l.name()))
        .expect("complete-cell presentation is valid");
    let zero = l.zero_cell();
    let reps = |lat: &PeriodicLattice| -> Vec<(LatticeVertex, LatticeVertex)> {
        lat.seed()
            .edges()
            .map(|e| {
                let edge = LatticeEdge {
                    seed_edge: e,
                    cell: zero.clone(),
                };
                (lat.origin(&edge), lat.target(&edge))
            })
            .collect()
    };
    let c = reps(&ee)
        .iter()
        .map(|(a, b)| l.graph_distance(a, b))
        .max()
        .unwrap_or(1)
        .max(1);
    let c_prime = reps(l)
        .iter()
        .map(|(a, b)| ee.graph_distance(a, b))
        .max()
        .unwrap_or(1)
        .max(1);
    (ee, Equivalence { c, c_prime })
}

/// Finite realization of a lattice on a box of cells `lo..=hi`.
///
/// Vertices are ordered by cell (lexicographically) and then by base vertex; this
/// order is the window order used for canonical representatives.
#[derive(Clone, Debug)]
pub struct Window {
    lattice: PeriodicLattice,
    lo: Cell,
    hi: Cell,
    vertices: Vec<LatticeVertex>,
    graph: MultiGraph,
    edges: Vec<LatticeEdge>,
    edge_index: HashMap<LatticeEdge, usize>,
}

impl Window {
    pub fn new(lattice: &PeriodicLattice, lo: Cell, hi: Cell) -> Result<Self> {
        let d = lattice.rank();
        if lo.len() != d || hi.len() != d {
            return Err(Error::input(format!("window bounds must have {d} coordinates")));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::input("window lower bound exceeds upper bound"));
        }
        let cells = box_cells(&lo, &hi);
        let n = lattice.cell_size();
        let vertices: Vec<LatticeVertex> = cells
            .iter()
            .flat_map(|c| (0..n).map(move |b| LatticeVertex::new(b, c.clone())))
            .collect();
        let mut w = Window {
            lattice: lattice.clone(),
            lo,
            hi,
            vertices,
            graph: MultiGraph::new(0, vec![], vec![], vec![], true)?,
            edges: vec![],
            edge_index: HashMap::new(),
        };
        let mut edges = Vec::new();
        for v in &w.vertices {
            for e in lattice.out_edges(v) {
                if w.contains_cell(&lattice.target(&e).cell) {
                    edges.push(e);
                }
            }
        }
        let edge_index: HashMap<LatticeEdge, usize> =
            edges.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let origin = edges.iter().map(|e| w.index(&lattice.origin(e)).unwrap()).collect();
        let target = edges.iter().map(|e| w.index(&lattice.target(e)).unwrap()).collect();
        let inverse = edges.iter().map(|e| edge_index[&lattice.inverse(e)]).collect();
        w.graph = MultiGraph::new(w.vertices.len(), origin, target, inverse, true)?;
        w.edges = edges;
        w.edge_index = edge_index;
        Ok(w)
    }

    /// Window `[-a, a] × … ` style constructor from per-axis extents `lo..=hi`.
    pub fn from_extents(lattice: &PeriodicLattice, extents: &[(i64, i64)]) -> Result<Self> {
        Window::new(
            lattice,
            extents.iter().map(|e| e.0).collect(),
            extents.iter().map(|e| e.1).collect(),
        )
    }

    /// Window with `sizes[j]` cells along axis `j`, starting at cell 0.
    pub fn sized(lattice: &PeriodicLattice, sizes: &[i64]) -> Result<Self> {
        if sizes.iter().any(|&s| s < 1) {
            return Err(Error::input("window sizes must be positive"));
        }
        Window::new(lattice, vec![0; sizes.len()], sizes.iter().map(|s| s - 1).collect())
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[LatticeVertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &LatticeVertex {
        &self.vertices[i]
    }

    pub fn edge(&self, i: usize) -> &LatticeEdge {
        &self.edges[i]
    }

    pub fn edges(&self) -> &[LatticeEdge] {
        &self.edges
    }

    pub fn edge_id(&self, e: &LatticeEdge) -> Option<usize> {
        self.edge_index.get(e).copied()
    }

    pub fn contains_cell(&self, c: &[i64]) -> bool {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| a <= x && x <= b)
    }

    /// `true` iff `c` is at least `margin` cells away from every face of the box.
    pub fn cell_interior(&self, c: &[i64], margin: i64) -> bool {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| a + margin <= *x && *x <= b - margin)
    }

    pub fn index(&self, v: &LatticeVertex) -> Option<usize> {
        if v.base >= self.lattice.cell_size() || !self.contains_cell(&v.cell) {
            return None;
        }
        let mut idx: i64 = 0;
        for ((x, a), b) in v.cell.iter().zip(&self.lo).zip(&self.hi) {
            idx = idx * (b - a + 1) + (x - a);
        }
        Some(idx as usize * self.lattice.cell_size() + v.base)
    }

    pub fn is_connected(&self) -> bool {
        self.graph.is_connected()
    }
}

/// All cells of the box `lo..=hi` in lexicographic order.
pub fn box_cells(lo: &[i64], hi: &[i64]) -> Vec<Cell> {
    let mut out = vec![];
    let mut c = lo.to_vec();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return out;
    }
    loop {
        out.push(c.clone());
        let mut j = c.len();
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if c[j] < hi[j] {
                c[j] += 1;
                break;
            }
            c[j] = lo[j];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementComponents {
    /// Components reaching the window boundary (the finite traces of infinite components).
    pub unbounded: usize,
    /// Components enclosed by the ball.
    pub bounded: usize,
}

/// Components of `window ∖ ball`, classified by whether they reach the window boundary.
pub fn complement_components(window: &Window, ball: &[LatticeVertex]) -> Result<ComplementComponents> {
    let lattice = window.lattice();
    let mut in_ball = vec![false; window.len()];
    for v in ball {
        let i = window.index(v).ok_or_else(|| {
            Error::inconclusive(format!("ball vertex {v} lies outside the window"))
        })?;
        in_ball[i] = true;
        for w in lattice.neighbors(v) {
            if !window.cell_interior(&w.cell, 1) {
                return Err(Error::inconclusive(format!(
                    "the neighbourhood of ball vertex {v} touches the window boundary"
                )));
            }
        }
    }
    let comps = window.graph().components(&|i| !in_ball[i]);
    let mut out = ComplementComponents {
        unbounded: 0,
        bounded: 0,
    };
    for comp in comps {
        if comp.iter().any(|&i| !window.cell_interior(&window.vertex(i).cell, 1)) {
            out.unbounded += 1;
        } else {
            out.bounded += 1;
        }
    }
    Ok(out)
}

/// Distance pairs `(d_a, d_b)` for all connected vertex pairs of a window realized in two
/// lattices sharing the vertex set.
pub fn window_distance_ratios(
    a: &PeriodicLattice,
    b: &PeriodicLattice,
    lo: Cell,
    hi: Cell,
) -> Result<Vec<(usize, usize)>> {
    let wa = Window::new(a, lo.clone(), hi.clone())?;
    let wb = Window::new(b, lo, hi)?;
    let mut pairs = Vec::new();
    for x in 0..wa.len() {
        let da = wa.graph().bfs_from(x, None);
        let db = wb.graph().bfs_from(x, None);
        for y in 0..wa.len() {
            if let (Distance::Finite(p), Distance::Finite(q)) = (da[y], db[y]) {
                pairs.push((p, q));
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let e2 = PeriodicLattice::builtin("euclidean(2)").unwrap();
        assert_eq!(e2.seed().vertex_count(), 1);
        assert_eq!(e2.seed().edge_count(), 4);
        let hex = PeriodicLattice::builtin("hexagonal").unwrap();
        assert_eq!((hex.seed().vertex_count(), hex.seed().edge_count()), (2, 6));
        let nn = PeriodicLattice::builtin("euclidean_nearest_n(2,2)").unwrap();
        assert_eq!(nn.seed().edge_count(), 12);
        assert!(nn.translations().iter().all(|t| (1..=2).contains(&l1(t))));
        assert!(PeriodicLattice::builtin("kagome").is_err());
        assert!(PeriodicLattice::builtin("euclidean(0)").is_err());
    }

    #[test]
    fn ee_classification() {
        assert!(hexagonal().is_essentially_euclidean().essentially_euclidean);
        assert!(!triangular().is_essentially_euclidean().essentially_euclidean);
        assert!(diamond().is_essentially_euclidean().essentially_euclidean);
        let nn = euclidean_nearest_n(2, 2).unwrap().is_essentially_euclidean();
        assert!(!nn.essentially_euclidean);
        assert!(!nn.rank_criterion);
        for d in 1..=3 {
            let r = euclidean(d).unwrap().is_essentially_euclidean();
            assert!(r.essentially_euclidean && r.rank_criterion);
        }
    }

    #[test]
    fn block_distances() {
        let tri = triangular();
        assert_eq!(tri.block_cell_distance(&[0, 0], &[1, 1]), 1);
        let e2 = euclidean(2).unwrap();
        assert_eq!(e2.block_cell_distance(&[0, 0], &[2, -3]), 5);
        let hex = hexagonal();
        let v = LatticeVertex::new(1, vec![2, -1]);
        assert_eq!(hex.block_coordinate(&v), vec![2, -1]);
        assert_eq!(hex.block_ball(&v, 0).len(), 2);
    }

    #[test]
    fn rejects_bad_presentations() {
        let seed = MultiGraph::from_pairs(1, &[(0, 0)]).unwrap();
        // translation 2 generates 2ℤ only
        assert!(PeriodicLattice::new(1, seed.clone(), vec![vec![2], vec![-2]], vec!["s".into()], "x").is_err());
        // inverse translation not negated
        assert!(PeriodicLattice::new(1, seed.clone(), vec![vec![1], vec![1]], vec!["s".into()], "x").is_err());
        assert!(PeriodicLattice::new(1, seed, vec![vec![1], vec![-1]], vec!["s".into()], "x").is_ok());
    }

    #[test]
    fn abelian_cover_ranks() {
        let hex = hexagonal();
        let cover = maximal_abelian_cover(hex.seed()).unwrap();
        assert_eq!(cover.rank(), 2);
        assert!(cover.is_essentially_euclidean().essentially_euclidean);
        let loop1 = MultiGraph::from_pairs(1, &[(0, 0)]).unwrap();
        assert_eq!(maximal_abelian_cover(&loop1).unwrap().rank(), 1);
        assert!(maximal_abelian_cover(&MultiGraph::path(3)).is_err());
    }

    #[test]
    fn equivalent_lattice_constants() {
        let (ee, eq) = essentially_euclidean_equivalent(&triangular());
        assert!(ee.is_essentially_euclidean().essentially_euclidean);
        assert_eq!(eq, Equivalence { c: 1, c_prime: 2 });
        let (_, eq) = essentially_euclidean_equivalent(&euclidean(2).unwrap());
        assert_eq!(eq, Equivalence { c: 1, c_prime: 1 });
    }

    #[test]
    fn window_basics() {
        let hex = hexagonal();
        let w = Window::sized(&hex, &[3, 3]).unwrap();
        assert_eq!(w.len(), 18);
        assert!(w.is_connected());
        for (i, v) in w.vertices().iter().enumerate() {
            assert_eq!(w.index(v), Some(i));
        }
        for e in w.graph().edges() {
            let le = w.edge(e);
            assert_eq!(w.index(&hex.origin(le)), Some(w.graph().origin(e)));
            assert_eq!(w.index(&hex.target(le)), Some(w.graph().target(e)));
        }
    }

    #[test]
    fn complement_component_counts() {
        let line = euclidean(1).unwrap();
        let w = Window::from_extents(&line, &[(-5, 5)]).unwrap();
        let ball = line.block_ball(&LatticeVertex::new(0, vec![0]), 0);
        assert_eq!(complement_components(&w, &ball).unwrap().unbounded, 2);
        let e2 = euclidean(2).unwrap();
        let w = Window::from_extents(&e2, &[(-4, 4), (-4, 4)]).unwrap();
        let ball = e2.block_ball(&LatticeVertex::new(0, vec![0, 0]), 1);
        let cc = complement_components(&w, &ball).unwrap();
        assert_eq!((cc.unbounded, cc.bounded), (1, 0));
        assert_eq!(complement_components(&w, &[]).unwrap().unbounded, 1);
        let edge_ball = e2.block_ball(&LatticeVertex::new(0, vec![4, 0]), 0);
        assert!(matches!(complement_components(&w, &edge_ball), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn json_round_trip() {
        let hex = hexagonal();
        let back = PeriodicLattice::from_json(&hex.to_json()).unwrap();
        assert_eq!(back.translations(), hex.translations());
        assert_eq!(back.seed(), hex.seed());
    }
}
