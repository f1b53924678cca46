//! Acceptance suites: exact checks of every structural result at desk scale, shared by
//! the test target and the `verify` command.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{
    anchored_supports, expand, FnFunction, LatticeFunction, OrbitForm, OrbitFunction, OrbitTerm, TransportPotential,
};
use crate::configspace::{step, ConfigSpace, Configuration};
use crate::crystal::{
    diamond, essentially_euclidean_equivalent, euclidean, euclidean_nearest_n, hexagonal, maximal_abelian_cover,
    triangular, LatticeVertex, PeriodicLattice, Window,
};
use crate::interaction::{charge_with, decode, default_locales, encode, state_space_size, Interaction, State};
use crate::linalg::{lattice_index, SparseSystem};
use crate::multigraph::MultiGraph;
use crate::varadhan::{
    a_function, a_identity_check, cocycle_residuals, decompose, dim_dv_check, pairing, radius_for, split_cocycle,
    symmetry_violations, translation_norm, BallPair, DecomposeOptions, MonoidKind,
};
use crate::{rational, Error, Result, Q};

/// Problem sizes of the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scale {
    /// The desk-scale sizes of the acceptance criteria.
    Small,
    /// More samples and fixtures.
    Large,
}

impl Scale {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Scale::Small),
            "large" => Ok(Scale::Large),
            _ => Err(Error::input(format!("unknown scale {s:?}; expected small or large"))),
        }
    }

    fn pick(self, small: usize, large: usize) -> usize {
        match self {
            Scale::Small => small,
            Scale::Large => large,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    /// Number of exact comparisons performed.
    pub checks: usize,
    /// Windows and sample sizes the verdict is exact on.
    pub scope: String,
    pub failures: Vec<String>,
}

pub const SUITES: [&str; 10] = [
    "ee-classification",
    "abelian-cover-rank",
    "kernel-of-differential",
    "expansion-reconstruction",
    "pairing-cocycle",
    "splitting",
    "decomposition-round-trip",
    "dimension-of-dv",
    "linear-growth-identities",
    "irreducibility-evidence",
];

/// Suite id for a name or a 1-based number.
pub fn suite_id(name: &str) -> Result<usize> {
    if let Ok(i) = name.parse::<usize>() {
        if (1..=SUITES.len()).contains(&i) {
            return Ok(i);
        }
    }
    SUITES
        .iter()
        .position(|s| *s == name)
        .map(|i| i + 1)
        .ok_or_else(|| Error::input(format!("unknown suite {name:?}")))
}

pub fn run_suite(id: usize, scale: Scale) -> Result<SuiteReport> {
    let mut r = Recorder::default();
    let scope = match id {
        1 => ee_classification(&mut r)?,
        2 => abelian_cover_rank(&mut r)?,
        3 => kernel_of_differential(&mut r, scale)?,
        4 => expansion_reconstruction(&mut r, scale)?,
        5 => pairing_cocycle(&mut r, scale)?,
        6 => splitting(&mut r, scale)?,
        7 => decomposition_round_trip(&mut r, scale)?,
        8 => dimension_of_dv(&mut r)?,
        9 => linear_growth_identities(&mut r, scale)?,
        10 => irreducibility_evidence(&mut r)?,
        _ => return Err(Error::input(format!("suite ids run from 1 to {}", SUITES.len()))),
    };
    Ok(SuiteReport {
        id,
        name: SUITES[id - 1].to_string(),
        pass: r.failures.is_empty() && r.checks > 0,
        checks: r.checks,
        scope,
        failures: r.failures,
    })
}

pub fn run_all(scale: Scale) -> Result<Vec<SuiteReport>> {
    (1..=SUITES.len()).map(|i| run_suite(i, scale)).collect()
}

#[derive(Default)]
struct Recorder {
    checks: usize,
    failures: Vec<String>,
}

impl Recorder {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, got: T, want: T, what: &str) {
        self.checks += 1;
        if got != want {
            self.failures.push(format!("{what}: got {got:?}, expected {want:?}"));
        }
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.gen_range(-6i64..=6).into(), rng.gen_range(1i64..=4).into())
}

/// A shift-invariant uniform function with random rational terms on every support
/// orbit of graph diameter `≤ radius` and at most `max_size` sites.
pub fn random_orbit_function(
    lattice: &PeriodicLattice,
    interaction: &Interaction,
    radius: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<OrbitFunction> {
    let q = interaction.len();
    let mut terms = Vec::new();
    for support in anchored_supports(lattice, radius, max_size) {
        let m = support.len();
        let mut table = BTreeMap::new();
        let mut buf = vec![0; m];
        for code in 0..state_space_size(q - 1, m) as usize {
            decode(code, q - 1, &mut buf);
            if rng.gen_bool(0.6) {
                table.insert(buf.iter().map(|s| s + 1).collect(), small_rational(rng));
            }
        }
        terms.push(OrbitTerm { support, table });
    }
    OrbitFunction::new(lattice, terms)
}

/// A random element of the span of the conserved basis.
pub fn random_conserved(interaction: &Interaction, rng: &mut ChaCha8Rng) -> Vec<Q> {
    let mut z = vec![Q::zero(); interaction.len()];
    for b in interaction.conserved_basis() {
        let c = small_rational(rng);
        for (zi, bi) in z.iter_mut().zip(&b) {
            *zi += &c * bi;
        }
    }
    z
}

fn ee_classification(r: &mut Recorder) -> Result<String> {
    let mut cases = vec![
        (hexagonal(), true),
        (triangular(), false),
        (euclidean_nearest_n(2, 2)?, false),
    ];
    for d in 1..=3 {
        cases.push((euclidean(d)?, true));
    }
    for (l, want) in &cases {
        let rep = l.is_essentially_euclidean();
        r.eq(rep.essentially_euclidean, *want, &format!("{} essentially Euclidean", l.name()));
        if !want {
            let (eq, _) = essentially_euclidean_equivalent(l);
            r.eq(
                eq.is_essentially_euclidean().essentially_euclidean,
                true,
                &format!("equivalent lattice of {}", l.name()),
            );
        }
    }
    Ok("block-quotient distance versus ℓ¹ distance on all unit differences".into())
}

fn abelian_cover_rank(r: &mut Recorder) -> Result<String> {
    let seeds: Vec<(&str, MultiGraph, Option<usize>)> = vec![
        ("hexagonal seed", MultiGraph::from_pairs(2, &[(0, 1), (0, 1), (0, 1)])?, Some(2)),
        ("bouquet of two loops", MultiGraph::from_pairs(1, &[(0, 0), (0, 0)])?, Some(2)),
        ("triangle", MultiGraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)])?, Some(1)),
        (
            "complete graph K4",
            MultiGraph::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?,
            Some(3),
        ),
        (
            "diamond seed",
            diamond().seed().clone(),
            None,
        ),
    ];
    for (name, seed, golden) in seeds {
        let formula = 1 + seed.edge_count() / 2 - seed.vertex_count();
        let cover = maximal_abelian_cover(&seed)?;
        r.eq(cover.rank(), formula, &format!("{name}: rank against 1 − |X₀| + |E₀|/2"));
        r.eq(cover.rank(), cycle_rank(&seed), &format!("{name}: rank against the spanning-forest count"));
        if let Some(g) = golden {
            r.eq(cover.rank(), g, &format!("{name}: rank"));
        }
        r.eq(
            lattice_index(&cover.cycle_translations(), cover.rank()),
            Some(1),
            &format!("{name}: closed walks generate the translation group"),
        );
    }
    Ok("five seed crystals".into())
}

/// `|E|/2 − |V| + #components` from an explicit spanning forest.
fn cycle_rank(g: &MultiGraph) -> usize {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] == x {
            x
        } else {
            let r = find(p, p[x]);
            p[x] = r;
            r
        }
    }
    let mut extra = 0;
    for e in g.edges() {
        if e > g.inverse(e) {
            continue;
        }
        let (a, b) = (find(&mut parent, g.origin(e)), find(&mut parent, g.target(e)));
        if a == b {
            extra += 1;
        } else {
            parent[a] = b;
        }
    }
    extra
}

fn kernel_of_differential(r: &mut Recorder, scale: Scale) -> Result<String> {
    let e1 = euclidean(1)?;
    let e2 = euclidean(2)?;
    let hex = hexagonal();
    let ex = Interaction::exclusion();
    let ts = Interaction::two_species_exclusion();
    let mut cases = vec![
        (Window::sized(&e1, &[8])?, &ex),
        (Window::sized(&e2, &[2, 4])?, &ex),
        (Window::sized(&hex, &[2, 2])?, &ex),
        (Window::sized(&e1, &[6])?, &ts),
        (Window::sized(&e2, &[2, 3])?, &ts),
    ];
    if scale == Scale::Large {
        cases.push((Window::sized(&e2, &[2, 4])?, &ts));
        cases.push((Window::sized(&hex, &[2, 2])?, &ts));
    }
    let mut scope = Vec::new();
    for (w, it) in cases {
        let label = format!("states {{{}}} on {} {:?}..{:?}", it.names().join(","), w.lattice().name(), w.lo(), w.hi());
        let space = ConfigSpace::new(&w, it, 1 << 24)?;
        let q = it.len();
        let mut sys = SparseSystem::new(space.size);
        let mut buf = vec![0; w.len()];
        for code in 0..space.size {
            decode(code, q, &mut buf);
            for e in w.graph().edges() {
                let mut next = buf.clone();
                if step(&w, it, &mut next, e) {
                    let nc = encode(&next, q);
                    if nc > code {
                        sys.insert(BTreeMap::from([(code, Q::from_integer(1.into())), (nc, Q::from_integer((-1).into()))]));
                    }
                }
            }
        }
        let kernel = sys.kernel();
        let components = space.components();
        let component_count = components.iter().max().map_or(0, |m| m + 1);
        let charges = it.charge_catalog(w.len()).realizable(w.len()).len();
        r.eq(kernel.len(), component_count, &format!("{label}: dim Ker ∂ against BFS components"));
        r.eq(kernel.len(), charges, &format!("{label}: dim Ker ∂ against |ℳ_n|"));
        let contributions = it.state_charges();
        let mut class_of: BTreeMap<Vec<Q>, usize> = BTreeMap::new();
        let mut ok = true;
        for (code, comp) in components.iter().enumerate() {
            decode(code, q, &mut buf);
            let c = charge_with(&contributions, &buf);
            ok &= *class_of.entry(c).or_insert(*comp) == *comp;
        }
        r.check(ok, || format!("{label}: a charge class splits into several components"));
        let mut factors = true;
        for v in &kernel {
            let mut value_of: BTreeMap<Vec<Q>, &Q> = BTreeMap::new();
            for (code, x) in v.iter().enumerate() {
                decode(code, q, &mut buf);
                let c = charge_with(&contributions, &buf);
                factors &= *value_of.entry(c).or_insert(x) == x;
            }
        }
        r.check(factors, || format!("{label}: a kernel vector does not factor through the charge"));
        scope.push(label);
    }
    Ok(scope.join("; "))
}

fn expansion_reconstruction(r: &mut Recorder, scale: Scale) -> Result<String> {
    let e1 = euclidean(1)?;
    let e2 = euclidean(2)?;
    let hex = hexagonal();
    let ex = Interaction::exclusion();
    let ts = Interaction::two_species_exclusion();
    let windows = [
        Window::sized(&e1, &[4])?,
        Window::sized(&e2, &[2, 2])?,
        Window::sized(&hex, &[1, 2])?,
        Window::sized(&e1, &[3])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let total = scale.pick(100, 400);
    for i in 0..total {
        let w = &windows[i % windows.len()];
        let it = if i % 2 == 0 { &ex } else { &ts };
        let q = it.len();
        let size = state_space_size(q, w.len()) as usize;
        let values: Vec<Q> = (0..size).map(|_| small_rational(&mut rng)).collect();
        let f = FnFunction(|eta: &Configuration| Ok(values[encode(&w.to_dense(eta)?, q)].clone()));
        let sites = w.vertices();
        let exp = expand(&f, sites, q, 1 << 20)?;
        let mut buf = vec![0; w.len()];
        let mut same = true;
        for (code, want) in values.iter().enumerate() {
            decode(code, q, &mut buf);
            same &= &exp.eval(&w.to_config(&buf))? == want;
        }
        r.check(same, || format!("function {i}: reconstruction differs from the original"));
        let again = expand(&exp, sites, q, 1 << 20)?;
        r.check(again == exp, || format!("function {i}: re-expansion changed the term tables"));
    }
    Ok(format!("{total} random functions on windows of at most 4 sites"))
}

fn pairing_cocycle(r: &mut Recorder, scale: Scale) -> Result<String> {
    let ex = Interaction::exclusion();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let max = scale.pick(3, 4) as i64;
    let mut scope = Vec::new();
    for lattice in [euclidean(2)?, hexagonal()] {
        let d = lattice.rank();
        let g0 = random_orbit_function(&lattice, &ex, 1, 2, &mut rng)?;
        let zetas: Vec<Vec<Q>> = (0..d).map(|_| random_conserved(&ex, &mut rng)).collect();
        let form = OrbitForm::exact(&g0, &zetas, &ex, 1 << 20)?;
        let r_form = form.effective_radius().max(1);
        let sep = translation_norm(&lattice) * r_form;
        let content = (3 * max) as usize;
        let k = radius_for(&lattice, content);
        let (lo, hi) = BallPair::required_box(d, k, sep);
        let w = Window::new(&lattice, lo, hi)?;
        let f = TransportPotential::new(&form, &w, &ex, content, 1 << 18)?;
        let catalog = ex.charge_catalog(content);
        let family = BallPair::family(d, k, sep);
        for p in &family {
            r.check(p.admissible(sep), || format!("{}: pair {p:?} is not admissible", lattice.name()));
        }
        let c = |n: i64| vec![Q::from_integer(n.into())];
        let mut table = BTreeMap::new();
        for a in 0..=2 * max {
            for b in 0..=2 * max {
                if a + b > 3 * max || (a > max && b > max) {
                    continue;
                }
                let canonical = pairing(&f, &lattice, &ex, &catalog, &family[0], &c(a), &c(b))?;
                if a <= max && b <= max {
                    for p in &family[1..] {
                        let other = pairing(&f, &lattice, &ex, &catalog, p, &c(a), &c(b))?;
                        r.check(other == canonical, || {
                            format!(
                                "{}: h({a},{b}) is {} via {:?} but {} via the canonical pair",
                                lattice.name(),
                                rational::format(&other),
                                p,
                                rational::format(&canonical)
                            )
                        });
                    }
                }
                table.insert((c(a), c(b)), canonical);
            }
        }
        let (checked, bad) = cocycle_residuals(&table);
        r.check(checked > 0 && bad.is_empty(), || {
            format!("{}: cocycle residual nonzero on {} of {checked} triples", lattice.name(), bad.len())
        });
        r.checks += checked;
        let asym = symmetry_violations(&table);
        r.check(asym.is_empty(), || format!("{}: pairing not symmetric at {:?}", lattice.name(), asym[0]));
        scope.push(format!(
            "{} window {:?}..{:?}, {} ball pairs, α,β,γ ≤ {max}",
            lattice.name(),
            w.lo(),
            w.hi(),
            family.len()
        ));
    }
    Ok(scope.join("; "))
}

fn splitting(r: &mut Recorder, scale: Scale) -> Result<String> {
    let c1 = |n: i64| vec![Q::from_integer(n.into())];
    let mut t = BTreeMap::new();
    for m in 0..=20i64 {
        for n in 0..=20 - m {
            t.insert((c1(m), c1(n)), Q::from_integer((m * n).into()));
        }
    }
    let h = split_cocycle(&t, &MonoidKind::Naturals { unit: c1(1) })?;
    for n in 0..=10i64 {
        r.eq(h.get(&c1(n)).cloned(), Some(Q::from_integer((-n * (n - 1) / 2).into())), &format!("h({n})"));
    }
    for m in 0..=10i64 {
        for n in 0..=10i64 {
            let v = &h.values[&c1(m)] + &h.values[&c1(n)] - &h.values[&c1(m + n)];
            r.eq(v, Q::from_integer((m * n).into()), &format!("h({m})+h({n})−h({})", m + n));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trials = scale.pick(10, 40);
    for i in 0..trials {
        let charges: Vec<Vec<Q>> = (0..=6i64)
            .flat_map(|a| (0..=6 - a).map(move |b| vec![Q::from_integer(a.into()), Q::from_integer(b.into())]))
            .collect();
        let hidden: BTreeMap<Vec<Q>, Q> = charges.iter().map(|c| (c.clone(), small_rational(&mut rng))).collect();
        let mut table = BTreeMap::new();
        for a in &charges {
            for b in &charges {
                let s: Vec<Q> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(hs) = hidden.get(&s) {
                    table.insert((a.clone(), b.clone()), &hidden[a] + &hidden[b] - hs);
                }
            }
        }
        let (_, bad) = cocycle_residuals(&table);
        r.check(bad.is_empty(), || format!("random cocycle {i}: not a cocycle"));
        match split_cocycle(&table, &MonoidKind::Symmetric) {
            Ok(h) => {
                let residual = h.first_failure(&table);
                r.check(residual.is_none(), || format!("random cocycle {i}: nonzero residual {residual:?}"));
            }
            Err(e) => r.check(false, || format!("random cocycle {i}: {e}")),
        }
    }
    Ok(format!("ℕ product cocycle to 20; {trials} random symmetric cocycles on charges in ℤ² with a+b ≤ 6"))
}

fn decomposition_round_trip(r: &mut Recorder, scale: Scale) -> Result<String> {
    let ex = Interaction::exclusion();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let per = scale.pick(2, 5);
    let mut scope = Vec::new();
    for lattice in [euclidean(1)?, euclidean(2)?, hexagonal()] {
        let d = lattice.rank();
        for i in 0..per {
            let label = format!("{} fixture {i}", lattice.name());
            let g0 = random_orbit_function(&lattice, &ex, 1, 2, &mut rng)?;
            let zetas: Vec<Vec<Q>> = (0..d).map(|_| random_conserved(&ex, &mut rng)).collect();
            let form = OrbitForm::exact(&g0, &zetas, &ex, 1 << 20)?;
            let res = match decompose(&form, &DecomposeOptions::default()) {
                Ok(res) => res,
                Err(e) => {
                    r.check(false, || format!("{label}: {e}"));
                    continue;
                }
            };
            r.eq(&res.zetas, &zetas, &format!("{label}: ζ"));
            r.check(res.certificate.box_transitions > 0, || format!("{label}: empty certificate"));
            r.check(res.certificate.samples.iter().all(|s| s.residual.is_zero()), || {
                format!("{label}: nonzero residual among certificate samples")
            });
            let side = if lattice.cell_size() > 1 { 2 } else { [6, 3][d - 1] };
            let w = Window::sized(&lattice, &vec![side; d])?;
            constant_per_component(r, &res.g, &g0, &w, &ex, &label)?;
            let rebuilt = OrbitForm::exact(&res.g, &res.zetas, &ex, 1 << 20)?;
            let again = decompose(&rebuilt, &DecomposeOptions::default())?;
            r.eq(&again.zetas, &zetas, &format!("{label}: ζ after re-running on ∂g + Σ ∂𝔄ʲ_ζ"));
        }
        scope.push(format!("{} × {per}", lattice.name()));
    }
    Ok(format!("random g₀ of radius ≤ 1 and random ζ: {}", scope.join(", ")))
}

fn constant_per_component(
    r: &mut Recorder,
    g: &OrbitFunction,
    g0: &OrbitFunction,
    w: &Window,
    it: &Interaction,
    label: &str,
) -> Result<()> {
    let space = ConfigSpace::new(w, it, 1 << 16)?;
    let comps = space.components();
    let mut value: BTreeMap<usize, Q> = BTreeMap::new();
    let mut ok = true;
    for (code, comp) in comps.iter().enumerate() {
        let eta = w.to_config(&space.decode(code));
        let diff = g.eval(&eta)? - g0.eval(&eta)?;
        ok &= *value.entry(*comp).or_insert_with(|| diff.clone()) == diff;
    }
    r.check(ok, || format!("{label}: g − g₀ is not constant on a component of {:?}..{:?}", w.lo(), w.hi()));
    Ok(())
}

fn dimension_of_dv(r: &mut Recorder) -> Result<String> {
    let e2 = euclidean(2)?;
    let hex = hexagonal();
    let ex = Interaction::exclusion();
    let ts = Interaction::two_species_exclusion();
    let cases = [(&e2, &ex, 2usize), (&hex, &ex, 2), (&e2, &ts, 4)];
    for (l, it, want) in cases {
        let w = Window::sized(l, &[2, 2])?;
        let rep = dim_dv_check(l, it, &w, 1 << 20)?;
        r.eq(rep.dimension, want, &format!("dim ∂𝒱 for {} on {}", it.names().join("/"), l.name()));
        r.eq(rep.dimension, rep.expected, "dim ∂𝒱 against c_φ·d");
    }
    Ok("2×2-cell windows".into())
}

fn linear_growth_identities(r: &mut Recorder, scale: Scale) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = scale.pick(50, 200);
    let fixtures = [
        (euclidean(1)?, Interaction::exclusion()),
        (euclidean(2)?, Interaction::exclusion()),
        (hexagonal(), Interaction::exclusion()),
        (euclidean(2)?, Interaction::two_species_exclusion()),
        (triangular(), Interaction::exclusion()),
    ];
    for (l, it) in &fixtures {
        let d = l.rank();
        let q = it.len() as State;
        let configs: Vec<Configuration> = (0..samples)
            .map(|_| {
                let mut eta = Configuration::empty();
                for _ in 0..rng.gen_range(0..6) {
                    let cell = (0..d).map(|_| rng.gen_range(-5i64..=5)).collect();
                    eta.set(LatticeVertex::new(rng.gen_range(0..l.cell_size()), cell), rng.gen_range(1..q));
                }
                eta
            })
            .collect();
        let xi = random_conserved(it, &mut rng);
        for j in 0..d {
            let a = a_function(l, &xi, j)?;
            r.eq(a.eval(&Configuration::empty())?, Q::zero(), "𝔄ʲ_ξ(⋆)");
            for k in 0..d {
                let bad = a_identity_check(&a, k, &configs)?;
                r.checks += samples;
                r.check(bad.is_none(), || format!("{}: (1−σ_{k})𝔄^{j}_ξ fails at {bad:?}", l.name()));
            }
        }
    }
    Ok(format!("{samples} random configurations on each of {} fixtures", fixtures.len()))
}

fn irreducibility_evidence(r: &mut Recorder) -> Result<String> {
    let locales = default_locales(4);
    let cases = [
        (Interaction::exclusion(), true),
        (Interaction::two_species_exclusion(), true),
        (Interaction::identity(2), false),
    ];
    for (it, want) in &cases {
        let evidence = it.irreducibility_evidence(&locales, 1 << 20)?;
        let all = evidence.iter().all(|e| e.pass);
        r.eq(all, *want, &format!("{} evidence verdict", it.names().join("/")));
        for (ev, (name, g)) in evidence.iter().zip(&locales) {
            let (components, classes, pass) = bfs_oracle(it, g);
            r.eq(ev.components, components, &format!("{name}: components against BFS"));
            r.eq(ev.charge_classes, classes, &format!("{name}: charge classes against BFS"));
            r.eq(ev.pass, pass, &format!("{name}: verdict against BFS"));
        }
    }
    Ok("paths on 2–4 vertices and cycles on 3–4 vertices".into())
}

/// Components, charge classes and connectivity of every charge class, by BFS.
fn bfs_oracle(it: &Interaction, g: &MultiGraph) -> (usize, usize, bool) {
    let n = g.vertex_count();
    let q = it.len();
    let size = state_space_size(q, n) as usize;
    let contributions = it.state_charges();
    let mut label = vec![usize::MAX; size];
    let mut count = 0;
    let mut buf = vec![0; n];
    for start in 0..size {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(code) = queue.pop_front() {
            decode(code, q, &mut buf);
            for e in g.edges() {
                let (o, t) = (g.origin(e), g.target(e));
                if o == t {
                    continue;
                }
                let (a, b) = it.apply(buf[o], buf[t]);
                let mut next = buf.clone();
                next[o] = a;
                next[t] = b;
                let nc = encode(&next, q);
                if label[nc] == usize::MAX {
                    label[nc] = count;
                    queue.push_back(nc);
                }
            }
        }
        count += 1;
    }
    let mut classes: BTreeMap<Vec<Q>, BTreeSet<usize>> = BTreeMap::new();
    for (code, l) in label.iter().enumerate() {
        decode(code, q, &mut buf);
        classes.entry(charge_with(&contributions, &buf)).or_default().insert(*l);
    }
    let pass = classes.values().all(|s| s.len() == 1);
    (count, classes.len(), pass)
}
