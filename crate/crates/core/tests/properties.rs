use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varadhan_core::calculus::{LatticeFunction, OrbitForm, OrbitFunction};
use varadhan_core::configspace::Configuration;
use varadhan_core::crystal::{LatticeVertex, PeriodicLattice};
use varadhan_core::interaction::Interaction;
use varadhan_core::varadhan::{decompose, DecomposeOptions};
use varadhan_core::verify::{random_conserved, random_orbit_function};
use varadhan_core::{rational, Q};

fn lattice(name: &str) -> PeriodicLattice {
    PeriodicLattice::builtin(name).unwrap()
}

fn random_config(l: &PeriodicLattice, q: usize, seed: u64, sites: usize) -> Configuration {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = l.rank();
    Configuration::from_sites((0..sites).map(|_| {
        let cell = (0..d).map(|_| rng.gen_range(-3i64..=3)).collect();
        let base = rng.gen_range(0..l.cell_size());
        (LatticeVertex::new(base, cell), rng.gen_range(1..q) as u8)
    }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_strings_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let x = Q::new(p.into(), q.into());
        prop_assert_eq!(rational::parse(&rational::format(&x)).unwrap(), x);
    }

    #[test]
    fn orbit_function_json_round_trips(seed in any::<u64>(), name in prop::sample::select(vec!["euclidean(1)", "euclidean(2)", "hexagonal"])) {
        let l = lattice(name);
        let ex = Interaction::exclusion();
        let g = random_orbit_function(&l, &ex, 1, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let j = g.to_json(&ex);
        let back = OrbitFunction::from_json(&j, &l, &ex).unwrap();
        prop_assert_eq!(back.to_json(&ex), j);
    }

    #[test]
    fn orbit_functions_are_shift_invariant(seed in any::<u64>(), shift in prop::collection::vec(-4i64..=4, 2), sites in 0usize..6) {
        let l = lattice("hexagonal");
        let ts = Interaction::two_species_exclusion();
        let g = random_orbit_function(&l, &ts, 1, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let eta = random_config(&l, ts.len(), seed ^ 0x9e37, sites);
        prop_assert_eq!(g.eval(&eta).unwrap(), g.eval(&eta.translated(&shift)).unwrap());
    }

    #[test]
    fn exact_forms_survive_json(seed in any::<u64>()) {
        let l = lattice("euclidean(2)");
        let ex = Interaction::exclusion();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_orbit_function(&l, &ex, 1, 2, &mut rng).unwrap();
        let zetas = vec![random_conserved(&ex, &mut rng), random_conserved(&ex, &mut rng)];
        let w = OrbitForm::exact(&g, &zetas, &ex, 1 << 20).unwrap();
        let back = OrbitForm::from_json(&w.to_json(), &l, &ex, 1 << 20).unwrap();
        let (patterns, mismatch) = w.compare(&back, 1 << 20).unwrap();
        prop_assert!(patterns > 0);
        prop_assert!(mismatch.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn decomposition_recovers_zeta_on_the_line(seed in any::<u64>()) {
        let l = lattice("euclidean(1)");
        let ex = Interaction::exclusion();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_orbit_function(&l, &ex, 1, 2, &mut rng).unwrap();
        let zetas = vec![random_conserved(&ex, &mut rng)];
        let w = OrbitForm::exact(&g, &zetas, &ex, 1 << 20).unwrap();
        let r = decompose(&w, &DecomposeOptions::default()).unwrap();
        prop_assert_eq!(&r.zetas, &zetas);
        let rebuilt = OrbitForm::exact(&r.g, &r.zetas, &ex, 1 << 20).unwrap();
        prop_assert!(w.compare(&rebuilt, 1 << 20).unwrap().1.is_none());
    }
}
