use arealaw::bounds::coupling::coupling_strength;
use arealaw::bounds::lemma::{lemma2_check, solve_tc, summarize_region, EnergyCurve, SpectralCurve};
use arealaw::entangle::{region_entropy, State};
use arealaw::heatfit::{fit_exponential, fit_polynomial, HeatSample};
use arealaw::lattice::{boundary_count, boundary_count_bound, partition_lattice, LatticeSpec};
use arealaw::models::{build_tfim, build_xxz, DEFAULT_DIM_CAP};
use arealaw::random::{random_density, random_product_pure, random_pure, seeded};
use arealaw::spectral::diagonalize;
use arealaw::thermo::{free_energy, gibbs_state, relative_entropy_to_gibbs, thermal_sample, DensityMatrix};
use arealaw::Exec;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn complementary_regions_have_equal_entropy(seed in any::<u64>(), n in 2usize..7, cut in 1usize..6) {
        let cut = cut.min(n - 1);
        let mut rng = seeded(seed);
        let psi = State::Pure(random_pure(1 << n, &mut rng));
        let a: Vec<usize> = (0..cut).collect();
        let b: Vec<usize> = (cut..n).collect();
        let sa = region_entropy(&psi, &a, n, 2).unwrap();
        let sb = region_entropy(&psi, &b, n, 2).unwrap();
        prop_assert!((sa - sb).abs() < 1e-8);
        prop_assert!(sa >= -1e-12 && sa <= (cut.min(n - cut) as f64) * 2f64.ln() + 1e-10);
    }

    #[test]
    fn gibbs_state_minimizes_free_energy(seed in any::<u64>(), g in 0.2f64..3.0, t in 0.05f64..5.0) {
        let lat = LatticeSpec::periodic(1, 4).unwrap();
        let h = build_tfim(&lat, 1.0, g).assemble_full(DEFAULT_DIM_CAP).unwrap();
        let sd = diagonalize(&h, DEFAULT_DIM_CAP).unwrap();
        let hs = sd.shifted_hamiltonian();
        let gibbs = gibbs_state(&sd, t).unwrap();
        let rho = DensityMatrix::new(random_density(16, &mut seeded(seed))).unwrap();
        let gap = free_energy(&rho, &hs, t) - free_energy(&gibbs, &hs, t);
        prop_assert!(gap >= -1e-10);
        prop_assert!((gap - t * relative_entropy_to_gibbs(&rho, &sd, t).unwrap()).abs() < 1e-8 * gap.abs().max(1.0));
    }

    #[test]
    fn covariance_obeys_cauchy_schwarz_in_random_states(seed in any::<u64>(), delta in -1.5f64..1.5) {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let spec = build_xxz(&lat, 1.0, delta);
        let part = partition_lattice(&lat, 3, 1).unwrap();
        let psi = State::Pure(random_pure(64, &mut seeded(seed)));
        let h = coupling_strength(&spec, &psi, &part, Exec::Sequential).unwrap();
        prop_assert!(h.worst_cauchy_schwarz_excess() <= 1e-10);
        prop_assert!(h.value <= h.operator_norm + 1e-12);
    }

    #[test]
    fn product_states_decouple(seed in any::<u64>()) {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let spec = build_xxz(&lat, 0.7, 0.3);
        let part = partition_lattice(&lat, 2, 1).unwrap();
        let psi = State::Pure(random_product_pure(6, 2, &mut seeded(seed)));
        let h = coupling_strength(&spec, &psi, &part, Exec::Sequential).unwrap();
        prop_assert!(h.value < 1e-10);
    }

    #[test]
    fn fits_dominate_their_data(seed in any::<u64>(), n in 4usize..20) {
        use rand::Rng;
        let mut rng = seeded(seed);
        let data: Vec<HeatSample> = (0..n)
            .map(|i| {
                let t = 0.05 + 0.1 * i as f64;
                HeatSample { t, c: (-1.0 / t).exp() * rng.random_range(0.5..2.0) }
            })
            .collect();
        if let Ok(f) = fit_exponential(&data) {
            prop_assert!(f.slack >= 1.0);
            prop_assert!(data.iter().all(|s| f.model.c(s.t) >= s.c));
        }
        if let Ok(f) = fit_polynomial(&data, 1.0) {
            prop_assert!(data.iter().all(|s| f.model.c(s.t) >= s.c));
        }
    }

    #[test]
    fn boundary_count_never_exceeds_its_bound(d in 1usize..4, l in 1usize..9, r in 1usize..3) {
        prop_assert!(boundary_count(d, l, r) <= boundary_count_bound(d, l, r));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn critical_temperature_is_smallest_admissible(g in 1.2f64..3.0, frac in 0.01f64..0.9) {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let sd = diagonalize(&build_tfim(&lat, 1.0, g).assemble_full(DEFAULT_DIM_CAP).unwrap(), DEFAULT_DIM_CAP).unwrap();
        let curve = SpectralCurve { sd: &sd, n_sites: 6 };
        let target = frac * curve.supremum();
        let tc = solve_tc(&curve, target).unwrap();
        prop_assert!(curve.energy_density(tc) >= target);
        prop_assert!(curve.energy_density(tc * (1.0 - 1e-8)) < target * (1.0 + 1e-9));
    }

    #[test]
    fn entropy_bound_has_no_counterexample(g in 0.3f64..3.0, level in 0usize..4, t in 0.05f64..20.0) {
        let lat = LatticeSpec::periodic(1, 8).unwrap();
        let spec = build_tfim(&lat, 1.0, g);
        let h = spec.assemble_sparse(DEFAULT_DIM_CAP).unwrap();
        let sd = diagonalize(&spec.assemble_full(DEFAULT_DIM_CAP).unwrap(), DEFAULT_DIM_CAP).unwrap();
        let state = State::Pure(sd.eigenvector(level));
        let sample = thermal_sample(&sd, t, 8).unwrap();
        for l in [2, 4] {
            let summary = summarize_region(&spec, &sd, &h, &state, l, Exec::Sequential).unwrap();
            let check = lemma2_check(&summary, &sample);
            if check.hypothesis_met {
                prop_assert!(check.slack >= -1e-8, "{check:?}");
            }
        }
    }
}
