use bcsec_core::chanfile::SpecFile;
use bcsec_core::prob::{cascade, ConditionalPmf, FactoredDistribution};
use bcsec_core::search::{derive_seed, random_table, rng_for, SearchSpace};
use bcsec_core::sim::*;
use proptest::prelude::*;

fn random_dist(pattern: &str, sizes: &[(&str, usize)], seed: u64) -> FactoredDistribution {
    let space = SearchSpace::new(pattern, sizes).unwrap();
    let point = space.random_point(&mut rng_for(seed, 0));
    space.build(&point)
}

fn vx(seed: u64) -> FactoredDistribution {
    random_dist("V; X|V", &[("V", 2), ("X", 2)], seed)
}

fn marton(seed: u64) -> FactoredDistribution {
    random_dist(
        "V0; V1|V0; V2|V0; X|V0,V1,V2",
        &[("V0", 2), ("V1", 2), ("V2", 2), ("X", 2)],
        seed,
    )
}

fn params(n: usize, eps: f64) -> TypicalityParams {
    TypicalityParams::new(n, eps).unwrap()
}

fn leakage(cb: &Codebook, z: &ConditionalPmf) -> Equivocation {
    exact_equivocation(cb, z, &Caps::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wiretap_equivocation_and_leakage_add_up(seed in 0u64..1_000_000, n in 2usize..=4, sat in 0u32..=2) {
        let d = vx(seed);
        let z = random_table(&mut rng_for(seed, 1), 2, 3);
        let rates = WiretapRates::new(0.25, 0.75, sat as f64 / n as f64);
        let cb = build_wiretap_codebook(&d, &rates, &params(n, 1.0), &Caps::default(), seed).unwrap();
        let e = leakage(&cb, &z);
        prop_assert!((e.equivocation_rate() + e.leakage_rate() - e.h_m / n as f64).abs() < 1e-9);
        prop_assert!(e.leakage >= -1e-9);
        prop_assert!(e.h_m_given_z <= e.h_m + 1e-9);
    }

    #[test]
    fn marton_equivocation_and_leakage_add_up(seed in 0u64..1_000_000, n in 2usize..=3) {
        let d = marton(seed);
        let z = random_table(&mut rng_for(seed, 1), 2, 2);
        let rates = MartonRates {
            rate: 0.5,
            index_rate: 0.5,
            t1: 0.5,
            t2: 0.5,
            bin1: 0.0,
            bin2: 0.0,
            quantization: Quantization::Ceil,
        };
        let cb = build_marton_codebook(&d, &rates, &params(n, 1.0), &Caps::default(), seed).unwrap();
        let e = leakage(&cb, &z);
        prop_assert!((e.equivocation_rate() + e.leakage_rate() - e.h_m / n as f64).abs() < 1e-9);
    }

    #[test]
    fn degraded_eavesdropper_learns_no_more(seed in 0u64..1_000_000) {
        let d = vx(seed);
        let y = random_table(&mut rng_for(seed, 1), 2, 3);
        let w = random_table(&mut rng_for(seed, 2), 3, 2);
        let z = cascade(&y, &w).unwrap();
        let cb = build_wiretap_codebook(&d, &WiretapRates::new(0.5, 1.0, 0.25), &params(4, 1.0), &Caps::default(), seed)
            .unwrap();
        prop_assert!(leakage(&cb, &z).leakage <= leakage(&cb, &y).leakage + 1e-9);
    }

    #[test]
    fn larger_bins_never_leak_more(seed in 0u64..1_000_000) {
        let d = vx(seed);
        let z = random_table(&mut rng_for(seed, 1), 2, 2);
        let cb = build_wiretap_codebook(&d, &WiretapRates::new(1.0, 1.0, 0.0), &params(3, 1.0), &Caps::default(), seed)
            .unwrap();
        let mut last = f64::INFINITY;
        for bits in (0..=cb.index_bits).rev() {
            let l = leakage(&cb.with_message_bits(bits).unwrap(), &z).leakage;
            prop_assert!(l <= last + 1e-9);
            last = l;
        }
        prop_assert!(last.abs() < 1e-9);
    }
}

#[test]
fn degraded_leakage_on_twenty_seeded_configurations() {
    for seed in 0..20u64 {
        let d = vx(seed);
        let y = random_table(&mut rng_for(seed, 1), 2, 2);
        let z = cascade(&y, &ConditionalPmf::bsc(0.2).unwrap()).unwrap();
        let n = 2 + (seed % 3) as usize;
        let cb = build_wiretap_codebook(
            &d,
            &WiretapRates::new(0.5, 1.0, 0.5),
            &params(n, 1.0),
            &Caps::default(),
            seed,
        )
        .unwrap();
        let (ly, lz) = (leakage(&cb, &y), leakage(&cb, &z));
        assert!(
            lz.leakage <= ly.leakage + 1e-9,
            "seed {seed}: {} > {}",
            lz.leakage,
            ly.leakage
        );
    }
}

#[test]
fn bin_index_is_uniform() {
    let d = vx(3);
    let cb = build_wiretap_codebook(
        &d,
        &WiretapRates::new(0.25, 1.0, 0.0),
        &params(8, 1.0),
        &Caps::default(),
        3,
    )
    .unwrap();
    let bin = cb.bin(1);
    let size = bin.len();
    let mut counts = vec![0usize; size];
    let mut rng = rng_for(11, 0);
    let draws = 6400;
    for _ in 0..draws {
        let t = encode_with(&cb, 1, &mut rng).unwrap();
        assert!(bin.contains(&t.leaf.l0));
        counts[t.leaf.l0 - bin.start] += 1;
    }
    let expected = draws as f64 / size as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 63 degrees of freedom, upper 0.1% point.
    assert_eq!(size, 64);
    assert!(chi2 < 103.4, "chi2 = {chi2}");
}

#[test]
fn identical_config_and_seed_give_identical_rows() {
    let mut spec = SpecFile::default();
    spec.add_channel("y", "X", "Y", ConditionalPmf::bsc(0.1).unwrap())
        .unwrap();
    spec.add_channel("z", "X", "Z", ConditionalPmf::bsc(0.2).unwrap())
        .unwrap();
    spec.add_dist("p", vx(5)).unwrap();
    let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "scheme": "wiretap",
        "receiver": "y",
        "eavesdropper": "z",
        "rates": { "rate": 0.25, "index_rate": 0.5 },
        "n": [2, 4, 6],
        "trials": 60,
        "seed": 17,
        "epsilon": 1.0,
        "codebooks": 3
    }))
    .unwrap();
    let a = run_experiment(&cfg, &spec).unwrap();
    let b = run_experiment(&cfg, &spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3);
    for row in &a {
        assert!(row.report.exact);
        assert!((0.0..=1.0).contains(&row.report.p_error));
    }
    let other = run_experiment(&ExperimentConfig { seed: 18, ..cfg }, &spec).unwrap();
    assert_ne!(a, other);
}

#[test]
fn experiment_falls_back_to_sampling_past_the_caps() {
    let mut spec = SpecFile::default();
    spec.add_channel("y", "X", "Y", ConditionalPmf::bsc(0.1).unwrap())
        .unwrap();
    spec.add_channel("z", "X", "Z", ConditionalPmf::bsc(0.2).unwrap())
        .unwrap();
    spec.add_dist("p", vx(5)).unwrap();
    let mut cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "scheme": "wiretap",
        "receiver": "y",
        "eavesdropper": "z",
        "rates": { "rate": 0.25, "index_rate": 0.5 },
        "n": [4],
        "trials": 20,
        "seed": 1,
        "epsilon": 1.0,
        "mc_samples": 400
    }))
    .unwrap();
    cfg.caps.max_output_bits = 2.0;
    let rows = run_experiment(&cfg, &spec).unwrap();
    assert!(!rows[0].report.exact);
    assert!(rows[0].report.leakage_ci > 0.0);
}

/// Average pairing failure over seeds, for satellite rates `t` at fixed bins.
fn marton_failure(t: f64, seeds: u64) -> f64 {
    let d = marton(42);
    let rates = MartonRates {
        rate: 0.0,
        index_rate: 0.25,
        t1: t,
        t2: t,
        bin1: 0.25,
        bin2: 0.25,
        quantization: Quantization::Ceil,
    };
    let total: f64 = (0..seeds)
        .map(|s| {
            build_marton_codebook(&d, &rates, &params(8, 1.0), &Caps::default(), derive_seed(9, s))
                .unwrap()
                .pairing
                .unwrap()
                .failure_rate()
        })
        .sum();
    total / seeds as f64
}

#[test]
fn pairing_failure_falls_as_the_margin_grows() {
    let f: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&t| marton_failure(t, 16)).collect();
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
    assert!(f[0] > f[2], "{f:?}");
}

#[test]
fn covering_count_exceedance_vanishes_with_the_blocklength() {
    let d = random_dist("U; V|U; Z|U,V", &[("U", 2), ("V", 2), ("Z", 2)], 8);
    let i = d
        .joint()
        .conditional_mutual_information(&["V"], &["Z"], &["U"])
        .unwrap();
    let s = i + 0.3;
    let stats: Vec<Lemma1Stats> = [4, 10]
        .iter()
        .map(|&n| lemma1_experiment(d.joint(), s, &params(n, 1.0), 300, 5, &Caps::default()).unwrap())
        .collect();
    assert!(stats.iter().all(|s| s.in_regime));
    assert!(stats[1].exceedance <= stats[0].exceedance);
    assert!(stats[1].exceedance < 0.05, "{}", stats[1].exceedance);
}
