use heavytail::baselines::{
    bootstrap_ecdf, bootstrap_statistic, clt_ci, compare_methods, BootstrapConfig, CompareOptions, Method, ResampleMode,
};
use heavytail::pstable::{Levels, PStableOptions, PilotScheme};
use heavytail::rng::{sample_stable, DataSpec, PowerLawCutoffParams, RandomSource, StableParams};

fn standard_normal(seed: u64, n: usize) -> Vec<f64> {
    let params = StableParams::new(2.0, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0).unwrap();
    sample_stable(&params, &RandomSource::new(seed, 0), n).unwrap()
}

#[test]
fn clt_covers_normal_mean() {
    let levels = Levels::new(0.025, 0.975).unwrap();
    let reps = 1000;
    let hits = (0..reps)
        .filter(|&r| clt_ci(&standard_normal(r, 10_000), levels).unwrap().contains(0.0))
        .count();
    let coverage = hits as f64 / reps as f64;
    assert!((0.93..=0.97).contains(&coverage), "coverage {coverage}");
}

#[test]
fn clt_width_shrinks_like_root_n() {
    let levels = Levels::new(0.05, 0.95).unwrap();
    let small = clt_ci(&standard_normal(1, 10_000), levels).unwrap().width().unwrap();
    let large = clt_ci(&standard_normal(2, 100_000), levels).unwrap().width().unwrap();
    let ratio = small / large;
    assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.1, "ratio {ratio}");
}

fn tuples(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

#[test]
fn exact_bootstrap_law_ignores_labels() {
    let x = [3.0, 7.5, 4.25, 30.0, 5.0];
    let y = [1.2, -0.4, 2.2, 0.9, 1.7];
    let relabel = [3, 0, 4, 1, 2];
    let xr: Vec<f64> = relabel.iter().map(|&i| x[i]).collect();
    let yr: Vec<f64> = relabel.iter().map(|&i| y[i]).collect();
    let law = |x: &[f64], y: &[f64]| {
        let mut s: Vec<f64> = tuples(5)
            .iter()
            .map(|idx| bootstrap_statistic(x, y, 6.0, 1.0 / 1.5, ResampleMode::Pairs, idx))
            .collect();
        s.sort_by(f64::total_cmp);
        s
    };
    for (a, b) in law(&x, &y).iter().zip(law(&xr, &yr)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn reflected_data_reflects_the_bootstrap_law() {
    let x: Vec<f64> = standard_normal(5, 200).iter().map(|v| v.exp()).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let y = sample_stable(
        &StableParams::symmetric(1.5, 1.0).unwrap(),
        &RandomSource::new(5, 1),
        200,
    )
    .unwrap();
    let cfg = BootstrapConfig::default();
    let src = RandomSource::new(9, 2);
    let a = bootstrap_ecdf(&x, &y, 0.0, 1.5, &cfg, &src).unwrap();
    let b = bootstrap_ecdf(&neg, &y, 0.0, 1.5, &cfg, &src).unwrap();
    assert_eq!(a.len(), b.len());
    for (&(t, _), &(s, _)) in a.points().iter().zip(b.points().iter().rev()) {
        assert_eq!(t, -s);
    }
    let mass_below = |e: &heavytail::ecdf::WeightedEcdf, t: f64| {
        let pts = e.points();
        let k = pts.partition_point(|p| p.0 < t);
        if k == 0 {
            0.0
        } else {
            pts[k - 1].1
        }
    };
    for &(t, g) in a.points() {
        assert!((mass_below(&b, -t) - (1.0 - g)).abs() < 1e-12);
    }
}

#[test]
fn comparison_is_a_pure_function_of_its_source() {
    let spec = DataSpec::PowerLawCutoff(PowerLawCutoffParams::new(1.5, 10_000).unwrap());
    let opts = CompareOptions {
        n: 500,
        pilot: PilotScheme::default(),
        weights: StableParams::symmetric(1.7, 1.0).unwrap(),
        pstable: PStableOptions::new(1.7),
        levels: Levels::new(0.05, 0.95).unwrap(),
        methods: vec![Method::Pstable, Method::Clt, Method::Bootstrap],
        bootstrap: BootstrapConfig {
            replicates: 200,
            ..BootstrapConfig::default()
        },
        reference_samples: 50_000,
    };
    let src = RandomSource::new(77, 0);
    let a = compare_methods(&spec, &opts, &src, None).unwrap();
    let b = compare_methods(&spec, &opts, &src, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.results.len(), 3);
    for r in &a.results {
        if let (Some(l), Some(u)) = (r.mean.lower, r.mean.upper) {
            assert!(l <= u, "{:?}", r.method);
        }
    }
    let other = compare_methods(&spec, &opts, &RandomSource::new(78, 0), None).unwrap();
    assert_ne!(a.sample_mean, other.sample_mean);
}
