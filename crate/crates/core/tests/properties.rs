use proptest::prelude::*;
use rrw_core::asymptotics::{
    fisher_info, gamma0, mle_covariance, standard_errors, wlse_covariance,
};
use rrw_core::empirical::CellStats;
use rrw_core::estimate::{
    fit, fit_stats, profile_alpha, ContrastObjective, Kullback, Method, OptimizerConfig, ParamBox,
    SquaredError, WeightMode,
};
use rrw_core::model::{choice_prob, expected_loglik, loglik, occupancy};
use rrw_core::simulate::simulate_paths;
use rrw_core::{ModelParams, Seed};

fn theta(a: f64, c: f64) -> ModelParams {
    ModelParams::new(a, c).unwrap()
}

#[test]
fn loglik_is_a_sum_over_cells() {
    let paths = simulate_paths(&theta(1.4, 0.8), 30, 40, Seed(3)).unwrap();
    let stats = CellStats::from_paths(&paths);
    let t = theta(0.9, 2.2);
    let mut by_cells = 0.0;
    for k in 0..stats.n() {
        for i in 0..=k {
            if stats.occupied(k, i) {
                let f = choice_prob(&t, i, k - i);
                by_cells +=
                    stats.a(k, i) * (stats.p(k, i) * f.ln() + stats.q(k, i) * (1.0 - f).ln());
            }
        }
    }
    let direct = loglik(&paths, &t);
    assert!(
        (direct - 30.0 * by_cells).abs() < 1e-9 * direct.abs(),
        "{direct} vs {}",
        30.0 * by_cells
    );
}

#[test]
fn kullback_contrast_differs_from_minus_loglik_by_a_constant() {
    let paths = simulate_paths(&theta(1.0, 1.0), 25, 50, Seed(8)).unwrap();
    let stats = CellStats::from_paths(&paths);
    let obj = ContrastObjective::new(&stats, &Kullback, WeightMode::Occupancy, false).unwrap();
    let n_paths = paths.n_paths() as f64;
    let gap = |t: &ModelParams| obj.value(t) + loglik(&paths, t) / n_paths;
    let base = gap(&theta(1.0, 1.0));
    for (a, c) in [(0.4, 0.3), (2.5, 9.0), (1.7, 0.6)] {
        assert!((gap(&theta(a, c)) - base).abs() < 1e-10);
    }
}

#[test]
fn expected_loglik_peaks_at_truth() {
    let truth = theta(1.3, 1.8);
    let n = 40;
    let top = expected_loglik(&truth, &truth, n);
    for da in [-0.2, -0.05, 0.05, 0.2] {
        for dc in [-0.5, -0.1, 0.0, 0.1, 0.5] {
            assert!(expected_loglik(&truth, &theta(1.3 + da, 1.8 + dc), n) < top);
        }
    }
    let h = 1e-5;
    let ga = (expected_loglik(&truth, &theta(1.3 + h, 1.8), n)
        - expected_loglik(&truth, &theta(1.3 - h, 1.8), n))
        / (2.0 * h);
    let gc = (expected_loglik(&truth, &theta(1.3, 1.8 + h), n)
        - expected_loglik(&truth, &theta(1.3, 1.8 - h), n))
        / (2.0 * h);
    assert!(ga.abs() < 1e-8 && gc.abs() < 1e-8, "{ga} {gc}");
}

#[test]
fn gamma0_describes_the_spread_of_cell_frequencies() {
    let t = theta(1.0, 1.0);
    let (n, n_paths, reps) = (5, 2000, 400);
    let g = gamma0(&t, n);
    let (k, i) = (3, 1);
    let f = choice_prob(&t, i, k - i);
    let mut sq = 0.0;
    for r in 0..reps {
        let stats =
            CellStats::from_paths(&simulate_paths(&t, n_paths, n, Seed(77).child(r)).unwrap());
        sq += n_paths as f64 * (stats.p(k, i) - f).powi(2) / reps as f64;
    }
    let expected = g.get(k, i);
    assert!(
        (sq - expected).abs() < 0.15 * expected,
        "{sq} vs {expected}"
    );
}

#[test]
fn fitted_objective_beats_every_start() {
    let paths = simulate_paths(&theta(1.5, 2.0), 50, 60, Seed(12)).unwrap();
    let stats = CellStats::from_paths(&paths);
    let bx = ParamBox::default();
    let res = fit_stats(
        &stats,
        Method::Wlse {
            weights: WeightMode::Occupancy,
            symmetrized: false,
        },
        &bx,
        None,
        &OptimizerConfig::default(),
    )
    .unwrap();
    let obj = ContrastObjective::new(&stats, &SquaredError, WeightMode::Occupancy, false).unwrap();
    assert!((obj.value(&res.theta_hat) - res.objective).abs() < 1e-14);
    for a in [0.2, 0.5, 1.0, 2.0, 4.0] {
        for c in [0.1, 0.5, 2.0, 10.0, 50.0] {
            assert!(res.objective <= obj.value(&theta(a, c)));
        }
    }
}

#[test]
fn estimates_land_near_truth() {
    let truth = theta(1.0, 1.0);
    let paths = simulate_paths(&truth, 50, 100, Seed(2024)).unwrap();
    let (bx, cfg) = (ParamBox::default(), OptimizerConfig::default());
    let cases = [
        (
            Method::Mle,
            standard_errors(&mle_covariance(&truth, 100).unwrap(), 50),
        ),
        (
            Method::Wlse {
                weights: WeightMode::Occupancy,
                symmetrized: true,
            },
            standard_errors(
                &wlse_covariance(&truth, 100, WeightMode::Occupancy).unwrap(),
                50,
            ),
        ),
    ];
    for (method, sd) in cases {
        let r = fit(&paths, method, &bx, &cfg).unwrap();
        assert!(r.converged && !r.at_boundary);
        assert!(
            (r.theta_hat.alpha() - 1.0).abs() < 3.0 * sd[0],
            "{method:?} {:?}",
            r.theta_hat
        );
        assert!(
            (r.theta_hat.c() - 1.0).abs() < 3.0 * sd[1],
            "{method:?} {:?}",
            r.theta_hat
        );
    }
}

#[test]
fn profile_at_true_c() {
    let paths = simulate_paths(&theta(1.5, 2.0), 50, 100, Seed(31)).unwrap();
    let r = profile_alpha(
        &paths,
        2.0,
        &ParamBox::default(),
        Method::Mle,
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert_eq!(r.theta_hat.c(), 2.0);
    assert!((r.theta_hat.alpha() - 1.5).abs() < 0.2, "{:?}", r.theta_hat);
}

#[test]
fn information_grows_with_length_in_loewner_order() {
    let t = theta(0.8, 1.5);
    let (short, long) = (fisher_info(&t, 50), fisher_info(&t, 100));
    let d = rrw_core::CellMatrix2::new(long.aa - short.aa, long.ac - short.ac, long.cc - short.cc);
    assert!(d.is_psd(0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn choice_probabilities_are_complementary(a in 0.05f64..5.0, c in 0.05f64..100.0, i in 0usize..500, j in 0usize..500) {
        let t = theta(a, c);
        let (f, g) = (choice_prob(&t, i, j), choice_prob(&t, j, i));
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f + g - 1.0).abs() < 1e-15);
        if i > j {
            prop_assert!(f >= 0.5);
        }
    }

    #[test]
    fn occupancy_rows_are_mirror_symmetric_laws(a in 0.1f64..3.0, c in 0.1f64..20.0, n in 2usize..60) {
        let occ = occupancy(&theta(a, c), n);
        for k in 0..n {
            let row = occ.row(k);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..=k {
                prop_assert!((row[i] - row[k - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simulation_respects_the_seed(a in 0.1f64..3.0, c in 0.1f64..10.0, seed in any::<u64>()) {
        let t = theta(a, c);
        let x = simulate_paths(&t, 7, 20, Seed(seed)).unwrap();
        prop_assert_eq!(&x, &simulate_paths(&t, 7, 20, Seed(seed)).unwrap());
        prop_assert!(x.iter().all(|p| p.iter().all(|&b| b <= 1)));
    }
}
