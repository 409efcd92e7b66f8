//! Monte-Carlo checks of the synthetic generator against population values.

use netlasso::datagen::{ar1_covariance, gen_ar_design, gen_sparse_truth, synthetic_problem, train_test_split};

#[test]
fn ar_design_has_the_stationary_covariance() {
    let (n, d, phi) = (40_000, 6, 0.25);
    let x = gen_ar_design(n, d, phi, 17).unwrap();
    let sample = x.tr_mul(&x) / n as f64;
    let pop = ar1_covariance(d, phi);
    for i in 0..d {
        for j in 0..d {
            let want = phi.powi((i as i32 - j as i32).abs()) / (1.0 - phi * phi);
            assert!((pop[(i, j)] - want).abs() < 1e-12);
            // Standard error of a product moment is about sqrt(2/n) * variance.
            assert!((sample[(i, j)] - want).abs() < 5.0 * (2.0 / n as f64).sqrt() * 1.1, "({i},{j})");
        }
    }
    let col_means = x.row_mean();
    assert!(col_means.amax() < 5.0 / (n as f64).sqrt());
}

#[test]
fn noise_has_the_requested_variance() {
    let sigma = 0.7;
    let (truth, ds) = synthetic_problem(30_000, 5, 2, sigma, 0.25, 3).unwrap();
    let resid = &ds.y - &ds.x * truth.vector();
    let n = resid.len() as f64;
    let var = resid.norm_squared() / n;
    assert!((var - sigma * sigma).abs() < 5.0 * sigma * sigma * (2.0 / n).sqrt());
    assert!(resid.mean().abs() < 5.0 * sigma / n.sqrt());
    let recorded = ds.noise.as_ref().unwrap();
    assert!((recorded - resid).amax() < 1e-12);
}

#[test]
fn support_positions_are_uniform() {
    let (d, trials) = (8, 4_000);
    let mut counts = vec![0usize; d];
    for seed in 0..trials {
        let t = gen_sparse_truth(d, 2, seed).unwrap();
        assert_eq!(t.support.len(), 2);
        for &j in &t.support {
            counts[j] += 1;
        }
    }
    let expected = 2.0 * trials as f64 / d as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 7 degrees of freedom; the 0.999 quantile is 24.3.
    assert!(chi2 < 24.3, "chi2 = {chi2}, counts {counts:?}");
}

/// `E max_k |Z_k|` over `k` standard normals: the integral of `1 - F(x)^k`
/// with `F(x) = P(|Z| <= x)`, both by the midpoint rule.
fn expected_top_half_normal(k: i32) -> f64 {
    let h = 1e-4;
    let (mut cdf, mut total) = (0.0f64, 0.0f64);
    for i in 0..100_000 {
        let mid = (i as f64 + 0.5) * h;
        cdf += h * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * mid * mid).exp();
        total += h * (1.0 - cdf.min(1.0).powi(k));
    }
    total
}

#[test]
fn kept_entries_are_the_largest_gaussian_draws() {
    let trials = 3_000;
    let mean: f64 = (0..trials)
        .map(|seed| gen_sparse_truth(10, 1, seed).unwrap().l1_norm)
        .sum::<f64>()
        / trials as f64;
    let want = expected_top_half_normal(10);
    // The top of 10 half-normals has standard deviation below 0.6.
    assert!((mean - want).abs() < 5.0 * 0.6 / (trials as f64).sqrt(), "mean {mean}, expected {want}");
}

#[test]
fn split_is_a_partition_of_rows() {
    let (_, ds) = synthetic_problem(50, 3, 1, 0.5, 0.25, 9).unwrap();
    let (train, test) = train_test_split(&ds, 12, 4).unwrap();
    assert_eq!((train.samples(), test.samples()), (38, 12));
    let mut ys: Vec<f64> = train.y.iter().chain(test.y.iter()).copied().collect();
    let mut all: Vec<f64> = ds.y.iter().copied().collect();
    ys.sort_by(f64::total_cmp);
    all.sort_by(f64::total_cmp);
    assert_eq!(ys, all);
}

#[test]
fn zero_coefficient_gives_uncorrelated_columns() {
    let n = 50_000;
    let x = gen_ar_design(n, 5, 0.0, 23).unwrap();
    let cov = x.tr_mul(&x) / n as f64;
    for i in 0..5 {
        assert!((cov[(i, i)] - 1.0).abs() < 0.03);
        for j in 0..i {
            let corr = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
            assert!(corr.abs() < 0.05);
        }
    }
}
