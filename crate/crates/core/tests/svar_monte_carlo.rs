//! Simulation oracles for the structural VAR estimator, its bootstrap, the
//! impulse-response bands and the synthetic data generators.

use structvar::dist;
use structvar::dynamics;
use structvar::linalg::{self, Mat};
use structvar::pipeline::{self, Dgp};
use structvar::reference;
use structvar::sim;
use structvar::svar::{self, Identification, RestrictionPattern, SvarOptions};
use structvar::varkit::{self, VarFit};

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("y{i}")).collect()
}

fn grid(rows: &[&str]) -> Vec<String> {
    rows.iter().map(|s| s.to_string()).collect()
}

fn recursive2() -> (Mat, Mat, Mat) {
    (
        Mat::identity(2, 2),
        Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.8]),
        Mat::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.4]),
    )
}

fn simulate_fit(a: &Mat, b: &Mat, a1: &Mat, t: usize, seed: u64) -> VarFit {
    let mut r = sim::rng(seed);
    let y = svar::simulate_structural(std::slice::from_ref(a1), a, b, t, 200, &mut r).unwrap();
    varkit::var_fit_matrix(&y, names(a.nrows()), 1).unwrap()
}

#[test]
fn overid_lr_size_with_one_true_zero_restriction() {
    let a = Mat::identity(3, 3);
    let b = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.6, 1.0, 0.0, 0.0, -0.4, 0.9]);
    let a1 = Mat::identity(3, 3) * 0.4;
    let pattern = RestrictionPattern::parse(&grid(&["1 0 0", "0 1 0", "0 0 1"]), &grid(&["* 0 0", "* * 0", "0 * *"])).unwrap();
    assert_eq!(svar::check_identification(&pattern).status, Identification::Over(1));
    let opts = SvarOptions {
        starts: 3,
        ..SvarOptions::default()
    };
    let rejections: usize = sim::par_map(500, |seed| {
        let var = simulate_fit(&a, &b, &a1, 400, 10_000 + seed as u64);
        let fit = svar::svar_ml_fit_with(&var, &pattern, &opts).unwrap();
        usize::from(svar::overid_lr_test(&fit, &var).unwrap().pvalue < 0.05)
    })
    .into_iter()
    .sum();
    println!("LR rejections at 5%: {rejections}/500");
    assert!((10..=50).contains(&rejections), "{rejections}");
}

#[test]
fn structural_shocks_are_orthonormal_in_large_samples() {
    let (a, b, a1) = recursive2();
    let var = simulate_fit(&a, &b, &a1, 5000, 3);
    let fit = svar::svar_ml_fit(&var, &RestrictionPattern::recursive(2)).unwrap();
    let u = svar::structural_shocks(&fit, &var).unwrap();
    let cov = u.transpose() * &u / u.nrows() as f64;
    assert!(linalg::max_abs(&(cov - Mat::identity(2, 2))) < 0.05);
}

fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn bootstrap_se_matches_monte_carlo_spread() {
    let (a, b, a1) = recursive2();
    let pattern = RestrictionPattern::recursive(2);
    let t = 200;
    let estimates: Vec<Vec<f64>> = sim::par_map(400, |seed| {
        let var = simulate_fit(&a, &b, &a1, t, 20_000 + seed as u64);
        svar::svar_ml_fit(&var, &pattern).unwrap().params
    });
    let npar = estimates[0].len();
    let mc: Vec<f64> = (0..npar).map(|j| sd(&estimates.iter().map(|e| e[j]).collect::<Vec<_>>())).collect();
    let datasets = 8;
    let mut boot = vec![0.0; npar];
    for d in 0..datasets {
        let var = simulate_fit(&a, &b, &a1, t, 30_000 + d);
        let fit = svar::svar_ml_fit(&var, &pattern).unwrap();
        let res = svar::bootstrap_se(&fit, &var, 500, d).unwrap();
        for j in 0..npar {
            boot[j] += res.se[j] / datasets as f64;
        }
    }
    for j in 0..npar {
        let ratio = boot[j] / mc[j];
        println!("param {j}: bootstrap SE {:.5}, Monte Carlo SD {:.5}, ratio {ratio:.3}", boot[j], mc[j]);
        assert!((0.75..=1.25).contains(&ratio), "param {j}: ratio {ratio}");
    }
}

#[test]
fn bootstrap_se_stabilizes_with_replications() {
    let (a, b, a1) = recursive2();
    let var = simulate_fit(&a, &b, &a1, 200, 77);
    let fit = svar::svar_ml_fit(&var, &RestrictionPattern::recursive(2)).unwrap();
    let few = svar::bootstrap_se(&fit, &var, 100, 1).unwrap();
    let many = svar::bootstrap_se(&fit, &var, 1000, 2).unwrap();
    for (s, l) in few.se.iter().zip(&many.se) {
        assert!((s / l - 1.0).abs() < 0.3, "{s} vs {l}");
    }
}

#[test]
fn impulse_response_bands_cover_the_truth() {
    let (a, b, a1) = recursive2();
    let truth = dynamics::irf_from(std::slice::from_ref(&a1), &b, 4);
    let pattern = RestrictionPattern::recursive(2);
    let opts = SvarOptions {
        starts: 2,
        ..SvarOptions::default()
    };
    // Cells whose true response is identically zero are excluded: b12 is
    // restricted, so its impact band degenerates to the point.
    let counts: Vec<(usize, usize)> = (0..200u64)
        .map(|seed| {
            let var = simulate_fit(&a, &b, &a1, 200, 40_000 + seed);
            let fit = svar::svar_ml_fit_with(&var, &pattern, &opts).unwrap();
            let set = dynamics::mc_bands(&fit, &var, 4, 500, seed, 2.0).unwrap();
            let bands = set.bands.as_ref().unwrap();
            let (mut hit, mut total) = (0, 0);
            for h in 0..=4 {
                for i in 0..2 {
                    for j in 0..2 {
                        if truth[h][(i, j)] == 0.0 {
                            continue;
                        }
                        total += 1;
                        let v = truth[h][(i, j)];
                        hit += usize::from(bands.lower[h][(i, j)] <= v && v <= bands.upper[h][(i, j)]);
                    }
                }
            }
            (hit, total)
        })
        .collect();
    let hit: usize = counts.iter().map(|c| c.0).sum();
    let total: usize = counts.iter().map(|c| c.1).sum();
    let coverage = hit as f64 / total as f64;
    println!("pointwise coverage of ±2 SD bands: {coverage:.4} over {total} cells");
    assert!((0.85..=0.99).contains(&coverage), "{coverage}");
}

#[test]
fn system11_generator_recovers_its_coefficients() {
    let ds = pipeline::synth_generate(&Dgp::PaperSystem11, 5000, 7).unwrap();
    let fit = varkit::var_fit(&ds, 1).unwrap();
    let err = linalg::max_abs(&(&fit.coefs[0] - reference::var_coefficient()));
    assert!(err < 0.05, "{err}");
}

#[test]
fn white_noise_generator_output_is_serially_uncorrelated() {
    let dgp = Dgp::Custom {
        a: vec![vec![1.0, 0.0], vec![0.3, 1.0]],
        b: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
        a1: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        names: None,
    };
    let h = 8;
    let mut kept = 0;
    for seed in 0..100 {
        let ds = pipeline::synth_generate(&dgp, 200, seed).unwrap();
        let y = ds.to_matrix();
        let mean = y.row_mean();
        let centered = Mat::from_fn(y.nrows(), 2, |i, j| y[(i, j)] - mean[j]);
        let q = varkit::portmanteau_statistic(&centered, h).unwrap();
        kept += usize::from(dist::chi2_sf(q, (4 * h) as f64) > 0.05);
    }
    assert!(kept >= 90, "{kept}");
}
