//! Reduced-form VAR(p) estimation by equation-wise OLS, lag selection,
//! stability, and residual diagnostics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dist;
use crate::error::{Error, Result};
use crate::hac;
use crate::linalg::{self, Mat, Vector};
use crate::tscore::{self, Dataset};

/// Reduced-form VAR with intercept, `Y_t = c + A_1 Y_{t-1} + … + A_p Y_{t-p} + ε_t`.
#[derive(Debug, Clone, Serialize)]
pub struct VarFit {
    pub names: Vec<String>,
    pub k: usize,
    pub p: usize,
    pub t_eff: usize,
    #[serde(with = "linalg::serde_vector")]
    pub intercept: Vector,
    #[serde(with = "linalg::serde_rows_vec")]
    pub coefs: Vec<Mat>,
    /// `(T − p) × K` residuals, aligned with periods `p..T` of the input.
    #[serde(skip)]
    pub residuals: Mat,
    /// `T_eff⁻¹ Σ ε̂ₜε̂ₜ'`.
    #[serde(with = "linalg::serde_rows")]
    pub omega_eps: Mat,
    pub loglik: f64,
    /// Levels the model was fitted on; the first `p` rows seed recursive simulation.
    #[serde(skip)]
    pub data: Mat,
}

impl VarFit {
    pub fn regressors(&self) -> Mat {
        lag_design(&self.data, self.p, self.p)
    }

    /// Stacked `(1 + Kp) × K` coefficient matrix, intercept row first.
    pub fn stacked_coefficients(&self) -> Mat {
        let mut b = Mat::zeros(1 + self.k * self.p, self.k);
        b.row_mut(0).copy_from(&self.intercept.transpose());
        for (i, a) in self.coefs.iter().enumerate() {
            b.view_mut((1 + i * self.k, 0), (self.k, self.k)).copy_from(&a.transpose());
        }
        b
    }

    pub fn coef_sum(&self) -> Mat {
        self.coefs.iter().fold(Mat::zeros(self.k, self.k), |acc, a| acc + a)
    }

    pub fn residual_correlation(&self) -> Mat {
        correlation_from_covariance(&self.omega_eps)
    }
}

/// Design with an intercept column and `p` lags, rows for periods `start..T`.
pub fn lag_design(y: &Mat, p: usize, start: usize) -> Mat {
    let (t, k) = (y.nrows(), y.ncols());
    Mat::from_fn(t - start, 1 + k * p, |i, j| {
        if j == 0 {
            1.0
        } else {
            let lag = (j - 1) / k + 1;
            y[(start + i - lag, (j - 1) % k)]
        }
    })
}

pub fn var_fit(data: &Dataset, p: usize) -> Result<VarFit> {
    var_fit_matrix(&data.to_matrix(), data.names(), p)
}

pub fn var_fit_matrix(y: &Mat, names: Vec<String>, p: usize) -> Result<VarFit> {
    fit_on_sample(y, names, p, p)
}

fn fit_on_sample(y: &Mat, names: Vec<String>, p: usize, start: usize) -> Result<VarFit> {
    let (t, k) = (y.nrows(), y.ncols());
    if k == 0 || names.len() != k {
        return Err(Error::Config(format!("{} names for {k} series", names.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::parse("VAR input contains non-finite values"));
    }
    if t < start || t - start <= k * p + 1 {
        return Err(Error::Length(format!(
            "VAR({p}) with {k} variables needs more than {} usable observations, got {}",
            k * p + 1,
            t.saturating_sub(start)
        )));
    }
    let z = lag_design(y, p, start);
    let target = y.rows(start, t - start).into_owned();
    let b = linalg::lstsq(&z, &target)?;
    let residuals = &target - &z * &b;
    let t_eff = t - start;
    let omega_eps = linalg::symmetrize(&(residuals.transpose() * &residuals / t_eff as f64));
    let loglik = gaussian_loglik(&omega_eps, t_eff)?;
    let intercept = b.row(0).transpose();
    let coefs = (0..p)
        .map(|i| b.view((1 + i * k, 0), (k, k)).transpose())
        .collect();
    Ok(VarFit {
        names,
        k,
        p,
        t_eff,
        intercept,
        coefs,
        residuals,
        omega_eps,
        loglik,
        data: y.clone(),
    })
}

/// Gaussian log-likelihood at the ML covariance estimate:
/// `−TK/2·ln 2π − T/2·ln|Ω| − TK/2`.
pub fn gaussian_loglik(omega: &Mat, t: usize) -> Result<f64> {
    let k = omega.nrows() as f64;
    let t = t as f64;
    let ld = linalg::log_det_pd(omega)?;
    Ok(-0.5 * t * k * (2.0 * PI).ln() - 0.5 * t * ld - 0.5 * t * k)
}

/// Seemingly-unrelated-regressions GLS estimate on the VAR's common design,
/// weighted by `omega`. Returns the stacked `(1 + Kp) × K` coefficients.
pub fn sur_gls(fit: &VarFit, omega: &Mat) -> Result<Mat> {
    let z = fit.regressors();
    let y = fit.data.rows(fit.p, fit.t_eff).into_owned();
    let w = linalg::inverse(omega, "weighting covariance")?;
    let ztz = z.transpose() * &z;
    let m = z.ncols();
    let k = fit.k;
    let lhs = w.kronecker(&ztz);
    let zy = z.transpose() * &y;
    // vec(Z'Y Ω⁻¹) stacks the (Ω⁻¹ ⊗ Z') vec(Y) right-hand side.
    let rhs_mat = &zy * &w;
    let rhs = Vector::from_column_slice(rhs_mat.as_slice());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("GLS normal equations".into()))?;
    Ok(Mat::from_column_slice(m, k, sol.as_slice()))
}

#[derive(Debug, Clone, Serialize)]
pub struct LagCriteria {
    pub p: usize,
    pub aic: f64,
    pub bic: f64,
    pub hq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LagSelection {
    pub aic: usize,
    pub bic: usize,
    pub hq: usize,
    pub table: Vec<LagCriteria>,
}

/// Information criteria for `p = 0..=p_max` on the common sample that holds
/// out the first `p_max` observations.
pub fn select_lag(data: &Dataset, p_max: usize) -> Result<LagSelection> {
    select_lag_matrix(&data.to_matrix(), p_max)
}

pub fn select_lag_matrix(y: &Mat, p_max: usize) -> Result<LagSelection> {
    let (t, k) = (y.nrows(), y.ncols());
    if t <= p_max || t - p_max <= k * p_max + 1 {
        return Err(Error::Config(format!(
            "maximum lag {p_max} is infeasible with {t} observations of {k} variables"
        )));
    }
    let names: Vec<String> = (0..k).map(|i| format!("y{i}")).collect();
    let n = (t - p_max) as f64;
    let mut table = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let fit = fit_on_sample(y, names.clone(), p, p_max)?;
        let ld = linalg::log_det_pd(&fit.omega_eps)?;
        let params = (p * k * k) as f64;
        table.push(LagCriteria {
            p,
            aic: ld + 2.0 * params / n,
            bic: ld + n.ln() * params / n,
            hq: ld + 2.0 * n.ln().ln() * params / n,
        });
    }
    let argmin = |f: fn(&LagCriteria) -> f64| {
        table
            .iter()
            .min_by(|a, b| f(a).total_cmp(&f(b)))
            .map_or(0, |c| c.p)
    };
    Ok(LagSelection {
        aic: argmin(|c| c.aic),
        bic: argmin(|c| c.bic),
        hq: argmin(|c| c.hq),
        table,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Stability {
    /// Companion eigenvalue moduli, descending.
    pub moduli: Vec<f64>,
    pub is_stable: bool,
}

pub fn stability_check(fit: &VarFit) -> Stability {
    stability_of(&fit.coefs)
}

pub fn stability_of(coefs: &[Mat]) -> Stability {
    if coefs.is_empty() {
        return Stability {
            moduli: Vec::new(),
            is_stable: true,
        };
    }
    let mut moduli: Vec<f64> = hac::companion(coefs)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let is_stable = moduli[0] < 1.0;
    Stability { moduli, is_stable }
}

/// A test statistic with an asymptotic χ² or F reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestStat {
    pub statistic: f64,
    pub df: f64,
    /// Denominator degrees of freedom for F statistics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df2: Option<f64>,
    pub pvalue: f64,
}

impl TestStat {
    pub fn chi2(statistic: f64, df: usize) -> Self {
        TestStat {
            statistic,
            df: df as f64,
            df2: None,
            pvalue: dist::chi2_sf(statistic, df as f64),
        }
    }
}

/// Multivariate Ljung–Box portmanteau statistic
/// `Q = T² Σ_{j=1}^{h} (T−j)⁻¹ tr(C_j' C_0⁻¹ C_j C_0⁻¹)` with `K²(h−p)` df.
pub fn portmanteau_test(fit: &VarFit, h: usize) -> Result<TestStat> {
    if h <= fit.p {
        return Err(Error::Config(format!(
            "portmanteau lag {h} must exceed the VAR order {}",
            fit.p
        )));
    }
    let q = portmanteau_statistic(&fit.residuals, h)?;
    Ok(TestStat::chi2(q, fit.k * fit.k * (h - fit.p)))
}

pub fn portmanteau_statistic(e: &Mat, h: usize) -> Result<f64> {
    let t = e.nrows();
    if h >= t {
        return Err(Error::Length(format!("portmanteau lag {h} needs more than {h} residuals")));
    }
    let c0 = hac::autocovariance(e, 0);
    let c0_inv = linalg::inverse(&c0, "residual covariance")?;
    let tf = t as f64;
    let mut q = 0.0;
    for j in 1..=h {
        let cj = hac::autocovariance(e, j);
        let term = (cj.transpose() * &c0_inv * &cj * &c0_inv).trace();
        q += term / (tf - j as f64);
    }
    Ok(tf * tf * q)
}

/// Brown–Forsythe test of equal spread across groups: one-way ANOVA on
/// absolute deviations from each group's median.
pub fn brown_forsythe_test(groups: &[Vec<f64>]) -> Result<TestStat> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::Degenerate("Brown-Forsythe needs at least two groups".into()));
    }
    if let Some(g) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::Degenerate(format!("group {g} has fewer than two observations")));
    }
    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = tscore::median(g);
            g.iter().map(|v| (v - m).abs()).collect()
        })
        .collect();
    let n: usize = z.iter().map(Vec::len).sum();
    let means: Vec<f64> = z.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let grand = z.iter().flatten().sum::<f64>() / n as f64;
    let between: f64 = z
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let within: f64 = z
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    if !(within > 0.0) {
        return Err(Error::Degenerate("all groups have zero spread about their medians".into()));
    }
    let (df1, df2) = ((k - 1) as f64, (n - k) as f64);
    let f = (between / df1) / (within / df2);
    Ok(TestStat {
        statistic: f,
        df: df1,
        df2: Some(df2),
        pvalue: dist::f_sf(f, df1, df2),
    })
}

/// Likelihood-ratio test of a diagonal covariance:
/// `LR = T(Σₖ ln σₖₖ − ln|Ω|)`, χ² with `K(K−1)/2` df.
pub fn lr_diag_test(omega: &Mat, t: usize) -> Result<TestStat> {
    let k = omega.nrows();
    if omega.ncols() != k {
        return Err(Error::Config("covariance matrix must be square".into()));
    }
    let ld = linalg::log_det_pd(&linalg::symmetrize(omega))?;
    let diag: f64 = omega.diagonal().iter().map(|v| v.ln()).sum();
    let lr = (t as f64 * (diag - ld)).max(0.0);
    Ok(TestStat::chi2(lr, k * (k - 1) / 2))
}

/// Breusch–Pagan LM test of a diagonal covariance from residual correlations:
/// `LM = T Σ_{k>l} r²ₖₗ`.
pub fn lm_diag_test(r: &Mat, t: usize) -> Result<TestStat> {
    let k = r.nrows();
    if r.ncols() != k {
        return Err(Error::parse("correlation matrix must be square"));
    }
    for i in 0..k {
        if (r[(i, i)] - 1.0).abs() > 1e-8 {
            return Err(Error::parse(format!(
                "correlation matrix diagonal entry {i} is {}, not 1",
                r[(i, i)]
            )));
        }
    }
    let mut s = 0.0;
    for i in 1..k {
        for j in 0..i {
            let (a, b) = (r[(i, j)], r[(j, i)]);
            if (a - b).abs() > 1e-8 || a.abs() > 1.0 {
                return Err(Error::parse(format!("invalid correlation at ({i}, {j})")));
            }
            s += a * a;
        }
    }
    Ok(TestStat::chi2(t as f64 * s, k * (k - 1) / 2))
}

pub fn correlation_from_covariance(omega: &Mat) -> Mat {
    let d: Vec<f64> = omega.diagonal().iter().map(|v| v.sqrt()).collect();
    Mat::from_fn(omega.nrows(), omega.ncols(), |i, j| {
        if i == j {
            1.0
        } else {
            omega[(i, j)] / (d[i] * d[j])
        }
    })
}

/// Fill a symmetric matrix from its upper-triangular entries listed row by row.
pub fn symmetric_from_upper(k: usize, upper: &[f64]) -> Result<Mat> {
    if upper.len() != k * (k + 1) / 2 {
        return Err(Error::Length(format!(
            "{k}×{k} symmetric matrix needs {} upper-triangular entries, got {}",
            k * (k + 1) / 2,
            upper.len()
        )));
    }
    let mut m = Mat::zeros(k, k);
    let mut it = upper.iter();
    for i in 0..k {
        for j in i..k {
            let v = *it.next().unwrap_or(&0.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub portmanteau: TestStat,
    pub portmanteau_lags: usize,
    pub brown_forsythe: TestStat,
    pub lr_diag: TestStat,
    pub lm_diag: TestStat,
    pub stability: Stability,
}

/// The full residual diagnostic battery, using `T_eff` for both
/// diagonal-covariance tests.
pub fn diagnostics(fit: &VarFit, portmanteau_lags: usize) -> Result<DiagnosticsReport> {
    let groups: Vec<Vec<f64>> = fit.residuals.column_iter().map(|c| c.iter().copied().collect()).collect();
    Ok(DiagnosticsReport {
        portmanteau: portmanteau_test(fit, portmanteau_lags)?,
        portmanteau_lags,
        brown_forsythe: brown_forsythe_test(&groups)?,
        lr_diag: lr_diag_test(&fit.omega_eps, fit.t_eff)?,
        lm_diag: lm_diag_test(&fit.residual_correlation(), fit.t_eff)?,
        stability: stability_check(fit),
    })
}

/// Upper-triangular table with a header row of names; the lower triangle is blank.
pub fn upper_triangle_csv(names: &[String], m: &Mat) -> String {
    let mut out = String::from("");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (i, n) in names.iter().enumerate() {
        out.push_str(n);
        for j in 0..names.len() {
            out.push(',');
            if j >= i {
                out.push_str(&format!("{:.6e}", m[(i, j)]));
            }
        }
        out.push('\n');
    }
    out
}

/// Recursively build `Y_t = c + Σ A_i Y_{t−i} + ε_t` from `p` initial rows and
/// a `T × K` innovation matrix. Returns the initial rows followed by `T` new rows.
pub fn simulate_recursive(intercept: &Vector, coefs: &[Mat], init: &Mat, innovations: &Mat) -> Mat {
    let p = coefs.len();
    let k = innovations.ncols();
    let n = innovations.nrows();
    let mut y = Mat::zeros(p + n, k);
    y.rows_mut(0, p).copy_from(&init.rows(init.nrows() - p, p));
    for t in p..p + n {
        let mut row = intercept.clone() + innovations.row(t - p).transpose();
        for (i, a) in coefs.iter().enumerate() {
            row += a * y.row(t - i - 1).transpose();
        }
        y.row_mut(t).copy_from(&row.transpose());
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("v{i}")).collect()
    }

    fn simulate_var1(a1: &Mat, t: usize, seed: u64) -> Mat {
        let k = a1.nrows();
        let mut r = sim::rng(seed);
        let e = sim::normal_matrix(&mut r, t + 100, k);
        let y = simulate_recursive(&Vector::zeros(k), std::slice::from_ref(a1), &Mat::zeros(1, k), &e);
        y.rows(101, t).into_owned()
    }

    fn known_a1() -> Mat {
        Mat::from_row_slice(4, 4, &[
            0.5, 0.1, 0.0, 0.0, //
            0.0, 0.4, 0.2, 0.0, //
            0.1, 0.0, 0.3, -0.1, //
            0.0, 0.0, 0.2, 0.6,
        ])
    }

    #[test]
    fn exact_recursion_is_recovered_without_noise() {
        let s = Mat::from_fn(20, 1, |t, _| 4.0 * 0.5f64.powi(t as i32));
        let fit = var_fit_matrix(&s, names(1), 1).unwrap();
        assert!((fit.coefs[0][(0, 0)] - 0.5).abs() < 1e-10);
        assert!(fit.intercept[0].abs() < 1e-10);
        assert!(linalg::max_abs(&fit.residuals) < 1e-10);
        // With several variables a single noiseless path keeps every lag vector
        // proportional to Y_0, so the design is rank deficient.
        let y = Mat::from_fn(20, 2, |t, j| [4.0, -1.0][j] * 0.5f64.powi(t as i32));
        assert!(matches!(var_fit_matrix(&y, names(2), 1), Err(Error::Singular(_))));
    }

    #[test]
    fn var1_coefficients_are_consistent() {
        let a1 = known_a1();
        let mut err = Mat::zeros(4, 4);
        for seed in 0..100 {
            let y = simulate_var1(&a1, 400, seed);
            let fit = var_fit_matrix(&y, names(4), 1).unwrap();
            err += (&fit.coefs[0] - &a1).abs();
        }
        err /= 100.0;
        assert!(linalg::max_abs(&err) < 0.05, "{err}");
    }

    #[test]
    fn residuals_are_orthogonal_and_white() {
        let y = simulate_var1(&known_a1(), 400, 7);
        let fit = var_fit_matrix(&y, names(4), 1).unwrap();
        let ortho = fit.regressors().transpose() * &fit.residuals;
        assert!(linalg::max_abs(&ortho) < 1e-8, "{ortho}");
        let refit = var_fit_matrix(&fit.residuals, names(4), 1).unwrap();
        assert!(linalg::max_abs(&refit.coefs[0]) < 2.0 / 400f64.sqrt());
    }

    #[test]
    fn ols_equals_gls_on_common_regressors() {
        let y = simulate_var1(&known_a1(), 200, 3);
        let fit = var_fit_matrix(&y, names(4), 2).unwrap();
        let gls = sur_gls(&fit, &fit.omega_eps).unwrap();
        let delta = linalg::max_abs(&(gls - fit.stacked_coefficients()));
        assert!(delta < 1e-8, "{delta}");
    }

    #[test]
    fn loglik_invariant_to_equation_order() {
        let y = simulate_var1(&known_a1(), 150, 4);
        let perm = [2usize, 0, 3, 1];
        let yp = Mat::from_fn(150, 4, |i, j| y[(i, perm[j])]);
        let a = var_fit_matrix(&y, names(4), 1).unwrap();
        let b = var_fit_matrix(&yp, names(4), 1).unwrap();
        assert!((a.loglik - b.loglik).abs() < 1e-8 * a.loglik.abs());
    }

    #[test]
    fn short_sample_is_rejected() {
        let y = Mat::from_fn(6, 3, |i, j| (i * 3 + j) as f64);
        assert!(matches!(var_fit_matrix(&y, names(3), 2), Err(Error::Length(_))));
    }

    #[test]
    fn lag_selection_on_var1() {
        let mut hits = [0; 3];
        for seed in 0..100 {
            let y = simulate_var1(&known_a1(), 400, 500 + seed);
            let s = select_lag_matrix(&y, 4).unwrap();
            for (h, p) in hits.iter_mut().zip([s.aic, s.bic, s.hq]) {
                if p == 1 {
                    *h += 1;
                }
            }
        }
        // AIC overfits occasionally; BIC and HQ are consistent.
        assert!(hits[1] >= 90 && hits[2] >= 90, "{hits:?}");
        assert!(hits[0] >= 75, "{hits:?}");
    }

    #[test]
    fn lag_selection_on_noise_and_edges() {
        let mut r = sim::rng(9);
        let e = sim::normal_matrix(&mut r, 300, 3);
        assert_eq!(select_lag_matrix(&e, 3).unwrap().bic, 0);
        let s = select_lag_matrix(&e, 1).unwrap();
        assert!(s.aic <= 1 && s.bic <= 1 && s.hq <= 1);
        assert!(matches!(select_lag_matrix(&e.rows(0, 10).into_owned(), 4), Err(Error::Config(_))));
    }

    #[test]
    fn stability_of_diagonal_systems() {
        let s = stability_of(&[Mat::identity(3, 3) * 0.5]);
        assert!(s.is_stable);
        assert!(s.moduli.iter().all(|m| (m - 0.5).abs() < 1e-12));
        let s = stability_of(&[Mat::identity(3, 3)]);
        assert!(!s.is_stable);
        assert!((s.moduli[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn portmanteau_df_and_size() {
        let mut r = sim::rng(1);
        let e = sim::normal_matrix(&mut r, 50, 2);
        let fit = var_fit_matrix(&e, names(2), 1).unwrap();
        assert_eq!(portmanteau_test(&fit, 2).unwrap().df, 4.0);
        assert!(matches!(portmanteau_test(&fit, 1), Err(Error::Config(_))));

        let mut rejections = 0;
        for seed in 0..500 {
            let e = sim::normal_matrix(&mut sim::rng(10_000 + seed), 400, 2);
            let q = portmanteau_statistic(&e, 8).unwrap();
            if dist::chi2_sf(q, 32.0) < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 500.0;
        assert!((0.02..=0.10).contains(&rate), "{rate}");
    }

    #[test]
    fn portmanteau_detects_autocorrelation() {
        let mut r = sim::rng(2);
        let a = sim::ar1(&mut r, 400, 0.6, 50);
        let b = sim::ar1(&mut r, 400, 0.6, 50);
        let e = linalg::from_columns(&[&a, &b]);
        let q = portmanteau_statistic(&e, 8).unwrap();
        assert!(dist::chi2_sf(q, 32.0) < 0.01);
    }

    #[test]
    fn brown_forsythe_cases() {
        let g = vec![1.0, 2.0, 3.0, 5.0, 8.0];
        let r = brown_forsythe_test(&[g.clone(), g.clone(), g]).unwrap();
        assert!(r.statistic.abs() < 1e-12 && (r.pvalue - 1.0).abs() < 1e-12);

        let mut rng = sim::rng(3);
        let a = sim::normals(&mut rng, 200);
        let b: Vec<f64> = sim::normals(&mut rng, 200).iter().map(|v| 5.0 * v).collect();
        assert!(brown_forsythe_test(&[a, b]).unwrap().pvalue < 1e-6);

        let mut rejections = 0;
        for seed in 0..500 {
            let mut rng = sim::rng(40_000 + seed);
            let groups: Vec<Vec<f64>> = (0..4).map(|_| sim::normals(&mut rng, 40)).collect();
            if brown_forsythe_test(&groups).unwrap().pvalue < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 500.0;
        assert!((0.02..=0.10).contains(&rate), "{rate}");

        assert!(matches!(brown_forsythe_test(&[vec![1.0], vec![1.0, 2.0]]), Err(Error::Degenerate(_))));
        assert!(matches!(brown_forsythe_test(&[vec![1.0, 1.0], vec![2.0, 2.0]]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn diagonal_covariance_tests() {
        let d = Mat::from_diagonal(&Vector::from_vec(vec![1.0, 2.0, 3.0, 0.5]));
        let lr = lr_diag_test(&d, 42).unwrap();
        assert!(lr.statistic.abs() < 1e-12 && (lr.pvalue - 1.0).abs() < 1e-12);
        assert_eq!(lr.df, 6.0);
        assert!((dist::chi2_isf(0.05, lr.df) - 12.59).abs() < 0.005);
        let lm = lm_diag_test(&Mat::identity(4, 4), 40).unwrap();
        assert_eq!(lm.statistic, 0.0);
        let mut bad = Mat::identity(3, 3);
        bad[(1, 1)] = 0.9;
        assert!(matches!(lm_diag_test(&bad, 40), Err(Error::Parse { .. })));
        let mut neg = Mat::identity(2, 2);
        neg[(0, 1)] = 2.0;
        neg[(1, 0)] = 2.0;
        assert!(matches!(lr_diag_test(&neg, 40), Err(Error::Singular(_))));
    }

    #[test]
    fn recursive_simulation_round_trip() {
        let a1 = known_a1();
        let c = Vector::from_vec(vec![0.1, -0.2, 0.0, 0.3]);
        let e = sim::normal_matrix(&mut sim::rng(5), 50, 4);
        let y = simulate_recursive(&c, std::slice::from_ref(&a1), &Mat::zeros(1, 4), &e);
        let fit = var_fit_matrix(&y, names(4), 1).unwrap();
        // Exact fit is impossible with noise, but the recursion must hold exactly.
        for t in 1..51 {
            let pred = &c + &a1 * y.row(t - 1).transpose() + e.row(t - 1).transpose();
            assert!((pred - y.row(t).transpose()).amax() < 1e-12);
        }
        assert_eq!(fit.t_eff, 50);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn lm_statistic_is_nonnegative_and_symmetric(r01 in -0.9f64..0.9, r02 in -0.3f64..0.3, t in 10usize..200) {
            let r = Mat::from_row_slice(3, 3, &[1.0, r01, r02, r01, 1.0, 0.0, r02, 0.0, 1.0]);
            let lm = lm_diag_test(&r, t).unwrap();
            prop_assert!(lm.statistic >= 0.0);
            prop_assert!((lm.statistic - t as f64 * (r01 * r01 + r02 * r02)).abs() < 1e-9);
        }

        #[test]
        fn portmanteau_is_nonnegative(seed in 0u64..1000) {
            let e = sim::normal_matrix(&mut sim::rng(seed), 60, 2);
            prop_assert!(portmanteau_statistic(&e, 5).unwrap() >= 0.0);
        }
    }
}
