//! Canonical cointegrating regression and single-equation cointegration tests.

mod hansen_table;
pub mod mackinnon;

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::hac::{self, KernelKind, KernelSpec, LrvEstimate, LrvOptions, Prewhiten};
use crate::linalg::{self, Mat, Vector};
use crate::tscore::Dataset;

pub use hansen_table::{HANSEN_PVALUES, HANSEN_TABLE_M_MAX};
pub use mackinnon::mackinnon_p;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    Const,
    ConstTrend,
    ConstTrendSq,
}

impl Deterministic {
    /// Highest power of the time index included.
    pub fn degree(self) -> u32 {
        match self {
            Deterministic::Const => 0,
            Deterministic::ConstTrend => 1,
            Deterministic::ConstTrendSq => 2,
        }
    }

    pub fn nterms(self) -> usize {
        self.degree() as usize + 1
    }

    pub fn labels(self) -> &'static [&'static str] {
        &["const", "trend", "trend_sq"][..self.nterms()]
    }
}

/// Columns `t^k` for the given powers, with `t = 1..=n`.
pub fn power_columns(powers: &[u32], n: usize) -> Mat {
    Mat::from_fn(n, powers.len(), |i, j| ((i + 1) as f64).powi(powers[j] as i32))
}

pub fn deterministic_columns(det: Deterministic, n: usize) -> Mat {
    let powers: Vec<u32> = (0..=det.degree()).collect();
    power_columns(&powers, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcrSpec {
    pub y: String,
    pub x: Vec<String>,
    pub deterministic: Deterministic,
    pub kernel: KernelSpec,
    pub prewhiten: Prewhiten,
    pub center: bool,
    /// Apply the `T/(T−k)` correction to the long-run covariance estimates.
    pub dof_correction: bool,
}

impl CcrSpec {
    /// Centered, dof-corrected, VAR(1)-prewhitened QS kernel with automatic bandwidth.
    pub fn new(y: impl Into<String>, x: Vec<String>, deterministic: Deterministic) -> Self {
        CcrSpec {
            y: y.into(),
            x,
            deterministic,
            kernel: KernelSpec::qs_auto(),
            prewhiten: Prewhiten::Var(1),
            center: true,
            dof_correction: true,
        }
    }

    fn lrv_options(&self, nparams: usize) -> LrvOptions {
        LrvOptions::new(self.kernel)
            .prewhiten(self.prewhiten)
            .center(self.center)
            .dof(if self.dof_correction { nparams } else { 0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcrFit {
    pub y_name: String,
    pub x_names: Vec<String>,
    pub deterministic: Deterministic,
    /// Observations in the transformed regression (one lost to differencing).
    pub nobs: usize,
    #[serde(with = "linalg::serde_vector")]
    pub beta: Vector,
    #[serde(with = "linalg::serde_vector")]
    pub gamma1: Vector,
    /// Static OLS cointegrating vector used to build the transformation.
    #[serde(with = "linalg::serde_vector")]
    pub beta_static: Vector,
    /// Deterministic coefficients of the regressor equations, one column per regressor.
    #[serde(with = "linalg::serde_rows")]
    pub gamma2: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub sigma: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub lambda2: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub omega: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub lambda: Mat,
    /// Conditional long-run variance `ω₁₁ − Ω₁₂Ω₂₂⁻¹Ω₂₁`.
    pub omega_1_2: f64,
    /// Standard errors and normal p-values, regressors first, then deterministic terms.
    pub se: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub bandwidth: f64,
    #[serde(skip)]
    pub lrv: Option<LrvEstimate>,
    #[serde(skip)]
    pub y_star: Vec<f64>,
    #[serde(skip)]
    pub x_star: Mat,
    /// Final-stage design `(X*, D₁)` and residuals, kept for the stability test.
    #[serde(skip)]
    pub design: Mat,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl CcrFit {
    /// Coefficients with p-values in parentheses, regressors then deterministic terms.
    pub fn report_line(&self) -> String {
        let mut parts = Vec::new();
        let k = self.beta.len();
        for (i, name) in self.x_names.iter().enumerate() {
            parts.push(format!("{:.4} ({:.4}) {name}", self.beta[i], self.pvalues[i]));
        }
        for (j, label) in self.deterministic.labels().iter().enumerate() {
            parts.push(format!("{:.4} ({:.4}) {label}", self.gamma1[j], self.pvalues[k + j]));
        }
        format!("{} = {}", self.y_name, parts.join(" + "))
    }
}

/// Apply the canonical cointegrating transformation.
///
/// `u` holds the stationary errors `(u₁, u₂')` row by row, aligned with the rows
/// of `y` and `x`. Returns `(y*, X*)` with
/// `X*_t = X_t − (Σ⁻¹Λ₂)'u_t` and
/// `y*_t = y_t − (Σ⁻¹Λ₂β̃ + (0, (Ω₂₂⁻¹Ω₂₁)')')'u_t`.
pub fn ccr_transform(
    y: &[f64],
    x: &Mat,
    u: &Mat,
    sigma: &Mat,
    lambda2: &Mat,
    omega: &Mat,
    beta_tilde: &Vector,
) -> Result<(Vec<f64>, Mat)> {
    let n = u.ncols();
    let m = n - 1;
    let omega22 = omega.view((1, 1), (m, m)).into_owned();
    let omega21 = omega.view((1, 0), (m, 1)).into_owned();
    let pi = linalg::pinv(sigma, 1e-12) * lambda2;
    let x_star = x - u * &pi;
    let mut w = &pi * beta_tilde;
    let corr = linalg::inverse(&omega22, "long-run regressor covariance")? * omega21;
    for i in 0..m {
        w[i + 1] += corr[(i, 0)];
    }
    let y_star: Vec<f64> = (0..y.len())
        .map(|t| y[t] - (0..n).map(|j| u[(t, j)] * w[j]).sum::<f64>())
        .collect();
    Ok((y_star, x_star))
}

fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

const OMEGA22_MAX_COND: f64 = 1e12;

/// CCR on raw arrays. `extra_powers` adds trend powers to the final-stage
/// regression only (used for variable-addition tests).
fn ccr_core(
    y: &[f64],
    x: &Mat,
    spec: &CcrSpec,
    extra_powers: &[u32],
) -> Result<(CcrFit, Vec<f64>)> {
    let t = y.len();
    let m = x.ncols();
    if m == 0 {
        return Err(Error::Config("cointegrating regression needs at least one regressor".into()));
    }
    let ndet = spec.deterministic.nterms();
    if t <= m + ndet + extra_powers.len() + 4 {
        return Err(Error::Length(format!(
            "cointegrating regression with {m} regressors needs more than {} observations",
            m + ndet + extra_powers.len() + 4
        )));
    }
    let yv = Mat::from_column_slice(t, 1, y);
    let d1 = deterministic_columns(spec.deterministic, t);
    let z = hstack(&[x, &d1]);
    let b_static = linalg::lstsq(&z, &yv)?;
    let u1 = &yv - &z * &b_static;
    let gamma2 = linalg::lstsq(&d1, x)?;
    let xr = x - &d1 * &gamma2;
    let n = m + 1;
    let u = Mat::from_fn(t - 1, n, |i, j| {
        if j == 0 {
            u1[(i + 1, 0)]
        } else {
            xr[(i + 1, j - 1)] - xr[(i, j - 1)]
        }
    });
    let lrv = hac::long_run_variance(&u, &spec.lrv_options(m + ndet))?;
    let omega22 = lrv.omega.view((1, 1), (m, m)).into_owned();
    let cond = linalg::condition_number(&omega22);
    if !(cond <= OMEGA22_MAX_COND) {
        return Err(Error::Singular(format!(
            "long-run covariance of the regressors has condition number {cond:.3e}"
        )));
    }
    let lambda2 = lrv.lambda.columns(1, m).into_owned();
    let beta_tilde = Vector::from_iterator(m, b_static.rows(0, m).iter().copied());
    let x1 = x.rows(1, t - 1).into_owned();
    let (y_star, x_star) = ccr_transform(&y[1..], &x1, &u, &lrv.sigma, &lambda2, &lrv.omega, &beta_tilde)?;

    let d1s = d1.rows(1, t - 1).into_owned();
    let extra = power_columns(extra_powers, t).rows(1, t - 1).into_owned();
    let design = hstack(&[&x_star, &d1s, &extra]);
    let ys = Mat::from_column_slice(t - 1, 1, &y_star);
    let b = linalg::lstsq(&design, &ys)?;
    let resid: Vec<f64> = (&ys - &design * &b).iter().copied().collect();

    let omega21 = lrv.omega.view((1, 0), (m, 1)).into_owned();
    let quad = (omega21.transpose() * linalg::inverse(&omega22, "long-run regressor covariance")? * &omega21)[(0, 0)];
    let omega_1_2 = lrv.omega[(0, 0)] - quad;
    let cov = linalg::inverse(&(design.transpose() * &design), "transformed design moment matrix")? * omega_1_2;
    let se: Vec<f64> = (0..design.ncols()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let pvalues: Vec<f64> = (0..design.ncols())
        .map(|i| dist::normal_two_sided(b[(i, 0)] / se[i]))
        .collect();
    let all: Vec<f64> = b.iter().copied().collect();
    let fit = CcrFit {
        y_name: spec.y.clone(),
        x_names: spec.x.clone(),
        deterministic: spec.deterministic,
        nobs: t - 1,
        beta: Vector::from_column_slice(&all[..m]),
        gamma1: Vector::from_column_slice(&all[m..m + ndet]),
        beta_static: beta_tilde,
        gamma2,
        sigma: lrv.sigma.clone(),
        lambda2,
        omega: lrv.omega.clone(),
        lambda: lrv.lambda.clone(),
        omega_1_2,
        se,
        pvalues,
        bandwidth: lrv.bandwidth_used,
        lrv: Some(lrv),
        y_star,
        x_star,
        design,
        residuals: resid,
    };
    let extra_coefs = all[m + ndet..].to_vec();
    Ok((fit, extra_coefs))
}

fn regression_arrays(data: &Dataset, spec: &CcrSpec) -> Result<(Vec<f64>, Mat)> {
    if spec.x.iter().any(|n| n == &spec.y) {
        return Err(Error::Config(format!("{} appears as both regressand and regressor", spec.y)));
    }
    let y = data.column(&spec.y)?.values().to_vec();
    let x = data.matrix(&spec.x)?;
    Ok((y, x))
}

/// Canonical cointegrating regression of `spec.y` on `spec.x` and deterministic terms.
pub fn ccr_fit(data: &Dataset, spec: &CcrSpec) -> Result<CcrFit> {
    let (y, x) = regression_arrays(data, spec)?;
    ccr_fit_arrays(&y, &x, spec)
}

pub fn ccr_fit_arrays(y: &[f64], x: &Mat, spec: &CcrSpec) -> Result<CcrFit> {
    Ok(ccr_core(y, x, spec, &[])?.0)
}

/// Check that `Σ` and `Ω` are legal long-run covariance estimates: square,
/// symmetric, positive semi-definite, and `Ω` of full rank.
pub fn validate_long_run_matrices(sigma: &Mat, omega: &Mat) -> Result<()> {
    for (name, m) in [("sigma", sigma), ("omega", omega)] {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::Config(format!("{name} must be square of order at least 2")));
        }
        let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
        if linalg::max_abs(&(m - m.transpose())) > 1e-12 * scale {
            return Err(Error::Config(format!("{name} is not symmetric")));
        }
        if m.clone().symmetric_eigenvalues().min() < -1e-10 * scale {
            return Err(Error::Config(format!("{name} is not positive semi-definite")));
        }
    }
    if omega.clone().symmetric_eigenvalues().min() <= 1e-12 * linalg::max_abs(omega) {
        return Err(Error::Singular("omega does not have full rank".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CointTest {
    HansenLc,
    ParkChi2,
    EngleGranger,
    PhillipsOuliaris,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullHypothesis {
    Cointegration,
    NoCointegration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CointTestResult {
    pub test: CointTest,
    pub statistic: f64,
    pub pvalue: f64,
    pub null: NullHypothesis,
    /// Degrees of freedom (Park) or augmentation lags (Engle-Granger).
    pub df: Option<usize>,
    /// The statistic fell outside the tabulated range and the p-value was clamped.
    pub pvalue_clamped: bool,
}

impl CointTestResult {
    pub fn summary(&self) -> String {
        let name = match self.test {
            CointTest::HansenLc => "Hansen Lc",
            CointTest::ParkChi2 => "Park chi2",
            CointTest::EngleGranger => "Engle-Granger tau",
            CointTest::PhillipsOuliaris => "Phillips-Ouliaris Zt",
        };
        format!("{name} = {:.4} (p = {:.4})", self.statistic, self.pvalue)
    }
}

/// Hansen's Lc stability statistic `n⁻¹ tr(M⁻¹ Σ S_t S_t') / ω` from a regression
/// design `z`, its residuals and the long-run residual variance `omega`.
pub fn hansen_lc_statistic(z: &Mat, resid: &[f64], omega: f64) -> Result<f64> {
    let (n, k) = (z.nrows(), z.ncols());
    if !(omega > 0.0) {
        return Err(Error::Degenerate(format!("conditional long-run variance is {omega}")));
    }
    let m_inv = linalg::inverse(&(z.transpose() * z), "regressor moment matrix")?;
    let mut s = Vector::zeros(k);
    let mut acc = Mat::zeros(k, k);
    for t in 0..n {
        for j in 0..k {
            s[j] += z[(t, j)] * resid[t];
        }
        acc.ger(1.0, &s, &s, 1.0);
    }
    Ok(m_inv.component_mul(&acc).sum() / (n as f64 * omega))
}

/// Upper-tail p-value for Lc by linear interpolation in the simulated critical
/// value table; the flag reports clamping at the table ends.
pub fn hansen_pvalue(stat: f64, m: usize, det: Deterministic) -> Result<(f64, bool)> {
    let row = hansen_table::critical_values(m, det)?;
    let ps = &HANSEN_PVALUES;
    // `row[i]` is the critical value for upper-tail probability `ps[i]`,
    // increasing as the probability falls.
    if stat <= row[ps.len() - 1] {
        return Ok((ps[ps.len() - 1], stat < row[ps.len() - 1]));
    }
    if stat >= row[0] {
        return Ok((ps[0], stat > row[0]));
    }
    for i in (0..ps.len() - 1).rev() {
        let (lo, hi) = (row[i + 1], row[i]);
        if stat <= hi {
            let w = (stat - lo) / (hi - lo);
            return Ok((ps[i + 1] + w * (ps[i] - ps[i + 1]), false));
        }
    }
    unreachable!("statistic lies inside the table range")
}

/// Hansen (1992) Lc test of the null of cointegration on a CCR fit.
pub fn hansen_lc_test(fit: &CcrFit) -> Result<CointTestResult> {
    let stat = hansen_lc_statistic(&fit.design, &fit.residuals, fit.omega_1_2)?;
    let (pvalue, clamped) = hansen_pvalue(stat, fit.x_names.len(), fit.deterministic)?;
    Ok(CointTestResult {
        test: CointTest::HansenLc,
        statistic: stat,
        pvalue,
        null: NullHypothesis::Cointegration,
        df: None,
        pvalue_clamped: clamped,
    })
}

/// Park's H(p, q) variable-addition test: Wald statistic on superfluous trend
/// powers added to the transformed regression, χ²(q) under cointegration.
pub fn park_variable_addition_test(
    data: &Dataset,
    spec: &CcrSpec,
    added_powers: &[u32],
) -> Result<CointTestResult> {
    let (y, x) = regression_arrays(data, spec)?;
    park_test_arrays(&y, &x, spec, added_powers)
}

pub fn park_test_arrays(y: &[f64], x: &Mat, spec: &CcrSpec, added_powers: &[u32]) -> Result<CointTestResult> {
    if added_powers.is_empty() {
        return Ok(park_result(0.0, 0));
    }
    for (i, &p) in added_powers.iter().enumerate() {
        if p <= spec.deterministic.degree() || added_powers[..i].contains(&p) {
            return Err(Error::Config(format!(
                "trend power {p} is already part of the specification"
            )));
        }
    }
    let (fit, extra) = ccr_core(y, x, spec, added_powers)?;
    let q = added_powers.len();
    let k = fit.design.ncols();
    let cov = linalg::inverse(&(fit.design.transpose() * &fit.design), "augmented design")? * fit.omega_1_2;
    let vq = cov.view((k - q, k - q), (q, q)).into_owned();
    let b = Vector::from_vec(extra);
    let stat = (b.transpose() * linalg::inverse(&vq, "added-term covariance")? * &b)[(0, 0)];
    Ok(park_result(stat.max(0.0), q))
}

fn park_result(stat: f64, q: usize) -> CointTestResult {
    CointTestResult {
        test: CointTest::ParkChi2,
        statistic: stat,
        pvalue: park_pvalue(stat, q),
        null: NullHypothesis::Cointegration,
        df: Some(q),
        pvalue_clamped: false,
    }
}

/// χ²(q) upper tail; q = 0 gives 1.
pub fn park_pvalue(stat: f64, q: usize) -> f64 {
    dist::chi2_sf(stat, q as f64)
}

fn static_residuals(y: &[f64], x: &Mat, det: Deterministic) -> Result<Vec<f64>> {
    let t = y.len();
    let yv = Mat::from_column_slice(t, 1, y);
    let z = hstack(&[x, &deterministic_columns(det, t)]);
    let b = linalg::lstsq(&z, &yv)?;
    Ok((&yv - z * b).iter().copied().collect())
}

/// Augmented Dickey-Fuller regression without deterministic terms:
/// `Δe_t = ρ e_{t−1} + Σ φ_i Δe_{t−i}`. Returns `(τ, lags)` with the lag chosen by
/// BIC up to `⌊12 (T/100)^{1/4}⌋` on a common sample.
pub fn adf_tau_no_det(e: &[f64]) -> Result<(f64, usize)> {
    let t = e.len();
    let kmax_rule = (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize;
    // Keep enough observations for the largest regression.
    let kmax = kmax_rule.min(t.saturating_sub(6) / 2);
    let de: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let build = |k: usize, start: usize| {
        // Rows indexed by position in `de`, from `start` to the end.
        let rows = de.len() - start;
        let x = Mat::from_fn(rows, k + 1, |i, j| {
            let s = start + i;
            if j == 0 {
                e[s]
            } else {
                de[s - j]
            }
        });
        let y = Mat::from_fn(rows, 1, |i, _| de[start + i]);
        (x, y)
    };
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..=kmax {
        let (x, y) = build(k, kmax);
        let b = linalg::lstsq(&x, &y)?;
        let r = &y - &x * b;
        let n = r.nrows() as f64;
        let ssr = r.norm_squared();
        let bic = (ssr / n).ln() + (k + 1) as f64 * n.ln() / n;
        if bic < best.0 {
            best = (bic, k);
        }
    }
    let k = best.1;
    let (x, y) = build(k, k);
    let b = linalg::lstsq(&x, &y)?;
    let r = &y - &x * &b;
    let dof = (r.nrows() - x.ncols()) as f64;
    let s2 = r.norm_squared() / dof;
    let xtx_inv = linalg::inverse(&(x.transpose() * &x), "ADF design")?;
    let tau = b[(0, 0)] / (s2 * xtx_inv[(0, 0)]).sqrt();
    Ok((tau, k))
}

/// Phillips-Perron `Z_t` on `e` without deterministic terms, long-run variance
/// from a QS kernel with automatic bandwidth.
pub fn pp_zt_no_det(e: &[f64]) -> Result<f64> {
    let n = e.len() - 1;
    let lag = &e[..n];
    let cur = &e[1..];
    let sxx: f64 = lag.iter().map(|v| v * v).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("residual series is identically zero".into()));
    }
    let rho = lag.iter().zip(cur).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let k: Vec<f64> = lag.iter().zip(cur).map(|(a, b)| b - rho * a).collect();
    let s2 = k.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let lrv = hac::long_run_variance_scalar(&k, &LrvOptions::new(KernelSpec {
        kind: KernelKind::QuadraticSpectral,
        bandwidth: hac::Bandwidth::NeweyWestAuto,
    }))?;
    let l2 = lrv.value();
    if !(l2 > 0.0) {
        return Err(Error::Degenerate("long-run variance of the residual innovations is zero".into()));
    }
    let l = l2.sqrt();
    let t_rho = (rho - 1.0) * sxx.sqrt() / s2.sqrt();
    Ok(s2.sqrt() / l * t_rho - 0.5 * (l2 - s2) / l * n as f64 / sxx.sqrt())
}

/// Engle-Granger residual-based test (null: no cointegration).
pub fn engle_granger_test(data: &Dataset, spec: &CcrSpec) -> Result<CointTestResult> {
    let (y, x) = regression_arrays(data, spec)?;
    engle_granger_arrays(&y, &x, spec.deterministic)
}

pub fn engle_granger_arrays(y: &[f64], x: &Mat, det: Deterministic) -> Result<CointTestResult> {
    let e = static_residuals(y, x, det)?;
    let (tau, lags) = adf_tau_no_det(&e)?;
    Ok(CointTestResult {
        test: CointTest::EngleGranger,
        statistic: tau,
        pvalue: mackinnon_p(tau, det, x.ncols() + 1)?,
        null: NullHypothesis::NoCointegration,
        df: Some(lags),
        pvalue_clamped: false,
    })
}

/// Phillips-Ouliaris residual-based `Z_t` test (null: no cointegration).
pub fn phillips_ouliaris_test(data: &Dataset, spec: &CcrSpec) -> Result<CointTestResult> {
    let (y, x) = regression_arrays(data, spec)?;
    phillips_ouliaris_arrays(&y, &x, spec.deterministic)
}

pub fn phillips_ouliaris_arrays(y: &[f64], x: &Mat, det: Deterministic) -> Result<CointTestResult> {
    let e = static_residuals(y, x, det)?;
    let z = pp_zt_no_det(&e)?;
    Ok(CointTestResult {
        test: CointTest::PhillipsOuliaris,
        statistic: z,
        pvalue: mackinnon_p(z, det, x.ncols() + 1)?,
        null: NullHypothesis::NoCointegration,
        df: None,
        pvalue_clamped: false,
    })
}

/// Draw the null distribution of Lc: `m` independent random-walk regressors,
/// iid errors, OLS on `(X, D)` with the residual variance as `ω`.
pub fn simulate_hansen_lc(m: usize, det: Deterministic, t: usize, rng: &mut crate::sim::Rng) -> Result<f64> {
    let x = Mat::from_fn(t, m, |_, _| 0.0);
    let mut x = x;
    for j in 0..m {
        let rw = crate::sim::random_walk(rng, t);
        for i in 0..t {
            x[(i, j)] = rw[i];
        }
    }
    let u = crate::sim::normals(rng, t);
    let z = hstack(&[&x, &deterministic_columns(det, t)]);
    let yv = Mat::from_column_slice(t, 1, &u);
    let b = linalg::lstsq(&z, &yv)?;
    let r: Vec<f64> = (&yv - &z * b).iter().copied().collect();
    let s2 = r.iter().map(|v| v * v).sum::<f64>() / t as f64;
    hansen_lc_statistic(&z, &r, s2)
}
