//! Kernel-weighted long-run variance estimation with automatic bandwidth
//! selection and optional VAR prewhitening.
//!
//! Lag-`j` autocovariances follow the convention `Γ_j = T⁻¹ Σ_t u_t u_{t−j}'`, so
//! the one-sided sum is `Λ = Γ_0 + Σ_{j≥1} k(j/bw) Γ_j` and the two-sided long-run
//! variance is `Ω = Λ + Λ' − Σ` with `Σ = Γ_0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    QuadraticSpectral,
    Bartlett,
    Truncated,
}

/// How the kernel bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Real bandwidth `bw`; lag `j` gets weight `k(j/bw)`. Zero keeps lag 0 only.
    Fixed(f64),
    /// Classical truncation lag `l`: lags `1..=l` enter. For Bartlett this is
    /// `bw = l + 1`, giving weights `1 − j/(l+1)`.
    Lags(usize),
    /// Newey-West (1994) plug-in bandwidth.
    NeweyWestAuto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, bandwidth: Bandwidth) -> Result<Self> {
        if let Bandwidth::Fixed(bw) = bandwidth {
            if !bw.is_finite() || bw < 0.0 {
                return Err(Error::Config(format!("bandwidth must be finite and >= 0, got {bw}")));
            }
        }
        Ok(KernelSpec { kind, bandwidth })
    }

    pub fn bartlett_lags(l: usize) -> Self {
        KernelSpec {
            kind: KernelKind::Bartlett,
            bandwidth: Bandwidth::Lags(l),
        }
    }

    pub fn qs_auto() -> Self {
        KernelSpec {
            kind: KernelKind::QuadraticSpectral,
            bandwidth: Bandwidth::NeweyWestAuto,
        }
    }
}

/// Kernel weight `k(x)`.
pub fn kernel_weight(kind: KernelKind, x: f64) -> f64 {
    let ax = x.abs();
    match kind {
        KernelKind::Bartlett => (1.0 - ax).max(0.0),
        KernelKind::Truncated => {
            if ax <= 1.0 {
                1.0
            } else {
                0.0
            }
        }
        KernelKind::QuadraticSpectral => {
            if ax.is_infinite() {
                return 0.0;
            }
            let z = 6.0 * PI * ax / 5.0;
            if z < 0.2 {
                // Taylor expansion; the closed form cancels catastrophically near 0.
                let z2 = z * z;
                return 1.0
                    + z2 * (-1.0 / 10.0
                        + z2 * (1.0 / 280.0 + z2 * (-1.0 / 15120.0 + z2 / 1_330_560.0)));
            }
            25.0 / (12.0 * PI * PI * ax * ax) * (z.sin() / z - z.cos())
        }
    }
}

/// Newey-West (1994) automatic bandwidth computed from the combination
/// `f_t = Σ_k w_k u_{t,k}` (weights default to ones). Truncated kernels use the
/// Bartlett rule.
pub fn nw_auto_bandwidth(u: &Mat, kind: KernelKind, weights: Option<&[f64]>) -> Result<f64> {
    let t = u.nrows();
    if t < 8 {
        return Err(Error::Length(format!(
            "automatic bandwidth needs at least 8 observations, got {t}"
        )));
    }
    let k = u.ncols();
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == k => w.to_vec(),
        Some(w) => {
            return Err(Error::Length(format!("{} weights for {k} columns", w.len())));
        }
        None => vec![1.0; k],
    };
    let f: Vec<f64> = (0..t)
        .map(|i| (0..k).map(|j| w[j] * u[(i, j)]).sum())
        .collect();
    let tf = t as f64;
    let (exponent, q) = match kind {
        KernelKind::QuadraticSpectral => (2.0 / 25.0, 2),
        KernelKind::Bartlett | KernelKind::Truncated => (2.0 / 9.0, 1),
    };
    let n = ((4.0 * (tf / 100.0).powf(exponent)).floor() as usize).min(t - 1);
    let sigma = |j: usize| f[j..].iter().zip(&f[..t - j]).map(|(a, b)| a * b).sum::<f64>() / tf;
    let s0_lag = sigma(0);
    if !(s0_lag > 0.0) {
        return Err(Error::Degenerate("residual combination has zero variance".into()));
    }
    let mut s0 = s0_lag;
    let mut sq = 0.0;
    for j in 1..=n {
        let sj = sigma(j);
        s0 += 2.0 * sj;
        sq += 2.0 * (j as f64).powi(q) * sj;
    }
    if s0 == 0.0 {
        return Err(Error::Degenerate("spectral estimate at frequency zero vanishes".into()));
    }
    let ratio = (sq / s0).powi(2);
    let bw = match kind {
        KernelKind::QuadraticSpectral => 1.3221 * ratio.powf(0.2) * tf.powf(0.2),
        KernelKind::Bartlett | KernelKind::Truncated => {
            1.1447 * ratio.powf(1.0 / 3.0) * tf.powf(1.0 / 3.0)
        }
    };
    if !bw.is_finite() {
        return Err(Error::Degenerate("automatic bandwidth is not finite".into()));
    }
    Ok(bw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prewhiten {
    None,
    Var(usize),
}

/// Full configuration of a long-run variance computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvOptions {
    pub kernel: KernelSpec,
    pub prewhiten: Prewhiten,
    /// Subtract column means first.
    pub center: bool,
    /// Number of estimated parameters `k` for the `T/(T−k)` correction; 0 disables it.
    pub dof: usize,
}

impl LrvOptions {
    pub fn new(kernel: KernelSpec) -> Self {
        LrvOptions {
            kernel,
            prewhiten: Prewhiten::None,
            center: false,
            dof: 0,
        }
    }

    pub fn prewhiten(mut self, p: Prewhiten) -> Self {
        self.prewhiten = p;
        self
    }

    pub fn center(mut self, on: bool) -> Self {
        self.center = on;
        self
    }

    pub fn dof(mut self, k: usize) -> Self {
        self.dof = k;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrvEstimate {
    /// Two-sided long-run variance Ω.
    #[serde(with = "linalg::serde_rows")]
    pub omega: Mat,
    /// One-sided sum Λ, lag 0 included.
    #[serde(with = "linalg::serde_rows")]
    pub lambda: Mat,
    /// Contemporaneous covariance Σ = Γ_0.
    #[serde(with = "linalg::serde_rows")]
    pub sigma: Mat,
    /// Bandwidth in the `k(j/bw)` convention.
    pub bandwidth_used: f64,
    /// Truncation lag when the bandwidth was given as a lag count.
    pub lags: Option<usize>,
    pub kernel: KernelSpec,
    /// Order of the VAR prewhitening filter, 0 when not prewhitened.
    pub prewhiten_order: usize,
    /// Prewhitening filter roots were shrunk to keep the recoloring stable.
    pub filter_shrunk: bool,
    /// Negative eigenvalues of Ω were clamped to zero.
    pub clamped: bool,
}

impl LrvEstimate {
    /// Ω for the scalar case.
    pub fn value(&self) -> f64 {
        self.omega[(0, 0)]
    }
}

/// Largest companion-root modulus the prewhitening filter may have.
pub const MAX_FILTER_ROOT: f64 = 0.97;
const PSD_TOL: f64 = 1e-10;

/// `Γ_j = T⁻¹ Σ_{t≥j} u_t u_{t−j}'`.
pub fn autocovariance(u: &Mat, j: usize) -> Mat {
    let t = u.nrows();
    if j >= t {
        return Mat::zeros(u.ncols(), u.ncols());
    }
    let lead = u.rows(j, t - j);
    let lag = u.rows(0, t - j);
    lead.transpose() * lag / t as f64
}

fn resolve_bandwidth(e: &Mat, spec: &KernelSpec) -> Result<(f64, Option<usize>)> {
    Ok(match spec.bandwidth {
        Bandwidth::Fixed(bw) => (bw, None),
        Bandwidth::Lags(l) => match spec.kind {
            KernelKind::Truncated => (l as f64, Some(l)),
            _ => (l as f64 + 1.0, Some(l)),
        },
        Bandwidth::NeweyWestAuto => (nw_auto_bandwidth(e, spec.kind, None)?, None),
    })
}

/// One-sided kernel sum `Λ` and `Γ_0` of `e` at bandwidth `bw`.
fn kernel_sums(e: &Mat, kind: KernelKind, bw: f64) -> (Mat, Mat) {
    let t = e.nrows();
    let sigma = autocovariance(e, 0);
    let mut lambda = sigma.clone();
    if bw > 0.0 {
        let max_lag = match kind {
            KernelKind::Bartlett => (bw.ceil() as usize).saturating_sub(1),
            KernelKind::Truncated => bw.floor() as usize,
            KernelKind::QuadraticSpectral => t - 1,
        }
        .min(t - 1);
        for j in 1..=max_lag {
            let w = kernel_weight(kind, j as f64 / bw);
            if w != 0.0 {
                lambda += autocovariance(e, j) * w;
            }
        }
    }
    (lambda, sigma)
}

/// VAR(p) filter without intercept. Returns the lag matrices (after root
/// shrinkage), the filtered residuals and whether shrinkage was applied.
fn prewhiten_filter(u: &Mat, p: usize) -> Result<(Vec<Mat>, Mat, bool)> {
    let (t, k) = (u.nrows(), u.ncols());
    let x = Mat::from_fn(t - p, k * p, |i, c| {
        let lag = c / k + 1;
        u[(i + p - lag, c % k)]
    });
    let y = u.rows(p, t - p).into_owned();
    let b = linalg::lstsq_pinv(&x, &y, 1e-12);
    let mut coefs: Vec<Mat> = (0..p)
        .map(|i| b.rows(i * k, k).transpose().into_owned())
        .collect();
    let rho = companion_radius(&coefs);
    let shrunk = rho >= MAX_FILTER_ROOT;
    if shrunk {
        let c = MAX_FILTER_ROOT / rho;
        for (i, a) in coefs.iter_mut().enumerate() {
            *a *= c.powi(i as i32 + 1);
        }
    }
    let stacked = Mat::from_fn(k * p, k, |r, c| coefs[r / k][(c, r % k)]);
    let e = &y - &x * stacked;
    Ok((coefs, e, shrunk))
}

/// Spectral radius of the companion matrix of `coefs`.
pub fn companion_radius(coefs: &[Mat]) -> f64 {
    if coefs.is_empty() {
        return 0.0;
    }
    companion(coefs)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn companion(coefs: &[Mat]) -> Mat {
    let k = coefs[0].nrows();
    let p = coefs.len();
    let mut c = Mat::zeros(k * p, k * p);
    for (i, a) in coefs.iter().enumerate() {
        c.view_mut((0, i * k), (k, k)).copy_from(a);
    }
    for i in 1..p {
        c.view_mut((i * k, (i - 1) * k), (k, k))
            .copy_from(&Mat::identity(k, k));
    }
    c
}

/// Long-run variance of the columns of `u`.
pub fn long_run_variance(u: &Mat, opts: &LrvOptions) -> Result<LrvEstimate> {
    let (t, k) = (u.nrows(), u.ncols());
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::parse("long-run variance input contains non-finite values"));
    }
    if t <= k {
        return Err(Error::Length(format!("need T > K, got T={t}, K={k}")));
    }
    let mut u = u.clone();
    if opts.center {
        for mut col in u.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
    }
    let spec = opts.kernel;
    let (omega, lambda0, sigma, bw, lags, order, shrunk) = match opts.prewhiten {
        Prewhiten::None | Prewhiten::Var(0) => {
            let (bw, lags) = resolve_bandwidth(&u, &spec)?;
            let (lambda, sigma) = kernel_sums(&u, spec.kind, bw);
            let omega = &lambda + lambda.transpose() - &sigma;
            (omega, lambda, sigma, bw, lags, 0, false)
        }
        Prewhiten::Var(p) => {
            if t <= k * p + k {
                return Err(Error::Length(format!(
                    "prewhitening VAR({p}) needs T > {}, got {t}",
                    k * p + k
                )));
            }
            let (coefs, e, shrunk) = prewhiten_filter(&u, p)?;
            let (bw, lags) = resolve_bandwidth(&e, &spec)?;
            let (lambda_e, sigma_e) = kernel_sums(&e, spec.kind, bw);
            let omega_e = &lambda_e + lambda_e.transpose() - &sigma_e;
            let a_sum = coefs.iter().fold(Mat::zeros(k, k), |acc, a| acc + a);
            let d = linalg::inverse(&(Mat::identity(k, k) - &a_sum), "prewhitening filter I - A(1)")?;
            let sigma = autocovariance(&u, 0);
            let omega = &d * omega_e * d.transpose();
            let lambda = &d * lambda_e * d.transpose() - &sigma * a_sum.transpose() * d.transpose();
            (omega, lambda, sigma, bw, lags, p, shrunk)
        }
    };
    let scale = if opts.dof > 0 {
        if opts.dof >= t {
            return Err(Error::Length(format!(
                "degrees-of-freedom correction {} needs T > {}",
                opts.dof, opts.dof
            )));
        }
        t as f64 / (t - opts.dof) as f64
    } else {
        1.0
    };
    let sigma = linalg::symmetrize(&sigma) * scale;
    let (omega, clamped) = linalg::clamp_psd(&(omega * scale), PSD_TOL);
    let lambda0 = lambda0 * scale;
    // Make Ω = Λ + Λ' − Σ hold exactly after recoloring and clamping.
    let gap = &omega + &sigma - &lambda0 - lambda0.transpose();
    let lambda = lambda0 + gap * 0.5;
    Ok(LrvEstimate {
        omega,
        lambda,
        sigma,
        bandwidth_used: bw,
        lags,
        kernel: spec,
        prewhiten_order: order,
        filter_shrunk: shrunk,
        clamped,
    })
}

/// Scalar convenience wrapper.
pub fn long_run_variance_scalar(x: &[f64], opts: &LrvOptions) -> Result<LrvEstimate> {
    long_run_variance(&Mat::from_column_slice(x.len(), 1, x), opts)
}
