//! KPSS stationarity tests and the ARIMA-equivalence diagnostics that go with
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hac::{self, Bandwidth, KernelSpec, LrvEstimate, LrvOptions};
use crate::linalg::{self, Mat};
use crate::tscore::{difference, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpssSpec {
    /// Stationarity around a constant.
    Level,
    /// Stationarity around a linear trend.
    Trend,
}

impl KpssSpec {
    /// Deterministic terms as printed in result tables.
    pub fn letters(self) -> &'static str {
        match self {
            KpssSpec::Level => "C",
            KpssSpec::Trend => "C, T",
        }
    }
}

impl std::str::FromStr for KpssSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level" => Ok(KpssSpec::Level),
            "trend" => Ok(KpssSpec::Trend),
            other => Err(Error::Config(format!("unknown KPSS spec {other:?} (level|trend)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    RejectStationarity,
    NotRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub spec: KpssSpec,
    pub nobs: usize,
    pub bandwidth_used: f64,
    pub lags: Option<usize>,
    pub lrv: LrvEstimate,
    pub decision_5pct: Decision,
}

impl KpssResult {
    /// Table cell such as `0.1979 (C, T, 3)`: statistic, deterministic terms and
    /// lag (or real bandwidth).
    pub fn table_cell(&self) -> String {
        let bw = match self.lags {
            Some(l) => l.to_string(),
            None => format!("{:.4}", self.bandwidth_used),
        };
        format!("{:.4} ({}, {})", self.statistic, self.spec.letters(), bw)
    }
}

pub const ALPHAS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];
const LEVEL_CRITICAL: [f64; 4] = [0.347, 0.463, 0.574, 0.739];
const TREND_CRITICAL: [f64; 4] = [0.119, 0.146, 0.176, 0.216];

/// Asymptotic upper-tail critical value.
pub fn critical_value(spec: KpssSpec, alpha: f64) -> Result<f64> {
    let i = ALPHAS
        .iter()
        .position(|&a| (a - alpha).abs() < 1e-12)
        .ok_or_else(|| Error::Config(format!("no KPSS critical value for alpha = {alpha}")))?;
    Ok(match spec {
        KpssSpec::Level => LEVEL_CRITICAL[i],
        KpssSpec::Trend => TREND_CRITICAL[i],
    })
}

/// Reject iff the statistic strictly exceeds the critical value.
pub fn kpss_decision(statistic: f64, spec: KpssSpec, alpha: f64) -> Result<Decision> {
    Ok(if statistic > critical_value(spec, alpha)? {
        Decision::RejectStationarity
    } else {
        Decision::NotRejected
    })
}

/// Common default truncation lag `⌊4 (T/100)^{1/4}⌋`.
pub fn default_lag(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Bartlett kernel with the default truncation lag for `t` observations.
pub fn default_kernel(t: usize) -> KernelSpec {
    KernelSpec::bartlett_lags(default_lag(t))
}

pub fn kpss_test(s: &TimeSeries, spec: KpssSpec, kernel: KernelSpec) -> Result<KpssResult> {
    kpss_values(s.values(), spec, kernel)
}

pub fn kpss_values(y: &[f64], spec: KpssSpec, kernel: KernelSpec) -> Result<KpssResult> {
    let t = y.len();
    // Fixed bandwidths work on very short samples; automatic selection enforces
    // its own minimum inside the HAC estimator.
    if t < 3 {
        return Err(Error::Length(format!("KPSS needs at least 3 observations, got {t}")));
    }
    let resid = detrend(y, spec)?;
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    if (rss / t as f64).sqrt() <= 1e-10 * scale {
        return Err(Error::Degenerate(
            "residuals of the detrending regression are identically zero".into(),
        ));
    }
    let mut partial = 0.0;
    let num: f64 = resid
        .iter()
        .map(|e| {
            partial += e;
            partial * partial
        })
        .sum::<f64>()
        / (t as f64).powi(2);
    let lrv = hac::long_run_variance_scalar(&resid, &LrvOptions::new(kernel))?;
    let s2 = lrv.value();
    if !(s2 > 0.0) {
        return Err(Error::Degenerate(format!("long-run variance estimate is {s2}")));
    }
    let statistic = num / s2;
    Ok(KpssResult {
        statistic,
        spec,
        nobs: t,
        bandwidth_used: lrv.bandwidth_used,
        lags: lrv.lags,
        decision_5pct: kpss_decision(statistic, spec, 0.05)?,
        lrv,
    })
}

fn detrend(y: &[f64], spec: KpssSpec) -> Result<Vec<f64>> {
    let t = y.len();
    match spec {
        KpssSpec::Level => {
            let m = y.iter().sum::<f64>() / t as f64;
            Ok(y.iter().map(|v| v - m).collect())
        }
        KpssSpec::Trend => {
            let x = Mat::from_fn(t, 2, |i, j| if j == 0 { 1.0 } else { (i + 1) as f64 });
            let yv = Mat::from_column_slice(t, 1, y);
            let b = linalg::lstsq(&x, &yv)?;
            Ok((yv - x * b).iter().copied().collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integration {
    I0,
    I1,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceProtocol {
    pub levels: KpssResult,
    pub diffs: KpssResult,
    pub order_of_integration: Integration,
}

/// Test levels, then first differences, and classify the order of integration
/// at the 5% level.
pub fn kpss_difference_protocol(
    s: &TimeSeries,
    spec: KpssSpec,
    kernel: KernelSpec,
) -> Result<DifferenceProtocol> {
    let levels = kpss_test(s, spec, kernel)?;
    let diffs = kpss_test(&difference(s, 1)?, spec, kernel)?;
    let order_of_integration = classify(levels.decision_5pct, diffs.decision_5pct);
    Ok(DifferenceProtocol {
        levels,
        diffs,
        order_of_integration,
    })
}

pub fn classify(levels: Decision, diffs: Decision) -> Integration {
    match (levels, diffs) {
        (Decision::NotRejected, _) => Integration::I0,
        (Decision::RejectStationarity, Decision::NotRejected) => Integration::I1,
        (Decision::RejectStationarity, Decision::RejectStationarity) => Integration::Inconclusive,
    }
}

/// Signal-to-noise ratio `λ = −(1+θ)²/θ` implied by the MA(1) coefficient of the
/// differenced series.
pub fn lambda_from_theta(theta: f64) -> Result<f64> {
    if !(-1.0..0.0).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [-1, 0), got {theta}")));
    }
    Ok(-(1.0 + theta).powi(2) / theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArimaEquivalence {
    pub theta: f64,
    pub lambda: f64,
}

/// MA(1) coefficient of the demeaned first difference, found by minimizing the
/// conditional sum of squared one-step prediction errors over `θ ∈ [−1, −1e−4]`.
/// A diagnostic point estimate only.
pub fn arima_equivalence(s: &TimeSeries) -> Result<ArimaEquivalence> {
    let w = difference(s, 1)?;
    let w = w.values();
    if w.len() < 8 {
        return Err(Error::Length("MA(1) diagnostic needs at least 9 observations".into()));
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let css = |theta: f64| {
        let mut prev = 0.0;
        w.iter()
            .map(|v| {
                let e = v - mean - theta * prev;
                prev = e;
                e * e
            })
            .sum::<f64>()
    };
    let theta = golden_section(css, -1.0, -1e-4, 1e-10);
    Ok(ArimaEquivalence {
        theta,
        lambda: lambda_from_theta(theta)?,
    })
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    // Endpoints are admissible and the optimum is often on the boundary.
    [a, mid, b]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}

/// Render rows of `(name, levels, first difference)` results as CSV.
pub fn kpss_table_csv(rows: &[(String, Option<KpssResult>, Option<KpssResult>)]) -> String {
    let mut out = String::from("variable,level,first_difference,hac_variance_level,hac_variance_difference\n");
    let cell = |r: &Option<KpssResult>| r.as_ref().map_or("n/a".to_string(), |r| format!("\"{}\"", r.table_cell()));
    let var = |r: &Option<KpssResult>| r.as_ref().map_or("n/a".to_string(), |r| format!("{:.6}", r.lrv.value()));
    for (name, lv, df) in rows {
        out.push_str(&format!("{name},{},{},{},{}\n", cell(lv), cell(df), var(lv), var(df)));
    }
    out
}

/// Parse a CLI bandwidth argument: `auto`, an integer lag count, or a real bandwidth.
pub fn parse_bandwidth(s: &str) -> Result<Bandwidth> {
    if s == "auto" {
        return Ok(Bandwidth::NeweyWestAuto);
    }
    if let Ok(l) = s.parse::<usize>() {
        return Ok(Bandwidth::Lags(l));
    }
    match s.parse::<f64>() {
        Ok(bw) if bw.is_finite() && bw >= 0.0 => Ok(Bandwidth::Fixed(bw)),
        _ => Err(Error::Config(format!("invalid bandwidth {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hac::KernelKind;
    use crate::sim;
    use proptest::prelude::*;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::from_values("y", v).unwrap()
    }

    #[test]
    fn hand_oracle_five_points() {
        let r = kpss_values(&[1.0, 2.0, 3.0, 4.0, 5.0], KpssSpec::Level, KernelSpec::bartlett_lags(0)).unwrap();
        assert!((r.statistic - 0.52).abs() < 1e-12);
        assert!((r.lrv.value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_trend_is_degenerate() {
        let y: Vec<f64> = (0..20).map(|i| 3.0 + 0.5 * i as f64).collect();
        let r = kpss_values(&y, KpssSpec::Trend, KernelSpec::bartlett_lags(2));
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn decisions_follow_tables() {
        assert_eq!(kpss_decision(0.50, KpssSpec::Level, 0.05).unwrap(), Decision::RejectStationarity);
        assert_eq!(kpss_decision(0.146, KpssSpec::Trend, 0.05).unwrap(), Decision::NotRejected);
        assert_eq!(kpss_decision(0.5639, KpssSpec::Level, 0.05).unwrap(), Decision::RejectStationarity);
        assert_eq!(kpss_decision(0.1979, KpssSpec::Trend, 0.05).unwrap(), Decision::RejectStationarity);
        assert!(matches!(kpss_decision(0.3, KpssSpec::Level, 0.2), Err(Error::Config(_))));
        assert_eq!(critical_value(KpssSpec::Trend, 0.01).unwrap(), 0.216);
    }

    #[test]
    fn lambda_theta_relation() {
        assert_eq!(lambda_from_theta(-1.0).unwrap(), 0.0);
        assert!((lambda_from_theta(-0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(lambda_from_theta(0.0), Err(Error::Domain(_))));
        assert!(matches!(lambda_from_theta(-1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn overdifferenced_noise_has_theta_near_minus_one() {
        let e = sim::normals(&mut sim::rng(4), 400);
        let a = arima_equivalence(&ts(e)).unwrap();
        assert!(a.theta < -0.9, "{}", a.theta);
        assert!(a.lambda < 0.02);
    }

    #[test]
    fn random_walk_plus_noise_theta_matches_signal_ratio() {
        // y = random walk (var 1) + noise (var 1): λ = 1 gives θ = (−3 + √5)/2.
        let mut r = sim::rng(8);
        let rw = sim::random_walk(&mut r, 5000);
        let noise = sim::normals(&mut r, 5000);
        let y: Vec<f64> = rw.iter().zip(&noise).map(|(a, b)| a + b).collect();
        let a = arima_equivalence(&ts(y)).unwrap();
        assert!((a.theta - (-3.0 + 5f64.sqrt()) / 2.0).abs() < 0.05, "{}", a.theta);
    }

    #[test]
    fn statistic_decreases_with_bandwidth_on_persistent_data() {
        let y = sim::ar1(&mut sim::rng(21), 200, 0.8, 50);
        let mut prev = f64::INFINITY;
        for l in 0..10 {
            let s = kpss_values(&y, KpssSpec::Level, KernelSpec::bartlett_lags(l)).unwrap().statistic;
            assert!(s <= prev + 1e-12);
            prev = s;
        }
    }

    #[test]
    fn difference_protocol_classifies_random_walks_and_noise() {
        // Both designs have serially uncorrelated innovations, so a short
        // truncation lag is the appropriate choice.
        let k = KernelSpec::bartlett_lags(1);
        let mut i1 = 0;
        let mut i0 = 0;
        for seed in 0..100 {
            let mut r = sim::rng(seed);
            let rw = ts(sim::random_walk(&mut r, 200));
            if kpss_difference_protocol(&rw, KpssSpec::Level, k).unwrap().order_of_integration == Integration::I1 {
                i1 += 1;
            }
            let wn = ts(sim::normals(&mut r, 200));
            if kpss_difference_protocol(&wn, KpssSpec::Level, k).unwrap().order_of_integration == Integration::I0 {
                i0 += 1;
            }
        }
        assert!(i1 >= 90, "I1 in {i1} of 100");
        assert!(i0 >= 90, "I0 in {i0} of 100");
    }

    #[test]
    fn classification_rule() {
        use Decision::*;
        assert_eq!(classify(RejectStationarity, RejectStationarity), Integration::Inconclusive);
        assert_eq!(classify(NotRejected, RejectStationarity), Integration::I0);
    }

    #[test]
    fn table_cell_layout() {
        let y = sim::ar1(&mut sim::rng(1), 50, 0.5, 10);
        let r = kpss_values(&y, KpssSpec::Trend, KernelSpec::bartlett_lags(3)).unwrap();
        assert!(r.table_cell().ends_with("(C, T, 3)"));
        let q = kpss_values(&y, KpssSpec::Level, KernelSpec::new(KernelKind::QuadraticSpectral, Bandwidth::Fixed(4.6)).unwrap()).unwrap();
        assert!(q.table_cell().ends_with("(C, 4.6000)"));
    }

    #[test]
    fn bandwidth_argument_parsing() {
        assert_eq!(parse_bandwidth("auto").unwrap(), Bandwidth::NeweyWestAuto);
        assert_eq!(parse_bandwidth("3").unwrap(), Bandwidth::Lags(3));
        assert_eq!(parse_bandwidth("4.6").unwrap(), Bandwidth::Fixed(4.6));
        assert!(parse_bandwidth("-1").is_err());
    }

    proptest! {
        #[test]
        fn affine_invariance(seed in 0u64..1000, a in -50.0f64..50.0, b in prop_oneof![-20.0f64..-0.1, 0.1f64..20.0]) {
            let y = sim::ar1(&mut sim::rng(seed), 60, 0.4, 10);
            let z: Vec<f64> = y.iter().map(|v| a + b * v).collect();
            for spec in [KpssSpec::Level, KpssSpec::Trend] {
                let k = KernelSpec::bartlett_lags(3);
                let s1 = kpss_values(&y, spec, k).unwrap().statistic;
                let s2 = kpss_values(&z, spec, k).unwrap().statistic;
                prop_assert!((s1 - s2).abs() < 1e-9 * s1.max(1.0));
            }
        }
    }
}
