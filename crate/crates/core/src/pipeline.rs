//! Config-driven end-to-end runner: descriptive statistics, transforms,
//! additive-outlier linearization, KPSS, cointegration, VAR, SVAR and dynamics,
//! with report and artifact emission. Also hosts the synthetic data generators.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coint::{self, CcrFit, CcrSpec, CointTestResult, Deterministic};
use crate::dynamics::{self, BandKind, FevdTable, ImpulseSet};
use crate::error::{Error, Result};
use crate::hac::{KernelSpec, Prewhiten};
use crate::linalg::{self, Mat};
use crate::reference;
use crate::sim;
use crate::svar::{self, BootstrapResult, IdentificationCheck, RestrictionPattern, SvarFit, SvarOptions};
use crate::tscore::{self, CorrelationTable, Dataset, StatsSummary, TimeSeries};
use crate::unitroot::{self, DifferenceProtocol, Integration, KpssSpec};
use crate::varkit::{self, DiagnosticsReport, LagSelection, TestStat, VarFit};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "STRUCTVAR_OUTPUT_DIR";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    None,
    Log,
    #[default]
    Diff,
    Logdiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    pub index_column: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    /// Name used downstream (VAR equations, responses).
    pub name: String,
    /// Source column in the input; defaults to `name`.
    #[serde(default)]
    pub column: Option<String>,
    #[serde(default)]
    pub transform: Transform,
}

impl VariableSpec {
    pub fn source(&self) -> &str {
        self.column.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpssConfig {
    #[serde(default = "default_kpss_specs")]
    pub specs: Vec<KpssSpec>,
    /// Kernel for the long-run variance; defaults to Bartlett with the
    /// `⌊4(T/100)^{1/4}⌋` truncation lag.
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
}

fn default_kpss_specs() -> Vec<KpssSpec> {
    vec![KpssSpec::Level, KpssSpec::Trend]
}

impl Default for KpssConfig {
    fn default() -> Self {
        KpssConfig {
            specs: default_kpss_specs(),
            kernel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcrConfig {
    /// Dependent input column (levels).
    pub y: String,
    pub x: Vec<String>,
    #[serde(default = "default_deterministic")]
    pub deterministic: Deterministic,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub prewhiten: Option<Prewhiten>,
    /// Superfluous trend powers for the variable-addition test.
    #[serde(default)]
    pub park_powers: Option<Vec<u32>>,
}

fn default_deterministic() -> Deterministic {
    Deterministic::Const
}

impl CcrConfig {
    pub fn spec(&self) -> CcrSpec {
        let mut spec = CcrSpec::new(self.y.clone(), self.x.clone(), self.deterministic);
        if let Some(k) = self.kernel {
            spec.kernel = k;
        }
        if let Some(p) = self.prewhiten {
            spec.prewhiten = p;
        }
        spec
    }

    pub fn park_powers(&self) -> Vec<u32> {
        self.park_powers.clone().unwrap_or_else(|| {
            let d = self.deterministic.degree();
            vec![d + 1, d + 2]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
    Hq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarConfig {
    /// Fixed lag order; `null` selects it by `criterion` over `1..=p_max`.
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default)]
    pub criterion: Criterion,
    #[serde(default = "default_portmanteau_lags")]
    pub portmanteau_lags: usize,
}

fn default_p_max() -> usize {
    4
}

fn default_portmanteau_lags() -> usize {
    8
}

impl Default for VarConfig {
    fn default() -> Self {
        VarConfig {
            p: None,
            p_max: default_p_max(),
            criterion: Criterion::Aic,
            portmanteau_lags: default_portmanteau_lags(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvarConfig {
    /// Restriction grid for A, one string of tokens per row (`*` marks a free cell).
    pub a: Vec<String>,
    pub b: Vec<String>,
    #[serde(default)]
    pub shocks: Option<Vec<String>>,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_starts() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Impulse-response horizon.
    #[serde(default = "default_h")]
    pub h: usize,
    /// Variance-decomposition horizon (number of summed terms).
    #[serde(default = "default_fevd_h")]
    pub fevd_horizon: usize,
    /// Bootstrap replications; 0 disables standard errors and bands.
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_multiplier")]
    pub multiplier: f64,
    #[serde(default = "default_band_kind")]
    pub bands: BandKind,
}

fn default_h() -> usize {
    20
}
fn default_fevd_h() -> usize {
    10
}
fn default_reps() -> usize {
    500
}
fn default_multiplier() -> f64 {
    2.0
}
fn default_band_kind() -> BandKind {
    BandKind::StdDev
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            h: default_h(),
            fevd_horizon: default_fevd_h(),
            reps: default_reps(),
            seed: 0,
            multiplier: default_multiplier(),
            bands: default_band_kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutlierConfig {
    #[default]
    Off,
    Additive { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputSpec,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub kpss: KpssConfig,
    #[serde(default)]
    pub ccr: Option<CcrConfig>,
    #[serde(default)]
    pub var: VarConfig,
    pub svar: SvarConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub outliers: OutlierConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; a relative input path is resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if cfg.input.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.input.path = dir.join(&cfg.input.path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.variables.len();
        if k == 0 {
            return Err(Error::Config("no variables configured".into()));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|o| o.name == v.name) {
                return Err(Error::Config(format!("variable {} listed twice", v.name)));
            }
        }
        if self.kpss.specs.is_empty() {
            return Err(Error::Config("kpss.specs must not be empty".into()));
        }
        if let Some(ccr) = &self.ccr {
            if ccr.x.is_empty() {
                return Err(Error::Config("ccr.x must list at least one regressor".into()));
            }
        }
        match self.var.p {
            Some(0) => return Err(Error::Config("var.p must be at least 1".into())),
            None if self.var.p_max == 0 => return Err(Error::Config("var.p_max must be at least 1".into())),
            _ => {}
        }
        if self.var.portmanteau_lags <= self.var.p.unwrap_or(self.var.p_max) {
            return Err(Error::Config("var.portmanteau_lags must exceed the lag order".into()));
        }
        let pattern = self.pattern()?;
        if pattern.k != k {
            return Err(Error::Config(format!(
                "restriction grids are {}×{} but {} variables are configured",
                pattern.k, pattern.k, k
            )));
        }
        if let Some(s) = &self.svar.shocks {
            if s.len() != k {
                return Err(Error::Config(format!("{} shock names for {k} variables", s.len())));
            }
        }
        let d = &self.dynamics;
        if d.fevd_horizon == 0 {
            return Err(Error::Config("dynamics.fevd_horizon must be at least 1".into()));
        }
        if d.reps != 0 && d.reps < 100 {
            return Err(Error::Config("dynamics.reps must be 0 or at least 100".into()));
        }
        if !(d.multiplier.is_finite() && d.multiplier >= 0.0) {
            return Err(Error::Config("dynamics.multiplier must be finite and >= 0".into()));
        }
        if let OutlierConfig::Additive { threshold } = self.outliers {
            if !(threshold.is_finite() && threshold > 0.0) {
                return Err(Error::Config("outlier threshold must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn pattern(&self) -> Result<RestrictionPattern> {
        RestrictionPattern::parse(&self.svar.a, &self.svar.b)
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }
}

// ---------------------------------------------------------------------------
// Outliers
// ---------------------------------------------------------------------------

pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 3.5;
const MAX_OUTLIER_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct OutlierResult {
    #[serde(skip)]
    pub linearized: TimeSeries,
    pub name: String,
    pub dummy_dates: Vec<i64>,
    /// Original values at the flagged dates.
    pub original: Vec<f64>,
    pub replaced_by: Vec<f64>,
}

fn ar1_fit(y: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    if y.iter().all(|v| (v - mean).abs() <= 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::Degenerate("constant series has no autoregression".into()));
    }
    let x = Mat::from_fn(n - 1, 2, |i, j| if j == 0 { 1.0 } else { y[i] });
    let yv = Mat::from_column_slice(n - 1, 1, &y[1..]);
    let b = linalg::lstsq(&x, &yv).map_err(|e| Error::Degenerate(format!("AR(1) fit failed: {e}")))?;
    let (c, phi) = (b[(0, 0)], b[(1, 0)]);
    let e = (1..n).map(|t| y[t] - c - phi * y[t - 1]).collect();
    Ok((c, phi, e))
}

/// z-score of `e[i]` against the mean and standard deviation of the other
/// residuals that are themselves within the robust threshold.
fn reweighted_z(e: &[f64], robust: &[f64], i: usize, threshold: f64) -> f64 {
    let inliers: Vec<f64> = (0..e.len()).filter(|&j| j != i && robust[j] <= threshold).map(|j| e[j]).collect();
    let n = inliers.len() as f64;
    if n < 3.0 {
        return f64::INFINITY;
    }
    let mean = inliers.iter().sum::<f64>() / n;
    let sd = (inliers.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    ((e[i] - mean) / sd).abs()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Flag additive outliers as AR(1) residuals whose robust z-score
/// (median/MAD) exceeds `threshold`, one at a time from the largest, replacing
/// each by its one-step AR(1) prediction and refitting before the next search.
/// A candidate is confirmed only if it also exceeds the threshold against the
/// mean and standard deviation of the remaining inlying residuals, which
/// removes most false alarms caused by sampling noise in the MAD.
pub fn detect_outliers(s: &TimeSeries, threshold: f64) -> Result<OutlierResult> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Config(format!("outlier threshold must be positive, got {threshold}")));
    }
    let n = s.len();
    if n < 12 {
        return Err(Error::Length(format!("outlier detection needs at least 12 observations, got {n}")));
    }
    let mut y = s.values().to_vec();
    let mut flagged: Vec<usize> = Vec::new();
    let mut original = Vec::new();
    let mut replaced = Vec::new();
    let limit = (MAX_OUTLIER_SHARE * n as f64).floor() as usize;
    loop {
        let (c, phi, e) = ar1_fit(&y)?;
        let med = median(&mut e.clone());
        let mut dev: Vec<f64> = e.iter().map(|v| (v - med).abs()).collect();
        let scale = 1.482_6 * median(&mut dev);
        if !(scale > 0.0) {
            return Err(Error::Degenerate("AR(1) residuals have zero robust scale".into()));
        }
        let robust: Vec<f64> = e.iter().map(|v| ((v - med) / scale).abs()).collect();
        let (idx, z) = robust
            .iter()
            .enumerate()
            .map(|(i, z)| (i + 1, *z))
            .filter(|(t, _)| !flagged.contains(t))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("series has residuals");
        if z <= threshold || reweighted_z(&e, &robust, idx - 1, threshold) <= threshold {
            break;
        }
        if flagged.len() + 1 > limit {
            return Err(Error::Outlier(format!(
                "more than {:.0}% of the {n} observations of {} would be flagged",
                100.0 * MAX_OUTLIER_SHARE,
                s.name()
            )));
        }
        let fill = c + phi * y[idx - 1];
        flagged.push(idx);
        original.push(y[idx]);
        replaced.push(fill);
        y[idx] = fill;
    }
    let mut order: Vec<usize> = (0..flagged.len()).collect();
    order.sort_by_key(|&i| flagged[i]);
    let index = s.index();
    Ok(OutlierResult {
        linearized: TimeSeries::new(s.name(), index.to_vec(), y)?,
        name: s.name().to_string(),
        dummy_dates: order.iter().map(|&i| index[flagged[i]]).collect(),
        original: order.iter().map(|&i| original[i]).collect(),
        replaced_by: order.iter().map(|&i| replaced[i]).collect(),
    })
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dgp {
    /// Three-variable recursive system with a fixed stable VAR(1).
    Recursive,
    /// The estimated four-variable structural system with `A₁ = Φ₁Φ₀⁻¹`.
    PaperSystem11,
    /// User-supplied `A`, `B` and `A₁`, given as rows.
    Custom {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        a1: Vec<Vec<f64>>,
        #[serde(default)]
        names: Option<Vec<String>>,
    },
}

impl std::str::FromStr for Dgp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive" => Ok(Dgp::Recursive),
            "paper_system11" => Ok(Dgp::PaperSystem11),
            other => Err(Error::Config(format!(
                "unknown DGP {other:?} (recursive|paper_system11; custom systems are read from JSON)"
            ))),
        }
    }
}

pub const SYNTH_BURN: usize = 200;

/// Structural matrices `(A, B, A₁)` and variable names of a DGP.
pub fn dgp_system(dgp: &Dgp) -> Result<(Mat, Mat, Mat, Vec<String>)> {
    match dgp {
        Dgp::Recursive => Ok((
            Mat::identity(3, 3),
            Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 1.0, 0.0, -0.3, 0.4, 1.0]),
            Mat::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.2, 0.4, -0.1, 0.0, 0.1, 0.3]),
            vec!["y1".into(), "y2".into(), "y3".into()],
        )),
        Dgp::PaperSystem11 => Ok((
            reference::structural_a(),
            reference::structural_b(),
            reference::var_coefficient(),
            reference::VARIABLES.iter().map(|v| format!("d{v}")).collect(),
        )),
        Dgp::Custom { a, b, a1, names } => {
            let (a, b, a1) = (checked_square(a, "a")?, checked_square(b, "b")?, checked_square(a1, "a1")?);
            let k = a.nrows();
            if b.nrows() != k || a1.nrows() != k {
                return Err(Error::Config("custom DGP matrices must share one dimension".into()));
            }
            let names = match names {
                Some(n) if n.len() == k => n.clone(),
                Some(n) => return Err(Error::Config(format!("{} names for {k} variables", n.len()))),
                None => (1..=k).map(|i| format!("y{i}")).collect(),
            };
            Ok((a, b, a1, names))
        }
    }
}

fn checked_square(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Config(format!("custom DGP matrix {what} must be square and non-empty")));
    }
    Ok(linalg::from_rows(rows))
}

/// Simulate `Y_t = A₁Y_{t−1} + A⁻¹Bu_t` with standard-normal shocks after a
/// 200-period burn-in; the index runs `1..=t`.
pub fn synth_generate(dgp: &Dgp, t: usize, seed: u64) -> Result<Dataset> {
    if t < 50 {
        return Err(Error::Config(format!("synthetic sample needs T >= 50, got {t}")));
    }
    let (a, b, a1, names) = dgp_system(dgp)?;
    let mut rng = sim::rng(seed);
    let y = svar::simulate_structural(&[a1], &a, &b, t, SYNTH_BURN, &mut rng)?;
    Dataset::from_matrix(&names, &y, 1)
}

/// Cumulate each column from zero, renaming `dX` to `X`, to obtain levels whose
/// first differences are the simulated series.
pub fn integrate(ds: &Dataset) -> Result<Dataset> {
    let first = ds.index()[0];
    let mut index = vec![first - 1];
    index.extend_from_slice(ds.index());
    let cols = ds
        .columns()
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            let mut v = vec![0.0];
            v.extend(c.values().iter().map(|x| {
                acc += x;
                acc
            }));
            let name = c.name().strip_prefix('d').filter(|s| !s.is_empty()).unwrap_or(c.name());
            TimeSeries::new(name, index.clone(), v)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(cols)
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescribeArtifact {
    pub stats: Vec<(String, StatsSummary)>,
    pub correlations: CorrelationTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct KpssRow {
    pub variable: String,
    pub spec: KpssSpec,
    pub protocol: DifferenceProtocol,
}

#[derive(Debug, Clone, Serialize)]
pub struct CointArtifact {
    pub fit: CcrFit,
    pub equation: String,
    pub tests: Vec<CointTestResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarArtifact {
    pub fit: VarFit,
    #[serde(with = "linalg::serde_rows")]
    pub residual_correlation: Mat,
    pub diagnostics: DiagnosticsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SvarArtifact {
    pub identification: IdentificationCheck,
    pub fit: SvarFit,
    pub listing: String,
    pub overid_lr: TestStat,
    pub bootstrap: Option<BootstrapResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub config: PipelineConfig,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    pub describe: Option<DescribeArtifact>,
    pub sample: Option<(i64, i64)>,
    pub outliers: Option<Vec<OutlierResult>>,
    pub kpss: Option<Vec<KpssRow>>,
    pub cointegration: Option<CointArtifact>,
    pub lag_selection: Option<LagSelection>,
    pub var: Option<VarArtifact>,
    pub svar: Option<SvarArtifact>,
    pub impulse_responses: Option<ImpulseSet>,
    #[serde(with = "opt_rows")]
    pub long_run_impact: Option<Mat>,
    pub fevd: Option<FevdTable>,
    /// Wall-clock stage durations; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

mod opt_rows {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(m: &Option<Mat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(linalg::to_rows).serialize(s)
    }
}

impl RunReport {
    pub fn failed(&self) -> bool {
        self.stages.iter().any(|s| s.status == StageStatus::Failed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct Runner {
    report: RunReport,
    halted: Option<String>,
}

impl Runner {
    /// Run a stage unless an earlier hard failure halted the run. Soft stages
    /// record their failure without halting.
    fn stage<T>(&mut self, name: &str, soft: bool, f: impl FnOnce(&mut RunReport) -> Result<T>) -> Option<T> {
        if let Some(prev) = &self.halted {
            self.report.stages.push(StageRecord {
                stage: name.into(),
                status: StageStatus::Skipped,
                reason: Some(format!("stage {prev} failed")),
                error_kind: None,
            });
            return None;
        }
        let start = Instant::now();
        let out = f(&mut self.report);
        self.report.timings.push(StageTiming {
            stage: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        match out {
            Ok(v) => {
                self.report.stages.push(StageRecord {
                    stage: name.into(),
                    status: StageStatus::Ok,
                    reason: None,
                    error_kind: None,
                });
                Some(v)
            }
            Err(e) => {
                self.report.stages.push(StageRecord {
                    stage: name.into(),
                    status: StageStatus::Failed,
                    reason: Some(e.to_string()),
                    error_kind: Some(e.kind().into()),
                });
                if !soft {
                    self.halted = Some(name.into());
                }
                None
            }
        }
    }

    fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.report.stages.push(StageRecord {
            stage: name.into(),
            status: StageStatus::Skipped,
            reason: Some(reason.into()),
            error_kind: None,
        });
    }
}

fn apply_transform(s: &TimeSeries, t: Transform, name: &str) -> Result<TimeSeries> {
    let log = |s: &TimeSeries| -> Result<TimeSeries> {
        if let Some(v) = s.values().iter().find(|v| **v <= 0.0) {
            return Err(Error::Domain(format!("log transform of {} hits non-positive value {v}", s.name())));
        }
        s.map_values(f64::ln)
    };
    let out = match t {
        Transform::None => s.clone(),
        Transform::Log => log(s)?,
        Transform::Diff => tscore::difference(s, 1)?,
        Transform::Logdiff => tscore::difference(&log(s)?, 1)?,
    };
    Ok(out.with_name(name))
}

/// Trim every series to the periods they all share.
fn align(series: Vec<TimeSeries>) -> Result<Dataset> {
    let start = series.iter().map(|s| s.index()[0]).max().unwrap_or(0);
    let end = series.iter().map(|s| *s.index().last().unwrap_or(&0)).min().unwrap_or(0);
    let cols = series
        .into_iter()
        .map(|s| {
            let keep: Vec<usize> = (0..s.len()).filter(|&i| s.index()[i] >= start && s.index()[i] <= end).collect();
            TimeSeries::new(
                s.name(),
                keep.iter().map(|&i| s.index()[i]).collect(),
                keep.iter().map(|&i| s.values()[i]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(cols)
}

/// Execute every stage on an already loaded input dataset.
pub fn run_on_dataset(config: &PipelineConfig, input: &Dataset) -> RunReport {
    let mut run = Runner {
        report: RunReport {
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            stages: Vec::new(),
            warnings: Vec::new(),
            describe: None,
            sample: None,
            outliers: None,
            kpss: None,
            cointegration: None,
            lag_selection: None,
            var: None,
            svar: None,
            impulse_responses: None,
            long_run_impact: None,
            fevd: None,
            timings: Vec::new(),
        },
        halted: None,
    };
    let names = config.variable_names();
    let sources: Vec<String> = config.variables.iter().map(|v| v.source().to_string()).collect();

    run.stage("describe", false, |r| {
        let raw = input.select(&sources)?;
        let stats = raw
            .columns()
            .iter()
            .map(|c| Ok((c.name().to_string(), tscore::describe(c)?)))
            .collect::<Result<Vec<_>>>()?;
        r.describe = Some(DescribeArtifact {
            stats,
            correlations: tscore::correlation_table(&raw)?,
        });
        Ok(())
    });

    let transformed = run.stage("transforms", false, |r| {
        let series = config
            .variables
            .iter()
            .map(|v| apply_transform(input.column(v.source())?, v.transform, &v.name))
            .collect::<Result<Vec<_>>>()?;
        let ds = align(series)?;
        r.sample = Some((ds.index()[0], *ds.index().last().expect("non-empty")));
        Ok(ds)
    });

    let model_data = match config.outliers {
        OutlierConfig::Off => {
            run.skip("outliers", "outlier linearization is off");
            transformed
        }
        OutlierConfig::Additive { threshold } => run
            .stage("outliers", false, |r| {
                let ds = transformed.as_ref().ok_or_else(|| Error::Config("no transformed data".into()))?;
                let results = ds
                    .columns()
                    .iter()
                    .map(|c| detect_outliers(c, threshold))
                    .collect::<Result<Vec<_>>>()?;
                let cleaned = Dataset::new(results.iter().map(|o| o.linearized.clone()).collect())?;
                r.outliers = Some(results);
                Ok(cleaned)
            }),
    };

    run.stage("kpss", false, |r| {
        let mut rows = Vec::new();
        for (v, src) in config.variables.iter().zip(&sources) {
            let s = input.column(src)?;
            for &spec in &config.kpss.specs {
                let kernel = config.kpss.kernel.unwrap_or_else(|| unitroot::default_kernel(s.len()));
                let protocol = unitroot::kpss_difference_protocol(s, spec, kernel)?;
                let differenced = matches!(v.transform, Transform::Diff | Transform::Logdiff);
                match (protocol.order_of_integration, differenced) {
                    (Integration::I0, true) => r.warnings.push(format!(
                        "{src}: KPSS ({}) does not reject stationarity in levels, yet the configuration differences it",
                        spec.letters()
                    )),
                    (Integration::I1, false) | (Integration::Inconclusive, false) => r.warnings.push(format!(
                        "{src}: KPSS ({}) rejects stationarity in levels, yet the configuration models it undifferenced",
                        spec.letters()
                    )),
                    _ => {}
                }
                rows.push(KpssRow {
                    variable: src.clone(),
                    spec,
                    protocol,
                });
            }
        }
        r.kpss = Some(rows);
        Ok(())
    });

    match &config.ccr {
        None => run.skip("cointegration", "no cointegrating regression configured"),
        Some(ccr) => {
            run.stage("cointegration", false, |r| {
                let spec = ccr.spec();
                let fit = coint::ccr_fit(input, &spec)?;
                let tests = vec![
                    coint::hansen_lc_test(&fit)?,
                    coint::park_variable_addition_test(input, &spec, &ccr.park_powers())?,
                    coint::engle_granger_test(input, &spec)?,
                    coint::phillips_ouliaris_test(input, &spec)?,
                ];
                let keep = tests[..2].iter().all(|t| t.pvalue > 0.05);
                let reject_none = tests[2..].iter().all(|t| t.pvalue < 0.05);
                if keep != reject_none {
                    r.warnings.push(
                        "cointegration tests with opposite null hypotheses disagree at the 5% level".into(),
                    );
                }
                r.cointegration = Some(CointArtifact {
                    equation: fit.report_line(),
                    fit,
                    tests,
                });
                Ok(())
            });
        }
    }

    let p = match config.var.p {
        Some(p) => {
            run.skip("lag_selection", format!("lag order fixed at {p}"));
            Some(p)
        }
        None => run.stage("lag_selection", false, |r| {
            let ds = model_data.as_ref().ok_or_else(|| Error::Config("no model data".into()))?;
            let sel = varkit::select_lag(ds, config.var.p_max)?;
            let p = match config.var.criterion {
                Criterion::Aic => sel.aic,
                Criterion::Bic => sel.bic,
                Criterion::Hq => sel.hq,
            }
            .max(1);
            r.lag_selection = Some(sel);
            Ok(p)
        }),
    };

    let var = run.stage("var", false, |r| {
        let ds = model_data.as_ref().ok_or_else(|| Error::Config("no model data".into()))?;
        let p = p.ok_or_else(|| Error::Config("no lag order".into()))?;
        let fit = varkit::var_fit(&ds.select(&names)?, p)?;
        let diagnostics = varkit::diagnostics(&fit, config.var.portmanteau_lags)?;
        if !diagnostics.stability.is_stable {
            r.warnings.push(format!(
                "VAR is not stable: largest companion modulus {:.4}",
                diagnostics.stability.moduli[0]
            ));
        }
        r.var = Some(VarArtifact {
            residual_correlation: fit.residual_correlation(),
            fit: fit.clone(),
            diagnostics,
        });
        Ok(fit)
    });

    let svar_fit = run.stage("svar", false, |r| {
        let var = var.as_ref().ok_or_else(|| Error::Config("no VAR fit".into()))?;
        let pattern = config.pattern()?;
        let identification = svar::check_identification(&pattern);
        let opts = SvarOptions {
            starts: config.svar.starts,
            seed: config.svar.seed,
            ..SvarOptions::default()
        };
        let mut fit = svar::svar_ml_fit_with(var, &pattern, &opts)?;
        if let Some(shocks) = &config.svar.shocks {
            fit = fit.with_shock_names(shocks.clone())?;
        }
        let overid_lr = svar::overid_lr_test(&fit, var)?;
        let bootstrap = if config.dynamics.reps > 0 {
            let boot = svar::bootstrap_se(&fit, var, config.dynamics.reps, config.dynamics.seed)?;
            fit.attach_bootstrap(&boot);
            Some(boot)
        } else {
            None
        };
        r.svar = Some(SvarArtifact {
            identification,
            listing: fit.system_listing(),
            fit: fit.clone(),
            overid_lr,
            bootstrap: bootstrap.clone(),
        });
        Ok((fit, bootstrap))
    });

    run.stage("impulse_responses", false, |r| {
        let var = var.as_ref().ok_or_else(|| Error::Config("no VAR fit".into()))?;
        let (fit, boot) = svar_fit.as_ref().ok_or_else(|| Error::Config("no SVAR fit".into()))?;
        let mut set = dynamics::impulse_responses(fit, var, config.dynamics.h);
        if let Some(b) = boot {
            set = dynamics::bands_from_bootstrap(set, b, config.dynamics.multiplier, config.dynamics.bands);
        }
        r.impulse_responses = Some(set);
        Ok(())
    });
    run.stage("long_run_impact", true, |r| {
        let var = var.as_ref().ok_or_else(|| Error::Config("no VAR fit".into()))?;
        let (fit, _) = svar_fit.as_ref().ok_or_else(|| Error::Config("no SVAR fit".into()))?;
        r.long_run_impact = Some(dynamics::long_run_impact(fit, var)?);
        Ok(())
    });
    run.stage("fevd", false, |r| {
        let var = var.as_ref().ok_or_else(|| Error::Config("no VAR fit".into()))?;
        let (fit, _) = svar_fit.as_ref().ok_or_else(|| Error::Config("no SVAR fit".into()))?;
        r.fevd = Some(dynamics::fevd(fit, var, config.dynamics.fevd_horizon)?);
        Ok(())
    });
    run.report
}

/// Load the configured input and run every stage. Input loading problems are
/// configuration errors; stage failures are recorded in the report.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    let input = tscore::load_csv(&config.input.path, &config.input.index_column).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read input {}: {io}", config.input.path.display())),
        other => other,
    })?;
    for v in &config.variables {
        input.column(v.source())?;
    }
    if let Some(ccr) = &config.ccr {
        for c in std::iter::once(&ccr.y).chain(&ccr.x) {
            input.column(c)?;
        }
    }
    Ok(run_on_dataset(config, &input))
}

/// Output directory: the environment override if set, else the configured one.
pub fn output_dir(config: &PipelineConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => config.output_dir.clone(),
    }
}

fn matrix_csv(rows: &[String], cols: &[String], m: &Mat) -> String {
    let mut out = format!(",{}\n", cols.join(","));
    for (i, r) in rows.iter().enumerate() {
        out.push_str(r);
        for j in 0..m.ncols() {
            out.push_str(&format!(",{:.8e}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

fn test_row(name: &str, t: &TestStat) -> String {
    format!(
        "{name},{:.6},{},{:.6}\n",
        t.statistic,
        match t.df2 {
            Some(d2) => format!("{}/{}", t.df, d2),
            None => t.df.to_string(),
        },
        t.pvalue
    )
}

/// Write `report.json`, `timings.json`, `tables/*.csv` and `plots/*.svg` under `dir`.
pub fn emit_artifacts(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let tables = dir.join("tables");
    let plots = dir.join("plots");
    std::fs::create_dir_all(&tables)?;
    std::fs::create_dir_all(&plots)?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<()> {
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("report.json"), report.to_json()?)?;
    put(dir.join("timings.json"), serde_json::to_string_pretty(&report.timings)?)?;
    if let Some(d) = &report.describe {
        put(tables.join("descriptive.csv"), tscore::stats_table_csv(&d.stats))?;
        put(tables.join("correlations.csv"), d.correlations.to_csv())?;
    }
    if let Some(rows) = &report.kpss {
        let mut out = String::from("variable,spec,level_stat,level_bandwidth,diff_stat,diff_bandwidth,order\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.4},{:.6},{:.4},{:?}\n",
                r.variable,
                r.spec.letters().replace(", ", "+"),
                r.protocol.levels.statistic,
                r.protocol.levels.bandwidth_used,
                r.protocol.diffs.statistic,
                r.protocol.diffs.bandwidth_used,
                r.protocol.order_of_integration
            ));
        }
        put(tables.join("kpss.csv"), out)?;
    }
    if let Some(c) = &report.cointegration {
        let mut out = String::from("term,coefficient,std_error,pvalue\n");
        let labels = c.fit.x_names.iter().map(String::as_str).chain(c.fit.deterministic.labels().iter().copied());
        let coefs = c.fit.beta.iter().chain(c.fit.gamma1.iter());
        for ((l, b), (se, p)) in labels.zip(coefs).zip(c.fit.se.iter().zip(&c.fit.pvalues)) {
            out.push_str(&format!("{l},{b:.8},{se:.8},{p:.6}\n"));
        }
        out.push_str("\ntest,statistic,pvalue,null\n");
        for t in &c.tests {
            out.push_str(&format!("{:?},{:.6},{:.6},{:?}\n", t.test, t.statistic, t.pvalue, t.null));
        }
        put(tables.join("cointegration.csv"), out)?;
    }
    if let Some(sel) = &report.lag_selection {
        let mut out = String::from("p,aic,bic,hq\n");
        for c in &sel.table {
            out.push_str(&format!("{},{:.6},{:.6},{:.6}\n", c.p, c.aic, c.bic, c.hq));
        }
        put(tables.join("lag_selection.csv"), out)?;
    }
    if let Some(v) = &report.var {
        let names = &v.fit.names;
        put(tables.join("var_coefficients.csv"), {
            let rows: Vec<String> = std::iter::once("const".to_string())
                .chain((1..=v.fit.p).flat_map(|l| names.iter().map(move |n| format!("{n}(-{l})"))))
                .collect();
            matrix_csv(&rows, names, &v.fit.stacked_coefficients())
        })?;
        put(tables.join("residual_covariance.csv"), varkit::upper_triangle_csv(names, &v.fit.omega_eps))?;
        put(tables.join("residual_correlation.csv"), varkit::upper_triangle_csv(names, &v.residual_correlation))?;
        let d = &v.diagnostics;
        let mut out = String::from("test,statistic,df,pvalue\n");
        out.push_str(&test_row(&format!("portmanteau({})", d.portmanteau_lags), &d.portmanteau));
        out.push_str(&test_row("brown_forsythe", &d.brown_forsythe));
        out.push_str(&test_row("lr_diagonal", &d.lr_diag));
        out.push_str(&test_row("lm_diagonal", &d.lm_diag));
        put(tables.join("var_diagnostics.csv"), out)?;
    }
    if let Some(s) = &report.svar {
        let mut out = String::from("parameter,estimate,std_error,pvalue\n");
        for (i, l) in s.fit.param_labels.iter().enumerate() {
            let se = s.fit.se.as_ref().map_or(String::new(), |v| format!("{:.8}", v[i]));
            let p = s.fit.pvalues.as_ref().map_or(String::new(), |v| format!("{:.6}", v[i]));
            out.push_str(&format!("{l},{:.8},{se},{p}\n", s.fit.params[i]));
        }
        out.push_str(&format!(
            "\noverid_lr,{:.6},{},{:.6}\n",
            s.overid_lr.statistic, s.overid_lr.df, s.overid_lr.pvalue
        ));
        put(tables.join("svar_parameters.csv"), out)?;
        put(tables.join("svar_system.txt"), s.listing.clone())?;
    }
    if let Some(set) = &report.impulse_responses {
        for (name, text) in set.to_csv_files() {
            put(tables.join(name), text)?;
        }
        put(plots.join("impulse_responses.svg"), set.to_svg())?;
    }
    if let (Some(m), Some(set)) = (&report.long_run_impact, &report.impulse_responses) {
        put(tables.join("long_run_impact.csv"), matrix_csv(&set.names, &set.shocks, m))?;
    }
    if let Some(f) = &report.fevd {
        put(tables.join("fevd.csv"), f.to_csv())?;
        put(plots.join("fevd.svg"), dynamics::fevd_svg(f))?;
    }
    Ok(written)
}
