//! Structural impulse responses, the long-run impact matrix, forecast-error
//! variance decompositions, and bootstrap confidence bands.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::reference;
use crate::svar::{self, BootstrapResult, SvarFit};
use crate::varkit::{self, VarFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// Point estimate ± multiplier × bootstrap standard deviation.
    StdDev,
    /// Bootstrap percentiles at the tails implied by a normal multiplier.
    Percentile,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bands {
    pub kind: BandKind,
    pub multiplier: f64,
    pub reps: usize,
    #[serde(with = "linalg::serde_rows_vec")]
    pub lower: Vec<Mat>,
    #[serde(with = "linalg::serde_rows_vec")]
    pub upper: Vec<Mat>,
}

/// Responses `Φ_0..Φ_h`; entry `(i, j)` of `Φ_s` is the response of variable
/// `i` at horizon `s` to a unit shock `j`.
#[derive(Debug, Clone, Serialize)]
pub struct ImpulseSet {
    pub names: Vec<String>,
    pub shocks: Vec<String>,
    pub horizon: usize,
    #[serde(with = "linalg::serde_rows_vec")]
    pub phis: Vec<Mat>,
    #[serde(with = "linalg::serde_rows_vec")]
    pub cumulative: Vec<Mat>,
    pub bands: Option<Bands>,
}

/// Reduced-form moving-average coefficients `Ψ_0 = I`,
/// `Ψ_i = Σ_{j=1}^{min(i,p)} A_j Ψ_{i−j}`.
pub fn ma_coefficients(coefs: &[Mat], k: usize, h: usize) -> Vec<Mat> {
    let mut psi: Vec<Mat> = Vec::with_capacity(h + 1);
    psi.push(Mat::identity(k, k));
    for i in 1..=h {
        let mut m = Mat::zeros(k, k);
        for (j, a) in coefs.iter().enumerate().take(i) {
            m += a * &psi[i - j - 1];
        }
        psi.push(m);
    }
    psi
}

pub fn irf_from(coefs: &[Mat], phi0: &Mat, h: usize) -> Vec<Mat> {
    ma_coefficients(coefs, phi0.nrows(), h)
        .into_iter()
        .map(|p| p * phi0)
        .collect()
}

fn running_sums(phis: &[Mat]) -> Vec<Mat> {
    let mut acc = Mat::zeros(phis[0].nrows(), phis[0].ncols());
    phis.iter()
        .map(|p| {
            acc += p;
            acc.clone()
        })
        .collect()
}

pub fn impulse_responses(fit: &SvarFit, var: &VarFit, h: usize) -> ImpulseSet {
    let phis = irf_from(&var.coefs, &fit.phi0, h);
    ImpulseSet {
        names: var.names.clone(),
        shocks: fit.shocks.clone(),
        horizon: h,
        cumulative: running_sums(&phis),
        phis,
        bands: None,
    }
}

/// `Ψ∞ = (I − A_1 − … − A_p)⁻¹ Φ_0` for a stable VAR.
pub fn long_run_from(coefs: &[Mat], phi0: &Mat) -> Result<Mat> {
    let stab = varkit::stability_of(coefs);
    if !stab.is_stable {
        return Err(Error::Stability(format!(
            "largest companion modulus {:.4} is not below 1, so the cumulative response diverges",
            stab.moduli[0]
        )));
    }
    let k = phi0.nrows();
    let sum = coefs.iter().fold(Mat::zeros(k, k), |acc, a| acc + a);
    Ok(linalg::inverse(&(Mat::identity(k, k) - sum), "I − ΣA_i")? * phi0)
}

pub fn long_run_impact(fit: &SvarFit, var: &VarFit) -> Result<Mat> {
    long_run_from(&var.coefs, &fit.phi0)
}

#[derive(Debug, Clone, Serialize)]
pub struct FevdTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub horizon: usize,
    /// Percent shares; each row sums to 100.
    #[serde(with = "linalg::serde_rows")]
    pub shares: Mat,
}

impl FevdTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("variable,{}\n", self.cols.join(","));
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(r);
            for j in 0..self.cols.len() {
                let _ = write!(out, ",{:.4}", self.shares[(i, j)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Variance shares accumulated over horizons `0..h` (so `h = 10` sums ten terms).
pub fn fevd_from_phis(phis: &[Mat], h: usize, rows: Vec<String>, cols: Vec<String>) -> Result<FevdTable> {
    if h == 0 || phis.len() < h {
        return Err(Error::Config(format!(
            "variance decomposition at horizon {h} needs {h} response matrices, have {}",
            phis.len()
        )));
    }
    let (k, m) = (phis[0].nrows(), phis[0].ncols());
    let mut acc = Mat::zeros(k, m);
    for p in &phis[..h] {
        acc += p.component_mul(p);
    }
    let mut shares = Mat::zeros(k, m);
    for i in 0..k {
        let total: f64 = acc.row(i).sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!("variable {} has zero forecast-error variance", rows[i])));
        }
        for j in 0..m {
            shares[(i, j)] = 100.0 * acc[(i, j)] / total;
        }
    }
    Ok(FevdTable {
        rows,
        cols,
        horizon: h,
        shares,
    })
}

pub fn fevd(fit: &SvarFit, var: &VarFit, h: usize) -> Result<FevdTable> {
    let phis = irf_from(&var.coefs, &fit.phi0, h.saturating_sub(1));
    fevd_from_phis(&phis, h, var.names.clone(), fit.shocks.clone())
}

/// Bootstrap the SVAR and attach bands to its impulse responses.
pub fn mc_bands(
    fit: &SvarFit,
    var: &VarFit,
    h: usize,
    reps: usize,
    seed: u64,
    multiplier: f64,
) -> Result<ImpulseSet> {
    let boot = svar::bootstrap_se(fit, var, reps, seed)?;
    Ok(bands_from_bootstrap(impulse_responses(fit, var, h), &boot, multiplier, BandKind::StdDev))
}

pub fn bands_from_bootstrap(mut set: ImpulseSet, boot: &BootstrapResult, multiplier: f64, kind: BandKind) -> ImpulseSet {
    let h = set.horizon;
    let k = set.phis[0].nrows();
    let m = set.phis[0].ncols();
    let draws: Vec<Vec<Mat>> = boot
        .replications
        .iter()
        .map(|r| {
            let phi0 = r.a.clone().try_inverse().unwrap_or_else(|| Mat::zeros(k, k)) * &r.b;
            irf_from(&r.coefs, &phi0, h)
        })
        .collect();
    let n = draws.len() as f64;
    let mut lower = Vec::with_capacity(h + 1);
    let mut upper = Vec::with_capacity(h + 1);
    let tail = crate::dist::normal_cdf(-multiplier.abs());
    for s in 0..=h {
        let point = &set.phis[s];
        let mut lo = Mat::zeros(k, m);
        let mut hi = Mat::zeros(k, m);
        for i in 0..k {
            for j in 0..m {
                let mut vals: Vec<f64> = draws.iter().map(|d| d[s][(i, j)]).collect();
                let (l, u) = match kind {
                    BandKind::StdDev => {
                        let mu = vals.iter().sum::<f64>() / n;
                        let sd = (vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                        (point[(i, j)] - multiplier * sd, point[(i, j)] + multiplier * sd)
                    }
                    BandKind::Percentile => {
                        vals.sort_by(f64::total_cmp);
                        (
                            svar::quantile_sorted(&vals, tail).min(point[(i, j)]),
                            svar::quantile_sorted(&vals, 1.0 - tail).max(point[(i, j)]),
                        )
                    }
                };
                lo[(i, j)] = l;
                hi[(i, j)] = u;
            }
        }
        lower.push(lo);
        upper.push(hi);
    }
    set.bands = Some(Bands {
        kind,
        multiplier,
        reps: boot.reps,
        lower,
        upper,
    });
    set
}

impl ImpulseSet {
    /// One CSV per response variable: horizon, then point (and band) columns per shock.
    pub fn to_csv_files(&self) -> Vec<(String, String)> {
        let k = self.names.len();
        (0..k)
            .map(|i| {
                let mut out = String::from("horizon");
                for s in &self.shocks {
                    let _ = write!(out, ",{s}");
                    if self.bands.is_some() {
                        let _ = write!(out, ",{s}_lower,{s}_upper");
                    }
                    let _ = write!(out, ",{s}_cumulative");
                }
                out.push('\n');
                for h in 0..=self.horizon {
                    let _ = write!(out, "{h}");
                    for j in 0..self.shocks.len() {
                        let _ = write!(out, ",{:.8e}", self.phis[h][(i, j)]);
                        if let Some(b) = &self.bands {
                            let _ = write!(out, ",{:.8e},{:.8e}", b.lower[h][(i, j)], b.upper[h][(i, j)]);
                        }
                        let _ = write!(out, ",{:.8e}", self.cumulative[h][(i, j)]);
                    }
                    out.push('\n');
                }
                (format!("irf_{}.csv", self.names[i]), out)
            })
            .collect()
    }

    /// Grid of line plots: rows are responses, columns are shocks; a shaded
    /// band is drawn when present.
    pub fn to_svg(&self) -> String {
        let (k, m) = (self.names.len(), self.shocks.len());
        let (pw, ph, pad) = (220.0, 150.0, 34.0);
        let width = m as f64 * pw + pad;
        let height = k as f64 * ph + pad;
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"10\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        for i in 0..k {
            for j in 0..m {
                let x0 = pad + j as f64 * pw;
                let y0 = pad + i as f64 * ph;
                let point: Vec<f64> = self.phis.iter().map(|p| p[(i, j)]).collect();
                let (lo, hi): (Vec<f64>, Vec<f64>) = match &self.bands {
                    Some(b) => (
                        b.lower.iter().map(|p| p[(i, j)]).collect(),
                        b.upper.iter().map(|p| p[(i, j)]).collect(),
                    ),
                    None => (point.clone(), point.clone()),
                };
                let vmin = lo.iter().chain(&point).fold(0.0f64, |a, b| a.min(*b));
                let vmax = hi.iter().chain(&point).fold(0.0f64, |a, b| a.max(*b));
                let span = if vmax > vmin { vmax - vmin } else { 1.0 };
                let (iw, ih) = (pw - 20.0, ph - 30.0);
                let sx = |h: usize| x0 + 10.0 + iw * h as f64 / self.horizon.max(1) as f64;
                let sy = |v: f64| y0 + 18.0 + ih * (vmax - v) / span;
                let _ = writeln!(
                    svg,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#ccc\"/>",
                    x0 + 10.0,
                    y0 + 18.0,
                    iw,
                    ih
                );
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" fill=\"#666\" text-anchor=\"end\">{:.3e}</text><text x=\"{:.1}\" y=\"{:.1}\" font-size=\"8\" fill=\"#666\" text-anchor=\"end\">{:.3e}</text>",
                    x0 + pw - 10.0,
                    y0 + 26.0,
                    vmax,
                    x0 + pw - 10.0,
                    y0 + 16.0 + ih,
                    vmin
                );
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\">{} to {}</text>",
                    x0 + 10.0,
                    y0 + 12.0,
                    xml_escape(&self.names[i]),
                    xml_escape(&self.shocks[j])
                );
                let _ = writeln!(
                    svg,
                    "<line x1=\"{:.1}\" x2=\"{:.1}\" y1=\"{:.1}\" y2=\"{:.1}\" stroke=\"#888\" stroke-dasharray=\"3,3\"/>",
                    sx(0),
                    sx(self.horizon),
                    sy(0.0),
                    sy(0.0)
                );
                if self.bands.is_some() {
                    let mut pts: Vec<String> = (0..=self.horizon).map(|h| format!("{:.1},{:.1}", sx(h), sy(hi[h]))).collect();
                    pts.extend((0..=self.horizon).rev().map(|h| format!("{:.1},{:.1}", sx(h), sy(lo[h]))));
                    let _ = writeln!(svg, "<polygon points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\"/>", pts.join(" "));
                }
                let pts: Vec<String> = (0..=self.horizon).map(|h| format!("{:.1},{:.1}", sx(h), sy(point[h]))).collect();
                let _ = writeln!(svg, "<polyline points=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\"/>", pts.join(" "));
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Horizontal stacked bars of the variance shares.
pub fn fevd_svg(table: &FevdTable) -> String {
    const COLORS: [&str; 8] = ["#08519c", "#fd8d3c", "#31a354", "#756bb1", "#e6550d", "#636363", "#9ecae1", "#c7e9c0"];
    let (bar_w, bar_h, left, top) = (400.0, 24.0, 90.0, 30.0);
    let height = top + table.rows.len() as f64 * (bar_h + 10.0) + 30.0;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"{left}\" y=\"16\">Variance shares (%), horizon {}</text>\n",
        left + bar_w + 20.0,
        table.horizon
    );
    for (i, r) in table.rows.iter().enumerate() {
        let y = top + i as f64 * (bar_h + 10.0);
        let _ = writeln!(svg, "<text x=\"4\" y=\"{:.1}\">{}</text>", y + 16.0, xml_escape(r));
        let mut x = left;
        for j in 0..table.cols.len() {
            let w = bar_w * table.shares[(i, j)] / 100.0;
            let _ = writeln!(
                svg,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{bar_h}\" fill=\"{}\"><title>{}: {:.2}%</title></rect>",
                COLORS[j % COLORS.len()],
                xml_escape(&table.cols[j]),
                table.shares[(i, j)]
            );
            x += w;
        }
    }
    let y = height - 12.0;
    for (j, c) in table.cols.iter().enumerate() {
        let x = left + j as f64 * 90.0;
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{y:.1}\">{}</text>",
            y - 9.0,
            COLORS[j % COLORS.len()],
            x + 14.0,
            xml_escape(c)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Serialize)]
pub struct SignNote {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub printed: f64,
    pub other: f64,
    pub source: String,
}

/// Algebraic cross-check of the printed impulse-response matrices.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTripReport {
    #[serde(with = "linalg::serde_rows")]
    pub a1: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub phi2: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub psi_inf: Mat,
    pub phi2_max_error: f64,
    pub psi_inf_max_error: f64,
    /// Cells (0-based) of the largest errors.
    pub phi2_worst_cell: (usize, usize),
    pub psi_inf_worst_cell: (usize, usize),
    pub sign_discrepancies: Vec<SignNote>,
}

/// Recover `Â₁ = Φ₁Φ₀⁻¹` from the printed matrices, recompute `Φ₂ = Â₁Φ₁` and
/// `Ψ∞ = (I − Â₁)⁻¹Φ₀`, and list sign disagreements between the printed
/// matrices, the estimated structural equations, and quoted values.
pub fn reference_round_trip() -> Result<RoundTripReport> {
    let phi0 = reference::mat(&reference::PHI0);
    let phi1 = reference::mat(&reference::PHI1);
    let a1 = reference::var_coefficient();
    let phi2 = &a1 * &phi1;
    let psi = long_run_from(std::slice::from_ref(&a1), &phi0)?;
    let worst = |m: &Mat| {
        let mut best = (0.0, (0, 0));
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].abs() > best.0 {
                    best = (m[(i, j)].abs(), (i, j));
                }
            }
        }
        best
    };
    let (e2, c2) = worst(&(&phi2 - reference::mat(&reference::PHI2)));
    let (ep, cp) = worst(&(&psi - reference::mat(&reference::PSI_INF)));

    let mut notes = Vec::new();
    let implied = linalg::inverse(&reference::structural_a(), "A")? * reference::structural_b();
    for i in 0..4 {
        for j in 0..4 {
            let (p, q) = (phi0[(i, j)], implied[(i, j)]);
            if p * q < 0.0 {
                notes.push(SignNote {
                    matrix: "phi0".into(),
                    row: i,
                    col: j,
                    printed: p,
                    other: q,
                    source: "implied by the estimated structural equations".into(),
                });
            }
        }
    }
    for (name, printed, quotes) in [
        ("phi0", &reference::PHI0, &reference::PHI0_QUOTED[..]),
        ("psi_inf", &reference::PSI_INF, &reference::PSI_INF_QUOTED[..]),
    ] {
        for &(i, j, v) in quotes {
            if printed[i][j] * v < 0.0 {
                notes.push(SignNote {
                    matrix: name.into(),
                    row: i,
                    col: j,
                    printed: printed[i][j],
                    other: v,
                    source: "quoted in the text".into(),
                });
            }
        }
    }
    Ok(RoundTripReport {
        a1,
        phi2,
        psi_inf: psi,
        phi2_max_error: e2,
        psi_inf_max_error: ep,
        phi2_worst_cell: c2,
        psi_inf_worst_cell: cp,
        sign_discrepancies: notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;
    use crate::svar::RestrictionPattern;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("y{i}")).collect()
    }

    #[test]
    fn no_dynamics_and_base_case() {
        let phi0 = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 2.0]);
        let phis = irf_from(&[Mat::zeros(2, 2)], &phi0, 5);
        assert_eq!(phis[0], phi0);
        assert!(phis[1..].iter().all(|p| linalg::max_abs(p) == 0.0));
        assert_eq!(irf_from(&[Mat::zeros(2, 2)], &phi0, 0).len(), 1);
        assert_eq!(long_run_from(&[Mat::zeros(2, 2)], &phi0).unwrap(), phi0);
    }

    #[test]
    fn geometric_long_run_and_instability() {
        let lr = long_run_from(&[Mat::identity(3, 3) * 0.5], &Mat::identity(3, 3)).unwrap();
        assert!(linalg::max_abs(&(lr - Mat::identity(3, 3) * 2.0)) < 1e-12);
        let err = long_run_from(&[Mat::identity(2, 2)], &Mat::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::Stability(_)));
    }

    #[test]
    fn var2_recursion_matches_companion_powers() {
        let a1 = Mat::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let a2 = Mat::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.1]);
        let psi = ma_coefficients(&[a1.clone(), a2.clone()], 2, 6);
        let c = crate::hac::companion(&[a1, a2]);
        for (i, p) in psi.iter().enumerate() {
            let ci = c.pow(i as u32);
            assert!(linalg::max_abs(&(p - ci.view((0, 0), (2, 2)))) < 1e-12);
        }
    }

    #[test]
    fn fevd_rows_and_single_shock() {
        let phi0 = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let phis = irf_from(&[Mat::identity(3, 3) * 0.4], &phi0, 9);
        let t = fevd_from_phis(&phis, 10, names(3), names(3)).unwrap();
        for i in 0..3 {
            assert!((t.shares[(i, 0)] - 100.0).abs() < 1e-12);
        }
        let zero = vec![Mat::zeros(2, 2); 3];
        assert!(matches!(fevd_from_phis(&zero, 2, names(2), names(2)), Err(Error::Degenerate(_))));
        assert!(matches!(fevd_from_phis(&zero, 0, names(2), names(2)), Err(Error::Config(_))));
    }

    #[test]
    fn reference_round_trip_reports() {
        let r = reference_round_trip().unwrap();
        assert!(r.phi2_max_error < 0.003, "{}", r.phi2_max_error);
        // The near-unit root of Â₁ amplifies four-decimal rounding in Ψ∞.
        assert!(r.psi_inf_max_error < 0.02, "{}", r.psi_inf_max_error);
        assert!(r.sign_discrepancies.iter().any(|n| n.matrix == "phi0" && (n.row, n.col) == (2, 0)));
        assert!(r.sign_discrepancies.iter().any(|n| n.matrix == "psi_inf" && (n.row, n.col) == (3, 2)));
    }

    #[test]
    fn truncated_sum_reaches_long_run_matrix() {
        let a1 = reference::var_coefficient();
        let phi0 = reference::mat(&reference::PHI0);
        let phis = irf_from(std::slice::from_ref(&a1), &phi0, 2000);
        let total = phis.iter().fold(Mat::zeros(4, 4), |acc, p| acc + p);
        let psi = long_run_from(&[a1], &phi0).unwrap();
        assert!(linalg::max_abs(&(total - psi)) < 1e-6);
    }

    #[test]
    fn bands_collapse_with_zero_multiplier_and_are_deterministic() {
        let mut r = sim::rng(3);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.3, 0.8]);
        let y = svar::simulate_structural(&[Mat::identity(2, 2) * 0.5], &Mat::identity(2, 2), &b, 150, 100, &mut r).unwrap();
        let var = varkit::var_fit_matrix(&y, names(2), 1).unwrap();
        let fit = svar::svar_ml_fit(&var, &RestrictionPattern::recursive(2)).unwrap();
        let z = mc_bands(&fit, &var, 6, 100, 4, 0.0).unwrap();
        let bands = z.bands.as_ref().unwrap();
        for h in 0..=6 {
            assert!(linalg::max_abs(&(&bands.lower[h] - &z.phis[h])) < 1e-15);
            assert!(linalg::max_abs(&(&bands.upper[h] - &z.phis[h])) < 1e-15);
        }
        let a = mc_bands(&fit, &var, 6, 100, 4, 2.0).unwrap();
        let b2 = mc_bands(&fit, &var, 6, 100, 4, 2.0).unwrap();
        assert_eq!(a.bands.as_ref().unwrap().lower, b2.bands.as_ref().unwrap().lower);
        let bands = a.bands.as_ref().unwrap();
        for h in 0..=6 {
            assert!((&bands.lower[h] - &a.phis[h]).max() <= 0.0);
            assert!((&bands.upper[h] - &a.phis[h]).min() >= 0.0);
        }
        let files = a.to_csv_files();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0].1.lines().count(), 8);
        let svg = a.to_svg();
        assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn fevd_shares_sum_to_100(seed in 0u64..10_000, h in 1usize..15) {
            let mut r = sim::rng(seed);
            let a1 = sim::normal_matrix(&mut r, 3, 3) * 0.25;
            let phi0 = sim::normal_matrix(&mut r, 3, 3);
            let phis = irf_from(&[a1], &phi0, h);
            let t = fevd_from_phis(&phis, h, names(3), names(3)).unwrap();
            for i in 0..3 {
                prop_assert!((t.shares.row(i).sum() - 100.0).abs() < 1e-8);
                prop_assert!(t.shares.row(i).iter().all(|v| *v >= 0.0));
            }
        }

        #[test]
        fn fevd_invariant_to_shock_rescaling(seed in 0u64..10_000, scale in 0.1f64..10.0, col in 0usize..3) {
            // Scaling a shock's loading by λ with shock variance 1/λ² leaves the
            // contributions, and so the shares, unchanged.
            let mut r = sim::rng(seed);
            let a1 = sim::normal_matrix(&mut r, 3, 3) * 0.25;
            let phi0 = sim::normal_matrix(&mut r, 3, 3);
            let mut scaled = phi0.clone();
            scaled.column_mut(col).scale_mut(scale);
            let base = fevd_from_phis(&irf_from(std::slice::from_ref(&a1), &phi0, 9), 10, names(3), names(3)).unwrap();
            let mut phis = irf_from(std::slice::from_ref(&a1), &scaled, 9);
            for p in phis.iter_mut() {
                p.column_mut(col).scale_mut(1.0 / scale);
            }
            let other = fevd_from_phis(&phis, 10, names(3), names(3)).unwrap();
            prop_assert!(linalg::max_abs(&(base.shares - other.shares)) < 1e-9);
        }

        #[test]
        fn responses_decay_geometrically(seed in 0u64..10_000) {
            let mut r = sim::rng(seed);
            let a1 = sim::normal_matrix(&mut r, 3, 3) * 0.2;
            let rho = varkit::stability_of(std::slice::from_ref(&a1)).moduli[0];
            prop_assume!(rho < 0.95);
            let phi0 = sim::normal_matrix(&mut r, 3, 3);
            let phis = irf_from(std::slice::from_ref(&a1), &phi0, 60);
            // Bound with a slightly inflated rate to absorb polynomial factors.
            let rate = (rho + 1.0) / 2.0;
            let c = phis.iter().enumerate().map(|(h, p)| p.amax() / (phi0.amax() * rate.powi(h as i32))).fold(0.0, f64::max);
            prop_assert!(c.is_finite());
            prop_assert!(phis[60].amax() <= c * phi0.amax() * rate.powi(60) + 1e-15);
            prop_assert!(phis[60].amax() < phi0.amax());
        }
    }
}
