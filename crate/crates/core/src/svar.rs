//! AB-model structural VARs: `A ε_t = B u_t` with `E u u' = I`.
//!
//! Restriction patterns, order and rank identification checks, concentrated
//! maximum likelihood with multi-start quasi-Newton search, the
//! over-identification LR test, structural shocks, and a recursive-design
//! residual bootstrap.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::sim;
use crate::varkit::{self, TestStat, VarFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Fixed(f64),
    Free,
}

/// Fixed and free cells of `A` and `B`, both stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionPattern {
    pub k: usize,
    pub a: Vec<Cell>,
    pub b: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    A,
    B,
}

impl RestrictionPattern {
    pub fn new(k: usize, a: Vec<Cell>, b: Vec<Cell>) -> Result<Self> {
        if k == 0 || a.len() != k * k || b.len() != k * k {
            return Err(Error::Config(format!("A and B patterns must both be {k}×{k}")));
        }
        for i in 0..k {
            if a[i * k + i] != Cell::Fixed(1.0) {
                return Err(Error::Config(format!(
                    "A diagonal entry ({}, {}) must be fixed at 1",
                    i + 1,
                    i + 1
                )));
            }
        }
        if let Some(c) = a.iter().chain(&b).find(|c| matches!(c, Cell::Fixed(v) if !v.is_finite())) {
            return Err(Error::Config(format!("non-finite fixed cell {c:?}")));
        }
        Ok(RestrictionPattern { k, a, b })
    }

    /// Parse text grids. Each string is one row of whitespace-separated tokens
    /// (`*` marks a free cell, anything else must parse as a number); a single
    /// string may also hold all rows separated by `/`.
    pub fn parse(a_rows: &[String], b_rows: &[String]) -> Result<Self> {
        let a = parse_grid(a_rows, "A")?;
        let b = parse_grid(b_rows, "B")?;
        let k = (a.len() as f64).sqrt() as usize;
        if (b.len() as f64).sqrt() as usize != k {
            return Err(Error::Config("A and B grids differ in size".into()));
        }
        RestrictionPattern::new(k, a, b)
    }

    /// `A = I`, lower-triangular free `B`: the recursive (Cholesky) scheme.
    pub fn recursive(k: usize) -> Self {
        let a = (0..k * k)
            .map(|n| Cell::Fixed(if n / k == n % k { 1.0 } else { 0.0 }))
            .collect();
        let b = (0..k * k)
            .map(|n| if n % k <= n / k { Cell::Free } else { Cell::Fixed(0.0) })
            .collect();
        RestrictionPattern { k, a, b }
    }

    pub fn free_count(&self) -> usize {
        self.a.iter().chain(&self.b).filter(|c| **c == Cell::Free).count()
    }

    pub fn fixed_count(&self) -> usize {
        2 * self.k * self.k - self.free_count()
    }

    fn free_cells(&self) -> Vec<(Which, usize, usize)> {
        let k = self.k;
        let mut out = Vec::new();
        for (w, cells) in [(Which::A, &self.a), (Which::B, &self.b)] {
            for (n, c) in cells.iter().enumerate() {
                if *c == Cell::Free {
                    out.push((w, n / k, n % k));
                }
            }
        }
        out
    }

    /// Labels `a31`, `b11`, … (1-based) of the free parameters in packing order.
    pub fn labels(&self) -> Vec<String> {
        self.free_cells()
            .iter()
            .map(|(w, i, j)| {
                let m = if *w == Which::A { 'a' } else { 'b' };
                format!("{m}{}{}", i + 1, j + 1)
            })
            .collect()
    }

    /// Substitute free parameters into the fixed cells.
    pub fn build(&self, params: &[f64]) -> (Mat, Mat) {
        let k = self.k;
        let fill = |cells: &[Cell]| {
            Mat::from_fn(k, k, |i, j| match cells[i * k + j] {
                Cell::Fixed(v) => v,
                Cell::Free => 0.0,
            })
        };
        let (mut a, mut b) = (fill(&self.a), fill(&self.b));
        for ((w, i, j), v) in self.free_cells().into_iter().zip(params) {
            match w {
                Which::A => a[(i, j)] = *v,
                Which::B => b[(i, j)] = *v,
            }
        }
        (a, b)
    }

    /// Read the free cells out of full matrices.
    pub fn pack(&self, a: &Mat, b: &Mat) -> Vec<f64> {
        self.free_cells()
            .into_iter()
            .map(|(w, i, j)| if w == Which::A { a[(i, j)] } else { b[(i, j)] })
            .collect()
    }

    /// Pattern expressed for data rescaled by `D⁻¹`: `A ↦ D⁻¹AD`, `B ↦ D⁻¹B`.
    fn rescaled(&self, d: &[f64]) -> RestrictionPattern {
        let k = self.k;
        let map = |cells: &[Cell], f: &dyn Fn(usize, usize, f64) -> f64| {
            cells
                .iter()
                .enumerate()
                .map(|(n, c)| match c {
                    Cell::Fixed(v) => Cell::Fixed(f(n / k, n % k, *v)),
                    Cell::Free => Cell::Free,
                })
                .collect()
        };
        RestrictionPattern {
            k,
            a: map(&self.a, &|i, j, v| v * d[j] / d[i]),
            b: map(&self.b, &|i, _, v| v / d[i]),
        }
    }

    pub fn to_grid_strings(&self) -> (Vec<String>, Vec<String>) {
        let k = self.k;
        let rows = |cells: &[Cell]| {
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| match cells[i * k + j] {
                            Cell::Free => "*".to_string(),
                            Cell::Fixed(v) => format!("{v}"),
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect()
        };
        (rows(&self.a), rows(&self.b))
    }
}

fn parse_grid(rows: &[String], what: &str) -> Result<Vec<Cell>> {
    let lines: Vec<&str> = rows.iter().flat_map(|r| r.split('/')).map(str::trim).filter(|r| !r.is_empty()).collect();
    let k = lines.len();
    let mut cells = Vec::with_capacity(k * k);
    for (i, line) in lines.iter().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != k {
            return Err(Error::Config(format!(
                "{what} row {} has {} cells, expected {k}",
                i + 1,
                tokens.len()
            )));
        }
        for tok in tokens {
            cells.push(if tok == "*" {
                Cell::Free
            } else {
                Cell::Fixed(tok.parse::<f64>().map_err(|_| {
                    Error::Config(format!("{what} row {}: cannot parse token {tok:?}", i + 1))
                })?)
            });
        }
    }
    if k == 0 {
        return Err(Error::Config(format!("{what} grid is empty")));
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "degree")]
pub enum Identification {
    Just,
    /// Over-identified by the given number of restrictions.
    Over(usize),
    /// Missing restrictions (0 when only the rank condition fails).
    Under(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCondition {
    Holds,
    Fails,
    NotEvaluated,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentificationCheck {
    pub k: usize,
    /// `2K² − K(K+1)/2`.
    pub required: usize,
    pub imposed: usize,
    pub free: usize,
    pub order_holds: bool,
    pub rank: RankCondition,
    pub status: Identification,
}

const RANK_POINTS: usize = 20;
const RANK_SEED: u64 = 0x1d_e471;

pub fn check_identification(pattern: &RestrictionPattern) -> IdentificationCheck {
    let k = pattern.k;
    let required = 2 * k * k - k * (k + 1) / 2;
    let imposed = pattern.fixed_count();
    let free = pattern.free_count();
    let order_holds = imposed >= required;
    let rank = if !order_holds {
        RankCondition::NotEvaluated
    } else if free == 0 || rank_holds(pattern) {
        RankCondition::Holds
    } else {
        RankCondition::Fails
    };
    let status = match (order_holds, rank) {
        (false, _) => Identification::Under(required - imposed),
        (true, RankCondition::Fails) => Identification::Under(0),
        (true, _) if imposed == required => Identification::Just,
        (true, _) => Identification::Over(imposed - required),
    };
    IdentificationCheck {
        k,
        required,
        imposed,
        free,
        order_holds,
        rank,
        status,
    }
}

/// Full column rank of `∂ vech(A⁻¹BB'A⁻¹') / ∂θ` at any of several random
/// admissible points.
fn rank_holds(pattern: &RestrictionPattern) -> bool {
    let mut r = sim::rng(RANK_SEED);
    let cells = pattern.free_cells();
    let mut tried = 0;
    while tried < RANK_POINTS {
        let params: Vec<f64> = cells
            .iter()
            .map(|(_, i, j)| {
                let z: f64 = StandardNormal.sample(&mut r);
                if i == j {
                    0.5 + z.abs()
                } else {
                    z
                }
            })
            .collect();
        let (a, b) = pattern.build(&params);
        // Degenerate draws are not admissible; the budget counts admissible points.
        let (Some(ai), Some(_)) = (a.clone().try_inverse(), b.clone().try_inverse()) else {
            continue;
        };
        tried += 1;
        let jac = omega_jacobian(pattern, &ai, &b);
        let sv = jac.svd(false, false).singular_values;
        let smax = sv.max();
        let rank = sv.iter().filter(|s| **s > 1e-9 * smax).count();
        if smax > 0.0 && rank == cells.len() {
            return true;
        }
    }
    false
}

fn omega_jacobian(pattern: &RestrictionPattern, a_inv: &Mat, b: &Mat) -> Mat {
    let k = pattern.k;
    let omega = a_inv * b * b.transpose() * a_inv.transpose();
    let cells = pattern.free_cells();
    let nv = k * (k + 1) / 2;
    let mut jac = Mat::zeros(nv, cells.len());
    for (c, (w, i, j)) in cells.iter().enumerate() {
        let mut e = Mat::zeros(k, k);
        e[(*i, *j)] = 1.0;
        let d = match w {
            Which::A => {
                let m = a_inv * &e * &omega;
                -(&m + m.transpose())
            }
            Which::B => {
                let m = a_inv * &e * b.transpose() * a_inv.transpose();
                &m + m.transpose()
            }
        };
        let mut n = 0;
        for col in 0..k {
            for row in col..k {
                jac[(n, c)] = d[(row, col)];
                n += 1;
            }
        }
    }
    jac
}

/// Concentrated log-likelihood
/// `−KT/2·ln 2π + T/2·ln|A|² − T/2·ln|B|² − T/2·tr(A'B'⁻¹B⁻¹AΩ)`.
pub fn concentrated_loglik(a: &Mat, b: &Mat, omega: &Mat, t: usize) -> f64 {
    let k = a.nrows() as f64;
    let t = t as f64;
    let (sa, la) = linalg::signed_log_det(a);
    let (sb, lb) = linalg::signed_log_det(b);
    if sa == 0.0 || sb == 0.0 {
        return f64::NEG_INFINITY;
    }
    let Some(w) = b.clone().lu().solve(a) else {
        return f64::NEG_INFINITY;
    };
    let tr = (&w * omega * w.transpose()).trace();
    -0.5 * t * k * (2.0 * PI).ln() + t * la - t * lb - 0.5 * t * tr
}

const LOG_DET_B_FLOOR: f64 = -27.631_021_115_928_547; // ln 1e-12

/// Per-observation objective `g = −ln|A| + ln|B| + ½tr(WΩW')`, `W = B⁻¹A`, and
/// its gradient over the free cells. `None` outside the admissible region.
fn objective(pattern: &RestrictionPattern, omega: &Mat, params: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (a, b) = pattern.build(params);
    let (sa, la) = linalg::signed_log_det(&a);
    let (sb, lb) = linalg::signed_log_det(&b);
    if sa == 0.0 || sb == 0.0 || lb < LOG_DET_B_FLOOR {
        return None;
    }
    let b_inv = b.clone().try_inverse()?;
    let a_inv = a.clone().try_inverse()?;
    let w = &b_inv * &a;
    let wo = &w * omega;
    let g = -la + lb + 0.5 * (&wo * w.transpose()).trace();
    if !g.is_finite() {
        return None;
    }
    let bt = b_inv.transpose();
    let grad_a = -a_inv.transpose() + &bt * &wo;
    let grad_b = &bt - &bt * &wo * w.transpose();
    let grad = pattern
        .free_cells()
        .into_iter()
        .map(|(wh, i, j)| if wh == Which::A { grad_a[(i, j)] } else { grad_b[(i, j)] })
        .collect();
    Some((g, grad))
}

#[derive(Debug, Clone)]
struct Minimum {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// BFGS on the inverse Hessian with Armijo backtracking.
fn bfgs(f: impl Fn(&[f64]) -> Option<(f64, Vec<f64>)>, x0: Vec<f64>, max_iter: usize, tol: f64) -> Option<Minimum> {
    let n = x0.len();
    let (mut fx, mut gx) = f(&x0)?;
    let mut x = Vector::from_vec(x0);
    let mut g = Vector::from_vec(gx.clone());
    let mut h = Mat::identity(n, n);
    let mut fresh = true;
    for it in 0..max_iter {
        let gn = inf_norm(g.as_slice());
        if gn < tol {
            return Some(Minimum {
                x: x.as_slice().to_vec(),
                value: fx,
                grad_norm: gn,
                iterations: it,
                converged: true,
            });
        }
        let mut d = -(&h * &g);
        let mut slope = d.dot(&g);
        if !(slope < 0.0) {
            h = Mat::identity(n, n);
            d = -g.clone();
            slope = d.dot(&g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &d * step;
            if let Some((fnew, gnew)) = f(xn.as_slice()) {
                if fnew <= fx + 1e-4 * step * slope {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if fresh {
                break;
            }
            h = Mat::identity(n, n);
            fresh = true;
            continue;
        };
        let gn_vec = Vector::from_vec(gnew.clone());
        let s = &xn - &x;
        let y = &gn_vec - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h = Mat::identity(n, n) * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let i = Mat::identity(n, n);
            let left = &i - &s * y.transpose() * rho;
            let right = &i - &y * s.transpose() * rho;
            h = &left * &h * &right + &s * s.transpose() * rho;
            fresh = false;
        }
        x = xn;
        fx = fnew;
        gx = gnew;
        g = gn_vec;
    }
    let gn = inf_norm(&gx);
    Some(Minimum {
        x: x.as_slice().to_vec(),
        value: fx,
        grad_norm: gn,
        iterations: max_iter,
        converged: gn < tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvarOptions {
    pub starts: usize,
    /// Seed for the perturbed starting points.
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the ∞-norm of the per-observation gradient.
    pub grad_tol: f64,
    /// Standard deviation of start perturbations on the standardized scale.
    pub perturbation: f64,
    /// Optional first starting point in the original parameter scale.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

impl Default for SvarOptions {
    fn default() -> Self {
        SvarOptions {
            starts: 10,
            seed: 0,
            max_iter: 1000,
            grad_tol: 1e-7,
            perturbation: 0.5,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SvarFit {
    pub names: Vec<String>,
    pub shocks: Vec<String>,
    #[serde(skip)]
    pub pattern: RestrictionPattern,
    #[serde(with = "linalg::serde_rows")]
    pub a: Mat,
    #[serde(with = "linalg::serde_rows")]
    pub b: Mat,
    /// `A⁻¹B`, the impact responses.
    #[serde(with = "linalg::serde_rows")]
    pub phi0: Mat,
    pub loglik: f64,
    pub t_eff: usize,
    pub identification: Identification,
    pub param_labels: Vec<String>,
    pub params: Vec<f64>,
    pub se: Option<Vec<f64>>,
    pub pvalues: Option<Vec<f64>>,
    pub starts_converged: usize,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl SvarFit {
    pub fn with_shock_names(mut self, shocks: Vec<String>) -> Result<Self> {
        if shocks.len() != self.a.nrows() {
            return Err(Error::Config(format!(
                "{} shock names for {} shocks",
                shocks.len(),
                self.a.nrows()
            )));
        }
        self.shocks = shocks;
        Ok(self)
    }

    /// Attach bootstrap standard errors and the implied normal p-values.
    pub fn attach_bootstrap(&mut self, boot: &BootstrapResult) {
        self.pvalues = Some(
            self.params
                .iter()
                .zip(&boot.se)
                .map(|(p, s)| if *s > 0.0 { dist::normal_two_sided(p / s) } else { f64::NAN })
                .collect(),
        );
        self.se = Some(boot.se.clone());
    }

    /// Equation listing: each reduced-form innovation as a combination of the
    /// other innovations and the structural shocks, p-values beneath.
    pub fn system_listing(&self) -> String {
        let k = self.a.nrows();
        let labels = self.param_labels.clone();
        let pv = |label: &str| -> Option<f64> {
            let idx = labels.iter().position(|l| l == label)?;
            self.pvalues.as_ref().map(|p| p[idx])
        };
        let mut out = String::new();
        for i in 0..k {
            let mut terms = Vec::new();
            for j in 0..k {
                if j != i && self.a[(i, j)] != 0.0 {
                    terms.push((-self.a[(i, j)], format!("e[{}]", self.names[j]), pv(&format!("a{}{}", i + 1, j + 1))));
                }
            }
            for j in 0..k {
                if self.b[(i, j)] != 0.0 {
                    terms.push((self.b[(i, j)], format!("u[{}]", self.shocks[j]), pv(&format!("b{}{}", i + 1, j + 1))));
                }
            }
            let lhs = format!("e[{}] = ", self.names[i]);
            let mut line = lhs.clone();
            let mut below = " ".repeat(lhs.chars().count());
            for (n, (c, var, p)) in terms.iter().enumerate() {
                let coef = if n == 0 {
                    format!("{c:.4} {var}")
                } else if *c < 0.0 {
                    format!(" - {:.4} {var}", -c)
                } else {
                    format!(" + {c:.4} {var}")
                };
                let width = coef.chars().count();
                let pstr = p.map(|p| format!("({p:.4e})")).unwrap_or_default();
                let lead = if n == 0 { 0 } else { 3 };
                let _ = write!(below, "{}{:<w$}", " ".repeat(lead), pstr, w = width - lead);
                line.push_str(&coef);
            }
            out.push_str(&line);
            out.push('\n');
            out.push_str(below.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Maximum-likelihood AB-model fit on the VAR's residual covariance.
pub fn svar_ml_fit(var: &VarFit, pattern: &RestrictionPattern) -> Result<SvarFit> {
    svar_ml_fit_with(var, pattern, &SvarOptions::default())
}

pub fn svar_ml_fit_with(var: &VarFit, pattern: &RestrictionPattern, opts: &SvarOptions) -> Result<SvarFit> {
    svar_fit_covariance(&var.omega_eps, var.t_eff, var.names.clone(), pattern, opts)
}

pub fn svar_fit_covariance(
    omega: &Mat,
    t_eff: usize,
    names: Vec<String>,
    pattern: &RestrictionPattern,
    opts: &SvarOptions,
) -> Result<SvarFit> {
    let k = pattern.k;
    if omega.nrows() != k || omega.ncols() != k || names.len() != k {
        return Err(Error::Config(format!("pattern is {k}×{k} but the covariance is {}×{}", omega.nrows(), omega.ncols())));
    }
    let check = check_identification(pattern);
    if let Identification::Under(missing) = check.status {
        return Err(Error::Identification(if missing > 0 {
            format!(
                "order condition fails: {} restrictions imposed, {} required",
                check.imposed, check.required
            )
        } else {
            "rank condition fails at every evaluation point".to_string()
        }));
    }
    linalg::log_det_pd(omega)?;
    if opts.starts == 0 {
        return Err(Error::Config("at least one optimizer start is required".into()));
    }

    let d: Vec<f64> = omega.diagonal().iter().map(|v| v.sqrt()).collect();
    let dm = Mat::from_diagonal(&Vector::from_vec(d.clone()));
    let dinv = Mat::from_diagonal(&Vector::from_iterator(k, d.iter().map(|v| 1.0 / v)));
    let omega_s = &dinv * omega * &dinv;
    let scaled = pattern.rescaled(&d);
    let to_scaled = |params: &[f64]| {
        let (a, b) = pattern.build(params);
        scaled.pack(&(&dinv * a * &dm), &(&dinv * b))
    };

    let base = cholesky_start(&scaled, &omega_s);
    let starts: Vec<Vec<f64>> = (0..opts.starts)
        .map(|s| {
            if s == 0 {
                return opts.initial.as_deref().map(to_scaled).unwrap_or_else(|| base.clone());
            }
            let mut r = sim::rng_stream(opts.seed, s as u64);
            base.iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    v + opts.perturbation * z
                })
                .collect()
        })
        .collect();
    let results = sim::par_map(starts.len(), |s| {
        bfgs(|x| objective(&scaled, &omega_s, x), starts[s].clone(), opts.max_iter, opts.grad_tol)
    });
    let converged = results.iter().flatten().filter(|m| m.converged).count();
    let best = results
        .iter()
        .flatten()
        .filter(|m| m.converged)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned();
    let Some(best) = best else {
        let fallback = results.iter().flatten().min_by(|a, b| a.value.total_cmp(&b.value));
        let (best_params, best_loglik) = match fallback {
            Some(m) => {
                let (a, b) = unscale(&scaled, &m.x, &dm, &dinv);
                (pattern.pack(&a, &b), concentrated_loglik(&a, &b, omega, t_eff))
            }
            None => (Vec::new(), f64::NEG_INFINITY),
        };
        return Err(Error::Convergence {
            msg: format!("none of {} starts reached gradient norm {:e}", opts.starts, opts.grad_tol),
            best_params,
            best_loglik,
        });
    };

    let (a, mut b) = unscale(&scaled, &best.x, &dm, &dinv);
    normalize_signs(pattern, &mut b);
    let phi0 = linalg::inverse(&a, "A")? * &b;
    let loglik = concentrated_loglik(&a, &b, omega, t_eff);
    Ok(SvarFit {
        shocks: names.iter().map(|n| format!("u_{n}")).collect(),
        names,
        pattern: pattern.clone(),
        params: pattern.pack(&a, &b),
        param_labels: pattern.labels(),
        a,
        b,
        phi0,
        loglik,
        t_eff,
        identification: check.status,
        se: None,
        pvalues: None,
        starts_converged: converged,
        iterations: best.iterations,
        grad_norm: best.grad_norm,
    })
}

fn unscale(scaled: &RestrictionPattern, x: &[f64], dm: &Mat, dinv: &Mat) -> (Mat, Mat) {
    let (a_s, b_s) = scaled.build(x);
    (dm * a_s * dinv, dm * b_s)
}

/// Start from the fixed part of `A` and the Cholesky factor of `A₀ΩA₀'`.
fn cholesky_start(pattern: &RestrictionPattern, omega: &Mat) -> Vec<f64> {
    let zeros = vec![0.0; pattern.free_count()];
    let (a0, _) = pattern.build(&zeros);
    let target = &a0 * omega * a0.transpose();
    let chol = linalg::symmetrize(&target)
        .cholesky()
        .map(|c| c.l())
        .unwrap_or_else(|| Mat::identity(pattern.k, pattern.k));
    pattern.pack(&a0, &chol)
}

/// Flip `B` columns with a negative diagonal, unless a nonzero fixed cell pins the sign.
fn normalize_signs(pattern: &RestrictionPattern, b: &mut Mat) {
    let k = pattern.k;
    for j in 0..k {
        let pinned = (0..k).any(|i| matches!(pattern.b[i * k + j], Cell::Fixed(v) if v != 0.0));
        if !pinned && b[(j, j)] < 0.0 {
            b.column_mut(j).neg_mut();
        }
    }
}

/// LR test of the over-identifying restrictions against the exact
/// decomposition of the VAR covariance, χ² with the over-identification degree.
pub fn overid_lr_test(restricted: &SvarFit, var: &VarFit) -> Result<TestStat> {
    let df = match restricted.identification {
        Identification::Over(q) => q,
        Identification::Just => 0,
        Identification::Under(_) => {
            return Err(Error::Identification("under-identified fit has no LR test".into()))
        }
    };
    let loglik_just = varkit::gaussian_loglik(&var.omega_eps, var.t_eff)?;
    let stat = (2.0 * (loglik_just - restricted.loglik)).max(0.0);
    Ok(overid_lr_pvalue(stat, df))
}

/// χ² reference for an over-identification statistic; zero degrees of
/// freedom (a just-identified fit) yields `p = 1`.
pub fn overid_lr_pvalue(stat: f64, df: usize) -> TestStat {
    if df == 0 {
        return TestStat {
            statistic: stat,
            df: 0.0,
            df2: None,
            pvalue: 1.0,
        };
    }
    TestStat::chi2(stat, df)
}

/// `u_t = B⁻¹Aε_t` for every residual row.
pub fn structural_shocks(fit: &SvarFit, var: &VarFit) -> Result<Mat> {
    shocks_from(&fit.a, &fit.b, &var.residuals)
}

pub fn shocks_from(a: &Mat, b: &Mat, eps: &Mat) -> Result<Mat> {
    let w = linalg::inverse(b, "B")? * a;
    Ok(eps * w.transpose())
}

/// Simulate `Y_t = Σ A_i Y_{t−i} + A⁻¹B u_t` with standard-normal shocks,
/// discarding `burn` initial periods.
pub fn simulate_structural(coefs: &[Mat], a: &Mat, b: &Mat, t: usize, burn: usize, rng: &mut sim::Rng) -> Result<Mat> {
    let k = a.nrows();
    let stab = varkit::stability_of(coefs);
    if !stab.is_stable {
        return Err(Error::Stability(format!(
            "largest companion modulus {:.4} is not below 1",
            stab.moduli[0]
        )));
    }
    let impact = linalg::inverse(a, "A")? * b;
    let u = sim::normal_matrix(rng, t + burn, k);
    let eps = &u * impact.transpose();
    let p = coefs.len();
    let y = varkit::simulate_recursive(&Vector::zeros(k), coefs, &Mat::zeros(p.max(1), k), &eps);
    Ok(y.rows(p + burn, t).into_owned())
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub coefs: Vec<Mat>,
    pub a: Mat,
    pub b: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapResult {
    pub reps: usize,
    pub failures: usize,
    pub seed: u64,
    pub labels: Vec<String>,
    pub se: Vec<f64>,
    /// 2.5% and 97.5% percentiles of each parameter.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(skip)]
    pub replications: Vec<Replication>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub reps: usize,
    pub seed: u64,
    /// Optimizer starts per replication; the first is the point estimate.
    pub starts: usize,
    pub max_failure_rate: f64,
}

impl BootstrapOptions {
    pub fn new(reps: usize, seed: u64) -> Self {
        BootstrapOptions {
            reps,
            seed,
            starts: 3,
            max_failure_rate: 0.1,
        }
    }
}

/// Recursive-design residual bootstrap of the VAR and SVAR estimates.
pub fn bootstrap_se(fit: &SvarFit, var: &VarFit, reps: usize, seed: u64) -> Result<BootstrapResult> {
    bootstrap_with(fit, var, &BootstrapOptions::new(reps, seed))
}

pub fn bootstrap_with(fit: &SvarFit, var: &VarFit, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    if opts.reps < 100 {
        return Err(Error::Config(format!("bootstrap needs at least 100 replications, got {}", opts.reps)));
    }
    let n = var.residuals.nrows();
    let mean = var.residuals.row_mean();
    let centered = Mat::from_fn(n, var.k, |i, j| var.residuals[(i, j)] - mean[j]);
    let svar_opts = SvarOptions {
        starts: opts.starts.max(1),
        initial: Some(fit.params.clone()),
        ..SvarOptions::default()
    };
    let draws: Vec<Option<Replication>> = sim::par_map(opts.reps, |rep| {
        let mut r = sim::rng_stream(opts.seed, rep as u64);
        let idx: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
        let innov = Mat::from_fn(n, var.k, |i, j| centered[(idx[i], j)]);
        let init = var.data.rows(0, var.p.max(1)).into_owned();
        let y = if var.p == 0 {
            let mut y = innov.clone();
            for mut row in y.row_iter_mut() {
                row += var.intercept.transpose();
            }
            y
        } else {
            varkit::simulate_recursive(&var.intercept, &var.coefs, &init, &innov)
        };
        let refit = varkit::var_fit_matrix(&y, var.names.clone(), var.p).ok()?;
        let opts = SvarOptions {
            seed: opts.seed ^ (rep as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            ..svar_opts.clone()
        };
        let s = svar_ml_fit_with(&refit, &fit.pattern, &opts).ok()?;
        Some(Replication {
            coefs: refit.coefs,
            a: s.a,
            b: s.b,
        })
    });
    let failures = draws.iter().filter(|d| d.is_none()).count();
    let rate = failures as f64 / opts.reps as f64;
    if rate > opts.max_failure_rate {
        return Err(Error::Bootstrap(format!(
            "{failures} of {} replications failed ({:.1}% > {:.1}% allowed)",
            opts.reps,
            100.0 * rate,
            100.0 * opts.max_failure_rate
        )));
    }
    let replications: Vec<Replication> = draws.into_iter().flatten().collect();
    let m = replications.len();
    let np = fit.params.len();
    let params: Vec<Vec<f64>> = replications.iter().map(|r| fit.pattern.pack(&r.a, &r.b)).collect();
    let mut se = Vec::with_capacity(np);
    let mut lower = Vec::with_capacity(np);
    let mut upper = Vec::with_capacity(np);
    for j in 0..np {
        let mut col: Vec<f64> = params.iter().map(|p| p[j]).collect();
        let mu = col.iter().sum::<f64>() / m as f64;
        let var_j = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        se.push(var_j.sqrt());
        col.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(&col, 0.025));
        upper.push(quantile_sorted(&col, 0.975));
    }
    Ok(BootstrapResult {
        reps: opts.reps,
        failures,
        seed: opts.seed,
        labels: fit.param_labels.clone(),
        se,
        lower,
        upper,
        replications,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_pattern() -> RestrictionPattern {
        let a: Vec<String> = ["1 0 0 0", "0 1 0 0", "* 0 1 0", "* 0 0 1"].map(String::from).to_vec();
        let b: Vec<String> = ["* 0 0 0", "0 * * 0", "0 0 * *", "0 0 0 *"].map(String::from).to_vec();
        RestrictionPattern::parse(&a, &b).unwrap()
    }

    fn random_pd(r: &mut sim::Rng, k: usize) -> Mat {
        let m = sim::normal_matrix(r, k, k);
        &m * m.transpose() + Mat::identity(k, k) * 0.1
    }

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("y{}", i + 1)).collect()
    }

    #[test]
    fn parses_grids_and_slash_form() {
        let p = paper_pattern();
        assert_eq!(p.free_count(), 8);
        assert_eq!(p.labels(), ["a31", "a41", "b11", "b22", "b23", "b33", "b34", "b44"]);
        let q = RestrictionPattern::parse(
            &["1 0 0 0 / 0 1 0 0 / * 0 1 0 / * 0 0 1".to_string()],
            &["* 0 0 0 / 0 * * 0 / 0 0 * * / 0 0 0 *".to_string()],
        )
        .unwrap();
        assert_eq!(p, q);
        let bad = RestrictionPattern::parse(&["2 0".into(), "0 1".into()], &["* 0".into(), "0 *".into()]);
        assert!(matches!(bad, Err(Error::Config(_))));
        let bad = RestrictionPattern::parse(&["1 x".into(), "0 1".into()], &["* 0".into(), "0 *".into()]);
        assert!(matches!(bad, Err(Error::Config(_))));
        let (ga, gb) = p.to_grid_strings();
        assert_eq!(RestrictionPattern::parse(&ga, &gb).unwrap(), p);
    }

    #[test]
    fn identification_counts() {
        let c = check_identification(&paper_pattern());
        assert_eq!(c.required, 22);
        assert_eq!(c.imposed, 24);
        assert_eq!(c.status, Identification::Over(2));
        assert_eq!(c.rank, RankCondition::Holds);

        assert_eq!(check_identification(&RestrictionPattern::recursive(4)).status, Identification::Just);

        let k = 4;
        let a = RestrictionPattern::recursive(k).a;
        let full = RestrictionPattern::new(k, a, vec![Cell::Free; k * k]).unwrap();
        let c = check_identification(&full);
        assert_eq!(c.status, Identification::Under(6));
        assert_eq!(c.rank, RankCondition::NotEvaluated);
    }

    #[test]
    fn rank_failure_is_detected() {
        // Two free cells in A row 2 and B row 2 that enter Ω only through a
        // common combination: a21 and b21 with ε1 = b11 u1 are not separable.
        let a = vec![Cell::Fixed(1.0), Cell::Fixed(0.0), Cell::Free, Cell::Fixed(1.0)];
        let b = vec![Cell::Free, Cell::Fixed(0.0), Cell::Free, Cell::Fixed(1.0)];
        let p = RestrictionPattern::new(2, a, b).unwrap();
        let c = check_identification(&p);
        assert!(c.order_holds);
        assert_eq!(c.rank, RankCondition::Fails);
        assert_eq!(c.status, Identification::Under(0));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut r = sim::rng(4);
        let omega = random_pd(&mut r, 4);
        let p = paper_pattern();
        let x: Vec<f64> = vec![0.3, -0.2, 1.1, 0.9, 0.2, 0.8, -0.1, 1.3];
        let (_, g) = objective(&p, &omega, &x).unwrap();
        for i in 0..x.len() {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (objective(&p, &omega, &xp).unwrap().0 - objective(&p, &omega, &xm).unwrap().0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "param {i}: {fd} vs {}", g[i]);
        }
        // The objective is the negative concentrated likelihood per observation.
        let (a, b) = p.build(&x);
        let ll = concentrated_loglik(&a, &b, &omega, 10);
        let g0 = objective(&p, &omega, &x).unwrap().0;
        assert!((ll - (-20.0 * (2.0 * PI).ln() - 10.0 * g0)).abs() < 1e-9);
    }

    #[test]
    fn recursive_fit_matches_cholesky() {
        let mut r = sim::rng(11);
        for _ in 0..20 {
            let omega = random_pd(&mut r, 4);
            let fit = svar_fit_covariance(&omega, 100, names(4), &RestrictionPattern::recursive(4), &SvarOptions::default()).unwrap();
            let chol = omega.clone().cholesky().unwrap().l();
            assert!(linalg::max_abs(&(&fit.b - &chol)) < 1e-6, "{} vs {}", fit.b, chol);
            assert_eq!(fit.identification, Identification::Just);
            let rebuilt = &fit.phi0 * fit.phi0.transpose();
            assert!(linalg::max_abs(&(rebuilt - &omega)) < 1e-6);
            let unrestricted = varkit::gaussian_loglik(&omega, 100).unwrap();
            assert!((fit.loglik - unrestricted).abs() < 1e-6);
        }
    }

    #[test]
    fn diagonal_pattern_on_diagonal_covariance() {
        let k = 3;
        let a = RestrictionPattern::recursive(k).a;
        let b = (0..k * k).map(|n| if n / k == n % k { Cell::Free } else { Cell::Fixed(0.0) }).collect();
        let p = RestrictionPattern::new(k, a, b).unwrap();
        let omega = Mat::from_diagonal(&Vector::from_vec(vec![4.0, 0.25, 9.0]));
        let fit = svar_fit_covariance(&omega, 50, names(3), &p, &SvarOptions::default()).unwrap();
        assert_eq!(fit.identification, Identification::Over(3));
        for (i, s) in [2.0, 0.5, 3.0].iter().enumerate() {
            assert!((fit.b[(i, i)] - s).abs() < 1e-7);
        }
    }

    #[test]
    fn under_identified_fit_is_refused() {
        let k = 3;
        let a = RestrictionPattern::recursive(k).a;
        let p = RestrictionPattern::new(k, a, vec![Cell::Free; k * k]).unwrap();
        let err = svar_fit_covariance(&Mat::identity(3, 3), 50, names(3), &p, &SvarOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Identification(_)));
    }

    #[test]
    fn sign_flips_leave_likelihood_unchanged() {
        let mut r = sim::rng(2);
        let omega = random_pd(&mut r, 4);
        let p = paper_pattern();
        let fit = svar_fit_covariance(&omega, 80, names(4), &p, &SvarOptions::default()).unwrap();
        for j in 0..4 {
            let mut b = fit.b.clone();
            b.column_mut(j).neg_mut();
            let ll = concentrated_loglik(&fit.a, &b, &omega, 80);
            assert!((ll - fit.loglik).abs() < 1e-9);
        }
        assert!(fit.b.diagonal().iter().all(|v| *v >= 0.0));
        // A negative starting point converges to the same normalized answer.
        let mut start = fit.params.clone();
        for v in start.iter_mut().skip(2) {
            *v = -*v;
        }
        let opts = SvarOptions {
            initial: Some(start),
            starts: 1,
            ..SvarOptions::default()
        };
        let again = svar_fit_covariance(&omega, 80, names(4), &p, &opts).unwrap();
        assert!(linalg::max_abs(&(&again.b - &fit.b)) < 1e-6);
        assert!(linalg::max_abs(&(&again.a - &fit.a)) < 1e-6);
    }

    #[test]
    fn overid_pvalue_anchor_and_self_test() {
        let t = overid_lr_pvalue(0.0425, 2);
        assert!((t.pvalue - (-0.02125f64).exp()).abs() < 1e-12);
        assert!((t.pvalue - 0.979).abs() < 0.001);

        let mut r = sim::rng(8);
        let y = sim::normal_matrix(&mut r, 200, 3);
        let var = varkit::var_fit_matrix(&y, names(3), 1).unwrap();
        let fit = svar_ml_fit(&var, &RestrictionPattern::recursive(3)).unwrap();
        let lr = overid_lr_test(&fit, &var).unwrap();
        assert!(lr.statistic < 1e-8);
        assert_eq!(lr.pvalue, 1.0);
    }

    #[test]
    fn structural_shock_rescaling_and_round_trip() {
        let a = Mat::identity(2, 2);
        let b = Mat::identity(2, 2) * 2.0;
        let eps = Mat::from_element(5, 2, 2.0);
        let u = shocks_from(&a, &b, &eps).unwrap();
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-15));

        let mut r = sim::rng(21);
        let a1 = Mat::identity(3, 3) * 0.3;
        let b = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 0.8, 0.0, -0.2, 0.3, 0.6]);
        let y = simulate_structural(&[a1], &Mat::identity(3, 3), &b, 5000, 200, &mut r).unwrap();
        let var = varkit::var_fit_matrix(&y, names(3), 1).unwrap();
        let fit = svar_ml_fit(&var, &RestrictionPattern::recursive(3)).unwrap();
        let u = structural_shocks(&fit, &var).unwrap();
        let cov = u.transpose() * &u / u.nrows() as f64;
        assert!(linalg::max_abs(&(cov - Mat::identity(3, 3))) < 0.05);
        let back = &u * fit.phi0.transpose();
        assert!(linalg::max_abs(&(back - &var.residuals)) < 1e-10);
    }

    #[test]
    fn unstable_simulation_is_refused() {
        let mut r = sim::rng(1);
        let err = simulate_structural(&[Mat::identity(2, 2)], &Mat::identity(2, 2), &Mat::identity(2, 2), 60, 10, &mut r);
        assert!(matches!(err, Err(Error::Stability(_))));
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let mut r = sim::rng(5);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.4, 0.7]);
        let y = simulate_structural(&[Mat::identity(2, 2) * 0.4], &Mat::identity(2, 2), &b, 200, 100, &mut r).unwrap();
        let var = varkit::var_fit_matrix(&y, names(2), 1).unwrap();
        let fit = svar_ml_fit(&var, &RestrictionPattern::recursive(2)).unwrap();
        let x = bootstrap_se(&fit, &var, 100, 9).unwrap();
        let z = bootstrap_se(&fit, &var, 100, 9).unwrap();
        assert_eq!(x.se, z.se);
        assert_eq!(x.lower, z.lower);
        assert!(x.se.iter().all(|s| *s > 0.0));
        assert!(matches!(bootstrap_se(&fit, &var, 50, 9), Err(Error::Config(_))));
    }

    #[test]
    fn listing_shows_equations() {
        let p = paper_pattern();
        let mut r = sim::rng(3);
        let omega = random_pd(&mut r, 4);
        let fit = svar_fit_covariance(&omega, 80, names(4), &p, &SvarOptions::default())
            .unwrap()
            .with_shock_names(["TIT", "SDP", "DFL", "DOS"].map(String::from).to_vec())
            .unwrap();
        let s = fit.system_listing();
        assert!(s.contains("e[y3] = "));
        assert!(s.contains("e[y1]"));
        assert!(s.contains("u[DOS]"));
        assert_eq!(s.lines().count(), 8);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert!((quantile_sorted(&v, 0.1) - 1.4).abs() < 1e-12);
    }
}
