//! Regenerates the simulated critical values of Hansen's Lc statistic.
//!
//! Usage: `cargo run --release --example hansen_table -- [reps] [T] > src/coint/hansen_table.rs`

use rayon::prelude::*;
use structvar::coint::{simulate_hansen_lc, Deterministic, HANSEN_PVALUES, HANSEN_TABLE_M_MAX};
use structvar::sim;

const SEED: u64 = 19_920_701;

fn quantiles(det: Deterministic, m: usize, reps: u64, t: usize) -> Vec<f64> {
    let stream_base = (det as u64) * 100 + m as u64;
    let mut draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = sim::rng_stream(SEED + stream_base * 1_000_003, r);
            simulate_hansen_lc(m, det, t, &mut rng).expect("simulation draw")
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    HANSEN_PVALUES
        .iter()
        .map(|p| {
            // Upper-tail probability p: the (1 − p) empirical quantile.
            let pos = (1.0 - p) * (draws.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let w = pos - lo as f64;
            draws[lo] * (1.0 - w) + draws[(lo + 1).min(draws.len() - 1)] * w
        })
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let reps: u64 = args.get(1).map_or(20_000, |s| s.parse().expect("reps"));
    let t: usize = args.get(2).map_or(1000, |s| s.parse().expect("T"));
    let render = |det: Deterministic| {
        let mut s = String::new();
        for m in 1..=HANSEN_TABLE_M_MAX {
            let q = quantiles(det, m, reps, t);
            let cells: Vec<String> = q.iter().map(|v| format!("{v:.4}")).collect();
            s.push_str(&format!("    [{}],\n", cells.join(", ")));
        }
        s
    };
    let c = render(Deterministic::Const);
    let ct = render(Deterministic::ConstTrend);
    print!(
        r#"//! Simulated upper-tail critical values of Hansen's Lc statistic.
//!
//! Generated by `cargo run --release --example hansen_table -- {reps} {t}`:
//! {reps} replications with T = {t}, independent random-walk regressors and iid
//! errors. Row `m − 1` holds the critical values for `m` stochastic regressors.

use crate::error::{{Error, Result}};

use super::Deterministic;

/// Upper-tail probabilities of the tabulated critical values.
pub const HANSEN_PVALUES: [f64; 19] = [
    0.01, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.175, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70,
    0.80, 0.90, 0.95, 0.99,
];

/// Largest number of stochastic regressors covered.
pub const HANSEN_TABLE_M_MAX: usize = 5;

#[rustfmt::skip]
const CONST: [[f64; 19]; 5] = [
{c}];

#[rustfmt::skip]
const CONST_TREND: [[f64; 19]; 5] = [
{ct}];

pub(crate) fn critical_values(m: usize, det: Deterministic) -> Result<&'static [f64; 19]> {{
    if !(1..=HANSEN_TABLE_M_MAX).contains(&m) {{
        return Err(Error::Config(format!(
            "Lc table covers 1 to {{HANSEN_TABLE_M_MAX}} stochastic regressors, got {{m}}"
        )));
    }}
    match det {{
        Deterministic::Const => Ok(&CONST[m - 1]),
        Deterministic::ConstTrend => Ok(&CONST_TREND[m - 1]),
        Deterministic::ConstTrendSq => Err(Error::Config(
            "Lc table covers constant and constant-plus-trend specifications only".into(),
        )),
    }}
}}
"#
    );
}
