//! Tail probabilities of the reference distributions used by the tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

/// Upper tail of a chi-square with `df` degrees of freedom. `df == 0` gives 1.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    let d = ChiSquared::new(df).expect("positive df");
    clamp01(d.sf(stat))
}

/// Upper quantile of a chi-square: the `x` with `chi2_sf(x, df) = alpha`.
pub fn chi2_isf(alpha: f64, df: f64) -> f64 {
    let d = ChiSquared::new(df).expect("positive df");
    d.inverse_cdf(1.0 - alpha)
}

pub fn f_sf(stat: f64, df1: f64, df2: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    let d = FisherSnedecor::new(df1, df2).expect("positive df");
    clamp01(d.sf(stat))
}

/// Two-sided Student-t p-value.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let d = StudentsT::new(0.0, 1.0, df).expect("positive df");
    clamp01(2.0 * d.sf(t.abs()))
}

/// Two-sided standard normal p-value.
pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z.is_infinite() {
        return 0.0;
    }
    clamp01(2.0 * std_normal().sf(z.abs()))
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}
