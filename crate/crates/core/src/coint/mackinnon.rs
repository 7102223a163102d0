//! MacKinnon (1994) response-surface p-values for unit-root and residual-based
//! cointegration τ statistics.

use crate::dist::normal_cdf;
use crate::error::{Error, Result};

use super::Deterministic;

struct Surface {
    star: [f64; 6],
    min: [f64; 6],
    max: [f64; 6],
    small: [[f64; 3]; 6],
    large: [[f64; 4]; 6],
}

const SMALL_SCALE: [f64; 3] = [1.0, 1.0, 1e-2];
const LARGE_SCALE: [f64; 4] = [1.0, 1e-1, 1e-1, 1e-2];

const TAU_C: Surface = Surface {
    star: [-1.61, -2.62, -3.13, -3.47, -3.78, -3.93],
    min: [-18.83, -18.86, -23.48, -28.07, -25.96, -23.27],
    max: [2.74, 0.92, 0.55, 0.61, 0.79, 1.0],
    small: [
        [2.1659, 1.4412, 3.8269],
        [2.92, 1.5012, 3.9796],
        [3.4699, 1.4856, 3.164],
        [3.9673, 1.4777, 2.6315],
        [4.5509, 1.5338, 2.9545],
        [5.1399, 1.6036, 3.4445],
    ],
    large: [
        [1.7339, 9.3202, -1.2745, -1.0368],
        [2.1945, 6.4695, -2.9198, -4.2377],
        [2.5893, 4.5168, -3.6529, -5.0074],
        [3.0387, 4.5452, -3.3666, -4.1921],
        [3.5049, 5.2098, -2.9158, -3.3468],
        [3.9489, 5.8933, -2.5359, -2.721],
    ],
};

const TAU_CT: Surface = Surface {
    star: [-2.89, -3.19, -3.50, -3.65, -3.80, -4.36],
    min: [-16.18, -21.15, -25.37, -26.63, -26.53, -26.18],
    max: [0.7, 0.63, 0.71, 0.93, 1.19, 1.42],
    small: [
        [3.2512, 1.6047, 4.9588],
        [3.6646, 1.5419, 3.6448],
        [4.0983, 1.5173, 2.9898],
        [4.5844, 1.5338, 2.8796],
        [5.0722, 1.5634, 2.9472],
        [5.53, 1.5914, 3.0392],
    ],
    large: [
        [2.5261, 6.1654, -3.7956, -6.0285],
        [2.85, 5.272, -3.6622, -5.1695],
        [3.221, 5.255, -3.2685, -4.1501],
        [3.652, 5.9758, -2.7483, -3.2081],
        [4.0712, 6.6428, -2.3464, -2.546],
        [4.4735, 7.1757, -2.0681, -2.1196],
    ],
};

const TAU_CTT: Surface = Surface {
    star: [-3.21, -3.51, -3.81, -3.83, -4.12, -4.63],
    min: [-17.17, -21.1, -24.33, -24.03, -24.33, -28.22],
    max: [0.54, 0.79, 1.08, 1.43, 3.49, 1.92],
    small: [
        [4.0003, 1.658, 4.8288],
        [4.3534, 1.6016, 3.7947],
        [4.7343, 1.5768, 3.2396],
        [5.214, 1.6077, 3.3449],
        [5.6481, 1.6274, 3.3455],
        [5.9296, 1.5929, 2.8223],
    ],
    large: [
        [3.0778, 4.9529, -4.1477, -5.9359],
        [3.4713, 5.967, -3.2507, -4.2286],
        [3.8637, 6.7852, -2.6286, -3.1381],
        [4.2736, 7.6199, -2.1534, -2.4026],
        [4.6679, 8.2618, -1.822, -1.9147],
        [5.0009, 8.3735, -1.6994, -1.6928],
    ],
};

/// Asymptotic p-value of a τ statistic for `n_vars` variables in the
/// cointegrating relation (1 for a plain unit-root test), `1 ≤ n_vars ≤ 6`.
pub fn mackinnon_p(tau: f64, det: Deterministic, n_vars: usize) -> Result<f64> {
    if !(1..=6).contains(&n_vars) {
        return Err(Error::Config(format!(
            "response surface covers 1 to 6 variables, got {n_vars}"
        )));
    }
    let s = match det {
        Deterministic::Const => &TAU_C,
        Deterministic::ConstTrend => &TAU_CT,
        Deterministic::ConstTrendSq => &TAU_CTT,
    };
    let i = n_vars - 1;
    if tau.is_nan() {
        return Ok(f64::NAN);
    }
    if tau > s.max[i] {
        return Ok(1.0);
    }
    if tau < s.min[i] {
        return Ok(0.0);
    }
    let poly = |c: &[f64], scale: &[f64]| {
        c.iter()
            .zip(scale)
            .enumerate()
            .map(|(k, (c, s))| c * s * tau.powi(k as i32))
            .sum::<f64>()
    };
    let z = if tau <= s.star[i] {
        poly(&s.small[i], &SMALL_SCALE)
    } else {
        poly(&s.large[i], &LARGE_SCALE)
    };
    Ok(normal_cdf(z))
}
