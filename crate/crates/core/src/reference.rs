//! Published reference values for the bundled four-variable system
//! (current account to GDP, native and expatriate age-dependency rates,
//! real growth). They serve as algebraic oracles and seed the synthetic DGP.

use crate::linalg::Mat;

pub const VARIABLES: [&str; 4] = ["cay", "s_adr", "ns_adr", "g_gdp"];
pub const SHOCKS: [&str; 4] = ["TIT", "SDP", "DFL", "DOS"];

/// Printed impact responses Φ₀.
pub const PHI0: [[f64; 4]; 4] = [
    [0.0959, 0.0000, 0.0000, 0.0000],
    [0.0000, 0.0143, -0.0053, 0.0000],
    [0.0035, 0.0000, 0.0079, 0.0023],
    [0.0137, 0.0000, 0.0000, 0.0385],
];

pub const PHI1: [[f64; 4]; 4] = [
    [0.0130, -0.0102, 0.0132, 0.0112],
    [0.0007, 0.0140, -0.0096, -0.0030],
    [0.0027, 0.0004, 0.0074, 0.0026],
    [-0.0160, -0.0025, 0.0002, -0.0164],
];

pub const PHI2: [[f64; 4]; 4] = [
    [0.0000, -0.0106, 0.0167, 0.0024],
    [0.0003, 0.0132, -0.0132, -0.0033],
    [0.0024, 0.0009, 0.0068, 0.0022],
    [0.0050, -0.0004, -0.0005, 0.0061],
];

/// Printed long-run impact matrix Ψ∞.
pub const PSI_INF: [[f64; 4]; 4] = [
    [0.1614, 0.0069, 0.1662, 0.0595],
    [-0.0573, 0.0308, -0.2025, -0.0630],
    [0.0117, 0.0246, 0.0077, 0.0037],
    [0.0041, -0.0059, 0.0122, 0.0302],
];

/// Estimated structural equations, written as
/// `ε₃ = a31·ε₁ + b33·u₃ + b34·u₄` and `ε₄ = a41·ε₁ + b44·u₄`.
pub const A31: f64 = -0.0365;
pub const A41: f64 = -0.1424;
pub const B11: f64 = 0.0959;
pub const B22: f64 = 0.0143;
pub const B23: f64 = -0.0052;
pub const B33: f64 = 0.0078;
pub const B34: f64 = 0.0023;
pub const B44: f64 = 0.0385;

/// Restriction grids of the over-identified AB model.
pub const PATTERN_A: [&str; 4] = ["1 0 0 0", "0 1 0 0", "* 0 1 0", "* 0 0 1"];
pub const PATTERN_B: [&str; 4] = ["* 0 0 0", "0 * * 0", "0 0 * *", "0 0 0 *"];

/// Over-identification LR statistic and its degrees of freedom.
pub const OVERID_LR: f64 = 0.0425;
pub const OVERID_DF: usize = 2;
pub const OVERID_P: f64 = 0.979;

/// Forecast-error variance shares (percent) ten periods ahead; rows are
/// variables, columns are shocks.
pub const FEVD_H10: [[f64; 4]; 4] = [
    [69.92, 3.10, 23.98, 3.00],
    [2.81, 21.64, 69.31, 6.24],
    [12.85, 9.98, 69.56, 7.61],
    [20.80, 0.48, 0.22, 78.50],
];

/// Upper triangle (row by row) of the VAR residual correlation matrix.
pub const RESID_CORR_UPPER: [f64; 10] = [
    1.0, 0.00556, 0.39096, 0.33449, //
    1.0, -0.31024, -0.02763, //
    1.0, 0.38270, //
    1.0,
];

/// Upper triangle (row by row) of the VAR residual covariance matrix.
pub const RESID_COV_UPPER: [f64; 10] = [
    0.00919, 8.11e-6, 0.00033, 0.00131, //
    0.00023, -4.21e-5, -1.72e-5, //
    7.96e-5, 0.00014, //
    0.00167,
];

pub const LM_DIAG: f64 = 20.33;
pub const LM_DIAG_T: usize = 40;
pub const LR_DIAG: f64 = 21.03;
pub const LR_DIAG_T: usize = 42;
pub const CHI2_6_CRIT_5PCT: f64 = 12.59;

/// Park variable-addition statistic with two added trend powers.
pub const PARK_STAT: f64 = 8.04;
pub const PARK_P: f64 = 0.018;

/// Descriptive-statistics sample size and, per column, (name, skewness,
/// kurtosis, Jarque–Bera).
pub const STATS_T: usize = 42;
pub const STATS: [(&str, f64, f64, f64); 11] = [
    ("cayr", 0.25236, 1.77051, 3.09117),
    ("g_gdp_r", -1.10866, 4.06558, 10.59086),
    ("0-24_ns", 1.44233, 4.99893, 21.55476),
    ("0-24_s", -1.11473, 3.44712, 9.04823),
    ("0-24_to", -0.95745, 3.27114, 6.54565),
    ("25-64_ns", -1.57650, 5.19635, 25.83946),
    ("25-64_s", 1.12440, 3.31538, 9.02402),
    ("25-64_to", 0.81459, 3.06900, 4.65320),
    ("65+_ns", 1.04607, 3.31071, 7.82884),
    ("65+_s", 0.68185, 2.86438, 3.28664),
    ("65+_to", 1.14416, 3.63311, 9.86517),
];

/// Correlation coefficients with their printed two-sided p-values (T = 42).
pub const CORRELATIONS: [(f64, f64); 51] = [
    (0.4848, 0.0011),
    (0.2392, 0.1271),
    (0.0027, 0.9862),
    (-0.4061, 0.0076),
    (-0.3299, 0.0328),
    (0.4205, 0.0055),
    (-0.2273, 0.1476),
    (-0.3114, 0.0447),
    (0.7095, 1.4e-7),
    (0.9263, 1.5e-18),
    (-0.2519, 0.1075),
    (-0.0065, 0.9673),
    (-0.9991, 1.1e-56),
    (-0.3908, 0.0105),
    (-0.6879, 4.8e-7),
    (0.3987, 0.0089),
    (0.3367, 0.0292),
    (-0.4522, 0.0026),
    (-0.9988, 5.4e-54),
    (-0.9397, 3.1e-20),
    (0.4236, 0.0052),
    (0.2072, 0.1879),
    (0.3117, 0.0444),
    (-0.7386, 2.3e-8),
    (-0.9059, 1.6e-16),
    (-0.9984, 1.8e-51),
    (0.7189, 8.2e-8),
    (0.9218, 4.6e-18),
    (0.3845, 0.0119),
    (0.0805, 0.6124),
    (0.4717, 0.0016),
    (-0.4161, 0.0061),
    (-0.1039, 0.5126),
    (-0.5084, 0.0006),
    (0.3785, 0.0134),
    (0.0511, 0.7480),
    (0.2246, 0.1527),
    (-0.0717, 0.6518),
    (0.5508, 0.0002),
    (-0.2146, 0.1723),
    (0.0903, 0.5693),
    (-0.5773, 6.3e-5),
    (0.1664, 0.2922),
    (-0.1450, 0.3594),
    (0.8270, 1.5e-11),
    (0.2502, 0.1100),
    (-0.1197, 0.4502),
    (0.7427, 1.8e-8),
    (0.0003, 0.9983),
    (0.3385, 0.0283),
    (-0.7652, 3.6e-9),
];

/// Values quoted in the narrative for individual cells, as (row, col, value).
pub const PHI0_QUOTED: [(usize, usize, f64); 2] = [(1, 2, -0.0053), (2, 0, -0.0035)];
pub const PSI_INF_QUOTED: [(usize, usize, f64); 4] =
    [(1, 2, -0.2025), (3, 2, -0.0122), (3, 1, 0.0059), (2, 0, -0.0117)];

pub fn mat(rows: &[[f64; 4]; 4]) -> Mat {
    Mat::from_fn(4, 4, |i, j| rows[i][j])
}

/// `A` in `Aε = Bu` for the estimated equations (`A[i][j] = −a_ij` off the diagonal).
pub fn structural_a() -> Mat {
    let mut a = Mat::identity(4, 4);
    a[(2, 0)] = -A31;
    a[(3, 0)] = -A41;
    a
}

pub fn structural_b() -> Mat {
    Mat::from_row_slice(4, 4, &[
        B11, 0.0, 0.0, 0.0, //
        0.0, B22, B23, 0.0, //
        0.0, 0.0, B33, B34, //
        0.0, 0.0, 0.0, B44,
    ])
}

/// `Â₁ = Φ₁Φ₀⁻¹` from the printed impulse responses.
pub fn var_coefficient() -> Mat {
    let phi0_inv = mat(&PHI0).try_inverse().expect("printed impact matrix is invertible");
    mat(&PHI1) * phi0_inv
}
