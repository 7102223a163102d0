//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value cutoff below which a design matrix is treated as singular.
pub const RANK_TOL: f64 = 1e-12;

/// Least-squares solution of `x * b = y` through the SVD.
///
/// Fails with [`Error::Singular`] when `x` is numerically rank deficient.
pub fn lstsq(x: &Mat, y: &Mat) -> Result<Mat> {
    if x.nrows() != y.nrows() {
        return Err(Error::Length(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.nrows()
        )));
    }
    if x.ncols() == 0 {
        return Ok(Mat::zeros(0, y.ncols()));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RANK_TOL {
        return Err(Error::Singular(format!(
            "design matrix is rank deficient (singular value ratio {:.3e})",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    svd.solve(y, 0.0).map_err(|e| Error::Singular(e.to_string()))
}

/// Minimum-norm least squares; singular directions below `rcond * smax` are dropped.
pub fn lstsq_pinv(x: &Mat, y: &Mat, rcond: f64) -> Mat {
    if x.ncols() == 0 {
        return Mat::zeros(0, y.ncols());
    }
    let svd = x.clone().svd(true, true);
    let eps = rcond * svd.singular_values.max();
    svd.solve(y, eps).unwrap_or_else(|_| Mat::zeros(x.ncols(), y.ncols()))
}

/// Moore-Penrose pseudo-inverse with relative cutoff.
pub fn pinv(m: &Mat, rcond: f64) -> Mat {
    let svd = m.clone().svd(true, true);
    let eps = rcond * svd.singular_values.max();
    svd.pseudo_inverse(eps).unwrap_or_else(|_| Mat::zeros(m.ncols(), m.nrows()))
}

pub fn inverse(m: &Mat, what: &str) -> Result<Mat> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// 2-norm condition number; `inf` for singular input.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Log-determinant of a symmetric positive-definite matrix.
pub fn log_det_pd(m: &Mat) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Sign and log-magnitude of a general determinant via LU.
pub fn signed_log_det(m: &Mat) -> (f64, f64) {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut sign = if permutation_parity(&lu) { -1.0 } else { 1.0 };
    let mut logabs = 0.0;
    for d in u.diagonal().iter() {
        if *d == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if *d < 0.0 {
            sign = -sign;
        }
        logabs += d.abs().ln();
    }
    (sign, logabs)
}

fn permutation_parity(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> bool {
    lu.p().determinant::<f64>() < 0.0
}

/// Symmetrize and lift eigenvalues above `-tol` to zero. Returns the matrix and
/// whether any eigenvalue had to be clamped.
pub fn clamp_psd(m: &Mat, tol: f64) -> (Mat, bool) {
    let s = symmetrize(m);
    let eig = s.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= -tol) {
        return (s, false);
    }
    let vals = eig.eigenvalues.map(|l| l.max(0.0));
    let rebuilt = &eig.eigenvectors * Mat::from_diagonal(&vals) * eig.eigenvectors.transpose();
    (symmetrize(&rebuilt), true)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Column-stack slices into a matrix.
pub fn from_columns(cols: &[&[f64]]) -> Mat {
    let n = cols.first().map_or(0, |c| c.len());
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
    let n = rows.len();
    let k = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, k, |i, j| rows[i][j])
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Serde adapter storing a matrix as a list of rows.
pub mod serde_rows {
    use super::{from_rows, to_rows, Mat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Ok(from_rows(&rows))
    }
}

pub mod serde_rows_vec {
    use super::{from_rows, to_rows, Mat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat>, D::Error> {
        let all = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
        Ok(all.iter().map(|r| from_rows(r)).collect())
    }
}

pub mod serde_vector {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_coefficients() {
        let x = Mat::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = Mat::from_fn(6, 1, |i, _| 2.0 + 3.0 * i as f64);
        let b = lstsq(&x, &y).unwrap();
        assert!((b[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((b[(1, 0)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_flags_collinear_design() {
        let x = Mat::from_fn(5, 2, |i, _| i as f64);
        let y = Mat::from_element(5, 1, 1.0);
        assert!(matches!(lstsq(&x, &y), Err(Error::Singular(_))));
    }

    #[test]
    fn signed_log_det_matches_determinant() {
        let m = Mat::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 0.5, 0.0, 3.0, 1.0, 4.0]);
        let (sign, logabs) = signed_log_det(&m);
        let det = m.determinant();
        assert!((sign * logabs.exp() - det).abs() < 1e-12);
    }

    #[test]
    fn clamp_psd_lifts_negative_eigenvalues() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (c, clamped) = clamp_psd(&m, 1e-10);
        assert!(clamped);
        assert!(c.symmetric_eigenvalues().min() >= -1e-12);
    }
}
