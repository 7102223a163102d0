//! Seeded random-number helpers shared by simulators and bootstraps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Mat;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under a common seed; used to give every
/// bootstrap replication its own reproducible generator.
pub fn rng_stream(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normals(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn normal_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Mat {
    // Filled row by row so that a T×K draw is the same sequence of period vectors
    // regardless of K's storage order.
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Random walk x_t = x_{t-1} + e_t starting at 0.
pub fn random_walk(rng: &mut Rng, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    normals(rng, n)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

/// AR(1) y_t = phi y_{t-1} + e_t with a burn-in of `burn` draws.
pub fn ar1(rng: &mut Rng, n: usize, phi: f64, burn: usize) -> Vec<f64> {
    let mut y = 0.0;
    let e = normals(rng, n + burn);
    let mut out = Vec::with_capacity(n);
    for (t, et) in e.into_iter().enumerate() {
        y = phi * y + et;
        if t >= burn {
            out.push(y);
        }
    }
    out
}

/// Evaluate `f(0..n)` in order. With the `parallel` feature the calls run on the
/// rayon pool; results are identical because each call owns its inputs.
pub fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
