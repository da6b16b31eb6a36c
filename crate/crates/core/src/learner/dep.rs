//! Marginal and conditional mutual information between binary term-presence
//! variables, estimated from raw relative frequencies (natural log).
//!
//! Cells with zero count contribute nothing. Sums are grouped so that
//! swapping the two variables yields bit-identical results.

use crate::corpus::{Contingency2, Contingency3};
use crate::error::{Error, Result};

/// A dependency degree in nats, with the sample size it was estimated from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepScore {
    pub value: f64,
    pub sample_size: u64,
}

impl DepScore {
    fn clamped(raw: f64, sample_size: u64) -> Self {
        DepScore {
            value: raw.max(0.0),
            sample_size,
        }
    }

    /// Likelihood-ratio statistic `2·N·dep`.
    pub fn g_statistic(&self) -> f64 {
        2.0 * self.sample_size as f64 * self.value
    }
}

/// `(n_xy / N) · ln(n_xy · n_z / (n_x · n_y))`, zero when `n_xy == 0`.
#[inline]
fn cell_term(n_xy: u64, n_z: u64, n_x: u64, n_y: u64, n: f64) -> f64 {
    if n_xy == 0 {
        return 0.0;
    }
    let joint = n_xy as f64;
    joint / n * ((joint * n_z as f64) / (n_x as f64 * n_y as f64)).ln()
}

/// Unclamped mutual information; may dip marginally below zero through
/// rounding.
pub fn mutual_information(ct: &Contingency2) -> Result<f64> {
    if ct.n == 0 {
        return Err(Error::InvalidArgument("contingency table with N = 0".into()));
    }
    let n = ct.n as f64;
    let (a0, a1, b0, b1) = (ct.row(0), ct.row(1), ct.col(0), ct.col(1));
    let t11 = cell_term(ct.n11(), ct.n, a1, b1, n);
    let t00 = cell_term(ct.n00(), ct.n, a0, b0, n);
    let t10 = cell_term(ct.n10(), ct.n, a1, b0, n);
    let t01 = cell_term(ct.n01(), ct.n, a0, b1, n);
    Ok(t11 + t00 + (t10 + t01))
}

/// Unclamped conditional mutual information of the first two variables given
/// the third.
pub fn conditional_mutual_information(ct: &Contingency3) -> Result<f64> {
    if ct.n == 0 {
        return Err(Error::InvalidArgument("contingency table with N = 0".into()));
    }
    let n = ct.n as f64;
    let c = &ct.cells;
    let mut total = 0.0;
    for k in 0..2 {
        let nk = c[0][0][k] + c[0][1][k] + c[1][0][k] + c[1][1][k];
        let a = |i: usize| c[i][0][k] + c[i][1][k];
        let b = |j: usize| c[0][j][k] + c[1][j][k];
        let t11 = cell_term(c[1][1][k], nk, a(1), b(1), n);
        let t00 = cell_term(c[0][0][k], nk, a(0), b(0), n);
        let t10 = cell_term(c[1][0][k], nk, a(1), b(0), n);
        let t01 = cell_term(c[0][1][k], nk, a(0), b(1), n);
        total += t11 + t00 + (t10 + t01);
    }
    Ok(total)
}

pub fn marginal_dep(ct: &Contingency2) -> Result<DepScore> {
    Ok(DepScore::clamped(mutual_information(ct)?, ct.n))
}

pub fn conditional_dep(ct: &Contingency3) -> Result<DepScore> {
    Ok(DepScore::clamped(conditional_mutual_information(ct)?, ct.n))
}
