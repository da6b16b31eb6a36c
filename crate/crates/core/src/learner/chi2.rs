//! Chi-square independence gate on the G statistic `2·N·Dep`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::learner::dep::DepScore;

/// One of the supported test confidence levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Confidence {
    P90,
    P95,
    P975,
    P99,
    P995,
}

impl Confidence {
    pub const ALL: [Confidence; 5] = [
        Confidence::P90,
        Confidence::P95,
        Confidence::P975,
        Confidence::P99,
        Confidence::P995,
    ];

    pub fn value(self) -> f64 {
        match self {
            Confidence::P90 => 0.90,
            Confidence::P95 => 0.95,
            Confidence::P975 => 0.975,
            Confidence::P99 => 0.99,
            Confidence::P995 => 0.995,
        }
    }

    /// Accepts either a probability (`0.975`) or a percentage (`97.5`).
    pub fn from_f64(value: f64) -> Result<Self> {
        let p = if value > 1.0 { value / 100.0 } else { value };
        Confidence::ALL
            .into_iter()
            .find(|c| (c.value() - p).abs() < 1e-9)
            .ok_or(Error::UnsupportedConfidence(value))
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl FromStr for Confidence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("not a confidence level: {s:?}")))?;
        Confidence::from_f64(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreesOfFreedom {
    One,
    Two,
}

impl DegreesOfFreedom {
    pub fn from_count(df: u32) -> Result<Self> {
        match df {
            1 => Ok(DegreesOfFreedom::One),
            2 => Ok(DegreesOfFreedom::Two),
            other => Err(Error::InvalidArgument(format!("unsupported degrees of freedom {other}"))),
        }
    }
}

// Upper quantiles of the chi-square distribution.
const QUANTILES_DF1: [f64; 5] = [
    2.705_543_454_095_404,
    3.841_458_820_694_124,
    5.023_886_187_314_888,
    6.634_896_601_021_214,
    7.879_438_576_622_417,
];
// For two degrees of freedom the quantile is -2·ln(1 - c).
const QUANTILES_DF2: [f64; 5] = [
    4.605_170_185_988_091,
    5.991_464_547_107_979,
    7.377_758_908_227_871,
    9.210_340_371_976_182,
    10.596_634_733_096_073,
];

pub fn chi_square_quantile(confidence: Confidence, df: DegreesOfFreedom) -> f64 {
    match df {
        DegreesOfFreedom::One => QUANTILES_DF1[confidence.index()],
        DegreesOfFreedom::Two => QUANTILES_DF2[confidence.index()],
    }
}

/// `true` when the data do not reject independence: `G ≤ quantile`.
pub fn independence_test(dep: &DepScore, df: DegreesOfFreedom, confidence: Confidence) -> bool {
    dep.g_statistic() <= chi_square_quantile(confidence, df)
}

/// Smallest dependency value that counts as dependent for a sample size;
/// the test is monotone in `dep` once `N` is fixed.
pub fn dependence_threshold(sample_size: u64, df: DegreesOfFreedom, confidence: Confidence) -> f64 {
    chi_square_quantile(confidence, df) / (2.0 * sample_size as f64)
}
