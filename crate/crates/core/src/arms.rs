//! Finite discrete reward distributions on `[-1, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Accepted deviation of `Σ probs` from 1 at construction.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArmError {
    #[error("support and probs must be nonempty and of equal length (got {support} and {probs})")]
    Shape { support: usize, probs: usize },
    #[error("support value {0} is outside [-1, 1]")]
    OutOfRange(f64),
    #[error("support value {0} appears more than once")]
    Duplicate(f64),
    #[error("probability {0} is negative or not finite")]
    NegativeProb(f64),
    #[error("probabilities sum to {0}, expected 1")]
    BadSum(f64),
}

/// A reward distribution with finite support in `[-1, 1]`.
///
/// Support values are strictly increasing and every stored probability is
/// strictly positive: zero-mass points are dropped by [`ArmSpec::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArm", into = "RawArm")]
pub struct ArmSpec {
    support: Vec<f64>,
    probs: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawArm {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawArm> for ArmSpec {
    type Error = ArmError;
    fn try_from(raw: RawArm) -> Result<Self, Self::Error> {
        ArmSpec::new(&raw.support, &raw.probs)
    }
}

impl From<ArmSpec> for RawArm {
    fn from(arm: ArmSpec) -> Self {
        RawArm {
            support: arm.support,
            probs: arm.probs,
        }
    }
}

/// Risk class of an arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmClass {
    /// Rewards a.s. nonnegative, some positive mass.
    Positive,
    /// Point mass at 0.
    Zero,
    /// Some negative mass but positive mean.
    RiskyPositiveDrift,
    /// Some negative mass and mean ≤ 0.
    NonpositiveDrift,
}

impl ArmSpec {
    /// Validates and builds an arm. Input need not be sorted.
    pub fn new(support: &[f64], probs: &[f64]) -> Result<Self, ArmError> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(ArmError::Shape {
                support: support.len(),
                probs: probs.len(),
            });
        }
        for &v in support {
            if !(-1.0..=1.0).contains(&v) {
                return Err(ArmError::OutOfRange(v));
            }
        }
        for &p in probs {
            if !p.is_finite() || p < 0.0 {
                return Err(ArmError::NegativeProb(p));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(ArmError::BadSum(sum));
        }

        let mut points: Vec<(f64, f64)> = support.iter().copied().zip(probs.iter().copied()).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ArmError::Duplicate(w[0].0));
            }
        }
        points.retain(|&(_, p)| p > 0.0);

        let (support, mut probs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if (sum - 1.0).abs() > 1e-12 {
            let kept: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= kept);
        }
        Ok(Self::from_parts(support, probs))
    }

    /// Multinomial on `{-1, 0, 1}` with probabilities `(p_minus, p_zero, p_plus)`.
    pub fn multinomial(p_minus: f64, p_zero: f64, p_plus: f64) -> Result<Self, ArmError> {
        Self::new(&[-1.0, 0.0, 1.0], &[p_minus, p_zero, p_plus])
    }

    /// Point mass at `value`.
    pub fn point_mass(value: f64) -> Result<Self, ArmError> {
        Self::new(&[value], &[1.0])
    }

    fn from_parts(support: Vec<f64>, probs: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { support, probs, cdf }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Iterator over `(value, probability)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// Probability mass at `value` (0 when `value` is not in the support).
    pub fn prob_of(&self, value: f64) -> f64 {
        self.points().find(|&(v, _)| v == value).map_or(0.0, |(_, p)| p)
    }

    pub fn mean(&self) -> f64 {
        self.points().map(|(v, p)| v * p).sum()
    }

    /// True when the support is contained in `{-1, 0, 1}`.
    pub fn is_ternary(&self) -> bool {
        self.support.iter().all(|&v| v == -1.0 || v == 0.0 || v == 1.0)
    }

    pub fn classify(&self) -> ArmClass {
        let has_negative = self.support[0] < 0.0;
        if !has_negative {
            if self.support.iter().any(|&v| v > 0.0) {
                ArmClass::Positive
            } else {
                ArmClass::Zero
            }
        } else if self.mean() > 0.0 {
            ArmClass::RiskyPositiveDrift
        } else {
            ArmClass::NonpositiveDrift
        }
    }

    /// Draws one reward by inverse CDF; consumes exactly one uniform.
    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        let u = rng.uniform();
        let idx = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1);
        self.support[idx]
    }
}

impl fmt::Display for ArmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ternary() {
            let p = |v| self.prob_of(v);
            write!(f, "Mult({}, {}, {})", p(-1.0), p(0.0), p(1.0))
        } else {
            write!(f, "{{")?;
            for (i, (v, p)) in self.points().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}: {p}")?;
            }
            write!(f, "}}")
        }
    }
}

/// The ten multinomial arms `F^(1)` … `F^(10)` of the reference experiment
/// grid, as `(P(X=-1), P(X=0), P(X=1))`.
pub const REFERENCE_ARMS: [(f64, f64, f64); 10] = [
    (0.4, 0.12, 0.48),
    (0.04, 0.88, 0.08),
    (0.5, 0.1, 0.4),
    (0.48, 0.0, 0.52),
    (0.04, 0.91, 0.05),
    (0.45, 0.0, 0.55),
    (0.05, 0.85, 0.1),
    (0.5, 0.0, 0.5),
    (0.495, 0.0, 0.505),
    (0.049, 0.9, 0.051),
];

/// Reference arm `F^(index)`, 1-based.
///
/// # Panics
/// If `index` is not in `1..=10`.
pub fn reference_arm(index: usize) -> ArmSpec {
    let (m, z, p) = REFERENCE_ARMS[index - 1];
    ArmSpec::multinomial(m, z, p).expect("reference arms are valid")
}
