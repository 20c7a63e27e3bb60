//! Null-invariant correlation measures and label classification.
//!
//! All five supported measures are generalized means of the conditional
//! probabilities `P(A|a_i) = sup(A) / sup(a_i)`, so for the same inputs they
//! are totally ordered:
//!
//! ```text
//! all-confidence <= coherence <= cosine <= kulc <= max-confidence
//!      minimum       harmonic    geometric  arithmetic    maximum
//! ```
//!
//! None of them depends on the total transaction count, which makes the
//! values stable under any number of null transactions. `Lift` is kept only
//! as a counter-example: [`lift_demo`] shows how an expectation-based verdict
//! flips when null transactions are added.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("correlation needs at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("item support must be positive")]
    ZeroItemSupport,
    #[error("itemset support {sup} exceeds item support {item_sup}")]
    SupExceedsItemSup { sup: u64, item_sup: u64 },
    #[error("measure `{0}` is not null-invariant and cannot be used for mining")]
    NotNullInvariant(MeasureKind),
    #[error("total transaction count must be positive")]
    ZeroN,
    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("epsilon {epsilon} must be strictly below gamma {gamma}")]
    EpsilonNotBelowGamma { gamma: f64, epsilon: f64 },
    #[error("minimum-support list is empty")]
    EmptyMinsup,
    #[error("minimum support {0} out of (0, 1]")]
    MinsupOutOfRange(f64),
    #[error("minimum supports must be non-increasing per level: {prev} followed by {next}")]
    MinsupIncreasing { prev: f64, next: f64 },
}

/// Correlation measure selector.
///
/// The first five are null-invariant and valid for mining; `Lift` exists only
/// for the expectation-based demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    AllConfidence,
    Coherence,
    Cosine,
    Kulc,
    MaxConfidence,
    Lift,
}

impl MeasureKind {
    pub const NULL_INVARIANT: [MeasureKind; 5] = [
        MeasureKind::AllConfidence,
        MeasureKind::Coherence,
        MeasureKind::Cosine,
        MeasureKind::Kulc,
        MeasureKind::MaxConfidence,
    ];

    pub fn is_null_invariant(self) -> bool {
        !matches!(self, MeasureKind::Lift)
    }

    /// Name accepted and printed by the command-line interface.
    pub fn cli_name(self) -> &'static str {
        match self {
            MeasureKind::AllConfidence => "allconf",
            MeasureKind::Coherence => "coherence",
            MeasureKind::Cosine => "cosine",
            MeasureKind::Kulc => "kulc",
            MeasureKind::MaxConfidence => "maxconf",
            MeasureKind::Lift => "lift",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for MeasureKind {
    type Err = String;

    /// Parses the five mineable measure names (`lift` is rejected).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "allconf" => Ok(MeasureKind::AllConfidence),
            "coherence" => Ok(MeasureKind::Coherence),
            "cosine" => Ok(MeasureKind::Cosine),
            "kulc" => Ok(MeasureKind::Kulc),
            "maxconf" => Ok(MeasureKind::MaxConfidence),
            other => Err(format!(
                "unknown measure `{other}` (expected allconf|coherence|cosine|kulc|maxconf)"
            )),
        }
    }
}

/// Correlation label of a frequent itemset relative to the `gamma`/`epsilon`
/// thresholds. Infrequent itemsets are always `Neither`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrLabel {
    Positive,
    Negative,
    Neither,
}

impl CorrLabel {
    /// The alternation partner: positive flips to negative and back.
    pub fn opposite(self) -> Option<CorrLabel> {
        match self {
            CorrLabel::Positive => Some(CorrLabel::Negative),
            CorrLabel::Negative => Some(CorrLabel::Positive),
            CorrLabel::Neither => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            CorrLabel::Positive => 'P',
            CorrLabel::Negative => 'N',
            CorrLabel::Neither => '-',
        }
    }
}

/// Mining thresholds: positive bound `gamma`, negative bound `epsilon`, and
/// one minimum-support fraction per taxonomy level (non-increasing from the
/// top level down).
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    gamma: f64,
    epsilon: f64,
    minsup: Vec<f64>,
}

impl Thresholds {
    pub fn new(gamma: f64, epsilon: f64, minsup: Vec<f64>) -> Result<Self, MeasureError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(MeasureError::InvalidGamma(gamma));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(MeasureError::InvalidEpsilon(epsilon));
        }
        if epsilon >= gamma {
            return Err(MeasureError::EpsilonNotBelowGamma { gamma, epsilon });
        }
        if minsup.is_empty() {
            return Err(MeasureError::EmptyMinsup);
        }
        for &t in &minsup {
            if !(t > 0.0 && t <= 1.0) {
                return Err(MeasureError::MinsupOutOfRange(t));
            }
        }
        for w in minsup.windows(2) {
            if w[1] > w[0] {
                return Err(MeasureError::MinsupIncreasing { prev: w[0], next: w[1] });
            }
        }
        Ok(Thresholds { gamma, epsilon, minsup })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of levels the minimum-support list covers.
    pub fn levels(&self) -> usize {
        self.minsup.len()
    }

    /// Minimum-support fraction for 1-based `level`.
    pub fn theta(&self, level: usize) -> f64 {
        assert!(level >= 1 && level <= self.minsup.len(), "level {level} out of range");
        self.minsup[level - 1]
    }

    /// Absolute frequency threshold `ceil(theta_h * n)`; ties count as frequent.
    pub fn min_count(&self, level: usize, n: u64) -> u64 {
        (self.theta(level) * n as f64).ceil() as u64
    }

    /// Labels a correlation value. Comparisons are exact: no tolerance band is
    /// applied around `gamma` or `epsilon`.
    pub fn classify(&self, level: usize, value: f64, sup: u64, n: u64) -> CorrLabel {
        if n == 0 || sup < self.min_count(level, n) {
            return CorrLabel::Neither;
        }
        if value >= self.gamma {
            CorrLabel::Positive
        } else if value <= self.epsilon {
            CorrLabel::Negative
        } else {
            CorrLabel::Neither
        }
    }
}

/// Correlation of a k-itemset with support `sup_a` whose items have supports
/// `item_sups`. Returns a value in `[0, 1]`; `sup_a = 0` yields `0.0` for
/// every measure (the limit value).
pub fn corr(kind: MeasureKind, sup_a: u64, item_sups: &[u64]) -> Result<f64, MeasureError> {
    if !kind.is_null_invariant() {
        return Err(MeasureError::NotNullInvariant(kind));
    }
    if item_sups.len() < 2 {
        return Err(MeasureError::TooFewItems(item_sups.len()));
    }
    for &s in item_sups {
        if s == 0 {
            return Err(MeasureError::ZeroItemSupport);
        }
        if s < sup_a {
            return Err(MeasureError::SupExceedsItemSup { sup: sup_a, item_sup: s });
        }
    }
    if sup_a == 0 {
        return Ok(0.0);
    }
    let k = item_sups.len() as f64;
    let a = sup_a as f64;
    let value = match kind {
        MeasureKind::AllConfidence => {
            let max = *item_sups.iter().max().expect("non-empty");
            a / max as f64
        }
        MeasureKind::Coherence => {
            // Harmonic mean of the conditionals: k * sup(A) / sum(sup(a_i)).
            let sum: u64 = item_sups.iter().sum();
            k * a / sum as f64
        }
        MeasureKind::Cosine => {
            let mut prod = 1.0_f64;
            for &s in item_sups {
                prod *= a / s as f64;
            }
            prod.powf(1.0 / k)
        }
        MeasureKind::Kulc => item_sups.iter().map(|&s| a / s as f64).sum::<f64>() / k,
        MeasureKind::MaxConfidence => {
            let min = *item_sups.iter().min().expect("non-empty");
            a / min as f64
        }
        MeasureKind::Lift => unreachable!("rejected above"),
    };
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftVerdict {
    Positive,
    Negative,
    Independent,
}

impl fmt::Display for LiftVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiftVerdict::Positive => "positive",
            LiftVerdict::Negative => "negative",
            LiftVerdict::Independent => "independent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftDemo {
    pub expected: f64,
    pub verdict: LiftVerdict,
}

/// Expectation-based correlation verdict for a pair, kept as a demonstration
/// of why such measures are unusable here: the verdict depends on the total
/// transaction count `n`, so null transactions swing it.
pub fn lift_demo(sup_a: u64, sup_b: u64, sup_ab: u64, n: u64) -> Result<LiftDemo, MeasureError> {
    if n == 0 {
        return Err(MeasureError::ZeroN);
    }
    let expected = sup_a as f64 * sup_b as f64 / n as f64;
    let actual = sup_ab as f64;
    let verdict = if actual > expected {
        LiftVerdict::Positive
    } else if actual < expected {
        LiftVerdict::Negative
    } else {
        LiftVerdict::Independent
    };
    Ok(LiftDemo { expected, verdict })
}
