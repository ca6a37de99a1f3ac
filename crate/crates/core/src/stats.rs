//! Scalar descriptors of type and pattern fields.
//!
//! All logarithms are natural. Permutation entropy is normalized by `ln 24`;
//! the Jensen-Shannon bracket of the complexity is evaluated with raw
//! Shannon entropies (nats) and divided by its maximum
//! `Q_max = (ln 96 - (25/24) ln 25) / 2`.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par::Execution;
use crate::pattern::{extract_fields_with, Delay, PatternField, TieBreakPolicy, TypeField, PATTERN_COUNT};

/// Relative frequencies of the three types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeHistogram {
    pub q: [f64; 3],
    /// Number of windows `U`.
    pub count: u64,
}

/// Relative frequencies of the 24 patterns, position `k` holding pattern `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternHistogram {
    pub p: [f64; PATTERN_COUNT],
    pub count: u64,
}

impl TypeHistogram {
    pub fn from_counts(counts: [u64; 3]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("type field has no windows"));
        }
        Ok(Self {
            q: counts.map(|c| c as f64 / total as f64),
            count: total,
        })
    }

    /// Builds a histogram from frequencies; they must be non-negative and sum to 1.
    pub fn from_frequencies(q: [f64; 3], count: u64) -> Result<Self> {
        check_distribution(&q)?;
        Ok(Self { q, count })
    }

    pub fn q1(&self) -> f64 {
        self.q[0]
    }

    pub fn q2(&self) -> f64 {
        self.q[1]
    }

    pub fn q3(&self) -> f64 {
        self.q[2]
    }
}

impl PatternHistogram {
    pub fn from_counts(counts: [u64; PATTERN_COUNT]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("pattern field has no windows"));
        }
        Ok(Self {
            p: counts.map(|c| c as f64 / total as f64),
            count: total,
        })
    }

    pub fn from_frequencies(p: [f64; PATTERN_COUNT], count: u64) -> Result<Self> {
        check_distribution(&p)?;
        Ok(Self { p, count })
    }

    pub fn uniform() -> Self {
        Self {
            p: [1.0 / PATTERN_COUNT as f64; PATTERN_COUNT],
            count: PATTERN_COUNT as u64,
        }
    }

    /// Sums of the three blocks of eight patterns.
    pub fn block_sums(&self) -> [f64; 3] {
        let mut q = [0.0; 3];
        for (k, &p) in self.p.iter().enumerate() {
            q[k / 8] += p;
        }
        q
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidInput(format!("frequencies outside [0, 1]: {p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("frequencies sum to {sum}, not 1")));
    }
    Ok(())
}

pub fn type_histogram(field: &TypeField) -> Result<TypeHistogram> {
    TypeHistogram::from_counts(field.counts())
}

pub fn pattern_histogram(field: &PatternField) -> Result<PatternHistogram> {
    PatternHistogram::from_counts(field.counts())
}

/// Smoothness `q1 - 1/3` and curve structure `q2 - q3`.
pub fn tau_kappa(h: &TypeHistogram) -> (f64, f64) {
    (h.q[0] - 1.0 / 3.0, h.q[1] - h.q[2])
}

/// `(q3 - 1/3, q1 - q2)`: an uncorrelated but less discriminating pair.
pub fn alt_params(h: &TypeHistogram) -> (f64, f64) {
    (h.q[2] - 1.0 / 3.0, h.q[0] - h.q[1])
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
fn shannon(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum()
}

/// Permutation entropy normalized to `[0, 1]`.
pub fn permutation_entropy(h: &PatternHistogram) -> f64 {
    let s = shannon(h.p) / (PATTERN_COUNT as f64).ln();
    if s <= 0.0 {
        0.0
    } else {
        s.min(1.0)
    }
}

/// Maximum Jensen-Shannon bracket for 24 patterns, in nats.
pub fn js_max() -> f64 {
    0.5 * (96f64.ln() - (25.0 / 24.0) * 25f64.ln())
}

/// Normalized Jensen-Shannon divergence from the uniform distribution.
pub fn js_divergence(h: &PatternHistogram) -> f64 {
    let n = PATTERN_COUNT as f64;
    let mixed = h.p.map(|x| 0.5 * (x + 1.0 / n));
    let bracket = shannon(mixed) - 0.5 * shannon(h.p) - 0.5 * n.ln();
    (bracket / js_max()).max(0.0)
}

/// Statistical complexity `S * Q`.
pub fn js_complexity(h: &PatternHistogram) -> f64 {
    permutation_entropy(h) * js_divergence(h)
}

/// All descriptors of one grid at one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub delay: Delay,
    /// Number of windows `U`.
    pub count: u64,
    pub q: [f64; 3],
    pub tau: f64,
    pub kappa: f64,
    pub entropy: f64,
    pub complexity: f64,
    pub patterns: PatternHistogram,
}

impl FeatureVector {
    pub fn from_fields(types: &TypeField, patterns: &PatternField) -> Result<Self> {
        let th = type_histogram(types)?;
        let ph = pattern_histogram(patterns)?;
        Ok(Self::from_histograms(types.delay(), &th, &ph))
    }

    pub fn from_histograms(delay: Delay, th: &TypeHistogram, ph: &PatternHistogram) -> Self {
        let (tau, kappa) = tau_kappa(th);
        Self {
            delay,
            count: th.count,
            q: th.q,
            tau,
            kappa,
            entropy: permutation_entropy(ph),
            complexity: js_complexity(ph),
            patterns: *ph,
        }
    }

    pub fn type_histogram(&self) -> TypeHistogram {
        TypeHistogram {
            q: self.q,
            count: self.count,
        }
    }
}

/// Full pipeline: tie breaking, field extraction, histograms, descriptors.
pub fn analyze(grid: &Grid, d: usize, policy: &TieBreakPolicy) -> Result<FeatureVector> {
    analyze_with(grid, Delay::isotropic(d), policy, Execution::default())
}

pub fn analyze_with(grid: &Grid, delay: Delay, policy: &TieBreakPolicy, exec: Execution) -> Result<FeatureVector> {
    let (_, patterns) = extract_fields_with(grid, delay, policy, exec)?;
    let ph = pattern_histogram(&patterns)?;
    let th = TypeHistogram::from_counts(type_counts_of(&patterns))?;
    Ok(FeatureVector::from_histograms(delay, &th, &ph))
}

fn type_counts_of(patterns: &PatternField) -> [u64; 3] {
    let counts = patterns.counts();
    let mut t = [0u64; 3];
    for (k, c) in counts.iter().enumerate() {
        t[k / 8] += c;
    }
    t
}

/// Analyzes several grids at once, one result per grid in input order.
pub fn analyze_batch(grids: &[Grid], delay: Delay, policy: &TieBreakPolicy, exec: Execution) -> Vec<Result<FeatureVector>> {
    // inner extraction stays sequential; the batch is the parallel axis
    crate::par::map_slice(exec, grids, |g| analyze_with(g, delay, policy, Execution::Sequential))
}
