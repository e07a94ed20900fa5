//! Three-series conditions and finite-horizon convergence diagnostics for
//! random series `Σ X_k` with independent, closed-form scaled factors.
//!
//! A finite computation cannot certify convergence of an infinite series,
//! so every diagnostic here returns traces over a horizon `N` together with
//! a trend verdict. The thresholds behind the verdicts are parameters.
//!
//! Almost-sure convergence is not computed. When the upper capacity is
//! countably sub-additive, convergence in capacity of the series transfers
//! to the almost-sure mode, so the in-capacity diagnostics below are the
//! computable side of that statement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::{DpEngine, DpError, IndependentSequence, PathEvent, PathFunctional, Statistic};
use crate::functions::TestFunction;
use crate::space::{AmbiguitySet, CapacityPair, CoreError, Event, TruncationLevel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("generator produced an invalid factor at n = {n}: {source}")]
    InvalidFactor { n: usize, source: CoreError },
    #[error("scale a_{n} = {value} is not finite")]
    NonFiniteScale { n: usize, value: f64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("pair (m = {m}, n = {n}) must satisfy m <= n <= {horizon}")]
    InvalidPair { m: usize, n: usize, horizon: usize },
    #[error("checkpoint {n} is outside 1..={horizon}")]
    InvalidCheckpoint { n: usize, horizon: usize },
    #[error("eps must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Dp(#[from] DpError),
}

pub type Result<T, E = SeriesError> = std::result::Result<T, E>;

/// `a_k` as a closed-form function of the 1-based index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleRule {
    /// `a_k = base^k`.
    Geometric { base: f64 },
    /// `a_k = k^exponent`.
    Power { exponent: f64 },
    Constant { value: f64 },
}

impl ScaleRule {
    pub fn at(self, k: usize) -> f64 {
        match self {
            ScaleRule::Geometric { base } => base.powi(k as i32),
            ScaleRule::Power { exponent } => (k as f64).powf(exponent),
            ScaleRule::Constant { value } => value,
        }
    }
}

/// Factor `k` is the template family scaled by `a_k`.
///
/// With `quantum_bits = Some(b)` every generated support point is rounded to
/// the grid `2^-b ℤ`. Sums of such points are exact in `f64`, which keeps
/// the reachable-sum lattice of the DP small for scalings like `k^{-1/2}`
/// whose exact partial sums would all be distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGenerator {
    pub template: AmbiguitySet<f64>,
    pub rule: ScaleRule,
    pub quantum_bits: Option<u32>,
    pub horizon: usize,
}

impl SequenceGenerator {
    pub fn new(template: AmbiguitySet<f64>, rule: ScaleRule, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(SeriesError::EmptyHorizon);
        }
        Ok(Self {
            template,
            rule,
            quantum_bits: None,
            horizon,
        })
    }

    pub fn quantized(mut self, bits: u32) -> Self {
        self.quantum_bits = Some(bits);
        self
    }

    /// Fair coin on `{−1, 1}`.
    pub fn fair_coin() -> AmbiguitySet<f64> {
        AmbiguitySet::new(vec![-1.0, 1.0], vec![vec![0.5, 0.5]]).expect("valid coin")
    }

    /// Two laws on `{−1, 0, 1}` with `P(±1) = σ²/2` for `σ² ∈ {1/4, 1}`.
    pub fn two_variance_family() -> AmbiguitySet<f64> {
        AmbiguitySet::new(
            vec![-1.0, 0.0, 1.0],
            vec![vec![0.125, 0.75, 0.125], vec![0.5, 0.0, 0.5]],
        )
        .expect("valid family")
    }

    pub fn scale_at(&self, k: usize) -> Result<f64> {
        let a = self.rule.at(k);
        if a.is_finite() {
            Ok(a)
        } else {
            Err(SeriesError::NonFiniteScale { n: k, value: a })
        }
    }

    /// Family of `X_k` (1-based).
    pub fn factor(&self, k: usize) -> Result<AmbiguitySet<f64>> {
        let a = self.scale_at(k)?;
        let quantum = self.quantum_bits.map(|b| (b as f64).exp2());
        self.template
            .map_support(|x| match quantum {
                Some(q) => (a * x * q).round() / q,
                None => a * x,
            })
            .map_err(|source| SeriesError::InvalidFactor { n: k, source })
    }

    /// Factors `start..=end` (1-based) as an independent sequence.
    pub fn sequence(&self, start: usize, end: usize) -> Result<IndependentSequence<f64>> {
        let factors = (start..=end).map(|k| self.factor(k)).collect::<Result<Vec<_>>>()?;
        Ok(IndependentSequence::new(factors)?)
    }
}

/// One line of a three-series report: the partial sums up to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub s1_partial: f64,
    pub s2_upper_partial: f64,
    pub s2_lower_partial: f64,
    pub s3_partial: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSeriesReport {
    pub c: f64,
    /// Partial sums of `V(|X_n| > c)`.
    pub s1_partial: Vec<f64>,
    /// Partial sums of `Ê[X_n^c]`.
    pub s2_upper_partial: Vec<f64>,
    /// Partial sums of `Ê[−X_n^c]`.
    pub s2_lower_partial: Vec<f64>,
    /// Partial sums of `Ê[(X_n^c − Ê[X_n^c])²]`.
    pub s3_partial: Vec<f64>,
}

impl ThreeSeriesReport {
    pub fn rows(&self) -> Vec<SeriesRow> {
        (0..self.s1_partial.len())
            .map(|i| SeriesRow {
                n: i + 1,
                s1_partial: self.s1_partial[i],
                s2_upper_partial: self.s2_upper_partial[i],
                s2_lower_partial: self.s2_lower_partial[i],
                s3_partial: self.s3_partial[i],
            })
            .collect()
    }
}

fn running_sum(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// Terms of S1–S3 for every `n ≤ N`, accumulated into partial sums.
pub fn three_series_report(gen: &SequenceGenerator, c: TruncationLevel<f64>) -> Result<ThreeSeriesReport> {
    let mut s1 = Vec::with_capacity(gen.horizon);
    let mut s2u = Vec::with_capacity(gen.horizon);
    let mut s2l = Vec::with_capacity(gen.horizon);
    let mut s3 = Vec::with_capacity(gen.horizon);
    for n in 1..=gen.horizon {
        let x = gen.factor(n)?;
        let tail = x.capacity(&Event::AbsAbove {
            level: c.value(),
            strict: true,
        })?;
        let xc = x.truncate(c)?;
        let mean = xc.upper_expectation(|v| v)?.value;
        let neg_mean = xc.upper_expectation(|v| -v)?.value;
        let var = xc.upper_expectation(|v| (v - mean) * (v - mean))?.value;
        s1.push(tail.upper);
        s2u.push(mean);
        s2l.push(neg_mean);
        s3.push(var);
    }
    Ok(ThreeSeriesReport {
        c: c.value(),
        s1_partial: running_sum(&s1),
        s2_upper_partial: running_sum(&s2u),
        s2_lower_partial: running_sum(&s2l),
        s3_partial: running_sum(&s3),
    })
}

/// `V(|S_n − S_m| ≥ eps)` and its conjugate for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyRow {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub upper: f64,
    pub lower: f64,
}

impl CauchyRow {
    pub fn capacity(&self) -> CapacityPair<f64> {
        CapacityPair {
            upper: self.upper,
            lower: self.lower,
        }
    }
}

pub fn cauchy_capacity_diagnostic(
    gen: &SequenceGenerator,
    eps: f64,
    pairs: &[(usize, usize)],
) -> Result<Vec<CauchyRow>> {
    cauchy_capacity_diagnostic_with(&DpEngine::default(), gen, eps, pairs)
}

pub fn cauchy_capacity_diagnostic_with(
    engine: &DpEngine,
    gen: &SequenceGenerator,
    eps: f64,
    pairs: &[(usize, usize)],
) -> Result<Vec<CauchyRow>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(SeriesError::NonPositiveEps(eps));
    }
    for &(m, n) in pairs {
        if m > n || n > gen.horizon {
            return Err(SeriesError::InvalidPair {
                m,
                n,
                horizon: gen.horizon,
            });
        }
    }
    pairs
        .par_iter()
        .map(|&(m, n)| {
            let cap = if m == n {
                CapacityPair::null()
            } else {
                let seq = gen.sequence(m + 1, n)?;
                let event = PathEvent::abs_exceeds(Statistic::Sum, eps, false);
                engine.path_capacity(&seq, &event)?
            };
            Ok(CauchyRow {
                m,
                n,
                eps,
                upper: cap.upper,
                lower: cap.lower,
            })
        })
        .collect()
}

/// `Ê[φ(S_n)]` at one checkpoint and the change since the previous one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub phi: String,
    pub n: usize,
    pub value: f64,
    /// `value` minus the value at the previous checkpoint; empty for the first.
    pub diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    /// Largest `|diff|` at the final checkpoint over all test functions.
    pub fn last_max_diff(&self) -> f64 {
        let last_n = self.rows.iter().map(|r| r.n).max().unwrap_or(0);
        self.rows
            .iter()
            .filter(|r| r.n == last_n)
            .filter_map(|r| r.diff)
            .fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn values(&self, phi: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.phi == phi)
            .map(|r| r.value)
            .collect()
    }
}

pub fn distribution_diagnostic(
    gen: &SequenceGenerator,
    test_functions: &[TestFunction],
    checkpoints: &[usize],
) -> Result<DistributionTable> {
    distribution_diagnostic_with(&DpEngine::default(), gen, test_functions, checkpoints)
}

pub fn distribution_diagnostic_with(
    engine: &DpEngine,
    gen: &SequenceGenerator,
    test_functions: &[TestFunction],
    checkpoints: &[usize],
) -> Result<DistributionTable> {
    for &n in checkpoints {
        if n == 0 || n > gen.horizon {
            return Err(SeriesError::InvalidCheckpoint {
                n,
                horizon: gen.horizon,
            });
        }
    }
    let cells: Vec<(usize, usize)> = (0..test_functions.len())
        .flat_map(|i| checkpoints.iter().map(move |&n| (i, n)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(i, n)| {
            let seq = gen.sequence(1, n)?;
            let f = PathFunctional::terminal_sum({
                let phi = test_functions[i].handle();
                move |s| phi(s)
            });
            Ok(engine.nested_expectation(&seq, &f)?)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut rows = Vec::with_capacity(cells.len());
    for (idx, &(i, n)) in cells.iter().enumerate() {
        let diff = (idx % checkpoints.len() != 0).then(|| values[idx] - values[idx - 1]);
        rows.push(DistributionRow {
            phi: test_functions[i].id.clone(),
            n,
            value: values[idx],
            diff,
        });
    }
    Ok(DistributionTable { rows })
}

/// Whether a finite-horizon trace looks convergent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Shrinks,
    Stalls,
}

/// Verdict on `(m, 2m)` Cauchy capacities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyTrend {
    pub trend: Trend,
    /// First row index from which the upper capacities never increase.
    pub monotone_from: usize,
    pub last_upper: f64,
    /// Smallest upper capacity seen.
    pub floor: f64,
}

/// Shrinks iff the last upper capacity is below `threshold`.
pub fn cauchy_trend(rows: &[CauchyRow], threshold: f64) -> CauchyTrend {
    let uppers: Vec<f64> = rows.iter().map(|r| r.upper).collect();
    let mut monotone_from = uppers.len().saturating_sub(1);
    while monotone_from > 0 && uppers[monotone_from - 1] >= uppers[monotone_from] {
        monotone_from -= 1;
    }
    let last_upper = uppers.last().copied().unwrap_or(0.0);
    CauchyTrend {
        trend: if last_upper < threshold {
            Trend::Shrinks
        } else {
            Trend::Stalls
        },
        monotone_from,
        last_upper,
        floor: uppers.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Shrinks iff every test function's last successive difference is at most
/// `settle_tol` in absolute value.
pub fn distribution_trend(table: &DistributionTable, settle_tol: f64) -> Trend {
    if table.last_max_diff() <= settle_tol {
        Trend::Shrinks
    } else {
        Trend::Stalls
    }
}
