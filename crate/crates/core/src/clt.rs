//! Central limit theorem checks for i.i.d. ambiguity families.
//!
//! Three conditions govern convergence of `Ê[φ(S_n/√n)]` to the G-normal
//! value: the truncated second moments `Ê[X²∧c]` stay bounded (their limits
//! are `σ̄²` and, for the lower expectation, `σ̲²`), `x²V(|X| ≥ x) → 0`, and
//! the truncated means `Ê[X^c]`, `Ê[−X^c]` tend to 0. For finite supports
//! every limit is reached once `c` passes the support radius, so verdicts
//! are exact. Heavy-tailed laws enter only through closed-form tail
//! descriptors and only for illustrating the conditions.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dp::{DpEngine, DpError, IndependentSequence, PathFunctional};
use crate::functions::TestFunction;
use crate::gpde::{gnormal_expectation, GNormalParams, GpdeError, Grid};
use crate::space::{AmbiguitySet, CoreError, Event, TruncationLevel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CltError {
    #[error("{name} schedule must be strictly increasing and positive")]
    BadSchedule { name: &'static str },
    #[error("profile data are not monotone: {0}")]
    NonMonotoneProfile(String),
    #[error("tail exponent must be positive, got {0}")]
    BadExponent(f64),
    #[error("row for n = {n} has {found} factors")]
    RowLength { n: usize, found: usize },
    #[error("n must be at least 1")]
    ZeroLength,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Gpde(#[from] GpdeError),
}

pub type Result<T, E = CltError> = std::result::Result<T, E>;

/// The moment maps entering the CLT conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentProfile {
    /// Exact maps induced by a finite-support family.
    Finite(AmbiguitySet<f64>),
    /// Symmetric law with `P(|X| ≥ x) = min(1, x^{−α})`.
    SymmetricPowerTail { exponent: f64 },
}

impl MomentProfile {
    pub fn power_tail(exponent: f64) -> Result<Self> {
        if exponent.is_finite() && exponent > 0.0 {
            Ok(MomentProfile::SymmetricPowerTail { exponent })
        } else {
            Err(CltError::BadExponent(exponent))
        }
    }

    /// `(Ê[X²∧c], ε̂[X²∧c])`.
    pub fn second_moments(&self, c: f64) -> Result<(f64, f64)> {
        match self {
            MomentProfile::Finite(f) => Ok((
                f.upper_expectation(|x| (x * x).min(c))?.value,
                f.lower_expectation(|x| (x * x).min(c))?.value,
            )),
            MomentProfile::SymmetricPowerTail { exponent } => {
                // E[X²∧c] = ∫_0^c P(X² > t) dt with P(X² > t) = min(1, t^{−α/2}).
                let v = if c <= 1.0 {
                    c
                } else {
                    let p = 1.0 - exponent / 2.0;
                    if p.abs() < 1e-12 {
                        1.0 + c.ln()
                    } else {
                        1.0 + (c.powf(p) - 1.0) / p
                    }
                };
                Ok((v, v))
            }
        }
    }

    /// `(Ê[X^c], Ê[−X^c])`.
    pub fn truncated_means(&self, c: f64) -> Result<(f64, f64)> {
        match self {
            MomentProfile::Finite(f) => {
                let t = TruncationLevel::new(c)?;
                Ok((
                    f.upper_expectation(|x| t.clip(x))?.value,
                    f.upper_expectation(|x| -t.clip(x))?.value,
                ))
            }
            MomentProfile::SymmetricPowerTail { .. } => Ok((0.0, 0.0)),
        }
    }

    /// `V(|X| ≥ x)`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        match self {
            MomentProfile::Finite(f) => Ok(f
                .capacity(&Event::AbsAbove {
                    level: x,
                    strict: false,
                })?
                .upper),
            MomentProfile::SymmetricPowerTail { exponent } => Ok(if x <= 1.0 { 1.0 } else { x.powf(-exponent) }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub holds: bool,
    /// Exact decision rather than a trend read off a finite schedule.
    pub definitive: bool,
    /// The limit, or the last schedule value when the limit is not reached.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub bounded_second_moment: ConditionVerdict,
    pub vanishing_tail: ConditionVerdict,
    pub vanishing_mean: ConditionVerdict,
}

impl Verdicts {
    pub fn all_hold(&self) -> bool {
        self.bounded_second_moment.holds && self.vanishing_tail.holds && self.vanishing_mean.holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPoint {
    pub c: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub x: f64,
    pub capacity: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub sigma_hi_sq: f64,
    pub sigma_lo_sq: f64,
    /// `(c, Ê[X²∧c], ε̂[X²∧c])`.
    pub second_moment_trace: Vec<MomentPoint>,
    /// `(x, V(|X| ≥ x), x²V(|X| ≥ x))`.
    pub tail_trace: Vec<TailPoint>,
    /// `(c, Ê[X^c], Ê[−X^c])`.
    pub mean_traces: Vec<MomentPoint>,
    pub verdicts: Verdicts,
}

impl ConditionsReport {
    /// G-normal parameters implied by the variance limits.
    pub fn params(&self) -> Result<GNormalParams> {
        Ok(GNormalParams::new(self.sigma_lo_sq, self.sigma_hi_sq)?)
    }
}

/// Relative tolerance for trend verdicts on tail descriptors.
pub const TREND_TOLERANCE: f64 = 1e-2;

fn check_schedule(s: &[f64], name: &'static str) -> Result<()> {
    let ok = !s.is_empty() && s[0] > 0.0 && s.windows(2).all(|w| w[1] > w[0]) && s.iter().all(|v| v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(CltError::BadSchedule { name })
    }
}

pub fn clt_conditions(profile: &MomentProfile, c_schedule: &[f64], x_schedule: &[f64]) -> Result<ConditionsReport> {
    check_schedule(c_schedule, "c")?;
    check_schedule(x_schedule, "x")?;

    let mut second_moment_trace = Vec::with_capacity(c_schedule.len());
    let mut mean_traces = Vec::with_capacity(c_schedule.len());
    for &c in c_schedule {
        let (upper, lower) = profile.second_moments(c)?;
        second_moment_trace.push(MomentPoint { c, upper, lower });
        let (upper, lower) = profile.truncated_means(c)?;
        mean_traces.push(MomentPoint { c, upper, lower });
    }
    let mut tail_trace = Vec::with_capacity(x_schedule.len());
    for &x in x_schedule {
        let capacity = profile.tail(x)?;
        tail_trace.push(TailPoint {
            x,
            capacity,
            scaled: x * x * capacity,
        });
    }

    for w in second_moment_trace.windows(2) {
        if w[1].upper < w[0].upper || w[1].lower < w[0].lower {
            return Err(CltError::NonMonotoneProfile(format!(
                "second moment decreases between c = {} and c = {}",
                w[0].c, w[1].c
            )));
        }
    }
    for t in &tail_trace {
        if !(0.0..=1.0).contains(&t.capacity) {
            return Err(CltError::NonMonotoneProfile(format!(
                "tail capacity {} at x = {} is outside [0, 1]",
                t.capacity, t.x
            )));
        }
    }
    for w in tail_trace.windows(2) {
        if w[1].capacity > w[0].capacity {
            return Err(CltError::NonMonotoneProfile(format!(
                "tail capacity increases between x = {} and x = {}",
                w[0].x, w[1].x
            )));
        }
    }

    let (sigma_hi_sq, sigma_lo_sq, verdicts) = match profile {
        MomentProfile::Finite(f) => {
            let r = f.support().radius();
            let (hi, lo) = profile.second_moments(r * r)?;
            let (m_up, m_down) = profile.truncated_means(r.max(f64::MIN_POSITIVE))?;
            let mean_limit = m_up.abs().max(m_down.abs());
            (
                hi,
                lo,
                Verdicts {
                    bounded_second_moment: ConditionVerdict {
                        holds: true,
                        definitive: true,
                        limit: hi,
                    },
                    vanishing_tail: ConditionVerdict {
                        holds: true,
                        definitive: true,
                        limit: 0.0,
                    },
                    vanishing_mean: ConditionVerdict {
                        holds: mean_limit <= crate::scalar::FLOAT_TOLERANCE,
                        definitive: true,
                        limit: mean_limit,
                    },
                },
            )
        }
        MomentProfile::SymmetricPowerTail { .. } => {
            let last = second_moment_trace[second_moment_trace.len() - 1];
            let prev = second_moment_trace[second_moment_trace.len().saturating_sub(2)];
            let growth = (last.upper - prev.upper) / last.upper.max(f64::MIN_POSITIVE);
            let tail_last = tail_trace[tail_trace.len() - 1].scaled;
            let mean_last = mean_traces[mean_traces.len() - 1];
            let mean_limit = mean_last.upper.abs().max(mean_last.lower.abs());
            (
                last.upper,
                last.lower,
                Verdicts {
                    bounded_second_moment: ConditionVerdict {
                        holds: growth <= TREND_TOLERANCE,
                        definitive: false,
                        limit: last.upper,
                    },
                    vanishing_tail: ConditionVerdict {
                        holds: tail_last <= TREND_TOLERANCE,
                        definitive: false,
                        limit: tail_last,
                    },
                    vanishing_mean: ConditionVerdict {
                        holds: mean_limit <= TREND_TOLERANCE,
                        definitive: false,
                        limit: mean_limit,
                    },
                },
            )
        }
    };

    Ok(ConditionsReport {
        sigma_hi_sq,
        sigma_lo_sq,
        second_moment_trace,
        tail_trace,
        mean_traces,
        verdicts,
    })
}

/// Support points are rounded to this many binary digits before summing.
pub const LATTICE_BITS: i32 = 32;

/// Partial sums of points on `2^{-32} ℤ` are exact in `f64`, so equal sums
/// share one DP state. Without this, points such as 0.1 produce sums that
/// differ in the last bit and the state count grows exponentially. Dyadic
/// inputs like `{−1, 0, 1}` are unchanged.
fn snap_to_lattice(x: f64) -> f64 {
    let q = 2f64.powi(LATTICE_BITS);
    (x * q).round() / q
}

/// `Ê[φ(S_n/√n)]` for `n` i.i.d. copies of `family`.
pub fn normalized_sum_expectation(family: &AmbiguitySet<f64>, n: usize, phi: &TestFunction) -> Result<f64> {
    normalized_sum_expectation_with(&DpEngine::default(), family, n, phi)
}

pub fn normalized_sum_expectation_with(
    engine: &DpEngine,
    family: &AmbiguitySet<f64>,
    n: usize,
    phi: &TestFunction,
) -> Result<f64> {
    if n == 0 {
        return Err(CltError::ZeroLength);
    }
    let snapped = family.map_support(snap_to_lattice)?;
    let seq = IndependentSequence::iid(&snapped, n)?;
    let f = PathFunctional::scaled_sum(1.0 / (n as f64).sqrt(), {
        let phi = phi.handle();
        move |s| phi(s)
    });
    Ok(engine.nested_expectation(&seq, &f)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltRow {
    pub family: String,
    pub phi: String,
    pub n: usize,
    pub dp_value: f64,
    pub pde_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltTrend {
    pub phi: String,
    /// Largest increase of the gap between consecutive schedule entries.
    pub max_increase: f64,
    pub first_gap: f64,
    pub last_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub rows: Vec<CltRow>,
    pub trends: Vec<CltTrend>,
    /// Conditions that failed for the family; the report is produced anyway.
    pub warnings: Vec<String>,
}

impl CltReport {
    pub fn max_gap_at(&self, n: usize) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .fold(0.0, |m, r| m.max(r.gap))
    }

    pub fn gap(&self, phi: &str, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.phi == phi && r.n == n).map(|r| r.gap)
    }
}

fn warnings_for(conditions: &ConditionsReport) -> Vec<String> {
    let v = &conditions.verdicts;
    let mut out = Vec::new();
    if !v.bounded_second_moment.holds {
        out.push("truncated second moments do not stabilize".to_string());
    }
    if !v.vanishing_tail.holds {
        out.push(format!("x²V(|X| ≥ x) does not vanish (last {})", v.vanishing_tail.limit));
    }
    if !v.vanishing_mean.holds {
        out.push(format!("truncated means tend to {} rather than 0", v.vanishing_mean.limit));
    }
    out
}

/// Gaps `|Ê[φ(S_n/√n)] − Ê_G[φ]|` on an `n` schedule. The G-normal values
/// use the variance limits from `conditions` and the given PDE grid.
pub fn clt_convergence_report(
    family_id: &str,
    family: &AmbiguitySet<f64>,
    phis: &[TestFunction],
    n_schedule: &[usize],
    conditions: &ConditionsReport,
    grid: &Grid,
) -> Result<CltReport> {
    if n_schedule.contains(&0) || n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CltError::BadSchedule { name: "n" });
    }
    let params = conditions.params()?;
    let pde = phis
        .par_iter()
        .map(|phi| {
            let h = phi.handle();
            gnormal_expectation(&params, &move |x| h(x), grid).map_err(CltError::from)
        })
        .collect::<Result<Vec<f64>>>()?;
    let cells: Vec<(usize, usize)> = (0..phis.len())
        .flat_map(|i| n_schedule.iter().map(move |&n| (i, n)))
        .collect();
    let dp = cells
        .par_iter()
        .map(|&(i, n)| normalized_sum_expectation(family, n, &phis[i]))
        .collect::<Result<Vec<f64>>>()?;

    let rows: Vec<CltRow> = cells
        .iter()
        .zip(&dp)
        .map(|(&(i, n), &v)| CltRow {
            family: family_id.to_string(),
            phi: phis[i].id.clone(),
            n,
            dp_value: v,
            pde_value: pde[i],
            gap: (v - pde[i]).abs(),
        })
        .collect();
    let trends = phis
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let gaps: Vec<f64> = rows[i * n_schedule.len()..(i + 1) * n_schedule.len()]
                .iter()
                .map(|r| r.gap)
                .collect();
            CltTrend {
                phi: phi.id.clone(),
                max_increase: gaps.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
                first_gap: gaps[0],
                last_gap: gaps[gaps.len() - 1],
            }
        })
        .collect();
    Ok(CltReport {
        rows,
        trends,
        warnings: warnings_for(conditions),
    })
}

/// Rows `X_{n1}, ..., X_{nn}` for each `n` in a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularArray {
    rows: Vec<(usize, Vec<AmbiguitySet<f64>>)>,
}

impl TriangularArray {
    pub fn new(rows: Vec<(usize, Vec<AmbiguitySet<f64>>)>) -> Result<Self> {
        for (n, row) in &rows {
            if row.len() != *n {
                return Err(CltError::RowLength {
                    n: *n,
                    found: row.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    /// Row `n` holds `make(n, k)` for `k = 1..=n`.
    pub fn from_fn(
        schedule: &[usize],
        make: impl Fn(usize, usize) -> Result<AmbiguitySet<f64>>,
    ) -> Result<Self> {
        let rows = schedule
            .iter()
            .map(|&n| Ok((n, (1..=n).map(|k| make(n, k)).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[(usize, Vec<AmbiguitySet<f64>>)] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindebergRow {
    pub n: usize,
    /// `n^{−1/2} Σ (|Ê[X_nk]| + |Ê[−X_nk]|)`.
    pub mean_sum: f64,
    /// `n^{−1} Σ (|Ê[X_nk²] − σ̄²| + |ε̂[X_nk²] − σ̲²|)`.
    pub variance_sum: f64,
    /// `n^{−3/2} Σ Ê[|X_nk|³]`.
    pub third_moment_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LindebergReport {
    pub rows: Vec<LindebergRow>,
    pub mean_vanishes: bool,
    pub variance_aligns: bool,
    pub third_moment_vanishes: bool,
}

impl LindebergReport {
    pub fn all_hold(&self) -> bool {
        self.mean_vanishes && self.variance_aligns && self.third_moment_vanishes
    }
}

/// A trace "tends to 0" at finite horizon if it is identically negligible,
/// or never increases and ends below half its first value.
fn vanishes(trace: &[f64]) -> bool {
    const NEGLIGIBLE: f64 = 1e-12;
    if trace.iter().all(|v| v.abs() <= NEGLIGIBLE) {
        return true;
    }
    let first = trace[0];
    let last = trace[trace.len() - 1];
    trace.windows(2).all(|w| w[1] <= w[0] + NEGLIGIBLE) && last <= 0.5 * first
}

/// The three normalized sums of the triangular-array CLT conditions, per
/// row, with trend verdicts.
pub fn lindeberg_array_check(array: &TriangularArray, params: &GNormalParams) -> Result<LindebergReport> {
    let mut rows = Vec::with_capacity(array.rows.len());
    for (n, row) in &array.rows {
        let nf = *n as f64;
        let (mut mean, mut var, mut third) = (0.0, 0.0, 0.0);
        for x in row {
            mean += x.upper_expectation(|v| v)?.value.abs() + x.upper_expectation(|v| -v)?.value.abs();
            var += (x.upper_expectation(|v| v * v)?.value - params.sigma_hi_sq).abs()
                + (x.lower_expectation(|v| v * v)?.value - params.sigma_lo_sq).abs();
            third += x.upper_expectation(|v| v.abs().powi(3))?.value;
        }
        rows.push(LindebergRow {
            n: *n,
            mean_sum: mean / nf.sqrt(),
            variance_sum: var / nf,
            third_moment_sum: third / nf.powf(1.5),
        });
    }
    let trace = |f: fn(&LindebergRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(LindebergReport {
        mean_vanishes: vanishes(&trace(|r| r.mean_sum)),
        variance_aligns: vanishes(&trace(|r| r.variance_sum)),
        third_moment_vanishes: vanishes(&trace(|r| r.third_moment_sum)),
        rows,
    })
}
