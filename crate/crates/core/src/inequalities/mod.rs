//! Both sides of the maximal inequalities for sums of independent variables.
//!
//! Every capacity on the left- or right-hand side is computed exactly by the
//! backward recursion in [`crate::dp`]. Closed-form bounds are evaluated in
//! the same scalar backend, so on [`crate::Rational`] inputs the verdict
//! `holds` is decided without rounding.

pub mod grid;

use thiserror::Error;

use crate::dp::{DpEngine, DpError, IndependentSequence, PathEvent, Statistic};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("expected {expected} offsets, got {found}")]
    OffsetLength { expected: usize, found: usize },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaRange(f64),
    #[error("premise fails at k = {k}: capacity {capacity} exceeds alpha {alpha}")]
    PremiseFails { k: usize, capacity: f64, alpha: f64 },
    #[error("factor {factor} has support point {point} outside the bound {bound}")]
    SupportBound { factor: usize, point: f64, bound: f64 },
    #[error("factor {factor} has upper mean {mean}, expected >= 0")]
    NegativeMean { factor: usize, mean: f64 },
    #[error("factor {factor} has upper mean {mean}, expected <= 0")]
    PositiveMean { factor: usize, mean: f64 },
    #[error("sum of upper second moments is zero")]
    DegenerateSecondMoment,
    #[error("sum of upper means is zero")]
    DegenerateMean,
    #[error(transparent)]
    Dp(#[from] DpError),
}

pub type Result<T, E = InequalityError> = std::result::Result<T, E>;

/// Which Lévy inequality to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevyForm {
    /// `(1−α) V(max_k (S_k − β_k) > x+ε) ≤ V(S_n > x)`.
    OneSided,
    /// `(1−α) V(max_k (|S_k| − β_k) > x+ε) ≤ V(|S_n| > x)`.
    Absolute,
}

#[derive(Debug, Clone)]
pub struct LevyInstance<T> {
    pub seq: IndependentSequence<T>,
    /// Offsets `β_{n,k}`, one per step.
    pub beta: Vec<T>,
    /// Caller-supplied α. When absent the smallest feasible α is used.
    pub alpha: Option<T>,
    pub x: T,
    pub eps: T,
    pub form: LevyForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyReport<T> {
    pub lhs: T,
    pub rhs: T,
    /// Smallest α satisfying the premise on this instance.
    pub premise_alpha: T,
    /// α the inequality was evaluated at.
    pub alpha: T,
    pub holds: bool,
}

/// Smallest α with `V(S_k − S_n ≥ β_k + δ) ≤ α` for all `δ > 0` and all `k`
/// (or the absolute-value version), together with the maximizing `k`.
///
/// On a finite lattice the supremum over `δ > 0` is attained in the limit
/// `δ → 0+`, where the event becomes the strict event `{S_k − S_n > β_k}`.
pub fn premise_alpha<T: Scalar>(
    engine: &DpEngine,
    seq: &IndependentSequence<T>,
    beta: &[T],
    form: LevyForm,
) -> Result<(T, usize)> {
    let n = seq.len();
    check_offsets(beta, n)?;
    let mut best = (T::zero(), 1usize);
    for k in 1..=n {
        let level = beta[k - 1];
        let capacity = if k == n {
            // S_n − S_n = 0.
            if T::zero() > level {
                T::one()
            } else {
                T::zero()
            }
        } else {
            // S_k − S_n = −(X_{k+1} + ... + X_n).
            let tail = seq.window(k, n)?;
            let event = match form {
                LevyForm::OneSided => PathEvent::new(Statistic::Sum, move |s: T| -s > level),
                LevyForm::Absolute => PathEvent::new(Statistic::Sum, move |s: T| s.abs() > level),
            };
            engine.path_capacity(&tail, &event)?.upper
        };
        if capacity > best.0 {
            best = (capacity, k);
        }
    }
    Ok(best)
}

pub fn levy_check<T: Scalar>(inst: &LevyInstance<T>) -> Result<LevyReport<T>> {
    levy_check_with(&DpEngine::default(), inst)
}

pub fn levy_check_with<T: Scalar>(engine: &DpEngine, inst: &LevyInstance<T>) -> Result<LevyReport<T>> {
    let n = inst.seq.len();
    check_offsets(&inst.beta, n)?;
    positive("x", inst.x)?;
    positive("eps", inst.eps)?;

    let (premise, k_star) = premise_alpha(engine, &inst.seq, &inst.beta, inst.form)?;
    let alpha = match inst.alpha {
        Some(a) => {
            if a < T::zero() || a >= T::one() {
                return Err(InequalityError::AlphaRange(a.to_f64()));
            }
            a
        }
        None => premise,
    };
    if premise > alpha || premise >= T::one() {
        return Err(InequalityError::PremiseFails {
            k: k_star,
            capacity: premise.to_f64(),
            alpha: alpha.to_f64(),
        });
    }

    let level = inst.x + inst.eps;
    let (maximal, terminal) = match inst.form {
        LevyForm::OneSided => (
            PathEvent::exceeds(Statistic::RunningMax(inst.beta.clone()), level, true),
            PathEvent::exceeds(Statistic::Sum, inst.x, true),
        ),
        LevyForm::Absolute => (
            PathEvent::exceeds(Statistic::RunningMaxAbs(inst.beta.clone()), level, true),
            PathEvent::abs_exceeds(Statistic::Sum, inst.x, true),
        ),
    };
    let lhs = (T::one() - alpha) * engine.path_capacity(&inst.seq, &maximal)?.upper;
    let rhs = engine.path_capacity(&inst.seq, &terminal)?.upper;
    Ok(LevyReport {
        lhs,
        rhs,
        premise_alpha: premise,
        alpha,
        holds: lhs.le_tol(rhs),
    })
}

#[derive(Debug, Clone)]
pub struct KolmogorovInstance<T> {
    pub seq: IndependentSequence<T>,
    pub x: T,
    /// Bound on the support: `|X_k| ≤ c` for form (i), `X_k ≤ c` for (ii).
    pub c: T,
}

/// Exact capacity against the closed-form lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `V(max_k |S_k| > x) ≥ 1 − [(x+c)² + 2x Σ{(Ê[X_k])⁺ + (Ê[−X_k])⁺}] / Σ Ê[X_k²]`.
pub fn kolmogorov_check_i<T: Scalar>(inst: &KolmogorovInstance<T>) -> Result<KolmogorovReport<T>> {
    kolmogorov_check_i_with(&DpEngine::default(), inst)
}

pub fn kolmogorov_check_i_with<T: Scalar>(
    engine: &DpEngine,
    inst: &KolmogorovInstance<T>,
) -> Result<KolmogorovReport<T>> {
    positive("x", inst.x)?;
    positive("c", inst.c)?;
    let (x, c) = (inst.x, inst.c);
    let mut second = T::zero();
    let mut drift = T::zero();
    for (k, factor) in inst.seq.factors().iter().enumerate() {
        for &p in factor.support().points() {
            if p.abs() > c {
                return Err(InequalityError::SupportBound {
                    factor: k + 1,
                    point: p.to_f64(),
                    bound: c.to_f64(),
                });
            }
        }
        second = second + factor.upper_expectation(|v| v * v).map_err(DpError::from)?.value;
        let up = factor.upper_expectation(|v| v).map_err(DpError::from)?.value;
        let down = factor.upper_expectation(|v| -v).map_err(DpError::from)?.value;
        drift = drift + up.pos() + down.pos();
    }
    if second == T::zero() {
        return Err(InequalityError::DegenerateSecondMoment);
    }
    let two = T::from_i64(2);
    let rhs = T::one() - ((x + c) * (x + c) + two * x * drift) / second;
    let n = inst.seq.len();
    let event = PathEvent::exceeds(Statistic::RunningMaxAbs(vec![T::zero(); n]), x, true);
    let lhs = engine.path_capacity(&inst.seq, &event)?.upper;
    Ok(KolmogorovReport {
        lhs,
        rhs,
        holds: rhs.le_tol(lhs),
    })
}

/// `V(max_k S_k > x) ≥ 1 − (x+c) / Σ Ê[X_k]` when `X_k ≤ c` and `Ê[X_k] ≥ 0`.
pub fn kolmogorov_check_ii<T: Scalar>(inst: &KolmogorovInstance<T>) -> Result<KolmogorovReport<T>> {
    kolmogorov_check_ii_with(&DpEngine::default(), inst)
}

pub fn kolmogorov_check_ii_with<T: Scalar>(
    engine: &DpEngine,
    inst: &KolmogorovInstance<T>,
) -> Result<KolmogorovReport<T>> {
    positive("x", inst.x)?;
    positive("c", inst.c)?;
    let mut mean_sum = T::zero();
    for (k, factor) in inst.seq.factors().iter().enumerate() {
        let top = factor.support().points()[factor.support().len() - 1];
        if top > inst.c {
            return Err(InequalityError::SupportBound {
                factor: k + 1,
                point: top.to_f64(),
                bound: inst.c.to_f64(),
            });
        }
        let mean = factor.upper_mean();
        if mean < T::zero() {
            return Err(InequalityError::NegativeMean {
                factor: k + 1,
                mean: mean.to_f64(),
            });
        }
        mean_sum = mean_sum + mean;
    }
    if mean_sum == T::zero() {
        return Err(InequalityError::DegenerateMean);
    }
    let rhs = T::one() - (inst.x + inst.c) / mean_sum;
    let n = inst.seq.len();
    let event = PathEvent::exceeds(Statistic::RunningMax(vec![T::zero(); n]), inst.x, true);
    let lhs = engine.path_capacity(&inst.seq, &event)?.upper;
    Ok(KolmogorovReport {
        lhs,
        rhs,
        holds: rhs.le_tol(lhs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosenthalReport<T> {
    /// Exact `V(S_n ≥ x)`.
    pub capacity: T,
    /// `Σ Ê[X_k²] / x²`.
    pub bound_without_c: T,
    /// `capacity / bound_without_c`; zero when both vanish.
    pub ratio: T,
}

/// Ratio of `V(S_n ≥ x)` to the moment bound `Σ Ê[X_k²] / x²` for
/// sequences with `Ê[X_k] ≤ 0`. The constant in front of the bound is not
/// known, so the ratio is reported rather than compared against anything.
pub fn rosenthal_ratio<T: Scalar>(seq: &IndependentSequence<T>, x: T) -> Result<RosenthalReport<T>> {
    rosenthal_ratio_with(&DpEngine::default(), seq, x)
}

pub fn rosenthal_ratio_with<T: Scalar>(
    engine: &DpEngine,
    seq: &IndependentSequence<T>,
    x: T,
) -> Result<RosenthalReport<T>> {
    positive("x", x)?;
    let mut second = T::zero();
    for (k, factor) in seq.factors().iter().enumerate() {
        let mean = factor.upper_mean();
        if mean > T::zero() {
            return Err(InequalityError::PositiveMean {
                factor: k + 1,
                mean: mean.to_f64(),
            });
        }
        second = second + factor.upper_expectation(|v| v * v).map_err(DpError::from)?.value;
    }
    let capacity = engine
        .path_capacity(seq, &PathEvent::exceeds(Statistic::Sum, x, false))?
        .upper;
    let bound = second / (x * x);
    // A zero bound forces every factor to be the point mass at 0, so the
    // capacity vanishes as well.
    let ratio = if bound == T::zero() {
        T::zero()
    } else {
        capacity / bound
    };
    Ok(RosenthalReport {
        capacity,
        bound_without_c: bound,
        ratio,
    })
}

fn check_offsets<T>(beta: &[T], n: usize) -> Result<()> {
    if beta.len() != n {
        return Err(InequalityError::OffsetLength {
            expected: n,
            found: beta.len(),
        });
    }
    Ok(())
}

fn positive<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() {
        Ok(())
    } else {
        Err(InequalityError::NonPositive {
            name,
            value: value.to_f64(),
        })
    }
}
