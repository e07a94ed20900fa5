//! Upper and lower expectations of path functionals of independent
//! sequences.
//!
//! Independence of `X_{k+1}` from `(X_1, ..., X_k)` means the expectation of
//! a function of the whole path is computed from the inside out: the last
//! factor is integrated first with the history frozen, then the one before,
//! and so on. The law used at step `k` may therefore depend on the realized
//! history, and the engine evaluates exactly that adaptive quantity by
//! backward recursion over compressed states:
//!
//! ```text
//! u_n(s)     = payoff(s)
//! u_{k-1}(s) = max_θ Σ_x u_k(advance(s, x)) θ(x)      (θ ranges over factor k)
//! ```
//!
//! State lattices are the exact reachable sets (sums of support points and,
//! for running maxima, the exact accumulator), so there is no gridding
//! error. [`brute_force_expectation`] evaluates the same nested formula by
//! literal recursion on full histories and serves as the cross-check.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::space::{exceeds, AmbiguitySet, CapacityPair, CoreError, FamilySpec};

/// Layers at least this large are evaluated in parallel.
const PARALLEL_LAYER: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("sequence has no factors")]
    EmptySequence,
    #[error("layer {layer} has {size} states, over the cap of {cap}")]
    StateSpaceTooLarge { layer: usize, size: usize, cap: usize },
    #[error("functional needs {expected} offsets, got {found}")]
    OffsetLength { expected: usize, found: usize },
    #[error("full-path functionals are limited to {max} steps, sequence has {len}")]
    FullPathTooLong { len: usize, max: usize },
    #[error("payoff is not finite at a terminal state of value {state}")]
    NonFinitePayoff { state: f64 },
    #[error("instance exceeds oracle bounds: {0}")]
    OracleBounds(String),
    #[error("policy has no action for a state reached at step {step}")]
    PolicyIncomplete { step: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("malformed sequence json: {0}")]
    Json(String),
}

pub type Result<T, E = DpError> = std::result::Result<T, E>;

/// Ordered factors; factor `k` governs `X_k` and is independent of the
/// factors before it.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSequence<T> {
    factors: Vec<AmbiguitySet<T>>,
}

impl<T: Scalar> IndependentSequence<T> {
    pub fn new(factors: Vec<AmbiguitySet<T>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(DpError::EmptySequence);
        }
        Ok(Self { factors })
    }

    /// `n` independent copies of one family.
    pub fn iid(family: &AmbiguitySet<T>, n: usize) -> Result<Self> {
        Self::new(vec![family.clone(); n])
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[AmbiguitySet<T>] {
        &self.factors
    }

    /// Factors `start..end` (0-based, end exclusive) as their own sequence.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(self.factors[start..end].to_vec())
    }

    pub fn all_singletons(&self) -> bool {
        self.factors.iter().all(AmbiguitySet::is_singleton)
    }
}

/// On-disk form: `{"factors": [family, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub factors: Vec<FamilySpec>,
}

impl IndependentSequence<f64> {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: SequenceSpec =
            serde_json::from_str(text).map_err(|e| DpError::Json(e.to_string()))?;
        let factors = spec
            .factors
            .into_iter()
            .map(AmbiguitySet::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(factors)
    }
}

pub type Payoff<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type PathPayoff<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type Predicate<T> = Arc<dyn Fn(T) -> bool + Send + Sync>;

/// Compressible statistic of the partial sums `S_k = X_1 + ... + X_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic<T> {
    /// `S_n`.
    Sum,
    /// `scale · S_n`, e.g. `S_n / √n`.
    ScaledSum(T),
    /// `max_{k≤n} (S_k − β_k)`.
    RunningMax(Vec<T>),
    /// `max_{k≤n} (|S_k| − β_k)`.
    RunningMaxAbs(Vec<T>),
}

impl<T: Scalar> Statistic<T> {
    fn offsets(&self) -> Option<&[T]> {
        match self {
            Statistic::RunningMax(beta) | Statistic::RunningMaxAbs(beta) => Some(beta),
            _ => None,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self.offsets() {
            Some(beta) if beta.len() != n => Err(DpError::OffsetLength {
                expected: n,
                found: beta.len(),
            }),
            _ => Ok(()),
        }
    }

    /// The statistic computed directly on a full path.
    pub fn on_path(&self, path: &[T]) -> T {
        let mut sum = T::zero();
        let mut best: Option<T> = None;
        for (k, &x) in path.iter().enumerate() {
            sum = sum + x;
            let candidate = match self {
                Statistic::RunningMax(beta) => sum - beta[k],
                Statistic::RunningMaxAbs(beta) => sum.abs() - beta[k],
                _ => continue,
            };
            best = Some(best.map_or(candidate, |b| b.max_of(candidate)));
        }
        match self {
            Statistic::Sum => sum,
            Statistic::ScaledSum(scale) => *scale * sum,
            _ => best.expect("running maximum over a nonempty path"),
        }
    }
}

/// A functional of `(X_1, ..., X_n)` with its state-compression recipe.
#[derive(Clone)]
pub enum PathFunctional<T> {
    Compressed {
        statistic: Statistic<T>,
        payoff: Payoff<T>,
    },
    /// Arbitrary function of the whole path; the state is the full history,
    /// so this is only accepted for short sequences.
    FullPath { payoff: PathPayoff<T> },
}

impl<T> fmt::Debug for PathFunctional<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFunctional::Compressed { statistic, .. } => f
                .debug_struct("Compressed")
                .field("statistic", statistic)
                .finish_non_exhaustive(),
            PathFunctional::FullPath { .. } => f.write_str("FullPath"),
        }
    }
}

impl<T: Scalar> PathFunctional<T> {
    pub fn compressed(statistic: Statistic<T>, payoff: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        PathFunctional::Compressed {
            statistic,
            payoff: Arc::new(payoff),
        }
    }

    pub fn terminal_sum(payoff: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::compressed(Statistic::Sum, payoff)
    }

    pub fn scaled_sum(scale: T, payoff: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::compressed(Statistic::ScaledSum(scale), payoff)
    }

    pub fn running_max(beta: Vec<T>, payoff: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::compressed(Statistic::RunningMax(beta), payoff)
    }

    pub fn running_max_abs(beta: Vec<T>, payoff: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::compressed(Statistic::RunningMaxAbs(beta), payoff)
    }

    pub fn full_path(payoff: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        PathFunctional::FullPath {
            payoff: Arc::new(payoff),
        }
    }

    /// Indicator of `{predicate(statistic)}`.
    pub fn indicator(statistic: Statistic<T>, predicate: Predicate<T>) -> Self {
        Self::compressed(statistic, move |v| {
            if predicate(v) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// The functional with its payoff negated.
    pub fn negated(&self) -> Self {
        match self {
            PathFunctional::Compressed { statistic, payoff } => {
                let payoff = Arc::clone(payoff);
                Self::compressed(statistic.clone(), move |v| -payoff(v))
            }
            PathFunctional::FullPath { payoff } => {
                let payoff = Arc::clone(payoff);
                Self::full_path(move |p| -payoff(p))
            }
        }
    }

    /// Value of the functional on a full path, without compression.
    pub fn evaluate_path(&self, path: &[T]) -> T {
        match self {
            PathFunctional::Compressed { statistic, payoff } => payoff(statistic.on_path(path)),
            PathFunctional::FullPath { payoff } => payoff(path),
        }
    }

    fn initial_state(&self) -> PathState<T> {
        match self {
            PathFunctional::Compressed { statistic, .. } => match statistic {
                Statistic::Sum | Statistic::ScaledSum(_) => PathState::Sum(T::zero()),
                _ => PathState::Max {
                    sum: T::zero(),
                    max: None,
                },
            },
            PathFunctional::FullPath { .. } => PathState::History(Vec::new()),
        }
    }

    /// State after observing `x` at 1-based step `step`.
    fn advance(&self, state: &PathState<T>, step: usize, x: T) -> PathState<T> {
        match state {
            PathState::Sum(s) => PathState::Sum(*s + x),
            PathState::Max { sum, max } => {
                let sum = *sum + x;
                let candidate = match self {
                    PathFunctional::Compressed {
                        statistic: Statistic::RunningMax(beta),
                        ..
                    } => sum - beta[step - 1],
                    PathFunctional::Compressed {
                        statistic: Statistic::RunningMaxAbs(beta),
                        ..
                    } => sum.abs() - beta[step - 1],
                    _ => unreachable!("running-max state without running-max statistic"),
                };
                PathState::Max {
                    sum,
                    max: Some(max.map_or(candidate, |m| m.max_of(candidate))),
                }
            }
            PathState::History(path) => {
                let mut path = path.clone();
                path.push(x);
                PathState::History(path)
            }
        }
    }

    fn terminal(&self, state: &PathState<T>) -> T {
        match (self, state) {
            (PathFunctional::Compressed { statistic, payoff }, PathState::Sum(s)) => match statistic {
                Statistic::ScaledSum(scale) => payoff(*scale * *s),
                _ => payoff(*s),
            },
            (PathFunctional::Compressed { payoff, .. }, PathState::Max { max, .. }) => {
                payoff(max.expect("terminal state after at least one step"))
            }
            (PathFunctional::FullPath { payoff }, PathState::History(path)) => payoff(path),
            _ => unreachable!("state kind does not match functional"),
        }
    }

    fn validate(&self, n: usize, config: &DpConfig) -> Result<()> {
        match self {
            PathFunctional::Compressed { statistic, .. } => statistic.validate(n),
            PathFunctional::FullPath { .. } if n > config.max_full_path_len => {
                Err(DpError::FullPathTooLong {
                    len: n,
                    max: config.max_full_path_len,
                })
            }
            PathFunctional::FullPath { .. } => Ok(()),
        }
    }
}

/// Compressed state of a path prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum PathState<T> {
    Sum(T),
    Max { sum: T, max: Option<T> },
    History(Vec<T>),
}

/// Exact identity of a [`PathState`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKey<K> {
    Sum(K),
    Max(K, Option<K>),
    History(Vec<K>),
}

impl<T: Scalar> PathState<T> {
    pub fn key(&self) -> StateKey<T::Key> {
        match self {
            PathState::Sum(s) => StateKey::Sum(s.key()),
            PathState::Max { sum, max } => StateKey::Max(sum.key(), max.map(Scalar::key)),
            PathState::History(p) => StateKey::History(p.iter().map(|x| x.key()).collect()),
        }
    }

    fn display_value(&self) -> f64 {
        match self {
            PathState::Sum(s) => s.to_f64(),
            PathState::Max { max, sum } => max.unwrap_or(*sum).to_f64(),
            PathState::History(p) => p.iter().map(|x| x.to_f64()).sum(),
        }
    }
}

/// Which envelope of the family to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Upper,
    Lower,
}

impl Objective {
    fn maximize(self) -> bool {
        matches!(self, Objective::Upper)
    }
}

/// Per-step choice of law as a function of the compressed state.
#[derive(Debug, Clone)]
pub struct AdversaryPolicy<T: Scalar> {
    objective: Objective,
    steps: Vec<HashMap<StateKey<T::Key>, usize>>,
}

impl<T: Scalar> AdversaryPolicy<T> {
    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Law used for factor `step + 1` when the prefix is in `state`.
    pub fn law_at(&self, step: usize, state: &PathState<T>) -> Option<usize> {
        self.steps.get(step)?.get(&state.key()).copied()
    }

    /// Expectation of `f` when the laws are fixed by this policy, computed by
    /// propagating the classical state distribution forward.
    pub fn replay(&self, seq: &IndependentSequence<T>, f: &PathFunctional<T>) -> Result<T> {
        let mut current: Vec<(PathState<T>, T)> = vec![(f.initial_state(), T::one())];
        for (k, factor) in seq.factors().iter().enumerate() {
            let mut index: HashMap<StateKey<T::Key>, usize> = HashMap::new();
            let mut next: Vec<(PathState<T>, T)> = Vec::new();
            for (state, mass) in &current {
                let law = self
                    .law_at(k, state)
                    .ok_or(DpError::PolicyIncomplete { step: k + 1 })?;
                let weights = factor.laws()[law].weights();
                for (&x, &w) in factor.support().points().iter().zip(weights) {
                    if w == T::zero() {
                        continue;
                    }
                    let child = f.advance(state, k + 1, x);
                    let key = child.key();
                    match index.get(&key) {
                        Some(&i) => next[i].1 = next[i].1 + *mass * w,
                        None => {
                            index.insert(key, next.len());
                            next.push((child, *mass * w));
                        }
                    }
                }
            }
            current = next;
        }
        Ok(current
            .iter()
            .fold(T::zero(), |acc, (s, p)| acc + *p * f.terminal(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    /// Largest admissible number of distinct states in one layer.
    pub max_states_per_layer: usize,
    /// Longest sequence accepted for full-path functionals.
    pub max_full_path_len: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            max_states_per_layer: 50_000_000,
            max_full_path_len: 6,
        }
    }
}

/// Result of one backward recursion.
#[derive(Debug, Clone)]
pub struct Solution<T: Scalar> {
    pub value: T,
    pub policy: Option<AdversaryPolicy<T>>,
    /// Number of states in the widest layer.
    pub peak_states: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DpEngine {
    pub config: DpConfig,
}

impl DpEngine {
    pub fn new(config: DpConfig) -> Self {
        Self { config }
    }

    pub fn solve<T: Scalar>(
        &self,
        seq: &IndependentSequence<T>,
        f: &PathFunctional<T>,
        objective: Objective,
        keep_policy: bool,
    ) -> Result<Solution<T>> {
        let n = seq.len();
        f.validate(n, &self.config)?;
        let cap = self.config.max_states_per_layer;

        // Forward pass: reachable states per layer and the child links.
        let mut layers: Vec<Vec<PathState<T>>> = vec![vec![f.initial_state()]];
        let mut links: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (k, factor) in seq.factors().iter().enumerate() {
            let points = factor.support().points();
            let prev = &layers[k];
            let mut index: HashMap<StateKey<T::Key>, usize> = HashMap::new();
            let mut next: Vec<PathState<T>> = Vec::new();
            let mut link = Vec::with_capacity(prev.len() * points.len());
            for state in prev {
                for &x in points {
                    let child = f.advance(state, k + 1, x);
                    let key = child.key();
                    let i = match index.get(&key) {
                        Some(&i) => i,
                        None => {
                            if next.len() == cap {
                                return Err(DpError::StateSpaceTooLarge {
                                    layer: k + 1,
                                    size: next.len() + 1,
                                    cap,
                                });
                            }
                            index.insert(key, next.len());
                            next.push(child);
                            next.len() - 1
                        }
                    };
                    link.push(i);
                }
            }
            layers.push(next);
            links.push(link);
        }
        let peak_states = layers.iter().map(Vec::len).max().unwrap_or(1);

        let mut values: Vec<T> = Vec::with_capacity(layers[n].len());
        for state in &layers[n] {
            let v = f.terminal(state);
            if !v.is_finite() {
                return Err(DpError::NonFinitePayoff {
                    state: state.display_value(),
                });
            }
            values.push(v);
        }

        let maximize = objective.maximize();
        let mut steps = Vec::new();
        for k in (0..n).rev() {
            let factor = &seq.factors()[k];
            let width = factor.support().len();
            let link = &links[k];
            let evaluate = |i: usize| -> (T, usize) {
                let children = &link[i * width..(i + 1) * width];
                let mut best: Option<(T, usize)> = None;
                for (law_index, law) in factor.laws().iter().enumerate() {
                    let v = law
                        .weights()
                        .iter()
                        .zip(children)
                        .fold(T::zero(), |acc, (w, &c)| acc + *w * values[c]);
                    let better = match best {
                        None => true,
                        Some((b, _)) if maximize => v > b,
                        Some((b, _)) => v < b,
                    };
                    if better {
                        best = Some((v, law_index));
                    }
                }
                best.expect("family is nonempty")
            };
            let prev_len = layers[k].len();
            let results: Vec<(T, usize)> = if prev_len >= PARALLEL_LAYER {
                (0..prev_len).into_par_iter().map(evaluate).collect()
            } else {
                (0..prev_len).map(evaluate).collect()
            };
            if keep_policy {
                let map = layers[k]
                    .iter()
                    .zip(&results)
                    .map(|(s, &(_, law))| (s.key(), law))
                    .collect::<HashMap<_, _>>();
                steps.push(map);
            }
            values = results.into_iter().map(|(v, _)| v).collect();
        }
        steps.reverse();

        Ok(Solution {
            value: values[0],
            policy: keep_policy.then_some(AdversaryPolicy { objective, steps }),
            peak_states,
        })
    }

    pub fn nested_expectation<T: Scalar>(
        &self,
        seq: &IndependentSequence<T>,
        f: &PathFunctional<T>,
    ) -> Result<T> {
        Ok(self.solve(seq, f, Objective::Upper, false)?.value)
    }

    pub fn nested_lower_expectation<T: Scalar>(
        &self,
        seq: &IndependentSequence<T>,
        f: &PathFunctional<T>,
    ) -> Result<T> {
        Ok(self.solve(seq, f, Objective::Lower, false)?.value)
    }

    /// Upper capacity of `{predicate(statistic)}` and the conjugate lower
    /// capacity `1 − V(complement)`.
    pub fn path_capacity<T: Scalar>(
        &self,
        seq: &IndependentSequence<T>,
        event: &PathEvent<T>,
    ) -> Result<CapacityPair<T>> {
        let upper = self.nested_expectation(seq, &event.indicator())?;
        let complement = self.nested_expectation(seq, &event.complement().indicator())?;
        Ok(CapacityPair::new(upper, T::one() - complement)?)
    }

    pub fn extract_policy<T: Scalar>(
        &self,
        seq: &IndependentSequence<T>,
        f: &PathFunctional<T>,
    ) -> Result<AdversaryPolicy<T>> {
        Ok(self
            .solve(seq, f, Objective::Upper, true)?
            .policy
            .expect("policy requested"))
    }
}

/// Event `{predicate(statistic)}` on the compressed path state.
#[derive(Clone)]
pub struct PathEvent<T> {
    pub statistic: Statistic<T>,
    pub predicate: Predicate<T>,
}

impl<T: Scalar> PathEvent<T> {
    pub fn new(statistic: Statistic<T>, predicate: impl Fn(T) -> bool + Send + Sync + 'static) -> Self {
        Self {
            statistic,
            predicate: Arc::new(predicate),
        }
    }

    /// `{statistic > level}` if strict, `{statistic ≥ level}` otherwise.
    pub fn exceeds(statistic: Statistic<T>, level: T, strict: bool) -> Self {
        Self::new(statistic, move |v| exceeds(v, level, strict))
    }

    /// `{|statistic| > level}` if strict, `{|statistic| ≥ level}` otherwise.
    pub fn abs_exceeds(statistic: Statistic<T>, level: T, strict: bool) -> Self {
        Self::new(statistic, move |v| exceeds(v.abs(), level, strict))
    }

    pub fn complement(&self) -> Self {
        let p = Arc::clone(&self.predicate);
        Self::new(self.statistic.clone(), move |v| !p(v))
    }

    pub fn indicator(&self) -> PathFunctional<T> {
        PathFunctional::indicator(self.statistic.clone(), Arc::clone(&self.predicate))
    }
}

/// `Ê[f(X_1, ..., X_n)]` with the default engine configuration.
pub fn nested_expectation<T: Scalar>(seq: &IndependentSequence<T>, f: &PathFunctional<T>) -> Result<T> {
    DpEngine::default().nested_expectation(seq, f)
}

/// `ε̂[f(X_1, ..., X_n)]` with the default engine configuration.
pub fn nested_lower_expectation<T: Scalar>(
    seq: &IndependentSequence<T>,
    f: &PathFunctional<T>,
) -> Result<T> {
    DpEngine::default().nested_lower_expectation(seq, f)
}

pub fn path_capacity<T: Scalar>(seq: &IndependentSequence<T>, event: &PathEvent<T>) -> Result<CapacityPair<T>> {
    DpEngine::default().path_capacity(seq, event)
}

pub fn extract_policy<T: Scalar>(
    seq: &IndependentSequence<T>,
    f: &PathFunctional<T>,
) -> Result<AdversaryPolicy<T>> {
    DpEngine::default().extract_policy(seq, f)
}

/// Size limits for [`brute_force_expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    pub max_len: usize,
    pub max_support: usize,
    pub max_family: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        Self {
            max_len: 6,
            max_support: 4,
            max_family: 3,
        }
    }
}

impl OracleBounds {
    fn check<T: Scalar>(&self, seq: &IndependentSequence<T>) -> Result<()> {
        if seq.len() > self.max_len {
            return Err(DpError::OracleBounds(format!(
                "length {} > {}",
                seq.len(),
                self.max_len
            )));
        }
        for (k, factor) in seq.factors().iter().enumerate() {
            if factor.support().len() > self.max_support {
                return Err(DpError::OracleBounds(format!(
                    "factor {} has {} support points > {}",
                    k + 1,
                    factor.support().len(),
                    self.max_support
                )));
            }
            if factor.laws().len() > self.max_family {
                return Err(DpError::OracleBounds(format!(
                    "factor {} has {} laws > {}",
                    k + 1,
                    factor.laws().len(),
                    self.max_family
                )));
            }
        }
        Ok(())
    }
}

/// Nested expectation by literal recursion on full histories: the law at
/// every node may depend on the entire history, and nothing is compressed.
pub fn brute_force_expectation<T: Scalar>(
    seq: &IndependentSequence<T>,
    f: &PathFunctional<T>,
    objective: Objective,
    bounds: OracleBounds,
) -> Result<T> {
    bounds.check(seq)?;
    if let PathFunctional::Compressed { statistic, .. } = f {
        statistic.validate(seq.len())?;
    }
    let mut history = Vec::with_capacity(seq.len());
    Ok(expand(seq, f, objective.maximize(), &mut history))
}

fn expand<T: Scalar>(
    seq: &IndependentSequence<T>,
    f: &PathFunctional<T>,
    maximize: bool,
    history: &mut Vec<T>,
) -> T {
    let depth = history.len();
    if depth == seq.len() {
        return f.evaluate_path(history);
    }
    let factor = &seq.factors()[depth];
    let mut continuation = Vec::with_capacity(factor.support().len());
    for &x in factor.support().points() {
        history.push(x);
        continuation.push(expand(seq, f, maximize, history));
        history.pop();
    }
    factor.extremum_of_values(&continuation, maximize).value
}
