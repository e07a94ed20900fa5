//! Concrete sub-linear expectation spaces for a single random variable.
//!
//! A variable is described by an [`AmbiguitySet`]: a finite support and a
//! nonempty finite family of discrete laws on it. The upper expectation is
//! the maximum of the classical expectations over the family, which makes
//! monotonicity, constant preservation, sub-additivity and positive
//! homogeneity hold by construction. Because supports are finite, indicator
//! functions are admissible test functions and the upper capacity of an
//! event is simply the upper expectation of its indicator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("support is empty")]
    EmptySupport,
    #[error("support point {index} is not finite")]
    NonFiniteSupport { index: usize },
    #[error("support is not strictly increasing at index {index}")]
    SupportNotIncreasing { index: usize },
    #[error("family has no laws")]
    EmptyFamily,
    #[error("law {law} has {found} weights but the support has {expected} points")]
    LawLength {
        law: usize,
        expected: usize,
        found: usize,
    },
    #[error("law {law} has a non-finite weight at index {index}")]
    NonFiniteWeight { law: usize, index: usize },
    #[error("law {law} has negative weight {weight} at index {index}")]
    NegativeWeight { law: usize, index: usize, weight: f64 },
    #[error("weights of law {law} sum to {sum}, expected 1")]
    WeightSum { law: usize, sum: f64 },
    #[error("test function is not finite at support point {point} (index {index})")]
    NonFinitePhi { index: usize, point: f64 },
    #[error("event point {point} is not in the support")]
    EventPointNotInSupport { point: f64 },
    #[error("truncation level must be positive, got {0}")]
    NonPositiveTruncation(f64),
    #[error("capacity pair ({upper}, {lower}) violates 0 <= lower <= upper <= 1")]
    InvalidCapacity { upper: f64, lower: f64 },
    #[error("malformed family json: {0}")]
    Json(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

/// Strictly increasing, nonempty list of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Support<T> {
    points: Vec<T>,
}

impl<T: Scalar> Support<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(CoreError::EmptySupport);
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(CoreError::NonFiniteSupport { index });
            }
            if index > 0 && points[index - 1] >= *p {
                return Err(CoreError::SupportNotIncreasing { index });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest absolute value in the support.
    pub fn radius(&self) -> T {
        let lo = self.points[0].abs();
        let hi = self.points[self.points.len() - 1].abs();
        lo.max_of(hi)
    }

    pub fn position(&self, x: T) -> Option<usize> {
        self.points.iter().position(|p| p.key() == x.key())
    }
}

/// One candidate law: nonnegative weights aligned with a support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw<T> {
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteLaw<T> {
    /// Validates the weights against a support of `len` points. `law` is the
    /// index reported in errors.
    fn validated(weights: Vec<T>, len: usize, law: usize) -> Result<Self> {
        if weights.len() != len {
            return Err(CoreError::LawLength {
                law,
                expected: len,
                found: weights.len(),
            });
        }
        let mut sum = T::zero();
        for (index, w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(CoreError::NonFiniteWeight { law, index });
            }
            if *w < T::zero() {
                return Err(CoreError::NegativeWeight {
                    law,
                    index,
                    weight: w.to_f64(),
                });
            }
            sum = sum + *w;
        }
        if !sum.approx_eq(T::one()) {
            return Err(CoreError::WeightSum {
                law,
                sum: sum.to_f64(),
            });
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Classical expectation of `values` (aligned with the support).
    pub fn expect(&self, values: &[T]) -> T {
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |acc, (w, v)| acc + *w * *v)
    }
}

/// Value of an extremal expectation together with the attaining law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub value: T,
    /// Index of the attaining law; ties go to the lowest index.
    pub law: usize,
}

/// Upper capacity `V(A)` and lower capacity `v(A) = 1 - V(A^c)` of an event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPair<T> {
    pub upper: T,
    pub lower: T,
}

impl<T: Scalar> CapacityPair<T> {
    pub fn new(upper: T, lower: T) -> Result<Self> {
        let ok = T::zero().le_tol(lower)
            && lower.le_tol(upper)
            && upper.le_tol(T::one());
        if !ok {
            return Err(CoreError::InvalidCapacity {
                upper: upper.to_f64(),
                lower: lower.to_f64(),
            });
        }
        Ok(Self { upper, lower })
    }

    /// The pair for an event that cannot happen.
    pub fn null() -> Self {
        Self {
            upper: T::zero(),
            lower: T::zero(),
        }
    }
}

/// Truncation level `c > 0` for `X^c = (-c) ∨ (X ∧ c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationLevel<T>(T);

impl<T: Scalar> TruncationLevel<T> {
    pub fn new(c: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(CoreError::NonPositiveTruncation(c.to_f64()));
        }
        Ok(Self(c))
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn clip(self, x: T) -> T {
        (-self.0).max_of(x.min_of(self.0))
    }
}

/// Subset of a support. Threshold events carry a strictness flag and are
/// resolved exactly on the support points.
#[derive(Debug, Clone, PartialEq)]
pub enum Event<T> {
    /// Explicit list of support points.
    Points(Vec<T>),
    /// `{x > level}` when strict, `{x >= level}` otherwise.
    Above { level: T, strict: bool },
    /// `{x < level}` when strict, `{x <= level}` otherwise.
    Below { level: T, strict: bool },
    /// `{|x| > level}` when strict, `{|x| >= level}` otherwise.
    AbsAbove { level: T, strict: bool },
}

impl<T: Scalar> Event<T> {
    pub fn contains(&self, x: T) -> bool {
        match self {
            Event::Points(points) => points.iter().any(|p| p.key() == x.key()),
            Event::Above { level, strict } => exceeds(x, *level, *strict),
            Event::Below { level, strict } => {
                if *strict {
                    x < *level
                } else {
                    x <= *level
                }
            }
            Event::AbsAbove { level, strict } => exceeds(x.abs(), *level, *strict),
        }
    }

    /// Membership mask over a support; rejects explicit points outside it.
    pub fn mask(&self, support: &Support<T>) -> Result<Vec<bool>> {
        if let Event::Points(points) = self {
            if let Some(p) = points.iter().find(|p| support.position(**p).is_none()) {
                return Err(CoreError::EventPointNotInSupport { point: p.to_f64() });
            }
        }
        Ok(support.points().iter().map(|x| self.contains(*x)).collect())
    }
}

/// `x > level` if strict, `x >= level` otherwise.
pub fn exceeds<T: Scalar>(x: T, level: T, strict: bool) -> bool {
    if strict {
        x > level
    } else {
        x >= level
    }
}

/// Distributional uncertainty of one random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet<T> {
    support: Support<T>,
    laws: Vec<DiscreteLaw<T>>,
}

impl<T: Scalar> AmbiguitySet<T> {
    pub fn new(points: Vec<T>, laws: Vec<Vec<T>>) -> Result<Self> {
        let support = Support::new(points)?;
        Self::from_support(support, laws)
    }

    pub fn from_support(support: Support<T>, laws: Vec<Vec<T>>) -> Result<Self> {
        if laws.is_empty() {
            return Err(CoreError::EmptyFamily);
        }
        let len = support.len();
        let laws = laws
            .into_iter()
            .enumerate()
            .map(|(i, w)| DiscreteLaw::validated(w, len, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { support, laws })
    }

    /// Point mass at `x`.
    pub fn dirac(x: T) -> Result<Self> {
        Self::new(vec![x], vec![vec![T::one()]])
    }

    /// Single uniform law on the given points.
    pub fn uniform(points: Vec<T>) -> Result<Self> {
        let n = points.len() as i64;
        let w = T::ratio(1, n.max(1));
        let weights = vec![w; points.len()];
        Self::new(points, vec![weights])
    }

    pub fn support(&self) -> &Support<T> {
        &self.support
    }

    pub fn laws(&self) -> &[DiscreteLaw<T>] {
        &self.laws
    }

    pub fn is_singleton(&self) -> bool {
        self.laws.len() == 1
    }

    fn sample(&self, phi: impl Fn(T) -> T) -> Result<Vec<T>> {
        self.support
            .points()
            .iter()
            .enumerate()
            .map(|(index, &x)| {
                let v = phi(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(CoreError::NonFinitePhi {
                        index,
                        point: x.to_f64(),
                    })
                }
            })
            .collect()
    }

    /// Extremum of the classical expectations of `values` over the family.
    /// `maximize` selects the upper expectation; ties keep the lowest index.
    pub fn extremum_of_values(&self, values: &[T], maximize: bool) -> Extremum<T> {
        let mut best = Extremum {
            value: self.laws[0].expect(values),
            law: 0,
        };
        for (law, theta) in self.laws.iter().enumerate().skip(1) {
            let v = theta.expect(values);
            let better = if maximize { v > best.value } else { v < best.value };
            if better {
                best = Extremum { value: v, law };
            }
        }
        best
    }

    /// `Ê[phi(X)]`: the largest classical expectation over the family.
    pub fn upper_expectation(&self, phi: impl Fn(T) -> T) -> Result<Extremum<T>> {
        let values = self.sample(phi)?;
        Ok(self.extremum_of_values(&values, true))
    }

    /// Conjugate expectation `-Ê[-phi(X)]`, i.e. the smallest classical
    /// expectation over the family.
    pub fn lower_expectation(&self, phi: impl Fn(T) -> T) -> Result<Extremum<T>> {
        let values = self.sample(|x| -phi(x))?;
        let upper = self.extremum_of_values(&values, true);
        Ok(Extremum {
            value: -upper.value,
            law: upper.law,
        })
    }

    /// Shorthand for `Ê[X]`.
    pub fn upper_mean(&self) -> T {
        self.extremum_of_values(self.support.points(), true).value
    }

    pub fn capacity(&self, event: &Event<T>) -> Result<CapacityPair<T>> {
        let mask = self.event_mask(event)?;
        Ok(self.capacity_of_mask(&mask))
    }

    fn event_mask(&self, event: &Event<T>) -> Result<Vec<bool>> {
        event.mask(&self.support)
    }

    fn capacity_of_mask(&self, mask: &[bool]) -> CapacityPair<T> {
        let indicator: Vec<T> = mask
            .iter()
            .map(|&m| if m { T::one() } else { T::zero() })
            .collect();
        let complement: Vec<T> = mask
            .iter()
            .map(|&m| if m { T::zero() } else { T::one() })
            .collect();
        let upper = self.extremum_of_values(&indicator, true).value;
        let upper_complement = self.extremum_of_values(&complement, true).value;
        CapacityPair {
            upper,
            lower: T::one() - upper_complement,
        }
    }

    /// Pushforward of every law under `f`. Points that collide are merged
    /// and their weights summed.
    pub fn map_support(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let mut mapped: Vec<(T, usize)> = self
            .support
            .points()
            .iter()
            .enumerate()
            .map(|(i, &x)| (f(x), i))
            .collect();
        if let Some((index, _)) = mapped.iter().enumerate().find(|(_, (y, _))| !y.is_finite()) {
            return Err(CoreError::NonFiniteSupport { index });
        }
        mapped.sort_by_key(|a| a.0.key());

        let mut points: Vec<T> = Vec::with_capacity(mapped.len());
        // target[i] = merged index of original point i
        let mut target = vec![0usize; mapped.len()];
        for (y, original) in &mapped {
            if points.last().map(|p| p.key()) != Some(y.key()) {
                points.push(*y);
            }
            target[*original] = points.len() - 1;
        }
        let laws = self
            .laws
            .iter()
            .map(|law| {
                let mut w = vec![T::zero(); points.len()];
                for (i, &wi) in law.weights.iter().enumerate() {
                    w[target[i]] = w[target[i]] + wi;
                }
                w
            })
            .collect();
        Self::new(points, laws)
    }

    /// Family of `X^c = (-c) ∨ (X ∧ c)`.
    pub fn truncate(&self, c: TruncationLevel<T>) -> Result<Self> {
        self.map_support(|x| c.clip(x))
    }

    /// Family of `a·X`.
    pub fn scale(&self, a: T) -> Result<Self> {
        self.map_support(|x| x * a)
    }

    /// Family of `X + b`.
    pub fn shift(&self, b: T) -> Result<Self> {
        self.map_support(|x| x + b)
    }

    /// Converts weights and points into another backend.
    pub fn convert<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<AmbiguitySet<U>> {
        let points = self.support.points().iter().map(|&x| f(x)).collect();
        let laws = self
            .laws
            .iter()
            .map(|l| l.weights.iter().map(|&w| f(w)).collect())
            .collect();
        AmbiguitySet::new(points, laws)
    }
}

/// On-disk form of a family: `{"support": [...], "laws": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub support: Vec<f64>,
    pub laws: Vec<Vec<f64>>,
}

impl TryFrom<FamilySpec> for AmbiguitySet<f64> {
    type Error = CoreError;

    fn try_from(spec: FamilySpec) -> Result<Self> {
        AmbiguitySet::new(spec.support, spec.laws)
    }
}

impl From<&AmbiguitySet<f64>> for FamilySpec {
    fn from(set: &AmbiguitySet<f64>) -> Self {
        FamilySpec {
            support: set.support.points().to_vec(),
            laws: set.laws.iter().map(|l| l.weights.clone()).collect(),
        }
    }
}

impl AmbiguitySet<f64> {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: FamilySpec =
            serde_json::from_str(text).map_err(|e| CoreError::Json(e.to_string()))?;
        spec.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&FamilySpec::from(self)).expect("family serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn point_masses() -> AmbiguitySet<f64> {
        AmbiguitySet::new(vec![-1.0, 1.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn sigma_family() -> AmbiguitySet<f64> {
        let law = |s2: f64| vec![s2 / 2.0, 1.0 - s2, s2 / 2.0];
        AmbiguitySet::new(vec![-1.0, 0.0, 1.0], vec![law(0.25), law(1.0)]).unwrap()
    }

    #[test]
    fn fair_coin_mean_is_zero() {
        let coin = AmbiguitySet::uniform(vec![-1.0, 1.0]).unwrap();
        assert_eq!(coin.upper_expectation(|x| x).unwrap().value, 0.0);
    }

    #[test]
    fn point_masses_are_fully_ambiguous() {
        let fam = point_masses();
        assert_eq!(fam.upper_expectation(|x| x).unwrap().value, 1.0);
        assert_eq!(fam.upper_expectation(|x| -x).unwrap().value, 1.0);
        assert_eq!(fam.lower_expectation(|x| x).unwrap().value, -1.0);
        let cap = fam.capacity(&Event::Points(vec![1.0])).unwrap();
        assert_eq!((cap.upper, cap.lower), (1.0, 0.0));
    }

    #[test]
    fn sigma_family_second_moments() {
        let fam = sigma_family();
        let up = fam.upper_expectation(|x| x * x).unwrap();
        assert_eq!(up.value, 1.0);
        assert_eq!(up.law, 1);
        assert_eq!(fam.lower_expectation(|x| x * x).unwrap().value, 0.25);
        let cap = fam
            .capacity(&Event::AbsAbove {
                level: 1.0,
                strict: false,
            })
            .unwrap();
        assert_eq!((cap.upper, cap.lower), (1.0, 0.25));
    }

    #[test]
    fn constant_phi_is_preserved_by_lower_expectation() {
        let fam = sigma_family();
        assert_eq!(fam.lower_expectation(|_| 3.5).unwrap().value, 3.5);
    }

    #[test]
    fn half_line_capacity_of_fair_coin() {
        let coin = AmbiguitySet::uniform(vec![-1.0, 1.0]).unwrap();
        let cap = coin
            .capacity(&Event::Above {
                level: 0.0,
                strict: false,
            })
            .unwrap();
        assert_eq!((cap.upper, cap.lower), (0.5, 0.5));
    }

    #[test]
    fn strict_and_weak_thresholds_differ_on_atoms() {
        let coin = AmbiguitySet::uniform(vec![-1.0, 1.0]).unwrap();
        let weak = Event::Above { level: 1.0, strict: false };
        let strict = Event::Above { level: 1.0, strict: true };
        assert_eq!(coin.capacity(&weak).unwrap().upper, 0.5);
        assert_eq!(coin.capacity(&strict).unwrap().upper, 0.0);
    }

    #[test]
    fn event_outside_support_is_rejected() {
        let coin = AmbiguitySet::uniform(vec![-1.0, 1.0]).unwrap();
        let err = coin.capacity(&Event::Points(vec![0.0])).unwrap_err();
        assert_eq!(err, CoreError::EventPointNotInSupport { point: 0.0 });
    }

    #[test]
    fn non_finite_phi_names_the_point() {
        let coin = AmbiguitySet::uniform(vec![-1.0, 1.0]).unwrap();
        let err = coin
            .upper_expectation(|x| if x > 0.0 { f64::NAN } else { x })
            .unwrap_err();
        assert_eq!(err, CoreError::NonFinitePhi { index: 1, point: 1.0 });
    }

    #[test]
    fn truncation_above_range_is_identity() {
        let fam = point_masses();
        let c = TruncationLevel::new(2.0).unwrap();
        assert_eq!(fam.truncate(c).unwrap(), fam);
    }

    #[test]
    fn truncation_clips_support() {
        let third = 1.0 / 3.0;
        let fam = AmbiguitySet::new(vec![-3.0, 0.0, 3.0], vec![vec![third; 3]]).unwrap();
        let t = fam.truncate(TruncationLevel::new(1.0).unwrap()).unwrap();
        assert_eq!(t.support().points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(t.laws()[0].weights(), &[third; 3]);
    }

    #[test]
    fn truncation_preserves_mass_per_law() {
        let fam =
            AmbiguitySet::new(vec![-2.0, 2.0], vec![vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        let t = fam.truncate(TruncationLevel::new(1.0).unwrap()).unwrap();
        assert_eq!(t.support().points(), &[-1.0, 1.0]);
        assert_eq!(t.laws()[0].weights(), &[0.25, 0.75]);
        assert_eq!(t.laws()[1].weights(), &[0.5, 0.5]);
    }

    #[test]
    fn truncation_merges_collapsed_points() {
        let fam = AmbiguitySet::uniform(vec![-3.0, -2.0, 0.0, 2.0]).unwrap();
        let t = fam.truncate(TruncationLevel::new(1.0).unwrap()).unwrap();
        assert_eq!(t.support().points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(t.laws()[0].weights(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn non_positive_truncation_is_rejected() {
        assert!(TruncationLevel::new(0.0).is_err());
        assert!(TruncationLevel::new(-1.0).is_err());
    }

    #[test]
    fn validation_reports_first_violation() {
        assert_eq!(
            AmbiguitySet::<f64>::new(vec![], vec![vec![]]).unwrap_err(),
            CoreError::EmptySupport
        );
        assert_eq!(
            AmbiguitySet::new(vec![0.0, 0.0], vec![vec![0.5, 0.5]]).unwrap_err(),
            CoreError::SupportNotIncreasing { index: 1 }
        );
        assert_eq!(
            AmbiguitySet::<f64>::new(vec![0.0], vec![]).unwrap_err(),
            CoreError::EmptyFamily
        );
        assert_eq!(
            AmbiguitySet::new(vec![0.0, 1.0], vec![vec![0.5, 0.5], vec![0.5, 0.4]]).unwrap_err(),
            CoreError::WeightSum { law: 1, sum: 0.9 }
        );
        assert!(matches!(
            AmbiguitySet::new(vec![0.0, 1.0], vec![vec![1.5, -0.5]]).unwrap_err(),
            CoreError::NegativeWeight { law: 0, index: 1, .. }
        ));
        assert_eq!(
            AmbiguitySet::new(vec![0.0, 1.0], vec![vec![1.0]]).unwrap_err(),
            CoreError::LawLength { law: 0, expected: 2, found: 1 }
        );
    }

    #[test]
    fn rational_weights_must_sum_exactly() {
        let third = Rational::new(1, 3);
        assert!(AmbiguitySet::new(
            vec![Rational::from_integer(0), Rational::from_integer(1), Rational::from_integer(2)],
            vec![vec![third, third, third]]
        )
        .is_ok());
        let err = AmbiguitySet::new(
            vec![Rational::from_integer(0), Rational::from_integer(1)],
            vec![vec![third, third]],
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::WeightSum { law: 0, .. }));
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let fam = sigma_family();
        let text = fam.to_json_string();
        assert_eq!(AmbiguitySet::from_json_str(&text).unwrap(), fam);

        let bad = r#"{"support": [-1, 1], "laws": [[0.5, 0.5], [0.5, 0.4]]}"#;
        assert_eq!(
            AmbiguitySet::from_json_str(bad).unwrap_err(),
            CoreError::WeightSum { law: 1, sum: 0.9 }
        );
        assert!(matches!(
            AmbiguitySet::from_json_str("{\"support\": [1]}").unwrap_err(),
            CoreError::Json(_)
        ));
    }
}
