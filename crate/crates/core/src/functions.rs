//! Bounded Lipschitz test functions used by the distribution and CLT
//! diagnostics.

use std::fmt;
use std::sync::Arc;

/// A named bounded Lipschitz function `ℝ → ℝ`.
#[derive(Clone)]
pub struct TestFunction {
    pub id: String,
    /// Lipschitz constant.
    pub lipschitz: f64,
    /// Bound on `|f|`.
    pub bound: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("lipschitz", &self.lipschitz)
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

fn clip(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

impl TestFunction {
    pub fn new(
        id: impl Into<String>,
        lipschitz: f64,
        bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            lipschitz,
            bound,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Shared handle to the underlying closure.
    pub fn handle(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        Arc::clone(&self.f)
    }

    /// `(−1) ∨ s ∧ 1`.
    pub fn clipped_ramp() -> Self {
        Self::new("ramp", 1.0, 1.0, clip)
    }

    /// `min(|s|, 1)`.
    pub fn clipped_abs() -> Self {
        Self::new("abs", 1.0, 1.0, |s: f64| s.abs().min(1.0))
    }

    /// `(−1) ∨ (s − shift) ∧ 1`.
    pub fn shifted_ramp(shift: f64) -> Self {
        Self::new(format!("ramp_shift_{shift}"), 1.0, 1.0, move |s| clip(s - shift))
    }

    /// `exp(−s²/2)`.
    pub fn bump() -> Self {
        Self::new("bump", (-0.5f64).exp(), 1.0, |s: f64| (-0.5 * s * s).exp())
    }

    pub fn cosine() -> Self {
        Self::new("cos", 1.0, 1.0, f64::cos)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const_{c}"), 0.0, c.abs(), move |_| c)
    }

    /// The five functions used by the CLT suite: convex-like, concave-like
    /// and neither.
    pub fn clt_set() -> Vec<Self> {
        vec![
            Self::clipped_ramp(),
            Self::clipped_abs(),
            Self::shifted_ramp(0.5),
            Self::shifted_ramp(-0.5),
            Self::bump(),
        ]
    }

    /// Look up a function by its identifier.
    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "ramp" => Some(Self::clipped_ramp()),
            "abs" => Some(Self::clipped_abs()),
            "bump" => Some(Self::bump()),
            "cos" => Some(Self::cosine()),
            _ => {
                if let Some(rest) = id.strip_prefix("ramp_shift_") {
                    rest.parse().ok().map(Self::shifted_ramp)
                } else if let Some(rest) = id.strip_prefix("const_") {
                    rest.parse().ok().map(Self::constant)
                } else {
                    None
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_round_trip() {
        for f in TestFunction::clt_set()
            .into_iter()
            .chain([TestFunction::cosine(), TestFunction::constant(1.0)])
        {
            let g = TestFunction::by_id(&f.id).expect("known id");
            for x in [-3.0, -0.7, 0.0, 0.2, 1.4] {
                assert_eq!(f.eval(x), g.eval(x));
            }
        }
        assert!(TestFunction::by_id("nope").is_none());
    }

    #[test]
    fn stated_constants_hold_on_a_sample() {
        for f in TestFunction::clt_set().into_iter().chain([TestFunction::cosine()]) {
            let xs: Vec<f64> = (-400..=400).map(|i| i as f64 / 50.0).collect();
            for w in xs.windows(2) {
                let slope = (f.eval(w[1]) - f.eval(w[0])).abs() / (w[1] - w[0]);
                assert!(slope <= f.lipschitz + 1e-9, "{}", f.id);
                assert!(f.eval(w[0]).abs() <= f.bound, "{}", f.id);
            }
        }
    }
}
