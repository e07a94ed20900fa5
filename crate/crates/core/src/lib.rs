//! Computable sub-linear expectation spaces.
//!
//! The crate evaluates upper and lower expectations and capacities of
//! independent sequences exactly, checks the Lévy, Kolmogorov and
//! Rosenthal-type maximal inequalities on exhaustive instance grids, inspects
//! three-series conditions for random series, and solves the G-heat equation
//! to compare normalized sums against G-normal expectations.
//!
//! ```
//! use subexp::{nested_expectation, AmbiguitySet, IndependentSequence, PathFunctional};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let x = AmbiguitySet::new(
//!     vec![-1.0, 0.0, 1.0],
//!     vec![vec![0.125, 0.75, 0.125], vec![0.5, 0.0, 0.5]],
//! )?;
//! assert_eq!(x.upper_expectation(|v| v * v)?.value, 1.0);
//!
//! let seq = IndependentSequence::iid(&x, 4)?;
//! let value = nested_expectation(&seq, &PathFunctional::terminal_sum(|s: f64| s.max(0.0)))?;
//! assert!(value > 0.0);
//! # Ok(())
//! # }
//! ```

pub mod clt;
pub mod dp;
pub mod functions;
pub mod gpde;
pub mod inequalities;
pub mod output;
pub mod scalar;
pub mod series;
pub mod space;
pub mod suite;

pub use dp::{
    brute_force_expectation, extract_policy, nested_expectation, nested_lower_expectation,
    path_capacity, AdversaryPolicy, DpConfig, DpEngine, DpError, IndependentSequence, Objective,
    OracleBounds, PathEvent, PathFunctional, PathState, Statistic,
};
pub use functions::TestFunction;
pub use gpde::{GNormalParams, Grid};
pub use scalar::{Rational, Scalar};
pub use series::{ScaleRule, SequenceGenerator};
pub use space::{
    AmbiguitySet, CapacityPair, CoreError, DiscreteLaw, Event, Extremum, FamilySpec, Support,
    TruncationLevel,
};
