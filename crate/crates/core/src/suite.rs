//! Seeded randomized property suites.
//!
//! Every case is drawn from a `ChaCha8Rng` seeded with the suite seed, so a
//! given seed yields the same instance stream on every platform. Rows use
//! the same [`CheckRow`] format as the inequality grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dp::{
    brute_force_expectation, DpEngine, IndependentSequence, Objective, OracleBounds, PathFunctional,
};
use crate::inequalities::grid::{CheckRow, SuiteOutcome};
use crate::scalar::{Rational, Scalar};
use crate::space::{AmbiguitySet, Event};

/// Tolerance for DP-vs-oracle agreement and policy replay.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

fn rational(rng: &mut impl Rng, max_abs: i64, max_denom: i64) -> Rational {
    let d = rng.random_range(1..=max_denom);
    let n = rng.random_range(-max_abs * d..=max_abs * d);
    Rational::new(n as i128, d as i128)
}

/// Weights that are multiples of `1/total` summing to 1; zeros allowed.
fn rational_weights(rng: &mut impl Rng, len: usize, total: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (0..len - 1).map(|_| rng.random_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(len);
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(Rational::new((c - prev) as i128, total as i128));
        prev = c;
    }
    out
}

fn rational_support(rng: &mut impl Rng, max_len: usize) -> Vec<Rational> {
    let len = rng.random_range(1..=max_len);
    let mut pts: Vec<Rational> = Vec::with_capacity(len);
    while pts.len() < len {
        let p = rational(rng, 3, 4);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.sort();
    pts
}

fn rational_family(rng: &mut impl Rng, max_support: usize, max_laws: usize) -> AmbiguitySet<Rational> {
    let points = rational_support(rng, max_support);
    let laws = (0..rng.random_range(1..=max_laws))
        .map(|_| rational_weights(rng, points.len(), 12))
        .collect();
    AmbiguitySet::new(points, laws).expect("generated family is valid")
}

struct Rows {
    case: usize,
    rows: Vec<CheckRow>,
}

impl Rows {
    /// Records the check `lhs ≤ rhs`.
    fn le(&mut self, name: &str, lhs: Rational, rhs: Rational) {
        self.rows.push(CheckRow {
            id: format!("case{}/{}", self.case, name),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            holds: lhs <= rhs,
            ratio: None,
        });
    }

    fn eq(&mut self, name: &str, lhs: Rational, rhs: Rational) {
        self.rows.push(CheckRow {
            id: format!("case{}/{}", self.case, name),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            holds: lhs == rhs,
            ratio: None,
        });
    }
}

fn upper(f: &AmbiguitySet<Rational>, values: &[Rational]) -> Rational {
    f.extremum_of_values(values, true).value
}

fn lower(f: &AmbiguitySet<Rational>, values: &[Rational]) -> Rational {
    f.extremum_of_values(values, false).value
}

fn axiom_case(case: usize, rng: &mut ChaCha8Rng) -> Vec<CheckRow> {
    let fam = rational_family(rng, 5, 3);
    let len = fam.support().len();
    let phi: Vec<Rational> = (0..len).map(|_| rational(rng, 5, 6)).collect();
    let psi: Vec<Rational> = (0..len).map(|_| rational(rng, 5, 6)).collect();
    let bump: Vec<Rational> = (0..len).map(|_| rational(rng, 2, 6).abs()).collect();
    let lambda = rational(rng, 4, 5).abs();
    let c = rational(rng, 4, 5);
    let mut out = Rows { case, rows: Vec::new() };

    let dominating: Vec<Rational> = phi.iter().zip(&bump).map(|(a, b)| *a + *b).collect();
    out.le("monotonicity", upper(&fam, &phi), upper(&fam, &dominating));

    out.eq("constant", upper(&fam, &vec![c; len]), c);

    let sum: Vec<Rational> = phi.iter().zip(&psi).map(|(a, b)| *a + *b).collect();
    out.le("subadditivity", upper(&fam, &sum), upper(&fam, &phi) + upper(&fam, &psi));

    let scaled: Vec<Rational> = phi.iter().map(|a| lambda * *a).collect();
    out.eq("homogeneity", upper(&fam, &scaled), lambda * upper(&fam, &phi));

    out.le("lower_le_upper", lower(&fam, &phi), upper(&fam, &phi));
    let neg: Vec<Rational> = phi.iter().map(|a| -*a).collect();
    out.eq("conjugate", lower(&fam, &phi), -upper(&fam, &neg));
    let shifted: Vec<Rational> = phi.iter().map(|a| *a + c).collect();
    out.eq("translation", upper(&fam, &shifted), upper(&fam, &phi) + c);

    let pick = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
        fam.support()
            .points()
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.5))
            .collect()
    };
    let a = pick(rng);
    let b = pick(rng);
    let union: Vec<Rational> = fam
        .support()
        .points()
        .iter()
        .copied()
        .filter(|p| a.contains(p) || b.contains(p))
        .collect();
    let complement: Vec<Rational> = fam
        .support()
        .points()
        .iter()
        .copied()
        .filter(|p| !a.contains(p))
        .collect();
    let cap = |pts: &[Rational]| {
        fam.capacity(&Event::Points(pts.to_vec()))
            .expect("event points are support points")
    };
    let (ca, cb, cu, cc) = (cap(&a), cap(&b), cap(&union), cap(&complement));
    out.le("capacity_subadditive", cu.upper, ca.upper + cb.upper);
    out.le("capacity_mixed", cu.lower, ca.lower + cb.upper);
    out.eq("capacity_conjugate", ca.lower, Rational::one() - cc.upper);
    out.le("capacity_order", ca.lower, ca.upper);
    out.le("capacity_nonnegative", Rational::zero(), ca.lower);
    out.le("capacity_at_most_one", ca.upper, Rational::one());

    if fam.is_singleton() {
        let classical = fam.laws()[0].expect(&phi);
        out.eq("singleton_upper", upper(&fam, &phi), classical);
        out.eq("singleton_lower", lower(&fam, &phi), classical);
    }
    out.rows
}

/// Randomized sub-linearity, conjugacy and capacity checks in exact
/// rational arithmetic. Case `i` uses the stream of `seed` advanced to `i`.
pub fn run_axiom_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..cases).map(|_| rng.random()).collect();
    let rows: Vec<Vec<CheckRow>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| axiom_case(i, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect();
    SuiteOutcome::from_rows(rows.into_iter().flatten().collect())
}

fn float_family(rng: &mut impl Rng, max_support: usize, max_laws: usize) -> AmbiguitySet<f64> {
    let len = rng.random_range(1..=max_support);
    let mut pts: Vec<f64> = Vec::with_capacity(len);
    while pts.len() < len {
        let p = (rng.random_range(-8..=8) as f64) / 4.0;
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    let laws = (0..rng.random_range(1..=max_laws))
        .map(|_| {
            let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
            // Put the rounding residue on the last weight so the sum is 1.
            let head: f64 = w[..len - 1].iter().sum();
            w[len - 1] = (1.0 - head).max(0.0);
            w
        })
        .collect();
    AmbiguitySet::new(pts, laws).expect("generated family is valid")
}

/// A random functional and a short description of it.
fn random_functional(rng: &mut impl Rng, n: usize) -> (String, PathFunctional<f64>) {
    let a = rng.random_range(-2.0..2.0);
    let b = rng.random_range(-2.0..2.0);
    let level = (rng.random_range(-4..=4) as f64) / 4.0;
    let beta: Vec<f64> = (0..n).map(|_| (rng.random_range(-2..=2) as f64) / 2.0).collect();
    match rng.random_range(0..5) {
        0 => (
            format!("sum a={a:.3} b={b:.3}"),
            PathFunctional::terminal_sum(move |s: f64| a * (b * s).sin() + (s - a).abs()),
        ),
        1 => (
            format!("indicator level={level}"),
            PathFunctional::terminal_sum(move |s: f64| if s > level { 1.0 } else { 0.0 }),
        ),
        2 => (
            format!("running_max a={a:.3}"),
            PathFunctional::running_max(beta, move |m: f64| (a * m).cos()),
        ),
        3 => (
            format!("running_max_abs level={level}"),
            PathFunctional::running_max_abs(beta, move |m: f64| if m >= level { 1.0 } else { 0.0 }),
        ),
        _ => (
            format!("full_path a={a:.3} b={b:.3}"),
            PathFunctional::full_path(move |p: &[f64]| {
                p.iter()
                    .enumerate()
                    .map(|(k, x)| (a * (k as f64 + 1.0) * x + b * x * x).sin())
                    .sum()
            }),
        ),
    }
}

fn oracle_case(case: usize, rng: &mut ChaCha8Rng, engine: &DpEngine) -> Vec<CheckRow> {
    let n = rng.random_range(1..=4);
    let factors = (0..n).map(|_| float_family(rng, 3, 2)).collect();
    let seq = IndependentSequence::new(factors).expect("n >= 1");
    let (desc, f) = random_functional(rng, n);
    let bounds = OracleBounds::default();
    let mut rows = Vec::with_capacity(3);
    for objective in [Objective::Upper, Objective::Lower] {
        let sol = engine
            .solve(&seq, &f, objective, objective == Objective::Upper)
            .expect("random instance is within the state cap");
        let oracle = brute_force_expectation(&seq, &f, objective, bounds).expect("within oracle bounds");
        let tag = if objective == Objective::Upper { "upper" } else { "lower" };
        rows.push(CheckRow {
            id: format!("case{case}/{tag} n={n} {desc}"),
            lhs: sol.value,
            rhs: oracle,
            holds: (sol.value - oracle).abs() <= ORACLE_TOLERANCE,
            ratio: None,
        });
        if let Some(policy) = sol.policy {
            let replayed = policy.replay(&seq, &f).expect("policy covers reachable states");
            rows.push(CheckRow {
                id: format!("case{case}/replay n={n} {desc}"),
                lhs: replayed,
                rhs: sol.value,
                holds: (replayed - sol.value).abs() <= ORACLE_TOLERANCE,
                ratio: None,
            });
        }
    }
    rows
}

/// Random instances with `n ≤ 4`, at most 3 support points and 2 laws per
/// factor: backward recursion against literal expansion for both envelopes,
/// and replay of the extracted upper policy.
pub fn run_oracle_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let engine = DpEngine::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..cases).map(|_| rng.random()).collect();
    let rows: Vec<Vec<CheckRow>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| oracle_case(i, &mut ChaCha8Rng::seed_from_u64(s), &engine))
        .collect();
    SuiteOutcome::from_rows(rows.into_iter().flatten().collect())
}
