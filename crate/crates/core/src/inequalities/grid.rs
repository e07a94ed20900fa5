//! Exhaustive instance grids for the maximal-inequality suites.
//!
//! Families are built from every nonempty support `S ⊆ {−1, 0, 1}` with laws
//! whose weights are positive multiples of 1/4, taking every single law and
//! every unordered pair of distinct laws, plus three hand-picked families
//! with zero weights (the two-variance family on `{−1, 0, 1}`, the pair of
//! point masses at `±1`, and `{δ_1, uniform{0, 1}}`). Everything is rational,
//! so all verdicts are exact.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    kolmogorov_check_i_with, kolmogorov_check_ii_with, levy_check_with, rosenthal_ratio_with,
    InequalityError, KolmogorovInstance, LevyForm, LevyInstance,
};
use crate::dp::{DpEngine, IndependentSequence};
use crate::scalar::{Rational, Scalar};
use crate::space::AmbiguitySet;

/// One evaluated instance, as written to the suite CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub rows: Vec<CheckRow>,
    /// Instances whose premise or preconditions ruled them out.
    pub skipped: usize,
    /// Ids of instances where the inequality failed.
    pub violations: Vec<String>,
}

impl SuiteOutcome {
    fn collect(results: Vec<Option<CheckRow>>) -> Self {
        let mut out = SuiteOutcome::default();
        for r in results {
            match r {
                Some(row) => {
                    if !row.holds {
                        out.violations.push(row.id.clone());
                    }
                    out.rows.push(row);
                }
                None => out.skipped += 1,
            }
        }
        out
    }

    /// Outcome of rows that were all evaluated.
    pub fn from_rows(rows: Vec<CheckRow>) -> Self {
        Self::collect(rows.into_iter().map(Some).collect())
    }

    /// Largest reported ratio, if any row carries one.
    pub fn max_ratio(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.ratio)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n as i128, d as i128)
}

/// Compositions of `total` into `parts` positive integers.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 1..=(total - parts as i64 + 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn label(points: &[Rational], laws: &[Vec<Rational>]) -> String {
    let pts: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    let ls: Vec<String> = laws
        .iter()
        .map(|l| l.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    format!("{{{}}}[{}]", pts.join(","), ls.join("|"))
}

/// The shared family grid with stable ids.
pub fn families() -> Vec<(String, AmbiguitySet<Rational>)> {
    let base = [q(-1, 1), q(0, 1), q(1, 1)];
    let mut specs: Vec<(Vec<Rational>, Vec<Vec<Rational>>)> = Vec::new();
    for mask in 1u8..8 {
        let points: Vec<Rational> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| base[i]).collect();
        let laws: Vec<Vec<Rational>> = compositions(4, points.len())
            .into_iter()
            .map(|c| c.into_iter().map(|k| q(k, 4)).collect())
            .collect();
        for i in 0..laws.len() {
            specs.push((points.clone(), vec![laws[i].clone()]));
            for j in (i + 1)..laws.len() {
                specs.push((points.clone(), vec![laws[i].clone(), laws[j].clone()]));
            }
        }
    }
    specs.push((
        vec![q(-1, 1), q(0, 1), q(1, 1)],
        vec![vec![q(1, 8), q(3, 4), q(1, 8)], vec![q(1, 2), q(0, 1), q(1, 2)]],
    ));
    specs.push((
        vec![q(-1, 1), q(1, 1)],
        vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]],
    ));
    specs.push((
        vec![q(0, 1), q(1, 1)],
        vec![vec![q(0, 1), q(1, 1)], vec![q(1, 2), q(1, 2)]],
    ));
    specs
        .into_iter()
        .map(|(points, laws)| {
            let id = label(&points, &laws);
            (id, AmbiguitySet::new(points, laws).expect("grid family is valid"))
        })
        .collect()
}

/// Every vector in `{0, ±1/2}^n`.
fn offset_vectors(n: usize) -> Vec<Vec<Rational>> {
    let choices = [q(0, 1), q(1, 2), q(-1, 2)];
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

fn fmt_vec(v: &[Rational]) -> String {
    v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
}

/// Lévy grid: n ∈ 1..=4, β ∈ {0, ±1/2}^n, x ∈ {1/2, 1, 3/2}, ε ∈ {1/4, 1/2},
/// both forms, α set to the smallest feasible value.
pub fn levy_grid() -> Vec<(String, LevyInstance<Rational>)> {
    let mut out = Vec::new();
    for (fid, family) in families() {
        for n in 1..=4 {
            let seq = IndependentSequence::iid(&family, n).expect("n >= 1");
            for beta in offset_vectors(n) {
                for form in [LevyForm::OneSided, LevyForm::Absolute] {
                    for x in [q(1, 2), q(1, 1), q(3, 2)] {
                        for eps in [q(1, 4), q(1, 2)] {
                            let id = format!(
                                "levy {form:?} {fid} n={n} beta=[{}] x={x} eps={eps}",
                                fmt_vec(&beta)
                            );
                            out.push((
                                id,
                                LevyInstance {
                                    seq: seq.clone(),
                                    beta: beta.clone(),
                                    alpha: None,
                                    x,
                                    eps,
                                    form,
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn run_levy_suite() -> SuiteOutcome {
    let engine = DpEngine::default();
    let grid = levy_grid();
    let results = grid
        .par_iter()
        .map(|(id, inst)| match levy_check_with(&engine, inst) {
            Ok(rep) => Some(CheckRow {
                id: id.clone(),
                lhs: rep.lhs.to_f64(),
                rhs: rep.rhs.to_f64(),
                holds: rep.holds,
                ratio: None,
            }),
            Err(InequalityError::PremiseFails { .. }) => None,
            Err(e) => panic!("levy instance {id} failed to evaluate: {e}"),
        })
        .collect();
    SuiteOutcome::collect(results)
}

/// Which Kolmogorov-type bound a grid targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KolmogorovForm {
    /// Two-sided bound for `|X_k| ≤ c`.
    Bounded,
    /// One-sided bound for `X_k ≤ c` with nonnegative upper means.
    UpperBounded,
}

/// Kolmogorov grid. Form (i): n ∈ 1..=5, x ∈ {1/2, 1, 3/2}, c ∈ {1, 2}.
/// Form (ii): families with `Ê[X] ≥ 0`, n ∈ 1..=6, x ∈ {1/2, 1, 3/2, 2},
/// c ∈ {1, 2}.
pub fn kolmogorov_grid(form: KolmogorovForm) -> Vec<(String, KolmogorovInstance<Rational>)> {
    let (max_n, xs): (usize, Vec<Rational>) = match form {
        KolmogorovForm::Bounded => (5, vec![q(1, 2), q(1, 1), q(3, 2)]),
        KolmogorovForm::UpperBounded => (6, vec![q(1, 2), q(1, 1), q(3, 2), q(2, 1)]),
    };
    let mut out = Vec::new();
    for (fid, family) in families() {
        if form == KolmogorovForm::UpperBounded && family.upper_mean() < Rational::zero() {
            continue;
        }
        for n in 1..=max_n {
            let seq = IndependentSequence::iid(&family, n).expect("n >= 1");
            for &x in &xs {
                for c in [q(1, 1), q(2, 1)] {
                    out.push((
                        format!("kolmogorov {form:?} {fid} n={n} x={x} c={c}"),
                        KolmogorovInstance {
                            seq: seq.clone(),
                            x,
                            c,
                        },
                    ));
                }
            }
        }
    }
    out
}

pub fn run_kolmogorov_suite(form: KolmogorovForm) -> SuiteOutcome {
    let engine = DpEngine::default();
    let grid = kolmogorov_grid(form);
    let results = grid
        .par_iter()
        .map(|(id, inst)| {
            let report = match form {
                KolmogorovForm::Bounded => kolmogorov_check_i_with(&engine, inst),
                KolmogorovForm::UpperBounded => kolmogorov_check_ii_with(&engine, inst),
            };
            match report {
                Ok(rep) => Some(CheckRow {
                    id: id.clone(),
                    lhs: rep.lhs.to_f64(),
                    rhs: rep.rhs.to_f64(),
                    holds: rep.holds,
                    ratio: None,
                }),
                Err(InequalityError::DegenerateSecondMoment | InequalityError::DegenerateMean) => None,
                Err(e) => panic!("kolmogorov instance {id} failed to evaluate: {e}"),
            }
        })
        .collect();
    SuiteOutcome::collect(results)
}

/// Rosenthal grid: families with `Ê[X] ≤ 0`, n ∈ 1..=6, x ∈ {1/2, 1, 2, 3}.
pub fn rosenthal_grid() -> Vec<(String, IndependentSequence<Rational>, Rational)> {
    let mut out = Vec::new();
    for (fid, family) in families() {
        if family.upper_mean() > Rational::zero() {
            continue;
        }
        for n in 1..=6 {
            let seq = IndependentSequence::iid(&family, n).expect("n >= 1");
            for x in [q(1, 2), q(1, 1), q(2, 1), q(3, 1)] {
                out.push((format!("rosenthal {fid} n={n} x={x}"), seq.clone(), x));
            }
        }
    }
    out
}

/// Evaluates the Rosenthal grid in an order shuffled by `seed`; rows are
/// reported in evaluation order. The ratio is informational: `holds` is
/// always true.
pub fn run_rosenthal_suite(seed: u64) -> SuiteOutcome {
    let engine = DpEngine::default();
    let mut grid = rosenthal_grid();
    grid.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let results = grid
        .par_iter()
        .map(|(id, seq, x)| {
            let rep = rosenthal_ratio_with(&engine, seq, *x)
                .unwrap_or_else(|e| panic!("rosenthal instance {id} failed to evaluate: {e}"));
            Some(CheckRow {
                id: id.clone(),
                lhs: rep.capacity.to_f64(),
                rhs: rep.bound_without_c.to_f64(),
                holds: true,
                ratio: Some(rep.ratio.to_f64()),
            })
        })
        .collect();
    SuiteOutcome::collect(results)
}
