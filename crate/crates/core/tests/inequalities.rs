mod common;

use common::*;
use subexp::dp::Objective;
use subexp::inequalities::{
    kolmogorov_check_i, kolmogorov_check_ii, levy_check, premise_alpha, rosenthal_ratio, KolmogorovInstance,
    LevyForm, LevyInstance,
};
use subexp::{brute_force_expectation, AmbiguitySet, DpEngine, IndependentSequence, OracleBounds, PathFunctional};

const TOL: f64 = 1e-12;

fn running_max(p: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for x in p {
        s += x;
        best = best.max(s);
    }
    best
}

fn running_max_abs(p: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for x in p {
        s += x;
        best = best.max(s.abs());
    }
    best
}

fn prob(factors: &[AmbiguitySet<f64>], event: impl Fn(&[f64]) -> bool) -> f64 {
    classical_expectation(factors, |p| if event(p) { 1.0 } else { 0.0 })
}

fn oracle_capacity(seq: &IndependentSequence<f64>, event: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> f64 {
    let f = PathFunctional::full_path(move |p: &[f64]| if event(p) { 1.0 } else { 0.0 });
    brute_force_expectation(seq, &f, Objective::Upper, OracleBounds::default()).unwrap()
}

#[test]
fn classical_levy_against_path_counting() {
    let factors = vec![fair_coin(); 3];
    let seq = IndependentSequence::new(factors.clone()).unwrap();
    // With β ≡ 0 the absolute premise fails outright (|X_3| > 0 surely), so
    // that form gets offsets that leave room.
    for (form, beta) in [
        (LevyForm::OneSided, vec![0.0, 0.0, 0.0]),
        (LevyForm::Absolute, vec![1.0, 1.0, 0.0]),
    ] {
        let rep = levy_check(&LevyInstance {
            seq: seq.clone(),
            beta: beta.clone(),
            alpha: None,
            x: 1.0,
            eps: 0.5,
            form,
        })
        .unwrap();
        let terminal: fn(f64) -> f64 = match form {
            LevyForm::OneSided => |s| s,
            LevyForm::Absolute => f64::abs,
        };
        // max_k (T(S_k) − β_k), with T the identity or |·|.
        let offset_max = |p: &[f64]| {
            let mut s = 0.0;
            let mut best = f64::NEG_INFINITY;
            for (x, b) in p.iter().zip(&beta) {
                s += x;
                best = best.max(terminal(s) - b);
            }
            best
        };
        let max_prob = prob(&factors, |p| offset_max(p) > 1.5);
        let end_prob = prob(&factors, |p| terminal(p.iter().sum()) > 1.0);
        // Premise: max over k < n of P(S_k − S_n > β_k), or the |·| version,
        // over the remaining steps. The k = n event {0 > β_n} is empty here.
        let mut alpha: f64 = 0.0;
        for k in 1..3 {
            let tail = &factors[k..];
            alpha = alpha.max(prob(tail, |p| {
                let s: f64 = p.iter().sum();
                match form {
                    LevyForm::OneSided => -s > beta[k - 1],
                    LevyForm::Absolute => s.abs() > beta[k - 1],
                }
            }));
        }
        assert!((rep.premise_alpha - alpha).abs() < TOL);
        assert!((rep.lhs - (1.0 - alpha) * max_prob).abs() < TOL);
        assert!((rep.rhs - end_prob).abs() < TOL);
        assert!(rep.holds);
    }
}

#[test]
fn sigma_family_levy_with_smallest_alpha() {
    let seq = IndependentSequence::iid(&sigma_family(), 4).unwrap();
    let rep = levy_check(&LevyInstance {
        seq: seq.clone(),
        beta: vec![0.0; 4],
        alpha: None,
        x: 1.0,
        eps: 0.5,
        form: LevyForm::OneSided,
    })
    .unwrap();
    let max_cap = oracle_capacity(&seq, |p| running_max(p) > 1.5);
    let end_cap = oracle_capacity(&seq, |p| p.iter().sum::<f64>() > 1.0);
    assert!((rep.lhs - (1.0 - rep.premise_alpha) * max_cap).abs() < TOL);
    assert!((rep.rhs - end_cap).abs() < TOL);
    assert!(rep.holds);

    let (alpha, _) = premise_alpha(&DpEngine::default(), &seq, &[0.0; 4], LevyForm::OneSided).unwrap();
    assert_eq!(alpha, rep.premise_alpha);
    // With a larger α the left side only shrinks.
    let looser = levy_check(&LevyInstance {
        seq,
        beta: vec![0.0; 4],
        alpha: Some((alpha + 1.0) / 2.0),
        x: 1.0,
        eps: 0.5,
        form: LevyForm::OneSided,
    })
    .unwrap();
    assert!(looser.lhs <= rep.lhs && looser.holds);
}

#[test]
fn kolmogorov_fair_coin_matches_counting() {
    let factors = vec![fair_coin(); 5];
    let seq = IndependentSequence::new(factors.clone()).unwrap();
    let rep = kolmogorov_check_i(&KolmogorovInstance { seq, x: 1.0, c: 1.0 }).unwrap();
    assert!((rep.rhs - 0.2).abs() < TOL);
    let counted = prob(&factors, |p| running_max_abs(p) > 1.0);
    assert_eq!(rep.lhs, counted);
    assert!(rep.holds);
}

#[test]
fn kolmogorov_sigma_family_six_steps() {
    let seq = IndependentSequence::iid(&sigma_family(), 6).unwrap();
    let rep = kolmogorov_check_i(&KolmogorovInstance {
        seq: seq.clone(),
        x: 1.0,
        c: 1.0,
    })
    .unwrap();
    assert!((rep.rhs - 1.0 / 3.0).abs() < TOL);
    let oracle = oracle_capacity(&seq, |p| running_max_abs(p) > 1.0);
    assert!((rep.lhs - oracle).abs() < TOL);
    assert!(rep.holds);
}

#[test]
fn kolmogorov_ii_mixed_family() {
    let fam = AmbiguitySet::new(vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let seq = IndependentSequence::iid(&fam, 6).unwrap();
    let rep = kolmogorov_check_ii(&KolmogorovInstance {
        seq: seq.clone(),
        x: 2.0,
        c: 1.0,
    })
    .unwrap();
    assert!((rep.rhs - 0.5).abs() < TOL);
    let oracle = oracle_capacity(&seq, |p| running_max(p) > 2.0);
    assert!((rep.lhs - oracle).abs() < TOL);
    assert_eq!(rep.lhs, 1.0);
    assert!(rep.holds);
}

#[test]
fn rosenthal_sigma_family() {
    let seq = IndependentSequence::iid(&sigma_family(), 6).unwrap();
    let rep = rosenthal_ratio(&seq, 2.0).unwrap();
    let oracle = oracle_capacity(&seq, |p| p.iter().sum::<f64>() >= 2.0);
    assert!((rep.capacity - oracle).abs() < TOL);
    assert!((rep.bound_without_c - 1.5).abs() < TOL);
    assert!((rep.ratio - oracle / 1.5).abs() < TOL);
}

#[test]
fn rosenthal_classical_counting() {
    let factors = vec![fair_coin(); 4];
    let seq = IndependentSequence::new(factors.clone()).unwrap();
    let rep = rosenthal_ratio(&seq, 3.0).unwrap();
    assert_eq!(rep.capacity, prob(&factors, |p| p.iter().sum::<f64>() >= 3.0));
    assert_eq!(rep.capacity, 1.0 / 16.0);
    assert!((rep.ratio - 9.0 / 64.0).abs() < TOL);
}
