//! Independent oracles shared by the integration tests. Nothing here calls
//! the recursion under test.

#![allow(dead_code)]

use subexp::AmbiguitySet;

/// Joint law of a sequence of single-law factors: every path with its
/// product probability.
pub fn product_paths(factors: &[AmbiguitySet<f64>]) -> Vec<(Vec<f64>, f64)> {
    let mut paths = vec![(Vec::new(), 1.0)];
    for f in factors {
        assert!(f.is_singleton(), "product oracle needs single-law factors");
        let w = f.laws()[0].weights();
        let mut next = Vec::with_capacity(paths.len() * w.len());
        for (p, m) in &paths {
            for (&x, &wx) in f.support().points().iter().zip(w) {
                let mut q: Vec<f64> = p.clone();
                q.push(x);
                next.push((q, m * wx));
            }
        }
        paths = next;
    }
    paths
}

/// Classical expectation of a path functional under the product law.
pub fn classical_expectation(factors: &[AmbiguitySet<f64>], f: impl Fn(&[f64]) -> f64) -> f64 {
    product_paths(factors).iter().map(|(p, m)| m * f(p)).sum()
}

/// Law of `S_n` for single-law factors, by repeated discrete convolution on
/// a sorted list of atoms.
pub fn sum_distribution(factors: &[AmbiguitySet<f64>]) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for f in factors {
        let w = f.laws()[0].weights();
        let mut next: Vec<(f64, f64)> = Vec::new();
        for &(s, m) in &atoms {
            for (&x, &wx) in f.support().points().iter().zip(w) {
                next.push((s + x, m * wx));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, m) in next {
            match merged.last_mut() {
                Some(last) if (last.0 - s).abs() < 1e-12 => last.1 += m,
                _ => merged.push((s, m)),
            }
        }
        atoms = merged;
    }
    atoms
}

/// Best classical expectation over every deterministic history-dependent
/// choice of laws, by explicit enumeration of policies. Exponential; only
/// for tiny instances.
pub fn best_over_policies(
    factors: &[AmbiguitySet<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    maximize: bool,
) -> f64 {
    // Decision nodes in breadth-first order, identified by their history.
    let mut nodes: Vec<Vec<f64>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<f64>> = vec![Vec::new()];
    for f in &factors[..factors.len() - 1] {
        let mut next = Vec::new();
        for h in &frontier {
            for &x in f.support().points() {
                let mut g = h.clone();
                g.push(x);
                next.push(g);
            }
        }
        nodes.extend(next.iter().cloned());
        frontier = next;
    }
    let radices: Vec<usize> = nodes.iter().map(|h| factors[h.len()].laws().len()).collect();
    let total: usize = radices.iter().product();
    let mut best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    for code in 0..total {
        let mut choice = Vec::with_capacity(nodes.len());
        let mut c = code;
        for r in &radices {
            choice.push(c % r);
            c /= r;
        }
        let value = policy_value(factors, f, &nodes, &choice, &mut Vec::new(), 1.0);
        best = if maximize { best.max(value) } else { best.min(value) };
    }
    best
}

fn policy_value(
    factors: &[AmbiguitySet<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    nodes: &[Vec<f64>],
    choice: &[usize],
    history: &mut Vec<f64>,
    mass: f64,
) -> f64 {
    if history.len() == factors.len() {
        return mass * f(history);
    }
    let node = nodes.iter().position(|h| h == history).expect("node exists");
    let factor = &factors[history.len()];
    let w = factor.laws()[choice[node]].weights().to_vec();
    let mut total = 0.0;
    for (&x, &wx) in factor.support().points().iter().zip(&w) {
        history.push(x);
        total += policy_value(factors, f, nodes, choice, history, mass * wx);
        history.pop();
    }
    total
}

/// Two laws on `{−1, 0, 1}` with `P(±1) = σ²/2`, `σ² ∈ {1/4, 1}`.
pub fn sigma_family() -> AmbiguitySet<f64> {
    AmbiguitySet::new(
        vec![-1.0, 0.0, 1.0],
        vec![vec![0.125, 0.75, 0.125], vec![0.5, 0.0, 0.5]],
    )
    .unwrap()
}

pub fn fair_coin() -> AmbiguitySet<f64> {
    AmbiguitySet::new(vec![-1.0, 1.0], vec![vec![0.5, 0.5]]).unwrap()
}

pub fn point_masses() -> AmbiguitySet<f64> {
    AmbiguitySet::new(vec![-1.0, 1.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

/// Standard normal CDF through the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[(−1) ∨ (μ + σZ) ∧ 1]` in closed form.
pub fn ramp_gaussian(mu: f64, sigma: f64) -> f64 {
    // E[clip(Y)] with Y ~ N(μ, σ²): integrate the clipped identity piecewise.
    let a = (-1.0 - mu) / sigma;
    let b = (1.0 - mu) / sigma;
    let below = -normal_cdf(a);
    let above = 1.0 - normal_cdf(b);
    let middle = mu * (normal_cdf(b) - normal_cdf(a)) + sigma * (normal_pdf(a) - normal_pdf(b));
    below + above + middle
}
