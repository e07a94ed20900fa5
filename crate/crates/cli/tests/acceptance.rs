//! Acceptance criteria 1 to 12. Runs as a plain binary and prints one
//! `PASS`/`FAIL` line per criterion; the process fails if any criterion does.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use subexp::clt::{clt_conditions, clt_convergence_report, MomentProfile};
use subexp::gpde::{gnormal_expectation, independent_copy_check, max_error_vs_classical, solve_g_heat};
use subexp::inequalities::grid::{run_kolmogorov_suite, run_levy_suite, run_rosenthal_suite, KolmogorovForm};
use subexp::inequalities::{kolmogorov_check_i, KolmogorovInstance};
use subexp::series::{cauchy_capacity_diagnostic, three_series_report};
use subexp::suite::{run_axiom_suite, run_oracle_suite, ORACLE_TOLERANCE};
use subexp::{GNormalParams, Grid, IndependentSequence, ScaleRule, SequenceGenerator, TestFunction, TruncationLevel};

// Pinned parameters and tolerances.
const AXIOM_SEED: u64 = 42;
const AXIOM_CASES: usize = 1000;
const ORACLE_CASES: usize = 500;
const ORACLE_TOL: f64 = 1e-10;
const LEVY_MIN_INSTANCES: usize = 1000;
const KOLMOGOROV_RHS: f64 = 0.2;
const ROSENTHAL_SEEDS: (u64, u64) = (1, 2);
const S3_GEOMETRIC_TOL: f64 = 1e-9;
const SERIES_HORIZON: usize = 30;
const S3_ROOT_FLOOR: f64 = 3.0;
const ROOT_CAUCHY_EPS: f64 = 0.5;
const ROOT_CAUCHY_FLOOR: f64 = 0.1;
const ROOT_QUANTUM_BITS: u32 = 12;
const LINEAR_LIMIT_TOL: f64 = 1e-3;
const REFINEMENT_RATIO: f64 = 2.5;
const MOMENT_TOL: f64 = 1e-3;
const MOMENT_CAP: f64 = 100.0;
const MOMENT_HALF_WIDTH: f64 = 12.0;
const COPY_TOL: f64 = 2e-3;
const COPY_ROUNDOFF: f64 = 1e-12;
const CLT_TOL: f64 = 0.02;
const CLT_SCHEDULE: [usize; 3] = [25, 100, 400];
const NECESSITY_SHIFT: f64 = 0.1;
const NECESSITY_GAP: f64 = 0.05;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c01_axioms() -> Outcome {
    let out = run_axiom_suite(AXIOM_SEED, AXIOM_CASES);
    check(
        out.violations.is_empty(),
        format!("{AXIOM_CASES} cases, {} checks, {} violations", out.rows.len(), out.violations.len()),
    )
}

fn c02_dp_oracle() -> Outcome {
    let out = run_oracle_suite(AXIOM_SEED, ORACLE_CASES);
    check(
        out.violations.is_empty() && ORACLE_TOLERANCE <= ORACLE_TOL,
        format!(
            "{ORACLE_CASES} instances, {} comparisons at {ORACLE_TOLERANCE:e}, {} violations",
            out.rows.len(),
            out.violations.len()
        ),
    )
}

fn c03_levy() -> Outcome {
    let out = run_levy_suite();
    let one = out.rows.iter().filter(|r| r.id.contains("OneSided")).count();
    let abs = out.rows.iter().filter(|r| r.id.contains("Absolute")).count();
    check(
        out.violations.is_empty() && out.rows.len() >= LEVY_MIN_INSTANCES && one > 0 && abs > 0,
        format!(
            "{} evaluated ({one} one-sided, {abs} absolute), {} premise failures skipped, {} violations",
            out.rows.len(),
            out.skipped,
            out.violations.len()
        ),
    )
}

/// `P(max_k |S_k| > x)` for `n` fair coins by enumerating all sign patterns.
fn fair_coin_running_max(n: u32, x: f64) -> f64 {
    let mut hits = 0u32;
    for bits in 0..(1u32 << n) {
        let mut s = 0i32;
        let mut best = 0i32;
        for k in 0..n {
            s += if bits >> k & 1 == 1 { 1 } else { -1 };
            best = best.max(s.abs());
        }
        if best as f64 > x {
            hits += 1;
        }
    }
    hits as f64 / (1u32 << n) as f64
}

fn c04_kolmogorov() -> Outcome {
    let i = run_kolmogorov_suite(KolmogorovForm::Bounded);
    let ii = run_kolmogorov_suite(KolmogorovForm::UpperBounded);
    let coin = SequenceGenerator::fair_coin();
    let seq = IndependentSequence::iid(&coin, 5).map_err(|e| e.to_string())?;
    let rep = kolmogorov_check_i(&KolmogorovInstance { seq, x: 1.0, c: 1.0 }).map_err(|e| e.to_string())?;
    let counted = fair_coin_running_max(5, 1.0);
    check(
        i.violations.is_empty()
            && ii.violations.is_empty()
            && rep.lhs == counted
            && (rep.rhs - KOLMOGOROV_RHS).abs() < 1e-12,
        format!(
            "form i {} rows, form ii {} rows, {} violations; coin lhs {} vs counted {counted}, rhs {}",
            i.rows.len(),
            ii.rows.len(),
            i.violations.len() + ii.violations.len(),
            rep.lhs,
            rep.rhs
        ),
    )
}

fn c05_rosenthal() -> Outcome {
    let a = run_rosenthal_suite(ROSENTHAL_SEEDS.0).max_ratio();
    let b = run_rosenthal_suite(ROSENTHAL_SEEDS.1).max_ratio();
    match (a, b) {
        (Some(a), Some(b)) => check(
            a.is_finite() && a == b,
            format!("max ratio {a} (seed {}) and {b} (seed {})", ROSENTHAL_SEEDS.0, ROSENTHAL_SEEDS.1),
        ),
        _ => Err("no ratios reported".into()),
    }
}

fn c06_three_series() -> Outcome {
    let coin = SequenceGenerator::fair_coin();
    let unit = TruncationLevel::new(1.0).map_err(|e| e.to_string())?;
    let geo = SequenceGenerator::new(coin.clone(), ScaleRule::Geometric { base: 0.5 }, SERIES_HORIZON)
        .map_err(|e| e.to_string())?;
    let s3_geo = *three_series_report(&geo, unit).map_err(|e| e.to_string())?.s3_partial.last().unwrap();
    let mut geo_cauchy = 0.0f64;
    for m in 1..=SERIES_HORIZON / 2 {
        let eps = 2f64.powi(1 - m as i32);
        let rows = cauchy_capacity_diagnostic(&geo, eps, &[(m, 2 * m)]).map_err(|e| e.to_string())?;
        geo_cauchy = geo_cauchy.max(rows[0].upper);
    }

    let root = SequenceGenerator::new(coin, ScaleRule::Power { exponent: -0.5 }, 64).map_err(|e| e.to_string())?;
    let root_30 = SequenceGenerator { horizon: SERIES_HORIZON, ..root.clone() };
    let s3_root = *three_series_report(&root_30, unit).map_err(|e| e.to_string())?.s3_partial.last().unwrap();
    let caps: Vec<f64> = cauchy_capacity_diagnostic(
        &root.quantized(ROOT_QUANTUM_BITS),
        ROOT_CAUCHY_EPS,
        &[(8, 16), (16, 32), (32, 64)],
    )
    .map_err(|e| e.to_string())?
    .iter()
    .map(|r| r.upper)
    .collect();
    check(
        (s3_geo - 1.0 / 3.0).abs() <= S3_GEOMETRIC_TOL
            && geo_cauchy == 0.0
            && s3_root > S3_ROOT_FLOOR
            && caps.iter().all(|&c| c >= ROOT_CAUCHY_FLOOR),
        format!("2^-n coin: s3 {s3_geo:.12}, max Cauchy {geo_cauchy}; n^-1/2 coin: s3 {s3_root:.4}, V {caps:.3?}"),
    )
}

fn ramp(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn c07_linear_limit() -> Outcome {
    let p = GNormalParams::classical(1.0).map_err(|e| e.to_string())?;
    let grid = Grid::reference(&p).map_err(|e| e.to_string())?;
    let err = |g: &Grid| -> Result<f64, String> {
        let sol = solve_g_heat(&p, g, &ramp, &[1.0]).map_err(|e| e.to_string())?;
        Ok(max_error_vs_classical(&sol, 0, &ramp, 1.0, g.half_width))
    };
    let coarse = err(&grid)?;
    let fine = err(&grid.refined())?;
    check(
        coarse <= LINEAR_LIMIT_TOL && coarse / fine >= REFINEMENT_RATIO,
        format!("max error {coarse:.3e}, refined {fine:.3e}, ratio {:.2}", coarse / fine),
    )
}

fn c08_moments() -> Outcome {
    let p = GNormalParams::new(0.25, 1.0).map_err(|e| e.to_string())?;
    let grid = Grid::with_ratio(&p, MOMENT_HALF_WIDTH, 0.01, 1.0, 0.4).map_err(|e| e.to_string())?;
    let cap = |x: f64| (x * x).min(MOMENT_CAP);
    let hi = gnormal_expectation(&p, &cap, &grid).map_err(|e| e.to_string())?;
    let lo = gnormal_expectation(&p, &|x| -cap(x), &grid).map_err(|e| e.to_string())?;
    check(
        (hi - p.sigma_hi_sq).abs() <= MOMENT_TOL && (lo + p.sigma_lo_sq).abs() <= MOMENT_TOL,
        format!("E[x^2 cap] = {hi:.9}, E[-x^2 cap] = {lo:.9}"),
    )
}

fn c09_copies() -> Outcome {
    let p = GNormalParams::new(0.25, 1.0).map_err(|e| e.to_string())?;
    let grid = Grid::reference(&p).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b) in [(1.0, 0.0), (1.0, 1.0), (0.6, 0.8)] {
        let coarse = independent_copy_check(&p, &ramp, a, b, &grid).map_err(|e| e.to_string())?;
        let fine = independent_copy_check(&p, &ramp, a, b, &grid.refined()).map_err(|e| e.to_string())?;
        let shrinks = if coarse.gap > COPY_ROUNDOFF {
            fine.gap < coarse.gap
        } else {
            fine.gap <= COPY_ROUNDOFF
        };
        ok &= coarse.gap <= COPY_TOL && shrinks;
        parts.push(format!("({a},{b}) {:.2e}->{:.2e}", coarse.gap, fine.gap));
    }
    check(ok, parts.join(", "))
}

fn c10_clt() -> Outcome {
    let fam = SequenceGenerator::two_variance_family();
    let cond = clt_conditions(&MomentProfile::Finite(fam.clone()), &[1.0, 4.0], &[1.0, 2.0]).map_err(|e| e.to_string())?;
    let params = cond.params().map_err(|e| e.to_string())?;
    let grid = Grid::reference(&params).map_err(|e| e.to_string())?;
    let rep = clt_convergence_report("two_variance", &fam, &TestFunction::clt_set(), &CLT_SCHEDULE, &cond, &grid)
        .map_err(|e| e.to_string())?;
    let last = CLT_SCHEDULE[CLT_SCHEDULE.len() - 1];
    let decreasing = rep.trends.iter().all(|t| t.last_gap < t.first_gap);
    check(
        rep.max_gap_at(last) <= CLT_TOL && decreasing,
        format!(
            "max gap {:.2e} at n={last} (n={} max {:.2e}), every gap decreases: {decreasing}",
            rep.max_gap_at(last),
            CLT_SCHEDULE[0],
            rep.max_gap_at(CLT_SCHEDULE[0])
        ),
    )
}

fn c11_necessity() -> Outcome {
    let fam = SequenceGenerator::two_variance_family()
        .shift(NECESSITY_SHIFT)
        .map_err(|e| e.to_string())?;
    let cond = clt_conditions(&MomentProfile::Finite(fam.clone()), &[1.0, 4.0], &[1.0, 2.0]).map_err(|e| e.to_string())?;
    let params = cond.params().map_err(|e| e.to_string())?;
    let grid = Grid::reference(&params).map_err(|e| e.to_string())?;
    let rep = clt_convergence_report("shifted", &fam, &TestFunction::clt_set(), &[400], &cond, &grid)
        .map_err(|e| e.to_string())?;
    check(
        rep.max_gap_at(400) >= NECESSITY_GAP && !cond.verdicts.vanishing_mean.holds,
        format!("max gap {:.3} at n=400, mean condition holds: {}", rep.max_gap_at(400), cond.verdicts.vanishing_mean.holds),
    )
}

fn subexp(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_subexp"))
        .args(args)
        .output()
        .map_err(|e| format!("cannot start subexp: {e}"))
}

/// Every data file in `dir` except the manifest, sorted by name.
fn data_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name != "manifest.json" {
            files.push((name, std::fs::read(&path).map_err(|e| e.to_string())?));
        }
    }
    files.sort();
    Ok(files)
}

fn c12_cli() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut compared = 0;
    for name in ["axioms.json", "rosenthal.json", "clt.json"] {
        let cfg = configs.join(name);
        let mut runs = Vec::new();
        for run in ["a", "b"] {
            let dir = tmp.path().join(format!("{name}-{run}"));
            let out = subexp(&["run", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()])?;
            if !out.status.success() {
                return Err(format!("{name} run {run} exited with {}", out.status));
            }
            runs.push(data_files(&dir)?);
        }
        if runs[0] != runs[1] || runs[0].is_empty() {
            return Err(format!("{name}: data files differ between identical runs"));
        }
        compared += runs[0].len();
    }

    // A suite assertion that fails must give exit status 1 and be listed.
    let violating = tmp.path().join("violating.json");
    std::fs::write(
        &violating,
        r#"{"suite": "three-series", "inputs": {"generator": {"family": "fair_coin",
            "scale": {"kind": "geometric", "base": 0.5}, "horizon": 30},
            "expect_s3": {"target": 0.5, "tol": 1e-9}}}"#,
    )
    .map_err(|e| e.to_string())?;
    let vdir = tmp.path().join("violating");
    let v = subexp(&["run", violating.to_str().unwrap(), "--output-dir", vdir.to_str().unwrap()])?;
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(vdir.join("manifest.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let listed = manifest["violations"].as_array().map_or(0, Vec::len);

    let bad_family = subexp(&["validate", configs.join("family_bad.json").to_str().unwrap()])?;
    let bad_text = String::from_utf8_lossy(&bad_family.stderr).into_owned();
    let good_family = subexp(&["validate", configs.join("family_ok.json").to_str().unwrap()])?;

    check(
        v.status.code() == Some(1)
            && listed == 1
            && !bad_family.status.success()
            && bad_text.contains("law 1")
            && good_family.status.success(),
        format!(
            "{compared} data files byte-identical across reruns; violating run exit {:?} with {listed} listed; \
             malformed family exit {:?} ({})",
            v.status.code(),
            bad_family.status.code(),
            bad_text.trim()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("axiom suite", c01_axioms),
        ("dp vs oracle", c02_dp_oracle),
        ("levy suite", c03_levy),
        ("kolmogorov suite", c04_kolmogorov),
        ("rosenthal ratio", c05_rosenthal),
        ("three series", c06_three_series),
        ("g-heat linear limit", c07_linear_limit),
        ("g-normal moments", c08_moments),
        ("independent copies", c09_copies),
        ("clt convergence", c10_clt),
        ("condition necessity", c11_necessity),
        ("cli reproducibility", c12_cli),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
