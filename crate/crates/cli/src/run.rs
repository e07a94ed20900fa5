//! Suite execution. Each suite produces rendered data files and a summary;
//! nothing touches the filesystem until [`write_artifacts`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use subexp::clt::{clt_conditions, clt_convergence_report, MomentProfile};
use subexp::gpde::{independent_copy_check, CopyReport, max_error_vs_classical, solve_g_heat};
use subexp::inequalities::grid::{
    run_kolmogorov_suite, run_levy_suite, run_rosenthal_suite, CheckRow, KolmogorovForm, SuiteOutcome,
};
use subexp::series::{
    cauchy_capacity_diagnostic, cauchy_trend, distribution_diagnostic, distribution_trend, three_series_report, Trend,
};
use subexp::suite::{run_axiom_suite, run_oracle_suite};
use subexp::{GNormalParams, TruncationLevel};

use crate::config::{
    lookup_phi, CauchyInputs, CltInputs, ExpectedTrend, ExperimentConfig, Format, GpdeInputs, KolmogorovForms,
    SuiteConfig, ThreeSeriesInputs,
};

/// One rendered data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub skipped: usize,
    pub violations: usize,
    pub max_gap: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Suite-specific scalars such as errors, limits and trends.
    pub metrics: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub summary: Summary,
    pub violations: Vec<String>,
    pub files: Vec<DataFile>,
}

impl RunOutput {
    fn metric(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .metrics
            .insert(key.to_string(), serde_json::to_value(value).expect("metric serializes"));
    }

    fn violation(&mut self, id: impl Into<String>) {
        self.violations.push(id.into());
        self.summary.violations = self.violations.len();
    }

    fn table<R: Serialize>(&mut self, stem: &str, rows: &[R], format: Format) -> Result<()> {
        self.files.push(render(stem, rows, format)?);
        Ok(())
    }

    fn absorb(&mut self, stem: &str, outcome: &SuiteOutcome, format: Format) -> Result<()> {
        self.summary.instances += outcome.rows.len();
        self.summary.skipped += outcome.skipped;
        if let Some(r) = outcome.max_ratio() {
            self.summary.max_ratio = Some(self.summary.max_ratio.map_or(r, |m| m.max(r)));
        }
        for v in &outcome.violations {
            self.violation(format!("{stem}:{v}"));
        }
        self.table::<CheckRow>(stem, &outcome.rows, format)
    }
}

/// Renders rows as CSV (header row, round-trip reals) or a JSON array.
pub fn render<R: Serialize>(stem: &str, rows: &[R], format: Format) -> Result<DataFile> {
    let contents = match format {
        Format::Csv => subexp::output::csv_string(rows)?,
        Format::Json => serde_json::to_string_pretty(rows)? + "\n",
    };
    Ok(DataFile {
        name: format!("{stem}.{}", format.extension()),
        contents,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let f = cfg.format;
    let seed = cfg.seed.unwrap_or_default();
    match &cfg.suite {
        SuiteConfig::Axioms(a) => {
            out.absorb("axioms", &run_axiom_suite(seed, a.cases), f)?;
            out.absorb("oracle", &run_oracle_suite(seed, a.oracle_cases), f)?;
        }
        SuiteConfig::Levy(_) => out.absorb("levy", &run_levy_suite(), f)?,
        SuiteConfig::Kolmogorov(k) => {
            if matches!(k.form, KolmogorovForms::I | KolmogorovForms::Both) {
                out.absorb("kolmogorov_i", &run_kolmogorov_suite(KolmogorovForm::Bounded), f)?;
            }
            if matches!(k.form, KolmogorovForms::Ii | KolmogorovForms::Both) {
                out.absorb("kolmogorov_ii", &run_kolmogorov_suite(KolmogorovForm::UpperBounded), f)?;
            }
        }
        SuiteConfig::Rosenthal(_) => out.absorb("rosenthal", &run_rosenthal_suite(seed), f)?,
        SuiteConfig::ThreeSeries(t) => three_series(t, f, &mut out)?,
        SuiteConfig::Cauchy(c) => cauchy(c, f, &mut out)?,
        SuiteConfig::Gpde(g) => gpde(g, f, &mut out)?,
        SuiteConfig::Clt(c) => clt(c, f, &mut out)?,
    }
    Ok(out)
}

fn three_series(t: &ThreeSeriesInputs, f: Format, out: &mut RunOutput) -> Result<()> {
    let gen = t.generator.build().map_err(anyhow::Error::msg)?;
    let rep = three_series_report(&gen, TruncationLevel::new(t.c)?)?;
    let rows = rep.rows();
    let last = *rows.last().expect("horizon is at least 1");
    out.summary.instances = rows.len();
    out.metric("s1", last.s1_partial);
    out.metric("s2_upper", last.s2_upper_partial);
    out.metric("s2_lower", last.s2_lower_partial);
    out.metric("s3", last.s3_partial);
    if let Some(target) = t.expect_s3 {
        if (last.s3_partial - target.target).abs() > target.tol {
            out.violation(format!("s3 = {} not within {} of {}", last.s3_partial, target.tol, target.target));
        }
    }
    if let Some(floor) = t.expect_s3_above {
        if last.s3_partial <= floor {
            out.violation(format!("s3 = {} does not exceed {floor}", last.s3_partial));
        }
    }
    out.table("three_series", &rows, f)
}

fn trend_matches(found: Trend, expected: ExpectedTrend) -> bool {
    matches!(
        (found, expected),
        (Trend::Shrinks, ExpectedTrend::Shrinks) | (Trend::Stalls, ExpectedTrend::Stalls)
    )
}

fn cauchy(c: &CauchyInputs, f: Format, out: &mut RunOutput) -> Result<()> {
    let gen = c.generator.build().map_err(anyhow::Error::msg)?;
    let rows = cauchy_capacity_diagnostic(&gen, c.eps, &c.pairs)?;
    let trend = cauchy_trend(&rows, c.threshold);
    out.summary.instances = rows.len();
    out.metric("cauchy_trend", trend);
    if let Some(expected) = c.expect_trend {
        if !trend_matches(trend.trend, expected) {
            out.violation(format!("cauchy trend {:?}, expected {expected:?}", trend.trend));
        }
    }
    if let Some(floor) = c.expect_min_capacity {
        for r in rows.iter().filter(|r| r.upper < floor) {
            out.violation(format!("V(|S_{} - S_{}| >= {}) = {} < {floor}", r.n, r.m, r.eps, r.upper));
        }
    }
    out.table("cauchy", &rows, f)?;

    if !c.phis.is_empty() {
        let phis = c.phis.iter().map(|id| lookup_phi(id)).collect::<Result<Vec<_>, _>>().map_err(anyhow::Error::msg)?;
        let table = distribution_diagnostic(&gen, &phis, &c.checkpoints)?;
        let dtrend = distribution_trend(&table, c.settle_tol);
        out.summary.instances += table.rows.len();
        out.metric("distribution_last_diff", table.last_max_diff());
        out.metric("distribution_trend", dtrend);
        if let Some(expected) = c.expect_distribution_trend {
            if !trend_matches(dtrend, expected) {
                out.violation(format!("distribution trend {dtrend:?}, expected {expected:?}"));
            }
        }
        out.table("distribution", &table.rows, f)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SnapshotJson<'a> {
    params: &'a GNormalParams,
    grid: &'a subexp::Grid,
    nodes: &'a [f64],
    snapshots: Vec<SnapshotEntry<'a>>,
}

#[derive(Serialize)]
struct SnapshotEntry<'a> {
    time: f64,
    values: &'a [f64],
}

fn gpde(g: &GpdeInputs, f: Format, out: &mut RunOutput) -> Result<()> {
    let params = GNormalParams::new(g.sigma_lo_sq, g.sigma_hi_sq)?;
    let grid = g.grid.build(&params).map_err(anyhow::Error::msg)?;
    let phi = lookup_phi(&g.phi).map_err(anyhow::Error::msg)?;
    let h = phi.handle();
    let sol = solve_g_heat(&params, &grid, &*h, &g.times)?;
    out.summary.instances = sol.snapshots.len();
    out.metric("u_origin", (0..sol.snapshots.len()).map(|i| sol.at_origin(i)).collect::<Vec<_>>());

    let contents = match f {
        Format::Csv => {
            let mut buf = Vec::new();
            sol.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Format::Json => {
            let doc = SnapshotJson {
                params: &sol.params,
                grid: &sol.grid,
                nodes: &sol.nodes,
                snapshots: sol
                    .snapshots
                    .iter()
                    .map(|s| SnapshotEntry {
                        time: s.time,
                        values: &s.values,
                    })
                    .collect(),
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    out.files.push(DataFile {
        name: format!("snapshots.{}", f.extension()),
        contents,
    });

    if let Some(tol) = g.linear_limit_tol {
        let errors: Vec<f64> = (0..sol.snapshots.len())
            .map(|i| max_error_vs_classical(&sol, i, &*h, params.sigma_hi_sq, grid.half_width))
            .collect();
        let worst = errors.iter().copied().fold(0.0, f64::max);
        out.metric("linear_limit_max_error", worst);
        out.summary.max_gap = Some(worst);
        if worst > tol {
            out.violation(format!("linear-limit error {worst} > {tol}"));
        }
    }

    if let Some(copy) = &g.copy_check {
        let refined = grid.refined();
        let mut reports = Vec::new();
        for &(a, b) in &copy.pairs {
            let coarse = independent_copy_check(&params, &*h, a, b, &grid)?;
            if coarse.gap > copy.tol {
                out.violation(format!("copy ({a}, {b}) gap {} > {}", coarse.gap, copy.tol));
            }
            if copy.require_shrink {
                let fine = independent_copy_check(&params, &*h, a, b, &refined)?;
                if coarse.gap > COPY_ROUNDOFF && fine.gap >= coarse.gap {
                    out.violation(format!("copy ({a}, {b}) gap does not shrink: {} -> {}", coarse.gap, fine.gap));
                }
                reports.push(CopyRow::new("refined", &fine));
            }
            reports.push(CopyRow::new("reference", &coarse));
            out.summary.max_gap = Some(out.summary.max_gap.map_or(coarse.gap, |m| m.max(coarse.gap)));
        }
        out.summary.instances += reports.len();
        out.table("copy_check", &reports, f)?;
    }
    Ok(())
}

/// Gaps at this level are floating-point noise and need not shrink.
const COPY_ROUNDOFF: f64 = 1e-12;

#[derive(Serialize)]
struct CopyRow {
    a: f64,
    b: f64,
    grid: &'static str,
    lhs: f64,
    rhs: f64,
    gap: f64,
}

impl CopyRow {
    fn new(grid: &'static str, r: &CopyReport) -> Self {
        Self {
            a: r.a,
            b: r.b,
            grid,
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
        }
    }
}

fn clt(c: &CltInputs, f: Format, out: &mut RunOutput) -> Result<()> {
    let mut family = c.family.build().map_err(anyhow::Error::msg)?;
    if c.shift != 0.0 {
        family = family.shift(c.shift)?;
    }
    let phis = c.test_functions().map_err(anyhow::Error::msg)?;
    let cond = clt_conditions(&MomentProfile::Finite(family.clone()), &c.c_schedule, &c.x_schedule)?;
    let params = cond.params()?;
    let grid = c.grid.build(&params).map_err(anyhow::Error::msg)?;
    let rep = clt_convergence_report("family", &family, &phis, &c.n_schedule, &cond, &grid)?;

    let last_n = *c.n_schedule.last().expect("validated non-empty");
    let max_gap = rep.max_gap_at(last_n);
    out.summary.instances = rep.rows.len();
    out.summary.max_gap = Some(max_gap);
    out.metric("sigma_lo_sq", params.sigma_lo_sq);
    out.metric("sigma_hi_sq", params.sigma_hi_sq);
    out.metric("conditions", &cond.verdicts);
    out.metric("warnings", &rep.warnings);
    if let Some(tol) = c.max_gap {
        for r in rep.rows.iter().filter(|r| r.n == last_n && r.gap > tol) {
            out.violation(format!("{} gap {} > {tol} at n = {last_n}", r.phi, r.gap));
        }
    }
    if c.require_decrease {
        for t in rep.trends.iter().filter(|t| t.last_gap >= t.first_gap) {
            out.violation(format!("{} gap does not decrease: {} -> {}", t.phi, t.first_gap, t.last_gap));
        }
    }
    if let Some(floor) = c.min_gap {
        if max_gap < floor {
            out.violation(format!("max gap {max_gap} < {floor} at n = {last_n}"));
        }
    }
    out.table("clt", &rep.rows, f)?;
    out.table("clt_trends", &rep.trends, f)?;
    out.table("second_moments", &cond.second_moment_trace, f)?;
    out.table("tails", &cond.tail_trace, f)?;
    out.table("truncated_means", &cond.mean_traces, f)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    suite: &'static str,
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    violations: &'a [String],
    files: Vec<&'a str>,
}

/// Writes every data file and then `manifest.json` into `dir`.
pub fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, output: &RunOutput) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for file in &output.files {
        let path = dir.join(&file.name);
        std::fs::write(&path, &file.contents).with_context(|| format!("writing {}", path.display()))?;
    }
    let manifest = Manifest {
        tool: "subexp",
        version: env!("CARGO_PKG_VERSION"),
        suite: cfg.suite.name(),
        config: cfg,
        summary: &output.summary,
        violations: &output.violations,
        files: output.files.iter().map(|f| f.name.as_str()).collect(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
