//! G-heat equation `∂_t u = G(∂²_x u)` on `[−L, L]` and G-normal
//! expectations.
//!
//! The solver is the explicit two-coefficient scheme
//!
//! ```text
//! u_i ← u_i + dt · G((u_{i−1} − 2u_i + u_{i+1}) / dx²)
//! ```
//!
//! with `G(α) = ½(σ̄²α⁺ − σ̲²α⁻)` and zero-Neumann boundaries. Whenever
//! `dt·σ̄²/dx² ≤ ½` each update is a convex combination of the three stencil
//! values, which gives the discrete maximum principle and monotonicity in the
//! initial data. Monotone, stable and consistent schemes converge to the
//! viscosity solution.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpdeError {
    #[error("variances must satisfy 0 <= lower <= upper < inf with upper > 0, got [{lo}, {hi}]")]
    InvalidVariances { lo: f64, hi: f64 },
    #[error("stability ratio dt·σ̄²/dx² = {ratio} exceeds 0.5")]
    Unstable { ratio: f64 },
    #[error("half-width {half_width} is below the margin 6·σ̄·√T = {required}")]
    InsufficientMargin { half_width: f64, required: f64 },
    #[error("half-width {half_width} is not a whole number of steps dx = {dx}")]
    Misaligned { half_width: f64, dx: f64 },
    #[error("grid parameter {name} must be positive and finite, got {value}")]
    BadGridParameter { name: &'static str, value: f64 },
    #[error("initial data is not finite at x = {x}")]
    NonFiniteInitial { x: f64 },
    #[error("requested time {t} is outside [0, {horizon}] or out of order")]
    BadTime { t: f64, horizon: f64 },
    #[error("copy coefficients must be nonnegative with a² + b² > 0, got ({a}, {b})")]
    BadCopyCoefficients { a: f64, b: f64 },
    #[error("snapshot output failed: {0}")]
    Io(String),
}

pub type Result<T, E = GpdeError> = std::result::Result<T, E>;

/// Variance interval `[σ̲², σ̄²]` of a G-normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GNormalParams {
    pub sigma_lo_sq: f64,
    pub sigma_hi_sq: f64,
}

impl GNormalParams {
    pub fn new(sigma_lo_sq: f64, sigma_hi_sq: f64) -> Result<Self> {
        let ok = sigma_lo_sq.is_finite()
            && sigma_hi_sq.is_finite()
            && 0.0 <= sigma_lo_sq
            && sigma_lo_sq <= sigma_hi_sq
            && sigma_hi_sq > 0.0;
        if !ok {
            return Err(GpdeError::InvalidVariances {
                lo: sigma_lo_sq,
                hi: sigma_hi_sq,
            });
        }
        Ok(Self {
            sigma_lo_sq,
            sigma_hi_sq,
        })
    }

    /// The classical normal `N(0, σ²)`.
    pub fn classical(sigma_sq: f64) -> Result<Self> {
        Self::new(sigma_sq, sigma_sq)
    }
}

/// `G(α) = ½(σ̄²α⁺ − σ̲²α⁻)`.
pub fn g_function(params: &GNormalParams, alpha: f64) -> f64 {
    0.5 * (params.sigma_hi_sq * alpha.max(0.0) - params.sigma_lo_sq * (-alpha).max(0.0))
}

/// Stability ratio used when none is given.
pub const DEFAULT_RATIO: f64 = 0.4;

/// Uniform grid on `[−L, L]` with time step `dt` up to horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub dx: f64,
    pub horizon: f64,
    pub dt: f64,
}

impl Grid {
    pub fn new(params: &GNormalParams, half_width: f64, dx: f64, horizon: f64, dt: f64) -> Result<Self> {
        for (name, value) in [
            ("half_width", half_width),
            ("dx", dx),
            ("horizon", horizon),
            ("dt", dt),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(GpdeError::BadGridParameter { name, value });
            }
        }
        let ratio = dt * params.sigma_hi_sq / (dx * dx);
        if ratio > 0.5 {
            return Err(GpdeError::Unstable { ratio });
        }
        let required = 6.0 * params.sigma_hi_sq.sqrt() * horizon.sqrt();
        if half_width < required {
            return Err(GpdeError::InsufficientMargin {
                half_width,
                required,
            });
        }
        let cells = half_width / dx;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(GpdeError::Misaligned { half_width, dx });
        }
        Ok(Self {
            half_width,
            dx,
            horizon,
            dt,
        })
    }

    /// Grid whose time step sits at the given stability ratio.
    pub fn with_ratio(params: &GNormalParams, half_width: f64, dx: f64, horizon: f64, ratio: f64) -> Result<Self> {
        Self::new(params, half_width, dx, horizon, ratio * dx * dx / params.sigma_hi_sq)
    }

    /// `dx = 0.01`, `L = 8`, `T = 1`, ratio 0.4.
    pub fn reference(params: &GNormalParams) -> Result<Self> {
        Self::with_ratio(params, 8.0, 0.01, 1.0, DEFAULT_RATIO)
    }

    /// Same domain with `dx/2` and `dt/4`, so the stability ratio is kept.
    pub fn refined(&self) -> Self {
        Self {
            dx: self.dx / 2.0,
            dt: self.dt / 4.0,
            ..*self
        }
    }

    /// Grid covering horizon `t` at the same steps, widening `L` to keep
    /// the margin if needed.
    pub fn extended_to(&self, params: &GNormalParams, t: f64) -> Result<Self> {
        let horizon = self.horizon.max(t);
        let required = 6.0 * params.sigma_hi_sq.sqrt() * horizon.sqrt();
        let half_width = if self.half_width >= required {
            self.half_width
        } else {
            (required / self.dx).ceil() * self.dx
        };
        Self::new(params, half_width, self.dx, horizon, self.dt)
    }

    /// Number of cells on each side of the origin.
    pub fn half_cells(&self) -> usize {
        (self.half_width / self.dx).round() as usize
    }

    pub fn len(&self) -> usize {
        2 * self.half_cells() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> Vec<f64> {
        let m = self.half_cells() as i64;
        (-m..=m).map(|i| i as f64 * self.dx).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.half_cells()
    }

    pub fn stability_ratio(&self, params: &GNormalParams) -> f64 {
        self.dt * params.sigma_hi_sq / (self.dx * self.dx)
    }
}

/// Values of `u(·, t)` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GHeatSolution {
    pub params: GNormalParams,
    pub grid: Grid,
    pub nodes: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Serialize)]
struct SnapshotHeader<'a> {
    params: &'a GNormalParams,
    grid: &'a Grid,
    times: Vec<f64>,
}

#[derive(Serialize)]
struct SnapshotRow {
    t: f64,
    x: f64,
    u: f64,
}

impl GHeatSolution {
    pub fn at_origin(&self, snapshot: usize) -> f64 {
        self.snapshots[snapshot].values[self.grid.origin()]
    }

    /// CSV with columns `t, x, u`, preceded by `#`-prefixed lines holding the
    /// parameters and grid as JSON.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header = SnapshotHeader {
            params: &self.params,
            grid: &self.grid,
            times: self.snapshots.iter().map(|s| s.time).collect(),
        };
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        for line in json.lines() {
            writeln!(w, "# {line}").map_err(|e| GpdeError::Io(e.to_string()))?;
        }
        let rows: Vec<SnapshotRow> = self
            .snapshots
            .iter()
            .flat_map(|s| {
                self.nodes
                    .iter()
                    .zip(&s.values)
                    .map(move |(&x, &u)| SnapshotRow { t: s.time, x, u })
            })
            .collect();
        crate::output::write_csv(&rows, w).map_err(|e| GpdeError::Io(e.to_string()))
    }
}

fn sample(grid: &Grid, phi: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    grid.nodes()
        .into_iter()
        .map(|x| {
            let v = phi(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(GpdeError::NonFiniteInitial { x })
            }
        })
        .collect()
}

/// Advances `u` by `duration` in steps of at most `grid.dt`, landing exactly.
fn advance(params: &GNormalParams, grid: &Grid, u: &mut Vec<f64>, scratch: &mut Vec<f64>, duration: f64) {
    if duration <= 0.0 {
        return;
    }
    let steps = (duration / grid.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let up = 0.5 * params.sigma_hi_sq * dt / (grid.dx * grid.dx);
    let down = 0.5 * params.sigma_lo_sq * dt / (grid.dx * grid.dx);
    let n = u.len();
    scratch.resize(n, 0.0);
    for _ in 0..steps {
        for i in 1..n - 1 {
            let d2 = u[i - 1] - 2.0 * u[i] + u[i + 1];
            let coef = if d2 >= 0.0 { up } else { down };
            scratch[i] = u[i] + coef * d2;
        }
        scratch[0] = scratch[1];
        scratch[n - 1] = scratch[n - 2];
        std::mem::swap(u, scratch);
    }
}

/// Evolves sampled initial data and records snapshots at the requested
/// times, which must be non-decreasing and within the grid horizon.
pub fn evolve(params: &GNormalParams, grid: &Grid, initial: Vec<f64>, times: &[f64]) -> Result<GHeatSolution> {
    let mut u = initial;
    let mut scratch = Vec::with_capacity(u.len());
    let mut snapshots = Vec::with_capacity(times.len());
    let mut now = 0.0;
    for &t in times {
        if !(t >= now && t <= grid.horizon * (1.0 + 1e-12)) {
            return Err(GpdeError::BadTime {
                t,
                horizon: grid.horizon,
            });
        }
        advance(params, grid, &mut u, &mut scratch, t - now);
        now = t;
        snapshots.push(Snapshot {
            time: t,
            values: u.clone(),
        });
    }
    Ok(GHeatSolution {
        params: *params,
        grid: *grid,
        nodes: grid.nodes(),
        snapshots,
    })
}

/// Solves the G-heat equation with `u(·, 0) = φ`.
pub fn solve_g_heat(
    params: &GNormalParams,
    grid: &Grid,
    phi: &dyn Fn(f64) -> f64,
    times: &[f64],
) -> Result<GHeatSolution> {
    let initial = sample(grid, phi)?;
    evolve(params, grid, initial, times)
}

/// `Ê[φ(ξ)]` for `ξ ~ N(0, [σ̲², σ̄²])`, read off as `u(0, 1)`.
pub fn gnormal_expectation(params: &GNormalParams, phi: &dyn Fn(f64) -> f64, grid: &Grid) -> Result<f64> {
    let sol = solve_g_heat(params, grid, phi, &[1.0])?;
    Ok(sol.at_origin(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopyReport {
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `Ê[φ(aξ + bξ′)]` with `Ê[φ(√(a²+b²)ξ)]`, `ξ′` an independent
/// copy of `ξ`.
///
/// The left side takes two solves: `v = u_φ(·, b²)` is the inner expectation
/// over `bξ′`, and `Ê[v(aξ)] = u_v(0, a²)` by the scaling `aξ ~ √(a²)·ξ`.
/// The right side is one solve of `x ↦ φ(√(a²+b²)x)` to time 1. The grid is
/// widened if `a² + b²` exceeds its horizon.
pub fn independent_copy_check(
    params: &GNormalParams,
    phi: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    grid: &Grid,
) -> Result<CopyReport> {
    if !(a >= 0.0 && b >= 0.0 && a * a + b * b > 0.0) {
        return Err(GpdeError::BadCopyCoefficients { a, b });
    }
    let total = a * a + b * b;
    let grid = grid.extended_to(params, total)?;

    let inner = solve_g_heat(params, &grid, phi, &[b * b])?;
    let v = inner.snapshots.into_iter().next().expect("one snapshot").values;
    let lhs = evolve(params, &grid, v, &[a * a])?.at_origin(0);

    let r = total.sqrt();
    let rhs = gnormal_expectation(params, &|x| phi(r * x), &grid)?;
    Ok(CopyReport {
        a,
        b,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// `E[φ(μ + σZ)]` for standard normal `Z` by composite Simpson quadrature on
/// `μ ± 12σ`.
pub fn gaussian_expectation(phi: &dyn Fn(f64) -> f64, mean: f64, variance: f64) -> f64 {
    if variance == 0.0 {
        return phi(mean);
    }
    const HALF_INTERVALS: usize = 12_000;
    let sd = variance.sqrt();
    let h = 12.0 / HALF_INTERVALS as f64;
    let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let term = |i: usize| {
        let z = -12.0 + i as f64 * h;
        density(z) * phi(mean + sd * z)
    };
    let n = 2 * HALF_INTERVALS;
    let mut sum = term(0) + term(n);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * term(i);
    }
    sum * h / 3.0
}

/// Largest nodal difference between `u(·, t)` and the classical heat
/// solution `E[φ(x + √(σ²t)Z)]`.
pub fn max_error_vs_classical(
    solution: &GHeatSolution,
    snapshot: usize,
    phi: &dyn Fn(f64) -> f64,
    sigma_sq: f64,
    window: f64,
) -> f64 {
    let snap = &solution.snapshots[snapshot];
    solution
        .nodes
        .iter()
        .zip(&snap.values)
        .filter(|(x, _)| x.abs() <= window + 1e-12)
        .map(|(&x, &u)| (u - gaussian_expectation(phi, x, sigma_sq * snap.time)).abs())
        .fold(0.0, f64::max)
}
