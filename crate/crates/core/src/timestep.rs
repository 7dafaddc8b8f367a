//! Step-size selection, forward Euler and SSP-RK3, and run-state classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{Evaluation, InterfaceVelocities, Scheme};
use crate::mesh::{Field, Grid};
use crate::reconstruct::Order;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Ssprk3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub dt_floor: f64,
    /// Absolute density threshold; `None` means `1e8 / cellvol`.
    pub rho_blowup: Option<f64>,
    /// Steady when `cellvol * sum |rhs| / mass` falls to this value.
    pub steady_tol: f64,
    /// Concentration fraction for the collapse test; `None` disables it.
    pub collapse_fraction: Option<f64>,
    /// Also bound dt by the explicit diffusion limit `dx^2 / (2 max rho H'')`.
    pub parabolic_cap: bool,
    /// Constant step, still subject to the positivity bound.
    pub dt_fixed: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl_safety: 0.9,
            dt_max: 0.1,
            dt_floor: 1e-12,
            rho_blowup: None,
            steady_tol: 1e-7,
            collapse_fraction: Some(0.9),
            parabolic_cap: true,
            dt_fixed: None,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, path: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be positive and finite, got {v}")))
            }
        };
        pos(self.cfl_safety, "control.cfl_safety")?;
        if self.cfl_safety > 1.0 {
            return Err(Error::config("control.cfl_safety", "must not exceed 1"));
        }
        pos(self.dt_max, "control.dt_max")?;
        pos(self.dt_floor, "control.dt_floor")?;
        pos(self.steady_tol, "control.steady_tol")?;
        if let Some(r) = self.rho_blowup {
            pos(r, "control.rho_blowup")?;
        }
        if let Some(f) = self.collapse_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config("control.collapse_fraction", "must lie in (0, 1]"));
            }
        }
        if let Some(dt) = self.dt_fixed {
            pos(dt, "control.dt_fixed")?;
        }
        Ok(())
    }

    pub fn blowup_threshold(&self, grid: &Grid) -> f64 {
        self.rho_blowup.unwrap_or(1e8 / grid.cell_volume())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "t", rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Steady(f64),
    Finished(f64),
    BlowUp(f64),
}

impl RunStatus {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, RunStatus::Running)
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Running => "running",
            RunStatus::Steady(_) => "steady",
            RunStatus::Finished(_) => "finished",
            RunStatus::BlowUp(_) => "blow_up",
        }
    }
}

/// Positivity-preserving step bound for the given interface velocities.
pub fn cfl_max_dt(velocities: &InterfaceVelocities, order: Order, dt_max: f64) -> f64 {
    let bound = match velocities.grid {
        Grid::One(g) => {
            let dx = g.dx();
            let speed = match order {
                Order::Second => velocities.max_speeds().0,
                Order::First => velocities
                    .x
                    .windows(2)
                    .map(|w| w[1].max(0.0) - w[0].min(0.0))
                    .fold(0.0, f64::max),
            };
            dx / (2.0 * speed)
        }
        Grid::Two(g) => {
            let (a, b) = velocities.max_speeds();
            (g.x.dx() / (4.0 * a)).min(g.y.dx() / (4.0 * b))
        }
    };
    bound.min(dt_max)
}

/// Explicit diffusion limit from the largest `rho H''(rho)` over the cells.
pub fn parabolic_max_dt(scheme: &Scheme, rho: &[f64]) -> f64 {
    if !scheme.model.internal.is_present() {
        return f64::INFINITY;
    }
    let d = rho
        .iter()
        .map(|&r| scheme.model.internal.diffusivity(r))
        .fold(0.0, f64::max);
    let inv2: f64 = scheme.grid.spacings().iter().map(|h| 1.0 / (h * h)).sum();
    1.0 / (2.0 * d * inv2)
}

/// Largest admissible dt at a state, safety factor included.
pub fn admissible_dt(scheme: &Scheme, rho: &[f64], eval: &Evaluation, control: &StepControl) -> f64 {
    let mut dt = cfl_max_dt(&eval.velocities, scheme.limiter.order, control.dt_max);
    if control.parabolic_cap {
        dt = dt.min(parabolic_max_dt(scheme, rho));
    }
    control.cfl_safety * dt
}

// Rounding slack when comparing a step against its bound.
const BOUND_SLACK: f64 = 1e-12;

/// `rho + dt * rhs`, with rounding-level negatives set to zero.
/// Returns `None` if a value is negative beyond rounding.
fn euler_update(base: &[f64], rhs: &[f64], dt: f64, clamped: &mut usize) -> Option<Vec<f64>> {
    let scale = base.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut out = Vec::with_capacity(base.len());
    for (&r, &d) in base.iter().zip(rhs) {
        let v = r + dt * d;
        if v < 0.0 {
            if v < -1e-12 * scale {
                return None;
            }
            *clamped += 1;
            out.push(0.0);
        } else {
            out.push(v);
        }
    }
    Some(out)
}

/// An accepted step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub values: Vec<f64>,
    pub dt: f64,
    pub rejections: u32,
    /// Rounding-level negatives reset to zero.
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub enum StepOutcome {
    Accepted(StepReport),
    /// Halving drove dt below `dt_floor`.
    Underflow { dt: f64 },
}

fn try_euler(
    scheme: &Scheme,
    rho: &[f64],
    eval0: &Evaluation,
    dt: f64,
    control: &StepControl,
) -> Option<(Vec<f64>, usize)> {
    if dt > admissible_dt(scheme, rho, eval0, control) * (1.0 + BOUND_SLACK) {
        return None;
    }
    let mut clamped = 0;
    euler_update(rho, &eval0.rhs, dt, &mut clamped).map(|v| (v, clamped))
}

fn try_rk3(
    scheme: &Scheme,
    rho: &[f64],
    eval0: &Evaluation,
    dt: f64,
    control: &StepControl,
) -> Option<(Vec<f64>, usize)> {
    let ok = |r: &[f64], e: &Evaluation| {
        dt <= admissible_dt(scheme, r, e, control) * (1.0 + BOUND_SLACK)
    };
    if !ok(rho, eval0) {
        return None;
    }
    let mut clamped = 0;
    let s1 = euler_update(rho, &eval0.rhs, dt, &mut clamped)?;
    let e1 = scheme.evaluate(&s1);
    if !ok(&s1, &e1) {
        return None;
    }
    let t1 = euler_update(&s1, &e1.rhs, dt, &mut clamped)?;
    let s2: Vec<f64> = rho
        .iter()
        .zip(&t1)
        .map(|(&a, &b)| 0.75 * a + 0.25 * b)
        .collect();
    let e2 = scheme.evaluate(&s2);
    if !ok(&s2, &e2) {
        return None;
    }
    let t2 = euler_update(&s2, &e2.rhs, dt, &mut clamped)?;
    let out = rho
        .iter()
        .zip(&t2)
        .map(|(&a, &b)| a / 3.0 + 2.0 / 3.0 * b)
        .collect();
    Some((out, clamped))
}

/// Attempts a step of size `dt`, halving on any bound violation.
/// `eval0` must be the evaluation of `rho`.
pub fn advance(
    scheme: &Scheme,
    integrator: Integrator,
    rho: &[f64],
    eval0: &Evaluation,
    dt: f64,
    control: &StepControl,
) -> StepOutcome {
    let mut dt = dt;
    let mut rejections = 0;
    loop {
        if dt < control.dt_floor {
            return StepOutcome::Underflow { dt };
        }
        let attempt = match integrator {
            Integrator::Euler => try_euler(scheme, rho, eval0, dt, control),
            Integrator::Ssprk3 => try_rk3(scheme, rho, eval0, dt, control),
        };
        if let Some((values, clamped)) = attempt {
            return StepOutcome::Accepted(StepReport {
                values,
                dt,
                rejections,
                clamped,
            });
        }
        dt *= 0.5;
        rejections += 1;
    }
}

/// One forward Euler step; fails if `dt` exceeds the admissible bound.
pub fn forward_euler_step(
    scheme: &Scheme,
    field: &Field,
    dt: f64,
    control: &StepControl,
) -> Result<Field> {
    let eval = scheme.evaluate_field(field)?;
    let bound = admissible_dt(scheme, &field.values, &eval, control);
    if dt > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::Precondition(format!(
            "dt = {dt} exceeds the admissible step {bound}"
        )));
    }
    let mut clamped = 0;
    let values = euler_update(&field.values, &eval.rhs, dt, &mut clamped)
        .ok_or_else(|| Error::Numeric("negative cell average after Euler step".into()))?;
    Field::new(field.grid, values)
}

/// One SSP-RK3 step of at most `dt`; stage bounds are enforced by halving.
pub fn ssp_rk3_step(
    scheme: &Scheme,
    field: &Field,
    dt: f64,
    control: &StepControl,
) -> Result<StepOutcome> {
    let eval = scheme.evaluate_field(field)?;
    Ok(advance(
        scheme,
        Integrator::Ssprk3,
        &field.values,
        &eval,
        dt,
        control,
    ))
}

/// Connected components of `{rho > threshold}`; axis adjacency in 2D.
pub fn support_components(grid: &Grid, rho: &[f64], threshold: f64) -> Vec<Vec<usize>> {
    let (nx, ny) = match grid {
        Grid::One(g) => (g.n_cells, 1),
        Grid::Two(g) => (g.nx(), g.ny()),
    };
    let mut seen = vec![false; rho.len()];
    let mut comps = Vec::new();
    for start in 0..rho.len() {
        if seen[start] || rho[start] <= threshold {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(c) = stack.pop() {
            comp.push(c);
            let (j, k) = (c % nx, c / nx);
            let mut push = |n: usize| {
                if !seen[n] && rho[n] > threshold {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if j > 0 {
                push(c - 1);
            }
            if j + 1 < nx {
                push(c + 1);
            }
            if k > 0 {
                push(c - nx);
            }
            if k + 1 < ny {
                push(c + nx);
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// True when some support component carrying at least 1% of the mass holds
/// `fraction` of its mass in a single 2-cell (2x2 in 2D) window.
pub fn detect_collapse(grid: &Grid, rho: &[f64], fraction: f64) -> bool {
    let max = rho.iter().fold(0.0_f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return false;
    }
    let total: f64 = rho.iter().sum();
    let nx = match grid {
        Grid::One(g) => g.n_cells,
        Grid::Two(g) => g.nx(),
    };
    for comp in support_components(grid, rho, 1e-6 * max) {
        let mass: f64 = comp.iter().map(|&c| rho[c]).sum();
        if mass < 0.01 * total {
            continue;
        }
        let window = comp
            .iter()
            .map(|&c| match grid {
                Grid::One(_) => rho[c] + rho.get(c + 1).copied().unwrap_or(0.0),
                Grid::Two(g) => {
                    let (j, k) = (c % nx, c / nx);
                    let right = j + 1 < nx;
                    let up = k + 1 < g.ny();
                    rho[c]
                        + if right { rho[c + 1] } else { 0.0 }
                        + if up { rho[c + nx] } else { 0.0 }
                        + if right && up { rho[c + nx + 1] } else { 0.0 }
                }
            })
            .fold(0.0, f64::max);
        if window >= fraction * mass {
            return true;
        }
    }
    false
}

/// Run state after a step: blow-up, steady, finished or still running.
pub fn classify_state(
    field: &Field,
    rhs_norm: f64,
    dt: f64,
    t: f64,
    t_end: f64,
    control: &StepControl,
) -> RunStatus {
    if dt < control.dt_floor || field.max() >= control.blowup_threshold(&field.grid) {
        return RunStatus::BlowUp(t);
    }
    if let Some(f) = control.collapse_fraction {
        if detect_collapse(&field.grid, &field.values, f) {
            return RunStatus::BlowUp(t);
        }
    }
    let mass = crate::mesh::total_mass(field);
    if rhs_norm <= control.steady_tol * mass {
        return RunStatus::Steady(t);
    }
    if t >= t_end {
        return RunStatus::Finished(t);
    }
    RunStatus::Running
}
