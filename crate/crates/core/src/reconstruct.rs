//! Piecewise-linear face values with the centered-then-limited slope rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    #[default]
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimiterParams {
    pub theta: f64,
    pub order: Order,
}

impl Default for LimiterParams {
    fn default() -> Self {
        LimiterParams {
            theta: 2.0,
            order: Order::Second,
        }
    }
}

impl LimiterParams {
    pub fn first_order() -> Self {
        LimiterParams {
            order: Order::First,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.theta) {
            return Err(Error::config(
                "limiter.theta",
                format!("theta must lie in [1, 2], got {}", self.theta),
            ));
        }
        Ok(())
    }
}

pub fn minmod(z1: f64, z2: f64, z3: f64) -> f64 {
    if z1 > 0.0 && z2 > 0.0 && z3 > 0.0 {
        z1.min(z2).min(z3)
    } else if z1 < 0.0 && z2 < 0.0 && z3 < 0.0 {
        z1.max(z2).max(z3)
    } else {
        0.0
    }
}

/// One-sided face values. `north`/`south` are empty in 1D.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReconstructedStates {
    pub east: Vec<f64>,
    pub west: Vec<f64>,
    pub north: Vec<f64>,
    pub south: Vec<f64>,
}

impl ReconstructedStates {
    pub fn min(&self) -> f64 {
        [&self.east, &self.west, &self.north, &self.south]
            .iter()
            .flat_map(|v| v.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// Half-cell increment `(dx/2) * slope` from the cell and its two neighbors.
#[inline]
fn half_increment(left: f64, mid: f64, right: f64, theta: f64) -> f64 {
    let h = 0.25 * (right - left);
    if mid + h >= 0.0 && mid - h >= 0.0 {
        return h;
    }
    let h = 0.5 * minmod(theta * (right - mid), 0.5 * (right - left), theta * (mid - left));
    h.clamp(-mid, mid)
}

/// Writes faces along one line of cells read with a stride.
fn line_faces(
    values: &[f64],
    start: usize,
    stride: usize,
    len: usize,
    theta: f64,
    plus: &mut [f64],
    minus: &mut [f64],
) {
    for i in 0..len {
        let idx = start + i * stride;
        let mid = values[idx];
        let left = if i == 0 { mid } else { values[idx - stride] };
        let right = if i + 1 == len { mid } else { values[idx + stride] };
        let h = half_increment(left, mid, right, theta);
        plus[idx] = mid + h;
        minus[idx] = mid - h;
    }
}

/// Face values without input checks; `out` is resized as needed.
pub(crate) fn reconstruct_into(
    grid: &Grid,
    values: &[f64],
    params: &LimiterParams,
    out: &mut ReconstructedStates,
) {
    let n = values.len();
    let dim = grid.dim();
    out.east.resize(n, 0.0);
    out.west.resize(n, 0.0);
    let (ny_len, ns_len) = if dim == 2 { (n, n) } else { (0, 0) };
    out.north.resize(ny_len, 0.0);
    out.south.resize(ns_len, 0.0);

    if params.order == Order::First {
        out.east.copy_from_slice(values);
        out.west.copy_from_slice(values);
        if dim == 2 {
            out.north.copy_from_slice(values);
            out.south.copy_from_slice(values);
        }
        return;
    }
    match grid {
        Grid::One(_) => {
            line_faces(values, 0, 1, n, params.theta, &mut out.east, &mut out.west);
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            for k in 0..ny {
                line_faces(values, k * nx, 1, nx, params.theta, &mut out.east, &mut out.west);
            }
            for j in 0..nx {
                line_faces(values, j, nx, ny, params.theta, &mut out.north, &mut out.south);
            }
        }
    }
}

/// Face values `rho^E, rho^W` (and `rho^N, rho^S` in 2D) for a nonnegative field.
pub fn reconstruct_states(field: &Field, params: &LimiterParams) -> Result<ReconstructedStates> {
    params.validate()?;
    if let Some((i, v)) = field.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::Precondition(format!(
            "negative cell average {v} at cell {i}"
        )));
    }
    let mut out = ReconstructedStates::default();
    reconstruct_into(&field.grid, &field.values, params, &mut out);
    Ok(out)
}
