//! Interface velocities, upwind fluxes and the semi-discrete right-hand side.

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid};
use crate::model::ModelSpec;
use crate::nonlocal::{
    build_weight_table, external_values, xi_from_parts, ConvolutionPath, Convolver,
    QuadratureRule, WeightTable,
};
use crate::reconstruct::{reconstruct_into, LimiterParams, ReconstructedStates};

/// Velocities on every interface, boundaries included (always zero there).
///
/// 1D: `x[i]` sits on the left face of cell `i`, `N+1` entries.
/// 2D: `x` holds `(nx+1) * ny` entries indexed `k * (nx+1) + i`,
/// `y` holds `nx * (ny+1)` entries indexed `l * nx + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVelocities {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Same layout as [`InterfaceVelocities`].
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl InterfaceVelocities {
    /// Largest `u^+` and `-u^-` over x- and y-interfaces.
    pub fn max_speeds(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        (m(&self.x), m(&self.y))
    }
}

fn velocities_into(grid: &Grid, xi: &[f64], x: &mut Vec<f64>, y: &mut Vec<f64>) {
    match grid {
        Grid::One(g) => {
            let n = g.n_cells;
            let inv = 1.0 / g.dx();
            x.clear();
            x.resize(n + 1, 0.0);
            for i in 1..n {
                x[i] = -(xi[i] - xi[i - 1]) * inv;
            }
            y.clear();
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let (ix, iy) = (1.0 / g.x.dx(), 1.0 / g.y.dx());
            x.clear();
            x.resize((nx + 1) * ny, 0.0);
            for k in 0..ny {
                let row = &xi[k * nx..(k + 1) * nx];
                for i in 1..nx {
                    x[k * (nx + 1) + i] = -(row[i] - row[i - 1]) * ix;
                }
            }
            y.clear();
            y.resize(nx * (ny + 1), 0.0);
            for l in 1..ny {
                for j in 0..nx {
                    y[l * nx + j] = -(xi[l * nx + j] - xi[(l - 1) * nx + j]) * iy;
                }
            }
        }
    }
}

/// `u_{j+1/2} = -(xi_{j+1} - xi_j) / dx` on interior interfaces, zero on the boundary.
pub fn interface_velocities(xi: &Field) -> InterfaceVelocities {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    velocities_into(&xi.grid, &xi.values, &mut x, &mut y);
    InterfaceVelocities {
        grid: xi.grid,
        x,
        y,
    }
}

#[inline]
fn upwind(u: f64, left: f64, right: f64) -> f64 {
    u.max(0.0) * left + u.min(0.0) * right
}

fn fluxes_into(
    grid: &Grid,
    ux: &[f64],
    uy: &[f64],
    s: &ReconstructedStates,
    fx: &mut Vec<f64>,
    fy: &mut Vec<f64>,
) {
    match grid {
        Grid::One(g) => {
            let n = g.n_cells;
            fx.clear();
            fx.resize(n + 1, 0.0);
            for i in 1..n {
                fx[i] = upwind(ux[i], s.east[i - 1], s.west[i]);
            }
            fy.clear();
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            fx.clear();
            fx.resize((nx + 1) * ny, 0.0);
            for k in 0..ny {
                for i in 1..nx {
                    let c = k * nx + i;
                    fx[k * (nx + 1) + i] = upwind(ux[k * (nx + 1) + i], s.east[c - 1], s.west[c]);
                }
            }
            fy.clear();
            fy.resize(nx * (ny + 1), 0.0);
            for l in 1..ny {
                for j in 0..nx {
                    let c = l * nx + j;
                    fy[c] = upwind(uy[c], s.north[c - nx], s.south[c]);
                }
            }
        }
    }
}

/// `F = u^+ rho^E_left + u^- rho^W_right`; boundary fluxes are zero.
pub fn upwind_fluxes(
    velocities: &InterfaceVelocities,
    states: &ReconstructedStates,
) -> Result<FluxField> {
    let grid = velocities.grid;
    let n = grid.len();
    let want_ns = if grid.dim() == 2 { n } else { 0 };
    if states.east.len() != n || states.west.len() != n || states.north.len() != want_ns {
        return Err(Error::Precondition(
            "reconstructed states do not match the velocity grid".into(),
        ));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    fluxes_into(&grid, &velocities.x, &velocities.y, states, &mut x, &mut y);
    Ok(FluxField { grid, x, y })
}

fn divergence_into(grid: &Grid, fx: &[f64], fy: &[f64], out: &mut Vec<f64>) {
    out.clear();
    match grid {
        Grid::One(g) => {
            let inv = 1.0 / g.dx();
            out.extend((0..g.n_cells).map(|j| -(fx[j + 1] - fx[j]) * inv));
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let (ix, iy) = (1.0 / g.x.dx(), 1.0 / g.y.dx());
            for k in 0..ny {
                for j in 0..nx {
                    let ex = fx[k * (nx + 1) + j + 1] - fx[k * (nx + 1) + j];
                    let ey = fy[(k + 1) * nx + j] - fy[k * nx + j];
                    out.push(-ex * ix - ey * iy);
                }
            }
        }
    }
}

/// `-(F_{j+1/2} - F_{j-1/2}) / dx`, summed over directions in 2D.
pub fn flux_divergence(fluxes: &FluxField) -> Vec<f64> {
    let mut out = Vec::new();
    divergence_into(&fluxes.grid, &fluxes.x, &fluxes.y, &mut out);
    out
}

/// Everything computed from one state on the way to `d rho / dt`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// `(W * rho)_j`, zero without a kernel.
    pub interaction: Vec<f64>,
    pub xi: Vec<f64>,
    pub velocities: InterfaceVelocities,
    pub states: ReconstructedStates,
    pub fluxes: FluxField,
    pub rhs: Vec<f64>,
}

impl Evaluation {
    /// `cellvol * sum |rhs|`.
    pub fn rhs_l1(&self) -> f64 {
        self.velocities.grid.cell_volume() * self.rhs.iter().map(|r| r.abs()).sum::<f64>()
    }
}

/// A model discretized on a fixed grid.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub model: ModelSpec,
    pub grid: Grid,
    pub limiter: LimiterParams,
    convolver: Option<Convolver>,
    external: Vec<f64>,
}

impl Scheme {
    /// Uses a prebuilt table (or none when the model has no kernel).
    pub fn new(
        model: ModelSpec,
        grid: Grid,
        table: Option<WeightTable>,
        path: ConvolutionPath,
        limiter: LimiterParams,
    ) -> Result<Self> {
        grid.validate()?;
        model.validate(grid.dim())?;
        limiter.validate()?;
        match (&model.kernel, &table) {
            (Some(_), None) => {
                return Err(Error::config("rule", "kernel present but no weight table given"))
            }
            (None, Some(_)) => {
                return Err(Error::config("kernel", "weight table given without a kernel"))
            }
            (_, Some(t)) if t.grid != grid => {
                return Err(Error::Precondition("weight table built for another grid".into()))
            }
            _ => {}
        }
        let external = external_values(&model, &grid)?;
        Ok(Scheme {
            convolver: table.map(|t| Convolver::new(t, path)),
            model,
            grid,
            limiter,
            external,
        })
    }

    pub fn build(
        model: ModelSpec,
        grid: Grid,
        rule: QuadratureRule,
        path: ConvolutionPath,
        limiter: LimiterParams,
    ) -> Result<Self> {
        let table = match &model.kernel {
            Some(k) => Some(build_weight_table(k, &grid, rule)?),
            None => None,
        };
        Self::new(model, grid, table, path, limiter)
    }

    pub fn convolver(&self) -> Option<&Convolver> {
        self.convolver.as_ref()
    }

    pub fn external(&self) -> &[f64] {
        &self.external
    }

    /// `(W * rho)_j = cellvol * sum_i W_{j-i} rho_i`, zero without a kernel.
    pub fn interaction(&self, rho: &[f64]) -> Vec<f64> {
        match &self.convolver {
            Some(c) => c.apply(rho),
            None => vec![0.0; rho.len()],
        }
    }

    pub fn xi(&self, rho: &[f64]) -> Vec<f64> {
        xi_from_parts(&self.model, self.convolver.as_ref(), &self.external, rho)
    }

    /// Full evaluation of a nonnegative state; no input checks.
    pub fn evaluate(&self, rho: &[f64]) -> Evaluation {
        let interaction = self.interaction(rho);
        let xi: Vec<f64> = interaction
            .iter()
            .zip(rho)
            .zip(&self.external)
            .map(|((&c, &r), &v)| c + self.model.internal.derivative(r) + v)
            .collect();
        let (mut ux, mut uy) = (Vec::new(), Vec::new());
        velocities_into(&self.grid, &xi, &mut ux, &mut uy);
        let mut states = ReconstructedStates::default();
        reconstruct_into(&self.grid, rho, &self.limiter, &mut states);
        let (mut fx, mut fy) = (Vec::new(), Vec::new());
        fluxes_into(&self.grid, &ux, &uy, &states, &mut fx, &mut fy);
        let mut rhs = Vec::with_capacity(rho.len());
        divergence_into(&self.grid, &fx, &fy, &mut rhs);
        Evaluation {
            interaction,
            xi,
            velocities: InterfaceVelocities {
                grid: self.grid,
                x: ux,
                y: uy,
            },
            states,
            fluxes: FluxField {
                grid: self.grid,
                x: fx,
                y: fy,
            },
            rhs,
        }
    }

    /// Checked evaluation of a field.
    pub fn evaluate_field(&self, field: &Field) -> Result<Evaluation> {
        if field.grid != self.grid {
            return Err(Error::Precondition("field is on a different grid".into()));
        }
        if let Some((i, v)) = field.values.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
            return Err(Error::Precondition(format!(
                "cell average {v} at cell {i} is not a nonnegative number"
            )));
        }
        let eval = self.evaluate(&field.values);
        if eval.rhs.iter().any(|r| !r.is_finite()) {
            return Err(Error::Numeric("non-finite right-hand side".into()));
        }
        Ok(eval)
    }
}

/// `d rho / dt` for a nonnegative field.
pub fn rhs(
    field: &Field,
    model: &ModelSpec,
    table: Option<&WeightTable>,
    params: &LimiterParams,
) -> Result<Vec<f64>> {
    let scheme = Scheme::new(
        model.clone(),
        field.grid,
        table.cloned(),
        ConvolutionPath::Auto,
        *params,
    )?;
    Ok(scheme.evaluate_field(field)?.rhs)
}
