//! Discrete free energy and dissipation, error norms, steady-state checks and rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{Evaluation, InterfaceVelocities, Scheme};
use crate::mesh::{Field, Grid};
use crate::model::ModelSpec;
use crate::nonlocal::{ConvolutionPath, WeightTable};
use crate::reconstruct::{LimiterParams, ReconstructedStates};
use crate::timestep::{support_components, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub entropy: f64,
    pub dissipation: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub status: RunStatus,
}

/// The three parts of the discrete free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParts {
    pub interaction: f64,
    pub internal: f64,
    pub potential: f64,
}

impl EntropyParts {
    pub fn total(&self) -> f64 {
        self.interaction + self.internal + self.potential
    }
}

/// `cellvol * sum_j [ (W*rho)_j rho_j / 2 + H(rho_j) + V_j rho_j ]`, split by term.
pub fn entropy_parts(scheme: &Scheme, rho: &[f64]) -> EntropyParts {
    entropy_parts_with(scheme, rho, &scheme.interaction(rho))
}

/// As [`entropy_parts`], reusing a precomputed `W * rho`.
pub fn entropy_parts_with(scheme: &Scheme, rho: &[f64], conv: &[f64]) -> EntropyParts {
    let vol = scheme.grid.cell_volume();
    let (mut ei, mut eh, mut ev) = (0.0, 0.0, 0.0);
    for ((&r, &c), &v) in rho.iter().zip(conv).zip(scheme.external()) {
        ei += 0.5 * c * r;
        if scheme.model.internal.is_present() {
            eh += scheme.model.internal.value(r);
        }
        ev += v * r;
    }
    EntropyParts {
        interaction: vol * ei,
        internal: vol * eh,
        potential: vol * ev,
    }
}

/// Discrete free energy of a nonnegative field.
pub fn discrete_entropy(
    field: &Field,
    model: &ModelSpec,
    table: Option<&WeightTable>,
) -> Result<f64> {
    let scheme = Scheme::new(
        model.clone(),
        field.grid,
        table.cloned(),
        ConvolutionPath::Auto,
        LimiterParams::default(),
    )?;
    if !field.is_nonnegative() {
        return Err(Error::Precondition("field has negative cell averages".into()));
    }
    Ok(entropy_parts(&scheme, &field.values).total())
}

/// Which minimum the dissipation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationMin {
    /// Minimum of the adjacent face values at each interface.
    #[default]
    PerInterface,
    /// One global minimum over all interface pairs.
    Global,
}

/// Discrete entropy dissipation `I_Delta`.
pub fn discrete_dissipation(
    states: &ReconstructedStates,
    velocities: &InterfaceVelocities,
    mode: DissipationMin,
) -> f64 {
    let grid = velocities.grid;
    // (u^2 weight, face minimum) per term, accumulated below by mode.
    let mut terms: Vec<(f64, f64)> = Vec::new();
    match grid {
        Grid::One(g) => {
            for i in 1..g.n_cells {
                let u = velocities.x[i];
                terms.push((u * u, states.east[i - 1].min(states.west[i])));
            }
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            for k in 0..ny {
                for j in 0..nx {
                    let c = k * nx + j;
                    let u = velocities.x[k * (nx + 1) + j + 1];
                    let v = velocities.y[(k + 1) * nx + j];
                    let mut m = states.east[c].min(states.north[c]);
                    if j + 1 < nx {
                        m = m.min(states.west[c + 1]);
                    }
                    if k + 1 < ny {
                        m = m.min(states.south[c + nx]);
                    }
                    terms.push((u * u + v * v, m));
                }
            }
        }
    }
    let vol = grid.cell_volume();
    match mode {
        DissipationMin::PerInterface => vol * terms.iter().map(|(w, m)| w * m).sum::<f64>(),
        DissipationMin::Global => {
            let m = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
            if terms.is_empty() {
                0.0
            } else {
                vol * m * terms.iter().map(|t| t.0).sum::<f64>()
            }
        }
    }
}

/// Exact chain-rule rate `cellvol * sum xi_j rhs_j` of the discrete energy.
pub fn entropy_rate(grid: &Grid, eval: &Evaluation) -> f64 {
    grid.cell_volume() * eval.xi.iter().zip(&eval.rhs).map(|(x, r)| x * r).sum::<f64>()
}

/// `cellvol * sum u F` over all interfaces; equals `-entropy_rate` up to rounding.
pub fn flux_work(grid: &Grid, eval: &Evaluation) -> f64 {
    let s: f64 = eval
        .velocities
        .x
        .iter()
        .zip(&eval.fluxes.x)
        .chain(eval.velocities.y.iter().zip(&eval.fluxes.y))
        .map(|(u, f)| u * f)
        .sum();
    grid.cell_volume() * s
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

// Sub-intervals per axis for cell averages of closed forms.
const AVERAGE_SUBCELLS: usize = 4;

/// Cell average of `f` over cell `idx`: composite 5-point Gauss per axis.
pub fn cell_average<F>(grid: &Grid, idx: usize, f: &F) -> f64
where
    F: Fn([f64; 2]) -> f64 + ?Sized,
{
    let c = grid.center(idx);
    let h = grid.spacings();
    let s = AVERAGE_SUBCELLS;
    let nodes = |center: f64, width: f64| {
        let sub = width / s as f64;
        (0..s).flat_map(move |k| {
            let mid = center - 0.5 * width + (k as f64 + 0.5) * sub;
            GAUSS5_NODES
                .iter()
                .zip(GAUSS5_WEIGHTS)
                .map(move |(x, w)| (mid + 0.5 * sub * x, 0.5 * w / s as f64))
        })
    };
    if grid.dim() == 1 {
        nodes(c[0], h[0]).map(|(x, w)| w * f([x, 0.0])).sum()
    } else {
        let mut acc = 0.0;
        for (y, wy) in nodes(c[1], h[1]) {
            for (x, wx) in nodes(c[0], h[0]) {
                acc += wx * wy * f([x, y]);
            }
        }
        acc
    }
}

/// `(L1, Linf)` against a closed-form density. L1 compares cell averages,
/// `cellvol * sum |rho_j - avg_j(ref)|`; Linf compares against values at cell centers.
pub fn error_norms_closed_form<F>(field: &Field, reference: F) -> (f64, f64)
where
    F: Fn([f64; 2]) -> f64,
{
    let grid = field.grid;
    let vol = grid.cell_volume();
    let (mut l1, mut linf) = (0.0_f64, 0.0_f64);
    for (idx, &v) in field.values.iter().enumerate() {
        linf = linf.max((v - reference(grid.center(idx))).abs());
        l1 += vol * (v - cell_average(&grid, idx, &reference)).abs();
    }
    (l1, linf)
}

/// `sum_j int_{C_j} |rho_j - ref(x)| dx` with the field taken piecewise constant.
/// Bounded below by `O(dx)` for any nonconstant reference.
pub fn l1_piecewise_constant<F>(field: &Field, reference: F) -> f64
where
    F: Fn([f64; 2]) -> f64,
{
    let grid = field.grid;
    let vol = grid.cell_volume();
    field
        .values
        .iter()
        .enumerate()
        .map(|(idx, &v)| vol * cell_average(&grid, idx, &|p| (v - reference(p)).abs()))
        .sum()
}

/// Value of a finer field at the center of coarse cell `idx`: the mean of the
/// fine cells touching that point (one for odd ratios, two or four for even).
fn fine_value_at_center(coarse: &Grid, fine: &Field, ratio: usize, idx: usize) -> f64 {
    let shape = coarse.shape();
    let nfx = shape[0] * ratio;
    let (j, k) = (idx % shape[0], idx / shape[0]);
    let near = |c: usize| -> Vec<usize> {
        if ratio % 2 == 1 {
            vec![c * ratio + ratio / 2]
        } else {
            vec![c * ratio + ratio / 2 - 1, c * ratio + ratio / 2]
        }
    };
    let xs = near(j);
    let ys = if shape.len() == 2 { near(k) } else { vec![0] };
    let mut acc = 0.0;
    for &y in &ys {
        for &x in &xs {
            acc += fine.values[y * nfx + x];
        }
    }
    acc / (xs.len() * ys.len()) as f64
}

/// `(L1, Linf)` against a finer field: L1 compares with the fine field restricted by
/// exact cell averaging, Linf with its value at coarse cell centers.
pub fn error_norms_restricted(field: &Field, fine: &Field) -> Result<(f64, f64)> {
    let (nc, nf) = (field.grid.shape(), fine.grid.shape());
    let ratio = nf[0] / nc[0];
    let consistent = ratio >= 1
        && nc.len() == nf.len()
        && nc.iter().zip(&nf).all(|(c, f)| c * ratio == *f)
        && field.grid.refined(ratio) == fine.grid;
    if !consistent {
        return Err(Error::Precondition(
            "reference grid is not an integer refinement of the field grid".into(),
        ));
    }
    let coarse = fine.coarsen(ratio)?;
    let vol = field.grid.cell_volume();
    let (mut l1, mut linf) = (0.0_f64, 0.0_f64);
    for (idx, (a, b)) in field.values.iter().zip(&coarse.values).enumerate() {
        l1 += vol * (a - b).abs();
        let point = fine_value_at_center(&field.grid, fine, ratio, idx);
        linf = linf.max((a - point).abs());
    }
    Ok((l1, linf))
}

/// `log2(e_k / e_{k+1})` for a ratio-2 refinement ladder.
pub fn observed_order(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::Precondition("need at least two errors".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Precondition("errors must be positive".into()));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Oscillation `max xi - min xi` on each connected component of `{rho > threshold}`.
pub fn xi_flatness(field: &Field, xi: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold > 0.0) {
        return Err(Error::Precondition("threshold must be positive".into()));
    }
    if xi.len() != field.values.len() {
        return Err(Error::Precondition("xi does not match the field".into()));
    }
    Ok(support_components(&field.grid, &field.values, threshold)
        .into_iter()
        .map(|comp| {
            let (lo, hi) = comp.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| {
                (l.min(xi[c]), h.max(xi[c]))
            });
            hi - lo
        })
        .collect())
}

/// Default component threshold, `1e-6 * max rho`.
pub fn default_support_threshold(field: &Field) -> f64 {
    1e-6 * field.max()
}

/// `cellvol * sum |a - b|` for fields on the same grid.
pub fn l1_distance(a: &Field, b: &Field) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Precondition("fields are on different grids".into()));
    }
    Ok(a.grid.cell_volume() * a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Minus the least-squares slope of `ln d` against `t`.
pub fn fit_exponential_rate(times: &[f64], distances: &[f64]) -> Result<f64> {
    if times.len() != distances.len() {
        return Err(Error::Precondition("times and distances differ in length".into()));
    }
    if times.len() < 10 {
        return Err(Error::Precondition("need at least 10 samples".into()));
    }
    if distances.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Precondition("distances must be positive".into()));
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let lm = distances.iter().map(|d| d.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, d) in times.iter().zip(distances) {
        sxy += (t - tm) * (d.ln() - lm);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::Precondition("sample times are all equal".into()));
    }
    Ok(-sxy / sxx)
}
