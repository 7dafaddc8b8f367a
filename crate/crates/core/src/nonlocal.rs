//! Kernel weight tables and the discrete nonlocal term `cellvol * sum_i W_{j-i} rho_i`.
//!
//! Tables are indexed by signed cell offsets. The convolution is linear and,
//! because every table is symmetric, self-adjoint in the plain dot product.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid};
use crate::model::{kernel_cell_average_1d, kernel_value, KernelSpec, ModelSpec};

/// Cell count from which [`ConvolutionPath::Auto`] switches to FFT.
pub const FFT_CROSSOVER: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// `W` at the offset center.
    Midpoint,
    /// Mean of `W` at the offset cell's corners.
    Trapezoid,
    /// Closed-form cell average (1D only).
    ExactIntegral,
    /// Tensor 4-point Gauss-Legendre cell average.
    GaussTensor4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionPath {
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Symmetric kernel weights `W_n` (1D) or `W_{n,p}` (2D) for all offsets a
/// grid can produce.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub grid: Grid,
    pub rule: QuadratureRule,
    /// 1D: `2N-1` entries, offset `n` at `n + N - 1`.
    /// 2D: `(2nx-1) x (2ny-1)` entries, offset `(n, p)` at
    /// `(p + ny - 1) * (2nx - 1) + n + nx - 1`.
    weights: Vec<f64>,
}

impl WeightTable {
    fn half_widths(&self) -> (usize, usize) {
        match self.grid {
            Grid::One(g) => (g.n_cells, 1),
            Grid::Two(g) => (g.nx(), g.ny()),
        }
    }

    pub fn get(&self, n: i64) -> f64 {
        let (nx, _) = self.half_widths();
        self.weights[(n + nx as i64 - 1) as usize]
    }

    pub fn get2(&self, n: i64, p: i64) -> f64 {
        let (nx, ny) = self.half_widths();
        let row = 2 * nx - 1;
        self.weights[(p + ny as i64 - 1) as usize * row + (n + nx as i64 - 1) as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Debug dump: `offset,weight` (1D) or `offset_x,offset_y,weight` (2D).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let (nx, ny) = self.half_widths();
        match self.grid {
            Grid::One(_) => {
                writeln!(out, "offset,weight")?;
                for n in -(nx as i64 - 1)..nx as i64 {
                    writeln!(out, "{n},{:.16e}", self.get(n))?;
                }
            }
            Grid::Two(_) => {
                writeln!(out, "offset_x,offset_y,weight")?;
                for p in -(ny as i64 - 1)..ny as i64 {
                    for n in -(nx as i64 - 1)..nx as i64 {
                        writeln!(out, "{n},{p},{:.16e}", self.get2(n, p))?;
                    }
                }
            }
        }
        Ok(())
    }
}

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

fn weight_1d(kernel: &KernelSpec, rule: QuadratureRule, n: i64, dx: f64) -> Result<f64> {
    let c = n as f64 * dx;
    match rule {
        QuadratureRule::Midpoint => kernel.radial(c.abs(), 1),
        QuadratureRule::Trapezoid => Ok(0.5
            * (kernel.radial((c - 0.5 * dx).abs(), 1)? + kernel.radial((c + 0.5 * dx).abs(), 1)?)),
        QuadratureRule::ExactIntegral => kernel_cell_average_1d(kernel, n, dx),
        QuadratureRule::GaussTensor4 => {
            let mut acc = 0.0;
            for (s, w) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                acc += 0.5 * w * kernel.radial((c + 0.5 * dx * s).abs(), 1)?;
            }
            Ok(acc)
        }
    }
}

fn weight_2d(
    kernel: &KernelSpec,
    rule: QuadratureRule,
    (n, p): (i64, i64),
    (dx, dy): (f64, f64),
) -> Result<f64> {
    let (cx, cy) = (n as f64 * dx, p as f64 * dy);
    match rule {
        QuadratureRule::Midpoint => kernel_value(kernel, [cx, cy], 2),
        QuadratureRule::Trapezoid => {
            let mut acc = 0.0;
            for sx in [-0.5, 0.5] {
                for sy in [-0.5, 0.5] {
                    acc += 0.25 * kernel_value(kernel, [cx + sx * dx, cy + sy * dy], 2)?;
                }
            }
            Ok(acc)
        }
        QuadratureRule::ExactIntegral => Err(Error::config(
            "rule",
            "exact cell integrals are only available in 1D",
        )),
        QuadratureRule::GaussTensor4 => {
            let mut acc = 0.0;
            for (sy, wy) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                for (sx, wx) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                    let d = [cx + 0.5 * dx * sx, cy + 0.5 * dy * sy];
                    acc += 0.25 * wx * wy * kernel_value(kernel, d, 2)?;
                }
            }
            Ok(acc)
        }
    }
}

/// Precomputes `W_{j-i}` for every offset the grid can produce.
pub fn build_weight_table(
    kernel: &KernelSpec,
    grid: &Grid,
    rule: QuadratureRule,
) -> Result<WeightTable> {
    kernel.validate(grid.dim())?;
    if kernel.singular_at_origin()
        && matches!(rule, QuadratureRule::Midpoint | QuadratureRule::Trapezoid)
    {
        return Err(Error::config(
            "rule",
            format!("{rule:?} cannot be used with a kernel singular at the origin"),
        ));
    }
    if rule == QuadratureRule::ExactIntegral && grid.dim() == 1 && !kernel.has_antiderivative_1d()
    {
        return Err(Error::config(
            "rule",
            "exact integral requested for a kernel without closed-form antiderivative",
        ));
    }
    let weights: Vec<f64> = match grid {
        Grid::One(g) => {
            let n = g.n_cells as i64;
            (-(n - 1)..n)
                .into_par_iter()
                .map(|off| weight_1d(kernel, rule, off.abs(), g.dx()))
                .collect::<Result<_>>()?
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx() as i64, g.ny() as i64);
            let row = 2 * nx - 1;
            (0..row * (2 * ny - 1))
                .into_par_iter()
                .map(|i| {
                    let (n, p) = (i % row - (nx - 1), i / row - (ny - 1));
                    weight_2d(kernel, rule, (n.abs(), p.abs()), (g.x.dx(), g.y.dx()))
                })
                .collect::<Result<_>>()?
        }
    };
    if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::Numeric(format!("non-finite kernel weight at table entry {i}")));
    }
    Ok(WeightTable {
        grid: *grid,
        rule,
        weights,
    })
}

fn check_geometry(table: &WeightTable, field: &Field) -> Result<()> {
    if table.grid != field.grid {
        return Err(Error::Precondition(
            "weight table and field are on different grids".into(),
        ));
    }
    Ok(())
}

/// `O(N^2)` evaluation of `s_j = cellvol * sum_i W_{j-i} rho_i`.
pub fn convolve_direct(table: &WeightTable, field: &Field) -> Result<Vec<f64>> {
    check_geometry(table, field)?;
    Ok(direct(table, &field.values))
}

fn direct(table: &WeightTable, values: &[f64]) -> Vec<f64> {
    let vol = table.grid.cell_volume();
    match table.grid {
        Grid::One(g) => {
            let n = g.n_cells;
            (0..n)
                .into_par_iter()
                .map(|j| {
                    // w[j - i] for i = 0..n sits at index (j - i) + n - 1.
                    let base = j + n - 1;
                    let mut acc = 0.0;
                    for (i, &rho) in values.iter().enumerate() {
                        acc += table.weights[base - i] * rho;
                    }
                    vol * acc
                })
                .collect()
        }
        Grid::Two(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let row = 2 * nx - 1;
            (0..nx * ny)
                .into_par_iter()
                .map(|idx| {
                    let (j, k) = (idx % nx, idx / nx);
                    let mut acc = 0.0;
                    for l in 0..ny {
                        let wrow = &table.weights[(k + ny - 1 - l) * row..];
                        let rrow = &values[l * nx..(l + 1) * nx];
                        let base = j + nx - 1;
                        for (i, &rho) in rrow.iter().enumerate() {
                            acc += wrow[base - i] * rho;
                        }
                    }
                    vol * acc
                })
                .collect()
        }
    }
}

/// Zero-padded FFT evaluation, identical to [`convolve_direct`] up to rounding.
pub fn convolve_fft(table: &WeightTable, field: &Field) -> Result<Vec<f64>> {
    check_geometry(table, field)?;
    Ok(FftConvolver::new(table).apply(&field.values))
}

/// Kernel spectrum and transform plans for repeated FFT convolutions.
#[derive(Clone)]
struct FftConvolver {
    grid: Grid,
    // Padded lengths along x and y (ly = 1 in 1D).
    lx: usize,
    ly: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Option<Arc<dyn Fft<f64>>>,
    inv_y: Option<Arc<dyn Fft<f64>>>,
    // Kernel spectrum, in transposed (x-major) layout for 2D.
    spectrum: Vec<Complex<f64>>,
}

impl std::fmt::Debug for FftConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftConvolver")
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

fn transpose(src: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

impl FftConvolver {
    fn new(table: &WeightTable) -> Self {
        let mut planner = FftPlanner::new();
        let (nx, ny) = table.half_widths();
        let lx = (2 * nx - 1).next_power_of_two();
        let ly = if table.grid.dim() == 2 {
            (2 * ny - 1).next_power_of_two()
        } else {
            1
        };
        let fwd_x = planner.plan_fft_forward(lx);
        let inv_x = planner.plan_fft_inverse(lx);
        let (fwd_y, inv_y) = if ly > 1 {
            (Some(planner.plan_fft_forward(ly)), Some(planner.plan_fft_inverse(ly)))
        } else {
            (None, None)
        };
        let mut kernel = vec![Complex::new(0.0, 0.0); lx * ly];
        let wrap = |off: i64, len: usize| off.rem_euclid(len as i64) as usize;
        match table.grid {
            Grid::One(_) => {
                for n in -(nx as i64 - 1)..nx as i64 {
                    kernel[wrap(n, lx)].re = table.get(n);
                }
            }
            Grid::Two(_) => {
                for p in -(ny as i64 - 1)..ny as i64 {
                    for n in -(nx as i64 - 1)..nx as i64 {
                        kernel[wrap(p, ly) * lx + wrap(n, lx)].re = table.get2(n, p);
                    }
                }
            }
        }
        let mut conv = FftConvolver {
            grid: table.grid,
            lx,
            ly,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            spectrum: Vec::new(),
        };
        conv.spectrum = conv.forward(kernel);
        conv
    }

    fn forward(&self, mut buf: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        self.fwd_x.process(&mut buf);
        match &self.fwd_y {
            Some(fy) => {
                let mut t = transpose(&buf, self.ly, self.lx);
                fy.process(&mut t);
                t
            }
            None => buf,
        }
    }

    fn inverse(&self, buf: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        let mut buf = match &self.inv_y {
            Some(iy) => {
                let mut t = buf;
                iy.process(&mut t);
                transpose(&t, self.lx, self.ly)
            }
            None => buf,
        };
        self.inv_x.process(&mut buf);
        buf
    }

    fn apply(&self, values: &[f64]) -> Vec<f64> {
        let (nx, ny) = match self.grid {
            Grid::One(g) => (g.n_cells, 1),
            Grid::Two(g) => (g.nx(), g.ny()),
        };
        let mut buf = vec![Complex::new(0.0, 0.0); self.lx * self.ly];
        for k in 0..ny {
            for j in 0..nx {
                buf[k * self.lx + j].re = values[k * nx + j];
            }
        }
        let mut spec = self.forward(buf);
        for (s, k) in spec.iter_mut().zip(&self.spectrum) {
            *s *= k;
        }
        let out = self.inverse(spec);
        let scale = self.grid.cell_volume() / (self.lx * self.ly) as f64;
        let mut result = Vec::with_capacity(nx * ny);
        for k in 0..ny {
            for j in 0..nx {
                result.push(out[k * self.lx + j].re * scale);
            }
        }
        result
    }
}

/// A weight table bundled with its preferred evaluation path.
#[derive(Debug, Clone)]
pub struct Convolver {
    table: WeightTable,
    fft: Option<FftConvolver>,
}

impl Convolver {
    pub fn new(table: WeightTable, path: ConvolutionPath) -> Self {
        let use_fft = match path {
            ConvolutionPath::Fft => true,
            ConvolutionPath::Direct => false,
            ConvolutionPath::Auto => table.grid.len() >= FFT_CROSSOVER,
        };
        let fft = use_fft.then(|| FftConvolver::new(&table));
        Convolver { table, fft }
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn uses_fft(&self) -> bool {
        self.fft.is_some()
    }

    /// `cellvol * sum_i W_{j-i} values_i`; `values` must match the table's grid.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.table.grid.len());
        match &self.fft {
            Some(f) => f.apply(values),
            None => direct(&self.table, values),
        }
    }
}

/// `V(x_j)` at every cell center.
pub fn external_values(model: &ModelSpec, grid: &Grid) -> Result<Vec<f64>> {
    (0..grid.len())
        .map(|idx| model.external.value(grid.center(idx), grid.dim()))
        .collect()
}

/// Discrete variational derivative on precomputed pieces.
pub(crate) fn xi_from_parts(
    model: &ModelSpec,
    convolver: Option<&Convolver>,
    external: &[f64],
    rho: &[f64],
) -> Vec<f64> {
    let mut xi = match convolver {
        Some(c) => c.apply(rho),
        None => vec![0.0; rho.len()],
    };
    for ((x, &r), &v) in xi.iter_mut().zip(rho).zip(external) {
        *x += model.internal.derivative(r) + v;
    }
    xi
}

/// `xi_j = cellvol * sum_i W_{j-i} rho_i + H'(rho_j) + V(x_j)`.
pub fn assemble_xi(
    model: &ModelSpec,
    convolver: Option<&Convolver>,
    field: &Field,
) -> Result<Field> {
    if let Some(c) = convolver {
        check_geometry(c.table(), field)?;
    }
    let external = external_values(model, &field.grid)?;
    Field::new(
        field.grid,
        xi_from_parts(model, convolver, &external, &field.values),
    )
}
