//! Uniform cell-centered grids, cell-average fields and initial-data projection.
//!
//! 2D fields are stored row-major with `y` as the outer index: the value of
//! cell `(j, k)` (x-index `j`, y-index `k`) lives at `k * nx + j`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        let grid = Grid1D {
            x_min,
            x_max,
            n_cells,
        };
        grid.validate("grid")?;
        Ok(grid)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_max <= self.x_min {
            return Err(Error::config(
                path,
                format!("need finite bounds with max > min, got [{}, {}]", self.x_min, self.x_max),
            ));
        }
        if self.n_cells < 2 {
            return Err(Error::config(
                path,
                format!("need at least 2 cells, got {}", self.n_cells),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    #[inline]
    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Left edge of cell `j`.
    #[inline]
    pub fn face(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Result<Self> {
        x.validate("grid.x")?;
        y.validate("grid.y")?;
        Ok(Grid2D { x, y })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.x.n_cells
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.y.n_cells
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        k * self.x.n_cells + j
    }
}

/// A uniform grid in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    One(Grid1D),
    Two(Grid2D),
}

impl Grid {
    /// Builds a grid from per-axis `(min, max)` bounds and cell counts.
    pub fn build(bounds: &[(f64, f64)], n_cells: &[usize]) -> Result<Grid> {
        match (bounds, n_cells) {
            ([(a, b)], [n]) => Ok(Grid::One(Grid1D::new(*a, *b, *n)?)),
            ([(ax, bx), (ay, by)], [nx, ny]) => {
                let x = Grid1D::new(*ax, *bx, *nx).map_err(|e| rename_path(e, "grid.x"))?;
                let y = Grid1D::new(*ay, *by, *ny).map_err(|e| rename_path(e, "grid.y"))?;
                Ok(Grid::Two(Grid2D { x, y }))
            }
            _ => Err(Error::config(
                "grid",
                format!(
                    "need 1 or 2 axes with matching cell counts, got {} bounds and {} counts",
                    bounds.len(),
                    n_cells.len()
                ),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Grid::One(g) => g.validate("grid"),
            Grid::Two(g) => {
                g.x.validate("grid.x")?;
                g.y.validate("grid.y")
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::One(_) => 1,
            Grid::Two(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::One(g) => g.n_cells,
            Grid::Two(g) => g.nx() * g.ny(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell width (1D) or area (2D).
    pub fn cell_volume(&self) -> f64 {
        match self {
            Grid::One(g) => g.dx(),
            Grid::Two(g) => g.x.dx() * g.y.dx(),
        }
    }

    /// Cell counts per axis.
    pub fn shape(&self) -> Vec<usize> {
        match self {
            Grid::One(g) => vec![g.n_cells],
            Grid::Two(g) => vec![g.nx(), g.ny()],
        }
    }

    pub fn spacings(&self) -> Vec<f64> {
        match self {
            Grid::One(g) => vec![g.dx()],
            Grid::Two(g) => vec![g.x.dx(), g.y.dx()],
        }
    }

    /// Center of the cell with flat index `idx`, padded with `0.0` for 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        match self {
            Grid::One(g) => [g.center(idx), 0.0],
            Grid::Two(g) => [g.x.center(idx % g.nx()), g.y.center(idx / g.nx())],
        }
    }

    /// Same grid with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Grid {
        match self {
            Grid::One(g) => Grid::One(Grid1D {
                n_cells: g.n_cells * factor,
                ..*g
            }),
            Grid::Two(g) => Grid::Two(Grid2D {
                x: Grid1D {
                    n_cells: g.x.n_cells * factor,
                    ..g.x
                },
                y: Grid1D {
                    n_cells: g.y.n_cells * factor,
                    ..g.y
                },
            }),
        }
    }
}

fn rename_path(err: Error, path: &str) -> Error {
    match err {
        Error::Config { message, .. } => Error::config(path, message),
        other => other,
    }
}

/// Cell averages on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "field has {} values but grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value {} in cell {i}", values[i])));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Restriction onto a grid coarser by `ratio` per axis, by exact averaging
    /// of the fine cells covering each coarse cell.
    pub fn coarsen(&self, ratio: usize) -> Result<Field> {
        if ratio == 0 {
            return Err(Error::Precondition("coarsening ratio must be positive".into()));
        }
        match self.grid {
            Grid::One(g) => {
                if g.n_cells % ratio != 0 {
                    return Err(Error::Precondition(format!(
                        "{} cells not divisible by ratio {ratio}",
                        g.n_cells
                    )));
                }
                let coarse = Grid1D {
                    n_cells: g.n_cells / ratio,
                    ..g
                };
                let values = self
                    .values
                    .chunks(ratio)
                    .map(|c| c.iter().sum::<f64>() / ratio as f64)
                    .collect();
                Ok(Field {
                    grid: Grid::One(coarse),
                    values,
                })
            }
            Grid::Two(g) => {
                if g.nx() % ratio != 0 || g.ny() % ratio != 0 {
                    return Err(Error::Precondition(format!(
                        "{}x{} cells not divisible by ratio {ratio}",
                        g.nx(),
                        g.ny()
                    )));
                }
                let (cx, cy) = (g.nx() / ratio, g.ny() / ratio);
                let mut values = vec![0.0; cx * cy];
                for k in 0..g.ny() {
                    for j in 0..g.nx() {
                        values[(k / ratio) * cx + j / ratio] += self.values[g.index(j, k)];
                    }
                }
                let norm = (ratio * ratio) as f64;
                values.iter_mut().for_each(|v| *v /= norm);
                let coarse = Grid2D {
                    x: Grid1D { n_cells: cx, ..g.x },
                    y: Grid1D { n_cells: cy, ..g.y },
                };
                Ok(Field {
                    grid: Grid::Two(coarse),
                    values,
                })
            }
        }
    }
}

/// Total mass: cell volume times the sum of cell averages.
pub fn total_mass(field: &Field) -> f64 {
    field.grid.cell_volume() * field.values.iter().sum::<f64>()
}

/// One Gaussian bump `mass / (2 pi variance)^(d/2) * exp(-|x - center|^2 / (2 variance))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub mass: f64,
    pub center: Vec<f64>,
    pub variance: f64,
}

/// Closed-form initial densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// Sum of Gaussian bumps.
    Gaussians {
        bumps: Vec<GaussianBump>,
    },
    /// `height` times the indicator of the box `[lower, upper]` (per axis).
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        height: f64,
    },
    /// Gaussian ring `exp(-(|x| - radius)^2 / (2 variance))`, scaled to `mass`
    /// after projection.
    Ring {
        radius: f64,
        variance: f64,
        mass: f64,
    },
    /// `offset + amplitude * cos(wavenumber * x)`, varying along x only.
    Cosine {
        offset: f64,
        amplitude: f64,
        wavenumber: f64,
    },
}

impl Profile {
    /// Pointwise value at `p` (for 1D only `p[0]` is read).
    pub fn value(&self, p: [f64; 2], dim: usize) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Gaussians { bumps } => bumps
                .iter()
                .map(|b| {
                    let r2: f64 = (0..dim)
                        .map(|a| {
                            let c = b.center.get(a).copied().unwrap_or(0.0);
                            (p[a] - c).powi(2)
                        })
                        .sum();
                    b.mass / (2.0 * std::f64::consts::PI * b.variance).powf(dim as f64 / 2.0)
                        * (-r2 / (2.0 * b.variance)).exp()
                })
                .sum(),
            Profile::Box {
                lower,
                upper,
                height,
            } => {
                let inside = (0..dim).all(|a| p[a] >= lower[a] && p[a] <= upper[a]);
                if inside {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Ring {
                radius, variance, ..
            } => {
                let r = (0..dim).map(|a| p[a] * p[a]).sum::<f64>().sqrt();
                (-(r - radius).powi(2) / (2.0 * variance)).exp()
            }
            Profile::Cosine {
                offset,
                amplitude,
                wavenumber,
            } => offset + amplitude * (wavenumber * p[0]).cos(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let path = "initial.profile";
        match self {
            Profile::Gaussians { bumps } => {
                for (i, b) in bumps.iter().enumerate() {
                    if b.center.len() != dim {
                        return Err(Error::config(
                            format!("{path}.bumps[{i}].center"),
                            format!("expected {dim} coordinates, got {}", b.center.len()),
                        ));
                    }
                    if !(b.variance > 0.0) {
                        return Err(Error::config(
                            format!("{path}.bumps[{i}].variance"),
                            "must be positive",
                        ));
                    }
                }
            }
            Profile::Box { lower, upper, .. } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(Error::config(
                        path,
                        format!("box bounds must have {dim} coordinates"),
                    ));
                }
            }
            Profile::Ring { variance, .. } if !(*variance > 0.0) => {
                return Err(Error::config(format!("{path}.variance"), "must be positive"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Result of projecting a closed-form density onto cell averages.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: Field,
    /// Number of quadrature samples that were negative and clamped to zero.
    pub clamped: usize,
}

// 3-point Gauss-Legendre on [-1, 1].
const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Overlap length of `[a, b]` with `[lo, hi]`.
fn overlap(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    (b.min(hi) - a.max(lo)).max(0.0)
}

/// Projects `profile` onto cell averages. Box indicators use exact overlap
/// fractions; everything else a 3-point Gauss rule per axis per cell.
pub fn project_initial_data(grid: &Grid, profile: &Profile) -> Result<Projection> {
    profile.validate(grid.dim())?;
    let mut clamped = 0;
    let values: Vec<f64> = match (grid, profile) {
        (
            _,
            Profile::Box {
                lower,
                upper,
                height,
            },
        ) => (0..grid.len())
            .map(|idx| {
                let frac = match grid {
                    Grid::One(g) => {
                        overlap(g.face(idx), g.face(idx + 1), lower[0], upper[0]) / g.dx()
                    }
                    Grid::Two(g) => {
                        let (j, k) = (idx % g.nx(), idx / g.nx());
                        overlap(g.x.face(j), g.x.face(j + 1), lower[0], upper[0]) / g.x.dx()
                            * overlap(g.y.face(k), g.y.face(k + 1), lower[1], upper[1])
                            / g.y.dx()
                    }
                };
                let v = height * frac;
                if v < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect(),
        (_, Profile::Constant { value }) => {
            if *value < 0.0 {
                clamped = grid.len();
                vec![0.0; grid.len()]
            } else {
                vec![*value; grid.len()]
            }
        }
        (Grid::One(g), _) => (0..g.n_cells)
            .map(|j| {
                let (c, h) = (g.center(j), 0.5 * g.dx());
                GAUSS3_NODES
                    .iter()
                    .zip(GAUSS3_WEIGHTS)
                    .map(|(&s, w)| {
                        let v = profile.value([c + h * s, 0.0], 1);
                        if v < 0.0 {
                            clamped += 1;
                        }
                        0.5 * w * v.max(0.0)
                    })
                    .sum()
            })
            .collect(),
        (Grid::Two(g), _) => (0..grid.len())
            .map(|idx| {
                let (j, k) = (idx % g.nx(), idx / g.nx());
                let (cx, cy) = (g.x.center(j), g.y.center(k));
                let (hx, hy) = (0.5 * g.x.dx(), 0.5 * g.y.dx());
                let mut acc = 0.0;
                for (&sy, wy) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                    for (&sx, wx) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                        let v = profile.value([cx + hx * sx, cy + hy * sy], 2);
                        if v < 0.0 {
                            clamped += 1;
                        }
                        acc += 0.25 * wx * wy * v.max(0.0);
                    }
                }
                acc
            })
            .collect(),
    };
    let mut field = Field::new(*grid, values)?;
    if let Profile::Ring { mass, .. } = profile {
        let current = total_mass(&field);
        if current > 0.0 {
            field.scale(mass / current);
        }
    }
    Ok(Projection { field, clamped })
}

/// Writes `x,rho` (1D) or `x,y,rho` (2D) rows with 17 significant digits.
pub fn write_snapshot_csv<W: Write>(field: &Field, mut out: W) -> std::io::Result<()> {
    match field.grid {
        Grid::One(g) => {
            writeln!(out, "x,rho")?;
            for (j, v) in field.values.iter().enumerate() {
                writeln!(out, "{:.16e},{:.16e}", g.center(j), v)?;
            }
        }
        Grid::Two(g) => {
            writeln!(out, "x,y,rho")?;
            for k in 0..g.ny() {
                for j in 0..g.nx() {
                    writeln!(
                        out,
                        "{:.16e},{:.16e},{:.16e}",
                        g.x.center(j),
                        g.y.center(k),
                        field.values[g.index(j, k)]
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Reads the density column of a snapshot CSV, checking the header matches the
/// grid dimension and the row count matches the grid.
pub fn read_snapshot_csv<R: BufRead>(grid: &Grid, input: R) -> Result<Field> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Precondition("empty snapshot".into()))??;
    let expected = if grid.dim() == 1 { "x,rho" } else { "x,y,rho" };
    if header.trim() != expected {
        return Err(Error::Precondition(format!(
            "snapshot header `{header}` does not match `{expected}`"
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or_default();
        let v: f64 = last.trim().parse().map_err(|_| {
            Error::Precondition(format!("row {}: cannot parse density `{last}`", row + 1))
        })?;
        values.push(v);
    }
    Field::new(*grid, values)
}

/// Magic bytes of the raw binary snapshot.
pub const BINARY_MAGIC: &[u8; 4] = b"GFFV";

/// Raw little-endian dump: 16-byte header (`GFFV`, u32 rank, u32 nx, u32 ny
/// with ny = 1 for rank 1) followed by the f64 values in storage order.
pub fn write_snapshot_binary<W: Write>(field: &Field, mut out: W) -> std::io::Result<()> {
    let shape = field.grid.shape();
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(shape.len() as u32).to_le_bytes())?;
    out.write_all(&(shape[0] as u32).to_le_bytes())?;
    out.write_all(&(shape.get(1).copied().unwrap_or(1) as u32).to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_examples() {
        let g = Grid1D::new(-6.0, 6.0, 600).unwrap();
        assert!((g.dx() - 0.02).abs() < 1e-15);

        let g = Grid1D::new(0.0, 1.0, 2).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.centers(), vec![0.25, 0.75]);

        let g = Grid::build(&[(-4.0, 4.0), (-4.0, 4.0)], &[80, 80]).unwrap();
        assert_eq!(g.spacings(), vec![0.1, 0.1]);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(Grid1D::new(1.0, 0.0, 10), Err(Error::Config { .. })));
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(0.0, 1.0, 0).is_err());
        let err = Grid::build(&[(0.0, 1.0), (0.0, 1.0)], &[4, 1]).unwrap_err();
        assert!(err.to_string().contains("grid.y"), "{err}");
    }

    #[test]
    fn box_projection_is_exact() {
        let g = Grid::build(&[(-4.0, 4.0)], &[8]).unwrap();
        let p = Profile::Box {
            lower: vec![-2.0],
            upper: vec![2.0],
            height: 1.0,
        };
        let f = project_initial_data(&g, &p).unwrap().field;
        assert_eq!(f.values, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(total_mass(&f), 4.0);

        // Partial overlaps.
        let p = Profile::Box {
            lower: vec![-1.5],
            upper: vec![0.25],
            height: 2.0,
        };
        let f = project_initial_data(&g, &p).unwrap().field;
        assert_eq!(f.values[2], 1.0);
        assert_eq!(f.values[4], 0.5);
    }

    #[test]
    fn constant_projection_and_mass() {
        for n in [2, 7, 64] {
            let g = Grid::build(&[(0.0, 1.0)], &[n]).unwrap();
            let f = project_initial_data(&g, &Profile::Constant { value: 1.0 })
                .unwrap()
                .field;
            assert!(f.values.iter().all(|&v| v == 1.0));
            assert!((total_mass(&f) - 1.0).abs() < 1e-14);
        }
        let g = Grid::build(&[(0.0, 2.0), (0.0, 1.0)], &[5, 3]).unwrap();
        let f = project_initial_data(&g, &Profile::Gaussians { bumps: vec![] })
            .unwrap()
            .field;
        assert_eq!(total_mass(&f), 0.0);
    }

    #[test]
    fn negative_samples_are_clamped_and_counted() {
        let g = Grid::build(&[(-1.0, 1.0)], &[20]).unwrap();
        let p = Profile::Cosine {
            offset: 0.0,
            amplitude: 1.0,
            wavenumber: std::f64::consts::PI,
        };
        let proj = project_initial_data(&g, &p).unwrap();
        assert!(proj.clamped > 0);
        assert!(proj.field.is_nonnegative());
    }

    #[test]
    fn coarsen_averages_blocks() {
        let g = Grid::build(&[(0.0, 1.0)], &[4]).unwrap();
        let f = Field::new(g, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let c = f.coarsen(2).unwrap();
        assert_eq!(c.values, vec![2.0, 6.0]);
        assert_eq!(total_mass(&c), total_mass(&f));
        assert!(f.coarsen(3).is_err());

        let g = Grid::build(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.coarsen(2).unwrap().values, vec![2.5]);
    }

    #[test]
    fn csv_roundtrip_and_layout() {
        let g = Grid::build(&[(0.0, 2.0), (0.0, 1.0)], &[2, 2]).unwrap();
        let f = Field::new(g, vec![0.1, 0.2, 0.3, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        write_snapshot_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,rho");
        // Second row: x advances first.
        assert!(lines[2].starts_with("1.5000000000000000e0,2.5000000000000000e-1"));
        let back = read_snapshot_csv(&g, buf.as_slice()).unwrap();
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn binary_header_layout() {
        let g = Grid::build(&[(0.0, 1.0)], &[3]).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_snapshot_binary(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GFFV");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 1);
        assert_eq!(buf.len(), 16 + 3 * 8);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 2.0);
    }
}
