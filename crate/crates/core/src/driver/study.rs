use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::diagnostics::{error_norms_closed_form, error_norms_restricted, observed_order};
use crate::error::{Error, Result};
use crate::timestep::RunStatus;

use super::config::{ScenarioRequest, SimConfig};
use super::run::{run_simulation, RunReport};
use super::scenarios::closed_form_reference;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    ClosedForm,
    FinestGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub l1: f64,
    pub linf: f64,
    pub status: RunStatus,
    /// False when the run hit `t_end` without reaching a steady state.
    pub steady: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub orders_l1: Vec<f64>,
    pub orders_linf: Vec<f64>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cells,dx,l1,linf,order_l1,order_linf,status\n");
        for (i, r) in self.rows.iter().enumerate() {
            let o = |v: &[f64]| match i.checked_sub(1).and_then(|k| v.get(k)) {
                Some(x) => format!("{x:.6}"),
                None => String::new(),
            };
            s += &format!(
                "{},{:.6e},{:.6e},{:.6e},{},{},{}\n",
                r.cells,
                r.dx,
                r.l1,
                r.linf,
                o(&self.orders_l1),
                o(&self.orders_linf),
                r.status.label()
            );
        }
        s
    }
}

fn base_cells(request: &ScenarioRequest) -> Result<usize> {
    let cfg = request.resolve()?;
    Ok(cfg.grid.cells[0])
}

/// Closed-form density used as a convergence reference.
pub type Reference<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);

/// Runs `levels` refinements `n, 2n, 4n, ...` and reports error norms and
/// observed orders. `FinestGrid` runs one extra level as the reference.
pub fn run_convergence_study(
    request: &ScenarioRequest,
    levels: usize,
    reference: ReferenceMode,
) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::config("levels", "need at least 3 levels"));
    }
    let n0 = base_cells(request)?;
    let exact = match reference {
        ReferenceMode::ClosedForm => Some(
            closed_form_reference(&request.name, &request.overrides)?.ok_or_else(|| {
                Error::config(
                    "reference",
                    format!("scenario `{}` has no closed-form steady state", request.name),
                )
            })?,
        ),
        ReferenceMode::FinestGrid => None,
    };
    let make = |n: usize| request.clone().with("n", n).resolve();
    match &exact {
        Some(f) => run_convergence_ladder(make, n0, levels, Some(f.as_ref())),
        None => run_convergence_ladder(make, n0, levels, None),
    }
}

/// Ladder over any configuration family; `make(n)` builds the run with `n` cells per axis.
/// Without a closed-form reference the finest of `levels + 1` runs is the reference.
pub fn run_convergence_ladder<M>(
    make: M,
    n0: usize,
    levels: usize,
    exact: Option<Reference<'_>>,
) -> Result<ConvergenceTable>
where
    M: Fn(usize) -> Result<SimConfig> + Sync,
{
    if levels < 3 {
        return Err(Error::config("levels", "need at least 3 levels"));
    }
    let runs = levels + usize::from(exact.is_none());
    let cells: Vec<usize> = (0..runs).map(|k| n0 << k).collect();
    let reports: Vec<RunReport> = cells
        .par_iter()
        .map(|&n| {
            let mut cfg = make(n)?;
            cfg.output_dir = None;
            run_simulation(cfg)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(levels);
    for (report, &n) in reports.iter().zip(&cells).take(levels) {
        let (l1, linf) = match exact {
            Some(f) => error_norms_closed_form(&report.field, f),
            None => error_norms_restricted(&report.field, &reports[runs - 1].field)?,
        };
        rows.push(ConvergenceRow {
            cells: n,
            dx: report.field.grid.spacings()[0],
            l1,
            linf,
            status: report.status,
            steady: matches!(report.status, RunStatus::Steady(_)),
        });
    }
    let l1: Vec<f64> = rows.iter().map(|r| r.l1).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r.linf).collect();
    Ok(ConvergenceTable {
        orders_l1: observed_order(&l1)?,
        orders_linf: observed_order(&linf)?,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassProbe {
    pub mass: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSweep {
    /// Largest probed mass that did not blow up.
    pub lo: f64,
    /// Smallest probed mass that blew up.
    pub hi: f64,
    pub probes: Vec<MassProbe>,
}

fn probe(request: &ScenarioRequest, mass: f64) -> Result<MassProbe> {
    let mut cfg = request.clone().with("mass", Value::from(mass)).resolve()?;
    cfg.output_dir = None;
    let report = run_simulation(cfg)?;
    Ok(MassProbe {
        mass,
        status: report.status,
    })
}

fn blows_up(p: &MassProbe) -> bool {
    matches!(p.status, RunStatus::BlowUp(_))
}

/// Bisects the total mass between a non-blow-up `lo` and a blow-up `hi`.
pub fn run_mass_sweep(
    request: &ScenarioRequest,
    lo: f64,
    hi: f64,
    iterations: usize,
) -> Result<MassSweep> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::config("bracket", "need 0 < lo < hi"));
    }
    let ends: Vec<MassProbe> = [lo, hi]
        .par_iter()
        .map(|&m| probe(request, m))
        .collect::<Result<_>>()?;
    if blows_up(&ends[0]) == blows_up(&ends[1]) {
        return Err(Error::config(
            "bracket",
            format!(
                "both endpoints end as `{}`; the bracket does not straddle the threshold",
                ends[0].status.label()
            ),
        ));
    }
    if blows_up(&ends[0]) {
        return Err(Error::config("bracket", "the lower mass blows up but the upper does not"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut probes = ends;
    for _ in 0..iterations {
        let mid = 0.5 * (a + b);
        let p = probe(request, mid)?;
        if blows_up(&p) {
            b = mid;
        } else {
            a = mid;
        }
        probes.push(p);
    }
    Ok(MassSweep { lo: a, hi: b, probes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_bracket_is_rejected() {
        let r = ScenarioRequest::new("gks_aggregation_1d");
        assert!(run_mass_sweep(&r, 0.047, 0.047, 2).is_err());
    }

    #[test]
    fn too_few_levels() {
        let r = ScenarioRequest::new("quadlog_1d");
        assert!(run_convergence_study(&r, 2, ReferenceMode::ClosedForm).is_err());
    }

    #[test]
    fn closed_form_needs_a_formula() {
        let r = ScenarioRequest::new("doublewell_1d").with("n", 8).with("t_end", 0.01);
        assert!(run_convergence_study(&r, 3, ReferenceMode::ClosedForm).is_err());
    }

    #[test]
    fn smooth_porous_medium_self_convergence_is_second_order_in_l1() {
        use crate::driver::config::GridSpec;
        use crate::mesh::Profile;
        use crate::model::{ExternalPotentialSpec, InternalEnergySpec, ModelSpec};
        let make = |n: usize| {
            let cfg = SimConfig {
                grid: GridSpec::uniform(1, 1.0, n),
                model: ModelSpec {
                    internal: InternalEnergySpec::power_law(0.5, 2.0),
                    external: ExternalPotentialSpec::None,
                    kernel: None,
                },
                rule: crate::nonlocal::QuadratureRule::Midpoint,
                convolution: Default::default(),
                limiter: Default::default(),
                integrator: Default::default(),
                control: Default::default(),
                t_end: 0.1,
                snapshot_interval: None,
                snapshot_format: Default::default(),
                output_dir: None,
                initial: Profile::Cosine {
                    offset: 1.0,
                    amplitude: 0.5,
                    wavenumber: std::f64::consts::PI,
                },
                normalize_mass: None,
                dissipation: Default::default(),
                dump_weights: false,
            };
            cfg.validate()?;
            Ok(cfg)
        };
        let t = run_convergence_ladder(make, 20, 3, None).unwrap();
        for o in &t.orders_l1 {
            assert!(*o > 1.7, "{t:?}");
        }
        // Limiter clipping at the extrema.
        for o in &t.orders_linf {
            assert!(*o > 0.6, "{t:?}");
        }
    }
}
