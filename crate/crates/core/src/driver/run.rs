use std::path::PathBuf;

use crate::diagnostics::{discrete_dissipation, entropy_parts_with, DiagnosticsRecord, EntropyParts};
use crate::error::{Error, Result};
use crate::flux::{Evaluation, Scheme};
use crate::mesh::{project_initial_data, total_mass, Field, Grid};
use crate::nonlocal::build_weight_table;
use crate::timestep::{admissible_dt, advance, classify_state, RunStatus, StepOutcome};

use super::config::SimConfig;
use super::output::{OutputSink, Summary};

/// A configured run advanced one accepted step at a time.
pub struct Simulation {
    config: SimConfig,
    scheme: Scheme,
    rho: Vec<f64>,
    eval: Evaluation,
    t: f64,
    last_dt: f64,
    n_steps: u64,
    status: RunStatus,
    mass_initial: f64,
    rejections: u64,
    clamped: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let grid = config.validate()?;
        let mut field = project_initial_data(&grid, &config.initial)?.field;
        if let Some(m) = config.normalize_mass {
            let m0 = total_mass(&field);
            if !(m0 > 0.0) {
                return Err(Error::config("initial", "projected initial data has zero mass"));
            }
            field.scale(m / m0);
        }
        Self::with_field(config, field)
    }

    /// Starts from given cell averages instead of the configured profile.
    pub fn with_field(config: SimConfig, field: Field) -> Result<Self> {
        let grid = config.validate()?;
        if field.grid != grid {
            return Err(Error::Precondition("field grid differs from the configured grid".into()));
        }
        if !field.is_nonnegative() {
            return Err(Error::Precondition("initial data has negative cell averages".into()));
        }
        let table = match &config.model.kernel {
            Some(k) => Some(build_weight_table(k, &grid, config.rule)?),
            None => None,
        };
        let scheme = Scheme::new(
            config.model.clone(),
            grid,
            table,
            config.convolution,
            config.limiter,
        )?;
        let eval = scheme.evaluate(&field.values);
        check_finite(&eval)?;
        Ok(Simulation {
            mass_initial: total_mass(&field),
            rho: field.values,
            eval,
            scheme,
            config,
            t: 0.0,
            last_dt: 0.0,
            n_steps: 0,
            status: RunStatus::Running,
            rejections: 0,
            clamped: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn grid(&self) -> Grid {
        self.scheme.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn field(&self) -> Field {
        Field {
            grid: self.scheme.grid,
            values: self.rho.clone(),
        }
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn status(&self) -> RunStatus {
        self.status
    }

    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    pub fn mass_initial(&self) -> f64 {
        self.mass_initial
    }

    pub fn mass(&self) -> f64 {
        self.scheme.grid.cell_volume() * self.rho.iter().sum::<f64>()
    }

    /// Total step rejections so far.
    pub fn rejections(&self) -> u64 {
        self.rejections
    }

    /// Rounding-level negatives reset to zero so far.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn entropy_parts(&self) -> EntropyParts {
        entropy_parts_with(&self.scheme, &self.rho, &self.eval.interaction)
    }

    pub fn record(&self) -> DiagnosticsRecord {
        let (lo, hi) = self
            .rho
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
        DiagnosticsRecord {
            t: self.t,
            dt: self.last_dt,
            mass: self.mass(),
            entropy: self.entropy_parts().total(),
            dissipation: discrete_dissipation(
                &self.eval.states,
                &self.eval.velocities,
                self.config.dissipation,
            ),
            rho_min: lo,
            rho_max: hi,
            status: self.status,
        }
    }

    /// Takes one accepted step that does not pass `t_stop` (clipped to `t_end`).
    pub fn step(&mut self, t_stop: f64) -> Result<RunStatus> {
        if self.status.is_terminal() {
            return Ok(self.status);
        }
        let control = &self.config.control;
        let t_stop = t_stop.min(self.config.t_end);
        let remaining = t_stop - self.t;
        if !(remaining > 0.0) {
            return Err(Error::Precondition(format!(
                "stop time {t_stop} is not ahead of t = {}",
                self.t
            )));
        }
        let bound = admissible_dt(&self.scheme, &self.rho, &self.eval, control);
        let dt = control.dt_fixed.unwrap_or(bound).min(remaining);
        match advance(
            &self.scheme,
            self.config.integrator,
            &self.rho,
            &self.eval,
            dt,
            control,
        ) {
            StepOutcome::Accepted(r) => {
                self.t = if r.dt == remaining { t_stop } else { self.t + r.dt };
                self.last_dt = r.dt;
                self.rejections += u64::from(r.rejections);
                self.clamped += r.clamped as u64;
                self.rho = r.values;
                self.eval = self.scheme.evaluate(&self.rho);
                check_finite(&self.eval)?;
                self.n_steps += 1;
                let field = self.field();
                self.status = classify_state(
                    &field,
                    self.eval.rhs_l1(),
                    r.dt,
                    self.t,
                    self.config.t_end,
                    control,
                );
            }
            StepOutcome::Underflow { .. } => {
                self.status = RunStatus::BlowUp(self.t);
            }
        }
        Ok(self.status)
    }

    /// Steps until a terminal status.
    pub fn run_to_end(&mut self) -> Result<RunStatus> {
        while !self.status.is_terminal() {
            self.step(self.config.t_end)?;
        }
        Ok(self.status)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            status: self.status.label().to_string(),
            t_final: self.t,
            mass_initial: self.mass_initial,
            mass_final: self.mass(),
            entropy_final: self.entropy_parts().total(),
            n_steps: self.n_steps,
        }
    }
}

fn check_finite(eval: &Evaluation) -> Result<()> {
    if eval.rhs.iter().chain(&eval.xi).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("non-finite value in the right-hand side".into()))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: RunStatus,
    pub field: Field,
    pub summary: Summary,
    pub diagnostics_path: Option<PathBuf>,
}

/// Runs to a terminal status, writing outputs when `output_dir` is set.
pub fn run_simulation(config: SimConfig) -> Result<RunReport> {
    run_simulation_with(config, |_, _| Ok(()))
}

/// As [`run_simulation`], calling `observer` on the initial state and after every accepted step.
pub fn run_simulation_with<F>(config: SimConfig, mut observer: F) -> Result<RunReport>
where
    F: FnMut(&Simulation, &DiagnosticsRecord) -> Result<()>,
{
    let mut sim = Simulation::new(config)?;
    let mut sink = match &sim.config.output_dir {
        Some(dir) => Some(OutputSink::create(dir, &sim.config)?),
        None => None,
    };
    if let (Some(s), true) = (&sink, sim.config.dump_weights) {
        if let Some(conv) = sim.scheme.convolver() {
            let mut buf = Vec::new();
            conv.table().write_csv(&mut buf)?;
            s.write_text("weights.csv", &buf)?;
        }
    }
    let interval = sim.config.snapshot_interval;
    let mut next_snap = 0usize;
    let rec = sim.record();
    observer(&sim, &rec)?;
    if let Some(s) = sink.as_mut() {
        s.record(&rec)?;
        if interval.is_some() {
            s.snapshot(&sim.field())?;
            next_snap = 1;
        }
    }
    while !sim.status.is_terminal() {
        let stop = match interval {
            Some(h) => (next_snap as f64 * h).min(sim.config.t_end),
            None => sim.config.t_end,
        };
        sim.step(stop)?;
        let rec = sim.record();
        observer(&sim, &rec)?;
        if let Some(s) = sink.as_mut() {
            s.record(&rec)?;
            if interval.is_some() && sim.t >= stop && !sim.status.is_terminal() {
                s.snapshot(&sim.field())?;
            }
        }
        if interval.is_some() && sim.t >= stop {
            next_snap += 1;
        }
    }
    let summary = sim.summary();
    let field = sim.field();
    let diagnostics_path = match sink {
        Some(s) => {
            let p = s.dir().join("diagnostics.csv");
            s.finish(&field, &summary)?;
            Some(p)
        }
        None => None,
    };
    Ok(RunReport {
        status: sim.status,
        field,
        summary,
        diagnostics_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::config::ScenarioRequest;

    #[test]
    fn doublewell_runs_and_conserves_mass() {
        let cfg = ScenarioRequest::new("doublewell_1d")
            .with("n", 50)
            .with("t_end", 0.5)
            .resolve()
            .unwrap();
        let mut entropies = Vec::new();
        let report = run_simulation_with(cfg, |_, r| {
            entropies.push(r.entropy);
            Ok(())
        })
        .unwrap();
        assert!(report.status.is_terminal());
        let s = &report.summary;
        assert!((s.mass_final - s.mass_initial).abs() <= 1e-12 * s.mass_initial);
        for w in entropies.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * w[0].abs());
        }
    }

    #[test]
    fn outputs_are_written_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let run = |sub: &str| {
            let cfg = ScenarioRequest::new("doublewell_1d")
                .with("n", 40)
                .with("t_end", 0.2)
                .with("snapshot_interval", 0.1)
                .with("output_dir", dir.path().join(sub).to_str().unwrap())
                .resolve()
                .unwrap();
            run_simulation(cfg).unwrap()
        };
        let a = run("a");
        let b = run("b");
        assert_eq!(a.field, b.field);
        for name in ["diagnostics.csv", "summary.json", "final.csv", "config.resolved.json"] {
            let x = std::fs::read(dir.path().join("a").join(name)).unwrap();
            let y = std::fs::read(dir.path().join("b").join(name)).unwrap();
            if name != "config.resolved.json" {
                assert_eq!(x, y, "{name}");
            }
        }
        assert!(dir.path().join("a/snapshot_00000.csv").exists());
        assert!(dir.path().join("a/snapshot_00001.csv").exists());
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("a/summary.json")).unwrap())
                .unwrap();
        for key in ["status", "t_final", "mass_initial", "mass_final", "entropy_final", "n_steps"] {
            assert!(summary.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn stops_exactly_at_t_end() {
        let cfg = ScenarioRequest::new("doublewell_1d")
            .with("n", 40)
            .with("t_end", 0.05)
            .with("steady_tol", 1e-30)
            .resolve()
            .unwrap();
        let r = run_simulation(cfg).unwrap();
        assert_eq!(r.status, RunStatus::Finished(0.05));
    }
}
