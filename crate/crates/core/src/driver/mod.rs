//! Configuration, scenario presets, the time loop and study harnesses.

pub mod config;
pub mod output;
pub mod run;
pub mod scenarios;
pub mod study;

pub use config::{load_config, load_config_str, parse_assignment, GridSpec, ScenarioRequest, SimConfig, SnapshotFormat};
pub use output::{OutputSink, Summary, DIAGNOSTICS_HEADER};
pub use run::{run_simulation, run_simulation_with, RunReport, Simulation};
pub use scenarios::{closed_form_reference, ScenarioInfo, SCENARIOS};
pub use study::{run_convergence_ladder, run_convergence_study, run_mass_sweep, Reference, ConvergenceRow, ConvergenceTable, MassProbe, MassSweep, ReferenceMode};
