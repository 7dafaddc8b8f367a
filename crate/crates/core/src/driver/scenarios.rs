//! Named presets. Each takes flat overrides (`m`, `nu`, `mass`, `n`, ...).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mesh::{GaussianBump, Profile};
use crate::model::{
    ExternalPotentialSpec, InternalEnergySpec, KernelSpec, ModelSpec, WeightedTerm,
};
use crate::nonlocal::QuadratureRule;

use super::config::{GridSpec, SimConfig};

pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "quadlog_1d",
        summary: "W = x^2/2 - log|x|; converges to the semicircle (M/pi) sqrt(2 - x^2)",
    },
    ScenarioInfo {
        name: "aggdiff_gauss_1d",
        summary: "porous-medium diffusion against a Gaussian attraction kernel",
    },
    ScenarioInfo {
        name: "tent_merge_1d",
        summary: "porous-medium diffusion with the tent kernel from box initial data",
    },
    ScenarioInfo {
        name: "doublewell_1d",
        summary: "quadratic diffusion in the double-well potential x^4/4 - x^2/2",
    },
    ScenarioInfo {
        name: "gks_balanced_1d",
        summary: "Keller-Segel type, m + alpha = 1: critical-mass dichotomy",
    },
    ScenarioInfo {
        name: "gks_selfsim_1d",
        summary: "balanced Keller-Segel type in similarity variables (V = x^2/2)",
    },
    ScenarioInfo {
        name: "gks_diffusion_1d",
        summary: "Keller-Segel type, m = 1.6, alpha = -0.5, mass 0.057",
    },
    ScenarioInfo {
        name: "gks_aggregation_1d",
        summary: "Keller-Segel type, m = 1.6, alpha = -0.5, small-mass probe",
    },
    ScenarioInfo {
        name: "quadnewton_1d",
        summary: "W = x^2/2 - |x| with eps rho^2/2 regularization; flat steady state M/2",
    },
    ScenarioInfo {
        name: "aggdiff_2d",
        summary: "2D porous-medium diffusion against a Gaussian attraction kernel",
    },
    ScenarioInfo {
        name: "quadlog_2d",
        summary: "2D W = |x|^2/2 - log|x| with quadratic regularization; disk of density M/pi",
    },
    ScenarioInfo {
        name: "mill_2d",
        summary: "rotating-mill annulus: interaction plus -(alpha/beta) log|x| confinement",
    },
];

/// Overrides with usage tracking, so unknown keys can be reported.
struct Params<'a> {
    scenario: &'a str,
    map: &'a BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.used.borrow_mut().insert(key.to_string());
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| {
                Error::config(key, format!("invalid value {v} for `{}`: {e}", self.scenario))
            }),
        }
    }

    fn or<T: DeserializeOwned>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        if let Some(k) = self.map.keys().find(|k| !used.contains(*k)) {
            return Err(Error::config(
                k.as_str(),
                format!("unknown parameter for scenario `{}`", self.scenario),
            ));
        }
        Ok(())
    }
}

fn bump(mass: f64, center: Vec<f64>, variance: f64) -> GaussianBump {
    GaussianBump {
        mass,
        center,
        variance,
    }
}

fn two_bumps(mass: f64, offset: f64, variance: f64) -> Profile {
    Profile::Gaussians {
        bumps: vec![
            bump(0.5 * mass, vec![-offset], variance),
            bump(0.5 * mass, vec![offset], variance),
        ],
    }
}

fn gaussian(mass: f64, center: Vec<f64>, variance: f64) -> Profile {
    Profile::Gaussians {
        bumps: vec![bump(mass, center, variance)],
    }
}

fn power_law_kernel(alpha: f64) -> KernelSpec {
    KernelSpec::PowerLaw { a: alpha }
}

/// `|x|^2/2 - log|x| / (2 pi)`.
fn quad_newton_2d() -> KernelSpec {
    KernelSpec::WeightedSum {
        terms: vec![
            WeightedTerm {
                coefficient: 1.0,
                kernel: KernelSpec::PowerLaw { a: 2.0 },
            },
            WeightedTerm {
                coefficient: -1.0 / (2.0 * PI),
                kernel: KernelSpec::PowerLaw { a: 0.0 },
            },
        ],
    }
}

struct Base {
    dim: usize,
    half_width: f64,
    cells: usize,
    t_end: f64,
    rule: QuadratureRule,
}

fn assemble(
    p: &Params,
    base: Base,
    model: ModelSpec,
    initial: Profile,
    mass: Option<f64>,
) -> Result<SimConfig> {
    let half_width = p.or("half_width", base.half_width)?;
    let cells = p.or("n", base.cells)?;
    let mut cfg = SimConfig {
        grid: GridSpec::uniform(base.dim, half_width, cells),
        model,
        rule: p.or("rule", base.rule)?,
        convolution: p.or("convolution", Default::default())?,
        limiter: Default::default(),
        integrator: p.or("integrator", Default::default())?,
        control: Default::default(),
        t_end: p.or("t_end", base.t_end)?,
        snapshot_interval: p.get("snapshot_interval")?,
        snapshot_format: p.or("snapshot_format", Default::default())?,
        output_dir: p.get("output_dir")?,
        initial,
        normalize_mass: mass,
        dissipation: p.or("dissipation", Default::default())?,
        dump_weights: p.or("dump_weights", false)?,
    };
    if let Some(order) = p.get("order")? {
        cfg.limiter.order = order;
    }
    if let Some(theta) = p.get("theta")? {
        cfg.limiter.theta = theta;
    }
    let c = &mut cfg.control;
    c.cfl_safety = p.or("cfl", c.cfl_safety)?;
    c.dt_max = p.or("dt_max", c.dt_max)?;
    c.dt_floor = p.or("dt_floor", c.dt_floor)?;
    c.steady_tol = p.or("steady_tol", c.steady_tol)?;
    c.rho_blowup = p.or("rho_blowup", c.rho_blowup)?;
    c.collapse_fraction = p.or("collapse_fraction", c.collapse_fraction)?;
    c.parabolic_cap = p.or("parabolic_cap", c.parabolic_cap)?;
    c.dt_fixed = p.or("dt_fixed", c.dt_fixed)?;
    Ok(cfg)
}

/// `eps` if given, else `eps_factor * sum_a dx_a^2`.
fn epsilon(p: &Params, default_factor: f64, dim: usize, half_width: f64, cells: usize) -> Result<f64> {
    if let Some(eps) = p.get::<f64>("eps")? {
        return Ok(eps);
    }
    let factor = p.or("eps_factor", default_factor)?;
    let dx = 2.0 * half_width / cells as f64;
    Ok(factor * dim as f64 * dx * dx)
}

/// Builds a preset from its name and overrides.
pub fn build(name: &str, overrides: &BTreeMap<String, Value>) -> Result<SimConfig> {
    let p = Params {
        scenario: name,
        map: overrides,
        used: RefCell::new(BTreeSet::new()),
    };
    let cfg = match name {
        "quadlog_1d" => {
            let mass = p.or("mass", 1.0)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::none(),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::quadratic_log()),
            };
            // 7 sqrt(2) / 5 keeps the support edges +-sqrt(2) on cell faces
            // for every n divisible by 14.
            let base = Base {
                dim: 1,
                half_width: 1.4 * std::f64::consts::SQRT_2,
                cells: 56,
                t_end: 60.0,
                rule: QuadratureRule::ExactIntegral,
            };
            assemble(&p, base, model, gaussian(mass, vec![0.0], 1.0), Some(mass))?
        }
        "aggdiff_gauss_1d" => {
            let mass = p.or("mass", 1.0)?;
            let m = p.or("m", 3.0)?;
            let nu = p.or("nu", 1.48)?;
            let sigma = p.or("sigma", 1.0)?;
            let init: String = p.or("init", "two_bumps".to_string())?;
            let initial = match init.as_str() {
                "two_bumps" => two_bumps(mass, 3.0, 1.0),
                "gaussian" => gaussian(mass, vec![0.0], p.or("variance", 1.0)?),
                other => return Err(Error::config("init", format!("unknown initial data `{other}`"))),
            };
            let model = ModelSpec {
                internal: InternalEnergySpec::power_law(nu, m),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::Gaussian {
                    amplitude: -1.0,
                    sigma,
                }),
            };
            let base = Base {
                dim: 1,
                half_width: 6.0,
                cells: 600,
                t_end: 400.0,
                rule: QuadratureRule::Midpoint,
            };
            assemble(&p, base, model, initial, Some(mass))?
        }
        "tent_merge_1d" => {
            let m = p.or("m", 2.0)?;
            let nu = p.or("nu", 0.1)?;
            let half_box: f64 = p.or("box", 3.0)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::power_law(nu, m),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::Tent),
            };
            let initial = Profile::Box {
                lower: vec![-half_box],
                upper: vec![half_box],
                height: 1.0,
            };
            let base = Base {
                dim: 1,
                half_width: 5.0,
                cells: 200,
                t_end: 400.0,
                rule: QuadratureRule::Midpoint,
            };
            assemble(&p, base, model, initial, None)?
        }
        "doublewell_1d" => {
            let mass = p.or("mass", 0.1)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::power_law(p.or("nu", 1.0)?, p.or("m", 2.0)?),
                external: ExternalPotentialSpec::DoubleWell,
                kernel: None,
            };
            let initial = gaussian(mass, vec![p.or("xc", 0.0)?], p.or("variance", 0.2)?);
            let base = Base {
                dim: 1,
                half_width: 2.0,
                cells: 200,
                t_end: 20.0,
                rule: QuadratureRule::Midpoint,
            };
            assemble(&p, base, model, initial, None)?
        }
        "gks_balanced_1d" | "gks_selfsim_1d" | "gks_diffusion_1d" | "gks_aggregation_1d" => {
            let (m0, mass0, init0, ext, half_width, t_end) = match name {
                // Near the threshold, blow-up takes thousands of time units.
                "gks_balanced_1d" => (1.5, 0.057, "two_bumps", false, 6.0, 5000.0),
                "gks_selfsim_1d" => (1.5, 0.5 * 0.055, "gaussian", true, 3.0, 20.0),
                "gks_diffusion_1d" => (1.6, 0.057, "two_bumps", false, 6.0, 1000.0),
                _ => (1.6, 0.047, "two_bumps", false, 6.0, 1500.0),
            };
            let m = p.or("m", m0)?;
            let alpha = p.or("alpha", -0.5)?;
            let nu = p.or("nu", 1.0)?;
            let mass = p.or("mass", mass0)?;
            let init: String = p.or("init", init0.to_string())?;
            let initial = match init.as_str() {
                // M (e^{-4(x+2)^2} + e^{-4(x-2)^2}) / sqrt(pi)
                "two_bumps" => two_bumps(mass, 2.0, 0.125),
                // M e^{-x^2} / sqrt(pi)
                "gaussian" => gaussian(mass, vec![0.0], 0.5),
                other => return Err(Error::config("init", format!("unknown initial data `{other}`"))),
            };
            let model = ModelSpec {
                internal: InternalEnergySpec::power_law(nu, m),
                external: if p.or("confine", ext)? {
                    ExternalPotentialSpec::QuadraticHalf
                } else {
                    ExternalPotentialSpec::None
                },
                kernel: Some(power_law_kernel(alpha)),
            };
            let base = Base {
                dim: 1,
                half_width,
                cells: (2.0 * half_width / 0.05).round() as usize,
                t_end,
                rule: QuadratureRule::ExactIntegral,
            };
            assemble(&p, base, model, initial, Some(mass))?
        }
        "quadnewton_1d" => {
            let mass = p.or("mass", 1.0)?;
            let half_width = p.or("half_width", 2.0)?;
            // 78 cells put the support edges +-1 mid-cell.
            let cells = p.or("n", 78)?;
            let eps = epsilon(&p, 0.25, 1, half_width, cells)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::none().with_epsilon(eps),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::quadratic_newton_1d()),
            };
            let base = Base {
                dim: 1,
                half_width,
                cells,
                t_end: 40.0,
                rule: QuadratureRule::ExactIntegral,
            };
            assemble(&p, base, model, gaussian(mass, vec![0.0], 0.25), Some(mass))?
        }
        "aggdiff_2d" => {
            let model = ModelSpec {
                internal: InternalEnergySpec::power_law(p.or("nu", 0.1)?, p.or("m", 3.0)?),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::Gaussian {
                    amplitude: -1.0,
                    sigma: 0.5,
                }),
            };
            let b: f64 = p.or("box", 3.0)?;
            let initial = Profile::Box {
                lower: vec![-b, -b],
                upper: vec![b, b],
                height: p.or("height", 0.25)?,
            };
            let base = Base {
                dim: 2,
                half_width: 4.0,
                cells: 80,
                t_end: 20.0,
                rule: QuadratureRule::Midpoint,
            };
            assemble(&p, base, model, initial, None)?
        }
        "quadlog_2d" => {
            let mass = p.or("mass", 1.0)?;
            let half_width = p.or("half_width", 1.5)?;
            let cells = p.or("n", 64)?;
            let eps = epsilon(&p, 0.4, 2, half_width, cells)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::none().with_epsilon(eps),
                external: ExternalPotentialSpec::None,
                kernel: Some(KernelSpec::quadratic_log()),
            };
            let base = Base {
                dim: 2,
                half_width,
                cells,
                t_end: 100.0,
                rule: QuadratureRule::GaussTensor4,
            };
            let initial = gaussian(mass, vec![0.0, 0.0], 0.25);
            assemble(&p, base, model, initial, Some(mass))?
        }
        "mill_2d" => {
            let mass = p.or("mass", 1.0)?;
            let half_width = p.or("half_width", 0.8)?;
            let cells = p.or("n", 32)?;
            let eps = epsilon(&p, 0.2, 2, half_width, cells)?;
            let kernel_name: String = p.or("kernel", "quad_newton".to_string())?;
            let (kernel, alpha0, beta0) = match kernel_name.as_str() {
                "quad_newton" => (quad_newton_2d(), 0.25, 2.0 * PI),
                "quad_log" => (KernelSpec::quadratic_log(), 0.25, 2.0 * PI),
                "quasi_morse" => (
                    KernelSpec::QuasiMorse {
                        lambda: 100.0,
                        c: 10.0 / 9.0,
                        length: 0.75,
                        k: 0.5,
                    },
                    1.0,
                    40.0,
                ),
                other => return Err(Error::config("kernel", format!("unknown kernel `{other}`"))),
            };
            let alpha: f64 = p.or("alpha", alpha0)?;
            let beta: f64 = p.or("beta", beta0)?;
            let model = ModelSpec {
                internal: InternalEnergySpec::none().with_epsilon(eps),
                external: ExternalPotentialSpec::LogConfinement { c: alpha / beta },
                kernel: Some(kernel),
            };
            let base = Base {
                dim: 2,
                half_width,
                cells,
                t_end: 20.0,
                rule: QuadratureRule::GaussTensor4,
            };
            let initial = Profile::Ring {
                radius: p.or("ring_radius", 0.3)?,
                variance: p.or("ring_variance", 0.01)?,
                mass,
            };
            assemble(&p, base, model, initial, Some(mass))?
        }
        other => {
            return Err(Error::config(
                "scenario",
                format!("unknown scenario `{other}`"),
            ))
        }
    };
    p.finish()?;
    Ok(cfg)
}

/// Closed-form steady density for presets that have one, as a function of
/// the resolved configuration's mass.
pub fn closed_form_reference(
    name: &str,
    overrides: &BTreeMap<String, Value>,
) -> Result<Option<Box<dyn Fn([f64; 2]) -> f64 + Send + Sync>>> {
    let mass = |default: f64| -> Result<f64> {
        match overrides.get("mass") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| Error::config("mass", e.to_string())),
            None => Ok(default),
        }
    };
    Ok(match name {
        "quadlog_1d" => {
            let m = mass(1.0)?;
            Some(Box::new(move |p: [f64; 2]| (m / PI) * (2.0 - p[0] * p[0]).max(0.0).sqrt()))
        }
        "quadnewton_1d" => {
            let m = mass(1.0)?;
            Some(Box::new(move |p: [f64; 2]| if p[0].abs() <= 1.0 { 0.5 * m } else { 0.0 }))
        }
        "quadlog_2d" => {
            let m = mass(1.0)?;
            Some(Box::new(move |p: [f64; 2]| {
                if p[0] * p[0] + p[1] * p[1] <= 1.0 {
                    m / PI
                } else {
                    0.0
                }
            }))
        }
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves_and_validates() {
        for s in SCENARIOS {
            let cfg = build(s.name, &BTreeMap::new()).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
        }
    }

    #[test]
    fn epsilon_scales_with_grid() {
        let mut o = BTreeMap::new();
        o.insert("n".to_string(), Value::from(160));
        let cfg = build("quadnewton_1d", &o).unwrap();
        let dx: f64 = 4.0 / 160.0;
        assert!((cfg.model.internal.epsilon - 0.25 * dx * dx).abs() < 1e-18);
        o.insert("eps".to_string(), Value::from(0.0));
        assert_eq!(build("quadnewton_1d", &o).unwrap().model.internal.epsilon, 0.0);
    }

    #[test]
    fn two_dimensional_epsilon() {
        let cfg = build("quadlog_2d", &BTreeMap::new()).unwrap();
        let dx: f64 = 3.0 / 64.0;
        assert!((cfg.model.internal.epsilon - 0.4 * 2.0 * dx * dx).abs() < 1e-15);
    }

    #[test]
    fn unknown_scenario_and_parameter() {
        assert!(build("nope", &BTreeMap::new()).is_err());
        let mut o = BTreeMap::new();
        o.insert("xc".to_string(), Value::from(0.2));
        assert!(build("quadlog_1d", &o).is_err());
        assert!(build("doublewell_1d", &o).is_ok());
    }

    #[test]
    fn gks_initial_data() {
        let cfg = build("gks_balanced_1d", &BTreeMap::new()).unwrap();
        let v = cfg.initial.value([2.0, 0.0], 1);
        assert!((v - 0.057 / PI.sqrt()).abs() < 1e-3 * v);
        let cfg = build("gks_selfsim_1d", &BTreeMap::new()).unwrap();
        let v = cfg.initial.value([0.0, 0.0], 1);
        assert!((v - 0.5 * 0.055 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn references() {
        let f = closed_form_reference("quadlog_1d", &BTreeMap::new()).unwrap().unwrap();
        assert!((f([0.0, 0.0]) - 2f64.sqrt() / PI).abs() < 1e-15);
        assert_eq!(f([1.5, 0.0]), 0.0);
        assert!(closed_form_reference("doublewell_1d", &BTreeMap::new()).unwrap().is_none());
    }
}
