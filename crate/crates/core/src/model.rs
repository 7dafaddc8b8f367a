//! Closed-form internal energies, confinement potentials and interaction
//! kernels, with pointwise and exact cell-integral evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum floor for `log` in the entropy derivative. The transported flux
/// carries a factor of the density, so the floored value never moves mass.
pub const LOG_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyLaw {
    None,
    /// `H = (nu/m) rho^m`.
    PowerLaw { nu: f64, m: f64 },
    /// `H = nu (rho log rho - rho)`.
    LogEntropy { nu: f64 },
}

/// Internal energy density plus the quadratic regularization `(eps/2) rho^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InternalEnergySpec {
    pub law: EnergyLaw,
    #[serde(default)]
    pub epsilon: f64,
}

impl InternalEnergySpec {
    pub fn none() -> Self {
        InternalEnergySpec {
            law: EnergyLaw::None,
            epsilon: 0.0,
        }
    }

    pub fn power_law(nu: f64, m: f64) -> Self {
        InternalEnergySpec {
            law: EnergyLaw::PowerLaw { nu, m },
            epsilon: 0.0,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        InternalEnergySpec { epsilon, ..self }
    }

    pub fn is_present(&self) -> bool {
        !matches!(self.law, EnergyLaw::None) || self.epsilon != 0.0
    }

    /// `H'(rho) + eps * rho`.
    pub fn derivative(&self, rho: f64) -> f64 {
        let law = match self.law {
            EnergyLaw::None => 0.0,
            EnergyLaw::PowerLaw { nu, m } => nu * rho.powf(m - 1.0),
            EnergyLaw::LogEntropy { nu } => nu * rho.max(LOG_FLOOR).ln(),
        };
        law + self.epsilon * rho
    }

    /// `H(rho) + (eps/2) rho^2`.
    pub fn value(&self, rho: f64) -> f64 {
        let law = match self.law {
            EnergyLaw::None => 0.0,
            EnergyLaw::PowerLaw { nu, m } => nu / m * rho.powf(m),
            EnergyLaw::LogEntropy { nu } => {
                if rho > 0.0 {
                    nu * (rho * rho.ln() - rho)
                } else {
                    0.0
                }
            }
        };
        law + 0.5 * self.epsilon * rho * rho
    }

    /// Effective diffusivity `rho * H''(rho)` of the induced pressure.
    pub fn diffusivity(&self, rho: f64) -> f64 {
        let law = match self.law {
            EnergyLaw::None => 0.0,
            EnergyLaw::PowerLaw { nu, m } => nu * (m - 1.0) * rho.powf(m - 1.0),
            EnergyLaw::LogEntropy { nu } => nu,
        };
        law + self.epsilon * rho
    }

    fn validate(&self) -> Result<()> {
        match self.law {
            EnergyLaw::PowerLaw { nu, m } => {
                if !(nu > 0.0) {
                    return Err(Error::config("model.internal.law.nu", "must be positive"));
                }
                if !(m > 1.0) {
                    return Err(Error::config("model.internal.law.m", "must exceed 1"));
                }
            }
            EnergyLaw::LogEntropy { nu } if !(nu > 0.0) => {
                return Err(Error::config("model.internal.law.nu", "must be positive"));
            }
            _ => {}
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config("model.internal.epsilon", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExternalPotentialSpec {
    None,
    /// `c |x|^2`.
    Quadratic { c: f64 },
    /// `x^4/4 - x^2/2` (1D only).
    DoubleWell,
    /// `-c log|x|`; undefined at the origin.
    LogConfinement { c: f64 },
    /// `|x|^2 / 2`.
    QuadraticHalf,
}

impl ExternalPotentialSpec {
    pub fn is_present(&self) -> bool {
        !matches!(self, ExternalPotentialSpec::None)
    }

    pub fn value(&self, point: [f64; 2], dim: usize) -> Result<f64> {
        let r2: f64 = point[..dim].iter().map(|x| x * x).sum();
        Ok(match *self {
            ExternalPotentialSpec::None => 0.0,
            ExternalPotentialSpec::Quadratic { c } => c * r2,
            ExternalPotentialSpec::DoubleWell => {
                let x = point[0];
                0.25 * x.powi(4) - 0.5 * x * x
            }
            ExternalPotentialSpec::LogConfinement { c } => {
                if r2 == 0.0 {
                    return Err(Error::Numeric(
                        "log confinement evaluated at the origin".into(),
                    ));
                }
                -0.5 * c * r2.ln()
            }
            ExternalPotentialSpec::QuadraticHalf => 0.5 * r2,
        })
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if matches!(self, ExternalPotentialSpec::DoubleWell) && dim != 1 {
            return Err(Error::config("model.external", "double well is 1D only"));
        }
        Ok(())
    }
}

pub fn external_potential_value(
    spec: &ExternalPotentialSpec,
    point: [f64; 2],
    dim: usize,
) -> Result<f64> {
    spec.value(point, dim)
}

pub fn internal_energy_derivative(spec: &InternalEnergySpec, rho: f64) -> f64 {
    spec.derivative(rho)
}

pub fn internal_energy_value(spec: &InternalEnergySpec, rho: f64) -> f64 {
    spec.value(rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedTerm {
    pub coefficient: f64,
    pub kernel: KernelSpec,
}

/// Radial interaction kernels `W(|x|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `|x|^a / a`, and `log|x|` for `a = 0`.
    PowerLaw { a: f64 },
    /// `A exp(-|x|^2 / (2 sigma)) / (2 pi sigma)^(d/2)`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// `A exp(-|x| / length)`.
    Exponential { amplitude: f64, length: f64 },
    /// `-(1 - |x|)_+`.
    Tent,
    /// `C exp(-|x| / length) - exp(-|x|)`.
    Morse { c: f64, length: f64 },
    /// `lambda (B(|x|) - C B(|x| / length))` with `B(r) = -K0(k r) / (2 pi)`.
    QuasiMorse {
        lambda: f64,
        c: f64,
        length: f64,
        k: f64,
    },
    WeightedSum { terms: Vec<WeightedTerm> },
}

impl KernelSpec {
    /// `|x|^2/2 - log|x|`.
    pub fn quadratic_log() -> Self {
        KernelSpec::WeightedSum {
            terms: vec![
                WeightedTerm {
                    coefficient: 1.0,
                    kernel: KernelSpec::PowerLaw { a: 2.0 },
                },
                WeightedTerm {
                    coefficient: -1.0,
                    kernel: KernelSpec::PowerLaw { a: 0.0 },
                },
            ],
        }
    }

    /// `|x|^2/2 - |x|`.
    pub fn quadratic_newton_1d() -> Self {
        KernelSpec::WeightedSum {
            terms: vec![
                WeightedTerm {
                    coefficient: 1.0,
                    kernel: KernelSpec::PowerLaw { a: 2.0 },
                },
                WeightedTerm {
                    coefficient: -1.0,
                    kernel: KernelSpec::PowerLaw { a: 1.0 },
                },
            ],
        }
    }

    pub fn singular_at_origin(&self) -> bool {
        match self {
            KernelSpec::PowerLaw { a } => *a <= 0.0,
            KernelSpec::QuasiMorse { .. } => true,
            KernelSpec::WeightedSum { terms } => terms
                .iter()
                .any(|t| t.coefficient != 0.0 && t.kernel.singular_at_origin()),
            _ => false,
        }
    }

    /// Value at distance `r` in dimension `dim`; errors at a singular origin.
    pub fn radial(&self, r: f64, dim: usize) -> Result<f64> {
        if r == 0.0 && self.singular_at_origin() {
            return Err(Error::Numeric("singular kernel evaluated at the origin".into()));
        }
        Ok(match self {
            KernelSpec::PowerLaw { a } => {
                if *a == 0.0 {
                    r.ln()
                } else {
                    r.powf(*a) / a
                }
            }
            KernelSpec::Gaussian { amplitude, sigma } => {
                amplitude * (-r * r / (2.0 * sigma)).exp()
                    / (2.0 * std::f64::consts::PI * sigma).powf(dim as f64 / 2.0)
            }
            KernelSpec::Exponential { amplitude, length } => amplitude * (-r / length).exp(),
            KernelSpec::Tent => -(1.0 - r).max(0.0),
            KernelSpec::Morse { c, length } => c * (-r / length).exp() - (-r).exp(),
            KernelSpec::QuasiMorse {
                lambda,
                c,
                length,
                k,
            } => {
                let b = |s: f64| -> Result<f64> {
                    Ok(-bessel_k0(k * s)? / (2.0 * std::f64::consts::PI))
                };
                lambda * (b(r)? - c * b(r / length)?)
            }
            KernelSpec::WeightedSum { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    if t.coefficient != 0.0 {
                        acc += t.coefficient * t.kernel.radial(r, dim)?;
                    }
                }
                acc
            }
        })
    }

    /// Odd antiderivative `G(s) = int_0^s W(t) dt` in 1D, when available in
    /// closed form.
    pub fn antiderivative_1d(&self, s: f64) -> Result<f64> {
        let sign = s.signum();
        let x = s.abs();
        Ok(match self {
            KernelSpec::PowerLaw { a } => {
                let a = *a;
                if a <= -1.0 {
                    return Err(Error::config(
                        "model.kernel",
                        format!("|x|^{a} is not locally integrable in 1D"),
                    ));
                }
                if x == 0.0 {
                    0.0
                } else if a == 0.0 {
                    s * x.ln() - s
                } else {
                    sign * x.powf(a + 1.0) / (a * (a + 1.0))
                }
            }
            KernelSpec::Gaussian { amplitude, sigma } => {
                0.5 * amplitude * libm::erf(s / (2.0 * sigma).sqrt())
            }
            KernelSpec::Exponential { amplitude, length } => {
                amplitude * sign * length * (-(-x / length).exp_m1())
            }
            KernelSpec::Tent => {
                let y = x.min(1.0);
                -sign * (y - 0.5 * y * y)
            }
            KernelSpec::Morse { c, length } => {
                sign * (c * length * (-(-x / length).exp_m1()) - (-(-x).exp_m1()))
            }
            KernelSpec::QuasiMorse { .. } => {
                return Err(Error::config(
                    "model.kernel",
                    "quasi-Morse kernel has no closed-form antiderivative",
                ))
            }
            KernelSpec::WeightedSum { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    if t.coefficient != 0.0 {
                        acc += t.coefficient * t.kernel.antiderivative_1d(s)?;
                    }
                }
                acc
            }
        })
    }

    pub fn has_antiderivative_1d(&self) -> bool {
        match self {
            KernelSpec::QuasiMorse { .. } => false,
            KernelSpec::PowerLaw { a } => *a > -1.0,
            KernelSpec::WeightedSum { terms } => {
                terms.iter().all(|t| t.kernel.has_antiderivative_1d())
            }
            _ => true,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let path = "model.kernel";
        match self {
            KernelSpec::PowerLaw { a } if !(*a > -(dim as f64)) => Err(Error::config(
                path,
                format!("power-law exponent {a} must exceed -{dim} for local integrability"),
            )),
            KernelSpec::Gaussian { sigma, .. } if !(*sigma > 0.0) => {
                Err(Error::config(path, "gaussian sigma must be positive"))
            }
            KernelSpec::Exponential { length, .. } | KernelSpec::Morse { length, .. }
                if !(*length > 0.0) =>
            {
                Err(Error::config(path, "length must be positive"))
            }
            KernelSpec::QuasiMorse { length, k, .. } if !(*length > 0.0 && *k > 0.0) => {
                Err(Error::config(path, "length and k must be positive"))
            }
            KernelSpec::WeightedSum { terms } => {
                terms.iter().try_for_each(|t| t.kernel.validate(dim))
            }
            _ => Ok(()),
        }
    }
}

/// Pointwise kernel value at `displacement` (only the first `dim` entries are read).
pub fn kernel_value(spec: &KernelSpec, displacement: [f64; 2], dim: usize) -> Result<f64> {
    let r = displacement[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
    spec.radial(r, dim)
}

/// Exact average `(1/dx) int_{(n-1/2)dx}^{(n+1/2)dx} W(s) ds` in 1D, including
/// the improper but convergent integral over the singular cell `n = 0`.
pub fn kernel_cell_average_1d(spec: &KernelSpec, n: i64, dx: f64) -> Result<f64> {
    if !spec.has_antiderivative_1d() {
        return Err(Error::config(
            "model.kernel",
            "kernel has no closed-form 1D antiderivative",
        ));
    }
    let c = n as f64 * dx;
    let h = 0.5 * dx;
    Ok((spec.antiderivative_1d(c + h)? - spec.antiderivative_1d(c - h)?) / dx)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind `K0(r)`, `r > 0`.
///
/// Power series for `r <= 2`; Steed's continued fraction (CF2) above.
pub fn bessel_k0(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Numeric(format!("K0 needs a positive argument, got {r}")));
    }
    if r <= 2.0 {
        let q = 0.25 * r * r;
        let mut term = 1.0;
        let mut i0 = 1.0;
        let mut harmonic = 0.0;
        let mut tail = 0.0;
        for k in 1..40 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            tail += term * harmonic;
            if term < 1e-18 * i0 {
                break;
            }
        }
        return Ok(-((0.5 * r).ln() + EULER_GAMMA) * i0 + tail);
    }
    let mut b = 2.0 * (1.0 + r);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    let _ = h;
    Ok((std::f64::consts::PI / (2.0 * r)).sqrt() * (-r).exp() / s)
}

/// The triple `(H, V, W)` defining one equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub internal: InternalEnergySpec,
    pub external: ExternalPotentialSpec,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
}

impl ModelSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.internal.validate()?;
        self.external.validate(dim)?;
        if let Some(k) = &self.kernel {
            k.validate(dim)?;
        }
        if !self.internal.is_present() && !self.external.is_present() && self.kernel.is_none() {
            return Err(Error::config("model", "at least one of H, V, W must be present"));
        }
        Ok(())
    }
}
