//! TOML experiment configuration and its resolution into a typed plan.

use std::path::{Path, PathBuf};

use eneon_core::device::{derive_couplings, from_hz, CouplingSet, DeviceParams, Spacing, SweepAxis};
use eneon_core::hamiltonians::Variant;
use eneon_core::lindblad::DissipationRates;
use eneon_core::tomography::PhaseSpaceGrid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Couplings,
    Sweep,
    Dynamics,
    Enhance,
    Nongaussian,
    Validate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Couplings => "couplings",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Dynamics => "dynamics",
            ExperimentKind::Enhance => "enhance",
            ExperimentKind::Nongaussian => "nongaussian",
            ExperimentKind::Validate => "validate",
        }
    }
}

/// Device geometry in SI units; frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(rename = "V_e")]
    pub v_e: f64,
    #[serde(rename = "V_tilde")]
    pub v_tilde: f64,
    pub d: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "R_K")]
    pub r_k: f64,
    #[serde(rename = "d_K")]
    pub d_k: f64,
    #[serde(rename = "M_s")]
    pub m_s: f64,
    #[serde(rename = "B_s")]
    pub b_s: f64,
    #[serde(rename = "B_K")]
    pub b_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_z_override: Option<f64>,
    #[serde(default, rename = "omega_a_override_Hz", skip_serializing_if = "Option::is_none")]
    pub omega_a_override_hz: Option<f64>,
}

impl DeviceSection {
    pub fn to_params(&self) -> DeviceParams {
        DeviceParams {
            trap_voltage: self.v_e,
            modulation_voltage: self.v_tilde,
            neon_depth: self.d,
            trap_width: self.w,
            sphere_radius: self.r_k,
            gap: self.d_k,
            saturation_magnetization: self.m_s,
            spin_field: self.b_s,
            magnet_field: self.b_k,
            zero_point_override: self.a_z_override,
            motional_frequency_override: self.omega_a_override_hz.map(from_hz),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateMode {
    #[serde(rename = "absolute_Hz")]
    AbsoluteHz,
    #[serde(rename = "relative")]
    Relative,
}

/// Dissipation rates, either in Hz or as multiples of the selected `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub mode: RateMode,
    #[serde(rename = "gamma_K")]
    pub gamma_k: f64,
    pub gamma_a: f64,
    pub gamma_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSpacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinInit {
    Up,
    Down,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_phonon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_magnon: Option<usize>,
    /// Dimensionless `Λt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    #[serde(default, rename = "R_K_range", skip_serializing_if = "Option::is_none")]
    pub r_k_range: Option<[f64; 2]>,
    #[serde(default, rename = "R_K_count", skip_serializing_if = "Option::is_none")]
    pub r_k_count: Option<usize>,
    #[serde(default, rename = "R_K_spacing", skip_serializing_if = "Option::is_none")]
    pub r_k_spacing: Option<AxisSpacing>,
    #[serde(default, rename = "d_K_range", skip_serializing_if = "Option::is_none")]
    pub d_k_range: Option<[f64; 2]>,
    #[serde(default, rename = "d_K_count", skip_serializing_if = "Option::is_none")]
    pub d_k_count: Option<usize>,
    #[serde(default, rename = "d_K_spacing", skip_serializing_if = "Option::is_none")]
    pub d_k_spacing: Option<AxisSpacing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze_r: Option<Vec<f64>>,
    /// `Ω_p / Δ_a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_ratio: Option<f64>,
    #[serde(default, rename = "delta_a_Hz", skip_serializing_if = "Option::is_none")]
    pub delta_a_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<SpinInit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_maps: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSection>,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Config(format!("{}: not valid UTF-8: {e}", path.display())))?;
        Ok((Self::from_toml_str(text)?, bytes))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.directory.clone().unwrap_or_else(|| PathBuf::from("out").join(self.experiment.name()))
    }

    fn device(&self) -> CliResult<DeviceParams> {
        let section = self.device.as_ref().ok_or_else(|| missing("device", self.experiment))?;
        let params = section.to_params();
        params.validate().map_err(|e| CliError::Config(format!("[device] {e}")))?;
        Ok(params)
    }

    fn variant(&self) -> CliResult<Variant> {
        let k = self.simulation.variant.unwrap_or(1);
        Variant::from_index(k).map_err(|_| CliError::Config(format!("simulation.variant must be 1, 2 or 3, got {k}")))
    }

    /// Absolute rates in rad/s, resolving relative rates against `Λ_variant`.
    fn absolute_rates(&self, cs: &CouplingSet, variant: Variant) -> CliResult<DissipationRates> {
        let r = self.rates.as_ref().ok_or_else(|| missing("rates", self.experiment))?;
        let scale = match r.mode {
            RateMode::AbsoluteHz => from_hz(1.0),
            RateMode::Relative => variant.coupling(cs),
        };
        if !(scale > 0.0) {
            return Err(CliError::Config(format!("relative rates need a nonzero Lambda{}", variant.index())));
        }
        DissipationRates::new(r.gamma_k * scale, r.gamma_a * scale, r.gamma_s * scale)
            .map_err(|e| CliError::Config(format!("[rates] {e}")))
    }

    fn axis(&self, range: Option<[f64; 2]>, count: Option<usize>, spacing: Option<AxisSpacing>, fixed: f64) -> SweepAxis {
        match range {
            None => SweepAxis::fixed(fixed),
            Some([start, stop]) => SweepAxis {
                start,
                stop,
                count: count.unwrap_or(2),
                spacing: match spacing.unwrap_or(AxisSpacing::Log) {
                    AxisSpacing::Linear => Spacing::Linear,
                    AxisSpacing::Log => Spacing::Log,
                },
            },
        }
    }

    fn grid(&self) -> CliResult<PhaseSpaceGrid> {
        let [lo, hi] = self.simulation.grid_range.unwrap_or([-4.0, 4.0]);
        let n = self.simulation.grid_points.unwrap_or(81);
        PhaseSpaceGrid::new((lo, hi), (lo, hi), n, n).map_err(|e| CliError::Config(format!("simulation.grid: {e}")))
    }

    /// Check required fields for the experiment kind and produce a typed plan.
    pub fn resolve(&self) -> CliResult<Plan> {
        let sim = &self.simulation;
        Ok(match self.experiment {
            ExperimentKind::Validate => Plan::Validate { fast: sim.fast.unwrap_or(false) },
            ExperimentKind::Couplings => {
                let device = self.device()?;
                let cs = derive_couplings(&device)?;
                let variant = self.variant()?;
                let rates = match self.rates {
                    Some(_) => Some(self.absolute_rates(&cs, variant)?),
                    None => None,
                };
                Plan::Couplings { device, rates }
            }
            ExperimentKind::Sweep => {
                let device = self.device()?;
                if sim.r_k_range.is_none() && sim.d_k_range.is_none() {
                    return Err(missing("simulation.R_K_range or simulation.d_K_range", self.experiment));
                }
                let cs = derive_couplings(&device)?;
                let rates = self.absolute_rates(&cs, self.variant()?)?;
                let radius = self.axis(sim.r_k_range, sim.r_k_count, sim.r_k_spacing, device.sphere_radius);
                let gap = self.axis(sim.d_k_range, sim.d_k_count, sim.d_k_spacing, device.gap);
                radius.values().map_err(|e| CliError::Config(format!("simulation.R_K_range: {e}")))?;
                gap.values().map_err(|e| CliError::Config(format!("simulation.d_K_range: {e}")))?;
                Plan::Sweep { device, rates, radius, gap }
            }
            ExperimentKind::Dynamics => {
                let device = self.device()?;
                let cs = derive_couplings(&device)?;
                let variant = self.variant()?;
                let lambda = variant.coupling(&cs);
                let abs = self.absolute_rates(&cs, variant)?;
                let rates = DissipationRates::new(abs.gamma_k / lambda, abs.gamma_a / lambda, abs.gamma_s / lambda)?;
                let t_final = sim.t_final.ok_or_else(|| missing("simulation.t_final", self.experiment))?;
                if !(t_final > 0.0) {
                    return Err(CliError::Config("simulation.t_final must be positive".into()));
                }
                Plan::Dynamics(DynamicsPlan {
                    device,
                    variant,
                    rates,
                    n_phonon: sim.n_phonon.unwrap_or(15),
                    n_magnon: sim.n_magnon.unwrap_or(3),
                    t_final,
                    samples: sim.samples.unwrap_or(400),
                    rtol: sim.rtol.unwrap_or(1e-8),
                    atol: sim.atol.unwrap_or(1e-10),
                    checkpoint_every: sim.checkpoint_every.unwrap_or(0),
                })
            }
            ExperimentKind::Enhance => {
                let device = self.device()?;
                let squeeze_r = sim.squeeze_r.clone().unwrap_or_default();
                let drive = match (sim.drive_ratio, sim.delta_a_hz) {
                    (Some(ratio), Some(delta)) => Some((ratio, from_hz(delta))),
                    (None, None) => None,
                    (Some(_), None) => return Err(missing("simulation.delta_a_Hz", self.experiment)),
                    (None, Some(_)) => return Err(missing("simulation.drive_ratio", self.experiment)),
                };
                if squeeze_r.is_empty() && drive.is_none() {
                    return Err(missing("simulation.squeeze_r or simulation.drive_ratio", self.experiment));
                }
                if squeeze_r.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                    return Err(CliError::Config("simulation.squeeze_r entries must be finite and >= 0".into()));
                }
                let radius = self.axis(sim.r_k_range, sim.r_k_count, sim.r_k_spacing, device.sphere_radius);
                radius.values().map_err(|e| CliError::Config(format!("simulation.R_K_range: {e}")))?;
                Plan::Enhance(EnhancePlan { device, radius, squeeze_r, drive })
            }
            ExperimentKind::Nongaussian => {
                let device = self.device()?;
                let cs = derive_couplings(&device)?;
                let abs = self.absolute_rates(&cs, Variant::One)?;
                if !(cs.lambda1 > 0.0) {
                    return Err(CliError::Config("nongaussian needs a nonzero Lambda1".into()));
                }
                let alphas = sim.alphas.clone().ok_or_else(|| missing("simulation.alphas", self.experiment))?;
                if alphas.is_empty() || alphas.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    return Err(CliError::Config("simulation.alphas must be a nonempty list of values >= 0".into()));
                }
                Plan::Nongaussian(NongaussianPlan {
                    gamma_ratio: abs.gamma_k / cs.lambda1,
                    alphas,
                    spin_up: sim.spin.unwrap_or(SpinInit::Up) == SpinInit::Up,
                    n_phonon: sim.n_phonon.unwrap_or(25),
                    grid: self.grid()?,
                    write_maps: sim.write_maps.unwrap_or(true),
                })
            }
        })
    }
}

fn missing(field: &str, kind: ExperimentKind) -> CliError {
    CliError::Config(format!("missing field `{field}` required by experiment `{}`", kind.name()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsPlan {
    pub device: DeviceParams,
    pub variant: Variant,
    /// In units of `Λ_variant`.
    pub rates: DissipationRates,
    pub n_phonon: usize,
    pub n_magnon: usize,
    pub t_final: f64,
    pub samples: usize,
    pub rtol: f64,
    pub atol: f64,
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancePlan {
    pub device: DeviceParams,
    pub radius: SweepAxis,
    pub squeeze_r: Vec<f64>,
    /// `(Ω_p/Δ_a, Δ_a in rad/s)`.
    pub drive: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NongaussianPlan {
    /// `γ_K / Λ₁`.
    pub gamma_ratio: f64,
    pub alphas: Vec<f64>,
    pub spin_up: bool,
    pub n_phonon: usize,
    pub grid: PhaseSpaceGrid,
    pub write_maps: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Couplings { device: DeviceParams, rates: Option<DissipationRates> },
    Sweep { device: DeviceParams, rates: DissipationRates, radius: SweepAxis, gap: SweepAxis },
    Dynamics(DynamicsPlan),
    Enhance(EnhancePlan),
    Nongaussian(NongaussianPlan),
    Validate { fast: bool },
}
