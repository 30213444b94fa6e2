//! Device geometry → physical coupling constants.
//!
//! The electron sits a distance `H = R_K + d_K` from the centre of a
//! saturated magnetic sphere. The sphere's Kittel-mode magnetization produces
//! a dipole stray field whose value and curvature at the electron set the
//! magnon–spin (`g_T`), linear tripartite (`g_L`) and two-phonon tripartite
//! (`g_x2`, `g_y2`) couplings.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::lindblad::DissipationRates;

/// Physical constants (CODATA 2018, SI).
pub mod constants {
    /// Label written into output manifests.
    pub const TABLE_VERSION: &str = "CODATA-2018";
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054571817e-34;
    /// Electron mass, kg.
    pub const ELECTRON_MASS: f64 = 9.1093837015e-31;
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
    /// Vacuum permeability, T m / A.
    pub const MU_0: f64 = 1.25663706212e-6;
    /// Electron gyromagnetic ratio, rad / (s T).
    pub const GAMMA_E: f64 = 1.76085963023e11;
}

use constants::*;
#[allow(unused_imports)]
use num_traits::Float;

/// Angular frequency (rad/s) → Hz.
pub fn to_hz(rate: f64) -> f64 {
    rate / (2.0 * PI)
}

/// Hz → angular frequency (rad/s).
pub fn from_hz(freq: f64) -> f64 {
    freq * 2.0 * PI
}

/// Trap, magnet and bias-field geometry. All values SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Trap electrode voltage `V_e` (V).
    pub trap_voltage: f64,
    /// Parametric modulation amplitude `Ṽ` (V).
    pub modulation_voltage: f64,
    /// Solid-neon depth `d` (m).
    pub neon_depth: f64,
    /// Trap period `W` (m).
    pub trap_width: f64,
    /// Sphere radius `R_K` (m).
    pub sphere_radius: f64,
    /// Electron-to-sphere-surface gap `d_K` (m).
    pub gap: f64,
    /// Saturation magnetization `M_s` (A/m).
    pub saturation_magnetization: f64,
    /// Spin bias field `B_s` (T).
    pub spin_field: f64,
    /// Magnet bias field `B_K` (T).
    pub magnet_field: f64,
    /// Use this zero-point length instead of `sqrt(ħ / (m_e ω_a))`.
    pub zero_point_override: Option<f64>,
    /// Use this motional frequency (rad/s) instead of the cosine-trap value.
    pub motional_frequency_override: Option<f64>,
}

impl DeviceParams {
    /// Geometry quoted for the 50 nm sphere at 10 nm distance, with
    /// `a_z = 0.7e-7 m` and `ω_a/2π = 1.34 GHz` imposed directly. Bias fields
    /// are zero; resonance conditions are chosen per experiment.
    pub fn reference() -> Self {
        DeviceParams {
            trap_voltage: 1.0e-3,
            modulation_voltage: 0.0,
            neon_depth: 1.0e-7,
            trap_width: 1.0e-5,
            sphere_radius: 50e-9,
            gap: 10e-9,
            saturation_magnetization: 587e3,
            spin_field: 0.0,
            magnet_field: 0.0,
            zero_point_override: Some(0.7e-7),
            motional_frequency_override: Some(from_hz(1.34e9)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 6] = [
            ("V_e", self.trap_voltage),
            ("d", self.neon_depth),
            ("W", self.trap_width),
            ("R_K", self.sphere_radius),
            ("d_K", self.gap),
            ("M_s", self.saturation_magnetization),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams { field, value });
            }
        }
        let nonnegative: [(&'static str, f64); 3] = [
            ("V_tilde", self.modulation_voltage),
            ("B_s", self.spin_field),
            ("B_K", self.magnet_field),
        ];
        for (field, value) in nonnegative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams { field, value });
            }
        }
        if let Some(v) = self.zero_point_override {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams { field: "a_z_override", value: v });
            }
        }
        if let Some(v) = self.motional_frequency_override {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams { field: "omega_a_override", value: v });
            }
        }
        Ok(())
    }

    /// Sphere volume `4π R_K³ / 3`.
    pub fn sphere_volume(&self) -> f64 {
        4.0 * PI * self.sphere_radius.powi(3) / 3.0
    }

    /// Centre-to-electron distance `H = R_K + d_K`.
    pub fn distance(&self) -> f64 {
        self.sphere_radius + self.gap
    }

    /// Effective trap depth `V_t = V_e exp(-2π d / W)`.
    pub fn effective_trap_voltage(&self) -> f64 {
        self.trap_voltage * (-2.0 * PI * self.neon_depth / self.trap_width).exp()
    }

    /// Motional frequency of the cosine trap, `2π sqrt(e V_t / (m_e W²))`.
    pub fn trap_frequency(&self) -> f64 {
        2.0 * PI
            * (ELEMENTARY_CHARGE * self.effective_trap_voltage()
                / (ELECTRON_MASS * self.trap_width * self.trap_width))
                .sqrt()
    }

    /// Zero-point magnetization `sqrt(ħ γ_e M_s / (2 V_K))`.
    pub fn zero_point_magnetization(&self) -> f64 {
        (HBAR * GAMMA_E * self.saturation_magnetization / (2.0 * self.sphere_volume())).sqrt()
    }
}

/// Every derived constant. Rates in rad/s, lengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    pub omega_a: f64,
    pub omega_s: f64,
    pub omega_k: f64,
    /// Zero-point length used downstream (override if one was given).
    pub a_z: f64,
    /// `sqrt(ħ / (m_e ω_a))`, reported even when overridden.
    pub a_z_from_trap: f64,
    /// Quartic trap coefficient `α`. Reported only; dynamics are harmonic.
    pub alpha_quartic: f64,
    pub m_k: f64,
    pub c_g: f64,
    pub g_t: f64,
    pub g_l: f64,
    pub g_x2: f64,
    pub g_y2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub h_dist: f64,
    /// Parametric drive strength `Ω_p = k̃ a_z² / (4ħ)`.
    pub omega_p_drive: f64,
}

impl CouplingSet {
    pub fn lambdas(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    /// `Λ_k` for resonance condition `k ∈ {1, 2, 3}`.
    pub fn lambda(&self, variant: u8) -> Option<f64> {
        match variant {
            1 => Some(self.lambda1),
            2 => Some(self.lambda2),
            3 => Some(self.lambda3),
            _ => None,
        }
    }

    /// Whether the configured `a_z` differs from the trap-derived one by more than 1%.
    pub fn zero_point_inconsistent(&self) -> bool {
        (self.a_z / self.a_z_from_trap - 1.0).abs() > 0.01
    }
}

/// Derive the full coupling set from geometry.
pub fn derive_couplings(params: &DeviceParams) -> Result<CouplingSet> {
    params.validate()?;
    let omega_a = params.motional_frequency_override.unwrap_or_else(|| params.trap_frequency());
    let a_z_from_trap = (HBAR / (ELECTRON_MASS * omega_a)).sqrt();
    let a_z = params.zero_point_override.unwrap_or(a_z_from_trap);
    let k = 2.0 * PI / params.trap_width;
    let alpha_quartic = k * k * HBAR / (8.0 * ELECTRON_MASS);

    let v_k = params.sphere_volume();
    let m_k = params.zero_point_magnetization();
    let h = params.distance();
    let c_g = GAMMA_E * MU_0 * v_k * m_k;

    let g_t = c_g / (8.0 * PI * h.powi(3));
    let g_l = 3.0 * c_g * a_z / (8.0 * SQRT_2 * PI * h.powi(4));
    let g_x2 = 3.0 * c_g * a_z * a_z / (8.0 * PI * h.powi(5));
    let g_y2 = 3.0 * c_g * a_z * a_z / (32.0 * PI * h.powi(5));

    let k_tilde = ELEMENTARY_CHARGE * params.modulation_voltage
        * (-2.0 * PI * params.neon_depth / params.trap_width).exp()
        / (params.trap_width * params.trap_width);
    let omega_p_drive = k_tilde * a_z * a_z / (4.0 * HBAR);

    Ok(CouplingSet {
        omega_a,
        omega_s: GAMMA_E * params.spin_field,
        omega_k: GAMMA_E * params.magnet_field,
        a_z,
        a_z_from_trap,
        alpha_quartic,
        m_k,
        c_g,
        g_t,
        g_l,
        g_x2,
        g_y2,
        lambda1: g_x2 - g_y2,
        lambda2: g_x2 + g_y2,
        lambda3: g_x2 - g_y2,
        h_dist: h,
        omega_p_drive,
    })
}

/// Point-dipole field `μ₀/4π [3 r (μ·r)/r⁵ − μ/r³]` in tesla.
pub fn dipole_field(moment: [f64; 3], r: [f64; 3]) -> Result<[f64; 3]> {
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if !(r2 > 0.0) {
        return Err(Error::Singularity);
    }
    let rn = r2.sqrt();
    let r3 = r2 * rn;
    let r5 = r3 * r2;
    let mdotr = moment[0] * r[0] + moment[1] * r[1] + moment[2] * r[2];
    let pre = MU_0 / (4.0 * PI);
    Ok([
        pre * (3.0 * r[0] * mdotr / r5 - moment[0] / r3),
        pre * (3.0 * r[1] * mdotr / r5 - moment[1] / r3),
        pre * (3.0 * r[2] * mdotr / r5 - moment[2] / r3),
    ])
}

/// The four expansion couplings, in the order `g_T, g_L, g_x2, g_y2`.
pub type ExpansionCouplings = [f64; 4];

/// Names matching [`ExpansionCouplings`] positions.
pub const EXPANSION_NAMES: [&str; 4] = ["g_T", "g_L", "g_x2", "g_y2"];

/// Finite-difference reconstruction of the expansion couplings from the raw
/// dipole field, independent of the closed-form expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOracle {
    /// Stencil step as a fraction of `a_z`.
    pub step_fraction: f64,
    /// Combine the `h` and `h/2` stencils into a fourth-order estimate.
    pub richardson: bool,
    /// Largest tolerated relative disagreement between the `h` and `h/2` stencils.
    pub max_spread: f64,
}

impl Default for CouplingOracle {
    fn default() -> Self {
        CouplingOracle { step_fraction: 0.01, richardson: true, max_spread: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub step: f64,
    pub finite_difference: ExpansionCouplings,
    pub analytic: ExpansionCouplings,
    /// `|fd / analytic − 1|`.
    pub residuals: ExpansionCouplings,
    /// Relative `h` vs `h/2` disagreement of the raw stencils.
    pub spread: ExpansionCouplings,
}

impl OracleReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Position-dependent field couplings `(g_x(z), g_y(z), g_z(z))` in rad/s.
///
/// The Kittel moment is `μ = V_K M_K [(s + s†) e_x + i(s − s†) e_y]`; the
/// interaction `−γ_e B·σ/2` is read off component by component.
fn field_couplings(moment: f64, h: f64, z: f64) -> Result<[f64; 3]> {
    let r = [-h, 0.0, z];
    let bx = dipole_field([moment, 0.0, 0.0], r)?;
    let by = dipole_field([0.0, moment, 0.0], r)?;
    let s = -0.5 * GAMMA_E;
    Ok([s * bx[0], s * by[1], s * bx[2]])
}

impl CouplingOracle {
    pub fn run(&self, params: &DeviceParams) -> Result<OracleReport> {
        let cs = derive_couplings(params)?;
        let step = cs.a_z * self.step_fraction;
        if !(step >= 1e-12) {
            return Err(Error::OracleConfig { step });
        }
        let moment = params.sphere_volume() * params.zero_point_magnetization();
        let h_dist = params.distance();

        let stencil = |h: f64| -> Result<ExpansionCouplings> {
            let m = field_couplings(moment, h_dist, -h)?;
            let c = field_couplings(moment, h_dist, 0.0)?;
            let p = field_couplings(moment, h_dist, h)?;
            let d1_z = (p[2] - m[2]) / (2.0 * h);
            let d2_x = (p[0] - 2.0 * c[0] + m[0]) / (h * h);
            let d2_y = (p[1] - 2.0 * c[1] + m[1]) / (h * h);
            // z = a_z (a + a†)/√2, so z² = (a_z²/2)(a + a†)²
            let zp = cs.a_z / SQRT_2;
            Ok([
                -(c[0] + c[1]),
                d1_z * zp,
                0.5 * d2_x * zp * zp,
                -0.5 * d2_y * zp * zp,
            ])
        };

        let coarse = stencil(step)?;
        let fine = stencil(0.5 * step)?;
        let mut spread = [0.0; 4];
        let mut estimate = [0.0; 4];
        for i in 0..4 {
            spread[i] = if fine[i] != 0.0 { (coarse[i] / fine[i] - 1.0).abs() } else { 0.0 };
            if spread[i] > self.max_spread {
                return Err(Error::OracleIllConditioned { quantity: EXPANSION_NAMES[i], spread: spread[i] });
            }
            estimate[i] = if self.richardson { (4.0 * fine[i] - coarse[i]) / 3.0 } else { coarse[i] };
        }
        let analytic = [cs.g_t, cs.g_l, cs.g_x2, cs.g_y2];
        let mut residuals = [0.0; 4];
        for i in 0..4 {
            residuals[i] = (estimate[i] / analytic[i] - 1.0).abs();
        }
        Ok(OracleReport { step, finite_difference: estimate, analytic, residuals, spread })
    }
}

/// [`CouplingOracle`] with default settings (`h = a_z/100`, Richardson on).
pub fn coupling_oracle(params: &DeviceParams) -> Result<OracleReport> {
    CouplingOracle::default().run(params)
}

/// Resonance detunings `(Δ₁, Δ₂, Δ₃)`.
pub fn resonance_detunings(cs: &CouplingSet) -> [f64; 3] {
    [
        2.0 * cs.omega_a + cs.omega_k - cs.omega_s,
        2.0 * cs.omega_a - cs.omega_k - cs.omega_s,
        2.0 * cs.omega_a - cs.omega_k + cs.omega_s,
    ]
}

/// Strong coupling: every `Λ` exceeds every dissipation rate.
pub fn is_strong_coupling(cs: &CouplingSet, rates: &DissipationRates) -> bool {
    let lmin = cs.lambdas().iter().copied().fold(f64::INFINITY, f64::min);
    lmin > rates.max_rate()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep axis, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepAxis {
    pub fn fixed(value: f64) -> Self {
        SweepAxis { start: value, stop: value, count: 1, spacing: Spacing::Linear }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("empty sweep range".into()));
        }
        if !(self.start > 0.0 && self.stop > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidArgument("sweep bounds must be positive".into()));
        }
        if self.count > 1 && !(self.stop > self.start) {
            return Err(Error::InvalidArgument("sweep range must be increasing".into()));
        }
        if self.count == 1 {
            return Ok(alloc::vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepNode {
    pub sphere_radius: f64,
    pub gap: f64,
    pub couplings: CouplingSet,
    pub strong: bool,
}

/// Coupling constants over an `R_K × d_K` grid, radius-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub radii: Vec<f64>,
    pub gaps: Vec<f64>,
    nodes: Vec<SweepNode>,
}

impl SweepGrid {
    /// Assemble from nodes delivered in any order as `((radius_idx, gap_idx), node)`.
    pub fn assemble(
        radii: Vec<f64>,
        gaps: Vec<f64>,
        nodes: impl IntoIterator<Item = ((usize, usize), SweepNode)>,
    ) -> Result<Self> {
        let total = radii.len() * gaps.len();
        let mut slots: Vec<Option<SweepNode>> = alloc::vec![None; total];
        for ((i, j), node) in nodes {
            if i >= radii.len() || j >= gaps.len() {
                return Err(Error::InvalidArgument("sweep node index out of range".into()));
            }
            slots[i * gaps.len() + j] = Some(node);
        }
        let nodes = slots
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("sweep grid is missing nodes".into()))?;
        Ok(SweepGrid { radii, gaps, nodes })
    }

    pub fn node(&self, radius_idx: usize, gap_idx: usize) -> &SweepNode {
        &self.nodes[radius_idx * self.gaps.len() + gap_idx]
    }

    pub fn nodes(&self) -> &[SweepNode] {
        &self.nodes
    }
}

/// Evaluate one grid node.
pub fn sweep_node(template: &DeviceParams, radius: f64, gap: f64, rates: &DissipationRates) -> Result<SweepNode> {
    let params = DeviceParams { sphere_radius: radius, gap, ..*template };
    let couplings = derive_couplings(&params)?;
    Ok(SweepNode { sphere_radius: radius, gap, strong: is_strong_coupling(&couplings, rates), couplings })
}

/// Sequential sweep over `radius × gap`.
pub fn sweep_couplings(
    template: &DeviceParams,
    radius_axis: &SweepAxis,
    gap_axis: &SweepAxis,
    rates: &DissipationRates,
) -> Result<SweepGrid> {
    let radii = radius_axis.values()?;
    let gaps = gap_axis.values()?;
    let mut nodes = Vec::with_capacity(radii.len() * gaps.len());
    for (i, &r) in radii.iter().enumerate() {
        for (j, &d) in gaps.iter().enumerate() {
            nodes.push(((i, j), sweep_node(template, r, d, rates)?));
        }
    }
    SweepGrid::assemble(radii, gaps, nodes)
}

/// Least-squares slope of `ln Λ₁` against `ln R_K` over log-spaced radii.
pub fn radius_scaling_slope(template: &DeviceParams, radius_axis: &SweepAxis) -> Result<f64> {
    let radii = radius_axis.values()?;
    if radii.len() < 2 {
        return Err(Error::InvalidArgument("slope needs at least two radii".into()));
    }
    let mut pts = Vec::with_capacity(radii.len());
    for &r in &radii {
        let cs = derive_couplings(&DeviceParams { sphere_radius: r, ..*template })?;
        pts.push((r.ln(), cs.lambda1.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> DeviceParams {
        DeviceParams::reference()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn reference_couplings() {
        let cs = derive_couplings(&reference()).unwrap();
        assert!(rel(to_hz(cs.lambda1), 1.1e6) < 0.05, "{}", to_hz(cs.lambda1));
        assert!(rel(to_hz(cs.lambda2), 1.8e6) < 0.05, "{}", to_hz(cs.lambda2));
        assert_eq!(cs.lambda1, cs.lambda3);
        // sqrt(ħ γ_e M_s / (2 V_K)) evaluated by hand: 102.02 A/m
        assert!(rel(cs.m_k, 102.0247) < 1e-4, "{}", cs.m_k);
    }

    #[test]
    fn ratio_identities() {
        for &(r, d) in &[(50e-9, 10e-9), (300e-9, 40e-9), (2e-6, 5e-9)] {
            let p = DeviceParams { sphere_radius: r, gap: d, ..reference() };
            let cs = derive_couplings(&p).unwrap();
            assert!(rel(cs.g_y2, cs.g_x2 / 4.0) < 1e-12);
            assert!(rel(cs.lambda2 / cs.lambda1, 5.0 / 3.0) < 1e-12);
        }
    }

    #[test]
    fn voltage_scaling() {
        let base = DeviceParams { zero_point_override: None, motional_frequency_override: None, ..reference() };
        let doubled = DeviceParams { trap_voltage: 2.0 * base.trap_voltage, ..base };
        let (a, b) = (derive_couplings(&base).unwrap(), derive_couplings(&doubled).unwrap());
        assert!(rel(b.omega_a / a.omega_a, 2f64.sqrt()) < 1e-12);
        assert!(rel(b.a_z / a.a_z, 2f64.powf(-0.25)) < 1e-12);
    }

    #[test]
    fn zero_point_inconsistency_of_quoted_values() {
        let cs = derive_couplings(&reference()).unwrap();
        assert!(rel(cs.a_z_from_trap, 1.17e-7) < 0.01, "{}", cs.a_z_from_trap);
        assert!(cs.zero_point_inconsistent());
    }

    #[test]
    fn invalid_params_rejected() {
        let p = DeviceParams { gap: 0.0, ..reference() };
        assert_eq!(derive_couplings(&p).unwrap_err(), Error::InvalidParams { field: "d_K", value: 0.0 });
        let p = DeviceParams { trap_voltage: -1.0, ..reference() };
        assert!(matches!(derive_couplings(&p), Err(Error::InvalidParams { field: "V_e", .. })));
    }

    #[test]
    fn dipole_on_axis_and_equator() {
        let mu = 2.5e-17;
        let z = 3e-7;
        let b = dipole_field([0.0, 0.0, mu], [0.0, 0.0, z]).unwrap();
        let want = MU_0 * mu / (2.0 * PI * z.powi(3));
        assert!(b[0].abs() < 1e-30 && b[1].abs() < 1e-30 && rel(b[2], want) < 1e-14);
        let b = dipole_field([0.0, 0.0, mu], [z, 0.0, 0.0]).unwrap();
        assert!(rel(b[2], -MU_0 * mu / (4.0 * PI * z.powi(3))) < 1e-14);
        assert_eq!(dipole_field([1.0, 0.0, 0.0], [0.0; 3]).unwrap_err(), Error::Singularity);
    }

    #[test]
    fn oracle_matches_analytic() {
        let rep = coupling_oracle(&reference()).unwrap();
        assert!(rep.residuals[0] < 1e-6, "{:?}", rep.residuals);
        for &r in &[50e-9, 200e-9, 1000e-9] {
            let rep = coupling_oracle(&DeviceParams { sphere_radius: r, ..reference() }).unwrap();
            assert!(rep.residuals[2] < 1e-5, "R={r}: {:?}", rep.residuals);
        }
    }

    #[test]
    fn oracle_raw_stencil_is_second_order() {
        let p = DeviceParams { sphere_radius: 200e-9, ..reference() };
        let at = |f: f64| CouplingOracle { step_fraction: f, richardson: false, ..Default::default() }
            .run(&p)
            .unwrap();
        let (coarse, fine) = (at(0.04), at(0.01));
        for i in 1..4 {
            let ratio = coarse.residuals[i] / fine.residuals[i];
            assert!((ratio - 16.0).abs() < 0.5, "{}: {ratio}", EXPANSION_NAMES[i]);
        }
    }

    #[test]
    fn oracle_step_underflow() {
        let p = DeviceParams { zero_point_override: Some(5e-11), ..reference() };
        assert!(matches!(coupling_oracle(&p), Err(Error::OracleConfig { .. })));
    }

    #[test]
    fn detunings() {
        let mut cs = derive_couplings(&reference()).unwrap();
        cs.omega_a = 0.0;
        cs.omega_s = 0.0;
        cs.omega_k = 0.0;
        assert_eq!(resonance_detunings(&cs), [0.0; 3]);
        cs.omega_a = 3.0;
        cs.omega_k = 1.5;
        cs.omega_s = 2.0 * 3.0 + 1.5;
        let d = resonance_detunings(&cs);
        assert_eq!(d[0], 0.0);
        assert!((d[2] - d[1] - 2.0 * cs.omega_s).abs() < 1e-12);
    }

    fn quoted_rates() -> DissipationRates {
        DissipationRates::new(from_hz(0.1e6), from_hz(10e3), from_hz(0.01)).unwrap()
    }

    #[test]
    fn sweep_behaviour() {
        let r_axis = SweepAxis { start: 50e-9, stop: 500e-9, count: 10, spacing: Spacing::Log };
        let d_axis = SweepAxis { start: 10e-9, stop: 100e-9, count: 4, spacing: Spacing::Linear };
        let grid = sweep_couplings(&reference(), &r_axis, &d_axis, &quoted_rates()).unwrap();
        assert!(grid.node(0, 0).couplings.lambda2 > grid.node(9, 0).couplings.lambda2);
        assert!(grid.node(0, 0).strong);
        for i in 0..10 {
            for j in 1..4 {
                assert!(grid.node(i, j).couplings.lambda1 < grid.node(i, j - 1).couplings.lambda1);
            }
        }
        for j in 0..4 {
            for i in 1..10 {
                assert!(grid.node(i, j).couplings.lambda1 < grid.node(i - 1, j).couplings.lambda1);
            }
        }
        let one = sweep_couplings(&reference(), &SweepAxis::fixed(50e-9), &SweepAxis::fixed(10e-9), &quoted_rates())
            .unwrap();
        assert_eq!(one.node(0, 0).couplings, derive_couplings(&reference()).unwrap());
        let empty = SweepAxis { count: 0, ..r_axis };
        assert!(sweep_couplings(&reference(), &empty, &d_axis, &quoted_rates()).is_err());
    }

    #[test]
    fn assembly_tolerates_out_of_order_nodes() {
        let rates = quoted_rates();
        let radii = alloc::vec![60e-9, 90e-9];
        let gaps = alloc::vec![10e-9, 20e-9, 30e-9];
        let mut nodes = Vec::new();
        for (i, &r) in radii.iter().enumerate().rev() {
            for (j, &d) in gaps.iter().enumerate() {
                nodes.push(((i, j), sweep_node(&reference(), r, d, &rates).unwrap()));
            }
        }
        let grid = SweepGrid::assemble(radii.clone(), gaps.clone(), nodes).unwrap();
        assert_eq!(grid.node(1, 2).sphere_radius, 90e-9);
        assert_eq!(grid.node(1, 2).gap, 30e-9);
        assert!(SweepGrid::assemble(radii, gaps, Vec::new()).is_err());
    }

    #[test]
    fn distance_power_laws() {
        // at fixed C_g and a_z (fixed sphere), moving the gap changes only H
        let a = derive_couplings(&DeviceParams { gap: 10e-9, ..reference() }).unwrap();
        let b = derive_couplings(&DeviceParams { gap: 70e-9, ..reference() }).unwrap();
        let ratio = b.h_dist / a.h_dist;
        assert!(rel(a.g_t / b.g_t, ratio.powi(3)) < 1e-12);
        assert!(rel(a.g_l / b.g_l, ratio.powi(4)) < 1e-12);
        assert!(rel(a.g_x2 / b.g_x2, ratio.powi(5)) < 1e-12);
    }

    #[test]
    fn asymptotic_radius_scaling() {
        // deep in the R_K >> d_K regime the slope is -7/2
        let axis = SweepAxis { start: 10e-6, stop: 1e-3, count: 21, spacing: Spacing::Log };
        let slope = radius_scaling_slope(&reference(), &axis).unwrap();
        assert!((slope + 3.5).abs() < 0.01, "{slope}");
    }
}
