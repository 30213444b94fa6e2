//! Hamiltonian builders on the `phonon ⊗ magnon ⊗ spin` space.
//!
//! All builders return Hermitian [`OperatorMatrix`] values in rad/s (ħ = 1).

use alloc::format;
use alloc::vec::Vec;

use crate::device::CouplingSet;
use crate::error::{Error, Result};
use crate::operators::{
    embed_on, fock_ladder, number, pauli, HilbertSpec, OperatorMatrix, Pauli, StateVector, Subsystem,
};
use crate::I;
#[allow(unused_imports)]
use num_traits::Float;

/// Which resonance condition `Δ_k = 0` selects the tripartite term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `Λ₁ (a² s σ₊ + a†² s† σ₋)`, resonant at `2ω_a + ω_K = ω_s`.
    One,
    /// `Λ₂ (a² s† σ₊ + a†² s σ₋)`, resonant at `2ω_a = ω_K + ω_s`.
    Two,
    /// `Λ₃ (a² s† σ₋ + a†² s σ₊)`, resonant at `2ω_a + ω_s = ω_K`.
    Three,
}

impl Variant {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Variant::One),
            2 => Ok(Variant::Two),
            3 => Ok(Variant::Three),
            other => Err(Error::InvalidArgument(format!("unknown resonance variant {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Variant::One => 1,
            Variant::Two => 2,
            Variant::Three => 3,
        }
    }

    pub fn coupling(self, cs: &CouplingSet) -> f64 {
        match self {
            Variant::One => cs.lambda1,
            Variant::Two => cs.lambda2,
            Variant::Three => cs.lambda3,
        }
    }

    /// Minimal-excitation initial state `(n_a, n_K, spin_up)` whose resonant
    /// partner is reached by one application of the coupling.
    pub fn resonant_initial_state(self) -> (usize, usize, bool) {
        match self {
            Variant::One => (0, 0, true),
            Variant::Two => (0, 1, true),
            Variant::Three => (0, 1, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Every mode rotating at the drive frequency `ω_p`.
    Rotating,
}

/// Parametric trap modulation `−Ω_p cos(2ω_p t)(a + a†)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// `Ω_p`, rad/s.
    pub strength: f64,
    /// `ω_p`, rad/s.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub spec: HilbertSpec,
    pub couplings: CouplingSet,
    pub variant: Variant,
    pub frame: Frame,
    pub drive: Option<Drive>,
}

impl ModelConfig {
    pub fn lab(spec: HilbertSpec, couplings: CouplingSet, variant: Variant) -> Self {
        ModelConfig { spec, couplings, variant, frame: Frame::Lab, drive: None }
    }

    pub fn validate(&self) -> Result<()> {
        for role in [Subsystem::Phonon, Subsystem::Magnon, Subsystem::Spin] {
            if self.spec.slot(role).is_none() {
                return Err(Error::InvalidConfig(format!("Hilbert space lacks a {role:?} factor")));
            }
        }
        if self.spec.dim_of(Subsystem::Phonon) < Some(3) {
            return Err(Error::InvalidConfig("phonon truncation must be at least 3".into()));
        }
        if self.spec.dim_of(Subsystem::Magnon) < Some(2) {
            return Err(Error::InvalidConfig("magnon truncation must be at least 2".into()));
        }
        match (self.frame, self.drive) {
            (Frame::Lab, Some(_)) => {
                Err(Error::InvalidConfig("a drive is only meaningful in the rotating frame".into()))
            }
            (_, Some(d)) if !(d.strength >= 0.0 && d.frequency >= 0.0) => {
                Err(Error::InvalidConfig("drive strength and frequency must be non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// `(Δ_a, Δ_K, Δ_s)` relative to the drive frequency.
    pub fn detunings(&self) -> Result<[f64; 3]> {
        let d = self
            .drive
            .ok_or_else(|| Error::InvalidConfig("rotating frame requires a drive".into()))?;
        let cs = &self.couplings;
        Ok([cs.omega_a - d.frequency, cs.omega_k - d.frequency, cs.omega_s - d.frequency])
    }

    fn frame_frequencies(&self) -> Result<[f64; 3]> {
        match self.frame {
            Frame::Lab => {
                let cs = &self.couplings;
                Ok([cs.omega_a, cs.omega_k, cs.omega_s])
            }
            Frame::Rotating => self.detunings(),
        }
    }
}

/// Embedded mode operators for a full space.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub s: OperatorMatrix,
    pub s_dag: OperatorMatrix,
    pub sigma_plus: OperatorMatrix,
    pub sigma_minus: OperatorMatrix,
    pub sigma_x: OperatorMatrix,
    pub sigma_y: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub n_phonon: OperatorMatrix,
    pub n_magnon: OperatorMatrix,
    /// `σ₊σ₋ = |↑⟩⟨↑|`.
    pub spin_excitation: OperatorMatrix,
}

impl ModeOperators {
    pub fn new(spec: &HilbertSpec) -> Result<Self> {
        let na = spec
            .dim_of(Subsystem::Phonon)
            .ok_or_else(|| Error::InvalidConfig("space lacks a phonon factor".into()))?;
        let nk = spec
            .dim_of(Subsystem::Magnon)
            .ok_or_else(|| Error::InvalidConfig("space lacks a magnon factor".into()))?;
        let (a, _) = fock_ladder(na)?;
        let (s, _) = fock_ladder(nk)?;
        let a = embed_on(&a, Subsystem::Phonon, spec)?;
        let s = embed_on(&s, Subsystem::Magnon, spec)?;
        let spin = |p| embed_on(&pauli(p), Subsystem::Spin, spec);
        let sigma_plus = spin(Pauli::Plus)?;
        let sigma_minus = spin(Pauli::Minus)?;
        Ok(ModeOperators {
            a_dag: a.dag(),
            s_dag: s.dag(),
            spin_excitation: sigma_plus.matmul(&sigma_minus).into_hermitian()?,
            n_phonon: embed_on(&number(na)?, Subsystem::Phonon, spec)?,
            n_magnon: embed_on(&number(nk)?, Subsystem::Magnon, spec)?,
            sigma_x: spin(Pauli::X)?,
            sigma_y: spin(Pauli::Y)?,
            sigma_z: spin(Pauli::Z)?,
            a,
            s,
            sigma_plus,
            sigma_minus,
        })
    }
}

fn hermitian_part(x: &OperatorMatrix) -> OperatorMatrix {
    x + &x.dag()
}

fn free_terms(ops: &ModeOperators, freqs: [f64; 3]) -> OperatorMatrix {
    let [wa, wk, ws] = freqs;
    let h = &(&ops.n_phonon * wa) + &(&ops.n_magnon * wk);
    &h + &(&ops.sigma_z * (0.5 * ws))
}

/// `ω_a a†a + ω_K s†s + (ω_s/2) σ_z`, or the same with detunings in the
/// rotating frame.
pub fn build_free(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let ops = ModeOperators::new(&cfg.spec)?;
    free_terms(&ops, cfg.frame_frequencies()?).into_hermitian()
}

/// `−g_T (s σ₊ + s† σ₋) + g_L (a + a†)(s + s†) σ_z`.
pub fn build_linear_coupling(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let ops = ModeOperators::new(&cfg.spec)?;
    let cs = &cfg.couplings;
    let exchange = hermitian_part(&ops.s.matmul(&ops.sigma_plus));
    let x_a = hermitian_part(&ops.a);
    let x_k = hermitian_part(&ops.s);
    let longitudinal = x_a.matmul(&x_k).matmul(&ops.sigma_z);
    (&(&exchange * -cs.g_t) + &(&longitudinal * cs.g_l)).into_hermitian()
}

/// `(a + a†)² [g_x2 (s + s†) σ_x − i g_y2 (s − s†) σ_y]`, counter-rotating
/// terms included.
pub fn build_nonlinear_full(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let ops = ModeOperators::new(&cfg.spec)?;
    let cs = &cfg.couplings;
    let x_a = hermitian_part(&ops.a);
    let x_a2 = x_a.matmul(&x_a);
    let x_k = hermitian_part(&ops.s);
    let p_k = &ops.s - &ops.s_dag;
    let spin_part = &(&x_k.matmul(&ops.sigma_x) * cs.g_x2) - &(&p_k.matmul(&ops.sigma_y) * (I * cs.g_y2));
    x_a2.matmul(&spin_part).into_hermitian()
}

/// The bare tripartite operator for a variant, without its coupling constant.
fn tripartite_term(ops: &ModeOperators, variant: Variant) -> OperatorMatrix {
    let a2 = ops.a.matmul(&ops.a);
    let raising = match variant {
        Variant::One => a2.matmul(&ops.s).matmul(&ops.sigma_plus),
        Variant::Two => a2.matmul(&ops.s_dag).matmul(&ops.sigma_plus),
        Variant::Three => a2.matmul(&ops.s_dag).matmul(&ops.sigma_minus),
    };
    hermitian_part(&raising)
}

/// Resonant two-phonon tripartite Hamiltonian for `cfg.variant`.
pub fn build_rwa_variant(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let ops = ModeOperators::new(&cfg.spec)?;
    let lambda = cfg.variant.coupling(&cfg.couplings);
    (&tripartite_term(&ops, cfg.variant) * lambda).into_hermitian()
}

/// Rotating-frame Hamiltonian of the parametrically driven system on the
/// `Δ₂ = 0` resonance:
/// `Δ_a a†a + Δ_K s†s + (Δ_s/2)σ_z + Λ₂(a² s† σ₊ + h.c.) − (Ω_p/2)(a² + a†²)`.
pub fn build_kos(cfg: &ModelConfig) -> Result<OperatorMatrix> {
    cfg.validate()?;
    if cfg.frame != Frame::Rotating {
        return Err(Error::InvalidConfig("the driven Hamiltonian is defined in the rotating frame".into()));
    }
    let drive = cfg.drive.ok_or_else(|| Error::InvalidConfig("missing drive".into()))?;
    let ops = ModeOperators::new(&cfg.spec)?;
    let free = free_terms(&ops, cfg.detunings()?);
    let coupling = &tripartite_term(&ops, Variant::Two) * cfg.couplings.lambda2;
    let squeeze = &hermitian_part(&ops.a.matmul(&ops.a)) * (-0.5 * drive.strength);
    (&(&free + &coupling) + &squeeze).into_hermitian()
}

/// Bogoliubov frame of the driven phonon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeFrame {
    /// Squeezing parameter, `tanh 2r = Ω_p / Δ_a`.
    pub r: f64,
    /// `Δ_a / cosh 2r`.
    pub delta_a_eff: f64,
    /// `Λ₂ cosh² r`.
    pub lambda_eff: f64,
}

impl SqueezeFrame {
    /// Frame for an explicitly chosen squeezing parameter.
    pub fn from_r(r: f64, delta_a: f64, lambda2: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("squeezing parameter {r} must be finite and >= 0")));
        }
        let c = r.cosh();
        Ok(SqueezeFrame { r, delta_a_eff: delta_a / (2.0 * r).cosh(), lambda_eff: lambda2 * c * c })
    }

    /// `cosh² r`.
    pub fn enhancement(&self) -> f64 {
        let c = self.r.cosh();
        c * c
    }

    /// `Ω_p / Δ_a = tanh 2r`.
    pub fn drive_ratio(&self) -> f64 {
        (2.0 * self.r).tanh()
    }

    /// The effective model assumes `Λ_eff ≪ Δa_eff`; flags ratios above 0.1.
    pub fn validity_warning(&self) -> Option<f64> {
        let ratio = self.lambda_eff / self.delta_a_eff.abs();
        (ratio > 0.1).then_some(ratio)
    }
}

/// `r = ½ atanh(Ω_p / Δ_a)` and the resulting effective parameters.
pub fn squeeze_frame(omega_p: f64, delta_a: f64, lambda2: f64) -> Result<SqueezeFrame> {
    let ratio = omega_p / delta_a;
    if !(delta_a > 0.0) || !(omega_p >= 0.0) || !(ratio < 1.0) {
        return Err(Error::UnstableDrive { ratio });
    }
    SqueezeFrame::from_r(0.5 * ratio.atanh(), delta_a, lambda2)
}

/// Squeezed-frame effective Hamiltonian with the Bogoliubov rotation folded
/// into the coefficients:
/// `Δa_eff b†b + Δ_K s†s + (Δ_s/2)σ_z + Λ_eff(b² s† σ₊ + h.c.)`.
pub fn build_squeezed_effective(cfg: &ModelConfig, frame: &SqueezeFrame) -> Result<OperatorMatrix> {
    cfg.validate()?;
    let [_, dk, ds] = cfg.detunings()?;
    let ops = ModeOperators::new(&cfg.spec)?;
    let free = free_terms(&ops, [frame.delta_a_eff, dk, ds]);
    let coupling = &tripartite_term(&ops, Variant::Two) * frame.lambda_eff;
    (&free + &coupling).into_hermitian()
}

/// Explicit truncated Bogoliubov mode `b = a cosh r − a† sinh r`.
pub fn bogoliubov_mode(r: f64, dim: usize) -> Result<OperatorMatrix> {
    let (a, adag) = fock_ladder(dim)?;
    Ok(&(&a * r.cosh()) - &(&adag * r.sinh()))
}

/// Driven quadratic phonon block `Δ_a a†a − (Ω_p/2)(a² + a†²)`.
pub fn quadratic_phonon_block(delta_a: f64, omega_p: f64, dim: usize) -> Result<OperatorMatrix> {
    let (a, adag) = fock_ladder(dim)?;
    let n = adag.matmul(&a);
    let pair = &a.matmul(&a) + &adag.matmul(&adag);
    (&(&n * delta_a) - &(&pair * (0.5 * omega_p))).into_hermitian()
}

/// The lowest `count` level spacings of [`quadratic_phonon_block`].
pub fn squeezing_gaps(delta_a: f64, omega_p: f64, dim: usize, count: usize) -> Result<Vec<f64>> {
    let ev = quadratic_phonon_block(delta_a, omega_p, dim)?.eigenvalues_hermitian()?;
    Ok(ev.windows(2).take(count).map(|w| w[1] - w[0]).collect())
}

/// One piecewise-constant slice of a time-dependent Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub duration: f64,
    pub hamiltonian: OperatorMatrix,
}

/// Lab-frame parametric drive on the phonon alone,
/// `ω_a a†a − Ω_p cos(2ω_p t)(a + a†)²`, sampled midpoint-wise.
pub fn sample_lab_drive(
    omega_a: f64,
    drive: Drive,
    dim: usize,
    t_final: f64,
    samples_per_period: usize,
) -> Result<Vec<Segment>> {
    if samples_per_period < 40 {
        return Err(Error::InvalidArgument("need at least 40 samples per drive period".into()));
    }
    if !(drive.frequency > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidArgument("drive frequency and duration must be positive".into()));
    }
    let (a, adag) = fock_ladder(dim)?;
    let spec = HilbertSpec::phonon(dim)?;
    let h0 = (&adag.matmul(&a) * omega_a).with_spec(spec.clone())?;
    let x = &a + &adag;
    let x2 = x.matmul(&x).with_spec(spec)?;
    let period = core::f64::consts::PI / drive.frequency;
    let dt_nominal = period / samples_per_period as f64;
    let steps = (t_final / dt_nominal).ceil() as usize;
    let dt = t_final / steps as f64;
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let start = k as f64 * dt;
        let mid = start + 0.5 * dt;
        let c = -drive.strength * (2.0 * drive.frequency * mid).cos();
        out.push(Segment { start, duration: dt, hamiltonian: (&h0 + &(&x2 * c)).into_hermitian()? });
    }
    Ok(out)
}

/// Unitary propagation of a pure state through piecewise-constant segments.
pub fn propagate_segments(segments: &[Segment], psi: &StateVector) -> Result<StateVector> {
    let mut out = psi.clone();
    for seg in segments {
        let h = &seg.hamiltonian;
        if h.dim() != out.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: out.dim() });
        }
        let gen: Vec<_> = h.data().iter().map(|z| -I * z * seg.duration).collect();
        let u = OperatorMatrix::from_vec(h.spec().clone(), crate::linalg::expm(h.dim(), &gen)?)?;
        out = u.apply(&out.with_spec(h.spec().clone())?);
    }
    Ok(out)
}

/// Conserved charges of the closed resonant dynamics.
pub fn conserved_charges(variant: Variant, spec: &HilbertSpec) -> Result<Vec<(&'static str, OperatorMatrix)>> {
    let ops = ModeOperators::new(spec)?;
    let two = |m: &OperatorMatrix| m * 2.0;
    Ok(match variant {
        Variant::One => alloc::vec![
            ("n_a - 2 n_K", &ops.n_phonon - &two(&ops.n_magnon)),
            ("n_a + 2 s+s-", &ops.n_phonon + &two(&ops.spin_excitation)),
        ],
        Variant::Two => alloc::vec![
            ("n_a + 2 n_K", &ops.n_phonon + &two(&ops.n_magnon)),
            ("n_a + 2 s+s-", &ops.n_phonon + &two(&ops.spin_excitation)),
        ],
        Variant::Three => alloc::vec![
            ("n_a + 2 n_K", &ops.n_phonon + &two(&ops.n_magnon)),
            ("n_a - 2 s+s-", &ops.n_phonon - &two(&ops.spin_excitation)),
        ],
    })
}

/// Warning raised when the reachable phonon occupation approaches the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationWarning {
    pub highest_level: usize,
    pub phonon_dim: usize,
}

/// Flags an initial state whose first-order image under `h` populates a
/// phonon level within 2 of the cutoff.
pub fn truncation_guard(h: &OperatorMatrix, initial: &StateVector) -> Result<Option<TruncationWarning>> {
    let spec = h.spec();
    let slot = spec
        .slot(Subsystem::Phonon)
        .ok_or_else(|| Error::InvalidArgument("operator has no phonon factor".into()))?;
    let na = spec.dims()[slot];
    let image = h.apply(initial);
    let mut highest = 0;
    for v in [initial, &image] {
        for (k, z) in v.amplitudes().iter().enumerate() {
            if z.norm() > 1e-14 {
                highest = highest.max(spec.digits(k)[slot]);
            }
        }
    }
    Ok((highest + 2 >= na).then_some(TruncationWarning { highest_level: highest, phonon_dim: na }))
}

/// `|n_a, n_K, spin⟩` on a full space.
pub fn product_state(spec: &HilbertSpec, n_a: usize, n_k: usize, spin_up: bool) -> Result<StateVector> {
    StateVector::basis(spec.clone(), &[n_a, n_k, if spin_up { 0 } else { 1 }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{derive_couplings, DeviceParams};
    use crate::{C64, ONE, ZERO};

    fn couplings() -> CouplingSet {
        derive_couplings(&DeviceParams::reference()).unwrap()
    }

    fn cfg(na: usize, nk: usize, variant: Variant) -> ModelConfig {
        ModelConfig::lab(HilbertSpec::full(na, nk).unwrap(), couplings(), variant)
    }

    fn elem(h: &OperatorMatrix, bra: (usize, usize, bool), ket: (usize, usize, bool)) -> C64 {
        let spec = h.spec();
        let i = spec.index(&[bra.0, bra.1, if bra.2 { 0 } else { 1 }]);
        let j = spec.index(&[ket.0, ket.1, if ket.2 { 0 } else { 1 }]);
        h.get(i, j)
    }

    fn close(a: C64, b: f64, tol: f64) -> bool {
        (a - C64::new(b, 0.0)).norm() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn free_hamiltonian() {
        let mut c = cfg(5, 2, Variant::One);
        c.couplings.omega_a = 0.0;
        c.couplings.omega_k = 0.0;
        c.couplings.omega_s = 0.0;
        assert_eq!(build_free(&c).unwrap().max_abs(), 0.0);

        c.couplings.omega_a = 1.5;
        let ev = build_free(&c).unwrap().eigenvalues_hermitian().unwrap();
        for level in 0..5 {
            let count = ev.iter().filter(|&&e| (e - 1.5 * level as f64).abs() < 1e-12).count();
            assert_eq!(count, 4);
        }

        let mut rot = cfg(5, 2, Variant::Two);
        rot.frame = Frame::Rotating;
        rot.drive = Some(Drive { strength: 0.0, frequency: rot.couplings.omega_a });
        let h = build_free(&rot).unwrap();
        let ops = ModeOperators::new(&rot.spec).unwrap();
        assert_eq!(h.commutator(&ops.a).matmul(&ops.n_magnon).max_abs(), 0.0);
        let na_coeff = elem(&h, (1, 0, true), (1, 0, true)) - elem(&h, (0, 0, true), (0, 0, true));
        assert_eq!(na_coeff, ZERO);
    }

    #[test]
    fn linear_coupling_elements() {
        let c = cfg(4, 3, Variant::One);
        let h = build_linear_coupling(&c).unwrap();
        assert!(close(elem(&h, (0, 1, false), (0, 0, true)), -c.couplings.g_t, 1e-12));
        assert!(h.hermiticity_error() == 0.0);

        let mut jc = c.clone();
        jc.couplings.g_l = 0.0;
        let h = build_linear_coupling(&jc).unwrap();
        // without g_L the phonon number is untouched and n_K + σ₊σ₋ is conserved
        let ops = ModeOperators::new(&jc.spec).unwrap();
        assert_eq!(h.commutator(&ops.n_phonon).max_abs(), 0.0);
        let q = &ops.n_magnon + &ops.spin_excitation;
        assert!(h.commutator(&q).max_abs() < 1e-6);
    }

    #[test]
    fn nonlinear_full_elements() {
        let c = cfg(5, 3, Variant::One);
        let h = build_nonlinear_full(&c).unwrap();
        let want = 2f64.sqrt() * c.couplings.lambda1;
        assert!(close(elem(&h, (2, 1, false), (0, 0, true)), want, 1e-12));
        assert!(h.hermiticity_error() <= 1e-12 * h.max_abs());

        let mut zero = c.clone();
        zero.couplings.g_x2 = 0.0;
        zero.couplings.g_y2 = 0.0;
        assert_eq!(build_nonlinear_full(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rwa_variants() {
        let c1 = cfg(5, 3, Variant::One);
        let h1 = build_rwa_variant(&c1).unwrap();
        assert!(close(elem(&h1, (2, 1, false), (0, 0, true)), 2f64.sqrt() * c1.couplings.lambda1, 1e-12));

        let mut c3 = cfg(5, 3, Variant::Three);
        c3.couplings.lambda3 = 0.0;
        assert_eq!(build_rwa_variant(&c3).unwrap().max_abs(), 0.0);
        assert!(Variant::from_index(4).is_err());
    }

    #[test]
    fn conserved_charges_commute() {
        for v in [Variant::One, Variant::Two, Variant::Three] {
            let c = cfg(6, 3, v);
            let h = build_rwa_variant(&c).unwrap();
            for (name, q) in conserved_charges(v, &c.spec).unwrap() {
                assert_eq!(h.commutator(&q).max_abs(), 0.0, "{v:?} {name}");
            }
        }
    }

    /// Keep only the matrix elements of the full nonlinear coupling whose
    /// interaction-picture frequency vanishes.
    fn resonant_part(c: &ModelConfig) -> OperatorMatrix {
        let full = build_nonlinear_full(c).unwrap();
        let free = build_free(c).unwrap();
        OperatorMatrix::from_fn(c.spec.clone(), |i, j| {
            let w = free.get(i, i).re - free.get(j, j).re;
            if w.abs() < 1e-9 { full.get(i, j) } else { ZERO }
        })
    }

    #[test]
    fn rwa_consistency_with_full_coupling() {
        let na = 7;
        let cases = [
            (Variant::One, 1.0, 0.37, 2.37),
            (Variant::Two, 1.0, 0.37, 1.63),
            (Variant::Three, 1.0, 2.9, 0.9),
        ];
        for (v, wa, wk, ws) in cases {
            let mut c = cfg(na, 3, v);
            c.couplings.omega_a = wa;
            c.couplings.omega_k = wk;
            c.couplings.omega_s = ws;
            let d = crate::device::resonance_detunings(&c.couplings);
            assert!(d[v.index() as usize - 1].abs() < 1e-12);
            let extracted = resonant_part(&c);
            let rwa = build_rwa_variant(&c).unwrap();
            let scale = rwa.max_abs();
            for i in 0..rwa.dim() {
                for j in 0..rwa.dim() {
                    let (pi, pj) = (c.spec.digits(i)[0], c.spec.digits(j)[0]);
                    if pi <= na - 3 && pj <= na - 3 {
                        assert!(
                            (extracted.get(i, j) - rwa.get(i, j)).norm() <= 1e-12 * scale,
                            "{v:?} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kos_reduces_to_free() {
        let mut c = cfg(6, 2, Variant::Two);
        c.frame = Frame::Rotating;
        c.drive = Some(Drive { strength: 0.0, frequency: 0.7 * c.couplings.omega_a });
        c.couplings.lambda2 = 0.0;
        assert_eq!(build_kos(&c).unwrap(), build_free(&c).unwrap());
        let mut missing = c.clone();
        missing.drive = None;
        assert!(matches!(build_kos(&missing), Err(Error::InvalidConfig(_))));
        let mut lab = c.clone();
        lab.frame = Frame::Lab;
        assert!(build_kos(&lab).is_err());
    }

    #[test]
    fn squeeze_frame_algebra() {
        let f = squeeze_frame(0.0, 2.0, 3.0).unwrap();
        assert_eq!(f.r, 0.0);
        assert_eq!(f.lambda_eff, 3.0);

        let f = squeeze_frame(2f64.tanh(), 1.0, 1.0).unwrap();
        assert!((f.r - 1.0).abs() < 1e-12);
        assert!((f.delta_a_eff - 1.0 / 2f64.cosh()).abs() < 1e-12);

        let f = SqueezeFrame::from_r(4.1, 1.0, 1.0).unwrap();
        // cosh²(4.1) = (cosh 8.2 + 1)/2
        assert!((f.enhancement() / ((8.2f64.cosh() + 1.0) / 2.0) - 1.0).abs() < 1e-12);
        assert!((f.enhancement() - 910.7).abs() / 910.7 < 1e-3);

        assert!(matches!(squeeze_frame(1.0, 1.0, 1.0), Err(Error::UnstableDrive { .. })));
        assert!(matches!(squeeze_frame(2.0, 1.0, 1.0), Err(Error::UnstableDrive { .. })));
        let near = squeeze_frame(0.999, 1.0, 1.0).unwrap();
        assert!((near.r - 0.5 * 0.999f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn squeezed_effective() {
        let mut c = cfg(6, 3, Variant::Two);
        c.frame = Frame::Rotating;
        c.drive = Some(Drive { strength: 0.0, frequency: 0.5 * c.couplings.omega_a });
        let delta_a = c.detunings().unwrap()[0];
        let frame = squeeze_frame(0.0, delta_a, c.couplings.lambda2).unwrap();
        assert_eq!(build_squeezed_effective(&c, &frame).unwrap(), build_kos(&c).unwrap());

        let frame = SqueezeFrame::from_r(1.3, delta_a, c.couplings.lambda2).unwrap();
        let h = build_squeezed_effective(&c, &frame).unwrap();
        let want = 2f64.sqrt() * c.couplings.lambda2 * 1.3f64.cosh().powi(2);
        assert!(close(elem(&h, (2, 0, false), (0, 1, true)), want, 1e-12));
        assert!(h.hermiticity_error() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn spectral_squeezing_check() {
        for r in [0.25f64, 0.5, 1.0] {
            let delta = 1.0;
            let gaps = squeezing_gaps(delta, (2.0 * r).tanh() * delta, 60, 3).unwrap();
            let want = delta / (2.0 * r).cosh();
            for g in gaps {
                assert!((g / want - 1.0).abs() < 0.01, "r={r}: {g} vs {want}");
            }
        }
        // r = 1.5 needs a much larger truncation than 60 levels
        let gaps = squeezing_gaps(1.0, 3f64.tanh(), 240, 3).unwrap();
        for g in gaps {
            assert!((g * 3f64.cosh() - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn bogoliubov_commutator_interior() {
        let r = 0.4;
        let b = bogoliubov_mode(r, 30).unwrap();
        let c = b.commutator(&b.dag());
        for i in 0..20 {
            assert!((c.get(i, i) - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation_guard_flags_edge() {
        let c = cfg(4, 3, Variant::One);
        let h = build_rwa_variant(&c).unwrap();
        let psi = product_state(&c.spec, 0, 0, true).unwrap();
        let w = truncation_guard(&h, &psi).unwrap().unwrap();
        assert_eq!(w.highest_level, 2);
        let c = cfg(10, 3, Variant::One);
        let h = build_rwa_variant(&c).unwrap();
        let psi = product_state(&c.spec, 0, 0, true).unwrap();
        assert!(truncation_guard(&h, &psi).unwrap().is_none());
    }

    #[test]
    fn drive_sampler_resolution() {
        let d = Drive { strength: 0.05, frequency: 1.0 };
        assert!(sample_lab_drive(1.0, d, 6, 1.0, 20).is_err());
        let segs = sample_lab_drive(1.0, d, 6, 2.0, 40).unwrap();
        let total: f64 = segs.iter().map(|s| s.duration).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(segs[0].duration <= core::f64::consts::PI / 40.0 + 1e-15);
    }
}
