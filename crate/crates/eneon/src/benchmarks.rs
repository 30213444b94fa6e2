//! Reference computations shared by `eneon validate` and the acceptance suite.

use std::f64::consts::{PI, SQRT_2};

use eneon_core::device::{coupling_oracle, derive_couplings, radius_scaling_slope, to_hz, DeviceParams, Spacing, SweepAxis};
use eneon_core::hamiltonians::{
    build_rwa_variant, conserved_charges, product_state, squeezing_gaps, ModeOperators, ModelConfig, Variant,
};
use eneon_core::lindblad::{
    build_dissipators, elimination_validation, evolve, evolve_fixed_step, steady_state, DensityMatrix,
    DissipationRates, EvolveOptions, Jump, LindbladModel, SteadyStateMethod, Trajectory,
};
use eneon_core::operators::{fock_ladder, HilbertSpec, OperatorMatrix, StateVector};
use eneon_core::tomography::{negativity_point, NegativityParams};
use eneon_core::Result;
use rayon::prelude::*;

pub const REFERENCE_LAMBDA1_HZ: f64 = 1.1e6;
pub const REFERENCE_LAMBDA2_HZ: f64 = 1.8e6;

/// Reference geometry: `R_K = 50 nm`, `d_K = 10 nm`, `a_z = 0.7e-7 m`.
pub fn reference_device() -> DeviceParams {
    DeviceParams::reference()
}

/// Resonant RWA model with time in units of `1/Λ_variant`; `rates` in units of `Λ`.
pub fn resonant_model(variant: Variant, n_a: usize, n_k: usize, rates: &DissipationRates) -> Result<LindbladModel> {
    resonant_model_for(&reference_device(), variant, n_a, n_k, rates)
}

pub fn resonant_model_for(
    device: &DeviceParams,
    variant: Variant,
    n_a: usize,
    n_k: usize,
    rates: &DissipationRates,
) -> Result<LindbladModel> {
    let spec = HilbertSpec::full(n_a, n_k)?;
    let cs = derive_couplings(device)?;
    let lambda = variant.coupling(&cs);
    let h = build_rwa_variant(&ModelConfig::lab(spec.clone(), cs, variant))?;
    let h = &h * (1.0 / lambda);
    LindbladModel::new(h, build_dissipators(rates, &spec)?)
}

pub fn resonant_initial(model: &LindbladModel, variant: Variant) -> Result<DensityMatrix> {
    let (a, k, up) = variant.resonant_initial_state();
    Ok(DensityMatrix::from_pure(&product_state(model.spec(), a, k, up)?))
}

fn projector(psi: &StateVector) -> Result<OperatorMatrix> {
    OperatorMatrix::outer(psi, psi)
}

/// Largest relative residual of the finite-difference oracle over a geometry grid.
pub fn oracle_max_residual(radii: &[f64], gaps: &[f64]) -> Result<f64> {
    let mut worst = 0f64;
    for &r in radii {
        for &d in gaps {
            let params = DeviceParams { sphere_radius: r, gap: d, ..reference_device() };
            worst = worst.max(coupling_oracle(&params)?.max_residual());
        }
    }
    Ok(worst)
}

/// Worst relative violation of `g_y2 = g_x2/4`, `Λ₁ = Λ₃`, `Λ₂/Λ₁ = 5/3`.
pub fn identity_residual(device: &DeviceParams) -> Result<f64> {
    let cs = derive_couplings(device)?;
    Ok([
        (cs.g_y2 / (cs.g_x2 / 4.0) - 1.0).abs(),
        (cs.lambda3 / cs.lambda1 - 1.0).abs(),
        (cs.lambda2 / cs.lambda1 / (5.0 / 3.0) - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// Log-log slope of `Λ₁` against `R_K` with 41 log-spaced radii.
pub fn scaling_slope(r_min: f64, r_max: f64, gap: f64) -> Result<f64> {
    let template = DeviceParams { gap, ..reference_device() };
    radius_scaling_slope(&template, &SweepAxis { start: r_min, stop: r_max, count: 41, spacing: Spacing::Log })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    /// `|t_peak / t_expected − 1|`.
    pub time_error: f64,
    /// `|1 − P(|2,1,↓⟩)|` at `t_expected`.
    pub population_error: f64,
    pub charge_drift: f64,
    pub max_trace_error: f64,
}

/// Closed variant-1 evolution from `|0,0,↑⟩`, expected full transfer at `Λ₁t = π/(2√2)`.
pub fn transfer(n_a: usize, n_k: usize) -> Result<TransferReport> {
    let model = resonant_model(Variant::One, n_a, n_k, &DissipationRates::default())?;
    let spec = model.spec().clone();
    let target = product_state(&spec, 2, 1, false)?;
    let t_half = PI / (2.0 * SQRT_2);
    let samples = 400;
    let mut opts = EvolveOptions::new(2.0 * t_half, samples).observe("target", projector(&target)?).checkpoints(50, false);
    let charges = conserved_charges(Variant::One, &spec)?;
    for (name, q) in &charges {
        opts = opts.observe(*name, q.clone());
    }
    let traj = evolve(&model, &resonant_initial(&model, Variant::One)?, &opts)?;
    let pop = traj.observable("target").unwrap_or_default();
    let peak = pop.iter().enumerate().fold(0, |b, (k, &p)| if p > pop[b] { k } else { b });
    let mut drift = 0f64;
    for (name, _) in &charges {
        let q = traj.observable(name).unwrap_or_default();
        drift = q.iter().fold(drift, |d, v| d.max((v - q[0]).abs()));
    }
    Ok(TransferReport {
        time_error: (traj.times[peak] / t_half - 1.0).abs(),
        population_error: (1.0 - pop[samples / 2]).abs(),
        charge_drift: drift,
        max_trace_error: max_trace_error(&traj),
    })
}

fn max_trace_error(traj: &Trajectory) -> f64 {
    traj.trace_errors.iter().copied().fold(0.0, f64::max)
}

pub fn local_maxima(series: &[f64]) -> Vec<f64> {
    series.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).map(|w| w[1]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub variant: Variant,
    pub peaks: Vec<f64>,
    pub max_trace_error: f64,
}

impl EnvelopeReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.peaks.len() >= 2 && self.peaks.windows(2).all(|w| w[1] < w[0])
    }
}

/// `⟨σ₊σ₋⟩` maxima with `γ_K = 0.1Λ`, `γ_a = 0.01Λ`, `γ_s = 1e-8Λ` over `Λt ∈ [0, 40]`.
pub fn dissipative_envelope(variant: Variant) -> Result<EnvelopeReport> {
    let rates = DissipationRates::new(0.1, 0.01, 1e-8)?;
    let model = resonant_model(variant, 10, 3, &rates)?;
    let ops = ModeOperators::new(model.spec())?;
    let opts = EvolveOptions::new(40.0, 800).observe("spin", ops.spin_excitation.clone()).checkpoints(100, false);
    let traj = evolve(&model, &resonant_initial(&model, variant)?, &opts)?;
    Ok(EnvelopeReport {
        variant,
        peaks: local_maxima(traj.observable("spin").unwrap_or_default()),
        max_trace_error: max_trace_error(&traj),
    })
}

/// Worst relative deviation of the lowest `count` gaps of the driven quadratic
/// block from `Δ_a / cosh 2r`, with `Δ_a = 1`.
pub fn squeezing_gap_error(r: f64, dim: usize, count: usize) -> Result<f64> {
    let omega_p = (2.0 * r).tanh();
    let expected = 1.0 / (2.0 * r).cosh();
    Ok(squeezing_gaps(1.0, omega_p, dim, count)?.iter().map(|g| (g / expected - 1.0).abs()).fold(0.0, f64::max))
}

/// `Λ₂(R_K = 1 μm)·cosh²(4.1)` in Hz at the reference gap.
pub fn enhanced_lambda2_at_micron() -> Result<f64> {
    let cs = derive_couplings(&DeviceParams { sphere_radius: 1e-6, ..reference_device() })?;
    let c = 4.1f64.cosh();
    Ok(to_hz(cs.lambda2) * c * c)
}

/// Elimination trace distances at `γ_K/Λ₁ = 50` and `200` over `Λ₁t ∈ [0, 20]`.
pub fn elimination(n_a: usize, n_k: usize) -> Result<(f64, f64)> {
    let spec = HilbertSpec::phonon_spin(n_a)?;
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(spec, &[0, 0])?);
    let run = |ratio: f64| elimination_validation(1.0, ratio, &rho0, 20.0, n_k, 40);
    let (d50, d200) = rayon::join(|| run(50.0), || run(200.0));
    Ok((d50?, d200?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    /// `(α, 𝒲)` from `|α⟩ ⊗ |↑⟩`, refined minimum.
    pub up: Vec<(f64, f64)>,
    /// `(α, 𝒲)` from `|α⟩ ⊗ |↓⟩`.
    pub down: Vec<(f64, f64)>,
    /// Steady-state fidelity to `|2⟩` from the vacuum.
    pub vacuum_fidelity: f64,
}

impl NegativityReport {
    pub fn up_increasing(&self) -> bool {
        self.up.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

/// Effective-model steady states at `γ_K = 50Λ₁`.
pub fn negativity_trend(n_phonon: usize, alphas: &[f64]) -> Result<NegativityReport> {
    let base = NegativityParams { n_phonon, ..NegativityParams::default() };
    let down_params = NegativityParams { spin_up: false, ..base };
    let mut jobs: Vec<(f64, bool)> = alphas.iter().map(|&a| (a, true)).collect();
    jobs.extend(alphas.iter().map(|&a| (a, false)));
    jobs.push((0.0, true));
    let points = jobs
        .par_iter()
        .map(|&(a, up)| negativity_point(a, if up { &base } else { &down_params }))
        .collect::<Result<Vec<_>>>()?;
    let k = alphas.len();
    let vac = &points[2 * k];
    let target = StateVector::fock(n_phonon, 2)?.with_spec(vac.steady_state.spec().clone())?;
    Ok(NegativityReport {
        up: points[..k].iter().map(|p| (p.alpha, p.w_min_refined)).collect(),
        down: points[k..2 * k].iter().map(|p| (p.alpha, p.w_min_refined)).collect(),
        vacuum_fidelity: vac.steady_state.fidelity_pure(&target)?,
    })
}

/// Largest trace distance between the adaptive and RK4 integrators on the transfer benchmark.
pub fn integrator_agreement() -> Result<f64> {
    let model = resonant_model(Variant::One, 10, 3, &DissipationRates::default())?;
    let rho0 = resonant_initial(&model, Variant::One)?;
    let opts = EvolveOptions::new(PI / SQRT_2, 10).checkpoints(1, true);
    let a = evolve(&model, &rho0, &opts)?;
    let b = evolve_fixed_step(&model, &rho0, &opts, 2e-3)?;
    let mut worst = 0f64;
    for ((_, x), (_, y)) in a.checkpoints.iter().zip(&b.checkpoints) {
        worst = worst.max(x.trace_distance(y)?);
    }
    Ok(worst)
}

/// Largest trace distance between kernel and long-time steady states on two
/// small models with a unique steady state.
pub fn steady_state_agreement() -> Result<f64> {
    let (a, adag) = fock_ladder(8)?;
    let driven = LindbladModel::new(&(&a + &adag) * 0.4, vec![Jump { rate: 1.0, operator: a }])?;
    let rates = DissipationRates::new(0.5, 0.2, 0.05)?;
    let tripartite = resonant_model(Variant::One, 5, 2, &rates)?;
    let mut worst = 0f64;
    for model in [driven, tripartite] {
        let k = steady_state(&model, &SteadyStateMethod::Kernel)?;
        let l = steady_state(&model, &SteadyStateMethod::LongTime { initial: None, residual_tol: 1e-11 })?;
        worst = worst.max(k.trace_distance(&l)?);
    }
    Ok(worst)
}

/// Hermiticity error and minimum eigenvalue over checkpoints of the dissipative benchmarks.
pub fn integrity_extremes() -> Result<(f64, f64)> {
    let rates = DissipationRates::new(0.1, 0.01, 1e-8)?;
    let mut herm = 0f64;
    let mut min_eig = f64::INFINITY;
    for variant in [Variant::One, Variant::Two, Variant::Three] {
        let model = resonant_model(variant, 10, 3, &rates)?;
        let opts = EvolveOptions::new(40.0, 40).checkpoints(1, true);
        let traj = evolve(&model, &resonant_initial(&model, variant)?, &opts)?;
        for (_, rho) in &traj.checkpoints {
            herm = herm.max(rho.hermiticity_error());
            min_eig = min_eig.min(rho.min_eigenvalue()?);
        }
    }
    Ok((herm, min_eig))
}
