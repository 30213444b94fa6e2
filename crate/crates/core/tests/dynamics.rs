use core::f64::consts::{PI, SQRT_2};

use eneon_core::device::{derive_couplings, DeviceParams};
use eneon_core::hamiltonians::{
    build_rwa_variant, conserved_charges, product_state, ModeOperators, ModelConfig, Variant,
};
use eneon_core::lindblad::*;
use eneon_core::operators::{fock_ladder, HilbertSpec, OperatorMatrix, StateVector, Subsystem};
use eneon_core::C64;

fn resonant_model(variant: Variant, na: usize, nk: usize, rates: DissipationRates) -> (LindbladModel, HilbertSpec) {
    let spec = HilbertSpec::full(na, nk).unwrap();
    let cs = derive_couplings(&DeviceParams::reference()).unwrap();
    let cfg = ModelConfig::lab(spec.clone(), cs, variant);
    let h = build_rwa_variant(&cfg).unwrap();
    let lambda = variant.coupling(&cs);
    let jumps = build_dissipators(&rates, &spec).unwrap();
    let model = LindbladModel::new(h, jumps).unwrap().rescaled(lambda).unwrap();
    (model, spec)
}

fn projector(psi: &StateVector) -> OperatorMatrix {
    OperatorMatrix::outer(psi, psi).unwrap()
}

#[test]
fn variant_one_full_transfer() {
    let (model, spec) = resonant_model(Variant::One, 10, 3, DissipationRates::default());
    let start = product_state(&spec, 0, 0, true).unwrap();
    let target = product_state(&spec, 2, 1, false).unwrap();
    let t_half = PI / (2.0 * SQRT_2);
    let samples = 400;
    let opts = EvolveOptions::new(2.0 * t_half, samples)
        .observe("target", projector(&target))
        .observe("start", projector(&start))
        .checkpoints(50, false);
    let traj = evolve(&model, &DensityMatrix::from_pure(&start), &opts).unwrap();
    let pop = traj.observable("target").unwrap();
    let (k, peak) = pop.iter().copied().enumerate().fold((0, 0.0), |b, (k, p)| if p > b.1 { (k, p) } else { b });
    assert!((traj.times[k] / t_half - 1.0).abs() < 0.01);
    assert!((pop[samples / 2] - 1.0).abs() < 1e-4, "peak {peak}");
    assert!((traj.observable("start").unwrap()[samples] - 1.0).abs() < 1e-4);
}

#[test]
fn closed_dynamics_conserve_charges() {
    for variant in [Variant::One, Variant::Two, Variant::Three] {
        let (model, spec) = resonant_model(variant, 10, 3, DissipationRates::default());
        let (a, k, up) = variant.resonant_initial_state();
        let psi = product_state(&spec, a, k, up).unwrap();
        let mut opts = EvolveOptions::new(PI / SQRT_2, 20);
        let charges = conserved_charges(variant, &spec).unwrap();
        for (name, q) in &charges {
            opts = opts.observe(*name, q.clone()).observe(format!("{name}^2"), q.matmul(q));
        }
        let traj = evolve(&model, &DensityMatrix::from_pure(&psi), &opts).unwrap();
        for (name, _) in &charges {
            let mean = traj.observable(name).unwrap();
            let sq = traj.observable(&format!("{name}^2")).unwrap();
            for i in 0..mean.len() {
                assert!((mean[i] - mean[0]).abs() < 1e-8, "{variant:?} {name}");
                let var = sq[i] - mean[i] * mean[i];
                assert!(var.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn adaptive_and_rk4_agree_on_benchmark() {
    let (model, spec) = resonant_model(Variant::One, 10, 3, DissipationRates::default());
    let rho0 = DensityMatrix::from_pure(&product_state(&spec, 0, 0, true).unwrap());
    let opts = EvolveOptions::new(PI / SQRT_2, 10).checkpoints(1, true);
    let a = evolve(&model, &rho0, &opts).unwrap();
    let b = evolve_fixed_step(&model, &rho0, &opts, 2e-3).unwrap();
    for ((_, x), (_, y)) in a.checkpoints.iter().zip(&b.checkpoints) {
        assert!(x.trace_distance(y).unwrap() < 1e-6);
    }
}

fn local_maxima(series: &[f64]) -> Vec<f64> {
    series.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).map(|w| w[1]).collect()
}

#[test]
fn dissipative_envelope_decreases() {
    let rates = DissipationRates::new(0.1, 0.01, 1e-8).unwrap();
    for variant in [Variant::One, Variant::Two, Variant::Three] {
        let (model, spec) = resonant_model(variant, 10, 3, DissipationRates::default());
        // rates are given in units of Λ, so attach them after rescaling
        let jumps = build_dissipators(&rates, &spec).unwrap();
        let model = LindbladModel::new(model.hamiltonian().clone(), jumps).unwrap();
        let ops = ModeOperators::new(&spec).unwrap();
        let (a, k, up) = variant.resonant_initial_state();
        let rho0 = DensityMatrix::from_pure(&product_state(&spec, a, k, up).unwrap());
        let opts = EvolveOptions::new(40.0, 800).observe("spin", ops.spin_excitation.clone()).checkpoints(100, false);
        let traj = evolve(&model, &rho0, &opts).unwrap();
        let spin = traj.observable("spin").unwrap();
        let peaks = if up { local_maxima(spin) } else { local_maxima(&spin.iter().map(|v| -v).collect::<Vec<_>>()) };
        assert!(peaks.len() >= 3, "{variant:?}");
        assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{variant:?}: {peaks:?}");
        assert!(traj.trace_errors.iter().all(|&e| e < 1e-9));
    }
}

#[test]
fn decay_fidelity_to_dark_state_is_monotone() {
    let n = 6;
    let (a, adag) = fock_ladder(n).unwrap();
    let h = &(&a + &adag) * 0.0;
    let model = LindbladModel::new(h, vec![Jump { rate: 0.7, operator: a }]).unwrap();
    let vac = StateVector::fock(n, 0).unwrap();
    let opts = EvolveOptions::new(8.0, 40).observe("vac", projector(&vac));
    let rho0 = DensityMatrix::from_pure(&StateVector::fock(n, 4).unwrap());
    let traj = evolve(&model, &rho0, &opts).unwrap();
    let f = traj.observable("vac").unwrap();
    assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn effective_steady_state_spin_is_down() {
    let spec = HilbertSpec::phonon_spin(20).unwrap();
    let model = adiabatic_effective_model(1.0, 50.0, &spec).unwrap();
    let psi = eneon_core::operators::coherent_state(C64::new(0.3, 0.0), 20)
        .unwrap()
        .tensor(&StateVector::spin_up())
        .with_spec(spec.clone())
        .unwrap();
    let ss = steady_state(&model, &SteadyStateMethod::long_time_from(DensityMatrix::from_pure(&psi))).unwrap();
    let sz = eneon_core::operators::embed_on(
        &eneon_core::operators::pauli(eneon_core::operators::Pauli::Z),
        Subsystem::Spin,
        &spec,
    )
    .unwrap();
    assert!((ss.expectation(&sz).unwrap().re + 1.0).abs() < 1e-6);
    // The eliminated model's kernel is degenerate (every ↓ state is dark).
    let small = adiabatic_effective_model(1.0, 50.0, &HilbertSpec::phonon_spin(6).unwrap()).unwrap();
    assert!(matches!(
        steady_state(&small, &SteadyStateMethod::Kernel),
        Err(eneon_core::Error::NonUniqueSteadyState { .. })
    ));
}

/// Closed form for `L = a†²σ₋` from `Σ c_n|n⟩ ⊗ |↑⟩`: the coherence between
/// `|n+2⟩` and `|m+2⟩` survives with weight `2√(k_n k_m)/(k_n + k_m)`,
/// `k_n = (n+1)(n+2)`.
#[test]
fn effective_steady_state_matches_closed_form() {
    let n = 22;
    let spec = HilbertSpec::phonon_spin(n).unwrap();
    let model = adiabatic_effective_model(1.0, 40.0, &spec).unwrap();
    let alpha = C64::new(0.5, 0.2);
    let coh = eneon_core::operators::coherent_state(alpha, n).unwrap();
    let psi = coh.tensor(&StateVector::spin_up()).with_spec(spec.clone()).unwrap();
    let ss = steady_state(&model, &SteadyStateMethod::long_time_from(DensityMatrix::from_pure(&psi))).unwrap();
    let c = coh.amplitudes();
    let k = |j: usize| ((j + 1) * (j + 2)) as f64;
    let mut worst = 0f64;
    for p in 0..n - 2 {
        for q in 0..n - 2 {
            let want = c[p] * c[q].conj() * (2.0 * (k(p) * k(q)).sqrt() / (k(p) + k(q)));
            let i = spec.index(&[p + 2, 1]);
            let j = spec.index(&[q + 2, 1]);
            worst = worst.max((ss.get(i, j) - want).norm());
        }
    }
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn elimination_converges_with_gamma() {
    let spec = HilbertSpec::phonon_spin(10).unwrap();
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(spec, &[0, 0]).unwrap());
    let d50 = elimination_validation(1.0, 50.0, &rho0, 20.0, 3, 40).unwrap();
    let d200 = elimination_validation(1.0, 200.0, &rho0, 20.0, 3, 40).unwrap();
    assert!(d50 <= 0.05, "{d50}");
    assert!(d200 < d50);
}
