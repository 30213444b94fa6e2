use core::f64::consts::FRAC_2_PI;

use eneon_core::device::{derive_couplings, DeviceParams};
use eneon_core::hamiltonians::{build_kos, build_nonlinear_full, squeeze_frame, Drive, Frame, ModelConfig, Variant};
use eneon_core::lindblad::{evolve, DensityMatrix, EvolveOptions, Jump, LindbladModel};
use eneon_core::operators::{displacement, fock_ladder, HilbertSpec, StateVector, Subsystem};
use eneon_core::special::{factorial, laguerre};
use eneon_core::tomography::{
    added_state_norm, parity_value, phonon_added_coherent, wigner, PhaseSpaceGrid, WignerEvaluator,
};
use eneon_core::{C64, ZERO};
use proptest::prelude::*;

fn random_state(dim: usize, re: &[f64], im: &[f64]) -> Option<StateVector> {
    let mut amps = vec![ZERO; dim];
    for (k, (r, i)) in re.iter().zip(im).enumerate() {
        amps[k] = C64::new(*r, *i);
    }
    StateVector::new(HilbertSpec::phonon(dim).unwrap(), amps).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn builders_are_hermitian(gx in -1e6f64..1e6, gy in -1e6f64..1e6, l2 in 0.0f64..1e6, op in 0.0f64..1e5) {
        let mut cs = derive_couplings(&DeviceParams::reference()).unwrap();
        cs.g_x2 = gx;
        cs.g_y2 = gy;
        cs.lambda2 = l2;
        let spec = HilbertSpec::full(5, 3).unwrap();
        let h = build_nonlinear_full(&ModelConfig::lab(spec.clone(), cs, Variant::One)).unwrap();
        prop_assert!(h.hermiticity_error() <= 1e-12 * h.max_abs().max(1.0));
        let cfg = ModelConfig {
            spec,
            couplings: cs,
            variant: Variant::Two,
            frame: Frame::Rotating,
            drive: Some(Drive { strength: op, frequency: 0.9 * cs.omega_a }),
        };
        let h = build_kos(&cfg).unwrap();
        prop_assert!(h.hermiticity_error() <= 1e-12 * h.max_abs().max(1.0));
    }

    #[test]
    fn squeeze_frame_round_trip(ratio in 0.0f64..0.999, delta in 0.1f64..10.0) {
        let f = squeeze_frame(ratio * delta, delta, 1.0).unwrap();
        prop_assert!((f.drive_ratio() - ratio).abs() < 1e-12);
        prop_assert!(f.enhancement() >= 1.0);
    }

    #[test]
    fn added_norm_closed_form(alpha in 0.0f64..1.5, m in 0usize..=4) {
        // Σ_n e^{−|α|²} |α|^{2n}/n! · (n+1)…(n+m) = m! L_m(−|α|²)
        let x = alpha * alpha;
        let mut sum = 0.0;
        for n in 0..80 {
            let lift: f64 = (n + 1..=n + m).map(|j| j as f64).product();
            sum += (-x).exp() * x.powi(n as i32) / factorial(n) * lift;
        }
        let closed = added_state_norm(alpha, m);
        prop_assert!((sum.powf(-0.5) - closed).abs() < 1e-10);
        prop_assert!((closed * closed * factorial(m) * laguerre(m, 0.0, -x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_normalization_and_parity(re in -1.0f64..1.0, im in -1.0f64..1.0, m in 0usize..=3) {
        let psi = phonon_added_coherent(C64::new(re, im), m, 30).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let map = wigner(&rho, &PhaseSpaceGrid::default()).unwrap();
        prop_assert!((map.integral() - 1.0).abs() < 0.01);
        prop_assert!(map.negativity >= -FRAC_2_PI - 1e-12);
        let ev = WignerEvaluator::new(&rho).unwrap();
        prop_assert!((ev.at(ZERO) - parity_value(&rho).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn negativity_bounded_by_parity(re in prop::collection::vec(-1.0f64..1.0, 6), im in prop::collection::vec(-1.0f64..1.0, 6)) {
        if let Some(psi) = random_state(12, &re, &im) {
            let rho = DensityMatrix::from_pure(&psi);
            let grid = PhaseSpaceGrid::new((-2.0, 2.0), (-2.0, 2.0), 21, 21).unwrap();
            prop_assert!(wigner(&rho, &grid).unwrap().negativity >= -FRAC_2_PI - 1e-12);
        }
    }

    #[test]
    fn displacement_covariance(br in -0.7f64..0.7, bi in -0.7f64..0.7, n in 0usize..3) {
        let dim = 32;
        let beta = C64::new(br, bi);
        let base = StateVector::fock(dim, n).unwrap();
        let d = displacement(beta, dim, 40).unwrap();
        let shifted = d.apply(&base).with_spec(HilbertSpec::phonon(dim).unwrap()).unwrap();
        let w0 = WignerEvaluator::new(&DensityMatrix::from_pure(&base.with_spec(HilbertSpec::phonon(dim).unwrap()).unwrap())).unwrap();
        let w1 = WignerEvaluator::new(&DensityMatrix::from_pure(&shifted)).unwrap();
        for a in [C64::new(0.0, 0.0), C64::new(0.5, -0.3), C64::new(-0.8, 0.6)] {
            prop_assert!((w1.at(a + beta) - w0.at(a)).abs() < 1e-6);
        }
    }

    #[test]
    fn evolution_keeps_invariants(w in 0.0f64..2.0, f in 0.0f64..0.5, g in 0.0f64..1.0, n0 in 0usize..4) {
        let dim = 6;
        let (a, adag) = fock_ladder(dim).unwrap();
        let h = &(&adag.matmul(&a) * w) + &(&(&a + &adag) * f);
        let model = LindbladModel::new(h, vec![Jump { rate: g, operator: a }]).unwrap();
        let rho0 = DensityMatrix::from_pure(&StateVector::fock(dim, n0).unwrap());
        let traj = evolve(&model, &rho0, &EvolveOptions::new(3.0, 6).checkpoints(1, true)).unwrap();
        for (_, rho) in &traj.checkpoints {
            prop_assert!(rho.trace_error() <= 1e-9);
            prop_assert!(rho.hermiticity_error() <= 1e-10);
            prop_assert!(rho.min_eigenvalue().unwrap() >= -1e-8);
        }
    }

    #[test]
    fn partial_trace_preserves_trace(re in prop::collection::vec(-1.0f64..1.0, 12), im in prop::collection::vec(-1.0f64..1.0, 12)) {
        let spec = HilbertSpec::full(3, 2).unwrap();
        let amps: Vec<C64> = re.iter().zip(&im).map(|(r, i)| C64::new(*r, *i)).collect();
        if let Ok(psi) = StateVector::new(spec, amps) {
            let rho = DensityMatrix::from_pure(&psi);
            for keep in [&[Subsystem::Phonon][..], &[Subsystem::Spin], &[Subsystem::Phonon, Subsystem::Magnon]] {
                let r = rho.reduce_to(keep).unwrap();
                prop_assert!((r.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }
}
