use alloc::vec;

use super::{evolve, DensityMatrix, EvolveOptions, Jump, LindbladModel};
use crate::error::{Error, Result};
use crate::hamiltonians::ModeOperators;
use crate::operators::{embed_on, fock_ladder, pauli, HilbertSpec, OperatorMatrix, Pauli, Subsystem};
use crate::ZERO;

fn phonon_spin_dims(spec: &HilbertSpec) -> Result<usize> {
    let ok = spec.dims().len() == 2 && spec.role(0) == Some(Subsystem::Phonon) && spec.role(1) == Some(Subsystem::Spin);
    if !ok {
        return Err(Error::InvalidArgument("expected a phonon ⊗ spin space".into()));
    }
    Ok(spec.dims()[0])
}

/// Magnon-eliminated model on `phonon ⊗ spin`: `H = 0` and the single channel
/// `(4Λ₁²/γ_K) D[a†² σ₋]`.
pub fn adiabatic_effective_model(lambda1: f64, gamma_k: f64, spec: &HilbertSpec) -> Result<LindbladModel> {
    if !(gamma_k > 0.0 && gamma_k.is_finite()) {
        return Err(Error::InvalidRate { name: "gamma_K", value: gamma_k });
    }
    let na = phonon_spin_dims(spec)?;
    let (_, adag) = fock_ladder(na)?;
    let adag = embed_on(&adag, Subsystem::Phonon, spec)?;
    let sm = embed_on(&pauli(Pauli::Minus), Subsystem::Spin, spec)?;
    let jump = adag.matmul(&adag).matmul(&sm);
    let rate = 4.0 * lambda1 * lambda1 / gamma_k;
    LindbladModel::new(OperatorMatrix::zeros(spec.clone()), vec![Jump { rate, operator: jump }])
}

/// Resonant variant-1 coupling `Λ₁(a² s σ₊ + h.c.)` with magnon decay `γ_K`.
pub fn full_variant_one_model(lambda1: f64, gamma_k: f64, spec: &HilbertSpec) -> Result<LindbladModel> {
    if !(gamma_k >= 0.0 && gamma_k.is_finite()) {
        return Err(Error::InvalidRate { name: "gamma_K", value: gamma_k });
    }
    let ops = ModeOperators::new(spec)?;
    let a2 = ops.a.matmul(&ops.a);
    let raise = a2.matmul(&ops.s).matmul(&ops.sigma_plus);
    let h = &(&raise + &raise.dag()) * lambda1;
    LindbladModel::new(h, vec![Jump { rate: gamma_k, operator: ops.s }])
}

/// Insert a magnon vacuum into a `phonon ⊗ spin` state.
fn with_magnon_vacuum(rho: &DensityMatrix, nk: usize) -> Result<DensityMatrix> {
    let na = phonon_spin_dims(rho.spec())?;
    let full = HilbertSpec::full(na, nk)?;
    let n = full.total_dim();
    let mut data = vec![ZERO; n * n];
    let m = 2 * na;
    for r in 0..m {
        for c in 0..m {
            let i = full.index(&[r / 2, 0, r % 2]);
            let j = full.index(&[c / 2, 0, c % 2]);
            data[i * n + j] = rho.get(r, c);
        }
    }
    Ok(DensityMatrix::unchecked(full, data))
}

/// Maximum trace distance between the reduced `phonon ⊗ spin` state of the
/// full variant-1 model (magnon starting in vacuum, `n_k` levels) and the
/// eliminated model, over `samples` equally spaced times in `[0, t_final]`.
pub fn elimination_validation(
    lambda1: f64,
    gamma_ratio: f64,
    rho0: &DensityMatrix,
    t_final: f64,
    n_k: usize,
    samples: usize,
) -> Result<f64> {
    if !(gamma_ratio >= 10.0) {
        return Err(Error::InvalidArgument("elimination requires gamma_K / Lambda_1 >= 10".into()));
    }
    if lambda1 == 0.0 {
        return Ok(0.0);
    }
    let gamma_k = gamma_ratio * lambda1.abs();
    let effective = adiabatic_effective_model(lambda1, gamma_k, rho0.spec())?;
    let full_rho0 = with_magnon_vacuum(rho0, n_k)?;
    let full = full_variant_one_model(lambda1, gamma_k, full_rho0.spec())?;
    let opts = EvolveOptions::new(t_final, samples).checkpoints(1, true);
    let traj_full = evolve(&full, &full_rho0, &opts)?;
    let traj_eff = evolve(&effective, rho0, &opts)?;
    let mut worst = 0f64;
    for ((_, f), (_, e)) in traj_full.checkpoints.iter().zip(&traj_eff.checkpoints) {
        let reduced = f.reduce_to(&[Subsystem::Phonon, Subsystem::Spin])?;
        worst = worst.max(reduced.trace_distance(e)?);
    }
    Ok(worst)
}
