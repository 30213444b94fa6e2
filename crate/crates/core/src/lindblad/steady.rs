use alloc::format;
use alloc::vec;

use super::{evolve, DensityMatrix, EvolveOptions, LindbladModel};
use crate::error::{Error, Result};
use crate::linalg::{self, FullPivotLu};
use crate::operators::OperatorMatrix;
use crate::{C64, ONE, ZERO};

/// Largest Hilbert-space dimension accepted by the dense kernel method; the
/// superoperator has `dim⁴` complex entries.
pub const KERNEL_MAX_DIM: usize = 40;

const RANK_TOL: f64 = 1e-10;

/// How [`steady_state`] locates `ρ_ss`.
#[derive(Debug, Clone)]
pub enum SteadyStateMethod {
    /// Null space of the dense Liouvillian.
    Kernel,
    /// Integrate until `‖ρ̇‖_F ≤ residual_tol · ‖𝓛‖`, starting from `initial`
    /// (maximally mixed when absent).
    LongTime { initial: Option<DensityMatrix>, residual_tol: f64 },
}

impl SteadyStateMethod {
    pub fn long_time() -> Self {
        SteadyStateMethod::LongTime { initial: None, residual_tol: 1e-9 }
    }

    pub fn long_time_from(rho: DensityMatrix) -> Self {
        SteadyStateMethod::LongTime { initial: Some(rho), residual_tol: 1e-9 }
    }
}

pub fn steady_state(model: &LindbladModel, method: &SteadyStateMethod) -> Result<DensityMatrix> {
    match method {
        SteadyStateMethod::Kernel => kernel(model),
        SteadyStateMethod::LongTime { initial, residual_tol } => {
            let init = match initial {
                Some(rho) => {
                    if rho.dim() != model.dim() {
                        return Err(Error::DimensionMismatch { expected: model.dim(), found: rho.dim() });
                    }
                    rho.clone()
                }
                None => DensityMatrix::maximally_mixed(model.spec().clone()),
            };
            long_time(model, init, *residual_tol)
        }
    }
}

fn kernel(model: &LindbladModel) -> Result<DensityMatrix> {
    let n = model.dim();
    if n > KERNEL_MAX_DIM {
        return Err(Error::KernelTooLarge { dim: n, max: KERNEL_MAX_DIM });
    }
    let m = n * n;
    let mut gen = model.generator();
    let mut sup = vec![ZERO; m * m];
    let mut basis = vec![ZERO; m];
    let mut col = vec![ZERO; m];
    for c in 0..m {
        basis[c] = ONE;
        gen.apply(&basis, &mut col);
        basis[c] = ZERO;
        for (r, v) in col.iter().enumerate() {
            sup[r * m + c] = *v;
        }
    }
    let lu = FullPivotLu::new(m, &sup, RANK_TOL);
    let v = lu.kernel_vector().ok_or(Error::NonUniqueSteadyState { kernel_dim: lu.nullity() })?;
    let tr: C64 = (0..n).map(|i| v[i * n + i]).sum();
    if tr.norm() < 1e-300 {
        return Err(Error::NotConverged("kernel vector is traceless".into()));
    }
    let mut data = vec![ZERO; m];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = 0.5 * (v[i * n + j] / tr + (v[j * n + i] / tr).conj());
        }
    }
    DensityMatrix::new(OperatorMatrix::from_vec(model.spec().clone(), data)?)
}

fn long_time(model: &LindbladModel, mut rho: DensityMatrix, tol: f64) -> Result<DensityMatrix> {
    let norm = model.liouvillian_norm();
    if norm == 0.0 {
        return Ok(rho);
    }
    let mut chunk = 10.0 / norm;
    for _ in 0..80 {
        if residual(model, &rho)? <= tol * norm {
            return Ok(rho);
        }
        let opts = EvolveOptions::new(chunk, 1).tolerances(1e-11, 1e-13);
        rho = evolve(model, &rho, &opts)?.final_state;
        chunk *= 2.0;
    }
    Err(Error::NotConverged(format!("residual {:.3e} after long-time integration", residual(model, &rho)?)))
}

/// `‖𝓛ρ‖_F`.
pub(crate) fn residual(model: &LindbladModel, rho: &DensityMatrix) -> Result<f64> {
    Ok(linalg::frobenius(model.rhs(rho)?.data()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::Jump;
    use crate::operators::{fock_ladder, number, pauli, Pauli, StateVector};

    fn decay_model(n: usize) -> LindbladModel {
        let (a, _) = fock_ladder(n).unwrap();
        LindbladModel::new(OperatorMatrix::zeros(a.spec().clone()), vec![Jump { rate: 1.0, operator: a }])
            .unwrap()
    }

    #[test]
    fn decay_to_vacuum() {
        let vac = StateVector::fock(5, 0).unwrap();
        for method in [SteadyStateMethod::Kernel, SteadyStateMethod::long_time()] {
            let rho = steady_state(&decay_model(5), &method).unwrap();
            assert!((rho.fidelity_pure(&vac).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_system_is_not_unique() {
        let model = LindbladModel::closed(pauli(Pauli::Z)).unwrap();
        assert!(matches!(
            steady_state(&model, &SteadyStateMethod::Kernel),
            Err(Error::NonUniqueSteadyState { kernel_dim: 2 })
        ));
    }

    #[test]
    fn kernel_guard() {
        let (a, _) = fock_ladder(41).unwrap();
        let model =
            LindbladModel::new(OperatorMatrix::zeros(a.spec().clone()), vec![Jump { rate: 1.0, operator: a }])
                .unwrap();
        assert!(matches!(steady_state(&model, &SteadyStateMethod::Kernel), Err(Error::KernelTooLarge { .. })));
    }

    #[test]
    fn driven_damped_oscillator_methods_agree() {
        let n = 8;
        let (a, adag) = fock_ladder(n).unwrap();
        let h = &(&number(n).unwrap() * 0.5) + &(&(&a + &adag) * 0.3);
        let model = LindbladModel::new(h, vec![Jump { rate: 0.8, operator: a }]).unwrap();
        let k = steady_state(&model, &SteadyStateMethod::Kernel).unwrap();
        let l = steady_state(&model, &SteadyStateMethod::long_time()).unwrap();
        assert!(k.trace_distance(&l).unwrap() < 1e-6);
        assert!(residual(&model, &k).unwrap() <= 1e-9 * model.liouvillian_norm());
    }
}
