//! Markovian open-system engine: `ρ̇ = −i[H, ρ] + Σ γ D[L]ρ`.

mod density;
mod effective;
mod integrate;
mod steady;

use alloc::vec;
use alloc::vec::Vec;

pub use density::{DensityMatrix, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use effective::{adiabatic_effective_model, elimination_validation, full_variant_one_model};
pub use integrate::{evolve, evolve_fixed_step, EvolveOptions, Trajectory};
pub use steady::{steady_state, SteadyStateMethod, KERNEL_MAX_DIM};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{embed_on, fock_ladder, pauli, HilbertSpec, OperatorMatrix, Pauli, Subsystem};
use crate::sparse::SparseOp;
use crate::{C64, I, ONE, ZERO};

/// Zero-temperature dissipation rates, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DissipationRates {
    /// Magnon decay `γ_K`.
    pub gamma_k: f64,
    /// Motional decay `γ_a`.
    pub gamma_a: f64,
    /// Spin dephasing `γ_s` (1/T₂).
    pub gamma_s: f64,
}

impl DissipationRates {
    pub fn new(gamma_k: f64, gamma_a: f64, gamma_s: f64) -> Result<Self> {
        for (name, value) in [("gamma_K", gamma_k), ("gamma_a", gamma_a), ("gamma_s", gamma_s)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidRate { name, value });
            }
        }
        Ok(DissipationRates { gamma_k, gamma_a, gamma_s })
    }

    pub fn max_rate(&self) -> f64 {
        self.gamma_k.max(self.gamma_a).max(self.gamma_s)
    }
}

/// A collapse channel `γ D[L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

/// Jump list for the magnon, phonon and spin baths, in that order.
///
/// Dephasing uses `L = σ_z` at rate `γ_s/2`, so spin coherences decay as
/// `exp(−γ_s t)`. Zero rates and factors absent from `spec` are skipped.
pub fn build_dissipators(rates: &DissipationRates, spec: &HilbertSpec) -> Result<Vec<Jump>> {
    let rates = DissipationRates::new(rates.gamma_k, rates.gamma_a, rates.gamma_s)?;
    let mut jumps = Vec::new();
    let ladder = |role| -> Result<Option<OperatorMatrix>> {
        match spec.dim_of(role) {
            Some(d) => Ok(Some(embed_on(&fock_ladder(d)?.0, role, spec)?)),
            None => Ok(None),
        }
    };
    if rates.gamma_k > 0.0 {
        if let Some(s) = ladder(Subsystem::Magnon)? {
            jumps.push(Jump { rate: rates.gamma_k, operator: s });
        }
    }
    if rates.gamma_a > 0.0 {
        if let Some(a) = ladder(Subsystem::Phonon)? {
            jumps.push(Jump { rate: rates.gamma_a, operator: a });
        }
    }
    if rates.gamma_s > 0.0 && spec.slot(Subsystem::Spin).is_some() {
        let sz = embed_on(&pauli(Pauli::Z), Subsystem::Spin, spec)?;
        jumps.push(Jump { rate: 0.5 * rates.gamma_s, operator: sz });
    }
    Ok(jumps)
}

/// Hamiltonian plus collapse channels on one Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: OperatorMatrix,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(hamiltonian: OperatorMatrix, jumps: Vec<Jump>) -> Result<Self> {
        let hamiltonian = hamiltonian.into_hermitian()?;
        for j in &jumps {
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidRate { name: "jump rate", value: j.rate });
            }
            if j.operator.spec() != hamiltonian.spec() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: j.operator.dim() });
            }
        }
        Ok(LindbladModel { hamiltonian, jumps })
    }

    pub fn closed(hamiltonian: OperatorMatrix) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn spec(&self) -> &HilbertSpec {
        self.hamiltonian.spec()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Same dynamics with time measured in units of `1/unit`: `H` and every
    /// rate are divided by `unit`.
    pub fn rescaled(&self, unit: f64) -> Result<Self> {
        if !(unit > 0.0 && unit.is_finite()) {
            return Err(Error::InvalidArgument("time unit must be positive".into()));
        }
        let h = &self.hamiltonian * (1.0 / unit);
        let jumps = self.jumps.iter().map(|j| Jump { rate: j.rate / unit, operator: j.operator.clone() }).collect();
        Self::new(h, jumps)
    }

    /// Upper bound on the Liouvillian norm from operator 1-norms.
    pub fn liouvillian_norm(&self) -> f64 {
        let n = self.dim();
        let mut bound = 2.0 * linalg::norm1(n, self.hamiltonian.data());
        for j in &self.jumps {
            let l = linalg::norm1(n, j.operator.data());
            bound += 2.0 * j.rate * l * l;
        }
        bound
    }

    pub(crate) fn generator(&self) -> Generator {
        let n = self.dim();
        // K = −iH − ½ Σ γ L†L
        let mut k: Vec<C64> = self.hamiltonian.data().iter().map(|h| -I * h).collect();
        for j in &self.jumps {
            let ldl = j.operator.dag().matmul(&j.operator);
            for (kk, v) in k.iter_mut().zip(ldl.data()) {
                *kk -= 0.5 * j.rate * v;
            }
        }
        let jumps = self
            .jumps
            .iter()
            .filter(|j| j.rate > 0.0)
            .map(|j| (j.rate, j.operator.to_sparse()))
            .collect();
        Generator { k: SparseOp::from_dense(n, &k), jumps, scratch: vec![ZERO; n * n] }
    }

    /// `ρ̇` for a given state.
    pub fn rhs(&self, rho: &DensityMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        let mut gen = self.generator();
        let mut out = vec![ZERO; rho.data().len()];
        gen.apply(rho.data(), &mut out);
        OperatorMatrix::from_vec(self.spec().clone(), out)
    }
}

/// Matrix-free Liouvillian action `ρ ↦ Kρ + ρK† + Σ γ LρL†`.
pub(crate) struct Generator {
    k: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
    scratch: Vec<C64>,
}

impl Generator {
    pub(crate) fn apply(&mut self, rho: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        self.k.left_mul_acc(rho, ONE, out);
        self.k.right_mul_adjoint_acc(rho, ONE, out);
        for (rate, l) in &self.jumps {
            l.sandwich_acc(rho, C64::new(*rate, 0.0), &mut self.scratch, out);
        }
    }
}
