use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{HilbertSpec, OperatorMatrix, StateVector, Subsystem};
use crate::{C64, ZERO};

/// Maximum `|ρ_ij − conj(ρ_ji)|` accepted by [`DensityMatrix::new`].
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Maximum `|Tr ρ − 1|`.
pub const TRACE_TOL: f64 = 1e-9;
/// Minimum eigenvalue allowed.
pub const POSITIVITY_TOL: f64 = -1e-8;

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let rho = Self::unchecked(op.spec().clone(), op.into_data());
        rho.check_cheap(0.0)?;
        let min = rho.min_eigenvalue()?;
        if min < POSITIVITY_TOL {
            return Err(Error::Integrity { t: 0.0, what: "min eigenvalue", value: min });
        }
        Ok(rho)
    }

    pub(crate) fn unchecked(spec: HilbertSpec, data: Vec<C64>) -> Self {
        DensityMatrix { spec, data }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let amps = psi.amplitudes();
        let n = amps.len();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = amps[i] * amps[j].conj();
            }
        }
        Self::unchecked(psi.spec().clone(), data)
    }

    pub fn maximally_mixed(spec: HilbertSpec) -> Self {
        let n = spec.total_dim();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0 / n as f64, 0.0);
        }
        Self::unchecked(spec, data)
    }

    /// Convex mixture `Σ p_k ρ_k`; the weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?.1;
        let mut data = vec![ZERO; first.data.len()];
        for (p, rho) in parts {
            if rho.spec != first.spec {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: rho.dim() });
            }
            for (d, r) in data.iter_mut().zip(&rho.data) {
                *d += r * *p;
            }
        }
        Self::new(OperatorMatrix::from_vec(first.spec.clone(), data)?)
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.total_dim()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_vec(self.spec.clone(), self.data.clone()).expect("shape is consistent")
    }

    pub fn trace(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - crate::ONE).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Trace and Hermiticity checks, reported at time `t`.
    pub(crate) fn check_cheap(&self, t: f64) -> Result<()> {
        let tr = self.trace_error();
        if !(tr <= TRACE_TOL) {
            return Err(Error::Integrity { t, what: "trace error", value: tr });
        }
        let h = self.hermiticity_error();
        if !(h <= HERMITICITY_TOL) {
            return Err(Error::Integrity { t, what: "hermiticity error", value: h });
        }
        Ok(())
    }

    pub(crate) fn check_full(&self, t: f64) -> Result<()> {
        self.check_cheap(t)?;
        let min = self.min_eigenvalue()?;
        if min < POSITIVITY_TOL {
            return Err(Error::Integrity { t, what: "min eigenvalue", value: min });
        }
        Ok(())
    }

    fn hermitian_data(&self) -> Vec<C64> {
        let n = self.dim();
        let mut h = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
            }
        }
        h
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.dim(), &self.hermitian_data())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr(A ρ)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        let n = self.dim();
        if op.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: op.dim() });
        }
        let a = op.data();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += a[i * n + k] * self.data[k * n + i];
            }
        }
        Ok(acc)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_pure(&self, psi: &StateVector) -> Result<f64> {
        let n = self.dim();
        if psi.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: psi.dim() });
        }
        let v = psi.amplitudes();
        let mut acc = ZERO;
        for i in 0..n {
            let row: C64 = (0..n).map(|j| self.data[i * n + j] * v[j]).sum();
            acc += v[i].conj() * row;
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let n = self.dim();
        let mut diff = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let a = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
                let b = 0.5 * (other.data[i * n + j] + other.data[j * n + i].conj());
                diff[i * n + j] = a - b;
            }
        }
        let ev = linalg::hermitian_eigenvalues(n, &diff)?;
        Ok(0.5 * ev.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Partial trace over one tensor slot.
    pub fn trace_out(&self, slot: usize) -> Result<DensityMatrix> {
        let spec = &self.spec;
        let dims = spec.dims();
        if slot >= dims.len() {
            return Err(Error::InvalidArgument("slot out of range".into()));
        }
        let reduced = spec.without_slot(slot)?;
        let m = reduced.total_dim();
        let n = self.dim();
        let mut out = vec![ZERO; m * m];
        let d = dims[slot];
        let stride: usize = dims[slot + 1..].iter().product();
        let outer = n / (d * stride);
        // flat = (hi * d + k) * stride + lo, reduced = hi * stride + lo
        for hi_r in 0..outer {
            for lo_r in 0..stride {
                let r = hi_r * stride + lo_r;
                for hi_c in 0..outer {
                    for lo_c in 0..stride {
                        let c = hi_c * stride + lo_c;
                        let mut acc = ZERO;
                        for k in 0..d {
                            let i = (hi_r * d + k) * stride + lo_r;
                            let j = (hi_c * d + k) * stride + lo_c;
                            acc += self.data[i * n + j];
                        }
                        out[r * m + c] = acc;
                    }
                }
            }
        }
        Ok(DensityMatrix::unchecked(reduced, out))
    }

    /// Partial trace over every factor except `keep`.
    pub fn reduce_to(&self, keep: &[Subsystem]) -> Result<DensityMatrix> {
        let mut rho = self.clone();
        let mut slot = rho.spec.dims().len();
        while slot > 0 {
            slot -= 1;
            let role = rho.spec.role(slot);
            if !role.is_some_and(|r| keep.contains(&r)) {
                rho = rho.trace_out(slot)?;
            }
        }
        Ok(rho)
    }

    /// Population of the phonon levels at or above `level`.
    pub fn phonon_tail(&self, level: usize) -> f64 {
        let Some(slot) = self.spec.slot(Subsystem::Phonon) else { return 0.0 };
        let n = self.dim();
        (0..n)
            .filter(|&i| self.spec.digits(i)[slot] >= level)
            .map(|i| self.data[i * n + i].re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{StateVector, Subsystem};
    use crate::ONE;

    #[test]
    fn validation_rejects_bad_states() {
        let spec = HilbertSpec::qubit();
        let not_unit = OperatorMatrix::identity(spec.clone());
        assert!(matches!(DensityMatrix::new(not_unit), Err(Error::Integrity { .. })));
        let mut neg = OperatorMatrix::zeros(spec.clone());
        neg.set(0, 0, C64::new(1.5, 0.0));
        neg.set(1, 1, C64::new(-0.5, 0.0));
        assert!(matches!(DensityMatrix::new(neg), Err(Error::Integrity { what: "min eigenvalue", .. })));
        let mut skew = OperatorMatrix::zeros(spec);
        skew.set(0, 0, ONE);
        skew.set(0, 1, C64::new(0.1, 0.0));
        assert!(DensityMatrix::new(skew).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let spec = HilbertSpec::full(4, 2).unwrap();
        let psi = StateVector::basis(spec, &[2, 1, 0]).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let ph = rho.reduce_to(&[Subsystem::Phonon]).unwrap();
        assert_eq!(ph.dim(), 4);
        assert_eq!(ph.get(2, 2), ONE);
        assert!((ph.trace() - ONE).norm() < 1e-12);
        let ps = rho.reduce_to(&[Subsystem::Phonon, Subsystem::Spin]).unwrap();
        assert_eq!(ps.spec().dims(), &[4, 2]);
    }

    #[test]
    fn entangled_pair_reduces_to_mixed() {
        let spec = HilbertSpec::phonon_spin(3).unwrap();
        let mut amps = vec![ZERO; 6];
        amps[spec.index(&[0, 1])] = ONE;
        amps[spec.index(&[1, 0])] = ONE;
        let rho = DensityMatrix::from_pure(&StateVector::new(spec, amps).unwrap());
        let ph = rho.reduce_to(&[Subsystem::Phonon]).unwrap();
        assert!((ph.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((ph.get(1, 1).re - 0.5).abs() < 1e-12);
        assert!(ph.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn trace_distance_and_fidelity() {
        let up = DensityMatrix::from_pure(&StateVector::spin_up());
        let down = DensityMatrix::from_pure(&StateVector::spin_down());
        assert!((up.trace_distance(&down).unwrap() - 1.0).abs() < 1e-12);
        assert!(up.trace_distance(&up).unwrap() < 1e-12);
        assert_eq!(up.fidelity_pure(&StateVector::spin_down()).unwrap(), 0.0);
        let mixed = DensityMatrix::mixture(&[(0.5, &up), (0.5, &down)]).unwrap();
        assert!((mixed.purity() - 0.5).abs() < 1e-12);
        assert!((mixed.trace_distance(&up).unwrap() - 0.5).abs() < 1e-12);
    }
}
