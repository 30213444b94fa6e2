//! Truncated Fock and spin-1/2 operator algebra.
//!
//! Composite spaces are always ordered `phonon ⊗ magnon ⊗ spin` (any factor
//! may be absent) and the spin basis is `(|↑⟩, |↓⟩)`, so that
//! `σ_z = diag(1, -1)` and `σ_+ = |↑⟩⟨↓|`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sparse::SparseOp;
use crate::{C64, I, ONE, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance used when an operator is declared Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Phonon,
    Magnon,
    Spin,
}

/// Ordered tensor-factor dimensions, with the physical role of each slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    dims: Vec<usize>,
    roles: Vec<Option<Subsystem>>,
}

impl HilbertSpec {
    /// Unlabelled factors, e.g. a bare ladder operator.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let roles = vec![None; dims.len()];
        Self::with_roles(dims, roles)
    }

    fn with_roles(dims: Vec<usize>, roles: Vec<Option<Subsystem>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("empty Hilbert space".into()));
        }
        for (&d, role) in dims.iter().zip(&roles) {
            if d < 1 {
                return Err(Error::InvalidDimension { dim: d, min: 1 });
            }
            if *role == Some(Subsystem::Spin) && d != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: d });
            }
        }
        Ok(HilbertSpec { dims, roles })
    }

    /// `phonon(n_a) ⊗ magnon(n_k) ⊗ spin`.
    pub fn full(n_phonon: usize, n_magnon: usize) -> Result<Self> {
        Self::with_roles(
            vec![n_phonon, n_magnon, 2],
            vec![Some(Subsystem::Phonon), Some(Subsystem::Magnon), Some(Subsystem::Spin)],
        )
    }

    /// `phonon(n_a) ⊗ spin`, the space left after eliminating the magnon.
    pub fn phonon_spin(n_phonon: usize) -> Result<Self> {
        Self::with_roles(vec![n_phonon, 2], vec![Some(Subsystem::Phonon), Some(Subsystem::Spin)])
    }

    pub fn phonon(n_phonon: usize) -> Result<Self> {
        Self::with_roles(vec![n_phonon], vec![Some(Subsystem::Phonon)])
    }

    pub fn qubit() -> Self {
        HilbertSpec { dims: vec![2], roles: vec![Some(Subsystem::Spin)] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn slot(&self, role: Subsystem) -> Option<usize> {
        self.roles.iter().position(|r| *r == Some(role))
    }

    pub fn role(&self, slot: usize) -> Option<Subsystem> {
        self.roles.get(slot).copied().flatten()
    }

    pub fn dim_of(&self, role: Subsystem) -> Option<usize> {
        self.slot(role).map(|s| self.dims[s])
    }

    /// Flat index of a multi-index (last factor fastest).
    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.dims).fold(0, |acc, (&d, &n)| acc * n + d)
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (o, &n) in out.iter_mut().zip(&self.dims).rev() {
            *o = flat % n;
            flat /= n;
        }
        out
    }

    /// The same space with one factor removed.
    pub fn without_slot(&self, slot: usize) -> Result<Self> {
        let mut dims = self.dims.clone();
        let mut roles = self.roles.clone();
        dims.remove(slot);
        roles.remove(slot);
        Self::with_roles(dims, roles)
    }
}

/// Dense square complex matrix over a [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    spec: HilbertSpec,
    data: Vec<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(spec: HilbertSpec) -> Self {
        let n = spec.total_dim();
        OperatorMatrix { spec, data: vec![ZERO; n * n], hermitian: true }
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        let n = spec.total_dim();
        OperatorMatrix { spec, data: linalg::identity(n), hermitian: true }
    }

    pub fn from_vec(spec: HilbertSpec, data: Vec<C64>) -> Result<Self> {
        let n = spec.total_dim();
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(OperatorMatrix { spec, data, hermitian: false })
    }

    pub fn from_fn(spec: HilbertSpec, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = spec.total_dim();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        OperatorMatrix { spec, data, hermitian: false }
    }

    /// Outer product `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.spec != bra.spec {
            return Err(Error::DimensionMismatch { expected: ket.dim(), found: bra.dim() });
        }
        Ok(Self::from_fn(ket.spec.clone(), |i, j| ket.amps[i] * bra.amps[j].conj()))
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

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let n = self.dim();
        self.data[i * n + j] = v;
        self.hermitian = false;
    }

    /// Relabel with a spec of the same total dimension.
    pub fn with_spec(mut self, spec: HilbertSpec) -> Result<Self> {
        if spec.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: spec.total_dim() });
        }
        self.spec = spec;
        Ok(self)
    }

    pub fn dag(&self) -> Self {
        OperatorMatrix {
            spec: self.spec.clone(),
            data: linalg::adjoint(self.dim(), &self.data),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        OperatorMatrix {
            spec: self.spec.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix {
            spec: self.spec.clone(),
            data: linalg::matmul(self.dim(), &self.data, &rhs.data),
            hermitian: false,
        }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn trace(&self) -> C64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.data)
    }

    /// `max |M - M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Verify Hermiticity to [`HERMITIAN_TOL`] and set the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let err = self.hermiticity_error();
        if err >= HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("operator is not Hermitian: max|M - M†| = {err:.3e}")));
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Kronecker product; factor lists are concatenated.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut dims = self.spec.dims.clone();
        dims.extend_from_slice(&rhs.spec.dims);
        let mut roles = self.spec.roles.clone();
        roles.extend_from_slice(&rhs.spec.roles);
        let spec = HilbertSpec::with_roles(dims, roles).expect("factor dims already validated");
        let (na, nb) = (self.dim(), rhs.dim());
        let n = na * nb;
        let mut data = vec![ZERO; n * n];
        for i in 0..na {
            for j in 0..na {
                let a = self.data[i * na + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        data[(i * nb + k) * n + j * nb + l] = a * rhs.data[k * nb + l];
                    }
                }
            }
        }
        OperatorMatrix { spec, data, hermitian: self.hermitian && rhs.hermitian }
    }

    /// Eigenvalues (ascending) of a Hermitian operator.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.dim(), &self.data)
    }

    pub fn to_sparse(&self) -> SparseOp {
        SparseOp::from_dense(self.dim(), &self.data)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let n = self.dim();
        let amps = (0..n)
            .map(|i| (0..n).map(|k| self.data[i * n + k] * v.amps[k]).sum())
            .collect();
        StateVector { spec: v.spec.clone(), amps }
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, v: &StateVector) -> C64 {
        v.inner(&self.apply(v))
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix {
            spec: self.spec.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        OperatorMatrix {
            spec: self.spec.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: f64) -> OperatorMatrix {
        self.scale(C64::new(s, 0.0))
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: C64) -> OperatorMatrix {
        self.scale(s)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(-ONE)
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self + &rhs
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self - &rhs
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: f64) -> OperatorMatrix {
        &self * s
    }
}

/// Bosonic annihilation and creation operators truncated to `dim` levels.
pub fn fock_ladder(dim: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let spec = HilbertSpec::new(vec![dim])?;
    let a = OperatorMatrix::from_fn(spec, |i, j| {
        if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO }
    });
    let adag = a.dag();
    Ok((a, adag))
}

/// `a†a` on `dim` levels.
pub fn number(dim: usize) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::new(vec![dim])?;
    let mut m = OperatorMatrix::from_fn(spec, |i, j| if i == j { C64::new(i as f64, 0.0) } else { ZERO });
    m.hermitian = true;
    Ok(m)
}

/// Parity `(-1)^{a†a}`.
pub fn parity(dim: usize) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::new(vec![dim])?;
    let mut m = OperatorMatrix::from_fn(spec, |i, j| match (i == j, i % 2) {
        (true, 0) => ONE,
        (true, _) => -ONE,
        _ => ZERO,
    });
    m.hermitian = true;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl core::str::FromStr for Pauli {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Pauli::X),
            "y" | "Y" => Ok(Pauli::Y),
            "z" | "Z" => Ok(Pauli::Z),
            "plus" | "+" => Ok(Pauli::Plus),
            "minus" | "-" => Ok(Pauli::Minus),
            other => Err(Error::InvalidArgument(format!("unknown Pauli label `{other}`"))),
        }
    }
}

/// 2x2 Pauli matrix in the `(|↑⟩, |↓⟩)` basis.
pub fn pauli(which: Pauli) -> OperatorMatrix {
    let e = match which {
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -I, I, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        Pauli::Plus => [ZERO, ONE, ZERO, ZERO],
        Pauli::Minus => [ZERO, ZERO, ONE, ZERO],
    };
    let hermitian = matches!(which, Pauli::X | Pauli::Y | Pauli::Z);
    OperatorMatrix { spec: HilbertSpec::qubit(), data: e.to_vec(), hermitian }
}

/// Place `op` on factor `slot` of `spec`, with identities elsewhere.
pub fn embed(op: &OperatorMatrix, slot: usize, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let dims = spec.dims();
    if slot >= dims.len() {
        return Err(Error::InvalidArgument(format!("slot {slot} out of range for {} factors", dims.len())));
    }
    if op.dim() != dims[slot] {
        return Err(Error::DimensionMismatch { expected: dims[slot], found: op.dim() });
    }
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    let d = dims[slot];
    let n = spec.total_dim();
    let mut data = vec![ZERO; n * n];
    for l in 0..left {
        for i in 0..d {
            for j in 0..d {
                let v = op.data[i * d + j];
                if v == ZERO {
                    continue;
                }
                for r in 0..right {
                    let row = (l * d + i) * right + r;
                    let col = (l * d + j) * right + r;
                    data[row * n + col] = v;
                }
            }
        }
    }
    Ok(OperatorMatrix { spec: spec.clone(), data, hermitian: op.hermitian })
}

/// [`embed`] by physical role.
pub fn embed_on(op: &OperatorMatrix, role: Subsystem, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let slot = spec
        .slot(role)
        .ok_or_else(|| Error::InvalidArgument(format!("space has no {role:?} factor")))?;
    embed(op, slot, spec)
}

/// Displacement `exp(α a† - α* a)` computed on `dim + pad` levels and
/// projected back onto the first `dim`.
///
/// With `pad = 0` this is the exact exponential of the truncated generator
/// (unitary on the truncated space). Padding moves the truncation edge away
/// so the low-lying block matches the untruncated operator.
pub fn displacement(alpha: C64, dim: usize, pad: usize) -> Result<OperatorMatrix> {
    let work = dim + pad;
    let (a, adag) = fock_ladder(work)?;
    let gen = &adag.scale(alpha) - &a.scale(alpha.conj());
    let full = linalg::expm(work, gen.data())?;
    let spec = HilbertSpec::new(vec![dim])?;
    Ok(OperatorMatrix::from_fn(spec, |i, j| full[i * work + j]))
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: HilbertSpec,
    amps: Vec<C64>,
}

impl StateVector {
    /// Build from raw amplitudes and normalize.
    pub fn new(spec: HilbertSpec, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != spec.total_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_dim(), found: amps.len() });
        }
        let mut v = StateVector { spec, amps };
        v.normalize()?;
        Ok(v)
    }

    /// Basis state `|d_0, d_1, ...⟩`.
    pub fn basis(spec: HilbertSpec, digits: &[usize]) -> Result<Self> {
        if digits.len() != spec.dims().len() {
            return Err(Error::DimensionMismatch { expected: spec.dims().len(), found: digits.len() });
        }
        for (&d, &n) in digits.iter().zip(spec.dims()) {
            if d >= n {
                return Err(Error::InvalidArgument(format!("level {d} outside factor of dimension {n}")));
            }
        }
        let mut amps = vec![ZERO; spec.total_dim()];
        amps[spec.index(digits)] = ONE;
        Ok(StateVector { spec, amps })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        Self::basis(HilbertSpec::phonon(dim)?, &[n])
    }

    pub fn spin_up() -> Self {
        StateVector { spec: HilbertSpec::qubit(), amps: vec![ONE, ZERO] }
    }

    pub fn spin_down() -> Self {
        StateVector { spec: HilbertSpec::qubit(), amps: vec![ZERO, ONE] }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        for z in self.amps.iter_mut() {
            *z /= nrm;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, rhs: &StateVector) -> StateVector {
        let mut dims = self.spec.dims.clone();
        dims.extend_from_slice(&rhs.spec.dims);
        let mut roles = self.spec.roles.clone();
        roles.extend_from_slice(&rhs.spec.roles);
        let spec = HilbertSpec::with_roles(dims, roles).expect("factor dims already validated");
        let amps = self
            .amps
            .iter()
            .flat_map(|a| rhs.amps.iter().map(move |b| a * b))
            .collect();
        StateVector { spec, amps }
    }

    /// Relabel with a spec of the same total dimension.
    pub fn with_spec(mut self, spec: HilbertSpec) -> Result<Self> {
        if spec.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: spec.total_dim() });
        }
        self.spec = spec;
        Ok(self)
    }
}

/// Smallest truncation accepted for a coherent amplitude `|α|`.
pub fn coherent_min_dim(alpha_abs: f64) -> usize {
    (alpha_abs * alpha_abs + 5.0 * alpha_abs + 10.0).ceil() as usize
}

/// Coherent state `|α⟩` on `dim` phonon levels, renormalized after truncation.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<StateVector> {
    let required = coherent_min_dim(alpha.norm());
    if dim < required {
        return Err(Error::TruncationInadequate { required, dim });
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = ONE;
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    StateVector::new(HilbertSpec::phonon(dim)?, amps)
}
