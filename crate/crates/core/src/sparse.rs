//! Row-compressed complex operators for the matrix-free Lindblad right-hand side.
//!
//! Every Hamiltonian and jump operator in this crate has at most a handful of
//! nonzeros per row, so products with a dense density matrix cost
//! `O(nnz * n)` instead of `O(n^3)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    /// Compress a dense row-major `n x n` matrix, dropping exact zeros.
    pub fn from_dense(n: usize, dense: &[C64]) -> Self {
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        SparseOp { n, row_start, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_start[i], self.row_start[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// `out += s * (A rho)`.
    pub fn left_mul_acc(&self, rho: &[C64], s: C64, out: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let orow = &mut out[i * n..(i + 1) * n];
            for (k, a) in self.row(i) {
                let f = s * a;
                for (o, r) in orow.iter_mut().zip(&rho[k * n..(k + 1) * n]) {
                    *o += f * r;
                }
            }
        }
    }

    /// `out += s * (rho A^dagger)`.
    pub fn right_mul_adjoint_acc(&self, rho: &[C64], s: C64, out: &mut [C64]) {
        let n = self.n;
        // (rho A^H)_{ij} = sum_k rho_{ik} conj(A_{jk})
        for i in 0..n {
            let rrow = &rho[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (j, o) in orow.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (k, a) in self.row(j) {
                    acc += rrow[k] * a.conj();
                }
                *o += s * acc;
            }
        }
    }

    /// `A rho A^dagger` accumulated into `out` with weight `s`; `scratch` must
    /// hold `n * n` entries.
    pub fn sandwich_acc(&self, rho: &[C64], s: C64, scratch: &mut [C64], out: &mut [C64]) {
        scratch.iter_mut().for_each(|z| *z = ZERO);
        self.left_mul_acc(rho, crate::ONE, scratch);
        self.right_mul_adjoint_acc(scratch, s, out);
    }

    /// `A v` for a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(k, a)| a * v[k]).sum();
        }
        out
    }

    /// `Tr(A rho)`.
    pub fn trace_product(&self, rho: &[C64]) -> C64 {
        let n = self.n;
        let mut acc = ZERO;
        for i in 0..n {
            for (k, a) in self.row(i) {
                acc += a * rho[k * n + i];
            }
        }
        acc
    }
}
