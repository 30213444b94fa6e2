//! Dense complex linear algebra on row-major square matrices.
//!
//! Everything here works on plain `&[C64]` buffers of length `n * n` so the
//! operator types can stay thin wrappers.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::{C64, ONE, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

pub fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        m[i * n + i] = ONE;
    }
    m
}

pub fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    out
}

pub fn adjoint(n: usize, a: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Induced 1-norm (max column sum).
pub fn norm1(n: usize, a: &[C64]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Householder reduction to tridiagonal form followed by implicit QL;
/// the input is assumed Hermitian.
pub fn hermitian_eigenvalues(n: usize, h: &[C64]) -> Result<Vec<f64>> {
    if h.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: h.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = h.to_vec();
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let xnorm = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for (t, i) in (k + 1..n).enumerate() {
            v[t] = a[i * n + k];
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..m].iter_mut() {
            *z /= vnorm;
        }
        // p = B v on the trailing block, c = v^H p
        let mut c = ZERO;
        for r in 0..m {
            let row = &a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            let s: C64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
            p[r] = s;
            c += v[r].conj() * s;
        }
        let c = c.re;
        for r in 0..m {
            p[r] -= v[r] * c;
        }
        for r in 0..m {
            let (vr, wr) = (v[r], p[r]);
            let row = &mut a[(k + 1 + r) * n + k + 1..(k + 1 + r) * n + n];
            for (s, x) in row.iter_mut().enumerate() {
                *x -= 2.0 * (vr * p[s].conj() + wr * v[s].conj());
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = ZERO;
            a[k * n + i] = ZERO;
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { a[(i + 1) * n + i].norm() } else { 0.0 })
        .collect();
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    Ok(d)
}

/// Implicit QL on a symmetric tridiagonal matrix; `e[i]` couples `i` and `i+1`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NotConverged("tridiagonal QL".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Solve `A X = B` for `X` (`B` is `n x m`, row-major) by LU with partial pivoting.
pub fn solve(n: usize, a: &[C64], b: &[C64], m: usize) -> Result<Vec<C64>> {
    let mut lu = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| {
                lu[i * n + k]
                    .norm()
                    .partial_cmp(&lu[j * n + k].norm())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if lu[piv * n + k].norm() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            for j in 0..m {
                x.swap(k * m + j, piv * m + j);
            }
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let t = lu[k * n + j];
                lu[i * n + j] -= f * t;
            }
            for j in 0..m {
                let t = x[k * m + j];
                x[i * m + j] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..m {
            let mut s = x[k * m + j];
            for i in k + 1..n {
                s -= lu[k * n + i] * x[i * m + j];
            }
            x[k * m + j] = s / lu[k * n + k];
        }
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring around a diagonal [8/8] Padé
/// approximant. The scaled norm is kept at or below 1/2, which puts the
/// truncation error far below 1e-12.
pub fn expm(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    const DEGREE: usize = 8;
    let norm = norm1(n, a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x: Vec<C64> = a.iter().map(|z| z * scale).collect();

    let mut coeff = [0.0f64; DEGREE + 1];
    coeff[0] = 1.0;
    for j in 1..=DEGREE {
        coeff[j] = coeff[j - 1] * (DEGREE - j + 1) as f64 / (j * (2 * DEGREE - j + 1)) as f64;
    }
    let mut num = identity(n);
    let mut den = identity(n);
    let mut power = identity(n);
    for (j, &c) in coeff.iter().enumerate().skip(1) {
        power = matmul(n, &power, &x);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for ((nu, de), pw) in num.iter_mut().zip(den.iter_mut()).zip(&power) {
            *nu += pw * c;
            *de += pw * (c * sign);
        }
    }
    let mut r = solve(n, &den, &num, n)?;
    for _ in 0..squarings {
        r = matmul(n, &r, &r);
    }
    Ok(r)
}

/// Outcome of a rank-revealing LU factorization with complete pivoting.
#[derive(Debug, Clone)]
pub struct FullPivotLu {
    n: usize,
    lu: Vec<C64>,
    col_perm: Vec<usize>,
    rank: usize,
}

impl FullPivotLu {
    /// Factorize; pivots smaller than `rel_tol` times the first pivot end
    /// the elimination and define the numerical rank.
    pub fn new(n: usize, a: &[C64], rel_tol: f64) -> Self {
        let mut lu = a.to_vec();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut rank = n;
        let mut first = 0.0;
        for k in 0..n {
            let (mut pi, mut pj, mut best) = (k, k, -1.0);
            for i in k..n {
                for j in k..n {
                    let v = lu[i * n + j].norm();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if k == 0 {
                first = best;
            }
            if best <= rel_tol * first || best == 0.0 {
                rank = k;
                break;
            }
            if pi != k {
                for j in 0..n {
                    lu.swap(k * n + j, pi * n + j);
                }
            }
            if pj != k {
                for i in 0..n {
                    lu.swap(i * n + k, i * n + pj);
                }
                col_perm.swap(k, pj);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        FullPivotLu { n, lu, col_perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nullity(&self) -> usize {
        self.n - self.rank
    }

    /// A kernel vector when the nullity is exactly one.
    pub fn kernel_vector(&self) -> Option<Vec<C64>> {
        if self.nullity() != 1 {
            return None;
        }
        let (n, r) = (self.n, self.rank);
        let mut y = vec![ZERO; n];
        y[r] = ONE;
        for k in (0..r).rev() {
            let mut s = ZERO;
            for j in k + 1..n {
                s -= self.lu[k * n + j] * y[j];
            }
            y[k] = s / self.lu[k * n + k];
        }
        let mut x = vec![ZERO; n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[k];
        }
        Some(x)
    }
}
