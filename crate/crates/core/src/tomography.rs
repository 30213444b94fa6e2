//! Phase-space characterization of the motional state.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_2_PI;

use crate::error::{Error, Result};
use crate::lindblad::{adiabatic_effective_model, steady_state, DensityMatrix, SteadyStateMethod};
use crate::operators::{coherent_min_dim, coherent_state, displacement, HilbertSpec, StateVector, Subsystem};
use crate::special::{factorial, laguerre, laguerre_table};
use crate::{C64, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

/// Rectangular grid of phase-space points `α = re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        PhaseSpaceGrid { re_range: (-4.0, 4.0), im_range: (-4.0, 4.0), n_re: 81, n_im: 81 }
    }
}

impl PhaseSpaceGrid {
    pub fn new(re_range: (f64, f64), im_range: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        let g = PhaseSpaceGrid { re_range, im_range, n_re, n_im };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_range.0, self.re_range.1, self.im_range.0, self.im_range.1].iter().all(|v| v.is_finite());
        if !finite || self.re_range.0 >= self.re_range.1 || self.im_range.0 >= self.im_range.1 {
            return Err(Error::InvalidArgument("grid ranges must be finite and increasing".into()));
        }
        if self.n_re < 2 || self.n_im < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 samples per axis".into()));
        }
        Ok(())
    }

    pub fn re_step(&self) -> f64 {
        (self.re_range.1 - self.re_range.0) / (self.n_re - 1) as f64
    }

    pub fn im_step(&self) -> f64 {
        (self.im_range.1 - self.im_range.0) / (self.n_im - 1) as f64
    }

    pub fn re(&self, i: usize) -> f64 {
        self.re_range.0 + i as f64 * self.re_step()
    }

    pub fn im(&self, j: usize) -> f64 {
        self.im_range.0 + j as f64 * self.im_step()
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re(i), self.im(j))
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `(i, j)` for flat index `i * n_im + j`.
    pub fn node(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_im, flat % self.n_im)
    }
}

/// Wigner function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub grid: PhaseSpaceGrid,
    /// Row-major over `(re, im)`: `values[i * n_im + j]`.
    pub values: Vec<f64>,
    /// Raw minimum over the table.
    pub negativity: f64,
    /// Minimum of a local quadratic fit around the minimal node.
    pub refined_negativity: f64,
}

impl WignerMap {
    /// Assemble from values in grid order.
    pub fn from_values(grid: PhaseSpaceGrid, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        let (arg, negativity) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |(ai, av), (i, v)| if v < av { (i, v) } else { (ai, av) });
        let refined_negativity = refine_minimum(&grid, &values, arg).min(negativity);
        Ok(WignerMap { grid, values, negativity, refined_negativity })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_im + j]
    }

    /// Riemann sum `Σ W ΔRe ΔIm`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.re_step() * self.grid.im_step()
    }

    pub fn argmax(&self) -> C64 {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(ak, av), (k, &v)| if v > av { (k, v) } else { (ak, av) });
        let (i, j) = self.grid.node(k);
        self.grid.point(i, j)
    }
}

fn refine_minimum(grid: &PhaseSpaceGrid, values: &[f64], arg: usize) -> f64 {
    let (i, j) = grid.node(arg);
    let f0 = values[arg];
    if i == 0 || j == 0 || i + 1 >= grid.n_re || j + 1 >= grid.n_im {
        return f0;
    }
    let at = |di: isize, dj: isize| {
        values[(i as isize + di) as usize * grid.n_im + (j as isize + dj) as usize]
    };
    let (hx, hy) = (grid.re_step(), grid.im_step());
    let gx = (at(1, 0) - at(-1, 0)) / (2.0 * hx);
    let gy = (at(0, 1) - at(0, -1)) / (2.0 * hy);
    let hxx = (at(1, 0) - 2.0 * f0 + at(-1, 0)) / (hx * hx);
    let hyy = (at(0, 1) - 2.0 * f0 + at(0, -1)) / (hy * hy);
    let hxy = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hx * hy);
    let det = hxx * hyy - hxy * hxy;
    if !(hxx > 0.0 && det > 0.0) {
        return f0;
    }
    let dx = -(hyy * gx - hxy * gy) / det;
    let dy = -(hxx * gy - hxy * gx) / det;
    // stay within the 3x3 stencil
    if dx.abs() > hx || dy.abs() > hy {
        return f0;
    }
    f0 + 0.5 * (gx * dx + gy * dy)
}

/// Partial trace over every factor other than the phonon.
pub fn reduce_to_phonon(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.spec().slot(Subsystem::Phonon).is_none() {
        return Err(Error::InvalidArgument("state has no phonon factor".into()));
    }
    rho.reduce_to(&[Subsystem::Phonon])
}

fn single_mode_dim(rho: &DensityMatrix) -> Result<usize> {
    let dims = rho.spec().dims();
    let ok = dims.len() == 1 && matches!(rho.spec().role(0), None | Some(Subsystem::Phonon));
    if !ok {
        return Err(Error::InvalidArgument("Wigner function needs a phonon-only state".into()));
    }
    Ok(dims[0])
}

/// Population of levels above `N − 3`, which displacements leak.
fn check_tail(rho: &DensityMatrix, n: usize) -> Result<()> {
    let tail: f64 = (n.saturating_sub(2)..n).map(|k| rho.get(k, k).re).sum();
    if tail > 1e-4 {
        return Err(Error::TruncationLeak { tail, limit: 1e-4 });
    }
    Ok(())
}

/// Precomputed `√(n!/m!)` ratios and `(−1)^n`-weighted coefficients.
struct WignerKernel {
    n: usize,
    rho: Vec<C64>,
    sqrt_ratio: Vec<f64>,
}

impl WignerKernel {
    fn new(rho: &DensityMatrix, n: usize) -> Self {
        let mut sqrt_ratio = vec![0.0; n * n];
        for m in 0..n {
            for k in 0..=m {
                sqrt_ratio[m * n + k] = (factorial(k) / factorial(m)).sqrt();
            }
        }
        WignerKernel { n, rho: rho.data().to_vec(), sqrt_ratio }
    }

    /// `(2/π) Σ ρ_nm ⟨m|D(2α)|n⟩ (−1)^n`, using `⟨m|D(β)|n⟩ =
    /// √(n!/m!) β^(m−n) e^(−|β|²/2) L_n^(m−n)(|β|²)` for `m ≥ n`.
    fn eval(&self, alpha: C64) -> f64 {
        let n = self.n;
        let beta = 2.0 * alpha;
        let x = beta.norm_sqr();
        let damp = (-0.5 * x).exp();
        let mut acc = 0.0;
        let mut beta_pow = C64::new(1.0, 0.0);
        for d in 0..n {
            let lag = laguerre_table(n - d, d as f64, x);
            let mut part = ZERO;
            for k in 0..n - d {
                let m = k + d;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let elem = beta_pow * (self.sqrt_ratio[m * n + k] * lag[k]);
                part += self.rho[k * n + m] * elem * sign;
            }
            acc += if d == 0 { part.re } else { 2.0 * part.re };
            beta_pow *= beta;
        }
        FRAC_2_PI * damp * acc
    }
}

/// Wigner function `W(α) = (2/π) Tr[ρ D(α) Π D†(α)]` on `grid`.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerMap> {
    grid.validate()?;
    let n = single_mode_dim(rho)?;
    check_tail(rho, n)?;
    let kernel = WignerKernel::new(rho, n);
    let values = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.node(k);
            kernel.eval(grid.point(i, j))
        })
        .collect();
    WignerMap::from_values(*grid, values)
}

/// Single-point evaluation for callers that assemble the grid themselves.
pub struct WignerEvaluator(WignerKernel);

impl WignerEvaluator {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let n = single_mode_dim(rho)?;
        check_tail(rho, n)?;
        Ok(WignerEvaluator(WignerKernel::new(rho, n)))
    }

    pub fn at(&self, alpha: C64) -> f64 {
        self.0.eval(alpha)
    }
}

/// `(2/π) Tr[ρ Π]`, the Wigner function at the origin.
pub fn parity_value(rho: &DensityMatrix) -> Result<f64> {
    let n = single_mode_dim(rho)?;
    let p: f64 = (0..n).map(|k| if k % 2 == 0 { rho.get(k, k).re } else { -rho.get(k, k).re }).sum();
    Ok(FRAC_2_PI * p)
}

/// `W(α)` from a matrix-exponential displacement on `N + pad` levels.
pub fn wigner_by_expm(rho: &DensityMatrix, alpha: C64, pad: usize) -> Result<f64> {
    let n = single_mode_dim(rho)?;
    let d = displacement(alpha, n, pad)?;
    // Tr[ρ D Π D†] = Σ_k (−1)^k ⟨k|D† ρ D|k⟩
    let r = rho.data();
    let dd = d.data();
    let mut acc = 0.0;
    for k in 0..n {
        let mut v = ZERO;
        for i in 0..n {
            for j in 0..n {
                v += dd[i * n + k].conj() * r[i * n + j] * dd[j * n + k];
            }
        }
        acc += if k % 2 == 0 { v.re } else { -v.re };
    }
    Ok(FRAC_2_PI * acc)
}

/// Closed-form normalization `k_{α,m} = [m! L_m(−|α|²)]^(−1/2)`.
pub fn added_state_norm(alpha_abs: f64, m: usize) -> f64 {
    1.0 / (factorial(m) * laguerre(m, 0.0, -alpha_abs * alpha_abs)).sqrt()
}

/// Photon-added coherent state `k (a†)^m |α⟩`.
pub fn phonon_added_coherent(alpha: C64, m: usize, dim: usize) -> Result<StateVector> {
    let required = coherent_min_dim(alpha.norm()) + m;
    if dim < required {
        return Err(Error::TruncationInadequate { required, dim });
    }
    let base = coherent_state(alpha, dim - m)?;
    let mut amps = vec![ZERO; dim];
    for (k, c) in base.amplitudes().iter().enumerate() {
        let lift: f64 = (k + 1..=k + m).map(|j| j as f64).product();
        amps[k + m] = c * lift.sqrt();
    }
    StateVector::new(HilbertSpec::phonon(dim)?, amps)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    rho.fidelity_pure(target)
}

/// Parameters of the dissipative phonon-addition runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityParams {
    pub lambda1: f64,
    pub gamma_k: f64,
    pub n_phonon: usize,
    pub spin_up: bool,
    pub grid: PhaseSpaceGrid,
}

impl Default for NegativityParams {
    fn default() -> Self {
        NegativityParams { lambda1: 1.0, gamma_k: 50.0, n_phonon: 25, spin_up: true, grid: PhaseSpaceGrid::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityPoint {
    pub alpha: f64,
    pub w_min: f64,
    pub w_min_refined: f64,
    /// Overlap with the ideal two-phonon-added coherent state.
    pub fidelity_added: f64,
    pub steady_state: DensityMatrix,
    pub map: WignerMap,
}

/// Steady state of the eliminated model from `|α⟩ ⊗ spin`, its phonon
/// Wigner map and negativity.
pub fn negativity_point(alpha: f64, params: &NegativityParams) -> Result<NegativityPoint> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument("coherent amplitude must be >= 0".into()));
    }
    let n = params.n_phonon;
    let spec = HilbertSpec::phonon_spin(n)?;
    let model = adiabatic_effective_model(params.lambda1, params.gamma_k, &spec)?;
    let coh = coherent_state(C64::new(alpha, 0.0), n)?;
    let spin = if params.spin_up { StateVector::spin_up() } else { StateVector::spin_down() };
    let psi0 = coh.tensor(&spin).with_spec(spec)?;
    let rho0 = DensityMatrix::from_pure(&psi0);
    let ss = steady_state(&model, &SteadyStateMethod::long_time_from(rho0))?;
    let phonon = reduce_to_phonon(&ss)?;
    let tail = phonon.phonon_tail(n.saturating_sub(2));
    if tail > 1e-6 {
        return Err(Error::TruncationLeak { tail, limit: 1e-6 });
    }
    let map = wigner(&phonon, &params.grid)?;
    let fidelity_added = fidelity(&phonon, &phonon_added_coherent(C64::new(alpha, 0.0), 2, n)?)?;
    Ok(NegativityPoint {
        alpha,
        w_min: map.negativity,
        w_min_refined: map.refined_negativity,
        fidelity_added,
        steady_state: phonon,
        map,
    })
}

/// [`negativity_point`] for each amplitude, sorted by `α`.
pub fn negativity_sweep(alphas: &[f64], params: &NegativityParams) -> Result<Vec<NegativityPoint>> {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().map(|&a| negativity_point(a, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::StateVector;
    use core::f64::consts::PI;

    fn pure(psi: &StateVector) -> DensityMatrix {
        DensityMatrix::from_pure(psi)
    }

    fn small_grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new((-3.0, 3.0), (-3.0, 3.0), 41, 41).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PhaseSpaceGrid::new((1.0, -1.0), (-1.0, 1.0), 5, 5).is_err());
        assert!(PhaseSpaceGrid::new((-1.0, 1.0), (-1.0, 1.0), 1, 5).is_err());
        assert!(PhaseSpaceGrid::new((f64::NAN, 1.0), (-1.0, 1.0), 5, 5).is_err());
        let g = PhaseSpaceGrid::default();
        assert_eq!(g.len(), 81 * 81);
        assert!((g.re_step() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn vacuum_and_fock_one() {
        let vac = pure(&StateVector::fock(12, 0).unwrap());
        let map = wigner(&vac, &small_grid()).unwrap();
        assert!((map.get(20, 20) - 2.0 / PI).abs() < 1e-14);
        assert!(map.negativity > 0.0);
        assert!((map.integral() - 1.0).abs() < 0.01);

        let one = pure(&StateVector::fock(12, 1).unwrap());
        let map = wigner(&one, &small_grid()).unwrap();
        assert!((map.get(20, 20) + 2.0 / PI).abs() < 1e-14);
        assert!((map.negativity + 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn coherent_peak() {
        let a0 = C64::new(1.0, -0.5);
        let rho = pure(&coherent_state(a0, 25).unwrap());
        let grid = PhaseSpaceGrid::default();
        let map = wigner(&rho, &grid).unwrap();
        assert!((map.argmax() - a0).norm() < 1e-12);
        assert!(map.negativity >= -1e-6);
    }

    #[test]
    fn matches_expm_route() {
        let psi = phonon_added_coherent(C64::new(0.3, 0.1), 2, 20).unwrap();
        let rho = pure(&psi);
        let ev = WignerEvaluator::new(&rho).unwrap();
        for alpha in [C64::new(0.0, 0.0), C64::new(0.4, -0.2), C64::new(-0.7, 0.5)] {
            let direct = ev.at(alpha);
            let expm = wigner_by_expm(&rho, alpha, 30).unwrap();
            assert!((direct - expm).abs() < 1e-10, "{alpha}: {direct} vs {expm}");
        }
        assert!((ev.at(ZERO) - parity_value(&rho).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn truncation_leak_detected() {
        let rho = pure(&StateVector::fock(6, 5).unwrap());
        assert!(matches!(wigner(&rho, &small_grid()), Err(Error::TruncationLeak { .. })));
    }

    #[test]
    fn added_state_examples() {
        let m0 = phonon_added_coherent(C64::new(0.8, 0.0), 0, 20).unwrap();
        let coh = coherent_state(C64::new(0.8, 0.0), 20).unwrap();
        assert!((m0.inner(&coh).norm() - 1.0).abs() < 1e-12);
        let two = phonon_added_coherent(ZERO, 2, 12).unwrap();
        assert!((two.amplitudes()[2].norm() - 1.0).abs() < 1e-15);
        assert!((added_state_norm(0.3, 2) - 0.6499).abs() < 1e-4);
        assert!(matches!(phonon_added_coherent(C64::new(1.0, 0.0), 2, 10), Err(Error::TruncationInadequate { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let a = StateVector::fock(5, 1).unwrap();
        let b = StateVector::fock(5, 3).unwrap();
        assert!((fidelity(&pure(&a), &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&pure(&a), &b).unwrap(), 0.0);
        assert!(fidelity(&pure(&a), &StateVector::fock(6, 1).unwrap()).is_err());
    }

    #[test]
    fn reduce_product() {
        let spec = HilbertSpec::full(5, 2).unwrap();
        let psi = StateVector::basis(spec, &[2, 1, 1]).unwrap();
        let ph = reduce_to_phonon(&pure(&psi)).unwrap();
        assert_eq!(ph.dim(), 5);
        assert!((ph.get(2, 2).re - 1.0).abs() < 1e-15);
        assert!((ph.trace().re - 1.0).abs() < 1e-12);
        assert!(reduce_to_phonon(&pure(&StateVector::spin_up())).is_err());
    }

    #[test]
    fn refined_minimum_of_fock_two() {
        // W(r) = (2/π) e^{−2r²} L₂(4r²) has its ring minimum where
        // d/du[e^{−u/2}(1 − 2u + u²/2)] = 0 with u = 4r²: u² − 8u + 10 = 0
        let u: f64 = 4.0 - 6f64.sqrt();
        let exact = FRAC_2_PI * (-0.5 * u).exp() * (1.0 - 2.0 * u + 0.5 * u * u);
        let rho = pure(&StateVector::fock(12, 2).unwrap());
        let map = wigner(&rho, &PhaseSpaceGrid::default()).unwrap();
        assert!(map.negativity >= exact - 1e-12);
        assert!((map.refined_negativity - exact).abs() < (map.negativity - exact).abs() + 1e-12);
        assert!((map.refined_negativity - exact).abs() < 2e-3);
    }
}
