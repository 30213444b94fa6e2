use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{DensityMatrix, Generator, LindbladModel};
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::sparse::SparseOp;
use crate::{C64, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

/// Controls for [`evolve`] and [`evolve_fixed_step`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_final: f64,
    /// Number of equal output intervals; `samples + 1` times are recorded.
    pub samples: usize,
    pub dt_max: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub observables: Vec<(String, OperatorMatrix)>,
    /// Positivity is checked every this many samples (0: final state only).
    pub checkpoint_every: usize,
    /// Keep checkpoint states in the trajectory.
    pub store_checkpoints: bool,
}

impl EvolveOptions {
    pub fn new(t_final: f64, samples: usize) -> Self {
        EvolveOptions {
            t_final,
            samples,
            dt_max: None,
            rtol: 1e-8,
            atol: 1e-10,
            observables: Vec::new(),
            checkpoint_every: 0,
            store_checkpoints: false,
        }
    }

    pub fn observe(mut self, name: impl Into<String>, op: OperatorMatrix) -> Self {
        self.observables.push((name.into(), op));
        self
    }

    pub fn checkpoints(mut self, every: usize, store: bool) -> Self {
        self.checkpoint_every = every;
        self.store_checkpoints = store;
        self
    }

    pub fn tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn dt_max(mut self, dt: f64) -> Self {
        self.dt_max = Some(dt);
        self
    }

    fn validate(&self, model: &LindbladModel, rho0: &DensityMatrix) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument("t_final must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("at least one output interval is required".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.dt_max.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::InvalidArgument("dt_max must be positive".into()));
        }
        if rho0.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: rho0.dim() });
        }
        for (_, op) in &self.observables {
            if op.dim() != model.dim() {
                return Err(Error::DimensionMismatch { expected: model.dim(), found: op.dim() });
            }
        }
        Ok(())
    }
}

/// Sampled solution of a master equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Output times, in the model's time unit.
    pub times: Vec<f64>,
    pub observables: Vec<(String, Vec<f64>)>,
    /// `|Tr ρ − 1|` at each output time.
    pub trace_errors: Vec<f64>,
    pub checkpoints: Vec<(f64, DensityMatrix)>,
    pub final_state: DensityMatrix,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

struct Recorder {
    ops: Vec<SparseOp>,
    every: usize,
    store: bool,
    traj: Trajectory,
}

impl Recorder {
    fn new(opts: &EvolveOptions, rho0: &DensityMatrix) -> Self {
        let cap = opts.samples + 1;
        Recorder {
            ops: opts.observables.iter().map(|(_, o)| o.to_sparse()).collect(),
            every: opts.checkpoint_every,
            store: opts.store_checkpoints,
            traj: Trajectory {
                times: Vec::with_capacity(cap),
                observables: opts.observables.iter().map(|(n, _)| (n.clone(), Vec::with_capacity(cap))).collect(),
                trace_errors: Vec::with_capacity(cap),
                checkpoints: Vec::new(),
                final_state: rho0.clone(),
                accepted_steps: 0,
                rejected_steps: 0,
            },
        }
    }

    fn record(&mut self, index: usize, last: bool, t: f64, rho: &DensityMatrix) -> Result<()> {
        rho.check_cheap(t)?;
        self.traj.times.push(t);
        self.traj.trace_errors.push(rho.trace_error());
        for (op, (_, series)) in self.ops.iter().zip(self.traj.observables.iter_mut()) {
            series.push(op.trace_product(rho.data()).re);
        }
        let checkpoint = last || (self.every > 0 && index.is_multiple_of(self.every));
        if checkpoint {
            rho.check_full(t)?;
            if self.store {
                self.traj.checkpoints.push((t, rho.clone()));
            }
        }
        Ok(())
    }
}

fn check_trace(t: f64, y: &[C64], n: usize) -> Result<()> {
    let tr: C64 = (0..n).map(|i| y[i * n + i]).sum();
    let err = (tr - crate::ONE).norm();
    if err > super::TRACE_TOL {
        return Err(Error::Integrity { t, what: "trace error", value: err });
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dp45 {
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
}

impl Dp45 {
    fn new(len: usize) -> Self {
        Dp45 { k: core::array::from_fn(|_| vec![ZERO; len]), stage: vec![ZERO; len], y_new: vec![ZERO; len] }
    }

    /// One trial step from `y` with `k[0] = f(y)` already filled; returns the
    /// scaled error norm.
    fn step(&mut self, gen: &mut Generator, y: &[C64], h: f64, rtol: f64, atol: f64) -> f64 {
        for s in 1..7 {
            self.stage.copy_from_slice(y);
            for (j, &a) in A[s].iter().enumerate().take(s) {
                if a != 0.0 {
                    let f = h * a;
                    for (z, kj) in self.stage.iter_mut().zip(&self.k[j]) {
                        *z += kj * f;
                    }
                }
            }
            if s == 6 {
                self.y_new.copy_from_slice(&self.stage);
            }
            gen.apply(&self.stage, &mut self.k[s]);
        }
        let mut acc = 0.0;
        for i in 0..y.len() {
            let mut e = ZERO;
            for (s, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += self.k[s][i] * w;
                }
            }
            let scale = atol + rtol * y[i].norm().max(self.y_new[i].norm());
            let r = (e * h).norm() / scale;
            acc += r * r;
        }
        (acc / y.len() as f64).sqrt()
    }
}

/// Adaptive Dormand–Prince 5(4) integration with output at
/// `t_final · k / samples`.
///
/// Trace is checked after every accepted step, Hermiticity at every sample and
/// positivity at checkpoints; a step-size collapse below `1e-6 / ‖𝓛‖` is
/// reported as [`Error::Stiffness`].
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, opts: &EvolveOptions) -> Result<Trajectory> {
    opts.validate(model, rho0)?;
    let n = model.dim();
    let mut gen = model.generator();
    let norm = model.liouvillian_norm().max(f64::MIN_POSITIVE);
    let h_min = 1e-6 / norm;
    let dt_max = opts.dt_max.unwrap_or(f64::INFINITY);
    let interval = opts.t_final / opts.samples as f64;
    let mut h = (0.1 / norm).min(dt_max).min(interval);

    let mut rec = Recorder::new(opts, rho0);
    let mut y = rho0.data().to_vec();
    let mut dp = Dp45::new(y.len());
    gen.apply(&y, &mut dp.k[0]);
    rec.record(0, false, 0.0, rho0)?;

    let mut t = 0.0;
    for s in 1..=opts.samples {
        let target = opts.t_final * s as f64 / opts.samples as f64;
        while t < target {
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };
            let err = dp.step(&mut gen, &y, step, opts.rtol, opts.atol);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if clamped { target } else { t + step };
                core::mem::swap(&mut y, &mut dp.y_new);
                let (first, rest) = dp.k.split_at_mut(1);
                core::mem::swap(&mut first[0], &mut rest[5]);
                rec.traj.accepted_steps += 1;
                check_trace(t, &y, n)?;
                if !clamped {
                    h = (step * factor).min(dt_max);
                }
            } else {
                rec.traj.rejected_steps += 1;
                h = step * factor;
                if h < h_min {
                    return Err(Error::Stiffness { t, dt: h });
                }
            }
        }
        let rho = DensityMatrix::unchecked(rho0.spec().clone(), y.clone());
        rec.record(s, s == opts.samples, t, &rho)?;
        if s == opts.samples {
            rec.traj.final_state = rho;
        }
    }
    Ok(rec.traj)
}

/// Classical fourth-order Runge–Kutta with a fixed step no larger than `dt`,
/// sharing output conventions with [`evolve`].
pub fn evolve_fixed_step(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    opts: &EvolveOptions,
    dt: f64,
) -> Result<Trajectory> {
    opts.validate(model, rho0)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let n = model.dim();
    let len = n * n;
    let mut gen = model.generator();
    let interval = opts.t_final / opts.samples as f64;
    let substeps = (interval / dt).ceil().max(1.0) as usize;
    let h = interval / substeps as f64;

    let mut rec = Recorder::new(opts, rho0);
    let mut y = rho0.data().to_vec();
    let mut k = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    let mut tmp = vec![ZERO; len];
    rec.record(0, false, 0.0, rho0)?;
    for s in 1..=opts.samples {
        for sub in 0..substeps {
            gen.apply(&y, &mut k[0]);
            for stage in 1..4 {
                let w = if stage == 3 { h } else { 0.5 * h };
                for i in 0..len {
                    tmp[i] = y[i] + k[stage - 1][i] * w;
                }
                gen.apply(&tmp, &mut k[stage]);
            }
            for i in 0..len {
                y[i] += (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]) * (h / 6.0);
            }
            rec.traj.accepted_steps += 1;
            let t = (s - 1) as f64 * interval + (sub + 1) as f64 * h;
            check_trace(t, &y, n)?;
        }
        let t = opts.t_final * s as f64 / opts.samples as f64;
        let rho = DensityMatrix::unchecked(rho0.spec().clone(), y.clone());
        rec.record(s, s == opts.samples, t, &rho)?;
        if s == opts.samples {
            rec.traj.final_state = rho;
        }
    }
    Ok(rec.traj)
}
