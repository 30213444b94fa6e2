//! The `validate` check list.

use std::fmt;
use std::time::Instant;

use eneon_core::device::{derive_couplings, to_hz};
use eneon_core::hamiltonians::{SqueezeFrame, Variant};
use eneon_core::Result;

use crate::benchmarks as bm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, detail: String) -> Self {
        Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail }
    }

    fn info(name: &str, detail: String) -> Self {
        Check { name: name.into(), status: Status::Info, detail }
    }

    fn skip(name: &str) -> Self {
        Check { name: name.into(), status: Status::Skip, detail: "skipped (--fast)".into() }
    }

    fn errored(name: &str, err: eneon_core::Error) -> Self {
        Check { name: name.into(), status: Status::Fail, detail: format!("error: {err}") }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Skip => "SKIP",
        };
        write!(f, "[{tag}] {:<32} {}", self.name, self.detail)
    }
}

fn guarded(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::errored(name, e))
}

/// Run every check; slow dissipative benchmarks are skipped when `fast`.
pub fn run_checks(fast: bool, mut report: impl FnMut(&Check)) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |c: Check| {
        report(&c);
        out.push(c);
    };

    push(guarded("reference couplings", || {
        let cs = derive_couplings(&bm::reference_device())?;
        let (l1, l2) = (to_hz(cs.lambda1), to_hz(cs.lambda2));
        let err = (l1 / bm::REFERENCE_LAMBDA1_HZ - 1.0).abs().max((l2 / bm::REFERENCE_LAMBDA2_HZ - 1.0).abs());
        Ok(Check::new("reference couplings", err < 0.05, format!("Lambda1 = {l1:.4e} Hz, Lambda2 = {l2:.4e} Hz")))
    }));
    push(guarded("finite-difference oracle", || {
        let res = bm::oracle_max_residual(&[50e-9, 200e-9, 1000e-9], &[10e-9, 50e-9])?;
        Ok(Check::new("finite-difference oracle", res < 1e-5, format!("max relative residual {res:.2e}")))
    }));
    push(guarded("coupling identities", || {
        let res = bm::identity_residual(&bm::reference_device())?;
        Ok(Check::new("coupling identities", res < 1e-12, format!("max relative violation {res:.2e}")))
    }));
    push(guarded("R_K^-7/2 scaling (d_K << R_K)", || {
        let s = bm::scaling_slope(10e-6, 1e-3, 10e-9)?;
        Ok(Check::new("R_K^-7/2 scaling (d_K << R_K)", (s / -3.5 - 1.0).abs() < 0.02, format!("slope {s:.4} over [10 um, 1 mm]")))
    }));
    push(guarded("scaling slope, 100 nm..10 um", || {
        let s = bm::scaling_slope(100e-9, 10e-6, 10e-9)?;
        Ok(Check::info("scaling slope, 100 nm..10 um", format!("slope {s:.4} ({:+.2}% from -7/2)", 100.0 * (s / -3.5 - 1.0))))
    }));
    push(guarded("closed transfer", || {
        let r = bm::transfer(10, 3)?;
        let ok = r.time_error < 0.01 && r.population_error < 1e-4 && r.charge_drift < 1e-8;
        Ok(Check::new(
            "closed transfer",
            ok,
            format!("time err {:.2e}, population err {:.2e}, charge drift {:.2e}", r.time_error, r.population_error, r.charge_drift),
        ))
    }));
    for variant in [Variant::One, Variant::Two, Variant::Three] {
        let name = format!("damped envelope, variant {}", variant.index());
        push(guarded(&name, || {
            let r = bm::dissipative_envelope(variant)?;
            let ok = r.strictly_decreasing() && r.max_trace_error < 1e-9;
            Ok(Check::new(&name, ok, format!("{} maxima, trace err {:.1e}", r.peaks.len(), r.max_trace_error)))
        }));
    }
    push(guarded("squeeze enhancement", || {
        let e = SqueezeFrame::from_r(4.1, 1.0, 1.0)?.enhancement();
        let want = 4.1f64.cosh().powi(2);
        Ok(Check::new("squeeze enhancement", (e / want - 1.0).abs() < 1e-3, format!("cosh^2(4.1) = {e:.2}")))
    }));
    push(guarded("squeezed gaps (N_a = 240)", || {
        let worst = [0.5, 1.0, 1.5].into_iter().map(|r| bm::squeezing_gap_error(r, 240, 3)).collect::<Result<Vec<_>>>()?;
        let w = worst.iter().copied().fold(0.0, f64::max);
        Ok(Check::new("squeezed gaps (N_a = 240)", w < 0.01, format!("max relative gap error {w:.2e} for r <= 1.5")))
    }));
    push(guarded("squeezed gaps (N_a = 60)", || {
        let w = bm::squeezing_gap_error(1.5, 60, 3)?;
        Ok(Check::info("squeezed gaps (N_a = 60)", format!("relative gap error {w:.2e} at r = 1.5")))
    }));
    push(guarded("enhanced Lambda2 at 1 um", || {
        let v = bm::enhanced_lambda2_at_micron()?;
        Ok(Check::info("enhanced Lambda2 at 1 um", format!("Lambda2 cosh^2(4.1) = {v:.4e} Hz")))
    }));
    push(guarded("integrator agreement", || {
        let d = bm::integrator_agreement()?;
        Ok(Check::new("integrator agreement", d < 1e-6, format!("trace distance {d:.2e}")))
    }));
    push(guarded("steady-state methods", || {
        let d = bm::steady_state_agreement()?;
        Ok(Check::new("steady-state methods", d < 1e-6, format!("trace distance {d:.2e}")))
    }));
    push(guarded("state integrity", || {
        let (herm, eig) = bm::integrity_extremes()?;
        Ok(Check::new("state integrity", herm <= 1e-10 && eig >= -1e-8, format!("hermiticity {herm:.1e}, min eigenvalue {eig:.1e}")))
    }));

    if fast {
        push(Check::skip("adiabatic elimination"));
        push(Check::skip("steady-state negativity"));
    } else {
        push(guarded("adiabatic elimination", || {
            let t = Instant::now();
            let (d50, d200) = bm::elimination(15, 4)?;
            Ok(Check::new(
                "adiabatic elimination",
                d50 <= 0.05 && d200 < d50,
                format!("d(50) = {d50:.3e}, d(200) = {d200:.3e} [{:.1} s]", t.elapsed().as_secs_f64()),
            ))
        }));
        push(guarded("steady-state negativity", || {
            let r = bm::negativity_trend(25, &[0.3, 0.5, 0.7, 1.0])?;
            let ok = r.up[0].1 < -0.05
                && r.up_increasing()
                && r.down.iter().all(|p| p.1 >= -1e-6)
                && r.vacuum_fidelity >= 0.999;
            let trend: Vec<String> = r.up.iter().map(|(a, w)| format!("{a}:{w:.4}")).collect();
            Ok(Check::new(
                "steady-state negativity",
                ok,
                format!("W = [{}], F(|2>) = {:.6}", trend.join(", "), r.vacuum_fidelity),
            ))
        }));
    }
    out
}

pub fn failures(checks: &[Check]) -> usize {
    checks.iter().filter(|c| c.status == Status::Fail).count()
}
