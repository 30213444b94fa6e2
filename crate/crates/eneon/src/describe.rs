//! Resolved-parameter report. The output is the normalized config as TOML with
//! every derived quantity appended as comments, so it parses back unchanged.

use std::fmt::Write;

use eneon_core::device::{derive_couplings, to_hz, DeviceParams};
use eneon_core::hamiltonians::{build_rwa_variant, product_state, squeeze_frame, truncation_guard, ModelConfig, Variant};
use eneon_core::lindblad::DissipationRates;
use eneon_core::operators::HilbertSpec;

use crate::config::{ExperimentConfig, Plan};
use crate::error::CliResult;
use crate::experiments::coupling_row;

pub fn describe(cfg: &ExperimentConfig) -> CliResult<String> {
    let plan = cfg.resolve()?;
    let mut out = cfg.to_toml()?;
    let mut warnings = Vec::new();
    let mut line = |s: String| {
        let _ = writeln!(out, "# {s}");
    };
    line(String::new());
    line(format!("experiment {}", cfg.experiment.name()));
    line(format!("output directory {}", cfg.output_dir().display()));

    let device = match &plan {
        Plan::Couplings { device, .. } | Plan::Sweep { device, .. } => Some(*device),
        Plan::Dynamics(p) => Some(p.device),
        Plan::Enhance(p) => Some(p.device),
        Plan::Nongaussian(_) => cfg.device.as_ref().map(|d| d.to_params()),
        Plan::Validate { .. } => None,
    };
    if let Some(device) = device {
        let cs = derive_couplings(&device)?;
        line("derived couplings".into());
        for (name, value) in coupling_row(&device, &cs) {
            line(format!("  {name} = {value:e}"));
        }
        line(format!("  gy2 / gx2 = {:.12}", cs.g_y2 / cs.g_x2));
        if cs.zero_point_inconsistent() {
            warnings.push(format!(
                "a_z = {:e} m overrides the trap value {:e} m; couplings use the override",
                cs.a_z, cs.a_z_from_trap
            ));
        }
    }

    match &plan {
        Plan::Couplings { rates: Some(r), .. } => line(rates_line(r)),
        Plan::Sweep { rates, radius, gap, .. } => {
            line(rates_line(rates));
            line(format!("R_K nodes {}, d_K nodes {}", radius.values()?.len(), gap.values()?.len()));
        }
        Plan::Dynamics(p) => {
            line(format!(
                "rates / Lambda{}: gamma_K = {:e}, gamma_a = {:e}, gamma_s = {:e}",
                p.variant.index(),
                p.rates.gamma_k,
                p.rates.gamma_a,
                p.rates.gamma_s
            ));
            line(format!("truncation N_a = {}, N_K = {}, t_final = {} (Lambda t)", p.n_phonon, p.n_magnon, p.t_final));
            if let Some(w) = truncation_margin(&p.device, p.variant, p.n_phonon, p.n_magnon)? {
                warnings.push(w);
            }
        }
        Plan::Enhance(p) => {
            let cs = derive_couplings(&p.device)?;
            if let Some((ratio, delta_a)) = p.drive {
                let f = squeeze_frame(ratio * delta_a, delta_a, cs.lambda2)?;
                line("squeeze frame".into());
                line(format!("  r = {:.6}", f.r));
                line(format!("  enhancement = {:.6}", f.enhancement()));
                line(format!("  Delta_a_eff_Hz = {:e}", to_hz(f.delta_a_eff)));
                line(format!("  Lambda2_eff_Hz = {:e}", to_hz(f.lambda_eff)));
                if let Some(v) = f.validity_warning() {
                    warnings.push(format!("squeezed-frame RWA doubtful: Lambda_eff / Delta_a_eff = {v:.3}"));
                }
            }
        }
        Plan::Nongaussian(p) => {
            line(format!("gamma_K / Lambda1 = {:.6}", p.gamma_ratio));
            line(format!("truncation N_a = {}, grid {}x{}", p.n_phonon, p.grid.n_re, p.grid.n_im));
            if p.gamma_ratio < 10.0 {
                warnings.push("gamma_K / Lambda1 is below 10; the eliminated model is unreliable".into());
            }
        }
        _ => {}
    }
    for w in &warnings {
        line(format!("warning: {w}"));
    }
    Ok(out)
}

fn truncation_margin(device: &DeviceParams, variant: Variant, n_a: usize, n_k: usize) -> CliResult<Option<String>> {
    let spec = HilbertSpec::full(n_a, n_k)?;
    let cs = derive_couplings(device)?;
    let h = build_rwa_variant(&ModelConfig::lab(spec.clone(), cs, variant))?;
    let (a, k, up) = variant.resonant_initial_state();
    let psi = product_state(&spec, a, k, up)?;
    Ok(truncation_guard(&h, &psi)?.map(|w| {
        format!("phonon level {} reachable within two steps of the cutoff N_a = {}", w.highest_level, w.phonon_dim)
    }))
}

fn rates_line(r: &DissipationRates) -> String {
    format!(
        "rates gamma_K = {:e} Hz, gamma_a = {:e} Hz, gamma_s = {:e} Hz",
        to_hz(r.gamma_k),
        to_hz(r.gamma_a),
        to_hz(r.gamma_s)
    )
}
