//! Experiment runners. Each writes its tables through an [`OutputSink`].

use eneon_core::device::{derive_couplings, resonance_detunings, sweep_node, to_hz, CouplingSet, DeviceParams, SweepGrid};
use eneon_core::hamiltonians::{build_rwa_variant, squeeze_frame, truncation_guard, ModeOperators, ModelConfig, SqueezeFrame};
use eneon_core::lindblad::{build_dissipators, evolve, DensityMatrix, DissipationRates, EvolveOptions, LindbladModel};
use eneon_core::operators::{HilbertSpec, Subsystem};
use eneon_core::tomography::{negativity_point, NegativityParams, NegativityPoint};
use rayon::prelude::*;

use crate::config::{DynamicsPlan, EnhancePlan, NongaussianPlan, Plan};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputSink, Table};
use crate::validate;

pub fn run(plan: &Plan, sink: &mut OutputSink) -> CliResult<()> {
    match plan {
        Plan::Couplings { device, rates } => couplings(device, rates.as_ref(), sink),
        Plan::Sweep { device, rates, radius, gap } => {
            let radii = radius.values()?;
            let gaps = gap.values()?;
            sweep(device, rates, radii, gaps, sink)
        }
        Plan::Dynamics(p) => dynamics(p, sink),
        Plan::Enhance(p) => enhance(p, sink),
        Plan::Nongaussian(p) => nongaussian(p, sink),
        Plan::Validate { fast } => {
            let checks = validate::run_checks(*fast, |c| println!("{c}"));
            let mut table = Table::new(["check", "status", "detail"]);
            for c in &checks {
                table.push(vec![Cell::Text(c.name.clone()), Cell::Text(format!("{:?}", c.status).to_lowercase()), Cell::Text(c.detail.clone())]);
            }
            sink.table("checks", &table)?;
            match validate::failures(&checks) {
                0 => Ok(()),
                failed => Err(CliError::ValidationFailed { failed }),
            }
        }
    }
}

/// Column names and values of every derived coupling quantity.
pub fn coupling_row(device: &DeviceParams, cs: &CouplingSet) -> Vec<(&'static str, f64)> {
    let [d1, d2, d3] = resonance_detunings(cs);
    vec![
        ("R_K_m", device.sphere_radius),
        ("d_K_m", device.gap),
        ("distance_m", cs.h_dist),
        ("omega_a_Hz", to_hz(cs.omega_a)),
        ("omega_s_Hz", to_hz(cs.omega_s)),
        ("omega_K_Hz", to_hz(cs.omega_k)),
        ("a_z_m", cs.a_z),
        ("a_z_trap_m", cs.a_z_from_trap),
        ("alpha_quartic_Hz", to_hz(cs.alpha_quartic)),
        ("M_K_A_per_m", cs.m_k),
        ("gT_Hz", to_hz(cs.g_t)),
        ("gL_Hz", to_hz(cs.g_l)),
        ("gx2_Hz", to_hz(cs.g_x2)),
        ("gy2_Hz", to_hz(cs.g_y2)),
        ("Lambda1_Hz", to_hz(cs.lambda1)),
        ("Lambda2_Hz", to_hz(cs.lambda2)),
        ("Lambda3_Hz", to_hz(cs.lambda3)),
        ("Delta1_Hz", to_hz(d1)),
        ("Delta2_Hz", to_hz(d2)),
        ("Delta3_Hz", to_hz(d3)),
        ("Omega_p_Hz", to_hz(cs.omega_p_drive)),
    ]
}

fn zero_point_warning(cs: &CouplingSet, sink: &mut OutputSink) {
    if cs.zero_point_inconsistent() {
        sink.warn(format!(
            "a_z = {:.4e} m overrides the trap value {:.4e} m; couplings use the override",
            cs.a_z, cs.a_z_from_trap
        ));
    }
}

fn couplings(device: &DeviceParams, rates: Option<&DissipationRates>, sink: &mut OutputSink) -> CliResult<()> {
    let cs = derive_couplings(device)?;
    zero_point_warning(&cs, sink);
    let row = coupling_row(device, &cs);
    let mut cols: Vec<&str> = row.iter().map(|c| c.0).collect();
    let mut cells: Vec<Cell> = row.iter().map(|c| Cell::Num(c.1)).collect();
    if let Some(r) = rates {
        cols.push("strong_coupling");
        cells.push(Cell::Bool(eneon_core::device::is_strong_coupling(&cs, r)));
    }
    let mut table = Table::new(cols);
    table.push(cells);
    sink.table("couplings", &table)
}

fn sweep(device: &DeviceParams, rates: &DissipationRates, radii: Vec<f64>, gaps: Vec<f64>, sink: &mut OutputSink) -> CliResult<()> {
    let jobs: Vec<(usize, usize)> = (0..radii.len()).flat_map(|i| (0..gaps.len()).map(move |j| (i, j))).collect();
    let nodes = jobs
        .par_iter()
        .map(|&(i, j)| sweep_node(device, radii[i], gaps[j], rates).map(|n| ((i, j), n)))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = SweepGrid::assemble(radii, gaps, nodes)?;
    let mut table = Table::new([
        "R_K_m", "d_K_m", "gT_Hz", "gL_Hz", "gx2_Hz", "gy2_Hz", "Lambda1_Hz", "Lambda2_Hz", "Lambda3_Hz", "strong_coupling",
    ]);
    for n in grid.nodes() {
        let cs = &n.couplings;
        let mut row: Vec<Cell> = [n.sphere_radius, n.gap].into_iter().map(Cell::Num).collect();
        row.extend([cs.g_t, cs.g_l, cs.g_x2, cs.g_y2, cs.lambda1, cs.lambda2, cs.lambda3].into_iter().map(|v| Cell::Num(to_hz(v))));
        row.push(Cell::Bool(n.strong));
        table.push(row);
    }
    sink.table("sweep", &table)
}

/// `dims=[15,3,2] roles=[phonon,magnon,spin]`
pub fn describe_spec(spec: &HilbertSpec) -> String {
    let roles: Vec<String> = (0..spec.dims().len())
        .map(|k| match spec.role(k) {
            Some(Subsystem::Phonon) => "phonon".into(),
            Some(Subsystem::Magnon) => "magnon".into(),
            Some(Subsystem::Spin) => "spin".into(),
            None => "unlabelled".into(),
        })
        .collect();
    let dims: Vec<String> = spec.dims().iter().map(|d| d.to_string()).collect();
    format!("dims=[{}] roles=[{}]", dims.join(","), roles.join(","))
}

fn density_table(rho: &DensityMatrix, t: f64) -> Table {
    let mut table = Table::new(["row", "col", "re", "im"])
        .with_preamble(format!("HilbertSpec {}", describe_spec(rho.spec())))
        .with_preamble(format!("t_dimensionless {t:e}"));
    let n = rho.dim();
    for i in 0..n {
        for j in 0..n {
            let z = rho.get(i, j);
            table.push(vec![Cell::Int(i as i64), Cell::Int(j as i64), Cell::Num(z.re), Cell::Num(z.im)]);
        }
    }
    table
}

fn dynamics(p: &DynamicsPlan, sink: &mut OutputSink) -> CliResult<()> {
    let cs = derive_couplings(&p.device)?;
    zero_point_warning(&cs, sink);
    let lambda = p.variant.coupling(&cs);
    let k = p.variant.index() as usize;
    let detuning = resonance_detunings(&cs)[k - 1];
    if detuning.abs() > lambda.abs() {
        sink.warn(format!(
            "device detuning Delta{k} = {:.4e} Hz exceeds Lambda{k}; dynamics assume exact resonance",
            to_hz(detuning)
        ));
    }
    let spec = HilbertSpec::full(p.n_phonon, p.n_magnon)?;
    let h = build_rwa_variant(&ModelConfig::lab(spec.clone(), cs, p.variant))?;
    let h = &h * (1.0 / lambda);
    let (a, kk, up) = p.variant.resonant_initial_state();
    let psi = eneon_core::hamiltonians::product_state(&spec, a, kk, up)?;
    if let Some(w) = truncation_guard(&h, &psi)? {
        sink.warn(format!("phonon level {} reachable within two steps of the cutoff N_a = {}", w.highest_level, w.phonon_dim));
    }
    let model = LindbladModel::new(h, build_dissipators(&p.rates, &spec)?)?;
    let ops = ModeOperators::new(&spec)?;
    let opts = EvolveOptions::new(p.t_final, p.samples)
        .tolerances(p.rtol, p.atol)
        .observe("n_phonon", ops.n_phonon.clone())
        .observe("n_magnon", ops.n_magnon.clone())
        .observe("spin_excitation", ops.spin_excitation.clone())
        .checkpoints(p.checkpoint_every, p.checkpoint_every > 0);
    let traj = evolve(&model, &DensityMatrix::from_pure(&psi), &opts)?;
    let mut table = Table::new(["t_dimensionless", "n_phonon", "n_magnon", "spin_excitation", "trace_error"]);
    let series: Vec<&[f64]> =
        ["n_phonon", "n_magnon", "spin_excitation"].iter().map(|n| traj.observable(n).unwrap_or_default()).collect();
    for (i, &t) in traj.times.iter().enumerate() {
        let mut row = vec![Cell::Num(t)];
        row.extend(series.iter().map(|s| Cell::Num(s[i])));
        row.push(Cell::Num(traj.trace_errors[i]));
        table.push(row);
    }
    sink.table("trajectory", &table)?;
    for (idx, (t, rho)) in traj.checkpoints.iter().enumerate() {
        sink.table(&format!("checkpoint_{idx:04}"), &density_table(rho, *t))?;
    }
    Ok(())
}

fn enhance(p: &EnhancePlan, sink: &mut OutputSink) -> CliResult<()> {
    let radii = p.radius.values()?;
    let mut table = Table::new(["R_K_m", "d_K_m", "r", "enhancement", "Lambda2_Hz", "Lambda2_eff_Hz"]);
    for &radius in &radii {
        let cs = derive_couplings(&DeviceParams { sphere_radius: radius, ..p.device })?;
        for &r in &p.squeeze_r {
            let f = SqueezeFrame::from_r(r, 1.0, cs.lambda2)?;
            table.push(vec![
                Cell::Num(radius),
                Cell::Num(p.device.gap),
                Cell::Num(r),
                Cell::Num(f.enhancement()),
                Cell::Num(to_hz(cs.lambda2)),
                Cell::Num(to_hz(f.lambda_eff)),
            ]);
        }
    }
    if !p.squeeze_r.is_empty() {
        sink.table("enhancement", &table)?;
    }
    if let Some((ratio, delta_a)) = p.drive {
        let cs = derive_couplings(&p.device)?;
        let f = squeeze_frame(ratio * delta_a, delta_a, cs.lambda2)?;
        if let Some(v) = f.validity_warning() {
            sink.warn(format!("squeezed-frame RWA doubtful: Lambda_eff / Delta_a_eff = {v:.3}"));
        }
        let mut t = Table::new([
            "drive_ratio", "Delta_a_Hz", "r", "enhancement", "Delta_a_eff_Hz", "Lambda2_Hz", "Lambda2_eff_Hz", "validity_ratio",
        ]);
        t.push(
            [ratio, to_hz(delta_a), f.r, f.enhancement(), to_hz(f.delta_a_eff), to_hz(cs.lambda2), to_hz(f.lambda_eff), f.lambda_eff / f.delta_a_eff]
                .into_iter()
                .map(Cell::Num)
                .collect(),
        );
        sink.table("squeeze_frame", &t)?;
    }
    Ok(())
}

fn nongaussian(p: &NongaussianPlan, sink: &mut OutputSink) -> CliResult<()> {
    if p.gamma_ratio < 10.0 {
        sink.warn(format!("gamma_K / Lambda1 = {:.3} is below 10; the eliminated model is unreliable", p.gamma_ratio));
    }
    let params = NegativityParams { lambda1: 1.0, gamma_k: p.gamma_ratio, n_phonon: p.n_phonon, spin_up: p.spin_up, grid: p.grid };
    let mut points =
        p.alphas.par_iter().map(|&a| negativity_point(a, &params)).collect::<Result<Vec<NegativityPoint>, _>>()?;
    points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let mut neg = Table::new(["alpha", "W_min", "W_min_refined"]);
    let mut fid = Table::new(["alpha", "fidelity_added_m2", "mean_phonon"]);
    let n_op = eneon_core::operators::number(p.n_phonon)?;
    for pt in &points {
        neg.push(vec![Cell::Num(pt.alpha), Cell::Num(pt.w_min), Cell::Num(pt.w_min_refined)]);
        let n_op = n_op.clone().with_spec(pt.steady_state.spec().clone())?;
        fid.push(vec![Cell::Num(pt.alpha), Cell::Num(pt.fidelity_added), Cell::Num(pt.steady_state.expectation(&n_op)?.re)]);
    }
    sink.table("negativity", &neg)?;
    sink.table("fidelity", &fid)?;
    if p.write_maps {
        for (k, pt) in points.iter().enumerate() {
            let g = &pt.map.grid;
            let mut t = Table::new(["re_alpha", "im_alpha", "W"]).with_preamble(format!("alpha {:e}", pt.alpha));
            for j in 0..g.n_im {
                for i in 0..g.n_re {
                    t.push(vec![Cell::Num(g.re(i)), Cell::Num(g.im(j)), Cell::Num(pt.map.get(i, j))]);
                }
            }
            sink.table(&format!("wigner_{k:03}"), &t)?;
        }
    }
    Ok(())
}
