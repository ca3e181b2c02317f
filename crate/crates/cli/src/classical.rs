//! `classify`, `evolve` and the classical `switch`.

use std::path::Path;

use serde_json::json;

use relframe::classical_dynamics::{integrate_gauge_fixed, integrate_reduced, GaugeFixedTrajectory, ReducedTrajectory};
use relframe::classical_frames::{embed, switch_by_composition, switch_frame};
use relframe::gauge_fixing::{classify_orbit, GaugeFrame};
use relframe::observables::{DiracChart, ReducedClassicalState};
use relframe::phase_space::{constraint_gradients, numerical_rank, singular_values, PhaseSpacePoint, RANK_REL_TOL};

use crate::config::{Config, EvolveMode};
use crate::error::CliError;
use crate::output::{all_pass, format_row, read_json, Check, OutDir};

const CHART_COLUMNS: [&str; 6] = ["rho_b", "p_rho_b", "rho_c", "p_rho_c", "u", "p_u"];

pub fn classify(config: &Config, input: Option<&Path>, out: &OutDir) -> Result<bool, CliError> {
    let pt: PhaseSpacePoint = match input {
        Some(path) => read_json(path)?,
        None => config
            .suites
            .classify
            .clone()
            .ok_or_else(|| CliError::Usage("classify needs --input or suites.classify in the config".into()))?,
    };
    pt.validate()?;
    let grads = constraint_gradients(&pt);
    let sv = singular_values(&grads);
    let rank = numerical_rank(&grads, RANK_REL_TOL);
    let (dimension, error) = match classify_orbit(&pt) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.write_report(
        "classify.json",
        "classify",
        json!({
            "point": pt,
            "orbit_dimension": dimension,
            "gradient_rank": rank,
            "rank_relative_tolerance": RANK_REL_TOL,
            "singular_values": sv,
            "error": error,
        }),
    )?;
    match dimension {
        Some(d) => println!("classify: orbit dimension {d} (gradient rank {rank})"),
        None => println!("classify: failed: {}", error.as_deref().unwrap_or_default()),
    }
    Ok(dimension.is_some())
}

fn running_max(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0f64, |m, v| {
            *m = m.max(v);
            Some(*m)
        })
        .collect()
}

fn reduced_rows(traj: &ReducedTrajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = traj.csv_header();
    header.extend(CHART_COLUMNS.map(String::from));
    header.push("max_energy_drift".into());
    let core = traj.csv_rows();
    let drift = running_max(core.iter().map(|r| r[r.len() - 1]));
    let rows = core
        .into_iter()
        .zip(&traj.states)
        .zip(drift)
        .map(|((mut row, s), d)| {
            row.extend(s.chart().to_array());
            row.push(d);
            format_row(&row)
        })
        .collect();
    (header, rows)
}

fn gauge_fixed_rows(traj: &GaugeFixedTrajectory, charts: &[DiracChart]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = traj.csv_header();
    header.extend(CHART_COLUMNS.map(String::from));
    header.push("max_energy_drift".into());
    let drift = running_max(traj.diagnostics.iter().map(|d| d.energy_drift));
    let rows = traj
        .csv_rows()
        .into_iter()
        .zip(charts)
        .zip(drift)
        .map(|((mut row, c), d)| {
            row.extend(c.to_array());
            row.push(d);
            format_row(&row)
        })
        .collect();
    (header, rows)
}

pub fn evolve(config: &Config, out: &OutDir) -> Result<bool, CliError> {
    let spec = &config.suites.evolve;
    let v = config.potential;
    let frame = GaugeFrame::ABC;
    let mut body = json!({
        "initial": spec.initial,
        "t_final": spec.t_final,
        "dt": spec.dt,
        "potential": v,
    });
    let mut pass = true;
    let mut reduced_charts = None;
    if matches!(spec.mode, EvolveMode::Reduced | EvolveMode::Both) {
        let traj = integrate_reduced(&spec.initial, &v, spec.t_final, spec.dt)?;
        let (header, rows) = reduced_rows(&traj);
        out.write_csv("trajectory_reduced.csv", &header, &rows)?;
        pass &= traj.status.is_completed();
        body["reduced"] = json!({
            "status": traj.status,
            "samples": traj.states.len(),
            "max_energy_drift": traj.max_energy_drift(),
        });
        reduced_charts = Some(traj.states.iter().map(ReducedClassicalState::chart).collect::<Vec<_>>());
    }
    if matches!(spec.mode, EvolveMode::GaugeFixed | EvolveMode::Both) {
        let traj = integrate_gauge_fixed(&embed(&spec.initial, &frame)?, &frame, &v, spec.t_final, spec.dt)?;
        let charts = traj.charts()?;
        let (header, rows) = gauge_fixed_rows(&traj, &charts);
        out.write_csv("trajectory_gauge_fixed.csv", &header, &rows)?;
        pass &= traj.status.is_completed();
        let max_of = |f: fn(&relframe::classical_dynamics::StepDiagnostics) -> f64| {
            traj.diagnostics.iter().map(f).fold(0.0, f64::max)
        };
        body["gauge_fixed"] = json!({
            "frame": frame,
            "status": traj.status,
            "samples": traj.points.len(),
            "max_energy_drift": traj.max_energy_drift(),
            "max_gauge_drift": max_of(|d| d.gauge_drift),
            "max_constraint_drift": max_of(|d| d.constraint_drift),
        });
        if let Some(reduced) = &reduced_charts {
            let same_length = reduced.len() == charts.len();
            let deviation = reduced
                .iter()
                .zip(&charts)
                .flat_map(|(a, b)| a.to_array().into_iter().zip(b.to_array()).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            let check = Check::at_most("max chart deviation, gauge-fixed vs reduced", deviation, config.tolerances.trajectory);
            pass &= check.pass && same_length;
            body["checks"] = json!([check]);
        }
    }
    body["pass"] = json!(pass);
    out.write_report("evolve.json", "evolve", body)?;
    println!("evolve: {}", if pass { "completed, all checks pass" } else { "FAILED (see evolve.json)" });
    Ok(pass)
}

fn max_abs_diff(a: &ReducedClassicalState, b: &ReducedClassicalState) -> f64 {
    a.to_array().iter().zip(b.to_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn switch(config: &Config, input: Option<&Path>, out: &OutDir) -> Result<bool, CliError> {
    let spec = &config.suites.switch;
    let state: ReducedClassicalState = match input {
        Some(path) => read_json(path)?,
        None => spec.state,
    };
    let result = (|| -> Result<_, relframe::Error> {
        let primed = switch_frame(&state, &spec.from, &spec.to)?;
        let back = switch_frame(&primed, &spec.to, &spec.from)?;
        let composed = switch_by_composition(&state, &spec.from, &spec.to)?;
        Ok((primed, back, composed))
    })();
    let (primed, back, composed) = match result {
        Ok(x) => x,
        Err(e) => {
            out.write_report(
                "switch.json",
                "switch",
                json!({ "kind": "classical", "input": state, "status": "error", "error": e.to_string(), "pass": false }),
            )?;
            println!("switch: error: {e}");
            return Ok(false);
        }
    };
    let tol = config.tolerances.frame_switch;
    let checks = vec![
        Check::at_most("round trip", max_abs_diff(&back, &state), tol),
        Check::at_most("switch vs composition", max_abs_diff(&primed, &composed), tol),
    ];
    let pass = all_pass(&checks);
    out.write_json("switch_state.json", &primed)?;
    out.write_report(
        "switch.json",
        "switch",
        json!({
            "kind": "classical",
            "from": spec.from,
            "to": spec.to,
            "input": state,
            "output": primed,
            "status": "ok",
            "checks": checks,
            "pass": pass,
        }),
    )?;
    println!(
        "switch: qb_z' = {}, pb_z' = {}, qc_x' = {}, pc_x' = {}, qc_z' = {}, pc_z' = {}",
        primed.qb_z, primed.pb_z, primed.qc_x, primed.pc_x, primed.qc_z, primed.pc_z
    );
    Ok(pass)
}
