//! `quantum-reduce` and `quantum-switch`.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use relframe::gauge_fixing::GaugeFrame;
use relframe::quantum_angular::{
    angular_to_position, expectation, position_to_angular, project_gauge_angles, quantum_switch_frame,
    rotational_trivialize, rotational_untrivialize, switch_geometry, to_reduced_variables, AngularGrid,
    DerivativeScheme, Normalization, Observable, PositionAngularState, PositionStage, RadialGrid, ReducedQuantumState,
    SwitchStatus,
};

use crate::config::{Config, RadialSpec};
use crate::error::CliError;
use crate::output::{all_pass, format_row, read_json, Check, OutDir};

fn radial(spec: &RadialSpec) -> Result<RadialGrid, CliError> {
    Ok(RadialGrid::new(spec.rho_min, spec.rho_max, spec.n)?)
}

struct ChainResult {
    norm_deviation: f64,
    /// `(observable, phys, reduced)`
    expectations: Vec<(Observable, f64, f64)>,
    reduced: ReducedQuantumState,
}

/// Random smooth Gaussian in `(rho_1, rho_2, u)` with a linear phase.
fn test_state(seed: u64, grid: RadialGrid, angles: &AngularGrid) -> Result<ReducedQuantumState, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (a1, a2, au) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    let (w1, w2, wu) = (r.gen_range(0.3..0.5), r.gen_range(0.3..0.5), r.gen_range(0.4..0.8));
    let (k1, k2, ku) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    let psi = ReducedQuantumState::from_fn(GaugeFrame::ABC, grid, grid, angles.clone(), Normalization::Reduced, |x, y, u| {
        let env = -((x - a1) / w1).powi(2) / 2.0 - ((y - a2) / w2).powi(2) / 2.0 - ((u - au) / wu).powi(2) / 2.0;
        Complex64::from_polar(env.exp(), k1 * x + k2 * y + ku * u)
    })?;
    Ok(psi.normalized()?)
}

/// Singlet state built from a reduced test state, pushed through
/// trivialize, position transform, gauge projection and variable change.
fn run_chain(seed: u64, grid: RadialGrid, angles: &AngularGrid) -> Result<ChainResult, CliError> {
    let phys = test_state(seed, grid, angles)?.to_normalization(Normalization::Phys);
    let nodal = PositionAngularState::new(GaugeFrame::ABC, grid, grid, angles.clone(), PositionStage::Trivialized, phys.amps)?;
    let singlet = rotational_untrivialize(&position_to_angular(&nodal, angles.len() - 1)?)?;

    let n0 = singlet.norm();
    let trivialized = rotational_trivialize(&singlet)?;
    let position = angular_to_position(&trivialized, angles)?;
    let projected = project_gauge_angles(&position)?;
    let reduced = to_reduced_variables(&projected)?;
    let norm_deviation = [trivialized.norm(), position.norm(), projected.norm(), reduced.norm()]
        .iter()
        .map(|n| (n / n0 - 1.0).abs())
        .fold(0.0, f64::max);
    let phys_view = projected.phys_in_reduced_coordinates();
    let expectations = Observable::ALL
        .iter()
        .map(|&obs| {
            Ok((
                obs,
                expectation(obs, &phys_view, DerivativeScheme::Spectral)?,
                expectation(obs, &reduced, DerivativeScheme::Spectral)?,
            ))
        })
        .collect::<Result<_, relframe::Error>>()?;
    Ok(ChainResult { norm_deviation, expectations, reduced })
}

pub fn quantum_reduce(config: &Config, out: &OutDir) -> Result<bool, CliError> {
    let grid = radial(&config.grids.radial)?;
    let angles = AngularGrid::new(config.grids.angular)?;
    let spec = &config.suites.quantum_reduce;
    let base = config.seeds.base.wrapping_mul(1000);
    let results: Vec<ChainResult> =
        (0..spec.states as u64).into_par_iter().map(|i| run_chain(base.wrapping_add(i), grid, &angles)).collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let (mut norm_dev, mut obs_dev) = (0.0f64, 0.0f64);
    for (i, r) in results.iter().enumerate() {
        norm_dev = norm_dev.max(r.norm_deviation);
        for &(obs, a, b) in &r.expectations {
            obs_dev = obs_dev.max((a - b).abs());
            let mut row = vec![i.to_string(), obs.name().to_string()];
            row.extend(format_row(&[a, b, (a - b).abs()]));
            rows.push(row);
        }
        if spec.write_states {
            out.write_json(&format!("reduced_state_{i:03}.json"), &r.reduced)?;
        }
    }
    out.write_csv("expectations.csv", &["state", "observable", "phys", "reduced", "abs_diff"], &rows)?;
    let checks = vec![
        Check::at_most("norm deviation through the chain", norm_dev, config.tolerances.norm),
        Check::at_most("phys vs reduced expectations", obs_dev, config.tolerances.observable),
    ];
    let pass = all_pass(&checks);
    out.write_report(
        "quantum_reduce.json",
        "quantum-reduce",
        json!({
            "states": spec.states,
            "radial": config.grids.radial,
            "angular": config.grids.angular,
            "checks": checks,
            "pass": pass,
        }),
    )?;
    println!("quantum-reduce: {} states, norm deviation {norm_dev:.1e}, observable deviation {obs_dev:.1e}", spec.states);
    Ok(pass)
}

fn default_switch_state(config: &Config) -> Result<PositionAngularState, CliError> {
    let grid = radial(&config.grids.switch_radial)?;
    let angles = AngularGrid::new(config.grids.switch_angular)?;
    let w2 = config.suites.quantum_switch.width.powi(2);
    Ok(PositionAngularState::from_fn(GaugeFrame::ABC, grid, grid, angles, PositionStage::Projected, |x, y, ct| {
        Complex64::new((-(x * x + y * y + ct * ct) / (2.0 * w2)).exp(), 0.0)
    })?)
}

pub fn quantum_switch(config: &Config, input: Option<&Path>, out: &OutDir) -> Result<bool, CliError> {
    let tol = &config.tolerances;
    let psi = match input {
        Some(path) => {
            let s: PositionAngularState = read_json(path)?;
            s.validate()?;
            s
        }
        None => default_switch_state(config)?,
    };
    let (d, c) = switch_geometry(1.0, 1.0, 0.0)?;
    let geometry = (d - 2f64.sqrt()).abs().max((c - 0.5f64.sqrt()).abs());
    let (once, first) = quantum_switch_frame(&psi, tol.lost_mass)?;
    let (twice, second) = quantum_switch_frame(&once, tol.lost_mass)?;
    let overlap = psi.inner(&twice)?.norm();
    let fidelity = overlap * overlap / (psi.norm().powi(2) * twice.norm().powi(2));
    let checks = vec![
        Check::at_most("geometry at s1 = s2 = 1, cos theta = 0", geometry, tol.geometry),
        Check::at_least("round-trip fidelity", fidelity, tol.fidelity),
        Check::at_most("norm deviation", first.norm_deviation.max(second.norm_deviation), tol.switch_norm),
    ];
    let pass = all_pass(&checks);
    let warned = [&first, &second].iter().any(|r| matches!(r.status, SwitchStatus::Warning { .. }));
    out.write_json("quantum_switch_state.json", &once)?;
    out.write_report(
        "quantum_switch.json",
        "quantum-switch",
        json!({
            "status": if warned { "warning" } else { "ok" },
            "fidelity": fidelity,
            "forward": first,
            "backward": second,
            "checks": checks,
            "pass": pass,
        }),
    )?;
    println!(
        "quantum-switch: fidelity {fidelity:.6}, out-of-domain mass {:.1e} / {:.1e}{}",
        first.lost_mass,
        second.lost_mass,
        if warned { " (warning)" } else { "" }
    );
    Ok(pass)
}
