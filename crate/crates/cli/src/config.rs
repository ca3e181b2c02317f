//! Run configuration: one JSON file with `tolerances`, `grids`, `potential`,
//! `seeds` and `suites`. Every field has a default, so `{}` is a valid config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use relframe::gauge_fixing::GaugeFrame;
use relframe::observables::{Potential, ReducedClassicalState};
use relframe::phase_space::PhaseSpacePoint;

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    pub grids: Grids,
    pub potential: Potential,
    pub seeds: Seeds,
    pub suites: Suites,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub fd_step: f64,
    pub euclidean: f64,
    pub inverse: f64,
    pub dirac: f64,
    pub hamiltonian: f64,
    pub trajectory: f64,
    pub frame_switch: f64,
    pub mass_slope: f64,
    pub legendre: f64,
    pub singlet: f64,
    pub norm: f64,
    pub observable: f64,
    pub geometry: f64,
    pub fidelity: f64,
    pub switch_norm: f64,
    /// Out-of-domain mass above which a quantum switch is flagged.
    pub lost_mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            euclidean: 1e-6,
            inverse: 1e-8,
            dirac: 1e-6,
            hamiltonian: 1e-12,
            trajectory: 1e-6,
            frame_switch: 1e-10,
            mass_slope: 0.05,
            legendre: 1e-12,
            singlet: 1e-12,
            norm: 1e-10,
            observable: 1e-8,
            geometry: 1e-12,
            fidelity: 0.999,
            switch_norm: 1e-2,
            lost_mass: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Radial grid of the reduction chain, used for both particles.
    pub radial: RadialSpec,
    pub angular: usize,
    pub switch_radial: RadialSpec,
    pub switch_angular: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            radial: RadialSpec { rho_min: -4.0, rho_max: 4.0, n: 128 },
            angular: 64,
            switch_radial: RadialSpec { rho_min: -2.0, rho_max: 2.0, n: 64 },
            switch_angular: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub base: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Suites {
    /// Suites run by `verify-algebra`; see [`crate::suites::ALL`].
    pub verify_algebra: Vec<String>,
    /// Random points per sampled suite.
    pub samples: usize,
    pub classify: Option<PhaseSpacePoint>,
    pub evolve: EvolveSpec,
    pub switch: SwitchSpec,
    pub quantum_reduce: QuantumReduceSpec,
    pub quantum_switch: QuantumSwitchSpec,
}

impl Default for Suites {
    fn default() -> Self {
        Self {
            verify_algebra: crate::suites::ALL.iter().map(|s| s.to_string()).collect(),
            samples: 100,
            classify: None,
            evolve: EvolveSpec::default(),
            switch: SwitchSpec::default(),
            quantum_reduce: QuantumReduceSpec::default(),
            quantum_switch: QuantumSwitchSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    Reduced,
    GaugeFixed,
    /// Both integrations plus the chart comparison.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSpec {
    pub initial: ReducedClassicalState,
    pub t_final: f64,
    pub dt: f64,
    pub mode: EvolveMode,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        Self { initial: ReducedClassicalState::e1(), t_final: 1.0, dt: 1e-3, mode: EvolveMode::Both }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchSpec {
    pub state: ReducedClassicalState,
    pub from: GaugeFrame,
    pub to: GaugeFrame,
}

impl Default for SwitchSpec {
    fn default() -> Self {
        Self { state: ReducedClassicalState::e1(), from: GaugeFrame::ABC, to: GaugeFrame::CBA }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumReduceSpec {
    /// Number of random Gaussian test states.
    pub states: usize,
    /// Write the reduced wave function of each state (large).
    pub write_states: bool,
}

impl Default for QuantumReduceSpec {
    fn default() -> Self {
        Self { states: 20, write_states: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumSwitchSpec {
    /// Width of the default Gaussian in `rho` and `cos theta`.
    pub width: f64,
}

impl Default for QuantumSwitchSpec {
    fn default() -> Self {
        Self { width: 0.3 }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}
