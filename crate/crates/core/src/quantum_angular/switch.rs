//! Pointwise frame switch between `[A, B, C]` and `[C, B, A]`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{position_to_angular, PositionAngularState, PositionStage};
use crate::error::{Error, Result};

/// For a node `(s_1, s_2, cos theta)` of the new frame (distances from the
/// new origin to the axis and plane particles, angle between them) returns
/// the old axis distance and old `cos theta`. The old plane distance is
/// `s_2` itself. The map is its own inverse.
pub fn switch_geometry(s1: f64, s2: f64, cos_theta: f64) -> Result<(f64, f64)> {
    let d2 = s1 * s1 + s2 * s2 - 2.0 * s1 * s2 * cos_theta;
    if !(d2 > 0.0) {
        return Err(Error::Degenerate("axis particle coincides with the old origin".into()));
    }
    let d = d2.sqrt();
    Ok((d, ((s2 - s1 * cos_theta) / d).clamp(-1.0, 1.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SwitchStatus {
    Ok,
    Warning { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub norm_in: f64,
    pub norm_out: f64,
    /// `|norm_out / norm_in - 1|`.
    pub norm_deviation: f64,
    /// `1 - norm_out^2 / norm_in^2`, clamped at zero.
    pub lost_mass: f64,
    /// Output nodes whose preimage left the radial grid.
    pub out_of_domain_nodes: usize,
    pub total_nodes: usize,
    pub status: SwitchStatus,
}

/// Four-point Lagrange stencil for fractional index `t` on `0..n`.
fn cubic_stencil(t: f64, n: usize) -> Option<(usize, [f64; 4])> {
    if !(t >= 0.0 && t <= (n - 1) as f64) {
        return None;
    }
    let i0 = (t.floor() as usize).clamp(1, n - 3) - 1;
    let x = t - i0 as f64;
    let mut w = [0.0; 4];
    for (a, wa) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for b in 0..4 {
            if a != b {
                p *= (x - b as f64) / (a as f64 - b as f64);
            }
        }
        *wa = p;
    }
    Some((i0, w))
}

/// `psi'(s_1, s_2, theta) = psi(d, s_2, gamma)`: the state as described from
/// the old plane particle, which becomes the origin while the old origin
/// becomes the plane particle. The input is expanded in Legendre functions
/// of `cos theta` on its own nodes, interpolated with cubic Lagrange
/// weights in the first `rho`, and evaluated at `cos gamma`. Nodes whose
/// preimage lies outside the first radial grid are set to zero; the lost
/// mass is reported and flagged above `mass_threshold`.
pub fn quantum_switch_frame(state: &PositionAngularState, mass_threshold: f64) -> Result<(PositionAngularState, SwitchReport)> {
    if state.stage != PositionStage::Projected {
        return Err(Error::InvalidInput("switch acts on gauge-projected states".into()));
    }
    let n_ang = state.angles.len();
    let j_max = n_ang - 1;
    let coef = position_to_angular(state, j_max)?;
    let (g1, g2) = (state.grid_1, state.grid_2);
    let (n1, n2) = (g1.len(), g2.len());
    let x = state.angles.cos_theta().to_vec();

    let rows: Vec<(Vec<Complex64>, usize)> = (0..n1)
        .into_par_iter()
        .map(|i1| {
            let mut out = Vec::with_capacity(n2 * n_ang);
            let mut missed = 0;
            let mut c = vec![Complex64::new(0.0, 0.0); j_max + 1];
            for i2 in 0..n2 {
                for &xk in &x {
                    let value = switch_geometry(g1.r(i1), g2.r(i2), xk).ok().and_then(|(d, cos_g)| {
                        let (i0, w) = cubic_stencil((d.ln() - g1.rho_min()) / g1.step(), n1)?;
                        c.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                        for (s, ws) in w.iter().enumerate() {
                            let base = coef.index(i0 + s, i2, 0);
                            for (cj, a) in c.iter_mut().zip(&coef.amps[base..=base + j_max]) {
                                *cj += a * ws;
                            }
                        }
                        let p = super::legendre_orthonormal_all(j_max, cos_g);
                        Some(c.iter().zip(&p).map(|(a, b)| a * b).sum::<Complex64>())
                    });
                    out.push(value.unwrap_or_else(|| {
                        missed += 1;
                        Complex64::new(0.0, 0.0)
                    }));
                }
            }
            (out, missed)
        })
        .collect();

    let out_of_domain_nodes = rows.iter().map(|r| r.1).sum();
    let amps = rows.into_iter().flat_map(|r| r.0).collect();
    let out = PositionAngularState::new(state.frame.swapped(), g1, g2, state.angles.clone(), PositionStage::Projected, amps)?;
    let norm_in = state.norm();
    let norm_out = out.norm();
    let lost_mass = (1.0 - (norm_out / norm_in).powi(2)).max(0.0);
    let status = if lost_mass > mass_threshold {
        SwitchStatus::Warning { reason: format!("lost mass {lost_mass:.3e} exceeds {mass_threshold:.1e}") }
    } else {
        SwitchStatus::Ok
    };
    let report = SwitchReport {
        norm_in,
        norm_out,
        norm_deviation: (norm_out / norm_in - 1.0).abs(),
        lost_mass,
        out_of_domain_nodes,
        total_nodes: n1 * n2 * n_ang,
        status,
    };
    Ok((out, report))
}
