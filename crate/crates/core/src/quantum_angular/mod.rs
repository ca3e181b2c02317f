//! Rotational sector of the translation-reduced two-body problem.
//!
//! Radial grids are uniform in `rho = ln r`; polar angles sit on
//! Gauss–Legendre nodes in `cos theta`. Position-space amplitudes are stored
//! as `2 sqrt(2) pi * psi_phys`, the normalization in which the three gauge
//! angles have been integrated out, so that
//! `sum_j |psi_j|^2 = int |psi|^2 r_1^2 r_2^2 d cos(theta)` and projecting
//! onto the gauge conditions leaves the amplitude array untouched.

mod constraints;
mod reduced;
mod special;
mod switch;

pub use constraints::{
    singlet_coefficients, verify_expansion, verify_rotation_constraints, AngularOp, ProductExpansion, Slot,
    RotationConstraintReport,
};
pub use reduced::{
    apply_reduced_momentum, expectation, matrix_element, DerivativeScheme, Direction, Normalization, Observable,
    ReducedQuantumState, NORM_TOL,
};
pub use special::{
    cos_relative_angle, differentiation_matrix, gauss_legendre, legendre, legendre_addition_check, legendre_all,
    legendre_orthonormal_all, spherical_harmonic,
};
pub use switch::{quantum_switch_frame, switch_geometry, SwitchReport, SwitchStatus};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fixing::GaugeFrame;

/// Ratio between the stored position amplitude and `psi_phys`: the square
/// root of the gauge-angle volume `4 pi * 2 pi`.
pub const GAUGE_VOLUME_SQRT: f64 = 2.0 * std::f64::consts::SQRT_2 * PI;

/// Uniform grid in `rho = ln r` with `n` nodes including both ends. Sums use
/// the rectangle rule with weight `step()`, which is spectrally accurate for
/// amplitudes that decay before the grid edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialGridRecord", into = "RadialGridRecord")]
pub struct RadialGrid {
    rho_min: f64,
    rho_max: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RadialGridRecord {
    rho_min: f64,
    rho_max: f64,
    n: usize,
}

impl TryFrom<RadialGridRecord> for RadialGrid {
    type Error = Error;
    fn try_from(r: RadialGridRecord) -> Result<Self> {
        RadialGrid::new(r.rho_min, r.rho_max, r.n)
    }
}

impl From<RadialGrid> for RadialGridRecord {
    fn from(g: RadialGrid) -> Self {
        RadialGridRecord { rho_min: g.rho_min, rho_max: g.rho_max, n: g.n }
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { rho_min: -4.0, rho_max: 4.0, n: 128 }
    }
}

impl RadialGrid {
    pub fn new(rho_min: f64, rho_max: f64, n: usize) -> Result<Self> {
        if !(rho_min.is_finite() && rho_max.is_finite() && rho_max > rho_min) || n < 4 {
            return Err(Error::InvalidInput(format!("bad radial grid [{rho_min}, {rho_max}] with {n} nodes")));
        }
        Ok(Self { rho_min, rho_max, n })
    }

    /// Grid between radii `r_min > 0` and `r_max`.
    pub fn from_radii(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0) {
            return Err(Error::InvalidInput(format!("r_min = {r_min} must be positive")));
        }
        Self::new(r_min.ln(), r_max.ln(), n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn step(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.n - 1) as f64
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.rho_min + k as f64 * self.step()
    }

    pub fn r(&self, k: usize) -> f64 {
        self.rho(k).exp()
    }

    pub fn rhos(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.rho(k)).collect()
    }

    /// `r^2 dr = e^{3 rho} d rho` weight of node `k`.
    pub fn volume_weight(&self, k: usize) -> f64 {
        (3.0 * self.rho(k)).exp() * self.step()
    }
}

/// Gauss–Legendre nodes in `x = cos theta`, descending so that `theta` and
/// `u = -cot theta` ascend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngularGridRecord", into = "AngularGridRecord")]
pub struct AngularGrid {
    x: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AngularGridRecord {
    n: usize,
}

impl TryFrom<AngularGridRecord> for AngularGrid {
    type Error = Error;
    fn try_from(r: AngularGridRecord) -> Result<Self> {
        AngularGrid::new(r.n)
    }
}

impl From<AngularGrid> for AngularGridRecord {
    fn from(g: AngularGrid) -> Self {
        AngularGridRecord { n: g.len() }
    }
}

impl AngularGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("need at least two angular nodes".into()));
        }
        let (x, w) = gauss_legendre(n)?;
        Ok(Self { x, w })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.x[k].acos()
    }

    pub fn sin_theta(&self, k: usize) -> f64 {
        (1.0 - self.x[k] * self.x[k]).sqrt()
    }

    /// `u = -cot theta`.
    pub fn u(&self, k: usize) -> f64 {
        -self.x[k] / self.sin_theta(k)
    }

    pub fn us(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.u(k)).collect()
    }

    /// Quadrature weight of node `k` for `int du`.
    pub fn u_weight(&self, k: usize) -> f64 {
        self.w[k] / self.sin_theta(k).powi(3)
    }

    /// Orthonormal Legendre functions `P~_j(x_k)` for `j <= j_max`, row per node.
    pub fn legendre_table(&self, j_max: usize) -> Vec<Vec<f64>> {
        self.x.iter().map(|&x| legendre_orthonormal_all(j_max, x)).collect()
    }
}

/// Which rotational constraints a coefficient array satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularStage {
    /// Coefficients of the singlets `Phi(r_1, r_2; j)`.
    Singlet,
    /// Coefficients of `|r_1; 0, 0>|r_2; j, 0>` after `R_{B,C}`.
    Trivialized,
}

/// Coefficients `psi(r_1, r_2; j)`, row-major `[i1][i2][j]`. Slot 1 is the
/// axis particle of `frame`, slot 2 the plane particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularState {
    pub frame: GaugeFrame,
    pub grid_1: RadialGrid,
    pub grid_2: RadialGrid,
    pub j_max: usize,
    pub stage: AngularStage,
    pub amps: Vec<Complex64>,
}

impl AngularState {
    pub fn new(
        frame: GaugeFrame,
        grid_1: RadialGrid,
        grid_2: RadialGrid,
        j_max: usize,
        stage: AngularStage,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        let s = Self { frame, grid_1, grid_2, j_max, stage, amps };
        s.validate()?;
        Ok(s)
    }

    pub fn from_fn<F>(frame: GaugeFrame, grid_1: RadialGrid, grid_2: RadialGrid, j_max: usize, stage: AngularStage, f: F) -> Result<Self>
    where
        F: Fn(f64, f64, usize) -> Complex64,
    {
        let mut amps = Vec::with_capacity(grid_1.len() * grid_2.len() * (j_max + 1));
        for i1 in 0..grid_1.len() {
            for i2 in 0..grid_2.len() {
                for j in 0..=j_max {
                    amps.push(f(grid_1.r(i1), grid_2.r(i2), j));
                }
            }
        }
        Self::new(frame, grid_1, grid_2, j_max, stage, amps)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.grid_1.len() * self.grid_2.len() * (self.j_max + 1);
        if self.amps.len() != expected {
            return Err(Error::GridMismatch(format!("{} amplitudes, expected {expected}", self.amps.len())));
        }
        if !self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("angular amplitudes"));
        }
        self.frame.validate(3)
    }

    pub fn index(&self, i1: usize, i2: usize, j: usize) -> usize {
        (i1 * self.grid_2.len() + i2) * (self.j_max + 1) + j
    }

    pub fn radial_weight(&self, i1: usize, i2: usize) -> f64 {
        self.grid_1.volume_weight(i1) * self.grid_2.volume_weight(i2)
    }

    /// `(sum_j int int r_1^2 r_2^2 |psi|^2)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i1 in 0..self.grid_1.len() {
            for i2 in 0..self.grid_2.len() {
                let w = self.radial_weight(i1, i2);
                let base = self.index(i1, i2, 0);
                s += w * self.amps[base..=base + self.j_max].iter().map(|a| a.norm_sqr()).sum::<f64>();
            }
        }
        s.sqrt()
    }
}

fn parity(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `R_{B,C}`: each `j` sector picks up `(-1)^j`.
pub fn rotational_trivialize(state: &AngularState) -> Result<AngularState> {
    if state.stage != AngularStage::Singlet {
        return Err(Error::InvalidInput("state is already trivialized".into()));
    }
    let mut out = state.clone();
    for (k, a) in out.amps.iter_mut().enumerate() {
        *a *= parity(k % (state.j_max + 1));
    }
    out.stage = AngularStage::Trivialized;
    Ok(out)
}

/// `R_{B,C}^{-1}`.
pub fn rotational_untrivialize(state: &AngularState) -> Result<AngularState> {
    if state.stage != AngularStage::Trivialized {
        return Err(Error::InvalidInput("state is not trivialized".into()));
    }
    let mut out = state.clone();
    for (k, a) in out.amps.iter_mut().enumerate() {
        *a *= parity(k % (state.j_max + 1));
    }
    out.stage = AngularStage::Singlet;
    Ok(out)
}

/// Whether the position amplitudes still carry the uniform gauge angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionStage {
    Trivialized,
    Projected,
}

/// Amplitudes `2 sqrt(2) pi psi_phys(r_1, r_2, theta)` on the angular nodes,
/// row-major `[i1][i2][k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionAngularState {
    pub frame: GaugeFrame,
    pub grid_1: RadialGrid,
    pub grid_2: RadialGrid,
    pub angles: AngularGrid,
    pub stage: PositionStage,
    pub amps: Vec<Complex64>,
}

impl PositionAngularState {
    pub fn new(
        frame: GaugeFrame,
        grid_1: RadialGrid,
        grid_2: RadialGrid,
        angles: AngularGrid,
        stage: PositionStage,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        let s = Self { frame, grid_1, grid_2, angles, stage, amps };
        s.validate()?;
        Ok(s)
    }

    /// Samples `f(rho_1, rho_2, cos theta)`.
    pub fn from_fn<F>(
        frame: GaugeFrame,
        grid_1: RadialGrid,
        grid_2: RadialGrid,
        angles: AngularGrid,
        stage: PositionStage,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> Complex64,
    {
        let mut amps = Vec::with_capacity(grid_1.len() * grid_2.len() * angles.len());
        for i1 in 0..grid_1.len() {
            for i2 in 0..grid_2.len() {
                for &x in angles.cos_theta() {
                    amps.push(f(grid_1.rho(i1), grid_2.rho(i2), x));
                }
            }
        }
        Self::new(frame, grid_1, grid_2, angles, stage, amps)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.grid_1.len() * self.grid_2.len() * self.angles.len();
        if self.amps.len() != expected {
            return Err(Error::GridMismatch(format!("{} amplitudes, expected {expected}", self.amps.len())));
        }
        if !self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("position amplitudes"));
        }
        self.frame.validate(3)
    }

    pub fn index(&self, i1: usize, i2: usize, k: usize) -> usize {
        (i1 * self.grid_2.len() + i2) * self.angles.len() + k
    }

    /// `psi_phys` itself at a node.
    pub fn phys_value(&self, i1: usize, i2: usize, k: usize) -> Complex64 {
        self.amps[self.index(i1, i2, k)] / GAUGE_VOLUME_SQRT
    }

    pub fn weight(&self, i1: usize, i2: usize, k: usize) -> f64 {
        self.grid_1.volume_weight(i1) * self.grid_2.volume_weight(i2) * self.angles.weights()[k]
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid_1 != other.grid_1 || self.grid_2 != other.grid_2 || self.angles.len() != other.angles.len() {
            return Err(Error::GridMismatch("inner product of states on different grids".into()));
        }
        let mut s = Complex64::new(0.0, 0.0);
        for i1 in 0..self.grid_1.len() {
            for i2 in 0..self.grid_2.len() {
                for k in 0..self.angles.len() {
                    let idx = self.index(i1, i2, k);
                    s += self.amps[idx].conj() * other.amps[idx] * self.weight(i1, i2, k);
                }
            }
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|c| c.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }

    /// The same amplitudes read as a function of `(rho_1, rho_2, u)` in the
    /// measure `e^{3 rho_1} e^{3 rho_2} (1+u^2)^{-3/2}`.
    pub fn phys_in_reduced_coordinates(&self) -> ReducedQuantumState {
        ReducedQuantumState {
            frame: self.frame,
            grid_1: self.grid_1,
            grid_2: self.grid_2,
            angles: self.angles.clone(),
            normalization: Normalization::Phys,
            amps: self.amps.clone(),
        }
    }
}

/// Evaluates the Legendre series on the angular nodes. Singlet input is
/// trivialized first.
pub fn angular_to_position(state: &AngularState, angles: &AngularGrid) -> Result<PositionAngularState> {
    let state = match state.stage {
        AngularStage::Singlet => rotational_trivialize(state)?,
        AngularStage::Trivialized => state.clone(),
    };
    let table = angles.legendre_table(state.j_max);
    let n = angles.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); state.grid_1.len() * state.grid_2.len() * n];
    for i1 in 0..state.grid_1.len() {
        for i2 in 0..state.grid_2.len() {
            let base = state.index(i1, i2, 0);
            let coef = &state.amps[base..=base + state.j_max];
            for k in 0..n {
                amps[(i1 * state.grid_2.len() + i2) * n + k] =
                    coef.iter().zip(&table[k]).map(|(c, p)| c * p).sum();
            }
        }
    }
    PositionAngularState::new(state.frame, state.grid_1, state.grid_2, angles.clone(), PositionStage::Trivialized, amps)
}

/// Gauss–Legendre projection onto `j <= j_max`; exact on band-limited data
/// with `j_max < n_nodes`.
pub fn position_to_angular(state: &PositionAngularState, j_max: usize) -> Result<AngularState> {
    let table = state.angles.legendre_table(j_max);
    let w = state.angles.weights();
    let n = state.angles.len();
    let mut amps = Vec::with_capacity(state.grid_1.len() * state.grid_2.len() * (j_max + 1));
    for i1 in 0..state.grid_1.len() {
        for i2 in 0..state.grid_2.len() {
            let base = state.index(i1, i2, 0);
            let mut c = vec![Complex64::new(0.0, 0.0); j_max + 1];
            for k in 0..n {
                let a = state.amps[base + k] * w[k];
                for (cj, p) in c.iter_mut().zip(&table[k]) {
                    *cj += a * p;
                }
            }
            amps.extend(c);
        }
    }
    AngularState::new(state.frame, state.grid_1, state.grid_2, j_max, AngularStage::Trivialized, amps)
}

/// Projection onto `theta_B = phi_B = phi_C = 0`: drops the gauge angles,
/// leaving the amplitudes as they are.
pub fn project_gauge_angles(state: &PositionAngularState) -> Result<PositionAngularState> {
    if state.stage != PositionStage::Trivialized {
        return Err(Error::InvalidInput("gauge angles already projected".into()));
    }
    Ok(PositionAngularState { stage: PositionStage::Projected, ..state.clone() })
}

/// Inverse of [`project_gauge_angles`]: uniform average over the gauge angles.
pub fn average_gauge_angles(state: &PositionAngularState) -> Result<PositionAngularState> {
    if state.stage != PositionStage::Projected {
        return Err(Error::InvalidInput("gauge angles not projected".into()));
    }
    Ok(PositionAngularState { stage: PositionStage::Trivialized, ..state.clone() })
}

/// `(e^{3 rho_1} e^{3 rho_2} (1+u^2)^{-3/2})^{1/2}` at a node.
pub fn reduction_factor(grid_1: &RadialGrid, grid_2: &RadialGrid, angles: &AngularGrid, i1: usize, i2: usize, k: usize) -> f64 {
    (1.5 * (grid_1.rho(i1) + grid_2.rho(i2))).exp() * angles.sin_theta(k).powf(1.5)
}

/// Change of variables to `(rho_1, rho_2, u)` with the flat measure.
pub fn to_reduced_variables(state: &PositionAngularState) -> Result<ReducedQuantumState> {
    if state.stage != PositionStage::Projected {
        return Err(Error::InvalidInput("project the gauge angles first".into()));
    }
    Ok(state.phys_in_reduced_coordinates().to_normalization(Normalization::Reduced))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grids() -> (RadialGrid, RadialGrid, AngularGrid) {
        (RadialGrid::new(-3.0, 3.0, 24).unwrap(), RadialGrid::new(-2.5, 2.5, 20).unwrap(), AngularGrid::new(12).unwrap())
    }

    fn singlet_state(j_max: usize) -> AngularState {
        let (g1, g2, _) = small_grids();
        AngularState::from_fn(GaugeFrame::ABC, g1, g2, j_max, AngularStage::Singlet, |r1, r2, j| {
            let (a, b) = (r1.ln(), r2.ln());
            Complex64::new((-(a * a) - (b - 0.3).powi(2)).exp(), 0.2 * j as f64) / (1.0 + j as f64)
        })
        .unwrap()
    }

    #[test]
    fn radial_grid_basics() {
        let g = RadialGrid::default();
        assert_eq!(g.len(), 128);
        assert_eq!(g.rho(0), -4.0);
        assert!((g.rho(127) - 4.0).abs() < 1e-15);
        assert!(RadialGrid::from_radii(0.0, 1.0, 10).is_err());
        assert!(RadialGrid::new(1.0, 1.0, 10).is_err());
        let g = RadialGrid::from_radii(0.5, 8.0, 5).unwrap();
        assert!((g.r(4) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn angular_grid_u_nodes() {
        let a = AngularGrid::new(9).unwrap();
        let us = a.us();
        assert!(us.windows(2).all(|p| p[0] < p[1]));
        // odd count puts the middle node at theta = pi/2
        assert!(us[4].abs() < 1e-15);
        let total: f64 = (0..9).map(|k| a.u_weight(k) / (1.0 + a.u(k).powi(2)).powf(1.5)).sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn trivialization_signs_and_isometry() {
        let s = singlet_state(3);
        let t = rotational_trivialize(&s).unwrap();
        for i in 0..s.amps.len() {
            let j = i % 4;
            assert_eq!(t.amps[i], s.amps[i] * parity(j));
        }
        assert_eq!(t.norm(), s.norm());
        assert_eq!(rotational_untrivialize(&t).unwrap(), s);
        assert!(rotational_trivialize(&t).is_err());
    }

    #[test]
    fn j0_profile_is_angle_independent() {
        let (g1, g2, angles) = small_grids();
        let s = AngularState::from_fn(GaugeFrame::ABC, g1, g2, 0, AngularStage::Singlet, |_, _, _| Complex64::new(1.0, 0.0))
            .unwrap();
        let p = angular_to_position(&s, &angles).unwrap();
        for k in 0..angles.len() {
            assert!((p.phys_value(3, 4, k).re - 1.0 / (4.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn position_round_trip_and_norms() {
        let s = singlet_state(11);
        let (_, _, angles) = small_grids();
        let p = angular_to_position(&s, &angles).unwrap();
        let back = position_to_angular(&p, 11).unwrap();
        let t = rotational_trivialize(&s).unwrap();
        for (a, b) in back.amps.iter().zip(&t.amps) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((p.norm() / s.norm() - 1.0).abs() < 1e-12);
        let proj = project_gauge_angles(&p).unwrap();
        assert_eq!(proj.amps, p.amps);
        assert_eq!(proj.norm(), p.norm());
        assert_eq!(average_gauge_angles(&proj).unwrap(), p);
    }

    #[test]
    fn full_angular_measure_matches_coefficient_norm() {
        // integrate |psi_phys|^2 over both solid angles with psi_phys independent of the gauge angles
        let s = singlet_state(5);
        let (_, _, angles) = small_grids();
        let p = angular_to_position(&s, &angles).unwrap();
        let mut total = 0.0;
        for i1 in 0..p.grid_1.len() {
            for i2 in 0..p.grid_2.len() {
                for k in 0..angles.len() {
                    total += p.phys_value(i1, i2, k).norm_sqr() * p.weight(i1, i2, k) * 4.0 * PI * 2.0 * PI;
                }
            }
        }
        assert!((total.sqrt() / s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_variables_preserve_norm() {
        let s = singlet_state(7);
        let (_, _, angles) = small_grids();
        let p = project_gauge_angles(&angular_to_position(&s, &angles).unwrap()).unwrap();
        let r = to_reduced_variables(&p).unwrap();
        assert!((r.norm() / p.norm() - 1.0).abs() < 1e-12);
        assert!(to_reduced_variables(&average_gauge_angles(&p).unwrap()).is_err());
    }

    #[test]
    fn reduction_factor_on_equator() {
        let (g1, g2, _) = small_grids();
        let a = AngularGrid::new(5).unwrap();
        let f = reduction_factor(&g1, &g2, &a, 0, 0, 2);
        assert!((f - (1.5 * (g1.rho(0) + g2.rho(0))).exp()).abs() < 1e-15 * f);
    }

    #[test]
    fn json_round_trip() {
        let s = singlet_state(2);
        let text = serde_json::to_string(&s).unwrap();
        let back: AngularState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let (_, _, angles) = small_grids();
        let p = angular_to_position(&s, &angles).unwrap();
        let back: PositionAngularState = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
