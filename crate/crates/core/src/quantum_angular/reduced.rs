//! Wave functions on `(rho_1, rho_2, u)` and the six reduced observables.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{AngularGrid, RadialGrid};
use crate::error::{Error, Result};
use crate::gauge_fixing::GaugeFrame;

/// Allowed deviation of the norm from one in [`expectation`].
pub const NORM_TOL: f64 = 1e-8;

/// `Phys`: amplitudes of `psi_phys` (times the gauge volume factor) with
/// measure `e^{3 rho_1} e^{3 rho_2} (1+u^2)^{-3/2}`. `Reduced`: the rescaled
/// amplitudes with the flat measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Phys,
    Reduced,
}

/// Amplitudes row-major `[i1][i2][k]`, `k` running over ascending `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedQuantumState {
    pub frame: GaugeFrame,
    pub grid_1: RadialGrid,
    pub grid_2: RadialGrid,
    pub angles: AngularGrid,
    pub normalization: Normalization,
    pub amps: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rho1,
    Rho2,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Rho1,
    Rho2,
    U,
    PRho1,
    PRho2,
    PU,
}

impl Observable {
    pub const ALL: [Observable; 6] =
        [Observable::Rho1, Observable::Rho2, Observable::U, Observable::PRho1, Observable::PRho2, Observable::PU];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Rho1 => "rho_1",
            Observable::Rho2 => "rho_2",
            Observable::U => "u",
            Observable::PRho1 => "p_rho_1",
            Observable::PRho2 => "p_rho_2",
            Observable::PU => "p_u",
        }
    }
}

/// `Spectral`: exact derivative of the function the samples represent,
/// i.e. the trigonometric interpolant in `rho` (FFT) and, in `u`, the
/// Legendre series in `cos theta` for phys amplitudes or the mapped series
/// `(1+u^2)^{-3/4} P~_j(cos theta(u))` for reduced amplitudes.
/// `CentralDifference`: second order in `rho`, three-point on the `u` nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    CentralDifference,
}

impl ReducedQuantumState {
    /// Samples `f(rho_1, rho_2, u)`.
    pub fn from_fn<F>(
        frame: GaugeFrame,
        grid_1: RadialGrid,
        grid_2: RadialGrid,
        angles: AngularGrid,
        normalization: Normalization,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> Complex64,
    {
        let us = angles.us();
        let mut amps = Vec::with_capacity(grid_1.len() * grid_2.len() * us.len());
        for i1 in 0..grid_1.len() {
            for i2 in 0..grid_2.len() {
                for &u in &us {
                    amps.push(f(grid_1.rho(i1), grid_2.rho(i2), u));
                }
            }
        }
        let s = Self { frame, grid_1, grid_2, angles, normalization, amps };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.grid_1.len() * self.grid_2.len() * self.angles.len();
        if self.amps.len() != expected {
            return Err(Error::GridMismatch(format!("{} amplitudes, expected {expected}", self.amps.len())));
        }
        if !self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("reduced amplitudes"));
        }
        Ok(())
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.grid_1.len(), self.grid_2.len(), self.angles.len())
    }

    pub fn index(&self, i1: usize, i2: usize, k: usize) -> usize {
        (i1 * self.grid_2.len() + i2) * self.angles.len() + k
    }

    pub fn weight(&self, i1: usize, i2: usize, k: usize) -> f64 {
        match self.normalization {
            Normalization::Reduced => self.grid_1.step() * self.grid_2.step() * self.angles.u_weight(k),
            Normalization::Phys => {
                self.grid_1.volume_weight(i1) * self.grid_2.volume_weight(i2) * self.angles.weights()[k]
            }
        }
    }

    fn with_amps(&self, amps: Vec<Complex64>) -> Self {
        Self { amps, ..self.clone() }
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid_1 != other.grid_1
            || self.grid_2 != other.grid_2
            || self.angles.len() != other.angles.len()
            || self.normalization != other.normalization
        {
            return Err(Error::GridMismatch("states live on different grids or normalizations".into()));
        }
        let (n1, n2, n3) = self.dims();
        let mut s = Complex64::new(0.0, 0.0);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for k in 0..n3 {
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

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::NotNormalized(n));
        }
        Ok(self.with_amps(self.amps.iter().map(|a| a / n).collect()))
    }

    /// Multiplies by `W^{1/2}` or `W^{-1/2}` to change normalization.
    pub fn to_normalization(&self, target: Normalization) -> Self {
        if target == self.normalization {
            return self.clone();
        }
        let (n1, n2, n3) = self.dims();
        let mut amps = self.amps.clone();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for k in 0..n3 {
                    let f = super::reduction_factor(&self.grid_1, &self.grid_2, &self.angles, i1, i2, k);
                    let idx = self.index(i1, i2, k);
                    amps[idx] = match target {
                        Normalization::Reduced => amps[idx] * f,
                        Normalization::Phys => amps[idx] / f,
                    };
                }
            }
        }
        Self { normalization: target, ..self.with_amps(amps) }
    }

    fn multiply(&self, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let (n1, n2, n3) = self.dims();
        let mut amps = self.amps.clone();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for k in 0..n3 {
                    amps[self.index(i1, i2, k)] *= f(i1, i2, k);
                }
            }
        }
        self.with_amps(amps)
    }

    /// Position observables act by multiplication.
    pub fn apply_position(&self, which: Direction) -> Self {
        match which {
            Direction::Rho1 => self.multiply(|i1, _, _| self.grid_1.rho(i1)),
            Direction::Rho2 => self.multiply(|_, i2, _| self.grid_2.rho(i2)),
            Direction::U => self.multiply(|_, _, k| self.angles.u(k)),
        }
    }

    /// `d/d rho_1`, `d/d rho_2` or `d/du` of the amplitudes.
    pub fn derivative(&self, which: Direction, scheme: DerivativeScheme) -> Self {
        let (n1, n2, n3) = self.dims();
        let (len, stride, lines): (usize, usize, Vec<usize>) = match which {
            Direction::Rho1 => (n1, n2 * n3, (0..n2 * n3).collect()),
            Direction::Rho2 => (n2, n3, (0..n1).flat_map(|i1| (0..n3).map(move |k| i1 * n2 * n3 + k)).collect()),
            Direction::U => (n3, 1, (0..n1 * n2).map(|l| l * n3).collect()),
        };
        if (which, scheme) == (Direction::U, DerivativeScheme::Spectral) {
            return self.with_amps(collocate_u(self));
        }
        let op = LineDerivative::new(which, scheme, self);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for start in lines {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = self.amps[start + i * stride];
            }
            let d = op.apply(&buf);
            for (i, v) in d.into_iter().enumerate() {
                out[start + i * stride] = v;
            }
        }
        self.with_amps(out)
    }
}

/// Spectral `d/du` on every line at once. `u` is the fastest index, so the
/// amplitudes form an `n_u x (n_1 n_2)` column-major matrix. Phys
/// amplitudes are differentiated as a Legendre series in `cos theta`,
/// reduced ones as `(1+u^2)^{-3/4}` times such a series.
fn collocate_u(state: &ReducedQuantumState) -> Vec<Complex64> {
    let a = &state.angles;
    let n = a.len();
    let lines = state.amps.len() / n;
    let d = super::differentiation_matrix(a.cos_theta(), a.weights());
    // d/du = -(1 - x^2)^{3/2} d/dx
    let scale: Vec<f64> = (0..n).map(|k| -a.sin_theta(k).powi(3)).collect();
    // (1+u^2)^{-3/4} = sin^{3/2} and its u-derivative
    let envelope: Vec<(f64, f64)> = (0..n)
        .map(|k| match state.normalization {
            Normalization::Phys => (1.0, 0.0),
            Normalization::Reduced => {
                let u = a.u(k);
                let e = a.sin_theta(k).powf(1.5);
                (e, -1.5 * u / (1.0 + u * u) * e)
            }
        })
        .collect();
    let q: Vec<Complex64> = state.amps.iter().enumerate().map(|(i, v)| v / envelope[i % n].0).collect();
    let re = &d * DMatrix::from_iterator(n, lines, q.iter().map(|c| c.re));
    let im = &d * DMatrix::from_iterator(n, lines, q.iter().map(|c| c.im));
    re.iter()
        .zip(im.iter())
        .zip(&q)
        .enumerate()
        .map(|(idx, ((&x, &y), &qv))| {
            let k = idx % n;
            Complex64::new(x, y) * (scale[k] * envelope[k].0) + qv * envelope[k].1
        })
        .collect()
}

enum LineDerivative {
    Fft { forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>>, k: Vec<f64> },
    Central { h: f64 },
    NonUniform { u: Vec<f64> },
}

impl LineDerivative {
    fn new(which: Direction, scheme: DerivativeScheme, state: &ReducedQuantumState) -> Self {
        match (which, scheme) {
            (Direction::Rho1 | Direction::Rho2, scheme) => {
                let g = if which == Direction::Rho1 { state.grid_1 } else { state.grid_2 };
                let h = g.step();
                if scheme == DerivativeScheme::CentralDifference {
                    return LineDerivative::Central { h };
                }
                let n = g.len();
                let mut planner = FftPlanner::new();
                let period = n as f64 * h;
                let k = (0..n)
                    .map(|m| {
                        if 2 * m == n {
                            0.0
                        } else if 2 * m < n {
                            2.0 * std::f64::consts::PI * m as f64 / period
                        } else {
                            2.0 * std::f64::consts::PI * (m as f64 - n as f64) / period
                        }
                    })
                    .collect();
                LineDerivative::Fft { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), k }
            }
            // the spectral u-derivative goes through `collocate_u`
            (Direction::U, _) => LineDerivative::NonUniform { u: state.angles.us() },
        }
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        match self {
            LineDerivative::Fft { forward, inverse, k } => {
                let mut buf = f.to_vec();
                forward.process(&mut buf);
                for (b, &km) in buf.iter_mut().zip(k) {
                    *b *= Complex64::new(0.0, km / n as f64);
                }
                inverse.process(&mut buf);
                buf
            }
            LineDerivative::Central { h } => {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
                }
                out[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * h);
                out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * h);
                out
            }
            LineDerivative::NonUniform { u } => {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for i in 1..n - 1 {
                    let (h1, h2) = (u[i] - u[i - 1], u[i + 1] - u[i]);
                    out[i] = f[i - 1] * (-h2 / (h1 * (h1 + h2)))
                        + f[i] * ((h2 - h1) / (h1 * h2))
                        + f[i + 1] * (h1 / (h2 * (h1 + h2)));
                }
                out[0] = (f[1] - f[0]) / (u[1] - u[0]);
                out[n - 1] = (f[n - 1] - f[n - 2]) / (u[n - 1] - u[n - 2]);
                out
            }
        }
    }
}

/// Momentum conjugate to `which`. Reduced normalization: `-i d`. Phys
/// normalization: `-i d_rho - 3i/2` and `-i d_u + (3i/2) u/(1+u^2)`.
pub fn apply_reduced_momentum(which: Direction, state: &ReducedQuantumState, scheme: DerivativeScheme) -> ReducedQuantumState {
    let d = state.derivative(which, scheme);
    let minus_i = Complex64::new(0.0, -1.0);
    let (n1, n2, n3) = state.dims();
    let mut amps = d.amps;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for k in 0..n3 {
                let idx = state.index(i1, i2, k);
                let extra = match (state.normalization, which) {
                    (Normalization::Reduced, _) => 0.0,
                    (Normalization::Phys, Direction::Rho1 | Direction::Rho2) => -1.5,
                    (Normalization::Phys, Direction::U) => {
                        let u = state.angles.u(k);
                        1.5 * u / (1.0 + u * u)
                    }
                };
                amps[idx] = minus_i * amps[idx] + Complex64::new(0.0, extra) * state.amps[idx];
            }
        }
    }
    state.with_amps(amps)
}

fn apply_observable(obs: Observable, state: &ReducedQuantumState, scheme: DerivativeScheme) -> ReducedQuantumState {
    match obs {
        Observable::Rho1 => state.apply_position(Direction::Rho1),
        Observable::Rho2 => state.apply_position(Direction::Rho2),
        Observable::U => state.apply_position(Direction::U),
        Observable::PRho1 => apply_reduced_momentum(Direction::Rho1, state, scheme),
        Observable::PRho2 => apply_reduced_momentum(Direction::Rho2, state, scheme),
        Observable::PU => apply_reduced_momentum(Direction::U, state, scheme),
    }
}

/// `<psi| O |psi>` without any normalization check.
pub fn matrix_element(obs: Observable, state: &ReducedQuantumState, scheme: DerivativeScheme) -> Complex64 {
    state.inner(&apply_observable(obs, state, scheme)).expect("same grid")
}

/// Real part of `<psi| O |psi>` for a normalized state.
pub fn expectation(obs: Observable, state: &ReducedQuantumState, scheme: DerivativeScheme) -> Result<f64> {
    let n = state.norm();
    if !((n - 1.0).abs() <= NORM_TOL) {
        return Err(Error::NotNormalized(n));
    }
    Ok(matrix_element(obs, state, scheme).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_state(n_rho: usize, n_u: usize, mu: f64) -> ReducedQuantumState {
        let g = RadialGrid::new(-4.0, 4.0, n_rho).unwrap();
        ReducedQuantumState::from_fn(GaugeFrame::ABC, g, g, AngularGrid::new(n_u).unwrap(), Normalization::Reduced, |a, b, u| {
            let env = (-(a - mu).powi(2) / (2.0 * 0.16) - (b + 0.2).powi(2) / (2.0 * 0.12) - (u - 0.3).powi(2) / 0.5).exp();
            Complex64::from_polar(env, 0.7 * a - 0.4 * b + 0.9 * u)
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn centered_gaussian_has_zero_mean() {
        let s = gaussian_state(64, 32, 0.0);
        assert!(expectation(Observable::Rho1, &s, DerivativeScheme::Spectral).unwrap().abs() < 1e-12);
        let s = gaussian_state(64, 32, 0.8);
        assert!((expectation(Observable::Rho1, &s, DerivativeScheme::Spectral).unwrap() - 0.8).abs() < 1e-12);
        assert!((expectation(Observable::Rho2, &s, DerivativeScheme::Spectral).unwrap() + 0.2).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_rejected() {
        let mut s = gaussian_state(32, 16, 0.0);
        s.amps.iter_mut().for_each(|a| *a *= 2.0);
        assert!(matches!(expectation(Observable::Rho1, &s, DerivativeScheme::Spectral), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn plane_wave_eigenvalue() {
        let g = RadialGrid::new(-4.0, 4.0, 64).unwrap();
        let a = AngularGrid::new(4).unwrap();
        let h = g.step();
        let k = 1.3;
        let s = ReducedQuantumState::from_fn(GaugeFrame::ABC, g, g, a.clone(), Normalization::Reduced, |r, _, _| {
            Complex64::from_polar(1.0, k * r)
        })
        .unwrap();
        let p = apply_reduced_momentum(Direction::Rho1, &s, DerivativeScheme::CentralDifference);
        let idx = s.index(30, 5, 1);
        let ratio = p.amps[idx] / s.amps[idx];
        assert!((ratio.re - k).abs() < k.powi(3) * h * h / 6.0 * 1.01);
        assert!((ratio.re - (k * h).sin() / h).abs() < 1e-12);
        // a grid-periodic mode is exact under the spectral scheme
        let kp = 2.0 * std::f64::consts::PI * 5.0 / (64.0 * h);
        let s = ReducedQuantumState::from_fn(GaugeFrame::ABC, g, g, a, Normalization::Reduced, |r, _, _| {
            Complex64::from_polar(1.0, kp * r)
        })
        .unwrap();
        let p = apply_reduced_momentum(Direction::Rho1, &s, DerivativeScheme::Spectral);
        for i in [0, 17, 63] {
            let idx = s.index(i, 2, 3);
            assert!((p.amps[idx] / s.amps[idx] - kp).norm() < 1e-10);
        }
    }

    fn commutator_error(n_rho: usize, scheme: DerivativeScheme, x: Direction) -> f64 {
        let s = gaussian_state(n_rho, 24, 0.1);
        let px = apply_reduced_momentum(x, &s.apply_position(x), scheme);
        let xp = apply_reduced_momentum(x, &s, scheme).apply_position(x);
        let c = s.inner(&xp).unwrap() - s.inner(&px).unwrap();
        (c - Complex64::new(0.0, 1.0)).norm()
    }

    #[test]
    fn canonical_commutator() {
        for x in [Direction::Rho1, Direction::Rho2] {
            assert!(commutator_error(96, DerivativeScheme::Spectral, x) < 1e-10);
            let coarse = commutator_error(64, DerivativeScheme::CentralDifference, x);
            let fine = commutator_error(127, DerivativeScheme::CentralDifference, x);
            let order = (coarse / fine).log2() / (126.0f64 / 63.0).log2();
            assert!((order - 2.0).abs() < 0.2, "{x:?}: order {order}");
        }
    }

    #[test]
    fn conjugation_by_weight() {
        // W^{1/2} p_phys W^{-1/2} = -i d on the reduced amplitudes
        let red = gaussian_state(96, 48, 0.0);
        let phys = red.to_normalization(Normalization::Phys);
        for which in [Direction::Rho1, Direction::Rho2, Direction::U] {
            let a = apply_reduced_momentum(which, &phys, DerivativeScheme::Spectral).to_normalization(Normalization::Reduced);
            let b = apply_reduced_momentum(which, &red, DerivativeScheme::Spectral);
            let diff: f64 = a.amps.iter().zip(&b.amps).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let scale: f64 = b.amps.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-6 * scale, "{which:?}: {diff} vs {scale}");
        }
    }

    #[test]
    fn u_derivative_matches_analytic() {
        let g = RadialGrid::new(-1.0, 1.0, 4).unwrap();
        let f = |u: f64| Complex64::from_polar((-(u - 0.4).powi(2) / 0.5).exp(), 0.8 * u);
        let df = |u: f64| f(u) * Complex64::new(-2.0 * (u - 0.4) / 0.5, 0.8);
        let mut errs = Vec::new();
        for n in [32, 64] {
            let a = AngularGrid::new(n).unwrap();
            for norm in [Normalization::Reduced, Normalization::Phys] {
                let s = ReducedQuantumState::from_fn(GaugeFrame::ABC, g, g, a.clone(), norm, |_, _, u| f(u)).unwrap();
                let d = s.derivative(Direction::U, DerivativeScheme::Spectral);
                let err = (0..n)
                    .filter(|&k| a.u(k).abs() < 3.0)
                    .map(|k| (d.amps[s.index(1, 2, k)] - df(a.u(k))).norm())
                    .fold(0.0, f64::max);
                errs.push(err);
            }
        }
        // spectral convergence from 32 to 64 nodes
        assert!(errs[2] < 1e-5 && errs[3] < 1e-5, "{errs:?}");
        assert!(errs[2] < 1e-2 * errs[0] && errs[3] < 1e-2 * errs[1], "{errs:?}");
    }

    #[test]
    fn normalization_round_trip() {
        let red = gaussian_state(32, 16, 0.0);
        let back = red.to_normalization(Normalization::Phys).to_normalization(Normalization::Reduced);
        for (a, b) in red.amps.iter().zip(&back.amps) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((red.to_normalization(Normalization::Phys).norm() - 1.0).abs() < 1e-13);
    }
}
