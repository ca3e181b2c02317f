//! Angular-momentum constraints on expansions over `|j_1, m_1>|j_2, m_2>`,
//! using exact ladder matrix elements.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AngularStage, AngularState};

/// `(j, m)` coefficients of the singlet `Phi(j)`, pairing `(j, -m)` in the
/// first slot with `(j, m)` in the second: `(-1)^{j-m} / sqrt(2j+1)`.
pub fn singlet_coefficients(j: usize) -> Vec<(i64, f64)> {
    let jj = j as i64;
    let norm = ((2 * j + 1) as f64).sqrt();
    (-jj..=jj).map(|m| (m, if (jj - m) % 2 == 0 { 1.0 } else { -1.0 } / norm)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    /// Axis particle (`B` in `[A, B, C]`).
    B,
    /// Plane particle.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularOp {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

type Key = (i64, i64, i64, i64);

/// `sum psi_{j1 m1 j2 m2}(r_1, r_2) |j1, m1>|j2, m2>` with one radial array
/// per angular label.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductExpansion {
    weights: Vec<f64>,
    terms: BTreeMap<Key, Vec<Complex64>>,
}

fn ladder(j: i64, m: i64, step: i64) -> f64 {
    ((j * (j + 1) - m * (m + step)) as f64).max(0.0).sqrt()
}

impl ProductExpansion {
    pub fn from_angular(state: &AngularState) -> Self {
        let n1 = state.grid_1.len();
        let n2 = state.grid_2.len();
        let mut weights = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                weights.push(state.radial_weight(i1, i2));
            }
        }
        let radial = |j: usize| -> Vec<Complex64> {
            (0..n1).flat_map(|i1| (0..n2).map(move |i2| (i1, i2))).map(|(i1, i2)| state.amps[state.index(i1, i2, j)]).collect()
        };
        let mut terms = BTreeMap::new();
        for j in 0..=state.j_max {
            let f = radial(j);
            let jj = j as i64;
            match state.stage {
                AngularStage::Singlet => {
                    for (m, c) in singlet_coefficients(j) {
                        terms.insert((jj, -m, jj, m), f.iter().map(|a| a * c).collect());
                    }
                }
                AngularStage::Trivialized => {
                    terms.insert((0, 0, jj, 0), f);
                }
            }
        }
        Self { weights, terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Vec<Complex64>)> {
        self.terms.iter()
    }

    /// Mutable radial array of one angular label, for building test inputs.
    pub fn term_mut(&mut self, key: Key) -> Option<&mut Vec<Complex64>> {
        self.terms.get_mut(&key)
    }

    fn empty_like(&self) -> Self {
        Self { weights: self.weights.clone(), terms: BTreeMap::new() }
    }

    fn accumulate(&mut self, key: Key, f: &[Complex64], c: Complex64) {
        let entry = self.terms.entry(key).or_insert_with(|| vec![Complex64::new(0.0, 0.0); f.len()]);
        for (e, v) in entry.iter_mut().zip(f) {
            *e += v * c;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, f) in &other.terms {
            out.accumulate(*k, f, Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.empty_like();
        for (k, f) in &self.terms {
            out.accumulate(*k, f, c);
        }
        out
    }

    pub fn apply(&self, slot: Slot, op: AngularOp) -> Self {
        match op {
            AngularOp::X => self.apply(slot, AngularOp::Plus).add(&self.apply(slot, AngularOp::Minus)).scale(0.5.into()),
            AngularOp::Y => self
                .apply(slot, AngularOp::Plus)
                .add(&self.apply(slot, AngularOp::Minus).scale((-1.0).into()))
                .scale(Complex64::new(0.0, -0.5)),
            AngularOp::Z | AngularOp::Plus | AngularOp::Minus => {
                let mut out = self.empty_like();
                for (&(j1, m1, j2, m2), f) in &self.terms {
                    let (j, m) = match slot {
                        Slot::B => (j1, m1),
                        Slot::C => (j2, m2),
                    };
                    let (c, m_new) = match op {
                        AngularOp::Z => (m as f64, m),
                        AngularOp::Plus => (ladder(j, m, 1), m + 1),
                        _ => (ladder(j, m, -1), m - 1),
                    };
                    if c == 0.0 {
                        continue;
                    }
                    let key = match slot {
                        Slot::B => (j1, m_new, j2, m2),
                        Slot::C => (j1, m1, j2, m_new),
                    };
                    out.accumulate(key, f, c.into());
                }
                out
            }
        }
    }

    /// `R_B + R_C` component.
    pub fn apply_total(&self, op: AngularOp) -> Self {
        self.apply(Slot::B, op).add(&self.apply(Slot::C, op))
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|f| f.iter().zip(&self.weights).map(|(a, w)| w * a.norm_sqr()).sum::<f64>())
            .fold(0.0, |acc, x| acc + x)
            .sqrt()
    }
}

/// Residual norms `||O psi|| / ||psi||` of a constraint set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationConstraintReport {
    pub stage: AngularStage,
    pub state_norm: f64,
    pub residuals: Vec<(String, f64)>,
    pub max_residual: f64,
}

/// Singlet stage: `(R_B + R_C)^2` and `R_B^z + R_C^z`. Trivialized stage:
/// `R_B^x, R_B^y, R_B^z, R_C^z`.
pub fn verify_expansion(psi: &ProductExpansion, stage: AngularStage) -> RotationConstraintReport {
    let norm = psi.norm();
    let rel = |x: &ProductExpansion| if norm > 0.0 { x.norm() / norm } else { x.norm() };
    let residuals: Vec<(String, f64)> = match stage {
        AngularStage::Singlet => {
            let jz = psi.apply_total(AngularOp::Z);
            let jp = psi.apply_total(AngularOp::Plus);
            let jm = psi.apply_total(AngularOp::Minus);
            let j2 = jz
                .apply_total(AngularOp::Z)
                .add(&jp.apply_total(AngularOp::Minus).add(&jm.apply_total(AngularOp::Plus)).scale(0.5.into()));
            vec![("(R_B+R_C)^2".into(), rel(&j2)), ("R_B^z+R_C^z".into(), rel(&jz))]
        }
        AngularStage::Trivialized => vec![
            ("R_B^x".into(), rel(&psi.apply(Slot::B, AngularOp::X))),
            ("R_B^y".into(), rel(&psi.apply(Slot::B, AngularOp::Y))),
            ("R_B^z".into(), rel(&psi.apply(Slot::B, AngularOp::Z))),
            ("R_C^z".into(), rel(&psi.apply(Slot::C, AngularOp::Z))),
        ],
    };
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    RotationConstraintReport { stage, state_norm: norm, residuals, max_residual }
}

pub fn verify_rotation_constraints(state: &AngularState) -> RotationConstraintReport {
    verify_expansion(&ProductExpansion::from_angular(state), state.stage)
}

#[cfg(test)]
mod tests {
    use super::super::{rotational_trivialize, RadialGrid};
    use super::*;
    use crate::gauge_fixing::GaugeFrame;
    use nalgebra::DMatrix;

    type CMat = DMatrix<Complex64>;

    fn spin_matrices(j: usize) -> [CMat; 3] {
        let d = 2 * j + 1;
        let jj = j as i64;
        let m_of = |i: usize| jj - i as i64;
        let mut jp = CMat::zeros(d, d);
        let mut jz = CMat::zeros(d, d);
        for i in 0..d {
            jz[(i, i)] = (m_of(i) as f64).into();
            if i > 0 {
                // |m> -> |m+1>, index decreases by one
                jp[(i - 1, i)] = ladder(jj, m_of(i), 1).into();
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        [jx, jy, jz]
    }

    fn kron(a: &CMat, b: &CMat) -> CMat {
        a.kronecker(b)
    }

    #[test]
    fn singlet_coefficient_values() {
        assert_eq!(singlet_coefficients(0), vec![(0, 1.0)]);
        let c = singlet_coefficients(1);
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(c, vec![(-1, s), (0, -s), (1, s)]);
    }

    #[test]
    fn dense_oracle_annihilates_singlet() {
        for j in 0..=3usize {
            let d = 2 * j + 1;
            let jj = j as i64;
            let idx = |m: i64| (jj - m) as usize;
            let mut phi = CMat::zeros(d * d, 1);
            for (m, c) in singlet_coefficients(j) {
                phi[(idx(-m) * d + idx(m), 0)] = c.into();
            }
            let id = CMat::identity(d, d);
            let s = spin_matrices(j);
            let mut j2 = CMat::zeros(d * d, d * d);
            for a in 0..3 {
                let total = kron(&s[a], &id) + kron(&id, &s[a]);
                j2 += &total * &total;
            }
            assert!((&j2 * &phi).norm() < 1e-12, "j = {j}");
            assert!((phi.norm() - 1.0).abs() < 1e-14);
        }
    }

    fn state(stage: AngularStage) -> AngularState {
        let g = RadialGrid::new(-2.0, 2.0, 6).unwrap();
        AngularState::from_fn(GaugeFrame::ABC, g, g, 8, stage, |r1, r2, j| Complex64::new(r1 - r2, j as f64 + r1 * r2)).unwrap()
    }

    #[test]
    fn singlet_residual_vanishes() {
        let rep = verify_rotation_constraints(&state(AngularStage::Singlet));
        assert!(rep.max_residual < 1e-12, "{rep:?}");
    }

    #[test]
    fn trivialized_residuals_vanish() {
        let t = rotational_trivialize(&state(AngularStage::Singlet)).unwrap();
        let rep = verify_rotation_constraints(&t);
        assert_eq!(rep.residuals.len(), 4);
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn corrupted_sector_is_flagged() {
        let s = state(AngularStage::Singlet);
        let mut e = ProductExpansion::from_angular(&s);
        for v in e.term_mut((2, -1, 2, 1)).unwrap() {
            *v *= 1.5;
        }
        assert!(verify_expansion(&e, AngularStage::Singlet).max_residual > 1e-3);
        let t = rotational_trivialize(&s).unwrap();
        let mut e = ProductExpansion::from_angular(&t);
        e.accumulate((1, 1, 3, 0), &vec![Complex64::new(1.0, 0.0); 36], Complex64::new(1.0, 0.0));
        assert!(verify_expansion(&e, AngularStage::Trivialized).max_residual > 1e-3);
    }

    #[test]
    fn ladder_algebra() {
        // [R^x, R^y] = i R^z on a product term
        let s = state(AngularStage::Trivialized);
        let e = ProductExpansion::from_angular(&s).apply(Slot::C, AngularOp::Plus);
        let xy = e.apply(Slot::C, AngularOp::Y).apply(Slot::C, AngularOp::X);
        let yx = e.apply(Slot::C, AngularOp::X).apply(Slot::C, AngularOp::Y);
        let comm = xy.add(&yx.scale((-1.0).into()));
        let iz = e.apply(Slot::C, AngularOp::Z).scale(Complex64::new(0.0, 1.0));
        assert!(comm.add(&iz.scale((-1.0).into())).norm() < 1e-12 * e.norm());
    }
}
