//! Gauge fixing for a frame `[A, B, C]`: `A` at the origin, `B` on the
//! positive z axis, `C` in the `x > 0` half of the xz plane.
//!
//! The twelve constraints are ordered `(P^x, P^y, P^z, R^x, R^y, R^z,
//! chi^x, chi^y, chi^z, phi_1, phi_2, phi_3)` with `chi = q_A`,
//! `phi_1 = q_BA^y`, `phi_2 = q_BA^x`, `phi_3 = q_CA^y`.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{
    bracket_of_gradients, ensure_on_surface, numerical_rank, constraint_gradients, q_index, Constraint,
    PhaseSpaceFunction, PhaseSpacePoint, Vec3, RANK_REL_TOL, TOL_C,
};

/// Strict margin for the discrete conditions `q_BA^z > 0`, `q_CA^x > 0`.
pub const GAUGE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeFrame {
    pub origin: usize,
    pub axis: usize,
    pub plane: usize,
}

impl GaugeFrame {
    /// `[A, B, C] = [0, 1, 2]`.
    pub const ABC: GaugeFrame = GaugeFrame { origin: 0, axis: 1, plane: 2 };
    /// `[C, B, A]`.
    pub const CBA: GaugeFrame = GaugeFrame { origin: 2, axis: 1, plane: 0 };

    pub fn new(origin: usize, axis: usize, plane: usize) -> Result<Self> {
        if origin == axis || origin == plane || axis == plane {
            return Err(Error::InvalidInput(format!("frame indices not distinct: [{origin}, {axis}, {plane}]")));
        }
        Ok(Self { origin, axis, plane })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        Self::new(self.origin, self.axis, self.plane)?;
        if self.origin >= n || self.axis >= n || self.plane >= n {
            return Err(Error::InvalidInput(format!("frame index out of range for n = {n}")));
        }
        Ok(())
    }

    /// Origin and plane particle exchanged, same axis particle.
    pub fn swapped(&self) -> Self {
        Self { origin: self.plane, axis: self.axis, plane: self.origin }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeConditionValues {
    pub chi: Vec3,
    pub phi: [f64; 3],
    pub sign_z: f64,
    pub sign_x: f64,
}

impl GaugeConditionValues {
    pub fn max_equality_violation(&self) -> f64 {
        self.phi.iter().fold(self.chi.amax(), |m, x| m.max(x.abs()))
    }

    pub fn inequalities_hold(&self) -> bool {
        self.sign_z > GAUGE_MARGIN && self.sign_x > GAUGE_MARGIN
    }

    pub fn is_gauge_fixed(&self, tol: f64) -> bool {
        self.max_equality_violation() <= tol && self.inequalities_hold()
    }
}

pub fn evaluate_gauge_conditions(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> GaugeConditionValues {
    let qa = pt.q[frame.origin];
    let qba = pt.q[frame.axis] - qa;
    let qca = pt.q[frame.plane] - qa;
    GaugeConditionValues { chi: qa, phi: [qba.y, qba.x, qca.y], sign_z: qba.z, sign_x: qca.x }
}

pub fn ensure_gauge_fixed(pt: &PhaseSpacePoint, frame: &GaugeFrame, tol: f64) -> Result<()> {
    frame.validate(pt.n())?;
    let g = evaluate_gauge_conditions(pt, frame);
    ensure_inequalities(&g)?;
    if g.max_equality_violation() > tol {
        return Err(Error::NotGaugeFixed(format!("max |chi|, |phi| = {:e}", g.max_equality_violation())));
    }
    Ok(())
}

fn ensure_inequalities(g: &GaugeConditionValues) -> Result<()> {
    if !(g.sign_z > GAUGE_MARGIN) {
        return Err(Error::SingularGauge(format!("q_BA^z = {} is not positive", g.sign_z)));
    }
    if !(g.sign_x > GAUGE_MARGIN) {
        return Err(Error::SingularGauge(format!("q_CA^x = {} is not positive", g.sign_x)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintLabel {
    Euclidean(Constraint),
    Chi(usize),
    Phi(usize),
}

/// One of the twelve constraints of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameConstraint {
    pub frame: GaugeFrame,
    pub label: ConstraintLabel,
}

impl FrameConstraint {
    /// Position coordinates entering `phi_k` as `(particle, axis)`; the origin enters with sign -1.
    fn phi_slot(&self, k: usize) -> (usize, usize) {
        match k {
            0 => (self.frame.axis, 1),
            1 => (self.frame.axis, 0),
            _ => (self.frame.plane, 1),
        }
    }
}

impl PhaseSpaceFunction for FrameConstraint {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        match self.label {
            ConstraintLabel::Euclidean(c) => c.value(pt),
            ConstraintLabel::Chi(a) => pt.q[self.frame.origin][a],
            ConstraintLabel::Phi(k) => {
                let (i, a) = self.phi_slot(k);
                pt.q[i][a] - pt.q[self.frame.origin][a]
            }
        }
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        match self.label {
            ConstraintLabel::Euclidean(c) => c.gradient(pt),
            ConstraintLabel::Chi(a) => {
                let mut g = DVector::zeros(pt.dim());
                g[q_index(self.frame.origin, a)] = 1.0;
                g
            }
            ConstraintLabel::Phi(k) => {
                let (i, a) = self.phi_slot(k);
                let mut g = DVector::zeros(pt.dim());
                g[q_index(i, a)] += 1.0;
                g[q_index(self.frame.origin, a)] -= 1.0;
                g
            }
        }
    }
}

pub fn frame_constraints(frame: &GaugeFrame) -> Vec<FrameConstraint> {
    let mut out: Vec<FrameConstraint> = Constraint::ALL
        .iter()
        .map(|&c| FrameConstraint { frame: *frame, label: ConstraintLabel::Euclidean(c) })
        .collect();
    out.extend((0..3).map(|a| FrameConstraint { frame: *frame, label: ConstraintLabel::Chi(a) }));
    out.extend((0..3).map(|k| FrameConstraint { frame: *frame, label: ConstraintLabel::Phi(k) }));
    out
}

fn constraint_gradient_rows(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Vec<DVector<f64>> {
    frame_constraints(frame).iter().map(|c| c.gradient(pt)).collect()
}

/// `C_{ab} = {Lambda_a, Lambda_b}` from the analytic constraint gradients.
pub fn constraint_matrix(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<DMatrix<f64>> {
    frame.validate(pt.n())?;
    ensure_inequalities(&evaluate_gauge_conditions(pt, frame))?;
    let rows = constraint_gradient_rows(pt, frame);
    Ok(DMatrix::from_fn(12, 12, |a, b| bracket_of_gradients(&rows[a], &rows[b])))
}

fn gauge_block_entries(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<(f64, f64, f64)> {
    frame.validate(pt.n())?;
    let g = evaluate_gauge_conditions(pt, frame);
    ensure_inequalities(&g)?;
    let qca = pt.q[frame.plane] - pt.q[frame.origin];
    Ok((g.sign_z, qca.z, g.sign_x))
}

/// The `R`-row, `phi`-column block `{R^a, phi_k}` on the gauge surface,
/// with `b = q_BA^z`, `c = q_CA^z`, `x = q_CA^x`.
fn rotation_gauge_block(b: f64, c: f64, x: f64) -> Matrix3<f64> {
    Matrix3::new(b, 0.0, c, 0.0, -b, 0.0, 0.0, 0.0, -x)
}

fn rotation_gauge_block_inverse(b: f64, c: f64, x: f64) -> Matrix3<f64> {
    Matrix3::new(1.0 / b, 0.0, c / (b * x), 0.0, -1.0 / b, 0.0, 0.0, 0.0, -1.0 / x)
}

fn place(m: &mut DMatrix<f64>, row: usize, col: usize, block: &Matrix3<f64>) {
    m.view_mut((row, col), (3, 3)).copy_from(block);
}

/// Closed form of `C` valid on the constraint surface intersected with the
/// gauge surface: `C = [[0, X], [-X^T, 0]]`, `X = diag(-1, M)`.
pub fn closed_form_matrix(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<DMatrix<f64>> {
    let (b, c, x) = gauge_block_entries(pt, frame)?;
    let m = rotation_gauge_block(b, c, x);
    let mut out = DMatrix::zeros(12, 12);
    place(&mut out, 0, 6, &-Matrix3::identity());
    place(&mut out, 3, 9, &m);
    place(&mut out, 6, 0, &Matrix3::identity());
    place(&mut out, 9, 3, &-m.transpose());
    Ok(out)
}

/// Closed form of `C^{-1}` on the constraint and gauge surfaces:
/// `[[0, -(X^T)^{-1}], [X^{-1}, 0]]`.
pub fn closed_form_inverse(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<DMatrix<f64>> {
    let (b, c, x) = gauge_block_entries(pt, frame)?;
    let minv = rotation_gauge_block_inverse(b, c, x);
    let mut out = DMatrix::zeros(12, 12);
    place(&mut out, 0, 6, &Matrix3::identity());
    place(&mut out, 3, 9, &-minv.transpose());
    place(&mut out, 6, 0, &-Matrix3::identity());
    place(&mut out, 9, 3, &minv);
    Ok(out)
}

/// `{F,G}_D = {F,G} - {F,Lambda_a} (C^{-1})^{ab} {Lambda_b,G}` with the closed-form inverse.
pub fn dirac_bracket<F, G>(f: &F, g: &G, pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<f64>
where
    F: PhaseSpaceFunction + ?Sized,
    G: PhaseSpaceFunction + ?Sized,
{
    ensure_gauge_fixed(pt, frame, TOL_C)?;
    let cinv = closed_form_inverse(pt, frame)?;
    let df = f.gradient(pt);
    let dg = g.gradient(pt);
    if !df.iter().chain(dg.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let rows = constraint_gradient_rows(pt, frame);
    let f_l: Vec<f64> = rows.iter().map(|r| bracket_of_gradients(&df, r)).collect();
    let l_g: Vec<f64> = rows.iter().map(|r| bracket_of_gradients(r, &dg)).collect();
    let mut correction = 0.0;
    for a in 0..12 {
        for b in 0..12 {
            correction += f_l[a] * cinv[(a, b)] * l_g[b];
        }
    }
    Ok(bracket_of_gradients(&df, &dg) - correction)
}

/// Dimension of the gauge orbit through `pt`: 3 at total collisions at
/// rest, 5 at collinear configurations with aligned momenta, 6 otherwise.
pub fn classify_orbit(pt: &PhaseSpacePoint) -> Result<usize> {
    pt.validate()?;
    ensure_on_surface(pt, TOL_C)?;
    match numerical_rank(&constraint_gradients(pt), RANK_REL_TOL) {
        r @ (3 | 5 | 6) => Ok(r),
        r => Err(Error::UnexpectedRank(r)),
    }
}
