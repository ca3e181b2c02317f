//! Embedding of a reduced chart, projection back, and the change of frame
//! `[A, B, C] -> [C, B, A]` both as a composition of gauge flows and in
//! closed form.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::gauge_fixing::{ensure_gauge_fixed, evaluate_gauge_conditions, GaugeFrame, GAUGE_MARGIN};
use crate::observables::{solve_redundant_momenta, ReducedClassicalState};
use crate::phase_space::{
    apply_rotation, apply_rotation_matrix, apply_translation, ensure_on_surface, PhaseSpacePoint, Vec3, TOL_C,
};

fn ensure_three_body(frame: &GaugeFrame) -> Result<()> {
    frame.validate(3)
}

/// Gauge-fixed point on the constraint surface with the given chart.
pub fn embed(reduced: &ReducedClassicalState, frame: &GaugeFrame) -> Result<PhaseSpacePoint> {
    ensure_three_body(frame)?;
    reduced.validate()?;
    let [pa, pb, pc] = solve_redundant_momenta(reduced)?;
    let mut q = vec![Vec3::zeros(); 3];
    let mut p = vec![Vec3::zeros(); 3];
    q[frame.axis] = Vec3::new(0.0, 0.0, reduced.qb_z);
    q[frame.plane] = Vec3::new(reduced.qc_x, 0.0, reduced.qc_z);
    p[frame.origin] = pa;
    p[frame.axis] = pb;
    p[frame.plane] = pc;
    PhaseSpacePoint::new(q, p)
}

/// Reads the six chart coordinates off a gauge-fixed point on the constraint surface.
pub fn project(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<ReducedClassicalState> {
    ensure_three_body(frame)?;
    ensure_gauge_fixed(pt, frame, TOL_C)?;
    ensure_on_surface(pt, TOL_C)?;
    let b = pt.q[frame.axis];
    let c = pt.q[frame.plane];
    ReducedClassicalState::new(b.z, pt.p[frame.axis].z, c.x, pt.p[frame.plane].x, c.z, pt.p[frame.plane].z)
}

/// Angle at particle `j` between `i` and `k`, in `[0, pi]`.
pub fn relative_angle(pt: &PhaseSpacePoint, i: usize, j: usize, k: usize) -> Result<f64> {
    let u = pt.q[i] - pt.q[j];
    let v = pt.q[k] - pt.q[j];
    if !(u.norm() > 0.0) || !(v.norm() > 0.0) {
        return Err(Error::Degenerate(format!("zero edge at particle {j}")));
    }
    Ok(u.cross(&v).norm().atan2(u.dot(&v)))
}

/// Gauge transformation (translation then rotation) carrying any point to
/// the gauge surface of `new_frame`.
pub fn gauge_transform_to_frame(pt: &PhaseSpacePoint, new_frame: &GaugeFrame) -> Result<PhaseSpacePoint> {
    new_frame.validate(pt.n())?;
    let shifted = apply_translation(pt, &-pt.q[new_frame.origin]);
    let axis = shifted.q[new_frame.axis];
    if !(axis.norm() > 0.0) {
        return Err(Error::Degenerate("axis particle coincides with the origin particle".into()));
    }
    let ez = axis / axis.norm();
    let plane = shifted.q[new_frame.plane];
    let w = plane - ez * plane.dot(&ez);
    if !(w.norm() > GAUGE_MARGIN * plane.norm().max(1.0)) {
        return Err(Error::Degenerate("plane particle lies on the new z axis".into()));
    }
    let ex = w / w.norm();
    let ey = ez.cross(&ex);
    let rot = Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]);
    Ok(apply_rotation_matrix(&shifted, &rot))
}

/// The four gauge flows taking `C ∩ G_[A,B,C]` to `C ∩ G_[C,B,A]`:
/// translate `B` to the origin along z, rotate about y by the angle at `B`
/// (which puts `C` on the negative z axis), translate `C` to the origin
/// along z, then rotate about z by `pi`.
pub fn swap_origin_and_plane(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<(PhaseSpacePoint, GaugeFrame)> {
    ensure_three_body(frame)?;
    ensure_gauge_fixed(pt, frame, TOL_C)?;
    let theta = relative_angle(pt, frame.origin, frame.axis, frame.plane)?;
    let x1 = apply_translation(pt, &Vec3::new(0.0, 0.0, -pt.q[frame.axis].z));
    let x2 = apply_rotation(&x1, &Vec3::y(), theta)?;
    let x3 = apply_translation(&x2, &Vec3::new(0.0, 0.0, -x2.q[frame.plane].z));
    let x4 = apply_rotation(&x3, &Vec3::z(), std::f64::consts::PI)?;
    let target = frame.swapped();
    let g = evaluate_gauge_conditions(&x4, &target);
    if !g.inequalities_hold() {
        return Err(Error::Degenerate(format!(
            "target gauge degenerate (q_BA^z = {}, q_CA^x = {})",
            g.sign_z, g.sign_x
        )));
    }
    Ok((x4, target))
}

/// Closed-form change of chart from `[A, B, C]` to `[C, B, A]`. The output
/// is read in the new frame: axis particle `B`, plane particle `A`.
pub fn switch_closed_form(s: &ReducedClassicalState) -> Result<ReducedClassicalState> {
    s.validate()?;
    let (b, x, c) = (s.qb_z, s.qc_x, s.qc_z);
    let r_c2 = x * x + c * c;
    let r_bc = s.r_bc();
    if !(r_bc > 0.0) {
        return Err(Error::Degenerate("B-C collision".into()));
    }
    // angle at B between A and C
    let cos_t = (b - c) / r_bc;
    let sin_t = x / r_bc;
    let pb_x = -s.rc_y() / b;
    let sum_x = pb_x + s.pc_x;
    let sum_z = s.pb_z + s.pc_z;
    ReducedClassicalState::new(
        r_bc,
        cos_t * s.pb_z - sin_t * pb_x,
        b * x / r_bc,
        cos_t * sum_x + sin_t * sum_z,
        (r_c2 - b * c) / r_bc,
        sin_t * sum_x - cos_t * sum_z,
    )
}

/// Chart of the same physical state seen from frame `to`, given its chart in
/// frame `from` (both permutations of three particles). The origin/plane
/// exchange uses the closed form; other permutations go through the
/// embedding.
pub fn switch_frame(reduced: &ReducedClassicalState, from: &GaugeFrame, to: &GaugeFrame) -> Result<ReducedClassicalState> {
    ensure_three_body(from)?;
    ensure_three_body(to)?;
    if to == from {
        reduced.validate()?;
        return Ok(*reduced);
    }
    if *to == from.swapped() {
        return switch_closed_form(reduced);
    }
    switch_by_composition(reduced, from, to)
}

/// `pi_to ∘ alpha ∘ iota_from` with the generic aligning gauge transformation.
pub fn switch_by_composition(
    reduced: &ReducedClassicalState,
    from: &GaugeFrame,
    to: &GaugeFrame,
) -> Result<ReducedClassicalState> {
    let pt = embed(reduced, from)?;
    project(&gauge_transform_to_frame(&pt, to)?, to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge_fixing::classify_orbit;
    use crate::phase_space::evaluate_constraints;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn assert_close(a: &ReducedClassicalState, b: &ReducedClassicalState, tol: f64) {
        for (x, y) in a.to_array().iter().zip(b.to_array()) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn generic_state() -> ReducedClassicalState {
        ReducedClassicalState::new(1.3, -0.4, 0.6, 0.9, -0.8, 0.25).unwrap()
    }

    #[test]
    fn embed_e1() {
        let pt = embed(&ReducedClassicalState::e1(), &GaugeFrame::ABC).unwrap();
        assert_eq!(pt.q, vec![Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0)]);
        assert_eq!(evaluate_constraints(&pt).max_abs(), 0.0);
        assert!(evaluate_gauge_conditions(&pt, &GaugeFrame::ABC).is_gauge_fixed(TOL_C));
        assert_eq!(project(&pt, &GaugeFrame::ABC).unwrap(), ReducedClassicalState::e1());
        assert_eq!(classify_orbit(&pt).unwrap(), 6);
    }

    #[test]
    fn embed_with_permuted_frame() {
        let s = generic_state();
        let f = GaugeFrame::new(2, 0, 1).unwrap();
        let pt = embed(&s, &f).unwrap();
        assert!(evaluate_constraints(&pt).is_on_surface(TOL_C));
        assert_eq!(project(&pt, &f).unwrap(), s);
        assert!(embed(&ReducedClassicalState { qc_x: -1.0, ..s }, &f).is_err());
    }

    #[test]
    fn project_rejects_flowed_points() {
        let pt = embed(&generic_state(), &GaugeFrame::ABC).unwrap();
        let moved = apply_rotation(&pt, &Vec3::x(), 0.2).unwrap();
        assert!(matches!(project(&moved, &GaugeFrame::ABC), Err(Error::NotGaugeFixed(_))));
    }

    #[test]
    fn relative_angles() {
        let e1 = embed(&ReducedClassicalState::e1(), &GaugeFrame::ABC).unwrap();
        assert!((relative_angle(&e1, 0, 1, 2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let h = 3f64.sqrt() / 2.0;
        let eq = PhaseSpacePoint::at_rest(vec![Vec3::zeros(), Vec3::x(), Vec3::new(0.5, h, 0.0)]).unwrap();
        assert!((relative_angle(&eq, 0, 1, 2).unwrap() - FRAC_PI_3).abs() < 1e-15);
        let line = PhaseSpacePoint::at_rest(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0]).unwrap();
        assert!((relative_angle(&line, 0, 1, 2).unwrap() - PI).abs() < 1e-15);
        assert_eq!(relative_angle(&line, 1, 0, 2).unwrap(), 0.0);
        let coincide = PhaseSpacePoint::at_rest(vec![Vec3::zeros(), Vec3::zeros(), Vec3::x()]).unwrap();
        assert!(relative_angle(&coincide, 0, 1, 2).is_err());
    }

    #[test]
    fn relative_angle_matches_law_of_cosines() {
        let pt = embed(&generic_state(), &GaugeFrame::ABC).unwrap();
        let l = |i: usize, j: usize| (pt.q[i] - pt.q[j]).norm();
        let cos = (l(1, 2).powi(2) + l(0, 1).powi(2) - l(0, 2).powi(2)) / (2.0 * l(0, 1) * l(1, 2));
        assert!((relative_angle(&pt, 0, 1, 2).unwrap() - cos.acos()).abs() < 1e-14);
    }

    #[test]
    fn four_step_transform_of_e1() {
        let pt = embed(&ReducedClassicalState::e1(), &GaugeFrame::ABC).unwrap();
        let (out, frame) = swap_origin_and_plane(&pt, &GaugeFrame::ABC).unwrap();
        assert_eq!(frame, GaugeFrame::CBA);
        assert!(out.q[2].amax() < 1e-15);
        assert!((out.q[1] - Vec3::new(0.0, 0.0, 1.0)).amax() < 1e-15);
        assert!((out.q[0] - Vec3::new(1.0, 0.0, 1.0)).amax() < 1e-15);
        assert!(evaluate_constraints(&out).is_on_surface(TOL_C));
        assert!(evaluate_gauge_conditions(&out, &GaugeFrame::CBA).is_gauge_fixed(TOL_C));
    }

    #[test]
    fn four_step_and_aligning_transforms_agree() {
        let pt = embed(&generic_state(), &GaugeFrame::ABC).unwrap();
        let (a, _) = swap_origin_and_plane(&pt, &GaugeFrame::ABC).unwrap();
        let b = gauge_transform_to_frame(&pt, &GaugeFrame::CBA).unwrap();
        assert!((a.to_flat() - b.to_flat()).amax() < 1e-14);
    }

    #[test]
    fn transform_preserves_invariant_scalars() {
        let pt = embed(&generic_state(), &GaugeFrame::ABC).unwrap();
        let (out, _) = swap_origin_and_plane(&pt, &GaugeFrame::ABC).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(((pt.q[i] - pt.q[j]).norm() - (out.q[i] - out.q[j]).norm()).abs() < 1e-14);
                assert!((pt.p[i].dot(&pt.p[j]) - out.p[i].dot(&out.p[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_e1() {
        let out = switch_frame(&ReducedClassicalState::e1(), &GaugeFrame::ABC, &GaugeFrame::CBA).unwrap();
        assert_close(&out, &ReducedClassicalState::e1(), 1e-15);
    }

    #[test]
    fn closed_form_matches_composition_and_round_trips() {
        let s = generic_state();
        let closed = switch_closed_form(&s).unwrap();
        let pt = embed(&s, &GaugeFrame::ABC).unwrap();
        let (out, frame) = swap_origin_and_plane(&pt, &GaugeFrame::ABC).unwrap();
        assert_close(&closed, &project(&out, &frame).unwrap(), 1e-12);
        assert_close(&switch_closed_form(&closed).unwrap(), &s, 1e-12);
    }

    #[test]
    fn other_permutations_round_trip() {
        let s = generic_state();
        let from = GaugeFrame::ABC;
        let to = GaugeFrame::new(1, 2, 0).unwrap();
        let there = switch_frame(&s, &from, &to).unwrap();
        assert_close(&switch_frame(&there, &to, &from).unwrap(), &s, 1e-12);
    }

    #[test]
    fn switch_rejects_chart_violations() {
        let s = ReducedClassicalState { qc_x: 0.0, ..generic_state() };
        assert!(matches!(switch_closed_form(&s), Err(Error::ChartViolation(_))));
        let s = ReducedClassicalState { qb_z: -1.0, ..generic_state() };
        assert!(switch_frame(&s, &GaugeFrame::ABC, &GaugeFrame::new(1, 0, 2).unwrap()).is_err());
    }
}
