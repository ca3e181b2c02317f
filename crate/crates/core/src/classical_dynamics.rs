//! Gauge-fixed total dynamics with multiplier-fixed gauge, the reduced
//! six-dimensional dynamics of `H_[A,B,C]`, and fixed-step RK4 for both.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::classical_frames::gauge_transform_to_frame;
use crate::error::{Error, Result};
use crate::gauge_fixing::{ensure_gauge_fixed, evaluate_gauge_conditions, GaugeFrame, GAUGE_MARGIN};
use crate::observables::{dirac_chart, reduced_hamiltonian, DiracChart, Potential, ReducedClassicalState};
use crate::phase_space::{
    evaluate_constraints, p_index, project_momenta_onto_surface, q_index, PhaseSpacePoint, Vec3, TOL_C,
};

/// `(lambda, mu)` keeping the gauge conditions of `frame` fixed along the flow.
/// Only the inequalities are checked, so RK stage points are accepted.
pub fn lagrange_multipliers(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<(Vec3, Vec3)> {
    frame.validate(pt.n())?;
    let (a, b, c) = (frame.origin, frame.axis, frame.plane);
    let q_ba = pt.q[b] - pt.q[a];
    let q_ca = pt.q[c] - pt.q[a];
    if !(q_ba.z > GAUGE_MARGIN && q_ca.x > GAUGE_MARGIN) {
        return Err(Error::SingularGauge(format!("q_BA^z = {}, q_CA^x = {}", q_ba.z, q_ca.x)));
    }
    let p_ba = pt.p[b] - pt.p[a];
    let p_ca = pt.p[c] - pt.p[a];
    let lambda = -pt.p[a];
    let mu = Vec3::new(
        p_ba.y / q_ba.z,
        -p_ba.x / q_ba.z,
        -(p_ca.y - q_ca.z / q_ba.z * p_ba.y) / q_ca.x,
    );
    Ok((lambda, mu))
}

/// `q_i' = p_i + lambda + mu x q_i`, `p_i' = mu x p_i - dV/dq_i`, flat layout.
pub fn total_eom_rhs(pt: &PhaseSpacePoint, lambda: &Vec3, mu: &Vec3, v: &Potential) -> DVector<f64> {
    let n = pt.n();
    let grad = v.position_gradient(pt);
    let mut out = DVector::zeros(6 * n);
    for i in 0..n {
        let qd = pt.p[i] + lambda + mu.cross(&pt.q[i]);
        let pd = mu.cross(&pt.p[i]) - grad[i];
        for a in 0..3 {
            out[q_index(i, a)] = qd[a];
            out[p_index(n, i, a)] = pd[a];
        }
    }
    out
}

/// `1/2 sum |p_i|^2 + V`.
pub fn total_hamiltonian(pt: &PhaseSpacePoint, v: &Potential) -> f64 {
    pt.kinetic_energy() + v.total(pt)
}

fn gauge_fixed_rhs(pt: &PhaseSpacePoint, frame: &GaugeFrame, v: &Potential) -> Result<DVector<f64>> {
    let (lambda, mu) = lagrange_multipliers(pt, frame)?;
    let f = total_eom_rhs(pt, &lambda, &mu, v);
    if f.iter().all(|x| x.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite("equations of motion"))
    }
}

fn rk4<F>(x: &DVector<f64>, dt: f64, f: F) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = f(x)?;
    let k2 = f(&(x + &k1 * (dt / 2.0)))?;
    let k3 = f(&(x + &k2 * (dt / 2.0)))?;
    let k4 = f(&(x + &k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// One RK4 step of the gauge-fixed system, multipliers re-evaluated at each
/// stage, with no projection.
pub fn rk4_step_gauge_fixed(pt: &PhaseSpacePoint, frame: &GaugeFrame, v: &Potential, dt: f64) -> Result<PhaseSpacePoint> {
    let n = pt.n();
    let x = rk4(&pt.to_flat(), dt, |y| {
        let p = PhaseSpacePoint::from_flat(n, y.as_slice())?;
        gauge_fixed_rhs(&p, frame, v)
    })?;
    PhaseSpacePoint::from_flat(n, x.as_slice())
}

/// Reason an integration stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// A gauge or chart inequality failed at time `t`.
    ChartBreakdown { t: f64, reason: String },
    NonFinite { t: f64 },
}

impl TrajectoryStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, TrajectoryStatus::Completed)
    }
}

/// Drift measured after a raw step, before projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub gauge_drift: f64,
    pub constraint_drift: f64,
    pub energy_drift: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeFixedTrajectory {
    pub frame: GaugeFrame,
    pub dt: f64,
    pub times: Vec<f64>,
    pub points: Vec<PhaseSpacePoint>,
    pub energies: Vec<f64>,
    /// One entry per sample; the initial entry is zero.
    pub diagnostics: Vec<StepDiagnostics>,
    pub status: TrajectoryStatus,
}

impl GaugeFixedTrajectory {
    pub fn charts(&self) -> Result<Vec<DiracChart>> {
        self.points.iter().map(|p| dirac_chart(p, &self.frame)).collect()
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.energy_drift).fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        let n = self.points.first().map_or(0, PhaseSpacePoint::n);
        for kind in ["q", "p"] {
            for i in 0..n {
                for axis in ["x", "y", "z"] {
                    h.push(format!("{kind}{i}_{axis}"));
                }
            }
        }
        h.extend(["H", "energy_drift", "gauge_drift", "constraint_drift"].map(String::from));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.points.len())
            .map(|k| {
                let mut row = vec![self.times[k]];
                row.extend(self.points[k].to_flat().iter());
                let d = self.diagnostics[k];
                row.extend([self.energies[k], d.energy_drift, d.gauge_drift, d.constraint_drift]);
                row
            })
            .collect()
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_final}")));
    }
    Ok((t_final / dt).round() as usize)
}

/// Fixed-step RK4 of the gauge-fixed total system, `round(T/dt)` steps.
/// After each step the momenta are projected back onto `P = R = 0` and the
/// configuration is carried back onto the gauge surface by a rigid motion.
/// Loss of either gauge inequality truncates the trajectory.
pub fn integrate_gauge_fixed(
    pt0: &PhaseSpacePoint,
    frame: &GaugeFrame,
    v: &Potential,
    t_final: f64,
    dt: f64,
) -> Result<GaugeFixedTrajectory> {
    let steps = step_count(t_final, dt)?;
    ensure_gauge_fixed(pt0, frame, TOL_C)?;
    let h0 = total_hamiltonian(pt0, v);
    let zero = StepDiagnostics { gauge_drift: 0.0, constraint_drift: 0.0, energy_drift: 0.0 };
    let mut traj = GaugeFixedTrajectory {
        frame: *frame,
        dt,
        times: vec![0.0],
        points: vec![pt0.clone()],
        energies: vec![h0],
        diagnostics: vec![zero],
        status: TrajectoryStatus::Completed,
    };
    let mut pt = pt0.clone();
    for k in 1..=steps {
        let t = k as f64 * dt;
        let raw = match rk4_step_gauge_fixed(&pt, frame, v, dt) {
            Ok(x) => x,
            Err(Error::SingularGauge(reason)) => {
                traj.status = TrajectoryStatus::ChartBreakdown { t, reason };
                break;
            }
            Err(_) => {
                traj.status = TrajectoryStatus::NonFinite { t };
                break;
            }
        };
        let g = evaluate_gauge_conditions(&raw, frame);
        if !g.inequalities_hold() {
            traj.status = TrajectoryStatus::ChartBreakdown {
                t,
                reason: format!("q_BA^z = {}, q_CA^x = {}", g.sign_z, g.sign_x),
            };
            break;
        }
        let gauge_drift = g.max_equality_violation();
        let constraint_drift = evaluate_constraints(&raw).max_abs();
        pt = match gauge_transform_to_frame(&project_momenta_onto_surface(&raw), frame) {
            Ok(x) => x,
            Err(e) => {
                traj.status = TrajectoryStatus::ChartBreakdown { t, reason: e.to_string() };
                break;
            }
        };
        let h = total_hamiltonian(&pt, v);
        if !h.is_finite() {
            traj.status = TrajectoryStatus::NonFinite { t };
            break;
        }
        traj.times.push(t);
        traj.points.push(pt.clone());
        traj.energies.push(h);
        traj.diagnostics.push(StepDiagnostics { gauge_drift, constraint_drift, energy_drift: (h - h0).abs() });
    }
    Ok(traj)
}

/// Canonical vector field of `H_[A,B,C]` in the order of
/// [`ReducedClassicalState::to_array`].
pub fn reduced_rhs(s: &ReducedClassicalState, v: &Potential) -> [f64; 6] {
    let (b, x, c) = (s.qb_z, s.qc_x, s.qc_z);
    let (pbz, pcx, pcz) = (s.pb_z, s.pc_x, s.pc_z);
    let r = s.rc_y();
    let (r_ab, r_ac, r_bc) = s.distances();
    let [v_ab, v_ac, v_bc] = v.gradient(r_ab, r_ac, r_bc);
    let b2 = b * b;

    let dh_dpbz = 2.0 * pbz + pcz;
    let dh_dpcx = 2.0 * pcx + 2.0 * r * c / b2 - r / b - pcx * c / b;
    let dh_dpcz = 2.0 * pcz + pbz - 2.0 * r * x / b2 + pcx * x / b;
    let dh_db = -2.0 * r * r / (b2 * b) + pcx * r / b2 + v_ab + v_bc * (b - c) / r_bc;
    let dh_dx = -2.0 * r * pcz / b2 + pcx * pcz / b + v_ac * x / r_ac + v_bc * x / r_bc;
    let dh_dc = 2.0 * r * pcx / b2 - pcx * pcx / b + v_ac * c / r_ac - v_bc * (b - c) / r_bc;

    [dh_dpbz, dh_dpcx, dh_dpcz, -dh_db, -dh_dx, -dh_dc]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<ReducedClassicalState>,
    pub energies: Vec<f64>,
    pub status: TrajectoryStatus,
}

impl ReducedTrajectory {
    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.energies[0];
        self.energies.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        ["t", "qb_z", "qc_x", "qc_z", "pb_z", "pc_x", "pc_z", "H", "energy_drift"].map(String::from).to_vec()
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        let h0 = self.energies[0];
        (0..self.states.len())
            .map(|k| {
                let mut row = vec![self.times[k]];
                row.extend(self.states[k].to_array());
                row.extend([self.energies[k], (self.energies[k] - h0).abs()]);
                row
            })
            .collect()
    }
}

/// Fixed-step RK4 of the reduced system, `round(T/dt)` steps, truncated
/// when `q_B^z` or `q_C^x` reaches zero.
pub fn integrate_reduced(reduced0: &ReducedClassicalState, v: &Potential, t_final: f64, dt: f64) -> Result<ReducedTrajectory> {
    let steps = step_count(t_final, dt)?;
    let h0 = reduced_hamiltonian(reduced0, v)?;
    let mut traj = ReducedTrajectory {
        dt,
        times: vec![0.0],
        states: vec![*reduced0],
        energies: vec![h0],
        status: TrajectoryStatus::Completed,
    };
    let field = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let s = ReducedClassicalState::from_array(&[y[0], y[1], y[2], y[3], y[4], y[5]]);
        s.validate()?;
        Ok(DVector::from_row_slice(&reduced_rhs(&s, v)))
    };
    let mut y = DVector::from_row_slice(&reduced0.to_array());
    for k in 1..=steps {
        let t = k as f64 * dt;
        y = match rk4(&y, dt, field) {
            Ok(y) => y,
            Err(Error::ChartViolation(reason)) => {
                traj.status = TrajectoryStatus::ChartBreakdown { t, reason };
                break;
            }
            Err(_) => {
                traj.status = TrajectoryStatus::NonFinite { t };
                break;
            }
        };
        let s = ReducedClassicalState::from_array(&[y[0], y[1], y[2], y[3], y[4], y[5]]);
        if let Err(e) = s.validate() {
            traj.status = match e {
                Error::ChartViolation(reason) => TrajectoryStatus::ChartBreakdown { t, reason },
                _ => TrajectoryStatus::NonFinite { t },
            };
            break;
        }
        let h = reduced_hamiltonian(&s, v)?;
        traj.times.push(t);
        traj.states.push(s);
        traj.energies.push(h);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_frames::embed;
    use crate::observables::solve_redundant_momenta;

    fn moving_state() -> ReducedClassicalState {
        ReducedClassicalState::new(1.2, 0.3, 0.8, -0.5, 0.4, 0.6).unwrap()
    }

    #[test]
    fn multipliers_vanish_at_rest() {
        let pt = embed(&ReducedClassicalState::e1(), &GaugeFrame::ABC).unwrap();
        let (l, m) = lagrange_multipliers(&pt, &GaugeFrame::ABC).unwrap();
        assert_eq!((l, m), (Vec3::zeros(), Vec3::zeros()));
    }

    #[test]
    fn multipliers_single_momentum() {
        let mut pt = embed(&ReducedClassicalState::e1(), &GaugeFrame::ABC).unwrap();
        pt.p[0] = Vec3::x();
        let (l, m) = lagrange_multipliers(&pt, &GaugeFrame::ABC).unwrap();
        assert_eq!(l, Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(m.y, 1.0);
    }

    #[test]
    fn multipliers_reject_singular_gauge() {
        let pt = PhaseSpacePoint::at_rest(vec![Vec3::zeros(), Vec3::z(), Vec3::z() * 2.0]).unwrap();
        assert!(matches!(lagrange_multipliers(&pt, &GaugeFrame::ABC), Err(Error::SingularGauge(_))));
    }

    #[test]
    fn multipliers_preserve_gauge_conditions() {
        let frame = GaugeFrame::ABC;
        let pt = embed(&moving_state(), &frame).unwrap();
        let v = Potential::default();
        let (l, m) = lagrange_multipliers(&pt, &frame).unwrap();
        let f = total_eom_rhs(&pt, &l, &m, &v);
        let h = 1e-5;
        let x = pt.to_flat();
        let plus = PhaseSpacePoint::from_flat(3, (&x + &f * h).as_slice()).unwrap();
        let minus = PhaseSpacePoint::from_flat(3, (&x - &f * h).as_slice()).unwrap();
        let gp = evaluate_gauge_conditions(&plus, &frame);
        let gm = evaluate_gauge_conditions(&minus, &frame);
        for a in 0..3 {
            assert!(((gp.chi[a] - gm.chi[a]) / (2.0 * h)).abs() < 1e-6);
            assert!(((gp.phi[a] - gm.phi[a]) / (2.0 * h)).abs() < 1e-6);
        }
        // without multipliers the conditions move
        let free = total_eom_rhs(&pt, &Vec3::zeros(), &Vec3::zeros(), &v);
        let moved = PhaseSpacePoint::from_flat(3, (&x + &free * h).as_slice()).unwrap();
        assert!(evaluate_gauge_conditions(&moved, &frame).max_equality_violation() > 1e-7);
    }

    #[test]
    fn free_motion_rhs() {
        let pt = embed(&moving_state(), &GaugeFrame::ABC).unwrap();
        let f = total_eom_rhs(&pt, &Vec3::zeros(), &Vec3::zeros(), &Potential::None);
        for i in 0..3 {
            for a in 0..3 {
                assert_eq!(f[q_index(i, a)], pt.p[i][a]);
                assert_eq!(f[p_index(3, i, a)], 0.0);
            }
        }
    }

    #[test]
    fn stationary_trajectories() {
        let s = ReducedClassicalState::e1();
        let traj = integrate_reduced(&s, &Potential::None, 1.0, 0.1).unwrap();
        assert!(traj.status.is_completed());
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(|x| *x == s));
        let pt = embed(&s, &GaugeFrame::ABC).unwrap();
        let gf = integrate_gauge_fixed(&pt, &GaugeFrame::ABC, &Potential::None, 1.0, 0.1).unwrap();
        assert!(gf.points.iter().all(|x| (x.to_flat() - pt.to_flat()).amax() < 1e-15));
    }

    #[test]
    fn reduced_rhs_matches_hamiltonian_gradient() {
        let v = Potential::default();
        let s = moving_state();
        let f = reduced_rhs(&s, &v);
        let x = s.to_array();
        let h = 1e-6;
        let mut grad = [0.0; 6];
        for k in 0..6 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let hp = reduced_hamiltonian(&ReducedClassicalState::from_array(&xp), &v).unwrap();
            let hm = reduced_hamiltonian(&ReducedClassicalState::from_array(&xm), &v).unwrap();
            grad[k] = (hp - hm) / (2.0 * h);
        }
        let expected = [grad[3], grad[4], grad[5], -grad[0], -grad[1], -grad[2]];
        for k in 0..6 {
            assert!((f[k] - expected[k]).abs() < 1e-7, "component {k}: {} vs {}", f[k], expected[k]);
        }
    }

    #[test]
    fn conserved_quantities_along_total_flow() {
        let frame = GaugeFrame::ABC;
        let pt = embed(&moving_state(), &frame).unwrap();
        let v = Potential::default();
        let raw = rk4_step_gauge_fixed(&pt, &frame, &v, 1e-2).unwrap();
        assert!(evaluate_constraints(&raw).max_abs() < 1e-10);
        assert!((total_hamiltonian(&raw, &v) - total_hamiltonian(&pt, &v)).abs() < 1e-9);
    }

    #[test]
    fn gauge_drift_is_high_order() {
        let frame = GaugeFrame::ABC;
        let pt = embed(&moving_state(), &frame).unwrap();
        let v = Potential::default();
        let drift = |dt: f64| {
            evaluate_gauge_conditions(&rk4_step_gauge_fixed(&pt, &frame, &v, dt).unwrap(), &frame).max_equality_violation()
        };
        let (d1, d2) = (drift(0.04), drift(0.02));
        let order = (d1 / d2).log2();
        assert!(order > 3.8, "measured order {order} ({d1:e}, {d2:e})");
    }

    #[test]
    fn reduced_energy_conserved() {
        let traj = integrate_reduced(&ReducedClassicalState::e1(), &Potential::default(), 10.0, 1e-3).unwrap();
        assert!(traj.status.is_completed());
        assert!(traj.max_energy_drift() < 1e-8, "{}", traj.max_energy_drift());
    }

    #[test]
    fn gauge_fixed_and_reduced_agree() {
        let frame = GaugeFrame::ABC;
        let v = Potential::default();
        let s = moving_state();
        let red = integrate_reduced(&s, &v, 1.0, 1e-3).unwrap();
        let gf = integrate_gauge_fixed(&embed(&s, &frame).unwrap(), &frame, &v, 1.0, 1e-3).unwrap();
        assert!(red.status.is_completed() && gf.status.is_completed());
        let charts = gf.charts().unwrap();
        assert_eq!(charts.len(), red.states.len());
        for (c, r) in charts.iter().zip(&red.states) {
            for (a, b) in c.to_array().iter().zip(r.chart().to_array()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
        assert!(gf.max_energy_drift() < 1e-8);
    }

    #[test]
    fn angular_barrier_bounds_approach_to_a() {
        // |p_B^x| = |R_C^y| / q_B^z, so q_B^z >= |R_C^y| / sqrt(2 H) when V = 0
        for k in 0..8 {
            let s = ReducedClassicalState::new(1.0, -1.0 - 0.5 * k as f64, 0.7, 0.4 + 0.1 * k as f64, 0.2, -0.3).unwrap();
            let traj = integrate_reduced(&s, &Potential::None, 3.0, 1e-3).unwrap();
            for (x, h) in traj.states.iter().zip(&traj.energies) {
                assert!(x.qb_z * (2.0 * h).sqrt() >= x.rc_y().abs() * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn angular_barrier_turns_b_around() {
        for k in 0..8 {
            let s = ReducedClassicalState::new(1.0, -1.0 - 0.2 * k as f64, 5.0 + 0.7 * k as f64, 0.0, 0.3, 0.05 + 0.01 * k as f64)
                .unwrap();
            let traj = integrate_reduced(&s, &Potential::None, 3.0, 1e-3).unwrap();
            assert!(traj.states.iter().all(|x| x.qb_z > 0.2));
            assert!(traj.states.iter().any(|x| x.pb_z > 0.0), "no bounce for run {k}");
        }
    }

    #[test]
    fn reduced_breakdown_truncates() {
        // C heads straight through the z axis
        let s = ReducedClassicalState::new(1.0, 0.0, 0.5, -1.0, 3.0, 0.0).unwrap();
        let traj = integrate_reduced(&s, &Potential::None, 3.0, 1e-2).unwrap();
        assert!(matches!(traj.status, TrajectoryStatus::ChartBreakdown { .. }));
        assert!(traj.states.iter().all(|x| x.qc_x > 0.0));
    }

    #[test]
    fn csv_rows_have_header_width() {
        let s = moving_state();
        let red = integrate_reduced(&s, &Potential::default(), 0.01, 1e-3).unwrap();
        assert!(red.csv_rows().iter().all(|r| r.len() == red.csv_header().len()));
        let gf = integrate_gauge_fixed(&embed(&s, &GaugeFrame::ABC).unwrap(), &GaugeFrame::ABC, &Potential::default(), 0.01, 1e-3)
            .unwrap();
        assert!(gf.csv_rows().iter().all(|r| r.len() == gf.csv_header().len()));
        assert!(solve_redundant_momenta(&s).is_ok());
    }

    #[test]
    fn rejects_bad_step() {
        assert!(integrate_reduced(&moving_state(), &Potential::None, 1.0, 0.0).is_err());
        assert!(integrate_reduced(&moving_state(), &Potential::None, -1.0, 0.1).is_err());
    }
}
