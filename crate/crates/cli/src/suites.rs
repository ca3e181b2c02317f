//! The `verify-algebra` suites: structural identities of the classical
//! constraint algebra, gauge fixing and frame change, and the exact checks
//! of the translational and rotational quantum sectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relframe::classical_dynamics::total_hamiltonian;
use relframe::classical_frames::{embed, switch_by_composition, switch_closed_form};
use relframe::gauge_fixing::{classify_orbit, closed_form_inverse, constraint_matrix, dirac_bracket, GaugeFrame};
use relframe::observables::{
    reduced_hamiltonian, reduced_hamiltonian_masses, standard_form_hamiltonian, ChartFunction, Masses,
    ReducedClassicalState,
};
use relframe::phase_space::{
    bracket_of_gradients, finite_difference_gradient, levi_civita, sample_point_on_c, Constraint, PhaseSpacePoint, Vec3,
};
use relframe::quantum_angular::{
    legendre_addition_check, rotational_trivialize, verify_rotation_constraints, AngularStage, AngularState, RadialGrid,
};
use relframe::quantum_momentum::{
    conjugated_total_momentum, project_origin, random_two_body_state, switch_via_invariant_state, translational_switch,
    trivialize_basis, trivialize_translations, untrivialize_translations, Momentum, Perspective,
};

use crate::config::Config;
use crate::error::CliError;
use crate::output::Check;

pub const ALL: [&str; 10] = [
    "euclidean",
    "orbits",
    "constraint-matrix",
    "dirac-chart",
    "hamiltonian",
    "frame-switch",
    "mass-limit",
    "translational",
    "legendre-addition",
    "rotational",
];

pub fn validate_names(names: &[String]) -> Result<(), CliError> {
    match names.iter().find(|n| !ALL.contains(&n.as_str())) {
        Some(bad) => Err(CliError::Usage(format!("unknown suite {bad:?}; known suites: {}", ALL.join(", ")))),
        None => Ok(()),
    }
}

pub fn run(name: &str, config: &Config) -> Result<Vec<Check>, CliError> {
    let offset = ALL.iter().position(|s| *s == name).ok_or_else(|| CliError::Usage(format!("unknown suite {name:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seeds.base.wrapping_mul(1000).wrapping_add(offset as u64));
    let n = config.suites.samples;
    let tol = &config.tolerances;
    Ok(match name {
        "euclidean" => euclidean(&mut rng, n, tol.fd_step, tol.euclidean),
        "orbits" => orbits(&mut rng, n, config.seeds.base)?,
        "constraint-matrix" => constraint_matrix_inverse(&mut rng, n, tol.inverse)?,
        "dirac-chart" => dirac_chart(&mut rng, n, tol.dirac)?,
        "hamiltonian" => hamiltonian(&mut rng, n, config, tol.hamiltonian)?,
        "frame-switch" => frame_switch(&mut rng, n, tol.frame_switch)?,
        "mass-limit" => mass_limit(config, tol.mass_slope)?,
        "translational" => translational(&mut rng, n)?,
        "legendre-addition" => legendre_addition(&mut rng, n, tol.legendre)?,
        "rotational" => rotational(&mut rng, tol.singlet)?,
        _ => unreachable!("validated above"),
    })
}

fn random_vec(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(r.gen_range(lo..hi), r.gen_range(lo..hi), r.gen_range(lo..hi))
}

/// Chart away from the gauge and collinearity margins.
pub fn random_chart(r: &mut ChaCha8Rng) -> ReducedClassicalState {
    ReducedClassicalState {
        qb_z: r.gen_range(0.5..2.0),
        pb_z: r.gen_range(-1.0..1.0),
        qc_x: r.gen_range(0.4..2.0),
        pc_x: r.gen_range(-1.0..1.0),
        qc_z: r.gen_range(-1.5..1.5),
        pc_z: r.gen_range(-1.0..1.0),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `{P,P} = 0`, `{R^a,R^b} = eps R^c`, `{P^a,R^b} = eps P^c` at points off the
/// constraint surface, with finite-difference gradients.
fn euclidean(rng: &mut ChaCha8Rng, n: usize, h: f64, tol: f64) -> Vec<Check> {
    let (mut pp, mut rr, mut pr) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let pt = PhaseSpacePoint {
            q: (0..3).map(|_| random_vec(rng, -1.0, 1.0)).collect(),
            p: (0..3).map(|_| random_vec(rng, -1.0, 1.0)).collect(),
        };
        let grads: Vec<_> = Constraint::ALL.iter().map(|c| finite_difference_gradient(c, &pt, h)).collect();
        let (p, l) = (pt.total_momentum(), pt.total_angular_momentum());
        for a in 0..3 {
            for b in 0..3 {
                let (c, e) = (0..3).find(|&c| levi_civita(a, b, c) != 0.0).map_or((0, 0.0), |c| (c, levi_civita(a, b, c)));
                pp = pp.max(bracket_of_gradients(&grads[a], &grads[b]).abs());
                rr = rr.max((bracket_of_gradients(&grads[3 + a], &grads[3 + b]) - e * l[c]).abs());
                pr = pr.max((bracket_of_gradients(&grads[a], &grads[3 + b]) - e * p[c]).abs());
            }
        }
    }
    vec![Check::at_most("{P,P}", pp, tol), Check::at_most("{R,R} - eps R", rr, tol), Check::at_most("{P,R} - eps P", pr, tol)]
}

fn orbits(rng: &mut ChaCha8Rng, n: usize, base: u64) -> Result<Vec<Check>, CliError> {
    let mut wrong = [0usize; 3];
    for _ in 0..10 {
        let q = random_vec(rng, -2.0, 2.0);
        if classify_orbit(&PhaseSpacePoint::at_rest(vec![q; 3])?).ok() != Some(3) {
            wrong[0] += 1;
        }
        let axis = random_vec(rng, -1.0, 1.0).normalize();
        let s: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pt = PhaseSpacePoint::new(
            s.iter().map(|x| q + axis * *x).collect(),
            vec![axis * v[0], axis * v[1], axis * -(v[0] + v[1])],
        )?;
        if classify_orbit(&pt).ok() != Some(5) {
            wrong[1] += 1;
        }
    }
    for k in 0..n as u64 {
        let pt = sample_point_on_c(base.wrapping_mul(1000).wrapping_add(10_000 + k), 3, 0.1, 0.1)?;
        if classify_orbit(&pt).ok() != Some(6) {
            wrong[2] += 1;
        }
    }
    Ok(vec![
        Check::at_most("collision misclassified", wrong[0] as f64, 0.0),
        Check::at_most("collinear misclassified", wrong[1] as f64, 0.0),
        Check::at_most("generic misclassified", wrong[2] as f64, 0.0),
    ])
}

fn constraint_matrix_inverse(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let frame = GaugeFrame::ABC;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let pt = embed(&random_chart(rng), &frame)?;
        let numeric = constraint_matrix(&pt, &frame)?
            .try_inverse()
            .ok_or_else(|| CliError::Failed("constraint matrix is singular".into()))?;
        let closed = closed_form_inverse(&pt, &frame)?;
        let scale = closed.amax();
        for (a, b) in numeric.iter().zip(closed.iter()) {
            worst = worst.max((a - b).abs() / b.abs().max(scale));
        }
    }
    let degenerate = PhaseSpacePoint::at_rest(vec![Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)])?;
    let accepted = [constraint_matrix(&degenerate, &frame).is_ok(), closed_form_inverse(&degenerate, &frame).is_ok()];
    Ok(vec![
        Check::at_most("C^-1 numeric vs closed form (relative)", worst, tol),
        Check::at_most("q_C^x = 0 accepted", accepted.iter().filter(|a| **a).count() as f64, 0.0),
    ])
}

fn dirac_chart(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let frame = GaugeFrame::ABC;
    let f: Vec<ChartFunction> = (0..6).map(|component| ChartFunction { frame, component }).collect();
    let mut worst = 0.0f64;
    for _ in 0..n {
        let pt = embed(&random_chart(rng), &frame)?;
        for i in 0..6 {
            for j in i + 1..6 {
                let expected = if j == i + 1 && i % 2 == 0 { 1.0 } else { 0.0 };
                worst = worst.max((dirac_bracket(&f[i], &f[j], &pt, &frame)? - expected).abs());
            }
        }
    }
    Ok(vec![Check::at_most("Dirac brackets of the chart - delta", worst, tol)])
}

fn hamiltonian(rng: &mut ChaCha8Rng, n: usize, config: &Config, tol: f64) -> Result<Vec<Check>, CliError> {
    let v = config.potential;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let s = random_chart(rng);
        let h = reduced_hamiltonian(&s, &v)?;
        let total = total_hamiltonian(&embed(&s, &GaugeFrame::ABC)?, &v);
        worst = worst.max((h - total).abs() / h.abs().max(f64::MIN_POSITIVE));
    }
    Ok(vec![Check::at_most("H_reduced vs H_total on embedded points (relative)", worst, tol)])
}

fn frame_switch(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let (mut diagram, mut round) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let s = random_chart(rng);
        let closed = switch_closed_form(&s)?;
        let composed = switch_by_composition(&s, &GaugeFrame::ABC, &GaugeFrame::CBA)?;
        diagram = diagram.max(max_abs_diff(&closed.to_array(), &composed.to_array()));
        round = round.max(max_abs_diff(&switch_closed_form(&closed)?.to_array(), &s.to_array()));
    }
    Ok(vec![
        Check::at_most("closed form vs composition", diagram, tol),
        Check::at_most("A -> C -> A round trip", round, tol),
    ])
}

/// Least-squares slope of `log10 |H(m_A) - H_standard|` against `log10 m_A`.
pub fn mass_limit_slope(config: &Config) -> Result<f64, CliError> {
    let s = ReducedClassicalState::new(1.1, 0.8, 0.9, 0.3, 0.5, -0.6)?;
    let v = config.potential;
    let standard = standard_form_hamiltonian(&s, &v, 1.0, 1.0)?;
    let mut pts = Vec::new();
    for k in 2..=8 {
        let m = Masses { a: 10f64.powi(k), b: 1.0, c: 1.0 };
        pts.push((k as f64, (reduced_hamiltonian_masses(&s, &v, &m)? - standard).abs().log10()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>())
}

fn mass_limit(config: &Config, tol: f64) -> Result<Vec<Check>, CliError> {
    let slope = mass_limit_slope(config)?;
    Ok(vec![Check::at_most("|slope + 1| of the heavy-origin deviation", (slope + 1.0).abs(), tol)])
}

fn translational(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<Check>, CliError> {
    let mut eigen_failures = 0usize;
    for _ in 0..n {
        let mut draw = || {
            Momentum::new(
                rng.gen_range(-8..=8) as f64 * 0.5,
                rng.gen_range(-8..=8) as f64 * 0.5,
                rng.gen_range(-8..=8) as f64 * 0.5,
            )
        };
        let t = [draw()?, draw()?, draw()?];
        for p in Perspective::ALL {
            let triv = trivialize_basis(&t, p);
            let ok = triv[p.origin()] == t[0] + t[1] + t[2]
                && conjugated_total_momentum(&triv, p) == triv[p.origin()]
                && p.retained().iter().all(|&i| triv[i] == t[i]);
            eigen_failures += usize::from(!ok);
        }
    }
    let mut mismatches = 0usize;
    for k in 0..n as u64 {
        let from = Perspective::ALL[(k % 3) as usize];
        let two = random_two_body_state(rng.gen(), 6, from);
        let triv = trivialize_translations(&untrivialize_translations(&two))?;
        if !triv.vacuum.is_zero() || project_origin(&triv)? != two {
            eigen_failures += 1;
        }
        for to in Perspective::ALL {
            mismatches += usize::from(translational_switch(&two, to)? != switch_via_invariant_state(&two, to)?);
        }
    }
    Ok(vec![
        Check::at_most("trivialization eigenvalue failures", eigen_failures as f64, 0.0),
        Check::at_most("switch vs re-solving path mismatches", mismatches as f64, 0.0),
    ])
}

fn legendre_addition(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let mut worst = 0.0f64;
    // ten angle tuples per sample
    for _ in 0..10 * n {
        let (tb, pb) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let (tc, pc) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        for j in 0..=10 {
            worst = worst.max(legendre_addition_check(j, tb, pb, tc, pc)?.2);
        }
    }
    Ok(vec![Check::at_most("Legendre addition residual, j <= 10", worst, tol)])
}

fn rotational(rng: &mut ChaCha8Rng, tol: f64) -> Result<Vec<Check>, CliError> {
    let g = RadialGrid::new(-1.0, 1.0, 4)?;
    let (mut singlet, mut trivial) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let amps = (0..16 * 9).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = AngularState::new(GaugeFrame::ABC, g, g, 8, AngularStage::Singlet, amps)?;
        singlet = singlet.max(verify_rotation_constraints(&s).max_residual);
        trivial = trivial.max(verify_rotation_constraints(&rotational_trivialize(&s)?).max_residual);
    }
    Ok(vec![
        Check::at_most("trivialized constraint residual", trivial, 0.0),
        Check::at_most("singlet (R_B + R_C)^2 residual, j <= 8", singlet, tol),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_names_are_usage_errors() {
        assert!(validate_names(&["euclidean".into(), "rotational".into()]).is_ok());
        assert!(matches!(validate_names(&["euclid".into()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn mass_limit_slope_is_minus_one() {
        assert!((mass_limit_slope(&Config::default()).unwrap() + 1.0).abs() < 0.05);
    }

    #[test]
    fn suites_are_seed_deterministic() {
        let mut config = Config::default();
        config.suites.samples = 5;
        for name in ["euclidean", "frame-switch"] {
            assert_eq!(run(name, &config).unwrap(), run(name, &config).unwrap());
        }
    }
}
