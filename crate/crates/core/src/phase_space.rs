//! Phase space `T*R^{3n}` of `n` unit-mass particles, the six Euclidean
//! constraints and their flows.
//!
//! Flat coordinate layout used by every gradient in the crate:
//! `[q_0^x, q_0^y, q_0^z, q_1^x, ..., q_{n-1}^z, p_0^x, ..., p_{n-1}^z]`.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Agreement tolerance for gradients and brackets built from finite differences.
pub const TOL_GRAD: f64 = 1e-6;
/// Tolerance for "on the constraint surface" and "gauge-fixed".
pub const TOL_C: f64 = 1e-10;
/// Relative singular-value cutoff for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

const SAMPLER_BUDGET: usize = 10_000;

/// Levi-Civita symbol on axis indices `0..3`.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub q: Vec<Vec3>,
    pub p: Vec<Vec3>,
}

impl PhaseSpacePoint {
    pub fn new(q: Vec<Vec3>, p: Vec<Vec3>) -> Result<Self> {
        let pt = Self { q, p };
        pt.validate()?;
        Ok(pt)
    }

    /// All momenta zero.
    pub fn at_rest(q: Vec<Vec3>) -> Result<Self> {
        let p = vec![Vec3::zeros(); q.len()];
        Self::new(q, p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.len() != self.p.len() {
            return Err(Error::InvalidInput(format!(
                "{} positions but {} momenta",
                self.q.len(),
                self.p.len()
            )));
        }
        if self.q.len() < 2 {
            return Err(Error::InvalidInput("need at least two particles".into()));
        }
        let finite = self.q.iter().chain(&self.p).all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::NonFinite("phase-space point"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn dim(&self) -> usize {
        6 * self.n()
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let n = self.n();
        let mut x = DVector::zeros(6 * n);
        for i in 0..n {
            for a in 0..3 {
                x[q_index(i, a)] = self.q[i][a];
                x[p_index(n, i, a)] = self.p[i][a];
            }
        }
        x
    }

    pub fn from_flat(n: usize, x: &[f64]) -> Result<Self> {
        if x.len() != 6 * n {
            return Err(Error::InvalidInput(format!("flat vector of length {} for n = {n}", x.len())));
        }
        let q = (0..n).map(|i| Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])).collect();
        let p = (0..n)
            .map(|i| Vec3::new(x[3 * n + 3 * i], x[3 * n + 3 * i + 1], x[3 * n + 3 * i + 2]))
            .collect();
        Self::new(q, p)
    }

    pub fn total_momentum(&self) -> Vec3 {
        self.p.iter().sum()
    }

    pub fn total_angular_momentum(&self) -> Vec3 {
        self.q.iter().zip(&self.p).map(|(q, p)| q.cross(p)).sum()
    }

    /// `1/2 sum |p_i|^2`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.p.iter().map(|p| p.norm_squared()).sum::<f64>()
    }
}

pub fn q_index(i: usize, a: usize) -> usize {
    3 * i + a
}

pub fn p_index(n: usize, i: usize, a: usize) -> usize {
    3 * n + 3 * i + a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValues {
    pub p: Vec3,
    pub r: Vec3,
}

impl ConstraintValues {
    pub fn max_abs(&self) -> f64 {
        self.p.amax().max(self.r.amax())
    }

    pub fn is_on_surface(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

pub fn evaluate_constraints(pt: &PhaseSpacePoint) -> ConstraintValues {
    ConstraintValues { p: pt.total_momentum(), r: pt.total_angular_momentum() }
}

pub fn ensure_on_surface(pt: &PhaseSpacePoint, tol: f64) -> Result<()> {
    let c = evaluate_constraints(pt);
    if c.is_on_surface(tol) {
        Ok(())
    } else {
        Err(Error::OffConstraintSurface(c.max_abs()))
    }
}

/// A scalar function on phase space. The default gradient is a central
/// finite difference with step [`FD_STEP`].
pub trait PhaseSpaceFunction: Sync {
    fn value(&self, pt: &PhaseSpacePoint) -> f64;

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        finite_difference_gradient(self, pt, FD_STEP)
    }
}

impl<T: PhaseSpaceFunction + ?Sized> PhaseSpaceFunction for &T {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        (**self).value(pt)
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        (**self).gradient(pt)
    }
}

pub fn finite_difference_gradient<F: PhaseSpaceFunction + ?Sized>(
    f: &F,
    pt: &PhaseSpacePoint,
    h: f64,
) -> DVector<f64> {
    let n = pt.n();
    let mut probe = pt.clone();
    let mut g = DVector::zeros(6 * n);
    for k in 0..6 * n {
        let (i, a, is_q) = if k < 3 * n { (k / 3, k % 3, true) } else { ((k - 3 * n) / 3, k % 3, false) };
        let slot = if is_q { &mut probe.q[i][a] } else { &mut probe.p[i][a] };
        let x0 = *slot;
        *slot = x0 + h;
        let fp = f.value(&probe);
        let slot = if is_q { &mut probe.q[i][a] } else { &mut probe.p[i][a] };
        *slot = x0 - h;
        let fm = f.value(&probe);
        let slot = if is_q { &mut probe.q[i][a] } else { &mut probe.p[i][a] };
        *slot = x0;
        g[k] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Wraps a closure; gradient by finite differences.
pub struct FromFn<F>(pub F);

impl<F: Fn(&PhaseSpacePoint) -> f64 + Sync> PhaseSpaceFunction for FromFn<F> {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        (self.0)(pt)
    }
}

/// Forces the finite-difference gradient of the wrapped function.
pub struct Numerical<T>(pub T);

impl<T: PhaseSpaceFunction> PhaseSpaceFunction for Numerical<T> {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        self.0.value(pt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Canonical {
    Q,
    P,
}

/// A single canonical coordinate `q_i^a` or `p_i^a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coordinate {
    pub kind: Canonical,
    pub particle: usize,
    pub axis: usize,
}

impl Coordinate {
    pub fn q(particle: usize, axis: usize) -> Self {
        Self { kind: Canonical::Q, particle, axis }
    }

    pub fn p(particle: usize, axis: usize) -> Self {
        Self { kind: Canonical::P, particle, axis }
    }
}

impl PhaseSpaceFunction for Coordinate {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        match self.kind {
            Canonical::Q => pt.q[self.particle][self.axis],
            Canonical::P => pt.p[self.particle][self.axis],
        }
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        let n = pt.n();
        let mut g = DVector::zeros(6 * n);
        let k = match self.kind {
            Canonical::Q => q_index(self.particle, self.axis),
            Canonical::P => p_index(n, self.particle, self.axis),
        };
        g[k] = 1.0;
        g
    }
}

/// The constraint functions `P^a` and `R^a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Momentum(usize),
    Angular(usize),
}

impl Constraint {
    pub const ALL: [Constraint; 6] = [
        Constraint::Momentum(0),
        Constraint::Momentum(1),
        Constraint::Momentum(2),
        Constraint::Angular(0),
        Constraint::Angular(1),
        Constraint::Angular(2),
    ];
}

impl PhaseSpaceFunction for Constraint {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        match *self {
            Constraint::Momentum(a) => pt.total_momentum()[a],
            Constraint::Angular(a) => pt.total_angular_momentum()[a],
        }
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        let n = pt.n();
        let mut g = DVector::zeros(6 * n);
        match *self {
            Constraint::Momentum(a) => {
                for i in 0..n {
                    g[p_index(n, i, a)] = 1.0;
                }
            }
            Constraint::Angular(a) => {
                // R^a = eps^{abc} q^b p^c
                for i in 0..n {
                    for b in 0..3 {
                        for c in 0..3 {
                            let e = levi_civita(a, b, c);
                            if e != 0.0 {
                                g[q_index(i, b)] += e * pt.p[i][c];
                                g[p_index(n, i, c)] += e * pt.q[i][b];
                            }
                        }
                    }
                }
            }
        }
        g
    }
}

/// `{f, g}` from two flat gradients.
pub fn bracket_of_gradients(df: &DVector<f64>, dg: &DVector<f64>) -> f64 {
    let half = df.len() / 2;
    let mut s = 0.0;
    for k in 0..half {
        s += df[k] * dg[half + k] - df[half + k] * dg[k];
    }
    s
}

pub fn poisson_bracket<F, G>(f: &F, g: &G, pt: &PhaseSpacePoint) -> Result<f64>
where
    F: PhaseSpaceFunction + ?Sized,
    G: PhaseSpaceFunction + ?Sized,
{
    let df = f.gradient(pt);
    let dg = g.gradient(pt);
    if df.len() != pt.dim() || dg.len() != pt.dim() {
        return Err(Error::InvalidInput("gradient has the wrong length".into()));
    }
    if !df.iter().chain(dg.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(bracket_of_gradients(&df, &dg))
}

/// Rows: gradients of `(P^x, P^y, P^z, R^x, R^y, R^z)`.
pub fn constraint_gradients(pt: &PhaseSpacePoint) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, pt.dim());
    for (row, c) in Constraint::ALL.iter().enumerate() {
        m.set_row(row, &c.gradient(pt).transpose());
    }
    m
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Flow of `eps . P`: shifts every position.
pub fn apply_translation(pt: &PhaseSpacePoint, eps: &Vec3) -> PhaseSpacePoint {
    PhaseSpacePoint { q: pt.q.iter().map(|q| q + eps).collect(), p: pt.p.clone() }
}

/// Flow of `axis . R` for parameter `angle`: the right-handed rotation about `axis`.
pub fn apply_rotation(pt: &PhaseSpacePoint, axis: &Vec3, angle: f64) -> Result<PhaseSpacePoint> {
    let norm = axis.norm();
    if !((norm - 1.0).abs() <= 1e-9) {
        return Err(Error::NonUnitAxis(norm));
    }
    let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(*axis), angle);
    Ok(apply_rotation_matrix(pt, rot.matrix()))
}

pub fn apply_rotation_matrix(pt: &PhaseSpacePoint, m: &Matrix3<f64>) -> PhaseSpacePoint {
    PhaseSpacePoint { q: pt.q.iter().map(|q| m * q).collect(), p: pt.p.iter().map(|p| m * p).collect() }
}

/// Removes total momentum, then the rigid-rotation momentum field
/// `omega x (q_i - q_c)` with `I omega = R`, which leaves `P` untouched.
pub fn project_momenta_onto_surface(pt: &PhaseSpacePoint) -> PhaseSpacePoint {
    let n = pt.n() as f64;
    let mean_p = pt.total_momentum() / n;
    let mut p: Vec<Vec3> = pt.p.iter().map(|p| p - mean_p).collect();
    let centroid: Vec3 = pt.q.iter().sum::<Vec3>() / n;
    let rel: Vec<Vec3> = pt.q.iter().map(|q| q - centroid).collect();
    let r: Vec3 = rel.iter().zip(&p).map(|(x, p)| x.cross(p)).sum();
    let mut inertia = Matrix3::zeros();
    for x in &rel {
        inertia += Matrix3::identity() * x.norm_squared() - x * x.transpose();
    }
    // Collinear sets give a singular tensor; R has no component along the
    // degenerate direction there, so the pseudo-inverse is exact.
    let sv = inertia.singular_values();
    let omega = if sv.min() > 1e-10 * sv.max() {
        inertia.cholesky().map(|c| c.solve(&r))
    } else {
        None
    };
    let omega = omega.unwrap_or_else(|| {
        inertia.pseudo_inverse(1e-12 * inertia.norm().max(f64::MIN_POSITIVE)).map(|inv| inv * r).unwrap_or_else(|_| Vec3::zeros())
    });
    for (pi, x) in p.iter_mut().zip(&rel) {
        *pi -= omega.cross(x);
    }
    PhaseSpacePoint { q: pt.q.clone(), p }
}

/// Smallest altitude of the triangle `(a, b, c)`.
pub fn min_altitude(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let twice_area = (b - a).cross(&(c - a)).norm();
    let longest = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if longest == 0.0 {
        0.0
    } else {
        twice_area / longest
    }
}

/// Seeded sample on the constraint surface. Positions and momenta are drawn
/// uniformly from `[-1, 1]^3`; configurations with a pair closer than
/// `min_sep` or a triple with altitude below `min_collinearity` are rejected.
pub fn sample_point_on_c(seed: u64, n: usize, min_sep: f64, min_collinearity: f64) -> Result<PhaseSpacePoint> {
    if !(min_sep > 0.0) {
        return Err(Error::InvalidInput("min_sep must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("need at least two particles".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for _ in 0..SAMPLER_BUDGET {
        let q: Vec<Vec3> = (0..n).map(|_| draw(&mut rng)).collect();
        let p: Vec<Vec3> = (0..n).map(|_| draw(&mut rng)).collect();
        if !configuration_is_generic(&q, min_sep, min_collinearity) {
            continue;
        }
        return Ok(project_momenta_onto_surface(&PhaseSpacePoint { q, p }));
    }
    Err(Error::SamplingExhausted(SAMPLER_BUDGET))
}

pub fn configuration_is_generic(q: &[Vec3], min_sep: f64, min_collinearity: f64) -> bool {
    let n = q.len();
    for i in 0..n {
        for j in i + 1..n {
            if (q[i] - q[j]).norm() < min_sep {
                return false;
            }
            for k in j + 1..n {
                if min_altitude(&q[i], &q[j], &q[k]) < min_collinearity {
                    return false;
                }
            }
        }
    }
    true
}
