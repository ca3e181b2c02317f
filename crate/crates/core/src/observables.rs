//! Gauge-invariant quantities: elementary invariants, the Dirac-observable
//! chart `(rho_B, p_rho_B, rho_C, p_rho_C, u, p_u)`, momentum solving and the
//! reduced Hamiltonian of the frame `[A, B, C]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge_fixing::GaugeFrame;
use crate::phase_space::{constraint_gradients, p_index, singular_values, q_index, PhaseSpaceFunction, PhaseSpacePoint, Vec3};

/// `|u|` above this is flagged as near-collinear.
pub const U_MAX: f64 = 1e6;

/// Pairwise potential as a function of the three relative distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    None,
    /// `g * sum 1/r_ij`
    Coulomb { g: f64 },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Coulomb { g: 1.0 }
    }
}

impl Potential {
    pub fn pair(&self, r: f64) -> f64 {
        match *self {
            Potential::None => 0.0,
            Potential::Coulomb { g } => g / r,
        }
    }

    pub fn pair_derivative(&self, r: f64) -> f64 {
        match *self {
            Potential::None => 0.0,
            Potential::Coulomb { g } => -g / (r * r),
        }
    }

    pub fn evaluate(&self, r_ab: f64, r_ac: f64, r_bc: f64) -> f64 {
        self.pair(r_ab) + self.pair(r_ac) + self.pair(r_bc)
    }

    /// Derivatives with respect to `(r_AB, r_AC, r_BC)`.
    pub fn gradient(&self, r_ab: f64, r_ac: f64, r_bc: f64) -> [f64; 3] {
        [self.pair_derivative(r_ab), self.pair_derivative(r_ac), self.pair_derivative(r_bc)]
    }

    /// Sum over all pairs of particles.
    pub fn total(&self, pt: &PhaseSpacePoint) -> f64 {
        let n = pt.n();
        let mut v = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                v += self.pair((pt.q[i] - pt.q[j]).norm());
            }
        }
        v
    }

    /// `dV/dq_i` for every particle.
    pub fn position_gradient(&self, pt: &PhaseSpacePoint) -> Vec<Vec3> {
        let n = pt.n();
        let mut out = vec![Vec3::zeros(); n];
        for i in 0..n {
            for j in i + 1..n {
                let d = pt.q[i] - pt.q[j];
                let r = d.norm();
                let f = d * (self.pair_derivative(r) / r);
                out[i] += f;
                out[j] -= f;
            }
        }
        out
    }
}

/// Cartesian reduced chart of a frame `[A, B, C]`: `B` at `(0, 0, qb_z)`,
/// `C` at `(qc_x, 0, qc_z)`, with the conjugate momenta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedClassicalState {
    pub qb_z: f64,
    pub pb_z: f64,
    pub qc_x: f64,
    pub pc_x: f64,
    pub qc_z: f64,
    pub pc_z: f64,
}

/// The six chart functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracChart {
    pub rho_b: f64,
    pub p_rho_b: f64,
    pub rho_c: f64,
    pub p_rho_c: f64,
    pub u: f64,
    pub p_u: f64,
}

impl DiracChart {
    pub fn to_array(&self) -> [f64; 6] {
        [self.rho_b, self.p_rho_b, self.rho_c, self.p_rho_c, self.u, self.p_u]
    }

    pub fn near_collinear(&self, u_max: f64) -> bool {
        self.u.abs() > u_max
    }
}

impl ReducedClassicalState {
    pub fn new(qb_z: f64, pb_z: f64, qc_x: f64, pc_x: f64, qc_z: f64, pc_z: f64) -> Result<Self> {
        let s = Self { qb_z, pb_z, qc_x, pc_x, qc_z, pc_z };
        s.validate()?;
        Ok(s)
    }

    /// Positions `q_B^z = 1`, `q_C = (1, 0, 1)`, momenta zero.
    pub fn e1() -> Self {
        Self { qb_z: 1.0, pb_z: 0.0, qc_x: 1.0, pc_x: 0.0, qc_z: 1.0, pc_z: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("reduced state"));
        }
        if !(self.qb_z > 0.0) {
            return Err(Error::ChartViolation(format!("q_B^z = {} must be positive", self.qb_z)));
        }
        if !(self.qc_x > 0.0) {
            return Err(Error::ChartViolation(format!("q_C^x = {} must be positive", self.qc_x)));
        }
        Ok(())
    }

    /// Order `(q_B^z, q_C^x, q_C^z, p_B^z, p_C^x, p_C^z)`: positions, then conjugate momenta.
    pub fn to_array(&self) -> [f64; 6] {
        [self.qb_z, self.qc_x, self.qc_z, self.pb_z, self.pc_x, self.pc_z]
    }

    pub fn from_array(x: &[f64; 6]) -> Self {
        Self { qb_z: x[0], qc_x: x[1], qc_z: x[2], pb_z: x[3], pc_x: x[4], pc_z: x[5] }
    }

    /// `R_C^y = q_C^z p_C^x - q_C^x p_C^z`.
    pub fn rc_y(&self) -> f64 {
        self.qc_z * self.pc_x - self.qc_x * self.pc_z
    }

    pub fn r_c(&self) -> f64 {
        self.qc_x.hypot(self.qc_z)
    }

    pub fn r_bc(&self) -> f64 {
        self.qc_x.hypot(self.qb_z - self.qc_z)
    }

    /// `(r_AB, r_AC, r_BC)`.
    pub fn distances(&self) -> (f64, f64, f64) {
        (self.qb_z, self.r_c(), self.r_bc())
    }

    /// Chart functions in their gauge-fixed form.
    pub fn chart(&self) -> DiracChart {
        let r_c = self.r_c();
        let sin_theta = self.qc_x / r_c;
        DiracChart {
            rho_b: self.qb_z.ln(),
            p_rho_b: self.qb_z * self.pb_z,
            rho_c: r_c.ln(),
            p_rho_c: self.pc_x * self.qc_x + self.pc_z * self.qc_z,
            u: -self.qc_z / self.qc_x,
            p_u: sin_theta * sin_theta * self.rc_y(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantIndex {
    /// `(q_i - q_j) . (q_k - q_l)`
    F(usize, usize, usize, usize),
    /// `(q_i - q_j) . p_k`
    G(usize, usize, usize),
    /// `p_i . p_j`
    H(usize, usize),
}

/// Non-redundant index set: `F` over unordered pairs `(ij) <= (kl)` with
/// `i < j`, `k < l`; `G` over `i < j` and every `k`; `H` over `i <= j`.
pub fn invariant_indices(n: usize) -> Vec<InvariantIndex> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(k, l) in &pairs[a..] {
            out.push(InvariantIndex::F(i, j, k, l));
        }
    }
    for &(i, j) in &pairs {
        for k in 0..n {
            out.push(InvariantIndex::G(i, j, k));
        }
    }
    for i in 0..n {
        for j in i..n {
            out.push(InvariantIndex::H(i, j));
        }
    }
    out
}

impl InvariantIndex {
    pub fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        let q = &pt.q;
        let p = &pt.p;
        match *self {
            InvariantIndex::F(i, j, k, l) => (q[i] - q[j]).dot(&(q[k] - q[l])),
            InvariantIndex::G(i, j, k) => (q[i] - q[j]).dot(&p[k]),
            InvariantIndex::H(i, j) => p[i].dot(&p[j]),
        }
    }
}

impl PhaseSpaceFunction for InvariantIndex {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        InvariantIndex::value(self, pt)
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> DVector<f64> {
        let n = pt.n();
        let mut g = DVector::zeros(6 * n);
        let add_q = |g: &mut DVector<f64>, m: usize, s: f64, v: &Vec3| {
            for a in 0..3 {
                g[q_index(m, a)] += s * v[a];
            }
        };
        let q = &pt.q;
        let p = &pt.p;
        match *self {
            InvariantIndex::F(i, j, k, l) => {
                let (u, w) = (q[i] - q[j], q[k] - q[l]);
                add_q(&mut g, i, 1.0, &w);
                add_q(&mut g, j, -1.0, &w);
                add_q(&mut g, k, 1.0, &u);
                add_q(&mut g, l, -1.0, &u);
            }
            InvariantIndex::G(i, j, k) => {
                add_q(&mut g, i, 1.0, &p[k]);
                add_q(&mut g, j, -1.0, &p[k]);
                let u = q[i] - q[j];
                for a in 0..3 {
                    g[p_index(n, k, a)] += u[a];
                }
            }
            InvariantIndex::H(i, j) => {
                for a in 0..3 {
                    g[p_index(n, i, a)] += p[j][a];
                    g[p_index(n, j, a)] += p[i][a];
                }
            }
        }
        g
    }
}

pub fn elementary_invariants(pt: &PhaseSpacePoint) -> Vec<f64> {
    invariant_indices(pt.n()).iter().map(|ix| ix.value(pt)).collect()
}

pub fn invariant_jacobian(pt: &PhaseSpacePoint) -> DMatrix<f64> {
    let idx = invariant_indices(pt.n());
    let mut m = DMatrix::zeros(idx.len(), pt.dim());
    for (row, ix) in idx.iter().enumerate() {
        m.set_row(row, &ix.gradient(pt).transpose());
    }
    m
}

/// Number of independent invariant differentials not already spanned by
/// the constraint gradients: `rank([J; dP; dR]) - rank([dP; dR])`.
pub fn invariant_rank_modulo_constraints(pt: &PhaseSpacePoint, rel_tol: f64) -> usize {
    let j = invariant_jacobian(pt);
    let c = constraint_gradients(pt);
    let mut stacked = DMatrix::zeros(j.nrows() + 6, pt.dim());
    stacked.view_mut((0, 0), (j.nrows(), pt.dim())).copy_from(&j);
    stacked.view_mut((j.nrows(), 0), (6, pt.dim())).copy_from(&c);
    // Absolute cutoff from the stacked matrix so both ranks use the same scale.
    let scale = singular_values(&stacked).first().copied().unwrap_or(0.0);
    let rank_abs = |m: &DMatrix<f64>| singular_values(m).iter().filter(|&&s| s > rel_tol * scale).count();
    rank_abs(&stacked) - rank_abs(&c)
}

/// Chart functions of the frame evaluated on any point, in their
/// gauge-invariant form.
pub fn dirac_chart(pt: &PhaseSpacePoint, frame: &GaugeFrame) -> Result<DiracChart> {
    frame.validate(pt.n())?;
    let qa = pt.q[frame.origin];
    let qba = pt.q[frame.axis] - qa;
    let qca = pt.q[frame.plane] - qa;
    let r_ba = qba.norm();
    let r_ca = qca.norm();
    if !(r_ba > 0.0) || !(r_ca > 0.0) {
        return Err(Error::Degenerate("collision with the origin particle: rho is infinite".into()));
    }
    let cross = qba.cross(&qca).norm();
    if !(cross > 0.0) {
        return Err(Error::Degenerate("collinear configuration: u is undefined".into()));
    }
    let dot = qba.dot(&qca);
    let cos_g = dot / (r_ba * r_ca);
    let sin_g = cross / (r_ba * r_ca);
    let pb = pt.p[frame.axis];
    let pc = pt.p[frame.plane];
    Ok(DiracChart {
        rho_b: r_ba.ln(),
        p_rho_b: pb.dot(&qba),
        rho_c: r_ca.ln(),
        p_rho_c: pc.dot(&qca),
        u: -dot / cross,
        p_u: sin_g * pc.dot(&(qca * cos_g - qba * (r_ca / r_ba))),
    })
}

/// One chart function as a phase-space function (NaN where the chart is undefined).
#[derive(Clone, Copy, Debug)]
pub struct ChartFunction {
    pub frame: GaugeFrame,
    /// Index into [`DiracChart::to_array`].
    pub component: usize,
}

impl PhaseSpaceFunction for ChartFunction {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        dirac_chart(pt, &self.frame).map(|c| c.to_array()[self.component]).unwrap_or(f64::NAN)
    }
}

/// Momenta `(p_A, p_B, p_C)` on the gauge surface with `P = R = 0`.
pub fn solve_redundant_momenta(reduced: &ReducedClassicalState) -> Result<[Vec3; 3]> {
    if !(reduced.qb_z > 0.0) {
        return Err(Error::ChartViolation(format!("q_B^z = {} must be positive", reduced.qb_z)));
    }
    let pb = Vec3::new(-reduced.rc_y() / reduced.qb_z, 0.0, reduced.pb_z);
    let pc = Vec3::new(reduced.pc_x, 0.0, reduced.pc_z);
    Ok([-pb - pc, pb, pc])
}

fn potential_at(reduced: &ReducedClassicalState, v: &Potential) -> f64 {
    let (ab, ac, bc) = reduced.distances();
    v.evaluate(ab, ac, bc)
}

/// `H_{BC|A}` for unit masses.
pub fn reduced_hamiltonian(reduced: &ReducedClassicalState, v: &Potential) -> Result<f64> {
    if !(reduced.qb_z > 0.0) {
        return Err(Error::ChartViolation(format!("q_B^z = {} must be positive", reduced.qb_z)));
    }
    let s = reduced;
    let r = s.rc_y();
    let b = s.qb_z;
    Ok(s.pb_z * s.pb_z + s.pc_z * s.pc_z + s.pc_x * s.pc_x + s.pb_z * s.pc_z + r * r / (b * b) - s.pc_x * r / b
        + potential_at(s, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Masses {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Masses {
    pub const UNIT: Masses = Masses { a: 1.0, b: 1.0, c: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 && self.c > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("masses must be positive: {self:?}")))
        }
    }
}

/// `H_{BC|A}` for masses `m_A, m_B, m_C`, i.e. `sum |p_i|^2 / 2 m_i + V`
/// on the solved momenta.
pub fn reduced_hamiltonian_masses(reduced: &ReducedClassicalState, v: &Potential, m: &Masses) -> Result<f64> {
    m.validate()?;
    if !(reduced.qb_z > 0.0) {
        return Err(Error::ChartViolation(format!("q_B^z = {} must be positive", reduced.qb_z)));
    }
    let s = reduced;
    let (ia, ib, ic) = (1.0 / m.a, 1.0 / m.b, 1.0 / m.c);
    let r = s.rc_y();
    let b = s.qb_z;
    Ok(0.5 * (ia + ib) * s.pb_z * s.pb_z
        + 0.5 * (ia + ic) * (s.pc_z * s.pc_z + s.pc_x * s.pc_x)
        + ia * s.pb_z * s.pc_z
        + 0.5 * (ia + ib) * r * r / (b * b)
        - ia * s.pc_x * r / b
        + potential_at(s, v))
}

/// The `m_A -> infinity` limit of [`reduced_hamiltonian_masses`].
pub fn standard_form_hamiltonian(reduced: &ReducedClassicalState, v: &Potential, m_b: f64, m_c: f64) -> Result<f64> {
    Masses { a: 1.0, b: m_b, c: m_c }.validate()?;
    let s = reduced;
    let r = s.rc_y();
    let b = s.qb_z;
    Ok(0.5 * s.pb_z * s.pb_z / m_b
        + 0.5 * (s.pc_z * s.pc_z + s.pc_x * s.pc_x) / m_c
        + 0.5 * r * r / (m_b * b * b)
        + potential_at(s, v))
}
