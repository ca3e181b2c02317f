//! Translational sector on exact sparse momentum-basis states.
//!
//! Momentum labels are produced by arithmetic on given labels, never
//! measured, so they are compared exactly. States built on a dyadic lattice
//! keep every identity below exact.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A momentum label. Negative zero is stored as zero so that equal vectors
/// have equal keys.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Momentum([f64; 3]);

impl Momentum {
    pub const ZERO: Momentum = Momentum([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("momentum label"));
        }
        Ok(Self::normalized([x, y, z]))
    }

    fn normalized(v: [f64; 3]) -> Self {
        Momentum(v.map(|x| x + 0.0))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }

    pub fn transform(&self, m: &Matrix3<f64>) -> Self {
        let v = m * nalgebra::Vector3::from(self.0);
        Self::normalized([v.x, v.y, v.z])
    }
}

impl TryFrom<[f64; 3]> for Momentum {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        Momentum::new(v[0], v[1], v[2])
    }
}

impl From<Momentum> for [f64; 3] {
    fn from(m: Momentum) -> Self {
        m.0
    }
}

impl PartialEq for Momentum {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Momentum {}

impl PartialOrd for Momentum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Momentum {
    fn cmp(&self, other: &Self) -> Ordering {
        (0..3).map(|a| self.0[a].total_cmp(&other.0[a])).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

impl Add for Momentum {
    type Output = Momentum;
    fn add(self, o: Momentum) -> Momentum {
        Momentum::normalized([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Momentum {
    type Output = Momentum;
    fn sub(self, o: Momentum) -> Momentum {
        Momentum::normalized([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum::normalized(self.0.map(|x| -x))
    }
}

/// Which particle serves as the origin. The two remaining particles keep
/// alphabetical order: `BC|A` stores `(p_B, p_C)`, `AC|B` stores `(p_A, p_C)`,
/// `AB|C` stores `(p_A, p_B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Perspective {
    #[serde(rename = "BC|A")]
    BcA,
    #[serde(rename = "AC|B")]
    AcB,
    #[serde(rename = "AB|C")]
    AbC,
}

impl Perspective {
    pub const ALL: [Perspective; 3] = [Perspective::BcA, Perspective::AcB, Perspective::AbC];

    pub fn origin(&self) -> usize {
        match self {
            Perspective::BcA => 0,
            Perspective::AcB => 1,
            Perspective::AbC => 2,
        }
    }

    pub fn from_origin(i: usize) -> Result<Self> {
        Perspective::ALL.get(i).copied().ok_or_else(|| Error::InvalidInput(format!("no particle {i}")))
    }

    /// Indices of the two stored particles.
    pub fn retained(&self) -> [usize; 2] {
        match self {
            Perspective::BcA => [1, 2],
            Perspective::AcB => [0, 2],
            Perspective::AbC => [0, 1],
        }
    }
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perspective::BcA => "BC|A",
            Perspective::AcB => "AC|B",
            Perspective::AbC => "AB|C",
        })
    }
}

pub type Triple = [Momentum; 3];

/// Sums squared moduli in ascending order, so the norm does not depend on
/// the order of the labels.
fn norm_of<'a>(amps: impl Iterator<Item = &'a Complex64>) -> f64 {
    let mut sq: Vec<f64> = amps.map(|a| a.norm_sqr()).collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum::<f64>().sqrt()
}

fn check_amplitude(a: Complex64) -> Result<()> {
    if a.re.is_finite() && a.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("amplitude"))
    }
}

/// Finite superposition of kinematical basis states `|p_A, p_B, p_C>`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KinematicalRecord", into = "KinematicalRecord")]
pub struct SparseMomentumState {
    terms: BTreeMap<Triple, Complex64>,
}

impl SparseMomentumState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state, rejecting repeated labels and non-finite amplitudes.
    pub fn from_terms<I: IntoIterator<Item = (Triple, Complex64)>>(terms: I) -> Result<Self> {
        let mut s = Self::new();
        for (k, a) in terms {
            check_amplitude(a)?;
            if s.terms.insert(k, a).is_some() {
                return Err(Error::InvalidInput(format!("duplicate momentum triple {k:?}")));
            }
        }
        Ok(s)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Triple, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, k: &Triple) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm_of(self.terms.values())
    }

    /// Applies a basis permutation; labels mapped to the same key would
    /// violate unitarity, so that is reported as an error.
    fn map_basis(&self, f: impl Fn(&Triple) -> Triple) -> Result<Self> {
        Self::from_terms(self.terms.iter().map(|(k, a)| (f(k), *a)))
    }

    /// Rotates every momentum label by `m`.
    pub fn rotate_labels(&self, m: &Matrix3<f64>) -> Result<Self> {
        self.map_basis(|k| k.map(|p| p.transform(m)))
    }
}

/// Momentum of the origin particle on the support of the translation constraint.
fn solved_origin(p1: Momentum, p2: Momentum) -> Momentum {
    -(p1 + p2)
}

/// A translation-invariant state in one perspective: amplitudes over the two
/// retained momenta, the origin momentum being minus their sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRecord", into = "PairRecord")]
pub struct TIState {
    pub perspective: Perspective,
    terms: BTreeMap<(Momentum, Momentum), Complex64>,
}

/// Two-body factor left after trivialization, over the retained particles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRecord", into = "PairRecord")]
pub struct TwoBodyState {
    pub perspective: Perspective,
    terms: BTreeMap<(Momentum, Momentum), Complex64>,
}

macro_rules! pair_state_impl {
    ($t:ty) => {
        impl $t {
            pub fn new(perspective: Perspective) -> Self {
                Self { perspective, terms: BTreeMap::new() }
            }

            pub fn from_terms<I: IntoIterator<Item = ((Momentum, Momentum), Complex64)>>(
                perspective: Perspective,
                terms: I,
            ) -> Result<Self> {
                let mut s = Self::new(perspective);
                for (k, a) in terms {
                    check_amplitude(a)?;
                    if s.terms.insert(k, a).is_some() {
                        return Err(Error::InvalidInput(format!("duplicate momentum pair {k:?}")));
                    }
                }
                Ok(s)
            }

            pub fn terms(&self) -> impl Iterator<Item = (&(Momentum, Momentum), &Complex64)> {
                self.terms.iter()
            }

            pub fn amplitude(&self, k: &(Momentum, Momentum)) -> Complex64 {
                self.terms.get(k).copied().unwrap_or_default()
            }

            pub fn len(&self) -> usize {
                self.terms.len()
            }

            pub fn is_empty(&self) -> bool {
                self.terms.is_empty()
            }

            pub fn norm(&self) -> f64 {
                norm_of(self.terms.values())
            }

            /// Full momentum triple of each term, indexed by particle.
            pub fn triples(&self) -> impl Iterator<Item = (Triple, Complex64)> + '_ {
                let [j, k] = self.perspective.retained();
                let o = self.perspective.origin();
                self.terms.iter().map(move |(&(p1, p2), &a)| {
                    let mut t = [Momentum::ZERO; 3];
                    t[o] = solved_origin(p1, p2);
                    t[j] = p1;
                    t[k] = p2;
                    (t, a)
                })
            }

            pub fn rotate_labels(&self, m: &Matrix3<f64>) -> Result<Self> {
                Self::from_terms(
                    self.perspective,
                    self.terms.iter().map(|(&(p1, p2), &a)| ((p1.transform(m), p2.transform(m)), a)),
                )
            }
        }
    };
}

pair_state_impl!(TIState);
pair_state_impl!(TwoBodyState);

/// Result of group averaging together with the number of kinematical terms
/// lying off the support of the translation constraint that were dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAverage {
    pub state: TIState,
    pub dropped: usize,
}

fn retained_pair(t: &Triple, perspective: Perspective) -> (Momentum, Momentum) {
    let [j, k] = perspective.retained();
    (t[j], t[k])
}

fn on_support(t: &Triple, perspective: Perspective) -> bool {
    let (p1, p2) = retained_pair(t, perspective);
    t[perspective.origin()] == solved_origin(p1, p2)
}

/// Restriction of a kinematical state to the support of `delta(P)`. Terms
/// off the support carry no weight there and are dropped with a warning.
pub fn group_average(kin: &SparseMomentumState, perspective: Perspective) -> GroupAverage {
    let mut terms = Vec::new();
    let mut dropped = 0;
    for (t, a) in kin.terms() {
        if on_support(t, perspective) {
            terms.push((retained_pair(t, perspective), *a));
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!("group averaging dropped {dropped} term(s) with nonzero total momentum");
    }
    let state = TIState::from_terms(perspective, terms).expect("distinct triples on the support have distinct pairs");
    GroupAverage { state, dropped }
}

/// Group averaging of a kinematical wave function: every retained pair that
/// appears in `support` is evaluated at its on-shell triple.
pub fn group_average_function<F>(kin: F, support: &SparseMomentumState, perspective: Perspective) -> Result<TIState>
where
    F: Fn(&Triple) -> Complex64,
{
    let mut terms = BTreeMap::new();
    for t in support.terms.keys() {
        let (p1, p2) = retained_pair(t, perspective);
        terms.entry((p1, p2)).or_insert_with(|| {
            let mut on_shell = *t;
            on_shell[perspective.origin()] = solved_origin(p1, p2);
            kin(&on_shell)
        });
    }
    TIState::from_terms(perspective, terms)
}

/// The same translation-invariant state described from another perspective.
pub fn ti_reexpress(ti: &TIState, to: Perspective) -> TIState {
    TIState::from_terms(to, ti.triples().map(|(t, a)| (retained_pair(&t, to), a)))
        .expect("re-expression is a bijection of labels")
}

/// `T_o` on a basis label: the origin slot takes the total momentum.
pub fn trivialize_basis(t: &Triple, perspective: Perspective) -> Triple {
    let [j, k] = perspective.retained();
    let o = perspective.origin();
    let mut out = *t;
    out[o] = t[o] + (t[j] + t[k]);
    out
}

/// Inverse of [`trivialize_basis`].
pub fn untrivialize_basis(t: &Triple, perspective: Perspective) -> Triple {
    let [j, k] = perspective.retained();
    let o = perspective.origin();
    let mut out = *t;
    out[o] = t[o] - (t[j] + t[k]);
    out
}

/// `T_o` on a kinematical state.
pub fn apply_trivialization(kin: &SparseMomentumState, perspective: Perspective) -> Result<SparseMomentumState> {
    kin.map_basis(|t| trivialize_basis(t, perspective))
}

/// `T_o^dagger` on a kinematical state.
pub fn apply_untrivialization(kin: &SparseMomentumState, perspective: Perspective) -> Result<SparseMomentumState> {
    kin.map_basis(|t| untrivialize_basis(t, perspective))
}

/// Eigenvalue of `T P T^dagger` on the basis state `t`: total momentum of
/// `T^dagger |t>`.
pub fn conjugated_total_momentum(t: &Triple, perspective: Perspective) -> Momentum {
    let u = untrivialize_basis(t, perspective);
    u[0] + u[1] + u[2]
}

/// Output of the trivialization map: the origin slot (always the zero
/// momentum on translation-invariant input) and the two-body factor.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivializedState {
    pub vacuum: Momentum,
    pub two_body: TwoBodyState,
}

/// `T_o` applied to a translation-invariant state.
pub fn trivialize_translations(ti: &TIState) -> Result<TrivializedState> {
    let o = ti.perspective.origin();
    let mut terms = Vec::with_capacity(ti.len());
    for (t, a) in ti.triples() {
        let out = trivialize_basis(&t, ti.perspective);
        if !out[o].is_zero() {
            return Err(Error::InvalidInput(format!("origin slot momentum {:?} after trivialization", out[o])));
        }
        terms.push((retained_pair(&out, ti.perspective), a));
    }
    Ok(TrivializedState { vacuum: Momentum::ZERO, two_body: TwoBodyState::from_terms(ti.perspective, terms)? })
}

/// Inverse of [`trivialize_translations`] followed by [`project_origin`].
pub fn untrivialize_translations(two_body: &TwoBodyState) -> TIState {
    TIState { perspective: two_body.perspective, terms: two_body.terms.clone() }
}

/// Projection onto the gauge condition `q_o = 0`; on the trivialized state
/// this only discards the origin slot.
pub fn project_origin(trivialized: &TrivializedState) -> Result<TwoBodyState> {
    if !trivialized.vacuum.is_zero() {
        return Err(Error::InvalidInput("origin slot is not in the zero-momentum state".into()));
    }
    Ok(trivialized.two_body.clone())
}

/// `S^T = P_{o'o} exp(i q_{o'} . p_r)`: shift the new origin's momentum by
/// that of the remaining particle `r`, then move it into the old origin's
/// slot with reversed sign.
pub fn translational_switch(two_body: &TwoBodyState, to: Perspective) -> Result<TwoBodyState> {
    let from = two_body.perspective;
    if to == from {
        return Ok(two_body.clone());
    }
    let o = from.origin();
    let o_new = to.origin();
    let [j, k] = from.retained();
    let r = if j == o_new { k } else { j };
    let mut terms = Vec::with_capacity(two_body.len());
    for (&(p1, p2), &a) in two_body.terms() {
        let mut slot = [Momentum::ZERO; 3];
        slot[j] = p1;
        slot[k] = p2;
        let shifted = slot[o_new] + slot[r];
        slot[o] = -shifted;
        terms.push((retained_pair(&slot, to), a));
    }
    TwoBodyState::from_terms(to, terms)
}

/// The switch through the perspective-neutral state: undo the
/// trivialization of `from`, re-describe, trivialize in `to`.
pub fn switch_via_invariant_state(two_body: &TwoBodyState, to: Perspective) -> Result<TwoBodyState> {
    let ti = untrivialize_translations(two_body);
    project_origin(&trivialize_translations(&ti_reexpress(&ti, to))?)
}

#[derive(Serialize, Deserialize)]
struct KinematicalTerm {
    p_a: Momentum,
    p_b: Momentum,
    p_c: Momentum,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct KinematicalRecord {
    terms: Vec<KinematicalTerm>,
}

impl From<SparseMomentumState> for KinematicalRecord {
    fn from(s: SparseMomentumState) -> Self {
        let terms = s
            .terms
            .into_iter()
            .map(|([p_a, p_b, p_c], a)| KinematicalTerm { p_a, p_b, p_c, re: a.re, im: a.im })
            .collect();
        KinematicalRecord { terms }
    }
}

impl TryFrom<KinematicalRecord> for SparseMomentumState {
    type Error = Error;
    fn try_from(r: KinematicalRecord) -> Result<Self> {
        SparseMomentumState::from_terms(r.terms.into_iter().map(|t| ([t.p_a, t.p_b, t.p_c], Complex64::new(t.re, t.im))))
    }
}

#[derive(Serialize, Deserialize)]
struct PairTerm {
    p1: Momentum,
    p2: Momentum,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    perspective: Perspective,
    terms: Vec<PairTerm>,
}

macro_rules! pair_record_conv {
    ($t:ty) => {
        impl From<$t> for PairRecord {
            fn from(s: $t) -> Self {
                let terms = s.terms.into_iter().map(|((p1, p2), a)| PairTerm { p1, p2, re: a.re, im: a.im }).collect();
                PairRecord { perspective: s.perspective, terms }
            }
        }

        impl TryFrom<PairRecord> for $t {
            type Error = Error;
            fn try_from(r: PairRecord) -> Result<Self> {
                <$t>::from_terms(r.perspective, r.terms.into_iter().map(|t| ((t.p1, t.p2), Complex64::new(t.re, t.im))))
            }
        }
    };
}

pair_record_conv!(TIState);
pair_record_conv!(TwoBodyState);

/// Random state on the half-integer lattice `{-4, -3.5, ..., 4}^3`, with
/// labels chosen so that all sums stay exact.
pub fn random_two_body_state(seed: u64, terms: usize, perspective: Perspective) -> TwoBodyState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let lattice = |rng: &mut rand_chacha::ChaCha8Rng| {
        Momentum::normalized([0; 3].map(|_| rng.gen_range(-8i32..=8) as f64 * 0.5))
    };
    let mut map = BTreeMap::new();
    while map.len() < terms {
        let k = (lattice(&mut rng), lattice(&mut rng));
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        map.insert(k, a);
    }
    TwoBodyState { perspective, terms: map }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: f64, y: f64, z: f64) -> Momentum {
        Momentum::new(x, y, z).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn momentum_keys() {
        assert_eq!(m(-0.0, 0.0, -0.0), Momentum::ZERO);
        assert_eq!(-Momentum::ZERO, Momentum::ZERO);
        assert!(Momentum::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(m(1.0, 0.0, 0.0) > m(0.0, 5.0, 5.0));
    }

    #[test]
    fn duplicate_and_nonfinite_terms_rejected() {
        let t = [Momentum::ZERO; 3];
        assert!(SparseMomentumState::from_terms([(t, c(1.0)), (t, c(2.0))]).is_err());
        assert!(SparseMomentumState::from_terms([(t, Complex64::new(f64::INFINITY, 0.0))]).is_err());
    }

    #[test]
    fn group_average_on_support() {
        let (pb, pc) = (m(1.0, 2.0, 0.0), m(-0.5, 0.0, 3.0));
        let kin = SparseMomentumState::from_terms([([-(pb + pc), pb, pc], Complex64::new(0.3, -0.4))]).unwrap();
        let avg = group_average(&kin, Perspective::BcA);
        assert_eq!(avg.dropped, 0);
        assert_eq!(avg.state.amplitude(&(pb, pc)), Complex64::new(0.3, -0.4));
    }

    #[test]
    fn group_average_off_support() {
        let kin = SparseMomentumState::from_terms([([m(1.0, 0.0, 0.0), Momentum::ZERO, Momentum::ZERO], c(1.0))]).unwrap();
        let avg = group_average(&kin, Perspective::BcA);
        assert!(avg.state.is_empty());
        assert_eq!(avg.dropped, 1);
    }

    #[test]
    fn group_average_with_attached_function() {
        let f = |t: &Triple| c(t[0].components()[0] + 10.0);
        let off = SparseMomentumState::from_terms([([m(7.0, 0.0, 0.0), m(1.0, 0.0, 0.0), m(2.0, 0.0, 0.0)], c(1.0))]).unwrap();
        let ti = group_average_function(f, &off, Perspective::BcA).unwrap();
        assert_eq!(ti.amplitude(&(m(1.0, 0.0, 0.0), m(2.0, 0.0, 0.0))), c(7.0));
    }

    #[test]
    fn reexpression_is_involutive() {
        let two = random_two_body_state(3, 20, Perspective::BcA);
        let ti = untrivialize_translations(&two);
        for p in Perspective::ALL {
            let there = ti_reexpress(&ti, p);
            assert_eq!(there.norm(), ti.norm());
            assert_eq!(ti_reexpress(&there, Perspective::BcA), ti);
        }
    }

    #[test]
    fn trivialization_empties_origin_slot() {
        let (pb, pc) = (m(1.5, -2.0, 0.5), m(-3.0, 0.0, 1.0));
        let ti = TIState::from_terms(Perspective::BcA, [((pb, pc), Complex64::new(0.0, 1.0))]).unwrap();
        let out = trivialize_translations(&ti).unwrap();
        assert!(out.vacuum.is_zero());
        assert_eq!(out.two_body.amplitude(&(pb, pc)), Complex64::new(0.0, 1.0));
        assert_eq!(project_origin(&out).unwrap().norm(), ti.norm());
    }

    #[test]
    fn conjugated_momentum_acts_as_origin_momentum() {
        let two = random_two_body_state(11, 10, Perspective::BcA);
        for (t, _) in untrivialize_translations(&two).triples() {
            for p in Perspective::ALL {
                let mut k = t;
                k[p.origin()] = m(0.5, -1.0, 2.0);
                assert_eq!(conjugated_total_momentum(&k, p), k[p.origin()]);
            }
        }
    }

    #[test]
    fn kinematical_trivialization_is_unitary() {
        let two = random_two_body_state(5, 15, Perspective::AcB);
        let kin = SparseMomentumState::from_terms(
            two.terms().map(|(&(p1, p2), &a)| ([p1, p2 + p1, p2], a)),
        )
        .unwrap();
        let t = apply_trivialization(&kin, Perspective::AcB).unwrap();
        assert_eq!(t.norm(), kin.norm());
        assert_eq!(apply_untrivialization(&t, Perspective::AcB).unwrap(), kin);
    }

    #[test]
    fn pipeline_matches_direct_data() {
        let two = random_two_body_state(8, 12, Perspective::BcA);
        let kin = SparseMomentumState::from_terms(untrivialize_translations(&two).triples()).unwrap();
        let ti = group_average(&kin, Perspective::BcA).state;
        let out = project_origin(&trivialize_translations(&ti).unwrap()).unwrap();
        assert_eq!(out, two);
    }

    #[test]
    fn switch_single_term() {
        let (pb, pc) = (m(1.0, 0.0, 0.0), m(0.0, 2.0, 0.0));
        let two = TwoBodyState::from_terms(Perspective::BcA, [((pb, pc), c(1.0))]).unwrap();
        let out = translational_switch(&two, Perspective::AbC).unwrap();
        assert_eq!(out.perspective, Perspective::AbC);
        assert_eq!(out.amplitude(&(m(-1.0, -2.0, 0.0), pb)), c(1.0));
    }

    #[test]
    fn switch_matches_invariant_path_and_round_trips() {
        for seed in 0..20 {
            let from = Perspective::ALL[seed as usize % 3];
            let two = random_two_body_state(seed, 8, from);
            for to in Perspective::ALL {
                let direct = translational_switch(&two, to).unwrap();
                assert_eq!(direct, switch_via_invariant_state(&two, to).unwrap());
                assert_eq!(direct.norm(), two.norm());
                assert_eq!(translational_switch(&direct, from).unwrap(), two);
            }
        }
    }

    #[test]
    fn rotations_commute_with_trivialization() {
        // signed permutations act exactly on lattice labels
        let rot = Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0);
        let two = random_two_body_state(21, 10, Perspective::BcA);
        let ti = untrivialize_translations(&two);
        let before = trivialize_translations(&ti.rotate_labels(&rot).unwrap()).unwrap().two_body;
        let after = trivialize_translations(&ti).unwrap().two_body.rotate_labels(&rot).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn json_round_trip() {
        let two = random_two_body_state(2, 4, Perspective::AbC);
        let s = serde_json::to_string(&two).unwrap();
        assert!(s.contains("\"AB|C\""));
        assert_eq!(serde_json::from_str::<TwoBodyState>(&s).unwrap(), two);
        let kin = SparseMomentumState::from_terms(untrivialize_translations(&two).triples()).unwrap();
        let s = serde_json::to_string(&kin).unwrap();
        assert_eq!(serde_json::from_str::<SparseMomentumState>(&s).unwrap(), kin);
        let bad = r#"{"perspective":"BC|A","terms":[{"p1":[0,0,0],"p2":[0,0,0],"re":1,"im":0},{"p1":[0,0,0],"p2":[0,0,0],"re":1,"im":0}]}"#;
        assert!(serde_json::from_str::<TIState>(bad).is_err());
    }
}
