//! Petri net data model: arc matrices, markings, firing and replay,
//! transposition and restriction to a transition subset.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rat::{format_rat, Rat};

/// Transitions identified by their index in file order.
pub type TransitionSet = BTreeSet<usize>;

/// Places identified by their index in file order.
pub type PlaceSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("negative marking value at place {place}")]
    NegativeMarking { place: usize },
    #[error("firing amount must be strictly positive")]
    NonPositiveAlpha,
    #[error("transition {transition} not enabled: place {place} is short{}", step.map(|s| format!(" (step {s})")).unwrap_or_default())]
    NotEnabled {
        step: Option<usize>,
        transition: usize,
        place: usize,
    },
}

/// A Petri net `(P, T, F-, F+)` with natural arc weights. Matrices are
/// indexed `[place][transition]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    f_minus: Vec<Vec<u64>>,
    f_plus: Vec<Vec<u64>>,
}

fn check_unique(ids: &[String]) -> Result<(), NetError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(NetError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn check_shape(matrix: &[Vec<u64>], rows: usize, cols: usize) -> Result<(), NetError> {
    if matrix.len() != rows {
        return Err(NetError::DimensionMismatch {
            expected: rows,
            found: matrix.len(),
        });
    }
    for row in matrix {
        if row.len() != cols {
            return Err(NetError::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
    }
    Ok(())
}

impl PetriNet {
    pub fn new(
        places: Vec<String>,
        transitions: Vec<String>,
        f_minus: Vec<Vec<u64>>,
        f_plus: Vec<Vec<u64>>,
    ) -> Result<Self, NetError> {
        check_unique(&places)?;
        check_unique(&transitions)?;
        // places and transitions share one namespace in the file format
        let mut all = places.clone();
        all.extend(transitions.iter().cloned());
        check_unique(&all)?;
        check_shape(&f_minus, places.len(), transitions.len())?;
        check_shape(&f_plus, places.len(), transitions.len())?;
        Ok(PetriNet {
            places,
            transitions,
            f_minus,
            f_plus,
        })
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn all_transitions(&self) -> TransitionSet {
        (0..self.num_transitions()).collect()
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t == name)
    }

    /// `F-(p, t)`: tokens consumed from `p` by one unit of `t`.
    pub fn input_weight(&self, p: usize, t: usize) -> u64 {
        self.f_minus[p][t]
    }

    /// `F+(p, t)`: tokens produced into `p` by one unit of `t`.
    pub fn output_weight(&self, p: usize, t: usize) -> u64 {
        self.f_plus[p][t]
    }

    pub fn f_minus(&self) -> &[Vec<u64>] {
        &self.f_minus
    }

    pub fn f_plus(&self) -> &[Vec<u64>] {
        &self.f_plus
    }

    /// Entry of `F = F+ - F-`.
    pub fn effect(&self, p: usize, t: usize) -> Rat {
        Rat::from_integer(BigInt::from(self.f_plus[p][t]) - BigInt::from(self.f_minus[p][t]))
    }

    pub fn pre(&self, t: usize) -> Vec<Rat> {
        (0..self.num_places())
            .map(|p| Rat::from_integer(self.f_minus[p][t].into()))
            .collect()
    }

    pub fn post(&self, t: usize) -> Vec<Rat> {
        (0..self.num_places())
            .map(|p| Rat::from_integer(self.f_plus[p][t].into()))
            .collect()
    }

    /// `Δ(t) = F · e_t`.
    pub fn effect_vector(&self, t: usize) -> Vec<Rat> {
        (0..self.num_places()).map(|p| self.effect(p, t)).collect()
    }

    /// Transitions of `within` that produce into some place of `places`.
    pub fn producers(&self, places: &PlaceSet, within: &TransitionSet) -> TransitionSet {
        within
            .iter()
            .copied()
            .filter(|&t| places.iter().any(|&p| self.f_plus[p][t] > 0))
            .collect()
    }

    /// Transitions of `within` that consume from some place of `places`.
    pub fn consumers(&self, places: &PlaceSet, within: &TransitionSet) -> TransitionSet {
        within
            .iter()
            .copied()
            .filter(|&t| places.iter().any(|&p| self.f_minus[p][t] > 0))
            .collect()
    }

    fn check_transition(&self, t: usize) -> Result<(), NetError> {
        if t < self.num_transitions() {
            Ok(())
        } else {
            Err(NetError::UnknownTransition(format!("#{t}")))
        }
    }

    fn check_marking(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() == self.num_places() {
            Ok(())
        } else {
            Err(NetError::DimensionMismatch {
                expected: self.num_places(),
                found: m.len(),
            })
        }
    }

    /// Fires `alpha · t` from `m`.
    pub fn fire(&self, m: &Marking, alpha: &Rat, t: usize) -> Result<Marking, NetError> {
        self.check_transition(t)?;
        self.check_marking(m)?;
        if !alpha.is_positive() {
            return Err(NetError::NonPositiveAlpha);
        }
        let mut next = Vec::with_capacity(m.len());
        for (p, value) in m.values().iter().enumerate() {
            let consumed = alpha * Rat::from_integer(self.f_minus[p][t].into());
            if *value < consumed {
                return Err(NetError::NotEnabled {
                    step: None,
                    transition: t,
                    place: p,
                });
            }
            let produced = alpha * Rat::from_integer(self.f_plus[p][t].into());
            next.push(value - consumed + produced);
        }
        debug_assert!(next.iter().all(|v| !v.is_negative()));
        Ok(Marking(next))
    }

    /// Fires every step of `seq` in order, returning the final marking.
    pub fn replay(&self, m: &Marking, seq: &FiringSequence) -> Result<Marking, NetError> {
        let mut current = m.clone();
        for (i, step) in seq.steps().iter().enumerate() {
            current = self
                .fire(&current, &step.alpha, step.transition)
                .map_err(|e| match e {
                    NetError::NotEnabled {
                        transition, place, ..
                    } => NetError::NotEnabled {
                        step: Some(i),
                        transition,
                        place,
                    },
                    other => other,
                })?;
        }
        Ok(current)
    }

    /// The net with `F-` and `F+` swapped.
    pub fn transpose(&self) -> PetriNet {
        PetriNet {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            f_minus: self.f_plus.clone(),
            f_plus: self.f_minus.clone(),
        }
    }

    /// The net `N_U` keeping only the transitions of `keep`, in their
    /// original relative order.
    pub fn restrict(&self, keep: &TransitionSet) -> Result<PetriNet, NetError> {
        if let Some(&t) = keep.iter().find(|&&t| t >= self.num_transitions()) {
            return Err(NetError::UnknownTransition(format!("#{t}")));
        }
        let cols: Vec<usize> = keep.iter().copied().collect();
        let select = |m: &Vec<Vec<u64>>| -> Vec<Vec<u64>> {
            m.iter()
                .map(|row| cols.iter().map(|&t| row[t]).collect())
                .collect()
        };
        Ok(PetriNet {
            places: self.places.clone(),
            transitions: cols.iter().map(|&t| self.transitions[t].clone()).collect(),
            f_minus: select(&self.f_minus),
            f_plus: select(&self.f_plus),
        })
    }

    pub fn format_transitions(&self, set: &TransitionSet) -> String {
        let names: Vec<&str> = set.iter().map(|&t| self.transitions[t].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub fn format_places(&self, set: &PlaceSet) -> String {
        let names: Vec<&str> = set.iter().map(|&p| self.places[p].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Nonnegative rational vector over the places of a net.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking(Vec<Rat>);

impl Marking {
    pub fn new(values: Vec<Rat>) -> Result<Self, NetError> {
        if let Some(place) = values.iter().position(|v| v.is_negative()) {
            return Err(NetError::NegativeMarking { place });
        }
        Ok(Marking(values))
    }

    pub fn zeros(n: usize) -> Self {
        Marking(vec![Rat::zero(); n])
    }

    /// Convenience for tests and fixtures.
    pub fn from_ints(values: &[i64]) -> Result<Self, NetError> {
        Marking::new(values.iter().map(|&v| Rat::from_integer(v.into())).collect())
    }

    pub fn values(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Rat> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Places carrying a positive amount.
    pub fn support(&self) -> PlaceSet {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(p, _)| p)
            .collect()
    }

    /// `m(X)`, the total over a place set.
    pub fn total(&self, places: &PlaceSet) -> Rat {
        places.iter().map(|&p| &self.0[p]).sum()
    }

    /// `other - self`.
    pub fn difference_to(&self, other: &Marking) -> Vec<Rat> {
        self.0.iter().zip(&other.0).map(|(a, b)| b - a).collect()
    }

    pub fn scale(&self, factor: &Rat) -> Marking {
        assert!(!factor.is_negative());
        Marking(self.0.iter().map(|v| v * factor).collect())
    }
}

impl Index<usize> for Marking {
    type Output = Rat;

    fn index(&self, p: usize) -> &Rat {
        &self.0[p]
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rat).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringStep {
    pub alpha: Rat,
    pub transition: usize,
}

/// A sequence `α1 t1 ... αn tn` with every `αi > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiringSequence(Vec<FiringStep>);

impl FiringSequence {
    pub fn new(steps: Vec<FiringStep>) -> Result<Self, NetError> {
        if steps.iter().any(|s| !s.alpha.is_positive()) {
            return Err(NetError::NonPositiveAlpha);
        }
        Ok(FiringSequence(steps))
    }

    pub fn empty() -> Self {
        FiringSequence(Vec::new())
    }

    pub fn steps(&self) -> &[FiringStep] {
        &self.0
    }

    pub fn support(&self) -> TransitionSet {
        self.0.iter().map(|s| s.transition).collect()
    }

    pub fn reversed(&self) -> FiringSequence {
        FiringSequence(self.0.iter().rev().cloned().collect())
    }
}

/// Incremental construction of nets with sparse arcs; used for the
/// set-to-set gadgets and by the net file parser.
#[derive(Debug, Clone, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    inputs: Vec<Vec<(usize, u64)>>,
    outputs: Vec<Vec<(usize, u64)>>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> usize {
        self.places.push(name.into());
        self.places.len() - 1
    }

    pub fn add_transition(&mut self, name: impl Into<String>) -> usize {
        self.transitions.push(name.into());
        self.inputs.push(Vec::new());
        self.outputs.push(Vec::new());
        self.transitions.len() - 1
    }

    /// Adds `weight` to `F-(place, t)`.
    pub fn add_input(&mut self, t: usize, place: usize, weight: u64) {
        if weight > 0 {
            self.inputs[t].push((place, weight));
        }
    }

    /// Adds `weight` to `F+(place, t)`.
    pub fn add_output(&mut self, t: usize, place: usize, weight: u64) {
        if weight > 0 {
            self.outputs[t].push((place, weight));
        }
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn transition_names(&self) -> &[String] {
        &self.transitions
    }

    pub fn build(self) -> Result<PetriNet, NetError> {
        let (np, nt) = (self.places.len(), self.transitions.len());
        let mut f_minus = vec![vec![0u64; nt]; np];
        let mut f_plus = vec![vec![0u64; nt]; np];
        for (t, arcs) in self.inputs.iter().enumerate() {
            for &(p, w) in arcs {
                let slot = f_minus
                    .get_mut(p)
                    .ok_or_else(|| NetError::UnknownPlace(format!("#{p}")))?;
                slot[t] += w;
            }
        }
        for (t, arcs) in self.outputs.iter().enumerate() {
            for &(p, w) in arcs {
                let slot = f_plus
                    .get_mut(p)
                    .ok_or_else(|| NetError::UnknownPlace(format!("#{p}")))?;
                slot[t] += w;
            }
        }
        PetriNet::new(self.places, self.transitions, f_minus, f_plus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n1, n1_msrc, n1_mtgt4, n1_sigma};
    use crate::rat::{frac, int};

    #[test]
    fn fire_half_t1_from_source() {
        let net = n1();
        let m = net.fire(&n1_msrc(), &frac(1, 2), 0).unwrap();
        assert_eq!(
            m,
            Marking::new(vec![frac(3, 2), frac(1, 2), int(0), int(0)]).unwrap()
        );
    }

    #[test]
    fn fire_from_zero_marking_reports_place() {
        let net = n1();
        let err = net.fire(&Marking::zeros(4), &int(1), 0).unwrap_err();
        assert_eq!(
            err,
            NetError::NotEnabled {
                step: None,
                transition: 0,
                place: 0
            }
        );
    }

    #[test]
    fn fire_t2_hand_computed() {
        let net = n1();
        let m = Marking::new(vec![int(1), int(0), int(0), frac(1, 2)]).unwrap();
        let next = net.fire(&m, &frac(1, 2), 1).unwrap();
        assert_eq!(
            next,
            Marking::new(vec![int(0), int(0), frac(1, 2), frac(1, 2)]).unwrap()
        );
    }

    #[test]
    fn fire_rejects_nonpositive_alpha() {
        let net = n1();
        assert_eq!(
            net.fire(&n1_msrc(), &int(0), 0),
            Err(NetError::NonPositiveAlpha)
        );
    }

    #[test]
    fn replay_reaches_target() {
        let net = n1();
        assert_eq!(net.replay(&n1_msrc(), &n1_sigma()).unwrap(), n1_mtgt4());
        assert_eq!(
            net.replay(&n1_msrc(), &FiringSequence::empty()).unwrap(),
            n1_msrc()
        );
    }

    #[test]
    fn replay_reports_failing_step() {
        let net = n1();
        let seq = FiringSequence::new(vec![FiringStep {
            alpha: int(1),
            transition: 1,
        }])
        .unwrap();
        assert_eq!(
            net.replay(&n1_msrc(), &seq),
            Err(NetError::NotEnabled {
                step: Some(0),
                transition: 1,
                place: 3
            })
        );
    }

    #[test]
    fn transpose_swaps_and_reverses_runs() {
        let net = n1();
        let tr = net.transpose();
        assert_eq!(tr.f_minus(), net.f_plus());
        assert_eq!(tr.transpose(), net);
        let back = tr.replay(&n1_mtgt4(), &n1_sigma().reversed()).unwrap();
        assert_eq!(back, n1_msrc());
    }

    #[test]
    fn restrict_keeps_selected_columns() {
        let net = n1();
        assert_eq!(net.restrict(&net.all_transitions()).unwrap(), net);
        let sub = net.restrict(&[0, 2].into_iter().collect()).unwrap();
        assert_eq!(sub.num_transitions(), 2);
        for p in 0..4 {
            assert_eq!(sub.effect(p, 0), net.effect(p, 0));
            assert_eq!(sub.effect(p, 1), net.effect(p, 2));
        }
        let empty = net.restrict(&TransitionSet::new()).unwrap();
        assert_eq!(empty.num_transitions(), 0);
        assert!(matches!(
            net.restrict(&[7].into_iter().collect()),
            Err(NetError::UnknownTransition(_))
        ));
    }

    #[test]
    fn restrict_composes_as_intersection() {
        let net = n1();
        let u: TransitionSet = [0, 1, 2].into_iter().collect();
        let v: TransitionSet = [1, 2, 3].into_iter().collect();
        let once = net.restrict(&u).unwrap();
        // indices of v inside `once`
        let v_in_once: TransitionSet = once
            .transitions()
            .iter()
            .enumerate()
            .filter(|(_, name)| v.iter().any(|&t| net.transitions()[t] == **name))
            .map(|(i, _)| i)
            .collect();
        let twice = once.restrict(&v_in_once).unwrap();
        let direct = net.restrict(&u.intersection(&v).copied().collect()).unwrap();
        assert_eq!(twice, direct);
    }

    #[test]
    fn constructor_validates() {
        let p = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            PetriNet::new(p, vec![], vec![vec![], vec![]], vec![vec![], vec![]]),
            Err(NetError::DuplicateId(_))
        ));
        assert!(matches!(
            PetriNet::new(vec!["a".into()], vec!["t".into()], vec![vec![]], vec![vec![0]]),
            Err(NetError::DimensionMismatch { .. })
        ));
        assert!(Marking::new(vec![int(-1)]).is_err());
    }
}
