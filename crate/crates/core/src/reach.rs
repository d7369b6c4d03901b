//! Reachability: fireable-support fixpoints, exact-support reachability and
//! the full decision procedure with checkable positive witnesses.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lp::max_support_solution;
use crate::net::{Marking, PetriNet, TransitionSet};
use crate::rat::{dot, Rat};
use crate::structural::max_siphon_empty;

/// Largest `V ⊆ within` such that some sequence with support `V` is
/// enabled at `m`.
pub fn max_fireable_set(net: &PetriNet, within: &TransitionSet, m: &Marking) -> TransitionSet {
    let mut current = within.clone();
    loop {
        let q = max_siphon_empty(net, &current, m);
        let dead = net.consumers(&q, &current);
        if dead.is_empty() {
            return current;
        }
        current = &current - &dead;
    }
}

/// Orders `within` so that every transition's input places are marked by
/// `m` or by the outputs of earlier transitions. Transitions that never
/// become enabled are left out.
pub fn saturation_order(net: &PetriNet, within: &TransitionSet, m: &Marking) -> Vec<usize> {
    let mut marked: Vec<bool> = m.values().iter().map(|v| v.is_positive()).collect();
    let mut order = Vec::new();
    let mut pending: Vec<usize> = within.iter().copied().collect();
    loop {
        let (ready, rest): (Vec<usize>, Vec<usize>) = pending.iter().partition(|&&t| {
            (0..net.num_places()).all(|p| net.input_weight(p, t) == 0 || marked[p])
        });
        if ready.is_empty() {
            return order;
        }
        for &t in &ready {
            for (p, slot) in marked.iter_mut().enumerate() {
                if net.output_weight(p, t) > 0 {
                    *slot = true;
                }
            }
        }
        order.extend(ready);
        pending = rest;
    }
}

/// The three conditions for reaching `mtgt` from `msrc` by a sequence of
/// support exactly `support`.
pub fn u_reachable(net: &PetriNet, support: &TransitionSet, msrc: &Marking, mtgt: &Marking) -> bool {
    let b = msrc.difference_to(mtgt);
    let state_eq = max_support_solution(net, &b, support)
        .map(|s| &s.support == support)
        .unwrap_or(false);
    state_eq
        && &max_fireable_set(net, support, msrc) == support
        && &max_fireable_set(&net.transpose(), support, mtgt) == support
}

/// Evidence that `mtgt` is reachable from `msrc`: a state-equation solution
/// with exact support plus orders realizing the support forwards from the
/// source and backwards from the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveWitness {
    pub support: TransitionSet,
    pub x: Vec<Rat>,
    pub fwd_order: Vec<usize>,
    pub bwd_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("state equation violated at place {0}")]
    StateEquation(usize),
    #[error("solution support differs from the claimed support")]
    Support,
    #[error("forward order is not a permutation of the support")]
    ForwardSet,
    #[error("backward order is not a permutation of the support")]
    BackwardSet,
    #[error("forward order step {0} is not enabled")]
    ForwardStep(usize),
    #[error("backward order step {0} is not enabled")]
    BackwardStep(usize),
}

fn check_order(net: &PetriNet, order: &[usize], m: &Marking) -> Result<(), usize> {
    let mut marked: Vec<bool> = m.values().iter().map(|v| v.is_positive()).collect();
    for (i, &t) in order.iter().enumerate() {
        if (0..net.num_places()).any(|p| net.input_weight(p, t) > 0 && !marked[p]) {
            return Err(i);
        }
        for (p, slot) in marked.iter_mut().enumerate() {
            if net.output_weight(p, t) > 0 {
                *slot = true;
            }
        }
    }
    Ok(())
}

impl PositiveWitness {
    pub fn empty(num_transitions: usize) -> Self {
        PositiveWitness {
            support: TransitionSet::new(),
            x: vec![Rat::zero(); num_transitions],
            fwd_order: Vec::new(),
            bwd_order: Vec::new(),
        }
    }

    /// Re-validates the witness from scratch, without any LP.
    pub fn validate(&self, net: &PetriNet, msrc: &Marking, mtgt: &Marking) -> Result<(), WitnessError> {
        let b = msrc.difference_to(mtgt);
        if self.x.len() != net.num_transitions() || self.x.iter().any(|v| v.is_negative()) {
            return Err(WitnessError::Support);
        }
        for (p, bp) in b.iter().enumerate() {
            let row: Vec<Rat> = (0..net.num_transitions()).map(|t| net.effect(p, t)).collect();
            if &dot(&row, &self.x) != bp {
                return Err(WitnessError::StateEquation(p));
            }
        }
        let supp: TransitionSet = (0..self.x.len()).filter(|&t| self.x[t].is_positive()).collect();
        if supp != self.support {
            return Err(WitnessError::Support);
        }
        let as_set = |o: &[usize]| o.len() == self.support.len() && o.iter().copied().collect::<TransitionSet>() == self.support;
        if !as_set(&self.fwd_order) {
            return Err(WitnessError::ForwardSet);
        }
        if !as_set(&self.bwd_order) {
            return Err(WitnessError::BackwardSet);
        }
        check_order(net, &self.fwd_order, msrc).map_err(WitnessError::ForwardStep)?;
        check_order(&net.transpose(), &self.bwd_order, mtgt).map_err(WitnessError::BackwardStep)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachVerdict {
    Reachable(PositiveWitness),
    /// No support survives; carries the fixpoint reached by the refinement.
    Unreachable { fixpoint: TransitionSet },
}

impl ReachVerdict {
    pub fn is_reachable(&self) -> bool {
        matches!(self, ReachVerdict::Reachable(_))
    }
}

/// Decides whether `mtgt` is reachable from `msrc`.
pub fn reachable(net: &PetriNet, msrc: &Marking, mtgt: &Marking) -> ReachVerdict {
    if msrc == mtgt {
        return ReachVerdict::Reachable(PositiveWitness::empty(net.num_transitions()));
    }
    let b = msrc.difference_to(mtgt);
    let transposed = net.transpose();
    let mut current = net.all_transitions();
    loop {
        let solution = max_support_solution(net, &b, &current);
        let mut next = solution.as_ref().map(|s| s.support.clone()).unwrap_or_default();
        next = max_fireable_set(net, &next, msrc);
        next = max_fireable_set(&transposed, &next, mtgt);
        if next == current {
            // a fixpoint: all three conditions hold for `current`
            let solution = match solution {
                Some(s) if !current.is_empty() => s,
                _ => return ReachVerdict::Unreachable { fixpoint: current },
            };
            let witness = PositiveWitness {
                fwd_order: saturation_order(net, &current, msrc),
                bwd_order: saturation_order(&transposed, &current, mtgt),
                support: solution.support,
                x: solution.x,
            };
            debug_assert!(witness.validate(net, msrc, mtgt).is_ok());
            return ReachVerdict::Reachable(witness);
        }
        debug_assert!(next.is_subset(&current));
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n1, n1_msrc, n1_mtgt3, n1_mtgt4};

    fn s(items: &[usize]) -> TransitionSet {
        items.iter().copied().collect()
    }

    #[test]
    fn fireable_set_examples() {
        let net = n1();
        let all = net.all_transitions();
        assert_eq!(max_fireable_set(&net, &all, &n1_msrc()), all);
        assert_eq!(max_fireable_set(&net, &all, &Marking::zeros(4)), s(&[]));
        assert_eq!(max_fireable_set(&net, &all, &n1_mtgt3()), s(&[3]));
    }

    #[test]
    fn u_reachable_examples() {
        let net = n1();
        assert!(!u_reachable(&net, &s(&[0, 2]), &n1_msrc(), &n1_mtgt3()));
        assert!(u_reachable(&net, &net.all_transitions(), &n1_msrc(), &n1_mtgt4()));
        assert!(u_reachable(&net, &s(&[]), &n1_msrc(), &n1_msrc()));
    }

    #[test]
    fn decision_examples() {
        let net = n1();
        match reachable(&net, &n1_msrc(), &n1_mtgt4()) {
            ReachVerdict::Reachable(w) => {
                assert_eq!(w.support, net.all_transitions());
                w.validate(&net, &n1_msrc(), &n1_mtgt4()).unwrap();
            }
            other => panic!("expected reachable, got {other:?}"),
        }
        assert!(!reachable(&net, &n1_msrc(), &n1_mtgt3()).is_reachable());
        assert_eq!(
            reachable(&net, &n1_msrc(), &n1_msrc()),
            ReachVerdict::Reachable(PositiveWitness::empty(4))
        );
    }

    #[test]
    fn saturation_matches_fixpoint_on_n1() {
        let net = n1();
        let all = net.all_transitions();
        for m in [n1_msrc(), n1_mtgt3(), n1_mtgt4(), Marking::zeros(4)] {
            let order: TransitionSet = saturation_order(&net, &all, &m).into_iter().collect();
            assert_eq!(order, max_fireable_set(&net, &all, &m));
        }
    }

    #[test]
    fn tampered_witness_rejected() {
        let net = n1();
        let ReachVerdict::Reachable(mut w) = reachable(&net, &n1_msrc(), &n1_mtgt4()) else {
            panic!("reachable pair")
        };
        w.fwd_order.reverse();
        assert!(w.validate(&net, &n1_msrc(), &n1_mtgt4()).is_err());
    }
}
