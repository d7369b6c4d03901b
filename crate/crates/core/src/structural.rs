//! Largest empty siphons and traps of restricted nets.

use num_traits::Zero;

use crate::net::{Marking, PetriNet, PlaceSet, TransitionSet};

/// `pre(X) ⊆ post(X)` within `N_U`: every transition of `within` producing
/// into `set` also consumes from it.
pub fn is_siphon(net: &PetriNet, within: &TransitionSet, set: &PlaceSet) -> bool {
    net.producers(set, within)
        .is_subset(&net.consumers(set, within))
}

/// `post(X) ⊆ pre(X)` within `N_U`.
pub fn is_trap(net: &PetriNet, within: &TransitionSet, set: &PlaceSet) -> bool {
    net.consumers(set, within)
        .is_subset(&net.producers(set, within))
}

fn empty_places(m: &Marking) -> PlaceSet {
    (0..m.len()).filter(|&p| m[p].is_zero()).collect()
}

/// Greatest fixpoint: drop `p` while some transition of `within` feeds `p`
/// (per `feeds`) without touching the candidate set (per `touches`).
fn shrink(
    within: &TransitionSet,
    mut set: PlaceSet,
    feeds: impl Fn(usize, usize) -> bool,
    touches: impl Fn(usize, usize) -> bool,
) -> PlaceSet {
    loop {
        let doomed = set.iter().copied().find(|&p| {
            within
                .iter()
                .any(|&t| feeds(p, t) && !set.iter().any(|&q| touches(q, t)))
        });
        match doomed {
            Some(p) => {
                set.remove(&p);
            }
            None => return set,
        }
    }
}

/// The largest siphon `Q` of `N_U` with `m(Q) = 0`.
pub fn max_siphon_empty(net: &PetriNet, within: &TransitionSet, m: &Marking) -> PlaceSet {
    shrink(
        within,
        empty_places(m),
        |p, t| net.output_weight(p, t) > 0,
        |q, t| net.input_weight(q, t) > 0,
    )
}

/// The largest trap `R` of `N_U` with `m(R) = 0`.
pub fn max_trap_empty(net: &PetriNet, within: &TransitionSet, m: &Marking) -> PlaceSet {
    shrink(
        within,
        empty_places(m),
        |p, t| net.input_weight(p, t) > 0,
        |q, t| net.output_weight(q, t) > 0,
    )
}
