//! The four-place running example net and the objects built on it. Used by
//! tests, the acceptance suite and the harness' pinned cases.

use crate::formula::{Atom, AtomRel, Clause, DnfFormula};
use crate::net::{FiringSequence, FiringStep, Marking, PetriNet};
use crate::rat::{frac, int, Rat};

/// Places `p1..p4`, transitions `t1..t4`.
pub fn n1() -> PetriNet {
    let names = |prefix: &str| (1..=4).map(|i| format!("{prefix}{i}")).collect();
    PetriNet::new(
        names("p"),
        names("t"),
        vec![
            vec![1, 2, 2, 0],
            vec![0, 0, 1, 0],
            vec![0, 0, 0, 1],
            vec![0, 1, 0, 0],
        ],
        vec![
            vec![0, 0, 1, 0],
            vec![1, 0, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 1, 0, 1],
        ],
    )
    .expect("well-formed fixture")
}

pub fn n1_msrc() -> Marking {
    Marking::from_ints(&[2, 0, 0, 0]).expect("nonnegative")
}

pub fn n1_mtgt4() -> Marking {
    Marking::from_ints(&[0, 0, 0, 1]).expect("nonnegative")
}

pub fn n1_mtgt3() -> Marking {
    Marking::from_ints(&[0, 0, 1, 0]).expect("nonnegative")
}

/// `½t1 ½t3 ½t4 ½t2 ½t4`, leading from the source to `(0,0,0,1)`.
pub fn n1_sigma() -> FiringSequence {
    let half = frac(1, 2);
    FiringSequence::new(
        [0, 2, 3, 1, 3]
            .into_iter()
            .map(|t| FiringStep {
                alpha: half.clone(),
                transition: t,
            })
            .collect(),
    )
    .expect("positive amounts")
}

fn unit(p: usize, scale: i64) -> Vec<Rat> {
    let mut v = vec![int(0); 4];
    v[p] = int(scale);
    v
}

fn sum(places: &[usize], scale: i64) -> Vec<Rat> {
    let mut v = vec![int(0); 4];
    for &p in places {
        v[p] = int(scale);
    }
    v
}

/// The hand-written four-clause bi-separator for `(2,0,0,0)` and
/// `(0,0,1,0)`:
///
/// ```text
/// m4 < m4'
/// ∨ (m4 <= m4' ∧ m4 + m4' > 0)
/// ∨ (m4 <= m4' ∧ m1' + m2' > 0)
/// ∨ (m4 <= m4' ∧ m1 + m2 <= 0 ∧ m3' <= m3)
/// ```
pub fn n1_reference_formula() -> DnfFormula {
    let inv = Atom::new(unit(3, 1), unit(3, -1), AtomRel::Le);
    DnfFormula::new(vec![
        Clause::new(vec![Atom::new(unit(3, 1), unit(3, -1), AtomRel::Lt)]),
        Clause::new(vec![
            inv.clone(),
            Atom::new(unit(3, -1), unit(3, -1), AtomRel::Lt),
        ]),
        Clause::new(vec![
            inv.clone(),
            Atom::new(vec![int(0); 4], sum(&[0, 1], -1), AtomRel::Lt),
        ]),
        Clause::new(vec![
            inv,
            Atom::new(sum(&[0, 1], 1), vec![int(0); 4], AtomRel::Le),
            Atom::new(unit(2, -1), unit(2, 1), AtomRel::Le),
        ]),
    ])
    .expect("nonempty")
}

/// Forward arrows `(from, transition, to)` of the formula above, clause and
/// transition indices zero-based.
pub fn n1_reference_arrows() -> Vec<(usize, usize, usize)> {
    let mut arrows = Vec::new();
    for t in 0..4 {
        arrows.push((0, t, 0));
    }
    for from in 1..4 {
        arrows.push((from, 3, 0));
    }
    for t in [0, 1, 2] {
        arrows.push((1, t, 1));
    }
    for c in [2, 3] {
        arrows.push((c, 0, c));
        arrows.push((c, 2, c));
        arrows.push((c, 1, 1));
    }
    arrows
}
