//! Construction of locally closed bi-separators for unreachable pairs.

use num_traits::Zero;
use thiserror::Error;

use crate::check::{find_annotations, Certificate};
use crate::formula::{eval_pair, Atom, AtomRel, Clause, DnfFormula};
use crate::lp::{max_support_solution, solve_exclusion, ExclusionWitness};
use crate::net::{Marking, PetriNet, PlaceSet, TransitionSet};
use crate::rat::Rat;
use crate::structural::{max_siphon_empty, max_trap_empty};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("the target is reachable from the source within the given transitions")]
    ReachableInput,
    #[error("transition #{0} is not a transition of the net")]
    UnknownTransition(usize),
    #[error("marking has {found} entries, net has {expected} places")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal inconsistency: {0}")]
    Internal(&'static str),
}

fn indicator(n: usize, set: &PlaceSet, value: i64) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    for &p in set {
        v[p] = Rat::from_integer(value.into());
    }
    v
}

fn neg(v: &[Rat]) -> Vec<Rat> {
    v.iter().map(|x| -x).collect()
}

/// `y·m rel y·m'`.
fn monotone_atom(y: &[Rat], rel: AtomRel) -> Atom {
    Atom::new(y.to_vec(), neg(y), rel)
}

struct Builder<'a> {
    net: &'a PetriNet,
    msrc: &'a Marking,
    mtgt: &'a Marking,
    b: Vec<Rat>,
}

impl Builder<'_> {
    fn base_case(&self) -> Result<Vec<Clause>, CertifyError> {
        let n = self.net.num_places();
        let (s, g) = (self.msrc.values(), self.mtgt.values());
        // prefer a place the target has more of: it yields the separator
        // `m(p) <= m'(p)` failing at the pair (source, target) from below
        let p = (0..n)
            .find(|&p| g[p] > s[p])
            .or_else(|| (0..n).find(|&p| s[p] != g[p]))
            .ok_or(CertifyError::ReachableInput)?;
        let sign = if s[p] > g[p] { 1 } else { -1 };
        let a = indicator(n, &PlaceSet::from([p]), sign);
        Ok(vec![Clause::new(vec![monotone_atom(&a, AtomRel::Le)])])
    }

    fn build(&self, within: &TransitionSet) -> Result<Vec<Clause>, CertifyError> {
        if within.is_empty() {
            return self.base_case();
        }
        let Some(solution) = max_support_solution(self.net, &self.b, within) else {
            let w = solve_exclusion(self.net, &self.b, &TransitionSet::new(), within)
                .ok_or(CertifyError::Internal("no exclusion function for an unsolvable state equation"))?;
            return Ok(vec![Clause::new(vec![monotone_atom(&w.y, AtomRel::Le)])]);
        };
        let supported = solution.support;
        let mut functions: Vec<ExclusionWitness> = Vec::new();
        for &t in within.difference(&supported) {
            let w = solve_exclusion(self.net, &self.b, &TransitionSet::from([t]), within)
                .ok_or(CertifyError::Internal("no exclusion function outside the maximal support"))?;
            if w.value(self.msrc.values()) > w.value(self.mtgt.values()) {
                return Ok(vec![Clause::new(vec![monotone_atom(&w.y, AtomRel::Le)])]);
            }
            functions.push(w);
        }
        let q = max_siphon_empty(self.net, &supported, self.msrc);
        let r = max_trap_empty(self.net, &supported, self.mtgt);
        let removed = &self.net.consumers(&q, &supported) | &self.net.producers(&r, &supported);
        if removed.is_empty() {
            return Err(CertifyError::ReachableInput);
        }
        let inner = self.build(&(&supported - &removed))?;

        let n = self.net.num_places();
        let invariant: Vec<Atom> = functions
            .iter()
            .map(|w| monotone_atom(&w.y, AtomRel::Le))
            .collect();
        let mut clauses: Vec<Clause> = functions
            .iter()
            .map(|w| Clause::new(vec![monotone_atom(&w.y, AtomRel::Lt)]))
            .collect();
        // m(Q) + m'(R) > 0
        let mut marked = invariant.clone();
        marked.push(Atom::new(indicator(n, &q, -1), indicator(n, &r, -1), AtomRel::Lt));
        clauses.push(Clause::new(marked));
        // m(R) + m'(Q) <= 0 ∧ ψ_i
        for psi in inner {
            let mut atoms = invariant.clone();
            atoms.push(Atom::new(indicator(n, &r, 1), indicator(n, &q, 1), AtomRel::Le));
            atoms.extend(psi.atoms);
            clauses.push(Clause::new(atoms));
        }
        Ok(clauses)
    }
}

/// Builds a locally closed bi-separator for `(msrc, mtgt)` w.r.t. the net
/// restricted to `within`, annotated with the implications the checker
/// finds. Fails with [`CertifyError::ReachableInput`] when the pair is
/// reachable with a sequence supported in `within`.
pub fn construct_biseparator(
    net: &PetriNet,
    within: &TransitionSet,
    msrc: &Marking,
    mtgt: &Marking,
) -> Result<Certificate, CertifyError> {
    if let Some(&t) = within.iter().find(|&&t| t >= net.num_transitions()) {
        return Err(CertifyError::UnknownTransition(t));
    }
    for m in [msrc, mtgt] {
        if m.len() != net.num_places() {
            return Err(CertifyError::DimensionMismatch {
                expected: net.num_places(),
                found: m.len(),
            });
        }
    }
    let builder = Builder {
        net,
        msrc,
        mtgt,
        b: msrc.difference_to(mtgt),
    };
    let formula = DnfFormula::new(builder.build(within)?)
        .map_err(|_| CertifyError::Internal("empty formula"))?;
    let holds = |a: &Marking, b: &Marking| eval_pair(&formula, a, b).unwrap_or(false);
    if !holds(msrc, msrc) || !holds(mtgt, mtgt) || holds(msrc, mtgt) {
        return Err(CertifyError::Internal("endpoint conditions violated"));
    }
    let annotations = find_annotations(net, &formula, within)
        .ok_or(CertifyError::Internal("constructed formula is not locally closed"))?;
    Ok(Certificate {
        formula,
        transitions: within.clone(),
        source: msrc.clone(),
        target: mtgt.clone(),
        annotations,
    })
}

/// `2|U| + 1`, the bound on clauses and on atoms per clause.
pub fn size_bound(within: &TransitionSet) -> usize {
    2 * within.len() + 1
}
