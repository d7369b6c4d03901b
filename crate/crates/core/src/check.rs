//! Certificate checking. Every invariance test reduces to a linear
//! program in a single variable, decided by intersecting intervals; the
//! general simplex is only used by [`counterexample`], which is a
//! diagnostic and never consulted by [`check_certificate`].

use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::formula::{eval_pair, Atom, AtomRel, Clause, Direction, DnfFormula};
use crate::lp::{feasible, Feasibility, LinSystem};
use crate::net::{Marking, PetriNet, TransitionSet};
use crate::rat::{dot, Rat};

/// `coeff · λ rel bound` over `λ >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryConstraint {
    pub coeff: Rat,
    pub rel: AtomRel,
    pub bound: Rat,
}

impl UnaryConstraint {
    pub fn new(coeff: Rat, rel: AtomRel, bound: Rat) -> Self {
        UnaryConstraint { coeff, rel, bound }
    }

    pub fn holds(&self, lambda: &Rat) -> bool {
        let lhs = &self.coeff * lambda;
        match self.rel {
            AtomRel::Le => lhs <= self.bound,
            AtomRel::Lt => lhs < self.bound,
        }
    }
}

/// A subinterval of `[0, ∞)`; `hi = None` stands for `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interval {
    Empty,
    Range {
        lo: Rat,
        lo_closed: bool,
        hi: Option<Rat>,
        hi_closed: bool,
    },
}

impl Interval {
    fn all() -> Interval {
        Interval::Range {
            lo: Rat::zero(),
            lo_closed: true,
            hi: None,
            hi_closed: false,
        }
    }

    /// The solution set of one constraint.
    pub fn of(c: &UnaryConstraint) -> Interval {
        let closed = c.rel == AtomRel::Le;
        if c.coeff.is_zero() {
            let ok = match c.rel {
                AtomRel::Le => !c.bound.is_negative(),
                AtomRel::Lt => c.bound.is_positive(),
            };
            return if ok { Interval::all() } else { Interval::Empty };
        }
        let r = &c.bound / &c.coeff;
        if c.coeff.is_positive() {
            if r.is_negative() || (r.is_zero() && !closed) {
                Interval::Empty
            } else {
                Interval::Range {
                    lo: Rat::zero(),
                    lo_closed: true,
                    hi: Some(r),
                    hi_closed: closed,
                }
            }
        } else if !c.bound.is_positive() {
            Interval::Range {
                lo: r,
                lo_closed: closed,
                hi: None,
                hi_closed: false,
            }
        } else {
            Interval::all()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnaryFeasibility {
    Feasible(Rat),
    Infeasible,
}

impl UnaryFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, UnaryFeasibility::Feasible(_))
    }
}

/// Decides `∃ λ >= 0` satisfying every constraint, returning a witness.
pub fn one_var_feasible(constraints: &[UnaryConstraint]) -> UnaryFeasibility {
    let mut lo = Rat::zero();
    let mut lo_closed = true;
    let mut hi: Option<Rat> = None;
    let mut hi_closed = false;
    for c in constraints {
        let Interval::Range {
            lo: l,
            lo_closed: lc,
            hi: h,
            hi_closed: hc,
        } = Interval::of(c)
        else {
            return UnaryFeasibility::Infeasible;
        };
        if l > lo {
            lo = l;
            lo_closed = lc;
        } else if l == lo {
            lo_closed &= lc;
        }
        match (&hi, h) {
            (_, None) => {}
            (None, Some(h)) => {
                hi = Some(h);
                hi_closed = hc;
            }
            (Some(cur), Some(h)) => {
                if h < *cur {
                    hi = Some(h);
                    hi_closed = hc;
                } else if h == *cur {
                    hi_closed &= hc;
                }
            }
        }
    }
    let witness = match &hi {
        None => {
            if lo_closed {
                lo
            } else {
                lo + Rat::one()
            }
        }
        Some(h) if lo < *h => {
            if lo_closed {
                lo
            } else {
                (&lo + h) / Rat::from_integer(2.into())
            }
        }
        Some(h) if lo == *h && lo_closed && hi_closed => lo,
        Some(_) => return UnaryFeasibility::Infeasible,
    };
    debug_assert!(constraints.iter().all(|c| c.holds(&witness)));
    UnaryFeasibility::Feasible(witness)
}

/// Whether some `(m, m')` satisfying `atom` has `m'` enabling `t`.
pub fn atom_enables(net: &PetriNet, atom: &Atom, t: usize) -> bool {
    let has_negative = atom
        .u
        .iter()
        .chain(atom.v.iter())
        .any(|c| c.is_negative());
    match atom.rel {
        AtomRel::Lt => has_negative,
        AtomRel::Le => !dot(&atom.v, &net.pre(t)).is_positive() || has_negative,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implication {
    /// The premise never enables the transition.
    Vacuous,
    /// Holds with the multiplier found by the one-variable test.
    Holds(Rat),
    Fails,
}

impl Implication {
    pub fn holds(&self) -> bool {
        !matches!(self, Implication::Fails)
    }
}

/// Tests `premise ↝_t conclusion`: whenever `(m, m')` satisfies `premise`
/// and `m'` fires `t` to `m''`, the pair `(m, m'')` satisfies `conclusion`.
pub fn atom_implies(net: &PetriNet, premise: &Atom, t: usize, conclusion: &Atom) -> Implication {
    if !atom_enables(net, premise, t) {
        return Implication::Vacuous;
    }
    let np = net.num_places();
    let pre = net.pre(t);
    // over x = (m, m'): premise is a·x ~ 0 with x >= l := (0, pre(t)),
    // conclusion after firing is a'·x ~' b' with b' := -v'·Δt
    let a_dot_l = dot(&premise.v, &pre);
    let a2_dot_l = dot(&conclusion.v, &pre);
    let b2 = -dot(&conclusion.v, &net.effect_vector(t));
    let mut base = Vec::with_capacity(2 * np + 3);
    for (a, a2) in premise
        .u
        .iter()
        .zip(&conclusion.u)
        .chain(premise.v.iter().zip(&conclusion.v))
    {
        // λ a_i >= a'_i
        base.push(UnaryConstraint::new(-a, AtomRel::Le, -a2));
    }
    // -b' (~) (λa - a')·l  ⟺  -(a·l) λ (~) b' - a'·l
    let gap = UnaryConstraint::new(-&a_dot_l, AtomRel::Le, &b2 - &a2_dot_l);
    let attempt = |extra: Vec<UnaryConstraint>| {
        let mut cs = base.clone();
        cs.extend(extra);
        one_var_feasible(&cs)
    };
    let strict_gap = UnaryConstraint {
        rel: AtomRel::Lt,
        ..gap.clone()
    };
    let outcome = match (premise.rel, conclusion.rel) {
        (_, AtomRel::Le) => attempt(vec![gap]),
        (AtomRel::Le, AtomRel::Lt) => attempt(vec![strict_gap]),
        (AtomRel::Lt, AtomRel::Lt) => match attempt(vec![strict_gap]) {
            found @ UnaryFeasibility::Feasible(_) => found,
            UnaryFeasibility::Infeasible => {
                let reverse = UnaryConstraint::new(a_dot_l.clone(), AtomRel::Le, &a2_dot_l - &b2);
                let positive = UnaryConstraint::new(-Rat::one(), AtomRel::Lt, Rat::zero());
                attempt(vec![gap, reverse, positive])
            }
        },
    };
    match outcome {
        UnaryFeasibility::Feasible(lambda) => Implication::Holds(lambda),
        UnaryFeasibility::Infeasible => Implication::Fails,
    }
}

/// Tests `from ↝_t to`: each atom of `to` is implied by some atom of
/// `from`. On success returns, per atom of `to`, the index of the atom of
/// `from` implying it.
pub fn clause_implies(net: &PetriNet, from: &Clause, t: usize, to: &Clause) -> Option<Vec<usize>> {
    to.atoms
        .iter()
        .map(|target| {
            from.atoms
                .iter()
                .position(|premise| atom_implies(net, premise, t, target).holds())
        })
        .collect()
}

/// A claimed implication `from ↝_t to` in the given direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Annotation {
    pub dir: Direction,
    pub transition: usize,
    pub from: usize,
    pub to: usize,
}

/// A bi-separator together with the instance it is claimed for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub formula: DnfFormula,
    pub transitions: TransitionSet,
    pub source: Marking,
    pub target: Marking,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    Malformed(String),
    SourcePairExcluded,
    TargetPairExcluded,
    EndpointsNotSeparated,
    NotClosed {
        dir: Direction,
        transition: usize,
        clause: usize,
    },
}

impl RejectReason {
    pub fn describe(&self, net: &PetriNet) -> String {
        match self {
            RejectReason::NotClosed {
                dir,
                transition,
                clause,
            } => format!(
                "not closed: direction {} transition {} clause {}",
                dir.as_str(),
                net.transitions()
                    .get(*transition)
                    .map(String::as_str)
                    .unwrap_or("?"),
                clause
            ),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Malformed(msg) => write!(f, "malformed certificate: {msg}"),
            RejectReason::SourcePairExcluded => write!(f, "(source, source) does not satisfy the formula"),
            RejectReason::TargetPairExcluded => write!(f, "(target, target) does not satisfy the formula"),
            RejectReason::EndpointsNotSeparated => write!(f, "(source, target) satisfies the formula"),
            RejectReason::NotClosed {
                dir,
                transition,
                clause,
            } => write!(
                f,
                "not closed: direction {} transition #{transition} clause {clause}",
                dir.as_str()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// Annotations that turned out wrong; the checker fell back to search.
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    pub fn reject_reason(&self) -> Option<&RejectReason> {
        match &self.verdict {
            Verdict::Accept => None,
            Verdict::Reject(r) => Some(r),
        }
    }
}

fn structural_problems(net: &PetriNet, cert: &Certificate) -> Option<String> {
    let np = net.num_places();
    if cert.formula.dim() != np {
        return Some(format!(
            "formula over {} places, net has {np}",
            cert.formula.dim()
        ));
    }
    if cert.source.len() != np || cert.target.len() != np {
        return Some("endpoint markings do not match the places".into());
    }
    if let Some(t) = cert.transitions.iter().find(|&&t| t >= net.num_transitions()) {
        return Some(format!("transition #{t} out of range"));
    }
    let n = cert.formula.clauses().len();
    for a in &cert.annotations {
        if a.from >= n || a.to >= n || a.transition >= net.num_transitions() {
            return Some("annotation index out of range".into());
        }
    }
    None
}

/// For one task, the clause `j` with `clauses[i] ↝_t clauses[j]`, trying
/// `hint` first.
fn find_target(
    net: &PetriNet,
    formula: &DnfFormula,
    t: usize,
    i: usize,
    hint: Option<usize>,
) -> (Option<usize>, bool) {
    let clauses = formula.clauses();
    let from = &clauses[i];
    if let Some(j) = hint {
        if clause_implies(net, from, t, &clauses[j]).is_some() {
            return (Some(j), false);
        }
    }
    let found = (0..clauses.len()).find(|&j| clause_implies(net, from, t, &clauses[j]).is_some());
    (found, hint.is_some())
}

/// Checks that `cert` is a locally closed bi-separator for its endpoints
/// w.r.t. `net` restricted to the certificate's transitions. `jobs` bounds
/// the worker count; the verdict does not depend on it.
pub fn check_certificate(net: &PetriNet, cert: &Certificate, jobs: usize) -> CheckReport {
    let reject = |reason| CheckReport {
        verdict: Verdict::Reject(reason),
        warnings: Vec::new(),
    };
    if let Some(msg) = structural_problems(net, cert) {
        return reject(RejectReason::Malformed(msg));
    }
    let f = &cert.formula;
    let eval = |a: &Marking, b: &Marking| eval_pair(f, a, b).expect("dimensions checked");
    if !eval(&cert.source, &cert.source) {
        return reject(RejectReason::SourcePairExcluded);
    }
    if !eval(&cert.target, &cert.target) {
        return reject(RejectReason::TargetPairExcluded);
    }
    if eval(&cert.source, &cert.target) {
        return reject(RejectReason::EndpointsNotSeparated);
    }

    let transposed_net = net.transpose();
    let transposed_formula = f.transposed();
    let mut tasks = Vec::new();
    for dir in [Direction::Fwd, Direction::Bwd] {
        for &t in &cert.transitions {
            for i in 0..f.clauses().len() {
                tasks.push((dir, t, i));
            }
        }
    }
    let run = |&(dir, t, i): &(Direction, usize, usize)| {
        let hint = cert
            .annotations
            .iter()
            .find(|a| a.dir == dir && a.transition == t && a.from == i)
            .map(|a| a.to);
        match dir {
            Direction::Fwd => find_target(net, f, t, i, hint),
            Direction::Bwd => find_target(&transposed_net, &transposed_formula, t, i, hint),
        }
    };
    let results: Vec<(Option<usize>, bool)> = if jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| tasks.par_iter().map(run).collect()),
            Err(_) => tasks.iter().map(run).collect(),
        }
    };

    let mut warnings = Vec::new();
    for (&(dir, t, i), (found, hint_failed)) in tasks.iter().zip(&results) {
        if *hint_failed {
            warnings.push(format!(
                "annotation for direction {} transition {} clause {i} is wrong; searched instead",
                dir.as_str(),
                net.transitions()[t]
            ));
        }
        if found.is_none() {
            return CheckReport {
                verdict: Verdict::Reject(RejectReason::NotClosed {
                    dir,
                    transition: t,
                    clause: i,
                }),
                warnings,
            };
        }
    }
    CheckReport {
        verdict: Verdict::Accept,
        warnings,
    }
}

/// For every direction, transition of `within` and clause, the first clause
/// it implies, or `None` when some task has no target.
pub fn find_annotations(net: &PetriNet, formula: &DnfFormula, within: &TransitionSet) -> Option<Vec<Annotation>> {
    let transposed_net = net.transpose();
    let transposed_formula = formula.transposed();
    let mut out = Vec::new();
    for dir in [Direction::Fwd, Direction::Bwd] {
        let (n, f) = match dir {
            Direction::Fwd => (net, formula),
            Direction::Bwd => (&transposed_net, &transposed_formula),
        };
        for &t in within {
            for i in 0..f.clauses().len() {
                let (to, _) = find_target(n, f, t, i, None);
                out.push(Annotation {
                    dir,
                    transition: t,
                    from: i,
                    to: to?,
                });
            }
        }
    }
    Some(out)
}

/// Diagnostic only: a pair `(m, m')` with `m' >= pre(t)` satisfying
/// `premise` such that firing `t` from `m'` violates `conclusion`. Uses the
/// general solver.
pub fn counterexample(net: &PetriNet, premise: &Atom, t: usize, conclusion: &Atom) -> Option<(Vec<Rat>, Vec<Rat>)> {
    let np = net.num_places();
    let mut sys = LinSystem::nonneg(2 * np);
    let pre = net.pre(t);
    for (p, w) in pre.iter().enumerate() {
        if !w.is_zero() {
            sys.lower_bound(np + p, w.clone());
        }
    }
    let joined = |a: &Atom| -> Vec<Rat> { a.u.iter().chain(a.v.iter()).cloned().collect() };
    let prem = joined(premise);
    match premise.rel {
        AtomRel::Le => sys.add_le(prem, Rat::zero()),
        AtomRel::Lt => sys.add_lt(prem, Rat::zero()),
    }
    // conclusion fails: u'·m + v'·m' + v'·Δt is > 0 (for <=) or >= 0 (for <)
    let shift = dot(&conclusion.v, &net.effect_vector(t));
    let neg: Vec<Rat> = joined(conclusion).into_iter().map(|c| -c).collect();
    match conclusion.rel {
        AtomRel::Le => sys.add_lt(neg, shift),
        AtomRel::Lt => sys.add_le(neg, shift),
    }
    match feasible(&sys) {
        Feasibility::Sat(x) => {
            let (m, m2) = x.split_at(np);
            Some((m.to_vec(), m2.to_vec()))
        }
        Feasibility::Unsat => None,
    }
}
