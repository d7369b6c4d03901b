//! Homogeneous linear formulas over a pair of markings, in disjunctive
//! normal form.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::net::Marking;
use crate::rat::{dot, format_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("formula has no clauses")]
    NoClauses,
    #[error("clause {0} has no atoms")]
    EmptyClause(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomRel {
    Le,
    Lt,
}

impl AtomRel {
    pub fn holds(self, lhs: &Rat) -> bool {
        match self {
            AtomRel::Le => !lhs.is_positive(),
            AtomRel::Lt => lhs.is_negative(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            AtomRel::Le => "<=",
            AtomRel::Lt => "<",
        }
    }
}

/// `u·m + v·m' rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub u: Vec<Rat>,
    pub v: Vec<Rat>,
    pub rel: AtomRel,
}

impl Atom {
    pub fn new(u: Vec<Rat>, v: Vec<Rat>, rel: AtomRel) -> Self {
        assert_eq!(u.len(), v.len(), "atom sides over different universes");
        Atom { u, v, rel }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn eval(&self, m: &[Rat], m2: &[Rat]) -> bool {
        self.rel.holds(&(dot(&self.u, m) + dot(&self.v, m2)))
    }

    /// Swaps the roles of the two markings.
    pub fn transposed(&self) -> Atom {
        Atom {
            u: self.v.clone(),
            v: self.u.clone(),
            rel: self.rel,
        }
    }
}

/// A conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub atoms: Vec<Atom>,
}

impl Clause {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Clause { atoms }
    }

    pub fn eval(&self, m: &[Rat], m2: &[Rat]) -> bool {
        self.atoms.iter().all(|a| a.eval(m, m2))
    }
}

/// A nonempty disjunction of nonempty clauses over a common universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnfFormula {
    clauses: Vec<Clause>,
    dim: usize,
}

impl DnfFormula {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        let first = clauses.first().ok_or(FormulaError::NoClauses)?;
        let atom = first.atoms.first().ok_or(FormulaError::EmptyClause(0))?;
        let dim = atom.dim();
        for (i, c) in clauses.iter().enumerate() {
            if c.atoms.is_empty() {
                return Err(FormulaError::EmptyClause(i));
            }
            for a in &c.atoms {
                for side in [&a.u, &a.v] {
                    if side.len() != dim {
                        return Err(FormulaError::DimensionMismatch {
                            expected: dim,
                            found: side.len(),
                        });
                    }
                }
            }
        }
        Ok(DnfFormula { clauses, dim })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(|c| c.atoms.len()).max().unwrap_or(0)
    }

    pub fn transposed(&self) -> DnfFormula {
        DnfFormula {
            clauses: self
                .clauses
                .iter()
                .map(|c| Clause::new(c.atoms.iter().map(Atom::transposed).collect()))
                .collect(),
            dim: self.dim,
        }
    }

    /// Drops clause `i`; fails if it was the only one.
    pub fn without_clause(&self, i: usize) -> Result<DnfFormula, FormulaError> {
        let mut clauses = self.clauses.clone();
        clauses.remove(i);
        DnfFormula::new(clauses)
    }

    pub fn display(&self, places: &[String]) -> String {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let atoms: Vec<String> = c
                    .atoms
                    .iter()
                    .map(|a| {
                        let mut terms = Vec::new();
                        push_terms(&mut terms, &a.u, places, "");
                        push_terms(&mut terms, &a.v, places, "'");
                        format!("{} {} 0", join_terms(&terms), a.rel.symbol())
                    })
                    .collect();
                format!("[{}]", atoms.join(" & "))
            })
            .collect();
        clauses.join(" | ")
    }
}

fn push_terms(out: &mut Vec<(bool, String)>, coeffs: &[Rat], places: &[String], mark: &str) {
    for (p, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let name = format!("{}{}", places[p], mark);
        let term = if mag.is_one() {
            name
        } else {
            format!("{}*{}", format_rat(&mag), name)
        };
        out.push((c.is_negative(), term));
    }
}

fn join_terms(terms: &[(bool, String)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (neg, term)) in terms.iter().enumerate() {
        match (i, neg) {
            (0, true) => {
                let _ = write!(s, "-{term}");
            }
            (0, false) => s.push_str(term),
            (_, true) => {
                let _ = write!(s, " - {term}");
            }
            (_, false) => {
                let _ = write!(s, " + {term}");
            }
        }
    }
    s
}

fn check_dim(f: &DnfFormula, m: &Marking) -> Result<(), FormulaError> {
    if m.len() == f.dim() {
        Ok(())
    } else {
        Err(FormulaError::DimensionMismatch {
            expected: f.dim(),
            found: m.len(),
        })
    }
}

/// Whether `(m, m2)` satisfies `f`.
pub fn eval_pair(f: &DnfFormula, m: &Marking, m2: &Marking) -> Result<bool, FormulaError> {
    check_dim(f, m)?;
    check_dim(f, m2)?;
    Ok(f.clauses.iter().any(|c| c.eval(m.values(), m2.values())))
}

pub fn transpose_formula(f: &DnfFormula) -> DnfFormula {
    f.transposed()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Fwd,
    Bwd,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Fwd => "fwd",
            Direction::Bwd => "bwd",
        }
    }
}

/// `coeffs·m + constant rel 0` over a single marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineAtom {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
    pub rel: AtomRel,
}

impl AffineAtom {
    pub fn eval(&self, m: &[Rat]) -> bool {
        self.rel.holds(&(dot(&self.coeffs, m) + &self.constant))
    }

    /// `Some(b)` if the atom has the constant truth value `b` on every
    /// nonnegative marking, judging by signs alone.
    fn constant_truth(&self) -> Option<bool> {
        let all_nonneg = self.coeffs.iter().all(|c| !c.is_negative());
        let all_nonpos = self.coeffs.iter().all(|c| !c.is_positive());
        if all_nonpos && self.rel.holds(&self.constant) {
            return Some(true);
        }
        // the left side is at least `constant`, which already fails
        if all_nonneg && !self.rel.holds(&self.constant) {
            return Some(false);
        }
        None
    }
}

/// A DNF formula over one marking, obtained by fixing one side of a
/// two-marking formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneSidedFormula {
    pub clauses: Vec<Vec<AffineAtom>>,
}

impl OneSidedFormula {
    pub fn eval(&self, m: &Marking) -> bool {
        self.clauses
            .iter()
            .any(|c| c.iter().all(|a| a.eval(m.values())))
    }

    /// Constant-folds atoms whose truth is fixed on nonnegative markings.
    /// For display only; the result is equivalent on nonnegative inputs.
    pub fn simplify(&self) -> OneSidedFormula {
        let mut clauses = Vec::new();
        for c in &self.clauses {
            let mut kept = Vec::new();
            let mut dead = false;
            for a in c {
                match a.constant_truth() {
                    Some(true) => {}
                    Some(false) => {
                        dead = true;
                        break;
                    }
                    None => kept.push(a.clone()),
                }
            }
            if dead {
                continue;
            }
            if kept.is_empty() {
                // a clause that is always true swallows the disjunction
                return OneSidedFormula {
                    clauses: vec![Vec::new()],
                };
            }
            if !clauses.contains(&kept) {
                clauses.push(kept);
            }
        }
        OneSidedFormula { clauses }
    }

    pub fn display(&self, places: &[String]) -> String {
        if self.clauses.is_empty() {
            return "false".to_string();
        }
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                if c.is_empty() {
                    return "true".to_string();
                }
                let atoms: Vec<String> = c
                    .iter()
                    .map(|a| {
                        let mut terms = Vec::new();
                        push_terms(&mut terms, &a.coeffs, places, "");
                        format!(
                            "{} {} {}",
                            join_terms(&terms),
                            a.rel.symbol(),
                            format_rat(&-&a.constant)
                        )
                    })
                    .collect();
                format!("[{}]", atoms.join(" & "))
            })
            .collect();
        clauses.join(" | ")
    }
}

/// Fixes one marking of `f` to `endpoint`: `Fwd` gives `m ↦ f(endpoint, m)`,
/// `Bwd` gives `m ↦ f(m, endpoint)`.
pub fn specialize(f: &DnfFormula, endpoint: &Marking, direction: Direction) -> OneSidedFormula {
    let e = endpoint.values();
    OneSidedFormula {
        clauses: f
            .clauses
            .iter()
            .map(|c| {
                c.atoms
                    .iter()
                    .map(|a| {
                        let (fixed, free) = match direction {
                            Direction::Fwd => (&a.u, &a.v),
                            Direction::Bwd => (&a.v, &a.u),
                        };
                        AffineAtom {
                            coeffs: free.clone(),
                            constant: dot(fixed, e),
                            rel: a.rel,
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n1_msrc, n1_mtgt3, n1_mtgt4, n1_reference_formula};
    use crate::rat::{frac, int};
    use proptest::prelude::*;

    fn e(p: usize, s: i64) -> Vec<Rat> {
        let mut v = vec![int(0); 4];
        v[p] = int(s);
        v
    }

    fn marking_strategy() -> impl Strategy<Value = Marking> {
        prop::collection::vec((0i64..=6, 1i64..=3), 4)
            .prop_map(|v| Marking::new(v.into_iter().map(|(n, d)| frac(n, d)).collect()).unwrap())
    }

    fn reference_psi(m: &Marking) -> bool {
        &m[0] + &m[1] > int(0) || m[3] > int(0)
    }

    fn reference_psi_prime(m: &Marking) -> bool {
        (&m[0] + &m[1]).is_zero() && m[2] >= int(1) && m[3].is_zero()
    }

    #[test]
    fn eval_examples() {
        let f = n1_reference_formula();
        assert!(eval_pair(&f, &n1_msrc(), &n1_msrc()).unwrap());
        assert!(eval_pair(&f, &n1_mtgt3(), &n1_mtgt3()).unwrap());
        assert!(!eval_pair(&f, &n1_msrc(), &n1_mtgt3()).unwrap());

        let strict = DnfFormula::new(vec![Clause::new(vec![Atom::new(e(3, 1), e(3, -1), AtomRel::Lt)])]).unwrap();
        assert!(!eval_pair(&strict, &Marking::zeros(4), &Marking::zeros(4)).unwrap());

        let clause = DnfFormula::new(vec![Clause::new(vec![
            Atom::new(e(3, 1), e(3, -1), AtomRel::Le),
            Atom::new(e(3, -1), e(3, -1), AtomRel::Lt),
        ])])
        .unwrap();
        assert!(eval_pair(&clause, &n1_msrc(), &n1_mtgt4()).unwrap());
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let f = n1_reference_formula();
        assert!(matches!(
            eval_pair(&f, &Marking::zeros(3), &n1_msrc()),
            Err(FormulaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trivial_specialization_is_true() {
        let f = DnfFormula::new(vec![Clause::new(vec![Atom::new(e(0, 1), e(0, -1), AtomRel::Le)])]).unwrap();
        let psi = specialize(&f, &Marking::zeros(4), Direction::Fwd);
        assert_eq!(psi.simplify().clauses, vec![Vec::new()]);
    }

    #[test]
    fn transpose_examples() {
        let atom = Atom::new(e(3, 1), e(3, -1), AtomRel::Le);
        let t = atom.transposed();
        assert_eq!(t.u, e(3, -1));
        assert_eq!(t.v, e(3, 1));
        let f = n1_reference_formula();
        assert_eq!(transpose_formula(&transpose_formula(&f)), f);
    }

    #[test]
    fn display_is_readable() {
        let names: Vec<String> = (1..=4).map(|i| format!("p{i}")).collect();
        let f = n1_reference_formula();
        assert!(f.display(&names).starts_with("[p4 - p4' < 0] | "));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn forward_specialization_matches_psi(m in marking_strategy()) {
            let psi = specialize(&n1_reference_formula(), &n1_msrc(), Direction::Fwd);
            prop_assert_eq!(psi.eval(&m), reference_psi(&m));
            prop_assert_eq!(psi.simplify().eval(&m), psi.eval(&m));
        }

        #[test]
        fn backward_specialization_matches_psi_prime(m in marking_strategy()) {
            let psi = specialize(&n1_reference_formula(), &n1_mtgt3(), Direction::Bwd);
            prop_assert_eq!(psi.eval(&m), reference_psi_prime(&m));
            prop_assert_eq!(psi.simplify().eval(&m), psi.eval(&m));
        }

        #[test]
        fn specialization_is_pointwise(m in marking_strategy(), e in marking_strategy()) {
            let f = n1_reference_formula();
            prop_assert_eq!(specialize(&f, &e, Direction::Fwd).eval(&m), eval_pair(&f, &e, &m).unwrap());
            prop_assert_eq!(specialize(&f, &e, Direction::Bwd).eval(&m), eval_pair(&f, &m, &e).unwrap());
        }

        #[test]
        fn homogeneous_under_scaling(m in marking_strategy(), m2 in marking_strategy(), n in 1i64..7, d in 1i64..7) {
            let f = n1_reference_formula();
            let lambda = frac(n, d);
            prop_assert_eq!(
                eval_pair(&f, &m.scale(&lambda), &m2.scale(&lambda)).unwrap(),
                eval_pair(&f, &m, &m2).unwrap()
            );
        }

        #[test]
        fn transpose_reverses_pairs(m in marking_strategy(), m2 in marking_strategy()) {
            let f = n1_reference_formula();
            prop_assert_eq!(
                eval_pair(&transpose_formula(&f), &m2, &m).unwrap(),
                eval_pair(&f, &m, &m2).unwrap()
            );
        }
    }
}
