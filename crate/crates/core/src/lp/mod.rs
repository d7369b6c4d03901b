//! Exact linear feasibility and the Farkas-style systems built on it:
//! maximal supports of state-equation solutions and linear exclusion
//! functions.

mod exclusion;
mod simplex;

pub use exclusion::{max_support, max_support_solution, solve_exclusion, ExclusionWitness, SupportSolution};

use num_traits::{One, Signed, Zero};

use crate::rat::{dot, Rat};
use simplex::{solve_standard, LpOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

/// `coeffs · x  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinConstraint {
    pub coeffs: Vec<Rat>,
    pub rel: Relation,
    pub rhs: Rat,
}

impl LinConstraint {
    pub fn holds(&self, x: &[Rat]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.rel {
            Relation::Le => lhs <= self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// A finite conjunction of linear constraints over a fixed variable
/// universe; each variable is either nonnegative or free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystem {
    nonneg: Vec<bool>,
    constraints: Vec<LinConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Sat(Vec<Rat>),
    Unsat,
}

impl Feasibility {
    pub fn is_sat(&self) -> bool {
        matches!(self, Feasibility::Sat(_))
    }
}

/// Objectives understood by [`LinSystem::minimize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    Zero,
    /// `Σ |x_i|`.
    L1,
    Linear(Vec<Rat>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Optimum {
    Optimal(Vec<Rat>),
    Infeasible,
    Unbounded,
}

impl LinSystem {
    /// System over `n` free variables.
    pub fn free(n: usize) -> Self {
        LinSystem {
            nonneg: vec![false; n],
            constraints: Vec::new(),
        }
    }

    /// System over `n` nonnegative variables.
    pub fn nonneg(n: usize) -> Self {
        LinSystem {
            nonneg: vec![true; n],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.nonneg.len()
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn set_nonneg(&mut self, var: usize, nonneg: bool) {
        self.nonneg[var] = nonneg;
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn add(&mut self, coeffs: Vec<Rat>, rel: Relation, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint over foreign universe");
        self.constraints.push(LinConstraint { coeffs, rel, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.add(coeffs, Relation::Le, rhs);
    }

    pub fn add_lt(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.add(coeffs, Relation::Lt, rhs);
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        self.add(coeffs, Relation::Eq, rhs);
    }

    /// `x_var >= bound`.
    pub fn lower_bound(&mut self, var: usize, bound: Rat) {
        let mut coeffs = vec![Rat::zero(); self.num_vars()];
        coeffs[var] = -Rat::one();
        self.add_le(coeffs, -bound);
    }

    /// Exact substitution check, including variable signs.
    pub fn satisfied_by(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars()
            && self
                .nonneg
                .iter()
                .zip(x)
                .all(|(&nn, v)| !nn || !v.is_negative())
            && self.constraints.iter().all(|c| c.holds(x))
    }

    fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.rel == Relation::Lt)
    }

    /// Minimizes an objective over the non-strict system. Panics if the
    /// system has strict constraints.
    pub fn minimize(&self, objective: &Objective) -> Optimum {
        assert!(!self.has_strict(), "minimize expects non-strict constraints");
        let n = self.num_vars();
        // column layout: one column per variable, a second (negative part)
        // per free variable, then one slack per `<=` row
        let mut neg_col = vec![None; n];
        let mut ncols = n;
        for (i, slot) in neg_col.iter_mut().enumerate() {
            if !self.nonneg[i] {
                *slot = Some(ncols);
                ncols += 1;
            }
        }
        let n_slack = self
            .constraints
            .iter()
            .filter(|c| c.rel == Relation::Le)
            .count();
        let total = ncols + n_slack;
        let mut a = Vec::with_capacity(self.constraints.len());
        let mut b = Vec::with_capacity(self.constraints.len());
        let mut slack = ncols;
        for c in &self.constraints {
            let mut row = vec![Rat::zero(); total];
            for (i, v) in c.coeffs.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                row[i] = v.clone();
                if let Some(j) = neg_col[i] {
                    row[j] = -v;
                }
            }
            if c.rel == Relation::Le {
                row[slack] = Rat::one();
                slack += 1;
            }
            a.push(row);
            b.push(c.rhs.clone());
        }
        let mut cost = vec![Rat::zero(); total];
        match objective {
            Objective::Zero => {}
            Objective::L1 => {
                for (i, slot) in neg_col.iter().enumerate() {
                    cost[i] = Rat::one();
                    if let Some(j) = slot {
                        cost[*j] = Rat::one();
                    }
                }
            }
            Objective::Linear(w) => {
                assert_eq!(w.len(), n);
                for (i, slot) in neg_col.iter().enumerate() {
                    cost[i] = w[i].clone();
                    if let Some(j) = slot {
                        cost[*j] = -&w[i];
                    }
                }
            }
        }
        match solve_standard(&a, &b, &cost) {
            LpOutcome::Infeasible => Optimum::Infeasible,
            LpOutcome::Unbounded => Optimum::Unbounded,
            LpOutcome::Optimal { x: cols, .. } => {
                let x: Vec<Rat> = (0..n)
                    .map(|i| match neg_col[i] {
                        Some(j) => &cols[i] - &cols[j],
                        None => cols[i].clone(),
                    })
                    .collect();
                debug_assert!(self.satisfied_by(&x));
                Optimum::Optimal(x)
            }
        }
    }
}

/// Decides feasibility of `sys`, returning an exact witness that
/// satisfies every constraint (strict ones strictly).
///
/// Strict rows `a·x < b` are relaxed to `a·x + e <= b` with one shared
/// auxiliary `0 <= e <= 1`, which is then maximized; the system is
/// satisfiable iff the optimum is positive.
pub fn feasible(sys: &LinSystem) -> Feasibility {
    if !sys.has_strict() {
        return match sys.minimize(&Objective::Zero) {
            Optimum::Optimal(x) => Feasibility::Sat(x),
            Optimum::Infeasible => Feasibility::Unsat,
            Optimum::Unbounded => unreachable!("zero objective is bounded"),
        };
    }
    let n = sys.num_vars();
    let mut relaxed = LinSystem {
        nonneg: sys.nonneg.clone(),
        constraints: Vec::with_capacity(sys.constraints.len() + 1),
    };
    relaxed.nonneg.push(true);
    for c in &sys.constraints {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(if c.rel == Relation::Lt {
            Rat::one()
        } else {
            Rat::zero()
        });
        let rel = if c.rel == Relation::Lt {
            Relation::Le
        } else {
            c.rel
        };
        relaxed.add(coeffs, rel, c.rhs.clone());
    }
    let mut cap = vec![Rat::zero(); n + 1];
    cap[n] = Rat::one();
    relaxed.add_le(cap, Rat::one());
    let mut objective = vec![Rat::zero(); n + 1];
    objective[n] = -Rat::one();
    match relaxed.minimize(&Objective::Linear(objective)) {
        Optimum::Optimal(mut x) => {
            let eps = x.pop().expect("auxiliary variable");
            if eps.is_positive() {
                debug_assert!(sys.satisfied_by(&x));
                Feasibility::Sat(x)
            } else {
                Feasibility::Unsat
            }
        }
        Optimum::Infeasible => Feasibility::Unsat,
        Optimum::Unbounded => unreachable!("auxiliary variable is capped"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n1, n1_msrc, n1_mtgt3};
    use crate::rat::{frac, int};

    #[test]
    fn contradictory_bounds_unsat() {
        let mut sys = LinSystem::nonneg(1);
        sys.add_le(vec![int(1)], int(-1));
        assert_eq!(feasible(&sys), Feasibility::Unsat);
    }

    #[test]
    fn strict_pair_unsat() {
        let mut sys = LinSystem::free(1);
        sys.add_lt(vec![int(1)], int(1));
        sys.add_lt(vec![int(-1)], int(-1));
        assert_eq!(feasible(&sys), Feasibility::Unsat);
    }

    #[test]
    fn strict_open_interval_sat() {
        let mut sys = LinSystem::free(1);
        sys.add_lt(vec![int(1)], int(1));
        sys.add_lt(vec![int(-1)], int(0));
        match feasible(&sys) {
            Feasibility::Sat(x) => {
                assert!(x[0] > int(0) && x[0] < int(1));
                assert!(sys.satisfied_by(&x));
            }
            Feasibility::Unsat => panic!("open interval (0,1) is nonempty"),
        }
    }

    #[test]
    fn state_equation_to_mtgt3_is_sat() {
        let net = n1();
        let b = n1_msrc().difference_to(&n1_mtgt3());
        let mut sys = LinSystem::nonneg(4);
        for p in 0..4 {
            sys.add_eq((0..4).map(|t| net.effect(p, t)).collect(), b[p].clone());
        }
        match feasible(&sys) {
            Feasibility::Sat(x) => {
                assert!(sys.satisfied_by(&x));
                // every solution has the shape (s, 1 - s, s, 0)
                assert_eq!(x[3], int(0));
                assert_eq!(x[0], x[2]);
                assert_eq!(&x[1] + &x[2], int(1));
            }
            Feasibility::Unsat => panic!("(1/2, 1/2, 1/2, 0) solves it"),
        }
        let half = vec![frac(1, 2), frac(1, 2), frac(1, 2), int(0)];
        assert!(sys.satisfied_by(&half));
    }

    #[test]
    fn free_variables_can_go_negative() {
        let mut sys = LinSystem::free(2);
        sys.add_eq(vec![int(1), int(1)], int(-3));
        sys.add_le(vec![int(1), int(0)], int(-5));
        let Feasibility::Sat(x) = feasible(&sys) else {
            panic!("x = (-5, 2) works")
        };
        assert!(sys.satisfied_by(&x));
    }

    #[test]
    fn l1_minimum() {
        // y1 + y2 >= 1 (as -y1 - y2 <= -1), minimize |y1| + |y2|
        let mut sys = LinSystem::free(2);
        sys.add_le(vec![int(-1), int(-1)], int(-1));
        match sys.minimize(&Objective::L1) {
            Optimum::Optimal(y) => assert_eq!(&y[0].abs() + &y[1].abs(), int(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_rat() -> impl Strategy<Value = Rat> {
            (-4i64..=4, 1i64..=3).prop_map(|(n, d)| frac(n, d))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn sat_witnesses_verify(
                rows in prop::collection::vec(
                    (prop::collection::vec(small_rat(), 3), 0u8..3, small_rat()), 1..5),
                signs in prop::collection::vec(any::<bool>(), 3),
            ) {
                let mut sys = LinSystem::free(3);
                for (i, s) in signs.iter().enumerate() {
                    sys.set_nonneg(i, *s);
                }
                for (coeffs, rel, rhs) in rows {
                    let rel = [Relation::Le, Relation::Lt, Relation::Eq][rel as usize];
                    sys.add(coeffs, rel, rhs);
                }
                if let Feasibility::Sat(x) = feasible(&sys) {
                    prop_assert!(sys.satisfied_by(&x));
                } else {
                    // no grid point may satisfy an Unsat system
                    let grid: Vec<Rat> = (-8..=8).map(|k| frac(k, 2)).collect();
                    for a in &grid { for b in &grid { for c in &grid {
                        let x = vec![a.clone(), b.clone(), c.clone()];
                        prop_assert!(!sys.satisfied_by(&x));
                    }}}
                }
            }
        }
    }
}
