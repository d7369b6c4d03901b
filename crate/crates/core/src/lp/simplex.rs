//! Dense two-phase primal simplex over exact rationals.
//!
//! Solves `min c·x  s.t.  A x = b, x >= 0`. Pivoting follows Bland's rule
//! (lowest-index entering column, lowest-index leaving basic variable on
//! ratio ties), so it always terminates and is fully deterministic.

use num_traits::{Signed, Zero};

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective.
    reduced: Vec<Rat>,
    /// Negated objective value.
    neg_value: Rat,
    /// Columns that may never enter (artificials during phase 2).
    banned: Vec<bool>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.banned.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rat::from_integer(1.into()) / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let nz: Vec<usize> = (0..self.ncols())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !self.reduced[c].is_zero() {
            let factor = self.reduced[c].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                self.reduced[j] -= delta;
            }
            self.neg_value -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn load_objective(&mut self, cost: &[Rat]) {
        self.reduced = cost.to_vec();
        self.neg_value = Rat::zero();
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.reduced.len() {
                if !self.rows[i][j].is_zero() {
                    let delta = cb * &self.rows[i][j];
                    self.reduced[j] -= delta;
                }
            }
            self.neg_value -= cb * &self.rhs[i];
        }
    }

    /// Runs primal simplex on the loaded objective. Returns false when
    /// the objective is unbounded below.
    fn optimize(&mut self) -> bool {
        loop {
            let entering =
                (0..self.ncols()).find(|&j| !self.banned[j] && self.reduced[j].is_negative());
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); n];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < n {
                x[bv] = self.rhs[i].clone();
            }
        }
        x
    }
}

/// Minimizes `cost · x` subject to `a x = b`, `x >= 0`.
pub(crate) fn solve_standard(a: &[Vec<Rat>], b: &[Rat], cost: &[Rat]) -> LpOutcome {
    let n = cost.len();
    let m = a.len();
    debug_assert_eq!(b.len(), m);
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    for (row, bi) in a.iter().zip(b) {
        debug_assert_eq!(row.len(), n);
        if bi.is_negative() {
            rows.push(row.iter().map(|v| -v).collect());
            rhs.push(-bi);
        } else {
            rows.push(row.clone());
            rhs.push(bi.clone());
        }
    }

    // Reuse unit columns (typically slacks) as the starting basis.
    let mut basis: Vec<Option<usize>> = vec![None; m];
    for j in 0..n {
        let mut hit = None;
        let mut unit = true;
        for (i, row) in rows.iter().enumerate() {
            let v = &row[j];
            if v.is_zero() {
                continue;
            }
            if hit.is_none() && v == &Rat::from_integer(1.into()) {
                hit = Some(i);
            } else {
                unit = false;
                break;
            }
        }
        if let (true, Some(i)) = (unit, hit) {
            if basis[i].is_none() {
                basis[i] = Some(j);
            }
        }
    }

    let mut artificial = Vec::new();
    for (i, slot) in basis.iter_mut().enumerate() {
        if slot.is_none() {
            artificial.push(i);
            *slot = Some(n + artificial.len() - 1);
        }
    }
    let total = n + artificial.len();
    for &i in &artificial {
        for (r, row) in rows.iter_mut().enumerate() {
            row.push(if r == i {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            });
        }
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis: basis.into_iter().map(|b| b.expect("basis filled")).collect(),
        reduced: vec![Rat::zero(); total],
        neg_value: Rat::zero(),
        banned: vec![false; total],
    };

    if !artificial.is_empty() {
        let mut phase1 = vec![Rat::zero(); total];
        for v in phase1.iter_mut().skip(n) {
            *v = Rat::from_integer(1.into());
        }
        tab.load_objective(&phase1);
        let bounded = tab.optimize();
        debug_assert!(bounded, "phase one is bounded below by zero");
        if tab.neg_value.is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= n {
                match (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        // redundant row
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in n..total {
            tab.banned[j] = true;
        }
    }

    let mut full_cost = cost.to_vec();
    full_cost.resize(total, Rat::zero());
    tab.load_objective(&full_cost);
    if !tab.optimize() {
        return LpOutcome::Unbounded;
    }
    let x = tab.solution(n);
    let value = -tab.neg_value.clone();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn row(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![row(&[1, 2, 1, 0]), row(&[3, 1, 0, 1])];
        let b = row(&[4, 6]);
        let c = row(&[-1, -1, 0, 0]);
        match solve_standard(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, frac(-14, 5));
                assert_eq!(x[0], frac(8, 5));
                assert_eq!(x[1], frac(6, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_equalities() {
        // x + y = 1, x + y = 2
        let a = vec![row(&[1, 1]), row(&[1, 1])];
        let b = row(&[1, 2]);
        assert_eq!(
            solve_standard(&a, &b, &row(&[0, 0])),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn unbounded_direction() {
        // x - y = 1, min -x
        let a = vec![row(&[1, -1])];
        assert_eq!(
            solve_standard(&a, &row(&[1]), &row(&[-1, 0])),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn redundant_rows_dropped() {
        let a = vec![row(&[1, 1]), row(&[2, 2])];
        let b = row(&[1, 2]);
        match solve_standard(&a, &b, &row(&[1, 0])) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, int(0));
                assert_eq!(x, row(&[0, 1]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x = -3
        let a = vec![row(&[-1])];
        match solve_standard(&a, &row(&[-3]), &row(&[0])) {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, row(&[3])),
            other => panic!("unexpected {other:?}"),
        }
    }
}
