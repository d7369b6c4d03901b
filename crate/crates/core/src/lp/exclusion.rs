use num_traits::{One, Signed, Zero};

use super::{feasible, Feasibility, LinSystem, Objective, Optimum};
use crate::net::{PetriNet, TransitionSet};
use crate::rat::{dot, Rat};

/// A solution `x >= 0` of `F x = b` whose support is maximal among
/// solutions supported inside the requested transition set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSolution {
    pub support: TransitionSet,
    /// Indexed by all transitions of the net; zero outside `support`.
    pub x: Vec<Rat>,
}

/// Solves `F x = y b, y >= 1, x >= 0, supp(x) ⊆ within, x_t >= 1` and
/// returns `x / y`, a solution of `F x = b` with `t` in its support.
fn solution_through(net: &PetriNet, b: &[Rat], within: &[usize], t: usize) -> Option<Vec<Rat>> {
    let k = within.len();
    // variables: x over `within`, then the scale y
    let mut sys = LinSystem::nonneg(k + 1);
    for (p, bp) in b.iter().enumerate() {
        let mut coeffs: Vec<Rat> = within.iter().map(|&u| net.effect(p, u)).collect();
        coeffs.push(-bp);
        sys.add_eq(coeffs, Rat::zero());
    }
    sys.lower_bound(k, Rat::one());
    let pos = within.iter().position(|&u| u == t).expect("t inside within");
    sys.lower_bound(pos, Rat::one());
    match feasible(&sys) {
        Feasibility::Sat(sol) => {
            let scale = sol[k].clone();
            let mut x = vec![Rat::zero(); net.num_transitions()];
            for (i, &u) in within.iter().enumerate() {
                x[u] = &sol[i] / &scale;
            }
            Some(x)
        }
        Feasibility::Unsat => None,
    }
}

/// Maximal-support solution of the state equation `F x = b` with
/// `supp(x) ⊆ within`, or `None` when no such `x >= 0` exists.
pub fn max_support_solution(
    net: &PetriNet,
    b: &[Rat],
    within: &TransitionSet,
) -> Option<SupportSolution> {
    let order: Vec<usize> = within.iter().copied().collect();
    let mut support = TransitionSet::new();
    let mut parts: Vec<Vec<Rat>> = Vec::new();
    for &t in &order {
        if support.contains(&t) {
            continue;
        }
        if let Some(x) = solution_through(net, b, &order, t) {
            support.extend((0..x.len()).filter(|&u| x[u].is_positive()));
            parts.push(x);
        }
    }
    if parts.is_empty() {
        // only the empty support remains, valid iff b = 0
        return if b.iter().all(Zero::is_zero) {
            Some(SupportSolution {
                support,
                x: vec![Rat::zero(); net.num_transitions()],
            })
        } else {
            None
        };
    }
    // the average of solutions is a solution with the union support
    let count = Rat::from_integer(parts.len().into());
    let mut x = vec![Rat::zero(); net.num_transitions()];
    for part in &parts {
        for (acc, v) in x.iter_mut().zip(part) {
            *acc += v;
        }
    }
    for v in x.iter_mut() {
        *v /= &count;
    }
    Some(SupportSolution { support, x })
}

/// The maximal support `U' ⊆ within` of a solution of `F x = b`; empty when
/// only `x = 0` or no solution exists.
pub fn max_support(net: &PetriNet, b: &[Rat], within: &TransitionSet) -> TransitionSet {
    max_support_solution(net, b, within)
        .map(|s| s.support)
        .unwrap_or_default()
}

/// A vector `y` over the places inducing the linear function `m ↦ y·m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionWitness {
    pub y: Vec<Rat>,
}

impl ExclusionWitness {
    pub fn value(&self, m: &[Rat]) -> Rat {
        dot(&self.y, m)
    }

    /// `(F^T y)_t`, the change of the function per unit firing of `t`.
    pub fn slope(&self, net: &PetriNet, t: usize) -> Rat {
        dot(&self.y, &net.effect_vector(t))
    }

    /// Re-checks membership in the system `Y_S` it was drawn from.
    pub fn is_member(
        &self,
        net: &PetriNet,
        b: &[Rat],
        strict_on: &TransitionSet,
        within: &TransitionSet,
    ) -> bool {
        let by = dot(b, &self.y);
        let gain: Rat = strict_on.iter().map(|&s| self.slope(net, s)).sum();
        within.iter().all(|&t| !self.slope(net, t).is_negative())
            && !by.is_positive()
            && by < gain
    }
}

/// Finds `y` with `(F^T y)_t >= 0` for `t ∈ within`, `b·y <= 0` and
/// `b·y < Σ_{s ∈ strict_on} (F^T y)_s`, or `None` if no such `y` exists.
///
/// The system is a cone, so the strict row is solved with slack one.
/// Among the solutions the one of least `Σ |y_p|` is returned.
pub fn solve_exclusion(
    net: &PetriNet,
    b: &[Rat],
    strict_on: &TransitionSet,
    within: &TransitionSet,
) -> Option<ExclusionWitness> {
    let np = net.num_places();
    let mut sys = LinSystem::free(np);
    for &t in within {
        sys.add_le((0..np).map(|p| -net.effect(p, t)).collect(), Rat::zero());
    }
    sys.add_le(b.to_vec(), Rat::zero());
    let strict: Vec<Rat> = (0..np)
        .map(|p| {
            let gain: Rat = strict_on.iter().map(|&s| net.effect(p, s)).sum();
            &b[p] - gain
        })
        .collect();
    sys.add_le(strict, -Rat::one());
    match sys.minimize(&Objective::L1) {
        Optimum::Optimal(y) => Some(ExclusionWitness { y }),
        Optimum::Infeasible => None,
        Optimum::Unbounded => unreachable!("L1 objective is bounded below"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n1, n1_msrc, n1_mtgt3, n1_mtgt4};
    use crate::rat::int;

    fn set(items: &[usize]) -> TransitionSet {
        items.iter().copied().collect()
    }

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn max_support_examples() {
        let net = n1();
        let all = net.all_transitions();
        let b3 = n1_msrc().difference_to(&n1_mtgt3());
        assert_eq!(max_support(&net, &b3, &all), set(&[0, 1, 2]));
        assert_eq!(max_support(&net, &ints(&[0, 0, 0, 0]), &all), set(&[]));
        let b4 = n1_msrc().difference_to(&n1_mtgt4());
        assert_eq!(max_support(&net, &b4, &all), all);
    }

    #[test]
    fn max_support_solution_solves_state_equation() {
        let net = n1();
        let b4 = n1_msrc().difference_to(&n1_mtgt4());
        let sol = max_support_solution(&net, &b4, &net.all_transitions()).unwrap();
        for p in 0..4 {
            let lhs: Rat = (0..4).map(|t| net.effect(p, t) * &sol.x[t]).sum();
            assert_eq!(lhs, b4[p]);
        }
        assert!(sol.x.iter().all(|v| v.is_positive()));
    }

    #[test]
    fn no_solution_is_none() {
        let net = n1();
        // only t4 allowed, which cannot lower p1
        let b = ints(&[-2, 0, 1, 0]);
        assert!(max_support_solution(&net, &b, &set(&[3])).is_none());
    }

    #[test]
    fn exclusion_for_t4_is_p4() {
        let net = n1();
        let all = net.all_transitions();
        let b3 = n1_msrc().difference_to(&n1_mtgt3());
        let w = solve_exclusion(&net, &b3, &set(&[3]), &all).unwrap();
        assert_eq!(w.y, ints(&[0, 0, 0, 1]));
        assert!(w.is_member(&net, &b3, &set(&[3]), &all));
    }

    #[test]
    fn exclusion_with_empty_strict_set() {
        let net = n1();
        let all = net.all_transitions();
        let b = ints(&[0, 0, 0, -1]);
        let w = solve_exclusion(&net, &b, &set(&[]), &all).unwrap();
        assert_eq!(w.y, ints(&[0, 0, 0, 1]));
    }

    #[test]
    fn exclusion_absent_when_primal_exists() {
        let net = n1();
        let b4 = n1_msrc().difference_to(&n1_mtgt4());
        assert!(solve_exclusion(&net, &b4, &set(&[]), &net.all_transitions()).is_none());
    }
}
