//! Seeded random instances and the cross-check of the decision procedure,
//! the certificate builder and the checker against each other and against
//! sampled runs.

use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{construct_biseparator, size_bound};
use crate::check::check_certificate;
use crate::fixtures::{n1, n1_msrc, n1_mtgt3, n1_mtgt4};
use crate::formula::{specialize, Direction};
use crate::net::{Marking, PetriNet};
use crate::rat::{frac, Rat};
use crate::reach::{reachable, ReachVerdict};

/// Bounds for [`random_net`]. All bounds are at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetGenSpec {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_weight: u64,
    pub max_denominator: i64,
    pub seed: u64,
}

impl NetGenSpec {
    pub fn new(max_places: usize, max_transitions: usize, max_weight: u64, max_denominator: i64, seed: u64) -> Self {
        NetGenSpec {
            max_places: max_places.max(1),
            max_transitions: max_transitions.max(1),
            max_weight: max_weight.max(1),
            max_denominator: max_denominator.max(1),
            seed,
        }
    }

    /// The spec of instance `index` of a cross-check run.
    pub fn instance(&self, index: u64) -> NetGenSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        NetGenSpec {
            seed: rng.random(),
            ..*self
        }
    }
}

fn random_marking(rng: &mut ChaCha8Rng, places: usize, max_den: i64) -> Marking {
    let values = (0..places)
        .map(|_| {
            if rng.random_bool(0.5) {
                Rat::zero()
            } else {
                let den = rng.random_range(1..=max_den);
                frac(rng.random_range(1..=2 * den), den)
            }
        })
        .collect();
    Marking::new(values).expect("nonnegative")
}

fn random_weights(rng: &mut ChaCha8Rng, places: usize, transitions: usize, max_weight: u64) -> Vec<Vec<u64>> {
    (0..places)
        .map(|_| {
            (0..transitions)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        0
                    } else {
                        rng.random_range(1..=max_weight)
                    }
                })
                .collect()
        })
        .collect()
}

/// A net within the bounds of `spec` with a source and a target marking.
/// Half of the targets are planted: reached from the source by a random
/// run, so the pair is known to be reachable.
pub fn random_net(spec: &NetGenSpec) -> (PetriNet, Marking, Marking) {
    random_instance(spec).0
}

fn random_instance(spec: &NetGenSpec) -> ((PetriNet, Marking, Marking), bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let np = rng.random_range(1..=spec.max_places);
    let nt = rng.random_range(1..=spec.max_transitions);
    let f_minus = random_weights(&mut rng, np, nt, spec.max_weight);
    let f_plus = random_weights(&mut rng, np, nt, spec.max_weight);
    let net = PetriNet::new(
        (1..=np).map(|i| format!("p{i}")).collect(),
        (1..=nt).map(|i| format!("t{i}")).collect(),
        f_minus,
        f_plus,
    )
    .expect("well-formed");
    let msrc = random_marking(&mut rng, np, spec.max_denominator);
    let planted = rng.random_bool(0.5);
    let mtgt = if planted {
        let depth = rng.random_range(0..=6);
        let run = sample_run(&net, &msrc, depth, rng.random());
        run.last().expect("run starts at the source").clone()
    } else {
        random_marking(&mut rng, np, spec.max_denominator)
    };
    ((net, msrc, mtgt), planted)
}

/// A random run of at most `depth` steps from `m`, including `m`. Each
/// step picks an enabled transition uniformly and an amount from
/// `{1/4, 1/2, 1}`, halved until the transition can fire it.
pub fn sample_run(net: &PetriNet, m: &Marking, depth: usize, seed: u64) -> Vec<Marking> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amounts = [frac(1, 4), frac(1, 2), Rat::one()];
    let mut run = vec![m.clone()];
    for _ in 0..depth {
        let current = run.last().expect("nonempty");
        let enabled: Vec<usize> = (0..net.num_transitions())
            .filter(|&t| (0..net.num_places()).all(|p| net.input_weight(p, t) == 0 || !current[p].is_zero()))
            .collect();
        let Some(&t) = enabled.choose(&mut rng) else {
            break;
        };
        let mut alpha = amounts.choose(&mut rng).expect("nonempty").clone();
        let next = loop {
            match net.fire(current, &alpha, t) {
                Ok(next) => break next,
                Err(_) => alpha /= Rat::from_integer(2.into()),
            }
        };
        run.push(next);
    }
    run
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Reachable,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceReport {
    pub index: u64,
    pub seed: u64,
    pub places: usize,
    pub transitions: usize,
    pub planted: bool,
    pub outcome: Outcome,
    pub clauses: Option<usize>,
    pub max_atoms: Option<usize>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PinnedReport {
    pub name: String,
    pub expected: Outcome,
    pub outcome: Outcome,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrosscheckReport {
    pub spec: NetGenSpec,
    pub count: u64,
    pub reachable: usize,
    pub unreachable: usize,
    pub violations: usize,
    pub pinned: Vec<PinnedReport>,
    pub instances: Vec<InstanceReport>,
}

impl CrosscheckReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = format!(
            "crosscheck places<={} transitions<={} weight<={} denominator<={} seed={} count={}\n",
            s.max_places, s.max_transitions, s.max_weight, s.max_denominator, s.seed, self.count
        );
        for p in &self.pinned {
            out += &format!("pinned {} {:?}\n", p.name, p.outcome);
            for v in &p.violations {
                out += &format!("  violation: {v}\n");
            }
        }
        for inst in self.instances.iter().filter(|i| !i.violations.is_empty()) {
            out += &format!("instance {} (seed {}):\n", inst.index, inst.seed);
            for v in &inst.violations {
                out += &format!("  violation: {v}\n");
            }
        }
        out += &format!(
            "reachable {} unreachable {} violations {}\n",
            self.reachable, self.unreachable, self.violations
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Runs the full pipeline on one pair, returning its outcome, the size of
/// the certificate if any, and every violated expectation.
fn examine(net: &PetriNet, msrc: &Marking, mtgt: &Marking, seed: u64) -> (Outcome, Option<(usize, usize)>, Vec<String>) {
    let mut violations = Vec::new();
    match reachable(net, msrc, mtgt) {
        ReachVerdict::Reachable(w) => {
            if let Err(e) = w.validate(net, msrc, mtgt) {
                violations.push(format!("witness rejected: {e:?}"));
            }
            (Outcome::Reachable, None, violations)
        }
        ReachVerdict::Unreachable { .. } => {
            let all = net.all_transitions();
            let size = match construct_biseparator(net, &all, msrc, mtgt) {
                Err(e) => {
                    violations.push(format!("certify failed: {e}"));
                    None
                }
                Ok(cert) => {
                    let (clauses, atoms) = (cert.formula.clauses().len(), cert.formula.max_clause_len());
                    let bound = size_bound(&all);
                    if clauses > bound || atoms > bound {
                        violations.push(format!("size {clauses}x{atoms} exceeds bound {bound}"));
                    }
                    let report = check_certificate(net, &cert, 1);
                    if let Some(reason) = report.reject_reason() {
                        violations.push(format!("check rejected: {}", reason.describe(net)));
                    }
                    let fwd = specialize(&cert.formula, msrc, Direction::Fwd);
                    if let Some(m) = sample_run(net, msrc, 12, seed).iter().find(|m| !fwd.eval(m)) {
                        violations.push(format!("forward separator fails at reachable marking {m}"));
                    }
                    let bwd = specialize(&cert.formula, mtgt, Direction::Bwd);
                    if let Some(m) = sample_run(&net.transpose(), mtgt, 12, seed).iter().find(|m| !bwd.eval(m)) {
                        violations.push(format!("backward separator fails at co-reachable marking {m}"));
                    }
                    Some((clauses, atoms))
                }
            };
            (Outcome::Unreachable, size, violations)
        }
    }
}

fn pinned() -> Vec<PinnedReport> {
    let net = n1();
    [("n1-msrc-mtgt4", n1_mtgt4(), Outcome::Reachable), ("n1-msrc-mtgt3", n1_mtgt3(), Outcome::Unreachable)]
        .into_iter()
        .map(|(name, mtgt, expected)| {
            let (outcome, _, mut violations) = examine(&net, &n1_msrc(), &mtgt, 0);
            if outcome != expected {
                violations.push(format!("expected {expected:?}, got {outcome:?}"));
            }
            PinnedReport {
                name: name.to_string(),
                expected,
                outcome,
                violations,
            }
        })
        .collect()
}

/// Re-runs instance `index` of a cross-check of `spec`.
pub fn crosscheck_instance(spec: &NetGenSpec, index: u64) -> InstanceReport {
    let inst = spec.instance(index);
    let ((net, msrc, mtgt), planted) = random_instance(&inst);
    let (outcome, size, mut violations) = examine(&net, &msrc, &mtgt, inst.seed);
    if planted && outcome == Outcome::Unreachable {
        violations.push("target was reached by a sampled run but decided unreachable".to_string());
    }
    InstanceReport {
        index,
        seed: inst.seed,
        places: net.num_places(),
        transitions: net.num_transitions(),
        planted,
        outcome,
        clauses: size.map(|s| s.0),
        max_atoms: size.map(|s| s.1),
        violations,
    }
}

/// Cross-checks `count` random instances plus the pinned cases. Instances
/// run in parallel; the report is ordered by index.
pub fn crosscheck(spec: &NetGenSpec, count: u64) -> CrosscheckReport {
    let instances: Vec<InstanceReport> = (0..count)
        .into_par_iter()
        .map(|i| crosscheck_instance(spec, i))
        .collect();
    let pinned = pinned();
    let violations = instances.iter().map(|i| i.violations.len()).sum::<usize>()
        + pinned.iter().map(|p| p.violations.len()).sum::<usize>();
    CrosscheckReport {
        spec: *spec,
        count,
        reachable: instances.iter().filter(|i| i.outcome == Outcome::Reachable).count(),
        unreachable: instances.iter().filter(|i| i.outcome == Outcome::Unreachable).count(),
        violations,
        pinned,
        instances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::n1_reference_formula;

    #[test]
    fn generation_is_deterministic() {
        let spec = NetGenSpec::new(4, 4, 2, 2, 1);
        assert_eq!(random_net(&spec), random_net(&spec));
    }

    #[test]
    fn generation_respects_bounds() {
        for seed in 0..50 {
            let (net, a, b) = random_net(&NetGenSpec::new(1, 1, 1, 1, seed));
            assert_eq!((net.num_places(), net.num_transitions()), (1, 1));
            assert_eq!((a.len(), b.len()), (1, 1));
            let (net, ..) = random_net(&NetGenSpec::new(5, 5, 3, 4, seed));
            for p in 0..net.num_places() {
                for t in 0..net.num_transitions() {
                    assert!(net.input_weight(p, t) <= 3 && net.output_weight(p, t) <= 3);
                }
            }
        }
    }

    #[test]
    fn zero_depth_run_is_the_start() {
        assert_eq!(sample_run(&n1(), &n1_msrc(), 0, 3), vec![n1_msrc()]);
    }

    #[test]
    fn runs_stay_nonnegative_and_inside_the_separator() {
        let fwd = specialize(&n1_reference_formula(), &n1_msrc(), Direction::Fwd);
        let run = sample_run(&n1(), &n1_msrc(), 20, 7);
        assert!(run.len() > 1);
        for m in &run {
            assert!(Marking::new(m.values().to_vec()).is_ok());
            assert!(fwd.eval(m));
        }
    }

    #[test]
    fn small_crosscheck_is_clean() {
        let report = crosscheck(&NetGenSpec::new(4, 4, 2, 2, 11), 40);
        assert!(report.is_clean(), "{}", report.to_text());
        assert_eq!(report.pinned[0].outcome, Outcome::Reachable);
        assert_eq!(report.pinned[1].outcome, Outcome::Unreachable);
        assert!(report.reachable > 0 && report.unreachable > 0);
    }

    #[test]
    fn instances_are_reproducible_alone() {
        let spec = NetGenSpec::new(4, 4, 2, 2, 5);
        let report = crosscheck(&spec, 6);
        assert_eq!(report.instances[4], crosscheck_instance(&spec, 4));
        assert_eq!(report.to_json(), crosscheck(&spec, 6).to_json());
    }
}
