//! Reachability analysis for continuous Petri nets with checkable
//! unreachability certificates.
//!
//! Unreachable pairs are certified by locally closed bi-separators: DNF
//! formulas over two markings whose invariance can be checked one atom
//! pair at a time, each check being a linear program in one variable.

pub mod certify;
pub mod check;
pub mod fixtures;
pub mod formula;
pub mod harness;
pub mod lp;
pub mod net;
pub mod rat;
pub mod reach;
pub mod set2set;
pub mod structural;

pub use formula::{eval_pair, specialize, transpose_formula, Atom, AtomRel, Clause, Direction, DnfFormula};
pub use net::{FiringSequence, FiringStep, Marking, NetBuilder, NetError, PetriNet, PlaceSet, TransitionSet};
pub use rat::Rat;
pub use reach::{reachable, PositiveWitness, ReachVerdict};
pub use certify::{construct_biseparator, CertifyError};
pub use check::{check_certificate, Annotation, Certificate, CheckReport, RejectReason, Verdict};
pub use set2set::{compile_query, CompiledQuery, ConvexPolytope, PolyRel, PolytopeConstraint, Set2SetError};
pub use harness::{crosscheck, random_net, sample_run, CrosscheckReport, NetGenSpec};
