//! Set-to-set queries between convex polytopes, compiled into ordinary
//! marking-to-marking queries on an extended net.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::net::{Marking, NetBuilder, NetError, PetriNet};
use crate::rat::{dot, lcm_denominators, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Set2SetError {
    #[error("polytope has no constraints")]
    EmptyPolytope,
    #[error("constraint over {found} places, net has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("scaled coefficient {0} does not fit an arc weight")]
    WeightOverflow(BigInt),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyRel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl PolyRel {
    pub fn symbol(self) -> &'static str {
        match self {
            PolyRel::Le => "<=",
            PolyRel::Lt => "<",
            PolyRel::Ge => ">=",
            PolyRel::Gt => ">",
            PolyRel::Eq => "=",
        }
    }
}

/// `coeffs · m rel rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolytopeConstraint {
    pub coeffs: Vec<Rat>,
    pub rel: PolyRel,
    pub rhs: Rat,
}

impl PolytopeConstraint {
    pub fn holds(&self, x: &[Rat]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.rel {
            PolyRel::Le => lhs <= self.rhs,
            PolyRel::Lt => lhs < self.rhs,
            PolyRel::Ge => lhs >= self.rhs,
            PolyRel::Gt => lhs > self.rhs,
            PolyRel::Eq => lhs == self.rhs,
        }
    }
}

/// A nonempty conjunction of constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolytope {
    constraints: Vec<PolytopeConstraint>,
}

impl ConvexPolytope {
    pub fn new(constraints: Vec<PolytopeConstraint>) -> Result<Self, Set2SetError> {
        let dim = constraints
            .first()
            .ok_or(Set2SetError::EmptyPolytope)?
            .coeffs
            .len();
        if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != dim) {
            return Err(Set2SetError::DimensionMismatch {
                expected: dim,
                found: c.coeffs.len(),
            });
        }
        Ok(ConvexPolytope { constraints })
    }

    /// `{m}`, as a pair of `>=` constraints per place.
    pub fn point(m: &Marking) -> Self {
        let n = m.len();
        let mut constraints = Vec::with_capacity(2 * n);
        for p in 0..n {
            let mut e = vec![Rat::zero(); n];
            e[p] = Rat::from_integer(1.into());
            constraints.push(PolytopeConstraint {
                coeffs: e.clone(),
                rel: PolyRel::Ge,
                rhs: m[p].clone(),
            });
            constraints.push(PolytopeConstraint {
                coeffs: e.iter().map(|v| -v).collect(),
                rel: PolyRel::Ge,
                rhs: -&m[p],
            });
        }
        ConvexPolytope { constraints }
    }

    pub fn constraints(&self) -> &[PolytopeConstraint] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.constraints[0].coeffs.len()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }
}

/// `coeffs · x >= bound`, or `>` when `strict`, with integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedConstraint {
    pub coeffs: Vec<BigInt>,
    pub bound: BigInt,
    pub strict: bool,
}

impl NormalizedConstraint {
    pub fn holds(&self, x: &[Rat]) -> bool {
        let lhs: Rat = self
            .coeffs
            .iter()
            .zip(x)
            .map(|(a, v)| Rat::from_integer(a.clone()) * v)
            .sum();
        let bound = Rat::from_integer(self.bound.clone());
        if self.strict {
            lhs > bound
        } else {
            lhs >= bound
        }
    }
}

fn scaled(coeffs: &[Rat], rhs: &Rat, sign: i64, strict: bool) -> NormalizedConstraint {
    let scale = Rat::from_integer(lcm_denominators(coeffs.iter().chain([rhs])) * sign);
    let int = |r: &Rat| (r * &scale).to_integer();
    NormalizedConstraint {
        coeffs: coeffs.iter().map(int).collect(),
        bound: int(rhs),
        strict,
    }
}

/// Rewrites one constraint as one or two `>=`/`>` constraints with integer
/// coefficients.
pub fn normalize(c: &PolytopeConstraint) -> Vec<NormalizedConstraint> {
    match c.rel {
        PolyRel::Ge => vec![scaled(&c.coeffs, &c.rhs, 1, false)],
        PolyRel::Gt => vec![scaled(&c.coeffs, &c.rhs, 1, true)],
        PolyRel::Le => vec![scaled(&c.coeffs, &c.rhs, -1, false)],
        PolyRel::Lt => vec![scaled(&c.coeffs, &c.rhs, -1, true)],
        PolyRel::Eq => vec![
            scaled(&c.coeffs, &c.rhs, 1, false),
            scaled(&c.coeffs, &c.rhs, -1, false),
        ],
    }
}

pub fn normalize_all(p: &ConvexPolytope) -> Vec<NormalizedConstraint> {
    p.constraints.iter().flat_map(normalize).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlRole {
    /// Positive contributions.
    Pos,
    /// Negative contributions.
    Neg,
    /// Holds the unit token that pays the bound.
    Geq,
    /// Witness of a strictly positive surplus.
    GtWitness,
    /// Holds the unit token only removable in presence of a witness.
    Gt,
}

impl ControlRole {
    const ALL: [ControlRole; 5] = [
        ControlRole::Pos,
        ControlRole::Neg,
        ControlRole::Geq,
        ControlRole::GtWitness,
        ControlRole::Gt,
    ];

    fn suffix(self) -> &'static str {
        match self {
            ControlRole::Pos => "pos",
            ControlRole::Neg => "neg",
            ControlRole::Geq => "geq",
            ControlRole::GtWitness => "gtw",
            ControlRole::Gt => "gt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlaceRole {
    Original(usize),
    Copy(usize),
    Control {
        gadget: String,
        constraint: usize,
        role: ControlRole,
    },
}

fn weight(v: &BigInt) -> Result<u64, Set2SetError> {
    v.abs()
        .to_u64()
        .ok_or_else(|| Set2SetError::WeightOverflow(v.clone()))
}

/// Adds the gadget for `constraints` over the places `shared` of `builder`,
/// returning the initial control marking and the role of each new place.
fn add_gadget(
    builder: &mut NetBuilder,
    prefix: &str,
    constraints: &[NormalizedConstraint],
    shared: &[usize],
) -> Result<Vec<(usize, Rat, PlaceRole)>, Set2SetError> {
    let mut controls = Vec::new();
    let mut slots = Vec::new();
    for (j, c) in constraints.iter().enumerate() {
        if c.coeffs.len() != shared.len() {
            return Err(Set2SetError::DimensionMismatch {
                expected: shared.len(),
                found: c.coeffs.len(),
            });
        }
        let mut ids = [0usize; 5];
        for (k, role) in ControlRole::ALL.into_iter().enumerate() {
            ids[k] = builder.add_place(format!("{prefix}.{j}.{}", role.suffix()));
            let initial = match role {
                ControlRole::Geq => !c.bound.is_zero(),
                ControlRole::Gt => c.strict,
                _ => false,
            };
            controls.push((
                ids[k],
                Rat::from_integer(BigInt::from(u8::from(initial))),
                PlaceRole::Control {
                    gadget: prefix.to_string(),
                    constraint: j,
                    role,
                },
            ));
        }
        slots.push(ids);
    }
    let names: Vec<String> = builder.place_names().to_vec();
    for (i, &p) in shared.iter().enumerate() {
        let t = builder.add_transition(format!("{prefix}.drain.{}", names[p]));
        builder.add_input(t, p, 1);
        for (c, ids) in constraints.iter().zip(&slots) {
            let a = &c.coeffs[i];
            if a.is_positive() {
                builder.add_output(t, ids[0], weight(a)?);
            } else if a.is_negative() {
                builder.add_output(t, ids[1], weight(a)?);
            }
        }
    }
    for (j, (c, ids)) in constraints.iter().zip(&slots).enumerate() {
        let [pos, neg, geq, gtw, gt] = *ids;
        let t = builder.add_transition(format!("{prefix}.{j}.cancel"));
        builder.add_input(t, pos, 1);
        builder.add_input(t, neg, 1);
        if !c.bound.is_zero() {
            let t = builder.add_transition(format!("{prefix}.{j}.pay"));
            builder.add_input(t, geq, 1);
            let into = if c.bound.is_positive() { neg } else { pos };
            builder.add_output(t, into, weight(&c.bound)?);
        }
        let t = builder.add_transition(format!("{prefix}.{j}.surplus"));
        builder.add_output(t, neg, 1);
        builder.add_output(t, gtw, 1);
        if c.strict {
            let t = builder.add_transition(format!("{prefix}.{j}.test"));
            builder.add_input(t, gt, 1);
            builder.add_input(t, gtw, 1);
            builder.add_output(t, gtw, 1);
        }
        let t = builder.add_transition(format!("{prefix}.{j}.lossy"));
        builder.add_input(t, gtw, 1);
    }
    Ok(controls)
}

/// A stand-alone gadget net: the shared places come first, in order, then
/// five control places per constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub net: PetriNet,
    /// Initial control marking, over the control places only.
    pub controls: Vec<Rat>,
    pub roles: Vec<PlaceRole>,
}

impl Gadget {
    /// The marking `(x, y)`.
    pub fn initial(&self, x: &[Rat]) -> Marking {
        let mut v = x.to_vec();
        v.extend(self.controls.iter().cloned());
        Marking::new(v).expect("nonnegative input")
    }
}

/// Builds the gadget for `constraints` over fresh places `shared_names`:
/// the conjunction holds at `x` iff `(x, y)` can reach zero.
pub fn build_gadget(constraints: &[NormalizedConstraint], shared_names: &[String]) -> Result<Gadget, Set2SetError> {
    let mut builder = NetBuilder::new();
    let shared: Vec<usize> = shared_names.iter().map(|n| builder.add_place(n.clone())).collect();
    let controls = add_gadget(&mut builder, "g", constraints, &shared)?;
    let roles = (0..shared.len())
        .map(PlaceRole::Original)
        .chain(controls.iter().map(|c| c.2.clone()))
        .collect();
    Ok(Gadget {
        net: builder.build()?,
        controls: controls.into_iter().map(|c| c.1).collect(),
        roles,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub net: PetriNet,
    pub source: Marking,
    pub target: Marking,
    /// Role of every place of `net`, indexed like its places.
    pub roles: Vec<PlaceRole>,
}

/// Extends `net` with guessing transitions, a copy of its places checked
/// against `a`, and a check of its places against `b`, so that some
/// marking of `a` reaches some marking of `b` iff `source` reaches
/// `target` (the zero marking) in the result.
pub fn compile_query(net: &PetriNet, a: &ConvexPolytope, b: &ConvexPolytope) -> Result<CompiledQuery, Set2SetError> {
    let n = net.num_places();
    for p in [a, b] {
        if p.dim() != n {
            return Err(Set2SetError::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
    }
    let mut builder = NetBuilder::new();
    let originals: Vec<usize> = net.places().iter().map(|p| builder.add_place(p.clone())).collect();
    let copies: Vec<usize> = net
        .places()
        .iter()
        .map(|p| builder.add_place(format!("copy.{p}")))
        .collect();
    for (t, name) in net.transitions().iter().enumerate() {
        let id = builder.add_transition(name.clone());
        for p in 0..n {
            builder.add_input(id, originals[p], net.input_weight(p, t));
            builder.add_output(id, originals[p], net.output_weight(p, t));
        }
    }
    for (p, name) in net.places().iter().enumerate() {
        let id = builder.add_transition(format!("guess.{name}"));
        builder.add_output(id, originals[p], 1);
        builder.add_output(id, copies[p], 1);
    }
    let mut controls = add_gadget(&mut builder, "A", &normalize_all(a), &copies)?;
    controls.extend(add_gadget(&mut builder, "B", &normalize_all(b), &originals)?);

    let mut roles: Vec<PlaceRole> = (0..n).map(PlaceRole::Original).chain((0..n).map(PlaceRole::Copy)).collect();
    let mut source = vec![Rat::zero(); 2 * n];
    for (_, y, role) in controls {
        source.push(y);
        roles.push(role);
    }
    let net = builder.build()?;
    let size = net.num_places();
    Ok(CompiledQuery {
        net,
        source: Marking::new(source)?,
        target: Marking::zeros(size),
        roles,
    })
}
