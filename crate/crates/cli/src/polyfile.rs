//! Polytope files: one constraint per line, such as `2*p1 - 1/2*p3 >= -1`,
//! or `point p1:2 p3:1/2` for a single marking (unlisted places zero).

use std::collections::BTreeMap;

use locsep::rat::parse_rat;
use locsep::{ConvexPolytope, Marking, PolyRel, PolytopeConstraint, Rat};
use num_traits::{One, Signed, Zero};

use crate::error::FormatError;
use crate::netfile::{parse_entries, parse_marking_value};

const RELATIONS: [(&str, PolyRel); 5] = [
    ("<=", PolyRel::Le),
    (">=", PolyRel::Ge),
    ("<", PolyRel::Lt),
    (">", PolyRel::Gt),
    ("=", PolyRel::Eq),
];

fn split_relation(line: usize, text: &str) -> Result<(&str, PolyRel, &str), FormatError> {
    let at = text
        .find(['<', '>', '='])
        .ok_or_else(|| FormatError::syntax(line, "missing relation"))?;
    let (symbol, rel) = RELATIONS
        .iter()
        .find(|(s, _)| text[at..].starts_with(s))
        .expect("some relation starts at a relation character");
    let rhs = &text[at + symbol.len()..];
    if rhs.contains(['<', '>', '=']) {
        return Err(FormatError::syntax(line, "more than one relation"));
    }
    Ok((&text[..at], *rel, rhs))
}

fn parse_sum(line: usize, index: &BTreeMap<&str, usize>, text: &str) -> Result<Vec<Rat>, FormatError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(FormatError::syntax(line, "empty left-hand side"));
    }
    let mut coeffs = vec![Rat::zero(); index.len()];
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let (negative, body) = match rest.as_bytes()[0] {
            b'-' => (true, &rest[1..]),
            b'+' => (false, &rest[1..]),
            _ if rest.len() == compact.len() => (false, rest),
            _ => unreachable!("terms end at a sign"),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (coeff, place) = match term.split_once('*') {
            Some((c, p)) => (parse_rat(c).map_err(|e| FormatError::from_rat(line, e))?, p),
            None => (Rat::one(), term),
        };
        if coeff.is_negative() {
            return Err(FormatError::syntax(line, "sign inside a coefficient"));
        }
        let &p = index.get(place).ok_or_else(|| FormatError::UnknownId {
            line,
            id: place.to_string(),
        })?;
        coeffs[p] += if negative { -coeff } else { coeff };
    }
    Ok(coeffs)
}

pub fn parse_polytope(text: &str, places: &[String]) -> Result<ConvexPolytope, FormatError> {
    let index: BTreeMap<&str, usize> = places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let mut constraints = Vec::new();
    let mut last = 0;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("point") {
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return Err(FormatError::syntax(line, "expected `point p:value ...`"));
            }
            let mut values = vec![Rat::zero(); places.len()];
            for (p, v) in parse_entries(line, &index, rest.split_whitespace(), |v| parse_marking_value(line, v))? {
                values[p] = v;
            }
            let m = Marking::new(values).expect("checked nonnegative");
            constraints.extend(ConvexPolytope::point(&m).constraints().iter().cloned());
            continue;
        }
        let (lhs, rel, rhs) = split_relation(line, content)?;
        let coeffs = parse_sum(line, &index, lhs)?;
        let rhs = parse_rat(rhs.trim()).map_err(|e| FormatError::from_rat(line, e))?;
        constraints.push(PolytopeConstraint { coeffs, rel, rhs });
    }
    ConvexPolytope::new(constraints).map_err(|e| FormatError::syntax(last.max(1), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use locsep::rat::{frac, int};

    fn places() -> Vec<String> {
        ["p1", "p2", "p3"].map(String::from).to_vec()
    }

    #[test]
    fn linear_constraint() {
        let p = parse_polytope("2*p1 - 1/2*p3 + p2 - p2 >= -1\n", &places()).unwrap();
        assert_eq!(
            p.constraints(),
            &[PolytopeConstraint {
                coeffs: vec![int(2), int(0), frac(-1, 2)],
                rel: PolyRel::Ge,
                rhs: int(-1),
            }]
        );
    }

    #[test]
    fn all_relations() {
        let p = parse_polytope("p1 <= 1\np1 < 1\n-p1 > 0 # comment\np2 = 3/2\n", &places()).unwrap();
        let rels: Vec<PolyRel> = p.constraints().iter().map(|c| c.rel).collect();
        assert_eq!(rels, vec![PolyRel::Le, PolyRel::Lt, PolyRel::Gt, PolyRel::Eq]);
        assert_eq!(p.constraints()[2].coeffs[0], int(-1));
    }

    #[test]
    fn point_is_a_singleton() {
        let p = parse_polytope("point p1:2 p3:1/2\n", &places()).unwrap();
        assert!(p.contains(&[int(2), int(0), frac(1, 2)]));
        assert!(!p.contains(&[int(2), int(0), int(0)]));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_polytope("p9 >= 1", &places()), Err(FormatError::UnknownId { line: 1, .. })));
        assert!(parse_polytope("p1 >= 2/4", &places()).is_err());
        assert!(parse_polytope("p1 p2 >= 1", &places()).is_err());
        assert!(parse_polytope("# nothing\n", &places()).is_err());
        assert!(parse_polytope("p1 >= 1 >= 0", &places()).is_err());
    }
}
