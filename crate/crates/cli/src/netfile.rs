//! Line-oriented net files:
//!
//! ```text
//! places p1 p2
//! transition t1
//! in p1:1
//! out p2:2
//! marking src p1:1/2
//! ```
//!
//! `#` starts a comment. Markings list their nonzero entries.

use std::collections::{BTreeMap, BTreeSet};

use locsep::rat::{format_rat, parse_rat};
use locsep::{Marking, PetriNet, Rat};
use num_traits::{Signed, Zero};
use sha2::{Digest, Sha256};

use crate::error::FormatError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetFile {
    pub net: PetriNet,
    /// Named markings, in file order.
    pub markings: Vec<(String, Marking)>,
}

impl NetFile {
    pub fn marking(&self, name: &str) -> Option<&Marking> {
        self.markings.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

fn check_id(line: usize, id: &str) -> Result<(), FormatError> {
    if id.is_empty() || id.contains(':') {
        return Err(FormatError::syntax(line, format!("invalid id `{id}`")));
    }
    Ok(())
}

/// Parses `p:value` entries against `places`.
pub(crate) fn parse_entries<'a, T>(
    line: usize,
    places: &BTreeMap<&str, usize>,
    tokens: impl Iterator<Item = &'a str>,
    mut value: impl FnMut(&str) -> Result<T, FormatError>,
) -> Result<Vec<(usize, T)>, FormatError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for tok in tokens {
        let (id, val) = tok
            .split_once(':')
            .ok_or_else(|| FormatError::syntax(line, format!("expected `place:value`, found `{tok}`")))?;
        let &p = places.get(id).ok_or_else(|| FormatError::UnknownId {
            line,
            id: id.to_string(),
        })?;
        if !seen.insert(p) {
            return Err(FormatError::syntax(line, format!("place `{id}` listed twice")));
        }
        out.push((p, value(val)?));
    }
    Ok(out)
}

pub(crate) fn parse_marking_value(line: usize, text: &str) -> Result<Rat, FormatError> {
    let v = parse_rat(text).map_err(|e| FormatError::from_rat(line, e))?;
    if v.is_negative() {
        return Err(FormatError::NegativeValue {
            line,
            text: text.to_string(),
        });
    }
    Ok(v)
}

struct TransitionBlock {
    name: String,
    inputs: Vec<(usize, u64)>,
    outputs: Vec<(usize, u64)>,
}

pub fn parse_net(text: &str) -> Result<NetFile, FormatError> {
    let mut places: Option<Vec<String>> = None;
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut blocks: Vec<TransitionBlock> = Vec::new();
    let mut markings: Vec<(String, Vec<(usize, Rat)>)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        if keyword != "places" && places.is_none() {
            return Err(FormatError::syntax(line, "`places` must come first"));
        }
        match keyword {
            "places" => {
                if places.is_some() {
                    return Err(FormatError::syntax(line, "`places` given twice"));
                }
                let names: Vec<String> = tokens.map(str::to_string).collect();
                for name in &names {
                    check_id(line, name)?;
                    if names.iter().filter(|n| *n == name).count() > 1 {
                        return Err(FormatError::DuplicateId {
                            line,
                            id: name.clone(),
                        });
                    }
                }
                places = Some(names);
                index = places
                    .as_ref()
                    .expect("just set")
                    .iter()
                    .enumerate()
                    .map(|(i, n)| (n.as_str(), i))
                    .collect();
            }
            "transition" => {
                let name = tokens.next().ok_or_else(|| FormatError::syntax(line, "missing transition id"))?;
                if tokens.next().is_some() {
                    return Err(FormatError::syntax(line, "trailing tokens after transition id"));
                }
                check_id(line, name)?;
                if blocks.iter().any(|b| b.name == name) || index.contains_key(name) {
                    return Err(FormatError::DuplicateId {
                        line,
                        id: name.to_string(),
                    });
                }
                blocks.push(TransitionBlock {
                    name: name.to_string(),
                    inputs: Vec::new(),
                    outputs: Vec::new(),
                });
            }
            "in" | "out" => {
                let block = blocks
                    .last_mut()
                    .ok_or_else(|| FormatError::syntax(line, format!("`{keyword}` outside a transition")))?;
                let entries = parse_entries(line, &index, tokens, |w| {
                    w.bytes()
                        .all(|b| b.is_ascii_digit())
                        .then(|| w.parse::<u64>().ok())
                        .flatten()
                        .ok_or_else(|| FormatError::syntax(line, format!("weight `{w}` is not a natural number")))
                })?;
                let arcs = if keyword == "in" { &mut block.inputs } else { &mut block.outputs };
                for (p, w) in entries {
                    if arcs.iter().any(|&(q, _)| q == p) {
                        return Err(FormatError::syntax(line, "arc given twice"));
                    }
                    arcs.push((p, w));
                }
            }
            "marking" => {
                let name = tokens.next().ok_or_else(|| FormatError::syntax(line, "missing marking name"))?;
                check_id(line, name)?;
                if markings.iter().any(|(n, _)| n == name) {
                    return Err(FormatError::DuplicateId {
                        line,
                        id: name.to_string(),
                    });
                }
                let entries = parse_entries(line, &index, tokens, |v| parse_marking_value(line, v))?;
                markings.push((name.to_string(), entries));
            }
            other => return Err(FormatError::syntax(line, format!("unknown keyword `{other}`"))),
        }
    }
    let places = places.ok_or_else(|| FormatError::syntax(text.lines().count().max(1), "missing `places`"))?;
    let np = places.len();
    let nt = blocks.len();
    let mut f_minus = vec![vec![0u64; nt]; np];
    let mut f_plus = vec![vec![0u64; nt]; np];
    for (t, b) in blocks.iter().enumerate() {
        for &(p, w) in &b.inputs {
            f_minus[p][t] = w;
        }
        for &(p, w) in &b.outputs {
            f_plus[p][t] = w;
        }
    }
    let net = PetriNet::new(places, blocks.into_iter().map(|b| b.name).collect(), f_minus, f_plus)
        .map_err(|e| FormatError::syntax(0, e.to_string()))?;
    let markings = markings
        .into_iter()
        .map(|(name, entries)| {
            let mut values = vec![Rat::zero(); np];
            for (p, v) in entries {
                values[p] = v;
            }
            (name, Marking::new(values).expect("checked nonnegative"))
        })
        .collect();
    Ok(NetFile { net, markings })
}

fn arc_line(keyword: &str, net: &PetriNet, weights: impl Fn(usize) -> u64) -> Option<String> {
    let entries: Vec<String> = (0..net.num_places())
        .filter(|&p| weights(p) > 0)
        .map(|p| format!("{}:{}", net.places()[p], weights(p)))
        .collect();
    (!entries.is_empty()).then(|| format!("{keyword} {}\n", entries.join(" ")))
}

pub fn marking_line(name: &str, places: &[String], m: &Marking) -> String {
    let mut line = format!("marking {name}");
    for (p, v) in m.values().iter().enumerate() {
        if !v.is_zero() {
            line += &format!(" {}:{}", places[p], format_rat(v));
        }
    }
    line.push('\n');
    line
}

/// Canonical text of `net` and `markings`.
pub fn serialize_net(net: &PetriNet, markings: &[(String, Marking)]) -> String {
    let mut out = String::from("places");
    for p in net.places() {
        out.push(' ');
        out += p;
    }
    out.push('\n');
    for (t, name) in net.transitions().iter().enumerate() {
        out += &format!("transition {name}\n");
        out += &arc_line("in", net, |p| net.input_weight(p, t)).unwrap_or_default();
        out += &arc_line("out", net, |p| net.output_weight(p, t)).unwrap_or_default();
    }
    for (name, m) in markings {
        out += &marking_line(name, net.places(), m);
    }
    out
}

/// SHA-256 of the canonical text of the net structure, markings excluded.
pub fn net_hash(net: &PetriNet) -> String {
    hex::encode(Sha256::digest(serialize_net(net, &[]).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use locsep::fixtures::{n1, n1_msrc};

    const N1: &str = include_str!("../tests/data/n1.net");

    #[test]
    fn shipped_fixture_matches_running_example() {
        let file = parse_net(N1).unwrap();
        assert_eq!(file.net, n1());
        assert_eq!(file.marking("msrc"), Some(&n1_msrc()));
    }

    #[test]
    fn round_trip() {
        let file = parse_net(N1).unwrap();
        let text = serialize_net(&file.net, &file.markings);
        let again = parse_net(&text).unwrap();
        assert_eq!(again, file);
        assert_eq!(serialize_net(&again.net, &again.markings), text);
    }

    #[test]
    fn unknown_place_is_reported_with_line() {
        let err = parse_net("places p1\ntransition t\nin p9:1\n").unwrap_err();
        assert_eq!(
            err,
            FormatError::UnknownId {
                line: 3,
                id: "p9".into()
            }
        );
    }

    #[test]
    fn non_canonical_value_rejected() {
        let err = parse_net("places p1\nmarking m p1:2/4\n").unwrap_err();
        assert!(matches!(err, FormatError::NonCanonicalRational { line: 2, .. }));
    }

    #[test]
    fn negative_and_duplicate_rejected() {
        assert!(matches!(
            parse_net("places p1\nmarking m p1:-1\n").unwrap_err(),
            FormatError::NegativeValue { line: 2, .. }
        ));
        assert!(matches!(
            parse_net("places p1 p1\n").unwrap_err(),
            FormatError::DuplicateId { line: 1, .. }
        ));
        assert!(matches!(
            parse_net("places p1\ntransition t\ntransition t\n").unwrap_err(),
            FormatError::DuplicateId { line: 3, .. }
        ));
        assert!(matches!(
            parse_net("places p1\ntransition t\nin p1:1/2\n").unwrap_err(),
            FormatError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn hash_ignores_markings_and_comments() {
        let file = parse_net(N1).unwrap();
        let bare = parse_net(&serialize_net(&file.net, &[])).unwrap();
        assert_eq!(net_hash(&file.net), net_hash(&bare.net));
        assert_eq!(net_hash(&file.net).len(), 64);
    }
}
