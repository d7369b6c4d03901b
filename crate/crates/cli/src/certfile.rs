//! Certificate files: JSON with sorted keys, rationals as canonical
//! strings, markings and atom vectors listing nonzero entries by place id.

use std::collections::BTreeMap;

use locsep::rat::{format_rat, parse_rat};
use locsep::{Annotation, Atom, AtomRel, Certificate, Clause, Direction, DnfFormula, Marking, PetriNet, Rat, TransitionSet};
use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::FormatError;
use crate::netfile::net_hash;

pub const VERSION: u64 = 1;

/// A certificate as stored on disk, before resolving transition ids
/// against a net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateFile {
    pub net_sha256: String,
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub source: Marking,
    pub target: Marking,
    pub formula: DnfFormula,
    /// `(dir, transition id, from, to)`.
    pub annotations: Vec<(Direction, String, usize, usize)>,
}

fn bad(msg: impl Into<String>) -> FormatError {
    FormatError::Certificate(msg.into())
}

fn vector_json(places: &[String], v: &[Rat]) -> Value {
    let entries: Map<String, Value> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(p, x)| (places[p].clone(), Value::String(format_rat(x))))
        .collect();
    Value::Object(entries)
}

impl CertificateFile {
    pub fn from_certificate(net: &PetriNet, cert: &Certificate) -> Self {
        CertificateFile {
            net_sha256: net_hash(net),
            places: net.places().to_vec(),
            transitions: cert.transitions.iter().map(|&t| net.transitions()[t].clone()).collect(),
            source: cert.source.clone(),
            target: cert.target.clone(),
            formula: cert.formula.clone(),
            annotations: cert
                .annotations
                .iter()
                .map(|a| (a.dir, net.transitions()[a.transition].clone(), a.from, a.to))
                .collect(),
        }
    }

    /// Resolves ids against `net`, which must have the same places.
    pub fn resolve(&self, net: &PetriNet) -> Result<Certificate, FormatError> {
        if self.places != net.places() {
            return Err(bad("places differ from the net's"));
        }
        let lookup = |id: &str| net.transition_index(id).ok_or_else(|| bad(format!("unknown transition `{id}`")));
        let transitions = self.transitions.iter().map(|t| lookup(t)).collect::<Result<TransitionSet, _>>()?;
        let annotations = self
            .annotations
            .iter()
            .map(|(dir, t, from, to)| {
                Ok(Annotation {
                    dir: *dir,
                    transition: lookup(t)?,
                    from: *from,
                    to: *to,
                })
            })
            .collect::<Result<_, FormatError>>()?;
        Ok(Certificate {
            formula: self.formula.clone(),
            transitions,
            source: self.source.clone(),
            target: self.target.clone(),
            annotations,
        })
    }

    pub fn to_json(&self) -> String {
        let places = &self.places;
        let clauses: Vec<Value> = self
            .formula
            .clauses()
            .iter()
            .map(|c| {
                Value::Array(
                    c.atoms
                        .iter()
                        .map(|a| {
                            json!({
                                "u": vector_json(places, &a.u),
                                "v": vector_json(places, &a.v),
                                "rel": match a.rel { AtomRel::Le => "le", AtomRel::Lt => "lt" },
                            })
                        })
                        .collect(),
                )
            })
            .collect();
        let annotations: Vec<Value> = self
            .annotations
            .iter()
            .map(|(dir, t, from, to)| json!({"dir": dir.as_str(), "t": t, "from": from, "to": to}))
            .collect();
        let doc = json!({
            "version": VERSION,
            "net_sha256": self.net_sha256,
            "places": places,
            "u": self.transitions,
            "source": vector_json(places, self.source.values()),
            "target": vector_json(places, self.target.values()),
            "clauses": clauses,
            "annotations": annotations,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let obj = doc.as_object().ok_or_else(|| bad("top level is not an object"))?;
        const KEYS: [&str; 8] = ["annotations", "clauses", "net_sha256", "places", "source", "target", "u", "version"];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(bad(format!("unknown key `{k}`")));
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| bad(format!("missing `{k}`")));
        if field("version")?.as_u64() != Some(VERSION) {
            return Err(bad("unsupported version"));
        }
        let net_sha256 = str_of(field("net_sha256")?, "net_sha256")?.to_string();
        let places = strings(field("places")?, "places")?;
        let index: BTreeMap<&str, usize> = places.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        if index.len() != places.len() {
            return Err(bad("duplicate place"));
        }
        let vector = |v: &Value, what: &str| -> Result<Vec<Rat>, FormatError> {
            let entries = v.as_object().ok_or_else(|| bad(format!("`{what}` is not an object")))?;
            let mut out = vec![Rat::zero(); places.len()];
            for (p, x) in entries {
                let &i = index.get(p.as_str()).ok_or_else(|| bad(format!("unknown place `{p}` in `{what}`")))?;
                let s = str_of(x, what)?;
                out[i] = parse_rat(s).map_err(|e| bad(e.to_string()))?;
            }
            Ok(out)
        };
        let marking = |k: &str| -> Result<Marking, FormatError> {
            let v = vector(field(k)?, k)?;
            if v.iter().any(Signed::is_negative) {
                return Err(bad(format!("negative entry in `{k}`")));
            }
            Ok(Marking::new(v).expect("checked"))
        };
        let source = marking("source")?;
        let target = marking("target")?;
        let transitions = strings(field("u")?, "u")?;
        let mut clauses = Vec::new();
        for c in array_of(field("clauses")?, "clauses")? {
            let mut atoms = Vec::new();
            for a in array_of(c, "clause")? {
                let a = a.as_object().ok_or_else(|| bad("atom is not an object"))?;
                if a.len() != 3 {
                    return Err(bad("atom must have exactly `u`, `v`, `rel`"));
                }
                let get = |k: &str| a.get(k).ok_or_else(|| bad(format!("atom without `{k}`")));
                let rel = match str_of(get("rel")?, "rel")? {
                    "le" => AtomRel::Le,
                    "lt" => AtomRel::Lt,
                    other => return Err(bad(format!("unknown relation `{other}`"))),
                };
                atoms.push(Atom::new(vector(get("u")?, "u")?, vector(get("v")?, "v")?, rel));
            }
            clauses.push(Clause::new(atoms));
        }
        let formula = DnfFormula::new(clauses).map_err(|e| bad(e.to_string()))?;
        let mut annotations = Vec::new();
        if let Some(list) = obj.get("annotations") {
            for a in array_of(list, "annotations")? {
                let get = |k: &str| a.get(k).ok_or_else(|| bad(format!("annotation without `{k}`")));
                let dir = match str_of(get("dir")?, "dir")? {
                    "fwd" => Direction::Fwd,
                    "bwd" => Direction::Bwd,
                    other => return Err(bad(format!("unknown direction `{other}`"))),
                };
                let index = |k: &str| -> Result<usize, FormatError> {
                    get(k)?
                        .as_u64()
                        .map(|i| i as usize)
                        .ok_or_else(|| bad(format!("`{k}` is not an index")))
                };
                annotations.push((dir, str_of(get("t")?, "t")?.to_string(), index("from")?, index("to")?));
            }
        }
        Ok(CertificateFile {
            net_sha256,
            places,
            transitions,
            source,
            target,
            formula,
            annotations,
        })
    }
}

fn str_of<'a>(v: &'a Value, what: &str) -> Result<&'a str, FormatError> {
    v.as_str().ok_or_else(|| bad(format!("`{what}` is not a string")))
}

fn array_of<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array().ok_or_else(|| bad(format!("`{what}` is not a list")))
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>, FormatError> {
    array_of(v, what)?
        .iter()
        .map(|s| str_of(s, what).map(str::to_string))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use locsep::construct_biseparator;
    use locsep::fixtures::{n1, n1_msrc, n1_mtgt3};

    fn sample() -> (PetriNet, Certificate) {
        let net = n1();
        let cert = construct_biseparator(&net, &net.all_transitions(), &n1_msrc(), &n1_mtgt3()).unwrap();
        (net, cert)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let (net, cert) = sample();
        let file = CertificateFile::from_certificate(&net, &cert);
        let text = file.to_json();
        let parsed = CertificateFile::parse(&text).unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_json(), text);
        assert_eq!(parsed.resolve(&net).unwrap(), cert);
    }

    #[test]
    fn keys_are_sorted() {
        let (net, cert) = sample();
        let text = CertificateFile::from_certificate(&net, &cert).to_json();
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn non_canonical_rationals_rejected() {
        let (net, cert) = sample();
        let text = CertificateFile::from_certificate(&net, &cert).to_json();
        let broken = text.replacen("\"p1\": \"2\"", "\"p1\": \"4/2\"", 1);
        assert_ne!(broken, text);
        assert!(CertificateFile::parse(&broken).is_err());
    }

    #[test]
    fn unknown_transition_fails_to_resolve() {
        let (net, cert) = sample();
        let mut file = CertificateFile::from_certificate(&net, &cert);
        file.transitions.push("t9".into());
        assert!(file.resolve(&net).is_err());
    }
}
