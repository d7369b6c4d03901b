//! Witness files for reachable pairs.

use locsep::rat::format_rat;
use locsep::{PetriNet, PositiveWitness};
use num_traits::Zero;
use serde_json::{json, Map, Value};

pub fn witness_json(net: &PetriNet, w: &PositiveWitness) -> String {
    let ids = |ts: &mut dyn Iterator<Item = usize>| -> Vec<String> { ts.map(|t| net.transitions()[t].clone()).collect() };
    let x: Map<String, Value> = w
        .x
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(t, v)| (net.transitions()[t].clone(), Value::String(format_rat(v))))
        .collect();
    let doc = json!({
        "support": ids(&mut w.support.iter().copied()),
        "x": x,
        "fwd_order": ids(&mut w.fwd_order.iter().copied()),
        "bwd_order": ids(&mut w.bwd_order.iter().copied()),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}
