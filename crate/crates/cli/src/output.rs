use serde::Serialize;
use serde_json::{json, Value};

use qmt_core::json::{block_set_to_json, coarse_mass_to_json, round_sig};
use qmt_core::Marginal;

/// Belief tables are printed only up to this many blocks.
pub const MAX_TABLE_BLOCKS: usize = 12;

/// Pretty JSON, object keys sorted, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // `Value` maps are ordered, so a round trip through it sorts keys.
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn marginal_json(m: &Marginal) -> Value {
    let mut out = json!({ "mass": coarse_mass_to_json(&m.partition, &m.mass) });
    if m.partition.len() <= MAX_TABLE_BLOCKS {
        let mut sets: Vec<u64> = (0..1u64 << m.partition.len()).collect();
        sets.sort_by_key(|&b| (b.count_ones(), b));
        let table: Vec<Value> = sets
            .into_iter()
            .map(|b| {
                json!({
                    "blocks": block_set_to_json(&m.partition, b),
                    "belief": round_sig(m.belief(b)),
                })
            })
            .collect();
        out["belief"] = Value::Array(table);
    }
    out
}
