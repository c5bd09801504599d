use std::collections::BTreeMap;

use serde::Serialize;

/// Which production rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Compute a directed-edge message.
    Message,
    /// Compute a node marginal.
    Marginal,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::Message => 1,
            Rule::Marginal => 2,
        }
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

/// Version stamps of the inputs a firing consumed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputStamps {
    pub evidence: u64,
    pub inbound: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiringEvent {
    pub seq: usize,
    pub rule: Rule,
    pub from: String,
    /// Target node of a message; `None` for a marginal.
    pub to: Option<String>,
    pub stamps: InputStamps,
}

/// Ordered record of the rule firings of one propagation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiringLog {
    pub events: Vec<FiringEvent>,
}

impl FiringLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.events.iter().filter(|e| e.rule == rule).count()
    }

    /// `(rule, from, to)` triples, sorted; equal for runs that fired the
    /// same rule instances in any order.
    pub fn multiset(&self) -> Vec<(Rule, String, Option<String>)> {
        let mut v: Vec<_> =
            self.events.iter().map(|e| (e.rule, e.from.clone(), e.to.clone())).collect();
        v.sort();
        v
    }

    /// One JSON object per line, keys sorted.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let v = serde_json::to_value(e).expect("firing event serializes");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub(crate) fn push(&mut self, rule: Rule, from: &str, to: Option<&str>, stamps: InputStamps) {
        self.events.push(FiringEvent {
            seq: self.events.len(),
            rule,
            from: from.to_string(),
            to: to.map(String::from),
            stamps,
        });
    }
}
