use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qmt_core::frame_algebra::{Frame, DEFAULT_MAX_FRAME};
use qmt_core::json::{partition_from_json, partition_to_json, EvidenceDoc};
use qmt_core::{MassFunction, Network, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A model file: frame, node partitions, tree edges and optional evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub frame: Vec<String>,
    pub nodes: BTreeMap<String, Vec<Vec<String>>>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<EvidenceDoc>,
}

impl ModelDocument {
    pub fn parse(text: &str) -> std::result::Result<ModelDocument, String> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ));
        }
        Ok(doc)
    }

    pub fn network(&self) -> Result<Network> {
        let frame = Frame::with_limit(&self.frame, DEFAULT_MAX_FRAME)?;
        let nodes = self
            .nodes
            .iter()
            .map(|(id, blocks)| Ok((id.clone(), partition_from_json(&frame, blocks)?)))
            .collect::<Result<Vec<_>>>()?;
        Network::new(&frame, nodes, self.edges.iter().map(|[a, b]| (a.clone(), b.clone())))
    }

    /// Embedded evidence resolved against `net`, in file order.
    pub fn evidence_items(&self, net: &Network) -> Result<Vec<(String, MassFunction)>> {
        self.evidence.iter().map(|d| Ok((d.node.clone(), d.to_mass(net)?))).collect()
    }

    /// Rebuilds the document from its parsed form: blocks in canonical
    /// order, labels in frame order, edges as sorted `(min, max)` pairs.
    pub fn canonicalize(&self) -> Result<ModelDocument> {
        let net = self.network()?;
        let evidence = self
            .evidence_items(&net)?
            .iter()
            .map(|(id, m)| Ok(EvidenceDoc::new(net.partition(net.index_of(id)?), id, m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelDocument {
            schema_version: SCHEMA_VERSION,
            frame: net.frame().labels().to_vec(),
            nodes: net
                .ids()
                .iter()
                .zip(net.partitions())
                .map(|(id, p)| (id.clone(), partition_to_json(p)))
                .collect(),
            edges: net
                .edges()
                .iter()
                .map(|&(i, j)| [net.id(i).to_string(), net.id(j).to_string()])
                .collect(),
            evidence,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        crate::output::to_canonical_json(self)
    }
}
