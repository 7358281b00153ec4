//! A graph together with a grading, and its JSON document form.

use serde::{Deserialize, Serialize};

use crate::error::{from_json_value, Error, Result};
use crate::grading::{canonical_grading, GradingDoc, TreeGrading};
use crate::graph::WeightedGraph;

#[derive(Clone, Debug)]
pub struct Space {
    pub graph: WeightedGraph,
    pub grading: TreeGrading,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    graph: WeightedGraph,
    #[serde(default)]
    grading: Option<GradingDoc>,
}

impl Space {
    /// Space with the canonical grading.
    pub fn canonical(graph: WeightedGraph) -> Result<Self> {
        let grading = canonical_grading(&graph)?;
        Ok(Space { graph, grading })
    }

    /// Accepts either `{"graph": .., "grading": ..}` (extra keys ignored,
    /// grading optional) or a bare graph document; a missing grading is
    /// replaced by the canonical one. The grading is not validated here.
    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let is_space = value.as_object().is_some_and(|o| o.contains_key("graph"));
        if is_space {
            let doc: SpaceDoc = from_json_value(value)?;
            match doc.grading {
                Some(gd) => {
                    let grading = TreeGrading::from_doc(&doc.graph, &gd)?;
                    Ok(Space {
                        graph: doc.graph,
                        grading,
                    })
                }
                None => Space::canonical(doc.graph),
            }
        } else if value.is_object() {
            Space::canonical(from_json_value(value)?)
        } else {
            Err(Error::input("expected a graph or space JSON object"))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Space::from_json(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "graph": &self.graph,
            "grading": self.grading.to_doc(),
        })
    }
}
