use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::maps::TopologyMap;
use super::{AxiomIndex, FormalTopology, FtopError};

/// One axiom `element ◁ cover` of a finite topology document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomRecord {
    pub element: String,
    pub index: String,
    pub cover: Vec<String>,
}

/// Finite topology as read from a job document. The order lists generating
/// pairs `a ≤ b`; its reflexive-transitive closure is taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTopologySpec {
    pub base: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
    #[serde(default)]
    pub axioms: Vec<AxiomRecord>,
    #[serde(default)]
    pub localised: bool,
}

impl FiniteTopologySpec {
    pub fn build(&self, name: &str) -> Result<FormalTopology<String>, FtopError> {
        let base: BTreeSet<String> = self.base.iter().cloned().collect();
        if base.len() != self.base.len() {
            return Err(FtopError::Malformed("duplicate base element".into()));
        }
        let known = |x: &String| {
            if base.contains(x) {
                Ok(())
            } else {
                Err(FtopError::Malformed(format!("unknown element {x:?}")))
            }
        };
        let n = self.base.len();
        let pos = |x: &String| self.base.iter().position(|y| y == x).unwrap();
        let mut le = vec![vec![false; n]; n];
        for (k, row) in le.iter_mut().enumerate() {
            row[k] = true;
        }
        for (a, b) in &self.order {
            known(a)?;
            known(b)?;
            le[pos(a)][pos(b)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        let mut axioms = Vec::new();
        for ax in &self.axioms {
            known(&ax.element)?;
            for c in &ax.cover {
                known(c)?;
            }
            axioms.push((
                ax.element.clone(),
                AxiomIndex::Label(ax.index.clone()),
                ax.cover.iter().cloned().collect::<BTreeSet<_>>(),
            ));
        }
        let names = self.base.clone();
        Ok(FormalTopology::finite(
            name,
            self.base.clone(),
            move |a, b| {
                match (names.iter().position(|x| x == a), names.iter().position(|x| x == b)) {
                    (Some(i), Some(j)) => le[i][j],
                    _ => false,
                }
            },
            axioms,
            self.localised,
        ))
    }
}

/// A relation between two finite topologies, as a pair list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMapSpec {
    pub relation: Vec<(String, String)>,
}

impl FiniteMapSpec {
    pub fn build(&self, name: &str) -> TopologyMap<String, String> {
        let pairs: BTreeSet<(String, String)> = self.relation.iter().cloned().collect();
        TopologyMap::new(name, move |a: &String, b: &String| pairs.contains(&(a.clone(), b.clone())))
    }
}
