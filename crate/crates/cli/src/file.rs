//! JSON model files.
//!
//! A file holds exactly one of
//!
//! * `graph` + `alphabet` (shared) or `alphabets` (per component) + `measures`,
//! * `tensor`, a 3-level nested array `p[i][j][k]`,
//! * `skew`, a skew-symmetric Volterra coefficient matrix,
//!
//! plus optional named `fixed_sets` (1-based coordinates) and, for graph
//! models, named `presets` that replace the measures.

use std::collections::BTreeMap;
use std::path::Path;

use qso_core::{
    Alphabets, Constraint, FixedSet, Graph, HeredityTensor, Model, QsoOperator, SkewMatrix,
    VertexId,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<VertexId>,
    #[serde(default)]
    pub edges: Vec<[VertexId; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSetSpec {
    pub name: String,
    /// Coordinates that vanish on the set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero: Vec<usize>,
    /// Pairs of coordinates that coincide on the set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equal: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub measures: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabets: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skew: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed_sets: Vec<FixedSetSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub presets: BTreeMap<String, Preset>,
}

/// The operator a file describes.
#[derive(Debug, Clone)]
pub enum System {
    /// Generated from a graph and product measure, or an explicit tensor.
    Quadratic(QsoOperator),
    /// A Volterra operator given by its skew matrix.
    Skew(SkewMatrix),
}

impl System {
    pub fn dim(&self) -> usize {
        match self {
            System::Quadratic(op) => op.dim(),
            System::Skew(a) => a.dim(),
        }
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            System::Quadratic(op) => op.model(),
            System::Skew(_) => None,
        }
    }

    /// Name of coordinate `index` (0-based) for reports.
    pub fn label(&self, index: usize) -> String {
        match self.model() {
            Some(m) => m.space().label(index),
            None => format!("x_{}", index + 1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub system: System,
    pub fixed_sets: Vec<FixedSet>,
    pub preset: Option<String>,
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::File {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Validates the file and builds its operator, with the measures of
    /// `preset` when given.
    pub fn build(&self, preset: Option<&str>, cap: usize) -> Result<Loaded> {
        let kinds = [
            self.graph.is_some(),
            self.tensor.is_some(),
            self.skew.is_some(),
        ];
        if kinds.iter().filter(|&&k| k).count() != 1 {
            return Err(CliError::Input(
                "model file must contain exactly one of `graph`, `tensor` or `skew`".into(),
            ));
        }
        if preset.is_some() && self.graph.is_none() {
            return Err(CliError::Input("presets apply to graph models only".into()));
        }
        let system = if let Some(graph) = &self.graph {
            System::Quadratic(QsoOperator::generated(self.model(graph, preset, cap)?))
        } else if let Some(tensor) = &self.tensor {
            if self.alphabet.is_some() || self.alphabets.is_some() || self.measures.is_some() {
                return Err(CliError::Input(
                    "`alphabet`, `alphabets` and `measures` belong to graph models".into(),
                ));
            }
            let tensor = HeredityTensor::from_nested(tensor.clone())?;
            if tensor.dim() > cap {
                return Err(qso_core::Error::CapExceeded {
                    required: tensor.dim() as u128,
                    cap,
                }
                .into());
            }
            System::Quadratic(QsoOperator::explicit(tensor)?)
        } else {
            System::Skew(SkewMatrix::new(self.skew.clone().unwrap_or_default())?)
        };
        let fixed_sets = self
            .fixed_sets
            .iter()
            .map(|s| fixed_set(s, system.dim()))
            .collect::<Result<_>>()?;
        Ok(Loaded {
            system,
            fixed_sets,
            preset: preset.map(str::to_string),
        })
    }

    fn model(&self, graph: &GraphSpec, preset: Option<&str>, cap: usize) -> Result<Model> {
        let g = Graph::new(
            graph.vertices.iter().copied(),
            graph.edges.iter().map(|e| (e[0], e[1])),
        )?;
        let alphabets = match (&self.alphabet, &self.alphabets) {
            (Some(a), None) => Alphabets::Shared(a.clone()),
            (None, Some(list)) => Alphabets::PerComponent(list.clone()),
            _ => {
                return Err(CliError::Input(
                    "graph models need exactly one of `alphabet` or `alphabets`".into(),
                ))
            }
        };
        let measures = match preset {
            Some(name) => {
                &self
                    .presets
                    .get(name)
                    .ok_or_else(|| {
                        let known: Vec<&str> = self.presets.keys().map(String::as_str).collect();
                        CliError::Input(format!(
                            "unknown preset {name:?}; available: {}",
                            known.join(", ")
                        ))
                    })?
                    .measures
            }
            None => self
                .measures
                .as_ref()
                .ok_or_else(|| CliError::Input("graph models need `measures`".into()))?,
        };
        Ok(Model::new(g, &alphabets, measures.clone(), cap)?)
    }

    /// File describing `model`, with per-component alphabets.
    pub fn from_model(model: &Model) -> Self {
        let graph = model.graph();
        ModelFile {
            graph: Some(GraphSpec {
                vertices: graph.vertices().to_vec(),
                edges: graph.edges().map(|(a, b)| [a, b]).collect(),
            }),
            alphabets: Some(
                model
                    .space()
                    .components()
                    .iter()
                    .map(|c| c.alphabet().to_vec())
                    .collect(),
            ),
            measures: Some(
                model
                    .measure()
                    .parts()
                    .iter()
                    .map(|p| p.weights().to_vec())
                    .collect(),
            ),
            ..ModelFile::default()
        }
    }

    pub fn from_tensor(tensor: &HeredityTensor) -> Self {
        ModelFile {
            tensor: Some(tensor.to_nested()),
            ..ModelFile::default()
        }
    }
}

fn fixed_set(spec: &FixedSetSpec, n: usize) -> Result<FixedSet> {
    let check = |i: usize| {
        if (1..=n).contains(&i) {
            Ok(i - 1)
        } else {
            Err(CliError::Input(format!(
                "fixed set {}: coordinate {i} outside 1..={n}",
                spec.name
            )))
        }
    };
    let mut constraints = Vec::new();
    for &i in &spec.zero {
        constraints.push(Constraint::Zero(check(i)?));
    }
    for &[i, j] in &spec.equal {
        constraints.push(Constraint::Equal(check(i)?, check(j)?));
    }
    Ok(FixedSet::new(spec.name.clone(), constraints))
}
