//! Graphs, their maximal connected components, configuration spaces and
//! product measures.
//!
//! Indexing conventions used everywhere else in the crate:
//!
//! * components are ordered by their smallest vertex identifier, vertices
//!   inside a component ascend;
//! * a configuration of a component is a mixed-radix number whose digits are
//!   the symbol indices of its vertices, first vertex most significant;
//! * a cell is a tuple of component configurations and its index is again a
//!   mixed-radix number with the first component most significant.
//!
//! For two single-vertex components over `{A, a}` this gives the order
//! `(A,A), (A,a), (a,A), (a,a)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Default upper bound on the number of cells of a configuration space.
pub const DEFAULT_CELL_CAP: usize = 4096;

/// Weights at or below this value are rejected.
pub const MIN_WEIGHT: f64 = 1e-12;

/// Accepted deviation of a weight table's sum from 1 before renormalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Finite simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl Graph {
    /// Builds a graph, rejecting loops, repeated edges and unknown endpoints.
    /// Edges are unordered; `(2, 1)` after `(1, 2)` counts as a repeat.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertices: Vec<VertexId> = vertices.into_iter().collect();
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            if v == 0 {
                return Err(Error::InvalidVertex(v));
            }
            if !seen.insert(v) {
                return Err(Error::DuplicateVertex(v));
            }
        }
        let mut edge_set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.contains(&u) || !seen.contains(&v) {
                return Err(Error::UnknownVertex(u, v));
            }
            if !edge_set.insert((u.min(v), u.max(v))) {
                return Err(Error::MultipleEdge(u, v));
            }
        }
        Ok(Self {
            vertices,
            edges: edge_set,
        })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Edges with the smaller endpoint first.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Maximal connected vertex sets of `graph` in canonical order: each set
/// ascending, sets sorted by their smallest vertex.
pub fn connected_components(graph: &Graph) -> Vec<Vec<VertexId>> {
    let mut sorted = graph.vertices.clone();
    sorted.sort_unstable();
    let position: BTreeMap<VertexId, usize> =
        sorted.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut sets = DisjointSets::new(sorted.len());
    for (u, v) in graph.edges() {
        sets.union(position[&u], position[&v]);
    }
    let mut groups: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for (i, &v) in sorted.iter().enumerate() {
        let root = sets.find(i);
        groups.entry(root).or_default().push(v);
    }
    // roots are the smallest member's position, so BTreeMap order is canonical
    groups.into_values().collect()
}

/// Alphabet assignment for a model: one alphabet for every component, or one
/// per component in canonical component order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alphabets {
    Shared(Vec<String>),
    PerComponent(Vec<Vec<String>>),
}

impl Alphabets {
    pub fn shared<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Self {
        Alphabets::Shared(symbols.into_iter().map(Into::into).collect())
    }
}

/// A maximal connected component together with its own alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    vertices: Vec<VertexId>,
    alphabet: Vec<String>,
    configurations: usize,
}

impl Component {
    fn new(index: usize, vertices: Vec<VertexId>, alphabet: Vec<String>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::EmptyAlphabet {
                component: index + 1,
            });
        }
        let mut seen = BTreeSet::new();
        for s in &alphabet {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol {
                    component: index + 1,
                    symbol: s.clone(),
                });
            }
        }
        let configurations = checked_pow(alphabet.len(), vertices.len()).unwrap_or(usize::MAX);
        Ok(Self {
            vertices,
            alphabet,
            configurations,
        })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Number of configurations `|Φ_i|^{|Λ_i|}`.
    pub fn configuration_count(&self) -> usize {
        self.configurations
    }

    /// Symbol index of every vertex (ascending vertex order) in configuration `config`.
    pub fn symbols(&self, config: usize) -> Vec<usize> {
        let base = self.alphabet.len();
        let mut digits = vec![0; self.vertices.len()];
        let mut rest = config;
        for d in digits.iter_mut().rev() {
            *d = rest % base;
            rest /= base;
        }
        digits
    }

    /// Human-readable name of a configuration: symbols concatenated in vertex
    /// order, dot-separated when some symbol is longer than one character.
    pub fn label(&self, config: usize) -> String {
        let sep = if self.alphabet.iter().all(|s| s.chars().count() == 1) {
            ""
        } else {
            "."
        };
        self.symbols(config)
            .into_iter()
            .map(|s| self.alphabet[s].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// A cell as its tuple of per-component configuration indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub Vec<usize>);

/// The set `Ω = Ω_1 × … × Ω_m` with its lexicographic cell index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationSpace {
    components: Vec<Component>,
    strides: Vec<usize>,
    len: usize,
    vertex_slots: BTreeMap<VertexId, (usize, usize)>,
}

impl ConfigurationSpace {
    pub fn new(graph: &Graph, alphabets: &Alphabets, cap: usize) -> Result<Self> {
        let parts = connected_components(graph);
        let count = parts.len();
        let alphabet_for = |i: usize| -> Result<Vec<String>> {
            match alphabets {
                Alphabets::Shared(a) => Ok(a.clone()),
                Alphabets::PerComponent(list) => {
                    if list.len() != count {
                        Err(Error::AlphabetCount {
                            expected: count,
                            found: list.len(),
                        })
                    } else {
                        Ok(list[i].clone())
                    }
                }
            }
        };
        let components = parts
            .into_iter()
            .enumerate()
            .map(|(i, vs)| Component::new(i, vs, alphabet_for(i)?))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(components, cap)
    }

    fn from_components(components: Vec<Component>, cap: usize) -> Result<Self> {
        let mut required: u128 = 1;
        for c in &components {
            let count = (c.alphabet.len() as u128)
                .checked_pow(c.vertices.len() as u32)
                .unwrap_or(u128::MAX);
            required = required.saturating_mul(count);
        }
        if required > cap as u128 {
            return Err(Error::CapExceeded { required, cap });
        }
        let len = required as usize;
        let mut strides = vec![1; components.len()];
        for i in (0..components.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * components[i + 1].configurations;
        }
        let mut vertex_slots = BTreeMap::new();
        for (ci, c) in components.iter().enumerate() {
            for (pos, &v) in c.vertices.iter().enumerate() {
                vertex_slots.insert(v, (ci, pos));
            }
        }
        Ok(Self {
            components,
            strides,
            len,
            vertex_slots,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `|Ω|`.
    pub fn cell_count(&self) -> usize {
        self.len
    }

    /// Configuration of component `component` inside cell `index`.
    #[inline]
    pub fn digit(&self, index: usize, component: usize) -> usize {
        (index / self.strides[component]) % self.components[component].configurations
    }

    #[inline]
    pub fn stride(&self, component: usize) -> usize {
        self.strides[component]
    }

    pub fn cell_of(&self, index: usize) -> Cell {
        Cell(
            (0..self.components.len())
                .map(|c| self.digit(index, c))
                .collect(),
        )
    }

    /// Index of `cell`, or `None` when a configuration is out of range.
    pub fn index_of(&self, cell: &Cell) -> Option<usize> {
        if cell.0.len() != self.components.len() {
            return None;
        }
        let mut index = 0;
        for (c, &config) in cell.0.iter().enumerate() {
            if config >= self.components[c].configurations {
                return None;
            }
            index += config * self.strides[c];
        }
        Some(index)
    }

    /// All cells in index order.
    pub fn enumerate_cells(&self) -> Vec<Cell> {
        (0..self.len).map(|i| self.cell_of(i)).collect()
    }

    /// Cell label such as `(A,a)`.
    pub fn label(&self, index: usize) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .map(|(c, comp)| comp.label(self.digit(index, c)))
            .collect();
        format!("({})", parts.join(","))
    }

    /// Restriction of a cell to a vertex set: the symbol index at each listed
    /// vertex, in the order given. Panics on vertices outside the graph.
    pub fn restrict(&self, index: usize, vertices: &[VertexId]) -> Vec<usize> {
        vertices
            .iter()
            .map(|v| {
                let (c, pos) = self.vertex_slots[v];
                self.components[c].symbols(self.digit(index, c))[pos]
            })
            .collect()
    }
}

/// Strictly positive probability weights over the configurations of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMeasure {
    weights: Vec<f64>,
}

impl ComponentMeasure {
    /// Validates positivity and normalization of `weights` for `component`
    /// (0-based) and renormalizes them to sum to one.
    pub fn new(component: usize, comp: &Component, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != comp.configuration_count() {
            return Err(Error::MeasureLength {
                component: component + 1,
                expected: comp.configuration_count(),
                found: weights.len(),
            });
        }
        for (config, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= MIN_WEIGHT {
                return Err(Error::NonPositiveWeight {
                    component: component + 1,
                    configuration: comp.label(config),
                    weight: w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum {
                component: component + 1,
                sum,
            });
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, config: usize) -> f64 {
        self.weights[config]
    }
}

/// `μ(σ) = Π_i μ_i(σ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    parts: Vec<ComponentMeasure>,
}

impl ProductMeasure {
    pub fn new(space: &ConfigurationSpace, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != space.component_count() {
            return Err(Error::MeasureCount {
                expected: space.component_count(),
                found: weights.len(),
            });
        }
        let parts = weights
            .into_iter()
            .enumerate()
            .map(|(i, w)| ComponentMeasure::new(i, &space.components()[i], w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[ComponentMeasure] {
        &self.parts
    }

    pub fn component(&self, i: usize) -> &ComponentMeasure {
        &self.parts[i]
    }

    pub fn measure_of(&self, space: &ConfigurationSpace, index: usize) -> f64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(c, m)| m.weight(space.digit(index, c)))
            .product()
    }
}

/// Generative description of an operator: graph, alphabets and a product measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    graph: Graph,
    space: ConfigurationSpace,
    measure: ProductMeasure,
}

impl Model {
    pub fn new(
        graph: Graph,
        alphabets: &Alphabets,
        weights: Vec<Vec<f64>>,
        cap: usize,
    ) -> Result<Self> {
        let space = ConfigurationSpace::new(&graph, alphabets, cap)?;
        let measure = ProductMeasure::new(&space, weights)?;
        Ok(Self {
            graph,
            space,
            measure,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.measure
    }

    pub fn measure_of(&self, index: usize) -> f64 {
        self.measure.measure_of(&self.space, index)
    }

    pub fn cell_count(&self) -> usize {
        self.space.cell_count()
    }

    pub fn component_count(&self) -> usize {
        self.space.component_count()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cells, {} components",
            self.cell_count(),
            self.component_count()
        )
    }
}
