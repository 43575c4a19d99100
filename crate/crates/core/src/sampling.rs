//! Seeded random models, measures and simplex points for property checks.

use rand::Rng;
use rand_distr::Exp1;

use crate::construct::SkewMatrix;
use crate::dynamics::SimplexPoint;
use crate::error::Result;
use crate::model::{connected_components, Alphabets, Graph, Model, VertexId};

/// Strictly positive probability weights, each at least `1 / (10 · count)`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Probability weights whose pairwise ratios all differ from 1 by at least
/// `min_gap`.
pub fn distinct_weights<R: Rng + ?Sized>(rng: &mut R, count: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let w = random_weights(rng, count);
        let mut sorted = w.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|p| p[1] / p[0] - 1.0 >= min_gap) {
            return w;
        }
    }
}

/// Uniformly distributed interior point of the simplex.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SimplexPoint {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 && raw.iter().all(|&v| v / sum > 1e-12) {
            return SimplexPoint::new(raw.into_iter().map(|v| v / sum).collect())
                .expect("normalized Dirichlet sample");
        }
    }
}

/// Graph on vertices `1..=n` with each possible edge present with
/// probability `edge_prob`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_prob: f64) -> Graph {
    let vertices: Vec<VertexId> = (1..=n as VertexId).collect();
    let mut edges = Vec::new();
    for a in 1..=n as VertexId {
        for b in (a + 1)..=n as VertexId {
            if rng.random_bool(edge_prob) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(vertices, edges).expect("generated graph is simple")
}

fn alphabet(size: usize) -> Vec<String> {
    (0..size).map(|s| format!("s{s}")).collect()
}

/// Random model with `1..=max_vertices` vertices, per-component alphabets of
/// two or three symbols and random positive weights, shrunk until the cell
/// count fits `cap`.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    max_vertices: usize,
    cap: usize,
) -> Result<Model> {
    let n = rng.random_range(1..=max_vertices.max(1));
    let edge_prob = rng.random_range(0.0..0.6);
    let graph = random_graph(rng, n, edge_prob);
    let components = connected_components(&graph);
    let mut sizes: Vec<usize> = components.iter().map(|_| rng.random_range(2..=3)).collect();
    let cells = |sizes: &[usize]| -> f64 {
        components
            .iter()
            .zip(sizes)
            .map(|(c, &s)| (s as f64).powi(c.len() as i32))
            .product()
    };
    while cells(&sizes) > cap as f64 {
        match sizes.iter().position(|&s| s == 3) {
            Some(p) => sizes[p] = 2,
            None => break,
        }
    }
    let alphabets = Alphabets::PerComponent(sizes.iter().map(|&s| alphabet(s)).collect());
    let weights = components
        .iter()
        .zip(&sizes)
        .map(|(c, &s)| random_weights(rng, s.pow(c.len() as u32)))
        .collect();
    Model::new(graph, &alphabets, weights, cap)
}

/// Model with one single-vertex component per entry of `sizes`, alphabet
/// size `sizes[i]`, and the given per-component weights.
pub fn isolated_model(sizes: &[usize], weights: Vec<Vec<f64>>, cap: usize) -> Result<Model> {
    let vertices: Vec<VertexId> = (1..=sizes.len() as VertexId).collect();
    let graph = Graph::new(vertices, [])?;
    let alphabets = Alphabets::PerComponent(sizes.iter().map(|&s| alphabet(s)).collect());
    Model::new(graph, &alphabets, weights, cap)
}

/// Skew-symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SkewMatrix {
    SkewMatrix::from_upper(n, |_, _| rng.random_range(-1.0..=1.0))
}
