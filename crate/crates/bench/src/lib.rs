//! Fixtures shared by the benchmarks in `benches/`.

use qso_core::sampling::{random_point, random_weights};
use qso_core::{Alphabets, Graph, Model, SimplexPoint, VertexId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `components` disjoint paths of `path_len` binary vertices each, with
/// seeded random weights.
pub fn path_model(components: usize, path_len: usize, seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (components * path_len) as VertexId;
    let edges = (1..n)
        .filter(|v| !(*v as usize).is_multiple_of(path_len))
        .map(|v| (v, v + 1));
    let graph = Graph::new(1..=n, edges).expect("paths are simple");
    let weights = (0..components)
        .map(|_| random_weights(&mut rng, 1 << path_len))
        .collect();
    Model::new(graph, &Alphabets::shared(["0", "1"]), weights, usize::MAX).expect("valid fixture")
}

pub fn start(n: usize, seed: u64) -> SimplexPoint {
    random_point(&mut ChaCha8Rng::seed_from_u64(seed), n)
}
