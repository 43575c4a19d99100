// Index loops over coupled matrix entries read closer to the math.
#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qso_core::construct::{materialize, validate, volterra_canonical};
use qso_core::dynamics::{apply, apply_volterra, iterate, IterateConfig};
use qso_core::model::{connected_components, Cell, Graph, VertexId};
use qso_core::reduction::{marginals, product_point, reconstruct, reduce, reduced_step, Marginal};
use qso_core::sampling::{random_model, random_point, random_skew};
use qso_core::tournament::{build_tournament, condensation, predict_decay, Tournament};
use qso_core::{is_volterra, Error, QsoOperator, SimplexPoint};

fn graph_strategy(max: usize) -> impl Strategy<Value = Graph> {
    (1..=max).prop_flat_map(|n| {
        let pairs: Vec<(VertexId, VertexId)> = (1..=n as VertexId)
            .flat_map(|a| ((a + 1)..=n as VertexId).map(move |b| (a, b)))
            .collect();
        let count = pairs.len();
        proptest::collection::vec(proptest::bool::weighted(0.2), count).prop_map(move |keep| {
            let edges: Vec<_> = pairs
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(e, _)| *e)
                .collect();
            Graph::new(1..=n as VertexId, edges).unwrap()
        })
    })
}

/// Reachability by repeated relaxation of an adjacency matrix.
fn reachability(graph: &Graph) -> Vec<Vec<bool>> {
    let vs = graph.vertices();
    let pos = |v: VertexId| vs.iter().position(|&w| w == v).unwrap();
    let n = vs.len();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in graph.edges() {
        r[pos(a)][pos(b)] = true;
        r[pos(b)][pos(a)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_partition_by_reachability(graph in graph_strategy(12)) {
        let comps = connected_components(&graph);
        let reach = reachability(&graph);
        let vs = graph.vertices();
        let mut seen: Vec<VertexId> = comps.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(&seen[..], vs);
        for (a, &u) in vs.iter().enumerate() {
            for (b, &v) in vs.iter().enumerate() {
                let same = comps.iter().any(|c| c.contains(&u) && c.contains(&v));
                prop_assert_eq!(same, reach[a][b]);
            }
        }
        let firsts: Vec<VertexId> = comps.iter().map(|c| c[0]).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(comps.iter().all(|c| c.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn cell_indexing_is_a_bijection(seed in any::<u64>()) {
        let model = random_model(&mut seeded(seed), 8, 512).unwrap();
        let space = model.space();
        let cells = space.enumerate_cells();
        prop_assert_eq!(cells.len(), space.cell_count());
        for (i, cell) in cells.iter().enumerate() {
            prop_assert_eq!(space.index_of(cell), Some(i));
            prop_assert_eq!(&space.cell_of(i), cell);
        }
        prop_assert!(cells.windows(2).all(|w| w[0].0 < w[1].0));
        let outside = Cell(vec![usize::MAX; space.component_count()]);
        prop_assert_eq!(space.index_of(&outside), None);
    }

    #[test]
    fn product_measure_sums_to_one(seed in any::<u64>()) {
        let model = random_model(&mut seeded(seed), 8, 512).unwrap();
        let total: f64 = (0..model.cell_count()).map(|i| model.measure_of(i)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!((0..model.cell_count()).all(|i| model.measure_of(i) > 0.0));
    }

    #[test]
    fn materialized_tensors_are_stochastic(seed in any::<u64>()) {
        let model = random_model(&mut seeded(seed), 5, 32).unwrap();
        let tensor = materialize(&model, 64).unwrap();
        let report = validate(&tensor);
        prop_assert!(report.is_valid(), "{}", report);
        let op = QsoOperator::generated(model);
        let mut rng = seeded(seed ^ 1);
        let x = random_point(&mut rng, op.dim());
        let lazy = apply(&op, &x).unwrap();
        let dense = apply(&QsoOperator::explicit(tensor).unwrap(), &x).unwrap();
        prop_assert!(lazy.distance(&dense) <= 1e-12);
    }

    #[test]
    fn canonical_form_reproduces_the_operator(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        // one component: a connected path over 1-3 vertices
        let n = 1 + (seed % 3) as u32;
        let graph = Graph::new(1..=n, (1..n).map(|v| (v, v + 1))).unwrap();
        let model = qso_core::Model::new(
            graph,
            &qso_core::Alphabets::shared(["a", "b"]),
            vec![qso_core::sampling::random_weights(&mut rng, 1 << n)],
            64,
        )
        .unwrap();
        let op = QsoOperator::generated(model.clone());
        prop_assert!(is_volterra(&op));
        let a = volterra_canonical(&op).unwrap();
        // measure-generated canonical form equals the reduced matrix
        let reduced = &reduce(&model).components[0].matrix;
        for k in 0..a.dim() {
            for i in 0..a.dim() {
                prop_assert!((a.get(k, i) - reduced.get(k, i)).abs() <= 1e-12);
            }
        }
        for _ in 0..20 {
            let x = random_point(&mut rng, op.dim());
            let full = apply(&op, &x).unwrap();
            let canonical = apply_volterra(&a, &x).unwrap();
            prop_assert!(full.distance(&canonical) <= 1e-12);
        }
    }

    #[test]
    fn product_states_stay_product(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let model = random_model(&mut rng, 6, 64).unwrap();
        let space = model.space();
        let ms: Vec<Marginal> = space
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| Marginal { component: i, point: random_point(&mut rng, c.configuration_count()) })
            .collect();
        let x = product_point(space, &ms).unwrap();
        prop_assert!(qso_core::reduction::is_product_form(space, &x, 1e-12));
        let image = apply(&QsoOperator::generated(model.clone()), &x).unwrap();
        prop_assert!(qso_core::reduction::is_product_form(space, &image, 1e-10));
        // the image factors into the reduced images of the factors
        let stepped = reduced_step(&reduce(&model), &ms).unwrap();
        prop_assert!(product_point(space, &stepped).unwrap().distance(&image) <= 1e-12);
    }

    #[test]
    fn two_forms_of_the_reduced_step_agree(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let model = random_model(&mut rng, 6, 256).unwrap();
        let system = reduce(&model);
        for comp in &system.components {
            let mu = comp.measure.weights();
            let x = random_point(&mut rng, mu.len());
            let x = x.coords();
            let quadratic: Vec<f64> = (0..mu.len())
                .map(|w| {
                    let s: f64 = (0..mu.len())
                        .filter(|&p| p != w)
                        .map(|p| 2.0 * mu[w] / (mu[w] + mu[p]) * x[p])
                        .sum();
                    x[w] * (x[w] + s)
                })
                .collect();
            let step = apply_volterra(&comp.matrix, &SimplexPoint::new(x.to_vec()).unwrap()).unwrap();
            for (a, b) in quadratic.iter().zip(step.coords()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for k in 0..mu.len() {
                for i in 0..mu.len() {
                    let v = comp.matrix.get(k, i);
                    prop_assert_eq!(v, -comp.matrix.get(i, k));
                    prop_assert!(v.abs() <= 1.0);
                    prop_assert_eq!(v == 0.0, mu[k] == mu[i]);
                }
            }
        }
    }

    #[test]
    fn reconstruction_satisfies_the_marginal_constraints(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let model = random_model(&mut rng, 6, 256).unwrap();
        let x = random_point(&mut rng, model.cell_count());
        let ms = marginals(model.space(), &x).unwrap();
        let rec = reconstruct(model.space(), &ms).unwrap();
        prop_assert!(rec.residual <= 1e-12);
        let sizes: Vec<usize> = model.space().components().iter().map(|c| c.configuration_count()).collect();
        // interior marginals: n - 1 - Σ(|Ω_i| - 1) free parameters
        let expected = sizes.iter().product::<usize>() - 1 - sizes.iter().map(|s| s - 1).sum::<usize>();
        prop_assert_eq!(rec.affine_dimension, expected);
        prop_assert_eq!(rec.dimension, expected);
    }

    #[test]
    fn condensation_is_a_total_order_of_strong_components(
        n in 1usize..=12,
        bits in proptest::collection::vec(any::<bool>(), 66),
    ) {
        let mut it = bits.into_iter();
        let t = Tournament::from_fn(n, |_, _| it.next().unwrap());
        // brute-force reachability
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = i == j || t.has_edge(i, j);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        let c = condensation(&t);
        let class_of = |v: usize| c.classes.iter().position(|cl| cl.contains(&v)).unwrap();
        let mut all: Vec<usize> = c.classes.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let (cu, cv) = (class_of(u), class_of(v));
                prop_assert_eq!(cu == cv, r[u][v] && r[v][u]);
                if cu < cv {
                    prop_assert!(t.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn decay_prediction_partitions_the_coordinates(seed in any::<u64>(), n in 2usize..=8) {
        let a = random_skew(&mut seeded(seed), n);
        match predict_decay(&a) {
            Ok(p) => {
                let mut all: Vec<usize> = p.survivors.iter().chain(&p.decaying).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!(p.is_strong(), p.condensation.classes.len() == 1);
            }
            Err(e) => {
                let degenerate = matches!(e, Error::DegenerateCoefficients { .. });
                prop_assert!(degenerate);
            }
        }
    }
}

#[test]
fn distinct_weights_give_transitive_tournaments() {
    let mut rng = seeded(11);
    for size in 2..=6 {
        for _ in 0..20 {
            let w = qso_core::sampling::distinct_weights(&mut rng, size, 0.01);
            let model = qso_core::sampling::isolated_model(&[size], vec![w.clone()], 64).unwrap();
            let a = &reduce(&model).components[0].matrix;
            let t = build_tournament(a).unwrap();
            let c = condensation(&t);
            assert_eq!(c.classes.len(), size);
            let top = (0..size).max_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
            assert_eq!(c.sink(), Some(&[top][..]));
        }
    }
}

#[test]
fn volterra_runs_reach_the_boundary() {
    let mut rng = seeded(12);
    for size in 2..=5 {
        let w = qso_core::sampling::distinct_weights(&mut rng, size, 0.05);
        let model = qso_core::sampling::isolated_model(&[size], vec![w], 64).unwrap();
        let op = QsoOperator::generated(model);
        let x0 = random_point(&mut rng, size);
        let t = iterate(&op, &x0, &IterateConfig::steps(10_000)).unwrap();
        assert!(t.final_point().min() < 1e-6);
        assert!(t.max_sum_drift <= 1e-9);
    }
}

#[test]
fn faces_stay_exactly_invariant() {
    let mut rng = seeded(13);
    let a = random_skew(&mut rng, 5);
    let x0 = SimplexPoint::new(vec![0.4, 0.0, 0.3, 0.0, 0.3]).unwrap();
    let t = iterate(&a, &x0, &IterateConfig::steps(10_000)).unwrap();
    for r in &t.records {
        assert!(r.point.get(1) <= 1e-15 && r.point.get(3) <= 1e-15);
    }
}

#[test]
fn every_vertex_is_fixed() {
    let mut rng = seeded(14);
    for _ in 0..10 {
        let model = random_model(&mut rng, 6, 128).unwrap();
        let op = QsoOperator::generated(model);
        for k in 0..op.dim() {
            let e = SimplexPoint::vertex(op.dim(), k);
            assert!(apply(&op, &e).unwrap().distance(&e) <= 1e-15);
        }
    }
}

#[test]
fn cap_is_enforced_with_the_required_size() {
    let graph = Graph::new(1..=13, []).unwrap();
    let err = qso_core::model::ConfigurationSpace::new(
        &graph,
        &qso_core::Alphabets::shared(["0", "1"]),
        4096,
    )
    .unwrap_err();
    assert_eq!(
        err,
        Error::CapExceeded {
            required: 8192,
            cap: 4096
        }
    );
}
