//! Randomized property harness over seeded random models.

use std::io::Write;

use qso_core::reduction::{is_product_form, product_point, reduced_step};
use qso_core::sampling::{random_model, random_point};
use qso_core::{
    heredity_coefficient, is_volterra, iterate, marginals, materialize, product_coefficient,
    reduce, validate, Evolution, IterateConfig, Marginal, Model, QsoOperator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::file::{ModelFile, System};

/// Cap on the cell count of generated models.
pub const VERIFY_CELL_CAP: usize = 512;
/// Largest model that gets its tensor materialized.
const DENSE_LIMIT: usize = 64;
const SAMPLED_TRIPLES: usize = 4096;
const POINTS_PER_TRIAL: usize = 5;
const SIMPLEX_STEPS: usize = 200;
const EXACT_TOL: f64 = 1e-12;

pub const PROPERTIES: [&str; 7] = [
    "volterra-iff-connected",
    "commutation",
    "closed-form",
    "stochastic-tensor",
    "product-preservation",
    "simplex-preservation",
    "export-round-trip",
];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub max_vertices: usize,
    /// Perturbs one heredity coefficient of every operator so the harness
    /// can be shown to catch a broken operator.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            max_vertices: 8,
            inject_fault: false,
        }
    }
}

/// Moves half of the `p_{12,1}` mass to cell 2.
struct Faulty<'a>(&'a QsoOperator);

impl Evolution for Faulty<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn raw_image(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.0.raw_image(x);
        let moved = self.0.coefficient(0, 1, 0) * x[0] * x[1];
        y[0] -= moved;
        y[1] += moved;
        y
    }
}

struct Trial {
    model: Model,
    /// Outcome per property; `None` when it does not apply.
    outcomes: [Option<std::result::Result<(), String>>; 7],
}

fn rng_for(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn check(ok: bool, detail: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn run_trial(options: &VerifyOptions, cap: usize, trial: usize) -> Result<Trial> {
    let mut rng = rng_for(options.seed, trial);
    let model = random_model(&mut rng, options.max_vertices, cap)?;
    let op = QsoOperator::generated(model.clone());
    let faulty = Faulty(&op);
    let map: &dyn Evolution = if options.inject_fault { &faulty } else { &op };
    let space = model.space();
    let n = model.cell_count();
    let connected = model.component_count() == 1;
    let system = reduce(&model);

    let volterra = check(is_volterra(&op) == connected, || {
        format!(
            "{} components but is_volterra = {}",
            model.component_count(),
            is_volterra(&op)
        )
    });

    let mut commutation = Ok(());
    for _ in 0..POINTS_PER_TRIAL {
        let x = random_point(&mut rng, n);
        let direct = marginals(space, &map.image(&x)?)?;
        let reduced = reduced_step(&system, &marginals(space, &x)?)?;
        let r = direct
            .iter()
            .zip(&reduced)
            .map(|(a, b)| a.point.distance(&b.point))
            .fold(0.0, f64::max);
        if r > EXACT_TOL {
            commutation = Err(format!("residual {r:e} exceeds {EXACT_TOL:e}"));
            break;
        }
    }

    let mut closed_form = Ok(());
    let mut compare = |i: usize, j: usize, k: usize| {
        let (h, p) = (
            heredity_coefficient(&model, i, j, k),
            product_coefficient(&model, i, j, k),
        );
        if (h - p).abs() > EXACT_TOL && closed_form.is_ok() {
            closed_form = Err(format!("p[{}][{}][{}]: {h} vs {p}", i + 1, j + 1, k + 1));
        }
    };
    if n <= DENSE_LIMIT {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    compare(i, j, k);
                }
            }
        }
    } else {
        for _ in 0..SAMPLED_TRIPLES {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            compare(i, j, k);
        }
    }

    let tensor = if n <= DENSE_LIMIT {
        Some(materialize(&model, DENSE_LIMIT)?)
    } else {
        None
    };
    let stochastic = tensor.as_ref().map(|t| {
        let report = validate(t);
        check(report.is_valid(), || report.to_string())
    });

    let product = {
        let parts: Vec<Marginal> = space
            .components()
            .iter()
            .enumerate()
            .map(|(c, comp)| Marginal {
                component: c,
                point: random_point(&mut rng, comp.configuration_count()),
            })
            .collect();
        let x = product_point(space, &parts)?;
        let y = map.image(&x)?;
        check(is_product_form(space, &y, EXACT_TOL), || {
            "image of a product point is not a product".to_string()
        })
    };

    let simplex = {
        let x0 = random_point(&mut rng, n);
        let config = IterateConfig {
            stop_on_convergence: false,
            ..IterateConfig::steps(SIMPLEX_STEPS)
        };
        let t = iterate(map, &x0, &config)?;
        check(t.max_sum_drift <= 1e-9 && t.min_pre_clamp >= -1e-12, || {
            format!(
                "sum drift {:e}, min pre-clamp coordinate {:e}",
                t.max_sum_drift, t.min_pre_clamp
            )
        })
    };

    let round_trip = match &tensor {
        Some(t) => {
            let text = serde_json::to_string(&ModelFile::from_tensor(t))
                .map_err(|e| CliError::Input(e.to_string()))?;
            let file: ModelFile =
                serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?;
            let System::Quadratic(back) = file.build(None, DENSE_LIMIT)?.system else {
                unreachable!("tensor files load as quadratic operators")
            };
            let x = random_point(&mut rng, n);
            let d = op.image(&x)?.distance(&back.image(&x)?);
            Some(check(d <= EXACT_TOL, || {
                format!("exported tensor differs by {d:e}")
            }))
        }
        None => None,
    };

    Ok(Trial {
        model,
        outcomes: [
            Some(volterra),
            Some(commutation),
            Some(closed_form),
            stochastic,
            Some(product),
            Some(simplex),
            round_trip,
        ],
    })
}

/// Runs the harness and prints per-property counts. Fails with a
/// reproducer for the first failing trial.
pub fn verify(options: &VerifyOptions, cap: usize, out: &mut dyn Write) -> Result<()> {
    if options.trials == 0 || options.max_vertices == 0 {
        return Err(CliError::Input(
            "--trials and --max-vertices must be at least 1".into(),
        ));
    }
    let cap = cap.min(VERIFY_CELL_CAP);
    let trials: Vec<Trial> = (0..options.trials)
        .into_par_iter()
        .map(|t| run_trial(options, cap, t))
        .collect::<Result<_>>()?;
    writeln!(
        out,
        "verify: {} trials, seed {}, up to {} vertices, cell cap {cap}",
        options.trials, options.seed, options.max_vertices
    )?;
    let mut first_failure: Option<(usize, usize, &str)> = None;
    for (p, name) in PROPERTIES.iter().enumerate() {
        let (mut checked, mut passed) = (0, 0);
        for (t, trial) in trials.iter().enumerate() {
            match &trial.outcomes[p] {
                Some(Ok(())) => {
                    checked += 1;
                    passed += 1;
                }
                Some(Err(detail)) => {
                    checked += 1;
                    if first_failure.is_none_or(|(ft, _, _)| t < ft) {
                        first_failure = Some((t, p, detail));
                    }
                }
                None => {}
            }
        }
        let status = if passed == checked { "ok" } else { "FAILED" };
        writeln!(out, "{name}: {passed}/{checked} passed {status}")?;
    }
    match first_failure {
        None => {
            writeln!(out, "all properties passed")?;
            Ok(())
        }
        Some((t, p, detail)) => {
            let model = serde_json::to_string(&ModelFile::from_model(&trials[t].model))
                .map_err(|e| CliError::Input(e.to_string()))?;
            writeln!(out, "reproducer: --seed {} trial {t}", options.seed)?;
            writeln!(out, "property: {}", PROPERTIES[p])?;
            writeln!(out, "detail: {detail}")?;
            writeln!(out, "model: {model}")?;
            Err(CliError::PropertyFailure(format!(
                "property {} failed in trial {t}",
                PROPERTIES[p]
            )))
        }
    }
}
