use std::io::Write;
use std::path::{Path, PathBuf};

use qso_core::construct::{volterra_tensor, DEFAULT_TENSOR_CAP};
use qso_core::dynamics::{DecayStatus, DEFAULT_TOL};
use qso_core::reduction::{commutation_residual_with, reduce as reduce_model};
use qso_core::sampling::random_point;
use qso_core::tournament::predict_decay;
use qso_core::{
    classify_limit, is_volterra, iterate as run_map, volterra_canonical, Error, Evolution,
    IterateConfig, SimplexPoint, SkewMatrix, Trajectory,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::file::{Loaded, ModelFile, System};

/// Bound the commutation residual is checked against.
pub const COMMUTATION_TOL: f64 = 1e-12;

/// Rounds to nine decimals so converged coordinates print as `1` and `0`.
pub fn compact(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    format!("{}", r + 0.0)
}

pub fn compact_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| compact(x)).collect();
    format!("({})", parts.join(", "))
}

fn index_set(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn load(path: &Path, preset: Option<&str>, cap: usize) -> Result<Loaded> {
    ModelFile::read(path)?.build(preset, cap)
}

fn describe(loaded: &Loaded) -> String {
    let mut s = match &loaded.system {
        System::Quadratic(op) => match op.model() {
            Some(m) => format!(
                "{} cells, {} component{}",
                m.cell_count(),
                m.component_count(),
                if m.component_count() == 1 { "" } else { "s" }
            ),
            None => format!("{} cells, explicit tensor", op.dim()),
        },
        System::Skew(a) => format!("{} coordinates, skew matrix", a.dim()),
    };
    if let Some(p) = &loaded.preset {
        s.push_str(&format!(" (preset {p})"));
    }
    s
}

pub fn build(
    path: &Path,
    preset: Option<&str>,
    export: Option<&Path>,
    cap: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load(path, preset, cap)?;
    let volterra = match &loaded.system {
        System::Quadratic(op) => is_volterra(op),
        System::Skew(_) => true,
    };
    writeln!(
        out,
        "{}, Volterra: {}",
        describe(&loaded),
        if volterra { "yes" } else { "no" }
    )?;
    if let Some(m) = loaded.system.model() {
        for (i, c) in m.space().components().iter().enumerate() {
            let vs: Vec<String> = c.vertices().iter().map(u32::to_string).collect();
            writeln!(
                out,
                "component {}: vertices {{{}}}, alphabet [{}], {} configurations",
                i + 1,
                vs.join(","),
                c.alphabet().join(","),
                c.configuration_count()
            )?;
        }
    }
    if let Some(path) = export {
        let tensor = match &loaded.system {
            System::Quadratic(op) => op.materialize(DEFAULT_TENSOR_CAP)?,
            System::Skew(a) => volterra_tensor(a, DEFAULT_TENSOR_CAP)?,
        };
        let text = serde_json::to_string(&ModelFile::from_tensor(&tensor))
            .map_err(|e| CliError::Input(e.to_string()))?;
        std::fs::write(path, text).map_err(|source| CliError::File {
            path: path.to_path_buf(),
            source,
        })?;
        writeln!(
            out,
            "tensor ({0}x{0}x{0}) written to {1}",
            tensor.dim(),
            path.display()
        )?;
    }
    Ok(())
}

/// Where a run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Uniform,
    Random(u64),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub start: Start,
    pub steps: usize,
    pub tol: f64,
    pub stride: Option<usize>,
    pub csv: Option<PathBuf>,
    pub membership_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            start: Start::Uniform,
            steps: 10_000,
            tol: DEFAULT_TOL,
            stride: None,
            csv: None,
            membership_tol: 1e-6,
        }
    }
}

fn initial_point(start: &Start, n: usize) -> Result<SimplexPoint> {
    Ok(match start {
        Start::Uniform => SimplexPoint::uniform(n),
        Start::Random(seed) => random_point(&mut ChaCha8Rng::seed_from_u64(*seed), n),
        Start::Explicit(x) => {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                }
                .into());
            }
            SimplexPoint::new(x.clone())?
        }
    })
}

fn evolution(system: &System) -> &dyn Evolution {
    match system {
        System::Quadratic(op) => op,
        System::Skew(a) => a,
    }
}

/// Writes `l,x_1,...,x_n` rows for every recorded point.
pub fn write_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = trajectory.initial.dim();
    let mut header = vec!["l".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    w.write_record(&header)?;
    for r in &trajectory.records {
        let mut row = vec![r.step.to_string()];
        row.extend(r.point.coords().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn iterate(
    path: &Path,
    preset: Option<&str>,
    options: &RunOptions,
    cap: usize,
    out: &mut dyn Write,
) -> Result<()> {
    if options.steps == 0 {
        return Err(CliError::Input("--steps must be at least 1".into()));
    }
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(CliError::Input("--tol must be positive".into()));
    }
    let loaded = load(path, preset, cap)?;
    let x0 = initial_point(&options.start, loaded.system.dim())?;
    let config = IterateConfig {
        max_steps: options.steps,
        tol: options.tol,
        stride: options.stride,
        ..IterateConfig::default()
    };
    let t = run_map(evolution(&loaded.system), &x0, &config)?;
    writeln!(out, "model: {}", describe(&loaded))?;
    writeln!(out, "x0: {}", compact_vec(x0.coords()))?;
    writeln!(out, "steps: {} ({:?})", t.steps, t.termination)?;
    match classify_limit(&t, &loaded.fixed_sets, options.membership_tol) {
        Ok(report) => {
            match &report.limit {
                Some(limit) => writeln!(
                    out,
                    "classification: {} {}",
                    report.classification,
                    compact_vec(limit.coords())
                )?,
                None => writeln!(out, "classification: {}", report.classification)?,
            }
            writeln!(
                out,
                "final point: {}",
                compact_vec(report.final_point.coords())
            )?;
            writeln!(out, "final residual: {:.3e}", report.final_residual)?;
            writeln!(
                out,
                "tail oscillation: {:.3e} (log coordinates {:.3e})",
                report.tail_oscillation, report.log_tail_oscillation
            )?;
            if !report.escaping.is_empty() {
                writeln!(out, "escaping coordinates: {}", index_set(&report.escaping))?;
            }
            writeln!(
                out,
                "boundary: {}; min coordinate {:.3e} -> {:.3e}",
                if report.on_boundary { "yes" } else { "no" },
                report.min_coordinate_trend.0,
                report.min_coordinate_trend.1
            )?;
            for (name, member) in &report.memberships {
                writeln!(out, "in {name}: {}", if *member { "yes" } else { "no" })?;
            }
            for (j, d) in report.decay.iter().enumerate() {
                match d {
                    DecayStatus::Fit(fit) if fit.is_geometric() => writeln!(
                        out,
                        "decay x_{}: geometric, rate {:.6}, R^2 {:.4}",
                        j + 1,
                        fit.rate(),
                        fit.r_squared
                    )?,
                    DecayStatus::Vanished => writeln!(out, "decay x_{}: vanished", j + 1)?,
                    _ => {}
                }
            }
        }
        Err(Error::TooShort { required, found }) => writeln!(
            out,
            "classification: unavailable ({found} steps, need {required})\nfinal point: {}",
            compact_vec(t.final_point().coords())
        )?,
        Err(e) => return Err(e.into()),
    }
    writeln!(
        out,
        "conservation: max |sum - 1| {:.2e}, min pre-clamp coordinate {:.2e}",
        t.max_sum_drift, t.min_pre_clamp
    )?;
    if let Some(csv_path) = &options.csv {
        write_csv(csv_path, &t)?;
        writeln!(
            out,
            "csv: {} rows written to {}",
            t.records.len(),
            csv_path.display()
        )?;
    }
    Ok(())
}

fn matrix_rows(a: &SkewMatrix) -> String {
    let rows: Vec<String> = a
        .rows()
        .iter()
        .map(|r| {
            format!(
                "[{}]",
                r.iter().map(|&v| compact(v)).collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn reduce(
    path: &Path,
    preset: Option<&str>,
    points: usize,
    seed: u64,
    cap: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load(path, preset, cap)?;
    let (op, model) = match &loaded.system {
        System::Quadratic(op) => match op.model() {
            Some(m) => (op, m),
            None => {
                return Err(CliError::Input(
                    "explicit tensors carry no measure to reduce".into(),
                ))
            }
        },
        System::Skew(_) => {
            return Err(CliError::Input(
                "skew-matrix models carry no measure to reduce".into(),
            ))
        }
    };
    let system = reduce_model(model);
    writeln!(out, "model: {}", describe(&loaded))?;
    if model.component_count() == 1 {
        writeln!(out, "operator is already Volterra")?;
    }
    for (i, (c, comp)) in system
        .components
        .iter()
        .zip(model.space().components())
        .enumerate()
    {
        let labels: Vec<String> = (0..comp.configuration_count())
            .map(|k| comp.label(k))
            .collect();
        writeln!(
            out,
            "component {} [{}] weights {}",
            i + 1,
            labels.join(","),
            compact_vec(c.measure.weights())
        )?;
        writeln!(out, "a^({}) = {}", i + 1, matrix_rows(&c.matrix))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = random_point(&mut rng, op.dim());
        worst = worst.max(commutation_residual_with(op, &system, &x)?);
    }
    writeln!(
        out,
        "max commutation residual over {points} random points: {worst:.3e} ({} {COMMUTATION_TOL:e})",
        if worst <= COMMUTATION_TOL { "<=" } else { ">" }
    )?;
    if worst > COMMUTATION_TOL {
        return Err(CliError::PropertyFailure(format!(
            "commutation residual {worst:e} exceeds {COMMUTATION_TOL:e}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TournamentOptions {
    /// 1-based component; all components when absent.
    pub component: Option<usize>,
    pub confirm: bool,
    pub steps: usize,
    pub seed: u64,
}

pub fn tournament(
    path: &Path,
    preset: Option<&str>,
    options: &TournamentOptions,
    cap: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let loaded = load(path, preset, cap)?;
    let mut targets: Vec<(String, SkewMatrix, Vec<String>)> = match &loaded.system {
        System::Quadratic(op) => match op.model() {
            Some(m) => reduce_model(m)
                .components
                .into_iter()
                .zip(m.space().components())
                .enumerate()
                .map(|(i, (c, comp))| {
                    let labels = (0..comp.configuration_count())
                        .map(|k| comp.label(k))
                        .collect();
                    (format!("component {}", i + 1), c.matrix, labels)
                })
                .collect(),
            None => {
                let a = volterra_canonical(op)?;
                let labels = (1..=a.dim()).map(|k| format!("x_{k}")).collect();
                vec![("operator".to_string(), a, labels)]
            }
        },
        System::Skew(a) => {
            let labels = (1..=a.dim()).map(|k| format!("x_{k}")).collect();
            vec![("operator".to_string(), a.clone(), labels)]
        }
    };
    if let Some(c) = options.component {
        if c == 0 || c > targets.len() {
            return Err(CliError::Input(format!(
                "--component {c} outside 1..={}",
                targets.len()
            )));
        }
        targets = vec![targets.swap_remove(c - 1)];
    }
    for (name, a, labels) in &targets {
        writeln!(out, "{name}: a = {}", matrix_rows(a))?;
        match predict_decay(a) {
            Ok(p) => {
                writeln!(out, "tournament: {}", p.tournament)?;
                let classes: Vec<String> = p
                    .condensation
                    .classes
                    .iter()
                    .map(|c| index_set(c))
                    .collect();
                writeln!(out, "condensation: {}", classes.join(" -> "))?;
                if p.is_strong() {
                    writeln!(out, "strong; no decay prediction")?;
                } else {
                    writeln!(
                        out,
                        "not strong; survivors {}; decaying {}",
                        index_set(&p.survivors),
                        index_set(&p.decaying)
                    )?;
                    let names: Vec<&str> =
                        p.survivors.iter().map(|&s| labels[s].as_str()).collect();
                    writeln!(out, "surviving configurations: {}", names.join(", "))?;
                }
                if options.confirm {
                    confirm(a, options, &p.decaying, out)?;
                }
            }
            Err(Error::DegenerateCoefficients { pairs }) => {
                let ps: Vec<String> = pairs
                    .iter()
                    .map(|(k, i)| format!("({},{})", k + 1, i + 1))
                    .collect();
                writeln!(
                    out,
                    "degenerate: zero coefficients at pairs {}; tournament undefined, running empirically",
                    ps.join(" ")
                )?;
                let x0 = random_point(&mut ChaCha8Rng::seed_from_u64(options.seed), a.dim());
                let t = run_map(a, &x0, &IterateConfig::steps(options.steps))?;
                match classify_limit(&t, &[], 1e-6) {
                    Ok(r) => writeln!(
                        out,
                        "empirical: {} at {}",
                        r.classification,
                        compact_vec(r.final_point.coords())
                    )?,
                    Err(e) => writeln!(out, "empirical: {e}")?,
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn confirm(
    a: &SkewMatrix,
    options: &TournamentOptions,
    decaying: &[usize],
    out: &mut dyn Write,
) -> Result<()> {
    let x0 = random_point(&mut ChaCha8Rng::seed_from_u64(options.seed), a.dim());
    let config = IterateConfig {
        max_steps: options.steps,
        stride: (a.dim() <= 64).then_some(1),
        stop_on_convergence: false,
        ..IterateConfig::default()
    };
    let t = run_map(a, &x0, &config)?;
    writeln!(
        out,
        "confirming run: {} steps from {}",
        t.steps,
        compact_vec(x0.coords())
    )?;
    let mut mismatches = 0;
    for j in 0..a.dim() {
        let predicted = decaying.contains(&j);
        let line = match qso_core::decay_fit(&t, j) {
            Ok(fit) => {
                if fit.is_geometric() != predicted {
                    mismatches += 1;
                }
                format!(
                    "slope {:.6e}, rate {:.6}, R^2 {:.4}, {}",
                    fit.slope,
                    fit.rate(),
                    fit.r_squared,
                    if fit.is_geometric() {
                        "geometric"
                    } else {
                        "not geometric"
                    }
                )
            }
            Err(e) => {
                if predicted && !matches!(e, Error::CoordinateZero { .. }) {
                    mismatches += 1;
                }
                e.to_string()
            }
        };
        writeln!(
            out,
            "  x_{} ({}): {line}",
            j + 1,
            if predicted {
                "predicted decay"
            } else {
                "predicted survivor"
            }
        )?;
    }
    writeln!(
        out,
        "confirmation: {}",
        if mismatches == 0 {
            "consistent"
        } else {
            "inconsistent"
        }
    )?;
    Ok(())
}
