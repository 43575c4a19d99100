use std::collections::VecDeque;

use crate::dynamics::apply::{Evolution, State};
use crate::dynamics::simplex::{sup_distance, SimplexPoint};
use crate::error::{Error, Result};

/// Default step-residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of consecutive quiet steps required for convergence.
pub const DEFAULT_WINDOW: usize = 50;
/// Default bound on stride-recorded points.
pub const MAX_RECORDS: usize = 2048;

/// Growth of a coordinate over the convergence window, in natural-log units,
/// that marks the trajectory as still leaving its current neighbourhood.
pub const ESCAPE_LOG_GROWTH: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq)]
pub struct IterateConfig {
    pub max_steps: usize,
    pub tol: f64,
    pub window: usize,
    /// Record every `stride`-th step; `None` picks a stride that keeps at
    /// most [`MAX_RECORDS`] points.
    pub stride: Option<usize>,
    /// Stop once the convergence criterion holds.
    pub stop_on_convergence: bool,
}

impl Default for IterateConfig {
    fn default() -> Self {
        Self {
            max_steps: 10_000,
            tol: DEFAULT_TOL,
            window: DEFAULT_WINDOW,
            stride: None,
            stop_on_convergence: true,
        }
    }
}

impl IterateConfig {
    pub fn steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            ..Self::default()
        }
    }

    fn effective_stride(&self) -> usize {
        self.stride
            .unwrap_or_else(|| self.max_steps.div_ceil(MAX_RECORDS))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    Converged,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    pub point: SimplexPoint,
    /// Natural logarithms of the coordinates; finite even where `point`
    /// underflowed to zero, when the map was iterated in log coordinates.
    pub log: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: SimplexPoint,
    /// Stride-sampled points, always including step 0 and the final window.
    pub records: Vec<Record>,
    pub steps: usize,
    pub termination: Termination,
    pub tol: f64,
    pub window: usize,
    /// Step residuals `‖x^(l+1) − x^(l)‖∞` of the last `window` steps.
    pub final_residuals: Vec<f64>,
    /// Log growth of each coordinate across the last `window` steps.
    pub window_log_growth: Vec<f64>,
    /// Largest `|Σx − 1|` seen before renormalization.
    pub max_sum_drift: f64,
    /// Smallest coordinate seen before clamping.
    pub min_pre_clamp: f64,
}

impl Trajectory {
    pub fn final_point(&self) -> &SimplexPoint {
        &self.records.last().expect("trajectory has records").point
    }

    pub fn final_record(&self) -> &Record {
        self.records.last().expect("trajectory has records")
    }

    /// Coordinates whose logarithm rose by at least [`ESCAPE_LOG_GROWTH`]
    /// over the final window.
    pub fn escaping(&self) -> Vec<usize> {
        self.window_log_growth
            .iter()
            .enumerate()
            .filter(|(_, g)| **g >= ESCAPE_LOG_GROWTH)
            .map(|(j, _)| j)
            .collect()
    }
}

fn log_growth(now: &[f64], then: &[f64]) -> Vec<f64> {
    now.iter()
        .zip(then)
        .map(|(a, b)| {
            if a.is_finite() && b.is_finite() {
                a - b
            } else {
                0.0
            }
        })
        .collect()
}

/// Iterates `map` from `x0`.
///
/// The run stops early (`Termination::Converged`) once, after at least
/// `2 · window` steps, the last `window` step residuals are all `≤ tol` and
/// no coordinate grew by a factor of two or more over that window. A
/// coordinate growing geometrically from far below `tol` is invisible in the
/// residual but means the trajectory is leaving its current neighbourhood.
pub fn iterate<E: Evolution + ?Sized>(
    map: &E,
    x0: &SimplexPoint,
    config: &IterateConfig,
) -> Result<Trajectory> {
    if x0.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: x0.dim(),
        });
    }
    let stride = config.effective_stride();
    let window = config.window.max(1);
    let mut state = State::new(x0);
    let mut records = vec![Record {
        step: 0,
        point: x0.clone(),
        log: state.log.clone(),
    }];
    let mut recent: VecDeque<(usize, State)> = VecDeque::with_capacity(window + 2);
    recent.push_back((0, state.clone()));
    let mut residuals: VecDeque<f64> = VecDeque::with_capacity(window + 1);
    let mut quiet = 0usize;
    let mut max_sum_drift = 0.0f64;
    let mut min_pre_clamp = x0.min();
    let mut termination = Termination::Budget;
    let mut steps = 0;

    for step in 1..=config.max_steps {
        let previous = state.lin.clone();
        let stats = map.advance(&mut state, step)?;
        max_sum_drift = max_sum_drift.max(stats.sum_drift);
        min_pre_clamp = min_pre_clamp.min(stats.min_coordinate);
        steps = step;

        let residual = sup_distance(&state.lin, &previous);
        if residuals.len() == window {
            residuals.pop_front();
        }
        residuals.push_back(residual);
        quiet = if residual <= config.tol { quiet + 1 } else { 0 };

        if recent.len() == window + 1 {
            recent.pop_front();
        }
        recent.push_back((step, state.clone()));

        if step % stride == 0 {
            records.push(Record {
                step,
                point: state.point(),
                log: state.log.clone(),
            });
        }

        if config.stop_on_convergence && quiet >= window && step >= 2 * window {
            let growth = log_growth(&state.log, &recent.front().unwrap().1.log);
            if growth.iter().all(|&g| g < ESCAPE_LOG_GROWTH) {
                termination = Termination::Converged;
                break;
            }
        }
    }

    let window_start = recent.front().unwrap().0;
    records.retain(|r| r.step < window_start);
    records.extend(recent.iter().map(|(step, s)| Record {
        step: *step,
        point: s.point(),
        log: s.log.clone(),
    }));
    let window_log_growth = log_growth(&state.log, &recent.front().unwrap().1.log);

    Ok(Trajectory {
        initial: x0.clone(),
        records,
        steps,
        termination,
        tol: config.tol,
        window,
        final_residuals: residuals.into_iter().collect(),
        window_log_growth,
        max_sum_drift,
        min_pre_clamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{QsoOperator, SkewMatrix};
    use crate::model::{Alphabets, Graph, Model, DEFAULT_CELL_CAP};

    fn example(alpha: f64, beta: f64) -> QsoOperator {
        QsoOperator::generated(
            Model::new(
                Graph::new([1, 2], []).unwrap(),
                &Alphabets::shared(["A", "a"]),
                vec![vec![alpha, 1.0 - alpha], vec![beta, 1.0 - beta]],
                DEFAULT_CELL_CAP,
            )
            .unwrap(),
        )
    }

    #[test]
    fn example_converges_to_first_vertex() {
        let t = iterate(
            &example(0.7, 0.6),
            &SimplexPoint::uniform(4),
            &IterateConfig::default(),
        )
        .unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.final_point().distance(&SimplexPoint::vertex(4, 0)) < 1e-6);
        assert!(t.max_sum_drift <= 1e-9 && t.min_pre_clamp >= -1e-12);
        let steps: Vec<usize> = t.records.iter().map(|r| r.step).collect();
        assert!(steps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(steps[0], 0);
        assert_eq!(*steps.last().unwrap(), t.steps);
    }

    #[test]
    fn vertex_start_converges_immediately() {
        let e = SimplexPoint::vertex(4, 2);
        let t = iterate(&example(0.7, 0.6), &e, &IterateConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert_eq!(t.steps, 2 * DEFAULT_WINDOW);
        assert_eq!(t.final_point(), &e);
    }

    #[test]
    fn zakharevich_runs_out_the_budget() {
        let a = SkewMatrix::new(vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ])
        .unwrap();
        let x0 = SimplexPoint::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = iterate(&a, &x0, &IterateConfig::steps(20_000)).unwrap();
        assert_eq!(t.termination, Termination::Budget);
        assert!(!t.escaping().is_empty());
        // the escaping coordinate is far below any representable f64
        let j = t.escaping()[0];
        assert!(t.final_record().log[j] < -1000.0);
    }

    #[test]
    fn stride_bounds_the_record_count() {
        let cfg = IterateConfig {
            max_steps: 10_000,
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        let t = iterate(&example(0.7, 0.6), &SimplexPoint::uniform(4), &cfg).unwrap();
        assert_eq!(t.steps, 10_000);
        assert!(t.records.len() <= MAX_RECORDS + DEFAULT_WINDOW + 2);
        assert_eq!(t.final_residuals.len(), DEFAULT_WINDOW);
    }
}
