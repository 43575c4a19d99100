use std::fmt;

use crate::dynamics::iterate::Trajectory;
use crate::dynamics::simplex::{FixedSet, SimplexPoint};
use crate::error::{Error, Result};
use crate::tournament::{decay_fit, DecayFit};

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    ConvergedToPoint,
    /// Name of the supplied fixed set the tail settled in.
    ConvergedToSet(String),
    NonConvergent,
    Undecided,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::ConvergedToPoint => write!(f, "ConvergedToPoint"),
            Classification::ConvergedToSet(name) => write!(f, "ConvergedToSet({name})"),
            Classification::NonConvergent => write!(f, "NonConvergent"),
            Classification::Undecided => write!(f, "Undecided"),
        }
    }
}

/// Decay-fit outcome for one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayStatus {
    Fit(DecayFit),
    Vanished,
    InsufficientData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub classification: Classification,
    /// Final point when the run converged.
    pub limit: Option<SimplexPoint>,
    pub final_point: SimplexPoint,
    /// Largest step residual over the final window.
    pub final_residual: f64,
    /// Largest per-coordinate `max − min` over the second half of the run.
    pub tail_oscillation: f64,
    /// The same in log coordinates, over coordinates that stay positive.
    pub log_tail_oscillation: f64,
    /// Coordinates that at least doubled over the final window.
    pub escaping: Vec<usize>,
    pub on_boundary: bool,
    /// Smallest coordinate at the start and at the end of the run.
    pub min_coordinate_trend: (f64, f64),
    /// Membership of the final point in each supplied set.
    pub memberships: Vec<(String, bool)>,
    pub decay: Vec<DecayStatus>,
}

/// Classifies the long-run behaviour of a trajectory.
///
/// * `ConvergedToPoint`: the last `window` residuals are `≤ tol` and no
///   coordinate is escaping.
/// * `ConvergedToSet`: otherwise, every point of the final window lies within
///   `membership_tol` of one of `known_fixed_sets`.
/// * `NonConvergent`: the tail oscillates by at least `10 · tol`, or some
///   coordinate keeps growing geometrically from below the resolution of the
///   residual.
/// * `Undecided`: none of the above.
pub fn classify_limit(
    trajectory: &Trajectory,
    known_fixed_sets: &[FixedSet],
    membership_tol: f64,
) -> Result<LimitReport> {
    let window = trajectory.window;
    if trajectory.steps < 2 * window {
        return Err(Error::TooShort {
            required: 2 * window,
            found: trajectory.steps,
        });
    }
    let tol = trajectory.tol;
    let n = trajectory.initial.dim();
    let final_point = trajectory.final_point().clone();
    let final_residual = trajectory
        .final_residuals
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let escaping = trajectory.escaping();

    let half = trajectory.steps / 2;
    let tail: Vec<_> = trajectory
        .records
        .iter()
        .filter(|r| r.step >= half)
        .collect();
    let mut tail_oscillation = 0.0f64;
    let mut log_tail_oscillation = 0.0f64;
    for j in 0..n {
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.point.get(j)), hi.max(r.point.get(j)))
            });
        tail_oscillation = tail_oscillation.max(hi - lo);
        if tail.iter().all(|r| r.log[j].is_finite()) {
            let (lo, hi) = tail
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.log[j]), hi.max(r.log[j]))
                });
            log_tail_oscillation = log_tail_oscillation.max(hi - lo);
        }
    }

    let window_start = trajectory.steps - window;
    let settled_in = known_fixed_sets.iter().find(|s| {
        trajectory
            .records
            .iter()
            .filter(|r| r.step >= window_start)
            .all(|r| s.contains(&r.point, membership_tol))
    });

    let classification = if final_residual <= tol && escaping.is_empty() {
        Classification::ConvergedToPoint
    } else if let Some(set) = settled_in.filter(|_| escaping.is_empty()) {
        Classification::ConvergedToSet(set.name.clone())
    } else if tail_oscillation >= 10.0 * tol || !escaping.is_empty() {
        Classification::NonConvergent
    } else {
        Classification::Undecided
    };

    let limit = match classification {
        Classification::ConvergedToPoint | Classification::ConvergedToSet(_) => {
            Some(final_point.clone())
        }
        _ => None,
    };
    let memberships = known_fixed_sets
        .iter()
        .map(|s| (s.name.clone(), s.contains(&final_point, membership_tol)))
        .collect();
    let decay = (0..n)
        .map(|j| match decay_fit(trajectory, j) {
            Ok(fit) => DecayStatus::Fit(fit),
            Err(Error::CoordinateZero { .. }) => DecayStatus::Vanished,
            Err(_) => DecayStatus::InsufficientData,
        })
        .collect();

    Ok(LimitReport {
        classification,
        limit,
        on_boundary: final_point.min() <= tol,
        min_coordinate_trend: (trajectory.initial.min(), final_point.min()),
        final_point,
        final_residual,
        tail_oscillation,
        log_tail_oscillation,
        escaping,
        memberships,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{QsoOperator, SkewMatrix};
    use crate::dynamics::simplex::Constraint;
    use crate::dynamics::{iterate, IterateConfig};
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

    fn faces() -> Vec<FixedSet> {
        vec![
            FixedSet::new("S1", vec![Constraint::Zero(2), Constraint::Zero(3)]),
            FixedSet::new("S2", vec![Constraint::Zero(0), Constraint::Zero(1)]),
            FixedSet::new("S3", vec![Constraint::Zero(1), Constraint::Zero(3)]),
            FixedSet::new("S4", vec![Constraint::Zero(0), Constraint::Zero(2)]),
        ]
    }

    #[test]
    fn converged_run_lies_in_two_faces() {
        let t = iterate(
            &example(0.7, 0.6),
            &SimplexPoint::uniform(4),
            &IterateConfig::default(),
        )
        .unwrap();
        let r = classify_limit(&t, &faces(), 1e-6).unwrap();
        assert_eq!(r.classification, Classification::ConvergedToPoint);
        assert!(r.on_boundary);
        let members: Vec<&str> = r
            .memberships
            .iter()
            .filter(|(_, m)| *m)
            .map(|(n, _)| n.as_str())
            .collect();
        assert_eq!(members, ["S1", "S3"]);
    }

    #[test]
    fn zakharevich_is_non_convergent() {
        let a = SkewMatrix::new(vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ])
        .unwrap();
        let x0 = SimplexPoint::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = iterate(&a, &x0, &IterateConfig::steps(10_000)).unwrap();
        let r = classify_limit(&t, &[], 1e-6).unwrap();
        assert_eq!(r.classification, Classification::NonConvergent);
        assert!(r.limit.is_none());
    }

    #[test]
    fn interior_fixed_point_is_converged_interior() {
        let x0 = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let t = iterate(&SkewMatrix::zeros(3), &x0, &IterateConfig::default()).unwrap();
        let r = classify_limit(&t, &[], 1e-6).unwrap();
        assert_eq!(r.classification, Classification::ConvergedToPoint);
        assert!(!r.on_boundary);
    }

    #[test]
    fn slow_approach_to_a_named_set() {
        // 2α₁ − 1 = 0.002: the first marginal moves by ~1e-4 per step
        let op = example(0.501, 0.5);
        let cfg = IterateConfig {
            max_steps: 200,
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        let t = iterate(&op, &SimplexPoint::uniform(4), &cfg).unwrap();
        let r = classify_limit(&t, &faces(), 1e-6).unwrap();
        // still far from S1 after 200 steps and moving by more than 10·tol
        assert_eq!(r.classification, Classification::NonConvergent);
        let r = classify_limit(&t, &faces(), 0.5).unwrap();
        assert_eq!(
            r.classification,
            Classification::ConvergedToSet("S1".into())
        );
    }

    #[test]
    fn too_short() {
        let cfg = IterateConfig {
            max_steps: 10,
            ..IterateConfig::default()
        };
        let t = iterate(&example(0.7, 0.6), &SimplexPoint::uniform(4), &cfg).unwrap();
        assert!(matches!(
            classify_limit(&t, &[], 1e-6),
            Err(Error::TooShort {
                required: 100,
                found: 10
            })
        ));
    }
}
