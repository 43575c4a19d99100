//! Tournaments of Volterra operators and the geometric decay of the
//! coordinates outside their dominant strong component.
//!
//! The edge between `k` and `i` points `k → i` when `a_{ki} < 0` and `i → k`
//! when `a_{ki} > 0`. For a 2-state map with `a_{12} > 0` the second
//! coordinate dies out and the edge points `2 → 1`, so survivors are the
//! class that receives every edge: the sink of the condensation.

use std::fmt;

use crate::construct::SkewMatrix;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Off-diagonal coefficients at or below this magnitude count as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Least-squares goodness required to call a decay geometric.
pub const GEOMETRIC_R2: f64 = 0.99;
/// Minimum number of tail samples for a decay fit.
pub const MIN_FIT_SAMPLES: usize = 100;
/// Tail samples used by a decay fit.
pub const MAX_FIT_SAMPLES: usize = 1000;
/// Coordinates below this value are treated as zero.
pub const ZERO_FLOOR: f64 = 1e-300;

/// Complete directed graph on `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament {
    n: usize,
    edges: Vec<bool>,
}

impl Tournament {
    /// Builds a tournament from `forward(k, i)` for `k < i`: `true` orients
    /// the pair `k → i`, `false` orients it `i → k`.
    pub fn from_fn(n: usize, mut forward: impl FnMut(usize, usize) -> bool) -> Self {
        let mut edges = vec![false; n * n];
        for k in 0..n {
            for i in (k + 1)..n {
                if forward(k, i) {
                    edges[k * n + i] = true;
                } else {
                    edges[i * n + k] = true;
                }
            }
        }
        Self { n, edges }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `true` iff the edge is directed `from → to`.
    #[inline]
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from * self.n + to]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&w| self.has_edge(v, w)).count()
    }
}

impl fmt::Display for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in 0..self.n {
            for i in 0..self.n {
                if self.has_edge(k, i) {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}→{}", k + 1, i + 1)?;
                    first = false;
                }
            }
        }
        Ok(())
    }
}

/// Tournament of a Volterra coefficient matrix. Fails when some
/// off-diagonal coefficient is zero, since ties leave the pair unoriented.
pub fn build_tournament(a: &SkewMatrix) -> Result<Tournament> {
    let n = a.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| ((k + 1)..n).map(move |i| (k, i)))
        .filter(|&(k, i)| a.get(k, i).abs() <= TIE_TOL)
        .collect();
    if !pairs.is_empty() {
        return Err(Error::DegenerateCoefficients { pairs });
    }
    Ok(Tournament::from_fn(n, |k, i| a.get(k, i) < 0.0))
}

/// Strong components of a tournament, from the source class to the sink class.
/// Every edge between two classes points from the earlier to the later one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    pub classes: Vec<Vec<usize>>,
}

impl Condensation {
    pub fn sink(&self) -> Option<&[usize]> {
        self.classes.last().map(Vec::as_slice)
    }
}

/// Strong components via the score sequence: sorted by ascending out-degree,
/// the first `k` vertices form a set that every other vertex beats exactly
/// when their scores sum to `k(k-1)/2`, and those cut points delimit the
/// components.
pub fn condensation(t: &Tournament) -> Condensation {
    let n = t.dim();
    let mut order: Vec<(usize, usize)> = (0..n).map(|v| (t.out_degree(v), v)).collect();
    order.sort_unstable();
    let mut classes = Vec::new();
    let mut current = Vec::new();
    let mut score_sum = 0;
    for (k, &(score, v)) in order.iter().enumerate() {
        current.push(v);
        score_sum += score;
        let size = k + 1;
        if score_sum == size * (size - 1) / 2 {
            current.sort_unstable();
            classes.push(std::mem::take(&mut current));
        }
    }
    classes.reverse();
    Condensation { classes }
}

/// Strongly connected: every vertex reaches every other one.
pub fn is_strong(t: &Tournament) -> bool {
    condensation(t).classes.len() <= 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecayPrediction {
    pub tournament: Tournament,
    pub condensation: Condensation,
    pub survivors: Vec<usize>,
    pub decaying: Vec<usize>,
}

impl DecayPrediction {
    pub fn is_strong(&self) -> bool {
        self.decaying.is_empty()
    }
}

/// Coordinates that vanish geometrically from interior starts: all vertices
/// outside the sink class of the condensation.
pub fn predict_decay(a: &SkewMatrix) -> Result<DecayPrediction> {
    let tournament = build_tournament(a)?;
    let condensation = condensation(&tournament);
    let survivors = condensation
        .sink()
        .map(<[usize]>::to_vec)
        .unwrap_or_default();
    let decaying = (0..a.dim()).filter(|v| !survivors.contains(v)).collect();
    Ok(DecayPrediction {
        tournament,
        condensation,
        survivors,
        decaying,
    })
}

/// Log-linear fit `ln x_j(l) ≈ intercept + slope · l` over a trajectory tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub coordinate: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    pub samples: usize,
}

impl DecayFit {
    /// Per-step ratio `x_j(l+1) / x_j(l)` implied by the slope.
    pub fn rate(&self) -> f64 {
        self.slope.exp()
    }

    pub fn is_geometric(&self) -> bool {
        self.slope < 0.0 && self.r_squared >= GEOMETRIC_R2
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // a flat series has nothing to explain
    let r_squared = if ss_tot > f64::EPSILON * mean_y.abs().max(1.0) {
        1.0 - ss_res / ss_tot
    } else {
        0.0
    };
    (slope, intercept, r_squared)
}

/// Fits the geometric decay of coordinate `j`.
///
/// Samples where the coordinate is below [`ZERO_FLOOR`] are dropped; the fit
/// uses the later half of the remaining recorded points, at most
/// [`MAX_FIT_SAMPLES`] of them.
pub fn decay_fit(trajectory: &Trajectory, j: usize) -> Result<DecayFit> {
    let floor = ZERO_FLOOR.ln();
    let usable: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .filter(|r| r.log[j] >= floor)
        .map(|r| (r.step as f64, r.log[j]))
        .collect();
    let vanished = trajectory.final_record().log[j] < floor;
    let start = (usable.len() / 2).max(usable.len().saturating_sub(MAX_FIT_SAMPLES));
    let tail = &usable[start..];
    if tail.len() < MIN_FIT_SAMPLES {
        if vanished {
            return Err(Error::CoordinateZero { coordinate: j });
        }
        return Err(Error::InsufficientData {
            coordinate: j,
            required: MIN_FIT_SAMPLES,
            found: tail.len(),
        });
    }
    let (slope, intercept, r_squared) = least_squares(tail);
    Ok(DecayFit {
        coordinate: j,
        slope,
        intercept,
        r_squared,
        samples: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate, IterateConfig, SimplexPoint};

    fn skew(rows: Vec<Vec<f64>>) -> SkewMatrix {
        SkewMatrix::new(rows).unwrap()
    }

    fn zakharevich() -> SkewMatrix {
        skew(vec![
            vec![0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ])
    }

    fn by_mass(mu: &[f64]) -> SkewMatrix {
        SkewMatrix::from_upper(mu.len(), |k, i| (mu[k] - mu[i]) / (mu[k] + mu[i]))
    }

    #[test]
    fn two_state_orientation() {
        let t = build_tournament(&skew(vec![vec![0.0, 0.4], vec![-0.4, 0.0]])).unwrap();
        assert!(t.has_edge(1, 0) && !t.has_edge(0, 1));
        assert!(!is_strong(&t));
    }

    #[test]
    fn zakharevich_tournament_is_a_cycle() {
        let t = build_tournament(&zakharevich()).unwrap();
        assert!(t.has_edge(1, 0) && t.has_edge(2, 1) && t.has_edge(0, 2));
        assert!(is_strong(&t));
        assert_eq!(condensation(&t).classes, vec![vec![0, 1, 2]]);
        let p = predict_decay(&zakharevich()).unwrap();
        assert_eq!(p.survivors, vec![0, 1, 2]);
        assert!(p.decaying.is_empty());
    }

    #[test]
    fn mass_ordered_tournament_is_transitive() {
        let a = by_mass(&[0.5, 0.3, 0.2]);
        let t = build_tournament(&a).unwrap();
        assert!(!is_strong(&t));
        assert_eq!(condensation(&t).classes, vec![vec![2], vec![1], vec![0]]);
        let p = predict_decay(&a).unwrap();
        assert_eq!(p.survivors, vec![0]);
        assert_eq!(p.decaying, vec![1, 2]);
    }

    #[test]
    fn cycle_above_two_ordered_singletons() {
        // vertices 0,1,2 form a cycle; all of them beat 3; 3 beats 4; all beat 4
        let t = Tournament::from_fn(5, |k, i| match (k, i) {
            (0, 1) | (1, 2) => true,
            (0, 2) => false,
            (_, 3) | (_, 4) => true,
            _ => unreachable!(),
        });
        assert_eq!(
            condensation(&t).classes,
            vec![vec![0, 1, 2], vec![3], vec![4]]
        );
    }

    #[test]
    fn ties_are_reported() {
        let err = build_tournament(&by_mass(&[0.5, 0.5])).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateCoefficients {
                pairs: vec![(0, 1)]
            }
        );
        assert!(predict_decay(&SkewMatrix::zeros(3)).is_err());
    }

    #[test]
    fn decay_fit_of_the_two_state_map() {
        let a = skew(vec![vec![0.0, 0.4], vec![-0.4, 0.0]]);
        let cfg = IterateConfig {
            max_steps: 600,
            stride: Some(1),
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        let t = iterate(&a, &SimplexPoint::uniform(2), &cfg).unwrap();
        let fit = decay_fit(&t, 1).unwrap();
        assert!(fit.is_geometric());
        // x_2 shrinks by 1 - 0.4 x_1 → 0.6 per step
        assert!((fit.rate() - 0.6).abs() < 1e-6, "{}", fit.rate());
        assert!(!decay_fit(&t, 0).unwrap().is_geometric());
    }

    #[test]
    fn no_decay_without_interaction() {
        let cfg = IterateConfig {
            max_steps: 400,
            stride: Some(1),
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        let x0 = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let t = iterate(&SkewMatrix::zeros(3), &x0, &cfg).unwrap();
        let fit = decay_fit(&t, 0).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(!fit.is_geometric());
    }

    #[test]
    fn oscillating_coordinate_is_not_geometric() {
        let cfg = IterateConfig {
            max_steps: 2000,
            stride: Some(1),
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        // interior, non-central start of a strong tournament map with |a| < 1
        let a = skew(vec![
            vec![0.0, 0.5, -0.5],
            vec![-0.5, 0.0, 0.5],
            vec![0.5, -0.5, 0.0],
        ]);
        let x0 = SimplexPoint::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = iterate(&a, &x0, &cfg).unwrap();
        assert!(!decay_fit(&t, 0).unwrap().is_geometric());
    }

    #[test]
    fn short_tails_are_rejected() {
        let a = skew(vec![vec![0.0, 0.4], vec![-0.4, 0.0]]);
        let cfg = IterateConfig {
            max_steps: 100,
            stride: Some(1),
            stop_on_convergence: false,
            ..IterateConfig::default()
        };
        let t = iterate(&a, &SimplexPoint::uniform(2), &cfg).unwrap();
        assert!(matches!(
            decay_fit(&t, 1),
            Err(Error::InsufficientData { coordinate: 1, .. })
        ));
    }
}
