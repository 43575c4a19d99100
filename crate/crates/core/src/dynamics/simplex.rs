use std::fmt;

use crate::error::{Error, Result};

/// Coordinates down to this value are clamped to zero; anything lower is an error.
pub const NEGATIVE_TOL: f64 = 1e-12;
/// Accepted deviation of the coordinate sum from one.
pub const SUM_TOL: f64 = 1e-9;

/// A probability vector over an indexed finite set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

/// Deviation from the simplex of a raw operator image, measured before
/// clamping and renormalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    /// `|Σx - 1|` before renormalization.
    pub sum_drift: f64,
    /// Smallest coordinate before clamping.
    pub min_coordinate: f64,
}

impl StepStats {
    pub fn of(raw: &[f64]) -> Self {
        let sum: f64 = raw.iter().sum();
        Self {
            sum_drift: (sum - 1.0).abs(),
            min_coordinate: raw.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

impl SimplexPoint {
    /// Validates and normalizes a user-supplied vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        let stats = StepStats::of(&coords);
        Self::check(coords, stats).map_err(Error::InvalidPoint)
    }

    /// Clamps and renormalizes an operator image, failing when it left the
    /// simplex by more than rounding.
    pub(crate) fn from_image(raw: Vec<f64>, step: usize) -> Result<(Self, StepStats)> {
        let stats = StepStats::of(&raw);
        let point =
            Self::check(raw, stats).map_err(|detail| Error::NumericalIntegrity { step, detail })?;
        Ok((point, stats))
    }

    fn check(mut coords: Vec<f64>, stats: StepStats) -> std::result::Result<Self, String> {
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(format!("coordinate {} is {}", i + 1, coords[i]));
        }
        if stats.min_coordinate < -NEGATIVE_TOL {
            return Err(format!(
                "coordinate value {:e} is below -{NEGATIVE_TOL:e}",
                stats.min_coordinate
            ));
        }
        if stats.sum_drift > SUM_TOL {
            return Err(format!(
                "coordinates sum to {} (|Σx - 1| = {:e})",
                1.0 + stats.sum_drift * (coords.iter().sum::<f64>() - 1.0).signum(),
                stats.sum_drift
            ));
        }
        for v in coords.iter_mut() {
            *v = v.max(0.0);
        }
        let sum: f64 = coords.iter().sum();
        for v in coords.iter_mut() {
            *v /= sum;
        }
        Ok(Self { coords })
    }

    /// Wraps coordinates that are already normalized; used for exact states
    /// reconstructed from log coordinates.
    pub(crate) fn from_normalized(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            coords: vec![1.0 / n as f64; n],
        }
    }

    pub fn vertex(n: usize, k: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[k] = 1.0;
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn min(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// All coordinates strictly positive.
    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|&v| v > 0.0)
    }

    /// `‖self − other‖∞`.
    pub fn distance(&self, other: &SimplexPoint) -> f64 {
        sup_distance(&self.coords, &other.coords)
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl fmt::Display for SimplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|v| format!("{v:.6}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A linear constraint defining a set of simplex points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `x_i = 0`
    Zero(usize),
    /// `x_i = x_j`
    Equal(usize, usize),
}

/// A named set of points cut out by linear constraints, such as a face or a
/// line of fixed points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSet {
    pub name: String,
    pub constraints: Vec<Constraint>,
}

impl FixedSet {
    pub fn new(name: impl Into<String>, constraints: Vec<Constraint>) -> Self {
        Self {
            name: name.into(),
            constraints,
        }
    }

    pub fn contains(&self, x: &SimplexPoint, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// Largest constraint residual at `x`.
    pub fn distance(&self, x: &SimplexPoint) -> f64 {
        self.constraints
            .iter()
            .map(|c| match *c {
                Constraint::Zero(i) => x.get(i).abs(),
                Constraint::Equal(i, j) => (x.get(i) - x.get(j)).abs(),
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_negative_coordinates_are_clamped() {
        let p = SimplexPoint::new(vec![0.5, 0.5 + 5e-13, -5e-13]).unwrap();
        assert_eq!(p.get(2), 0.0);
        assert!((p.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_simplex_vectors_are_rejected() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.1, -0.1]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
        assert!(matches!(
            SimplexPoint::from_image(vec![0.7, 0.7], 4),
            Err(Error::NumericalIntegrity { step: 4, .. })
        ));
    }

    #[test]
    fn fixed_set_membership() {
        let s1 = FixedSet::new("S1", vec![Constraint::Zero(2), Constraint::Zero(3)]);
        let s5 = FixedSet::new("S5", vec![Constraint::Equal(1, 3), Constraint::Equal(0, 2)]);
        let x = SimplexPoint::new(vec![0.4, 0.1, 0.4, 0.1]).unwrap();
        assert!(s5.contains(&x, 1e-12));
        assert!(!s1.contains(&x, 1e-6));
        assert!(s1.contains(&SimplexPoint::vertex(4, 0), 0.0));
    }
}
