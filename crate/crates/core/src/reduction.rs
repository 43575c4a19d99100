//! Reduction of a product-measure operator to one Volterra operator per
//! connected component.
//!
//! The marginal of the image on component `i` depends only on the marginal
//! of the argument on component `i`:
//!
//! ```text
//! X'_{i,ω} = X_{i,ω} (1 + Σ_ψ a^{(i)}_{ω,ψ} X_{i,ψ}),
//! a^{(i)}_{ω,ψ} = (μ_i(ω) − μ_i(ψ)) / (μ_i(ω) + μ_i(ψ)).
//! ```

use nalgebra::DMatrix;

use crate::construct::{QsoOperator, SkewMatrix};
use crate::dynamics::{apply, apply_volterra, SimplexPoint};
use crate::error::{Error, Result};
use crate::model::{ComponentMeasure, ConfigurationSpace, Model};

/// Singular values below this bound count as zero in rank computations.
pub const RANK_TOL: f64 = 1e-10;
/// Marginal entries at or below this value pin their cells to zero.
pub const PIN_TOL: f64 = 1e-12;

/// Distribution of the component-`i` configuration under a cell distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub component: usize,
    pub point: SimplexPoint,
}

impl Marginal {
    pub fn values(&self) -> &[f64] {
        self.point.coords()
    }
}

fn check_point(space: &ConfigurationSpace, x: &SimplexPoint) -> Result<()> {
    if x.dim() != space.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: space.cell_count(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// `X_{i,ω} = Σ_{σ: σ_i = ω} λ(σ)` for component `i` (0-based).
pub fn marginalize(space: &ConfigurationSpace, x: &SimplexPoint, i: usize) -> Result<Marginal> {
    check_point(space, x)?;
    let count = space.component_count();
    if i >= count {
        return Err(Error::NoSuchComponent { index: i, count });
    }
    let mut values = vec![0.0; space.components()[i].configuration_count()];
    for (cell, &v) in x.coords().iter().enumerate() {
        values[space.digit(cell, i)] += v;
    }
    Ok(Marginal {
        component: i,
        point: SimplexPoint::new(values)?,
    })
}

/// Marginals on every component.
pub fn marginals(space: &ConfigurationSpace, x: &SimplexPoint) -> Result<Vec<Marginal>> {
    (0..space.component_count())
        .map(|i| marginalize(space, x, i))
        .collect()
}

/// The Volterra operator acting on one component's marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedComponent {
    pub measure: ComponentMeasure,
    pub matrix: SkewMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub components: Vec<ReducedComponent>,
}

/// Skew matrix `(μ(ω) − μ(ψ)) / (μ(ω) + μ(ψ))` of one component measure.
pub fn component_matrix(measure: &ComponentMeasure) -> SkewMatrix {
    let w = measure.weights();
    SkewMatrix::from_upper(w.len(), |k, i| (w[k] - w[i]) / (w[k] + w[i]))
}

/// Reduced Volterra operators, built from the component measures alone.
pub fn reduce(model: &Model) -> ReducedSystem {
    ReducedSystem {
        components: model
            .measure()
            .parts()
            .iter()
            .map(|m| ReducedComponent {
                measure: m.clone(),
                matrix: component_matrix(m),
            })
            .collect(),
    }
}

/// Advances every component marginal by its own Volterra operator.
pub fn reduced_step(system: &ReducedSystem, marginals: &[Marginal]) -> Result<Vec<Marginal>> {
    if marginals.len() != system.components.len() {
        return Err(Error::DimensionMismatch {
            expected: system.components.len(),
            found: marginals.len(),
        });
    }
    system
        .components
        .iter()
        .zip(marginals)
        .map(|(c, m)| {
            Ok(Marginal {
                component: m.component,
                point: apply_volterra(&c.matrix, &m.point)?,
            })
        })
        .collect()
}

/// Largest gap between the marginals of `V λ` and the reduced step of the
/// marginals of `λ`.
pub fn commutation_residual(model: &Model, x: &SimplexPoint) -> Result<f64> {
    commutation_residual_with(&QsoOperator::generated(model.clone()), &reduce(model), x)
}

/// [`commutation_residual`] for a prebuilt operator and reduced system.
pub fn commutation_residual_with(
    op: &QsoOperator,
    system: &ReducedSystem,
    x: &SimplexPoint,
) -> Result<f64> {
    let model = op.model().ok_or_else(|| {
        Error::InconsistentMarginals("explicit tensors have no component structure".into())
    })?;
    let space = model.space();
    let image = apply(op, x)?;
    let direct = marginals(space, &image)?;
    let reduced = reduced_step(system, &marginals(space, x)?)?;
    Ok(direct
        .iter()
        .zip(&reduced)
        .map(|(a, b)| a.point.distance(&b.point))
        .fold(0.0, f64::max))
}

fn check_marginals(space: &ConfigurationSpace, marginals: &[Marginal]) -> Result<()> {
    if marginals.len() != space.component_count() {
        return Err(Error::InconsistentMarginals(format!(
            "{} marginals for {} components",
            marginals.len(),
            space.component_count()
        )));
    }
    for (i, (m, c)) in marginals.iter().zip(space.components()).enumerate() {
        if m.values().len() != c.configuration_count() {
            return Err(Error::InconsistentMarginals(format!(
                "marginal {} has {} entries, component has {} configurations",
                i + 1,
                m.values().len(),
                c.configuration_count()
            )));
        }
    }
    Ok(())
}

/// `λ(σ) = Π_i X_{i,σ_i}`.
pub fn product_point(space: &ConfigurationSpace, marginals: &[Marginal]) -> Result<SimplexPoint> {
    check_marginals(space, marginals)?;
    let coords = (0..space.cell_count())
        .map(|cell| {
            marginals
                .iter()
                .enumerate()
                .map(|(i, m)| m.values()[space.digit(cell, i)])
                .product()
        })
        .collect();
    SimplexPoint::new(coords)
}

/// Distributions with prescribed component marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// The product solution, which always has the prescribed marginals.
    pub product: SimplexPoint,
    /// Dimension of the affine solution set, ignoring nonnegativity.
    pub affine_dimension: usize,
    /// Dimension of the solution set inside the simplex.
    pub dimension: usize,
    /// Largest marginal-constraint residual of the product solution.
    pub residual: f64,
}

impl Reconstruction {
    /// Nonnegativity pins the solution to a single point.
    pub fn is_unique(&self) -> bool {
        self.dimension == 0
    }
}

fn incidence(space: &ConfigurationSpace, columns: &[usize]) -> DMatrix<f64> {
    let offsets: Vec<usize> = space
        .components()
        .iter()
        .scan(0, |acc, c| {
            let start = *acc;
            *acc += c.configuration_count();
            Some(start)
        })
        .collect();
    let rows: usize = space
        .components()
        .iter()
        .map(|c| c.configuration_count())
        .sum();
    let mut a = DMatrix::zeros(rows, columns.len());
    for (col, &cell) in columns.iter().enumerate() {
        for (i, &off) in offsets.iter().enumerate() {
            a[(off + space.digit(cell, i), col)] = 1.0;
        }
    }
    a
}

fn rank(a: DMatrix<f64>) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    a.rank(RANK_TOL)
}

/// Solves the marginal constraints `Σ_{σ_i = ω} λ(σ) = X_{i,ω}` for limit
/// marginals: the canonical product solution and the size of the full
/// solution set.
///
/// Cells whose product value vanishes are forced to zero by nonnegativity.
/// The product solution is strictly positive on the others, so the solution
/// set inside the simplex has the dimension of the constraint kernel on those
/// cells.
pub fn reconstruct(space: &ConfigurationSpace, marginals: &[Marginal]) -> Result<Reconstruction> {
    let product = product_point(space, marginals)?;
    let n = space.cell_count();
    let all: Vec<usize> = (0..n).collect();
    let affine_dimension = n - rank(incidence(space, &all));
    let free: Vec<usize> = (0..n)
        .filter(|&cell| {
            marginals
                .iter()
                .enumerate()
                .all(|(i, m)| m.values()[space.digit(cell, i)] > PIN_TOL)
        })
        .collect();
    if free.is_empty() {
        return Err(Error::InconsistentMarginals(
            "every cell is pinned to zero".into(),
        ));
    }
    let dimension = free.len() - rank(incidence(space, &free));
    let residual = check_product(space, &product, marginals)?;
    Ok(Reconstruction {
        product,
        affine_dimension,
        dimension,
        residual,
    })
}

fn check_product(
    space: &ConfigurationSpace,
    product: &SimplexPoint,
    target: &[Marginal],
) -> Result<f64> {
    let actual = marginals(space, product)?;
    Ok(actual
        .iter()
        .zip(target)
        .map(|(a, b)| a.point.distance(&b.point))
        .fold(0.0, f64::max))
}

/// `‖λ − Π_i marginalize(λ, i)‖∞ ≤ tol`.
pub fn is_product_form(space: &ConfigurationSpace, x: &SimplexPoint, tol: f64) -> bool {
    marginals(space, x)
        .and_then(|m| product_point(space, &m))
        .map(|p| p.distance(x) <= tol)
        .unwrap_or(false)
}
