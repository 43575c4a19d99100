//! Heredity coefficients of measure-generated operators, explicit cubic
//! tensors, and the Volterra property.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ConfigurationSpace, Model};

/// Default bound on the cell count of a materialized tensor (64³ entries).
pub const DEFAULT_TENSOR_CAP: usize = 64;

/// Entries with `k ∉ {i, j}` above this value make an operator non-Volterra.
pub const VOLTERRA_TOL: f64 = 1e-12;

/// Tolerance for user-supplied tensors and skew matrices.
pub const TENSOR_TOL: f64 = 1e-9;

/// Components on which cells `i` and `j` differ.
fn differing_components(space: &ConfigurationSpace, i: usize, j: usize) -> Vec<usize> {
    (0..space.component_count())
        .filter(|&c| space.digit(i, c) != space.digit(j, c))
        .collect()
}

/// Visits every cell of the admissible set of `(i, j)`. The callback gets the
/// cell index and a bitmask over `differing` telling which parent each
/// differing component was copied from (bit set = second parent).
fn for_each_admissible(
    space: &ConfigurationSpace,
    i: usize,
    j: usize,
    differing: &[usize],
    mut f: impl FnMut(usize, u32),
) {
    let deltas: Vec<isize> = differing
        .iter()
        .map(|&c| {
            (space.digit(j, c) as isize - space.digit(i, c) as isize) * space.stride(c) as isize
        })
        .collect();
    for mask in 0u32..(1u32 << differing.len()) {
        let mut index = i as isize;
        for (b, d) in deltas.iter().enumerate() {
            if mask & (1 << b) != 0 {
                index += d;
            }
        }
        f(index as usize, mask);
    }
}

/// Cells that agree with `i` or with `j` on every component, ascending.
/// Its size is `2^d` with `d` the number of components where they differ.
pub fn admissible_set(space: &ConfigurationSpace, i: usize, j: usize) -> Vec<usize> {
    let differing = differing_components(space, i, j);
    let mut cells = Vec::with_capacity(1 << differing.len());
    for_each_admissible(space, i, j, &differing, |k, _| cells.push(k));
    cells.sort_unstable();
    cells
}

/// `p_{ij,k} = μ(k) / μ(Ω(G,i,j))` for admissible `k`, else 0, with the
/// admissible mass summed cell by cell.
pub fn heredity_coefficient(model: &Model, i: usize, j: usize, k: usize) -> f64 {
    let cells = admissible_set(model.space(), i, j);
    if cells.binary_search(&k).is_err() {
        return 0.0;
    }
    let mass: f64 = cells.iter().map(|&c| model.measure_of(c)).sum();
    model.measure_of(k) / mass
}

/// Closed-form product coefficient `Π_c μ_c(k_c) / μ_c({i_c, j_c})`.
///
/// `μ_c({i_c, j_c})` is the mass of the two-element (or, when the parents
/// agree on component `c`, one-element) set of parental configurations.
pub fn product_coefficient(model: &Model, i: usize, j: usize, k: usize) -> f64 {
    let space = model.space();
    let mut p = 1.0;
    for (c, mu) in model.measure().parts().iter().enumerate() {
        let (a, b, t) = (space.digit(i, c), space.digit(j, c), space.digit(k, c));
        if t != a && t != b {
            return 0.0;
        }
        if a != b {
            p *= mu.weight(t) / (mu.weight(a) + mu.weight(b));
        }
    }
    p
}

/// Dense cubic matrix `p[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeredityTensor {
    n: usize,
    data: Vec<f64>,
}

impl HeredityTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    /// Shape-checks a nested `[i][j][k]` array. Values are not validated.
    pub fn from_nested(nested: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = nested.len();
        let mut data = Vec::with_capacity(n * n * n);
        for row in nested {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for fibre in row {
                if fibre.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: fibre.len(),
                    });
                }
                data.extend(fibre);
            }
        }
        Ok(Self { n, data })
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.fibre(i, j).to_vec()).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.data[(i * self.n + j) * self.n + k] = value;
    }

    /// Offspring distribution `p[i][j][·]`.
    #[inline]
    pub fn fibre(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n + j) * self.n;
        &self.data[start..start + self.n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite {
        i: usize,
        j: usize,
        k: usize,
    },
    Negative {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },
    RowSum {
        i: usize,
        j: usize,
        sum: f64,
    },
    Symmetry {
        i: usize,
        j: usize,
        k: usize,
        difference: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // 1-based indices, as printed to users
        match *self {
            Violation::NonFinite { i, j, k } => {
                write!(f, "p[{}][{}][{}] is not finite", i + 1, j + 1, k + 1)
            }
            Violation::Negative { i, j, k, value } => {
                write!(
                    f,
                    "p[{}][{}][{}] = {value:e} is negative",
                    i + 1,
                    j + 1,
                    k + 1
                )
            }
            Violation::RowSum { i, j, sum } => write!(
                f,
                "row sum over k of p[{}][{}][k] = {sum} (off by {:e})",
                i + 1,
                j + 1,
                sum - 1.0
            ),
            Violation::Symmetry {
                i,
                j,
                k,
                difference,
            } => write!(
                f,
                "p[{}][{}][{}] - p[{}][{}][{}] = {difference:e}",
                i + 1,
                j + 1,
                k + 1,
                j + 1,
                i + 1,
                k + 1
            ),
        }
    }
}

/// Every violated stochasticity or symmetry constraint of a tensor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks nonnegativity, unit row sums and `p_{ij,k} = p_{ji,k}` within [`TENSOR_TOL`].
pub fn validate(tensor: &HeredityTensor) -> ValidationReport {
    let n = tensor.dim();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let fibre = tensor.fibre(i, j);
            for (k, &value) in fibre.iter().enumerate() {
                if !value.is_finite() {
                    violations.push(Violation::NonFinite { i, j, k });
                } else if value < -TENSOR_TOL {
                    violations.push(Violation::Negative { i, j, k, value });
                }
            }
            let sum: f64 = fibre.iter().sum();
            if sum.is_finite() && (sum - 1.0).abs() > TENSOR_TOL {
                violations.push(Violation::RowSum { i, j, sum });
            }
            if i < j {
                for k in 0..n {
                    let difference = tensor.get(i, j, k) - tensor.get(j, i, k);
                    if difference.abs() > TENSOR_TOL {
                        violations.push(Violation::Symmetry {
                            i,
                            j,
                            k,
                            difference,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Dense tensor of a measure-generated operator, computed entry by entry
/// from admissible-set masses.
pub fn materialize(model: &Model, cap: usize) -> Result<HeredityTensor> {
    let n = model.cell_count();
    if n > cap {
        return Err(Error::CapExceeded {
            required: n as u128,
            cap,
        });
    }
    let mut tensor = HeredityTensor::zeros(n);
    for i in 0..n {
        for j in i..n {
            let cells = admissible_set(model.space(), i, j);
            let mass: f64 = cells.iter().map(|&c| model.measure_of(c)).sum();
            for k in cells {
                let p = model.measure_of(k) / mass;
                tensor.set(i, j, k, p);
                tensor.set(j, i, k, p);
            }
        }
    }
    Ok(tensor)
}

/// A quadratic stochastic operator.
#[derive(Debug, Clone, PartialEq)]
pub enum QsoOperator {
    /// Coefficients derived on demand from a graph and product measure.
    Generated(Model),
    /// Validated dense tensor.
    Explicit(HeredityTensor),
}

impl QsoOperator {
    /// Accepts a tensor that satisfies the stochasticity and symmetry
    /// constraints within [`TENSOR_TOL`], then clamps, symmetrizes and
    /// renormalizes it exactly.
    pub fn explicit(tensor: HeredityTensor) -> Result<Self> {
        let report = validate(&tensor);
        if !report.is_valid() {
            return Err(Error::InvalidTensor(report));
        }
        let n = tensor.dim();
        let mut clean = HeredityTensor::zeros(n);
        for i in 0..n {
            for j in i..n {
                let row: Vec<f64> = (0..n)
                    .map(|k| (0.5 * (tensor.get(i, j, k) + tensor.get(j, i, k))).max(0.0))
                    .collect();
                let sum: f64 = row.iter().sum();
                for (k, v) in row.into_iter().enumerate() {
                    clean.set(i, j, k, v / sum);
                    clean.set(j, i, k, v / sum);
                }
            }
        }
        Ok(QsoOperator::Explicit(clean))
    }

    pub fn generated(model: Model) -> Self {
        QsoOperator::Generated(model)
    }

    pub fn dim(&self) -> usize {
        match self {
            QsoOperator::Generated(m) => m.cell_count(),
            QsoOperator::Explicit(t) => t.dim(),
        }
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            QsoOperator::Generated(m) => Some(m),
            QsoOperator::Explicit(_) => None,
        }
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        match self {
            QsoOperator::Generated(m) => product_coefficient(m, i, j, k),
            QsoOperator::Explicit(t) => t.get(i, j, k),
        }
    }

    pub fn materialize(&self, cap: usize) -> Result<HeredityTensor> {
        match self {
            QsoOperator::Generated(m) => materialize(m, cap),
            QsoOperator::Explicit(t) => Ok(t.clone()),
        }
    }

    /// First coefficient that breaks the Volterra condition, if any.
    pub fn volterra_violation(&self) -> Option<(usize, usize, usize, f64)> {
        let n = self.dim();
        match self {
            QsoOperator::Generated(m) => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        // admissible sets of size 2 are exactly {i, j}
                        if differing_components(m.space(), i, j).len() < 2 {
                            continue;
                        }
                        for k in admissible_set(m.space(), i, j) {
                            if k != i && k != j {
                                let p = product_coefficient(m, i, j, k);
                                if p > VOLTERRA_TOL {
                                    return Some((i, j, k, p));
                                }
                            }
                        }
                    }
                }
                None
            }
            QsoOperator::Explicit(t) => {
                for i in 0..n {
                    for j in i..n {
                        for k in 0..n {
                            if k != i && k != j && t.get(i, j, k) > VOLTERRA_TOL {
                                return Some((i, j, k, t.get(i, j, k)));
                            }
                        }
                    }
                }
                None
            }
        }
    }
}

/// True iff `p_{ij,k} ≤ 1e-12` whenever `k ∉ {i, j}`.
pub fn is_volterra(op: &QsoOperator) -> bool {
    op.volterra_violation().is_none()
}

/// Skew-symmetric matrix with entries in `[-1, 1]` and zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    /// Accepts rows that are skew-symmetric with `|a| ≤ 1` within
    /// [`TENSOR_TOL`]; the stored matrix is exactly skew-symmetric.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSkew(format!(
                    "row {} has {} entries, expected {n}",
                    k + 1,
                    row.len()
                )));
            }
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() || v.abs() > 1.0 + TENSOR_TOL {
                    return Err(Error::InvalidSkew(format!(
                        "a[{}][{}] = {v} is outside [-1, 1]",
                        k + 1,
                        i + 1
                    )));
                }
            }
            if row[k].abs() > TENSOR_TOL {
                return Err(Error::InvalidSkew(format!(
                    "diagonal entry a[{}][{}] = {} is not zero",
                    k + 1,
                    k + 1,
                    row[k]
                )));
            }
        }
        for k in 0..n {
            for i in (k + 1)..n {
                if (rows[k][i] + rows[i][k]).abs() > TENSOR_TOL {
                    return Err(Error::InvalidSkew(format!(
                        "a[{}][{}] = {} but a[{}][{}] = {}",
                        k + 1,
                        i + 1,
                        rows[k][i],
                        i + 1,
                        k + 1,
                        rows[i][k]
                    )));
                }
            }
        }
        Ok(Self::from_upper(n, |k, i| {
            (0.5 * (rows[k][i] - rows[i][k])).clamp(-1.0, 1.0)
        }))
    }

    /// Builds the matrix from its strict upper triangle `a[k][i]`, `k < i`.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for k in 0..n {
            for i in (k + 1)..n {
                let v = upper(k, i);
                data[k * n + i] = v;
                data[i * n + k] = -v;
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.data[k * self.n + i]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|k| self.row(k).to_vec()).collect()
    }
}

impl fmt::Display for SkewMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n {
            let cells: Vec<String> = self.row(k).iter().map(|v| format!("{v:>10.6}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Canonical form `a_{ki} = 2 p_{ik,k} - 1` of a Volterra operator.
///
/// Computed as `p_{ik,k} - p_{ik,i}`, which equals `2 p_{ik,k} - 1` on a
/// Volterra fibre and is skew-symmetric exactly.
pub fn volterra_canonical(op: &QsoOperator) -> Result<SkewMatrix> {
    if let Some((i, j, k, value)) = op.volterra_violation() {
        return Err(Error::NotVolterra { i, j, k, value });
    }
    Ok(SkewMatrix::from_upper(op.dim(), |k, i| {
        op.coefficient(i, k, k) - op.coefficient(i, k, i)
    }))
}

/// Heredity tensor of the Volterra operator with matrix `a`:
/// `p_{ik,k} = (1 + a_{ki}) / 2` for `i ≠ k` and `p_{kk,k} = 1`.
pub fn volterra_tensor(a: &SkewMatrix, cap: usize) -> Result<HeredityTensor> {
    let n = a.dim();
    if n > cap {
        return Err(Error::CapExceeded {
            required: n as u128,
            cap,
        });
    }
    let mut tensor = HeredityTensor::zeros(n);
    for k in 0..n {
        tensor.set(k, k, k, 1.0);
        for i in 0..n {
            if i != k {
                let p = 0.5 * (1.0 + a.get(k, i));
                tensor.set(i, k, k, p);
                tensor.set(k, i, k, p);
            }
        }
    }
    Ok(tensor)
}
