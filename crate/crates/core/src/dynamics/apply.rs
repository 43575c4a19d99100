use crate::construct::{QsoOperator, SkewMatrix};
use crate::dynamics::simplex::{sup_distance, SimplexPoint, StepStats};
use crate::error::{Error, Result};
use crate::model::Model;

/// Iteration state: linear coordinates together with their logarithms.
///
/// Quadratic operators step the linear coordinates. Volterra maps are
/// multiplicative and step the logarithms, so coordinates that are driven
/// far below the smallest `f64` stay distinct from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub(crate) lin: Vec<f64>,
    pub(crate) log: Vec<f64>,
}

impl State {
    pub fn new(x: &SimplexPoint) -> Self {
        Self {
            lin: x.coords().to_vec(),
            log: x.coords().iter().map(|v| v.ln()).collect(),
        }
    }

    pub fn point(&self) -> SimplexPoint {
        SimplexPoint::from_normalized(self.lin.clone())
    }

    pub fn lin(&self) -> &[f64] {
        &self.lin
    }

    /// Natural logarithms of the coordinates, `-inf` for exact zeros.
    pub fn log(&self) -> &[f64] {
        &self.log
    }
}

/// A self-map of the simplex that can be iterated.
pub trait Evolution {
    fn dim(&self) -> usize;

    /// Unnormalized image of `x`.
    fn raw_image(&self, x: &[f64]) -> Vec<f64>;

    fn image(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        check_dim(self.dim(), x.dim())?;
        SimplexPoint::from_image(self.raw_image(x.coords()), 0).map(|(p, _)| p)
    }

    /// Replaces `state` by its image, returning the pre-normalization drift.
    fn advance(&self, state: &mut State, step: usize) -> Result<StepStats> {
        let (point, stats) = SimplexPoint::from_image(self.raw_image(&state.lin), step)?;
        state.lin = point.into_coords();
        state.log = state.lin.iter().map(|v| v.ln()).collect();
        Ok(stats)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `λ'(σ) = Σ p_{φψ,σ} λ(φ) λ(ψ)` for a product-measure operator, scattering
/// each parent pair over its admissible set.
fn generated_image(model: &Model, x: &[f64]) -> Vec<f64> {
    let space = model.space();
    let n = space.cell_count();
    let m = space.component_count();
    let digits: Vec<usize> = (0..n)
        .flat_map(|i| (0..m).map(move |c| space.digit(i, c)))
        .collect();
    let strides: Vec<isize> = (0..m).map(|c| space.stride(c) as isize).collect();
    let weights: Vec<&[f64]> = model
        .measure()
        .parts()
        .iter()
        .map(|p| p.weights())
        .collect();

    let mut out = vec![0.0; n];
    let mut delta = [0isize; 64];
    let mut from_i = [0.0f64; 64];
    let mut from_j = [0.0f64; 64];
    for i in 0..n {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        out[i] += xi * xi;
        for j in (i + 1)..n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let mut d = 0;
            for c in 0..m {
                let (a, b) = (digits[i * m + c], digits[j * m + c]);
                if a != b {
                    let (wa, wb) = (weights[c][a], weights[c][b]);
                    from_i[d] = wa / (wa + wb);
                    from_j[d] = wb / (wa + wb);
                    delta[d] = (b as isize - a as isize) * strides[c];
                    d += 1;
                }
            }
            let w = 2.0 * xi * xj;
            for mask in 0u64..(1u64 << d) {
                let mut p = w;
                let mut k = i as isize;
                for b in 0..d {
                    if mask & (1 << b) != 0 {
                        p *= from_j[b];
                        k += delta[b];
                    } else {
                        p *= from_i[b];
                    }
                }
                out[k as usize] += p;
            }
        }
    }
    out
}

fn tensor_image(op: &QsoOperator, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    let QsoOperator::Explicit(t) = op else {
        unreachable!()
    };
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let w = x[i] * x[j];
            if w == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(t.fibre(i, j)) {
                *o += w * p;
            }
        }
    }
    out
}

impl Evolution for QsoOperator {
    fn dim(&self) -> usize {
        QsoOperator::dim(self)
    }

    fn raw_image(&self, x: &[f64]) -> Vec<f64> {
        match self {
            QsoOperator::Generated(model) => generated_image(model, x),
            QsoOperator::Explicit(_) => tensor_image(self, x),
        }
    }
}

/// `x'_k = x_k Σ_i (1 + a_{ki}) x_i`, which equals `x_k (1 + Σ_i a_{ki} x_i)`
/// on the simplex and has only nonnegative terms.
fn volterra_image(a: &SkewMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.dim())
        .map(|k| {
            if x[k] == 0.0 {
                return 0.0;
            }
            let f: f64 = a.row(k).iter().zip(x).map(|(a, xi)| (1.0 + a) * xi).sum();
            x[k] * f
        })
        .collect()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl Evolution for SkewMatrix {
    fn dim(&self) -> usize {
        SkewMatrix::dim(self)
    }

    fn raw_image(&self, x: &[f64]) -> Vec<f64> {
        volterra_image(self, x)
    }

    fn advance(&self, state: &mut State, step: usize) -> Result<StepStats> {
        let n = self.dim();
        let log = &state.log;
        let grown: Vec<f64> = (0..n)
            .map(|k| {
                if log[k] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let row = self.row(k);
                let terms = (0..n)
                    .filter(|&i| 1.0 + row[i] > 0.0 && log[i] > f64::NEG_INFINITY)
                    .map(|i| (1.0 + row[i]).ln() + log[i]);
                log[k] + log_sum_exp(terms)
            })
            .collect();
        let total = log_sum_exp(grown.iter().copied());
        let stats = StepStats {
            sum_drift: (total.exp() - 1.0).abs(),
            min_coordinate: 0.0,
        };
        if !total.is_finite() || stats.sum_drift > super::simplex::SUM_TOL {
            return Err(Error::NumericalIntegrity {
                step,
                detail: format!("log-normalizer {total} off the simplex"),
            });
        }
        state.log = grown.into_iter().map(|v| v - total).collect();
        state.lin = state.log.iter().map(|v| v.exp()).collect();
        let sum: f64 = state.lin.iter().sum();
        for v in state.lin.iter_mut() {
            *v /= sum;
        }
        Ok(stats)
    }
}

/// One application of a quadratic stochastic operator.
pub fn apply(op: &QsoOperator, x: &SimplexPoint) -> Result<SimplexPoint> {
    op.image(x)
}

/// One application of the Volterra map with coefficient matrix `a`.
pub fn apply_volterra(a: &SkewMatrix, x: &SimplexPoint) -> Result<SimplexPoint> {
    a.image(x)
}

/// The Volterra map in its affine form `x_k (1 + Σ_i a_{ki} x_i)`.
pub fn apply_volterra_affine(a: &SkewMatrix, x: &SimplexPoint) -> Result<SimplexPoint> {
    check_dim(a.dim(), x.dim())?;
    let raw = (0..a.dim())
        .map(|k| {
            let s: f64 = a.row(k).iter().zip(x.coords()).map(|(a, xi)| a * xi).sum();
            x.get(k) * (1.0 + s)
        })
        .collect();
    SimplexPoint::from_image(raw, 0).map(|(p, _)| p)
}

/// `‖V x − x‖∞ ≤ tol`.
pub fn is_fixed<E: Evolution + ?Sized>(map: &E, x: &SimplexPoint, tol: f64) -> Result<bool> {
    let image = map.image(x)?;
    Ok(sup_distance(image.coords(), x.coords()) <= tol)
}
