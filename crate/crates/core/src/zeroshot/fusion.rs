//! View aggregation, the guidance-by-class probability matrix, and the fusion rules
//! that collapse it into one score per class.

use serde::{Deserialize, Serialize};

use super::ZeroShotError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Weighted sum of the diagonal-bounded column sums and the diagonal.
    Sum,
    /// Normalized column geometric means times column maxima.
    Geo,
    /// Weighted average of per-view logits of the unstyled depth images.
    Baseline,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sum => "sum",
            Strategy::Geo => "geo",
            Strategy::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = ZeroShotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Strategy::Sum),
            "geo" => Ok(Strategy::Geo),
            "baseline" => Ok(Strategy::Baseline),
            other => Err(ZeroShotError::InvalidWeights(format!(
                "unknown strategy '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `K x K` row-stochastic matrix: row `j` is the class distribution of the images
/// generated under guidance class `j`, column `k` is the predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    rows: Vec<Vec<T>>,
}

fn row_tolerance<T: Real>(k: usize) -> f64 {
    (T::epsilon().as_f64() * 8.0 * k as f64).max(1e-9)
}

impl<T: Real> ProbabilityMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self, ZeroShotError> {
        let k = rows.len();
        if k < 2 {
            return Err(ZeroShotError::TooFewClasses(k));
        }
        let tol = row_tolerance::<T>(k);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(ZeroShotError::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite() || *v < T::zero() || *v > T::one()) {
                return Err(ZeroShotError::NotStochastic(j));
            }
            let sum = row.iter().fold(T::zero(), |s, &v| s + v).as_f64();
            if (sum - 1.0).abs() > tol {
                return Err(ZeroShotError::NotStochastic(j));
            }
        }
        Ok(Self { rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn get(&self, guidance: usize, class: usize) -> T {
        self.rows[guidance][class]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.size()).map(|k| self.rows[k][k]).collect()
    }
}

fn check_tensor<T: Real>(logits: &[Vec<Vec<T>>]) -> Result<usize, ZeroShotError> {
    let first = logits.first().ok_or(ZeroShotError::Empty)?;
    let k = first.len();
    if k < 2 {
        return Err(ZeroShotError::TooFewClasses(k));
    }
    for view in logits {
        if view.len() != k {
            return Err(ZeroShotError::DimensionMismatch {
                expected: k,
                got: view.len(),
            });
        }
        for row in view {
            if row.len() != k {
                return Err(ZeroShotError::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ZeroShotError::NonFinite);
            }
        }
    }
    Ok(k)
}

/// Column-wise maximum over views: `out[j][k] = max_i logits[i][j][k]` for a tensor
/// indexed `[view][guidance][class]`.
pub fn max_over_views<T: Real>(logits: &[Vec<Vec<T>>]) -> Result<Vec<Vec<T>>, ZeroShotError> {
    let k = check_tensor(logits)?;
    let mut out = logits[0].clone();
    for view in &logits[1..] {
        for j in 0..k {
            for c in 0..k {
                out[j][c] = out[j][c].max(view[j][c]);
            }
        }
    }
    Ok(out)
}

/// Softmax with max-subtraction.
pub fn softmax<T: Real>(row: &[T]) -> Vec<T> {
    let m = row.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = row.iter().map(|&v| (v - m).exp()).collect();
    let total = exps.iter().fold(T::zero(), |s, &v| s + v);
    exps.into_iter().map(|v| v / total).collect()
}

/// Collapses views by column-wise max, then softmaxes each guidance row.
pub fn aggregate_probability_matrix<T: Real>(
    logits: &[Vec<Vec<T>>],
) -> Result<ProbabilityMatrix<T>, ZeroShotError> {
    let pooled = max_over_views(logits)?;
    ProbabilityMatrix::new(pooled.iter().map(|row| softmax(row)).collect())
}

/// Strategy "sum": `p = w_glo * p_glo + w_loc * p_loc` where `p_glo[k]` sums the
/// entries of column `k` that do not exceed the diagonal entry `P[k][k]` and
/// `p_loc[k] = P[k][k]`.
pub fn fuse_strategy_sum<T: Real>(
    p: &ProbabilityMatrix<T>,
    w_glo: T,
    w_loc: T,
) -> Result<Vec<T>, ZeroShotError> {
    if !(w_glo >= T::zero() && w_loc >= T::zero()) || !(w_glo + w_loc > T::zero()) {
        return Err(ZeroShotError::InvalidWeights(format!(
            "need w_glo, w_loc >= 0 and not both zero (got {w_glo}, {w_loc})"
        )));
    }
    let k = p.size();
    Ok((0..k)
        .map(|c| {
            let diag = p.get(c, c);
            let glo = (0..k)
                .map(|j| p.get(j, c))
                .filter(|&v| v <= diag)
                .fold(T::zero(), |s, v| s + v);
            w_glo * glo + w_loc * diag
        })
        .collect())
}

/// Min-max rescaling onto `[0, 1]`; a constant vector maps to all ones.
pub fn min_max_norm<T: Real>(v: &[T]) -> Vec<T> {
    let lo = v.iter().copied().fold(T::infinity(), T::min);
    let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
    if hi == lo {
        return vec![T::one(); v.len()];
    }
    v.iter().map(|&x| (x - lo) / (hi - lo)).collect()
}

/// Strategy "geo": `p = norm(p_glo) * p_loc` with `p_glo[k]` the geometric mean of
/// column `k` and `p_loc[k]` its maximum.
pub fn fuse_strategy_geo<T: Real>(p: &ProbabilityMatrix<T>) -> Result<Vec<T>, ZeroShotError> {
    let k = p.size();
    for j in 0..k {
        for c in 0..k {
            if !(p.get(j, c) > T::zero()) {
                return Err(ZeroShotError::NonPositive { row: j, col: c });
            }
        }
    }
    let inv_k = T::one() / T::of(k as f64);
    let glo: Vec<T> = (0..k)
        .map(|c| {
            let log_sum = (0..k).fold(T::zero(), |s, j| s + p.get(j, c).ln());
            (log_sum * inv_k).exp()
        })
        .collect();
    let loc: Vec<T> = (0..k)
        .map(|c| (0..k).map(|j| p.get(j, c)).fold(T::neg_infinity(), T::max))
        .collect();
    Ok(min_max_norm(&glo)
        .into_iter()
        .zip(loc)
        .map(|(g, l)| g * l)
        .collect())
}

/// Weighted-view baseline: `sum_i alpha[i] * view_logits[i]`.
pub fn fuse_baseline<T: Real>(view_logits: &[Vec<T>], alpha: &[T]) -> Result<Vec<T>, ZeroShotError> {
    if view_logits.is_empty() {
        return Err(ZeroShotError::Empty);
    }
    if alpha.len() != view_logits.len() {
        return Err(ZeroShotError::DimensionMismatch {
            expected: view_logits.len(),
            got: alpha.len(),
        });
    }
    if alpha.iter().any(|&a| !(a >= T::zero())) {
        return Err(ZeroShotError::InvalidWeights("view weights must be nonnegative".into()));
    }
    let total = alpha.iter().fold(T::zero(), |s, &a| s + a).as_f64();
    if (total - 1.0).abs() > row_tolerance::<T>(alpha.len()) {
        return Err(ZeroShotError::InvalidWeights(format!(
            "view weights must sum to 1 (got {total})"
        )));
    }
    let k = view_logits[0].len();
    let mut out = vec![T::zero(); k];
    for (row, &a) in view_logits.iter().zip(alpha) {
        if row.len() != k {
            return Err(ZeroShotError::DimensionMismatch {
                expected: k,
                got: row.len(),
            });
        }
        for (o, &v) in out.iter_mut().zip(row) {
            *o = *o + a * v;
        }
    }
    Ok(out)
}

/// Uniform view weights `1/M`.
pub fn uniform_weights<T: Real>(views: usize) -> Vec<T> {
    vec![T::one() / T::of(views as f64); views]
}

/// Index of the largest score; ties go to the lowest index.
pub fn predict<T: Real>(scores: &[T]) -> Result<usize, ZeroShotError> {
    if scores.is_empty() {
        return Err(ZeroShotError::Empty);
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(ZeroShotError::NonFinite);
    }
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = i;
        }
    }
    Ok(best)
}
