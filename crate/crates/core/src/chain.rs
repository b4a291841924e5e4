//! Stochastic matrices, damping vectors and distributions.
//!
//! Matrices are dense and row-major. Constructors validate their input;
//! results of arithmetic (powers, products, propagation) are trusted and
//! carry whatever rounding the computation accumulated.

use crate::error::{ChainError, Result};

/// Default tolerance for row sums and distribution masses.
pub const DEFAULT_ROW_TOL: f64 = 1e-12;

/// A square row-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Validates a row-major `dim × dim` array with the default tolerance.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(dim, data, DEFAULT_ROW_TOL)
    }

    pub fn with_tolerance(dim: usize, data: Vec<f64>, row_tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(ChainError::Empty);
        }
        if data.len() != dim * dim {
            return Err(ChainError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        for row in 0..dim {
            let mut sum = 0.0;
            for col in 0..dim {
                let value = data[row * dim + col];
                if !(0.0..=1.0).contains(&value) {
                    return Err(ChainError::InvalidEntry { row, col, value });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > row_tol {
                return Err(ChainError::RowSum { row, sum });
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(ChainError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Rank-one matrix whose rows all equal `d`.
    pub fn rank_one(d: &DampingVector) -> Self {
        let dim = d.dim();
        let mut data = Vec::with_capacity(dim * dim);
        for _ in 0..dim {
            data.extend_from_slice(d.weights());
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Matrix product `self · other`.
    pub fn multiply(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        check_dim(self.dim, other.dim)?;
        let m = self.dim;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            let out_row = &mut out[i * m..(i + 1) * m];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(m, out))
    }

    /// Largest |row sum − 1|.
    pub fn max_row_defect(&self) -> f64 {
        self.rows()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Strictly positive weights summing to one; the common row of the damping matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingVector {
    weights: Vec<f64>,
}

impl DampingVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, DEFAULT_ROW_TOL)
    }

    pub fn with_tolerance(weights: Vec<f64>, row_tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(ChainError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ChainError::NonPositiveDamping { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > row_tol {
            return Err(ChainError::MassDefect { sum });
        }
        Ok(Self { weights })
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            weights: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::from_raw(self.weights.clone())
    }
}

/// A probability vector; zero entries are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, DEFAULT_ROW_TOL)
    }

    pub fn with_tolerance(probs: Vec<f64>, row_tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(ChainError::Empty);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ChainError::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > row_tol {
            return Err(ChainError::MassDefect { sum });
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    /// Unit mass on `state` (0-based).
    pub fn point_mass(dim: usize, state: usize) -> Result<Self> {
        if state >= dim {
            return Err(ChainError::InvalidArgument(format!(
                "state {state} out of range for {dim} states"
            )));
        }
        let mut probs = vec![0.0; dim];
        probs[state] = 1.0;
        Ok(Self { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// P₀ together with its damping vector and damping weight ε.
#[derive(Clone, Debug, PartialEq)]
pub struct DampedChain {
    pub p0: StochasticMatrix,
    pub damping: DampingVector,
    pub epsilon: f64,
}

impl DampedChain {
    pub fn new(p0: StochasticMatrix, damping: DampingVector, epsilon: f64) -> Result<Self> {
        check_dim(p0.dim(), damping.dim())?;
        check_epsilon(epsilon)?;
        Ok(Self {
            p0,
            damping,
            epsilon,
        })
    }

    pub fn damped_matrix(&self) -> StochasticMatrix {
        damp(&self.p0, &self.damping, self.epsilon)
    }
}

/// P_ε = (1 − ε)P₀ + εD.
pub fn build_damped_matrix(chain: &DampedChain) -> Result<StochasticMatrix> {
    check_dim(chain.p0.dim(), chain.damping.dim())?;
    check_epsilon(chain.epsilon)?;
    let p = chain.damped_matrix();
    StochasticMatrix::with_tolerance(p.dim, p.data, 4.0 * DEFAULT_ROW_TOL)
}

/// (1 − ε)P₀ + εD without re-validating rows.
pub fn damp(p0: &StochasticMatrix, d: &DampingVector, epsilon: f64) -> StochasticMatrix {
    let m = p0.dim();
    let mut data = Vec::with_capacity(m * m);
    for row in p0.rows() {
        for (a, w) in row.iter().zip(d.weights()) {
            data.push((1.0 - epsilon) * a + epsilon * w);
        }
    }
    StochasticMatrix::from_raw(m, data)
}

/// Pⁿ by repeated squaring.
pub fn matrix_power(p: &StochasticMatrix, n: usize) -> StochasticMatrix {
    let mut result = StochasticMatrix::identity(p.dim());
    let mut base = p.clone();
    let mut k = n;
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first {
                base.clone()
            } else {
                result.multiply(&base).expect("same dimension")
            };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = base.multiply(&base).expect("same dimension");
        }
    }
    result
}

/// Row vector times matrix.
pub fn vec_mat(v: &[f64], p: &StochasticMatrix) -> Vec<f64> {
    let m = p.dim();
    let mut out = vec![0.0; m];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(p.row(i)) {
            *o += vi * a;
        }
    }
    out
}

/// p·Pⁿ by iterated vector-matrix products.
pub fn propagate(p: &Distribution, matrix: &StochasticMatrix, n: usize) -> Result<Distribution> {
    check_dim(matrix.dim(), p.dim())?;
    let mut v = p.probs.clone();
    for _ in 0..n {
        v = vec_mat(&v, matrix);
    }
    Ok(Distribution::from_raw(v))
}

/// The distributions p·Pᵏ for k = 0..=n.
pub fn trajectory(
    p: &Distribution,
    matrix: &StochasticMatrix,
    n: usize,
) -> Result<Vec<Distribution>> {
    check_dim(matrix.dim(), p.dim())?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(p.clone());
    for k in 0..n {
        let next = vec_mat(out[k].probs(), matrix);
        out.push(Distribution::from_raw(next));
    }
    Ok(out)
}

/// Total variation distance ½ Σ |p_k − q_k|.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    Ok(tv(p.probs(), q.probs()))
}

pub(crate) fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(ChainError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(ChainError::InvalidEpsilon(epsilon));
    }
    Ok(())
}
