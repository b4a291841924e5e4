//! Maximal couplings, overlap functionals and ergodicity coefficients.
//!
//! The overlap of two distributions is Q(p, q) = Σ_k min(p_k, q_k), and for a
//! stochastic matrix Q(A) is the smallest overlap between two of its rows.
//! The ergodicity coefficient is Δ_N(P) = (1 − Q(P^N))^{1/N}.

use serde::Serialize;

use crate::chain::{check_dim, matrix_power, Distribution, StochasticMatrix};
use crate::error::{ChainError, Result};
use crate::structure::{restrict, ChainStructure};

/// A joint law on pairs of states whose diagonal mass is as large as possible.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingJoint {
    dim: usize,
    joint: Vec<f64>,
    diagonal_mass: f64,
}

impl CouplingJoint {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.dim + j]
    }

    /// Row-major m × m probabilities.
    pub fn as_slice(&self) -> &[f64] {
        &self.joint
    }

    pub fn diagonal_mass(&self) -> f64 {
        self.diagonal_mass
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        self.joint
            .chunks_exact(self.dim)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for row in self.joint.chunks_exact(self.dim) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }
}

/// Σ_k min(p_k, q_k).
pub fn overlap(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a.min(*b)).sum()
}

/// The maximal coupling of `p1` and `p2`.
pub fn maximal_coupling(p1: &Distribution, p2: &Distribution) -> Result<CouplingJoint> {
    check_dim(p1.dim(), p2.dim())?;
    Ok(coupling_of(p1.probs(), p2.probs()))
}

/// Three cases by the diagonal mass Q*: Q* = 1 is purely diagonal, Q* = 0 is
/// the product law, otherwise the diagonal minima plus the normalized product
/// of the two excess vectors.
pub(crate) fn coupling_of(p1: &[f64], p2: &[f64]) -> CouplingJoint {
    let m = p1.len();
    let mins: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| a.min(*b)).collect();
    let q: f64 = mins.iter().sum::<f64>().min(1.0);
    let mut joint = vec![0.0; m * m];
    if q >= 1.0 {
        for i in 0..m {
            joint[i * m + i] = mins[i];
        }
    } else if q <= 0.0 {
        for i in 0..m {
            for j in 0..m {
                joint[i * m + j] = p1[i] * p2[j];
            }
        }
    } else {
        let scale = 1.0 / (1.0 - q);
        for i in 0..m {
            joint[i * m + i] = mins[i];
            let ei = p1[i] - mins[i];
            if ei <= 0.0 {
                continue;
            }
            for j in 0..m {
                let ej = p2[j] - mins[j];
                if ej > 0.0 {
                    joint[i * m + j] += ei * ej * scale;
                }
            }
        }
    }
    CouplingJoint {
        dim: m,
        joint,
        diagonal_mass: q,
    }
}

/// Q(A): the smallest overlap between two rows (1 for a single state).
pub fn matrix_overlap(a: &StochasticMatrix) -> f64 {
    let m = a.dim();
    let mut q: f64 = 1.0;
    for i in 0..m {
        for j in i + 1..m {
            q = q.min(overlap(a.row(i), a.row(j)));
        }
    }
    q.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub n: usize,
    pub q_n: f64,
    pub delta_n: f64,
    /// Set when 1 − Q(P^N) vanishes, so Δ_N is 0 and Δ_N⁰ is taken as 1.
    pub degenerate: bool,
}

impl ErgodicityReport {
    /// Δ_N raised to `exponent`, with Δ⁰ = 1 even when Δ = 0.
    pub fn delta_pow(&self, exponent: usize) -> f64 {
        pow0(self.delta_n, exponent)
    }
}

/// xᵏ with x⁰ = 1 for every x, including 0.
pub fn pow0(x: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}

/// Δ_N(P) = (1 − Q(P^N))^{1/N}.
pub fn ergodicity_coefficient(p: &StochasticMatrix, n: usize) -> Result<ErgodicityReport> {
    if n == 0 {
        return Err(ChainError::InvalidArgument("N must be at least 1".into()));
    }
    let q_n = matrix_overlap(&matrix_power(p, n));
    let gap = 1.0 - q_n;
    let degenerate = gap <= 0.0;
    let delta_n = if degenerate {
        0.0
    } else {
        gap.powf(1.0 / n as f64)
    };
    Ok(ErgodicityReport {
        n,
        q_n,
        delta_n,
        degenerate,
    })
}

/// Δ⁽ʲ⁾_N for every closed class j, computed on the restricted matrices.
pub fn class_ergodicity(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
    n: usize,
) -> Result<Vec<ErgodicityReport>> {
    structure
        .classes
        .iter()
        .map(|c| ergodicity_coefficient(&restrict(p0, c)?, n))
        .collect()
}
