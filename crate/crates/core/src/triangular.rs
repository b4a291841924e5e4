//! Joint limits ε → 0, n → ∞ with εn → t.
//!
//! For singular chains p_ε,p̄(n) approaches the mixture
//! π(t) = π₀,p̄ e^{−t} + π₀,d̄ (1 − e^{−t}); for regular chains the limit is π₀
//! for every t.

use serde::{Serialize, Serializer};

use crate::bounds::max_abs_diff;
use crate::chain::{check_dim, damp, vec_mat, DampingVector, Distribution, StochasticMatrix};
use crate::coupling::{class_ergodicity, ergodicity_coefficient, overlap, pow0};
use crate::error::{ChainError, Result};
use crate::stationary::{class_stationary, limit_stationary};
use crate::structure::{class_mass, restrict_distribution, ChainStructure, Regime};

/// The time parameter t ∈ [0, ∞].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitTime {
    Finite(f64),
    Infinite,
}

impl LimitTime {
    /// e^{−t}, exactly 0 at infinity.
    pub fn weight(&self) -> f64 {
        match *self {
            LimitTime::Finite(t) => (-t).exp(),
            LimitTime::Infinite => 0.0,
        }
    }
}

impl Serialize for LimitTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            LimitTime::Finite(t) => s.serialize_f64(t),
            LimitTime::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangularLimit {
    pub t: LimitTime,
    pub pi_of_t: Vec<f64>,
    /// π₀,p̄.
    pub pi_p: Vec<f64>,
    /// π₀,d̄.
    pub pi_d: Vec<f64>,
    /// e^{−t}.
    pub weight: f64,
}

pub fn triangular_limit(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    structure: &ChainStructure,
    t: LimitTime,
) -> Result<TriangularLimit> {
    check_dim(p0.dim(), d.dim())?;
    if let LimitTime::Finite(x) = t {
        if !(x >= 0.0) {
            return Err(ChainError::InvalidArgument(format!(
                "t = {x} must be non-negative"
            )));
        }
    }
    let pi_d = limit_stationary(p0, &d.to_distribution(), structure)?.into_vec();
    let pi_p = limit_stationary(p0, p, structure)?.into_vec();
    let w = t.weight();
    let pi_of_t = pi_p
        .iter()
        .zip(&pi_d)
        .map(|(a, b)| a * w + b * (1.0 - w))
        .collect();
    Ok(TriangularLimit {
        t,
        pi_of_t,
        pi_p,
        pi_d,
        weight: w,
    })
}

struct ClassPart {
    f_p: f64,
    f_d: f64,
    q_p: f64,
    q_d: f64,
    delta: f64,
    pi0_local: Vec<f64>,
}

/// Precomputed pieces of the explicit bound on |p_ε,p̄,k(n) − π(t)_k|.
pub struct TriangularBound {
    epsilon: f64,
    block: usize,
    regime: Regime,
    parts: Vec<ClassPart>,
    location: Vec<(usize, usize)>,
}

impl TriangularBound {
    pub fn new(
        p0: &StochasticMatrix,
        d: &DampingVector,
        p: &Distribution,
        structure: &ChainStructure,
        epsilon: f64,
        block: usize,
    ) -> Result<Self> {
        check_dim(p0.dim(), d.dim())?;
        check_dim(p0.dim(), p.dim())?;
        structure.require_supported()?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ChainError::InvalidEpsilon(epsilon));
        }
        let d_dist = d.to_distribution();
        let deltas: Vec<f64> = if structure.regime == Regime::Regular {
            vec![ergodicity_coefficient(p0, block)?.delta_n]
        } else {
            class_ergodicity(p0, structure, block)?
                .iter()
                .map(|r| r.delta_n)
                .collect()
        };
        if let Some((j, &delta)) = deltas.iter().enumerate().find(|(_, &x)| x >= 1.0) {
            return Err(ChainError::ConditionViolated {
                class: j + 1,
                delta,
            });
        }
        let local_pi0 = class_stationary(p0, structure)?;
        let f_p = class_mass(p, structure)?;
        let f_d = class_mass(&d_dist, structure)?;
        let mut parts = Vec::new();
        let mut location = vec![(0, 0); p0.dim()];
        for (j, class) in structure.classes.iter().enumerate() {
            for (r, &s) in class.states.iter().enumerate() {
                location[s] = (j, r);
            }
            let pi0_j = &local_pi0[j];
            let q_of = |v: Option<Vec<f64>>| v.map_or(1.0, |v| overlap(&v, pi0_j).min(1.0));
            parts.push(ClassPart {
                f_p: f_p[j],
                f_d: f_d[j],
                q_p: q_of(restrict_distribution(p, class).0),
                q_d: q_of(restrict_distribution(&d_dist, class).0),
                delta: deltas[j],
                pi0_local: pi0_j.clone(),
            });
        }
        Ok(Self {
            epsilon,
            block,
            regime: structure.regime,
            parts,
            location,
        })
    }

    /// The bound for state `k` at step `n` against π(t).
    pub fn evaluate(&self, n: usize, t: LimitTime, k: usize) -> f64 {
        let (j, r) = self.location[k];
        let c = &self.parts[j];
        let e = (n / self.block) * self.block;
        let n_f = self.block as f64;
        let first = c.f_p * (1.0 - c.q_p) * pow0(c.delta, e);
        let second = c.f_d * (1.0 - c.q_d) * self.epsilon * n_f / (1.0 - pow0(c.delta, self.block));
        if self.regime == Regime::Regular {
            return first + second;
        }
        let r_eps = (pow0(1.0 - self.epsilon, n) - t.weight()).abs();
        first + second + (c.f_p - c.f_d).abs() * c.pi0_local[r] * r_eps
    }

    pub fn evaluate_all(&self, n: usize, t: LimitTime) -> Vec<f64> {
        (0..self.location.len())
            .map(|k| self.evaluate(n, t, k))
            .collect()
    }
}

/// Per-state bound on |p_ε,p̄,k(n) − π(t)_k|.
#[allow(clippy::too_many_arguments)]
pub fn triangular_bound(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    structure: &ChainStructure,
    epsilon: f64,
    n: usize,
    block: usize,
    t: LimitTime,
) -> Result<Vec<f64>> {
    Ok(TriangularBound::new(p0, d, p, structure, epsilon, block)?.evaluate_all(n, t))
}

/// n_ε = round(t/ε).
pub fn steps_for_time(t: f64, epsilon: f64) -> usize {
    (t / epsilon).round() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// εn.
    pub t: f64,
    pub trajectory: Vec<f64>,
    pub mixture: Vec<f64>,
    /// |π(t)_k − π₀,d̄,k| / π₀,d̄,k.
    pub relative_error: Vec<f64>,
    pub max_deviation: f64,
    pub bound: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangularSweep {
    pub epsilon: f64,
    pub block: Option<usize>,
    pub pi_p: Vec<f64>,
    pub pi_d: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Compares p_ε,p̄(n) with π(εn) over `n_grid`; bounds are included when `block` is given.
pub fn triangular_sweep(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    structure: &ChainStructure,
    epsilon: f64,
    n_grid: &[usize],
    block: Option<usize>,
) -> Result<TriangularSweep> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ChainError::InvalidEpsilon(epsilon));
    }
    let limits = triangular_limit(p0, d, p, structure, LimitTime::Infinite)?;
    let bound = block
        .map(|b| TriangularBound::new(p0, d, p, structure, epsilon, b))
        .transpose()?;
    let p_eps = damp(p0, d, epsilon);
    let regular = structure.regime == Regime::Regular;

    let max_n = n_grid.iter().copied().max().unwrap_or(0);
    let mut states = Vec::with_capacity(max_n + 1);
    states.push(p.probs().to_vec());
    for k in 0..max_n {
        let next = vec_mat(&states[k], &p_eps);
        states.push(next);
    }

    let rows = n_grid
        .iter()
        .map(|&n| {
            let t = epsilon * n as f64;
            let time = LimitTime::Finite(t);
            let w = time.weight();
            let mixture: Vec<f64> = if regular {
                limits.pi_d.clone()
            } else {
                limits
                    .pi_p
                    .iter()
                    .zip(&limits.pi_d)
                    .map(|(a, b)| a * w + b * (1.0 - w))
                    .collect()
            };
            let relative_error = mixture
                .iter()
                .zip(&limits.pi_d)
                .map(|(m, d)| if *d > 0.0 { (m - d).abs() / d } else { 0.0 })
                .collect();
            let trajectory = states[n].clone();
            SweepRow {
                n,
                t,
                max_deviation: max_abs_diff(&trajectory, &mixture),
                bound: bound.as_ref().map(|b| b.evaluate_all(n, time)),
                trajectory,
                mixture,
                relative_error,
            }
        })
        .collect();
    Ok(TriangularSweep {
        epsilon,
        block,
        pi_p: limits.pi_p,
        pi_d: limits.pi_d,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::decompose;

    fn two_blocks() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.3, 0.7],
            vec![0.0, 0.0, 0.6, 0.4],
        ])
        .unwrap()
    }

    #[test]
    fn limit_endpoints() {
        let p0 = two_blocks();
        let s = decompose(&p0);
        let d = DampingVector::uniform(4);
        let p = Distribution::point_mass(4, 0).unwrap();
        let at0 = triangular_limit(&p0, &d, &p, &s, LimitTime::Finite(0.0)).unwrap();
        assert_eq!(at0.pi_of_t, at0.pi_p);
        let inf = triangular_limit(&p0, &d, &p, &s, LimitTime::Infinite).unwrap();
        assert_eq!(inf.pi_of_t, inf.pi_d);
        assert_eq!(inf.weight, 0.0);
        let mid = triangular_limit(&p0, &d, &p, &s, LimitTime::Finite(0.7)).unwrap();
        assert!((mid.pi_of_t.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matched_time_kills_remainder() {
        let p0 = two_blocks();
        let s = decompose(&p0);
        let d = DampingVector::uniform(4);
        let p = d.to_distribution();
        let (eps, n) = (0.1, 12);
        let t = LimitTime::Finite(-(n as f64) * (1.0f64 - eps).ln());
        let b = TriangularBound::new(&p0, &d, &p, &s, eps, 1).unwrap();
        let c = &b.parts[0];
        assert_eq!(c.f_p, c.f_d);
        let v = b.evaluate(n, t, 0);
        let expected = c.f_p * (1.0 - c.q_p) * pow0(c.delta, n)
            + c.f_d * (1.0 - c.q_d) * eps / (1.0 - c.delta);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_contracting_block() {
        let p0 = StochasticMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let s = decompose(&p0);
        assert_eq!(s.regime, Regime::Regular);
        let d = DampingVector::uniform(3);
        let p = Distribution::uniform(3);
        assert!(matches!(
            TriangularBound::new(&p0, &d, &p, &s, 0.1, 1),
            Err(ChainError::ConditionViolated { .. })
        ));
    }

    #[test]
    fn steps_round_to_nearest() {
        assert_eq!(steps_for_time(1.0, 0.1), 10);
        assert_eq!(steps_for_time(1.0, 0.3), 3);
    }
}
