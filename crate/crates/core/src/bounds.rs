//! Explicit bounds on |π_ε − π₀| and on the distance of p·P_εⁿ from π_ε.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::chain::{
    check_dim, damp, matrix_power, trajectory, DampingVector, Distribution, StochasticMatrix,
};
use crate::coupling::{
    class_ergodicity, ergodicity_coefficient, matrix_overlap, overlap, pow0, ErgodicityReport,
};
use crate::error::{ChainError, Result};
use crate::spectral::spectrum;
use crate::stationary::{class_stationary, limit_stationary, stationary_direct};
use crate::structure::{class_mass, restrict, restrict_distribution, ChainStructure, Regime};

/// Length of the scan used to estimate C.
pub const DEFAULT_SCAN_HORIZON: usize = 200;
/// Deviations below this are round-off; the C scan stops there.
const SCAN_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    T1,
    T2,
    T5,
    T6,
    T7,
}

/// Constants with |p₀,ij(n) − π₀,j| ≤ C λⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailConstants {
    pub c: f64,
    pub lambda: f64,
}

impl TailConstants {
    pub fn new(c: f64, lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(ChainError::InvalidLambda(lambda));
        }
        if !(c >= 0.0) {
            return Err(ChainError::InvalidArgument(format!(
                "C = {c} must be non-negative"
            )));
        }
        Ok(Self { c, lambda })
    }

    /// Constants whose tail term Cλ/(1 − λ) equals `term`.
    pub fn with_tail_term(term: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(ChainError::InvalidLambda(lambda));
        }
        Self::new(term * (1.0 - lambda) / lambda, lambda)
    }

    /// Cλ/(1 − λ).
    pub fn tail_term(&self) -> f64 {
        self.c * self.lambda / (1.0 - self.lambda)
    }
}

/// Empirical C and λ for a regular chain.
///
/// λ is |ρ̄₂| and C = max over 1 ≤ n ≤ horizon of max_{i,j} |p₀,ij(n) − π₀,j| / λⁿ,
/// stopping once the deviation is at round-off level.
pub fn estimate_tail_constants(p0: &StochasticMatrix, horizon: usize) -> Result<TailConstants> {
    let lambda = spectrum(p0)?.second_modulus();
    if lambda >= 1.0 {
        return Err(ChainError::InvalidLambda(lambda));
    }
    let pi0 = stationary_direct(p0)?.pi.into_vec();
    let mut c: f64 = 0.0;
    if lambda > 0.0 {
        let mut pn = p0.clone();
        let mut scale = 1.0;
        for n in 1..=horizon {
            if n > 1 {
                pn = pn.multiply(p0)?;
            }
            scale *= lambda;
            let dev = pn
                .rows()
                .flat_map(|row| row.iter().zip(&pi0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if dev < SCAN_FLOOR {
                break;
            }
            c = c.max(dev / scale);
        }
    }
    TailConstants::new(c, lambda)
}

/// Class-wise constants combined as λ = max λ_j, C = max C_j.
pub fn estimate_class_tail_constants(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
    horizon: usize,
) -> Result<TailConstants> {
    structure.require_supported()?;
    let mut c: f64 = 0.0;
    let mut lambda: f64 = 0.0;
    for class in &structure.classes {
        let t = estimate_tail_constants(&restrict(p0, class)?, horizon)?;
        c = c.max(t.c);
        lambda = lambda.max(t.lambda);
    }
    TailConstants::new(c, lambda)
}

/// ε(|d_j − π₀,j| + Cλ/(1 − λ)) for every state j.
pub fn bound_theorem1(
    constants: &TailConstants,
    d: &DampingVector,
    pi0: &Distribution,
    epsilon: f64,
) -> Result<Vec<f64>> {
    check_dim(d.dim(), pi0.dim())?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(ChainError::InvalidEpsilon(epsilon));
    }
    let tail = constants.tail_term();
    Ok(d.weights()
        .iter()
        .zip(pi0.probs())
        .map(|(dj, pj)| epsilon * ((dj - pj).abs() + tail))
        .collect())
}

/// The singular-regime analogue, against the limit π₀,d̄ and class-wise constants.
pub fn bound_theorem2(
    constants: &TailConstants,
    d: &DampingVector,
    pi0_d: &Distribution,
    epsilon: f64,
) -> Result<Vec<f64>> {
    bound_theorem1(constants, d, pi0_d, epsilon)
}

/// (1 − Q_{ε,p̄}) · rate^{⌊n/N⌋N} · (1 − ε)^{⌊n/N⌋N}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricBound {
    /// Q_{ε,p̄} = Σ_i min(p_i, π_ε,i).
    pub q_eps_p: f64,
    /// 1 − Q(P₀) for block 1, Δ_N(P₀) otherwise.
    pub rate: f64,
    pub block: usize,
    pub epsilon: f64,
}

impl GeometricBound {
    pub fn evaluate(&self, n: usize) -> f64 {
        let e = (n / self.block) * self.block;
        (1.0 - self.q_eps_p) * pow0(self.rate, e) * pow0(1.0 - self.epsilon, e)
    }
}

pub fn theorem5(
    p0: &StochasticMatrix,
    p: &Distribution,
    pi_eps: &Distribution,
    epsilon: f64,
) -> Result<GeometricBound> {
    check_dim(p0.dim(), p.dim())?;
    check_dim(p0.dim(), pi_eps.dim())?;
    check_positive_epsilon(epsilon)?;
    Ok(GeometricBound {
        q_eps_p: overlap(p.probs(), pi_eps.probs()).min(1.0),
        rate: 1.0 - matrix_overlap(p0),
        block: 1,
        epsilon,
    })
}

pub fn theorem6(
    p0: &StochasticMatrix,
    p: &Distribution,
    pi_eps: &Distribution,
    epsilon: f64,
    block: usize,
) -> Result<GeometricBound> {
    let mut b = theorem5(p0, p, pi_eps, epsilon)?;
    b.rate = ergodicity_coefficient(p0, block)?.delta_n;
    b.block = block;
    Ok(b)
}

/// Bound on max_j |p_ε,p̄,j(n) − π_ε,j| through 1 − Q(P₀).
pub fn bound_theorem5(
    p0: &StochasticMatrix,
    p: &Distribution,
    pi_eps: &Distribution,
    epsilon: f64,
    n: usize,
) -> Result<f64> {
    Ok(theorem5(p0, p, pi_eps, epsilon)?.evaluate(n))
}

/// Bound on max_j |p_ε,p̄,j(n) − π_ε,j| through Δ_N(P₀).
pub fn bound_theorem6(
    p0: &StochasticMatrix,
    p: &Distribution,
    pi_eps: &Distribution,
    epsilon: f64,
    block: usize,
    n: usize,
) -> Result<f64> {
    Ok(theorem6(p0, p, pi_eps, epsilon, block)?.evaluate(n))
}

/// Per-class ingredients of the singular-regime bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassTerms {
    pub f_d: f64,
    pub f_p: f64,
    /// Q(π_ε⁽ʲ⁾, π₀⁽ʲ⁾).
    pub q_pi_eps: f64,
    /// Q(p̄⁽ʲ⁾, π₀⁽ʲ⁾), 1 when the class carries no initial mass.
    pub q_p: f64,
    /// Q(d̄⁽ʲ⁾, π₀⁽ʲ⁾).
    pub q_d: f64,
    pub ergodicity: ErgodicityReport,
    pub pi0_local: Vec<f64>,
}

/// Class-wise bound on |p_ε,p̄,k(n) − π_ε,k| for singular chains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularBound {
    pub epsilon: f64,
    pub block: usize,
    pub classes: Vec<ClassTerms>,
    #[serde(skip)]
    location: Vec<(usize, usize)>,
}

impl SingularBound {
    pub fn new(
        p0: &StochasticMatrix,
        d: &DampingVector,
        p: &Distribution,
        epsilon: f64,
        block: usize,
        structure: &ChainStructure,
    ) -> Result<Self> {
        check_dim(p0.dim(), d.dim())?;
        check_dim(p0.dim(), p.dim())?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ChainError::InvalidEpsilon(epsilon));
        }
        match structure.regime {
            Regime::Singular => {}
            Regime::Regular => {
                return Err(ChainError::RegimeMismatch(
                    "chain is regular; use the single-class bounds".into(),
                ))
            }
            Regime::Unsupported => structure.require_supported()?,
        }
        let d_dist = d.to_distribution();
        let pi_eps = if epsilon > 0.0 {
            stationary_direct(&damp(p0, d, epsilon))?.pi
        } else {
            limit_stationary(p0, &d_dist, structure)?
        };
        let local_pi0 = class_stationary(p0, structure)?;
        let ergodicity = class_ergodicity(p0, structure, block)?;
        let f_d = class_mass(&d_dist, structure)?;
        let f_p = class_mass(p, structure)?;

        let mut classes = Vec::with_capacity(structure.classes.len());
        let mut location = vec![(0, 0); p0.dim()];
        for (j, class) in structure.classes.iter().enumerate() {
            if ergodicity[j].delta_n >= 1.0 {
                return Err(ChainError::ConditionViolated {
                    class: j + 1,
                    delta: ergodicity[j].delta_n,
                });
            }
            for (r, &state) in class.states.iter().enumerate() {
                location[state] = (j, r);
            }
            let pi0_j = &local_pi0[j];
            let q_of = |v: Option<Vec<f64>>| v.map_or(1.0, |v| overlap(&v, pi0_j).min(1.0));
            classes.push(ClassTerms {
                f_d: f_d[j],
                f_p: f_p[j],
                q_pi_eps: q_of(restrict_distribution(&pi_eps, class).0),
                q_p: q_of(restrict_distribution(p, class).0),
                q_d: q_of(restrict_distribution(&d_dist, class).0),
                ergodicity: ergodicity[j],
                pi0_local: pi0_j.clone(),
            });
        }
        Ok(Self {
            epsilon,
            block,
            classes,
            location,
        })
    }

    /// (class index, position within class) of a state.
    pub fn location(&self, state: usize) -> (usize, usize) {
        self.location[state]
    }

    pub fn evaluate(&self, n: usize, state: usize) -> f64 {
        let (j, r) = self.location[state];
        let t = &self.classes[j];
        let e = (n / self.block) * self.block;
        let mixing =
            (t.f_d * (1.0 - t.q_pi_eps) + t.f_p * (1.0 - t.q_p)) * t.ergodicity.delta_pow(e);
        let gap = (t.f_p - t.f_d).abs() * t.pi0_local[r];
        (mixing + gap) * pow0(1.0 - self.epsilon, n)
    }

    pub fn evaluate_all(&self, n: usize) -> Vec<f64> {
        (0..self.location.len())
            .map(|k| self.evaluate(n, k))
            .collect()
    }
}

/// Singular-regime bound on |p_ε,p̄,k(n) − π_ε,k| for state k.
#[allow(clippy::too_many_arguments)]
pub fn bound_theorem7(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    epsilon: f64,
    block: usize,
    n: usize,
    structure: &ChainStructure,
    state: usize,
) -> Result<f64> {
    if state >= p0.dim() {
        return Err(ChainError::InvalidArgument(format!(
            "state {state} out of range"
        )));
    }
    Ok(SingularBound::new(p0, d, p, epsilon, block, structure)?.evaluate(n, state))
}

fn check_positive_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ChainError::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// One evaluated bound, with the quantity it bounds when that was computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: Option<usize>,
    /// 1-based state, or `None` when the row bounds a maximum over states.
    pub state: Option<usize>,
    pub bound: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub epsilon: f64,
    pub constants: BTreeMap<String, f64>,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.actual <= r.bound + 1e-12)
    }
}

/// Theorem 1 (regular) or 2 (singular) per state, with the true deviation.
pub fn deviation_report(
    p0: &StochasticMatrix,
    d: &DampingVector,
    structure: &ChainStructure,
    epsilon: f64,
    constants: &TailConstants,
) -> Result<BoundReport> {
    structure.require_supported()?;
    let d_dist = d.to_distribution();
    let pi0 = limit_stationary(p0, &d_dist, structure)?;
    let bound = bound_theorem1(constants, d, &pi0, epsilon)?;
    let pi_eps = if epsilon > 0.0 {
        stationary_direct(&damp(p0, d, epsilon))?.pi.into_vec()
    } else {
        pi0.probs().to_vec()
    };
    let rows = bound
        .iter()
        .enumerate()
        .map(|(j, &b)| BoundRow {
            n: None,
            state: Some(j + 1),
            bound: b,
            actual: (pi_eps[j] - pi0.probs()[j]).abs(),
        })
        .collect();
    let theorem = if structure.regime == Regime::Regular {
        Theorem::T1
    } else {
        Theorem::T2
    };
    let mut constants_map = BTreeMap::new();
    constants_map.insert("C".into(), constants.c);
    constants_map.insert("lambda".into(), constants.lambda);
    constants_map.insert("tail_term".into(), constants.tail_term());
    Ok(BoundReport {
        theorem,
        epsilon,
        constants: constants_map,
        rows,
    })
}

/// Theorem 5 (block 1) or 6 over n = 0..=horizon against the propagated deviation.
pub fn geometric_report(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    epsilon: f64,
    block: usize,
    horizon: usize,
) -> Result<BoundReport> {
    let p_eps = damp(p0, d, epsilon);
    let pi_eps = stationary_direct(&p_eps)?.pi;
    let bound = if block == 1 {
        theorem5(p0, p, &pi_eps, epsilon)?
    } else {
        theorem6(p0, p, &pi_eps, epsilon, block)?
    };
    let traj = trajectory(p, &p_eps, horizon)?;
    let rows = traj
        .iter()
        .enumerate()
        .map(|(n, q)| BoundRow {
            n: Some(n),
            state: None,
            bound: bound.evaluate(n),
            actual: max_abs_diff(q.probs(), pi_eps.probs()),
        })
        .collect();
    let mut constants = BTreeMap::new();
    constants.insert("Q_eps_p".into(), bound.q_eps_p);
    constants.insert(
        if block == 1 { "one_minus_Q" } else { "Delta_N" }.into(),
        bound.rate,
    );
    constants.insert("N".into(), block as f64);
    Ok(BoundReport {
        theorem: if block == 1 { Theorem::T5 } else { Theorem::T6 },
        epsilon,
        constants,
        rows,
    })
}

/// Theorem 7 per (n, state) against the propagated deviation.
pub fn singular_report(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    structure: &ChainStructure,
    epsilon: f64,
    block: usize,
    horizon: usize,
) -> Result<BoundReport> {
    let bound = SingularBound::new(p0, d, p, epsilon, block, structure)?;
    let p_eps = damp(p0, d, epsilon);
    let pi_eps = stationary_direct(&p_eps)?.pi;
    let traj = trajectory(p, &p_eps, horizon)?;
    let mut rows = Vec::new();
    for (n, q) in traj.iter().enumerate() {
        for k in 0..p0.dim() {
            rows.push(BoundRow {
                n: Some(n),
                state: Some(k + 1),
                bound: bound.evaluate(n, k),
                actual: (q.probs()[k] - pi_eps.probs()[k]).abs(),
            });
        }
    }
    let mut constants = BTreeMap::new();
    constants.insert("N".into(), block as f64);
    for (j, t) in bound.classes.iter().enumerate() {
        let c = j + 1;
        constants.insert(format!("class{c}_f_d"), t.f_d);
        constants.insert(format!("class{c}_f_p"), t.f_p);
        constants.insert(format!("class{c}_Q_pi_eps"), t.q_pi_eps);
        constants.insert(format!("class{c}_Q_p"), t.q_p);
        constants.insert(format!("class{c}_Delta_N"), t.ergodicity.delta_n);
    }
    Ok(BoundReport {
        theorem: Theorem::T7,
        epsilon,
        constants,
        rows,
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Smallest N ≤ `max_block` with Δ_N(P) < 1 (class-wise for singular chains).
pub fn smallest_contracting_block(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
    max_block: usize,
) -> Result<Option<usize>> {
    structure.require_supported()?;
    for n in 1..=max_block {
        let ok = match structure.regime {
            Regime::Regular => ergodicity_coefficient(p0, n)?.delta_n < 1.0,
            _ => class_ergodicity(p0, structure, n)?
                .iter()
                .all(|r| r.delta_n < 1.0),
        };
        if ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// max_{i,j} |p₀,ij(n) − π₀,j| for a regular chain, used to sanity-check C.
pub fn uniform_deviation(p0: &StochasticMatrix, pi0: &[f64], n: usize) -> f64 {
    matrix_power(p0, n)
        .rows()
        .map(|r| max_abs_diff(r, pi0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::decompose;

    fn two_state(a: f64, b: f64) -> StochasticMatrix {
        StochasticMatrix::from_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    #[test]
    fn tail_constants_of_two_state_chain() {
        // Pⁿ − Π = (1 − a − b)ⁿ (I − Π), so λ = |1 − a − b| and C = max |(I − Π)_ij|.
        let (a, b) = (0.3, 0.2);
        let t = estimate_tail_constants(&two_state(a, b), 200).unwrap();
        assert!((t.lambda - 0.5).abs() < 1e-12);
        let pi = [b / (a + b), a / (a + b)];
        let expected = (1.0 - pi[0]).max(pi[0]).max(pi[1]).max(1.0 - pi[1]);
        assert!((t.c - expected).abs() < 1e-6, "{} vs {}", t.c, expected);
    }

    #[test]
    fn tail_term_round_trip() {
        let t = TailConstants::with_tail_term(0.4, 1.0 / 3.0).unwrap();
        assert!((t.tail_term() - 0.4).abs() < 1e-15);
        assert!(TailConstants::new(1.0, 1.0).is_err());
    }

    #[test]
    fn theorem1_vanishes_at_zero() {
        let t = TailConstants::new(2.0, 0.5).unwrap();
        let d = DampingVector::uniform(3);
        let pi = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(bound_theorem1(&t, &d, &pi, 0.0).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn geometric_bound_edge_cases() {
        let p0 = two_state(0.3, 0.2);
        let pi = Distribution::new(vec![0.4, 0.6]).unwrap();
        let b = theorem5(&p0, &pi, &pi, 0.1).unwrap();
        assert_eq!(b.evaluate(0), 0.0);
        let p = Distribution::point_mass(2, 0).unwrap();
        let b5 = theorem5(&p0, &p, &pi, 0.1).unwrap();
        assert!((b5.evaluate(0) - 0.6).abs() < 1e-15);
        let b6 = theorem6(&p0, &p, &pi, 0.1, 1).unwrap();
        for n in 0..10 {
            assert!((b5.evaluate(n) - b6.evaluate(n)).abs() < 1e-15);
        }
        let b6 = theorem6(&p0, &p, &pi, 0.1, 3).unwrap();
        assert_eq!(b6.evaluate(2), b6.evaluate(0));
    }

    #[test]
    fn singular_bound_rejects_regular() {
        let p0 = two_state(0.3, 0.2);
        let s = decompose(&p0);
        let d = DampingVector::uniform(2);
        let p = Distribution::uniform(2);
        assert!(matches!(
            SingularBound::new(&p0, &d, &p, 0.1, 1, &s),
            Err(ChainError::RegimeMismatch(_))
        ));
    }
}
