//! Stationary distributions of damped chains and their ε → 0 limits.
//!
//! Three independent solvers are provided: a direct linear solve, power
//! iteration, and the geometric series over the unperturbed trajectory
//! started from the damping vector,
//!
//! ```text
//! π_ε = ε Σ_{l ≥ 0} (d̄ P₀ˡ)(1 − ε)ˡ.
//! ```

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chain::{check_dim, tv, vec_mat, DampingVector, Distribution, StochasticMatrix};
use crate::error::{ChainError, Result};
use crate::structure::{class_mass, restrict, ChainStructure, Regime};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Relative pivot size below which the direct system is declared singular.
const PIVOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Power,
    Series,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarySolution {
    pub pi: Distribution,
    pub method: Method,
    /// Iterations for `Power`, truncation index L for `Series`, 0 for `Direct`.
    pub iterations_or_terms: usize,
    /// max_j |(πP)_j − π_j|.
    pub residual: f64,
}

/// max_j |(πP)_j − π_j|.
pub fn residual(pi: &[f64], p: &StochasticMatrix) -> f64 {
    vec_mat(pi, p)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves πP = π, Σπ = 1 by LU with partial pivoting.
///
/// The normalization replaces the last balance equation. Fails when P has
/// more than one closed class, since the system is then rank deficient.
pub fn stationary_direct(p: &StochasticMatrix) -> Result<StationarySolution> {
    let m = p.dim();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(j, i)] = p.get(i, j);
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;

    let lu = a.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..m).map(|i| u[(i, i)].abs()).collect();
    let scale = diag.iter().cloned().fold(1.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smallest > PIVOT_TOL * scale) {
        return Err(ChainError::Singular(
            "stationary system is rank deficient; the chain has several closed classes, \
             solve per class instead"
                .into(),
        ));
    }
    let x = lu
        .solve(&b)
        .ok_or_else(|| ChainError::Singular("LU solve failed".into()))?;

    let mut pi: Vec<f64> = x.iter().copied().collect();
    for v in &mut pi {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(ChainError::Singular(format!(
                    "solution has a negative component {v}"
                )));
            }
            *v = 0.0;
        }
    }
    let res = residual(&pi, p);
    if res > DEFAULT_SOLVER_TOL {
        return Err(ChainError::Singular(format!(
            "direct solve residual {res:e} exceeds {DEFAULT_SOLVER_TOL:e}"
        )));
    }
    Ok(StationarySolution {
        pi: Distribution::from_raw(pi),
        method: Method::Direct,
        iterations_or_terms: 0,
        residual: res,
    })
}

/// Iterates p ← pP until successive iterates are within `tol` in total variation.
///
/// The iteration count excludes the final step that confirmed convergence, so a
/// fixed point converges in zero iterations.
pub fn stationary_power(
    p: &StochasticMatrix,
    start: &Distribution,
    tol: f64,
    max_iter: usize,
) -> Result<StationarySolution> {
    check_dim(p.dim(), start.dim())?;
    if !(tol > 0.0) {
        return Err(ChainError::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let mut current = start.probs().to_vec();
    let mut iterations = 0;
    loop {
        let next = vec_mat(&current, p);
        let change = tv(&next, &current);
        current = next;
        if change < tol {
            break;
        }
        iterations += 1;
        if iterations >= max_iter {
            return Err(ChainError::NotConverged {
                iterations,
                change,
                last: current,
            });
        }
    }
    let res = residual(&current, p);
    Ok(StationarySolution {
        pi: Distribution::from_raw(current),
        method: Method::Power,
        iterations_or_terms: iterations,
        residual: res,
    })
}

/// Sums the geometric series until the tail bound (1 − ε)^{L+1} drops below `tol`.
pub fn stationary_series(
    p0: &StochasticMatrix,
    d: &DampingVector,
    epsilon: f64,
    tol: f64,
) -> Result<StationarySolution> {
    check_dim(p0.dim(), d.dim())?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ChainError::InvalidEpsilon(epsilon));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(ChainError::InvalidArgument(format!(
            "tolerance {tol} must lie in (0, 1)"
        )));
    }
    let m = p0.dim();
    let mut term = d.weights().to_vec();
    let mut pi = vec![0.0; m];
    let mut weight = 1.0;
    let mut l = 0;
    loop {
        for (acc, t) in pi.iter_mut().zip(&term) {
            *acc += epsilon * weight * t;
        }
        weight *= 1.0 - epsilon;
        if weight < tol {
            break;
        }
        term = vec_mat(&term, p0);
        l += 1;
    }
    let p_eps = crate::chain::damp(p0, d, epsilon);
    let res = residual(&pi, &p_eps);
    Ok(StationarySolution {
        pi: Distribution::from_raw(pi),
        method: Method::Series,
        iterations_or_terms: l,
        residual: res,
    })
}

/// The ε → 0 limit of the stationary law, for initial distribution `p`.
///
/// Regular chains give their unique stationary law. Singular chains give
/// f⁽ʲ⁾_p · π⁽ʲ⁾₀ on each closed class j; with `p` the damping vector this is
/// the limit of π_ε.
pub fn limit_stationary(
    p0: &StochasticMatrix,
    p: &Distribution,
    structure: &ChainStructure,
) -> Result<Distribution> {
    check_dim(p0.dim(), p.dim())?;
    structure.require_supported()?;
    if structure.regime == Regime::Regular {
        return Ok(stationary_direct(p0)?.pi);
    }
    let masses = class_mass(p, structure)?;
    let mut out = vec![0.0; p0.dim()];
    for (class, mass) in structure.classes.iter().zip(masses) {
        let local = stationary_direct(&restrict(p0, class)?)?;
        for (&state, &v) in class.states.iter().zip(local.pi.probs()) {
            out[state] = mass * v;
        }
    }
    Ok(Distribution::from_raw(out))
}

/// Per-class stationary laws π⁽ʲ⁾₀ of the restricted matrices.
pub fn class_stationary(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
) -> Result<Vec<Vec<f64>>> {
    structure
        .classes
        .iter()
        .map(|c| Ok(stationary_direct(&restrict(p0, c)?)?.pi.into_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_damped_matrix, DampedChain};
    use crate::structure::decompose;

    fn example_p0() -> StochasticMatrix {
        let t = 1.0 / 3.0;
        StochasticMatrix::from_rows(&[
            vec![0.2, 0.2, 0.2, 0.2, 0.2],
            vec![0.25, 0.0, 0.25, 0.25, 0.25],
            vec![0.0, t, 0.0, t, t],
            vec![0.0, t, t, 0.0, t],
            vec![0.0, t, t, t, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn direct_solves_small_chain() {
        let pi = stationary_direct(&example_p0()).unwrap().pi;
        let expected = [5.0 / 66.0, 8.0 / 33.0, 5.0 / 22.0, 5.0 / 22.0, 5.0 / 22.0];
        for (a, b) in pi.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_on_rank_one_returns_damping() {
        let d = DampingVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let pi = stationary_direct(&StochasticMatrix::rank_one(&d))
            .unwrap()
            .pi;
        for (a, b) in pi.probs().iter().zip(d.weights()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn direct_rejects_two_classes() {
        let p = StochasticMatrix::identity(3);
        assert!(matches!(
            stationary_direct(&p),
            Err(ChainError::Singular(_))
        ));
    }

    #[test]
    fn power_fixed_point_and_full_damping() {
        let p0 = example_p0();
        let pi = stationary_direct(&p0).unwrap().pi;
        assert_eq!(
            stationary_power(&p0, &pi, 1e-12, 100)
                .unwrap()
                .iterations_or_terms,
            0
        );

        let d = DampingVector::uniform(5);
        let p1 = build_damped_matrix(&DampedChain::new(p0, d.clone(), 1.0).unwrap()).unwrap();
        let start = Distribution::point_mass(5, 0).unwrap();
        let sol = stationary_power(&p1, &start, 1e-12, 100).unwrap();
        assert_eq!(sol.iterations_or_terms, 1);
        assert!(tv(sol.pi.probs(), d.weights()) < 1e-15);
    }

    #[test]
    fn power_reports_last_iterate() {
        let p = StochasticMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let start = Distribution::point_mass(2, 0).unwrap();
        match stationary_power(&p, &start, 1e-12, 5) {
            Err(ChainError::NotConverged {
                iterations, last, ..
            }) => {
                assert_eq!(iterations, 5);
                assert_eq!(last, vec![0.0, 1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn series_edge_cases() {
        let p0 = example_p0();
        let d = DampingVector::uniform(5);
        assert!(stationary_series(&p0, &d, 0.0, 1e-12).is_err());
        let sol = stationary_series(&p0, &d, 1.0, 1e-12).unwrap();
        assert_eq!(sol.iterations_or_terms, 0);
        assert_eq!(sol.pi.probs(), d.weights());
    }

    #[test]
    fn series_matches_direct() {
        let p0 = example_p0();
        let d = DampingVector::uniform(5);
        let eps = 0.15;
        let p =
            build_damped_matrix(&DampedChain::new(p0.clone(), d.clone(), eps).unwrap()).unwrap();
        let direct = stationary_direct(&p).unwrap().pi;
        let series = stationary_series(&p0, &d, eps, 1e-13).unwrap();
        assert!(tv(direct.probs(), series.pi.probs()) < 1e-12);
        let expected = 1261.0 / 13071.0;
        assert!((direct.probs()[0] - expected).abs() < 1e-13);
    }

    #[test]
    fn limit_of_identity_blocks_scales_by_mass() {
        let p0 = StochasticMatrix::identity(3);
        let s = decompose(&p0);
        let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(limit_stationary(&p0, &p, &s).unwrap(), p);
    }
}
