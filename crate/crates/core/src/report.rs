//! Serializable report sections and deterministic JSON output.
//!
//! Every float in an emitted report is rounded to [`SIGNIFICANT_DIGITS`]
//! significant digits, and object keys keep insertion order, so identical
//! inputs produce byte-identical output.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::bounds::theorem6;
use crate::chain::{damp, DampingVector, Distribution, StochasticMatrix};
use crate::coupling::{class_ergodicity, ergodicity_coefficient, maximal_coupling, overlap};
use crate::error::Result;
use crate::kernel::{simulate_coupling_time, CouplingKernel, CouplingTail};
use crate::spectral::{evaluate_expansion, spectrum_with_tol, ExpansionSeries, Spectrum};
use crate::stationary::{
    limit_stationary, stationary_direct, stationary_power, stationary_series, Method,
    StationarySolution,
};
use crate::structure::{ChainStructure, Regime};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every non-integer number in `value` in place.
pub fn round_value(value: &mut Value, digits: usize) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, digits)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_value(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_value(v, digits)),
        _ => {}
    }
}

/// Serializes `value`, then rounds floats to [`SIGNIFICANT_DIGITS`].
pub fn to_value<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("report values are finite");
    round_value(&mut v, SIGNIFICANT_DIGITS);
    v
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(value)).expect("valid JSON value");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassSummary {
    /// 1-based state ids.
    pub states: Vec<usize>,
    pub period: usize,
    pub aperiodic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicityRow {
    /// 1-based class, absent when the whole chain is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    pub n: usize,
    pub q_n: f64,
    pub delta_n: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureSection {
    pub regime: Regime,
    pub classes: Vec<ClassSummary>,
    pub transient_states: Vec<usize>,
    pub diagnostic: Option<String>,
    pub ergodicity: Vec<ErgodicityRow>,
}

/// Δ_N for N = 1..=max_n on the whole chain (regular) or per class (singular).
pub fn ergodicity_table(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
    max_n: usize,
) -> Result<Vec<ErgodicityRow>> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        match structure.regime {
            Regime::Singular => {
                for (j, r) in class_ergodicity(p0, structure, n)?.into_iter().enumerate() {
                    rows.push(ErgodicityRow {
                        class: Some(j + 1),
                        n,
                        q_n: r.q_n,
                        delta_n: r.delta_n,
                        degenerate: r.degenerate,
                    });
                }
            }
            _ => {
                let r = ergodicity_coefficient(p0, n)?;
                rows.push(ErgodicityRow {
                    class: None,
                    n,
                    q_n: r.q_n,
                    delta_n: r.delta_n,
                    degenerate: r.degenerate,
                });
            }
        }
    }
    Ok(rows)
}

pub fn structure_section(
    p0: &StochasticMatrix,
    structure: &ChainStructure,
    max_n: usize,
) -> Result<StructureSection> {
    let ergodicity = if structure.regime == Regime::Unsupported {
        Vec::new()
    } else {
        ergodicity_table(p0, structure, max_n)?
    };
    Ok(StructureSection {
        regime: structure.regime,
        classes: structure
            .classes
            .iter()
            .map(|c| ClassSummary {
                states: c.states.iter().map(|s| s + 1).collect(),
                period: c.period,
                aperiodic: c.aperiodic,
            })
            .collect(),
        transient_states: structure.transient_states.iter().map(|s| s + 1).collect(),
        diagnostic: structure.diagnostic.clone(),
        ergodicity,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryEntry {
    pub method: Method,
    pub pi: Vec<f64>,
    /// 1/π_j, absent for states of zero mass.
    pub mean_return_time: Vec<Option<f64>>,
    pub iterations_or_terms: usize,
    pub residual: f64,
}

impl From<StationarySolution> for StationaryEntry {
    fn from(s: StationarySolution) -> Self {
        let pi = s.pi.into_vec();
        Self {
            method: s.method,
            mean_return_time: pi.iter().map(|&x| (x > 0.0).then(|| 1.0 / x)).collect(),
            pi,
            iterations_or_terms: s.iterations_or_terms,
            residual: s.residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarySection {
    pub epsilon: f64,
    pub solutions: Vec<StationaryEntry>,
    /// max TV distance between any two methods.
    pub max_disagreement: f64,
}

/// All three methods for ε > 0; the ε → 0 limit started from d̄ for ε = 0.
pub fn stationary_section(
    p0: &StochasticMatrix,
    d: &DampingVector,
    structure: &ChainStructure,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StationarySection> {
    let solutions: Vec<StationarySolution> = if epsilon == 0.0 {
        let pi = limit_stationary(p0, &d.to_distribution(), structure)?;
        let residual = crate::stationary::residual(pi.probs(), p0);
        vec![StationarySolution {
            pi,
            method: Method::Direct,
            iterations_or_terms: 0,
            residual,
        }]
    } else {
        let p = damp(p0, d, epsilon);
        vec![
            stationary_direct(&p)?,
            stationary_power(&p, &d.to_distribution(), tol, max_iter)?,
            stationary_series(p0, d, epsilon, tol)?,
        ]
    };
    let mut max_disagreement: f64 = 0.0;
    for a in &solutions {
        for b in &solutions {
            max_disagreement = max_disagreement.max(crate::chain::tv(a.pi.probs(), b.pi.probs()));
        }
    }
    Ok(StationarySection {
        epsilon,
        solutions: solutions.into_iter().map(Into::into).collect(),
        max_disagreement,
    })
}

/// Stationary sections for an ε grid, computed in parallel and returned in grid order.
pub fn stationary_grid(
    p0: &StochasticMatrix,
    d: &DampingVector,
    structure: &ChainStructure,
    grid: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<StationarySection>> {
    grid.par_iter()
        .map(|&e| stationary_section(p0, d, structure, e, tol, max_iter))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueEntry {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSection {
    pub eigenvalues: Vec<EigenvalueEntry>,
    pub clusters: Vec<crate::spectral::EigenCluster>,
    pub cluster_tol: f64,
    pub second_modulus: f64,
}

impl From<&Spectrum> for SpectrumSection {
    fn from(s: &Spectrum) -> Self {
        Self {
            eigenvalues: s
                .eigenvalues
                .iter()
                .map(|z| EigenvalueEntry {
                    re: z.re,
                    im: z.im,
                    modulus: z.norm(),
                })
                .collect(),
            clusters: s.clusters.clone(),
            cluster_tol: s.cluster_tol,
            second_modulus: s.second_modulus(),
        }
    }
}

pub fn spectrum_section(p0: &StochasticMatrix, cluster_tol: f64) -> Result<SpectrumSection> {
    Ok((&spectrum_with_tol(p0, cluster_tol)?).into())
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    /// 1-based.
    pub state: usize,
    pub base: f64,
    /// Coefficients of ε¹, ε², …
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionCheck {
    pub epsilon: f64,
    pub expansion: Vec<f64>,
    pub exact: Vec<f64>,
    pub max_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionSection {
    pub order: usize,
    pub rows: Vec<ExpansionRow>,
    /// Σ_j of each coefficient row; zero up to round-off.
    pub coefficient_sums: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<ExpansionCheck>,
}

/// The coefficient table, optionally compared with the exact π_ε at `epsilon`.
pub fn expansion_section(
    p0: &StochasticMatrix,
    d: &DampingVector,
    series: &ExpansionSeries,
    epsilon: Option<f64>,
) -> Result<ExpansionSection> {
    let rows = (0..series.base.len())
        .map(|j| ExpansionRow {
            state: j + 1,
            base: series.base[j],
            coefficients: series.coeffs.iter().map(|c| c[j]).collect(),
        })
        .collect();
    let check = match epsilon {
        Some(e) if e > 0.0 => {
            let approx = evaluate_expansion(series, e).values;
            let exact = stationary_direct(&damp(p0, d, e))?.pi.into_vec();
            let max_error = crate::bounds::max_abs_diff(&approx, &exact);
            Some(ExpansionCheck {
                epsilon: e,
                expansion: approx,
                exact,
                max_error,
            })
        }
        _ => None,
    };
    Ok(ExpansionSection {
        order: series.order,
        rows,
        coefficient_sums: series.coeffs.iter().map(|c| c.iter().sum()).collect(),
        check,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingRow {
    /// Steps of the coupled chain.
    pub step: usize,
    /// Steps of the original chain, step × N.
    pub n: usize,
    pub tail: f64,
    pub std_error: f64,
    pub bound: f64,
    pub within_three_se: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingSection {
    pub epsilon: f64,
    pub block: usize,
    pub trials: usize,
    pub seed: u64,
    pub rng: &'static str,
    /// Diagonal mass of the initial coupling of p̄ and π_ε.
    pub start_overlap: f64,
    pub rows: Vec<CouplingRow>,
}

/// Coupling time of two copies of P_ε^N started from p̄ and π_ε, against the geometric bound.
#[allow(clippy::too_many_arguments)]
pub fn coupling_section(
    p0: &StochasticMatrix,
    d: &DampingVector,
    p: &Distribution,
    epsilon: f64,
    block: usize,
    trials: usize,
    seed: u64,
    horizon: usize,
) -> Result<CouplingSection> {
    let p_eps = damp(p0, d, epsilon);
    let pi_eps = stationary_direct(&p_eps)?.pi;
    let bound = theorem6(p0, p, &pi_eps, epsilon, block)?;
    let start = maximal_coupling(p, &pi_eps)?;
    let kernel = CouplingKernel::n_step(&p_eps, block);
    let CouplingTail {
        tail,
        std_error,
        rng,
        ..
    } = simulate_coupling_time(&kernel, &start, trials, seed, horizon);
    let rows = tail
        .iter()
        .zip(&std_error)
        .enumerate()
        .map(|(step, (&t, &se))| {
            let b = bound.evaluate(step * block);
            CouplingRow {
                step,
                n: step * block,
                tail: t,
                std_error: se,
                bound: b,
                within_three_se: t <= b + 3.0 * se,
            }
        })
        .collect();
    Ok(CouplingSection {
        epsilon,
        block,
        trials,
        seed,
        rng,
        start_overlap: overlap(p.probs(), pi_eps.probs()).min(1.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::decompose;
    use serde_json::json;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_sig(-2.0 / 3.0e-7, 12), -6_666_666.666_67);
        assert_eq!(round_sig(1.23456789012345e-20, 12), 1.23456789012e-20);
        assert_eq!(round_sig(0.0, 12), 0.0);
        let mut v = json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}});
        round_value(&mut v, 12);
        assert_eq!(v, json!({"a": [0.333333333333, 2], "b": {"c": 0.3}}));
    }

    #[test]
    fn stationary_section_reports_return_times() {
        let p0 = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let d = DampingVector::uniform(2);
        let s = decompose(&p0);
        let sec = stationary_section(&p0, &d, &s, 0.0, 1e-12, 1000).unwrap();
        assert_eq!(sec.solutions.len(), 1);
        let t = &sec.solutions[0].mean_return_time;
        assert!((t[0].unwrap() - 3.0).abs() < 1e-12);
        assert!((t[1].unwrap() - 1.5).abs() < 1e-12);
        let sec = stationary_section(&p0, &d, &s, 0.3, 1e-13, 10_000).unwrap();
        assert_eq!(sec.solutions.len(), 3);
        assert!(sec.max_disagreement < 1e-11);
    }

    #[test]
    fn coupling_rows_respect_bound() {
        let p0 = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let d = DampingVector::uniform(2);
        let p = Distribution::point_mass(2, 0).unwrap();
        let sec = coupling_section(&p0, &d, &p, 0.2, 1, 20_000, 3, 15).unwrap();
        assert!(sec.rows.iter().all(|r| r.within_three_se));
        assert_eq!(sec.rows[0].n, 0);
    }
}
