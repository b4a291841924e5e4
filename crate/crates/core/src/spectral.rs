//! Spectra of unperturbed chains and the power-series expansion of π_ε in ε.
//!
//! For a regular chain whose trajectory from the damping vector decomposes as
//!
//! ```text
//! (d̄ P₀ⁿ)_j = π₀,j + Σ_l c_{j,l} ρ̄_lⁿ,   n ≥ 1,
//! ```
//!
//! the stationary law of P_ε = (1 − ε)P₀ + εD has the expansion
//! π_ε = π₀ + Σ_k π̃[k] εᵏ with
//!
//! ```text
//! π̃[1]_j = d_j − π₀,j + Σ_l c_{j,l} ρ̄_l / (1 − ρ̄_l)
//! π̃[k]_j = (−1)^{k−1} Σ_l c_{j,l} ρ̄_l^{k−1} / (1 − ρ̄_l)^k,   k ≥ 2.
//! ```
//!
//! The coefficients c_{j,l} come from a Vandermonde solve on trajectory
//! samples; singular chains are expanded class by class.

use nalgebra::{Complex, DMatrix, Schur};
use serde::Serialize;

use crate::chain::{check_dim, vec_mat, DampingVector, Distribution, StochasticMatrix};
use crate::error::{ChainError, Result};
use crate::stationary::{limit_stationary, stationary_direct};
use crate::structure::{restrict, restrict_damping, ChainStructure, Regime};

pub type C64 = Complex<f64>;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_ORDER: usize = 2;
const MAX_CONDITION: f64 = 1e12;
const CONSTANT_TERM_TOL: f64 = 1e-6;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-10;

/// A group of numerically equal eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl EigenCluster {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// All eigenvalues, by descending modulus (ties: larger real part first).
    pub eigenvalues: Vec<C64>,
    /// Distinct representatives in the same order; the first is the eigenvalue 1.
    pub clusters: Vec<EigenCluster>,
    pub cluster_tol: f64,
}

impl Spectrum {
    /// |ρ̄₂|, the largest modulus below the leading eigenvalue (0 for a single cluster).
    pub fn second_modulus(&self) -> f64 {
        self.clusters.get(1).map_or(0.0, EigenCluster::modulus)
    }
}

pub fn spectrum(p0: &StochasticMatrix) -> Result<Spectrum> {
    spectrum_with_tol(p0, DEFAULT_CLUSTER_TOL)
}

/// Eigenvalues via Hessenberg reduction and shifted QR (real Schur form).
pub fn spectrum_with_tol(p0: &StochasticMatrix, cluster_tol: f64) -> Result<Spectrum> {
    let m = p0.dim();
    let a = DMatrix::from_row_slice(m, m, p0.as_slice());
    let schur = Schur::try_new(a, f64::EPSILON, 1000 * m.max(10))
        .ok_or_else(|| ChainError::Eigen("QR iteration did not converge".into()))?;
    let mut eigenvalues: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_eigenvalues(&mut eigenvalues);

    let mut groups: Vec<(C64, usize)> = Vec::new();
    for &z in &eigenvalues {
        match groups
            .iter_mut()
            .find(|(c, _)| (*c - z).norm() <= cluster_tol)
        {
            Some((c, k)) => {
                *c = (*c * *k as f64 + z) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => groups.push((z, 1)),
        }
    }
    let lead = groups
        .iter()
        .position(|(c, _)| (*c - C64::new(1.0, 0.0)).norm() <= 1e-8)
        .ok_or_else(|| ChainError::Eigen("no eigenvalue equal to 1 was found".into()))?;
    let leading = groups.remove(lead);
    groups.insert(0, (C64::new(1.0, 0.0), leading.1));
    groups[1..].sort_by(|a, b| compare_eigen(&a.0, &b.0));

    let clusters = groups
        .into_iter()
        .map(|(c, k)| EigenCluster {
            re: c.re,
            im: c.im,
            multiplicity: k,
        })
        .collect();
    Ok(Spectrum {
        eigenvalues,
        clusters,
        cluster_tol,
    })
}

fn compare_eigen(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

fn sort_eigenvalues(v: &mut [C64]) {
    v.sort_by(compare_eigen);
}

/// Coefficients of the distinct-eigenvalue decomposition of d̄P₀ⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoefficients {
    /// π₀ from the direct solver.
    pub pi0: Vec<f64>,
    /// Constant terms recovered by the Vandermonde solve.
    pub constant: Vec<f64>,
    /// Distinct non-unit, nonzero eigenvalues ρ̄_l.
    pub eigenvalues: Vec<C64>,
    /// `coeffs[j][l]` multiplies ρ̄_lⁿ in state j.
    pub coeffs: Vec<Vec<C64>>,
    /// 1-norm condition estimate of the scaled Vandermonde matrix.
    pub condition: f64,
}

impl SpectralCoefficients {
    /// π₀ + Σ_l c_l ρ̄_lⁿ for every state, valid for n ≥ 1.
    pub fn reconstruct(&self, n: usize) -> Vec<C64> {
        let powers: Vec<C64> = self.eigenvalues.iter().map(|r| r.powu(n as u32)).collect();
        self.coeffs
            .iter()
            .zip(&self.constant)
            .map(|(row, &c0)| {
                row.iter()
                    .zip(&powers)
                    .fold(C64::new(c0, 0.0), |acc, (c, p)| acc + c * p)
            })
            .collect()
    }
}

/// Solves for the trajectory coefficients of a regular chain.
///
/// Samples n = 1..=m̄ are used so that a zero eigenvalue (which only affects
/// n = 0) can be dropped from the basis.
pub fn spectral_coefficients(
    p0: &StochasticMatrix,
    d: &DampingVector,
    spec: &Spectrum,
) -> Result<SpectralCoefficients> {
    check_dim(p0.dim(), d.dim())?;
    let m = p0.dim();
    let pi0 = stationary_direct(p0)?.pi.into_vec();

    let mut nodes = vec![C64::new(1.0, 0.0)];
    for c in &spec.clusters[1..] {
        let z = c.value();
        if (z - C64::new(1.0, 0.0)).norm() < spec.cluster_tol {
            return Err(ChainError::NearUnitEigenvalue { re: z.re, im: z.im });
        }
        if z.norm() > spec.cluster_tol {
            nodes.push(z);
        }
    }
    let k = nodes.len();

    let mut samples = Vec::with_capacity(2 * k + 1);
    let mut v = d.weights().to_vec();
    samples.push(v.clone());
    for _ in 0..2 * k {
        v = vec_mat(&v, p0);
        samples.push(v.clone());
    }

    // Column l scaled by ρ̄_l: rows n = 1..=k hold ρ̄_l^{n−1}.
    let vander = DMatrix::from_fn(k, k, |r, l| nodes[l].powu(r as u32));
    let inverse = vander
        .clone()
        .try_inverse()
        .ok_or(ChainError::IllConditioned {
            condition: f64::INFINITY,
        })?;
    let condition = norm1(&vander) * norm1(&inverse);
    if !(condition <= MAX_CONDITION) {
        return Err(ChainError::IllConditioned { condition });
    }
    let rhs = DMatrix::from_fn(k, m, |r, j| C64::new(samples[r + 1][j], 0.0));
    let scaled = vander
        .lu()
        .solve(&rhs)
        .ok_or(ChainError::IllConditioned { condition })?;

    let mut constant = Vec::with_capacity(m);
    let mut coeffs = Vec::with_capacity(m);
    for j in 0..m {
        constant.push(scaled[(0, j)].re);
        coeffs.push(
            (1..k)
                .map(|l| scaled[(l, j)] / nodes[l])
                .collect::<Vec<_>>(),
        );
    }
    let result = SpectralCoefficients {
        pi0,
        constant,
        eigenvalues: nodes[1..].to_vec(),
        coeffs,
        condition,
    };

    let mismatch = result
        .constant
        .iter()
        .zip(&result.pi0)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if mismatch > CONSTANT_TERM_TOL {
        return Err(ChainError::NonSemisimple(format!(
            "constant term differs from the stationary law by {mismatch:e}"
        )));
    }
    for (n, sample) in samples.iter().enumerate().skip(1) {
        let rec = result.reconstruct(n);
        let err = rec
            .iter()
            .zip(sample)
            .map(|(r, s)| (r - C64::new(*s, 0.0)).norm())
            .fold(0.0, f64::max);
        if err > RECONSTRUCTION_TOL {
            return Err(ChainError::NonSemisimple(format!(
                "trajectory reconstruction error {err:e} at n = {n}"
            )));
        }
    }
    Ok(result)
}

fn norm1(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// π_ε ≈ base + Σ_{k=1}^{order} coeffs[k−1] εᵏ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionSeries {
    pub base: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
    pub order: usize,
}

/// An evaluated truncated expansion and how far its mass is from 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionValue {
    pub values: Vec<f64>,
    pub mass_defect: f64,
}

/// Expansion coefficients of π_ε up to `order`.
pub fn expansion(
    p0: &StochasticMatrix,
    d: &DampingVector,
    structure: &ChainStructure,
    order: usize,
) -> Result<ExpansionSeries> {
    expansion_with_tol(p0, d, structure, order, DEFAULT_CLUSTER_TOL)
}

pub fn expansion_with_tol(
    p0: &StochasticMatrix,
    d: &DampingVector,
    structure: &ChainStructure,
    order: usize,
    cluster_tol: f64,
) -> Result<ExpansionSeries> {
    check_dim(p0.dim(), d.dim())?;
    structure.require_supported()?;
    let m = p0.dim();
    if structure.regime == Regime::Regular {
        return regular_expansion(p0, d, order, cluster_tol);
    }
    let base = limit_stationary(p0, &d.to_distribution(), structure)?.into_vec();
    let mut coeffs = vec![vec![0.0; m]; order];
    for class in &structure.classes {
        let local_p = restrict(p0, class)?;
        let (local_d, mass) = restrict_damping(d, class)?;
        let local = regular_expansion(&local_p, &local_d, order, cluster_tol)?;
        for (k, row) in local.coeffs.iter().enumerate() {
            for (&state, &v) in class.states.iter().zip(row) {
                coeffs[k][state] = mass * v;
            }
        }
    }
    Ok(ExpansionSeries {
        base,
        coeffs,
        order,
    })
}

fn regular_expansion(
    p0: &StochasticMatrix,
    d: &DampingVector,
    order: usize,
    cluster_tol: f64,
) -> Result<ExpansionSeries> {
    let spec = spectrum_with_tol(p0, cluster_tol)?;
    if spec.second_modulus() >= 1.0 - cluster_tol {
        return Err(ChainError::RegimeMismatch(
            "a non-leading eigenvalue has modulus 1".into(),
        ));
    }
    let sc = spectral_coefficients(p0, d, &spec)?;
    let m = p0.dim();
    let one = C64::new(1.0, 0.0);
    let mut coeffs = Vec::with_capacity(order);
    for k in 1..=order {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let mut sum = C64::new(0.0, 0.0);
            for (c, &rho) in sc.coeffs[j].iter().zip(&sc.eigenvalues) {
                let denom = one - rho;
                sum += if k == 1 {
                    c * rho / denom
                } else {
                    c * rho.powu(k as u32 - 1) / denom.powu(k as u32)
                };
            }
            if k == 1 {
                sum += C64::new(d.weights()[j] - sc.pi0[j], 0.0);
            } else if k % 2 == 0 {
                sum = -sum;
            }
            if sum.im.abs() > IMAG_TOL * sum.re.abs().max(1.0) {
                return Err(ChainError::ComplexResidue {
                    residue: sum.im.abs(),
                });
            }
            row.push(sum.re);
        }
        coeffs.push(row);
    }
    Ok(ExpansionSeries {
        base: sc.pi0,
        coeffs,
        order,
    })
}

/// Horner evaluation of the truncated series at ε.
pub fn evaluate_expansion(series: &ExpansionSeries, epsilon: f64) -> ExpansionValue {
    let values: Vec<f64> = (0..series.base.len())
        .map(|j| {
            let tail = series
                .coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, row| (acc + row[j]) * epsilon);
            series.base[j] + tail
        })
        .collect();
    let mass_defect = 1.0 - values.iter().sum::<f64>();
    ExpansionValue {
        values,
        mass_defect,
    }
}

/// The limit distribution as a validated [`Distribution`].
pub fn expansion_base(series: &ExpansionSeries) -> Result<Distribution> {
    Distribution::with_tolerance(series.base.clone(), 1e-9)
}
