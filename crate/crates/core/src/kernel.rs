//! The coupled chain on pairs of states and a Monte-Carlo estimate of its
//! coupling time T = min{n ≥ 0 : X′ₙ = X″ₙ}.
//!
//! From a pair (i, j) the next pair is drawn from the maximal coupling of rows
//! i and j, so each coordinate moves according to P and the pair is absorbed
//! on the diagonal. Rows of the pair kernel are built on first use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;

use crate::chain::{matrix_power, StochasticMatrix};
use crate::coupling::{coupling_of, CouplingJoint};

/// Identifier of the random stream layout, recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha8-stream-per-trial";

/// A sparse joint law on pairs, ready for inverse-CDF sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct PairLaw {
    pairs: Vec<(u32, u32)>,
    cumulative: Vec<f64>,
}

impl PairLaw {
    pub fn from_joint(joint: &CouplingJoint) -> Self {
        let m = joint.dim();
        let mut pairs = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for r in 0..m {
            for k in 0..m {
                let p = joint.get(r, k);
                if p > 0.0 {
                    acc += p;
                    pairs.push((r as u32, k as u32));
                    cumulative.push(acc);
                }
            }
        }
        Self { pairs, cumulative }
    }

    /// Support points and their probabilities.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.pairs.iter().enumerate().map(|(i, &(r, k))| {
            let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
            ((r as usize, k as usize), self.cumulative[i] - lo)
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let total = *self.cumulative.last().expect("non-empty law");
        let u = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.pairs.len() - 1);
        let (r, k) = self.pairs[idx];
        (r as usize, k as usize)
    }
}

/// Transition kernel of the coupled chain, memoized per pair.
pub struct CouplingKernel {
    matrix: StochasticMatrix,
    rows: Vec<OnceLock<PairLaw>>,
}

impl CouplingKernel {
    pub fn new(p: &StochasticMatrix) -> Self {
        let m = p.dim();
        Self {
            matrix: p.clone(),
            rows: (0..m * m).map(|_| OnceLock::new()).collect(),
        }
    }

    /// The kernel that moves both coordinates by Pᴺ per step.
    pub fn n_step(p: &StochasticMatrix, n: usize) -> Self {
        Self::new(&matrix_power(p, n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &StochasticMatrix {
        &self.matrix
    }

    /// Joint law of the next pair from (i, j).
    pub fn joint(&self, i: usize, j: usize) -> CouplingJoint {
        coupling_of(self.matrix.row(i), self.matrix.row(j))
    }

    pub fn pair_law(&self, i: usize, j: usize) -> &PairLaw {
        self.rows[i * self.dim() + j].get_or_init(|| PairLaw::from_joint(&self.joint(i, j)))
    }
}

pub fn build_coupling_kernel(p: &StochasticMatrix) -> CouplingKernel {
    CouplingKernel::new(p)
}

/// Empirical tail P{T > n}, n = 0..=horizon, with binomial standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingTail {
    pub trials: usize,
    pub seed: u64,
    pub horizon: usize,
    pub rng: &'static str,
    pub tail: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Runs `trials` independent copies of the coupled chain from `start`.
///
/// Trial t draws from the ChaCha8 stream number t of `seed`, so the result does
/// not depend on how trials are spread over threads.
pub fn simulate_coupling_time(
    kernel: &CouplingKernel,
    start: &CouplingJoint,
    trials: usize,
    seed: u64,
    horizon: usize,
) -> CouplingTail {
    let start_law = PairLaw::from_joint(start);
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let (mut a, mut b) = start_law.sample(&mut rng);
            let mut steps = 0;
            while a != b && steps <= horizon {
                (a, b) = kernel.pair_law(a, b).sample(&mut rng);
                steps += 1;
            }
            steps
        })
        .fold(
            || vec![0u64; horizon + 2],
            |mut acc, t| {
                acc[t.min(horizon + 1)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; horizon + 2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let n_trials = trials as f64;
    let mut above = trials as u64;
    let mut tail = Vec::with_capacity(horizon + 1);
    let mut std_error = Vec::with_capacity(horizon + 1);
    for count in counts.iter().take(horizon + 1) {
        above -= count;
        let p = above as f64 / n_trials;
        tail.push(p);
        std_error.push((p * (1.0 - p) / n_trials).sqrt());
    }
    CouplingTail {
        trials,
        seed,
        horizon,
        rng: RNG_ALGORITHM,
        tail,
        std_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Distribution;
    use crate::coupling::maximal_coupling;

    #[test]
    fn diagonal_pairs_are_absorbing() {
        let p = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let k = build_coupling_kernel(&p);
        for ((r, c), _) in k.pair_law(1, 1).entries() {
            assert_eq!(r, c);
        }
    }

    #[test]
    fn disjoint_rows_give_product() {
        let p = StochasticMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let k = build_coupling_kernel(&p);
        let j = k.joint(0, 1);
        assert_eq!(j.diagonal_mass(), 0.0);
        assert_eq!(j.get(0, 1), 0.5);
        assert_eq!(j.get(0, 2), 0.5);
    }

    #[test]
    fn start_on_diagonal_never_waits() {
        let p = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let k = build_coupling_kernel(&p);
        let d = Distribution::new(vec![0.3, 0.7]).unwrap();
        let start = maximal_coupling(&d, &d).unwrap();
        let tail = simulate_coupling_time(&k, &start, 1000, 7, 5);
        assert!(tail.tail.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let p = StochasticMatrix::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let k = build_coupling_kernel(&p);
        let start = maximal_coupling(
            &Distribution::point_mass(2, 0).unwrap(),
            &Distribution::point_mass(2, 1).unwrap(),
        )
        .unwrap();
        let a = simulate_coupling_time(&k, &start, 2000, 42, 10);
        let b = simulate_coupling_time(&k, &start, 2000, 42, 10);
        assert_eq!(a, b);
        assert_eq!(a.tail[0], 1.0);
    }
}
