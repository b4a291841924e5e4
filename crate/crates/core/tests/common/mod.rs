#![allow(dead_code)]

use damped_chain::{DampingVector, StochasticMatrix};
use rand::Rng;

const T: f64 = 1.0 / 3.0;

/// Five pages: page 1 links everywhere (itself included), page 2 to all
/// others, pages 3–5 to every other page except page 1.
pub fn five_state() -> StochasticMatrix {
    StochasticMatrix::from_rows(&[
        vec![0.2, 0.2, 0.2, 0.2, 0.2],
        vec![0.25, 0.0, 0.25, 0.25, 0.25],
        vec![0.0, T, 0.0, T, T],
        vec![0.0, T, T, 0.0, T],
        vec![0.0, T, T, T, 0.0],
    ])
    .unwrap()
}

pub fn four_state_rows() -> [[f64; 4]; 4] {
    [
        [0.0, 1.0, 0.0, 0.0],
        [T, 0.0, T, T],
        [0.0, 0.5, 0.0, 0.5],
        [0.0, 0.5, 0.5, 0.0],
    ]
}

pub fn second_block_rows() -> [[f64; 4]; 4] {
    [
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5],
        [T, T, 0.0, T],
        [T, T, T, 0.0],
    ]
}

pub fn four_state() -> StochasticMatrix {
    StochasticMatrix::from_rows(&four_state_rows().map(|r| r.to_vec())).unwrap()
}

/// Two disjoint four-page networks.
pub fn eight_state() -> StochasticMatrix {
    let a = four_state_rows();
    let b = second_block_rows();
    let mut rows = vec![vec![0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            rows[i][j] = a[i][j];
            rows[i + 4][j + 4] = b[i][j];
        }
    }
    StochasticMatrix::from_rows(&rows).unwrap()
}

pub fn uniform(m: usize) -> DampingVector {
    DampingVector::uniform(m)
}

fn random_rows<R: Rng>(rng: &mut R, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            let raw: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.random::<f64>() < 0.3 {
                        0.0
                    } else {
                        rng.random::<f64>() + 0.01
                    }
                })
                .collect();
            let raw = if raw.iter().all(|&x| x == 0.0) {
                vec![1.0; m]
            } else {
                raw
            };
            let s: f64 = raw.iter().sum();
            let mut row: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let drift: f64 = 1.0 - row.iter().sum::<f64>();
            let k = row.iter().position(|&x| x > 0.0).unwrap();
            row[k] += drift;
            row
        })
        .collect()
}

/// A random chain classified as regular (one aperiodic class).
pub fn random_regular<R: Rng>(rng: &mut R, m: usize) -> StochasticMatrix {
    loop {
        let p = StochasticMatrix::from_rows(&random_rows(rng, m)).unwrap();
        if damped_chain::structure::decompose(&p).regime == damped_chain::structure::Regime::Regular
        {
            return p;
        }
    }
}

/// A random chain with two closed aperiodic classes of sizes `a` and `b`.
pub fn random_singular<R: Rng>(rng: &mut R, a: usize, b: usize) -> StochasticMatrix {
    let first = random_regular(rng, a);
    let second = random_regular(rng, b);
    let m = a + b;
    let mut rows = vec![vec![0.0; m]; m];
    for i in 0..a {
        rows[i][..a].copy_from_slice(first.row(i));
    }
    for i in 0..b {
        rows[a + i][a..].copy_from_slice(second.row(i));
    }
    StochasticMatrix::from_rows(&rows).unwrap()
}

pub fn random_damping<R: Rng>(rng: &mut R, m: usize) -> DampingVector {
    let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let drift = 1.0 - w.iter().sum::<f64>();
    w[0] += drift;
    DampingVector::new(w).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
