#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarm_gsp::spectral::{GraphSignal, SignalKind, WeightedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_positions(rng: &mut impl Rng, n: usize, dim: usize, extent: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, dim, |_, _| rng.gen_range(-extent..extent))
}

/// Gaussian-kernel adjacency by explicit loops over ordered pairs.
pub fn kernel_oracle(x: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = x.nrows();
    let mut sq = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let mut d2 = 0.0;
                for c in 0..x.ncols() {
                    d2 += (x[(j, c)] - x[(k, c)]).powi(2);
                }
                sq[(j, k)] = d2;
                total += d2;
            }
        }
    }
    let sigma2 = total / (n * (n - 1)) as f64;
    let a = DMatrix::from_fn(n, n, |j, k| if j == k { 0.0 } else { (-sq[(j, k)] / sigma2).exp() });
    (a, sigma2)
}

/// `I - D^{-1/2} A D^{-1/2}` entry by entry.
pub fn laplacian_oracle(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|j| (0..n).map(|k| a[(j, k)]).sum()).collect();
    DMatrix::from_fn(n, n, |j, k| {
        let off = a[(j, k)] / (d[j] * d[k]).sqrt();
        if j == k {
            1.0 - off
        } else {
            -off
        }
    })
}

pub fn kernel_graph(rng: &mut impl Rng, n: usize) -> WeightedGraph {
    let (a, sigma2) = kernel_oracle(&random_positions(rng, n, 3, 10.0));
    WeightedGraph::new(a, sigma2).unwrap()
}

pub fn random_signal(rng: &mut impl Rng, n: usize, m: usize, complex: bool) -> GraphSignal {
    let re = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    if complex {
        let im = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
        GraphSignal::complex(SignalKind::Raw, re, im).unwrap()
    } else {
        GraphSignal::real(SignalKind::Raw, re)
    }
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dvec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// (graph size, signal columns, complex?, seed)
pub fn graph_case() -> impl Strategy<Value = (usize, usize, bool, u64)> {
    (2usize..40, 1usize..4, any::<bool>(), any::<u64>())
}
