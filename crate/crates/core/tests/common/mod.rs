#![allow(dead_code)]

use num_complex::Complex64;
use qgame_core::matkit::eigh;
use qgame_core::quantum_state::{DensityState, LocalChannel};
use qgame_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    gaussian(rng, n, n).hermitian_part()
}

/// Product of Gaussian factors, rank `r` almost surely.
pub fn low_rank<R: Rng>(rng: &mut R, rows: usize, cols: usize, r: usize) -> Matrix {
    gaussian(rng, rows, r).matmul(&gaussian(rng, r, cols)).unwrap()
}

/// `G G* / tr`, with `G` of `rank` columns.
pub fn density<R: Rng>(rng: &mut R, dims: &[usize], rank: usize) -> DensityState {
    let n: usize = dims.iter().product();
    let g = gaussian(rng, n, rank.max(1));
    let m = g.matmul(&g.adjoint()).unwrap();
    let t = m.trace().re;
    DensityState::new(dims.to_vec(), m.scale(1.0 / t).hermitian_part()).unwrap()
}

/// Kraus operators `G_k S^{-1/2}` with `S = Σ G_k* G_k`.
pub fn channel<R: Rng>(rng: &mut R, player: usize, din: usize, dout: usize, count: usize) -> LocalChannel {
    let count = count.max(din.div_ceil(dout));
    let gs: Vec<Matrix> = (0..count).map(|_| gaussian(rng, dout, din)).collect();
    let mut s = Matrix::zeros(din, din);
    for g in &gs {
        s = &s + &g.adjoint().matmul(g).unwrap();
    }
    let w = eigh(&s).unwrap().reconstruct_with(|x| 1.0 / x.sqrt());
    LocalChannel::new(player, gs.iter().map(|g| g.matmul(&w).unwrap()).collect()).unwrap()
}

pub fn max_abs_diff_rows(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
