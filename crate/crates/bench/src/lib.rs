//! Seeded inputs shared by the benchmarks.

use qgame_core::corrcomp::{euclidean_instance, CorrelationMatrix};
use qgame_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real symmetric `n × n` matrix with entries in `[-1, 1]`.
pub fn symmetric(n: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let a = Matrix::from_real_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    a.hermitian_part()
}

/// Utility `A(x, y) = u(y)` with `u` in `[0, 1]` and a full-support distribution.
/// Every swap gains nothing, so the distribution is a correlated equilibrium.
pub fn bimatrix(m: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut r = rng(seed);
    let u: Vec<f64> = (0..n).map(|_| r.random()).collect();
    let a = vec![u; m];
    let mut p: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.random::<f64>() + 0.05).collect()).collect();
    let total: f64 = p.iter().flatten().sum();
    p.iter_mut().flatten().for_each(|x| *x /= total);
    (a, p)
}

/// Support of the crown graph: everything off the diagonal.
pub fn crown(n: usize) -> Vec<Vec<bool>> {
    (0..n).map(|x| (0..n).map(|y| x != y).collect()).collect()
}

/// Squared-difference distribution on `1, 2, …, n`.
pub fn euclidean(n: usize) -> CorrelationMatrix {
    let cs: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    euclidean_instance(&cs).expect("n ≥ 2").p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert!(symmetric(5, 1).is_hermitian(1e-15));
        let (_, p) = bimatrix(3, 4, 2);
        assert!((p.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(crown(4)[2], vec![true, true, false, true]);
        assert_eq!(euclidean(6).rows(), 6);
    }
}
