//! Separation instances: Euclidean distance matrices, the agreement-count
//! distribution, and random members of the zero-diagonal family.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::nnmf::{nn_rank_lower, NnRankLower};
use super::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::matkit::Matrix;

/// A bound quoted from the literature rather than computed here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitedBound {
    pub statement: String,
    pub value: f64,
    pub source: String,
    pub computed: bool,
}

/// `Q(x, y) = c_x − c_y` and `P = Q∘Q / ‖Q∘Q‖₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanInstance {
    pub cs: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub p: CorrelationMatrix,
    /// `rank₊(P) ≥ log₂ N`.
    pub cited: CitedBound,
}

impl EuclideanInstance {
    pub fn q_matrix(&self) -> Matrix {
        Matrix::from_real_rows(&self.q)
    }
}

pub fn euclidean_instance(cs: &[f64]) -> Result<EuclideanInstance> {
    let n = cs.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()));
    }
    if cs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidArgument("values must be positive and finite".into()));
    }
    let mut sorted = cs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateValues);
    }
    let q: Vec<Vec<f64>> = cs.iter().map(|a| cs.iter().map(|b| a - b).collect()).collect();
    let sq: Vec<Vec<f64>> = q.iter().map(|r| r.iter().map(|v| v * v).collect()).collect();
    let p = CorrelationMatrix::normalized(&sq)?;
    Ok(EuclideanInstance {
        cs: cs.to_vec(),
        q,
        p,
        cited: CitedBound {
            statement: "rank+(P) >= log2 N".into(),
            value: (n as f64).log2(),
            source: "Beasley-Laffey".into(),
            computed: false,
        },
    })
}

/// Largest `n` accepted by [`hjmr_distribution`].
pub const HJMR_MAX_N: usize = 10;

/// `p(x, y) = |{i : x_i = y_i}| / n · 2^{1−2n}` on `{0,1}ⁿ × {0,1}ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjmrDistribution {
    pub n: usize,
    pub p: CorrelationMatrix,
    /// `1^k 0^{n−k}` for `k = 0..=n`, most significant bit first.
    pub indices: Vec<usize>,
}

impl HjmrDistribution {
    /// The `(n+1) × (n+1)` block on [`Self::indices`].
    pub fn submatrix(&self) -> Vec<Vec<f64>> {
        self.p.submatrix(&self.indices, &self.indices)
    }

    pub fn submatrix_rank(&self) -> usize {
        Matrix::from_real_rows(&self.submatrix()).rank()
    }
}

pub fn hjmr_distribution(n: usize) -> Result<HjmrDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n > HJMR_MAX_N {
        return Err(Error::CapExceeded {
            what: "agreement distribution length",
            requested: n,
            cap: HJMR_MAX_N,
        });
    }
    let side = 1usize << n;
    let scale = 2f64.powi(1 - 2 * n as i32) / n as f64;
    let mask = side - 1;
    let rows: Vec<Vec<f64>> = (0..side)
        .map(|x| {
            (0..side)
                .map(|y| f64::from((!(x ^ y) & mask).count_ones()) * scale)
                .collect()
        })
        .collect();
    let p = CorrelationMatrix::normalized(&rows)?;
    let indices = (0..=n).map(|k| ((1usize << k) - 1) << (n - k)).collect();
    Ok(HjmrDistribution { n, p, indices })
}

const MAX_RESAMPLES: usize = 100;

/// A random `Q` with `Σ_i ⟨a_i|b_j⟩ = 1` for every `j` and `⟨a_i|b_i⟩ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureSample {
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    /// `Q[i][j] = ⟨a_i|b_j⟩`.
    pub q: Vec<Vec<f64>>,
    /// `Q∘Q` normalized.
    pub p: CorrelationMatrix,
    pub rank_q: usize,
    pub nn_rank_lower: NnRankLower,
    pub zero_diagonal_defect: f64,
    pub column_sum_defect: f64,
    pub resamples: usize,
    /// How `b_j` was picked among the solutions of its two constraints.
    pub method: String,
}

/// Draws `a_i` uniformly on the unit sphere of `ℝ^r` and takes each `b_j`
/// as the least-norm solution of `⟨Σ_i a_i | b⟩ = 1`, `⟨a_j | b⟩ = 0`.
/// Draws where the two constraints are dependent are resampled.
pub fn conjecture_sampler(n: usize, r: usize, seed: u64) -> Result<ConjectureSample> {
    if r < 2 || n < 2 {
        return Err(Error::InvalidArgument("need n ≥ 2 and r ≥ 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for resamples in 0..MAX_RESAMPLES {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let s: Vec<f64> = (0..r).map(|k| a.iter().map(|ai| ai[k]).sum()).collect();
        let Some(b) = a.iter().map(|aj| least_norm(&s, aj)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let q: Vec<Vec<f64>> = a
            .iter()
            .map(|ai| b.iter().map(|bj| dot(ai, bj)).collect())
            .collect();
        let sq: Vec<Vec<f64>> = q.iter().map(|row| row.iter().map(|v| v * v).collect()).collect();
        let p = CorrelationMatrix::normalized(&sq)?;
        let zero_diagonal_defect = (0..n).map(|i| q[i][i].abs()).fold(0.0, f64::max);
        let column_sum_defect = (0..n)
            .map(|j| (q.iter().map(|row| row[j]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        return Ok(ConjectureSample {
            n,
            r,
            seed,
            rank_q: Matrix::from_real_rows(&q).rank(),
            nn_rank_lower: nn_rank_lower(&p),
            q,
            p,
            zero_diagonal_defect,
            column_sum_defect,
            resamples,
            method: "least-norm".into(),
        });
    }
    Err(Error::Infeasible(format!(
        "no admissible draw in {MAX_RESAMPLES} attempts"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-norm `b` with `⟨s|b⟩ = 1` and `⟨a|b⟩ = 0`, i.e. `b ∈ span{s, a}`.
fn least_norm(s: &[f64], a: &[f64]) -> Option<Vec<f64>> {
    let (ss, sa, aa) = (dot(s, s), dot(s, a), dot(a, a));
    let det = ss * aa - sa * sa;
    if det <= 1e-10 * ss * aa {
        return None;
    }
    let (l0, l1) = (aa / det, -sa / det);
    Some(s.iter().zip(a).map(|(x, y)| l0 * x + l1 * y).collect())
}
