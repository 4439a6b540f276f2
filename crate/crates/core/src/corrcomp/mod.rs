//! Correlation complexity of bivariate distributions: how large a shared
//! seed (random bits or entangled qubits) two parties need to sample
//! `(x, y) ~ P` without talking.

mod biclique;
mod instances;
mod nnmf;
mod protocol;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::JointDistribution;
use crate::matkit::Matrix;

pub use biclique::{biclique_cover_number, maximal_bicliques, Biclique, BICLIQUE_MAX_SIDE, SUPPORT_TOL};
pub use instances::{
    conjecture_sampler, euclidean_instance, hjmr_distribution, CitedBound, ConjectureSample,
    EuclideanInstance, HjmrDistribution, HJMR_MAX_N,
};
pub use nnmf::{
    nn_rank_lower, nn_rank_upper, nnls, normal_form, LowerBoundTag, NnRankLower, NonnegFactorization, SearchOptions,
    CERTIFY_TOL, NORMAL_FORM_TOL,
};
pub use protocol::{
    check_untrusted_equilibrium, classical_protocol_from, qcorr_ub_protocol, ClassicalProtocol,
    QuantumProtocol, SeededProtocol, UntrustedReport, HONEST_TOL,
};
pub use report::{conjecture_row, ed_row, hjmr_row, separation_row, write_csv, SeparationRow, CSV_HEADER};

/// Allowed deviation of `Σ P` from 1.
pub const SUM_TOL: f64 = 1e-12;

/// A bivariate distribution viewed as a nonnegative `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let (r, c) = shape_of(rows)?;
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if let Some(x) = data.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
        }
        let total: f64 = data.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { rows: r, cols: c, data })
    }

    /// Scales a nonnegative matrix to unit sum.
    pub fn normalized(rows: &[Vec<f64>]) -> Result<Self> {
        let (r, c) = shape_of(rows)?;
        let total: f64 = rows.iter().flatten().sum();
        if !(total.is_finite() && total > 0.0) || rows.iter().flatten().any(|x| *x < 0.0) {
            return Err(Error::InvalidDistribution("cannot normalize".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|x| x / total).collect(),
        })
    }

    pub fn from_distribution(p: &JointDistribution) -> Result<Self> {
        match p.shape() {
            [r, c] => Ok(Self {
                rows: *r,
                cols: *c,
                data: p.probabilities().to_vec(),
            }),
            s => Err(Error::ShapeMismatch(format!("need two players, got shape {s:?}"))),
        }
    }

    pub fn to_distribution(&self) -> Result<JointDistribution> {
        JointDistribution::new(vec![self.rows, self.cols], self.data.clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.cols + y]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_real_fn(self.rows, self.cols, |x, y| self.get(x, y))
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect()
    }

    /// Entries at `row_idx × col_idx`, not renormalized.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Vec<Vec<f64>> {
        row_idx
            .iter()
            .map(|&x| col_idx.iter().map(|&y| self.get(x, y)).collect())
            .collect()
    }

    /// Support pattern with threshold [`SUPPORT_TOL`].
    pub fn support(&self) -> Vec<Vec<bool>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(|&x| x > SUPPORT_TOL).collect())
            .collect()
    }

    /// Largest entrywise difference to `other` (shapes must agree).
    pub fn max_abs_diff(&self, other: &[Vec<f64>]) -> f64 {
        if other.len() != self.rows || other.iter().any(|r| r.len() != self.cols) {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (x, row) in other.iter().enumerate() {
            for (y, v) in row.iter().enumerate() {
                worst = worst.max((self.get(x, y) - v).abs());
            }
        }
        worst
    }
}

pub(crate) fn shape_of(rows: &[Vec<f64>]) -> Result<(usize, usize)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::ShapeMismatch("empty matrix".into()));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::ShapeMismatch("ragged rows".into()));
    }
    Ok((r, c))
}

/// `⌈log₂ n⌉`, with `⌈log₂ 1⌉ = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `(⌈log₂ rows⌉ + ⌈log₂ cols⌉) / 2`: half the bits needed to write down `(x, y)`.
pub fn size_of(p: &CorrelationMatrix) -> f64 {
    f64::from(ceil_log2(p.rows) + ceil_log2(p.cols)) / 2.0
}

/// Numerical rank of `P`.
pub fn rank_of(p: &CorrelationMatrix) -> usize {
    p.to_matrix().rank()
}

/// `¼ log₂ rank(P)`, a lower bound on the entangled seed size.
pub fn rank_lb_qcorr(p: &CorrelationMatrix) -> f64 {
    (rank_of(p) as f64).log2() / 4.0
}

/// `I(X; Y)` in bits.
pub fn mutual_information(p: &CorrelationMatrix) -> f64 {
    let px = p.row_marginal();
    let py = p.col_marginal();
    let mut total = 0.0;
    for (x, &a) in px.iter().enumerate() {
        for (y, &b) in py.iter().enumerate() {
            let v = p.get(x, y);
            if v > 0.0 {
                total += v * (v / (a * b)).log2();
            }
        }
    }
    total.max(0.0)
}
