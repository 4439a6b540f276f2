//! Separation report rows and CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::instances::{conjecture_sampler, euclidean_instance, hjmr_distribution};
use super::nnmf::{nn_rank_lower, nn_rank_upper, LowerBoundTag, SearchOptions};
use super::protocol::qcorr_ub_protocol;
use super::{ceil_log2, mutual_information, rank_of, size_of, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::matkit::Matrix;

pub const CSV_HEADER: [&str; 9] = [
    "instance",
    "size",
    "rank",
    "rank-lb",
    "nnr-lb",
    "nnr-ub",
    "qcorr-ub(qubits)",
    "rcorr-lb(bits)",
    "notes",
];

/// Ranks tried above the lower bound before falling back to the trivial factorization.
const SEARCH_SPAN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub instance: String,
    pub size: f64,
    pub rank: usize,
    /// `¼ log₂ rank P`.
    pub rank_lb: f64,
    pub nnr_lb: usize,
    pub nnr_ub: usize,
    pub qcorr_ub_qubits: u32,
    pub rcorr_lb_bits: u32,
    pub notes: String,
}

impl SeparationRow {
    pub fn record(&self) -> [String; 9] {
        [
            self.instance.clone(),
            format!("{}", self.size),
            self.rank.to_string(),
            format!("{:.6}", self.rank_lb),
            self.nnr_lb.to_string(),
            self.nnr_ub.to_string(),
            self.qcorr_ub_qubits.to_string(),
            self.rcorr_lb_bits.to_string(),
            self.notes.clone(),
        ]
    }
}

/// Bounds for one instance. `q` is a complex square root of `P` up to scale
/// (`|Q|² ∝ P`); without it the entrywise square root is used.
pub fn separation_row(
    instance: &str,
    p: &CorrelationMatrix,
    q: Option<&Matrix>,
    opts: SearchOptions,
    notes: &[String],
) -> Result<SeparationRow> {
    let rank = rank_of(p);
    let lower = nn_rank_lower(p);
    let full = p.rows().min(p.cols());
    let nnr_ub = (lower.value..full.min(lower.value + SEARCH_SPAN))
        .find_map(|r| nn_rank_upper(p, r, opts.restarts, opts.seed))
        .map_or(full, |f| f.inner_dim());

    let sqrt_p;
    let q = match q {
        Some(q) => q,
        None => {
            sqrt_p = Matrix::from_real_fn(p.rows(), p.cols(), |x, y| p.get(x, y).sqrt());
            &sqrt_p
        }
    };
    let proto = qcorr_ub_protocol(q)?;
    let err = p.max_abs_diff(&proto.simulate());
    if err > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "|Q|² does not match P (error {err:.3e})"
        )));
    }

    let mut all = vec![match lower.tag {
        LowerBoundTag::Rank if lower.biclique_cover.is_none() => {
            "nnr-lb from rank (biclique search skipped above 8x8)".to_string()
        }
        LowerBoundTag::Rank => "nnr-lb from rank".to_string(),
        LowerBoundTag::BicliqueCover => "nnr-lb from biclique cover".to_string(),
        LowerBoundTag::RankAndBicliqueCover => "nnr-lb from rank and biclique cover".to_string(),
    }];
    if lower.value == nnr_ub {
        all.push(format!("bounds meet: rank+ = {nnr_ub}"));
    }
    all.extend(notes.iter().cloned());
    Ok(SeparationRow {
        instance: instance.into(),
        size: size_of(p),
        rank,
        rank_lb: (rank as f64).log2() / 4.0,
        nnr_lb: lower.value,
        nnr_ub,
        qcorr_ub_qubits: proto.seed_qubits(),
        rcorr_lb_bits: ceil_log2(lower.value),
        notes: all.join("; "),
    })
}

/// Row for the Euclidean instance on `c = (1, …, n)`.
pub fn ed_row(n: usize, opts: SearchOptions) -> Result<SeparationRow> {
    let cs: Vec<f64> = (1..=n).map(|c| c as f64).collect();
    let e = euclidean_instance(&cs)?;
    let cited = format!(
        "cited {} bound {} = {:.4} (not computed); the 1-vs-n gap is conditional on rank+ = N",
        e.cited.source, e.cited.statement, e.cited.value
    );
    separation_row(&format!("ed-{n}"), &e.p, Some(&e.q_matrix()), opts, &[cited])
}

/// Row for the agreement-count distribution on `n` bits.
pub fn hjmr_row(n: usize, opts: SearchOptions) -> Result<SeparationRow> {
    let h = hjmr_distribution(n)?;
    let note = format!(
        "distinguished submatrix rank {}; I(X;Y) = {:.6} bits",
        h.submatrix_rank(),
        mutual_information(&h.p)
    );
    separation_row(&format!("hjmr-{n}"), &h.p, None, opts, &[note])
}

/// Row for one draw of the zero-diagonal family; `Q` itself is the square root.
pub fn conjecture_row(n: usize, r: usize, seed: u64, opts: SearchOptions) -> Result<SeparationRow> {
    let s = conjecture_sampler(n, r, seed)?;
    let note = format!(
        "sampler seed {seed}, method {}, rank Q = {}, zero-diagonal defect {:.1e}, column-sum defect {:.1e}, resamples {}",
        s.method, s.rank_q, s.zero_diagonal_defect, s.column_sum_defect, s.resamples
    );
    let q = Matrix::from_real_rows(&s.q);
    separation_row(&format!("conjecture-{n}-{r}"), &s.p, Some(&q), opts, &[note])
}

pub fn write_csv<W: Write>(rows: &[SeparationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
