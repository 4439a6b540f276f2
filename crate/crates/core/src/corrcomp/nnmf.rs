//! Nonnegative rank bounds. Upper bounds come from an exact factorization
//! search whose output is only trusted after a residual check; lower bounds
//! from the ordinary rank and the biclique cover number of the support.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::biclique::biclique_cover_number;
use super::{rank_of, shape_of, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::matkit::solve_real;

/// `‖P − CD‖_max` at or below this certifies an exact factorization.
pub const CERTIFY_TOL: f64 = 1e-8;

/// Column sums of `D` within this of 1 count as normal form.
pub const NORMAL_FORM_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 2000;
const STALL_WINDOW: usize = 100;

/// `P ≈ C D` with `C` (`m × r`) and `D` (`r × n`) entrywise nonnegative.
///
/// Construction rescales the columns of `C` to unit sum and moves the scale
/// into `D`, which leaves `CD` unchanged. The column sums of `D` then equal
/// those of `P`, so `D` is column-stochastic exactly when `P` is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonnegFactorization {
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
    residual: f64,
    certified: bool,
    normal_form: bool,
}

impl NonnegFactorization {
    pub fn new(c: Vec<Vec<f64>>, d: Vec<Vec<f64>>, p: &CorrelationMatrix) -> Result<Self> {
        let (m, r) = shape_of(&c)?;
        let (r2, n) = shape_of(&d)?;
        if r != r2 || m != p.rows() || n != p.cols() {
            return Err(Error::ShapeMismatch(format!(
                "{m}x{r} times {r2}x{n} against {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        if c.iter().chain(&d).flatten().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("factors must be finite and nonnegative".into()));
        }
        let (c, d) = normal_form(c, d);
        let residual = p.max_abs_diff(&product(&c, &d));
        let normal_form = column_sums(&d).iter().all(|s| (s - 1.0).abs() <= NORMAL_FORM_TOL);
        Ok(Self {
            c,
            d,
            residual,
            certified: residual <= CERTIFY_TOL,
            normal_form,
        })
    }

    pub fn c(&self) -> &[Vec<f64>] {
        &self.c
    }

    pub fn d(&self) -> &[Vec<f64>] {
        &self.d
    }

    pub fn inner_dim(&self) -> usize {
        self.d.len()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Each column of `D` sums to 1.
    pub fn is_normal_form(&self) -> bool {
        self.normal_form
    }

    pub fn product(&self) -> Vec<Vec<f64>> {
        product(&self.c, &self.d)
    }
}

/// Scales column `k` of `C` to unit sum and row `k` of `D` by the old column sum,
/// leaving `CD` unchanged. A zero column of `C` zeroes the matching row of `D`.
pub fn normal_form(mut c: Vec<Vec<f64>>, mut d: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    for k in 0..d.len() {
        let s: f64 = c.iter().map(|row| row[k]).sum();
        if s > 0.0 {
            for row in &mut c {
                row[k] /= s;
            }
            for v in &mut d[k] {
                *v *= s;
            }
        } else {
            d[k].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    (c, d)
}

fn product(c: &[Vec<f64>], d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = d.first().map_or(0, Vec::len);
    c.iter()
        .map(|row| {
            (0..n)
                .map(|y| row.iter().zip(d).map(|(a, drow)| a * drow[y]).sum())
                .collect()
        })
        .collect()
}

fn column_sums(d: &[Vec<f64>]) -> Vec<f64> {
    let n = d.first().map_or(0, Vec::len);
    (0..n).map(|y| d.iter().map(|r| r[y]).sum()).collect()
}

/// `argmin_{x ≥ 0} ‖A x − b‖₂` by the Lawson–Hanson active set method.
/// `a` is given by rows.
pub fn nnls(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = a.first().map_or(0, Vec::len);
    let mut g = vec![0.0; k * k];
    let mut h = vec![0.0; k];
    for (row, &bi) in a.iter().zip(b) {
        for i in 0..k {
            h[i] += row[i] * bi;
            for j in 0..k {
                g[i * k + j] += row[i] * row[j];
            }
        }
    }
    nnls_gram(&g, &h, k)
}

/// Lawson–Hanson on the normal equations `G x = h`, `G = AᵀA`, `h = Aᵀb`.
fn nnls_gram(g: &[f64], h: &[f64], k: usize) -> Vec<f64> {
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale * h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];
    let gradient = |x: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| h[i] - (0..k).map(|j| g[i * k + j] * x[j]).sum::<f64>())
            .collect()
    };
    let solve_passive = |passive: &[bool]| -> Option<Vec<f64>> {
        let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
        let sub: Vec<f64> = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| g[i * k + j]))
            .collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        let sol = solve_real(sub, rhs).ok()?;
        let mut z = vec![0.0; k];
        for (&i, v) in idx.iter().zip(sol) {
            z[i] = v;
        }
        Some(z)
    };
    for _ in 0..3 * k + 3 {
        let w = gradient(&x);
        let Some(j) = (0..k)
            .filter(|&i| !passive[i] && w[i] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]))
        else {
            break;
        };
        passive[j] = true;
        loop {
            let Some(z) = solve_passive(&passive) else {
                passive[j] = false;
                return x;
            };
            if (0..k).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let alpha = (0..k)
                .filter(|&i| passive[i] && z[i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..k {
                x[i] += alpha * (z[i] - x[i]);
                if passive[i] && x[i] <= 1e-300 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Knobs for [`nn_rank_upper`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 0 }
    }
}

/// Searches for an exact nonnegative factorization with inner dimension at
/// most `r`. Returns `None` when no certified one was found; that says
/// nothing about `rank₊(P)`.
///
/// For `r ≥ min(m, n)` the trivial factorization `I · P` (or `P · I`) is
/// returned. Below that, alternating nonnegative least squares runs from
/// `restarts` random starting points drawn from `seed`.
pub fn nn_rank_upper(p: &CorrelationMatrix, r: usize, restarts: usize, seed: u64) -> Option<NonnegFactorization> {
    let (m, n) = (p.rows(), p.cols());
    if r == 0 {
        return None;
    }
    if r >= m.min(n) {
        let rows = p.to_rows();
        let (c, d) = if m <= n {
            (identity(m), rows)
        } else {
            (rows, identity(n))
        };
        return NonnegFactorization::new(c, d, p).ok().filter(|f| f.certified);
    }
    if rank_of(p) > r {
        return None;
    }
    let target = p.to_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let c0: Vec<Vec<f64>> = (0..m).map(|_| (0..r).map(|_| rng.random::<f64>()).collect()).collect();
        let (c, d) = alternate(&target, c0, r);
        if let Ok(f) = NonnegFactorization::new(c, d, p) {
            if f.certified {
                return Some(f);
            }
        }
    }
    None
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn alternate(p: &[Vec<f64>], mut c: Vec<Vec<f64>>, r: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let pt = transpose(p);
    let mut d = vec![vec![0.0; pt.len()]; r];
    let mut checkpoint = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        // columns of D against fixed C
        let dt: Vec<Vec<f64>> = pt.iter().map(|col| nnls(&c, col)).collect();
        d = transpose(&dt);
        let dtt = transpose(&d);
        c = p.iter().map(|row| nnls(&dtt, row)).collect();
        let (c2, d2) = normal_form(c, d);
        c = c2;
        d = d2;
        let res = max_residual(p, &c, &d);
        if res <= 1e-13 {
            break;
        }
        if sweep % STALL_WINDOW == STALL_WINDOW - 1 {
            if res > 0.98 * checkpoint {
                break;
            }
            checkpoint = res;
        }
    }
    (c, d)
}

fn max_residual(p: &[Vec<f64>], c: &[Vec<f64>], d: &[Vec<f64>]) -> f64 {
    let prod = product(c, d);
    p.iter()
        .zip(&prod)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Which lower bound on `rank₊` fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBoundTag {
    Rank,
    BicliqueCover,
    /// Both bounds give the same value.
    RankAndBicliqueCover,
}

/// `rank₊(P) ≥ value`, with the bounds that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnRankLower {
    pub value: usize,
    pub rank: usize,
    /// `None` when the support exceeds 8×8 and the exact search was skipped.
    pub biclique_cover: Option<usize>,
    pub tag: LowerBoundTag,
}

/// `max(rank P, biclique cover number of supp P)`.
pub fn nn_rank_lower(p: &CorrelationMatrix) -> NnRankLower {
    let rank = rank_of(p);
    let biclique_cover = biclique_cover_number(&p.support());
    let b = biclique_cover.unwrap_or(0);
    let tag = match rank.cmp(&b) {
        std::cmp::Ordering::Greater => LowerBoundTag::Rank,
        std::cmp::Ordering::Less => LowerBoundTag::BicliqueCover,
        std::cmp::Ordering::Equal => LowerBoundTag::RankAndBicliqueCover,
    };
    NnRankLower {
        value: rank.max(b),
        rank,
        biclique_cover,
        tag,
    }
}
