//! Primal-dual interior point method for
//!
//! ```text
//! max Σ_t ⟨M_t, E_t⟩   s.t. Σ_t E_t = I, E_t ⪰ 0
//! min tr Y            s.t. Y ⪰ M_t
//! ```
//!
//! Both problems start strictly feasible (`E_t = I/T`, `Y = (λ + 1)I`), and
//! each iteration takes an HKM Newton step toward the central path
//! `E_t (Y − M_t) = μI` with Mehrotra's centering heuristic.

use crate::error::{Error, Result};
use crate::matkit::{eigh, Lu, Matrix};

#[derive(Debug, Clone, Copy)]
pub(crate) struct SdpOptions {
    /// Iteration stops once `gap ≤ target_gap · max(1, |tr Y|)`.
    pub target_gap: f64,
    /// A cleaned-up certificate with a larger relative gap is a failure.
    pub accept_gap: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            target_gap: 1e-11,
            accept_gap: 1e-7,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SdpSolution {
    pub elements: Vec<Matrix>,
    pub y: Matrix,
    /// `Σ ⟨M_t, E_t⟩` at the cleaned primal point.
    pub primal: f64,
    /// `tr Y` at the cleaned (exactly feasible) dual point.
    pub dual: f64,
    pub iterations: usize,
}

/// Largest `α` with `x + α·dx ⪰ 0`, for `x ≻ 0`.
fn max_step(x: &Matrix, dx: &Matrix) -> Result<f64> {
    let e = eigh(x)?;
    let inv_sqrt = e.reconstruct_with(|v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt());
    let s = (&(&inv_sqrt * dx) * &inv_sqrt).hermitian_part();
    let lmin = eigh(&s)?.values[0];
    Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn herm(m: Matrix) -> Matrix {
    m.hermitian_part()
}

fn inv_pd(z: &Matrix) -> Result<Matrix> {
    let e = eigh(z)?;
    if e.values[0] <= 0.0 {
        return Err(Error::NonConvergence("dual slack lost definiteness".into()));
    }
    Ok(e.reconstruct_with(|v| 1.0 / v))
}

/// `½ Σ_t (E_t X W_t + W_t X E_t)` as an `n² × n²` operator on row-major `vec(X)`.
fn newton_operator(es: &[Matrix], ws: &[Matrix], n: usize) -> Matrix {
    let mut l = Matrix::zeros(n * n, n * n);
    for (e, w) in es.iter().zip(ws) {
        for a in 0..n {
            for b in 0..n {
                let row = a * n + b;
                for c in 0..n {
                    let (eac, wac) = (e[(a, c)], w[(a, c)]);
                    for d in 0..n {
                        l[(row, c * n + d)] += 0.5 * (eac * w[(d, b)] + wac * e[(d, b)]);
                    }
                }
            }
        }
    }
    l
}

fn solve_dy(lu: &Lu, rhs: &Matrix, n: usize) -> Matrix {
    let x = lu.solve(rhs.data());
    herm(Matrix::from_vec(n, n, x).expect("n² entries"))
}

fn delta_e(e: &Matrix, w: &Matrix, dy: &Matrix, sigma_mu: f64) -> Matrix {
    let t1 = &(&(e * dy) * w) + &(&(w * dy) * e);
    herm(&(&w.scale(sigma_mu) - e) - &t1.scale(0.5))
}

pub(crate) fn solve_povm_sdp(blocks: &[Matrix], opts: SdpOptions) -> Result<SdpSolution> {
    let t_count = blocks.len();
    let n = blocks
        .first()
        .map(Matrix::rows)
        .ok_or_else(|| Error::InvalidArgument("no POVM outcomes".into()))?;
    if blocks.iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(Error::ShapeMismatch("objective blocks differ in shape".into()));
    }
    for m in blocks {
        let d = m.hermitian_defect();
        if d > 1e-10 * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian(d));
        }
    }
    let scale = blocks.iter().map(Matrix::max_abs).fold(0.0, f64::max).max(1.0);
    let ms: Vec<Matrix> = blocks.iter().map(|m| herm(m.scale(1.0 / scale))).collect();

    let ident = Matrix::identity(n);
    let mut es: Vec<Matrix> = vec![ident.scale(1.0 / t_count as f64); t_count];
    let lam = ms
        .iter()
        .map(|m| eigh(m).map(|e| e.values[n - 1]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut y = ident.scale(lam + 1.0);
    let nt = (n * t_count) as f64;

    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it;
        let zs: Vec<Matrix> = ms.iter().map(|m| herm(&y - m)).collect();
        let gap: f64 = es.iter().zip(&zs).map(|(e, z)| e.inner_re(z)).sum();
        let dual = y.trace().re;
        if gap <= opts.target_gap * dual.abs().max(1.0) {
            break;
        }
        let ws = zs.iter().map(inv_pd).collect::<Result<Vec<_>>>()?;
        let mu = gap / nt;
        let sum_e = es.iter().fold(Matrix::zeros(n, n), |acc, e| &acc + e);
        let r_p = &ident - &sum_e;
        let lu = Lu::new(&newton_operator(&es, &ws, n))
            .map_err(|_| Error::NonConvergence("singular Newton system".into()))?;

        let rhs_for = |sigma_mu: f64| -> Matrix {
            let mut acc = r_p.scale(-1.0);
            for (e, w) in es.iter().zip(&ws) {
                acc = &acc + &(&w.scale(sigma_mu) - e);
            }
            acc
        };
        let steps = |dy: &Matrix, des: &[Matrix]| -> Result<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for ((e, de), z) in es.iter().zip(des).zip(&zs) {
                ap = ap.min(max_step(e, de)?);
                ad = ad.min(max_step(z, dy)?);
            }
            Ok(((0.95 * ap).min(1.0), (0.95 * ad).min(1.0)))
        };

        // predictor
        let dy_aff = solve_dy(&lu, &rhs_for(0.0), n);
        let de_aff: Vec<Matrix> = es.iter().zip(&ws).map(|(e, w)| delta_e(e, w, &dy_aff, 0.0)).collect();
        let (ap, ad) = steps(&dy_aff, &de_aff)?;
        let gap_aff: f64 = es
            .iter()
            .zip(&de_aff)
            .zip(&zs)
            .map(|((e, de), z)| (e + &de.scale(ap)).inner_re(&(z + &dy_aff.scale(ad))))
            .sum();
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3).max(1e-3);

        // centered step
        let sm = sigma * mu;
        let dy = solve_dy(&lu, &rhs_for(sm), n);
        let des: Vec<Matrix> = es.iter().zip(&ws).map(|(e, w)| delta_e(e, w, &dy, sm)).collect();
        let (ap, ad) = steps(&dy, &des)?;
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for (e, de) in es.iter_mut().zip(&des) {
            *e = herm(&*e + &de.scale(ap));
        }
        y = herm(&y + &dy.scale(ad));
    }

    let (elements, y, primal, dual) = clean_up(&ms, es, y)?;
    let gap = dual - primal;
    if !(gap <= opts.accept_gap * dual.abs().max(1.0)) {
        return Err(Error::NonConvergence(format!(
            "duality gap {gap:.3e} after {iterations} iterations"
        )));
    }
    Ok(SdpSolution {
        elements,
        y: y.scale(scale),
        primal: primal * scale,
        dual: dual * scale,
        iterations,
    })
}

/// Projects the primal iterate onto the POVM set and lifts the dual to exact feasibility.
fn clean_up(ms: &[Matrix], es: Vec<Matrix>, y: Matrix) -> Result<(Vec<Matrix>, Matrix, f64, f64)> {
    let n = y.rows();
    let clipped = es
        .iter()
        .map(|e| eigh(e).map(|d| d.reconstruct_with(|v| v.max(0.0))))
        .collect::<Result<Vec<_>>>()?;
    let sum = clipped.iter().fold(Matrix::zeros(n, n), |acc, e| &acc + e);
    let s = eigh(&sum)?;
    if s.values[0] <= 0.0 {
        return Err(Error::NonConvergence("primal iterate collapsed".into()));
    }
    let inv_sqrt = s.reconstruct_with(|v| 1.0 / v.sqrt());
    let elements: Vec<Matrix> = clipped
        .iter()
        .map(|e| herm(&(&inv_sqrt * e) * &inv_sqrt))
        .collect();
    let primal: f64 = ms.iter().zip(&elements).map(|(m, e)| m.inner_re(e)).sum();

    let mut shift = 0.0f64;
    for m in ms {
        let lmin = eigh(&herm(&y - m))?.values[0];
        shift = shift.max(-lmin);
    }
    let y = &y + &Matrix::identity(n).scale(shift);
    let dual = y.trace().re;
    Ok((elements, y, primal, dual))
}

/// `Σ_t ⟨M_t, E_t⟩`.
pub(crate) fn objective(blocks: &[Matrix], elements: &[Matrix]) -> f64 {
    blocks.iter().zip(elements).map(|(m, e)| m.inner_re(e)).sum()
}
