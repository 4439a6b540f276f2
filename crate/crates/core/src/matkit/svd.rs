use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{complete_basis, from_columns, numerical_rank, Matrix};
use crate::error::{Error, Result};

/// Full singular value decomposition `m = U Σ V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × rows` unitary.
    pub u: Matrix,
    /// `min(rows, cols)` values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `cols × cols` unitary.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let k = self.singular_values.len();
        Matrix::from_fn(m, n, |i, j| {
            (0..k)
                .map(|t| self.u[(i, t)] * self.singular_values[t] * self.v[(j, t)].conj())
                .sum()
        })
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.singular_values, self.u.rows().max(self.v.rows()), None)
    }
}

/// SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Small singular values come out with absolute accuracy near `ε‖m‖`,
/// which keeps numerical-rank decisions stable.
pub fn svd(m: &Matrix) -> Svd {
    if m.rows() < m.cols() {
        let t = one_sided(&m.adjoint());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    one_sided(m)
}

fn one_sided(a: &Matrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|c| a.col(c)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|c| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[c] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    const TOL: f64 = 1e-15;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = w[p].iter().zip(&w[q]).map(|(x, y)| x.conj() * y).sum();
                let r = gamma.norm();
                if r <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph_c = (gamma / r).conj();
                let theta = (beta - alpha) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for cols in [&mut w, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (a_p, a_q) = (*xp, *xq);
                        *xp = a_p * c - a_q * ph_c * s;
                        *xq = a_p * s + a_q * ph_c * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);

    let mut u_cols = Vec::with_capacity(m);
    for &i in &order {
        if norms[i] > smax * 1e-13 && norms[i] > 0.0 {
            u_cols.push(w[i].iter().map(|z| z / norms[i]).collect::<Vec<_>>());
        } else {
            break;
        }
    }
    let u_cols = complete_basis(u_cols, m);
    let v_cols: Vec<Vec<Complex64>> = order.iter().map(|&i| v[i].clone()).collect();
    Svd {
        u: from_columns(&u_cols, m),
        singular_values,
        v: from_columns(&v_cols, n),
    }
}

/// Schmidt decomposition `v = Σ σ_i left_i ⊗ right_i` of a bipartite unit vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtForm {
    /// Nonincreasing positive coefficients (numerical rank many).
    pub coefficients: Vec<f64>,
    /// `dim_a × r`, orthonormal columns.
    pub left_basis: Matrix,
    /// `dim_b × r`, orthonormal columns.
    pub right_basis: Matrix,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds the bipartite vector.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (da, db) = (self.left_basis.rows(), self.right_basis.rows());
        let mut out = vec![Complex64::new(0.0, 0.0); da * db];
        for (k, &s) in self.coefficients.iter().enumerate() {
            for a in 0..da {
                let l = self.left_basis[(a, k)] * s;
                for b in 0..db {
                    out[a * db + b] += l * self.right_basis[(b, k)];
                }
            }
        }
        out
    }
}

/// Schmidt decomposition of `v ∈ C^{dim_a} ⊗ C^{dim_b}` (row-major: index `a·dim_b + b`).
pub fn schmidt(v: &[Complex64], dim_a: usize, dim_b: usize) -> Result<SchmidtForm> {
    if v.len() != dim_a * dim_b {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {} is not {dim_a}x{dim_b}",
            v.len()
        )));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector(norm));
    }
    let m = Matrix::from_vec(dim_a, dim_b, v.to_vec())?;
    let d = svd(&m);
    let r = d.rank();
    let left_basis = Matrix::from_fn(dim_a, r, |i, k| d.u[(i, k)]);
    let right_basis = Matrix::from_fn(dim_b, r, |j, k| d.v[(j, k)].conj());
    Ok(SchmidtForm {
        coefficients: d.singular_values[..r].to_vec(),
        left_basis,
        right_basis,
    })
}
