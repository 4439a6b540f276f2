//! Executable seed-and-local-operation protocols and the equilibrium check
//! for protocols run by players who may deviate.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nnmf::NonnegFactorization;
use super::ceil_log2;
use crate::deviation::{max_seeded_channel_incentive, IncentiveResult};
use crate::error::{Error, Result};
use crate::game_core::{expected_utility, Game, JointDistribution};
use crate::matkit::{numerical_rank, svd, Matrix};
use crate::quantum_state::{apply_local, measure_diag, DensityState, LocalChannel};

/// Honest execution must match its target this closely.
pub const HONEST_TOL: f64 = 1e-9;

const UNITARY_TOL: f64 = 1e-9;

/// Shared state `Σ_i σ_i |i⟩|i⟩` followed by `U ⊗ V` and a basis measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumProtocol {
    coefficients: Vec<f64>,
    u: Matrix,
    v: Matrix,
    seed_qubits: u32,
}

impl QuantumProtocol {
    /// Nonincreasing, `Σ σ_i² = 1`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Alice's unitary; column `i` is the `i`-th left singular vector.
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    /// Bob's unitary; column `i` is the conjugate of the `i`-th right singular vector.
    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// Qubits per side: `⌈log₂ rank Q⌉`.
    pub fn seed_qubits(&self) -> u32 {
        self.seed_qubits
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let du = (&self.u.adjoint() * &self.u).max_abs_diff(&Matrix::identity(self.u.rows()));
        let dv = (&self.v.adjoint() * &self.v).max_abs_diff(&Matrix::identity(self.v.rows()));
        du.max(dv)
    }

    /// Runs the protocol on the state vector and returns the outcome distribution.
    pub fn simulate(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.u.rows(), self.v.rows());
        (0..m)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let amp: Complex64 = self
                            .coefficients
                            .iter()
                            .enumerate()
                            .map(|(i, &s)| self.u[(x, i)] * self.v[(y, i)] * s)
                            .sum();
                        amp.norm_sqr()
                    })
                    .collect()
            })
            .collect()
    }

    /// The protocol as a seed on `r × r` plus the isometries `U|_r`, `V|_r`.
    pub fn seeded(&self) -> Result<SeededProtocol> {
        let r = self.rank();
        let mut amp = vec![Complex64::new(0.0, 0.0); r * r];
        for (i, &s) in self.coefficients.iter().enumerate() {
            amp[i * r + i] = Complex64::new(s, 0.0);
        }
        let seed = DensityState::new(vec![r, r], Matrix::outer(&amp, &amp))?;
        let iso = |w: &Matrix| Matrix::from_fn(w.rows(), r, |x, i| w[(x, i)]);
        let ops = [
            LocalChannel::new(0, vec![iso(&self.u)])?,
            LocalChannel::new(1, vec![iso(&self.v)])?,
        ];
        Ok(SeededProtocol::new(seed, ops, "quantum"))
    }
}

/// Builds the entangled-seed protocol for `|Q|²` from the SVD of `Q`.
/// `Q` is rescaled to unit Frobenius norm first.
pub fn qcorr_ub_protocol(q: &Matrix) -> Result<QuantumProtocol> {
    let norm = q.frobenius_norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidArgument("Q must be nonzero and finite".into()));
    }
    let q = q.scale(1.0 / norm);
    let s = svd(&q);
    let r = numerical_rank(&s.singular_values, q.rows().max(q.cols()), None).max(1);
    let kept = &s.singular_values[..r];
    let total = kept.iter().map(|x| x * x).sum::<f64>().sqrt();
    let coefficients: Vec<f64> = kept.iter().map(|x| x / total).collect();
    let p = QuantumProtocol {
        coefficients,
        u: s.u,
        v: s.v.conj(),
        seed_qubits: ceil_log2(r),
    };
    if p.unitarity_defect() > UNITARY_TOL {
        return Err(Error::NonConvergence("singular vectors lost orthogonality".into()));
    }
    Ok(p)
}

/// Shared `k ~ q`, then Alice samples `x ~ a_k` and Bob samples `y ~ b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalProtocol {
    q: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    seed_bits: u32,
}

fn is_distribution(v: &[f64], tol: f64) -> bool {
    v.iter().all(|x| x.is_finite() && *x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}

fn pick(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

impl ClassicalProtocol {
    /// Validates each of `q`, `a_k`, `b_k` as a distribution within `1e-8`.
    pub fn from_parts(q: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let r = q.len();
        if r == 0 || a.len() != r || b.len() != r {
            return Err(Error::ShapeMismatch("one sampler per seed value".into()));
        }
        let (m, n) = (a[0].len(), b[0].len());
        if a.iter().any(|v| v.len() != m) || b.iter().any(|v| v.len() != n) {
            return Err(Error::ShapeMismatch("samplers differ in length".into()));
        }
        let ok = is_distribution(&q, 1e-8)
            && a.iter().all(|v| is_distribution(v, 1e-8))
            && b.iter().all(|v| is_distribution(v, 1e-8));
        if !ok {
            return Err(Error::InvalidDistribution("protocol parts must be distributions".into()));
        }
        Ok(Self {
            seed_bits: ceil_log2(r),
            q,
            a,
            b,
        })
    }

    /// Both players output the shared seed: `P = I/n`.
    pub fn identical_outputs(n: usize) -> Result<Self> {
        let e = |k: usize| (0..n).map(|x| if x == k { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        Self::from_parts(vec![1.0 / n as f64; n], (0..n).map(e).collect(), (0..n).map(e).collect())
    }

    pub fn seed_distribution(&self) -> &[f64] {
        &self.q
    }

    pub fn alice(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn bob(&self) -> &[Vec<f64>] {
        &self.b
    }

    /// `⌈log₂ r⌉`.
    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    /// Output distribution by enumerating every seed value.
    pub fn distribution(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.a[0].len(), self.b[0].len());
        let mut out = vec![vec![0.0; n]; m];
        for ((qk, ak), bk) in self.q.iter().zip(&self.a).zip(&self.b) {
            for (x, ax) in ak.iter().enumerate() {
                if *ax == 0.0 {
                    continue;
                }
                for (y, by) in bk.iter().enumerate() {
                    out[x][y] += qk * ax * by;
                }
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = pick(&self.q, rng.random());
        (pick(&self.a[k], rng.random()), pick(&self.b[k], rng.random()))
    }

    /// Diagonal seed `Σ_k q_k |k⟩⟨k| ⊗ |k⟩⟨k|` and sampling channels with
    /// Kraus operators `√a_k(x) |x⟩⟨k|`.
    pub fn seeded(&self) -> Result<SeededProtocol> {
        let r = self.q.len();
        let mut diag = vec![0.0; r * r];
        for (k, &qk) in self.q.iter().enumerate() {
            diag[k * r + k] = qk;
        }
        let seed = DensityState::new(vec![r, r], Matrix::diag_real(&diag))?;
        let kraus = |rows: &[Vec<f64>]| -> Vec<Matrix> {
            let m = rows[0].len();
            let mut ops = Vec::new();
            for (k, row) in rows.iter().enumerate() {
                for (x, &w) in row.iter().enumerate() {
                    if w > 0.0 {
                        let mut op = Matrix::zeros(m, r);
                        op[(x, k)] = Complex64::new(w.sqrt(), 0.0);
                        ops.push(op);
                    }
                }
            }
            ops
        };
        let ops = [LocalChannel::new(0, kraus(&self.a))?, LocalChannel::new(1, kraus(&self.b))?];
        Ok(SeededProtocol::new(seed, ops, "classical"))
    }
}

/// Turns a certified `P = CD` into a shared-randomness protocol.
///
/// With `C` column-stochastic, `q_k` is the `k`-th row sum of `D`,
/// `a_k = C[:, k]` and `b_k = D[k, :] / q_k`; seeds with `q_k = 0` are dropped.
pub fn classical_protocol_from(f: &NonnegFactorization) -> Result<ClassicalProtocol> {
    if !f.is_certified() {
        return Err(Error::Uncertified(f.residual()));
    }
    let mut q = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, drow) in f.d().iter().enumerate() {
        let weight: f64 = drow.iter().sum();
        if weight <= 0.0 {
            continue;
        }
        q.push(weight);
        a.push(f.c().iter().map(|row| row[k]).collect());
        b.push(drow.iter().map(|v| v / weight).collect());
    }
    ClassicalProtocol::from_parts(q, a, b)
}

/// A two-register seed and one local operation per player, each mapping the
/// player's register to a strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeededProtocol {
    pub seed: DensityState,
    pub ops: [LocalChannel; 2],
    pub kind: String,
}

impl SeededProtocol {
    pub fn new(seed: DensityState, ops: [LocalChannel; 2], kind: &str) -> Self {
        Self {
            seed,
            ops,
            kind: kind.into(),
        }
    }

    /// Half the total log-dimension of the seed registers.
    pub fn seed_size(&self) -> f64 {
        let d = self.seed.dims();
        f64::from(d.iter().map(|&x| ceil_log2(x)).sum::<u32>()) / 2.0
    }

    /// Distribution of honest outputs.
    pub fn execute(&self) -> Result<JointDistribution> {
        let rho = apply_local(&self.seed, &self.ops[0])?;
        Ok(measure_diag(&apply_local(&rho, &self.ops[1])?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UntrustedReport {
    pub verdict: bool,
    pub tolerance: f64,
    pub kind: String,
    pub seed_size: f64,
    pub honest_error: f64,
    pub honest_payoffs: Vec<f64>,
    /// Best gain of each player over honest play, the other staying honest.
    pub gains: Vec<f64>,
    pub players: Vec<IncentiveResult>,
}

/// No player gains more than `tol` by replacing the prescribed operation on
/// the seed register with any channel, while the other follows the protocol.
pub fn check_untrusted_equilibrium(
    g: &Game,
    protocol: &SeededProtocol,
    target: &JointDistribution,
    tol: f64,
) -> Result<UntrustedReport> {
    if g.players() != 2 {
        return Err(Error::InvalidArgument("two-player games only".into()));
    }
    let outs = [protocol.ops[0].output_dim(), protocol.ops[1].output_dim()];
    if g.strategy_counts() != outs || target.shape() != outs {
        return Err(Error::ShapeMismatch(format!(
            "protocol outputs {outs:?}, game {:?}, target {:?}",
            g.strategy_counts(),
            target.shape()
        )));
    }
    let honest = protocol.execute()?;
    let honest_error = honest
        .probabilities()
        .iter()
        .zip(target.probabilities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if honest_error > HONEST_TOL {
        return Err(Error::HonestMismatch(honest_error));
    }
    let honest_payoffs = expected_utility(g, &honest)?;
    let mut players = Vec::with_capacity(2);
    for i in 0..2 {
        let partial = apply_local(&protocol.seed, &protocol.ops[1 - i])?;
        players.push(max_seeded_channel_incentive(g, &partial, i, honest_payoffs[i])?);
    }
    let gains: Vec<f64> = players.iter().map(|r| r.primal_value).collect();
    Ok(UntrustedReport {
        verdict: gains.iter().all(|&x| x <= tol),
        tolerance: tol,
        kind: protocol.kind.clone(),
        seed_size: protocol.seed_size(),
        honest_error,
        honest_payoffs,
        gains,
        players,
    })
}
