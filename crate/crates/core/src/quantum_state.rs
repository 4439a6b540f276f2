//! Quantum strategies on the joint strategy space, local channels, and
//! the classical mixture / superposition mappings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{expected_utility, Game, JointDistribution, JointSpace, MAX_JOINT_STRATEGIES};
use crate::matkit::{eigh, Matrix, ONE, ZERO};

/// Largest joint dimension for which a dense density matrix is built.
pub const DENSITY_CAP: usize = 256;
/// Trace tolerance for density states.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[−PSD_SLACK, 0)` are accepted as roundoff.
pub const PSD_SLACK: f64 = 1e-9;
/// Trace-preservation tolerance for Kraus sets.
pub const TP_TOL: f64 = 1e-9;

fn joint_dim(dims: &[usize], cap: usize) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::ShapeMismatch(format!("invalid local dimensions {dims:?}")));
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if n > cap {
        return Err(Error::CapExceeded {
            what: "joint state dimension",
            requested: n,
            cap,
        });
    }
    Ok(n)
}

/// A density matrix over `⊗ H_i` with `dim H_i = dims[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityState {
    dims: Vec<usize>,
    matrix: Matrix,
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity (up to [`PSD_SLACK`]).
    pub fn new(dims: Vec<usize>, matrix: Matrix) -> Result<Self> {
        let n = joint_dim(&dims, DENSITY_CAP)?;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for dims {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defect = matrix.hermitian_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let matrix = matrix.hermitian_part();
        let lmin = eigh(&matrix)?.values[0];
        if lmin < -PSD_SLACK {
            return Err(Error::InvalidState(format!("minimum eigenvalue {lmin:.3e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// Skips the eigenvalue check; callers guarantee validity by construction.
    pub(crate) fn trusted(dims: Vec<usize>, matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `⟨s|ρ|s⟩` for every joint strategy `s` (raw, unclipped).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Reduced state on the players in `keep` (ascending order).
    pub fn reduced(&self, keep: &[usize]) -> Result<Matrix> {
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= self.dims.len()) {
            return Err(Error::IndexOutOfRange(format!("players {keep:?}")));
        }
        let space = JointSpace::new(&self.dims)?;
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let kept = JointSpace::new(&kept_dims)?;
        let traced: Vec<usize> = (0..self.dims.len()).filter(|i| !keep.contains(i)).collect();
        let n = self.dim();
        let proj = |j: usize| -> usize {
            keep.iter()
                .enumerate()
                .map(|(k, &p)| space.coord(j, p) * kept.strides[k])
                .sum()
        };
        let rest = |j: usize| -> Vec<usize> { traced.iter().map(|&p| space.coord(j, p)).collect() };
        let keys: Vec<(usize, Vec<usize>)> = (0..n).map(|j| (proj(j), rest(j))).collect();
        let mut out = Matrix::zeros(kept.size, kept.size);
        for r in 0..n {
            for c in 0..n {
                if keys[r].1 == keys[c].1 {
                    out[(keys[r].0, keys[c].0)] += self.matrix[(r, c)];
                }
            }
        }
        Ok(out)
    }
}

/// A unit vector over `⊗ H_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = joint_dim(&dims, MAX_JOINT_STRATEGIES)?;
        if amplitudes.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector(norm));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|⟨s|ψ⟩|²` for every joint strategy.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Computational-basis measurement.
    pub fn measure(&self) -> JointDistribution {
        to_distribution(&self.dims, self.probabilities())
    }

    /// `|ψ⟩⟨ψ|` as a density state.
    pub fn density(&self) -> Result<DensityState> {
        joint_dim(&self.dims, DENSITY_CAP)?;
        Ok(DensityState::trusted(
            self.dims.clone(),
            Matrix::outer(&self.amplitudes, &self.amplitudes),
        ))
    }

    /// `(op ⊗ I_{−i})|ψ⟩` for a square local operator, without renormalizing.
    pub fn apply_operator(&self, player: usize, op: &Matrix) -> Result<Vec<Complex64>> {
        let d = *self
            .dims
            .get(player)
            .ok_or_else(|| Error::IndexOutOfRange(format!("player {player}")))?;
        if op.rows() != d || op.cols() != d {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} operator on a {d}-dimensional player",
                op.rows(),
                op.cols()
            )));
        }
        let col = Matrix::column(&self.amplitudes);
        Ok(left_apply(op, player, &self.dims, &col).into_data())
    }

    /// `(U ⊗ I_{−i})|ψ⟩` for a unitary `U`.
    pub fn apply_unitary(&self, player: usize, u: &Matrix) -> Result<PureState> {
        check_unitary(u, TP_TOL)?;
        let amplitudes = self.apply_operator(player, u)?;
        Ok(PureState {
            dims: self.dims.clone(),
            amplitudes,
        })
    }
}

fn to_distribution(dims: &[usize], raw: Vec<f64>) -> JointDistribution {
    let clipped: Vec<f64> = raw.into_iter().map(|x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let probs = clipped.into_iter().map(|x| x / total).collect();
    JointDistribution::new(dims.to_vec(), probs).expect("normalized diagonal of a valid state")
}

pub(crate) fn check_unitary(u: &Matrix, tol: f64) -> Result<()> {
    if !u.is_square() {
        return Err(Error::ShapeMismatch("unitary must be square".into()));
    }
    let dev = (&u.adjoint() * u).max_abs_diff(&Matrix::identity(u.rows()));
    if dev > tol {
        return Err(Error::NotTracePreserving(dev));
    }
    Ok(())
}

/// `out[(a, y, b), c] = Σ_x op[y, x] · m[(a, x, b), c]` where `x` is player `i`'s coordinate.
pub(crate) fn left_apply(op: &Matrix, player: usize, dims: &[usize], m: &Matrix) -> Matrix {
    let din = dims[player];
    let dout = op.rows();
    let inner: usize = dims[player + 1..].iter().product();
    let outer: usize = dims[..player].iter().product();
    let cols = m.cols();
    let mut out = Matrix::zeros(outer * dout * inner, cols);
    for a in 0..outer {
        for b in 0..inner {
            for y in 0..dout {
                let orow = (a * dout + y) * inner + b;
                for x in 0..din {
                    let k = op[(y, x)];
                    if k == ZERO {
                        continue;
                    }
                    let irow = (a * din + x) * inner + b;
                    for c in 0..cols {
                        out[(orow, c)] += k * m[(irow, c)];
                    }
                }
            }
        }
    }
    out
}

/// A channel on one player's register, stored as Kraus operators `K_k` (`out × in`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalChannel {
    player: usize,
    kraus: Vec<Matrix>,
}

impl LocalChannel {
    /// Rejects sets with `‖Σ K*K − I‖_max > 1e-9`.
    pub fn new(player: usize, kraus: Vec<Matrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        let (dout, din) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != dout || k.cols() != din) {
            return Err(Error::ShapeMismatch("Kraus operators differ in shape".into()));
        }
        let mut sum = Matrix::zeros(din, din);
        for k in &kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        let dev = sum.max_abs_diff(&Matrix::identity(din));
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { player, kraus })
    }

    pub fn identity(player: usize, dim: usize) -> Self {
        Self {
            player,
            kraus: vec![Matrix::identity(dim)],
        }
    }

    pub fn unitary(player: usize, u: Matrix) -> Result<Self> {
        check_unitary(&u, TP_TOL)?;
        Ok(Self {
            player,
            kraus: vec![u],
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].rows()
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, indexed `(in, out)`.
    pub fn choi(&self) -> Matrix {
        let (din, dout) = (self.input_dim(), self.output_dim());
        let n = din * dout;
        let mut j = Matrix::zeros(n, n);
        for k in &self.kraus {
            for i in 0..din {
                for y in 0..dout {
                    let a = k[(y, i)];
                    if a == ZERO {
                        continue;
                    }
                    for i2 in 0..din {
                        for y2 in 0..dout {
                            j[(i * dout + y, i2 * dout + y2)] += a * k[(y2, i2)].conj();
                        }
                    }
                }
            }
        }
        j
    }
}

/// `ρ(p) = Σ_s p(s)|s⟩⟨s|`.
pub fn mixture_state(p: &JointDistribution) -> Result<DensityState> {
    joint_dim(p.shape(), DENSITY_CAP)?;
    Ok(DensityState::trusted(p.shape().to_vec(), Matrix::diag_real(p.probabilities())))
}

/// `|ψ(p)⟩ = Σ_s √p(s)|s⟩`.
pub fn superposition_state(p: &JointDistribution) -> PureState {
    PureState {
        dims: p.shape().to_vec(),
        amplitudes: p
            .probabilities()
            .iter()
            .map(|&x| Complex64::new(x.sqrt(), 0.0))
            .collect(),
    }
}

/// Distribution of a computational-basis measurement; roundoff negatives are clipped.
pub fn measure_diag(rho: &DensityState) -> JointDistribution {
    to_distribution(&rho.dims, rho.diagonal())
}

/// `u_i(ρ) = Σ_s ⟨s|ρ|s⟩ u_i(s)` for every player.
pub fn quantum_utility(g: &Game, rho: &DensityState) -> Result<Vec<f64>> {
    expected_utility(g, &measure_diag(rho))
}

/// Quantum utility of a pure state.
pub fn pure_utility(g: &Game, psi: &PureState) -> Result<Vec<f64>> {
    expected_utility(g, &psi.measure())
}

/// `(Φ_i ⊗ I_{−i})(ρ)`.
pub fn apply_local(rho: &DensityState, ch: &LocalChannel) -> Result<DensityState> {
    let i = ch.player;
    if i >= rho.dims.len() || rho.dims[i] != ch.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "channel on player {i} with input dimension {} does not fit dims {:?}",
            ch.input_dim(),
            rho.dims
        )));
    }
    let mut dims = rho.dims.clone();
    dims[i] = ch.output_dim();
    let n = joint_dim(&dims, DENSITY_CAP)?;
    let mut out = Matrix::zeros(n, n);
    for k in &ch.kraus {
        // K ρ K* = K (K ρ)*  since ρ is Hermitian
        let kr = left_apply(k, i, &rho.dims, &rho.matrix);
        let krk = left_apply(k, i, &rho.dims, &kr.adjoint());
        out = &out + &krk;
    }
    Ok(DensityState::trusted(dims, out.hermitian_part()))
}

/// Payoff change of player `ch.player()` when applying `ch` before measurement.
pub fn channel_gain(g: &Game, rho: &DensityState, ch: &LocalChannel) -> Result<f64> {
    let before = quantum_utility(g, rho)?[ch.player];
    let after = quantum_utility(g, &apply_local(rho, ch)?)?[ch.player];
    Ok(after - before)
}

/// Kraus set `{P_t}_{t≠from} ∪ {|to⟩⟨from|}`: measure, and replace `from` by `to`.
pub fn swap_deviation(player: usize, from: usize, to: usize, dims: &[usize]) -> Result<LocalChannel> {
    let d = *dims
        .get(player)
        .ok_or_else(|| Error::IndexOutOfRange(format!("player {player}")))?;
    if from >= d || to >= d || from == to {
        return Err(Error::IndexOutOfRange(format!(
            "swap {from} -> {to} on a {d}-strategy player"
        )));
    }
    let mut kraus: Vec<Matrix> = (0..d)
        .filter(|&t| t != from)
        .map(|t| {
            let mut p = Matrix::zeros(d, d);
            p[(t, t)] = ONE;
            p
        })
        .collect();
    let mut sw = Matrix::zeros(d, d);
    sw[(to, from)] = ONE;
    kraus.push(sw);
    LocalChannel::new(player, kraus)
}
