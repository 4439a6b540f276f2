//! Maximum quantum incentive to deviate, with duality certificates.
//!
//! A deviating player applies a local channel to its own register and then the
//! computational basis is measured. Only the measurement statistics on that
//! register matter, so the best channel is always a measure-and-prepare map
//! built from a POVM `{E_t}`, and the optimal payoff is
//!
//! ```text
//! max Σ_t tr(E_t M_t),   M_t[x, x′] = Σ_{s_{−i}} u_i(t, s_{−i}) ρ[(x, s_{−i}), (x′, s_{−i})]
//! ```
//!
//! whose dual is `min tr Y` subject to `Y ⪰ M_t`.

mod sdp;

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{check_correlated, Game, JointDistribution, JointSpace};
use crate::matkit::{eigh, Matrix};
use crate::quantum_state::{DensityState, LocalChannel, PureState};

use sdp::{solve_povm_sdp, SdpOptions};

/// Largest deviating-player dimension handed to the optimizer.
pub const LOCAL_DIM_CAP: usize = 16;
/// Tolerance of the correlated-equilibrium precheck on inputs.
pub const CE_PRECHECK_TOL: f64 = 1e-9;
/// POVM validity tolerance.
pub const POVM_TOL: f64 = 1e-9;
/// Dual feasibility tolerance on `λ_min(Y − M_t)`.
pub const DUAL_FEAS_TOL: f64 = 1e-8;
/// Accepted relative duality gap for POVM problems.
pub const POVM_GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Additive,
    Multiplicative,
}

/// A measurement `{E_t}` with one element per strategy of the deviating player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    elements: Vec<Matrix>,
}

impl Povm {
    pub fn new(elements: Vec<Matrix>) -> Result<Self> {
        let n = elements
            .first()
            .map(Matrix::rows)
            .ok_or_else(|| Error::InvalidArgument("empty POVM".into()))?;
        let mut sum = Matrix::zeros(n, n);
        for e in &elements {
            if e.rows() != n || e.cols() != n {
                return Err(Error::ShapeMismatch("POVM elements differ in shape".into()));
            }
            let d = e.hermitian_defect();
            if d > POVM_TOL {
                return Err(Error::NotHermitian(d));
            }
            let lmin = eigh(e)?.values[0];
            if lmin < -POVM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "POVM element has eigenvalue {lmin:.3e}"
                )));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&Matrix::identity(n));
        if dev > POVM_TOL {
            return Err(Error::InvalidArgument(format!("POVM sums to I up to {dev:.3e}")));
        }
        Ok(Self { elements })
    }

    /// The computational-basis measurement.
    pub fn basis(n: usize) -> Self {
        Self {
            elements: (0..n)
                .map(|t| {
                    let mut e = Matrix::zeros(n, n);
                    e[(t, t)] = Complex64::new(1.0, 0.0);
                    e
                })
                .collect(),
        }
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Measure-and-prepare channel: outcome `t` is re-prepared as `|t⟩`.
    pub fn to_channel(&self, player: usize) -> Result<LocalChannel> {
        let n = self.dim();
        let outputs = self.len();
        let mut kraus = Vec::new();
        for (t, e) in self.elements.iter().enumerate() {
            let d = eigh(e)?;
            for (k, &lam) in d.values.iter().enumerate() {
                if lam <= 0.0 {
                    continue;
                }
                let v = d.vector(k);
                let s = lam.sqrt();
                let mut op = Matrix::zeros(outputs, n);
                for (x, vx) in v.iter().enumerate() {
                    op[(t, x)] = vx.conj() * s;
                }
                kraus.push(op);
            }
        }
        LocalChannel::new(player, kraus)
    }
}

/// A dual point `Y` with its feasibility residuals and objective bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub y: Matrix,
    pub mode: Mode,
    /// `tr Y − baseline` or `tr Y / baseline`.
    pub bound_value: f64,
    /// `λ_min(Y − M_t)` for every outcome `t`.
    pub feasibility_residuals: Vec<f64>,
    pub feasible: bool,
}

/// The deviation attaining the primal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deviation {
    Povm(Povm),
    Channel(LocalChannel),
}

/// Optimal incentive with primal solution and dual bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncentiveResult {
    pub mode: Mode,
    pub player: usize,
    /// Honest payoff of the deviating player.
    pub baseline: f64,
    /// Payoff under the returned deviation.
    pub deviated_payoff: f64,
    /// `tr Y`: no deviation can earn more.
    pub payoff_bound: f64,
    /// Incentive of the returned deviation (difference or ratio per `mode`).
    pub primal_value: f64,
    pub dual_bound: f64,
    pub gap: f64,
    pub y: Matrix,
    pub solution: Deviation,
    pub iterations: usize,
}

impl IncentiveResult {
    /// `deviated_payoff / baseline` when the baseline is positive.
    pub fn ratio(&self) -> Option<f64> {
        (self.baseline > 0.0).then(|| self.deviated_payoff / self.baseline)
    }

    /// Upper bound on the ratio, when the baseline is positive.
    pub fn ratio_bound(&self) -> Option<f64> {
        (self.baseline > 0.0).then(|| self.payoff_bound / self.baseline)
    }

    pub fn additive(&self) -> f64 {
        self.deviated_payoff - self.baseline
    }
}

fn to_rows_checked(name: &str, m: &[Vec<f64>]) -> Result<(usize, usize)> {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || m.iter().any(|row| row.len() != c) {
        return Err(Error::ShapeMismatch(format!("{name} is empty or ragged")));
    }
    Ok((r, c))
}

/// `M_t = Σ_j a_tj |√p_j⟩⟨√p_j|` where `|√p_j⟩` is column `j` of `√P`.
pub fn povm_blocks(a: &[Vec<f64>], p: &[Vec<f64>]) -> Result<Vec<Matrix>> {
    let (m, n) = to_rows_checked("A", a)?;
    if to_rows_checked("P", p)? != (m, n) {
        return Err(Error::ShapeMismatch("A and P differ in shape".into()));
    }
    Ok((0..m)
        .map(|t| {
            Matrix::from_real_fn(m, m, |x, y| {
                (0..n).map(|j| a[t][j] * (p[x][j] * p[y][j]).sqrt()).sum()
            })
        })
        .collect())
}

/// `Σ_t ⟨√p_j|E_t|√p_j⟩ a_tj`: player 1's payoff after measuring `povm` on `|ψ(p)⟩`.
pub fn povm_payoff(a: &[Vec<f64>], p: &[Vec<f64>], povm: &Povm) -> Result<f64> {
    let blocks = povm_blocks(a, p)?;
    if povm.len() != blocks.len() || povm.dim() != blocks[0].rows() {
        return Err(Error::ShapeMismatch("POVM does not fit the game".into()));
    }
    Ok(sdp::objective(&blocks, povm.elements()))
}

fn baseline_of(a: &[Vec<f64>], p: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(p)
        .flat_map(|(ar, pr)| ar.iter().zip(pr).map(|(x, y)| x * y))
        .sum()
}

fn combine(mode: Mode, payoff: f64, baseline: f64) -> f64 {
    match mode {
        Mode::Additive => payoff - baseline,
        Mode::Multiplicative => payoff / baseline,
    }
}

fn check_mode(mode: Mode, baseline: f64) -> Result<()> {
    if mode == Mode::Multiplicative && baseline <= 0.0 {
        return Err(Error::ZeroBaseline(baseline));
    }
    Ok(())
}

fn all_ones_game(a: &[Vec<f64>]) -> Result<Game> {
    let j: Vec<Vec<f64>> = a.iter().map(|r| vec![1.0; r.len()]).collect();
    Game::bimatrix(a, &j)
}

/// Objective `Σ_t ⟨M_t, E_t⟩` of the (A, J) game on `|ψ(P)⟩`, checked against the CE precondition.
fn povm_problem(a: &[Vec<f64>], p: &[Vec<f64>], mode: Mode) -> Result<(Vec<Matrix>, f64)> {
    let g = all_ones_game(a)?;
    let dist = JointDistribution::from_matrix(p)?;
    let report = check_correlated(&g, &dist, CE_PRECHECK_TOL)?;
    if let Some((player, from, to, gain)) = report.first_violation() {
        return Err(Error::NotCorrelatedEquilibrium {
            player,
            from,
            to,
            gain,
        });
    }
    let baseline = baseline_of(a, p);
    check_mode(mode, baseline)?;
    let blocks = povm_blocks(a, p)?;
    if blocks[0].rows() > LOCAL_DIM_CAP {
        return Err(Error::CapExceeded {
            what: "deviating player dimension",
            requested: blocks[0].rows(),
            cap: LOCAL_DIM_CAP,
        });
    }
    Ok((blocks, baseline))
}

fn solve(
    blocks: &[Matrix],
    baseline: f64,
    mode: Mode,
    player: usize,
    accept_gap: f64,
    as_channel: bool,
) -> Result<IncentiveResult> {
    let opts = SdpOptions {
        accept_gap,
        ..SdpOptions::default()
    };
    let sol = solve_povm_sdp(blocks, opts)?;
    let primal_value = combine(mode, sol.primal, baseline);
    let dual_bound = combine(mode, sol.dual, baseline);
    let povm = Povm::new(sol.elements)?;
    let solution = if as_channel {
        Deviation::Channel(povm.to_channel(player)?)
    } else {
        Deviation::Povm(povm)
    };
    Ok(IncentiveResult {
        mode,
        player,
        baseline,
        deviated_payoff: sol.primal,
        payoff_bound: sol.dual,
        primal_value,
        dual_bound,
        gap: dual_bound - primal_value,
        y: sol.y,
        solution,
        iterations: sol.iterations,
    })
}

/// Best POVM deviation of player 1 on `|ψ(P)⟩` in the game `(A, J)`.
pub fn max_povm_incentive(a: &[Vec<f64>], p: &[Vec<f64>], mode: Mode) -> Result<IncentiveResult> {
    let (blocks, baseline) = povm_problem(a, p, mode)?;
    solve(&blocks, baseline, mode, 0, POVM_GAP_TOL, false)
}

/// Objective value of an arbitrary POVM for `(A, P)`, in the requested mode.
pub fn povm_incentive_value(a: &[Vec<f64>], p: &[Vec<f64>], povm: &Povm, mode: Mode) -> Result<f64> {
    let baseline = baseline_of(a, p);
    check_mode(mode, baseline)?;
    Ok(combine(mode, povm_payoff(a, p, povm)?, baseline))
}

/// Feasibility residuals and bound of a candidate dual point for `(A, P)`.
pub fn dual_check(a: &[Vec<f64>], p: &[Vec<f64>], y: &Matrix, mode: Mode) -> Result<DualCertificate> {
    let blocks = povm_blocks(a, p)?;
    let n = blocks[0].rows();
    if y.rows() != n || y.cols() != n {
        return Err(Error::ShapeMismatch(format!("Y must be {n}x{n}")));
    }
    let baseline = baseline_of(a, p);
    check_mode(mode, baseline)?;
    let feasibility_residuals = blocks
        .iter()
        .map(|m| eigh(&(y - m)).map(|e| e.values[0]))
        .collect::<Result<Vec<_>>>()?;
    let feasible = feasibility_residuals.iter().all(|&r| r >= -DUAL_FEAS_TOL);
    Ok(DualCertificate {
        y: y.clone(),
        mode,
        bound_value: combine(mode, y.trace().re, baseline),
        feasibility_residuals,
        feasible,
    })
}

/// The exact optimal 2×2 instance: `A = I₂`, optimal `P`, POVM and dual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm2x2 {
    pub mode: Mode,
    pub value: f64,
    pub a: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub povm: Povm,
    pub y: Matrix,
}

fn two_outcome(e1: Matrix) -> Povm {
    let e2 = &Matrix::identity(2) - &e1;
    Povm {
        elements: vec![e1, e2],
    }
}

pub fn closed_form_2x2(mode: Mode) -> ClosedForm2x2 {
    let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    match mode {
        Mode::Additive => {
            let p = SQRT_2 / 4.0;
            let off = (2.0 * p * (1.0 - 2.0 * p)).sqrt();
            let yo = (p * (0.5 - p)).sqrt();
            ClosedForm2x2 {
                mode,
                value: (SQRT_2 - 1.0) / 2.0,
                a,
                p: vec![vec![p, p], vec![0.0, 1.0 - 2.0 * p]],
                povm: two_outcome(Matrix::from_real_rows(&[
                    vec![2.0 * p, -off],
                    vec![-off, 1.0 - 2.0 * p],
                ])),
                y: Matrix::from_real_rows(&[vec![0.5, yo], vec![yo, p]]),
            }
        }
        Mode::Multiplicative => ClosedForm2x2 {
            mode,
            value: 4.0 / 3.0,
            a,
            p: vec![vec![0.4, 0.4], vec![0.0, 0.2]],
            povm: two_outcome(Matrix::from_real_rows(&[
                vec![2.0 / 3.0, -SQRT_2 / 3.0],
                vec![-SQRT_2 / 3.0, 1.0 / 3.0],
            ])),
            y: Matrix::from_real_rows(&[
                vec![8.0 / 15.0, 2.0 * SQRT_2 / 15.0],
                vec![2.0 * SQRT_2 / 15.0, 4.0 / 15.0],
            ]),
        },
    }
}

/// The mirrored additive optimum `(P′, E′)` obtained by relabelling both strategies.
pub fn mirrored_2x2() -> (Vec<Vec<f64>>, Povm) {
    let p = SQRT_2 / 4.0;
    let off = (2.0 * p * (1.0 - 2.0 * p)).sqrt();
    (
        vec![vec![1.0 - 2.0 * p, 0.0], vec![p, p]],
        two_outcome(Matrix::from_real_rows(&[
            vec![2.0 * p, off],
            vec![off, 1.0 - 2.0 * p],
        ])),
    )
}

/// Zero-incentive dual point for the average `(P + P′)/2` of the two optima.
pub fn averaged_2x2_certificate() -> (Vec<Vec<f64>>, Matrix) {
    let p = SQRT_2 / 4.0;
    let d = (1.0 - p) / 2.0;
    let o = (p * (1.0 - p)).sqrt() / 2.0;
    let base = closed_form_2x2(Mode::Additive).p;
    let (mirror, _) = mirrored_2x2();
    let avg = base
        .iter()
        .zip(&mirror)
        .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| (x + y) / 2.0).collect())
        .collect();
    (avg, Matrix::from_real_rows(&[vec![d, o], vec![o, d]]))
}

fn local_dim_ok(dims: &[usize], player: usize) -> Result<usize> {
    let d = *dims
        .get(player)
        .ok_or_else(|| Error::IndexOutOfRange(format!("player {player}")))?;
    if d > LOCAL_DIM_CAP {
        return Err(Error::CapExceeded {
            what: "deviating player dimension",
            requested: d,
            cap: LOCAL_DIM_CAP,
        });
    }
    Ok(d)
}

fn check_dims(g: &Game, dims: &[usize]) -> Result<()> {
    if g.strategy_counts() != dims {
        return Err(Error::ShapeMismatch(format!(
            "state dims {dims:?} do not match strategy counts {:?}",
            g.strategy_counts()
        )));
    }
    Ok(())
}

/// `M_t` for player `i`, given `entry(r, c) = ρ[r, c]` on joint indices of a
/// state whose shape matches the game except on player `i`'s axis.
fn blocks_from(
    g: &Game,
    player: usize,
    state_dims: &[usize],
    entry: impl Fn(usize, usize) -> Complex64,
) -> Result<Vec<Matrix>> {
    let space: &JointSpace = g.space();
    let state = JointSpace::new(state_dims)?;
    let d = state_dims[player];
    let t_count = g.strategy_counts()[player];
    let rows: Vec<Vec<usize>> = (0..d).map(|x| state.slice(player, x).collect()).collect();
    let u = g.utilities(player);
    Ok((0..t_count)
        .map(|t| {
            let weights: Vec<f64> = space.slice(player, t).map(|j| u[j]).collect();
            let m = Matrix::from_fn(d, d, |x, y| {
                rows[x]
                    .iter()
                    .zip(&rows[y])
                    .zip(&weights)
                    .filter(|(_, w)| **w != 0.0)
                    .map(|((&r, &c), w)| entry(r, c) * *w)
                    .sum()
            });
            m.hermitian_part()
        })
        .collect())
}

/// Objective blocks of player `i`'s channel optimization on `ρ`.
pub fn channel_blocks(g: &Game, rho: &DensityState, player: usize) -> Result<Vec<Matrix>> {
    check_dims(g, rho.dims())?;
    local_dim_ok(rho.dims(), player)?;
    let m = rho.matrix();
    blocks_from(g, player, rho.dims(), |r, c| m[(r, c)])
}

/// Objective blocks when player `i` holds an arbitrary register (for example
/// a shared seed) and every other axis of `ρ` already carries strategies.
pub fn seeded_channel_blocks(g: &Game, rho: &DensityState, player: usize) -> Result<Vec<Matrix>> {
    local_dim_ok(rho.dims(), player)?;
    let counts = g.strategy_counts();
    let matches = rho.dims().len() == counts.len()
        && rho
            .dims()
            .iter()
            .zip(counts)
            .enumerate()
            .all(|(k, (a, b))| k == player || a == b);
    if !matches {
        return Err(Error::ShapeMismatch(format!(
            "state dims {:?} do not match strategy counts {counts:?} off player {player}",
            rho.dims()
        )));
    }
    let m = rho.matrix();
    blocks_from(g, player, rho.dims(), |r, c| m[(r, c)])
}

/// Best channel from player `i`'s register in `ρ` to that player's strategies. The
/// honest payoff is supplied by the caller since it depends on the honest map.
pub fn max_seeded_channel_incentive(
    g: &Game,
    rho: &DensityState,
    player: usize,
    honest_payoff: f64,
) -> Result<IncentiveResult> {
    let blocks = seeded_channel_blocks(g, rho, player)?;
    solve(&blocks, honest_payoff, Mode::Additive, player, CHANNEL_GAP_TOL, true)
}

/// Objective blocks for a pure state, avoiding the dense density matrix.
pub fn channel_blocks_pure(g: &Game, psi: &PureState, player: usize) -> Result<Vec<Matrix>> {
    check_dims(g, psi.dims())?;
    local_dim_ok(psi.dims(), player)?;
    let amp = psi.amplitudes();
    blocks_from(g, player, psi.dims(), |r, c| amp[r] * amp[c].conj())
}

/// Accepted relative duality gap for channel problems.
pub const CHANNEL_GAP_TOL: f64 = 1e-6;

fn honest_payoff(g: &Game, player: usize, diag: &[f64]) -> f64 {
    g.utilities(player).iter().zip(diag).map(|(u, p)| u * p).sum()
}

/// Best local channel of `player` on `ρ`, returned in Kraus form.
pub fn max_channel_incentive(g: &Game, rho: &DensityState, player: usize) -> Result<IncentiveResult> {
    let blocks = channel_blocks(g, rho, player)?;
    let baseline = honest_payoff(g, player, &rho.diagonal());
    solve(&blocks, baseline, Mode::Additive, player, CHANNEL_GAP_TOL, true)
}

/// [`max_channel_incentive`] on a pure state.
pub fn max_channel_incentive_pure(g: &Game, psi: &PureState, player: usize) -> Result<IncentiveResult> {
    let blocks = channel_blocks_pure(g, psi, player)?;
    let baseline = honest_payoff(g, player, &psi.probabilities());
    solve(&blocks, baseline, Mode::Additive, player, CHANNEL_GAP_TOL, true)
}

/// Quantum correlated equilibrium verdict with per-player optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QceReport {
    pub verdict: bool,
    pub tolerance: f64,
    pub players: Vec<IncentiveResult>,
}

/// Every player's best channel gains at most `tol`.
pub fn is_qce(g: &Game, rho: &DensityState, tol: f64) -> Result<QceReport> {
    let players = (0..g.players())
        .map(|i| max_channel_incentive(g, rho, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(QceReport {
        verdict: players.iter().all(|r| r.primal_value <= tol),
        tolerance: tol,
        players,
    })
}

/// [`is_qce`] on a pure state.
pub fn is_qce_pure(g: &Game, psi: &PureState, tol: f64) -> Result<QceReport> {
    let players = (0..g.players())
        .map(|i| max_channel_incentive_pure(g, psi, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(QceReport {
        verdict: players.iter().all(|r| r.primal_value <= tol),
        tolerance: tol,
        players,
    })
}

/// Caps `(1 − ε_i, 1/ε_i)` on any incentive from a CE mapping, with
/// `ε_i = max{1/|S_i|, 1/|S_{−i}|}`.
pub fn general_mapping_bound(g: &Game, player: usize) -> Result<(f64, f64)> {
    if !g.is_normalized() {
        return Err(Error::InvalidArgument("bound needs payoffs in [0, 1]".into()));
    }
    let si = *g
        .strategy_counts()
        .get(player)
        .ok_or_else(|| Error::IndexOutOfRange(format!("player {player}")))?;
    let others = g.joint_count() / si;
    let eps = (1.0 / si as f64).max(1.0 / others as f64);
    Ok((1.0 - eps, 1.0 / eps))
}
