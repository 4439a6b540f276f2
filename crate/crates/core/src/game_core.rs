//! Classical strategic games, joint distributions, and equilibrium checks.
//!
//! Joint strategies are indexed row-major over the players: player 0 is the
//! most significant coordinate. That order is also the lexicographic order
//! used for every tie-break.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest joint strategy space handled densely.
pub const MAX_JOINT_STRATEGIES: usize = 4096;

/// Tolerance on `Σ p(s) = 1`.
pub const DIST_SUM_TOL: f64 = 1e-12;

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut st = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * shape[i + 1];
    }
    st
}

fn joint_size(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::ShapeMismatch(format!("invalid strategy counts {shape:?}")));
    }
    let n = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .unwrap_or(usize::MAX);
    if n > MAX_JOINT_STRATEGIES {
        return Err(Error::CapExceeded {
            what: "joint strategies",
            requested: n,
            cap: MAX_JOINT_STRATEGIES,
        });
    }
    Ok(n)
}

/// Index arithmetic over a joint strategy space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct JointSpace {
    pub shape: Vec<usize>,
    pub strides: Vec<usize>,
    pub size: usize,
}

impl JointSpace {
    pub fn new(shape: &[usize]) -> Result<Self> {
        let size = joint_size(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            strides: strides(shape),
            size,
        })
    }

    pub fn coord(&self, joint: usize, player: usize) -> usize {
        (joint / self.strides[player]) % self.shape[player]
    }

    /// Joint index with player's coordinate replaced by `to`.
    pub fn substitute(&self, joint: usize, player: usize, to: usize) -> usize {
        let from = self.coord(joint, player);
        joint + to * self.strides[player] - from * self.strides[player]
    }

    /// Joint indices whose `player` coordinate equals `s`, in lexicographic order of `s_{−i}`.
    pub fn slice(&self, player: usize, s: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.strides[player];
        let block = stride * self.shape[player];
        let outer = self.size / block;
        (0..outer).flat_map(move |o| (0..stride).map(move |r| o * block + s * stride + r))
    }

    /// Rank of the opponent profile of `joint` in lexicographic order of `S_{−i}`.
    pub fn others_index(&self, joint: usize, player: usize) -> usize {
        let stride = self.strides[player];
        let block = stride * self.shape[player];
        (joint / block) * stride + joint % stride
    }
}

/// A finite strategic game with dense utility tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    space: JointSpace,
    utilities: Vec<Vec<f64>>,
    normalized: bool,
}

impl Game {
    /// `utilities[i]` is player `i`'s payoff over joint strategies (row-major).
    pub fn new(strategy_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        let space = JointSpace::new(&strategy_counts)?;
        if utilities.len() != strategy_counts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} utility tensors for {} players",
                utilities.len(),
                strategy_counts.len()
            )));
        }
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != space.size {
                return Err(Error::ShapeMismatch(format!(
                    "player {i} utility has {} entries, expected {}",
                    u.len(),
                    space.size
                )));
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("player {i} has non-finite payoffs")));
            }
        }
        let normalized = utilities
            .iter()
            .flatten()
            .all(|&x| (0.0..=1.0).contains(&x));
        Ok(Self {
            space,
            utilities,
            normalized,
        })
    }

    /// Two-player game from payoff matrices `a` (row player) and `b` (column player).
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let shape_ok = |m: &[Vec<f64>]| m.len() == rows && m.iter().all(|r| r.len() == cols);
        if !shape_ok(a) || !shape_ok(b) {
            return Err(Error::ShapeMismatch("bimatrix payoffs are ragged or differ in shape".into()));
        }
        Self::new(
            vec![rows, cols],
            vec![a.concat(), b.concat()],
        )
    }

    pub fn players(&self) -> usize {
        self.space.shape.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.space.shape
    }

    pub fn joint_count(&self) -> usize {
        self.space.size
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    pub fn utility(&self, player: usize, joint: usize) -> f64 {
        self.utilities[player][joint]
    }

    pub fn utility_at(&self, player: usize, profile: &[usize]) -> f64 {
        self.utilities[player][self.encode(profile)]
    }

    /// Player's payoff matrix for a two-player game.
    pub fn payoff_matrix(&self, player: usize) -> Result<Vec<Vec<f64>>> {
        if self.players() != 2 {
            return Err(Error::ShapeMismatch("payoff matrix needs a two-player game".into()));
        }
        let cols = self.space.shape[1];
        Ok(self.utilities[player].chunks(cols).map(<[f64]>::to_vec).collect())
    }

    pub fn encode(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.space.strides).map(|(s, st)| s * st).sum()
    }

    pub fn decode(&self, joint: usize) -> Vec<usize> {
        (0..self.players()).map(|i| self.space.coord(joint, i)).collect()
    }

    pub(crate) fn space(&self) -> &JointSpace {
        &self.space
    }

    fn ensure_matches(&self, p: &JointDistribution) -> Result<()> {
        if p.shape() != self.strategy_counts() {
            return Err(Error::ShapeMismatch(format!(
                "distribution shape {:?} does not match game {:?}",
                p.shape(),
                self.strategy_counts()
            )));
        }
        Ok(())
    }

    /// Player `i`'s gain `Σ_{s_{−i}} p(s_i, s_{−i})[u_i(t, s_{−i}) − u_i(s_i, s_{−i})]`.
    pub(crate) fn pair_gain(&self, p: &[f64], player: usize, from: usize, to: usize) -> f64 {
        let u = &self.utilities[player];
        self.space
            .slice(player, from)
            .map(|j| p[j] * (u[self.space.substitute(j, player, to)] - u[j]))
            .sum()
    }
}

/// Probability distribution over a joint strategy space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    shape: Vec<usize>,
    probabilities: Vec<f64>,
}

impl JointDistribution {
    pub fn new(shape: Vec<usize>, probabilities: Vec<f64>) -> Result<Self> {
        let size = joint_size(&shape)?;
        if probabilities.len() != size {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for shape {shape:?}",
                probabilities.len()
            )));
        }
        if let Some((i, &x)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("entry {i} is {x}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self {
            shape,
            probabilities,
        })
    }

    /// Bivariate distribution from a row-major matrix `P[x][y]`.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged distribution matrix".into()));
        }
        Self::new(vec![r, c], rows.concat())
    }

    pub fn point_mass(shape: Vec<usize>, profile: &[usize]) -> Result<Self> {
        let size = joint_size(&shape)?;
        let st = strides(&shape);
        let idx: usize = profile.iter().zip(&st).map(|(s, t)| s * t).sum();
        if profile.len() != shape.len() || profile.iter().zip(&shape).any(|(s, n)| s >= n) {
            return Err(Error::IndexOutOfRange(format!("profile {profile:?} for shape {shape:?}")));
        }
        let mut p = vec![0.0; size];
        p[idx] = 1.0;
        Self::new(shape, p)
    }

    pub fn uniform(shape: Vec<usize>) -> Result<Self> {
        let size = joint_size(&shape)?;
        Self::new(shape, vec![1.0 / size as f64; size])
    }

    /// Product distribution `p_1 × … × p_k`.
    pub fn product(factors: &[Vec<f64>]) -> Result<Self> {
        let shape: Vec<usize> = factors.iter().map(Vec::len).collect();
        let space = JointSpace::new(&shape)?;
        for (i, f) in factors.iter().enumerate() {
            check_simplex(f).map_err(|e| Error::InvalidDistribution(format!("factor {i}: {e}")))?;
        }
        let probabilities = (0..space.size)
            .map(|j| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f[space.coord(j, i)])
                    .product()
            })
            .collect();
        Self::new(shape, probabilities)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub(crate) fn space(&self) -> JointSpace {
        JointSpace::new(&self.shape).expect("validated at construction")
    }

    /// Marginal distribution of one player.
    pub fn marginal(&self, player: usize) -> Vec<f64> {
        let space = self.space();
        (0..self.shape[player])
            .map(|s| space.slice(player, s).map(|j| self.probabilities[j]).sum())
            .collect()
    }

    /// `p|_{s_i}` over `S_{−i}` (lexicographic), or `None` when `p_i(s_i) = 0`.
    pub fn conditional(&self, player: usize, s: usize) -> Option<Vec<f64>> {
        let space = self.space();
        let slice: Vec<f64> = space.slice(player, s).map(|j| self.probabilities[j]).collect();
        let mass: f64 = slice.iter().sum();
        (mass > 0.0).then(|| slice.into_iter().map(|x| x / mass).collect())
    }

    /// Matrix view of a bivariate distribution.
    pub fn to_matrix(&self) -> Result<Vec<Vec<f64>>> {
        if self.shape.len() != 2 {
            return Err(Error::ShapeMismatch("matrix view needs two players".into()));
        }
        Ok(self
            .probabilities
            .chunks(self.shape[1])
            .map(<[f64]>::to_vec)
            .collect())
    }
}

pub(crate) fn check_simplex(f: &[f64]) -> Result<()> {
    if f.is_empty() || f.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidDistribution("negative, empty, or non-finite entries".into()));
    }
    let total: f64 = f.iter().sum();
    if (total - 1.0).abs() > DIST_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// Best classical deviation of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub player: usize,
    /// `best_deviation[s_i]` is the strategy played on recommendation `s_i`.
    pub best_deviation: Vec<usize>,
    /// Expected payoff under the distribution.
    pub baseline: f64,
    /// Gain of the best deviation function, never negative.
    pub additive_gain: f64,
    /// `(baseline + gain) / baseline`, only when the baseline is positive.
    pub multiplicative_gain: Option<f64>,
    /// Largest single `(s_i → s_i′)` gain, as tested by the CE inequality.
    pub max_pair_gain: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Verdict of an equilibrium check with per-player reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub verdict: bool,
    pub tolerance: f64,
    pub players: Vec<DeviationReport>,
}

impl EquilibriumReport {
    /// First violated `(player, from, to, gain)` in player order.
    pub fn first_violation(&self) -> Option<(usize, usize, usize, f64)> {
        self.players
            .iter()
            .filter(|r| r.max_pair_gain > self.tolerance)
            .find_map(|r| r.worst_pair.map(|(f, t)| (r.player, f, t, r.max_pair_gain)))
    }
}

/// Expected payoff of every player under `p`.
pub fn expected_utility(g: &Game, p: &JointDistribution) -> Result<Vec<f64>> {
    g.ensure_matches(p)?;
    Ok((0..g.players())
        .map(|i| {
            g.utilities(i)
                .iter()
                .zip(p.probabilities())
                .map(|(u, q)| u * q)
                .sum()
        })
        .collect())
}

fn deviation_report(g: &Game, p: &JointDistribution, player: usize) -> DeviationReport {
    let probs = p.probabilities();
    let n = g.strategy_counts()[player];
    let baseline: f64 = g
        .utilities(player)
        .iter()
        .zip(probs)
        .map(|(u, q)| u * q)
        .sum();
    let mut best_deviation = Vec::with_capacity(n);
    let mut additive_gain = 0.0;
    let mut max_pair_gain = f64::NEG_INFINITY;
    let mut worst_pair = None;
    for from in 0..n {
        let mut best = (from, 0.0);
        for to in 0..n {
            if to == from {
                continue;
            }
            let gain = g.pair_gain(probs, player, from, to);
            if gain > best.1 {
                best = (to, gain);
            }
            if gain > max_pair_gain {
                max_pair_gain = gain;
                worst_pair = Some((from, to));
            }
        }
        best_deviation.push(best.0);
        additive_gain += best.1;
    }
    if n == 1 {
        max_pair_gain = 0.0;
    }
    let multiplicative_gain = (baseline > 0.0).then(|| (baseline + additive_gain) / baseline);
    DeviationReport {
        player,
        best_deviation,
        baseline,
        additive_gain,
        multiplicative_gain,
        max_pair_gain,
        worst_pair,
    }
}

/// Correlated equilibrium check: every `(i, s_i → s_i′)` gain must be `≤ tol`.
pub fn check_correlated(g: &Game, p: &JointDistribution, tol: f64) -> Result<EquilibriumReport> {
    g.ensure_matches(p)?;
    let players: Vec<DeviationReport> = (0..g.players()).map(|i| deviation_report(g, p, i)).collect();
    let verdict = players.iter().all(|r| r.max_pair_gain <= tol);
    Ok(EquilibriumReport {
        verdict,
        tolerance: tol,
        players,
    })
}

/// Additive and (where defined) multiplicative incentive of the best deviation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalIncentive {
    pub additive: f64,
    pub multiplicative: Option<f64>,
}

pub fn classical_incentive(g: &Game, p: &JointDistribution, player: usize) -> Result<ClassicalIncentive> {
    g.ensure_matches(p)?;
    if player >= g.players() {
        return Err(Error::IndexOutOfRange(format!("player {player}")));
    }
    let r = deviation_report(g, p, player);
    Ok(ClassicalIncentive {
        additive: r.additive_gain,
        multiplicative: r.multiplicative_gain,
    })
}

/// Mixed Nash check for a product profile; inequalities only on each player's support.
pub fn check_nash(g: &Game, factors: &[Vec<f64>], tol: f64) -> Result<EquilibriumReport> {
    if factors.len() != g.players()
        || factors.iter().zip(g.strategy_counts()).any(|(f, &n)| f.len() != n)
    {
        return Err(Error::ShapeMismatch("factor lengths do not match the game".into()));
    }
    let p = JointDistribution::product(factors)?;
    let mut report = check_correlated(g, &p, tol)?;
    let mut verdict = true;
    for r in &mut report.players {
        let i = r.player;
        let n = g.strategy_counts()[i];
        let mut worst = f64::NEG_INFINITY;
        let mut pair = None;
        for from in (0..n).filter(|&s| factors[i][s] > 0.0) {
            for to in (0..n).filter(|&t| t != from) {
                // conditional expectation against p_{−i}
                let gain = g.pair_gain(p.probabilities(), i, from, to) / factors[i][from];
                if gain > worst {
                    worst = gain;
                    pair = Some((from, to));
                }
            }
        }
        if pair.is_none() {
            worst = 0.0;
        }
        r.max_pair_gain = worst;
        r.worst_pair = pair;
        verdict &= worst <= tol;
    }
    report.verdict = verdict;
    Ok(report)
}

/// A game in which `p` is a correlated equilibrium: `u_i(s) = 1` iff `s_{−i}` is the
/// lexicographically first maximizer of `p(s_i, ·)`.
pub fn game_from_correlation(p: &JointDistribution) -> Game {
    let space = p.space();
    let probs = p.probabilities();
    let utilities = (0..space.shape.len())
        .map(|i| {
            let mut u = vec![0.0; space.size];
            let best: Vec<usize> = (0..space.shape[i])
                .map(|s| {
                    let mut arg = 0;
                    let mut max = f64::NEG_INFINITY;
                    for (k, j) in space.slice(i, s).enumerate() {
                        if probs[j] > max {
                            max = probs[j];
                            arg = k;
                        }
                    }
                    arg
                })
                .collect();
            for (j, uj) in u.iter_mut().enumerate() {
                let s = space.coord(j, i);
                let others = space.others_index(j, i);
                // u_i(s) = 1 iff s_{-i} = s*_{-i}(s_i)
                if others == best[s] {
                    *uj = 1.0;
                }
            }
            u
        })
        .collect();
    Game::new(space.shape.clone(), utilities).expect("shape taken from a valid distribution")
}

fn tensor_index(a: &JointSpace, b: &JointSpace, out: &JointSpace, ja: usize, jb: usize) -> usize {
    (0..a.shape.len())
        .map(|i| (a.coord(ja, i) * b.shape[i] + b.coord(jb, i)) * out.strides[i])
        .sum()
}

/// Tensor product game: strategy `(x, y)` of player `i` is index `x·|S_i²| + y`;
/// utilities multiply.
pub fn tensor_game(g1: &Game, g2: &Game) -> Result<Game> {
    if g1.players() != g2.players() {
        return Err(Error::ShapeMismatch("tensor product needs equal player counts".into()));
    }
    let shape: Vec<usize> = g1
        .strategy_counts()
        .iter()
        .zip(g2.strategy_counts())
        .map(|(a, b)| a * b)
        .collect();
    let out = JointSpace::new(&shape)?;
    let mut utilities = vec![vec![0.0; out.size]; g1.players()];
    for ja in 0..g1.joint_count() {
        for jb in 0..g2.joint_count() {
            let j = tensor_index(g1.space(), g2.space(), &out, ja, jb);
            for (i, u) in utilities.iter_mut().enumerate() {
                u[j] = g1.utility(i, ja) * g2.utility(i, jb);
            }
        }
    }
    Game::new(shape, utilities)
}

/// Product distribution on the tensor product space of [`tensor_game`].
pub fn tensor_dist(p1: &JointDistribution, p2: &JointDistribution) -> Result<JointDistribution> {
    if p1.shape().len() != p2.shape().len() {
        return Err(Error::ShapeMismatch("tensor product needs equal player counts".into()));
    }
    let (a, b) = (p1.space(), p2.space());
    let shape: Vec<usize> = a.shape.iter().zip(&b.shape).map(|(x, y)| x * y).collect();
    let out = JointSpace::new(&shape)?;
    let mut probs = vec![0.0; out.size];
    for ja in 0..a.size {
        for jb in 0..b.size {
            probs[tensor_index(&a, &b, &out, ja, jb)] =
                p1.probabilities()[ja] * p2.probabilities()[jb];
        }
    }
    JointDistribution::new(shape, probs)
}
