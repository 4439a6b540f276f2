//! Explicit games, equilibria and deviations, with closed-form predictions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::deviation::{povm_payoff, Povm};
use crate::error::{Error, Result};
use crate::game_core::{game_from_correlation, Game, JointDistribution};
use crate::matkit::{kron_power, Matrix};
use crate::quantum_state::{pure_utility, superposition_state, DensityState, PureState};

/// Largest state vector the ε-family simulates densely (`4^d` amplitudes).
pub const STATEVECTOR_CAP: usize = 1 << 20;

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect()
}

/// The game `(I_n, J_n)`: player 1 wants to match, player 2 is indifferent.
pub fn identity_game(n: usize) -> Result<Game> {
    Game::bimatrix(&identity_rows(n), &vec![vec![1.0; n]; n])
}

/// `(J − I, J − I)`: both players are paid for choosing different resources.
pub fn load_balancing(n: usize) -> Result<Game> {
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i != j)).collect()).collect();
    Game::bimatrix(&m, &m)
}

/// A named game with an optional bundled correlated equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalGame {
    pub name: String,
    pub game: Game,
    pub ce: Option<JointDistribution>,
}

/// `traffic_light`, `battle_of_sexes`, `load_balancing` (n = 2) or `load_balancing_<n>`.
pub fn canonical(name: &str) -> Result<CanonicalGame> {
    let (game, ce) = match name {
        "traffic_light" => (
            Game::bimatrix(
                &[vec![-100.0, 1.0], vec![0.0, 0.0]],
                &[vec![-100.0, 0.0], vec![1.0, 0.0]],
            )?,
            JointDistribution::from_matrix(&[vec![0.0, 0.5], vec![0.5, 0.0]])?,
        ),
        "battle_of_sexes" => (
            Game::bimatrix(
                &[vec![2.0, 0.0], vec![0.0, 4.0]],
                &[vec![4.0, 0.0], vec![0.0, 2.0]],
            )?,
            JointDistribution::from_matrix(&[vec![0.5, 0.0], vec![0.0, 0.5]])?,
        ),
        _ => {
            let n = match name.strip_prefix("load_balancing") {
                Some("") => 2,
                Some(rest) => rest
                    .strip_prefix('_')
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&n| n >= 2)
                    .ok_or_else(|| Error::UnknownConstruction(name.into()))?,
                None => return Err(Error::UnknownConstruction(name.into())),
            };
            (load_balancing(n)?, off_diagonal_uniform(n)?)
        }
    };
    Ok(CanonicalGame {
        name: name.into(),
        game,
        ce: Some(ce),
    })
}

fn off_diagonal_uniform(n: usize) -> Result<JointDistribution> {
    let w = 1.0 / (n * n - n) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w }).collect())
        .collect();
    JointDistribution::from_matrix(&rows)
}

/// Parameters and predictions of the ε-family at depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGameSpec {
    pub d: usize,
    pub epsilon: f64,
    /// `(sin²ε + cos⁴ε)^d`.
    pub predicted_old: f64,
    /// `(sin²ε·cos²ε + cos²ε)^d`.
    pub predicted_new: f64,
}

impl EpsilonGameSpec {
    pub fn new(d: usize, epsilon: f64) -> Self {
        let (s, c) = (epsilon.sin().powi(2), epsilon.cos().powi(2));
        Self {
            d,
            epsilon,
            predicted_old: (s + c * c).powi(d as i32),
            predicted_new: (s * c + c).powi(d as i32),
        }
    }

    pub fn predicted_gain(&self) -> f64 {
        self.predicted_new - self.predicted_old
    }
}

/// Root of `d = 4 ε⁻² ln(1/ε)` by bisection on `(1e-6, 1)`.
///
/// The right side decreases strictly from `+∞` to `0` on that interval, so
/// the root exists and is unique for every `d > 0`.
pub fn epsilon_for_depth(d: usize) -> f64 {
    let f = |e: f64| 4.0 * (1.0 / e).ln() / (e * e) - d as f64;
    let (mut lo, mut hi) = (1e-6, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Payoffs of player 1 before and after the deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simulated {
    pub old: f64,
    pub new: f64,
}

impl Simulated {
    pub fn gain(&self) -> f64 {
        self.new - self.old
    }

    pub fn ratio(&self) -> f64 {
        self.new / self.old
    }
}

/// `(I^{⊗d}, J^{⊗d})`, CE `P^{⊗d}` and the deviation `U₁^{⊗d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonFamily {
    pub spec: EpsilonGameSpec,
    pub base_p: Vec<Vec<f64>>,
    pub base_unitary: Matrix,
}

/// ε defaults to the root of `d = 4ε⁻² ln(1/ε)`.
pub fn epsilon_additive_family(d: usize, epsilon: Option<f64>) -> Result<EpsilonFamily> {
    if d == 0 {
        return Err(Error::InvalidArgument("depth must be positive".into()));
    }
    let e = epsilon.unwrap_or_else(|| epsilon_for_depth(d));
    if !(e > 0.0 && e < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("epsilon {e} outside (0, π/2)")));
    }
    let (s, c) = (e.sin(), e.cos());
    Ok(EpsilonFamily {
        spec: EpsilonGameSpec::new(d, e),
        base_p: vec![vec![s * s, c * c * s * s], vec![0.0, c.powi(4)]],
        base_unitary: Matrix::from_real_rows(&[vec![c, -s], vec![s, c]]),
    })
}

impl EpsilonFamily {
    pub fn base_game(&self) -> Result<Game> {
        identity_game(2)
    }

    pub fn base_distribution(&self) -> Result<JointDistribution> {
        JointDistribution::from_matrix(&self.base_p)
    }

    /// Dense game of size `2^d × 2^d`; bounded by the joint-strategy cap.
    pub fn game(&self) -> Result<Game> {
        identity_game(1 << self.spec.d.min(usize::BITS as usize - 1))
    }

    /// `P^{⊗d}` as a dense distribution.
    pub fn distribution(&self) -> Result<JointDistribution> {
        let p = kron_power(&Matrix::from_real_rows(&self.base_p), self.spec.d)?;
        JointDistribution::from_matrix(&p.to_real_rows())
    }

    /// `U₁^{⊗d}`.
    pub fn unitary(&self) -> Result<Matrix> {
        kron_power(&self.base_unitary, self.spec.d)
    }

    /// Player 1's payoffs on `|ψ(P)⟩` and `(U₁ ⊗ I)|ψ(P)⟩` in the base game.
    pub fn simulate_base(&self) -> Result<Simulated> {
        let g = self.base_game()?;
        let psi = superposition_state(&self.base_distribution()?);
        let old = pure_utility(&g, &psi)?[0];
        let new = pure_utility(&g, &psi.apply_unitary(0, &self.base_unitary)?)?[0];
        Ok(Simulated { old, new })
    }

    /// Tensor structure: state, deviation and utility all factor over the `d` copies,
    /// so each payoff is the `d`-th power of the simulated base payoff.
    pub fn simulate_factored(&self) -> Result<Simulated> {
        let b = self.simulate_base()?;
        let d = self.spec.d as i32;
        Ok(Simulated {
            old: b.old.powi(d),
            new: b.new.powi(d),
        })
    }

    /// Full state-vector simulation over `4^d` amplitudes (up to [`STATEVECTOR_CAP`]).
    pub fn simulate_statevector(&self) -> Result<Simulated> {
        let d = self.spec.d;
        let side = 1usize << d;
        if side.saturating_mul(side) > STATEVECTOR_CAP || d >= 32 {
            return Err(Error::CapExceeded {
                what: "state vector amplitudes",
                requested: side.saturating_mul(side),
                cap: STATEVECTOR_CAP,
            });
        }
        let sq: Vec<Vec<f64>> = self.base_p.iter().map(|r| r.iter().map(|x| x.sqrt()).collect()).collect();
        let bit = |x: usize, k: usize| (x >> (d - 1 - k)) & 1;
        let mut amp = vec![0.0f64; side * side];
        for x in 0..side {
            for y in 0..side {
                amp[x * side + y] = (0..d).map(|k| sq[bit(x, k)][bit(y, k)]).product();
            }
        }
        let payoff = |a: &[f64]| -> f64 { (0..side).map(|x| a[x * side + x].powi(2)).sum() };
        let old = payoff(&amp);
        let u = &self.base_unitary;
        let (u00, u01, u10, u11) = (u[(0, 0)].re, u[(0, 1)].re, u[(1, 0)].re, u[(1, 1)].re);
        for k in 0..d {
            let mask = 1usize << (d - 1 - k);
            for x0 in (0..side).filter(|x| x & mask == 0) {
                let x1 = x0 | mask;
                for y in 0..side {
                    let (a0, a1) = (amp[x0 * side + y], amp[x1 * side + y]);
                    amp[x0 * side + y] = u00 * a0 + u01 * a1;
                    amp[x1 * side + y] = u10 * a0 + u11 * a1;
                }
            }
        }
        Ok(Simulated {
            old,
            new: payoff(&amp),
        })
    }

    /// State-vector simulation when it fits, otherwise the factored form.
    pub fn simulate(&self) -> Result<Simulated> {
        match self.simulate_statevector() {
            Err(Error::CapExceeded { .. }) => self.simulate_factored(),
            other => other,
        }
    }
}

/// Parameters and predictions of the `c × c` cyclic family at depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclicGameSpec {
    pub c: usize,
    pub d: usize,
    /// `1/(c − 1)` per copy.
    pub base_utility: f64,
    /// `4(c − 1)/c²` per copy.
    pub base_new_utility: f64,
    /// `(4(c − 1)²/c²)^d`.
    pub predicted_ratio: f64,
}

impl CyclicGameSpec {
    pub fn new(c: usize, d: usize) -> Self {
        let cf = c as f64;
        Self {
            c,
            d,
            base_utility: 1.0 / (cf - 1.0),
            base_new_utility: 4.0 * (cf - 1.0) / (cf * cf),
            predicted_ratio: (4.0 * (cf - 1.0).powi(2) / (cf * cf)).powi(d as i32),
        }
    }

    /// `log_c` of the per-copy ratio: the incentive grows as `n^exponent` in the game size `n`.
    pub fn exponent(&self) -> f64 {
        let cf = self.c as f64;
        (4.0 * (cf - 1.0).powi(2) / (cf * cf)).ln() / cf.ln()
    }
}

/// `(I_c^{⊗d}, J_c^{⊗d})` with the cyclic CE and its POVM deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFamily {
    pub spec: CyclicGameSpec,
    pub base_p: Vec<Vec<f64>>,
    /// Row `i` is the vector `|ψ_i⟩` with `E_i = |ψ_i⟩⟨ψ_i|`.
    pub base_vectors: Vec<Vec<f64>>,
}

pub fn cyclic_multiplicative_family(c: usize, d: usize) -> Result<CyclicFamily> {
    if c < 3 || d == 0 {
        return Err(Error::InvalidArgument("need c ≥ 3 and d ≥ 1".into()));
    }
    let side = (c as u64).checked_pow(d as u32).unwrap_or(u64::MAX);
    if side > 64 {
        return Err(Error::CapExceeded {
            what: "cyclic game side",
            requested: side as usize,
            cap: 64,
        });
    }
    let cf = c as f64;
    let w = 1.0 / (cf * cf - cf);
    let base_p = (0..c)
        .map(|i| (0..c).map(|j| if (i + c - j) % c == 1 { 0.0 } else { w }).collect())
        .collect();
    let base_vectors = (0..c)
        .map(|i| {
            (0..c)
                .map(|k| if (k + c - i) % c == 1 { (2.0 - cf) / cf } else { 2.0 / cf })
                .collect()
        })
        .collect();
    Ok(CyclicFamily {
        spec: CyclicGameSpec::new(c, d),
        base_p,
        base_vectors,
    })
}

impl CyclicFamily {
    pub fn side(&self) -> usize {
        self.spec.c.pow(self.spec.d as u32)
    }

    pub fn game(&self) -> Result<Game> {
        identity_game(self.side())
    }

    pub fn p_matrix(&self) -> Result<Vec<Vec<f64>>> {
        Ok(kron_power(&Matrix::from_real_rows(&self.base_p), self.spec.d)?.to_real_rows())
    }

    pub fn distribution(&self) -> Result<JointDistribution> {
        JointDistribution::from_matrix(&self.p_matrix()?)
    }

    /// `{E_i}^{⊗d}` with `E_i = |ψ_i⟩⟨ψ_i|`.
    pub fn povm(&self) -> Result<Povm> {
        let base = Matrix::from_real_rows(&self.base_vectors);
        let vs = kron_power(&base, self.spec.d)?;
        let n = vs.rows();
        let elements = (0..n)
            .map(|t| {
                let v: Vec<Complex64> = vs.row(t).to_vec();
                Matrix::outer(&v, &v)
            })
            .collect();
        Povm::new(elements)
    }

    /// Player 1's payoff before and after measuring the POVM on `|ψ(P^{⊗d})⟩`.
    pub fn simulate(&self) -> Result<Simulated> {
        let p = self.p_matrix()?;
        let a = identity_rows(self.side());
        let old = (0..self.side()).map(|i| p[i][i]).sum();
        let new = povm_payoff(&a, &p, &self.povm()?)?;
        Ok(Simulated { old, new })
    }
}

/// The Nash equilibrium whose superposition-like state gives the extreme incentive.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierInstance {
    pub n: usize,
    pub permutation: Vec<usize>,
    pub game: Game,
    /// Uniform factors of the product equilibrium.
    pub nash_factors: Vec<Vec<f64>>,
    /// `(F ⊗ I) n^{−1/2} Σ_s |π(s), s⟩`.
    pub state: PureState,
    /// The inverse Fourier transform `F*` on player 1.
    pub deviation: Matrix,
}

/// Discrete Fourier transform `F[j, k] = ω^{jk}/√n`.
pub fn fourier_matrix(n: usize) -> Matrix {
    let norm = 1.0 / (n as f64).sqrt();
    Matrix::from_fn(n, n, |j, k| {
        let ang = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(norm, ang)
    })
}

/// Player 1 earns 1 iff `s_1 = π(s_2)`; player 2 always earns 1. `π` defaults to the identity.
pub fn fourier_counterexample(n: usize, permutation: Option<Vec<usize>>) -> Result<FourierInstance> {
    if !(1..=64).contains(&n) {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..=64")));
    }
    let pi = permutation.unwrap_or_else(|| (0..n).collect());
    let mut seen = vec![false; n];
    if pi.len() != n || pi.iter().any(|&x| x >= n || std::mem::replace(&mut seen[x], true)) {
        return Err(Error::InvalidArgument("not a permutation".into()));
    }
    let u1: Vec<f64> = (0..n * n).map(|j| f64::from(j / n == pi[j % n])).collect();
    let game = Game::new(vec![n, n], vec![u1, vec![1.0; n * n]])?;
    let h = 1.0 / (n as f64).sqrt();
    let mut prime = vec![Complex64::new(0.0, 0.0); n * n];
    for s in 0..n {
        prime[pi[s] * n + s] = Complex64::new(h, 0.0);
    }
    let f = fourier_matrix(n);
    let before = PureState::new(vec![n, n], prime)?;
    let state = before.apply_unitary(0, &f)?;
    Ok(FourierInstance {
        n,
        permutation: pi,
        game,
        nash_factors: vec![vec![1.0 / n as f64; n]; 2],
        state,
        deviation: f.adjoint(),
    })
}

/// Tensor product of two pure states with matching player counts, in the
/// strategy order of [`crate::game_core::tensor_game`].
pub fn tensor_states(a: &PureState, b: &PureState) -> Result<PureState> {
    if a.dims().len() != b.dims().len() {
        return Err(Error::ShapeMismatch("tensor product needs equal player counts".into()));
    }
    let dims: Vec<usize> = a.dims().iter().zip(b.dims()).map(|(x, y)| x * y).collect();
    let k = dims.len();
    let coords = |j: usize, ds: &[usize]| -> Vec<usize> {
        let mut out = vec![0; ds.len()];
        let mut r = j;
        for i in (0..ds.len()).rev() {
            out[i] = r % ds[i];
            r /= ds[i];
        }
        out
    };
    let total: usize = dims.iter().product();
    let mut amps = vec![Complex64::new(0.0, 0.0); total];
    for (ja, za) in a.amplitudes().iter().enumerate() {
        let ca = coords(ja, a.dims());
        for (jb, zb) in b.amplitudes().iter().enumerate() {
            let cb = coords(jb, b.dims());
            let mut idx = 0;
            for i in 0..k {
                idx = idx * dims[i] + ca[i] * b.dims()[i] + cb[i];
            }
            amps[idx] = za * zb;
        }
    }
    PureState::new(dims, amps)
}

/// Dirichlet(1, …, 1) sample over a joint strategy space.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> Result<JointDistribution> {
    let n: usize = shape.iter().product();
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    JointDistribution::new(shape.to_vec(), w.into_iter().map(|x: f64| x / total).collect())
}

/// A random distribution together with a game in which it is a correlated equilibrium.
pub fn random_ce<R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> Result<(Game, JointDistribution)> {
    let p = random_distribution(rng, shape)?;
    Ok((game_from_correlation(&p), p))
}

/// Payoffs uniform on `[0, 1]`.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, counts: &[usize]) -> Result<Game> {
    let n: usize = counts.iter().product();
    let utilities = (0..counts.len())
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    Game::new(counts.to_vec(), utilities)
}

/// A normalized game with a full-support mixed Nash equilibrium: each player's
/// payoffs are shifted per strategy until all strategies earn the same against
/// the others' mixtures.
pub fn random_nash<R: Rng + ?Sized>(rng: &mut R, counts: &[usize]) -> Result<(Game, Vec<Vec<f64>>)> {
    let factors: Vec<Vec<f64>> = counts
        .iter()
        .map(|&n| {
            let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(|x: f64| x / t).collect()
        })
        .collect();
    let raw = random_game(rng, counts)?;
    let p = JointDistribution::product(&factors)?;
    let space = raw.space().clone();
    let probs = p.probabilities();
    let mut utilities = Vec::with_capacity(counts.len());
    for (i, fi) in factors.iter().enumerate() {
        let mut u = raw.utilities(i).to_vec();
        for (s, &w) in fi.iter().enumerate() {
            let js: Vec<usize> = space.slice(i, s).collect();
            let e: f64 = js.iter().map(|&j| probs[j] * u[j]).sum::<f64>() / w;
            for j in js {
                u[j] -= e;
            }
        }
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        utilities.push(u.into_iter().map(|x| ((x - lo) / span).clamp(0.0, 1.0)).collect());
    }
    Ok((Game::new(counts.to_vec(), utilities)?, factors))
}

/// A random density state whose diagonal is `p`: `ρ[s, s′] = √(p_s p_{s′}) ⟨v_s, v_{s′}⟩`
/// with random unit vectors `v_s ∈ C^k`.
pub fn random_state_with_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    p: &JointDistribution,
    k: usize,
) -> Result<DensityState> {
    let vs: Vec<Vec<Complex64>> = p
        .probabilities()
        .iter()
        .map(|_| {
            let v: Vec<Complex64> = (0..k.max(1))
                .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect();
            let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect();
    let sq: Vec<f64> = p.probabilities().iter().map(|x| x.sqrt()).collect();
    let n = sq.len();
    let mut m = Matrix::from_fn(n, n, |a, b| {
        let ip: Complex64 = vs[a].iter().zip(&vs[b]).map(|(x, y)| x * y.conj()).sum();
        ip * sq[a] * sq[b]
    });
    for i in 0..n {
        m[(i, i)] = Complex64::new(p.probabilities()[i], 0.0);
    }
    DensityState::new(p.shape().to_vec(), m.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::{check_correlated, check_nash, expected_utility};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_tables() {
        let t = canonical("traffic_light").unwrap();
        assert_eq!(t.game.payoff_matrix(0).unwrap(), vec![vec![-100.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(t.game.payoff_matrix(1).unwrap(), vec![vec![-100.0, 0.0], vec![1.0, 0.0]]);
        let b = canonical("battle_of_sexes").unwrap();
        assert!(check_correlated(&b.game, b.ce.as_ref().unwrap(), 0.0).unwrap().verdict);
        let l = canonical("load_balancing_8").unwrap();
        assert_eq!(l.game.strategy_counts(), &[8, 8]);
        assert!(check_correlated(&l.game, l.ce.as_ref().unwrap(), 0.0).unwrap().verdict);
        assert!(matches!(canonical("prisoners"), Err(Error::UnknownConstruction(_))));
        assert!(canonical("load_balancing_x").is_err());
    }

    #[test]
    fn epsilon_base_matches_closed_forms() {
        let f = epsilon_additive_family(1, Some(PI / 6.0)).unwrap();
        let s = f.simulate_base().unwrap();
        assert!((s.old - 13.0 / 16.0).abs() < 1e-15);
        assert!((s.new - 15.0 / 16.0).abs() < 1e-15);
        assert!(check_correlated(&f.base_game().unwrap(), &f.base_distribution().unwrap(), 0.0)
            .unwrap()
            .verdict);
    }

    #[test]
    fn epsilon_simulations_agree() {
        for d in 1..=5 {
            let f = epsilon_additive_family(d, Some(0.4)).unwrap();
            let sv = f.simulate_statevector().unwrap();
            let fa = f.simulate_factored().unwrap();
            assert!((sv.old - fa.old).abs() < 1e-12 && (sv.new - fa.new).abs() < 1e-12, "d={d}");
            assert!((sv.new - f.spec.predicted_new).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_root_solves_equation() {
        for d in [4, 8, 12, 16] {
            let e = epsilon_for_depth(d);
            let lhs = 4.0 * (1.0 / e).ln() / (e * e);
            assert!((lhs - d as f64).abs() < 1e-9, "d={d} eps={e}");
        }
    }

    #[test]
    fn cyclic_base_numbers() {
        let f = cyclic_multiplicative_family(4, 1).unwrap();
        let s = f.simulate().unwrap();
        assert!((s.old - 1.0 / 3.0).abs() < 1e-14);
        assert!((s.new - 0.75).abs() < 1e-12);
        assert!((f.spec.exponent() - (3f64.log2() - 1.0)).abs() < 1e-12);
        assert!(check_correlated(&f.game().unwrap(), &f.distribution().unwrap(), 1e-12)
            .unwrap()
            .verdict);
        assert!(cyclic_multiplicative_family(2, 1).is_err());
        assert!(cyclic_multiplicative_family(3, 4).is_err());
    }

    #[test]
    fn fourier_state_is_uniform_nash() {
        let inst = fourier_counterexample(4, Some(vec![2, 0, 3, 1])).unwrap();
        for q in inst.state.probabilities() {
            assert!((q - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!(check_nash(&inst.game, &inst.nash_factors, 1e-12).unwrap().verdict);
        let back = inst.state.apply_unitary(0, &inst.deviation).unwrap();
        assert!((pure_utility(&inst.game, &back).unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_generators_are_equilibria() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (g, p) = random_ce(&mut rng, &[3, 4]).unwrap();
            assert!(check_correlated(&g, &p, 0.0).unwrap().verdict);
            let (g, f) = random_nash(&mut rng, &[3, 2, 2]).unwrap();
            assert!(g.is_normalized());
            assert!(check_nash(&g, &f, 1e-12).unwrap().verdict);
        }
    }

    #[test]
    fn random_state_has_requested_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_distribution(&mut rng, &[2, 3]).unwrap();
        let rho = random_state_with_diagonal(&mut rng, &p, 3).unwrap();
        for (a, b) in rho.diagonal().iter().zip(p.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tensor_state_utility_multiplies() {
        let f = epsilon_additive_family(1, Some(0.3)).unwrap();
        let psi = superposition_state(&f.base_distribution().unwrap());
        let both = tensor_states(&psi, &psi).unwrap();
        let g2 = crate::game_core::tensor_game(&f.base_game().unwrap(), &f.base_game().unwrap()).unwrap();
        let u = pure_utility(&g2, &both).unwrap()[0];
        let u1 = expected_utility(&f.base_game().unwrap(), &f.base_distribution().unwrap()).unwrap()[0];
        assert!((u - u1 * u1).abs() < 1e-14);
    }
}
