//! Finite normal-form games stored as dense payoff tensors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Dense payoff tensor over joint pure-action indices.
///
/// Joint indices are row-major with the last player varying fastest; each
/// joint index stores one utility per player.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    counts: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<f64>,
}

impl FiniteGame {
    pub fn new(counts: Vec<usize>, payoffs: Vec<f64>) -> Result<Self> {
        if counts.is_empty() || counts.iter().any(|&c| c == 0) {
            return Err(invalid("every player needs at least one action"));
        }
        let joints: usize = counts.iter().product();
        if payoffs.len() != joints * counts.len() {
            return Err(invalid(format!(
                "payoff tensor has {} entries, expected {}",
                payoffs.len(),
                joints * counts.len()
            )));
        }
        if payoffs.iter().any(|v| !v.is_finite()) {
            return Err(invalid("payoff tensor has non-finite entries"));
        }
        Ok(Self::from_parts(counts, payoffs))
    }

    pub(crate) fn from_parts(counts: Vec<usize>, payoffs: Vec<f64>) -> Self {
        let mut strides = vec![1; counts.len()];
        for i in (0..counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        FiniteGame {
            counts,
            strides,
            payoffs,
        }
    }

    /// Builds a two-player game from row-player and column-player matrices.
    pub fn bimatrix(row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let m = row.len();
        let n = row.first().map_or(0, Vec::len);
        if col.len() != m || row.iter().chain(col).any(|r| r.len() != n) {
            return Err(invalid(
                "bimatrix payoffs must be rectangular and equally shaped",
            ));
        }
        let mut payoffs = Vec::with_capacity(2 * m * n);
        for a in 0..m {
            for b in 0..n {
                payoffs.push(row[a][b]);
                payoffs.push(col[a][b]);
            }
        }
        Self::new(vec![m, n], payoffs)
    }

    /// Two-player zero-sum game from the row player's matrix.
    pub fn zero_sum(row: &[Vec<f64>]) -> Result<Self> {
        let col: Vec<Vec<f64>> = row.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        Self::bimatrix(row, &col)
    }

    pub fn players(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn joint_count(&self) -> usize {
        self.payoffs.len() / self.counts.len()
    }

    /// Raw tensor, `joint_count() × players()` row-major.
    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub fn flat_index(&self, joint: &[usize]) -> usize {
        joint.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let a = flat / s;
                flat %= s;
                a
            })
            .collect()
    }

    pub fn payoff(&self, flat: usize, player: usize) -> f64 {
        self.payoffs[flat * self.counts.len() + player]
    }

    pub fn utilities(&self, joint: &[usize]) -> &[f64] {
        let n = self.counts.len();
        let f = self.flat_index(joint);
        &self.payoffs[f * n..(f + 1) * n]
    }

    /// Common utility sum when every joint action sums to the same value within `tol`.
    pub fn constant_sum(&self, tol: f64) -> Option<f64> {
        let n = self.counts.len();
        let mut chunks = self.payoffs.chunks(n).map(|c| c.iter().sum::<f64>());
        let first = chunks.next()?;
        chunks.all(|s| (s - first).abs() <= tol).then_some(first)
    }

    /// The same game with players reordered: new player `k` is old player `order[k]`.
    pub fn permute_players(&self, order: &[usize]) -> Result<Self> {
        let n = self.players();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&o| o >= n || std::mem::replace(&mut seen[o], true))
        {
            return Err(invalid("order must be a permutation of the players"));
        }
        let counts: Vec<usize> = order.iter().map(|&o| self.counts[o]).collect();
        let mut out = Self::from_parts(counts, vec![0.0; self.payoffs.len()]);
        for flat in 0..self.joint_count() {
            let old = self.unravel(flat);
            let new: Vec<usize> = order.iter().map(|&o| old[o]).collect();
            let nf = out.flat_index(&new);
            for (k, &o) in order.iter().enumerate() {
                out.payoffs[nf * n + k] = self.payoff(flat, o);
            }
        }
        Ok(out)
    }
}

/// Pairwise zero-sum polymatrix game: `u_i(x) = Σ_{j≠i} x_iᵀ A_ij x_j` with `A_ji = −A_ijᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polymatrix {
    pub players: usize,
    pub actions: usize,
    /// `matrices[i][j]` is `A_ij` (row-major `actions × actions`); the diagonal is empty.
    pub matrices: Vec<Vec<Vec<f64>>>,
}

impl Polymatrix {
    pub fn random(players: usize, actions: usize, seed: u64) -> Result<Self> {
        if players < 2 || actions < 2 {
            return Err(invalid(
                "polymatrix games need at least 2 players and 2 actions",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrices = vec![vec![Vec::new(); players]; players];
        for i in 0..players {
            for j in (i + 1)..players {
                let a: Vec<f64> = (0..actions * actions)
                    .map(|_| rng.random_range(-1.0..=1.0))
                    .collect();
                let mut at = vec![0.0; actions * actions];
                for r in 0..actions {
                    for c in 0..actions {
                        at[c * actions + r] = -a[r * actions + c];
                    }
                }
                matrices[i][j] = a;
                matrices[j][i] = at;
            }
        }
        Ok(Polymatrix {
            players,
            actions,
            matrices,
        })
    }

    pub fn entry(&self, i: usize, j: usize, r: usize, c: usize) -> f64 {
        self.matrices[i][j][r * self.actions + c]
    }

    pub fn to_finite(&self) -> FiniteGame {
        let counts = vec![self.actions; self.players];
        let mut game = FiniteGame::from_parts(counts, Vec::new());
        let joints = self.actions.pow(self.players as u32);
        let mut payoffs = Vec::with_capacity(joints * self.players);
        for flat in 0..joints {
            let a = game.unravel(flat);
            for i in 0..self.players {
                let u: f64 = (0..self.players)
                    .filter(|&j| j != i)
                    .map(|j| self.entry(i, j, a[i], a[j]))
                    .sum();
                payoffs.push(u);
            }
        }
        game.payoffs = payoffs;
        game
    }
}

/// Random constant-sum (pairwise zero-sum) polymatrix game as a payoff tensor.
pub fn random_polymatrix(players: usize, actions: usize, seed: u64) -> Result<FiniteGame> {
    Ok(Polymatrix::random(players, actions, seed)?.to_finite())
}
