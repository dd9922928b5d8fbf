//! The finite metagame induced by the current supports: expected payoffs,
//! regrets, exploitability and their gradients, all by exact enumeration of
//! joint meta-actions.

use crate::error::{invalid, Result};
use crate::game::Game;
use crate::games::FiniteGame;
use crate::math;
use crate::parallel;
use crate::space::{ActionSpace, MEMBERSHIP_TOL};

/// Per-player matrices of unconstrained parameters; row `j` of player `i`
/// squeezes to that player's `j`-th support action.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    spaces: Vec<ActionSpace>,
    sizes: Vec<usize>,
    params: Vec<Vec<f64>>,
}

impl SupportProfile {
    /// `params[i]` holds `sizes[i]` rows of `spaces[i].param_dim()` entries, row-major.
    pub fn new(spaces: Vec<ActionSpace>, sizes: Vec<usize>, params: Vec<Vec<f64>>) -> Result<Self> {
        if spaces.len() != sizes.len() || spaces.len() != params.len() || spaces.is_empty() {
            return Err(invalid("support profile needs one entry per player"));
        }
        for (i, ((s, &n), p)) in spaces.iter().zip(&sizes).zip(&params).enumerate() {
            if n == 0 {
                return Err(invalid(format!("player {i} has an empty support")));
            }
            if p.len() != n * s.param_dim() {
                return Err(invalid(format!(
                    "player {i}: {} parameters for {n} rows of dimension {}",
                    p.len(),
                    s.param_dim()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!(
                    "player {i} has non-finite support parameters"
                )));
            }
        }
        Ok(SupportProfile {
            spaces,
            sizes,
            params,
        })
    }

    /// Builds a profile whose rows squeeze to the given actions.
    pub fn from_actions(spaces: Vec<ActionSpace>, actions: &[Vec<Vec<f64>>]) -> Result<Self> {
        if actions.len() != spaces.len() {
            return Err(invalid("support profile needs one entry per player"));
        }
        let mut params = Vec::with_capacity(spaces.len());
        for (space, rows) in spaces.iter().zip(actions) {
            let mut p = Vec::new();
            for a in rows {
                p.extend(space.unsqueeze(a)?);
            }
            params.push(p);
        }
        let sizes = actions.iter().map(Vec::len).collect();
        Self::new(spaces, sizes, params)
    }

    pub fn players(&self) -> usize {
        self.spaces.len()
    }

    pub fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self, player: usize) -> &[f64] {
        &self.params[player]
    }

    pub fn params_mut(&mut self, player: usize) -> &mut [f64] {
        &mut self.params[player]
    }

    pub fn row(&self, player: usize, j: usize) -> &[f64] {
        let d = self.spaces[player].param_dim();
        &self.params[player][j * d..(j + 1) * d]
    }

    /// Squeezed action of row `j` of `player`.
    pub fn action(&self, player: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.spaces[player].action_dim()];
        self.spaces[player].squeeze_into(self.row(player, j), &mut out);
        out
    }

    /// All squeezed actions, per player and row.
    pub fn actions(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.players())
            .map(|i| (0..self.sizes[i]).map(|j| self.action(i, j)).collect())
            .collect()
    }

    pub fn check_game(&self, game: &dyn Game) -> Result<()> {
        if self.spaces.as_slice() != game.spaces() {
            return Err(invalid(format!(
                "support profile does not match the spaces of game '{}'",
                game.name()
            )));
        }
        Ok(())
    }
}

/// Logit standing for an exactly-zero weight (far below `ln(f64::MIN_POSITIVE)`).
pub const ZERO_WEIGHT_LOGIT: f64 = -1e4;

/// Per-player logits; the mixing weights are their softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaStrategy {
    logits: Vec<Vec<f64>>,
}

impl MetaStrategy {
    pub fn new(logits: Vec<Vec<f64>>) -> Result<Self> {
        if logits.iter().any(|l| l.is_empty()) {
            return Err(invalid("every player needs at least one logit"));
        }
        if logits.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("logits must be finite"));
        }
        Ok(MetaStrategy { logits })
    }

    /// All-zero logits, i.e. uniform weights.
    pub fn uniform(sizes: &[usize]) -> Self {
        MetaStrategy {
            logits: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Logits reproducing the given weights. Zero weights map to
    /// [`ZERO_WEIGHT_LOGIT`], whose softmax weight underflows to exactly zero.
    pub fn from_weights(weights: &[Vec<f64>]) -> Result<Self> {
        for w in weights {
            if w.iter().any(|&v| !(v >= 0.0 && v.is_finite()))
                || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(invalid("weights must be nonnegative and sum to 1"));
            }
        }
        Self::new(
            weights
                .iter()
                .map(|w| {
                    w.iter()
                        .map(|&v| if v > 0.0 { v.ln() } else { ZERO_WEIGHT_LOGIT })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn logits(&self) -> &[Vec<f64>] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.logits
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.logits.iter().map(|z| math::softmax(z)).collect()
    }

    pub fn check_sizes(&self, sizes: &[usize]) -> Result<()> {
        if self.logits.len() != sizes.len()
            || self.logits.iter().zip(sizes).any(|(z, &n)| z.len() != n)
        {
            return Err(invalid("meta-strategy shape does not match the supports"));
        }
        Ok(())
    }
}

/// Finite atomic distribution over a player's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    pub atoms: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(atoms: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(invalid("mixed strategy needs one probability per atom"));
        }
        if probs.iter().any(|&p| !(p >= 0.0))
            || (probs.iter().sum::<f64>() - 1.0).abs() > MEMBERSHIP_TOL
        {
            return Err(invalid("probabilities must be nonnegative and sum to 1"));
        }
        Ok(MixedStrategy { atoms, probs })
    }

    pub fn pure(action: Vec<f64>) -> Self {
        MixedStrategy {
            atoms: vec![action],
            probs: vec![1.0],
        }
    }

    pub fn validate(&self, space: &ActionSpace) -> Result<()> {
        Self::new(self.atoms.clone(), self.probs.clone())?;
        self.atoms.iter().try_for_each(|a| space.validate(a))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Probability-weighted mean action.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.atoms[0].len()];
        for (a, &p) in self.atoms.iter().zip(&self.probs) {
            for (mi, ai) in m.iter_mut().zip(a) {
                *mi += p * ai;
            }
        }
        m
    }
}

/// Strided view of a payoff tensor. Joint index `f` stores player `p`'s
/// utility at `data[f * stride + p]`.
#[derive(Debug, Clone, Copy)]
pub struct PayoffTable<'a> {
    pub counts: &'a [usize],
    pub data: &'a [f64],
    pub stride: usize,
}

impl<'a> From<&'a FiniteGame> for PayoffTable<'a> {
    fn from(g: &'a FiniteGame) -> Self {
        PayoffTable {
            counts: g.counts(),
            data: g.payoffs(),
            stride: g.players(),
        }
    }
}

/// `Σ_{a : a_target = k} Π_{m≠target} w_m[a_m] · data[a·stride + offset .. + dim]` for every `k`.
pub(crate) fn contract_leave_one(
    counts: &[usize],
    weights: &[&[f64]],
    target: usize,
    data: &[f64],
    stride: usize,
    offset: usize,
    dim: usize,
) -> Vec<f64> {
    let n = counts.len();
    let mut out = vec![0.0; counts[target] * dim];
    let joints: usize = counts.iter().product();
    let mut idx = vec![0usize; n];
    for f in 0..joints {
        let mut w = 1.0;
        for m in 0..n {
            if m != target {
                w *= weights[m][idx[m]];
            }
        }
        if w != 0.0 {
            let base = f * stride + offset;
            let o = idx[target] * dim;
            for d in 0..dim {
                out[o + d] += w * data[base + d];
            }
        }
        for m in (0..n).rev() {
            idx[m] += 1;
            if idx[m] < counts[m] {
                break;
            }
            idx[m] = 0;
        }
    }
    out
}

fn as_slices(w: &[Vec<f64>]) -> Vec<&[f64]> {
    w.iter().map(Vec::as_slice).collect()
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = j;
        }
    }
    best
}

impl PayoffTable<'_> {
    pub fn players(&self) -> usize {
        self.counts.len()
    }

    fn check_weights(&self, weights: &[Vec<f64>]) -> Result<()> {
        if weights.len() != self.counts.len()
            || weights.iter().zip(self.counts).any(|(w, &n)| w.len() != n)
        {
            return Err(invalid("weight shapes do not match the payoff tensor"));
        }
        Ok(())
    }

    /// `∂ ū_player / ∂ w_target[k]`: the player's expected payoff with the
    /// target fixed to meta-action `k`.
    pub fn weight_gradient(&self, weights: &[Vec<f64>], player: usize, target: usize) -> Vec<f64> {
        contract_leave_one(
            self.counts,
            &as_slices(weights),
            target,
            self.data,
            self.stride,
            player,
            1,
        )
    }

    /// Largest spread `max − min` of any single player's payoffs.
    pub fn payoff_range(&self) -> f64 {
        (0..self.players())
            .map(|p| {
                let (lo, hi) = self
                    .data
                    .chunks(self.stride)
                    .map(|c| c[p])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Payoff of each of `player`'s pure meta-actions against the others' weights.
    pub fn pure_payoffs(&self, weights: &[Vec<f64>], player: usize) -> Vec<f64> {
        self.weight_gradient(weights, player, player)
    }

    pub fn expected_payoff(&self, weights: &[Vec<f64>], player: usize) -> f64 {
        math::dot(&weights[player], &self.pure_payoffs(weights, player))
    }

    pub fn regrets(&self, weights: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_weights(weights)?;
        Ok((0..self.players())
            .map(|i| {
                let v = self.pure_payoffs(weights, i);
                let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (best - math::dot(&weights[i], &v)).max(0.0)
            })
            .collect())
    }

    /// Sum of regrets (Φ).
    pub fn exploitability(&self, weights: &[Vec<f64>]) -> Result<f64> {
        Ok(self.regrets(weights)?.iter().sum())
    }

    /// A subgradient of Φ with respect to the weights, choosing the
    /// lowest-index best meta-action for each player.
    pub fn exploitability_weight_subgradient(&self, weights: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.check_weights(weights)?;
        let n = self.players();
        let mut grad: Vec<Vec<f64>> = self.counts.iter().map(|&c| vec![0.0; c]).collect();
        let w = as_slices(weights);
        for i in 0..n {
            let v = self.pure_payoffs(weights, i);
            let best = argmax_lowest(&v);
            for (g, vk) in grad[i].iter_mut().zip(&v) {
                *g -= vk;
            }
            let mut delta = vec![0.0; self.counts[i]];
            delta[best] = 1.0;
            let mut substituted = w.clone();
            substituted[i] = &delta;
            for t in (0..n).filter(|&t| t != i) {
                let with_best =
                    contract_leave_one(self.counts, &substituted, t, self.data, self.stride, i, 1);
                let with_mix = contract_leave_one(self.counts, &w, t, self.data, self.stride, i, 1);
                for ((g, a), b) in grad[t].iter_mut().zip(&with_best).zip(&with_mix) {
                    *g += a - b;
                }
            }
        }
        Ok(grad)
    }

    /// Subgradient of Φ with respect to softmax logits whose softmax is `weights`.
    pub fn exploitability_logit_subgradient(&self, weights: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let gw = self.exploitability_weight_subgradient(weights)?;
        Ok(gw
            .iter()
            .zip(weights)
            .map(|(g, w)| {
                let mut out = vec![0.0; w.len()];
                math::softmax_vjp(w, g, &mut out);
                out
            })
            .collect())
    }
}

/// The metagame tensor of a support profile: utilities of every joint
/// meta-action plus, optionally, each player's own-action utility gradient.
#[derive(Debug, Clone)]
pub struct Metagame {
    counts: Vec<usize>,
    /// Squeezed support actions per player and row.
    pub actions: Vec<Vec<Vec<f64>>>,
    data: Vec<f64>,
    stride: usize,
    grad_offsets: Option<Vec<usize>>,
}

impl Metagame {
    /// Evaluates the game at every joint meta-action (`Π n_i` utility calls,
    /// plus one gradient call per player when `with_gradients`).
    pub fn materialize(
        game: &dyn Game,
        supports: &SupportProfile,
        with_gradients: bool,
    ) -> Result<Self> {
        supports.check_game(game)?;
        let players = game.players();
        let counts = supports.sizes().to_vec();
        let actions = supports.actions();
        let mut stride = players;
        let grad_offsets = with_gradients.then(|| {
            game.spaces()
                .iter()
                .map(|s| {
                    let o = stride;
                    stride += s.action_dim();
                    o
                })
                .collect::<Vec<_>>()
        });
        let joints: usize = counts.iter().product();
        let mut data = vec![0.0; joints * stride];
        let probe = FiniteGame::from_parts(counts.clone(), Vec::new());
        parallel::fill_chunks(&mut data, stride, |f, chunk| {
            let idx = probe.unravel(f);
            let joint: Vec<&[f64]> = idx
                .iter()
                .enumerate()
                .map(|(i, &a)| actions[i][a].as_slice())
                .collect();
            let (u, rest) = chunk.split_at_mut(players);
            game.utility_into(&joint, u);
            if let Some(offsets) = &grad_offsets {
                let mut at = 0;
                for (i, space) in game.spaces().iter().enumerate() {
                    debug_assert_eq!(offsets[i] - players, at);
                    let d = space.action_dim();
                    game.gradient_into(&joint, i, &mut rest[at..at + d]);
                    at += d;
                }
            }
        });
        Ok(Metagame {
            counts,
            actions,
            data,
            stride,
            grad_offsets,
        })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn table(&self) -> PayoffTable<'_> {
        PayoffTable {
            counts: &self.counts,
            data: &self.data,
            stride: self.stride,
        }
    }

    /// Finite game holding only the utilities.
    pub fn to_finite(&self) -> FiniteGame {
        let players = self.counts.len();
        let payoffs = self
            .data
            .chunks(self.stride)
            .flat_map(|c| c[..players].iter().copied())
            .collect();
        FiniteGame::from_parts(self.counts.clone(), payoffs)
    }

    /// For each row `j` of `player`: `Σ_{a_-i} Π w · ∇_{s_i} u_i(x_i(j), x_-i(a_-i))`,
    /// flattened `n_player × action_dim`. Requires gradients.
    pub fn pure_action_gradients(
        &self,
        weights: &[Vec<f64>],
        player: usize,
        action_dim: usize,
    ) -> Vec<f64> {
        let offsets = self
            .grad_offsets
            .as_ref()
            .expect("metagame materialized without gradients");
        contract_leave_one(
            &self.counts,
            &as_slices(weights),
            player,
            &self.data,
            self.stride,
            offsets[player],
            action_dim,
        )
    }
}

fn check_state(game: &dyn Game, supports: &SupportProfile, meta: &MetaStrategy) -> Result<()> {
    supports.check_game(game)?;
    meta.check_sizes(supports.sizes())
}

/// Expected payoff of `player` under the product of the mixing weights, by
/// direct enumeration (exactly `Π n_i` utility evaluations).
pub fn meta_payoff(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
    player: usize,
) -> Result<f64> {
    check_state(game, supports, meta)?;
    if player >= game.players() {
        return Err(invalid(format!("player {player} out of range")));
    }
    Ok(enumerate_expectation(
        game,
        supports,
        &meta.weights(),
        player,
    ))
}

fn enumerate_expectation(
    game: &dyn Game,
    supports: &SupportProfile,
    weights: &[Vec<f64>],
    player: usize,
) -> f64 {
    let actions = supports.actions();
    let probe = FiniteGame::from_parts(supports.sizes().to_vec(), Vec::new());
    let joints: usize = supports.sizes().iter().product();
    let mut u = vec![0.0; game.players()];
    let mut total = 0.0;
    for f in 0..joints {
        let idx = probe.unravel(f);
        let w: f64 = idx
            .iter()
            .enumerate()
            .map(|(i, &a)| weights[i][a])
            .product();
        let joint: Vec<&[f64]> = idx
            .iter()
            .enumerate()
            .map(|(i, &a)| actions[i][a].as_slice())
            .collect();
        game.utility_into(&joint, &mut u);
        total += w * u[player];
    }
    total
}

/// [`meta_payoff`] with `player`'s weights replaced by a point mass on meta-action `j`.
pub fn pure_vs_mix(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
    player: usize,
    j: usize,
) -> Result<f64> {
    check_state(game, supports, meta)?;
    if player >= game.players() || j >= supports.sizes()[player] {
        return Err(invalid(format!(
            "meta-action {j} of player {player} out of range"
        )));
    }
    let mut weights = meta.weights();
    weights[player] = vec![0.0; supports.sizes()[player]];
    weights[player][j] = 1.0;
    Ok(enumerate_expectation(game, supports, &weights, player))
}

pub fn meta_regrets(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
) -> Result<Vec<f64>> {
    check_state(game, supports, meta)?;
    let m = Metagame::materialize(game, supports, false)?;
    m.table().regrets(&meta.weights())
}

pub fn meta_exploitability(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
) -> Result<f64> {
    Ok(meta_regrets(game, supports, meta)?.iter().sum())
}

/// `∂ meta_payoff(player) / ∂ w_target`.
pub fn meta_payoff_weight_gradient(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
    player: usize,
    target: usize,
) -> Result<Vec<f64>> {
    check_state(game, supports, meta)?;
    if player >= game.players() || target >= game.players() {
        return Err(invalid("player index out of range"));
    }
    let m = Metagame::materialize(game, supports, false)?;
    Ok(m.table().weight_gradient(&meta.weights(), player, target))
}

/// Subgradient of the metagame exploitability with respect to every player's logits.
pub fn exploitability_logit_subgradient(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
) -> Result<Vec<Vec<f64>>> {
    check_state(game, supports, meta)?;
    let m = Metagame::materialize(game, supports, false)?;
    m.table().exploitability_logit_subgradient(&meta.weights())
}

/// The output mixed strategies: squeezed support rows weighted by the softmax
/// weights. Duplicate atoms are kept separate.
pub fn pushforward(supports: &SupportProfile, meta: &MetaStrategy) -> Result<Vec<MixedStrategy>> {
    meta.check_sizes(supports.sizes())?;
    Ok(supports
        .actions()
        .into_iter()
        .zip(meta.weights())
        .map(|(atoms, probs)| MixedStrategy { atoms, probs })
        .collect())
}
