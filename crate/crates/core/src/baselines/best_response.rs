//! Best responses against fixed atomic mixtures: exhaustive lattice search
//! followed by local gradient polish in parameter space.

use crate::error::{invalid, numerical, Error, Result};
use crate::game::Game;
use crate::metagame::MixedStrategy;
use crate::parallel;
use crate::space::ActionSpace;

/// Largest action dimension searched exhaustively.
pub const MAX_GRID_DIM: usize = 3;

/// A player's expected utility against the other players' atomic mixtures.
pub struct ResponseObjective<'a> {
    game: &'a dyn Game,
    player: usize,
    /// Opponent joint atoms (one entry per player, `player`'s slot unused) and their probability.
    combos: Vec<(Vec<&'a [f64]>, f64)>,
}

impl<'a> ResponseObjective<'a> {
    pub fn new(game: &'a dyn Game, profile: &'a [MixedStrategy], player: usize) -> Result<Self> {
        if player >= game.players() {
            return Err(invalid(format!("player {player} out of range")));
        }
        if profile.len() != game.players() {
            return Err(invalid(format!(
                "profile has {} strategies, game has {} players",
                profile.len(),
                game.players()
            )));
        }
        for (i, (s, space)) in profile.iter().zip(game.spaces()).enumerate() {
            s.validate(space)
                .map_err(|e| invalid(format!("player {i}: {e}")))?;
        }
        let own: &[f64] = &profile[player].atoms[0];
        let mut combos: Vec<(Vec<&[f64]>, f64)> = vec![(Vec::new(), 1.0)];
        for (i, s) in profile.iter().enumerate() {
            let mut next = Vec::with_capacity(combos.len() * s.len());
            for (joint, p) in &combos {
                if i == player {
                    let mut j = joint.clone();
                    j.push(own);
                    next.push((j, *p));
                    continue;
                }
                for (a, &q) in s.atoms.iter().zip(&s.probs) {
                    if q == 0.0 {
                        continue;
                    }
                    let mut j = joint.clone();
                    j.push(a.as_slice());
                    next.push((j, p * q));
                }
            }
            combos = next;
        }
        Ok(ResponseObjective {
            game,
            player,
            combos,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.game.spaces()[self.player]
    }

    /// Expected utility of playing `action`.
    pub fn value(&self, action: &[f64]) -> f64 {
        let mut u = vec![0.0; self.game.players()];
        let mut joint: Vec<&[f64]> = Vec::with_capacity(self.game.players());
        let mut total = 0.0;
        for (combo, p) in &self.combos {
            joint.clear();
            joint.extend_from_slice(combo);
            joint[self.player] = action;
            self.game.utility_into(&joint, &mut u);
            total += p * u[self.player];
        }
        total
    }

    /// Expected utility of the player's own mixture in `profile`.
    pub fn mixture_value(&self, own: &MixedStrategy) -> f64 {
        own.atoms
            .iter()
            .zip(&own.probs)
            .map(|(a, p)| p * self.value(a))
            .sum()
    }

    /// Gradient of [`value`](Self::value) with respect to the action.
    pub fn gradient(&self, action: &[f64]) -> Vec<f64> {
        let d = self.space().action_dim();
        let mut g = vec![0.0; d];
        let mut gi = vec![0.0; d];
        let mut joint: Vec<&[f64]> = Vec::with_capacity(self.game.players());
        for (combo, p) in &self.combos {
            joint.clear();
            joint.extend_from_slice(combo);
            joint[self.player] = action;
            self.game.gradient_into(&joint, self.player, &mut gi);
            for (a, b) in g.iter_mut().zip(&gi) {
                *a += p * b;
            }
        }
        g
    }
}

/// Number of points of the search lattice over `space` at `resolution`.
pub fn grid_len(space: &ActionSpace, resolution: usize) -> Result<usize> {
    if space.action_dim() > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!(
            "grid search over {}-dimensional actions; use refine_best_response from a chosen start",
            space.action_dim()
        )));
    }
    if resolution < 2 {
        return Err(invalid("grid resolution must be at least 2"));
    }
    Ok(match space {
        ActionSpace::Box { lower, .. } => resolution.pow(lower.len() as u32),
        // compositions of `resolution` into k parts
        ActionSpace::Simplex { cardinality } => {
            binomial(resolution + cardinality - 1, cardinality - 1)
        }
        ActionSpace::UnitCircle => resolution,
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Lattice point `index` of the search grid (see [`grid_len`]).
///
/// Box grids include both bounds; simplex grids are all points `c / resolution`
/// with `c` a composition of `resolution`; circle grids are equally spaced angles
/// starting at angle 0.
pub fn grid_point(space: &ActionSpace, resolution: usize, mut index: usize) -> Vec<f64> {
    match space {
        ActionSpace::Box { lower, upper } => {
            let d = lower.len();
            let mut out = vec![0.0; d];
            for k in (0..d).rev() {
                let m = index % resolution;
                index /= resolution;
                out[k] = if m == resolution - 1 {
                    upper[k]
                } else {
                    lower[k] + (upper[k] - lower[k]) * m as f64 / (resolution - 1) as f64
                };
            }
            out
        }
        ActionSpace::Simplex { cardinality } => {
            // Unrank compositions in lexicographic order of the leading parts.
            let k = *cardinality;
            let mut out = vec![0.0; k];
            let mut remaining = resolution;
            for (slot, o) in out.iter_mut().enumerate().take(k - 1) {
                let rest = k - slot - 1;
                let mut c = 0;
                loop {
                    let block = binomial(remaining - c + rest - 1, rest - 1);
                    if index < block {
                        break;
                    }
                    index -= block;
                    c += 1;
                }
                *o = c as f64 / resolution as f64;
                remaining -= c;
            }
            out[k - 1] = remaining as f64 / resolution as f64;
            out
        }
        ActionSpace::UnitCircle => {
            let theta = std::f64::consts::TAU * index as f64 / resolution as f64;
            vec![theta.cos(), theta.sin()]
        }
    }
}

/// Best lattice point against `opponents` (lowest index on ties).
pub fn grid_best_response(
    game: &dyn Game,
    opponents: &[MixedStrategy],
    player: usize,
    resolution: usize,
) -> Result<(Vec<f64>, f64)> {
    let objective = ResponseObjective::new(game, opponents, player)?;
    grid_search(&objective, resolution)
}

pub(crate) fn grid_search(
    objective: &ResponseObjective<'_>,
    resolution: usize,
) -> Result<(Vec<f64>, f64)> {
    let space = objective.space();
    let len = grid_len(space, resolution)?;
    let values = parallel::map_range(len, |i| objective.value(&grid_point(space, resolution, i)));
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(numerical(
                0,
                format!("non-finite utility at grid point {i}"),
            ));
        }
        if *v > values[best] {
            best = i;
        }
    }
    Ok((grid_point(space, resolution, best), values[best]))
}

/// Gradient ascent on expected utility in squeezed parameter space, starting
/// from the preimage of `start`. The stepsize halves whenever a step fails
/// to improve. Returns the best visited action and its value.
pub fn refine_best_response(
    game: &dyn Game,
    opponents: &[MixedStrategy],
    player: usize,
    start: &[f64],
    steps: usize,
    stepsize: f64,
) -> Result<(Vec<f64>, f64)> {
    let objective = ResponseObjective::new(game, opponents, player)?;
    refine(&objective, start, steps, stepsize)
}

pub(crate) fn refine(
    objective: &ResponseObjective<'_>,
    start: &[f64],
    steps: usize,
    stepsize: f64,
) -> Result<(Vec<f64>, f64)> {
    if !(stepsize > 0.0) {
        return Err(invalid("refine stepsize must be positive"));
    }
    let space = objective.space();
    space.validate(start)?;
    let start_value = objective.value(start);
    let mut best = (start.to_vec(), start_value);
    if steps == 0 {
        return Ok(best);
    }
    let mut params = space.unsqueeze(start)?;
    let mut action = space.squeeze(&params)?;
    let mut value = objective.value(&action);
    let mut pgrad = vec![0.0; params.len()];
    let mut lr = stepsize;
    for step in 0..steps {
        let g = objective.gradient(&action);
        space.vjp_with_action(&params, &action, &g, &mut pgrad);
        if pgrad.iter().any(|v| !v.is_finite()) {
            return Err(numerical(step, "non-finite best-response gradient"));
        }
        let trial: Vec<f64> = params.iter().zip(&pgrad).map(|(p, g)| p + lr * g).collect();
        let trial_action = space.squeeze(&trial)?;
        let trial_value = objective.value(&trial_action);
        if trial_value > value {
            params = trial;
            action = trial_action;
            value = trial_value;
            if value > best.1 {
                best = (action.clone(), value);
            }
        } else {
            lr *= 0.5;
            if lr < 1e-12 * stepsize {
                break;
            }
        }
    }
    Ok(best)
}
