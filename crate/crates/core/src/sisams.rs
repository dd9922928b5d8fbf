//! Simultaneous incremental support adjustment and metagame solving.
//!
//! Every iteration computes, from the same state, an exploitability
//! subgradient step on the mixing logits and a rank-weighted payoff ascent
//! step on every support row, then applies both at once.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, numerical, Result};
use crate::evaluation::{self, EvalSettings};
use crate::game::Game;
use crate::metagame::{pushforward, MetaStrategy, Metagame, MixedStrategy, SupportProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    InverseDecay,
}

/// Stepsize schedule `base` or `base / (1 + decay·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub base: f64,
    #[serde(default)]
    pub decay: f64,
}

impl Schedule {
    pub fn constant(base: f64) -> Self {
        Schedule {
            kind: ScheduleKind::Constant,
            base,
            decay: 0.0,
        }
    }

    pub fn inverse_decay(base: f64, decay: f64) -> Self {
        Schedule {
            kind: ScheduleKind::InverseDecay,
            base,
            decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base >= 0.0 && self.base.is_finite())
            || !(self.decay >= 0.0 && self.decay.is_finite())
        {
            return Err(invalid(
                "schedule base and decay must be finite and nonnegative",
            ));
        }
        if self.kind == ScheduleKind::Constant && self.decay != 0.0 {
            return Err(invalid("constant schedules must have decay = 0"));
        }
        Ok(())
    }

    /// Stepsize at iteration `t` (0-based).
    pub fn at(&self, t: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.base,
            ScheduleKind::InverseDecay => self.base / (1.0 + self.decay * t as f64),
        }
    }
}

fn default_init_scale() -> f64 {
    1.0
}

/// Solver inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Support size per player.
    pub support_sizes: Vec<usize>,
    /// Stepsize for the mixing logits.
    pub weight_schedule: Schedule,
    /// Stepsize for the support parameters.
    pub support_schedule: Schedule,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    /// Full-game evaluation period; the final iterate is always evaluated.
    pub eval_every: usize,
    /// Full-game evaluation settings; per-space defaults when absent.
    #[serde(default)]
    pub evaluation: Option<EvalSettings>,
}

impl SolverConfig {
    pub fn new(
        support_sizes: Vec<usize>,
        weight_lr: f64,
        support_lr: f64,
        iterations: usize,
    ) -> Self {
        SolverConfig {
            support_sizes,
            weight_schedule: Schedule::constant(weight_lr),
            support_schedule: Schedule::constant(support_lr),
            iterations,
            seed: 0,
            init_scale: 1.0,
            eval_every: iterations.max(1),
            evaluation: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_eval_every(mut self, eval_every: usize) -> Self {
        self.eval_every = eval_every;
        self
    }

    pub fn with_init_scale(mut self, init_scale: f64) -> Self {
        self.init_scale = init_scale;
        self
    }

    pub fn validate(&self, game: &dyn Game) -> Result<()> {
        if self.support_sizes.len() != game.players() {
            return Err(invalid(format!(
                "{} support sizes given for a {}-player game",
                self.support_sizes.len(),
                game.players()
            )));
        }
        if self.support_sizes.contains(&0) {
            return Err(invalid("support sizes must be at least 1"));
        }
        if self.iterations == 0 || self.eval_every == 0 {
            return Err(invalid("iterations and eval_every must be at least 1"));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(invalid("init_scale must be positive"));
        }
        self.weight_schedule.validate()?;
        self.support_schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub supports: SupportProfile,
    pub meta: MetaStrategy,
    pub t: usize,
}

impl SolverState {
    /// Supports drawn from `Normal(0, init_scale²)` in parameter space, uniform weights.
    pub fn initial(game: &dyn Game, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(game)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let normal = Normal::new(0.0, cfg.init_scale).map_err(|e| invalid(e.to_string()))?;
        let params = game
            .spaces()
            .iter()
            .zip(&cfg.support_sizes)
            .map(|(s, &n)| {
                (0..n * s.param_dim())
                    .map(|_| normal.sample(&mut rng))
                    .collect()
            })
            .collect();
        let supports =
            SupportProfile::new(game.spaces().to_vec(), cfg.support_sizes.clone(), params)?;
        Ok(SolverState {
            supports,
            meta: MetaStrategy::uniform(&cfg.support_sizes),
            t: 0,
        })
    }
}

/// Normalized ordinal-rank weights `2 r_j / (m (m + 1))`; the largest value
/// gets rank `m` and ties go to the earlier index first.
pub fn rank_mix_weights(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(invalid("rank mixing needs at least one value"));
    }
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let norm = (m * (m + 1)) as f64 / 2.0;
    let mut weights = vec![0.0; m];
    for (rank0, &j) in order.iter().enumerate() {
        weights[j] = (rank0 + 1) as f64 / norm;
    }
    Ok(weights)
}

/// Rank-weighted mix of `values`.
pub fn rank_mix(values: &[f64]) -> Result<f64> {
    let w = rank_mix_weights(values)?;
    Ok(w.iter().zip(values).map(|(a, b)| a * b).sum())
}

/// Gradient of the rank-weighted mix of `player`'s pure meta-action payoffs
/// with respect to its support parameters, ranks held fixed. Flattened
/// `n_player × param_dim`.
pub fn support_gradient(
    game: &dyn Game,
    supports: &SupportProfile,
    meta: &MetaStrategy,
    player: usize,
) -> Result<Vec<f64>> {
    meta.check_sizes(supports.sizes())?;
    if player >= game.players() {
        return Err(invalid(format!("player {player} out of range")));
    }
    let m = Metagame::materialize(game, supports, true)?;
    Ok(support_gradient_from(
        game,
        supports,
        &m,
        &meta.weights(),
        player,
    ))
}

fn support_gradient_from(
    game: &dyn Game,
    supports: &SupportProfile,
    metagame: &Metagame,
    weights: &[Vec<f64>],
    player: usize,
) -> Vec<f64> {
    let space = &game.spaces()[player];
    let (pd, ad) = (space.param_dim(), space.action_dim());
    let values = metagame.table().pure_payoffs(weights, player);
    let rho = rank_mix_weights(&values).expect("supports are nonempty");
    let action_grads = metagame.pure_action_gradients(weights, player, ad);
    let mut out = vec![0.0; supports.sizes()[player] * pd];
    let mut g = vec![0.0; ad];
    for (j, &r) in rho.iter().enumerate() {
        for (gd, &a) in g.iter_mut().zip(&action_grads[j * ad..(j + 1) * ad]) {
            *gd = r * a;
        }
        space.vjp_with_action(
            supports.row(player, j),
            &metagame.actions[player][j],
            &g,
            &mut out[j * pd..(j + 1) * pd],
        );
    }
    out
}

/// Applies one simultaneous update and returns the metagame exploitability
/// of the pre-step state.
fn advance(game: &dyn Game, state: &mut SolverState, cfg: &SolverConfig) -> Result<f64> {
    let t = state.t;
    let metagame = Metagame::materialize(game, &state.supports, true)?;
    let weights = state.meta.weights();
    let table = metagame.table();
    let phi = table.exploitability(&weights)?;
    let logit_grad = table.exploitability_logit_subgradient(&weights)?;
    let support_grads: Vec<Vec<f64>> = (0..game.players())
        .map(|i| support_gradient_from(game, &state.supports, &metagame, &weights, i))
        .collect();
    if logit_grad
        .iter()
        .chain(&support_grads)
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(numerical(t, "non-finite gradient"));
    }
    let (alpha, beta) = (cfg.weight_schedule.at(t), cfg.support_schedule.at(t));
    for (z, g) in state.meta.logits_mut().iter_mut().zip(&logit_grad) {
        for (zi, gi) in z.iter_mut().zip(g) {
            *zi -= alpha * gi;
        }
    }
    for (i, g) in support_grads.iter().enumerate() {
        for (p, gi) in state.supports.params_mut(i).iter_mut().zip(g) {
            *p += beta * gi;
        }
    }
    state.t += 1;
    Ok(phi)
}

/// One solver iteration from `state`.
pub fn sisams_step(
    game: &dyn Game,
    state: &SolverState,
    cfg: &SolverConfig,
) -> Result<SolverState> {
    state.supports.check_game(game)?;
    state.meta.check_sizes(state.supports.sizes())?;
    let mut next = state.clone();
    advance(game, &mut next, cfg)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phi_meta: f64,
    pub phi_full: Option<f64>,
    pub psi_full: Option<f64>,
    pub elapsed_seconds: f64,
}

/// Per-iteration solver metrics; iteration 0 is the initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    /// Last record carrying a full-game evaluation.
    pub fn final_full(&self) -> Option<&TraceRecord> {
        self.records.iter().rev().find(|r| r.phi_full.is_some())
    }
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub strategies: Vec<MixedStrategy>,
    pub trace: Trace,
    pub state: SolverState,
}

/// Runs the solver from the seeded initial state.
pub fn run(game: &dyn Game, cfg: &SolverConfig) -> Result<RunOutput> {
    let state = SolverState::initial(game, cfg)?;
    run_from(game, cfg, state)
}

/// Runs `cfg.iterations` steps from an explicit initial state.
pub fn run_from(game: &dyn Game, cfg: &SolverConfig, mut state: SolverState) -> Result<RunOutput> {
    cfg.validate(game)?;
    state.supports.check_game(game)?;
    state.meta.check_sizes(state.supports.sizes())?;
    let settings = cfg
        .evaluation
        .clone()
        .unwrap_or_else(|| EvalSettings::for_game(game));
    let start = Instant::now();
    let mut trace = Trace::default();
    let begin = state.t;
    let end = begin + cfg.iterations;
    let full_eval = |state: &SolverState| -> Result<(f64, f64)> {
        let profile = pushforward(&state.supports, &state.meta)?;
        let report = evaluation::exploitability_report(game, &profile, &settings)
            .map_err(|e| numerical(state.t, e.to_string()))?;
        Ok((report.phi, report.psi))
    };
    loop {
        let t = state.t;
        let evaluate = t == end || (t - begin) % cfg.eval_every == 0;
        let full = if evaluate {
            Some(full_eval(&state)?)
        } else {
            None
        };
        let phi_meta = if t == end {
            let m = Metagame::materialize(game, &state.supports, false)?;
            m.table().exploitability(&state.meta.weights())?
        } else {
            advance(game, &mut state, cfg)?
        };
        trace.records.push(TraceRecord {
            iteration: t,
            phi_meta,
            phi_full: full.map(|f| f.0),
            psi_full: full.map(|f| f.1),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        if t == end {
            break;
        }
    }
    let strategies = pushforward(&state.supports, &state.meta)?;
    Ok(RunOutput {
        strategies,
        trace,
        state,
    })
}
