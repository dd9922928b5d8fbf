//! Full-game exploitability estimates for atomic mixed strategies,
//! distributional distances to known equilibria, and convexity probes for
//! finite games.
//!
//! Best responses are searched over a lattice and polished by gradient
//! ascent, so every regret reported here is a lower bound on the true regret.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::best_response::{grid_len, grid_search, refine, ResponseObjective};
use crate::error::{invalid, Error, Result};
use crate::game::Game;
use crate::games::FiniteGame;
use crate::metagame::{MixedStrategy, PayoffTable};
use crate::parallel;
use crate::space::ActionSpace;

/// Regrets below this are reported as zero.
pub const REGRET_FLOOR: f64 = 1e-12;

fn default_refine_steps() -> usize {
    200
}
fn default_refine_stepsize() -> f64 {
    0.5
}

/// Best-response search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    /// Lattice resolution; `None` picks [`default_resolution`] per player.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default = "default_refine_steps")]
    pub refine_steps: usize,
    #[serde(default = "default_refine_stepsize")]
    pub refine_stepsize: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            resolution: None,
            refine_steps: default_refine_steps(),
            refine_stepsize: default_refine_stepsize(),
        }
    }
}

impl EvalSettings {
    pub fn for_game(_game: &dyn Game) -> Self {
        Self::default()
    }

    pub fn with_resolution(resolution: usize, refine_steps: usize) -> Self {
        EvalSettings {
            resolution: Some(resolution),
            refine_steps,
            ..Self::default()
        }
    }

    pub fn resolution_for(&self, space: &ActionSpace) -> usize {
        self.resolution.unwrap_or_else(|| default_resolution(space))
    }
}

/// Per-space default lattice resolution.
pub fn default_resolution(space: &ActionSpace) -> usize {
    match space {
        ActionSpace::Box { lower, .. } => match lower.len() {
            1 => 2001,
            2 => 101,
            _ => 21,
        },
        ActionSpace::Simplex { .. } => 60,
        ActionSpace::UnitCircle => 101,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub regrets: Vec<f64>,
    /// Sum of regrets.
    pub phi: f64,
    /// Largest regret.
    pub psi: f64,
    pub best_responses: Vec<Vec<f64>>,
    pub best_response_values: Vec<f64>,
    pub expected_utilities: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub refine_steps: usize,
    pub refine_stepsize: f64,
}

/// Estimated regret of `player` in `profile` and the best response found.
///
/// The best response is the best of: the lattice optimum, its local
/// refinement, and the player's own atoms. For actions of more than three
/// dimensions the lattice is skipped and every own atom is refined instead.
pub fn full_regret(
    game: &dyn Game,
    profile: &[MixedStrategy],
    player: usize,
    settings: &EvalSettings,
) -> Result<(f64, Vec<f64>, f64, f64)> {
    let objective = ResponseObjective::new(game, profile, player)?;
    let own = &profile[player];
    let expected = objective.mixture_value(own);
    let space = objective.space();
    let resolution = settings.resolution_for(space);

    let mut best: (Vec<f64>, f64) = (own.atoms[0].clone(), f64::NEG_INFINITY);
    let mut consider = |cand: (Vec<f64>, f64)| {
        if cand.1 > best.1 {
            best = cand;
        }
    };
    for a in &own.atoms {
        consider((a.clone(), objective.value(a)));
    }
    match grid_len(space, resolution) {
        Ok(_) => {
            let grid = grid_search(&objective, resolution)?;
            let polished = refine(
                &objective,
                &grid.0,
                settings.refine_steps,
                settings.refine_stepsize,
            )?;
            consider(grid);
            consider(polished);
        }
        Err(Error::Unsupported(_)) => {
            for a in &own.atoms {
                consider(refine(
                    &objective,
                    a,
                    settings.refine_steps,
                    settings.refine_stepsize,
                )?);
            }
        }
        Err(e) => return Err(e),
    }
    let regret = best.1 - expected;
    let regret = if regret < REGRET_FLOOR { 0.0 } else { regret };
    Ok((regret, best.0, best.1, expected))
}

/// Regret estimates for every player, aggregated into Φ̂ and Ψ̂.
pub fn exploitability_report(
    game: &dyn Game,
    profile: &[MixedStrategy],
    settings: &EvalSettings,
) -> Result<EvalReport> {
    if profile.len() != game.players() {
        return Err(invalid(format!(
            "profile has {} strategies, game has {} players",
            profile.len(),
            game.players()
        )));
    }
    let per_player =
        parallel::map_jobs(game.players(), |i| full_regret(game, profile, i, settings));
    let per_player: Vec<_> = per_player.into_iter().collect::<Result<_>>()?;
    let regrets: Vec<f64> = per_player.iter().map(|r| r.0).collect();
    Ok(EvalReport {
        phi: regrets.iter().sum(),
        psi: regrets.iter().copied().fold(0.0, f64::max),
        regrets,
        best_responses: per_player.iter().map(|r| r.1.clone()).collect(),
        best_response_values: per_player.iter().map(|r| r.2).collect(),
        expected_utilities: per_player.iter().map(|r| r.3).collect(),
        resolutions: game
            .spaces()
            .iter()
            .map(|s| settings.resolution_for(s))
            .collect(),
        refine_steps: settings.refine_steps,
        refine_stepsize: settings.refine_stepsize,
    })
}

/// Number of uniform quadrature subintervals used by the 1-D distances.
pub const QUADRATURE_POINTS: usize = 10_000;

/// `∫ |F(t) − G(t)| dt` over `domain`, where `F` is the CDF of a 1-D atomic
/// strategy and `G` a reference CDF.
///
/// The integral is split at every atom and on a uniform grid; on each piece
/// the strategy CDF is constant and `|c − G|` is integrated by the
/// trapezoid rule with the zero crossing located by linear interpolation
/// (exact for piecewise-linear references whose kinks and jumps lie on cuts).
pub fn wasserstein1_to_reference(
    strategy: &MixedStrategy,
    reference_cdf: impl Fn(f64) -> f64,
    domain: (f64, f64),
) -> Result<f64> {
    if strategy.atoms.iter().any(|a| a.len() != 1) {
        return Err(Error::Unsupported(
            "Wasserstein distance to a CDF needs one-dimensional atoms".into(),
        ));
    }
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(invalid("domain must satisfy lo < hi"));
    }
    let mut atoms: Vec<(f64, f64)> = strategy
        .atoms
        .iter()
        .map(|a| a[0])
        .zip(strategy.probs.iter().copied())
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts: Vec<f64> = (0..=QUADRATURE_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / QUADRATURE_POINTS as f64)
        .chain(atoms.iter().map(|a| a.0.clamp(lo, hi)))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let cdf_at = |t: f64| -> f64 { atoms.iter().take_while(|a| a.0 <= t).map(|a| a.1).sum() };
    let mut total = 0.0;
    let mut next_atom = 0;
    let mut mass = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // strategy CDF on (a, b): mass of atoms ≤ a
        while next_atom < atoms.len() && atoms[next_atom].0 <= a {
            mass += atoms[next_atom].1;
            next_atom += 1;
        }
        // left limit at b so reference jumps on a cut are not smeared
        let fa = mass - reference_cdf(a);
        let fb = mass - reference_cdf(b.next_down());
        let width = b - a;
        total += if fa * fb >= 0.0 {
            0.5 * (fa.abs() + fb.abs()) * width
        } else {
            let root = fa.abs() / (fa.abs() + fb.abs());
            0.5 * (fa.abs() * root + fb.abs() * (1.0 - root)) * width
        };
    }
    debug_assert!(
        (cdf_at(hi)
            - mass
            - atoms
                .iter()
                .skip(next_atom)
                .filter(|a| a.0 <= hi)
                .map(|a| a.1)
                .sum::<f64>())
        .abs()
            < 1e-9
    );
    Ok(total)
}

/// Arc-length Wasserstein-1 distance between an atomic strategy on the unit
/// circle and the uniform distribution on the circle (radians).
pub fn circular_wasserstein1_to_uniform(strategy: &MixedStrategy) -> Result<f64> {
    if strategy.atoms.iter().any(|a| a.len() != 2) {
        return Err(invalid("circle strategies have two-dimensional atoms"));
    }
    use std::f64::consts::TAU;
    let mut atoms: Vec<(f64, f64)> = strategy
        .atoms
        .iter()
        .map(|a| a[1].atan2(a[0]).rem_euclid(TAU))
        .zip(strategy.probs.iter().copied())
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // D(θ) = F(θ) − θ/2π sampled at cell midpoints; W1 = 2π · min_c mean |D − c|,
    // minimized at the median.
    let n = 100 * QUADRATURE_POINTS;
    let mut mass = 0.0;
    let mut k = 0;
    let mut d: Vec<f64> = (0..n)
        .map(|i| {
            let theta = TAU * (i as f64 + 0.5) / n as f64;
            while k < atoms.len() && atoms[k].0 <= theta {
                mass += atoms[k].1;
                k += 1;
            }
            mass - theta / TAU
        })
        .collect();
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    d.iter_mut().for_each(|v| *v = (*v - median).abs());
    Ok(TAU * d.iter().sum::<f64>() / n as f64)
}

/// Exact exploitability of a mixed profile of a finite game.
pub fn finite_exploitability(game: &FiniteGame, profile: &[Vec<f64>]) -> Result<f64> {
    PayoffTable::from(game).exploitability(profile)
}

/// Two-player constant-sum duality gap `max_j U₁(j, w₂) + max_k U₂(w₁, k) − c`.
pub fn duality_gap(game: &FiniteGame, profile: &[Vec<f64>]) -> Result<f64> {
    if game.players() != 2 {
        return Err(invalid("duality gap is defined for two-player games"));
    }
    let c = game
        .constant_sum(1e-9)
        .ok_or_else(|| invalid("duality gap needs a constant-sum game"))?;
    let t = PayoffTable::from(game);
    let best = |i: usize| {
        t.pure_payoffs(profile, i)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(best(0) + best(1) - c)
}

/// Uniformly random point of the probability simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Largest observed violation of midpoint convexity of the exploitability
/// along `segments` random segments between random mixed profiles.
pub fn convexity_probe<R: Rng + ?Sized>(
    finite: &FiniteGame,
    segments: usize,
    rng: &mut R,
) -> Result<f64> {
    let table = PayoffTable::from(finite);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..segments {
        let a: Vec<Vec<f64>> = finite
            .counts()
            .iter()
            .map(|&n| random_simplex_point(n, rng))
            .collect();
        let b: Vec<Vec<f64>> = finite
            .counts()
            .iter()
            .map(|&n| random_simplex_point(n, rng))
            .collect();
        let lambda: f64 = rng.random_range(0.0..1.0);
        let mid: Vec<Vec<f64>> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|(p, q)| lambda * p + (1.0 - lambda) * q)
                    .collect()
            })
            .collect();
        let gap = table.exploitability(&mid)?
            - (lambda * table.exploitability(&a)? + (1.0 - lambda) * table.exploitability(&b)?);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Equilibrium marginal CDF of either player in the Glicksberg–Gross game.
pub fn glicksberg_gross_cdf(t: f64) -> f64 {
    (4.0 / std::f64::consts::PI * t.clamp(0.0, 1.0).sqrt().atan()).min(1.0)
}

pub fn uniform_unit_cdf(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

fn interval_maximizer_cdf(t: f64) -> f64 {
    if t < -1.0 {
        0.0
    } else if t < 1.0 {
        0.5
    } else {
        1.0
    }
}

fn point_at_zero_cdf(t: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else {
        1.0
    }
}

/// Known equilibrium marginal of a one-dimensional game.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceMarginal {
    pub cdf: fn(f64) -> f64,
    pub domain: (f64, f64),
}

/// Equilibrium marginal of `player` when it is known in closed form.
pub fn reference_marginal(
    spec: &crate::games::GameSpec,
    player: usize,
) -> Option<ReferenceMarginal> {
    use crate::games::GameKind;
    match spec.name {
        GameKind::Interval if player == 0 => Some(ReferenceMarginal {
            cdf: interval_maximizer_cdf,
            domain: (-1.0, 1.0),
        }),
        GameKind::Interval => Some(ReferenceMarginal {
            cdf: point_at_zero_cdf,
            domain: (-1.0, 1.0),
        }),
        GameKind::GlicksbergGross => Some(ReferenceMarginal {
            cdf: glicksberg_gross_cdf,
            domain: (0.0, 1.0),
        }),
        GameKind::AllPay if spec.players == 2 => Some(ReferenceMarginal {
            cdf: uniform_unit_cdf,
            domain: (0.0, 1.0),
        }),
        _ => None,
    }
}
