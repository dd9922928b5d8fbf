//! Double oracle: alternate between solving the restricted game over the
//! current atom sets and adding each player's full-game best response.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::Game;
use crate::games::FiniteGame;
use crate::metagame::{MixedStrategy, PayoffTable};
use crate::parallel;
use crate::sisams::{Trace, TraceRecord};

use super::best_response::{grid_search, refine, ResponseObjective};
use super::metagame_solver::solve_metagame_with;

fn default_grid() -> usize {
    2001
}
fn default_refine_steps() -> usize {
    100
}
fn default_refine_stepsize() -> f64 {
    0.1
}
fn default_meta_tol() -> f64 {
    1e-4
}
fn default_max_outer() -> usize {
    50
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_meta_iterations() -> usize {
    super::metagame_solver::DEFAULT_MAX_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DOConfig {
    /// Lattice resolution of the best-response search (see `grid_len`).
    #[serde(default = "default_grid")]
    pub grid_resolution: usize,
    #[serde(default = "default_refine_steps")]
    pub refine_steps: usize,
    #[serde(default = "default_refine_stepsize")]
    pub refine_stepsize: f64,
    #[serde(default = "default_meta_tol")]
    pub meta_solver_tolerance: f64,
    #[serde(default = "default_meta_iterations")]
    pub meta_solver_iterations: usize,
    #[serde(default = "default_max_outer")]
    pub max_outer_iterations: usize,
    /// Stop once no player's best response improves on its metagame value by more than this.
    #[serde(default = "default_epsilon")]
    pub br_improvement_tolerance: f64,
}

impl Default for DOConfig {
    fn default() -> Self {
        DOConfig {
            grid_resolution: default_grid(),
            refine_steps: default_refine_steps(),
            refine_stepsize: default_refine_stepsize(),
            meta_solver_tolerance: default_meta_tol(),
            meta_solver_iterations: default_meta_iterations(),
            max_outer_iterations: default_max_outer(),
            br_improvement_tolerance: default_epsilon(),
        }
    }
}

impl DOConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 2 {
            return Err(invalid("grid_resolution must be at least 2"));
        }
        if !(self.refine_stepsize > 0.0) || !(self.meta_solver_tolerance > 0.0) {
            return Err(invalid(
                "refine_stepsize and meta_solver_tolerance must be positive",
            ));
        }
        if self.max_outer_iterations == 0 || self.meta_solver_iterations == 0 {
            return Err(invalid("iteration limits must be at least 1"));
        }
        if !(self.br_improvement_tolerance >= 0.0) {
            return Err(invalid("br_improvement_tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// One outer iteration of double oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DoIteration {
    pub atom_counts: Vec<usize>,
    /// Each player's restricted-game equilibrium value.
    pub meta_values: Vec<f64>,
    /// Each player's full-game best-response value against the restricted equilibrium.
    pub best_response_values: Vec<f64>,
    pub best_responses: Vec<Vec<f64>>,
    /// Restricted-game exploitability of the computed weights.
    pub meta_exploitability: f64,
}

impl DoIteration {
    pub fn improvements(&self) -> Vec<f64> {
        self.best_response_values
            .iter()
            .zip(&self.meta_values)
            .map(|(b, v)| (b - v).max(0.0))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DoOutput {
    pub strategies: Vec<MixedStrategy>,
    pub trace: Trace,
    pub iterations: Vec<DoIteration>,
    /// True when the improvement tolerance was met (rather than the iteration cap).
    pub converged: bool,
}

fn restricted_game(game: &dyn Game, atoms: &[Vec<Vec<f64>>]) -> FiniteGame {
    let counts: Vec<usize> = atoms.iter().map(Vec::len).collect();
    let players = counts.len();
    let mut shape = FiniteGame::from_parts(counts.clone(), Vec::new());
    let joints: usize = counts.iter().product();
    let mut payoffs = vec![0.0; joints * players];
    parallel::fill_chunks(&mut payoffs, players, |f, out| {
        let idx = shape.unravel(f);
        let joint: Vec<&[f64]> = idx
            .iter()
            .enumerate()
            .map(|(i, &a)| atoms[i][a].as_slice())
            .collect();
        game.utility_into(&joint, out);
    });
    shape = FiniteGame::from_parts(counts, payoffs);
    shape
}

/// Runs double oracle from the given nonempty atom sets.
pub fn double_oracle(
    game: &dyn Game,
    initial_atoms: &[Vec<Vec<f64>>],
    cfg: &DOConfig,
) -> Result<DoOutput> {
    cfg.validate()?;
    if initial_atoms.len() != game.players() || initial_atoms.iter().any(Vec::is_empty) {
        return Err(invalid(
            "double oracle needs a nonempty atom set per player",
        ));
    }
    for (i, (set, space)) in initial_atoms.iter().zip(game.spaces()).enumerate() {
        for a in set {
            space
                .validate(a)
                .map_err(|e| invalid(format!("player {i}: {e}")))?;
        }
    }
    let mut atoms = initial_atoms.to_vec();
    let mut trace = Trace::default();
    let mut iterations = Vec::new();
    let start = std::time::Instant::now();
    for outer in 1..=cfg.max_outer_iterations {
        let finite = restricted_game(game, &atoms);
        let weights = solve_metagame_with(
            &finite,
            cfg.meta_solver_tolerance,
            cfg.meta_solver_iterations,
        )?;
        let table = PayoffTable::from(&finite);
        let meta_exploitability = table.exploitability(&weights)?;
        let meta_values: Vec<f64> = (0..game.players())
            .map(|i| table.expected_payoff(&weights, i))
            .collect();
        let strategies: Vec<MixedStrategy> = atoms
            .iter()
            .zip(&weights)
            .map(|(a, w)| MixedStrategy {
                atoms: a.clone(),
                probs: w.clone(),
            })
            .collect();

        let responses = parallel::map_jobs(game.players(), |i| -> Result<(Vec<f64>, f64)> {
            let objective = ResponseObjective::new(game, &strategies, i)?;
            let (grid_action, grid_value) = grid_search(&objective, cfg.grid_resolution)?;
            let (action, value) = refine(
                &objective,
                &grid_action,
                cfg.refine_steps,
                cfg.refine_stepsize,
            )?;
            Ok(if value > grid_value {
                (action, value)
            } else {
                (grid_action, grid_value)
            })
        });
        let responses: Vec<(Vec<f64>, f64)> = responses.into_iter().collect::<Result<_>>()?;
        let record = DoIteration {
            atom_counts: atoms.iter().map(Vec::len).collect(),
            meta_values,
            best_response_values: responses.iter().map(|r| r.1).collect(),
            best_responses: responses.iter().map(|r| r.0.clone()).collect(),
            meta_exploitability,
        };
        let improvements = record.improvements();
        trace.records.push(TraceRecord {
            iteration: outer,
            phi_meta: meta_exploitability,
            phi_full: Some(improvements.iter().sum()),
            psi_full: Some(improvements.iter().copied().fold(0.0, f64::max)),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        let done = improvements
            .iter()
            .all(|&d| d <= cfg.br_improvement_tolerance);
        iterations.push(record);
        if done || outer == cfg.max_outer_iterations {
            return Ok(DoOutput {
                strategies,
                trace,
                iterations,
                converged: done,
            });
        }
        let mut added = false;
        for (set, (action, _)) in atoms.iter_mut().zip(responses) {
            if !set.contains(&action) {
                set.push(action);
                added = true;
            }
        }
        if !added {
            return Ok(DoOutput {
                strategies,
                trace,
                iterations,
                converged: false,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}
