//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sisams::baselines::DOConfig;
use sisams::evaluation::{default_resolution, EvalSettings};
use sisams::sisams::{Schedule, SolverConfig};
use sisams::GameSpec;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub game: GameSpec,
    pub solver: SolverSection,
    #[serde(default = "one")]
    pub trials: usize,
    /// Trial `k` uses seed `seed_base + k`.
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "yes")]
    pub plot: bool,
    /// Fill the `elapsed_seconds` column; off keeps outputs byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverSection {
    Sisams(SisamsSection),
    DoubleOracle(DoubleOracleSection),
    GradientDynamics(DynamicsSection),
}

impl SolverSection {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSection::Sisams(_) => "sisams",
            SolverSection::DoubleOracle(_) => "double_oracle",
            SolverSection::GradientDynamics(_) => "gradient_dynamics",
        }
    }
}

fn default_init_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SisamsSection {
    pub support_sizes: Vec<usize>,
    pub weight_schedule: Schedule,
    pub support_schedule: Schedule,
    pub iterations: usize,
    /// Defaults to a twentieth of `iterations`.
    #[serde(default)]
    pub eval_every: Option<usize>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub evaluation: Option<EvalSettings>,
}

impl SisamsSection {
    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            support_sizes: self.support_sizes.clone(),
            weight_schedule: self.weight_schedule,
            support_schedule: self.support_schedule,
            iterations: self.iterations,
            seed,
            init_scale: self.init_scale,
            eval_every: self.eval_every.unwrap_or((self.iterations / 20).max(1)),
            evaluation: self.evaluation.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleOracleSection {
    /// Starting atoms per player; one seeded random atom each when absent.
    #[serde(default)]
    pub initial_atoms: Option<Vec<Vec<Vec<f64>>>>,
    /// Defaults to the evaluation lattice of player 0's space.
    #[serde(default)]
    pub grid_resolution: Option<usize>,
    #[serde(default)]
    pub refine_steps: Option<usize>,
    #[serde(default)]
    pub refine_stepsize: Option<f64>,
    #[serde(default)]
    pub meta_solver_tolerance: Option<f64>,
    #[serde(default)]
    pub meta_solver_iterations: Option<usize>,
    #[serde(default)]
    pub max_outer_iterations: Option<usize>,
    #[serde(default)]
    pub br_improvement_tolerance: Option<f64>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

impl DoubleOracleSection {
    pub fn do_config(&self, game: &dyn sisams::Game) -> DOConfig {
        let d = DOConfig::default();
        DOConfig {
            grid_resolution: self
                .grid_resolution
                .unwrap_or_else(|| default_resolution(&game.spaces()[0])),
            refine_steps: self.refine_steps.unwrap_or(d.refine_steps),
            refine_stepsize: self.refine_stepsize.unwrap_or(d.refine_stepsize),
            meta_solver_tolerance: self
                .meta_solver_tolerance
                .unwrap_or(d.meta_solver_tolerance),
            meta_solver_iterations: self
                .meta_solver_iterations
                .unwrap_or(d.meta_solver_iterations),
            max_outer_iterations: self.max_outer_iterations.unwrap_or(d.max_outer_iterations),
            br_improvement_tolerance: self
                .br_improvement_tolerance
                .unwrap_or(d.br_improvement_tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub iterations: usize,
    pub stepsize: Schedule,
    #[serde(default)]
    pub eval_every: Option<usize>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub evaluation: Option<EvalSettings>,
}

/// Learning-rate by support-size grid; each cell sets both schedule bases
/// to the rate and every player's support size to the size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub learning_rates: Vec<f64>,
    pub support_sizes: Vec<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|m| CliError::config(path, m))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        let game = sisams::build_game(&self.game).map_err(|e| format!("[game]: {e}"))?;
        match &self.solver {
            SolverSection::Sisams(s) => s.solver_config(self.seed_base).validate(game.as_ref()),
            SolverSection::DoubleOracle(d) => {
                if let Some(atoms) = &d.initial_atoms {
                    if atoms.len() != game.players() || atoms.iter().any(Vec::is_empty) {
                        return Err(
                            "[solver]: initial_atoms needs a nonempty list per player".into()
                        );
                    }
                    for (i, (set, space)) in atoms.iter().zip(game.spaces()).enumerate() {
                        for a in set {
                            space.validate(a).map_err(|e| {
                                format!("[solver]: initial atom of player {i}: {e}")
                            })?;
                        }
                    }
                }
                d.do_config(game.as_ref()).validate()
            }
            SolverSection::GradientDynamics(g) => {
                if g.iterations == 0 || g.eval_every == Some(0) {
                    return Err("[solver]: iterations and eval_every must be at least 1".into());
                }
                g.stepsize.validate()
            }
        }
        .map_err(|e| format!("[solver]: {e}"))?;
        if let Some(grid) = &self.sweep {
            if !matches!(self.solver, SolverSection::Sisams(_)) {
                return Err("[sweep]: sweeps need kind = \"sisams\"".into());
            }
            if grid.learning_rates.is_empty() || grid.support_sizes.is_empty() {
                return Err("[sweep]: learning_rates and support_sizes must be nonempty".into());
            }
            if grid
                .learning_rates
                .iter()
                .any(|&r| !(r >= 0.0 && r.is_finite()))
                || grid.support_sizes.contains(&0)
            {
                return Err(
                    "[sweep]: learning rates must be nonnegative and sizes positive".into(),
                );
            }
        }
        Ok(())
    }

    /// Configuration of one sweep cell.
    pub fn cell(&self, lr: f64, size: usize) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.sweep = None;
        if let SolverSection::Sisams(s) = &mut cfg.solver {
            s.weight_schedule.base = lr;
            s.support_schedule.base = lr;
            s.support_sizes = vec![size; s.support_sizes.len()];
        }
        cfg
    }
}
