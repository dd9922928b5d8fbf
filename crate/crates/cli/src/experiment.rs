//! Multi-trial experiment runs and sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sisams::baselines::{double_oracle, gradient_dynamics_params};
use sisams::evaluation::{exploitability_report, reference_marginal, EvalSettings};
use sisams::sisams::{run, SolverConfig, SolverState, Trace, TraceRecord};
use sisams::{build_game, ActionSpace, Game, GameSpec, MixedStrategy};

use crate::config::{
    DoubleOracleSection, DynamicsSection, ExperimentConfig, SolverSection, SCHEMA_VERSION,
};
use crate::error::{CliError, CliResult};
use crate::plot::{scatter, Dot, LineChart, Outline, Series};
use crate::records::{mean_stderr, write_json, write_trace, StrategyFile, Summary, TrialFailure};

pub struct TrialResult {
    pub strategies: Vec<MixedStrategy>,
    pub trace: Trace,
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// One seeded solver run.
pub fn run_trial(
    game: &dyn Game,
    solver: &SolverSection,
    seed: u64,
) -> sisams::Result<TrialResult> {
    match solver {
        SolverSection::Sisams(s) => {
            let out = run(game, &s.solver_config(seed))?;
            Ok(TrialResult {
                strategies: out.strategies,
                trace: out.trace,
            })
        }
        SolverSection::DoubleOracle(d) => run_double_oracle(game, d, seed),
        SolverSection::GradientDynamics(g) => run_dynamics(game, g, seed),
    }
}

/// Random single-atom starting point shared by the baselines.
fn seeded_atoms(game: &dyn Game, init_scale: f64, seed: u64) -> sisams::Result<Vec<Vec<f64>>> {
    let mut cfg = SolverConfig::new(vec![1; game.players()], 0.0, 0.0, 1)
        .with_seed(seed)
        .with_init_scale(init_scale);
    cfg.eval_every = 1;
    let state = SolverState::initial(game, &cfg)?;
    Ok(state
        .supports
        .actions()
        .into_iter()
        .map(|mut a| a.remove(0))
        .collect())
}

fn run_double_oracle(
    game: &dyn Game,
    d: &DoubleOracleSection,
    seed: u64,
) -> sisams::Result<TrialResult> {
    let atoms = match &d.initial_atoms {
        Some(a) => a.clone(),
        None => seeded_atoms(game, d.init_scale, seed)?
            .into_iter()
            .map(|a| vec![a])
            .collect(),
    };
    let out = double_oracle(game, &atoms, &d.do_config(game))?;
    Ok(TrialResult {
        strategies: out.strategies,
        trace: out.trace,
    })
}

fn run_dynamics(game: &dyn Game, g: &DynamicsSection, seed: u64) -> sisams::Result<TrialResult> {
    let mut cfg = SolverConfig::new(vec![1; game.players()], 0.0, 0.0, 1)
        .with_seed(seed)
        .with_init_scale(g.init_scale);
    cfg.eval_every = 1;
    let state = SolverState::initial(game, &cfg)?;
    let start: Vec<Vec<f64>> = (0..game.players())
        .map(|i| state.supports.params(i).to_vec())
        .collect();
    let started = std::time::Instant::now();
    let path = gradient_dynamics_params(game, start, g.iterations, &g.stepsize)?;
    let settings = g
        .evaluation
        .clone()
        .unwrap_or_else(|| EvalSettings::for_game(game));
    let every = g.eval_every.unwrap_or((g.iterations / 20).max(1));
    let pure = |params: &[Vec<f64>]| -> sisams::Result<Vec<MixedStrategy>> {
        game.spaces()
            .iter()
            .zip(params)
            .map(|(s, p)| Ok(MixedStrategy::pure(s.squeeze(p)?)))
            .collect()
    };
    let mut trace = Trace::default();
    for (t, params) in path.iter().enumerate() {
        let full = if t % every == 0 || t == g.iterations {
            let r = exploitability_report(game, &pure(params)?, &settings)?;
            Some((r.phi, r.psi))
        } else {
            None
        };
        trace.records.push(TraceRecord {
            iteration: t,
            phi_meta: 0.0,
            phi_full: full.map(|f| f.0),
            psi_full: full.map(|f| f.1),
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
    }
    let strategies = pure(path.last().expect("trajectory is nonempty"))?;
    Ok(TrialResult { strategies, trace })
}

/// Mean full-game exploitability curve with standard-error band over trials.
pub fn mean_curve(traces: &[&Trace]) -> Vec<(f64, f64, f64)> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    first
        .records
        .iter()
        .filter(|r| r.phi_full.is_some())
        .filter_map(|r| {
            let values: Vec<f64> = traces
                .iter()
                .filter_map(|t| {
                    t.records
                        .iter()
                        .find(|q| q.iteration == r.iteration)
                        .and_then(|q| q.phi_full)
                })
                .collect();
            let (mean, se) = mean_stderr(&values);
            mean.map(|m| (r.iteration as f64, m, se.unwrap_or(0.0)))
        })
        .collect()
}

pub fn curve_series(label: String, curve: &[(f64, f64, f64)]) -> Series {
    Series {
        label,
        points: curve.iter().map(|c| (c.0, c.1)).collect(),
        band: curve
            .iter()
            .map(|c| (c.0, (c.1 - c.2).max(0.0), c.1 + c.2))
            .collect(),
        ..Series::default()
    }
}

fn strategy_plot(spec: &GameSpec, spaces: &[ActionSpace], strategies: &[MixedStrategy]) -> String {
    let title = format!("{} strategies", spec.name);
    let groups: Vec<String> = (1..=strategies.len())
        .map(|i| format!("player {i}"))
        .collect();
    if spaces.iter().all(|s| s.action_dim() == 1) {
        let mut series = Vec::new();
        for (i, s) in strategies.iter().enumerate() {
            let mut atoms: Vec<(f64, f64)> = s
                .atoms
                .iter()
                .map(|a| a[0])
                .zip(s.probs.iter().copied())
                .collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (lo, hi) = match &spaces[i] {
                ActionSpace::Box { lower, upper } => (lower[0], upper[0]),
                _ => (0.0, 1.0),
            };
            let mut points = vec![(lo, 0.0)];
            let mut mass = 0.0;
            for (x, p) in atoms {
                mass += p;
                points.push((x, mass));
            }
            points.push((hi, mass));
            series.push(Series {
                label: format!("player {} learned", i + 1),
                points,
                step: true,
                ..Series::default()
            });
            if let Some(reference) = reference_marginal(spec, i) {
                let (a, b) = reference.domain;
                let points = (0..=400)
                    .map(|k| a + (b - a) * k as f64 / 400.0)
                    .map(|t| (t, (reference.cdf)(t)))
                    .collect();
                series.push(Series {
                    label: format!("player {} reference", i + 1),
                    points,
                    dashed: true,
                    ..Series::default()
                });
            }
        }
        return LineChart {
            title: format!("{title} (CDF)"),
            x_label: "action".into(),
            y_label: "cumulative probability".into(),
            series,
            ..LineChart::default()
        }
        .render();
    }
    let outline = match &spaces[0] {
        ActionSpace::UnitCircle => Outline::Circle,
        ActionSpace::Simplex { cardinality: 3 } => Outline::Triangle,
        _ => Outline::Square,
    };
    let mut dots = Vec::new();
    for (i, (s, space)) in strategies.iter().zip(spaces).enumerate() {
        let top = s.probs.iter().copied().fold(0.0, f64::max);
        for (a, &p) in s.atoms.iter().zip(&s.probs) {
            let (x, y) = embed(space, a);
            dots.push(Dot {
                x,
                y,
                opacity: if top > 0.0 { p / top } else { 0.0 },
                group: i,
            });
        }
    }
    scatter(&title, outline, &dots, &groups)
}

/// Planar picture of an action.
fn embed(space: &ActionSpace, a: &[f64]) -> (f64, f64) {
    match space {
        ActionSpace::UnitCircle => (a[0], a[1]),
        ActionSpace::Simplex { cardinality: 3 } => (a[1] + 0.5 * a[2], 3f64.sqrt() / 2.0 * a[2]),
        ActionSpace::Box { lower, upper } => {
            let unit: Vec<f64> = a
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| (v - l) / (u - l))
                .collect();
            match unit.len() {
                2 => (unit[0], unit[1]),
                // oblique projection of the cube onto the square
                3 => (
                    (unit[0] + 0.35 * unit[2]) / 1.35,
                    (unit[1] + 0.35 * unit[2]) / 1.35,
                ),
                _ => (unit[0], unit.get(1).copied().unwrap_or(0.5)),
            }
        }
        _ => (a[0], a.get(1).copied().unwrap_or(0.0)),
    }
}

/// Runs every trial, writes per-trial outputs and the summary.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> CliResult<Summary> {
    let game = build_game(&cfg.game)?;
    create_dir(out)?;
    let seeds: Vec<u64> = (0..cfg.trials as u64)
        .map(|k| cfg.seed_base.wrapping_add(k))
        .collect();
    let results: Vec<sisams::Result<TrialResult>> = seeds
        .par_iter()
        .map(|&seed| run_trial(game.as_ref(), &cfg.solver, seed))
        .collect();

    let mut failures = Vec::new();
    let mut finished: Vec<(usize, TrialResult)> = Vec::new();
    for (k, result) in results.into_iter().enumerate() {
        match result {
            Ok(r) => finished.push((k, r)),
            Err(e) => failures.push(TrialFailure {
                trial: k,
                seed: seeds[k],
                error: e.to_string(),
            }),
        }
    }
    let name = cfg.game.name.as_str();
    let mut final_phi = Vec::new();
    let mut final_psi = Vec::new();
    for (k, r) in &finished {
        let dir = out.join(format!("trial_{k}"));
        create_dir(&dir)?;
        write_trace(&dir.join("trace.csv"), &r.trace, cfg.record_timing)?;
        StrategyFile::new(name, &r.strategies).write(&dir.join("strategy.json"))?;
        if cfg.plot {
            write_text(
                &dir.join("strategy.svg"),
                &strategy_plot(&cfg.game, game.spaces(), &r.strategies),
            )?;
        }
        let last = r.trace.final_full();
        final_phi.push(last.and_then(|l| l.phi_full).unwrap_or(f64::NAN));
        final_psi.push(last.and_then(|l| l.psi_full).unwrap_or(f64::NAN));
    }
    let (mean_final_phi, stderr_final_phi) = mean_stderr(&final_phi);
    let (mean_final_psi, stderr_final_psi) = mean_stderr(&final_psi);
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        game: name.to_string(),
        solver: cfg.solver.name().to_string(),
        trials: cfg.trials,
        seeds,
        completed: finished.len(),
        failures,
        final_phi,
        final_psi,
        mean_final_phi,
        stderr_final_phi,
        mean_final_psi,
        stderr_final_psi,
    };
    write_json(&out.join("summary.json"), &summary)?;
    if cfg.plot && !finished.is_empty() {
        let traces: Vec<&Trace> = finished.iter().map(|(_, r)| &r.trace).collect();
        let chart = LineChart {
            title: format!("{name}: exploitability ({} trials)", finished.len()),
            x_label: "iteration".into(),
            y_label: "exploitability".into(),
            log_y: true,
            series: vec![curve_series(
                format!("{} mean", cfg.solver.name()),
                &mean_curve(&traces),
            )],
        };
        write_text(&out.join("exploitability.svg"), &chart.render())?;
    }
    if finished.is_empty() {
        let first = summary
            .failures
            .first()
            .map(|f| f.error.clone())
            .unwrap_or_default();
        return Err(CliError::AllTrialsFailed(first));
    }
    Ok(summary)
}

pub fn cell_dir_name(lr: f64, size: usize) -> String {
    format!("lr_{lr}_size_{size}")
}

/// Runs every (learning rate, support size) cell and overlays the curves.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<(PathBuf, Summary)>> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("config has no [sweep] section".into()))?;
    create_dir(out)?;
    let cells: Vec<(f64, usize)> = grid
        .learning_rates
        .iter()
        .flat_map(|&lr| grid.support_sizes.iter().map(move |&n| (lr, n)))
        .collect();
    let mut done = Vec::new();
    let mut series = Vec::new();
    let mut errors = Vec::new();
    for (k, &(lr, size)) in cells.iter().enumerate() {
        let dir = out.join(cell_dir_name(lr, size));
        match run_experiment(&cfg.cell(lr, size), &dir) {
            Ok(summary) => {
                let traces: Vec<Trace> = (0..cfg.trials)
                    .filter_map(|t| {
                        crate::records::read_trace(
                            &dir.join(format!("trial_{t}")).join("trace.csv"),
                        )
                        .ok()
                    })
                    .map(|records| Trace { records })
                    .collect();
                let refs: Vec<&Trace> = traces.iter().collect();
                let mut s = curve_series(format!("lr={lr}, size={size}"), &mean_curve(&refs));
                s.band.clear();
                if k >= crate::plot::PALETTE.len() {
                    s.dashed = true;
                }
                series.push(s);
                done.push((dir, summary));
            }
            Err(CliError::AllTrialsFailed(e)) => errors.push(e),
            Err(e) => return Err(e),
        }
    }
    if cfg.plot && !series.is_empty() {
        let chart = LineChart {
            title: format!(
                "{}: exploitability by learning rate and support size",
                cfg.game.name
            ),
            x_label: "iteration".into(),
            y_label: "mean exploitability".into(),
            log_y: true,
            series,
        };
        write_text(&out.join("sweep.svg"), &chart.render())?;
    }
    if done.is_empty() {
        return Err(CliError::AllTrialsFailed(errors.join("; ")));
    }
    Ok(done)
}
