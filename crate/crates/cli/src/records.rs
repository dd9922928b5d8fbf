//! On-disk formats: trace CSV, strategy JSON, summary JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sisams::sisams::{Trace, TraceRecord};
use sisams::{ActionSpace, MixedStrategy};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 5] = [
    "iteration",
    "phi_meta",
    "phi_full",
    "psi_full",
    "elapsed_seconds",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace(path: &Path, trace: &Trace, record_timing: bool) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Validation(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            r.phi_meta.to_string(),
            cell(r.phi_full),
            cell(r.psi_full),
            cell(record_timing.then_some(r.elapsed_seconds)),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_trace(path: &Path) -> CliResult<Vec<TraceRecord>> {
    let bad = |m: String| CliError::Validation(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let parse_opt = |s: &str| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|e| format!("{s}: {e}"))
        }
    };
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| row.get(k).unwrap_or("");
        out.push(TraceRecord {
            iteration: field(0)
                .parse()
                .map_err(|e| bad(format!("iteration: {e}")))?,
            phi_meta: field(1)
                .parse()
                .map_err(|e| bad(format!("phi_meta: {e}")))?,
            phi_full: parse_opt(field(2)).map_err(bad)?,
            psi_full: parse_opt(field(3)).map_err(bad)?,
            elapsed_seconds: parse_opt(field(4)).map_err(bad)?.unwrap_or(0.0),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub atom: Vec<f64>,
    pub prob: f64,
}

/// Per-player atomic strategies of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub game: String,
    pub strategies: Vec<Vec<Atom>>,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl StrategyFile {
    pub fn new(game: &str, strategies: &[MixedStrategy]) -> Self {
        StrategyFile {
            game: game.to_string(),
            strategies: strategies
                .iter()
                .map(|s| {
                    s.atoms
                        .iter()
                        .zip(&s.probs)
                        .map(|(a, &p)| Atom {
                            atom: a.clone(),
                            prob: round12(p),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Mixed strategies validated against the game's action spaces.
    pub fn to_strategies(&self, spaces: &[ActionSpace]) -> CliResult<Vec<MixedStrategy>> {
        if self.strategies.len() != spaces.len() {
            return Err(CliError::Validation(format!(
                "strategy file has {} players, game has {}",
                self.strategies.len(),
                spaces.len()
            )));
        }
        self.strategies
            .iter()
            .zip(spaces)
            .enumerate()
            .map(|(i, (atoms, space))| {
                let s = MixedStrategy::new(
                    atoms.iter().map(|a| a.atom.clone()).collect(),
                    atoms.iter().map(|a| a.prob).collect(),
                )
                .and_then(|s| s.validate(space).map(|_| s))
                .map_err(|e| CliError::Validation(format!("player {i}: {e}")))?;
                Ok(s)
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

/// Final-iterate statistics across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub game: String,
    pub solver: String,
    pub trials: usize,
    pub seeds: Vec<u64>,
    pub completed: usize,
    pub failures: Vec<TrialFailure>,
    /// Final full-game exploitability of each completed trial, in trial order.
    pub final_phi: Vec<f64>,
    pub final_psi: Vec<f64>,
    pub mean_final_phi: Option<f64>,
    pub stderr_final_phi: Option<f64>,
    pub mean_final_psi: Option<f64>,
    pub stderr_final_psi: Option<f64>,
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
