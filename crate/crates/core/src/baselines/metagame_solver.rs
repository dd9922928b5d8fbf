//! Equilibria of finite games by exploitability descent on the weights.

use crate::error::{Error, Result};
use crate::games::FiniteGame;
use crate::math::project_simplex;
use crate::metagame::PayoffTable;

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

/// [`solve_metagame_with`] with the default iteration cap.
pub fn solve_metagame(finite: &FiniteGame, tolerance: f64) -> Result<Vec<Vec<f64>>> {
    solve_metagame_with(finite, tolerance, DEFAULT_MAX_ITERATIONS)
}

/// Projected subgradient descent on the exploitability Φ over the product of
/// simplices, from uniform weights, with the Polyak stepsize `Φ / ‖g‖²`
/// (the optimal value of Φ is 0). Returns the first iterate with
/// `Φ ≤ tolerance`, certified by regret enumeration.
///
/// Descent stalls on badly conditioned games, e.g. restricted games with
/// duplicated atoms. If it exhausts `max_iterations`, projected extragradient
/// on the players' payoff gradients continues from the last iterate for up to
/// `max_iterations` more steps, under the same certificate.
pub fn solve_metagame_with(
    finite: &FiniteGame,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<Vec<f64>>> {
    let table = PayoffTable::from(finite);
    let mut w: Vec<Vec<f64>> = finite
        .counts()
        .iter()
        .map(|&n| vec![1.0 / n as f64; n])
        .collect();
    let mut best = f64::INFINITY;
    for _ in 0..max_iterations {
        let phi = table.exploitability(&w)?;
        best = best.min(phi);
        if phi <= tolerance {
            return Ok(w);
        }
        let g = table.exploitability_weight_subgradient(&w)?;
        let norm2: f64 = g.iter().flatten().map(|v| v * v).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            break;
        }
        let step = phi / norm2;
        w = w
            .iter()
            .zip(&g)
            .map(|(wi, gi)| {
                let moved: Vec<f64> = wi.iter().zip(gi).map(|(a, b)| a - step * b).collect();
                project_simplex(&moved)
            })
            .collect();
    }
    let phi = table.exploitability(&w)?;
    if phi <= tolerance {
        return Ok(w);
    }
    best = best.min(phi);
    extragradient(&table, w, tolerance, max_iterations, &mut best)?.ok_or(Error::NonConvergence {
        exploitability: best,
        iterations: 2 * max_iterations,
    })
}

/// Projected extragradient ascent of every player's own payoff. The step
/// starts at `1 / range`, `range` the largest spread of one player's payoffs,
/// and halves until `η‖F(ŵ) − F(w)‖ ≤ 0.9‖ŵ − w‖` at the extrapolated point
/// `ŵ`. Converges on monotone games such as two-player constant-sum games.
fn extragradient(
    table: &PayoffTable<'_>,
    mut w: Vec<Vec<f64>>,
    tolerance: f64,
    max_iterations: usize,
    best: &mut f64,
) -> Result<Option<Vec<Vec<f64>>>> {
    let range = table.payoff_range();
    if !(range > 0.0) || !range.is_finite() {
        return Ok(None);
    }
    let field = |at: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..at.len()).map(|i| table.pure_payoffs(at, i)).collect()
    };
    let ascend = |from: &[Vec<f64>], g: &[Vec<f64>], eta: f64| -> Vec<Vec<f64>> {
        from.iter()
            .zip(g)
            .map(|(wi, gi)| {
                let moved: Vec<f64> = wi.iter().zip(gi).map(|(a, b)| a + eta * b).collect();
                project_simplex(&moved)
            })
            .collect()
    };
    let sq_dist = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    let mut eta = 1.0 / range;
    for _ in 0..max_iterations {
        let g = field(&w);
        let g_half = loop {
            let half = ascend(&w, &g, eta);
            let g_half = field(&half);
            if eta * eta * sq_dist(&g_half, &g) <= 0.81 * sq_dist(&half, &w) || eta < 1e-12 {
                break g_half;
            }
            eta *= 0.5;
        };
        w = ascend(&w, &g_half, eta);
        let phi = table.exploitability(&w)?;
        *best = best.min(phi);
        if phi <= tolerance {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
