//! Simultaneous gradient dynamics: every player ascends its own payoff
//! gradient in squeezed parameter space at the same time.

use crate::error::{invalid, numerical, Result};
use crate::game::{Game, JointAction};
use crate::sisams::Schedule;

/// Trajectory of joint actions, starting with `start`, of length `steps + 1`.
pub fn simultaneous_gradient_dynamics(
    game: &dyn Game,
    start: &JointAction,
    steps: usize,
    stepsize: f64,
) -> Result<Vec<JointAction>> {
    start.validate(game)?;
    let params: Vec<Vec<f64>> = game
        .spaces()
        .iter()
        .zip(&start.0)
        .map(|(s, a)| s.unsqueeze(a))
        .collect::<Result<_>>()?;
    let trajectory = gradient_dynamics_params(game, params, steps, &Schedule::constant(stepsize))?;
    let mut out = vec![start.clone()];
    out.extend(trajectory.iter().skip(1).map(|p| squeeze_all(game, p)));
    Ok(out)
}

fn squeeze_all(game: &dyn Game, params: &[Vec<f64>]) -> JointAction {
    JointAction::new(
        game.spaces()
            .iter()
            .zip(params)
            .map(|(s, p)| {
                let mut a = vec![0.0; s.action_dim()];
                s.squeeze_into(p, &mut a);
                a
            })
            .collect(),
    )
}

/// Parameter-space trajectory (length `steps + 1`) under `schedule`.
pub fn gradient_dynamics_params(
    game: &dyn Game,
    start: Vec<Vec<f64>>,
    steps: usize,
    schedule: &Schedule,
) -> Result<Vec<Vec<Vec<f64>>>> {
    schedule.validate()?;
    if start.len() != game.players()
        || start
            .iter()
            .zip(game.spaces())
            .any(|(p, s)| p.len() != s.param_dim())
    {
        return Err(invalid("start parameters do not match the game's spaces"));
    }
    let mut trajectory = vec![start];
    for t in 0..steps {
        let params = trajectory.last().expect("nonempty");
        let joint = squeeze_all(game, params);
        let slices = joint.as_slices();
        let lr = schedule.at(t);
        let mut next = params.clone();
        for (i, space) in game.spaces().iter().enumerate() {
            let mut g = vec![0.0; space.action_dim()];
            game.gradient_into(&slices, i, &mut g);
            let mut pg = vec![0.0; space.param_dim()];
            space.vjp_with_action(&params[i], &joint.0[i], &g, &mut pg);
            if pg.iter().any(|v| !v.is_finite()) {
                return Err(numerical(t, "non-finite gradient"));
            }
            for (p, gi) in next[i].iter_mut().zip(&pg) {
                *p += lr * gi;
            }
        }
        trajectory.push(next);
    }
    Ok(trajectory)
}
