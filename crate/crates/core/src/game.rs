//! The continuous game abstraction.

use crate::error::{invalid, Result};
use crate::space::ActionSpace;

/// An n-player game with smooth utilities over continuous action spaces.
///
/// The `*_into` methods are unchecked hot-path entry points: `joint[i]` must be
/// a valid action of player `i` and `out` must have the right length. Use
/// [`payoff`] and [`payoff_gradient`] for validated calls.
pub trait Game: Send + Sync {
    fn name(&self) -> &str;

    fn spaces(&self) -> &[ActionSpace];

    fn players(&self) -> usize {
        self.spaces().len()
    }

    /// Softmax sharpness used to smooth hard argmaxes (β).
    fn sharpness(&self) -> f64;

    /// `Some(c)` when utilities sum to `c` at every joint action.
    fn constant_sum(&self) -> Option<f64>;

    /// Writes the utility vector (one entry per player) into `out`.
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]);

    /// Writes `∂u_player / ∂(player's own action)` into `out`.
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]);
}

/// One action per player.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction(pub Vec<Vec<f64>>);

impl JointAction {
    pub fn new(actions: Vec<Vec<f64>>) -> Self {
        JointAction(actions)
    }

    pub fn as_slices(&self) -> Vec<&[f64]> {
        self.0.iter().map(Vec::as_slice).collect()
    }

    pub fn validate(&self, game: &dyn Game) -> Result<()> {
        if self.0.len() != game.players() {
            return Err(invalid(format!(
                "joint action has {} entries, game has {} players",
                self.0.len(),
                game.players()
            )));
        }
        for (i, (a, space)) in self.0.iter().zip(game.spaces()).enumerate() {
            space
                .validate(a)
                .map_err(|e| invalid(format!("player {i}: {e}")))?;
        }
        Ok(())
    }
}

/// Utility vector at a validated joint action.
pub fn payoff(game: &dyn Game, joint: &JointAction) -> Result<Vec<f64>> {
    joint.validate(game)?;
    let mut out = vec![0.0; game.players()];
    game.utility_into(&joint.as_slices(), &mut out);
    Ok(out)
}

/// Analytic gradient of `player`'s utility with respect to its own action.
pub fn payoff_gradient(game: &dyn Game, joint: &JointAction, player: usize) -> Result<Vec<f64>> {
    if player >= game.players() {
        return Err(invalid(format!(
            "player {player} out of range for {}-player game",
            game.players()
        )));
    }
    joint.validate(game)?;
    let mut out = vec![0.0; game.spaces()[player].action_dim()];
    game.gradient_into(&joint.as_slices(), player, &mut out);
    Ok(out)
}
