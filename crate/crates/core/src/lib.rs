//! Approximate mixed-strategy Nash equilibria of n-player continuous-action
//! games.
//!
//! The solver keeps a fixed-size support of actions per player together with
//! a mixing distribution over it. Each iteration descends the exploitability
//! of the finite metagame induced by the supports in the mixing weights while
//! every support point ascends its rank-weighted payoff against the current
//! mixture. Double oracle and simultaneous gradient dynamics are provided as
//! baselines, and [`evaluation`] estimates full-game exploitability of any
//! atomic mixed strategy.

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod game;
pub mod games;
pub mod math;
pub mod metagame;
pub mod parallel;
pub mod sisams;
pub mod smoothing;
pub mod space;

pub use error::{Error, Result};
pub use game::{payoff, payoff_gradient, Game, JointAction};
pub use games::{build_game, FiniteGame, GameKind, GameSpec};
pub use metagame::{MetaStrategy, MixedStrategy, SupportProfile};
pub use space::ActionSpace;
