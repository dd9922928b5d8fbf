//! Comparison baselines: double oracle and simultaneous gradient dynamics,
//! plus the best-response and finite-game solvers they rely on.

pub mod best_response;
pub mod double_oracle;
pub mod dynamics;
pub mod metagame_solver;

pub use best_response::{grid_best_response, refine_best_response, ResponseObjective};
pub use double_oracle::{double_oracle, DOConfig, DoIteration, DoOutput};
pub use dynamics::{gradient_dynamics_params, simultaneous_gradient_dynamics};
pub use metagame_solver::{solve_metagame, solve_metagame_with};
