//! Action spaces and the smooth reparameterization ("squeezing") that maps
//! unconstrained parameters onto them.

use crate::error::{invalid, Result};
use crate::math;

/// Tolerance used when checking simplex sums and circle norms.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A player's continuous action set.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpace {
    /// Axis-aligned box `[lower, upper]`, squeezed componentwise with a rescaled `tanh`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Probability simplex over `cardinality` coordinates, squeezed with softmax.
    Simplex { cardinality: usize },
    /// The unit circle in the plane, parameterized by one angle.
    UnitCircle,
}

impl ActionSpace {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(invalid("box bounds must be nonempty and of equal length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(invalid("box requires lower < upper in every dimension"));
        }
        Ok(ActionSpace::Box { lower, upper })
    }

    /// The interval `[lower, upper]` repeated over `dim` dimensions.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; dim], vec![upper; dim])
    }

    pub fn simplex(cardinality: usize) -> Result<Self> {
        if cardinality < 2 {
            return Err(invalid("simplex cardinality must be at least 2"));
        }
        Ok(ActionSpace::Simplex { cardinality })
    }

    pub fn param_dim(&self) -> usize {
        match self {
            ActionSpace::Box { lower, .. } => lower.len(),
            ActionSpace::Simplex { cardinality } => *cardinality,
            ActionSpace::UnitCircle => 1,
        }
    }

    pub fn action_dim(&self) -> usize {
        match self {
            ActionSpace::Box { lower, .. } => lower.len(),
            ActionSpace::Simplex { cardinality } => *cardinality,
            ActionSpace::UnitCircle => 2,
        }
    }

    /// Checks that `action` is a member of this space.
    pub fn validate(&self, action: &[f64]) -> Result<()> {
        if action.len() != self.action_dim() {
            return Err(invalid(format!(
                "action has dimension {}, space expects {}",
                action.len(),
                self.action_dim()
            )));
        }
        if action.iter().any(|v| !v.is_finite()) {
            return Err(invalid("action has non-finite entries"));
        }
        match self {
            ActionSpace::Box { lower, upper } => {
                for (d, &v) in action.iter().enumerate() {
                    if v < lower[d] || v > upper[d] {
                        return Err(invalid(format!(
                            "coordinate {d} = {v} outside [{}, {}]",
                            lower[d], upper[d]
                        )));
                    }
                }
            }
            ActionSpace::Simplex { .. } => {
                let sum: f64 = action.iter().sum();
                if action.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > MEMBERSHIP_TOL {
                    return Err(invalid("simplex action must be nonnegative and sum to 1"));
                }
            }
            ActionSpace::UnitCircle => {
                let norm = action[0].hypot(action[1]);
                if (norm - 1.0).abs() > MEMBERSHIP_TOL {
                    return Err(invalid("circle action must have unit norm"));
                }
            }
        }
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_dim() {
            return Err(invalid(format!(
                "parameter vector has length {}, space expects {}",
                params.len(),
                self.param_dim()
            )));
        }
        Ok(())
    }

    /// Maps unconstrained parameters to an action in this space.
    pub fn squeeze(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let mut out = vec![0.0; self.action_dim()];
        self.squeeze_into(params, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`squeeze`](Self::squeeze) writing into `out`.
    pub fn squeeze_into(&self, params: &[f64], out: &mut [f64]) {
        match self {
            ActionSpace::Box { lower, upper } => {
                for d in 0..lower.len() {
                    let half = 0.5 * (upper[d] - lower[d]);
                    out[d] = lower[d] + half * (params[d].tanh() + 1.0);
                }
            }
            ActionSpace::Simplex { .. } => math::softmax_into(params, out),
            ActionSpace::UnitCircle => {
                let (s, c) = params[0].sin_cos();
                out[0] = c;
                out[1] = s;
            }
        }
    }

    /// Gradient with respect to the parameters given a gradient with respect
    /// to the squeezed action (Jacobian-transpose product).
    pub fn squeeze_jacobian_product(
        &self,
        params: &[f64],
        action_gradient: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_params(params)?;
        if action_gradient.len() != self.action_dim() {
            return Err(invalid(format!(
                "action gradient has length {}, space expects {}",
                action_gradient.len(),
                self.action_dim()
            )));
        }
        let mut out = vec![0.0; self.param_dim()];
        self.vjp_into(params, action_gradient, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`squeeze_jacobian_product`](Self::squeeze_jacobian_product).
    /// `action` must equal `squeeze(params)`.
    pub fn vjp_with_action(&self, params: &[f64], action: &[f64], g: &[f64], out: &mut [f64]) {
        match self {
            ActionSpace::Box { lower, upper } => {
                for d in 0..lower.len() {
                    let t = params[d].tanh();
                    out[d] = g[d] * 0.5 * (upper[d] - lower[d]) * (1.0 - t * t);
                }
            }
            ActionSpace::Simplex { .. } => math::softmax_vjp(action, g, out),
            ActionSpace::UnitCircle => {
                // d(cos θ, sin θ)/dθ = (−sin θ, cos θ)
                out[0] = -action[1] * g[0] + action[0] * g[1];
            }
        }
    }

    fn vjp_into(&self, params: &[f64], g: &[f64], out: &mut [f64]) {
        let mut action = vec![0.0; self.action_dim()];
        self.squeeze_into(params, &mut action);
        self.vjp_with_action(params, &action, g, out);
    }

    /// A parameter vector that squeezes to `action` (or as close as floating
    /// point allows for boundary points).
    pub fn unsqueeze(&self, action: &[f64]) -> Result<Vec<f64>> {
        self.validate(action)?;
        Ok(match self {
            ActionSpace::Box { lower, upper } => action
                .iter()
                .enumerate()
                .map(|(d, &v)| {
                    let u = 2.0 * (v - lower[d]) / (upper[d] - lower[d]) - 1.0;
                    u.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh()
                })
                .collect(),
            ActionSpace::Simplex { .. } => action.iter().map(|&v| v.max(1e-300).ln()).collect(),
            ActionSpace::UnitCircle => vec![action[1].atan2(action[0])],
        })
    }
}
