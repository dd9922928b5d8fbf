//! The benchmark games, with softmax-smoothed utilities and analytic gradients.

use crate::game::Game;
use crate::math::sigmoid;
use crate::space::ActionSpace;

use super::finite::Polymatrix;

/// Softmax share of `player` in column `col` of a players × items matrix,
/// where `rows[p][col]` is player `p`'s entry.
#[inline]
fn column_share(rows: &[&[f64]], col: usize, player: usize, beta: f64) -> f64 {
    let max = rows
        .iter()
        .map(|r| r[col])
        .fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = rows.iter().map(|r| (beta * (r[col] - max)).exp()).sum();
    (beta * (rows[player][col] - max)).exp() / denom
}

/// `u_1 = −u_2 = (x − y)²` on `[−1, 1]²`.
#[derive(Debug, Clone)]
pub struct IntervalGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
}

impl IntervalGame {
    pub fn new(sharpness: f64) -> Self {
        let s = ActionSpace::cube(1, -1.0, 1.0).expect("valid bounds");
        IntervalGame {
            spaces: vec![s.clone(), s],
            sharpness,
        }
    }
}

impl Game for IntervalGame {
    fn name(&self) -> &str {
        "interval"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        let d = joint[0][0] - joint[1][0];
        out[0] = d * d;
        out[1] = -d * d;
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        let d = joint[0][0] - joint[1][0];
        // d/dx (x−y)² = 2(x−y); d/dy −(x−y)² = 2(x−y)
        let _ = player;
        out[0] = 2.0 * d;
    }
}

/// `u_1 = −u_2 = ‖x − y‖²` on the unit circle.
#[derive(Debug, Clone)]
pub struct CircleGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
}

impl CircleGame {
    pub fn new(sharpness: f64) -> Self {
        CircleGame {
            spaces: vec![ActionSpace::UnitCircle, ActionSpace::UnitCircle],
            sharpness,
        }
    }
}

impl Game for CircleGame {
    fn name(&self) -> &str {
        "circle"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        let dx = joint[0][0] - joint[1][0];
        let dy = joint[0][1] - joint[1][1];
        let d2 = dx * dx + dy * dy;
        out[0] = d2;
        out[1] = -d2;
    }
    fn gradient_into(&self, joint: &[&[f64]], _player: usize, out: &mut [f64]) {
        out[0] = 2.0 * (joint[0][0] - joint[1][0]);
        out[1] = 2.0 * (joint[0][1] - joint[1][1]);
    }
}

/// `u_1 = −u_2 = (1+x)(1+y)(1−xy)/(1+xy)²` on `[0, 1]²`.
#[derive(Debug, Clone)]
pub struct GlicksbergGrossGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
}

impl GlicksbergGrossGame {
    pub fn new(sharpness: f64) -> Self {
        let s = ActionSpace::cube(1, 0.0, 1.0).expect("valid bounds");
        GlicksbergGrossGame {
            spaces: vec![s.clone(), s],
            sharpness,
        }
    }

    pub fn value(x: f64, y: f64) -> f64 {
        let q = 1.0 + x * y;
        (1.0 + x) * (1.0 + y) * (1.0 - x * y) / (q * q)
    }

    /// Partial derivative of [`value`](Self::value) in its first argument.
    pub fn dvalue_dx(x: f64, y: f64) -> f64 {
        let q = 1.0 + x * y;
        let numer = (1.0 + x) * (1.0 + y) * (1.0 - x * y);
        let dnumer = (1.0 + y) * (1.0 - y - 2.0 * x * y);
        dnumer / (q * q) - 2.0 * y * numer / (q * q * q)
    }
}

impl Game for GlicksbergGrossGame {
    fn name(&self) -> &str {
        "glicksberg_gross"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        let v = Self::value(joint[0][0], joint[1][0]);
        out[0] = v;
        out[1] = -v;
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        let (x, y) = (joint[0][0], joint[1][0]);
        // The value is symmetric in (x, y).
        out[0] = if player == 0 {
            Self::dvalue_dx(x, y)
        } else {
            -Self::dvalue_dx(y, x)
        };
    }
}

/// `u_1 = −u_2 = (1 + (x−y)²/d²)⁻¹` on `[0, 1]²`.
#[derive(Debug, Clone)]
pub struct SecurityGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
    scale: f64,
}

impl SecurityGame {
    pub fn new(scale: f64, sharpness: f64) -> Self {
        let s = ActionSpace::cube(1, 0.0, 1.0).expect("valid bounds");
        SecurityGame {
            spaces: vec![s.clone(), s],
            sharpness,
            scale,
        }
    }
}

impl Game for SecurityGame {
    fn name(&self) -> &str {
        "security"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        let r = (joint[0][0] - joint[1][0]) / self.scale;
        let v = 1.0 / (1.0 + r * r);
        out[0] = v;
        out[1] = -v;
    }
    fn gradient_into(&self, joint: &[&[f64]], _player: usize, out: &mut [f64]) {
        let diff = joint[0][0] - joint[1][0];
        let r = diff / self.scale;
        let v = 1.0 / (1.0 + r * r);
        // ∂u_1/∂x = −2(x−y)/d² v² and ∂u_2/∂y = −∂u_1/∂y = −2(x−y)/d² v²
        out[0] = -2.0 * diff / (self.scale * self.scale) * v * v;
    }
}

/// Continuous Colonel Blotto: allocations on the simplex, `u = softmax(βA)·1_k`
/// with the softmax taken across players within each battlefield.
#[derive(Debug, Clone)]
pub struct BlottoGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
    battlefields: usize,
}

impl BlottoGame {
    pub fn new(players: usize, battlefields: usize, sharpness: f64) -> Self {
        let s = ActionSpace::simplex(battlefields).expect("k >= 2");
        BlottoGame {
            spaces: vec![s; players],
            sharpness,
            battlefields,
        }
    }
}

impl Game for BlottoGame {
    fn name(&self) -> &str {
        "blotto"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(self.battlefields as f64)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for b in 0..self.battlefields {
            for (i, o) in out.iter_mut().enumerate() {
                *o += column_share(joint, b, i, self.sharpness);
            }
        }
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            let w = column_share(joint, b, player, self.sharpness);
            *o = self.sharpness * w * (1.0 - w);
        }
    }
}

/// Complete-information all-pay auction, `u(a) = softmax(βa) − a` on `[0, 1]ⁿ`.
#[derive(Debug, Clone)]
pub struct AllPayGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
}

impl AllPayGame {
    pub fn new(players: usize, sharpness: f64) -> Self {
        let s = ActionSpace::cube(1, 0.0, 1.0).expect("valid bounds");
        AllPayGame {
            spaces: vec![s; players],
            sharpness,
        }
    }
}

impl Game for AllPayGame {
    fn name(&self) -> &str {
        "all_pay"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        None
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = column_share(joint, 0, i, self.sharpness) - joint[i][0];
        }
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        let w = column_share(joint, 0, player, self.sharpness);
        out[0] = self.sharpness * w * (1.0 - w) - 1.0;
    }
}

/// Two bidders, three chopsticks sold in simultaneous first-price auctions.
///
/// `W` holds per-item soft win shares; a bidder values owning two or more
/// chopsticks at 1 (smoothed by a sigmoid at 1.5 items) and pays its bid in
/// proportion to its win share.
#[derive(Debug, Clone)]
pub struct ChopstickGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
}

impl ChopstickGame {
    pub const ITEMS: usize = 3;

    pub fn new(sharpness: f64) -> Self {
        let s = ActionSpace::cube(Self::ITEMS, 0.0, 1.0).expect("valid bounds");
        ChopstickGame {
            spaces: vec![s.clone(), s],
            sharpness,
        }
    }

    #[inline]
    fn shares(&self, joint: &[&[f64]], player: usize) -> [f64; 3] {
        let other = 1 - player;
        let mut w = [0.0; 3];
        for (m, wm) in w.iter_mut().enumerate() {
            *wm = sigmoid(self.sharpness * (joint[player][m] - joint[other][m]));
        }
        w
    }
}

impl Game for ChopstickGame {
    fn name(&self) -> &str {
        "chopstick"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        None
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let w = self.shares(joint, i);
            let won: f64 = w.iter().sum();
            let paid: f64 = w.iter().zip(joint[i]).map(|(w, a)| w * a).sum();
            *o = sigmoid(self.sharpness * (won - 1.5)) - paid;
        }
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        let beta = self.sharpness;
        let w = self.shares(joint, player);
        let s = sigmoid(beta * (w.iter().sum::<f64>() - 1.5));
        let ds = beta * s * (1.0 - s);
        for m in 0..Self::ITEMS {
            let dw = beta * w[m] * (1.0 - w[m]);
            out[m] = ds * dw - (w[m] + joint[player][m] * dw);
        }
    }
}

/// Mixed extension of a polymatrix game: each player picks a point on its
/// action simplex and receives the bilinear payoff.
#[derive(Debug, Clone)]
pub struct PolymatrixGame {
    spaces: Vec<ActionSpace>,
    sharpness: f64,
    inner: Polymatrix,
}

impl PolymatrixGame {
    pub fn new(inner: Polymatrix, sharpness: f64) -> Self {
        let s = ActionSpace::simplex(inner.actions).expect("actions >= 2");
        PolymatrixGame {
            spaces: vec![s; inner.players],
            sharpness,
            inner,
        }
    }

    pub fn polymatrix(&self) -> &Polymatrix {
        &self.inner
    }

    fn bilinear_gradient(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        let k = self.inner.actions;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, xj) in joint.iter().enumerate() {
            if j == player {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += (0..k)
                    .map(|c| self.inner.entry(player, j, r, c) * xj[c])
                    .sum::<f64>();
            }
        }
    }
}

impl Game for PolymatrixGame {
    fn name(&self) -> &str {
        "polymatrix"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        self.sharpness
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        let mut g = vec![0.0; self.inner.actions];
        for (i, o) in out.iter_mut().enumerate() {
            self.bilinear_gradient(joint, i, &mut g);
            *o = crate::math::dot(joint[i], &g);
        }
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        self.bilinear_gradient(joint, player, out);
    }
}
