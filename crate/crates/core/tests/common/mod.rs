#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sisams::{ActionSpace, Game, MetaStrategy, SupportProfile};

/// `u₁ = x·y = −u₂` on `[−1, 1]²`; atoms ±1 embed matching pennies.
pub struct Pennies {
    spaces: Vec<ActionSpace>,
}

impl Pennies {
    pub fn new() -> Self {
        Pennies {
            spaces: vec![ActionSpace::cube(1, -1.0, 1.0).unwrap(); 2],
        }
    }
}

impl Game for Pennies {
    fn name(&self) -> &str {
        "pennies"
    }
    fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }
    fn sharpness(&self) -> f64 {
        1.0
    }
    fn constant_sum(&self) -> Option<f64> {
        Some(0.0)
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        out[0] = joint[0][0] * joint[1][0];
        out[1] = -out[0];
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        out[0] = if player == 0 {
            joint[1][0]
        } else {
            -joint[0][0]
        };
    }
}

/// Counts utility evaluations of the wrapped game.
pub struct Counting<G> {
    pub inner: G,
    pub utility_calls: AtomicUsize,
}

impl<G: Game> Counting<G> {
    pub fn new(inner: G) -> Self {
        Counting {
            inner,
            utility_calls: AtomicUsize::new(0),
        }
    }
    pub fn calls(&self) -> usize {
        self.utility_calls.load(Ordering::SeqCst)
    }
}

impl<G: Game> Game for Counting<G> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn spaces(&self) -> &[ActionSpace] {
        self.inner.spaces()
    }
    fn sharpness(&self) -> f64 {
        self.inner.sharpness()
    }
    fn constant_sum(&self) -> Option<f64> {
        self.inner.constant_sum()
    }
    fn utility_into(&self, joint: &[&[f64]], out: &mut [f64]) {
        self.utility_calls.fetch_add(1, Ordering::SeqCst);
        self.inner.utility_into(joint, out)
    }
    fn gradient_into(&self, joint: &[&[f64]], player: usize, out: &mut [f64]) {
        self.inner.gradient_into(joint, player, out)
    }
}

pub fn interval_supports(p1: &[f64], p2: &[f64]) -> SupportProfile {
    let space = ActionSpace::cube(1, -1.0, 1.0).unwrap();
    let to_atoms = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
    SupportProfile::from_actions(vec![space.clone(), space], &[to_atoms(p1), to_atoms(p2)]).unwrap()
}

pub fn random_supports(game: &dyn Game, sizes: &[usize], rng: &mut ChaCha8Rng) -> SupportProfile {
    let params = game
        .spaces()
        .iter()
        .zip(sizes)
        .map(|(s, &n)| {
            (0..n * s.param_dim())
                .map(|_| rng.random_range(-1.5..1.5))
                .collect()
        })
        .collect();
    SupportProfile::new(game.spaces().to_vec(), sizes.to_vec(), params).unwrap()
}

pub fn random_meta(sizes: &[usize], rng: &mut ChaCha8Rng) -> MetaStrategy {
    MetaStrategy::new(
        sizes
            .iter()
            .map(|&n| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * a.abs().max(b.abs())
}
