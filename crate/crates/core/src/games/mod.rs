//! Benchmark game construction.

mod bench;
mod finite;

use serde::{Deserialize, Serialize};

pub use bench::{
    AllPayGame, BlottoGame, ChopstickGame, CircleGame, GlicksbergGrossGame, IntervalGame,
    PolymatrixGame, SecurityGame,
};
pub use finite::{random_polymatrix, FiniteGame, Polymatrix};

use crate::error::{invalid, Result};
use crate::game::Game;

/// Default softmax sharpness.
pub const DEFAULT_SHARPNESS: f64 = 20.0;
/// Default distance scale of the security game.
pub const DEFAULT_DISTANCE_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Interval,
    Circle,
    GlicksbergGross,
    Blotto,
    Security,
    AllPay,
    Chopstick,
    Polymatrix,
}

impl GameKind {
    pub const ALL: [GameKind; 8] = [
        GameKind::Interval,
        GameKind::Circle,
        GameKind::GlicksbergGross,
        GameKind::Blotto,
        GameKind::Security,
        GameKind::AllPay,
        GameKind::Chopstick,
        GameKind::Polymatrix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Interval => "interval",
            GameKind::Circle => "circle",
            GameKind::GlicksbergGross => "glicksberg_gross",
            GameKind::Blotto => "blotto",
            GameKind::Security => "security",
            GameKind::AllPay => "all_pay",
            GameKind::Chopstick => "chopstick",
            GameKind::Polymatrix => "polymatrix",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == name)
            .ok_or_else(|| invalid(format!("unknown game '{name}'")))
    }

    pub fn description(self) -> &'static str {
        match self {
            GameKind::Interval => "u1 = -u2 = (x-y)^2 on [-1,1]^2",
            GameKind::Circle => "u1 = -u2 = |x-y|^2 on the unit circle",
            GameKind::GlicksbergGross => "u1 = -u2 = (1+x)(1+y)(1-xy)/(1+xy)^2 on [0,1]^2",
            GameKind::Blotto => "continuous Colonel Blotto, softmax battlefield wins",
            GameKind::Security => "u1 = -u2 = 1/(1+(x-y)^2/d^2) on [0,1]^2",
            GameKind::AllPay => "all-pay auction, u = softmax(beta a) - a on [0,1]^n",
            GameKind::Chopstick => "two bidders, three chopsticks, pairs worth 1",
            GameKind::Polymatrix => "random pairwise zero-sum polymatrix game (mixed extension)",
        }
    }
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_players() -> usize {
    2
}
fn default_items() -> usize {
    3
}
fn default_scale() -> f64 {
    DEFAULT_DISTANCE_SCALE
}
fn default_sharpness() -> f64 {
    DEFAULT_SHARPNESS
}

/// Declarative description of a benchmark game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub name: GameKind,
    #[serde(default = "default_players")]
    pub players: usize,
    /// Battlefields (blotto), items (chopstick) or actions per player (polymatrix).
    #[serde(default = "default_items")]
    pub items: usize,
    #[serde(default = "default_scale")]
    pub distance_scale: f64,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GameSpec {
    pub fn new(name: GameKind) -> Self {
        GameSpec {
            name,
            players: default_players(),
            items: default_items(),
            distance_scale: default_scale(),
            sharpness: default_sharpness(),
            seed: 0,
        }
    }

    pub fn with_players(mut self, players: usize) -> Self {
        self.players = players;
        self
    }

    pub fn with_items(mut self, items: usize) -> Self {
        self.items = items;
        self
    }

    pub fn with_sharpness(mut self, sharpness: f64) -> Self {
        self.sharpness = sharpness;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(invalid("sharpness must be positive"));
        }
        if !(self.distance_scale > 0.0 && self.distance_scale.is_finite()) {
            return Err(invalid("distance_scale must be positive"));
        }
        match self.name {
            GameKind::Interval
            | GameKind::Circle
            | GameKind::GlicksbergGross
            | GameKind::Security
                if self.players != 2 =>
            {
                Err(invalid(format!("{} is a two-player game", self.name)))
            }
            GameKind::Chopstick if self.players != 2 || self.items != ChopstickGame::ITEMS => {
                Err(invalid("chopstick requires players = 2 and items = 3"))
            }
            GameKind::Blotto if self.items < 2 => {
                Err(invalid("blotto requires at least 2 battlefields"))
            }
            GameKind::Polymatrix if self.items < 2 => {
                Err(invalid("polymatrix requires at least 2 actions"))
            }
            _ if self.players < 2 => Err(invalid("games need at least 2 players")),
            _ => Ok(()),
        }
    }
}

/// Constructs the game described by `spec`.
pub fn build_game(spec: &GameSpec) -> Result<Box<dyn Game>> {
    spec.validate()?;
    let beta = spec.sharpness;
    Ok(match spec.name {
        GameKind::Interval => Box::new(IntervalGame::new(beta)),
        GameKind::Circle => Box::new(CircleGame::new(beta)),
        GameKind::GlicksbergGross => Box::new(GlicksbergGrossGame::new(beta)),
        GameKind::Blotto => Box::new(BlottoGame::new(spec.players, spec.items, beta)),
        GameKind::Security => Box::new(SecurityGame::new(spec.distance_scale, beta)),
        GameKind::AllPay => Box::new(AllPayGame::new(spec.players, beta)),
        GameKind::Chopstick => Box::new(ChopstickGame::new(beta)),
        GameKind::Polymatrix => Box::new(PolymatrixGame::new(
            Polymatrix::random(spec.players, spec.items, spec.seed)?,
            beta,
        )),
    })
}

/// Builds a game from its name with default parameters.
pub fn build_named(name: &str) -> Result<Box<dyn Game>> {
    build_game(&GameSpec::new(GameKind::parse(name)?))
}
