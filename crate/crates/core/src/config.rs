use serde::{Deserialize, Serialize};

use crate::rational::{ExtRat, Rat};

pub const DEFAULT_DEPTH: u32 = 12;
pub const DEFAULT_BUDGET: usize = 64;

/// Grid and budget settings shared by every search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Schedule levels are `2^-1 .. 2^-depth`; dyadic grids use denominators up to `2^depth`.
    pub depth: u32,
    /// Members returned per family query.
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { depth: DEFAULT_DEPTH, budget: DEFAULT_BUDGET }
    }
}

impl SearchConfig {
    /// Defaults, with the depth taken from `VEX_GRID_DEPTH` when set.
    pub fn from_env() -> SearchConfig {
        let depth = std::env::var("VEX_GRID_DEPTH")
            .ok()
            .and_then(|s| s.trim().parse::<u32>().ok())
            .filter(|d| (1..=40).contains(d))
            .unwrap_or(DEFAULT_DEPTH);
        SearchConfig { depth, ..Default::default() }
    }

    /// `2^-1, 2^-2, …, 2^-levels`
    pub fn schedule(&self, levels: Option<u32>) -> Vec<Rat> {
        (1..=levels.unwrap_or(self.depth) as i32).map(|k| Rat::pow2(-k)).collect()
    }

    /// `+inf, 2^depth, …, 2^-depth`
    pub fn rho_grid(&self) -> Vec<ExtRat> {
        let d = self.depth as i32;
        std::iter::once(ExtRat::PosInf).chain((-d..=d).rev().map(|k| ExtRat::Finite(Rat::pow2(k)))).collect()
    }
}
