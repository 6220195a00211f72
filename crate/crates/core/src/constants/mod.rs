//! Graph-functional constants estimated on homogeneous Poisson processes.
//!
//! The variance formulas consume moments of the local degree statistics of
//! the origin added to a unit-rate Poisson process in `R^d`. These are
//! estimated on a periodic window (no boundary), pooling every vertex of a
//! replicate since all torus vertices are exchangeable with the origin.
//! Standard errors come from the spread of replicate-level averages.

mod cache;
mod diagnostics;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::{lookup, read_cache, write_cache, CACHE_VERSION};
pub use diagnostics::{
    joint_degree_covariance, moment_check_cd, stabilization_tail, JointDegreeCovariance, MomentCheck,
    TailEstimate,
};

use crate::error::{invalid_param, Error, Result};
use crate::functional::{local_stats_unchecked, Functional};
use crate::geom::{build_graph, Metric};
use crate::mc::Estimate;
use crate::sampling::{sample_poisson_torus, SeededRng};

/// Expected torus population used when no window side is given.
pub const DEFAULT_EXPECTED_COUNT: f64 = 2000.0;
/// Smallest expected population accepted for constant estimation.
pub const MIN_EXPECTED_COUNT: f64 = 500.0;
pub const MIN_REPLICATES: usize = 50;

/// Moments of the origin's local degree statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    /// `E Δ0↑`, mean out-degree.
    EDeltaUp,
    /// `E Δ0↓`, mean in-degree.
    EDeltaDown,
    /// `Var Δ0↓`.
    VarDeltaDown,
    /// `E (Δ0↓)^2`; the squared degree for symmetrized graphs.
    EDeltaSq,
    ET2Up,
    ET2Down,
    ET2Mixed,
    /// `E Δ0+`, mean number of reciprocal neighbours.
    EDeltaPlus,
}

impl Symbol {
    pub const ALL: [Symbol; 8] = [
        Symbol::EDeltaUp,
        Symbol::EDeltaDown,
        Symbol::VarDeltaDown,
        Symbol::EDeltaSq,
        Symbol::ET2Up,
        Symbol::ET2Down,
        Symbol::ET2Mixed,
        Symbol::EDeltaPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Symbol::EDeltaUp => "e_delta_up",
            Symbol::EDeltaDown => "e_delta_down",
            Symbol::VarDeltaDown => "var_delta_down",
            Symbol::EDeltaSq => "e_delta_sq",
            Symbol::ET2Up => "e_t2_up",
            Symbol::ET2Down => "e_t2_down",
            Symbol::ET2Mixed => "e_t2_mixed",
            Symbol::EDeltaPlus => "e_delta_plus",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Symbol::ALL
            .into_iter()
            .find(|sym| sym.name() == s)
            .ok_or_else(|| invalid_param(format!("unknown constant {s:?}")))
    }
}

/// Estimated constants for one functional in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalConstants {
    pub kind: Functional,
    pub d: usize,
    pub side: f64,
    pub n_replicates: usize,
    pub seed: u64,
    pub values: BTreeMap<Symbol, Estimate>,
}

impl FunctionalConstants {
    pub fn get(&self, sym: Symbol) -> Option<Estimate> {
        self.values.get(&sym).copied()
    }

    /// The constant, or an incomplete-constants error naming it.
    pub fn require(&self, sym: Symbol) -> Result<Estimate> {
        self.get(sym).ok_or(Error::IncompleteConstants(sym.name()))
    }

    pub fn set(&mut self, sym: Symbol, est: Estimate) {
        self.values.insert(sym, est);
    }

    /// Constants known in closed form: for K-NN, `E Δ0↑ = E Δ0↓ = K` and
    /// `E T2↑ = K(K-1)/2`. None are exact for the MST.
    pub fn analytic(kind: Functional, d: usize) -> Self {
        let mut values = BTreeMap::new();
        match kind {
            Functional::Knn(k) => {
                let k = k as f64;
                values.insert(Symbol::EDeltaUp, Estimate::exact(k));
                values.insert(Symbol::EDeltaDown, Estimate::exact(k));
                values.insert(Symbol::ET2Up, Estimate::exact(k * (k - 1.0) / 2.0));
            }
            Functional::Mst => {}
        }
        Self { kind, d, side: 0.0, n_replicates: 0, seed: 0, values }
    }
}

/// Settings for [`estimate_constants`].
#[derive(Debug, Clone)]
pub struct ConstantsConfig {
    pub kind: Functional,
    pub d: usize,
    pub intensity: f64,
    /// Window side; `None` picks the side giving [`DEFAULT_EXPECTED_COUNT`].
    pub side: Option<f64>,
    pub n_replicates: usize,
    pub rng: SeededRng,
}

impl ConstantsConfig {
    pub fn new(kind: Functional, d: usize, n_replicates: usize, seed: u64) -> Self {
        Self { kind, d, intensity: 1.0, side: None, n_replicates, rng: SeededRng::new(seed) }
    }

    pub fn resolved_side(&self) -> f64 {
        self.side.unwrap_or_else(|| (DEFAULT_EXPECTED_COUNT / self.intensity).powf(1.0 / self.d as f64))
    }
}

/// Per-replicate averages, in [`Symbol::ALL`] order.
fn replicate_moments(cfg: &ConstantsConfig, side: f64, index: usize) -> Result<[f64; 8]> {
    let cloud = sample_poisson_torus(cfg.intensity, side, cfg.d, &cfg.rng.child(index as u64))?;
    let graph = build_graph(&cloud, cfg.kind, Metric::Torus { side })?;
    let n = cloud.len() as f64;
    let mut acc = [0.0f64; 8];
    for v in 0..cloud.len() {
        let s = local_stats_unchecked(&graph, v);
        let din = s.in_deg as f64;
        acc[0] += s.out_deg as f64;
        acc[1] += din;
        acc[3] += din * din;
        acc[4] += s.t2_up as f64;
        acc[5] += s.t2_down as f64;
        acc[6] += s.t2_mixed as f64;
        acc[7] += s.recip as f64;
    }
    for a in acc.iter_mut() {
        *a /= n;
    }
    acc[2] = acc[3] - acc[1] * acc[1];
    Ok(acc)
}

/// Simulates unit-rate Poisson processes on a torus, builds the functional's
/// graph with the periodic metric and returns pooled degree moments.
pub fn estimate_constants(cfg: &ConstantsConfig) -> Result<FunctionalConstants> {
    if cfg.d == 0 {
        return Err(invalid_param("dimension must be positive"));
    }
    if cfg.n_replicates < MIN_REPLICATES {
        return Err(invalid_param(format!(
            "need at least {MIN_REPLICATES} replicates, got {}",
            cfg.n_replicates
        )));
    }
    let side = cfg.resolved_side();
    let expected = cfg.intensity * side.powi(cfg.d as i32);
    if expected < MIN_EXPECTED_COUNT {
        return Err(invalid_param(format!(
            "expected count {expected:.1} per window is below {MIN_EXPECTED_COUNT}"
        )));
    }
    let reps: Vec<[f64; 8]> = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|i| replicate_moments(cfg, side, i))
        .collect::<Result<_>>()?;

    let mut out = FunctionalConstants::analytic(cfg.kind, cfg.d);
    out.side = side;
    out.n_replicates = cfg.n_replicates;
    out.seed = cfg.rng.base_seed;
    for (j, sym) in Symbol::ALL.into_iter().enumerate() {
        let exact = matches!(cfg.kind, Functional::Knn(_)) && matches!(sym, Symbol::EDeltaUp | Symbol::ET2Up);
        if exact {
            continue;
        }
        let column: Vec<f64> = reps.iter().map(|r| r[j]).collect();
        out.set(sym, Estimate::from_samples(&column));
    }
    Ok(out)
}
