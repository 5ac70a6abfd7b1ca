//! Numerical tolerances shared by every module.
//!
//! All thresholds live here so that a single `[numerics]` block in an
//! experiment config controls them.

use serde::{Deserialize, Serialize};

/// Default cap on one dense complex operator: 512 MiB, enough for L = 12.
pub const DEFAULT_MEMORY_BUDGET: usize = 512 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Max |A - A^H| accepted by the eigensolver.
    pub hermitian_tol: f64,
    /// Eigenvalues closer than this are treated as degenerate.
    pub tol_deg: f64,
    /// Peaks closer than this (energy units of J) are merged.
    pub merge_tol: f64,
    /// Weights below `weight_cutoff * total_weight` are dropped.
    pub weight_cutoff: f64,
    /// Schmidt values below this count as zero.
    pub rank_tol: f64,
    /// Lorentzian half-width used for broadened spectra.
    pub eta: f64,
    pub memory_budget_bytes: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            tol_deg: 1e-9,
            merge_tol: 1e-8,
            weight_cutoff: 1e-10,
            rank_tol: 1e-8,
            eta: 0.05,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
        }
    }
}
