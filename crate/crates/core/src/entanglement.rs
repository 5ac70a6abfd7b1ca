//! Reference entanglement measures for pure tripartite states `A ⊗ M ⊗ B`.

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensolve::eigh_with;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace_pure, ChainBasis, OperatorMatrix, StateVector};
use crate::models::Partition;
use crate::numerics::Numerics;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub s_a: f64,
    pub s_b: f64,
    pub s_m: f64,
    pub e_sq: f64,
    pub schmidt_rank_a_mb: usize,
    pub schmidt_rank_am_b: usize,
    pub schmidt_rank_m_ab: usize,
}

impl EntanglementReport {
    pub fn is_triseparable(&self) -> bool {
        self.schmidt_rank_a_mb == 1 && self.schmidt_rank_am_b == 1
    }
}

/// Eigenvalues below this are dropped from `-Σ λ ln λ`.
const EIGEN_FLOOR: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-8;

/// Von Neumann entropy in nats.
pub fn von_neumann(rho: &OperatorMatrix) -> Result<f64> {
    von_neumann_with(rho, &Numerics::default())
}

pub fn von_neumann_with(rho: &OperatorMatrix, numerics: &Numerics) -> Result<f64> {
    let trace = rho.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
        return Err(Error::TraceNotUnit { trace: trace.re });
    }
    let es = eigh_with(rho, numerics)?;
    Ok(es.values.iter().filter(|&&l| l > EIGEN_FLOOR).map(|&l| -l * l.ln()).sum())
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &Array2<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.dim();
    let mat = Mat::<C64>::from_fn(rows, cols, |i, j| m[[i, j]]);
    let mut s = mat.singular_values().map_err(|_| Error::SvdConvergence { rows, cols })?;
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular value"));
    Ok(s)
}

fn rank(values: &[f64], rank_tol: f64) -> usize {
    1 + values.iter().skip(1).filter(|&&s| s >= rank_tol).count()
}

fn check_state(state: &StateVector, partition: &Partition) -> Result<()> {
    let basis = ChainBasis::spin_half(partition.len())?;
    if state.basis() != &basis {
        return Err(Error::DimensionMismatch { expected: basis.total_dim(), found: state.dim() });
    }
    Ok(())
}

/// Amplitudes as `(M) × (A, B)`.
fn middle_matrix(state: &StateVector, partition: &Partition) -> Array2<C64> {
    let (da, db) = (partition.dim_a(), partition.dim_b());
    let psi = state.amplitudes();
    Array2::from_shape_fn((2, da * db), |(s, ab)| {
        let (a, b) = (ab / db, ab % db);
        psi[(a * 2 + s) * db + b]
    })
}

/// Schmidt ranks across `A|MB`, `AM|B` and `M|AB`.
pub fn schmidt_ranks(state: &StateVector, partition: &Partition, rank_tol: f64) -> Result<[usize; 3]> {
    check_state(state, partition)?;
    let a_mb = singular_values(&state.bipartite_matrix(partition.len_a)?)?;
    let am_b = singular_values(&state.bipartite_matrix(partition.len_a + 1)?)?;
    let m_ab = singular_values(&middle_matrix(state, partition))?;
    Ok([rank(&a_mb, rank_tol), rank(&am_b, rank_tol), rank(&m_ab, rank_tol)])
}

/// `E_sq = (S(A) + S(B) + S(M)) / 2` for a pure state.
pub fn squashed(state: &StateVector, partition: &Partition) -> Result<EntanglementReport> {
    squashed_with(state, partition, &Numerics::default())
}

pub fn squashed_with(state: &StateVector, partition: &Partition, numerics: &Numerics) -> Result<EntanglementReport> {
    check_state(state, partition)?;
    let sites = |r: std::ops::Range<usize>| r.collect::<Vec<_>>();
    let s_a = von_neumann_with(&partial_trace_pure(state, &sites(partition.a_sites()))?, numerics)?;
    let s_b = von_neumann_with(&partial_trace_pure(state, &sites(partition.b_sites()))?, numerics)?;
    let s_m = von_neumann_with(&partial_trace_pure(state, &[partition.middle_site()])?, numerics)?;
    let [r1, r2, r3] = schmidt_ranks(state, partition, numerics.rank_tol)?;
    Ok(EntanglementReport {
        s_a,
        s_b,
        s_m,
        e_sq: 0.5 * (s_a + s_b + s_m),
        schmidt_rank_a_mb: r1,
        schmidt_rank_am_b: r2,
        schmidt_rank_m_ab: r3,
    })
}

/// True iff the state is a product across both `A|MB` and `AM|B`, which for a
/// pure state is the same as being a product over `A`, `M` and `B`.
pub fn triseparable_oracle(state: &StateVector, partition: &Partition, rank_tol: f64) -> Result<bool> {
    let [a_mb, am_b, _] = schmidt_ranks(state, partition, rank_tol)?;
    Ok(a_mb == 1 && am_b == 1)
}
