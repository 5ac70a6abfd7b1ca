//! Dense Hermitian eigendecomposition.
//!
//! The matrix is first split into the connected components of its nonzero
//! pattern (exactly decoupled blocks such as magnetization sectors); each
//! block is diagonalized densely and sequentially, so output is
//! bit-reproducible. Real blocks take the real symmetric path.

use faer::{Mat, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{ChainBasis, OperatorMatrix, StateVector};
use crate::numerics::Numerics;

/// Ascending eigenvalues with eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
    basis: ChainBasis,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn basis(&self) -> &ChainBasis {
        &self.basis
    }

    pub fn state(&self, k: usize) -> StateVector {
        StateVector::new(self.basis.clone(), self.vectors.column(k).to_owned())
            .expect("eigenvector length matches basis")
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Array2<C64> {
        let scaled = Array2::from_shape_fn(self.vectors.dim(), |(i, k)| self.vectors[[i, k]] * self.values[k]);
        scaled.dot(&crate::hilbert::adjoint(&self.vectors))
    }
}

pub fn eigh(op: &OperatorMatrix) -> Result<EigenSystem> {
    eigh_with(op, &Numerics::default())
}

pub fn eigh_with(op: &OperatorMatrix, numerics: &Numerics) -> Result<EigenSystem> {
    let deviation = op.hermitian_deviation();
    if !(deviation <= numerics.hermitian_tol) {
        return Err(Error::NotHermitian { deviation });
    }
    let a = op.entries();
    let n = a.nrows();
    let blocks = decoupled_blocks(a);

    // (eigenvalue, block, column within block); the stable sort keeps block
    // order for exact ties.
    let mut order: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    let mut block_vectors = Vec::with_capacity(blocks.len());
    for (b, idx) in blocks.iter().enumerate() {
        let (vals, vecs) = dense_block(a, idx, n)?;
        order.extend(vals.iter().enumerate().map(|(k, &v)| (v, b, k)));
        block_vectors.push(vecs);
    }
    if order.iter().any(|t| !t.0.is_finite()) {
        return Err(Error::EigenConvergence { block: n, dim: n });
    }
    order.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));

    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for (col, &(v, b, k)) in order.iter().enumerate() {
        values[col] = v;
        for (r, &row) in blocks[b].iter().enumerate() {
            vectors[[row, col]] = block_vectors[b][[r, k]];
        }
    }
    Ok(EigenSystem { values, vectors, basis: op.basis().clone() })
}

/// Connected components of the nonzero pattern, each sorted, ordered by
/// their smallest index.
fn decoupled_blocks(a: &Array2<C64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let zero = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            if a[[i, j]] != zero || a[[j, i]] != zero {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

fn dense_block(a: &Array2<C64>, idx: &[usize], dim: usize) -> Result<(Vec<f64>, Array2<C64>)> {
    let m = idx.len();
    let real = idx.iter().all(|&i| idx.iter().all(|&j| a[[i, j]].im == 0.0));
    let fail = |_| Error::EigenConvergence { block: m, dim };
    if real {
        let sub = Mat::<f64>::from_fn(m, m, |i, j| a[[idx[i], idx[j]]].re);
        let evd = sub.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let vals = (0..m).map(|k| s[k]).collect();
        let vecs = Array2::from_shape_fn((m, m), |(i, k)| C64::new(u[(i, k)], 0.0));
        Ok((vals, vecs))
    } else {
        let sub = Mat::<C64>::from_fn(m, m, |i, j| a[[idx[i], idx[j]]]);
        let evd = sub.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let vals = (0..m).map(|k| s[k].re).collect();
        let vecs = Array2::from_shape_fn((m, m), |(i, k)| u[(i, k)]);
        Ok((vals, vecs))
    }
}

/// Lowest eigenpair. Exact or near (`tol_deg`) ties resolve to the first
/// vector in eigensolver order.
pub fn ground_state(op: &OperatorMatrix) -> Result<(f64, StateVector)> {
    let es = eigh(op)?;
    Ok((es.values[0], es.state(0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExcitedPolicy {
    /// The single state closest to `(E_min + E_max) / 2`.
    MidSpectrum,
    /// All states with `(E - E_min) / (E_max - E_min)` in `[lo, hi]`.
    EnergyWindow { lo: f64, hi: f64 },
}

pub fn select_excited(es: &EigenSystem, policy: ExcitedPolicy) -> Result<Vec<usize>> {
    let v = &es.values;
    if v.is_empty() {
        return Err(Error::EmptyWindow { lo: 0.0, hi: 1.0 });
    }
    let (emin, emax) = (v[0], v[v.len() - 1]);
    match policy {
        ExcitedPolicy::MidSpectrum => {
            let mid = 0.5 * (emin + emax);
            let best = (0..v.len())
                .min_by(|&i, &j| (v[i] - mid).abs().partial_cmp(&(v[j] - mid).abs()).expect("finite"))
                .expect("non-empty");
            Ok(vec![best])
        }
        ExcitedPolicy::EnergyWindow { lo, hi } => {
            if !(lo <= hi) {
                return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] is reversed")));
            }
            let width = emax - emin;
            let picked: Vec<usize> = (0..v.len())
                .filter(|&i| {
                    let x = if width > 0.0 { (v[i] - emin) / width } else { 0.0 };
                    x >= lo && x <= hi
                })
                .collect();
            if picked.is_empty() {
                Err(Error::EmptyWindow { lo, hi })
            } else {
                Ok(picked)
            }
        }
    }
}
