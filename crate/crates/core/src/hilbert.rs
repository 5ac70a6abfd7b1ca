//! Tensor-product Hilbert spaces of spin chains.
//!
//! Basis states are indexed in mixed radix with site 0 as the most
//! significant digit. On a spin-1/2 site digit 0 is `|↑⟩` and digit 1 is
//! `|↓⟩`; an extended site adds digit 2 for the auxiliary level `|ø⟩`.

use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const AUX: usize = 2;

/// Local spin-1/2 operators, `S = σ/2`, in the `(↑, ↓)` basis.
pub mod spin {
    use ndarray::{array, Array2};
    use num_complex::Complex64 as C64;

    const HALF: C64 = C64::new(0.5, 0.0);
    const ZERO: C64 = C64::new(0.0, 0.0);

    pub fn sx() -> Array2<C64> {
        array![[ZERO, HALF], [HALF, ZERO]]
    }

    pub fn sy() -> Array2<C64> {
        array![[ZERO, C64::new(0.0, -0.5)], [C64::new(0.0, 0.5), ZERO]]
    }

    pub fn sz() -> Array2<C64> {
        array![[HALF, ZERO], [ZERO, -HALF]]
    }

    pub fn identity(dim: usize) -> Array2<C64> {
        Array2::eye(dim)
    }
}

pub(crate) fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub(crate) fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

/// Ordered list of local dimensions of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainBasis {
    local_dims: Vec<usize>,
    total_dim: usize,
}

impl ChainBasis {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(Error::InvalidParameter("chain must have at least one site".into()));
        }
        if let Some(&d) = local_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidParameter(format!("local dimension {d} < 2")));
        }
        let total_dim = local_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidParameter("Hilbert space dimension overflows".into()))?;
        Ok(Self { local_dims, total_dim })
    }

    /// `len` spin-1/2 sites.
    pub fn spin_half(len: usize) -> Result<Self> {
        Self::new(vec![2; len])
    }

    /// Spin-1/2 chain whose site `aux_site` carries the extra level `|ø⟩`.
    pub fn with_auxiliary(len: usize, aux_site: usize) -> Result<Self> {
        if aux_site >= len {
            return Err(Error::InvalidSiteSet(format!("site {aux_site} outside chain of {len}")));
        }
        let mut dims = vec![2; len];
        dims[aux_site] = 3;
        Self::new(dims)
    }

    pub fn len(&self) -> usize {
        self.local_dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_dims.is_empty()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn local_dim(&self, site: usize) -> usize {
        self.local_dims[site]
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Product of the local dimensions of `sites`.
    pub fn span_dim(&self, sites: std::ops::Range<usize>) -> usize {
        self.local_dims[sites].iter().product()
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: digits.len() });
        }
        let mut index = 0;
        for (&d, &dim) in digits.iter().zip(&self.local_dims) {
            if d >= dim {
                return Err(Error::InvalidParameter(format!("digit {d} >= local dim {dim}")));
            }
            index = index * dim + d;
        }
        Ok(index)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.len()];
        for (slot, &dim) in digits.iter_mut().zip(&self.local_dims).rev() {
            *slot = index % dim;
            index /= dim;
        }
        digits
    }

    pub fn sub_basis(&self, sites: std::ops::Range<usize>) -> Result<Self> {
        if sites.start >= sites.end || sites.end > self.len() {
            return Err(Error::InvalidSiteSet(format!("{sites:?} in chain of {}", self.len())));
        }
        Self::new(self.local_dims[sites].to_vec())
    }

    /// Checks that `sites` is a non-empty, contiguous, in-range run and
    /// returns it as a range.
    pub fn contiguous(&self, sites: &[usize]) -> Result<std::ops::Range<usize>> {
        let (&first, &last) = match (sites.first(), sites.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidSiteSet("empty site set".into())),
        };
        if sites.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidSiteSet(format!("{sites:?} is not a contiguous ascending block")));
        }
        if last >= self.len() {
            return Err(Error::InvalidSiteSet(format!("site {last} outside chain of {}", self.len())));
        }
        Ok(first..last + 1)
    }

    /// Number of sites covered by an operator of dimension `op_dim` that
    /// starts at `first_site`.
    fn span_len(&self, first_site: usize, op_dim: usize) -> Result<usize> {
        let mut prod = 1;
        for (k, &d) in self.local_dims.iter().enumerate().skip(first_site) {
            prod *= d;
            if prod == op_dim {
                return Ok(k + 1 - first_site);
            }
            if prod > op_dim {
                break;
            }
        }
        Err(Error::DimensionMismatch { expected: prod, found: op_dim })
    }
}

/// Dense complex operator on a [`ChainBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: ChainBasis,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn zeros(basis: ChainBasis) -> Self {
        let d = basis.total_dim();
        Self { basis, entries: Array2::zeros((d, d)) }
    }

    pub fn identity(basis: ChainBasis) -> Self {
        let d = basis.total_dim();
        Self { basis, entries: Array2::eye(d) }
    }

    pub fn from_entries(basis: ChainBasis, entries: Array2<C64>) -> Result<Self> {
        let d = basis.total_dim();
        if entries.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: entries.nrows() });
        }
        Ok(Self { basis, entries })
    }

    pub fn basis(&self) -> &ChainBasis {
        &self.basis
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() < tol
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.basis, other.basis, "operators live on different bases");
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn dot(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { basis: self.basis.clone(), entries: self.entries.dot(&other.entries) })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.dot(other)? - &other.dot(self)?)
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), entries: adjoint(&self.entries) }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if self.basis != state.basis {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        Ok(StateVector { basis: self.basis.clone(), amplitudes: self.entries.dot(&state.amplitudes) })
    }

    /// Adds `coeff · (I ⊗ op ⊗ I)` where `op` acts on the contiguous run of
    /// sites starting at `first_site`.
    pub fn add_local(&mut self, first_site: usize, op: &Array2<C64>, coeff: C64) -> Result<()> {
        let span = op.nrows();
        if op.ncols() != span {
            return Err(Error::DimensionMismatch { expected: span, found: op.ncols() });
        }
        if first_site >= self.basis.len() {
            return Err(Error::InvalidSiteSet(format!("site {first_site} outside chain of {}", self.basis.len())));
        }
        let k = self.basis.span_len(first_site, span)?;
        let low = self.basis.span_dim(first_site + k..self.basis.len());
        for col in 0..self.dim() {
            let local = (col / low) % span;
            let base = col - local * low;
            for r in 0..span {
                let v = op[[r, local]];
                if v != C64::new(0.0, 0.0) {
                    self.entries[[base + r * low, col]] += coeff * v;
                }
            }
        }
        Ok(())
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.entries.mapv_inplace(|z| z * c);
        self
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.basis, rhs.basis, "operators live on different bases");
        OperatorMatrix { basis: self.basis.clone(), entries: &self.entries + &rhs.entries }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.basis, rhs.basis, "operators live on different bases");
        OperatorMatrix { basis: self.basis.clone(), entries: &self.entries - &rhs.entries }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.dot(rhs).expect("operators live on different bases")
    }
}

/// Embeds a single-site operator: `I ⊗ … ⊗ op ⊗ … ⊗ I`.
pub fn lift_local(op: &Array2<C64>, site: usize, basis: &ChainBasis) -> Result<OperatorMatrix> {
    if site >= basis.len() {
        return Err(Error::InvalidSiteSet(format!("site {site} outside chain of {}", basis.len())));
    }
    let d = basis.local_dim(site);
    if op.dim() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
    }
    let mut out = OperatorMatrix::zeros(basis.clone());
    out.add_local(site, op, C64::new(1.0, 0.0))?;
    Ok(out)
}

/// Embeds an operator acting on a contiguous run of sites starting at
/// `first_site`; the run length is inferred from the operator dimension.
pub fn lift_span(op: &Array2<C64>, first_site: usize, basis: &ChainBasis) -> Result<OperatorMatrix> {
    let mut out = OperatorMatrix::zeros(basis.clone());
    out.add_local(first_site, op, C64::new(1.0, 0.0))?;
    Ok(out)
}

/// Pure state over a [`ChainBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: ChainBasis,
    amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn new(basis: ChainBasis, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != basis.total_dim() {
            return Err(Error::DimensionMismatch { expected: basis.total_dim(), found: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: ChainBasis) -> Self {
        let d = basis.total_dim();
        Self { basis, amplitudes: Array1::zeros(d) }
    }

    /// Product basis state with the given local digits.
    pub fn product(basis: ChainBasis, digits: &[usize]) -> Result<Self> {
        let k = basis.encode(digits)?;
        let mut s = Self::zeros(basis);
        s.amplitudes[k] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn basis(&self) -> &ChainBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() < tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        self.amplitudes.mapv_inplace(|z| z / n);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Amplitudes reshaped to a `(dim left of cut) × (dim from cut on)` matrix.
    pub fn bipartite_matrix(&self, cut: usize) -> Result<Array2<C64>> {
        if cut == 0 || cut >= self.basis.len() {
            return Err(Error::InvalidSiteSet(format!("cut {cut} must split a chain of {} sites", self.basis.len())));
        }
        let left = self.basis.span_dim(0..cut);
        let right = self.dim() / left;
        Ok(self.amplitudes.clone().into_shape_with_order((left, right)).expect("contiguous amplitudes"))
    }
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(state: &StateVector, op: &OperatorMatrix) -> Result<C64> {
    let applied = op.apply(state)?;
    state.inner(&applied)
}

/// Reduced density matrix of a pure state on the contiguous block `keep`.
pub fn partial_trace_pure(state: &StateVector, keep: &[usize]) -> Result<OperatorMatrix> {
    let basis = state.basis();
    let range = basis.contiguous(keep)?;
    let left = basis.span_dim(0..range.start);
    let mid = basis.span_dim(range.clone());
    let right = basis.span_dim(range.end..basis.len());
    // Rows: kept index; columns: (left, right) environment index.
    let amps = state.amplitudes();
    let m = Array2::from_shape_fn((mid, left * right), |(k, env)| {
        let (l, r) = (env / right, env % right);
        amps[(l * mid + k) * right + r]
    });
    let rho = m.dot(&adjoint(&m));
    OperatorMatrix::from_entries(basis.sub_basis(range)?, rho)
}

/// Partial trace of a density matrix onto the contiguous block `keep`.
pub fn partial_trace(rho: &OperatorMatrix, keep: &[usize]) -> Result<OperatorMatrix> {
    let basis = rho.basis();
    let range = basis.contiguous(keep)?;
    let left = basis.span_dim(0..range.start);
    let mid = basis.span_dim(range.clone());
    let right = basis.span_dim(range.end..basis.len());
    let e = rho.entries();
    let out = Array2::from_shape_fn((mid, mid), |(a, b)| {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..left {
            for r in 0..right {
                acc += e[[(l * mid + a) * right + r, (l * mid + b) * right + r]];
            }
        }
        acc
    });
    OperatorMatrix::from_entries(basis.sub_basis(range)?, out)
}

/// `|ψ⟩⟨ψ|`.
pub fn projector(state: &StateVector) -> OperatorMatrix {
    let a = state.amplitudes();
    let n = a.len();
    let entries = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
    OperatorMatrix { basis: state.basis.clone(), entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_state(basis: ChainBasis, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = Array1::from_shape_fn(basis.total_dim(), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        StateVector::new(basis, amps).unwrap().normalized().unwrap()
    }

    fn random_local(dim: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        Array2::from_shape_fn((dim, dim), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn ghz3() -> StateVector {
        let b = ChainBasis::spin_half(3).unwrap();
        let mut s = StateVector::zeros(b.clone());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        s.amplitudes[b.encode(&[UP, UP, UP]).unwrap()] = c(r);
        s.amplitudes[b.encode(&[DOWN, DOWN, DOWN]).unwrap()] = c(r);
        s
    }

    #[test]
    fn lift_identity_is_identity() {
        let b = ChainBasis::spin_half(3).unwrap();
        for site in 0..3 {
            let op = lift_local(&spin::identity(2), site, &b).unwrap();
            assert_eq!(op, OperatorMatrix::identity(b.clone()));
        }
    }

    #[test]
    fn lift_sz_on_first_site() {
        let b = ChainBasis::spin_half(2).unwrap();
        let op = lift_local(&spin::sz(), 0, &b).unwrap();
        let expected = Array2::from_diag(&array![c(0.5), c(0.5), c(-0.5), c(-0.5)]);
        assert_eq!(op.entries(), &expected);
    }

    #[test]
    fn lift_sx_flips_middle_spin() {
        let b = ChainBasis::spin_half(3).unwrap();
        let op = lift_local(&spin::sx(), 1, &b).unwrap();
        let down = StateVector::product(b.clone(), &[DOWN, DOWN, DOWN]).unwrap();
        let out = op.apply(&down).unwrap();
        // Oracle: enumerate the 8 basis states by hand; only |↓↑↓⟩ = index 5 is hit.
        let mut expected = Array1::zeros(8);
        expected[0b101] = c(0.5);
        assert_eq!(out.amplitudes(), &expected);
    }

    #[test]
    fn lift_rejects_wrong_dimension() {
        let b = ChainBasis::spin_half(3).unwrap();
        assert!(matches!(lift_local(&spin::identity(3), 0, &b), Err(Error::DimensionMismatch { .. })));
        assert!(lift_local(&spin::sz(), 3, &b).is_err());
    }

    #[test]
    fn lift_span_matches_kron() {
        let b = ChainBasis::spin_half(4).unwrap();
        let bond = kron(&spin::sx(), &spin::sy());
        let lifted = lift_span(&bond, 1, &b).unwrap();
        let expected = kron(&kron(&spin::identity(2), &bond), &spin::identity(2));
        assert!(max_abs_diff(lifted.entries(), &expected) < 1e-15);
    }

    #[test]
    fn lift_on_auxiliary_site() {
        let b = ChainBasis::with_auxiliary(3, 1).unwrap();
        assert_eq!(b.total_dim(), 12);
        let mut p_aux = Array2::zeros((3, 3));
        p_aux[[AUX, AUX]] = c(1.0);
        let op = lift_local(&p_aux, 1, &b).unwrap();
        let s = StateVector::product(b.clone(), &[UP, AUX, DOWN]).unwrap();
        assert_eq!(expectation(&s, &op).unwrap(), c(1.0));
        let expected = kron(&kron(&spin::identity(2), &p_aux), &spin::identity(2));
        assert!(max_abs_diff(op.entries(), &expected) < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let b = ChainBasis::spin_half(3).unwrap();
        let s = StateVector::product(b, &[DOWN, DOWN, DOWN]).unwrap();
        let rho = partial_trace_pure(&s, &[1]).unwrap();
        assert_eq!(rho.entries(), &Array2::from_diag(&array![c(0.0), c(1.0)]));
    }

    #[test]
    fn partial_trace_ghz_single_site() {
        let rho = partial_trace_pure(&ghz3(), &[0]).unwrap();
        assert!(max_abs_diff(rho.entries(), &Array2::from_diag(&array![c(0.5), c(0.5)])) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = ChainBasis::spin_half(3).unwrap();
        let s = random_state(b.clone(), &mut rng);
        let rho = partial_trace_pure(&s, &[0, 1]).unwrap();
        // Oracle: ρ[a,b] = Σ_c ψ(a,c) ψ*(b,c) with explicit digit decoding.
        let mut oracle = Array2::<C64>::zeros((4, 4));
        for i in 0..8 {
            for j in 0..8 {
                let (di, dj) = (b.decode(i), b.decode(j));
                if di[2] == dj[2] {
                    oracle[[di[0] * 2 + di[1], dj[0] * 2 + dj[1]]] += s.amplitudes()[i] * s.amplitudes()[j].conj();
                }
            }
        }
        assert!(max_abs_diff(rho.entries(), &oracle) < 1e-14);
        assert!((rho.trace() - c(1.0)).norm() < 1e-12);
        let vals = crate::eigensolve::eigh(&rho).unwrap().values;
        assert!(vals.iter().all(|&v| v >= -1e-12));
        // The density-matrix route agrees with the pure-state route.
        let via_rho = partial_trace(&projector(&s), &[0, 1]).unwrap();
        assert!(via_rho.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_sites() {
        let s = ghz3();
        assert!(matches!(partial_trace_pure(&s, &[0, 2]), Err(Error::InvalidSiteSet(_))));
        assert!(matches!(partial_trace_pure(&s, &[]), Err(Error::InvalidSiteSet(_))));
        assert!(matches!(partial_trace_pure(&s, &[3]), Err(Error::InvalidSiteSet(_))));
    }

    #[test]
    fn expectation_values() {
        let b = ChainBasis::spin_half(3).unwrap();
        let s = StateVector::product(b.clone(), &[DOWN, DOWN, DOWN]).unwrap();
        let mut sz_tot = OperatorMatrix::zeros(b.clone());
        for i in 0..3 {
            sz_tot.add_local(i, &spin::sz(), c(1.0)).unwrap();
        }
        assert_eq!(expectation(&s, &sz_tot).unwrap(), c(-1.5));
        let g = ghz3();
        assert!((expectation(&g, &OperatorMatrix::identity(b)).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn expectation_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = ChainBasis::spin_half(4).unwrap();
        let s = random_state(b.clone(), &mut rng);
        let a = random_local(16, &mut rng);
        let h = &a + &adjoint(&a);
        let op = OperatorMatrix::from_entries(b, h.clone()).unwrap();
        let mut oracle = C64::new(0.0, 0.0);
        for i in 0..16 {
            for j in 0..16 {
                oracle += s.amplitudes()[i].conj() * h[[i, j]] * s.amplitudes()[j];
            }
        }
        let got = expectation(&s, &op).unwrap();
        assert!((got - oracle).norm() < 1e-12);
        assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = ghz3();
        let op = OperatorMatrix::identity(ChainBasis::spin_half(2).unwrap());
        assert!(matches!(expectation(&s, &op), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn encode_decode_bijection(dims in prop::collection::vec(2usize..=3, 1..6), seed in any::<u64>()) {
            let b = ChainBasis::new(dims).unwrap();
            let k = (seed as usize) % b.total_dim();
            prop_assert_eq!(b.encode(&b.decode(k)).unwrap(), k);
        }

        #[test]
        fn lift_respects_products_and_locality(seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = ChainBasis::spin_half(4).unwrap();
            let (x, y) = (random_local(2, &mut rng), random_local(2, &mut rng));
            let lx = lift_local(&x, i, &b).unwrap();
            let composed = lift_local(&x.dot(&y), i, &b).unwrap();
            let product = &lx * &lift_local(&y, i, &b).unwrap();
            prop_assert!(composed.max_abs_diff(&product) < 1e-12);
            if i != j {
                let ly = lift_local(&y, j, &b).unwrap();
                prop_assert!(lx.commutator(&ly).unwrap().max_abs() < 1e-12);
            }
        }

        #[test]
        fn partial_trace_preserves_trace_and_hermiticity(seed in any::<u64>(), start in 0usize..4, len in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = ChainBasis::spin_half(4).unwrap();
            let s = random_state(b, &mut rng);
            let end = (start + len).min(4);
            let keep: Vec<usize> = (start..end).collect();
            let rho = partial_trace_pure(&s, &keep).unwrap();
            prop_assert!((rho.trace() - c(1.0)).norm() < 1e-12);
            prop_assert!(rho.is_hermitian(1e-12));
            if keep.len() == 4 {
                prop_assert!(rho.max_abs_diff(&projector(&s)) < 1e-14);
            }
        }
    }
}
