//! Spin-chain Hamiltonians and their tripartite block decomposition.
//!
//! A Hamiltonian is kept as a list of local terms (on-site or
//! nearest-neighbour bond) so it can be assembled on the full chain, on a
//! sub-chain, per block of a [`Partition`], or on the extended basis that
//! carries the auxiliary level.

use std::ops::Range;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{kron, spin, ChainBasis, OperatorMatrix};
use crate::numerics::DEFAULT_MEMORY_BUDGET;

const ONE: C64 = C64::new(1.0, 0.0);

/// One Hamiltonian term acting on spin-1/2 sites starting at `first_site`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub first_site: usize,
    pub op: Array2<C64>,
}

impl LocalTerm {
    pub fn sites(&self) -> Range<usize> {
        let n = self.op.nrows().trailing_zeros() as usize;
        self.first_site..self.first_site + n
    }
}

/// A nearest-neighbour spin-1/2 chain Hamiltonian as a sum of local terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainHamiltonian {
    len: usize,
    terms: Vec<LocalTerm>,
}

pub(crate) fn check_budget(dim: usize, budget: usize) -> Result<()> {
    let bytes = dim.saturating_mul(dim).saturating_mul(std::mem::size_of::<C64>());
    if bytes > budget {
        return Err(Error::MemoryBudget { dim, bytes, budget });
    }
    Ok(())
}

impl ChainHamiltonian {
    pub fn new(len: usize) -> Self {
        Self { len, terms: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Adds a term; the operator must be `2^k × 2^k` for `k` sites in range.
    pub fn push(&mut self, first_site: usize, op: Array2<C64>) -> Result<()> {
        let d = op.nrows();
        if op.ncols() != d || !d.is_power_of_two() || d < 2 {
            return Err(Error::InvalidParameter(format!("term of shape {:?}", op.dim())));
        }
        let term = LocalTerm { first_site, op };
        if term.sites().end > self.len {
            return Err(Error::InvalidSiteSet(format!("term on {:?} outside chain of {}", term.sites(), self.len)));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn to_operator(&self) -> Result<OperatorMatrix> {
        self.to_operator_within(DEFAULT_MEMORY_BUDGET)
    }

    pub fn to_operator_within(&self, budget: usize) -> Result<OperatorMatrix> {
        let basis = ChainBasis::spin_half(self.len)?;
        check_budget(basis.total_dim(), budget)?;
        assemble(basis, self.terms.iter())
    }

    /// Terms lying entirely inside `sites`, re-indexed onto that sub-chain.
    pub fn restricted(&self, sites: Range<usize>) -> Result<Self> {
        if sites.start >= sites.end || sites.end > self.len {
            return Err(Error::InvalidSiteSet(format!("{sites:?} in chain of {}", self.len)));
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| t.sites().start >= sites.start && t.sites().end <= sites.end)
            .map(|t| LocalTerm { first_site: t.first_site - sites.start, op: t.op.clone() })
            .collect();
        Ok(Self { len: sites.len(), terms })
    }

    /// Assigns every term to one of the five blocks of `partition`.
    pub fn partition(&self, partition: &Partition) -> Result<PartitionedHamiltonian> {
        partition.check_len(self.len)?;
        let basis = ChainBasis::spin_half(self.len)?;
        check_budget(basis.total_dim(), DEFAULT_MEMORY_BUDGET)?;
        let mut groups: [Vec<&LocalTerm>; 5] = Default::default();
        for t in &self.terms {
            groups[partition.classify(t.sites())? as usize].push(t);
        }
        let [a, b, m, am, bm] = groups.map(|g| assemble(basis.clone(), g.into_iter()));
        let (a, b, m, am, bm) = (a?, b?, m?, am?, bm?);
        let total = &(&(&(&a + &b) + &m) + &am) + &bm;
        Ok(PartitionedHamiltonian { a, b, m, am, bm, total })
    }

    /// The Hamiltonian on the basis where `aux_site` also carries `|ø⟩`,
    /// plus `eps_aux |ø⟩⟨ø|`. Every spin operator annihilates `|ø⟩`.
    pub fn extended_operator(&self, aux_site: usize, eps_aux: f64, budget: usize) -> Result<OperatorMatrix> {
        let basis = ChainBasis::with_auxiliary(self.len, aux_site)?;
        check_budget(basis.total_dim(), budget)?;
        let mut out = OperatorMatrix::zeros(basis.clone());
        for t in &self.terms {
            let sites = t.sites();
            let op = if sites.contains(&aux_site) {
                pad_with_auxiliary(&t.op, sites.len(), aux_site - sites.start)
            } else {
                t.op.clone()
            };
            out.add_local(t.first_site, &op, ONE)?;
        }
        let mut p_aux = Array2::zeros((3, 3));
        p_aux[[2, 2]] = C64::new(eps_aux, 0.0);
        out.add_local(aux_site, &p_aux, ONE)?;
        Ok(out)
    }
}

fn assemble<'a>(basis: ChainBasis, terms: impl Iterator<Item = &'a LocalTerm>) -> Result<OperatorMatrix> {
    let mut out = OperatorMatrix::zeros(basis);
    for t in terms {
        out.add_local(t.first_site, &t.op, ONE)?;
    }
    Ok(out)
}

/// Embeds an operator on `n_sites` spin-1/2 sites into the space where the
/// site at `offset` has a third level; rows and columns touching it vanish.
fn pad_with_auxiliary(op: &Array2<C64>, n_sites: usize, offset: usize) -> Array2<C64> {
    let mut dims = vec![2usize; n_sites];
    dims[offset] = 3;
    let new_dim: usize = dims.iter().product();
    let to_old = |mut k: usize| -> Option<usize> {
        let mut digits = vec![0; n_sites];
        for (slot, &d) in digits.iter_mut().zip(&dims).rev() {
            *slot = k % d;
            k /= d;
        }
        if digits[offset] == 2 {
            return None;
        }
        Some(digits.iter().fold(0, |acc, &x| acc * 2 + x))
    };
    Array2::from_shape_fn((new_dim, new_dim), |(r, c)| match (to_old(r), to_old(c)) {
        (Some(i), Some(j)) => op[[i, j]],
        _ => C64::new(0.0, 0.0),
    })
}

/// The `(L_A, 1, L_B)` split of a chain with `M` at the center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub len_a: usize,
    pub len_b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    A = 0,
    B = 1,
    M = 2,
    AM = 3,
    BM = 4,
}

impl Partition {
    /// `L_A = ⌈(L-1)/2⌉`, `L_B = L - 1 - L_A`.
    pub fn center(len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::InvalidParameter(format!("partition needs L >= 3, got {len}")));
        }
        let len_a = len / 2;
        Ok(Self { len_a, len_b: len - 1 - len_a })
    }

    pub fn len(&self) -> usize {
        self.len_a + 1 + self.len_b
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Zero-based index of the `M` site.
    pub fn middle_site(&self) -> usize {
        self.len_a
    }

    pub fn a_sites(&self) -> Range<usize> {
        0..self.len_a
    }

    pub fn b_sites(&self) -> Range<usize> {
        self.len_a + 1..self.len()
    }

    pub fn dim_a(&self) -> usize {
        1 << self.len_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.len_b
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.len() != len || self.len_a == 0 || self.len_b == 0 {
            return Err(Error::InvalidParameter(format!(
                "partition ({}, 1, {}) does not fit a chain of {len}",
                self.len_a, self.len_b
            )));
        }
        Ok(())
    }

    pub fn classify(&self, sites: Range<usize>) -> Result<Block> {
        let m = self.middle_site();
        let in_a = sites.end <= m;
        let in_b = sites.start > m;
        let has_m = sites.contains(&m);
        match (in_a, in_b, has_m) {
            (true, _, _) => Ok(Block::A),
            (_, true, _) => Ok(Block::B),
            (_, _, true) if sites.len() == 1 => Ok(Block::M),
            (_, _, true) if sites.start < m && sites.end == m + 1 => Ok(Block::AM),
            (_, _, true) if sites.start == m && sites.end > m + 1 => Ok(Block::BM),
            _ => Err(Error::InvalidSiteSet(format!("term on {sites:?} couples A and B directly"))),
        }
    }
}

/// The five blocks of a tripartite Hamiltonian, each on the full chain.
#[derive(Clone, Debug)]
pub struct PartitionedHamiltonian {
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub m: OperatorMatrix,
    pub am: OperatorMatrix,
    pub bm: OperatorMatrix,
    pub total: OperatorMatrix,
}

/// Anisotropic XY chain in a transverse field, open boundaries:
/// `H = -Σ [J_x S^x S^x + J_y S^y S^y] + h Σ S^z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XYParams {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub alpha: f64,
    pub h: f64,
}

impl XYParams {
    pub fn jx(&self) -> f64 {
        self.j * (1.0 + self.alpha)
    }

    pub fn jy(&self) -> f64 {
        self.j * (1.0 - self.alpha)
    }

    pub fn hamiltonian(&self) -> Result<ChainHamiltonian> {
        if self.len < 2 {
            return Err(Error::InvalidParameter(format!("L = {} too short", self.len)));
        }
        let bond = (kron(&spin::sx(), &spin::sx()) * C64::new(-self.jx(), 0.0))
            + (kron(&spin::sy(), &spin::sy()) * C64::new(-self.jy(), 0.0));
        let field = spin::sz() * C64::new(self.h, 0.0);
        let mut ham = ChainHamiltonian::new(self.len);
        for i in 0..self.len {
            ham.push(i, field.clone())?;
            if i + 1 < self.len {
                ham.push(i, bond.clone())?;
            }
        }
        Ok(ham)
    }

    pub fn build(&self) -> Result<OperatorMatrix> {
        self.hamiltonian()?.to_operator()
    }
}

/// Heisenberg chain in a random longitudinal field:
/// `H = J Σ S_i·S_{i+1} + Σ h_i S^z_i`, `h_i` uniform on `[-H, H]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFieldParams {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "J")]
    pub j: f64,
    /// Half-width `H` of the field distribution.
    #[serde(rename = "H")]
    pub disorder: f64,
    pub seed: u64,
    pub realization: u64,
}

impl RandomFieldParams {
    /// Per-site fields. Realization `r` reads ChaCha stream `r` under key
    /// `seed`, so any realization can be drawn independently of the others.
    pub fn fields(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.realization);
        (0..self.len).map(|_| self.disorder * (2.0 * rng.random::<f64>() - 1.0)).collect()
    }

    pub fn hamiltonian(&self) -> Result<ChainHamiltonian> {
        Ok(self.hamiltonian_with_fields()?.0)
    }

    pub fn hamiltonian_with_fields(&self) -> Result<(ChainHamiltonian, Vec<f64>)> {
        if self.len < 2 {
            return Err(Error::InvalidParameter(format!("L = {} too short", self.len)));
        }
        if !(self.disorder >= 0.0) {
            return Err(Error::InvalidParameter(format!("disorder H = {} < 0", self.disorder)));
        }
        let fields = self.fields();
        let bond = (kron(&spin::sx(), &spin::sx()) + kron(&spin::sy(), &spin::sy()) + kron(&spin::sz(), &spin::sz()))
            * C64::new(self.j, 0.0);
        let mut ham = ChainHamiltonian::new(self.len);
        for (i, &hi) in fields.iter().enumerate() {
            ham.push(i, spin::sz() * C64::new(hi, 0.0))?;
            if i + 1 < self.len {
                ham.push(i, bond.clone())?;
            }
        }
        Ok((ham, fields))
    }

    pub fn build(&self) -> Result<(OperatorMatrix, Vec<f64>)> {
        let (ham, fields) = self.hamiltonian_with_fields()?;
        Ok((ham.to_operator()?, fields))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Xy(XYParams),
    RandomField(RandomFieldParams),
}

impl Model {
    pub fn len(&self) -> usize {
        match self {
            Model::Xy(p) => p.len,
            Model::RandomField(p) => p.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hamiltonian(&self) -> Result<ChainHamiltonian> {
        match self {
            Model::Xy(p) => p.hamiltonian(),
            Model::RandomField(p) => p.hamiltonian(),
        }
    }
}

pub fn build_xy(params: &XYParams) -> Result<OperatorMatrix> {
    params.build()
}

pub fn build_random_field(params: &RandomFieldParams) -> Result<(OperatorMatrix, Vec<f64>)> {
    params.build()
}

pub fn partition_hamiltonian(model: &Model, partition: &Partition) -> Result<PartitionedHamiltonian> {
    model.hamiltonian()?.partition(partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::eigh;
    use crate::hilbert::{lift_local, lift_span, max_abs_diff};
    use ndarray::array;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Independent construction: explicit Kronecker strings per term.
    fn kron_string(ops: &[(usize, Array2<C64>)], len: usize) -> Array2<C64> {
        let mut out = Array2::eye(1);
        for site in 0..len {
            let local =
                ops.iter().find(|(s, _)| *s == site).map(|(_, o)| o.clone()).unwrap_or_else(|| spin::identity(2));
            out = kron(&out, &local);
        }
        out
    }

    fn xy_oracle(len: usize, jx: f64, jy: f64, h: f64) -> Array2<C64> {
        let d = 1 << len;
        let mut out = Array2::<C64>::zeros((d, d));
        for i in 0..len {
            out = out + kron_string(&[(i, spin::sz())], len) * c(h);
            if i + 1 < len {
                out = out - kron_string(&[(i, spin::sx()), (i + 1, spin::sx())], len) * c(jx);
                out = out - kron_string(&[(i, spin::sy()), (i + 1, spin::sy())], len) * c(jy);
            }
        }
        out
    }

    fn heisenberg_oracle(len: usize, j: f64, fields: &[f64]) -> Array2<C64> {
        let d = 1 << len;
        let mut out = Array2::<C64>::zeros((d, d));
        for (i, &f) in fields.iter().enumerate().take(len) {
            out = out + kron_string(&[(i, spin::sz())], len) * c(f);
            if i + 1 < len {
                for s in [spin::sx(), spin::sy(), spin::sz()] {
                    out = out + kron_string(&[(i, s.clone()), (i + 1, s)], len) * c(j);
                }
            }
        }
        out
    }

    fn total_sz(len: usize) -> OperatorMatrix {
        let b = ChainBasis::spin_half(len).unwrap();
        let mut op = OperatorMatrix::zeros(b);
        for i in 0..len {
            op.add_local(i, &spin::sz(), ONE).unwrap();
        }
        op
    }

    #[test]
    fn xy_pure_field_two_sites() {
        let h = XYParams { len: 2, j: 0.0, alpha: 1.0, h: 1.0 }.build().unwrap();
        assert_eq!(h.entries(), &Array2::from_diag(&array![c(1.0), c(0.0), c(0.0), c(-1.0)]));
    }

    #[test]
    fn xy_polarized_state_is_ground_state() {
        for len in [3, 5, 6] {
            let h = XYParams { len, j: 1.0, alpha: 0.0, h: 1.5 }.build().unwrap();
            let down = crate::hilbert::StateVector::product(h.basis().clone(), &vec![1; len]).unwrap();
            let applied = h.apply(&down).unwrap();
            let e = -0.75 * len as f64;
            let expected = down.amplitudes().mapv(|z| z * e);
            assert!(
                max_abs_diff(
                    &applied.amplitudes().clone().insert_axis(ndarray::Axis(0)),
                    &expected.insert_axis(ndarray::Axis(0))
                ) < 1e-14
            );
            let es = eigh(&h).unwrap();
            assert!((es.values[0] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn xy_matches_kron_oracle() {
        let p = XYParams { len: 3, j: 1.0, alpha: 0.0, h: 0.0 };
        let h = p.build().unwrap();
        let oracle = xy_oracle(3, 1.0, 1.0, 0.0);
        assert!(max_abs_diff(h.entries(), &oracle) < 1e-15);
        let a = eigh(&h).unwrap().values;
        let o = eigh(&OperatorMatrix::from_entries(h.basis().clone(), oracle).unwrap()).unwrap().values;
        for (x, y) in a.iter().zip(o.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let q = XYParams { len: 4, j: 0.8, alpha: 0.3, h: -0.6 };
        assert!(max_abs_diff(q.build().unwrap().entries(), &xy_oracle(4, q.jx(), q.jy(), q.h)) < 1e-15);
    }

    #[test]
    fn two_site_heisenberg_singlet_triplet() {
        let (h, _) = RandomFieldParams { len: 2, j: 1.0, disorder: 0.0, seed: 1, realization: 0 }.build().unwrap();
        let v = eigh(&h).unwrap().values;
        let expected = [-0.75, 0.25, 0.25, 0.25];
        for (x, y) in v.iter().zip(expected) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn fields_are_reproducible_and_bounded() {
        let p = RandomFieldParams { len: 10, j: 1.0, disorder: 3.0, seed: 42, realization: 7 };
        let (f1, f2) = (p.fields(), p.fields());
        assert_eq!(
            f1.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            f2.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert!(f1.iter().all(|x| x.abs() <= 3.0));
        let other = RandomFieldParams { realization: 8, ..p }.fields();
        assert_ne!(f1, other);
    }

    #[test]
    fn random_field_matches_kron_oracle() {
        let p = RandomFieldParams { len: 3, j: 1.0, disorder: 2.0, seed: 5, realization: 1 };
        let (h, fields) = p.build().unwrap();
        let oracle = heisenberg_oracle(3, 1.0, &fields);
        assert!(max_abs_diff(h.entries(), &oracle) < 1e-15);
        let a = eigh(&h).unwrap().values;
        let o = eigh(&OperatorMatrix::from_entries(h.basis().clone(), oracle).unwrap()).unwrap().values;
        for (x, y) in a.iter().zip(o.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetries() {
        let sz = total_sz(6);
        let xy = XYParams { len: 6, j: 1.0, alpha: 0.0, h: 0.4 }.build().unwrap();
        assert!(xy.commutator(&sz).unwrap().max_abs() < 1e-12);
        assert!(xy.is_hermitian(1e-12));
        let p = RandomFieldParams { len: 6, j: 1.0, disorder: 2.5, seed: 3, realization: 2 };
        let (rf, fields) = p.build().unwrap();
        assert!(rf.commutator(&sz).unwrap().max_abs() < 1e-12);
        assert!(rf.is_hermitian(1e-12));

        // Global spin flip with h_i -> -h_i leaves the spectrum unchanged.
        let flipped: Vec<f64> = fields.iter().map(|x| -x).collect();
        let rf_flip = OperatorMatrix::from_entries(rf.basis().clone(), heisenberg_oracle(6, 1.0, &flipped)).unwrap();
        let (a, b) = (eigh(&rf).unwrap().values, eigh(&rf_flip).unwrap().values);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn memory_budget_enforced() {
        let big = XYParams { len: 13, j: 1.0, alpha: 0.0, h: 0.0 };
        assert!(matches!(big.build(), Err(Error::MemoryBudget { .. })));
        let small = XYParams { len: 4, j: 1.0, alpha: 0.0, h: 0.0 }.hamiltonian().unwrap();
        assert!(matches!(small.to_operator_within(100), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn center_partition_convention() {
        let p = Partition::center(5).unwrap();
        assert_eq!((p.len_a, p.middle_site(), p.len_b), (2, 2, 2));
        let p = Partition::center(8).unwrap();
        assert_eq!((p.len_a, p.middle_site(), p.len_b), (4, 4, 3));
        let p = Partition::center(12).unwrap();
        assert_eq!((p.len_a, p.len_b), (6, 5));
        assert!(Partition::center(2).is_err());
        for len in 3..13 {
            let p = Partition::center(len).unwrap();
            assert_eq!(p.len_a, (len - 1).div_ceil(2));
            assert_eq!(p.len(), len);
        }
    }

    #[test]
    fn partition_sums_to_total() {
        let models = [
            Model::Xy(XYParams { len: 5, j: 1.0, alpha: 0.4, h: 0.9 }),
            Model::Xy(XYParams { len: 6, j: 1.0, alpha: 1.0, h: 0.3 }),
            Model::RandomField(RandomFieldParams { len: 5, j: 1.0, disorder: 2.0, seed: 1, realization: 0 }),
        ];
        for model in &models {
            let p = Partition::center(model.len()).unwrap();
            let ph = partition_hamiltonian(model, &p).unwrap();
            let direct = model.hamiltonian().unwrap().to_operator().unwrap();
            assert!(ph.total.max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn no_bonds_means_no_coupling_blocks() {
        let model = Model::Xy(XYParams { len: 5, j: 0.0, alpha: 0.0, h: 1.0 });
        let ph = partition_hamiltonian(&model, &Partition::center(5).unwrap()).unwrap();
        assert_eq!(ph.am.max_abs(), 0.0);
        assert_eq!(ph.bm.max_abs(), 0.0);
    }

    #[test]
    fn heisenberg_am_block_is_the_crossing_bond() {
        let model = Model::RandomField(RandomFieldParams { len: 5, j: 1.0, disorder: 1.0, seed: 2, realization: 0 });
        let ph = partition_hamiltonian(&model, &Partition::center(5).unwrap()).unwrap();
        // Sites 2 and 3 (1-based) are zero-based 1 and 2.
        let mut bond = Array2::<C64>::zeros((32, 32));
        for s in [spin::sx(), spin::sy(), spin::sz()] {
            bond = bond + kron_string(&[(1, s.clone()), (2, s)], 5);
        }
        assert!(max_abs_diff(ph.am.entries(), &bond) < 1e-15);
        let mut bm = Array2::<C64>::zeros((32, 32));
        for s in [spin::sx(), spin::sy(), spin::sz()] {
            bm = bm + kron_string(&[(2, s.clone()), (3, s)], 5);
        }
        assert!(max_abs_diff(ph.bm.entries(), &bm) < 1e-15);
        // The M field sits in H_M alone.
        let f = model_fields(&model)[2];
        let m = lift_local(&(spin::sz() * c(f)), 2, ph.m.basis()).unwrap();
        assert!(ph.m.max_abs_diff(&m) < 1e-15);
    }

    fn model_fields(model: &Model) -> Vec<f64> {
        match model {
            Model::RandomField(p) => p.fields(),
            Model::Xy(p) => vec![p.h; p.len],
        }
    }

    #[test]
    fn subsystem_blocks_act_trivially_elsewhere() {
        let model = Model::Xy(XYParams { len: 7, j: 1.0, alpha: 0.5, h: 0.8 });
        let p = Partition::center(7).unwrap();
        let ph = partition_hamiltonian(&model, &p).unwrap();
        let basis = ph.total.basis().clone();
        let probe = kron(&spin::sx(), &spin::sy()) + kron(&spin::sz(), &spin::sx());
        // Operators on M ∪ B (sites 3..7) commute with H_A; on A ∪ M with H_B.
        for first in [3, 4, 5] {
            let op = lift_span(&probe, first, &basis).unwrap();
            assert!(ph.a.commutator(&op).unwrap().max_abs() < 1e-12);
        }
        for first in [0, 1, 2] {
            let op = lift_span(&probe, first, &basis).unwrap();
            assert!(ph.b.commutator(&op).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_matches_subsystem_terms() {
        let model = XYParams { len: 7, j: 1.0, alpha: 0.5, h: 0.8 };
        let ham = model.hamiltonian().unwrap();
        let p = Partition::center(7).unwrap();
        let a = ham.restricted(p.a_sites()).unwrap().to_operator().unwrap();
        let native = XYParams { len: 3, ..model }.build().unwrap();
        assert!(a.max_abs_diff(&native) < 1e-15);
    }

    #[test]
    fn extended_operator_decouples_auxiliary_level() {
        let model = XYParams { len: 3, j: 1.0, alpha: 0.3, h: 0.7 };
        let ham = model.hamiltonian().unwrap();
        let ext = ham.extended_operator(1, 0.25, DEFAULT_MEMORY_BUDGET).unwrap();
        let basis = ext.basis().clone();
        assert_eq!(basis.total_dim(), 12);
        // Spin sector reproduces H.
        let h = model.build().unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let (di, dj) = (h.basis().decode(i), h.basis().decode(j));
                let (ei, ej) = (basis.encode(&di).unwrap(), basis.encode(&dj).unwrap());
                assert!((ext.entries()[[ei, ej]] - h.entries()[[i, j]]).norm() < 1e-15);
            }
        }
        // The |ø⟩ sector is H_A + H_B + ε_ø on the outer sites.
        for a in 0..2 {
            for b in 0..2 {
                let k = basis.encode(&[a, 2, b]).unwrap();
                for l in 0..12 {
                    let dl = basis.decode(l);
                    let v = ext.entries()[[k, l]];
                    if dl[1] != 2 {
                        assert_eq!(v, C64::new(0.0, 0.0));
                    } else if l == k {
                        let sz = |d: usize| if d == 0 { 0.5 } else { -0.5 };
                        assert!((v.re - (0.7 * (sz(a) + sz(b)) + 0.25)).abs() < 1e-15);
                    }
                }
            }
        }
    }
}
