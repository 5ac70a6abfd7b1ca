//! Split spectroscopy: the split operator on the middle site, overlap
//! weights with the split-chain eigenstates, the resulting peak spectrum and
//! its spectral entropy.
//!
//! The split operator `S = Ω↑ s↑ + Ω↓ s↓` moves the middle site's `|↑⟩` or
//! `|↓⟩` into the decoupled level `|ø⟩`. After the split the chain evolves
//! under `H_A + H_B + ε_ø`, so the spectrum is a comb of delta peaks at
//! `ω_nm = ε^A_n + ε^B_m + ε_ø - ε` with weights `|γ_nm|²`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{eigh_with, EigenSystem};
use crate::error::{Error, Result};
use crate::hilbert::{adjoint, ChainBasis, StateVector, DOWN, UP};
use crate::models::{ChainHamiltonian, Partition};
use crate::numerics::Numerics;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitOperatorSpec {
    pub omega_up: C64,
    pub omega_down: C64,
    #[serde(default)]
    pub eps_aux: f64,
}

impl Default for SplitOperatorSpec {
    fn default() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self { omega_up: C64::new(r, 0.0), omega_down: C64::new(r, 0.0), eps_aux: 0.0 }
    }
}

impl SplitOperatorSpec {
    pub fn new(omega_up: C64, omega_down: C64) -> Result<Self> {
        let spec = Self { omega_up, omega_down, eps_aux: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_eps_aux(mut self, eps_aux: f64) -> Self {
        self.eps_aux = eps_aux;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_up == C64::new(0.0, 0.0) && self.omega_down == C64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("split operator with Ω↑ = Ω↓ = 0".into()));
        }
        Ok(())
    }
}

/// `S|ψ⟩` on the `A ⊗ B` basis: `c(a, b) = Ω↑ ψ(a, ↑, b) + Ω↓ ψ(a, ↓, b)`.
pub fn apply_split(state: &StateVector, spec: &SplitOperatorSpec, partition: &Partition) -> Result<StateVector> {
    spec.validate()?;
    let basis = ChainBasis::spin_half(partition.len())?;
    if state.basis() != &basis {
        return Err(Error::DimensionMismatch { expected: basis.total_dim(), found: state.dim() });
    }
    let (da, db) = (partition.dim_a(), partition.dim_b());
    let psi = state.amplitudes();
    let amps = Array1::from_shape_fn(da * db, |k| {
        let (a, b) = (k / db, k % db);
        spec.omega_up * psi[(a * 2 + UP) * db + b] + spec.omega_down * psi[(a * 2 + DOWN) * db + b]
    });
    StateVector::new(ChainBasis::spin_half(partition.len() - 1)?, amps)
}

/// Squared overlaps `|γ_nm|²` of the split state with `|ψ^A_n⟩|ψ^B_m⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCoefficients {
    pub weights: Array2<f64>,
    pub eps_a: Array1<f64>,
    pub eps_b: Array1<f64>,
    pub eps: f64,
    pub eps_aux: f64,
    pub total_weight: f64,
}

impl SplitCoefficients {
    pub fn frequency(&self, n: usize, m: usize) -> f64 {
        self.eps_a[n] + self.eps_b[m] + self.eps_aux - self.eps
    }

    /// `(ω_nm, |γ_nm|²)` for every pair, row-major in `(n, m)`.
    pub fn lines(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.indexed_iter().map(|((n, m), &w)| (self.frequency(n, m), w))
    }

    /// Normalized weights above `weight_cutoff · total_weight`, descending.
    pub fn normalized_sorted(&self, weight_cutoff: f64) -> Result<Vec<f64>> {
        let kept = kept_weights(self.weights.iter().copied(), self.total_weight, weight_cutoff)?;
        let sum: f64 = kept.iter().sum();
        let mut out: Vec<f64> = kept.into_iter().map(|w| w / sum).collect();
        out.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        Ok(out)
    }
}

pub fn compute_gamma(
    state: &StateVector,
    eps: f64,
    spec: &SplitOperatorSpec,
    partition: &Partition,
    es_a: &EigenSystem,
    es_b: &EigenSystem,
) -> Result<SplitCoefficients> {
    let (da, db) = (partition.dim_a(), partition.dim_b());
    if es_a.len() != da {
        return Err(Error::DimensionMismatch { expected: da, found: es_a.len() });
    }
    if es_b.len() != db {
        return Err(Error::DimensionMismatch { expected: db, found: es_b.len() });
    }
    let split = apply_split(state, spec, partition)?;
    let c = split.into_amplitudes().into_shape_with_order((da, db)).expect("contiguous");
    // γ = V_A† C conj(V_B)
    let gamma = adjoint(&es_a.vectors).dot(&c).dot(&es_b.vectors.mapv(|z| z.conj()));
    let weights = gamma.mapv(|z| z.norm_sqr());
    let total_weight = weights.sum();
    Ok(SplitCoefficients {
        weights,
        eps_a: es_a.values.clone(),
        eps_b: es_b.values.clone(),
        eps,
        eps_aux: spec.eps_aux,
        total_weight,
    })
}

/// Eigensystems of `H_A` and `H_B` on their own sub-chains, computed once
/// and shared by every state of the same Hamiltonian.
#[derive(Clone, Debug)]
pub struct SplitChain {
    pub partition: Partition,
    pub es_a: EigenSystem,
    pub es_b: EigenSystem,
}

impl SplitChain {
    pub fn new(ham: &ChainHamiltonian, numerics: &Numerics) -> Result<Self> {
        let partition = Partition::center(ham.len())?;
        Self::with_partition(ham, partition, numerics)
    }

    pub fn with_partition(ham: &ChainHamiltonian, partition: Partition, numerics: &Numerics) -> Result<Self> {
        let h_a = ham.restricted(partition.a_sites())?.to_operator_within(numerics.memory_budget_bytes)?;
        let h_b = ham.restricted(partition.b_sites())?.to_operator_within(numerics.memory_budget_bytes)?;
        Ok(Self { partition, es_a: eigh_with(&h_a, numerics)?, es_b: eigh_with(&h_b, numerics)? })
    }

    pub fn coefficients(&self, state: &StateVector, eps: f64, spec: &SplitOperatorSpec) -> Result<SplitCoefficients> {
        compute_gamma(state, eps, spec, &self.partition, &self.es_a, &self.es_b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BroadenedCurve {
    pub eta: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// How to broaden a peak comb; without a grid one is chosen to cover every
/// peak ± 50η at spacing η/20.
#[derive(Clone, Debug, PartialEq)]
pub struct Broadening {
    pub eta: f64,
    pub grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub peaks: Vec<Peak>,
    pub total_weight: f64,
    pub eps: f64,
    pub eps_aux: f64,
    pub broadened: Option<BroadenedCurve>,
}

pub fn lorentzian(x: f64, eta: f64) -> f64 {
    eta / (std::f64::consts::PI * (x * x + eta * eta))
}

/// Merges `(ω, w)` lines: sorted by frequency, neighbours closer than
/// `merge_tol` chain into one peak at their weighted mean frequency.
pub fn merge_lines(mut lines: Vec<(f64, f64)>, merge_tol: f64) -> Vec<Peak> {
    lines.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequency"));
    let mut peaks: Vec<Peak> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    let mut acc = (0.0, 0.0);
    for (omega, w) in lines {
        if omega - last > merge_tol && acc.1 > 0.0 {
            peaks.push(Peak { omega: acc.0 / acc.1, weight: acc.1 });
            acc = (0.0, 0.0);
        }
        acc.0 += omega * w;
        acc.1 += w;
        last = omega;
    }
    if acc.1 > 0.0 {
        peaks.push(Peak { omega: acc.0 / acc.1, weight: acc.1 });
    }
    peaks
}

pub fn build_spectrum(
    coeffs: &SplitCoefficients,
    merge_tol: f64,
    weight_cutoff: f64,
    broaden: Option<&Broadening>,
) -> Spectrum {
    let floor = weight_cutoff * coeffs.total_weight;
    let lines: Vec<(f64, f64)> =
        if coeffs.total_weight > 0.0 { coeffs.lines().filter(|&(_, w)| w > floor).collect() } else { Vec::new() };
    let peaks = merge_lines(lines, merge_tol);
    let broadened = broaden.map(|b| broaden_peaks(&peaks, b));
    Spectrum { peaks, total_weight: coeffs.total_weight, eps: coeffs.eps, eps_aux: coeffs.eps_aux, broadened }
}

pub fn broaden_peaks(peaks: &[Peak], broadening: &Broadening) -> BroadenedCurve {
    let eta = broadening.eta;
    let grid = broadening.grid.clone().unwrap_or_else(|| {
        let lo = peaks.iter().map(|p| p.omega).fold(f64::INFINITY, f64::min) - 50.0 * eta;
        let hi = peaks.iter().map(|p| p.omega).fold(f64::NEG_INFINITY, f64::max) + 50.0 * eta;
        if !lo.is_finite() {
            return Vec::new();
        }
        let step = eta / 20.0;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        (0..n).map(|k| lo + k as f64 * step).collect()
    });
    let values = grid.iter().map(|&w| peaks.iter().map(|p| p.weight * lorentzian(w - p.omega, eta)).sum()).collect();
    BroadenedCurve { eta, grid, values }
}

impl Spectrum {
    pub fn n_peaks(&self) -> usize {
        self.peaks.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "eps": self.eps,
            "eps_aux": self.eps_aux,
            "peaks": self.peaks.iter().map(|p| [p.omega, p.weight]).collect::<Vec<_>>(),
        });
        if let Some(b) = &self.broadened {
            obj["eta"] = b.eta.into();
            obj["grid"] = b.grid.clone().into();
            obj["values"] = b.values.clone().into();
        }
        obj
    }

    /// Peak list as CSV with header `omega,weight`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["omega", "weight"])?;
        for p in &self.peaks {
            wtr.serialize((p.omega, p.weight))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// True when exactly one merged peak survives.
pub fn is_single_peak(spectrum: &Spectrum) -> Result<bool> {
    if !(spectrum.total_weight > 0.0) || spectrum.peaks.is_empty() {
        return Err(Error::ZeroSplitWeight { total_weight: spectrum.total_weight });
    }
    Ok(spectrum.peaks.len() == 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBasis {
    Coefficient,
    MergedPeak,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntropyResult {
    pub e_ent: f64,
    pub n_nonzero: usize,
    pub basis: EntropyBasis,
}

fn kept_weights(weights: impl Iterator<Item = f64>, total: f64, weight_cutoff: f64) -> Result<Vec<f64>> {
    if !(total > 0.0) {
        return Err(Error::ZeroSplitWeight { total_weight: total });
    }
    let floor = weight_cutoff * total;
    Ok(weights.filter(|&w| w > floor).collect())
}

fn shannon(kept: &[f64]) -> f64 {
    let sum: f64 = kept.iter().sum();
    if kept.len() <= 1 {
        return 0.0;
    }
    -kept
        .iter()
        .map(|&w| {
            let p = w / sum;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Shannon entropy (nats) of the normalized split weights.
pub fn spectral_entropy(
    coeffs: &SplitCoefficients,
    basis: EntropyBasis,
    numerics: &Numerics,
) -> Result<SpectralEntropyResult> {
    let kept = match basis {
        EntropyBasis::Coefficient => {
            kept_weights(coeffs.weights.iter().copied(), coeffs.total_weight, numerics.weight_cutoff)?
        }
        EntropyBasis::MergedPeak => {
            let spectrum = build_spectrum(coeffs, numerics.merge_tol, numerics.weight_cutoff, None);
            kept_weights(spectrum.peaks.iter().map(|p| p.weight), spectrum.total_weight, numerics.weight_cutoff)?
        }
    };
    Ok(SpectralEntropyResult { e_ent: shannon(&kept), n_nonzero: kept.len(), basis })
}

/// Entropy of an already merged spectrum.
pub fn spectrum_entropy(spectrum: &Spectrum, weight_cutoff: f64) -> Result<SpectralEntropyResult> {
    let kept = kept_weights(spectrum.peaks.iter().map(|p| p.weight), spectrum.total_weight, weight_cutoff)?;
    Ok(SpectralEntropyResult { e_ent: shannon(&kept), n_nonzero: kept.len(), basis: EntropyBasis::MergedPeak })
}
