//! Weak monochromatic drive `|↑⟩, |↓⟩ → |ø⟩` on the middle site.
//!
//! In the lab frame `H(t) = H_ext + e^{-iωt} V + e^{iωt} V†` with
//! `V = Ω₁|ø⟩⟨↑| + Ω₂|ø⟩⟨↓|`. `H_ext` conserves the number of `|ø⟩`
//! levels, so with `U = e^{iωP_ø t}` the rotating-frame Hamiltonian
//! `H_ext - ωP_ø + V + V†` is static and `⟨n_ø⟩` is frame independent. Each
//! drive frequency is therefore one exact eigendecomposition.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::eigh_with;
use crate::error::{Error, Result};
use crate::hilbert::{ChainBasis, OperatorMatrix, StateVector, AUX, DOWN, UP};
use crate::models::{ChainHamiltonian, Partition};
use crate::numerics::Numerics;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RFSimConfig {
    pub rabi_1: C64,
    pub rabi_2: C64,
    pub t_final: f64,
    pub dt: f64,
    pub eps_aux: f64,
}

impl Default for RFSimConfig {
    fn default() -> Self {
        let r = 2e-4 * std::f64::consts::FRAC_1_SQRT_2;
        Self { rabi_1: C64::new(r, 0.0), rabi_2: C64::new(r, 0.0), t_final: 100.0, dt: 0.02, eps_aux: 0.0 }
    }
}

impl RFSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rabi_1 == C64::new(0.0, 0.0) && self.rabi_2 == C64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("drive with Ω₁ = Ω₂ = 0".into()));
        }
        if !(self.dt > 0.0 && self.t_final >= 2.0 * self.dt) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt and at least two steps, got dt = {}, t_final = {}",
                self.dt, self.t_final
            )));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Transition rate into `|ø⟩` against drive frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfCurve {
    pub freqs: Vec<f64>,
    pub rates: Vec<f64>,
    pub max_population: f64,
}

impl RfCurve {
    /// Header `omega,rate`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["omega", "rate"])?;
        for (f, r) in self.freqs.iter().zip(&self.rates) {
            wtr.serialize((f, r))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "grid": self.freqs, "values": self.rates })
    }

    /// Indices of interior local maxima above `rel_threshold · max rate`.
    pub fn peak_indices(&self, rel_threshold: f64) -> Vec<usize> {
        local_maxima(&self.rates, rel_threshold)
    }
}

/// Interior local maxima (`v[i-1] < v[i] ≥ v[i+1]`) above `rel_threshold · max`.
pub fn local_maxima(values: &[f64], rel_threshold: f64) -> Vec<usize> {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > rel_threshold * max)
        .collect()
}

/// Embeds a spin-1/2 chain state in the basis with `|ø⟩` at `aux_site`.
pub fn embed_in_extended(state: &StateVector, ext: &ChainBasis) -> Result<StateVector> {
    let spin = ChainBasis::spin_half(ext.len())?;
    if state.basis() != &spin {
        return Err(Error::DimensionMismatch { expected: spin.total_dim(), found: state.dim() });
    }
    let mut amps = Array1::zeros(ext.total_dim());
    for (k, &a) in state.amplitudes().iter().enumerate() {
        amps[ext.encode(&spin.decode(k))?] = a;
    }
    StateVector::new(ext.clone(), amps)
}

pub fn rf_response(
    ham: &ChainHamiltonian,
    partition: &Partition,
    source: &StateVector,
    cfg: &RFSimConfig,
    freq_grid: &[f64],
    numerics: &Numerics,
) -> Result<RfCurve> {
    cfg.validate()?;
    if ham.len() != partition.len() {
        return Err(Error::DimensionMismatch { expected: partition.len(), found: ham.len() });
    }
    let site = partition.middle_site();
    let h_ext = ham.extended_operator(site, cfg.eps_aux, numerics.memory_budget_bytes)?;
    let basis = h_ext.basis().clone();
    let psi0 = embed_in_extended(source, &basis)?;

    let mut drive = Array2::zeros((3, 3));
    drive[[AUX, UP]] = cfg.rabi_1;
    drive[[AUX, DOWN]] = cfg.rabi_2;
    drive[[UP, AUX]] = cfg.rabi_1.conj();
    drive[[DOWN, AUX]] = cfg.rabi_2.conj();
    let mut p_aux = Array2::zeros((3, 3));
    p_aux[[AUX, AUX]] = C64::new(1.0, 0.0);
    let mut driven = h_ext;
    driven.add_local(site, &drive, C64::new(1.0, 0.0))?;
    let aux_rows: Vec<usize> = (0..basis.total_dim()).filter(|&k| basis.decode(k)[site] == AUX).collect();

    let points: Vec<(f64, f64)> = freq_grid
        .par_iter()
        .map(|&omega| {
            let mut h_rot = driven.clone();
            h_rot.add_local(site, &p_aux, C64::new(-omega, 0.0))?;
            aux_population_rate(&h_rot, &psi0, &aux_rows, cfg, numerics)
        })
        .collect::<Result<_>>()?;
    let max_population = points.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(RfCurve { freqs: freq_grid.to_vec(), rates: points.into_iter().map(|p| p.0).collect(), max_population })
}

/// Least-squares slope through the origin of `⟨n_ø⟩(t)` over `[0, t_final]`,
/// and the largest population seen.
fn aux_population_rate(
    h_rot: &OperatorMatrix,
    psi0: &StateVector,
    aux_rows: &[usize],
    cfg: &RFSimConfig,
    numerics: &Numerics,
) -> Result<(f64, f64)> {
    let es = eigh_with(h_rot, numerics)?;
    let radius = es.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if radius * cfg.dt >= 0.1 {
        return Err(Error::InvalidParameter(format!(
            "dt = {} does not resolve energy scale {radius:.3}; need dt·‖H‖ < 0.1",
            cfg.dt
        )));
    }
    // Amplitude on aux row i at time t: Σ_k V[i,k] c_k e^{-iλ_k t}.
    let c: Vec<C64> = (0..es.len())
        .map(|k| es.vectors.column(k).iter().zip(psi0.amplitudes()).map(|(v, p)| v.conj() * p).sum())
        .collect();
    let active: Vec<usize> = (0..es.len()).filter(|&k| c[k].norm() > 1e-14).collect();
    let coupling: Vec<Vec<C64>> =
        aux_rows.iter().map(|&i| active.iter().map(|&k| es.vectors[[i, k]] * c[k]).collect()).collect();
    let step: Vec<C64> = active.iter().map(|&k| C64::from_polar(1.0, -es.values[k] * cfg.dt)).collect();
    let mut phase: Vec<C64> = vec![C64::new(1.0, 0.0); active.len()];

    let (mut stn, mut stt, mut max_pop) = (0.0, 0.0, 0.0f64);
    for n in 0..=cfg.n_steps() {
        let t = n as f64 * cfg.dt;
        let pop: f64 =
            coupling.iter().map(|row| row.iter().zip(&phase).map(|(b, p)| b * p).sum::<C64>().norm_sqr()).sum();
        max_pop = max_pop.max(pop);
        stn += t * pop;
        stt += t * t;
        for (p, s) in phase.iter_mut().zip(&step) {
            *p *= s;
        }
    }
    if max_pop > 0.1 {
        return Err(Error::Nonlinear { population: max_pop });
    }
    Ok((stn / stt, max_pop))
}
