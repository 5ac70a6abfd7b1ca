use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Scenario, StateLabel};
use super::fit::fit_scaling;
use super::{
    CoefficientRow, DisorderEnsembleStats, ExperimentOutput, FieldSweep, PointFailure, ResultRow, RfOverlay,
    ScalingReport,
};
use crate::eigensolve::{eigh_with, EigenSystem};
use crate::entanglement::squashed_with;
use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::models::ChainHamiltonian;
use crate::numerics::Numerics;
use crate::splitspec::{
    broaden_peaks, build_spectrum, spectral_entropy, Broadening, EntropyBasis, Spectrum, SplitChain, SplitOperatorSpec,
};
use crate::timedomain::{rf_response, RfCurve};

/// Split-spectrum and entanglement figures of one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateAnalysis {
    pub e_ent: f64,
    pub e_ent_merged: f64,
    pub e_sq: f64,
    pub n_peaks: usize,
    pub total_weight: f64,
    pub triseparable: bool,
}

impl StateAnalysis {
    pub fn criterion_consistent(&self) -> bool {
        (self.n_peaks == 1) == self.triseparable && (self.e_ent < 1e-10) == self.triseparable
    }
}

pub fn analyze_state(
    chain: &SplitChain,
    psi: &StateVector,
    eps: f64,
    spec: &SplitOperatorSpec,
    numerics: &Numerics,
) -> Result<StateAnalysis> {
    let coeffs = chain.coefficients(psi, eps, spec)?;
    let e_ent = spectral_entropy(&coeffs, EntropyBasis::Coefficient, numerics)?.e_ent;
    let e_ent_merged = spectral_entropy(&coeffs, EntropyBasis::MergedPeak, numerics)?.e_ent;
    let n_peaks = build_spectrum(&coeffs, numerics.merge_tol, numerics.weight_cutoff, None).n_peaks();
    let report = squashed_with(psi, &chain.partition, numerics)?;
    Ok(StateAnalysis {
        e_ent,
        e_ent_merged,
        e_sq: report.e_sq,
        n_peaks,
        total_weight: coeffs.total_weight,
        triseparable: report.is_triseparable(),
    })
}

/// Eigenstate indices for a label. `mid` returns the `count` states whose
/// energies are closest to `(E_min + E_max) / 2`, nearest first.
pub fn select_states(es: &EigenSystem, label: StateLabel, count: usize) -> Result<Vec<usize>> {
    match label {
        StateLabel::Ground => Ok(vec![0]),
        StateLabel::Index(k) if k < es.len() => Ok(vec![k]),
        StateLabel::Index(k) => {
            Err(Error::InvalidParameter(format!("state index {k} out of range for dimension {}", es.len())))
        }
        StateLabel::Mid => {
            let v = &es.values;
            let center = 0.5 * (v[0] + v[v.len() - 1]);
            Ok(nearest(v.as_slice().expect("contiguous"), center, count))
        }
    }
}

fn nearest(values: &[f64], target: f64, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        (values[a] - target).abs().partial_cmp(&(values[b] - target).abs()).expect("finite").then(a.cmp(&b))
    });
    idx.truncate(count);
    idx
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

struct Solved {
    ham: ChainHamiltonian,
    es: EigenSystem,
    chain: SplitChain,
}

fn solve(cfg: &ExperimentConfig, len: usize, field: f64, realization: u64) -> Result<Solved> {
    let ham = cfg.model.at(len, field, cfg.seed, realization).hamiltonian()?;
    let op = ham.to_operator_within(cfg.numerics.memory_budget_bytes)?;
    let es = eigh_with(&op, &cfg.numerics)?;
    let chain = SplitChain::new(&ham, &cfg.numerics)?;
    Ok(Solved { ham, es, chain })
}

fn grid_items(cfg: &ExperimentConfig) -> Result<Vec<(usize, f64)>> {
    let fields = cfg.field_points()?;
    Ok(cfg.sizes.iter().flat_map(|&l| fields.iter().map(move |&f| (l, f))).collect())
}

#[allow(clippy::too_many_arguments)]
fn row(
    cfg: &ExperimentConfig,
    len: usize,
    field: f64,
    label: StateLabel,
    index: usize,
    energy: f64,
    realization: Option<u64>,
    a: &StateAnalysis,
) -> ResultRow {
    ResultRow {
        len,
        model: cfg.model.name().to_string(),
        j: cfg.model.coupling(),
        alpha: cfg.model.alpha(),
        field,
        state: label.to_string(),
        state_index: index,
        energy,
        realization,
        e_ent: a.e_ent,
        e_ent_merged: a.e_ent_merged,
        e_sq: a.e_sq,
        n_peaks: a.n_peaks,
        total_weight: a.total_weight,
        triseparable: a.triseparable,
        criterion_consistent: a.criterion_consistent(),
        de_ent_dfield: None,
        de_sq_dfield: None,
        wall_time_s: None,
    }
}

/// Ground (or labelled) state figures over the `(L, h)` grid, with central
/// differences `dE/dh` along the grid for each size and label.
pub fn run_field_sweep(cfg: &ExperimentConfig) -> Result<FieldSweep> {
    cfg.validate()?;
    let items = grid_items(cfg)?;
    let results: Vec<Result<Vec<ResultRow>>> = in_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(len, field)| {
                let start = Instant::now();
                let s = solve(cfg, len, field, 0)?;
                let mut rows = Vec::new();
                for &label in &cfg.states {
                    let k = select_states(&s.es, label, 1)?[0];
                    let a = analyze_state(&s.chain, &s.es.state(k), s.es.values[k], &cfg.split, &cfg.numerics)?;
                    rows.push(row(cfg, len, field, label, k, s.es.values[k], None, &a));
                }
                if cfg.timings {
                    let secs = start.elapsed().as_secs_f64();
                    rows.iter_mut().for_each(|r| r.wall_time_s = Some(secs));
                }
                Ok(rows)
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((len, field), res) in items.into_iter().zip(results) {
        match res {
            Ok(r) => rows.extend(r),
            Err(e) => failures.push(PointFailure { len, field, message: e.to_string() }),
        }
    }
    add_field_derivatives(&mut rows);
    Ok(FieldSweep { rows, failures })
}

fn add_field_derivatives(rows: &mut [ResultRow]) {
    let mut keys: Vec<(usize, String)> = rows.iter().map(|r| (r.len, r.state.clone())).collect();
    keys.sort();
    keys.dedup();
    for (len, state) in keys {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].len == len && rows[i].state == state).collect();
        for w in idx.windows(3) {
            let (prev, next) = (&rows[w[0]], &rows[w[2]]);
            let df = next.field - prev.field;
            if df != 0.0 {
                let de_ent = (next.e_ent - prev.e_ent) / df;
                let de_sq = (next.e_sq - prev.e_sq) / df;
                rows[w[1]].de_ent_dfield = Some(de_ent);
                rows[w[1]].de_sq_dfield = Some(de_sq);
            }
        }
    }
}

/// Merged peaks of one state, broadened at `numerics.eta`. Uses the first
/// size and field of the config and the first state label.
pub fn state_spectrum(cfg: &ExperimentConfig) -> Result<Spectrum> {
    cfg.validate()?;
    let len = cfg.sizes[0];
    let field = cfg.field_points()?[0];
    let s = solve(cfg, len, field, 0)?;
    let k = select_states(&s.es, cfg.states[0], 1)?[0];
    let coeffs = s.chain.coefficients(&s.es.state(k), s.es.values[k], &cfg.split)?;
    let broadening = Broadening { eta: cfg.numerics.eta, grid: None };
    Ok(build_spectrum(&coeffs, cfg.numerics.merge_tol, cfg.numerics.weight_cutoff, Some(&broadening)))
}

/// Sorted normalized weights `|γ̃_nm|²` for each configured state.
pub fn run_coefficients(cfg: &ExperimentConfig) -> Result<Vec<CoefficientRow>> {
    cfg.validate()?;
    let items = grid_items(cfg)?;
    let results: Vec<Vec<CoefficientRow>> = in_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(len, field)| {
                let s = solve(cfg, len, field, 0)?;
                let mut rows = Vec::new();
                for &label in &cfg.states {
                    let k = select_states(&s.es, label, 1)?[0];
                    let coeffs = s.chain.coefficients(&s.es.state(k), s.es.values[k], &cfg.split)?;
                    let weights = coeffs.normalized_sorted(cfg.numerics.weight_cutoff)?;
                    rows.extend(weights.into_iter().enumerate().map(|(rank, weight)| CoefficientRow {
                        len,
                        field,
                        state: label.to_string(),
                        state_index: k,
                        rank,
                        weight,
                    }));
                }
                Ok(rows)
            })
            .collect::<Result<_>>()
    })??;
    Ok(results.into_iter().flatten().collect())
}

/// Fits `E_ent(L)` and `E_sq(L)` for each field value and state label.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingReport>> {
    cfg.validate()?;
    let items = grid_items(cfg)?;
    // Per item: for each label, (mean e_ent, mean e_sq, states used).
    let results: Vec<Vec<(f64, f64, usize)>> = in_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(len, field)| {
                let s = solve(cfg, len, field, 0)?;
                cfg.states
                    .iter()
                    .map(|&label| {
                        let picked = select_states(&s.es, label, cfg.scaling.mid_states)?;
                        let (mut ee, mut sq) = (0.0, 0.0);
                        for &k in &picked {
                            let a = analyze_state(&s.chain, &s.es.state(k), s.es.values[k], &cfg.split, &cfg.numerics)?;
                            ee += a.e_ent;
                            sq += a.e_sq;
                        }
                        let n = picked.len() as f64;
                        Ok((ee / n, sq / n, picked.len()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()
    })??;

    let fields = cfg.field_points()?;
    let mut reports = Vec::new();
    for (fi, &field) in fields.iter().enumerate() {
        for (li, &label) in cfg.states.iter().enumerate() {
            let picked: Vec<&(f64, f64, usize)> =
                (0..cfg.sizes.len()).map(|si| &results[si * fields.len() + fi][li]).collect();
            let ee: Vec<f64> = picked.iter().map(|p| p.0).collect();
            let sq: Vec<f64> = picked.iter().map(|p| p.1).collect();
            let e_ent = fit_scaling(&cfg.sizes, &ee, cfg.scaling.area_law_slope)?;
            let e_sq = fit_scaling(&cfg.sizes, &sq, cfg.scaling.area_law_slope)?;
            reports.push(ScalingReport {
                model: cfg.model.name().to_string(),
                j: cfg.model.coupling(),
                alpha: cfg.model.alpha(),
                field,
                state: label.to_string(),
                states_averaged: picked.iter().map(|p| p.2).min().unwrap_or(0),
                models_agree: e_ent.best == e_sq.best,
                e_ent,
                e_sq,
            });
        }
    }
    Ok(reports)
}

/// Exactly reproducible mean and standard error: values are sorted before
/// summation, so the result does not depend on the order samples arrive in.
pub(crate) fn mean_sem(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ensemble averages over disorder realizations and window eigenstates.
pub fn run_disorder_sweep(cfg: &ExperimentConfig) -> Result<Vec<DisorderEnsembleStats>> {
    cfg.validate()?;
    let fields = cfg.field_points()?;
    let n_real = cfg.ensemble.n_realizations;
    let items: Vec<(usize, f64, u64)> =
        cfg.sizes.iter().flat_map(|&l| fields.iter().flat_map(move |&h| (0..n_real).map(move |r| (l, h, r)))).collect();
    let [lo, hi] = cfg.ensemble.energy_window;
    // None marks a realization whose window was empty.
    let results: Vec<Option<Vec<(f64, f64)>>> = in_pool(cfg.threads, || {
        items
            .par_iter()
            .map(|&(len, h, r)| {
                let s = solve(cfg, len, h, r)?;
                let v = &s.es.values;
                let (emin, emax) = (v[0], v[v.len() - 1]);
                let width = emax - emin;
                let center = emin + 0.5 * (lo + hi) * width;
                let mut picked: Vec<usize> = (0..v.len())
                    .filter(|&k| {
                        let x = if width > 0.0 { (v[k] - emin) / width } else { 0.0 };
                        x >= lo && x <= hi
                    })
                    .collect();
                if picked.is_empty() {
                    return Ok(None);
                }
                if let Some(n) = cfg.ensemble.n_states_per_realization {
                    let energies: Vec<f64> = picked.iter().map(|&k| v[k]).collect();
                    picked = nearest(&energies, center, n).into_iter().map(|i| picked[i]).collect();
                }
                picked
                    .iter()
                    .map(|&k| {
                        let a = analyze_state(&s.chain, &s.es.state(k), v[k], &cfg.split, &cfg.numerics)?;
                        Ok((a.e_ent, a.e_sq))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some)
            })
            .collect::<Result<_>>()
    })??;

    let mut stats = Vec::new();
    for (g, chunk) in results.chunks(n_real as usize).enumerate() {
        let (len, h, _) = items[g * n_real as usize];
        let used: Vec<&Vec<(f64, f64)>> = chunk.iter().flatten().collect();
        let ee: Vec<f64> = used.iter().flat_map(|v| v.iter().map(|p| p.0)).collect();
        let sq: Vec<f64> = used.iter().flat_map(|v| v.iter().map(|p| p.1)).collect();
        let (mean_e_ent, sem_e_ent) = mean_sem(&ee);
        let (mean_e_sq, sem_e_sq) = mean_sem(&sq);
        stats.push(DisorderEnsembleStats {
            len,
            disorder: h,
            mean_e_ent,
            sem_e_ent,
            mean_e_sq,
            sem_e_sq,
            n_samples: ee.len(),
            n_realizations_used: used.len() as u64,
            n_realizations_skipped: n_real - used.len() as u64,
        });
    }
    Ok(stats)
}

/// RF drive simulation against the broadened split spectrum of the same state.
pub fn run_rf_check(cfg: &ExperimentConfig) -> Result<Vec<RfOverlay>> {
    cfg.validate()?;
    let drive = cfg.rf.drive;
    let spec = SplitOperatorSpec::new(drive.rabi_1, drive.rabi_2)?.with_eps_aux(drive.eps_aux);
    let mut out = Vec::new();
    for (len, field) in grid_items(cfg)? {
        let s = solve(cfg, len, field, 0)?;
        for &label in &cfg.states {
            let k = select_states(&s.es, label, 1)?[0];
            let psi = s.es.state(k);
            let coeffs = s.chain.coefficients(&psi, s.es.values[k], &spec)?;
            let peaks = build_spectrum(&coeffs, cfg.numerics.merge_tol, cfg.numerics.weight_cutoff, None).peaks;
            if peaks.is_empty() {
                return Err(Error::ZeroSplitWeight { total_weight: coeffs.total_weight });
            }
            let (grid, step) = match &cfg.rf.freqs {
                Some(g) => {
                    let pts = g.points()?;
                    let step = pts.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
                    (pts, step)
                }
                None => {
                    let lo = peaks[0].omega - cfg.rf.margin;
                    let hi = peaks[peaks.len() - 1].omega + cfg.rf.margin;
                    let n = ((hi - lo) / cfg.rf.step).ceil() as usize;
                    ((0..=n).map(|i| lo + i as f64 * cfg.rf.step).collect(), cfg.rf.step)
                }
            };
            let curve: RfCurve =
                in_pool(cfg.threads, || rf_response(&s.ham, &s.chain.partition, &psi, &drive, &grid, &cfg.numerics))??;
            let split_curve =
                broaden_peaks(&peaks, &Broadening { eta: cfg.numerics.eta, grid: Some(grid.clone()) }).values;
            let maxima = curve.peak_indices(1e-3);
            let wmax = peaks.iter().map(|p| p.weight).fold(0.0, f64::max);
            let mut rf_peak_freqs = Vec::new();
            let mut peak_deltas = Vec::new();
            for p in peaks.iter().filter(|p| p.weight >= 1e-3 * wmax) {
                let nearest_max = maxima
                    .iter()
                    .map(|&i| grid[i])
                    .min_by(|a, b| (a - p.omega).abs().partial_cmp(&(b - p.omega).abs()).expect("finite"));
                let f = nearest_max.unwrap_or(f64::NAN);
                rf_peak_freqs.push(f);
                peak_deltas.push(f - p.omega);
            }
            out.push(RfOverlay {
                len,
                field,
                state: label.to_string(),
                eta: cfg.numerics.eta,
                grid_step: step,
                grid,
                rf_rate: curve.rates,
                split_curve,
                split_peaks: peaks,
                rf_peak_freqs,
                peak_deltas,
                max_population: curve.max_population,
            });
        }
    }
    Ok(out)
}

/// Runs the configured scenario.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    Ok(match cfg.scenario {
        Scenario::Coefficients => ExperimentOutput::Coefficients(run_coefficients(cfg)?),
        Scenario::FieldSweep => ExperimentOutput::FieldSweep(run_field_sweep(cfg)?),
        Scenario::Scaling => ExperimentOutput::Scaling(run_scaling(cfg)?),
        Scenario::DisorderSweep => ExperimentOutput::Disorder(run_disorder_sweep(cfg)?),
        Scenario::RfCheck => ExperimentOutput::Rf(run_rf_check(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mean_sem_small_cases() {
        assert_eq!(mean_sem(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sem(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert!(mean_sem(&[]).0.is_nan());
    }

    #[test]
    fn mid_selection_is_nearest_the_center() {
        assert_eq!(nearest(&[0.0, 1.0, 2.0, 3.0, 4.0], 2.0, 3), vec![2, 1, 3]);
        assert_eq!(nearest(&[0.0, 1.0, 3.0, 4.0], 2.0, 1), vec![1]);
    }

    proptest! {
        #[test]
        fn mean_sem_is_bitwise_permutation_invariant(
            v in proptest::collection::vec(0.0f64..10.0, 2..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut w = v.clone();
            w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (a, b) = (mean_sem(&v), mean_sem(&w));
            prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
            prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }
}
