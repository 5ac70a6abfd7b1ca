//! Scenario runner: field sweeps, scaling fits, disorder ensembles, weight
//! lists and RF cross-checks, with deterministic CSV/JSON output.
//!
//! Work items run on a rayon pool and are collected by item index, and every
//! item is computed sequentially, so output bytes do not depend on the
//! number of threads.

mod config;
mod fit;
mod runs;

pub use config::{
    EnsembleConfig, ExperimentConfig, Grid, ModelSpec, RfCheckConfig, ScalingConfig, Scenario, StateLabel,
};
pub use fit::{fit_scaling, FitModel, FitResult, ScalingFit};
pub use runs::{
    analyze_state, run, run_coefficients, run_disorder_sweep, run_field_sweep, run_rf_check, run_scaling,
    select_states, state_spectrum, StateAnalysis,
};

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitspec::Peak;

/// One analyzed eigenstate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(rename = "L")]
    pub len: usize,
    pub model: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub alpha: Option<f64>,
    /// `h` for the XY model, `H` for the random-field model.
    pub field: f64,
    pub state: String,
    pub state_index: usize,
    pub energy: f64,
    pub realization: Option<u64>,
    pub e_ent: f64,
    pub e_ent_merged: f64,
    pub e_sq: f64,
    pub n_peaks: usize,
    pub total_weight: f64,
    pub triseparable: bool,
    /// `n_peaks = 1`, `e_ent ≈ 0` and `triseparable` all agree.
    pub criterion_consistent: bool,
    pub de_ent_dfield: Option<f64>,
    pub de_sq_dfield: Option<f64>,
    pub wall_time_s: Option<f64>,
}

/// A field point that could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    #[serde(rename = "L")]
    pub len: usize,
    pub field: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSweep {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<PointFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    #[serde(rename = "L")]
    pub len: usize,
    pub field: f64,
    pub state: String,
    pub state_index: usize,
    pub rank: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub model: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub alpha: Option<f64>,
    pub field: f64,
    pub state: String,
    /// Eigenstates averaged per size.
    pub states_averaged: usize,
    pub e_ent: ScalingFit,
    pub e_sq: ScalingFit,
    pub models_agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderEnsembleStats {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "H")]
    pub disorder: f64,
    pub mean_e_ent: f64,
    pub sem_e_ent: f64,
    pub mean_e_sq: f64,
    pub sem_e_sq: f64,
    pub n_samples: usize,
    pub n_realizations_used: u64,
    pub n_realizations_skipped: u64,
}

/// RF rate curve and split spectrum on a common grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfOverlay {
    #[serde(rename = "L")]
    pub len: usize,
    pub field: f64,
    pub state: String,
    pub eta: f64,
    pub grid_step: f64,
    pub grid: Vec<f64>,
    pub rf_rate: Vec<f64>,
    pub split_curve: Vec<f64>,
    pub split_peaks: Vec<Peak>,
    /// RF local maximum matched to each split peak above 1e-3 of the largest.
    pub rf_peak_freqs: Vec<f64>,
    pub peak_deltas: Vec<f64>,
    pub max_population: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    Coefficients(Vec<CoefficientRow>),
    FieldSweep(FieldSweep),
    Scaling(Vec<ScalingReport>),
    Disorder(Vec<DisorderEnsembleStats>),
    Rf(Vec<RfOverlay>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

fn write_csv_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

impl ExperimentOutput {
    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(match self {
            ExperimentOutput::Coefficients(r) => serde_json::to_value(r)?,
            ExperimentOutput::FieldSweep(s) => serde_json::to_value(s)?,
            ExperimentOutput::Scaling(r) => serde_json::to_value(r)?,
            ExperimentOutput::Disorder(r) => serde_json::to_value(r)?,
            ExperimentOutput::Rf(r) => serde_json::to_value(r)?,
        })
    }

    /// Tables go out as CSV with a fixed column order; nested reports are
    /// flattened to one line per fit or grid point.
    pub fn write<W: Write>(&self, mut w: W, format: OutputFormat) -> Result<()> {
        if format == OutputFormat::Json {
            serde_json::to_writer_pretty(&mut w, &self.to_json()?)?;
            writeln!(w)?;
            return Ok(());
        }
        match self {
            ExperimentOutput::Coefficients(r) => write_csv_rows(w, r),
            ExperimentOutput::FieldSweep(s) => write_csv_rows(w, &s.rows),
            ExperimentOutput::Disorder(r) => write_csv_rows(w, r),
            ExperimentOutput::Scaling(reports) => {
                let mut wtr = csv::Writer::from_writer(w);
                wtr.write_record(["state", "field", "quantity", "fit", "a", "b", "rss", "best", "models_agree"])?;
                for r in reports {
                    for (q, s) in [("e_ent", &r.e_ent), ("e_sq", &r.e_sq)] {
                        for f in &s.fits {
                            wtr.serialize((
                                &r.state,
                                r.field,
                                q,
                                f.model,
                                f.a,
                                f.b,
                                f.rss,
                                f.model == s.best,
                                r.models_agree,
                            ))?;
                        }
                    }
                }
                wtr.flush()?;
                Ok(())
            }
            ExperimentOutput::Rf(overlays) => {
                let mut wtr = csv::Writer::from_writer(w);
                wtr.write_record(["L", "field", "state", "omega", "rf_rate", "split_value"])?;
                for o in overlays {
                    for ((x, r), s) in o.grid.iter().zip(&o.rf_rate).zip(&o.split_curve) {
                        wtr.serialize((o.len, o.field, &o.state, x, r, s))?;
                    }
                }
                wtr.flush()?;
                Ok(())
            }
        }
    }

    pub fn write_to_path(&self, path: &Path, format: OutputFormat) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(file, format)
    }
}
