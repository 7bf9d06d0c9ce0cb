//! Glue between the resolved configuration and the simulation crates: the
//! full bias sweep, a single-voltage spectrum matching one sweep column,
//! peak tracking, and optional laser-notch masking.

use qd_model::DeviceModel;
use qd_propagator::{propagate, TimeGrid};
use qd_spectrum::{
    filtered_spectrum, qrt_correlation, EmissionOperator, FilterSpec, Spectrum,
};
use qd_sweep::{
    apply_notch_mask, classify_tracks_with, run_sweep, track_peaks, PeakTrack, SpectralMap,
};
use thiserror::Error;

use crate::config::{
    classify_params, device_model, energy_bins, ground_state, sweep_config, ConfigError,
    RunConfig,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(String),
}

fn run_err<E: std::fmt::Display>(e: E) -> PipelineError {
    PipelineError::Run(e.to_string())
}

/// Runs the configured bias sweep on the current rayon pool.
pub fn sweep_map(cfg: &RunConfig) -> Result<SpectralMap, PipelineError> {
    run_sweep(&sweep_config(cfg)?).map_err(run_err)
}

/// Computes the emission spectrum at one bias voltage, reproducing exactly
/// what a sweep column at that voltage would contain.
pub fn spectrum_at(cfg: &RunConfig, v: f64) -> Result<Spectrum, PipelineError> {
    let model = device_model(cfg)?;
    let mut bp = model.at(v).map_err(run_err)?;
    bp.tpe.carrier = cfg.pulses.pump_energy;
    bp.control.carrier = cfg.pulses.control_energy;
    let grid =
        TimeGrid::new(0.0, cfg.grids.window_end, cfg.grids.time_step).map_err(run_err)?;
    let traj = propagate(&bp, &ground_state(), grid, bp.frame).map_err(run_err)?;
    let corr = qrt_correlation(
        &bp,
        &traj,
        &EmissionOperator::canonical_v(),
        cfg.grids.delay_step,
    )
    .map_err(run_err)?;
    let filter =
        FilterSpec::new(cfg.grids.filter_linewidth, cfg.grids.window_end).map_err(run_err)?;
    filtered_spectrum(&corr, &filter, &energy_bins(cfg)?).map_err(run_err)
}

/// Tracks peaks across the map and labels them against the model lines,
/// using the `[sweep]` tracking parameters.
pub fn tracks_for(map: &SpectralMap, cfg: &RunConfig, model: &DeviceModel) -> Vec<PeakTrack> {
    let tracks = track_peaks(map, cfg.sweep.prominence, cfg.sweep.max_jump / 1000.0);
    classify_tracks_with(&tracks, model, classify_params(cfg))
}

/// The two laser energies, meV — the centers for notch masking.
pub fn notch_centers(cfg: &RunConfig) -> [f64; 2] {
    [
        cfg.pulses.pump_energy / 1000.0,
        cfg.pulses.control_energy / 1000.0,
    ]
}

/// Map with the laser notches zeroed.
pub fn masked_map(map: &SpectralMap, cfg: &RunConfig) -> SpectralMap {
    apply_notch_mask(
        map,
        &notch_centers(cfg),
        cfg.output.notch_half_width / 1000.0,
    )
}

/// Spectrum with the laser notches zeroed (single-voltage counterpart of
/// [`masked_map`]).
pub fn masked_spectrum(spectrum: &Spectrum, cfg: &RunConfig) -> Spectrum {
    let half = cfg.output.notch_half_width / 1000.0;
    let centers = notch_centers(cfg);
    let mut intensities = spectrum.intensities.clone();
    for (k, value) in intensities.iter_mut().enumerate() {
        let e = spectrum.bins.energy_mev(k);
        // Open interval, matching the map-level notch mask.
        if centers.iter().any(|c| (e - c).abs() < half) {
            *value = 0.0;
        }
    }
    Spectrum {
        bins: spectrum.bins,
        intensities,
    }
}
