//! Bias-voltage sweeps over the four-level emitter, producing energy-by-voltage
//! spectral maps, plus the analysis toolkit that reads them: peak detection,
//! track building across voltages, slope-based line classification, and
//! avoided-crossing measurement.
//!
//! A sweep holds the laser energies fixed while the bias tunes the levels
//! through them. Each voltage column is an independent pipeline run
//! (model -> propagation -> two-time correlation -> filtered spectrum); columns
//! are distributed over a worker pool and gathered in voltage order, so the
//! assembled map is byte-identical for any worker count.

use qd_hilbert::{assert_physical, Operator, PhysicalityTolerances};
use qd_model::{DeviceModel, ModelError};
use qd_propagator::{propagate, PropagationError, TimeGrid};
use qd_spectrum::{
    filtered_spectrum, qrt_correlation, EmissionOperator, EnergyBins, FilterSpec, SpectrumError,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least two voltages, got {0}")]
    TooFewVoltages(usize),
    #[error("voltages must be strictly increasing (index {index}: {prev} then {next})")]
    VoltagesNotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("laser energies must be positive; {which} is {value} ueV")]
    NonPositiveLaserEnergy { which: &'static str, value: f64 },
    #[error("per-voltage control energies: {got} entries for {expected} voltages")]
    ControlLengthMismatch { got: usize, expected: usize },
    #[error("initial state is not a physical density matrix: {0}")]
    UnphysicalInitial(String),
    #[error("time grid: {0}")]
    Grid(String),
    #[error("track needs at least two points with strictly increasing voltages")]
    MalformedTrack,
    #[error("avoided-crossing gap needs >= 3 shared voltage samples, found {0}")]
    InsufficientOverlap(usize),
    #[error("map dimensions are inconsistent: {0}")]
    MalformedMap(String),
}

/// Control-laser photon energy across the sweep: one fixed value (the
/// experiment's arrangement) or an explicit per-voltage list.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlEnergy {
    Fixed(f64),
    PerVoltage(Vec<f64>),
}

impl ControlEnergy {
    fn at(&self, index: usize) -> f64 {
        match self {
            ControlEnergy::Fixed(e) => *e,
            ControlEnergy::PerVoltage(es) => es[index],
        }
    }
}

/// Everything one sweep needs. Laser carrier energies live here rather than
/// in the pulse specs so a scenario can be stated in one place; `run_sweep`
/// copies them onto the per-voltage bias points.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Bias values, volts, strictly increasing.
    pub voltages: Vec<f64>,
    pub model: DeviceModel,
    /// Two-photon-excitation carrier, ueV; fixed across the sweep.
    pub tpe_energy: f64,
    /// Control carrier, ueV.
    pub control_energy: ControlEnergy,
    /// State the propagation starts from at t = 0.
    pub initial: Operator,
    /// Outer propagation step, ps.
    pub outer_dt: f64,
    /// Delay-axis step for the two-time correlation, ps.
    pub delay_dt: f64,
    /// End of the detection window, ps; propagation covers [0, window_end].
    pub window_end: f64,
    /// Detection filter linewidth hbar*Gamma, ueV.
    pub filter_hbar_gamma: f64,
    /// Photon-energy bins for every column, meV, lab frame.
    pub bins: EnergyBins,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.voltages.len() < 2 {
            return Err(SweepError::TooFewVoltages(self.voltages.len()));
        }
        for (i, pair) in self.voltages.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(SweepError::VoltagesNotIncreasing {
                    index: i + 1,
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        if !(self.tpe_energy > 0.0) {
            return Err(SweepError::NonPositiveLaserEnergy {
                which: "tpe_energy",
                value: self.tpe_energy,
            });
        }
        match &self.control_energy {
            ControlEnergy::Fixed(e) => {
                if !(*e > 0.0) {
                    return Err(SweepError::NonPositiveLaserEnergy {
                        which: "control_energy",
                        value: *e,
                    });
                }
            }
            ControlEnergy::PerVoltage(es) => {
                if es.len() != self.voltages.len() {
                    return Err(SweepError::ControlLengthMismatch {
                        got: es.len(),
                        expected: self.voltages.len(),
                    });
                }
                if let Some(bad) = es.iter().find(|e| !(**e > 0.0)) {
                    return Err(SweepError::NonPositiveLaserEnergy {
                        which: "control_energy",
                        value: *bad,
                    });
                }
            }
        }
        let report = assert_physical(&self.initial, &PhysicalityTolerances::default());
        if !report.is_ok() {
            return Err(SweepError::UnphysicalInitial(report.to_string()));
        }
        // Grid and filter parameters are re-validated by the layers below;
        // check the cheap invariants here so errors carry sweep context.
        if !(self.outer_dt > 0.0 && self.delay_dt > 0.0 && self.window_end > self.outer_dt) {
            return Err(SweepError::Grid(format!(
                "need 0 < outer_dt < window_end and delay_dt > 0; got outer_dt {} ps, \
                 delay_dt {} ps, window_end {} ps",
                self.outer_dt, self.delay_dt, self.window_end
            )));
        }
        Ok(())
    }
}

/// Stark-model line energies attached to each column, meV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRefs {
    pub e_x: f64,
    pub e_xx: f64,
    pub e_b: f64,
}

/// Energy-by-voltage intensity map with per-column metadata.
///
/// `intensities[i]` is the column for `voltages[i]`, one entry per energy bin.
/// Failed columns are all-zero and carry a diagnostic; the sweep never aborts
/// half-way through the voltage list.
#[derive(Debug, Clone)]
pub struct SpectralMap {
    pub voltages: Vec<f64>,
    pub bins: EnergyBins,
    pub intensities: Vec<Vec<f64>>,
    pub line_refs: Vec<LineRefs>,
    /// One entry per column; `None` means the column computed cleanly.
    pub diagnostics: Vec<Option<String>>,
    /// Bands zeroed by `apply_notch_mask`, meV, as (low, high) pairs.
    pub masked_bands: Vec<(f64, f64)>,
}

impl SpectralMap {
    /// Assembles a map from parts, checking dimensional consistency and
    /// finiteness. This is also the entry point for synthetic maps in tests.
    pub fn from_parts(
        voltages: Vec<f64>,
        bins: EnergyBins,
        intensities: Vec<Vec<f64>>,
        line_refs: Vec<LineRefs>,
        diagnostics: Vec<Option<String>>,
    ) -> Result<SpectralMap, SweepError> {
        if intensities.len() != voltages.len()
            || line_refs.len() != voltages.len()
            || diagnostics.len() != voltages.len()
        {
            return Err(SweepError::MalformedMap(format!(
                "{} voltages, {} columns, {} line refs, {} diagnostics",
                voltages.len(),
                intensities.len(),
                line_refs.len(),
                diagnostics.len()
            )));
        }
        for (i, col) in intensities.iter().enumerate() {
            if col.len() != bins.len() {
                return Err(SweepError::MalformedMap(format!(
                    "column {i} has {} bins, expected {}",
                    col.len(),
                    bins.len()
                )));
            }
            if let Some(bad) = col.iter().find(|x| !x.is_finite()) {
                return Err(SweepError::MalformedMap(format!(
                    "column {i} contains non-finite intensity {bad}"
                )));
            }
        }
        Ok(SpectralMap {
            voltages,
            bins,
            intensities,
            line_refs,
            diagnostics,
            masked_bands: Vec::new(),
        })
    }

    pub fn failed_columns(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.is_some()).count()
    }
}

/// Runs the full per-voltage pipeline and assembles the map.
///
/// Columns run in parallel on the current rayon pool; results are gathered in
/// voltage order and each column's arithmetic is sequential, so the map does
/// not depend on the worker count. A column that fails (bias out of range,
/// unphysical state, grid trouble) contributes zeros plus a diagnostic
/// instead of aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SpectralMap, SweepError> {
    cfg.validate()?;
    let grid = TimeGrid::new(0.0, cfg.window_end, cfg.outer_dt)
        .map_err(|e| SweepError::Grid(e.to_string()))?;
    let filter = FilterSpec::new(cfg.filter_hbar_gamma, cfg.window_end)
        .map_err(|e| SweepError::Grid(e.to_string()))?;

    let columns: Vec<(Vec<f64>, LineRefs, Option<String>)> = cfg
        .voltages
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let refs = LineRefs {
                e_x: cfg.model.stark.ex(v) / 1000.0,
                e_xx: cfg.model.stark.exx(v) / 1000.0,
                e_b: cfg.model.stark.eb(v) / 1000.0,
            };
            match sweep_column(cfg, i, v, grid, filter) {
                Ok(col) => (col, refs, None),
                Err(msg) => {
                    log::warn!("column {i} (V = {v} V) failed: {msg}");
                    (vec![0.0; cfg.bins.len()], refs, Some(msg))
                }
            }
        })
        .collect();

    let mut intensities = Vec::with_capacity(columns.len());
    let mut line_refs = Vec::with_capacity(columns.len());
    let mut diagnostics = Vec::with_capacity(columns.len());
    for (col, refs, diag) in columns {
        intensities.push(col);
        line_refs.push(refs);
        diagnostics.push(diag);
    }
    let map = SpectralMap::from_parts(
        cfg.voltages.clone(),
        cfg.bins,
        intensities,
        line_refs,
        diagnostics,
    )?;
    if map.failed_columns() > 0 {
        log::warn!(
            "sweep finished with {} of {} columns failed",
            map.failed_columns(),
            map.voltages.len()
        );
    }
    Ok(map)
}

fn sweep_column(
    cfg: &SweepConfig,
    index: usize,
    v: f64,
    grid: TimeGrid,
    filter: FilterSpec,
) -> Result<Vec<f64>, String> {
    let mut bp = cfg
        .model
        .at(v)
        .map_err(|e: ModelError| format!("model at V = {v}: {e}"))?;
    bp.tpe.carrier = cfg.tpe_energy;
    bp.control.carrier = cfg.control_energy.at(index);
    let traj = propagate(&bp, &cfg.initial, grid, bp.frame)
        .map_err(|e: PropagationError| format!("propagation at V = {v}: {e}"))?;
    let corr = qrt_correlation(&bp, &traj, &EmissionOperator::canonical_v(), cfg.delay_dt)
        .map_err(|e: SpectrumError| format!("correlation at V = {v}: {e}"))?;
    let spec = filtered_spectrum(&corr, &filter, &cfg.bins)
        .map_err(|e: SpectrumError| format!("spectrum at V = {v}: {e}"))?;
    Ok(spec.intensities)
}

/// Identity assigned to a spectral track by `classify_tracks`.
///
/// `Display` prints the conventional line names (X, XX, SDC, UNKNOWN).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackLabel {
    Exciton,
    Biexciton,
    DownConversion,
    Unknown,
}

impl std::fmt::Display for TrackLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TrackLabel::Exciton => "X",
            TrackLabel::Biexciton => "XX",
            TrackLabel::DownConversion => "SDC",
            TrackLabel::Unknown => "UNKNOWN",
        };
        f.write_str(name)
    }
}

/// One point of a spectral track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub voltage: f64,
    /// Peak energy, meV (bin center of the local maximum).
    pub energy: f64,
    /// Raw intensity at the peak (arbitrary units, unnormalized).
    pub intensity: f64,
}

/// A spectral line followed across voltages: ordered points, a least-squares
/// linear fit, and (after classification) a label with a consensus refit.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakTrack {
    points: Vec<TrackPoint>,
    pub label: TrackLabel,
    /// Least-squares slope over all points, meV/V.
    pub slope: f64,
    /// RMS residual of that fit, meV.
    pub residual: f64,
    /// Points lying within the classification tolerance of the labeled
    /// reference line; zero until classified.
    pub inliers: usize,
    /// Least-squares slope over the inliers only, meV/V. Equals `slope`
    /// until classified. This is the robust slope estimate: points where the
    /// line is deformed (avoided crossings, dressing) don't enter it.
    pub consensus_slope: f64,
}

impl PeakTrack {
    /// Builds a track from points, fitting the line. Needs >= 2 points with
    /// strictly increasing voltages.
    pub fn from_points(points: Vec<TrackPoint>) -> Result<PeakTrack, SweepError> {
        if points.len() < 2
            || points
                .windows(2)
                .any(|pair| !(pair[1].voltage > pair[0].voltage))
        {
            return Err(SweepError::MalformedTrack);
        }
        let (slope, residual) = fit_line(
            points.iter().map(|p| (p.voltage, p.energy)),
            points.len(),
        );
        Ok(PeakTrack {
            points,
            label: TrackLabel::Unknown,
            slope,
            residual,
            inliers: 0,
            consensus_slope: slope,
        })
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn voltage_span(&self) -> (f64, f64) {
        (
            self.points.first().map(|p| p.voltage).unwrap_or(f64::NAN),
            self.points.last().map(|p| p.voltage).unwrap_or(f64::NAN),
        )
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.energy).sum::<f64>() / self.points.len() as f64
    }

    /// Track energy at `v`, linearly interpolated between samples.
    /// `v` must lie within the track's voltage span.
    fn energy_at(&self, v: f64) -> f64 {
        let pts = &self.points;
        match pts.iter().position(|p| p.voltage >= v) {
            Some(0) => pts[0].energy,
            Some(k) => {
                let (a, b) = (&pts[k - 1], &pts[k]);
                let w = (v - a.voltage) / (b.voltage - a.voltage);
                a.energy + w * (b.energy - a.energy)
            }
            None => pts.last().unwrap().energy,
        }
    }
}

/// Least-squares slope and RMS residual for (x, y) samples.
fn fit_line(samples: impl Iterator<Item = (f64, f64)> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in samples.clone() {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / nf, sy / nf);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in samples.clone() {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in samples {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    (slope, (ss / nf).sqrt())
}

/// Minimum track length retained by `track_peaks`; shorter fragments are
/// detection noise and would make meaningless two-point "lines".
const MIN_TRACK_LEN: usize = 3;

/// Detects peaks per column and chains them across voltages into tracks.
///
/// A bin is a peak if it is a local maximum (not an edge bin) at or above
/// `prominence` times its column's maximum; zero columns yield no peaks.
/// Peaks of adjacent columns are associated greedily by smallest energy jump,
/// each track extending by at most one peak per column and each peak joining
/// at most one track; jumps above `max_jump` (meV) start new tracks, and a
/// track that skips a column is closed. Ties in jump size resolve in favor of
/// the earlier-started track, then the lower-energy peak, so equal-height
/// duplicate maxima are all retained as candidates and continuity decides.
pub fn track_peaks(map: &SpectralMap, prominence: f64, max_jump: f64) -> Vec<PeakTrack> {
    struct Open {
        points: Vec<TrackPoint>,
        last_column: usize,
    }
    let mut open: Vec<Open> = Vec::new();
    for (ci, (&v, col)) in map.voltages.iter().zip(&map.intensities).enumerate() {
        let peaks = column_peaks(&map.bins, col, prominence);
        // Candidate (jump, track, peak) triples against tracks that reached
        // the previous column, smallest jump first.
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, tr) in open.iter().enumerate() {
            if tr.last_column + 1 != ci {
                continue;
            }
            let last_e = tr.points.last().unwrap().energy;
            for (pi, pk) in peaks.iter().enumerate() {
                let jump = (pk.energy - last_e).abs();
                if jump <= max_jump {
                    cands.push((jump, ti, pi));
                }
            }
        }
        cands.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut track_taken = vec![false; open.len()];
        let mut peak_taken = vec![false; peaks.len()];
        for (_, ti, pi) in cands {
            if track_taken[ti] || peak_taken[pi] {
                continue;
            }
            open[ti].points.push(TrackPoint {
                voltage: v,
                ..peaks[pi]
            });
            open[ti].last_column = ci;
            track_taken[ti] = true;
            peak_taken[pi] = true;
        }
        for (pi, pk) in peaks.iter().enumerate() {
            if !peak_taken[pi] {
                open.push(Open {
                    points: vec![TrackPoint { voltage: v, ..*pk }],
                    last_column: ci,
                });
            }
        }
    }
    open.into_iter()
        .filter(|t| t.points.len() >= MIN_TRACK_LEN)
        .map(|t| PeakTrack::from_points(t.points).expect("chained points are ordered"))
        .collect()
}

fn column_peaks(bins: &EnergyBins, col: &[f64], prominence: f64) -> Vec<TrackPoint> {
    let max = col.iter().cloned().fold(0.0_f64, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let floor = prominence * max;
    let mut out = Vec::new();
    for i in 1..col.len().saturating_sub(1) {
        if col[i] >= col[i - 1] && col[i] >= col[i + 1] && col[i] >= floor {
            out.push(TrackPoint {
                voltage: 0.0,
                energy: bins.energy_mev(i),
                intensity: col[i],
            });
        }
    }
    out
}

/// Classification knobs; `Default` gives the values used by the shipped
/// scenarios.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams {
    /// A track point is an inlier of a reference line if it lies within this
    /// energy distance of it, meV.
    pub tolerance: f64,
    /// Minimum inliers for a label to be considered.
    pub min_inliers: usize,
    /// Relative tolerance on the consensus slope against the reference slope.
    pub slope_tolerance: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            tolerance: 0.030,
            min_inliers: 5,
            slope_tolerance: 0.15,
        }
    }
}

/// Labels tracks against the model's line predictions with default
/// parameters; see [`classify_tracks_with`].
pub fn classify_tracks(tracks: &[PeakTrack], model: &DeviceModel) -> Vec<PeakTrack> {
    classify_tracks_with(tracks, model, ClassifyParams::default())
}

/// Labels each track X, XX, SDC, or UNKNOWN by consensus against the model's
/// reference lines.
///
/// For every candidate line (E_X(V), E_XX(V), and — when the control pulse
/// has nonzero amplitude — the down-conversion line E_B(V) − E_c at the
/// model's control carrier), the track's inliers are the points within
/// `tolerance` of that line. The label with the most inliers wins if it
/// reaches `min_inliers` and the slope refitted over the inliers alone agrees
/// with the reference slope within `slope_tolerance` (relative); otherwise
/// the track stays UNKNOWN. Refitting over inliers only keeps avoided
/// crossings and light shifts near resonances from polluting the slope, and
/// discards impostor tracks (e.g. a flat laser line crossing a reference at a
/// steep angle collects few inliers). Label ties resolve by smaller mean
/// inlier deviation, then by the fixed order X, XX, SDC.
pub fn classify_tracks_with(
    tracks: &[PeakTrack],
    model: &DeviceModel,
    params: ClassifyParams,
) -> Vec<PeakTrack> {
    let mut refs: Vec<(TrackLabel, Box<dyn Fn(f64) -> f64>, f64)> = vec![
        (
            TrackLabel::Exciton,
            Box::new(|v| model.stark.ex(v) / 1000.0),
            model.stark.slope_x(0.0) / 1000.0,
        ),
        (
            TrackLabel::Biexciton,
            Box::new(|v| model.stark.exx(v) / 1000.0),
            model.stark.slope_xx(0.0) / 1000.0,
        ),
    ];
    if model.control.amplitude > 0.0 {
        let e_c = model.control.carrier;
        refs.push((
            TrackLabel::DownConversion,
            Box::new(move |v| (model.stark.eb(v) - e_c) / 1000.0),
            model.stark.slope_b(0.0) / 1000.0,
        ));
    }

    tracks
        .iter()
        .map(|track| {
            let mut labeled = track.clone();
            labeled.label = TrackLabel::Unknown;
            labeled.inliers = 0;
            labeled.consensus_slope = track.slope;
            // Best = (inlier count, -mean |dev|) maximized; ties then fall to
            // the reference order above.
            let mut best: Option<(usize, f64, TrackLabel, Vec<bool>, f64)> = None;
            for (label, line, ref_slope) in &refs {
                let devs: Vec<f64> = track
                    .points
                    .iter()
                    .map(|p| (p.energy - line(p.voltage)).abs())
                    .collect();
                let mask: Vec<bool> = devs.iter().map(|d| *d <= params.tolerance).collect();
                let n = mask.iter().filter(|m| **m).count();
                if n < params.min_inliers {
                    continue;
                }
                let mean_dev = devs
                    .iter()
                    .zip(&mask)
                    .filter(|(_, m)| **m)
                    .map(|(d, _)| *d)
                    .sum::<f64>()
                    / n as f64;
                let better = match &best {
                    None => true,
                    Some((bn, bdev, ..)) => n > *bn || (n == *bn && mean_dev < *bdev),
                };
                if better {
                    best = Some((n, mean_dev, *label, mask, *ref_slope));
                }
            }
            if let Some((n, _, label, mask, ref_slope)) = best {
                let inlier_points: Vec<(f64, f64)> = track
                    .points
                    .iter()
                    .zip(&mask)
                    .filter(|(_, m)| **m)
                    .map(|(p, _)| (p.voltage, p.energy))
                    .collect();
                // Inliers may share a voltage only across *different* tracks,
                // never inside one, so the fit is well-posed for n >= 2.
                let (refit, _) = fit_line(inlier_points.iter().cloned(), inlier_points.len());
                if (refit - ref_slope).abs() <= params.slope_tolerance * ref_slope.abs() {
                    labeled.label = label;
                    labeled.inliers = n;
                    labeled.consensus_slope = refit;
                }
            }
            labeled
        })
        .collect()
}

/// The track with the most inliers among those carrying `label`, if any —
/// the sweep-level "this is the X line" pick when fragments exist.
pub fn principal_track<'a>(tracks: &'a [PeakTrack], label: TrackLabel) -> Option<&'a PeakTrack> {
    tracks
        .iter()
        .filter(|t| t.label == label)
        .max_by(|a, b| {
            (a.inliers, a.len())
                .cmp(&(b.inliers, b.len()))
        })
}

/// Minimum vertical separation between two tracks over their shared voltage
/// range, with linear interpolation between samples.
///
/// The candidate voltages are the union of both tracks' sample voltages
/// restricted to the overlap; at least three such samples are required for a
/// meaningful closest approach. Returns (gap in meV, voltage of closest
/// approach).
pub fn avoided_crossing_gap(a: &PeakTrack, b: &PeakTrack) -> Result<(f64, f64), SweepError> {
    let (a_lo, a_hi) = a.voltage_span();
    let (b_lo, b_hi) = b.voltage_span();
    let lo = a_lo.max(b_lo);
    let hi = a_hi.min(b_hi);
    let mut vs: Vec<f64> = a
        .points
        .iter()
        .chain(b.points.iter())
        .map(|p| p.voltage)
        .filter(|v| *v >= lo && *v <= hi)
        .collect();
    vs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vs.dedup();
    if vs.len() < 3 {
        return Err(SweepError::InsufficientOverlap(vs.len()));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for &v in &vs {
        let gap = (a.energy_at(v) - b.energy_at(v)).abs();
        if gap < best.0 {
            best = (gap, v);
        }
    }
    Ok(best)
}

/// Returns a copy of the map with intensity zeroed inside the open interval
/// ±`half_width` (meV) of each center — the spectral blind bands a notch
/// filter would impose. Zero half-width masks nothing. Masked bands are
/// recorded in the map's metadata.
pub fn apply_notch_mask(map: &SpectralMap, centers: &[f64], half_width: f64) -> SpectralMap {
    let mut out = map.clone();
    for &c in centers {
        for col in &mut out.intensities {
            for (k, val) in col.iter_mut().enumerate() {
                if (map.bins.energy_mev(k) - c).abs() < half_width {
                    *val = 0.0;
                }
            }
        }
        out.masked_bands.push((c - half_width, c + half_width));
    }
    out
}
