//! Deterministic output writers: TSV tables, metadata sidecars, and a PGM
//! heatmap. Byte-for-byte reproducible — fixed float format, LF newlines,
//! no timestamps — so identical runs produce identical files regardless of
//! worker count.

use sha2::{Digest, Sha256};

use qd_spectrum::Spectrum;
use qd_sweep::{PeakTrack, SpectralMap};

use crate::config::{serialize, RunConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the canonical serialized configuration, lowercase hex.
/// Identifies a run's physics inputs; runtime knobs (worker count, output
/// paths) deliberately do not enter it.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serialize(cfg).as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

/// SHA-256 of arbitrary bytes, lowercase hex. Used by the determinism
/// checks to compare whole output files.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

/// Canonical data-value format: 9 significant digits, scientific notation.
fn fmt(x: f64) -> String {
    format!("{x:.8e}")
}

/// Energy-by-voltage map as TSV. Rows are energy bins (first column the bin
/// center in meV), remaining columns one per voltage. Header comments carry
/// the tool version, configuration hash, both axes, per-column line
/// references, masked bands, and any failed columns.
pub fn map_tsv(map: &SpectralMap, config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# qdsim {TOOL_VERSION} spectral map\n"));
    out.push_str(&format!("# config sha256 {config_hash}\n"));
    out.push_str(&format!(
        "# energy bins {} from {} to {} meV step {} meV\n",
        map.bins.len(),
        fmt(map.bins.first_mev()),
        fmt(map.bins.last_mev()),
        fmt(map.bins.step_mev()),
    ));
    out.push_str(&format!(
        "# voltages {} from {} to {} V\n",
        map.voltages.len(),
        fmt(*map.voltages.first().unwrap_or(&f64::NAN)),
        fmt(*map.voltages.last().unwrap_or(&f64::NAN)),
    ));
    for (v, refs) in map.voltages.iter().zip(&map.line_refs) {
        out.push_str(&format!(
            "# line_refs v {} e_x {} e_xx {} e_b {} meV\n",
            fmt(*v),
            fmt(refs.e_x),
            fmt(refs.e_xx),
            fmt(refs.e_b),
        ));
    }
    for (lo, hi) in &map.masked_bands {
        out.push_str(&format!("# masked_band {} {} meV\n", fmt(*lo), fmt(*hi)));
    }
    for (i, diag) in map.diagnostics.iter().enumerate() {
        if let Some(message) = diag {
            let flat = message.replace(['\n', '\t'], " ");
            out.push_str(&format!(
                "# failed_column {} v {} {}\n",
                i,
                fmt(map.voltages[i]),
                flat
            ));
        }
    }
    out.push_str("energy_meV");
    for v in &map.voltages {
        out.push('\t');
        out.push_str(&fmt(*v));
    }
    out.push('\n');
    for k in 0..map.bins.len() {
        out.push_str(&fmt(map.bins.energy_mev(k)));
        for col in &map.intensities {
            out.push('\t');
            out.push_str(&fmt(col[k]));
        }
        out.push('\n');
    }
    out
}

/// Single spectrum as two-column TSV (bin center meV, intensity).
pub fn spectrum_tsv(spectrum: &Spectrum, voltage: f64, config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# qdsim {TOOL_VERSION} spectrum\n"));
    out.push_str(&format!("# config sha256 {config_hash}\n"));
    out.push_str(&format!("# voltage {} V\n", fmt(voltage)));
    out.push_str(&format!(
        "# energy bins {} from {} to {} meV step {} meV\n",
        spectrum.bins.len(),
        fmt(spectrum.bins.first_mev()),
        fmt(spectrum.bins.last_mev()),
        fmt(spectrum.bins.step_mev()),
    ));
    out.push_str("energy_meV\tintensity\n");
    for (k, intensity) in spectrum.intensities.iter().enumerate() {
        out.push_str(&fmt(spectrum.bins.energy_mev(k)));
        out.push('\t');
        out.push_str(&fmt(*intensity));
        out.push('\n');
    }
    out
}

/// Peak tracks as TSV: a summary comment per track, then one row per point
/// (track index, label, voltage, energy, intensity).
pub fn tracks_tsv(tracks: &[PeakTrack], config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# qdsim {TOOL_VERSION} peak tracks\n"));
    out.push_str(&format!("# config sha256 {config_hash}\n"));
    for (i, track) in tracks.iter().enumerate() {
        let (v0, v1) = track.voltage_span();
        out.push_str(&format!(
            "# track {} label {} points {} span {} {} V slope {} consensus_slope {} \
             residual {} inliers {}\n",
            i,
            track.label,
            track.len(),
            fmt(v0),
            fmt(v1),
            fmt(track.slope),
            fmt(track.consensus_slope),
            fmt(track.residual),
            track.inliers,
        ));
    }
    out.push_str("track\tlabel\tvoltage_V\tenergy_meV\tintensity\n");
    for (i, track) in tracks.iter().enumerate() {
        for p in track.points() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                i,
                track.label,
                fmt(p.voltage),
                fmt(p.energy),
                fmt(p.intensity),
            ));
        }
    }
    out
}

/// Metadata sidecar: tool version, configuration hash, and the resolved
/// configuration in canonical form.
pub fn metadata_text(cfg: &RunConfig, config_hash: &str) -> String {
    format!(
        "qdsim {TOOL_VERSION}\nconfig sha256 {config_hash}\n\n{}",
        serialize(cfg)
    )
}

/// Binary PGM (P5, 16-bit) heatmap of the map. Width = voltages (left =
/// first voltage), height = energy bins with row 0 the HIGHEST energy, so
/// the image reads like an energy-vs-bias plot. Pixels are
/// `round(65535 * (I / I_max)^gamma)`; gamma < 1 lifts faint lines. An
/// all-zero map renders black.
pub fn heatmap_pgm(map: &SpectralMap, gamma: f64) -> Vec<u8> {
    let width = map.voltages.len();
    let height = map.bins.len();
    let i_max = map
        .intensities
        .iter()
        .flat_map(|col| col.iter().cloned())
        .fold(0.0_f64, f64::max);
    let mut out = Vec::with_capacity(64 + 2 * width * height);
    out.extend_from_slice(
        format!(
            "P5\n# qdsim {TOOL_VERSION} heatmap; rows top-to-bottom = energy high-to-low, \
             columns left-to-right = voltage low-to-high, gamma {gamma}\n{width} {height}\n65535\n"
        )
        .as_bytes(),
    );
    for row in 0..height {
        let k = height - 1 - row;
        for col in &map.intensities {
            let value = if i_max > 0.0 {
                let unit = (col[k].max(0.0) / i_max).powf(gamma);
                (unit * 65535.0).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&value.to_be_bytes());
        }
    }
    out
}
