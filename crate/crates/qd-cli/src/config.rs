//! Configuration file parsing, defaults, scenario presets, and the builders
//! that turn a [`RunConfig`] into the library-level inputs.
//!
//! File format: `[section]` headers, `key = value` lines, `#` comments.
//! Every physical quantity carries an explicit unit suffix (`meV`, `ueV`,
//! `ps`, `V`, `meV/V`, `ueV/V`); dimensionless quantities are bare numbers.
//! Unknown sections, unknown keys, duplicate keys, missing units, and
//! out-of-range values are all hard errors that name the offending line.

use std::collections::BTreeSet;

use qd_hilbert::{dyad, BasisLabel, Operator};
use qd_model::{
    DeviceModel, DissipatorRates, FrameSpec, Polarization, PulseSpec, StarkModel,
};
use qd_spectrum::EnergyBins;
use qd_sweep::{ClassifyParams, ControlEnergy, SweepConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn at_line(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

/// `[model]`: level positions, their bias dependence, and the dissipator
/// rates. Energies in ueV, slopes in ueV/V, voltages in V.
///
/// The XX line is not a free parameter: the anchor voltage is defined as the
/// two-photon resonance of the pump, so E_XX(anchor) = 2 E_pump − E_X(anchor).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub anchor_voltage: f64,
    pub x_line: f64,
    pub stark_x: f64,
    pub stark_xx: f64,
    pub fss: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub radiative: f64,
    pub dephasing: f64,
    pub refill: f64,
}

/// `[pulses]`: the two Gaussian pulses. Amplitudes are peak coupling
/// energies (ueV), centers and the shared width in ps, carriers in ueV.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSection {
    pub pump_amplitude: f64,
    pub pump_center: f64,
    pub pump_energy: f64,
    pub control_amplitude: f64,
    pub control_center: f64,
    pub control_energy: f64,
    pub width: f64,
}

/// `[grids]`: integration steps, detection window, filter linewidth, photon
/// energy bins, and the rotating-frame energy. Energies in ueV, times in ps.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub time_step: f64,
    pub delay_step: f64,
    pub window_end: f64,
    pub filter_linewidth: f64,
    pub bin_start: f64,
    pub bin_end: f64,
    pub bin_step: f64,
    pub frame: f64,
}

/// `[sweep]`: bias axis plus the peak-tracking and classification knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub v_start: f64,
    pub v_end: f64,
    pub points: usize,
    pub prominence: f64,
    pub max_jump: f64,
    pub classify_tolerance: f64,
    pub min_inliers: usize,
    pub slope_tolerance: f64,
}

/// `[output]`: writer knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub heatmap_gamma: f64,
    pub notch_half_width: f64,
}

/// Fully resolved run configuration: every default filled in, every value
/// validated. Canonical internal units: ueV, ps, V.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSection,
    pub pulses: PulseSection,
    pub grids: GridSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// Parse-time shape: fields whose defaults derive from other fields stay
/// optional until `finalize`.
#[derive(Debug, Clone)]
struct Draft {
    model: ModelSection,
    pulses_control_energy: Option<f64>,
    pulses: PulseSection,
    grids_bin_start: Option<f64>,
    grids_bin_end: Option<f64>,
    grids_frame: Option<f64>,
    grids: GridSection,
    sweep: SweepSection,
    output: OutputSection,
}

impl Default for Draft {
    fn default() -> Draft {
        Draft {
            model: ModelSection {
                anchor_voltage: -0.12,
                x_line: 1_342_500.0,
                stark_x: -700.0,
                stark_xx: -1_300.0,
                fss: 0.0,
                v_min: -1.5,
                v_max: 1.5,
                radiative: 4.0,
                dephasing: 4.0,
                refill: 4.0,
            },
            pulses_control_energy: None,
            pulses: PulseSection {
                pump_amplitude: 288.7,
                pump_center: 200.0,
                pump_energy: 1_341_170.0,
                control_amplitude: 103.1,
                control_center: 300.0,
                control_energy: f64::NAN, // resolved in finalize
                width: 100.0,
            },
            grids_bin_start: None,
            grids_bin_end: None,
            grids_frame: None,
            grids: GridSection {
                time_step: 0.5,
                delay_step: 0.5,
                window_end: 600.0,
                filter_linewidth: 4.0,
                bin_start: f64::NAN,
                bin_end: f64::NAN,
                bin_step: 5.0,
                frame: f64::NAN,
            },
            sweep: SweepSection {
                v_start: -0.3,
                v_end: 0.3,
                points: 25,
                prominence: 0.05,
                max_jump: 100.0,
                classify_tolerance: 30.0,
                min_inliers: 5,
                slope_tolerance: 0.15,
            },
            output: OutputSection {
                heatmap_gamma: 0.5,
                notch_half_width: 400.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Model,
    Pulses,
    Grids,
    Sweep,
    Output,
}

/// Unit dimension a key expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Energy,
    Time,
    Voltage,
    EnergyPerVolt,
    Bare,
    Count,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = token
        .parse()
        .map_err(|_| at_line(line, format!("`{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(at_line(line, format!("`{token}` is not finite")));
    }
    Ok(v)
}

/// Parses `value` as a number with the unit the key demands, returning the
/// value in internal units (ueV / ps / V).
fn parse_quantity(value: &str, dim: Dim, line: usize) -> Result<f64, ConfigError> {
    let mut parts = value.split_whitespace();
    let number = parts
        .next()
        .ok_or_else(|| at_line(line, "missing value"))?;
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(at_line(line, format!("trailing text after `{value}`")));
    }
    let v = parse_number(number, line)?;
    let scaled = match dim {
        Dim::Bare | Dim::Count => match unit {
            None => v,
            Some(u) => {
                return Err(at_line(
                    line,
                    format!("this key is dimensionless; remove the unit `{u}`"),
                ))
            }
        },
        Dim::Energy => match unit {
            Some("meV") => v * 1000.0,
            Some("ueV") | Some("μeV") | Some("µeV") => v,
            Some(u) => return Err(at_line(line, format!("unknown energy unit `{u}`"))),
            None => return Err(at_line(line, "missing unit (meV or ueV)")),
        },
        Dim::Time => match unit {
            Some("ps") => v,
            Some(u) => return Err(at_line(line, format!("unknown time unit `{u}`"))),
            None => return Err(at_line(line, "missing unit (ps)")),
        },
        Dim::Voltage => match unit {
            Some("V") => v,
            Some(u) => return Err(at_line(line, format!("unknown voltage unit `{u}`"))),
            None => return Err(at_line(line, "missing unit (V)")),
        },
        Dim::EnergyPerVolt => match unit {
            Some("meV/V") => v * 1000.0,
            Some("ueV/V") | Some("μeV/V") | Some("µeV/V") => v,
            Some(u) => return Err(at_line(line, format!("unknown slope unit `{u}`"))),
            None => return Err(at_line(line, "missing unit (meV/V or ueV/V)")),
        },
    };
    Ok(scaled)
}

fn parse_count(value: &str, line: usize) -> Result<usize, ConfigError> {
    let v = parse_quantity(value, Dim::Count, line)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(at_line(line, format!("`{value}` is not a whole count")));
    }
    Ok(v as usize)
}

fn require(ok: bool, line: usize, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(at_line(line, message.to_string()))
    }
}

impl Draft {
    /// Routes one `key = value` line into the draft, validating the local
    /// range constraints that do not depend on other keys.
    fn apply(
        &mut self,
        section: Section,
        key: &str,
        value: &str,
        line: usize,
    ) -> Result<(), ConfigError> {
        match (section, key) {
            (Section::Model, "anchor_voltage") => {
                self.model.anchor_voltage = parse_quantity(value, Dim::Voltage, line)?;
            }
            (Section::Model, "x_line") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "x_line must be positive")?;
                self.model.x_line = v;
            }
            (Section::Model, "stark_x") => {
                self.model.stark_x = parse_quantity(value, Dim::EnergyPerVolt, line)?;
            }
            (Section::Model, "stark_xx") => {
                self.model.stark_xx = parse_quantity(value, Dim::EnergyPerVolt, line)?;
            }
            (Section::Model, "fss") => {
                self.model.fss = parse_quantity(value, Dim::Energy, line)?;
            }
            (Section::Model, "v_min") => {
                self.model.v_min = parse_quantity(value, Dim::Voltage, line)?;
            }
            (Section::Model, "v_max") => {
                self.model.v_max = parse_quantity(value, Dim::Voltage, line)?;
            }
            (Section::Model, "radiative") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "radiative rate must be nonnegative")?;
                self.model.radiative = v;
            }
            (Section::Model, "dephasing") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "dephasing rate must be nonnegative")?;
                self.model.dephasing = v;
            }
            (Section::Model, "refill") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "refill rate must be nonnegative")?;
                self.model.refill = v;
            }
            (Section::Pulses, "pump_amplitude") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "pump_amplitude must be nonnegative")?;
                self.pulses.pump_amplitude = v;
            }
            (Section::Pulses, "pump_center") => {
                self.pulses.pump_center = parse_quantity(value, Dim::Time, line)?;
            }
            (Section::Pulses, "pump_energy") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "pump_energy must be positive")?;
                self.pulses.pump_energy = v;
            }
            (Section::Pulses, "control_amplitude") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "control_amplitude must be nonnegative")?;
                self.pulses.control_amplitude = v;
            }
            (Section::Pulses, "control_center") => {
                self.pulses.control_center = parse_quantity(value, Dim::Time, line)?;
            }
            (Section::Pulses, "control_energy") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "control_energy must be positive")?;
                self.pulses_control_energy = Some(v);
            }
            (Section::Pulses, "width") => {
                let v = parse_quantity(value, Dim::Time, line)?;
                require(v > 0.0, line, "width must be positive")?;
                self.pulses.width = v;
            }
            (Section::Grids, "time_step") => {
                let v = parse_quantity(value, Dim::Time, line)?;
                require(v > 0.0, line, "time_step must be positive")?;
                self.grids.time_step = v;
            }
            (Section::Grids, "delay_step") => {
                let v = parse_quantity(value, Dim::Time, line)?;
                require(v > 0.0, line, "delay_step must be positive")?;
                self.grids.delay_step = v;
            }
            (Section::Grids, "window_end") => {
                let v = parse_quantity(value, Dim::Time, line)?;
                require(v > 0.0, line, "window_end must be positive")?;
                self.grids.window_end = v;
            }
            (Section::Grids, "filter_linewidth") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "filter_linewidth must be positive")?;
                self.grids.filter_linewidth = v;
            }
            (Section::Grids, "bin_start") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "bin_start must be positive")?;
                self.grids_bin_start = Some(v);
            }
            (Section::Grids, "bin_end") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "bin_end must be positive")?;
                self.grids_bin_end = Some(v);
            }
            (Section::Grids, "bin_step") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "bin_step must be positive")?;
                self.grids.bin_step = v;
            }
            (Section::Grids, "frame") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "frame must be positive")?;
                self.grids_frame = Some(v);
            }
            (Section::Sweep, "v_start") => {
                self.sweep.v_start = parse_quantity(value, Dim::Voltage, line)?;
            }
            (Section::Sweep, "v_end") => {
                self.sweep.v_end = parse_quantity(value, Dim::Voltage, line)?;
            }
            (Section::Sweep, "points") => {
                let v = parse_count(value, line)?;
                require(v >= 2, line, "points must be at least 2")?;
                self.sweep.points = v;
            }
            (Section::Sweep, "prominence") => {
                let v = parse_quantity(value, Dim::Bare, line)?;
                require(
                    v > 0.0 && v <= 1.0,
                    line,
                    "prominence must be in (0, 1]",
                )?;
                self.sweep.prominence = v;
            }
            (Section::Sweep, "max_jump") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "max_jump must be positive")?;
                self.sweep.max_jump = v;
            }
            (Section::Sweep, "classify_tolerance") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v > 0.0, line, "classify_tolerance must be positive")?;
                self.sweep.classify_tolerance = v;
            }
            (Section::Sweep, "min_inliers") => {
                let v = parse_count(value, line)?;
                require(v >= 2, line, "min_inliers must be at least 2")?;
                self.sweep.min_inliers = v;
            }
            (Section::Sweep, "slope_tolerance") => {
                let v = parse_quantity(value, Dim::Bare, line)?;
                require(
                    v > 0.0 && v <= 1.0,
                    line,
                    "slope_tolerance must be in (0, 1]",
                )?;
                self.sweep.slope_tolerance = v;
            }
            (Section::Output, "heatmap_gamma") => {
                let v = parse_quantity(value, Dim::Bare, line)?;
                require(v > 0.0, line, "heatmap_gamma must be positive")?;
                self.output.heatmap_gamma = v;
            }
            (Section::Output, "notch_half_width") => {
                let v = parse_quantity(value, Dim::Energy, line)?;
                require(v >= 0.0, line, "notch_half_width must be nonnegative")?;
                self.output.notch_half_width = v;
            }
            (_, key) => {
                return Err(at_line(line, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    /// Resolves derived defaults and checks the constraints that couple
    /// several keys.
    fn finalize(mut self) -> Result<RunConfig, ConfigError> {
        self.pulses.control_energy = self
            .pulses_control_energy
            .unwrap_or(self.model.x_line + 300.0);
        self.grids.frame = self.grids_frame.unwrap_or(self.pulses.pump_energy);
        self.grids.bin_start = self.grids_bin_start.unwrap_or(self.model.x_line - 3000.0);
        self.grids.bin_end = self.grids_bin_end.unwrap_or(self.model.x_line + 3000.0);

        let m = &self.model;
        if !(m.v_min < m.v_max) {
            return Err(ConfigError::Invalid(format!(
                "v_min ({}) must be below v_max ({})",
                m.v_min, m.v_max
            )));
        }
        if m.anchor_voltage < m.v_min || m.anchor_voltage > m.v_max {
            return Err(ConfigError::Invalid(format!(
                "anchor_voltage ({}) is outside [v_min, v_max] = [{}, {}]",
                m.anchor_voltage, m.v_min, m.v_max
            )));
        }
        let g = &self.grids;
        if !(g.bin_start < g.bin_end) {
            return Err(ConfigError::Invalid(format!(
                "bin_start ({} ueV) must be below bin_end ({} ueV)",
                g.bin_start, g.bin_end
            )));
        }
        if (g.bin_end - g.bin_start) / g.bin_step > 2e6 {
            return Err(ConfigError::Invalid(
                "energy binning exceeds 2e6 bins; refusing".into(),
            ));
        }
        let spd = g.time_step / g.delay_step;
        if (spd - spd.round()).abs() > 1e-9 || spd < 1.0 - 1e-9 {
            return Err(ConfigError::Invalid(format!(
                "time_step ({} ps) must be an integer multiple of delay_step ({} ps)",
                g.time_step, g.delay_step
            )));
        }
        let s = &self.sweep;
        if !(s.v_start < s.v_end) {
            return Err(ConfigError::Invalid(format!(
                "v_start ({}) must be below v_end ({})",
                s.v_start, s.v_end
            )));
        }
        Ok(RunConfig {
            model: self.model,
            pulses: self.pulses,
            grids: self.grids,
            sweep: self.sweep,
            output: self.output,
        })
    }
}

/// Parses the documented configuration format and fills in every default.
/// The empty string is a valid file: it yields the default configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut draft = Draft::default();
    let mut section: Option<Section> = None;
    let mut seen: BTreeSet<(&'static str, String)> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| at_line(line_no, "unterminated [section] header"))?
                .trim();
            section = Some(match name {
                "model" => Section::Model,
                "pulses" => Section::Pulses,
                "grids" => Section::Grids,
                "sweep" => Section::Sweep,
                "output" => Section::Output,
                other => {
                    return Err(at_line(line_no, format!("unknown section `[{other}]`")))
                }
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            at_line(line_no, "expected `key = value` or a `[section]` header")
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(at_line(line_no, format!("key `{key}` has no value")));
        }
        let section = section
            .ok_or_else(|| at_line(line_no, "key appears before any [section] header"))?;
        let section_name = match section {
            Section::Model => "model",
            Section::Pulses => "pulses",
            Section::Grids => "grids",
            Section::Sweep => "sweep",
            Section::Output => "output",
        };
        if !seen.insert((section_name, key.to_string())) {
            return Err(at_line(
                line_no,
                format!("duplicate key `{key}` in [{section_name}]"),
            ));
        }
        draft.apply(section, key, value, line_no)?;
    }
    draft.finalize()
}

/// Canonical text form: fixed section and key order, internal units, floats
/// in shortest round-trip form. `parse_config(serialize(cfg)) == cfg`.
pub fn serialize(cfg: &RunConfig) -> String {
    let m = &cfg.model;
    let p = &cfg.pulses;
    let g = &cfg.grids;
    let s = &cfg.sweep;
    let o = &cfg.output;
    format!(
        "[model]\n\
         anchor_voltage = {} V\n\
         x_line = {} ueV\n\
         stark_x = {} ueV/V\n\
         stark_xx = {} ueV/V\n\
         fss = {} ueV\n\
         v_min = {} V\n\
         v_max = {} V\n\
         radiative = {} ueV\n\
         dephasing = {} ueV\n\
         refill = {} ueV\n\
         \n\
         [pulses]\n\
         pump_amplitude = {} ueV\n\
         pump_center = {} ps\n\
         pump_energy = {} ueV\n\
         control_amplitude = {} ueV\n\
         control_center = {} ps\n\
         control_energy = {} ueV\n\
         width = {} ps\n\
         \n\
         [grids]\n\
         time_step = {} ps\n\
         delay_step = {} ps\n\
         window_end = {} ps\n\
         filter_linewidth = {} ueV\n\
         bin_start = {} ueV\n\
         bin_end = {} ueV\n\
         bin_step = {} ueV\n\
         frame = {} ueV\n\
         \n\
         [sweep]\n\
         v_start = {} V\n\
         v_end = {} V\n\
         points = {}\n\
         prominence = {}\n\
         max_jump = {} ueV\n\
         classify_tolerance = {} ueV\n\
         min_inliers = {}\n\
         slope_tolerance = {}\n\
         \n\
         [output]\n\
         heatmap_gamma = {}\n\
         notch_half_width = {} ueV\n",
        m.anchor_voltage,
        m.x_line,
        m.stark_x,
        m.stark_xx,
        m.fss,
        m.v_min,
        m.v_max,
        m.radiative,
        m.dephasing,
        m.refill,
        p.pump_amplitude,
        p.pump_center,
        p.pump_energy,
        p.control_amplitude,
        p.control_center,
        p.control_energy,
        p.width,
        g.time_step,
        g.delay_step,
        g.window_end,
        g.filter_linewidth,
        g.bin_start,
        g.bin_end,
        g.bin_step,
        g.frame,
        s.v_start,
        s.v_end,
        s.points,
        s.prominence,
        s.max_jump,
        s.classify_tolerance,
        s.min_inliers,
        s.slope_tolerance,
        o.heatmap_gamma,
        o.notch_half_width,
    )
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        Draft::default()
            .finalize()
            .expect("default configuration is valid")
    }
}

/// Scenario presets. Each one rewrites the scenario-owned keys of an already
/// parsed configuration; everything else (rates, amplitudes, the Stark
/// model itself) stays as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Control placed on the X line at `anchor + 0.32 V`; the
    /// down-conversion line then traverses the XX line inside the sweep.
    Fig5a,
    /// Control placed on the XX line at the same voltage; the
    /// down-conversion line traverses the X line instead.
    Fig5b,
    /// Pump only (control off), swept through the two-photon resonance.
    Fig3,
    /// Use the configuration file as-is.
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Fig5a,
        Scenario::Fig5b,
        Scenario::Fig3,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig5a => "fig5a",
            Scenario::Fig5b => "fig5b",
            Scenario::Fig3 => "fig3",
            Scenario::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Result<Scenario, ConfigError> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "unknown scenario `{name}` (expected fig5a, fig5b, fig3, or custom)"
                ))
            })
    }
}

/// Voltage offset from the anchor at which the presets place the control on
/// its target line. With the default model this is +0.20 V absolute.
pub const RESONANCE_OFFSET_V: f64 = 0.32;

/// Applies a scenario preset on top of a parsed configuration.
pub fn apply_scenario(cfg: &mut RunConfig, scenario: Scenario) -> Result<(), ConfigError> {
    if scenario == Scenario::Custom {
        return Ok(());
    }
    let stark = stark_model(cfg)?;
    let anchor = cfg.model.anchor_voltage;
    let v_res = anchor + RESONANCE_OFFSET_V;

    match scenario {
        Scenario::Fig5a | Scenario::Fig5b => {
            cfg.pulses.control_energy = if scenario == Scenario::Fig5a {
                stark.ex(v_res)
            } else {
                stark.exx(v_res)
            };
            // Late control window: the detection filter weights the end of
            // the window, so centering the control there puts the dressed
            // era in view while the pump-only era has decayed.
            cfg.pulses.control_center = 600.0;
            cfg.grids.window_end = 700.0;
            cfg.grids.time_step = 0.5;
            cfg.grids.delay_step = 0.25;
            cfg.grids.frame = cfg.pulses.pump_energy;
            cfg.grids.bin_start = cfg.pulses.pump_energy - 4_370.0;
            cfg.grids.bin_end = cfg.pulses.pump_energy + 4_030.0;
            cfg.grids.bin_step = 5.0;
            // Wide span: classification needs fit wings where the control
            // light shift is small, several pulse bandwidths off resonance.
            cfg.sweep.v_start = anchor - 0.76;
            cfg.sweep.v_end = anchor + 1.40;
            cfg.sweep.points = 25;
            cfg.sweep.prominence = 0.02;
            cfg.sweep.max_jump = 250.0;
            cfg.sweep.classify_tolerance = 40.0;
            cfg.sweep.min_inliers = 5;
            cfg.sweep.slope_tolerance = 0.15;
        }
        Scenario::Fig3 => {
            cfg.pulses.control_amplitude = 0.0;
            cfg.grids.window_end = 600.0;
            cfg.grids.time_step = 0.5;
            cfg.grids.delay_step = 0.25;
            cfg.grids.frame = cfg.pulses.pump_energy;
            cfg.grids.bin_start = cfg.pulses.pump_energy - 3_000.0;
            cfg.grids.bin_end = cfg.pulses.pump_energy + 3_000.0;
            cfg.grids.bin_step = 5.0;
            cfg.sweep.v_start = anchor - 0.30;
            cfg.sweep.v_end = anchor + 0.30;
            cfg.sweep.points = 25;
            cfg.sweep.prominence = 0.03;
            cfg.sweep.max_jump = 100.0;
            cfg.sweep.classify_tolerance = 50.0;
            cfg.sweep.min_inliers = 5;
            cfg.sweep.slope_tolerance = 0.15;
        }
        Scenario::Custom => unreachable!(),
    }
    Ok(())
}

/// Default configuration with a scenario applied — the canonical way the
/// tests and the CLI obtain preset runs.
pub fn preset_config(scenario: Scenario) -> RunConfig {
    let mut cfg = RunConfig::default();
    apply_scenario(&mut cfg, scenario).expect("presets apply to the default configuration");
    cfg
}

fn invalid<E: std::fmt::Display>(e: E) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

/// Stark model from the `[model]` section; the XX line is anchored to the
/// pump's two-photon resonance at the anchor voltage.
pub fn stark_model(cfg: &RunConfig) -> Result<StarkModel, ConfigError> {
    StarkModel::anchored(
        [cfg.model.x_line, cfg.model.stark_x, 0.0],
        cfg.model.stark_xx,
        0.0,
        cfg.model.anchor_voltage,
        cfg.pulses.pump_energy,
        cfg.model.v_min,
        cfg.model.v_max,
    )
    .map_err(invalid)
}

/// Full device model from the configuration.
pub fn device_model(cfg: &RunConfig) -> Result<DeviceModel, ConfigError> {
    let stark = stark_model(cfg)?;
    let rates = DissipatorRates::new(
        cfg.model.dephasing,
        cfg.model.radiative,
        cfg.model.refill,
    )
    .map_err(invalid)?;
    let tpe = PulseSpec::new(
        cfg.pulses.pump_amplitude,
        cfg.pulses.pump_center,
        cfg.pulses.width,
        cfg.pulses.pump_energy,
        Polarization::H,
    )
    .map_err(invalid)?;
    let control = PulseSpec::new(
        cfg.pulses.control_amplitude,
        cfg.pulses.control_center,
        cfg.pulses.width,
        cfg.pulses.control_energy,
        Polarization::V,
    )
    .map_err(invalid)?;
    DeviceModel::new(
        stark,
        cfg.model.fss,
        rates,
        tpe,
        control,
        FrameSpec::RotatingAt(cfg.grids.frame),
    )
    .map_err(invalid)
}

/// Energy bins from the `[grids]` section (stored in ueV, built in meV).
pub fn energy_bins(cfg: &RunConfig) -> Result<EnergyBins, ConfigError> {
    EnergyBins::new(
        cfg.grids.bin_start / 1000.0,
        cfg.grids.bin_end / 1000.0,
        cfg.grids.bin_step / 1000.0,
    )
    .map_err(invalid)
}

/// Evenly spaced sweep voltages with exact endpoints.
pub fn sweep_voltages(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.sweep.points;
    let (a, b) = (cfg.sweep.v_start, cfg.sweep.v_end);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Sweep job from the configuration: ground-state start, fixed lasers,
/// scenario grids.
pub fn sweep_config(cfg: &RunConfig) -> Result<SweepConfig, ConfigError> {
    let sc = SweepConfig {
        voltages: sweep_voltages(cfg),
        model: device_model(cfg)?,
        tpe_energy: cfg.pulses.pump_energy,
        control_energy: ControlEnergy::Fixed(cfg.pulses.control_energy),
        initial: ground_state(),
        outer_dt: cfg.grids.time_step,
        delay_dt: cfg.grids.delay_step,
        window_end: cfg.grids.window_end,
        filter_hbar_gamma: cfg.grids.filter_linewidth,
        bins: energy_bins(cfg)?,
    };
    sc.validate().map_err(invalid)?;
    Ok(sc)
}

/// Classification parameters from the `[sweep]` section (tolerances meV).
pub fn classify_params(cfg: &RunConfig) -> ClassifyParams {
    ClassifyParams {
        tolerance: cfg.sweep.classify_tolerance / 1000.0,
        min_inliers: cfg.sweep.min_inliers,
        slope_tolerance: cfg.sweep.slope_tolerance,
    }
}

/// The ground state |G><G|.
pub fn ground_state() -> Operator {
    dyad(BasisLabel::G, BasisLabel::G)
}
