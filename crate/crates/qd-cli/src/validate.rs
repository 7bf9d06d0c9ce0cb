//! The `validate` subcommand: a battery of named self-checks covering the
//! invariants of every layer — generator algebra, analytic decay, oracle
//! agreement, correlation consistency, the spectrum against a closed-form
//! oracle, refusal paths, determinism across worker counts, and the output
//! masks. Each check prints one PASS/FAIL line; any failure makes the
//! command exit nonzero.

use nalgebra::SMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use qd_hilbert::{
    adjoint, dyad, hermiticity_deviation, min_eigenvalue, BasisLabel, C64, Operator,
};
use qd_model::{FrameSpec, HBAR};
use qd_propagator::{
    expm_oracle, frobenius_distance, liouvillian_apply, propagate, TimeGrid,
};
use qd_spectrum::{
    filtered_spectrum, qrt_correlation, CorrelationGrid, EmissionOperator, EnergyBins,
    FilterSpec,
};
use qd_sweep::{apply_notch_mask, run_sweep, LineRefs, SpectralMap};

use crate::config::{device_model, ground_state, sweep_config, RunConfig};
use crate::writers::{heatmap_pgm, map_tsv};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// Pseudo-random density matrix: rho = A A^dagger / tr, entries of A drawn
/// uniformly from the complex unit square.
fn random_state(rng: &mut ChaCha8Rng) -> Operator {
    let mut a = Operator::zeros();
    for r in 0..4 {
        for c in 0..4 {
            a[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let rho = a * adjoint(&a);
    let tr = rho.trace().re;
    rho * C64::new(1.0 / tr, 0.0)
}

/// Generator preserves trace and Hermiticity on random states at random
/// times through the pulse sequence.
fn check_generator(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<(f64, f64), String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let bp = model.at(cfg.model.anchor_voltage).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst_trace = 0.0_f64;
        let mut worst_herm = 0.0_f64;
        for _ in 0..100 {
            let rho = random_state(&mut rng);
            let t = rng.gen_range(0.0..cfg.grids.window_end);
            let rhs = liouvillian_apply(&bp, t, &rho, bp.frame);
            worst_trace = worst_trace.max(rhs.trace().norm());
            worst_herm = worst_herm.max(hermiticity_deviation(&rhs));
        }
        Ok((worst_trace, worst_herm))
    };
    match run() {
        Ok((tr, herm)) => check(
            "generator_trace_hermiticity",
            tr <= 1e-12 && herm <= 1e-12,
            format!("max |tr L(rho)| {tr:.2e}, max hermiticity deviation {herm:.2e} over 100 states"),
        ),
        Err(e) => check("generator_trace_hermiticity", false, e),
    }
}

/// sigma_V^dagger sigma_V is exactly the projector onto {X_V, B}.
fn check_emission_projector() -> CheckResult {
    let sigma = EmissionOperator::canonical_v();
    let product = adjoint(sigma.operator()) * sigma.operator();
    let mut expected = Operator::zeros();
    expected[(2, 2)] = C64::new(1.0, 0.0);
    expected[(3, 3)] = C64::new(1.0, 0.0);
    let dev = (product - expected).iter().map(|c| c.norm()).fold(0.0, f64::max);
    check(
        "emission_projector",
        dev == 0.0,
        format!("max |sigma^t sigma - P_XV,B| = {dev:.1e}"),
    )
}

/// The anchored Stark model puts the two-photon resonance exactly at the
/// anchor voltage.
fn check_stark_anchor(cfg: &RunConfig) -> CheckResult {
    match crate::config::stark_model(cfg) {
        Ok(stark) => {
            let v0 = cfg.model.anchor_voltage;
            let dev_b = (stark.eb(v0) - 2.0 * cfg.pulses.pump_energy).abs();
            let dev_x = (stark.ex(v0) - cfg.model.x_line).abs();
            check(
                "stark_anchor",
                dev_b <= 1e-6 && dev_x <= 1e-9,
                format!("|E_B(anchor) - 2 E_pump| = {dev_b:.2e} ueV, |E_X(anchor) - x_line| = {dev_x:.2e} ueV"),
            )
        }
        Err(e) => check("stark_anchor", false, e.to_string()),
    }
}

/// Bias outside the configured validity range must be refused, not
/// extrapolated.
fn check_bias_range_refusal(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<bool, String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        Ok(model.at(cfg.model.v_max + 1.0).is_err())
    };
    match run() {
        Ok(refused) => check(
            "bias_range_refusal",
            refused,
            format!("model.at(v_max + 1 V) refused: {refused}"),
        ),
        Err(e) => check("bias_range_refusal", false, e),
    }
}

/// Pulse envelope peaks at the center and is negligible five widths out.
fn check_pulse_envelope(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<(f64, f64, f64), String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let p = &model.tpe;
        let peak_dev = (p.envelope(p.center) - p.amplitude).abs();
        let tail = p.envelope(p.center + 5.0 * p.width) / p.amplitude;
        let asym = (p.envelope(p.center - 30.0) - p.envelope(p.center + 30.0)).abs();
        Ok((peak_dev, tail, asym))
    };
    match run() {
        Ok((peak_dev, tail, asym)) => check(
            "pulse_envelope",
            peak_dev == 0.0 && tail <= (-12.0_f64).exp() && asym <= 1e-12,
            format!("peak deviation {peak_dev:.1e} ueV, 5-width tail {tail:.2e}, asymmetry {asym:.1e}"),
        ),
        Err(e) => check("pulse_envelope", false, e),
    }
}

/// Fully driven trajectory stays a physical density matrix throughout.
fn check_driven_physicality(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<(f64, f64, f64, usize), String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let bp = model.at(cfg.model.anchor_voltage).map_err(|e| e.to_string())?;
        let grid = TimeGrid::new(0.0, cfg.grids.window_end, cfg.grids.time_step)
            .map_err(|e| e.to_string())?;
        let traj = propagate(&bp, &ground_state(), grid, bp.frame).map_err(|e| e.to_string())?;
        let mut worst_tr = 0.0_f64;
        let mut worst_herm = 0.0_f64;
        let mut worst_eig = 0.0_f64;
        for state in &traj.states {
            worst_tr = worst_tr.max((state.trace().re - 1.0).abs());
            worst_herm = worst_herm.max(hermiticity_deviation(state));
            worst_eig = worst_eig.min(min_eigenvalue(state));
        }
        Ok((worst_tr, worst_herm, worst_eig, traj.repairs))
    };
    match run() {
        Ok((tr, herm, eig, repairs)) => check(
            "driven_physicality",
            tr <= 1e-9 && herm <= 1e-10 && eig >= -1e-9,
            format!("max |tr-1| {tr:.2e}, hermiticity {herm:.2e}, min eigenvalue {eig:.2e}, repairs {repairs}"),
        ),
        Err(e) => check("driven_physicality", false, e),
    }
}

/// With the lasers and the refill channel off, X_V population follows the
/// analytic radiative decay to floating-point-limited accuracy.
fn check_undriven_decay(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<f64, String> {
        let mut quiet = cfg.clone();
        quiet.pulses.pump_amplitude = 0.0;
        quiet.pulses.control_amplitude = 0.0;
        quiet.model.refill = 0.0;
        let model = device_model(&quiet).map_err(|e| e.to_string())?;
        let bp = model.at(quiet.model.anchor_voltage).map_err(|e| e.to_string())?;
        let grid = TimeGrid::new(0.0, 100.0, 0.1).map_err(|e| e.to_string())?;
        let rho0 = dyad(BasisLabel::XV, BasisLabel::XV);
        let traj = propagate(&bp, &rho0, grid, bp.frame).map_err(|e| e.to_string())?;
        let pop = traj.states.last().unwrap()[(2, 2)].re;
        let analytic = (-2.0 * quiet.model.radiative * 100.0 / HBAR).exp();
        Ok((pop - analytic).abs())
    };
    match run() {
        Ok(dev) => check(
            "undriven_decay",
            dev <= 1e-7,
            format!("|pop_XV(100 ps) - analytic| = {dev:.2e}"),
        ),
        Err(e) => check("undriven_decay", false, e),
    }
}

/// RK4 and the piecewise-constant matrix-exponential oracle agree on a
/// driven 50 ps stretch at a moderate step (smoke tolerance; the strict
/// convergence statement lives in the acceptance suite).
fn check_oracle_smoke(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<f64, String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let bp = model.at(cfg.model.anchor_voltage).map_err(|e| e.to_string())?;
        let grid = TimeGrid::new(0.0, 50.0, 0.05).map_err(|e| e.to_string())?;
        let a = propagate(&bp, &ground_state(), grid, bp.frame).map_err(|e| e.to_string())?;
        let b = expm_oracle(&bp, &ground_state(), grid, bp.frame).map_err(|e| e.to_string())?;
        Ok(a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| frobenius_distance(x, y))
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(dev) => check(
            "oracle_smoke",
            dev <= 1e-4,
            format!("max Frobenius distance RK4 vs expm = {dev:.2e} (dt 0.05 ps, 50 ps)"),
        ),
        Err(e) => check("oracle_smoke", false, e),
    }
}

/// Zero-delay correlation equals the emitting-state population at every
/// outer time (checked here through the public API end to end).
fn check_zero_delay_consistency(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<f64, String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let bp = model.at(cfg.model.anchor_voltage).map_err(|e| e.to_string())?;
        let grid = TimeGrid::new(0.0, 150.0, 1.0).map_err(|e| e.to_string())?;
        let traj = propagate(&bp, &ground_state(), grid, bp.frame).map_err(|e| e.to_string())?;
        let corr = qrt_correlation(&bp, &traj, &EmissionOperator::canonical_v(), 0.5)
            .map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for i in 0..corr.outer_len() {
            let g0 = corr.value(i, 0);
            let rho = &traj.states[i];
            let pop = rho[(2, 2)].re + rho[(3, 3)].re;
            worst = worst.max((g0.re - pop).abs().max(g0.im.abs()));
        }
        Ok(worst)
    };
    match run() {
        Ok(dev) => check(
            "zero_delay_consistency",
            dev <= 1e-10,
            format!("max |g(t,0) - pop_XV+B| = {dev:.2e}"),
        ),
        Err(e) => check("zero_delay_consistency", false, e),
    }
}

/// Synthetic exponential correlation grid used by the closed-form spectrum
/// oracle: g(t, tau) = e^{-a t} e^{(-b + i c) tau}.
pub struct SyntheticOracle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dtau: f64,
    pub frame_uev: f64,
    pub hbar_gamma: f64,
}

impl Default for SyntheticOracle {
    fn default() -> SyntheticOracle {
        SyntheticOracle {
            a: 0.02,
            b: 0.02,
            c: 0.3,
            t_end: 25.0,
            dt: 0.0125,
            dtau: 0.0125,
            frame_uev: 1_341_170.0,
            hbar_gamma: 4.0,
        }
    }
}

impl SyntheticOracle {
    pub fn grid(&self) -> Result<CorrelationGrid, String> {
        let n = (self.t_end / self.dt).round() as usize;
        let spd = (self.dt / self.dtau).round() as usize;
        let mut rows = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = i as f64 * self.dt;
            let amp = (-self.a * t).exp();
            let m = (n - i) * spd;
            let row: Vec<C64> = (0..=m)
                .map(|j| {
                    let tau = j as f64 * self.dtau;
                    C64::from_polar(amp * (-self.b * tau).exp(), self.c * tau)
                })
                .collect();
            rows.push(row);
        }
        CorrelationGrid::from_rows(rows, self.dt, self.dtau, FrameSpec::RotatingAt(self.frame_uev))
            .map_err(|e| e.to_string())
    }

    /// Closed-form value of the windowed filtered double integral at one
    /// bin energy: both integrals are elementary for exponential
    /// correlations, leaving two finite-exponential terms.
    pub fn closed_form(&self, e_mev: f64) -> f64 {
        let omega = (e_mev * 1000.0 - self.frame_uev) / HBAR;
        let gamma = self.hbar_gamma / HBAR;
        let z = C64::new(0.5 * gamma - self.b, omega + self.c);
        let q = C64::new(self.a - gamma, 0.0);
        let w = q + z;
        let big_t = self.t_end;
        let term = |s: C64| ((s * big_t).exp() - C64::new(1.0, 0.0)) / s;
        let val = C64::new((-self.a * big_t).exp(), 0.0) / z * (term(w) - term(q));
        val.re
    }
}

/// filtered_spectrum against the closed-form oracle on synthetic data.
fn check_synthetic_spectrum() -> CheckResult {
    let run = || -> Result<(f64, f64), String> {
        let oracle = SyntheticOracle::default();
        let grid = oracle.grid()?;
        let filter =
            FilterSpec::new(oracle.hbar_gamma, oracle.t_end).map_err(|e| e.to_string())?;
        let bins = EnergyBins::new(1341.04, 1341.69, 0.065).map_err(|e| e.to_string())?;
        let spectrum = filtered_spectrum(&grid, &filter, &bins).map_err(|e| e.to_string())?;
        let exact: Vec<f64> = (0..bins.len())
            .map(|k| oracle.closed_form(bins.energy_mev(k)))
            .collect();
        let scale = exact.iter().cloned().fold(0.0_f64, f64::max);
        let worst = spectrum
            .intensities
            .iter()
            .zip(&exact)
            .map(|(s, e)| (s - e).abs())
            .fold(0.0_f64, f64::max);
        Ok((worst / scale, scale))
    };
    match run() {
        Ok((rel, scale)) => check(
            "synthetic_spectrum_oracle",
            rel <= 1e-6,
            format!("max deviation {rel:.2e} of peak {scale:.1}"),
        ),
        Err(e) => check("synthetic_spectrum_oracle", false, e),
    }
}

/// Bins outside the delay grid's representable band must be refused.
fn check_nyquist_refusal() -> CheckResult {
    let run = || -> Result<bool, String> {
        let oracle = SyntheticOracle {
            dtau: 0.5,
            dt: 0.5,
            t_end: 10.0,
            ..SyntheticOracle::default()
        };
        let grid = oracle.grid()?;
        let filter =
            FilterSpec::new(oracle.hbar_gamma, oracle.t_end).map_err(|e| e.to_string())?;
        // pi/0.5 rad/ps is about 4.1 meV from the frame; ask for 6 meV away.
        let bins =
            EnergyBins::new(1347.0, 1347.5, 0.05).map_err(|e| e.to_string())?;
        Ok(filtered_spectrum(&grid, &filter, &bins).is_err())
    };
    match run() {
        Ok(refused) => check(
            "nyquist_refusal",
            refused,
            format!("out-of-band bins refused: {refused}"),
        ),
        Err(e) => check("nyquist_refusal", false, e),
    }
}

/// Small sweep configuration for the determinism and isolation checks:
/// 3 voltages, short window, coarse bins.
fn tiny_sweep_cfg(cfg: &RunConfig) -> RunConfig {
    let mut small = cfg.clone();
    small.sweep.v_start = cfg.model.anchor_voltage - 0.05;
    small.sweep.v_end = cfg.model.anchor_voltage + 0.05;
    small.sweep.points = 3;
    small.grids.window_end = 150.0;
    small.grids.time_step = 1.0;
    small.grids.delay_step = 0.5;
    small.grids.bin_start = cfg.pulses.pump_energy - 1000.0;
    small.grids.bin_end = cfg.pulses.pump_energy + 1000.0;
    small.grids.bin_step = 50.0;
    small
}

/// The same sweep on 1 and 2 workers must serialize byte-identically.
fn check_sweep_determinism(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<bool, String> {
        let small = tiny_sweep_cfg(cfg);
        let sc = sweep_config(&small).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for workers in [1usize, 2] {
            let pool = ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| e.to_string())?;
            let map = pool.install(|| run_sweep(&sc)).map_err(|e| e.to_string())?;
            outputs.push(map_tsv(&map, "validate"));
        }
        Ok(outputs[0] == outputs[1])
    };
    match run() {
        Ok(same) => check(
            "sweep_determinism",
            same,
            format!("TSV identical across 1 and 2 workers: {same}"),
        ),
        Err(e) => check("sweep_determinism", false, e),
    }
}

/// One out-of-range voltage fails its column only; the rest of the sweep
/// is unaffected.
fn check_failed_column_isolation(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<(usize, bool, bool), String> {
        let small = tiny_sweep_cfg(cfg);
        let mut sc = sweep_config(&small).map_err(|e| e.to_string())?;
        sc.voltages = vec![small.model.anchor_voltage, small.model.v_max + 0.5];
        let map = run_sweep(&sc).map_err(|e| e.to_string())?;
        let bad_zero = map.intensities[1].iter().all(|x| *x == 0.0);
        let good_nonzero = map.intensities[0].iter().any(|x| *x > 0.0);
        Ok((map.failed_columns(), bad_zero, good_nonzero))
    };
    match run() {
        Ok((failed, bad_zero, good_nonzero)) => check(
            "failed_column_isolation",
            failed == 1 && bad_zero && good_nonzero,
            format!("failed columns {failed}, bad column zeroed {bad_zero}, good column intact {good_nonzero}"),
        ),
        Err(e) => check("failed_column_isolation", false, e),
    }
}

/// Synthetic uniform map used by the mask and heatmap checks.
fn uniform_map() -> Result<SpectralMap, String> {
    let bins = EnergyBins::new(1330.0, 1350.0, 0.1).map_err(|e| e.to_string())?;
    let nv = 5;
    let refs = LineRefs {
        e_x: 1342.5,
        e_xx: 1339.8,
        e_b: 2682.3,
    };
    SpectralMap::from_parts(
        (0..nv).map(|i| i as f64 * 0.1).collect(),
        bins,
        vec![vec![1.0; bins.len()]; nv],
        vec![refs; nv],
        vec![None; nv],
    )
    .map_err(|e| e.to_string())
}

/// Notch masking zeroes exactly the bins inside the band and records it.
fn check_notch_mask() -> CheckResult {
    let run = || -> Result<(bool, bool, usize), String> {
        let map = uniform_map()?;
        let center = 1340.0;
        let half = 0.45;
        let masked = apply_notch_mask(&map, &[center], half);
        let mut ok_zeroing = true;
        let mut zeroed = 0usize;
        for col in &masked.intensities {
            for (k, val) in col.iter().enumerate() {
                let inside = (map.bins.energy_mev(k) - center).abs() < half;
                if inside && *val != 0.0 {
                    ok_zeroing = false;
                }
                if !inside && *val != 1.0 {
                    ok_zeroing = false;
                }
                if inside {
                    zeroed += 1;
                }
            }
        }
        let recorded = masked.masked_bands == vec![(center - half, center + half)];
        Ok((ok_zeroing, recorded, zeroed / masked.intensities.len()))
    };
    match run() {
        Ok((zeroing, recorded, per_col)) => check(
            "notch_mask",
            zeroing && recorded,
            format!("bins zeroed per column {per_col}, band recorded {recorded}"),
        ),
        Err(e) => check("notch_mask", false, e),
    }
}

/// PGM writer: header geometry and full-scale pixel for a uniform map.
fn check_heatmap_format() -> CheckResult {
    let run = || -> Result<(bool, bool), String> {
        let map = uniform_map()?;
        let pgm = heatmap_pgm(&map, 1.0);
        let header = format!(
            "{} {}\n65535\n",
            map.voltages.len(),
            map.bins.len()
        );
        let text = String::from_utf8_lossy(&pgm[..pgm.len().min(256)]).to_string();
        let starts = pgm.starts_with(b"P5\n") && text.contains(&header);
        let body_start = pgm.len() - 2 * map.voltages.len() * map.bins.len();
        let all_full = pgm[body_start..]
            .chunks(2)
            .all(|c| u16::from_be_bytes([c[0], c[1]]) == 65535);
        Ok((starts, all_full))
    };
    match run() {
        Ok((header_ok, full_ok)) => check(
            "heatmap_format",
            header_ok && full_ok,
            format!("P5 header with dimensions {header_ok}, uniform map saturates at 65535 {full_ok}"),
        ),
        Err(e) => check("heatmap_format", false, e),
    }
}

/// Liouvillian matrix is consistent with its action: applying the 16x16
/// matrix to a vectorized state reproduces liouvillian_apply.
fn check_liouvillian_matrix(cfg: &RunConfig) -> CheckResult {
    let run = || -> Result<f64, String> {
        let model = device_model(cfg).map_err(|e| e.to_string())?;
        let bp = model.at(cfg.model.anchor_voltage).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let rho = random_state(&mut rng);
            let t = rng.gen_range(0.0..cfg.grids.window_end);
            let l = qd_propagator::liouvillian_matrix(&bp, t, bp.frame);
            let mut vec = SMatrix::<C64, 16, 1>::zeros();
            for c in 0..4 {
                for r in 0..4 {
                    vec[r + 4 * c] = rho[(r, c)];
                }
            }
            let lv = l * vec;
            let direct = liouvillian_apply(&bp, t, &rho, bp.frame);
            let mut dev = 0.0_f64;
            for c in 0..4 {
                for r in 0..4 {
                    dev = dev.max((lv[r + 4 * c] - direct[(r, c)]).norm());
                }
            }
            worst = worst.max(dev);
        }
        Ok(worst)
    };
    match run() {
        Ok(dev) => check(
            "liouvillian_matrix_consistency",
            dev <= 1e-12,
            format!("max |L vec(rho) - vec(L rho)| = {dev:.2e} over 20 states"),
        ),
        Err(e) => check("liouvillian_matrix_consistency", false, e),
    }
}

/// Runs every check against the given configuration.
pub fn run_all(cfg: &RunConfig) -> Vec<CheckResult> {
    vec![
        check_generator(cfg),
        check_emission_projector(),
        check_liouvillian_matrix(cfg),
        check_stark_anchor(cfg),
        check_bias_range_refusal(cfg),
        check_pulse_envelope(cfg),
        check_driven_physicality(cfg),
        check_undriven_decay(cfg),
        check_oracle_smoke(cfg),
        check_zero_delay_consistency(cfg),
        check_synthetic_spectrum(),
        check_nyquist_refusal(),
        check_sweep_determinism(cfg),
        check_failed_column_isolation(cfg),
        check_notch_mask(),
        check_heatmap_format(),
    ]
}

/// Prints the table; returns true when everything passed.
pub fn report(results: &[CheckResult]) -> bool {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut all_ok = true;
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:width$}  {}", r.name, r.detail);
        all_ok &= r.passed;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} checks passed", results.len());
    } else {
        println!("{failed} of {} checks FAILED", results.len());
    }
    all_ok
}
