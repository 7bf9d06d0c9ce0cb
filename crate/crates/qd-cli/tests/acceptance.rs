//! Acceptance gate: nine numbered end-to-end criteria, one test per
//! criterion, each printing a single `criterion N: PASS/FAIL — detail` line
//! before asserting. Criteria 5–8 share three preset sweeps and five
//! control-detuning spectra; criterion 9 re-runs all of them on worker
//! pools of 1, 4, and 8 threads and compares the serialized outputs
//! byte-for-byte, so the expensive data is built once per pool in a shared
//! OnceLock.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use qd_cli::config::{preset_config, stark_model, RunConfig, Scenario};
use qd_cli::oracle::convergence_report;
use qd_cli::pipeline::{spectrum_at, sweep_map, tracks_for};
use qd_cli::validate::SyntheticOracle;
use qd_cli::writers::{config_hash, map_tsv, sha256_hex, spectrum_tsv, tracks_tsv};
use qd_hilbert::{
    adjoint, dyad, hermiticity_deviation, lindblad_dissipator, pure_dephasing_term,
    BasisLabel, C64, Operator,
};
use qd_model::HBAR;
use qd_propagator::{propagate, TimeGrid};
use qd_spectrum::{
    ac_stark_tolerance, filtered_spectrum, qrt_correlation, sdc_peak_check,
    EmissionOperator, EnergyBins, FilterSpec, SdcCheck, Spectrum,
};
use qd_sweep::{SpectralMap, TrackLabel};

const POOLS: [usize; 3] = [1, 4, 8];
const SDC_DELTAS_UEV: [f64; 5] = [-500.0, -350.0, 250.0, 350.0, 500.0];
/// Probe amplitude for the detuning scan: weak enough that the light shift
/// it induces stays within the granted tolerance, strong enough to drive a
/// clearly detectable down-converted line.
const SDC_CONTROL_UEV: f64 = 60.0;
/// Control-resonance voltage of the fig5 presets (anchor + 0.32 V).
const V_X: f64 = 0.2;

/// Configuration for one detuning point of the energy-conservation scan:
/// late weak control at E_X(anchor) + delta, narrow bins below the pump.
fn sdc_cfg(delta_uev: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.pulses.control_amplitude = SDC_CONTROL_UEV;
    cfg.pulses.control_center = 600.0;
    cfg.pulses.control_energy = cfg.model.x_line + delta_uev;
    cfg.grids.window_end = 700.0;
    cfg.grids.time_step = 0.5;
    cfg.grids.delay_step = 0.25;
    cfg.grids.bin_start = 1_338_900.0;
    cfg.grids.bin_end = 1_340_900.0;
    cfg.grids.bin_step = 5.0;
    cfg
}

struct SdcRun {
    delta_uev: f64,
    cfg: RunConfig,
    spectrum: Spectrum,
}

struct Shared {
    fig5a_cfg: RunConfig,
    fig5b_cfg: RunConfig,
    fig3_cfg: RunConfig,
    fig5a: SpectralMap,
    fig5b: SpectralMap,
    fig3: SpectralMap,
    sdc: Vec<SdcRun>,
    /// workers -> [(output name, sha256 of its serialized bytes)]
    digests: BTreeMap<usize, Vec<(String, String)>>,
}

fn build_outputs() -> (SpectralMap, SpectralMap, SpectralMap, Vec<Spectrum>) {
    let a = sweep_map(&preset_config(Scenario::Fig5a)).expect("fig5a sweep");
    let b = sweep_map(&preset_config(Scenario::Fig5b)).expect("fig5b sweep");
    let c = sweep_map(&preset_config(Scenario::Fig3)).expect("fig3 sweep");
    let spectra = SDC_DELTAS_UEV
        .iter()
        .map(|&d| {
            let cfg = sdc_cfg(d);
            spectrum_at(&cfg, cfg.model.anchor_voltage).expect("sdc spectrum")
        })
        .collect();
    (a, b, c, spectra)
}

fn digest_outputs(
    maps: [(&str, &SpectralMap, &RunConfig); 3],
    spectra: &[Spectrum],
) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, map, cfg) in maps {
        let hash = config_hash(cfg);
        out.push((
            format!("{name}/map.tsv"),
            sha256_hex(map_tsv(map, &hash).as_bytes()),
        ));
        let model = qd_cli::config::device_model(cfg).expect("model");
        let tracks = tracks_for(map, cfg, &model);
        out.push((
            format!("{name}/tracks.tsv"),
            sha256_hex(tracks_tsv(&tracks, &hash).as_bytes()),
        ));
    }
    for (&d, s) in SDC_DELTAS_UEV.iter().zip(spectra) {
        let cfg = sdc_cfg(d);
        out.push((
            format!("sdc_{d:+}/spectrum.tsv"),
            sha256_hex(spectrum_tsv(s, cfg.model.anchor_voltage, &config_hash(&cfg)).as_bytes()),
        ));
    }
    out
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let fig5a_cfg = preset_config(Scenario::Fig5a);
        let fig5b_cfg = preset_config(Scenario::Fig5b);
        let fig3_cfg = preset_config(Scenario::Fig3);
        let mut digests = BTreeMap::new();
        let mut kept: Option<(SpectralMap, SpectralMap, SpectralMap, Vec<Spectrum>)> = None;
        for &workers in &POOLS {
            eprintln!("acceptance: building preset outputs on {workers} worker(s)…");
            let pool = ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool");
            let (a, b, c, spectra) = pool.install(build_outputs);
            digests.insert(
                workers,
                digest_outputs(
                    [
                        ("fig5a", &a, &fig5a_cfg),
                        ("fig5b", &b, &fig5b_cfg),
                        ("fig3", &c, &fig3_cfg),
                    ],
                    &spectra,
                ),
            );
            if kept.is_none() {
                kept = Some((a, b, c, spectra));
            }
        }
        let (fig5a, fig5b, fig3, spectra) = kept.unwrap();
        let sdc = SDC_DELTAS_UEV
            .iter()
            .zip(spectra)
            .map(|(&delta_uev, spectrum)| SdcRun {
                delta_uev,
                cfg: sdc_cfg(delta_uev),
                spectrum,
            })
            .collect();
        Shared {
            fig5a_cfg,
            fig5b_cfg,
            fig3_cfg,
            fig5a,
            fig5b,
            fig3,
            sdc,
            digests,
        }
    })
}

/// Local maxima of `col` restricted to bins within `half_mev` of `e0_mev`,
/// at or above `floor_rel` of the window maximum. Comparisons are made
/// inside the window only (window edges may qualify), matching the way the
/// column structure was characterized. Returns (energy meV, height relative
/// to window max).
fn window_peaks(
    col: &[f64],
    bins: &EnergyBins,
    e0_mev: f64,
    half_mev: f64,
    floor_rel: f64,
) -> Vec<(f64, f64)> {
    let idx: Vec<usize> = (0..bins.len())
        .filter(|&k| (bins.energy_mev(k) - e0_mev).abs() <= half_mev)
        .collect();
    let (lo, hi) = match (idx.first(), idx.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Vec::new(),
    };
    let m = (lo..=hi).map(|k| col[k]).fold(0.0_f64, f64::max);
    let mut peaks = Vec::new();
    for k in lo..=hi {
        let left_ok = k == lo || col[k] >= col[k - 1];
        let right_ok = k == hi || col[k] >= col[k + 1];
        if left_ok && right_ok && col[k] >= floor_rel * m {
            peaks.push((bins.energy_mev(k), if m > 0.0 { col[k] / m } else { 0.0 }));
        }
    }
    peaks
}

fn nearest_column(map: &SpectralMap, v: f64) -> usize {
    map.voltages
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - v).abs().partial_cmp(&(*b - v).abs()).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap()
}

/// Outermost-peak separation (meV) among the window's local maxima, or None
/// when the column shows no doublet there.
fn column_gap(map: &SpectralMap, col: usize, e0_mev: f64) -> Option<(f64, Vec<(f64, f64)>)> {
    let peaks = window_peaks(&map.intensities[col], &map.bins, e0_mev, 0.45, 0.02);
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks.last().unwrap().0 - peaks[0].0, peaks))
}

fn random_state(rng: &mut ChaCha8Rng) -> Operator {
    let mut a = Operator::zeros();
    for r in 0..4 {
        for c in 0..4 {
            a[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let rho = a * adjoint(&a);
    rho * C64::new(1.0 / rho.trace().re, 0.0)
}

#[test]
fn criterion_1_generator_algebra() {
    let jumps = [
        (BasisLabel::G, BasisLabel::XH),
        (BasisLabel::G, BasisLabel::XV),
        (BasisLabel::XH, BasisLabel::B),
        (BasisLabel::XV, BasisLabel::B),
        (BasisLabel::B, BasisLabel::G),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_trace = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    for _ in 0..100 {
        let rho = random_state(&mut rng);
        let mut total = pure_dephasing_term(&rho, 4.0 / HBAR);
        for (a, b) in jumps {
            total += lindblad_dissipator(&dyad(a, b), &rho) * C64::new(4.0 / (2.0 * HBAR), 0.0);
        }
        worst_trace = worst_trace.max(total.trace().norm());
        worst_herm = worst_herm.max(hermiticity_deviation(&total));
    }
    let sigma = EmissionOperator::canonical_v();
    let product = adjoint(sigma.operator()) * sigma.operator();
    let expected = dyad(BasisLabel::XV, BasisLabel::XV) + dyad(BasisLabel::B, BasisLabel::B);
    let exact = product == expected;
    let pass = worst_trace <= 1e-12 && worst_herm <= 1e-12 && exact;
    println!(
        "criterion 1: {} — dissipator max |trace| {worst_trace:.2e}, max hermiticity deviation \
         {worst_herm:.2e} over 100 random states; sigma^t sigma projector exact: {exact}",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(worst_trace <= 1e-12, "dissipator trace drift {worst_trace:.3e}");
    assert!(worst_herm <= 1e-12, "dissipator hermiticity drift {worst_herm:.3e}");
    assert!(exact, "sigma^t sigma differs from the XV/B projector");
}

#[test]
fn criterion_2_analytic_decay() {
    // "Undriven" means no lasers and no incoherent refill: the refill
    // channel pumps G -> B and would feed population back into the decaying
    // levels (a 7e-2 effect at 100 ps), which the analytic single-channel
    // decay law cannot describe.
    let mut cfg = RunConfig::default();
    cfg.pulses.pump_amplitude = 0.0;
    cfg.pulses.control_amplitude = 0.0;
    cfg.model.refill = 0.0;
    let model = qd_cli::config::device_model(&cfg).unwrap();
    let bp = model.at(cfg.model.anchor_voltage).unwrap();

    let grid_x = TimeGrid::new(0.0, 100.0, 0.1).unwrap();
    let traj_x = propagate(&bp, &dyad(BasisLabel::XV, BasisLabel::XV), grid_x, bp.frame).unwrap();
    let pop_x = traj_x.final_state()[(2, 2)].re;

    let grid_b = TimeGrid::new(0.0, 50.0, 0.1).unwrap();
    let traj_b = propagate(&bp, &dyad(BasisLabel::B, BasisLabel::B), grid_b, bp.frame).unwrap();
    let pop_b = traj_b.final_state()[(3, 3)].re;

    // X_V decays through one radiative channel (rate 2*gamma_rad in this
    // convention), B through two (rate 4*gamma_rad), so 100 ps of the former
    // equals 50 ps of the latter.
    let analytic = (-2.0 * 4.0 * 100.0 / HBAR).exp();
    let dev_x = (pop_x - analytic).abs();
    let dev_b = (pop_b - analytic).abs();
    let pass = dev_x <= 1e-5 && dev_b <= 1e-5;
    println!(
        "criterion 2: {} — pop_XV(100 ps) = {pop_x:.7} and pop_B(50 ps) = {pop_b:.7} vs analytic \
         {analytic:.7} (deviations {dev_x:.1e}, {dev_b:.1e}; note: the rounded reference value \
         0.29655 differs from the exact exponential by 3.7e-5, so the formula is the yardstick)",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(dev_x <= 1e-5, "X_V decay off by {dev_x:.3e}");
    assert!(dev_b <= 1e-5, "B decay off by {dev_b:.3e}");
}

#[test]
fn criterion_3_oracle_equivalence() {
    let cfg = RunConfig::default();
    let started = std::time::Instant::now();
    let report = convergence_report(&cfg, cfg.model.anchor_voltage, 0.1, 600.0).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let ratio_ok = report.ratio >= 8.0 && report.ratio <= 32.0;
    let dev_ok = report.max_dev_coarse < 1e-6;
    let time_ok = elapsed < 30.0;
    println!(
        "criterion 3: {} — max Frobenius deviation {:.3e} at dt 0.1 ps over 600 ps (target < 1e-6), \
         step-halving ratio {:.2} (target [8, 32], fine-step deviation {:.3e}), runtime {:.1} s \
         (target < 30 s)",
        if ratio_ok && dev_ok && time_ok { "PASS" } else { "FAIL" },
        report.max_dev_coarse,
        report.ratio,
        report.max_dev_fine,
        elapsed,
    );
    assert!(
        dev_ok && ratio_ok && time_ok,
        "RK4 and the matrix-exponential comparison disagree by {:.3e} (Frobenius, dt = 0.1 ps, \
         600 ps horizon; target < 1e-6) and the gap shrinks by {:.2}x under step halving (target \
         [8, 32]; fine-step gap {:.3e}). The gap is dominated by the comparison propagator's own \
         discretization, not RK4's: freezing the generator at each step midpoint is locally \
         O(dt^3) and globally O(dt^2) while the driving pulses sweep through, so halving the \
         step quarters the gap (measured {:.2} ~ 4) and meeting 1e-6 at this scaling would need \
         dt ~ 5e-3 ps, not the fixed 0.1 ps. On the undriven problem, where freezing the \
         generator is exact, the two propagators agree to ~1e-14 (see the validate suite). Both \
         targets are therefore unreachable as stated for any fixed-step pair of this design; \
         the numbers above are the honest measured values.",
        report.max_dev_coarse,
        report.ratio,
        report.max_dev_fine,
        report.ratio,
    );
}

#[test]
fn criterion_4_coherence_and_spectrum_oracle() {
    // Part 1: |g(0, tau)| decay rate for undriven X_V.
    let mut cfg = RunConfig::default();
    cfg.pulses.pump_amplitude = 0.0;
    cfg.pulses.control_amplitude = 0.0;
    cfg.model.refill = 0.0;
    let model = qd_cli::config::device_model(&cfg).unwrap();
    let bp = model.at(cfg.model.anchor_voltage).unwrap();
    let grid = TimeGrid::new(0.0, 200.0, 100.0).unwrap();
    let traj = propagate(&bp, &dyad(BasisLabel::XV, BasisLabel::XV), grid, bp.frame).unwrap();
    // In the pump frame the XV-G coherence rotates at ~2 rad/ps, and the
    // integrator damps a rotating amplitude by ~(omega dtau)^6/144 per step;
    // the delay step must keep that bias far below the 0.5% rate budget
    // (4.6e-4/ps at dtau 0.25, 4.5e-7/ps at 0.0625).
    let dtau = 0.0625;
    let corr = qrt_correlation(&bp, &traj, &EmissionOperator::canonical_v(), dtau).unwrap();
    let row = corr.row(0);
    // Least-squares slope of ln|g| over tau in [0, 200] ps.
    let n = row.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (j, g) in row.iter().enumerate() {
        let x = j as f64 * dtau;
        let y = g.norm().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let fitted_rate = -slope;
    let expected_rate = (4.0 + 4.0 / 2.0) / HBAR; // gamma_rad + gamma_pure / 2
    let rate_rel = (fitted_rate - expected_rate).abs() / expected_rate;

    // Part 2: filtered_spectrum against the closed-form double integral for
    // synthetic exponential correlations.
    let oracle = SyntheticOracle::default();
    let grid = oracle.grid().unwrap();
    let filter = FilterSpec::new(oracle.hbar_gamma, oracle.t_end).unwrap();
    let bins = EnergyBins::new(1341.04, 1341.69, 0.065).unwrap();
    let spectrum = filtered_spectrum(&grid, &filter, &bins).unwrap();
    let exact: Vec<f64> = (0..bins.len())
        .map(|k| oracle.closed_form(bins.energy_mev(k)))
        .collect();
    let scale = exact.iter().cloned().fold(0.0_f64, f64::max);
    let spec_rel = spectrum
        .intensities
        .iter()
        .zip(&exact)
        .map(|(s, e)| (s - e).abs())
        .fold(0.0_f64, f64::max)
        / scale;

    let pass = rate_rel <= 0.005 && spec_rel <= 1e-6;
    println!(
        "criterion 4: {} — |g(0,tau)| decay rate {fitted_rate:.6e} vs gamma_rad + gamma_pure/2 = \
         {expected_rate:.6e} ps^-1 (relative {rate_rel:.2e}, target 5e-3); synthetic spectrum vs \
         closed form: {spec_rel:.2e} relative to peak (target 1e-6)",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(rate_rel <= 0.005, "coherence decay rate off by {rate_rel:.3e}");
    assert!(spec_rel <= 1e-6, "spectrum oracle deviation {spec_rel:.3e}");
}

#[test]
fn criterion_5_energy_conservation() {
    let shared = shared();
    let mut lines = Vec::new();
    let mut all_pass = true;
    for run in &shared.sdc {
        let stark = stark_model(&run.cfg).unwrap();
        let e_b_mev = stark.eb(run.cfg.model.anchor_voltage) / 1000.0;
        let e_c_mev = run.cfg.pulses.control_energy / 1000.0;
        let extra_tol_mev = run.spectrum.bins.step_mev()
            + ac_stark_tolerance(SDC_CONTROL_UEV, run.delta_uev) / 1000.0;
        let check = sdc_peak_check(&run.spectrum, e_b_mev, e_c_mev, 0.1, extra_tol_mev);
        match check {
            SdcCheck::Detected {
                deviation_mev,
                tolerance_mev,
                passes,
                ..
            } => {
                all_pass &= passes;
                lines.push(format!(
                    "delta {:+.0} ueV: deviation {:+.1} ueV vs tolerance {:.1} ueV ({})",
                    run.delta_uev,
                    deviation_mev * 1000.0,
                    tolerance_mev * 1000.0,
                    if passes { "ok" } else { "VIOLATED" },
                ));
            }
            other => {
                all_pass = false;
                lines.push(format!("delta {:+.0} ueV: {other:?}", run.delta_uev));
            }
        }
    }
    println!(
        "criterion 5: {} — down-converted line at E_B - E_c for 5 control detunings: {}",
        if all_pass { "PASS" } else { "FAIL" },
        lines.join("; "),
    );
    assert!(all_pass, "energy conservation violated: {lines:?}");
}

/// Reference slope (meV/V) for a track label under the given configuration.
fn reference_slope(cfg: &RunConfig, label: TrackLabel) -> f64 {
    let stark = stark_model(cfg).unwrap();
    match label {
        TrackLabel::Exciton => stark.slope_x(0.0) / 1000.0,
        TrackLabel::Biexciton => stark.slope_xx(0.0) / 1000.0,
        TrackLabel::DownConversion => stark.slope_b(0.0) / 1000.0,
        TrackLabel::Unknown => f64::NAN,
    }
}

/// Sign-flip probe: at columns two steps and one step either side of the
/// crossing voltage, the line nearest the down-conversion reference
/// E_B(V) - E_c must be displaced away from the crossing partner —
/// upward on one side, downward on the other.
fn repulsion_pattern(map: &SpectralMap, cfg: &RunConfig, e_c_uev: f64) -> Result<Vec<f64>, String> {
    let stark = stark_model(cfg).unwrap();
    let ix = nearest_column(map, V_X);
    let mut devs = Vec::new();
    for off in [-2i64, -1, 1, 2] {
        let col = (ix as i64 + off) as usize;
        let v = map.voltages[col];
        let sdc_ref = (stark.eb(v) - e_c_uev) / 1000.0;
        let peaks = window_peaks(&map.intensities[col], &map.bins, sdc_ref, 0.08, 0.0);
        let nearest = peaks
            .iter()
            .min_by(|a, b| {
                (a.0 - sdc_ref)
                    .abs()
                    .partial_cmp(&(b.0 - sdc_ref).abs())
                    .unwrap()
            })
            .ok_or_else(|| format!("no peak within 80 ueV of the reference at V = {v}"))?;
        devs.push((nearest.0 - sdc_ref) * 1000.0);
    }
    let pattern_ok = devs[0] > 0.0 && devs[1] > 0.0 && devs[2] < 0.0 && devs[3] < 0.0;
    if pattern_ok {
        Ok(devs)
    } else {
        Err(format!("deviations {devs:?} ueV do not flip sign across the crossing"))
    }
}

#[test]
fn criterion_6_stark_fingerprint() {
    let shared = shared();
    let mut detail = Vec::new();
    let mut ok = true;

    // fig5a: X, XX, and SDC tracks all present, each labeled track's
    // consensus slope within 5% of its own reference line.
    let model_a = qd_cli::config::device_model(&shared.fig5a_cfg).unwrap();
    let tracks_a = tracks_for(&shared.fig5a, &shared.fig5a_cfg, &model_a);
    for want in [
        TrackLabel::Exciton,
        TrackLabel::Biexciton,
        TrackLabel::DownConversion,
    ] {
        let family: Vec<_> = tracks_a.iter().filter(|t| t.label == want).collect();
        if family.is_empty() {
            ok = false;
            detail.push(format!("fig5a: no {want} track"));
            continue;
        }
        let reference = reference_slope(&shared.fig5a_cfg, want);
        for t in family {
            let rel = (t.consensus_slope - reference).abs() / reference.abs();
            if rel > 0.05 {
                ok = false;
            }
            detail.push(format!(
                "fig5a {want}: slope {:+.0} vs {:+.0} ueV/V ({:.1}%)",
                t.consensus_slope * 1000.0,
                reference * 1000.0,
                rel * 100.0,
            ));
        }
    }

    // Mirror clause. The preset geometry places the down-conversion line's
    // crossing with the XX line at V_X for fig5a and with the X line at V_X
    // for fig5b, with the respective other crossing far outside the sweep:
    let stark = stark_model(&shared.fig5a_cfg).unwrap();
    let e_c_a = shared.fig5a_cfg.pulses.control_energy;
    let e_c_b = shared.fig5b_cfg.pulses.control_energy;
    let bin_uev = shared.fig5a_cfg.grids.bin_step;
    let (v0, v1) = (
        shared.fig5a_cfg.sweep.v_start,
        shared.fig5a_cfg.sweep.v_end,
    );
    // Crossing of E_B - E_c with a line is where the *other* line meets E_c.
    let v_cross_a_on_xx = shared.fig5a_cfg.model.anchor_voltage
        + (e_c_a - stark.ex(shared.fig5a_cfg.model.anchor_voltage)) / stark.slope_x(0.0);
    let v_cross_a_on_x = shared.fig5a_cfg.model.anchor_voltage
        + (e_c_a - stark.exx(shared.fig5a_cfg.model.anchor_voltage)) / stark.slope_xx(0.0);
    let v_cross_b_on_x = shared.fig5b_cfg.model.anchor_voltage
        + (e_c_b - stark.exx(shared.fig5b_cfg.model.anchor_voltage)) / stark.slope_xx(0.0);
    let v_cross_b_on_xx = shared.fig5b_cfg.model.anchor_voltage
        + (e_c_b - stark.ex(shared.fig5b_cfg.model.anchor_voltage)) / stark.slope_x(0.0);
    let geometry_ok = v0 <= V_X
        && V_X <= v1
        && (v_cross_a_on_xx - V_X).abs() < 1e-9
        && (stark.eb(V_X) - e_c_a - stark.exx(V_X)).abs() < bin_uev
        && (v_cross_a_on_x < v0 || v_cross_a_on_x > v1)
        && (v_cross_b_on_x - V_X).abs() < 1e-9
        && (stark.eb(V_X) - e_c_b - stark.ex(V_X)).abs() < bin_uev
        && (v_cross_b_on_xx < v0 || v_cross_b_on_xx > v1);
    ok &= geometry_ok;
    detail.push(format!(
        "crossing geometry: fig5a on XX at {v_cross_a_on_xx:.2} V (on X at {v_cross_a_on_x:.2} V, \
         outside sweep), fig5b on X at {v_cross_b_on_x:.2} V (on XX at {v_cross_b_on_xx:.2} V, \
         outside sweep): {geometry_ok}",
    ));

    // fig5b: the X line survives as a labeled track spanning the crossing
    // voltage (the deformation there stays within the tracker's jump
    // budget), and the dressed doublet sits on the X line (criterion 7
    // measures its size).
    let model_b = qd_cli::config::device_model(&shared.fig5b_cfg).unwrap();
    let tracks_b = tracks_for(&shared.fig5b, &shared.fig5b_cfg, &model_b);
    let x_spans = tracks_b.iter().any(|t| {
        let (lo, hi) = t.voltage_span();
        t.label == TrackLabel::Exciton && lo <= V_X && V_X <= hi
    });
    ok &= x_spans;
    detail.push(format!("fig5b: X-labeled track spans V_X: {x_spans}"));

    // Dynamics-level confirmation on both maps: the down-conversion branch
    // is repelled upward before the crossing and downward after it.
    match repulsion_pattern(&shared.fig5a, &shared.fig5a_cfg, e_c_a) {
        Ok(devs) => detail.push(format!("fig5a repulsion devs {devs:?} ueV (+,+,-,-)")),
        Err(e) => {
            ok = false;
            detail.push(format!("fig5a repulsion: {e}"));
        }
    }
    match repulsion_pattern(&shared.fig5b, &shared.fig5b_cfg, e_c_b) {
        Ok(devs) => detail.push(format!("fig5b repulsion devs {devs:?} ueV (+,+,-,-)")),
        Err(e) => {
            ok = false;
            detail.push(format!("fig5b repulsion: {e}"));
        }
    }

    println!(
        "criterion 6: {} — {}",
        if ok { "PASS" } else { "FAIL" },
        detail.join("; "),
    );
    assert!(ok, "{detail:?}");
}

#[test]
fn criterion_7_dressed_gap() {
    let shared = shared();
    let stark = stark_model(&shared.fig5b_cfg).unwrap();
    // fig5b puts the crossing on the X line; the doublet straddles E_X(V_X).
    let ix = nearest_column(&shared.fig5b, V_X);
    let (gap_b, peaks_b) = column_gap(&shared.fig5b, ix, stark.ex(V_X) / 1000.0)
        .expect("fig5b column shows no doublet at the crossing voltage");
    // Corroboration: the mirrored run shows the same splitting on XX.
    let gap_a = column_gap(&shared.fig5a, nearest_column(&shared.fig5a, V_X), stark.exx(V_X) / 1000.0)
        .map(|(g, _)| g);
    let full_splitting = 2.0 * shared.fig5b_cfg.pulses.control_amplitude / 1000.0;
    let lo = 0.6 * full_splitting;
    let hi = 1.4 * full_splitting;
    let pass = gap_b >= lo && gap_b <= hi;
    println!(
        "criterion 7: {} — fig5b outermost splitting at the crossing column: {:.1} ueV, target \
         2*Omega_V = {:.1} ueV +/- 40% = [{:.1}, {:.1}] ueV (peaks {:?}); mirrored fig5a value \
         {} ueV",
        if pass { "PASS" } else { "FAIL" },
        gap_b * 1000.0,
        full_splitting * 1000.0,
        lo * 1000.0,
        hi * 1000.0,
        peaks_b
            .iter()
            .map(|(e, h)| format!("{:.0}({h:.2})", e * 1000.0))
            .collect::<Vec<_>>(),
        gap_a.map_or("n/a".to_string(), |g| format!("{:.1}", g * 1000.0)),
    );
    assert!(
        pass,
        "splitting {:.1} ueV outside [{:.1}, {:.1}] ueV",
        gap_b * 1000.0,
        lo * 1000.0,
        hi * 1000.0
    );
}

#[test]
fn criterion_8_pump_dressing() {
    let shared = shared();
    let cfg = &shared.fig3_cfg;
    let model = qd_cli::config::device_model(cfg).unwrap();
    let tracks = tracks_for(&shared.fig3, cfg, &model);
    let have_x = tracks.iter().any(|t| t.label == TrackLabel::Exciton);
    let have_xx = tracks.iter().any(|t| t.label == TrackLabel::Biexciton);

    let stark = stark_model(cfg).unwrap();
    let anchor = cfg.model.anchor_voltage;
    let col = nearest_column(&shared.fig3, anchor);
    let min_gap = 3.0 * cfg.grids.bin_step / 1000.0;
    let split = |e0_mev: f64| -> (f64, usize) {
        let peaks = window_peaks(&shared.fig3.intensities[col], &shared.fig3.bins, e0_mev, 0.4, 0.02);
        let gap = if peaks.len() >= 2 {
            peaks.last().unwrap().0 - peaks[0].0
        } else {
            0.0
        };
        (gap, peaks.len())
    };
    let (gap_x, n_x) = split(stark.ex(anchor) / 1000.0);
    let (gap_xx, n_xx) = split(stark.exx(anchor) / 1000.0);
    let pass = have_x && have_xx && gap_x > min_gap && gap_xx > min_gap;
    println!(
        "criterion 8: {} — X and XX tracks labeled: {have_x}/{have_xx}; at the two-photon-resonance \
         column the X line splits by {:.0} ueV ({n_x} peaks) and the XX line by {:.0} ueV \
         ({n_xx} peaks), both above the 3-bin floor of {:.0} ueV",
        if pass { "PASS" } else { "FAIL" },
        gap_x * 1000.0,
        gap_xx * 1000.0,
        min_gap * 1000.0,
    );
    assert!(have_x && have_xx, "missing labeled X/XX tracks");
    assert!(
        gap_x > min_gap && gap_xx > min_gap,
        "splittings {:.1}/{:.1} ueV not above {:.1} ueV",
        gap_x * 1000.0,
        gap_xx * 1000.0,
        min_gap * 1000.0
    );
}

#[test]
fn criterion_9_worker_determinism() {
    let shared = shared();
    let baseline = &shared.digests[&POOLS[0]];
    let mut ok = true;
    for &w in &POOLS[1..] {
        if &shared.digests[&w] != baseline {
            ok = false;
            for ((name, a), (_, b)) in baseline.iter().zip(&shared.digests[&w]) {
                if a != b {
                    eprintln!("digest mismatch for {name} between 1 and {w} workers: {a} vs {b}");
                }
            }
        }
    }
    println!(
        "criterion 9: {} — {} serialized outputs byte-identical across worker pools {:?}",
        if ok { "PASS" } else { "FAIL" },
        baseline.len(),
        POOLS,
    );
    assert!(ok, "outputs differ across worker counts");
}
