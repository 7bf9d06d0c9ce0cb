//! Physical model of the driven quantum dot: bias-dependent level energies
//! through a Stark model, Gaussian laser pulses, and Hamiltonian assembly in
//! lab or rotating frames.
//!
//! Unit conventions, used consistently across the workspace:
//! - energies in ueV (meV only at I/O boundaries),
//! - times in ps,
//! - `HBAR` = 658.2119569 ueV·ps,
//! - dissipation rates stored as energies (hbar * rate, ueV) and divided by
//!   hbar exactly once, at generator assembly.

use num_complex::Complex64;
use qd_hilbert::{Operator, C64};
use thiserror::Error;

pub const HBAR: f64 = 658.2119569; // ueV * ps

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("bias {v} V outside the model's validity range [{min} V, {max} V]")]
    BiasOutOfRange { v: f64, min: f64, max: f64 },
    #[error("calibration anchor violated: E_B(V_ref) - 2 E_TPE = {deviation_uev:.3e} ueV")]
    AnchorViolation { deviation_uev: f64 },
    #[error("level ordering violated at {v} V: E_B = {e_b} ueV, E_V = {e_v} ueV")]
    LevelOrdering { v: f64, e_b: f64, e_v: f64 },
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Bias dependence of the exciton line E_X and the biexciton emission line
/// E_XX as polynomials (degree <= 2) in (V - V_ref), plus the two-photon
/// calibration anchor: E_B(V_ref) = E_X(V_ref) + E_XX(V_ref) = 2 E_TPE.
///
/// Coefficients are in ueV, ueV/V, ueV/V^2; the biexciton energy above
/// ground is E_B(V) = E_X(V) + E_XX(V) by construction (E_G = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct StarkModel {
    ex: [f64; 3],
    exx: [f64; 3],
    v_ref: f64,
    e_tpe: f64,
    v_min: f64,
    v_max: f64,
}

impl StarkModel {
    /// Anchor tolerance: 1e-9 meV.
    pub const ANCHOR_TOL_UEV: f64 = 1e-6;

    pub fn new(
        ex: [f64; 3],
        exx: [f64; 3],
        v_ref: f64,
        e_tpe: f64,
        v_min: f64,
        v_max: f64,
    ) -> Result<StarkModel, ModelError> {
        if !(v_min < v_max) {
            return Err(ModelError::InvalidModel(format!(
                "empty validity range [{v_min}, {v_max}]"
            )));
        }
        if v_ref < v_min || v_ref > v_max {
            return Err(ModelError::InvalidModel(format!(
                "V_ref = {v_ref} outside validity range [{v_min}, {v_max}]"
            )));
        }
        let deviation = ex[0] + exx[0] - 2.0 * e_tpe;
        if deviation.abs() > Self::ANCHOR_TOL_UEV {
            return Err(ModelError::AnchorViolation {
                deviation_uev: deviation,
            });
        }
        Ok(StarkModel {
            ex,
            exx,
            v_ref,
            e_tpe,
            v_min,
            v_max,
        })
    }

    /// Builds the model with the constant term of E_XX derived from the
    /// anchor: E_XX(V_ref) = 2 E_TPE - E_X(V_ref).
    pub fn anchored(
        ex: [f64; 3],
        exx_slope: f64,
        exx_quad: f64,
        v_ref: f64,
        e_tpe: f64,
        v_min: f64,
        v_max: f64,
    ) -> Result<StarkModel, ModelError> {
        let exx0 = 2.0 * e_tpe - ex[0];
        Self::new(ex, [exx0, exx_slope, exx_quad], v_ref, e_tpe, v_min, v_max)
    }

    fn eval(c: &[f64; 3], dv: f64) -> f64 {
        c[0] + c[1] * dv + c[2] * dv * dv
    }

    fn deriv(c: &[f64; 3], dv: f64) -> f64 {
        c[1] + 2.0 * c[2] * dv
    }

    /// E_X at bias `v`, ueV. No range check; see `DeviceModel::level_energies`.
    pub fn ex(&self, v: f64) -> f64 {
        Self::eval(&self.ex, v - self.v_ref)
    }

    /// E_XX at bias `v`, ueV.
    pub fn exx(&self, v: f64) -> f64 {
        Self::eval(&self.exx, v - self.v_ref)
    }

    /// E_B = E_X + E_XX at bias `v`, ueV.
    pub fn eb(&self, v: f64) -> f64 {
        self.ex(v) + self.exx(v)
    }

    /// dE_X/dV at bias `v`, ueV/V.
    pub fn slope_x(&self, v: f64) -> f64 {
        Self::deriv(&self.ex, v - self.v_ref)
    }

    /// dE_XX/dV at bias `v`, ueV/V.
    pub fn slope_xx(&self, v: f64) -> f64 {
        Self::deriv(&self.exx, v - self.v_ref)
    }

    /// dE_B/dV at bias `v`, ueV/V.
    pub fn slope_b(&self, v: f64) -> f64 {
        self.slope_x(v) + self.slope_xx(v)
    }

    pub fn v_ref(&self) -> f64 {
        self.v_ref
    }

    pub fn e_tpe(&self) -> f64 {
        self.e_tpe
    }

    pub fn v_range(&self) -> (f64, f64) {
        (self.v_min, self.v_max)
    }

    pub fn in_range(&self, v: f64) -> bool {
        v >= self.v_min && v <= self.v_max
    }
}

/// The four configuration energies at a given bias, ueV. E_G is fixed at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEnergies {
    pub e_g: f64,
    pub e_h: f64,
    pub e_v: f64,
    pub e_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

/// Gaussian laser pulse: amplitude envelope `amp * exp(-(t-t0)^2 / 2 width^2)`
/// with carrier `exp(i * carrier/hbar * t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    /// Peak coupling energy Omega^0, ueV.
    pub amplitude: f64,
    /// Envelope center t0, ps.
    pub center: f64,
    /// Envelope width Sigma, ps.
    pub width: f64,
    /// Carrier photon energy hbar*omega, ueV.
    pub carrier: f64,
    pub polarization: Polarization,
}

impl PulseSpec {
    pub fn new(
        amplitude: f64,
        center: f64,
        width: f64,
        carrier: f64,
        polarization: Polarization,
    ) -> Result<PulseSpec, ModelError> {
        if !(width > 0.0) {
            return Err(ModelError::InvalidPulse(format!(
                "width must be positive, got {width} ps"
            )));
        }
        if amplitude < 0.0 {
            return Err(ModelError::InvalidPulse(format!(
                "amplitude must be nonnegative, got {amplitude} ueV"
            )));
        }
        Ok(PulseSpec {
            amplitude,
            center,
            width,
            carrier,
            polarization,
        })
    }

    /// Real Gaussian envelope in energy units (ueV) at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        let dt = t - self.center;
        self.amplitude * (-dt * dt / (2.0 * self.width * self.width)).exp()
    }
}

/// Complex drive amplitude in angular-frequency units (ps^-1):
/// `(Omega^0/hbar) * exp(-(t-t0)^2/2 Sigma^2) * exp(i omega t)` with the full
/// lab-frame carrier. Its modulus peaks at `Omega^0/hbar` at `t = t0`.
pub fn pulse_amplitude(p: &PulseSpec, t: f64) -> Complex64 {
    let envelope = p.envelope(t) / HBAR;
    let phase = p.carrier / HBAR * t;
    Complex64::from_polar(envelope, phase)
}

/// Reference frame for Hamiltonian assembly and propagation.
///
/// `RotatingAt(w)` carries the frame's photon energy hbar*omega_frame in ueV;
/// the diagonal becomes (0, E_H - w, E_V - w, E_B - 2w) and each laser
/// coupling keeps only its residual carrier exp(i (omega_i - omega_frame) t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameSpec {
    Lab,
    RotatingAt(f64),
}

impl FrameSpec {
    /// hbar * omega_frame in ueV (zero in the lab frame).
    pub fn energy(&self) -> f64 {
        match self {
            FrameSpec::Lab => 0.0,
            FrameSpec::RotatingAt(w) => *w,
        }
    }
}

/// Dissipation strengths stored as energies (hbar * rate), ueV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorRates {
    pub gamma_pure: f64,
    pub gamma_rad: f64,
    pub p_incoh: f64,
}

impl DissipatorRates {
    pub fn new(gamma_pure: f64, gamma_rad: f64, p_incoh: f64) -> Result<Self, ModelError> {
        if gamma_pure < 0.0 || gamma_rad < 0.0 || p_incoh < 0.0 {
            return Err(ModelError::InvalidModel(
                "dissipation rates must be nonnegative".into(),
            ));
        }
        Ok(DissipatorRates {
            gamma_pure,
            gamma_rad,
            p_incoh,
        })
    }
}

/// The full device: Stark model, fine-structure splitting, dissipation
/// rates, the two drive pulses and the default propagation frame.
///
/// The two-photon-excitation pulse must be H-polarized and the control pulse
/// V-polarized (the detected mode); the constructor enforces this.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub stark: StarkModel,
    /// Fine-structure splitting E_H - E_V, ueV.
    pub delta_fss: f64,
    pub rates: DissipatorRates,
    pub tpe: PulseSpec,
    pub control: PulseSpec,
    pub frame: FrameSpec,
}

impl DeviceModel {
    pub fn new(
        stark: StarkModel,
        delta_fss: f64,
        rates: DissipatorRates,
        tpe: PulseSpec,
        control: PulseSpec,
        frame: FrameSpec,
    ) -> Result<DeviceModel, ModelError> {
        if tpe.polarization != Polarization::H {
            return Err(ModelError::InvalidModel(
                "the two-photon-excitation pulse must be H-polarized".into(),
            ));
        }
        if control.polarization != Polarization::V {
            return Err(ModelError::InvalidModel(
                "the control pulse must be V-polarized".into(),
            ));
        }
        Ok(DeviceModel {
            stark,
            delta_fss,
            rates,
            tpe,
            control,
            frame,
        })
    }

    /// Baseline device used by tests and as the configuration default:
    /// linear Stark model E_X = 1342.5 meV - 0.7 meV/V * (V + 0.12 V),
    /// E_XX anchored to E_TPE = 1341.17 meV with slope -1.3 meV/V,
    /// hbar*gamma_pure = hbar*gamma_rad = hbar*P_incoh = 4 ueV, no
    /// fine-structure splitting, TPE pulse 288.7 ueV at 200 ps, control
    /// pulse 103.1 ueV at 300 ps (carrier 0.3 meV above the X line at
    /// V_ref), both 100 ps wide, frame rotating at the TPE energy.
    pub fn baseline() -> DeviceModel {
        let e_tpe = 1_341_170.0;
        let stark = StarkModel::anchored(
            [1_342_500.0, -700.0, 0.0],
            -1_300.0,
            0.0,
            -0.12,
            e_tpe,
            -1.5,
            1.5,
        )
        .expect("baseline Stark model is valid");
        let tpe = PulseSpec::new(288.7, 200.0, 100.0, e_tpe, Polarization::H)
            .expect("baseline pulse is valid");
        let control_carrier = stark.ex(-0.12) + 300.0;
        let control = PulseSpec::new(103.1, 300.0, 100.0, control_carrier, Polarization::V)
            .expect("baseline pulse is valid");
        DeviceModel::new(
            stark,
            0.0,
            DissipatorRates::new(4.0, 4.0, 4.0).expect("baseline rates are valid"),
            tpe,
            control,
            FrameSpec::RotatingAt(e_tpe),
        )
        .expect("baseline model is valid")
    }

    /// Evaluates the Stark polynomials at `v`, applies the fine-structure
    /// split (E_H = E_V + delta_fss) and returns all four energies.
    /// Refuses biases outside the model's validity range.
    pub fn level_energies(&self, v: f64) -> Result<LevelEnergies, ModelError> {
        if !self.stark.in_range(v) {
            let (min, max) = self.stark.v_range();
            return Err(ModelError::BiasOutOfRange { v, min, max });
        }
        let e_v = self.stark.ex(v);
        let e_b = self.stark.eb(v);
        if !(e_b > e_v && e_v > 0.0) {
            return Err(ModelError::LevelOrdering { v, e_b, e_v });
        }
        Ok(LevelEnergies {
            e_g: 0.0,
            e_h: e_v + self.delta_fss,
            e_v,
            e_b,
        })
    }

    /// Resolves the model at one bias for use by the propagation layers.
    pub fn at(&self, v: f64) -> Result<BiasPoint, ModelError> {
        Ok(BiasPoint {
            v,
            levels: self.level_energies(v)?,
            rates: self.rates,
            tpe: self.tpe.clone(),
            control: self.control.clone(),
            frame: self.frame,
        })
    }
}

/// The device resolved at a single bias: level energies plus everything the
/// generator needs. Cheap to clone; freely shareable across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasPoint {
    pub v: f64,
    pub levels: LevelEnergies,
    pub rates: DissipatorRates,
    pub tpe: PulseSpec,
    pub control: PulseSpec,
    pub frame: FrameSpec,
}

/// Hamiltonian at time `t` in the requested frame, energy units (ueV).
///
/// Lab frame: diag(0, E_H, E_V, E_B) plus couplings with the full carrier
/// oscillation. RotatingAt(w): diagonal shifted to
/// (0, E_H - w, E_V - w, E_B - 2w); couplings keep the residual carrier
/// exp(i (omega_i - omega_frame) t) with the envelope unchanged. The H pulse
/// couples G-X_H and X_H-B; the V pulse couples G-X_V and X_V-B. Hermitian
/// by construction.
pub fn hamiltonian(bp: &BiasPoint, t: f64, frame: FrameSpec) -> Operator {
    let w = frame.energy();
    let mut h = Operator::zeros();
    h[(1, 1)] = C64::new(bp.levels.e_h - w, 0.0);
    h[(2, 2)] = C64::new(bp.levels.e_v - w, 0.0);
    h[(3, 3)] = C64::new(bp.levels.e_b - 2.0 * w, 0.0);

    for pulse in [&bp.tpe, &bp.control] {
        let x = match pulse.polarization {
            Polarization::H => 1,
            Polarization::V => 2,
        };
        let coupling =
            Complex64::from_polar(pulse.envelope(t), (pulse.carrier - w) / HBAR * t);
        h[(0, x)] += coupling;
        h[(x, 3)] += coupling;
        h[(x, 0)] += coupling.conj();
        h[(3, x)] += coupling.conj();
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use qd_hilbert::hermiticity_deviation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn baseline_anchor_fixes_two_photon_resonance() {
        let m = DeviceModel::baseline();
        let lv = m.level_energies(-0.12).unwrap();
        // 2 x 1341.17 meV, exactly.
        assert_abs_diff_eq!(lv.e_b, 2_682_340.0, epsilon = 1e-6);
        assert_abs_diff_eq!(lv.e_b, 2.0 * m.stark.e_tpe(), epsilon = 1e-6);
    }

    #[test]
    fn anchor_violation_is_rejected() {
        let err = StarkModel::new(
            [1_342_500.0, -700.0, 0.0],
            [1_339_000.0, -1_300.0, 0.0],
            -0.12,
            1_341_170.0,
            -1.0,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::AnchorViolation { .. }));
    }

    #[test]
    fn constructional_identity_and_slope_sum() {
        let m = DeviceModel::baseline();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let v = rng.gen_range(-1.0..1.0);
            assert_abs_diff_eq!(
                m.stark.eb(v) - m.stark.ex(v) - m.stark.exx(v),
                0.0,
                epsilon = 1e-9
            );
            // dE_B/dV = dE_X/dV + dE_XX/dV via central finite differences;
            // exact for degree <= 2, so a wide step just reduces rounding.
            let h = 0.05;
            let fd = (m.stark.eb(v + h) - m.stark.eb(v - h)) / (2.0 * h);
            assert_relative_eq!(fd, m.stark.slope_b(v), max_relative = 1e-9);
            assert_abs_diff_eq!(
                m.stark.slope_b(v),
                m.stark.slope_x(v) + m.stark.slope_xx(v),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn quadratic_coefficients_are_honored() {
        let stark = StarkModel::anchored(
            [1_342_500.0, -700.0, 50.0],
            -1_300.0,
            -80.0,
            -0.12,
            1_341_170.0,
            -1.0,
            1.0,
        )
        .unwrap();
        let dv: f64 = 0.3;
        assert_abs_diff_eq!(
            stark.ex(-0.12 + dv),
            1_342_500.0 - 700.0 * dv + 50.0 * dv * dv,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(stark.slope_x(-0.12 + dv), -700.0 + 100.0 * dv, epsilon = 1e-9);
        let h = 0.05;
        let fd = (stark.eb(0.2 + h) - stark.eb(0.2 - h)) / (2.0 * h);
        assert_relative_eq!(fd, stark.slope_b(0.2), max_relative = 1e-9);
    }

    #[test]
    fn out_of_range_bias_is_refused_with_range() {
        let m = DeviceModel::baseline();
        let err = m.level_energies(2.0).unwrap_err();
        match err {
            ModelError::BiasOutOfRange { v, min, max } => {
                assert_eq!(v, 2.0);
                assert_eq!((min, max), (-1.5, 1.5));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fine_structure_split_enters_e_h() {
        let mut m = DeviceModel::baseline();
        m.delta_fss = 12.5;
        let lv = m.level_energies(0.0).unwrap();
        assert_abs_diff_eq!(lv.e_h - lv.e_v, 12.5, epsilon = 1e-12);
        assert_eq!(lv.e_g, 0.0);
    }

    #[test]
    fn pulse_modulus_peaks_at_center() {
        let m = DeviceModel::baseline();
        let peak = pulse_amplitude(&m.tpe, 200.0).norm();
        assert_relative_eq!(peak, 288.7 / HBAR, max_relative = 1e-12);
        // ~0.43861 ps^-1.
        assert_abs_diff_eq!(peak, 0.43861, epsilon = 5e-6);
    }

    #[test]
    fn pulse_one_sigma_point() {
        let m = DeviceModel::baseline();
        let peak = pulse_amplitude(&m.tpe, 200.0).norm();
        let at_sigma = pulse_amplitude(&m.tpe, 300.0).norm();
        assert_relative_eq!(at_sigma / peak, (-0.5f64).exp(), max_relative = 1e-12);
        assert_abs_diff_eq!(at_sigma / peak, 0.60653, epsilon = 1e-5);
    }

    #[test]
    fn pulse_carrier_phase_is_linear_in_time() {
        let m = DeviceModel::baseline();
        let omega = m.control.carrier / HBAR;
        for &t in &[0.7, 13.0, 210.0] {
            let d = pulse_amplitude(&m.control, t) * pulse_amplitude(&m.control, 0.0).conj();
            let got = d.arg();
            let expect = (omega * t).rem_euclid(2.0 * std::f64::consts::PI);
            let wrapped = got.rem_euclid(2.0 * std::f64::consts::PI);
            let diff = (wrapped - expect).abs();
            let diff = diff.min(2.0 * std::f64::consts::PI - diff);
            assert_abs_diff_eq!(diff, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn undriven_lab_hamiltonian_is_diagonal() {
        let mut m = DeviceModel::baseline();
        m.tpe.amplitude = 0.0;
        m.control.amplitude = 0.0;
        let bp = m.at(0.1).unwrap();
        let h = hamiltonian(&bp, 123.4, FrameSpec::Lab);
        let lv = bp.levels;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(h[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(h[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(h[(1, 1)], C64::new(lv.e_h, 0.0));
        assert_eq!(h[(2, 2)], C64::new(lv.e_v, 0.0));
        assert_eq!(h[(3, 3)], C64::new(lv.e_b, 0.0));
    }

    #[test]
    fn two_photon_frame_degenerates_ground_and_biexciton() {
        // Rotating at half the biexciton energy, with zero fine-structure
        // splitting: diagonal (0, E_V - E_B/2, E_V - E_B/2, 0).
        let m = DeviceModel::baseline();
        let bp = m.at(-0.12).unwrap();
        let w = bp.levels.e_b / 2.0;
        let h = hamiltonian(&bp, 77.0, FrameSpec::RotatingAt(w));
        assert_abs_diff_eq!(h[(0, 0)].re, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(3, 3)].re, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(1, 1)].re, bp.levels.e_v - w, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(2, 2)].re, bp.levels.e_v - w, epsilon = 1e-9);
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian_everywhere() {
        let m = DeviceModel::baseline();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let v = rng.gen_range(-1.0..1.0);
            let t = rng.gen_range(0.0..600.0);
            let bp = m.at(v).unwrap();
            for frame in [FrameSpec::Lab, FrameSpec::RotatingAt(m.stark.e_tpe())] {
                let h = hamiltonian(&bp, t, frame);
                assert_eq!(hermiticity_deviation(&h), 0.0);
            }
        }
    }

    #[test]
    fn rotating_frame_shifts_diagonal_and_strips_carrier() {
        let m = DeviceModel::baseline();
        let bp = m.at(-0.12).unwrap();
        let w = m.stark.e_tpe();
        let h = hamiltonian(&bp, 200.0, FrameSpec::RotatingAt(w));
        // The TPE coupling rotates at carrier - frame = 0 here, so at the
        // pulse center the G-X_H entry must be the real peak amplitude.
        assert_abs_diff_eq!(h[(0, 1)].re, 288.7, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(0, 1)].im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(h[(3, 3)].re, bp.levels.e_b - 2.0 * w, epsilon = 1e-9);
    }

    #[test]
    fn polarization_constraints_are_enforced() {
        let m = DeviceModel::baseline();
        let bad_tpe = PulseSpec::new(288.7, 200.0, 100.0, 1_341_170.0, Polarization::V).unwrap();
        let err = DeviceModel::new(
            m.stark.clone(),
            0.0,
            m.rates,
            bad_tpe,
            m.control.clone(),
            m.frame,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidModel(_)));
    }

    #[test]
    fn negative_pulse_width_is_rejected() {
        let err = PulseSpec::new(1.0, 0.0, -5.0, 1.0, Polarization::H).unwrap_err();
        assert!(matches!(err, ModelError::InvalidPulse(_)));
    }
}
