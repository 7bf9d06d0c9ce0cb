//! Fixed-step time integration of the dissipative four-configuration model.
//!
//! Two independent numerical routes are provided on purpose:
//! - [`propagate`]: classic 4th-order Runge-Kutta with the time-dependent
//!   generator evaluated inside each step, and
//! - [`expm_oracle`]: a piecewise-constant 16x16 matrix-exponential
//!   propagator (generator frozen at each step midpoint),
//! so that either can check the other. Do not "simplify" one into the
//! other; their independence is the point.

use nalgebra::SMatrix;
use qd_hilbert::{
    assert_physical, hermiticity_deviation, Operator, PhysicalityReport, PhysicalityTolerances,
    C64, DIM,
};
use qd_model::{hamiltonian, BiasPoint, FrameSpec, HBAR};
use thiserror::Error;

/// Radiative cascade channels `|a><b|` with their rate parameters, plus the
/// incoherent ground-to-biexciton pump: (target a, source b, hbar*rate ueV).
const CHANNELS: [(usize, usize, Rate); 5] = [
    (0, 1, Rate::Radiative),
    (0, 2, Rate::Radiative),
    (1, 3, Rate::Radiative),
    (2, 3, Rate::Radiative),
    (3, 0, Rate::Pump),
];

#[derive(Clone, Copy)]
enum Rate {
    Radiative,
    Pump,
}

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("state left the physical set at step {step} (t = {time} ps): {report}")]
    Unphysical {
        step: usize,
        time: f64,
        report: PhysicalityReport,
    },
}

/// Uniform time grid from `t_start` to `t_end` in steps of `dt` (ps).
/// `(t_end - t_start) / dt` must be an integer to within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<TimeGrid, PropagationError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(PropagationError::InvalidGrid(format!(
                "step must be positive and finite, got {dt} ps"
            )));
        }
        if !(t_end > t_start) {
            return Err(PropagationError::InvalidGrid(format!(
                "empty span [{t_start}, {t_end}] ps"
            )));
        }
        let ratio = (t_end - t_start) / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 {
            return Err(PropagationError::InvalidGrid(format!(
                "span {} ps is not an integer number of {dt} ps steps (ratio {ratio})",
                t_end - t_start
            )));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            dt,
            steps: steps as usize,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps; the grid holds `steps + 1` samples.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Time of sample `k` (0 ..= steps).
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + self.dt * k as f64
    }
}

/// Density-matrix samples on a [`TimeGrid`], tagged with the frame they were
/// produced in. `repairs` counts the steps on which the Hermitize/renormalize
/// guard actually fired (drift beyond 1e-12).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub frame: FrameSpec,
    pub states: Vec<Operator>,
    pub repairs: usize,
}

impl Trajectory {
    pub fn state(&self, k: usize) -> &Operator {
        &self.states[k]
    }

    pub fn final_state(&self) -> &Operator {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn population(&self, k: usize, level: usize) -> f64 {
        self.states[k][(level, level)].re
    }
}

/// Right-hand side of the master equation, in ps^-1:
/// `(1/i hbar)[H(t), M]` plus pure dephasing plus the radiative cascade
/// channels and the incoherent pump, each in the factor-2 dissipator
/// convention. Rates stored as energies are divided by hbar exactly here,
/// once.
///
/// `M` need not be Hermitian or normalized; the generator is applied
/// verbatim (two-time correlation propagation relies on this).
pub fn liouvillian_apply(bp: &BiasPoint, t: f64, m: &Operator, frame: FrameSpec) -> Operator {
    let h = hamiltonian(bp, t, frame);
    let commutator = h * m - m * h;
    let mut out = commutator * C64::new(0.0, -1.0 / HBAR);

    // Pure dephasing: -(gamma_pure/2) on every off-diagonal element.
    let gp = bp.rates.gamma_pure / HBAR;
    for i in 0..DIM {
        for j in 0..DIM {
            if i != j {
                out[(i, j)] -= m[(i, j)] * C64::new(0.5 * gp, 0.0);
            }
        }
    }

    // Jump channels |a><b|: the dissipator 2 s M s+ - s+s M - M s+s touches
    // only row b, column b and the (a,a) feed, so apply it index-locally.
    for &(a, b, kind) in CHANNELS.iter() {
        let rate = match kind {
            Rate::Radiative => bp.rates.gamma_rad,
            Rate::Pump => bp.rates.p_incoh,
        };
        if rate == 0.0 {
            continue;
        }
        let g = rate / HBAR;
        out[(a, a)] += m[(b, b)] * C64::new(2.0 * g, 0.0);
        for j in 0..DIM {
            out[(b, j)] -= m[(b, j)] * C64::new(g, 0.0);
            out[(j, b)] -= m[(j, b)] * C64::new(g, 0.0);
        }
    }
    out
}

/// One classic Runge-Kutta step of the master equation from `t` to `t + h`.
///
/// Applies no Hermitization, renormalization, or physicality checking: the
/// input may be any matrix (conditioned two-time rows included) and is
/// advanced verbatim.
pub fn rk4_step(bp: &BiasPoint, t: f64, h: f64, m: &Operator, frame: FrameSpec) -> Operator {
    let k1 = liouvillian_apply(bp, t, m, frame);
    let k2 = liouvillian_apply(bp, t + 0.5 * h, &(m + k1 * C64::new(0.5 * h, 0.0)), frame);
    let k3 = liouvillian_apply(bp, t + 0.5 * h, &(m + k2 * C64::new(0.5 * h, 0.0)), frame);
    let k4 = liouvillian_apply(bp, t + h, &(m + k3 * C64::new(h, 0.0)), frame);
    m + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

fn check_sample(
    rho: &Operator,
    step: usize,
    time: f64,
    tols: &PhysicalityTolerances,
) -> Result<(), PropagationError> {
    let report = assert_physical(rho, tols);
    if report.is_ok() {
        Ok(())
    } else {
        Err(PropagationError::Unphysical { step, time, report })
    }
}

/// Integrates the master equation over `grid` with RK4, storing every sample.
///
/// After each step the state is Hermitized ((rho + rho+)/2) and trace
/// renormalized, but only when the drift exceeds 1e-12 (the event is counted
/// and logged). Every sample must stay physical at the default tolerances;
/// a violation aborts with the offending step index.
pub fn propagate(
    bp: &BiasPoint,
    rho0: &Operator,
    grid: TimeGrid,
    frame: FrameSpec,
) -> Result<Trajectory, PropagationError> {
    let tols = PhysicalityTolerances::default();
    check_sample(rho0, 0, grid.t_start(), &tols)?;

    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(*rho0);
    let mut rho = *rho0;
    let mut repairs = 0usize;

    for k in 0..grid.steps() {
        let t = grid.time(k);
        rho = rk4_step(bp, t, grid.dt(), &rho, frame);

        let trace_drift = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
        let herm_drift = hermiticity_deviation(&rho);
        if trace_drift > 1e-12 || herm_drift > 1e-12 {
            rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
            let tr = rho.trace().re;
            rho *= C64::new(1.0 / tr, 0.0);
            repairs += 1;
            log::debug!(
                "repaired state at step {} (t = {} ps): trace drift {:.3e}, hermiticity {:.3e}",
                k + 1,
                grid.time(k + 1),
                trace_drift,
                herm_drift
            );
        }
        check_sample(&rho, k + 1, grid.time(k + 1), &tols)?;
        states.push(rho);
    }

    Ok(Trajectory {
        grid,
        frame,
        states,
        repairs,
    })
}

/// 16x16 matrix form of the generator at time `t`: columns are
/// `liouvillian_apply` images of the matrix units, in column-stacked order
/// (entry (i, j) of the density matrix lives at vector index i + 4j).
pub fn liouvillian_matrix(bp: &BiasPoint, t: f64, frame: FrameSpec) -> SMatrix<C64, 16, 16> {
    let mut l = SMatrix::<C64, 16, 16>::zeros();
    for j in 0..DIM {
        for i in 0..DIM {
            let mut unit = Operator::zeros();
            unit[(i, j)] = C64::new(1.0, 0.0);
            let image = liouvillian_apply(bp, t, &unit, frame);
            let col = i + DIM * j;
            for jj in 0..DIM {
                for ii in 0..DIM {
                    l[(ii + DIM * jj, col)] = image[(ii, jj)];
                }
            }
        }
    }
    l
}

fn vectorize(m: &Operator) -> SMatrix<C64, 16, 1> {
    let mut v = SMatrix::<C64, 16, 1>::zeros();
    for j in 0..DIM {
        for i in 0..DIM {
            v[i + DIM * j] = m[(i, j)];
        }
    }
    v
}

fn devectorize(v: &SMatrix<C64, 16, 1>) -> Operator {
    let mut m = Operator::zeros();
    for j in 0..DIM {
        for i in 0..DIM {
            m[(i, j)] = v[i + DIM * j];
        }
    }
    m
}

/// Matrix-exponential reference propagator: freezes the generator at each
/// step midpoint (piecewise-constant, second-order accurate) and advances
/// the vectorized state by `exp(dt L)`. Much slower than RK4; used to
/// cross-check it. Applies the same repair guard and physicality checks.
pub fn expm_oracle(
    bp: &BiasPoint,
    rho0: &Operator,
    grid: TimeGrid,
    frame: FrameSpec,
) -> Result<Trajectory, PropagationError> {
    let tols = PhysicalityTolerances::default();
    check_sample(rho0, 0, grid.t_start(), &tols)?;

    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(*rho0);
    let mut rho = *rho0;
    let mut repairs = 0usize;

    for k in 0..grid.steps() {
        let t_mid = grid.time(k) + 0.5 * grid.dt();
        let l = liouvillian_matrix(bp, t_mid, frame) * C64::new(grid.dt(), 0.0);
        let step = l.exp();
        rho = devectorize(&(step * vectorize(&rho)));

        let trace_drift = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
        let herm_drift = hermiticity_deviation(&rho);
        if trace_drift > 1e-12 || herm_drift > 1e-12 {
            rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
            let tr = rho.trace().re;
            rho *= C64::new(1.0 / tr, 0.0);
            repairs += 1;
        }
        check_sample(&rho, k + 1, grid.time(k + 1), &tols)?;
        states.push(rho);
    }

    Ok(Trajectory {
        grid,
        frame,
        states,
        repairs,
    })
}

/// Frobenius distance between two operators.
pub fn frobenius_distance(a: &Operator, b: &Operator) -> f64 {
    (a - b).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
