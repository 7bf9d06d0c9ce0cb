//! The `oracle` subcommand: an RK4-versus-matrix-exponential comparison of
//! the fully driven propagation at a chosen step, repeated at half the step
//! to expose the convergence order.

use qd_propagator::{expm_oracle, frobenius_distance, propagate, TimeGrid};

use crate::config::{device_model, ground_state, RunConfig};
use crate::pipeline::PipelineError;

pub struct OracleReport {
    pub voltage: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Max Frobenius deviation between the two propagators at step `dt`.
    pub max_dev_coarse: f64,
    /// Same at step `dt / 2`.
    pub max_dev_fine: f64,
    /// coarse / fine; both discretizations carry O(dt^3) envelope-sampling
    /// error, so halving the step should shrink the gap by roughly 8.
    pub ratio: f64,
}

fn max_deviation(
    cfg: &RunConfig,
    v: f64,
    dt: f64,
    t_end: f64,
) -> Result<f64, PipelineError> {
    let run_err = |e: String| PipelineError::Run(e);
    let model = device_model(cfg)?;
    let bp = model.at(v).map_err(|e| run_err(e.to_string()))?;
    let grid = TimeGrid::new(0.0, t_end, dt).map_err(|e| run_err(e.to_string()))?;
    let rho0 = ground_state();
    let a = propagate(&bp, &rho0, grid, bp.frame).map_err(|e| run_err(e.to_string()))?;
    let b = expm_oracle(&bp, &rho0, grid, bp.frame).map_err(|e| run_err(e.to_string()))?;
    Ok(a
        .states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| frobenius_distance(x, y))
        .fold(0.0, f64::max))
}

pub fn convergence_report(
    cfg: &RunConfig,
    v: f64,
    dt: f64,
    t_end: f64,
) -> Result<OracleReport, PipelineError> {
    let coarse = max_deviation(cfg, v, dt, t_end)?;
    let fine = max_deviation(cfg, v, dt / 2.0, t_end)?;
    Ok(OracleReport {
        voltage: v,
        dt,
        t_end,
        max_dev_coarse: coarse,
        max_dev_fine: fine,
        ratio: if fine > 0.0 { coarse / fine } else { f64::INFINITY },
    })
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "propagator comparison at V = {} V over {} ps",
            self.voltage, self.t_end
        )?;
        writeln!(
            f,
            "  dt = {} ps    max Frobenius deviation {:.6e}",
            self.dt, self.max_dev_coarse
        )?;
        writeln!(
            f,
            "  dt = {} ps    max Frobenius deviation {:.6e}",
            self.dt / 2.0,
            self.max_dev_fine
        )?;
        write!(f, "  step-halving ratio {:.2}", self.ratio)
    }
}
