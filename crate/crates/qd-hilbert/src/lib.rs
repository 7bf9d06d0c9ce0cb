//! Operator algebra for the four-configuration space {G, X_H, X_V, B}.
//!
//! Everything here is a pure function over dense 4x4 complex matrices. The
//! dimension is fixed, so no sparse machinery: clarity wins over generality.
//!
//! Rate convention used throughout the workspace: the dissipator carries the
//! factor 2 inside, `D[s](r) = 2 s r s+  -  s+s r  -  r s+s`, so a population
//! fed through a single channel of strength `g` decays at `2g`. Tests in the
//! downstream crates rely on this and state it explicitly.

use nalgebra::SMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense 4x4 complex matrix. Dimensionless or energy-valued depending on
/// use; each operation documents which.
pub type Operator = SMatrix<C64, 4, 4>;

pub const DIM: usize = 4;

/// The four configurations, with a fixed ordering that every index, file and
/// test in the workspace shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    /// Ground configuration, index 0.
    G,
    /// Horizontally polarized exciton, index 1.
    XH,
    /// Vertically polarized exciton, index 2.
    XV,
    /// Biexciton, index 3.
    B,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 4] = [BasisLabel::G, BasisLabel::XH, BasisLabel::XV, BasisLabel::B];

    pub const fn index(self) -> usize {
        match self {
            BasisLabel::G => 0,
            BasisLabel::XH => 1,
            BasisLabel::XV => 2,
            BasisLabel::B => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<BasisLabel> {
        Self::ALL.get(i).copied()
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BasisLabel::G => "G",
            BasisLabel::XH => "X_H",
            BasisLabel::XV => "X_V",
            BasisLabel::B => "B",
        };
        f.write_str(s)
    }
}

/// |a><b|: single unit entry at row `a`, column `b`.
pub fn dyad(a: BasisLabel, b: BasisLabel) -> Operator {
    let mut m = Operator::zeros();
    m[(a.index(), b.index())] = C64::new(1.0, 0.0);
    m
}

/// Conjugate transpose.
pub fn adjoint(m: &Operator) -> Operator {
    m.adjoint()
}

/// Dissipator in the convention with the factor 2 inside:
/// `2 s r s+  -  s+s r  -  r s+s`.
///
/// `sigma` is dimensionless; the caller multiplies the result by the channel
/// rate (ps^-1). Output is Hermitian and traceless for Hermitian `r`.
pub fn lindblad_dissipator(sigma: &Operator, rho: &Operator) -> Operator {
    let sd = sigma.adjoint();
    let sds = sd * sigma;
    sigma * rho * sd * C64::new(2.0, 0.0) - sds * rho - rho * sds
}

/// Pure-dephasing generator: damps every off-diagonal element at
/// `gamma_pure / 2` and leaves populations untouched.
///
/// `gamma_pure` is an angular frequency (energy already divided by hbar),
/// in ps^-1. Returns `-(gamma_pure/2) * offdiag(rho)`.
pub fn pure_dephasing_term(rho: &Operator, gamma_pure: f64) -> Operator {
    let mut out = rho * C64::new(-0.5 * gamma_pure, 0.0);
    for i in 0..DIM {
        out[(i, i)] = C64::new(0.0, 0.0);
    }
    out
}

/// Largest entrywise |r - r+|.
pub fn hermiticity_deviation(rho: &Operator) -> f64 {
    let d = rho - rho.adjoint();
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &Operator) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Tolerances for a physicality check of a state matrix.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalityTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub positivity: f64,
}

impl Default for PhysicalityTolerances {
    fn default() -> Self {
        PhysicalityTolerances {
            trace: 1e-8,
            hermiticity: 1e-10,
            positivity: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhysicalityViolation {
    Trace { deviation: f64, tol: f64 },
    Hermiticity { deviation: f64, tol: f64 },
    Positivity { min_eigenvalue: f64, tol: f64 },
    NonFinite,
}

impl std::fmt::Display for PhysicalityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhysicalityViolation::Trace { deviation, tol } => {
                write!(f, "trace deviates from 1 by {deviation:.3e} (tol {tol:.1e})")
            }
            PhysicalityViolation::Hermiticity { deviation, tol } => {
                write!(f, "hermiticity deviation {deviation:.3e} (tol {tol:.1e})")
            }
            PhysicalityViolation::Positivity { min_eigenvalue, tol } => {
                write!(f, "minimum eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")
            }
            PhysicalityViolation::NonFinite => write!(f, "non-finite entry"),
        }
    }
}

/// Result of a physicality check: the measured deviations plus the list of
/// violated tolerances (empty when the matrix passes).
#[derive(Debug, Clone)]
pub struct PhysicalityReport {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub violations: Vec<PhysicalityViolation>,
}

impl PhysicalityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for PhysicalityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            return write!(f, "physical");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Measures trace, Hermiticity and positivity of `rho` against the supplied
/// tolerances and reports every violation. Never panics; a non-finite entry
/// is itself reported as a violation.
pub fn assert_physical(rho: &Operator, tols: &PhysicalityTolerances) -> PhysicalityReport {
    let mut violations = Vec::new();

    if rho.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        violations.push(PhysicalityViolation::NonFinite);
        return PhysicalityReport {
            trace_deviation: f64::NAN,
            hermiticity_deviation: f64::NAN,
            min_eigenvalue: f64::NAN,
            violations,
        };
    }

    let trace = rho.trace();
    let trace_deviation = (trace - C64::new(1.0, 0.0)).norm();
    let herm_dev = hermiticity_deviation(rho);
    let min_eig = min_eigenvalue(rho);

    if trace_deviation > tols.trace {
        violations.push(PhysicalityViolation::Trace {
            deviation: trace_deviation,
            tol: tols.trace,
        });
    }
    if herm_dev > tols.hermiticity {
        violations.push(PhysicalityViolation::Hermiticity {
            deviation: herm_dev,
            tol: tols.hermiticity,
        });
    }
    if min_eig < -tols.positivity {
        violations.push(PhysicalityViolation::Positivity {
            min_eigenvalue: min_eig,
            tol: tols.positivity,
        });
    }

    PhysicalityReport {
        trace_deviation,
        hermiticity_deviation: herm_dev,
        min_eigenvalue: min_eig,
        violations,
    }
}
