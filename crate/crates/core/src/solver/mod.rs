//! Homoclinic waves of `u'''' + c²u'' + f(u) = 0` on a periodic grid: residual,
//! linearized-tail initial guesses, damped Newton on even profiles and
//! continuation in the speed `c`.
//!
//! # Residual scaling
//!
//! The collocation residual `R(u) = u'''' + c²u'' + f(u)` is literal, but its
//! sup-norm cannot drop much below `ε·ξ_max⁴·‖u‖∞`: rounding in the samples
//! is amplified by the fourth-derivative symbol. On `T = 100, n = 4096` that
//! floor is around `1e-9` for unit amplitude. Newton therefore measures
//! convergence on the preconditioned residual
//!
//! ```text
//! R_s(u) = P⁻¹ R(u) = u + P⁻¹ (f(u) − f'(0) u),   P = ξ⁴ − c²ξ² + f'(0),
//! ```
//!
//! which is the residual of an equivalent fixed-point form of the equation
//! and is computed without ever forming the amplified `ξ⁴` term. `P` is
//! bounded below by `f'(0) − c⁴/4 > 0` at admissible speeds. Both norms are
//! recorded on every [`WaveProfile`].

mod continuation;
mod linear;
mod newton;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::{self, BoundError, BoundValue};
use crate::nonlinearity::{EvalError, NonlinearitySpec};
use crate::spectral::{Grid, Profile, SpectralError};

pub use continuation::{adaptive_half_length, continue_in_c, Continuation, ContinuationOutcome, GridPolicy};
pub use newton::{newton_solve, solve_with_retries, RETRY_FACTORS};

/// Which linear solver handles the Newton correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    /// Dense LU on the even subspace up to `n = 2048`, GMRES beyond.
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm tolerance on the preconditioned residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub backtrack_factor: f64,
    pub min_step: f64,
    /// Largest admissible `|u(±T)|` is `10·tail_tol`.
    pub tail_tol: f64,
    pub continuation_step: f64,
    pub min_continuation_step: f64,
    pub linear_solver: LinearSolver,
    /// Relative residual required from GMRES.
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    pub gmres_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            backtrack_factor: 0.5,
            min_step: 1.0 / 64.0,
            tail_tol: 1e-8,
            continuation_step: 0.025,
            min_continuation_step: 1e-4,
            linear_solver: LinearSolver::Auto,
            gmres_tol: 1e-12,
            gmres_restart: 100,
            gmres_max_iters: 2000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("tail_tol", self.tail_tol),
            ("continuation_step", self.continuation_step),
            ("min_continuation_step", self.min_continuation_step),
            ("min_step", self.min_step),
            ("gmres_tol", self.gmres_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolveError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(SolveError::Config(format!("backtrack_factor must lie in (0, 1), got {}", self.backtrack_factor)));
        }
        if self.min_step > 1.0 {
            return Err(SolveError::Config(format!("min_step must not exceed 1, got {}", self.min_step)));
        }
        if self.max_newton_iters == 0 || self.gmres_restart == 0 || self.gmres_max_iters == 0 {
            return Err(SolveError::Config("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Grid(#[from] SpectralError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("seed amplitude must be positive, got {0}")]
    Amplitude(f64),
    #[error("nonlinearity failed at grid index {index}: {source}")]
    Eval { index: usize, source: EvalError },
    #[error("Newton diverged: residual grew for 3 consecutive damped steps (last {residual:e})")]
    Divergence { residual: f64, iters: usize },
    #[error("collapsed to zero (sup-norm {sup_norm:e} < {threshold:e}); trivial solution")]
    Trivial { sup_norm: f64, threshold: f64, iters: usize },
    #[error("Newton stopped after {iters} iterations with residual {residual:e}")]
    NotConverged { residual: f64, iters: usize },
    #[error("linear solver failed: {0}")]
    LinearSolver(String),
    #[error("continuation requires c_end < c_start, got c_start = {c_start}, c_end = {c_end}")]
    Direction { c_start: f64, c_end: f64 },
}

/// A computed wave with its convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub profile: Profile,
    pub c: f64,
    /// Sup-norm of the preconditioned residual `P⁻¹R(u)`.
    pub residual_norm: f64,
    /// Sup-norm of the literal residual `R(u)`, for reference.
    pub raw_residual_norm: f64,
    pub newton_iters: usize,
    pub converged: bool,
}

impl WaveProfile {
    pub fn grid(&self) -> &Grid {
        self.profile.grid()
    }

    /// `|u(±T)|`; both ends are the same periodic sample.
    pub fn boundary_value(&self) -> f64 {
        self.profile.values()[0].abs()
    }
}

fn eval_pointwise(
    spec: &NonlinearitySpec,
    values: &[f64],
    mut f: impl FnMut(usize, f64, f64, f64),
) -> Result<(), SolveError> {
    for (index, &u) in values.iter().enumerate() {
        let (fu, dfu) = spec.eval_with_slope(u).map_err(|source| SolveError::Eval { index, source })?;
        f(index, u, fu, dfu);
    }
    Ok(())
}

fn f_values(spec: &NonlinearitySpec, p: &Profile) -> Result<Vec<f64>, SolveError> {
    p.values()
        .iter()
        .enumerate()
        .map(|(index, &u)| spec.eval_f(u).map_err(|source| SolveError::Eval { index, source }))
        .collect()
}

/// `u'''' + c²u'' + f(u)` on the grid.
///
/// No admissibility check: the operator is well defined at every speed, and
/// the solver enforces admissibility where it matters.
pub fn residual(spec: &NonlinearitySpec, c: f64, p: &Profile) -> Result<Profile, SolveError> {
    let c2 = c * c;
    let linear = p.grid().apply_even_symbol(p.values(), |xi| {
        let x2 = xi * xi;
        x2 * x2 - c2 * x2
    });
    let fu = f_values(spec, p)?;
    let values = linear.iter().zip(&fu).map(|(a, b)| a + b).collect();
    Ok(Profile::new(p.grid().clone(), values)?)
}

/// Fourier symbol of `P = L_c + f'(0)`.
pub(crate) fn preconditioner_symbol(c: f64, fprime0: f64) -> impl Fn(f64) -> f64 {
    let c2 = c * c;
    move |xi: f64| {
        let x2 = xi * xi;
        x2 * x2 - c2 * x2 + fprime0
    }
}

/// Preconditioned residual `u + P⁻¹(f(u) − f'(0)u)`; requires an admissible
/// speed so that `P` is invertible.
pub fn scaled_residual(spec: &NonlinearitySpec, c: f64, p: &Profile) -> Result<Profile, SolveError> {
    bound::require_admissible(spec, c)?;
    let fp0 = spec.fprime_at_zero();
    let fu = f_values(spec, p)?;
    let nonlinear: Vec<f64> = fu.iter().zip(p.values()).map(|(f, u)| f - fp0 * u).collect();
    let symbol = preconditioner_symbol(c, fp0);
    let smoothed = p.grid().apply_even_symbol(&nonlinear, |xi| 1.0 / symbol(xi));
    let values = smoothed.iter().zip(p.values()).map(|(a, u)| a + u).collect();
    Ok(Profile::new(p.grid().clone(), values)?)
}

/// `−A·e^{−ρ|s|}·cos(ωs)` from the linearized tail roots.
pub fn initial_guess(spec: &NonlinearitySpec, c: f64, grid: &Grid, amplitude: f64) -> Result<Profile, SolveError> {
    signed_guess(spec, c, grid, -amplitude)
}

/// Same shape with an explicit sign; `a < 0` is trough-centred.
pub(crate) fn signed_guess(spec: &NonlinearitySpec, c: f64, grid: &Grid, a: f64) -> Result<Profile, SolveError> {
    if !(a != 0.0 && a.is_finite()) {
        return Err(SolveError::Amplitude(a.abs()));
    }
    let tail = bound::tail_parameters(spec, c)?;
    Ok(Profile::from_fn(grid, |s| a * (-tail.rho * s.abs()).exp() * (tail.omega * s).cos()))
}

/// Sup-norm below which an iterate counts as the trivial solution:
/// `1e-3·L(f, c)`, or `1e-3` of the seed amplitude when `L` is unbounded.
pub(crate) fn collapse_threshold(spec: &NonlinearitySpec, c: f64, seed_amplitude: f64) -> Result<f64, SolveError> {
    let l = bound::lower_bound(spec, c, bound::DEFAULT_SEARCH_MAX)?;
    Ok(match l.value {
        BoundValue::Finite(v) => 1e-3 * v,
        BoundValue::Unbounded => 1e-3 * seed_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Builtin;

    #[test]
    fn zero_profile_has_zero_residual() {
        let g = Grid::new(10.0, 256).unwrap();
        let f = NonlinearitySpec::builtin(Builtin::Exponential);
        let r = residual(&f, 1.0, &Profile::zeros(&g)).unwrap();
        assert_eq!(r.sup_norm(), 0.0);
        assert_eq!(scaled_residual(&f, 1.0, &Profile::zeros(&g)).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn residual_reports_offending_index() {
        let g = Grid::new(10.0, 256).unwrap();
        let f = NonlinearitySpec::builtin(Builtin::Exponential);
        let p = Profile::from_fn(&g, |s| if s == 0.0 { 1000.0 } else { 0.0 });
        assert!(matches!(residual(&f, 1.0, &p), Err(SolveError::Eval { index: 128, .. })));
    }

    #[test]
    fn scaled_residual_is_preconditioned_residual() {
        let g = Grid::new(20.0, 512).unwrap();
        let f = NonlinearitySpec::builtin(Builtin::Exponential);
        let c = 1.1;
        let p = Profile::from_fn(&g, |s| -0.8 * (-0.3 * s * s).exp());
        let raw = residual(&f, c, &p).unwrap();
        let sym = preconditioner_symbol(c, 1.0);
        let direct = g.apply_even_symbol(raw.values(), |xi| 1.0 / sym(xi));
        let scaled = scaled_residual(&f, c, &p).unwrap();
        let diff = direct.iter().zip(scaled.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn guess_shape() {
        let f = NonlinearitySpec::builtin(Builtin::Exponential);
        let g = Grid::new(100.0, 4096).unwrap();
        let u = initial_guess(&f, 1.0, &g, 2.0).unwrap();
        assert_eq!(u.values()[g.center()], -2.0);
        assert_eq!(u.asymmetry(), 0.0);
        assert_eq!(u.sup_norm(), 2.0);
        assert!(u.values()[0].abs() <= (-50f64).exp());
        assert!(matches!(initial_guess(&f, 2f64.sqrt(), &g, 1.0), Err(SolveError::Bound(_))));
        assert!(matches!(initial_guess(&f, 1.0, &g, 0.0), Err(SolveError::Amplitude(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { newton_tol: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { backtrack_factor: 1.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
    }
}
