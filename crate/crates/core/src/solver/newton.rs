use log::{debug, info};

use super::linear::Jacobian;
use super::{
    collapse_threshold, eval_pointwise, residual, scaled_residual, signed_guess, SolveError, SolverConfig,
    WaveProfile,
};
use crate::bound::{self, BoundValue};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{Grid, Profile};

/// Seed amplitudes tried by [`solve_with_retries`], as multiples of the base
/// amplitude (`1.5·L(f, c)` by default, so these are `{1.5, 0.75, 3, 6}·L`).
pub const RETRY_FACTORS: [f64; 4] = [1.0, 0.5, 2.0, 4.0];

/// Consecutive damped steps with a growing residual that count as divergence.
const GROWTH_LIMIT: usize = 3;

fn rms(p: &Profile) -> f64 {
    (p.values().iter().map(|v| v * v).sum::<f64>() / p.values().len() as f64).sqrt()
}

/// Damped Newton on the even subspace.
///
/// Each correction solves `(I + P⁻¹D) δ = −R_s`; a backtracking line search on
/// the RMS of `R_s` picks the step, and every iterate is averaged with its
/// reflection to pin translations. Convergence means
/// `‖R_s‖∞ ≤ newton_tol`; running out of iterations returns the last iterate
/// with `converged = false`.
pub fn newton_solve(
    spec: &NonlinearitySpec,
    c: f64,
    guess: &Profile,
    cfg: &SolverConfig,
) -> Result<WaveProfile, SolveError> {
    cfg.validate()?;
    bound::require_admissible(spec, c)?;
    let threshold = collapse_threshold(spec, c, guess.sup_norm())?;
    newton_with_threshold(spec, c, guess, cfg, threshold)
}

fn newton_with_threshold(
    spec: &NonlinearitySpec,
    c: f64,
    guess: &Profile,
    cfg: &SolverConfig,
    threshold: f64,
) -> Result<WaveProfile, SolveError> {
    let grid = guess.grid().clone();
    let fp0 = spec.fprime_at_zero();
    let mut u = guess.clone();
    u.symmetrize();
    let mut rs = scaled_residual(spec, c, &u)?;
    let mut merit = rms(&rs);
    let mut growth = 0;
    let mut iters = 0;
    let mut converged = false;
    loop {
        let norm = rs.sup_norm();
        debug!("c={c} iter={iters} |R_s|={norm:e} |u|={:e}", u.sup_norm());
        if norm <= cfg.newton_tol {
            converged = true;
            break;
        }
        if iters >= cfg.max_newton_iters {
            break;
        }
        iters += 1;

        let mut diag = vec![0.0; grid.len()];
        eval_pointwise(spec, u.values(), |j, _, _, df| diag[j] = df - fp0)?;
        let jac = Jacobian::new(&grid, c, fp0, diag);
        let rhs: Vec<f64> = rs.values().iter().map(|v| -v).collect();
        let mut delta = Profile::new(grid.clone(), jac.solve(&rhs, cfg)?)?;
        delta.symmetrize();

        let mut t = 1.0;
        let (next, next_rs) = loop {
            let mut trial = u.zip_with(&delta, |a, d| a + t * d);
            trial.symmetrize();
            let last_chance = t * cfg.backtrack_factor < cfg.min_step;
            match scaled_residual(spec, c, &trial) {
                Ok(r) if last_chance || rms(&r) < merit * (1.0 - 1e-4 * t) => break (trial, r),
                Ok(_) => {}
                Err(e) if last_chance => return Err(e),
                Err(_) => {}
            }
            t *= cfg.backtrack_factor;
        };
        let next_merit = rms(&next_rs);
        growth = if next_merit > merit { growth + 1 } else { 0 };
        u = next;
        rs = next_rs;
        merit = next_merit;
        if growth >= GROWTH_LIMIT {
            return Err(SolveError::Divergence { residual: rs.sup_norm(), iters });
        }
        if u.sup_norm() < threshold {
            return Err(SolveError::Trivial { sup_norm: u.sup_norm(), threshold, iters });
        }
    }
    if u.sup_norm() < threshold {
        return Err(SolveError::Trivial { sup_norm: u.sup_norm(), threshold, iters });
    }
    let raw = residual(spec, c, &u)?.sup_norm();
    Ok(WaveProfile { residual_norm: rs.sup_norm(), raw_residual_norm: raw, profile: u, c, newton_iters: iters, converged })
}

/// Solves from linearized-tail seeds, trying amplitudes `factor·base` for
/// each factor in [`RETRY_FACTORS`], trough-centred (`−A`) before
/// crest-centred (`+A`).
///
/// `base` defaults to `1.5·L(f, c)`, or `1` when `L` is unbounded. The first
/// converged nontrivial wave wins. If every attempt collapses the result is
/// [`SolveError::Trivial`]; otherwise the first non-collapse failure is
/// returned.
pub fn solve_with_retries(
    spec: &NonlinearitySpec,
    c: f64,
    grid: &Grid,
    cfg: &SolverConfig,
    seed_amplitude: Option<f64>,
) -> Result<WaveProfile, SolveError> {
    cfg.validate()?;
    let l = bound::lower_bound(spec, c, bound::DEFAULT_SEARCH_MAX)?;
    let base = match (seed_amplitude, l.value) {
        (Some(a), _) if !(a > 0.0 && a.is_finite()) => return Err(SolveError::Amplitude(a)),
        (Some(a), _) => a,
        (None, BoundValue::Finite(v)) => 1.5 * v,
        (None, BoundValue::Unbounded) => 1.0,
    };
    let mut first_failure: Option<SolveError> = None;
    let mut last_trivial: Option<SolveError> = None;
    for factor in RETRY_FACTORS {
        for sign in [-1.0, 1.0] {
            let a = sign * factor * base;
            let guess = signed_guess(spec, c, grid, a)?;
            let threshold = collapse_threshold(spec, c, a.abs())?;
            match newton_with_threshold(spec, c, &guess, cfg, threshold) {
                Ok(w) if w.converged => {
                    info!("c={c}: converged from seed {a} in {} iterations", w.newton_iters);
                    return Ok(w);
                }
                Ok(w) => {
                    debug!("c={c}: seed {a} stalled at residual {:e}", w.residual_norm);
                    first_failure
                        .get_or_insert(SolveError::NotConverged { residual: w.residual_norm, iters: w.newton_iters });
                }
                Err(e @ SolveError::Trivial { .. }) => {
                    debug!("c={c}: seed {a} collapsed");
                    last_trivial = Some(e);
                }
                Err(e @ (SolveError::Divergence { .. } | SolveError::LinearSolver(_) | SolveError::Eval { .. })) => {
                    debug!("c={c}: seed {a} failed: {e}");
                    first_failure.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(first_failure.or(last_trivial).expect("at least one attempt was made"))
}
