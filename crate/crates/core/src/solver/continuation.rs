use std::f64::consts::PI;

use log::{info, warn};

use super::{newton_solve, solve_with_retries, SolveError, SolverConfig, WaveProfile};
use crate::bound::{self, BoundError};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::Grid;

/// Minimum grid points per tail oscillation, `2π/(ω h)`.
const MIN_POINTS_PER_OSCILLATION: f64 = 16.0;
/// Regrid attempts per accepted wave before giving up on resolution.
const MAX_REGRIDS: usize = 4;
/// Domain growth factor used when the boundary value is too large.
const DOMAIN_GROWTH: f64 = 1.5;

/// How the truncation domain follows the speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPolicy {
    /// Same `T` and `n` throughout, enlarged only when a check fails.
    Fixed { half_length: f64, n: usize },
    /// `T(c)` from [`adaptive_half_length`], fixed `n`.
    Adaptive { n: usize },
}

/// `T = 1.25·ln(1/tail_tol)/ρ(c)`: the linear tail envelope is down to
/// `tail_tol^1.25` at the boundary, while the outer half of the domain still
/// holds oscillations well above rounding level.
pub fn adaptive_half_length(spec: &NonlinearitySpec, c: f64, tail_tol: f64) -> Result<f64, SolveError> {
    let tail = bound::tail_parameters(spec, c)?;
    Ok(1.25 * (1.0 / tail_tol).ln() / tail.rho)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationOutcome {
    /// Reached `c_end`.
    Completed,
    /// `Δc` fell below its floor before reaching `c_end`.
    StepFloor { last_good_c: f64, failed_c: f64 },
}

#[derive(Debug, Clone)]
pub struct Continuation {
    /// Converged waves in the order computed (decreasing `c`).
    pub waves: Vec<WaveProfile>,
    pub outcome: ContinuationOutcome,
}

/// Rounds to 12 decimals so that repeated subtraction of `Δc` lands on the
/// same speeds in every run.
fn round_speed(c: f64) -> f64 {
    (c * 1e12).round() / 1e12
}

struct Domain<'a> {
    spec: &'a NonlinearitySpec,
    policy: GridPolicy,
    tail_tol: f64,
    scale: f64,
    n: usize,
}

impl Domain<'_> {
    fn grid(&self, c: f64) -> Result<Grid, SolveError> {
        let t = match self.policy {
            GridPolicy::Fixed { half_length, .. } => half_length,
            GridPolicy::Adaptive { .. } => adaptive_half_length(self.spec, c, self.tail_tol)?,
        };
        Ok(Grid::new(t * self.scale, self.n)?)
    }

    /// Enlarges `T` when `|u(±T)| > 10·tail_tol` and doubles `n` when a tail
    /// oscillation has fewer than 16 points, re-solving after each change.
    fn resolve(&mut self, mut w: WaveProfile, cfg: &SolverConfig) -> Result<WaveProfile, SolveError> {
        let omega = bound::tail_parameters(self.spec, w.c)?.omega;
        for _ in 0..MAX_REGRIDS {
            let too_short = w.boundary_value() > 10.0 * self.tail_tol;
            let too_coarse = 2.0 * PI / (omega * w.grid().spacing()) < MIN_POINTS_PER_OSCILLATION;
            if !too_short && !too_coarse {
                return Ok(w);
            }
            if too_short {
                self.scale *= DOMAIN_GROWTH;
            }
            if too_coarse {
                self.n *= 2;
            }
            let grid = self.grid(w.c)?;
            info!("c={}: regridding to T={} n={}", w.c, grid.half_length(), grid.len());
            let guess = w.profile.resample(&grid);
            w = newton_solve(self.spec, w.c, &guess, cfg)?;
            if !w.converged {
                return Err(SolveError::NotConverged { residual: w.residual_norm, iters: w.newton_iters });
            }
        }
        Ok(w)
    }
}

/// Natural-parameter continuation from `c_start` down to `c_end`.
///
/// The first wave comes from [`solve_with_retries`]; later ones start from
/// the previous wave resampled onto the next grid. A failed step halves `Δc`
/// and two clean steps in a row double it again (up to the configured
/// step). The run stops early with [`ContinuationOutcome::StepFloor`] when
/// `Δc` drops below `min_continuation_step`.
pub fn continue_in_c(
    spec: &NonlinearitySpec,
    c_start: f64,
    c_end: f64,
    cfg: &SolverConfig,
    policy: GridPolicy,
    seed_amplitude: Option<f64>,
) -> Result<Continuation, SolveError> {
    cfg.validate()?;
    if !(c_end < c_start) {
        return Err(SolveError::Direction { c_start, c_end });
    }
    bound::require_admissible(spec, c_start)?;
    if !(c_end > 0.0) {
        return Err(BoundError::Inadmissible { c: c_end, fprime_at_zero: spec.fprime_at_zero() }.into());
    }
    let n = match policy {
        GridPolicy::Fixed { n, .. } | GridPolicy::Adaptive { n } => n,
    };
    let mut domain = Domain { spec, policy, tail_tol: cfg.tail_tol, scale: 1.0, n };

    let first = solve_with_retries(spec, c_start, &domain.grid(c_start)?, cfg, seed_amplitude)?;
    let first = domain.resolve(first, cfg)?;
    info!("c={c_start}: amplitude {:.6}", first.profile.sup_norm());
    let mut waves = vec![first];

    let mut step = cfg.continuation_step;
    let mut clean = 0;
    let mut c = c_start;
    while c > c_end {
        let next_c = round_speed((c - step).max(c_end));
        let prev = waves.last().expect("first wave pushed above");
        let attempt = domain
            .grid(next_c)
            .and_then(|grid| newton_solve(spec, next_c, &prev.profile.resample(&grid), cfg))
            .and_then(|w| {
                if w.converged {
                    Ok(w)
                } else {
                    Err(SolveError::NotConverged { residual: w.residual_norm, iters: w.newton_iters })
                }
            })
            .and_then(|w| domain.resolve(w, cfg));
        match attempt {
            Ok(w) => {
                info!("c={next_c}: amplitude {:.6}", w.profile.sup_norm());
                waves.push(w);
                c = next_c;
                clean += 1;
                if clean >= 2 && step < cfg.continuation_step {
                    step = (2.0 * step).min(cfg.continuation_step);
                    clean = 0;
                }
            }
            Err(e) => {
                clean = 0;
                step *= 0.5;
                warn!("c={next_c}: step failed ({e}); halving dc to {step}");
                if step < cfg.min_continuation_step {
                    return Ok(Continuation {
                        waves,
                        outcome: ContinuationOutcome::StepFloor { last_good_c: c, failed_c: next_c },
                    });
                }
            }
        }
    }
    Ok(Continuation { waves, outcome: ContinuationOutcome::Completed })
}
