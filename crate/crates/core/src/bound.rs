//! Amplitude lower bound `L(f, c)`, speed admissibility, the sampled
//! nonexistence predicate and the linearized tail parameters.
//!
//! `L(f, c)` is the supremum of `δ > 0` such that `f(u)/u > c⁴/4` whenever
//! `0 ≠ |u| < δ`. Any nonzero homoclinic wave of `u'''' + c²u'' + f(u) = 0`
//! has `‖u‖∞ ≥ L(f, c)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nonlinearity::{EvalError, NonlinearitySpec};

pub const DEFAULT_SEARCH_MAX: f64 = 1e6;

/// Below this magnitude `f(u)/u` is replaced by `f'(0)`.
const RATIO_CUTOFF: f64 = 1e-12;
/// First magnitude probed by the outward scan (2⁻⁴⁰ ≈ 9.1e-13).
const SCAN_START: f64 = 9.094947017729282e-13;
const POINTS_PER_OCTAVE: usize = 64;
const BISECTION_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("speed c = {c} is not admissible: need 0 < c^4 < 4 f'(0) = {}", 4.0 * fprime_at_zero)]
    Inadmissible { c: f64, fprime_at_zero: f64 },
    #[error("search range must be positive, got {0}")]
    SearchRange(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `0 < c⁴ < 4 f'(0)`; beyond it the linearization has purely imaginary
/// eigenvalues and no homoclinic tail exists.
pub fn admissible(spec: &NonlinearitySpec, c: f64) -> bool {
    c > 0.0 && c.is_finite() && c.powi(4) < 4.0 * spec.fprime_at_zero()
}

pub(crate) fn require_admissible(spec: &NonlinearitySpec, c: f64) -> Result<(), BoundError> {
    if admissible(spec, c) {
        Ok(())
    } else {
        Err(BoundError::Inadmissible { c, fprime_at_zero: spec.fprime_at_zero() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundValue {
    Finite(f64),
    /// `f(u)/u > c⁴/4` held over the whole search range.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: BoundValue,
    /// `c⁴/4`
    pub threshold: f64,
    pub admissible: bool,
    /// Final bisection bracket `(last passing |u|, first violating |u|)`.
    pub bracketing_interval: Option<(f64, f64)>,
}

impl BoundResult {
    pub fn finite(&self) -> Option<f64> {
        match self.value {
            BoundValue::Finite(v) => Some(v),
            BoundValue::Unbounded => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.value == BoundValue::Unbounded
    }
}

fn ratio(spec: &NonlinearitySpec, u: f64) -> Result<f64, EvalError> {
    if u.abs() < RATIO_CUTOFF {
        Ok(spec.fprime_at_zero())
    } else {
        Ok(spec.eval_f(u)? / u)
    }
}

fn bisect(
    violates: impl Fn(f64) -> Result<bool, EvalError>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64), EvalError> {
    while hi - lo > BISECTION_RTOL * lo {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// `SCAN_START · 2^(k/64)` up to and including `search_max`.
fn scan_magnitudes(search_max: f64) -> impl Iterator<Item = f64> {
    let start = SCAN_START.min(search_max);
    let octaves = (search_max / start).log2();
    let steps = (octaves * POINTS_PER_OCTAVE as f64).ceil() as usize;
    (0..=steps).map(move |k| {
        if k == steps {
            search_max
        } else {
            start * (k as f64 / POINTS_PER_OCTAVE as f64).exp2()
        }
    })
}

/// Computes `L(f, c)` by an outward geometric scan over both signs of `u`
/// followed by bisection on the first violation; the smaller branch wins.
///
/// Both branches advance together, so the scan never evaluates `f` beyond
/// the first violation (the exponential term would overflow long before the
/// default search range on `u > 0`).
pub fn lower_bound(spec: &NonlinearitySpec, c: f64, search_max: f64) -> Result<BoundResult, BoundError> {
    require_admissible(spec, c)?;
    if !(search_max > 0.0) {
        return Err(BoundError::SearchRange(search_max));
    }
    let threshold = c.powi(4) / 4.0;
    let violates = |sign: f64| move |mag: f64| -> Result<bool, EvalError> { Ok(ratio(spec, sign * mag)? <= threshold) };

    let mut passing = 0.0;
    let mut bracket: Option<(f64, f64)> = None;
    for mag in scan_magnitudes(search_max) {
        for sign in [1.0, -1.0] {
            if violates(sign)(mag)? {
                let b = if passing > 0.0 { bisect(violates(sign), passing, mag)? } else { (0.0, mag) };
                if bracket.map_or(true, |f| b.1 < f.1) {
                    bracket = Some(b);
                }
            }
        }
        if bracket.is_some() {
            break;
        }
        passing = mag;
    }
    Ok(BoundResult {
        value: bracket.map_or(BoundValue::Unbounded, |(_, hi)| BoundValue::Finite(hi)),
        threshold,
        admissible: true,
        bracketing_interval: bracket,
    })
}

/// Sampled nonexistence test: `true` when `f(u)/u > c⁴/4` for every sampled
/// `0 < |u| ≤ u_max`, in which case no nonzero homoclinic wave exists.
/// A heuristic, since only finitely many `u` are examined.
pub fn nonexistence_predicate(spec: &NonlinearitySpec, c: f64, u_max: f64) -> Result<bool, BoundError> {
    Ok(lower_bound(spec, c, u_max)?.is_unbounded())
}

/// Decay rate and oscillation frequency of the linearized tails: the root
/// `λ = ρ + iω` of `λ⁴ + c²λ² + f'(0) = 0` in the first quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParameters {
    pub rho: f64,
    pub omega: f64,
}

impl TailParameters {
    /// From `f'(0)` directly. `None` outside `0 < c⁴ < 4 f'(0)`.
    pub fn from_slope(fprime_at_zero: f64, c: f64) -> Option<Self> {
        if !(c > 0.0 && fprime_at_zero > 0.0 && c.powi(4) < 4.0 * fprime_at_zero) {
            return None;
        }
        let m = fprime_at_zero.sqrt();
        let half_c2 = 0.5 * c * c;
        let rho = ((m - half_c2) / 2.0).sqrt();
        let omega = ((m + half_c2) / 2.0).sqrt();
        (rho > 0.0).then_some(TailParameters { rho, omega })
    }

    /// Spacing of consecutive tail zeros, `π/ω`.
    pub fn zero_spacing(&self) -> f64 {
        std::f64::consts::PI / self.omega
    }
}

pub fn tail_parameters(spec: &NonlinearitySpec, c: f64) -> Result<TailParameters, BoundError> {
    require_admissible(spec, c)?;
    TailParameters::from_slope(spec.fprime_at_zero(), c)
        .ok_or(BoundError::Inadmissible { c, fprime_at_zero: spec.fprime_at_zero() })
}
