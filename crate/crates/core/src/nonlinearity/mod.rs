//! Nonlinear restoring terms `f(u)`: parsing, evaluation, forward-mode
//! derivatives and sampled checks of the structural assumptions
//! `u·f(u) > 0` for `u ≠ 0` and `f'(0) > 0`.

mod expr;
mod parse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{BinOp, Expr, Func};

use expr::Dual;

/// `|f(0)|` above this is rejected at parse time.
pub const ORIGIN_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("evaluation of {detail} at u = {u} is not finite")]
    Domain { u: f64, detail: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("expression is empty")]
    Empty,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("`{name}` at position {pos} called with {found} argument(s)")]
    Arity { name: String, pos: usize, found: usize },
    #[error("f(0) = {value:e}; the nonlinearity must vanish at the origin")]
    NonzeroAtOrigin { value: f64 },
    #[error("f'(0) = {value} is not finite")]
    NonFiniteSlope { value: f64 },
    #[error("smoothing temperature must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("cannot evaluate at the origin: {0}")]
    Origin(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    BuiltinPiecewise,
    BuiltinExponential,
    Custom,
}

/// The two classical cable nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `max(u, -1)`: the cable resists stretching only.
    Piecewise,
    /// `exp(u) - 1`: smooth counterpart of the piecewise term.
    Exponential,
}

impl Builtin {
    pub fn source(self) -> &'static str {
        match self {
            Builtin::Piecewise => "max(u,-1)",
            Builtin::Exponential => "exp(u)-1",
        }
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "piecewise" => Ok(Builtin::Piecewise),
            "exponential" => Ok(Builtin::Exponential),
            other => Err(format!("unknown builtin `{other}` (expected piecewise or exponential)")),
        }
    }
}

/// A validated nonlinearity with `f(0) = 0` and a cached `f'(0)`.
///
/// Immutable after construction; evaluation takes `&self` and the type is
/// `Send + Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    source_text: String,
    ast: Expr,
    fprime_at_zero: f64,
    kind: NonlinearityKind,
    smoothing: Option<Smoothing>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Smoothing {
    temperature: f64,
    /// Softened value at the origin, subtracted so that `f(0) = 0` still holds.
    offset: f64,
}

impl NonlinearitySpec {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Self::from_source(text, NonlinearityKind::Custom)
    }

    pub fn builtin(which: Builtin) -> Self {
        let kind = match which {
            Builtin::Piecewise => NonlinearityKind::BuiltinPiecewise,
            Builtin::Exponential => NonlinearityKind::BuiltinExponential,
        };
        Self::from_source(which.source(), kind).expect("built-in nonlinearities are valid")
    }

    fn from_source(text: &str, kind: NonlinearityKind) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let ast = parse::parse_expr(text)?;
        let at_zero: Dual = ast.eval(0.0)?;
        if at_zero.v.abs() > ORIGIN_TOLERANCE {
            return Err(ParseError::NonzeroAtOrigin { value: at_zero.v });
        }
        if !at_zero.d.is_finite() {
            return Err(ParseError::NonFiniteSlope { value: at_zero.d });
        }
        Ok(NonlinearitySpec { source_text: text.to_string(), ast, fprime_at_zero: at_zero.d, kind, smoothing: None })
    }

    /// Copy in which `max`/`min` are softened to `τ·ln Σ exp(x_i/τ)` (and the
    /// negated form for `min`), shifted so that `f(0) = 0`. Off by default;
    /// the solver handles the kinks of the sharp form by semi-smooth Newton.
    pub fn with_smoothing(&self, temperature: f64) -> Result<Self, ParseError> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ParseError::Temperature(temperature));
        }
        let at_zero: Dual = self.ast.eval_with(0.0, Some(temperature))?;
        if !at_zero.d.is_finite() {
            return Err(ParseError::NonFiniteSlope { value: at_zero.d });
        }
        Ok(NonlinearitySpec {
            smoothing: Some(Smoothing { temperature, offset: at_zero.v }),
            fprime_at_zero: at_zero.d,
            ..self.clone()
        })
    }

    pub fn smoothing_temperature(&self) -> Option<f64> {
        self.smoothing.map(|s| s.temperature)
    }

    fn eval_dual(&self, u: f64) -> Result<Dual, EvalError> {
        match self.smoothing {
            None => self.ast.eval(u),
            Some(s) => {
                let d: Dual = self.ast.eval_with(u, Some(s.temperature))?;
                Ok(Dual { v: d.v - s.offset, d: d.d })
            }
        }
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn fprime_at_zero(&self) -> f64 {
        self.fprime_at_zero
    }

    pub fn eval_f(&self, u: f64) -> Result<f64, EvalError> {
        match self.smoothing {
            None => self.ast.eval::<f64>(u),
            Some(s) => Ok(self.ast.eval_with::<f64>(u, Some(s.temperature))? - s.offset),
        }
    }

    /// Forward-mode derivative. At kinks of `max`/`min` the first argument's
    /// derivative is used; `abs'(0) = 1`.
    pub fn eval_fprime(&self, u: f64) -> Result<f64, EvalError> {
        let d = self.eval_dual(u)?;
        if d.d.is_finite() {
            Ok(d.d)
        } else {
            Err(EvalError::Domain { u, detail: "derivative".into() })
        }
    }

    /// `(f(u), f'(u))` in one pass.
    pub fn eval_with_slope(&self, u: f64) -> Result<(f64, f64), EvalError> {
        let d = self.eval_dual(u)?;
        if d.d.is_finite() {
            Ok((d.v, d.d))
        } else {
            Err(EvalError::Domain { u, detail: "derivative".into() })
        }
    }

    /// Samples `u·f(u) > 0` on a symmetric log-spaced grid over
    /// `±[1e-8, u_max]` and checks `f'(0) > 0`.
    ///
    /// This is a sampled heuristic, not a proof. In particular local Lipschitz
    /// continuity is never checked, so e.g. `u^(1/3)`-type terms pass.
    ///
    /// Panics if `u_max <= 0` or `samples < 16`.
    pub fn check_assumptions(&self, u_max: f64, samples: usize) -> AssumptionReport {
        assert!(u_max > 0.0 && u_max.is_finite(), "u_max must be positive");
        assert!(samples >= 16, "at least 16 samples are required");
        let lo = u_max.min(1e-8);
        let ratio = (u_max / lo).ln();
        let mut first_violation = None;
        'scan: for i in 0..samples {
            let mag = lo * (ratio * i as f64 / (samples - 1) as f64).exp();
            for u in [mag, -mag] {
                let ok = matches!(self.eval_f(u), Ok(f) if u * f > 0.0);
                if !ok {
                    first_violation = Some(u);
                    break 'scan;
                }
            }
        }
        AssumptionReport {
            u_max,
            samples,
            sign_condition_holds: first_violation.is_none(),
            first_violation,
            fprime_at_zero: self.fprime_at_zero,
            positive_slope_holds: self.fprime_at_zero > 0.0,
        }
    }
}

impl fmt::Display for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source_text)
    }
}

/// Outcome of [`NonlinearitySpec::check_assumptions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub u_max: f64,
    pub samples: usize,
    /// `u·f(u) > 0` at every sample.
    pub sign_condition_holds: bool,
    /// Smallest-magnitude sample where the sign condition failed (or `f`
    /// could not be evaluated).
    pub first_violation: Option<f64>,
    pub fprime_at_zero: f64,
    pub positive_slope_holds: bool,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.sign_condition_holds && self.positive_slope_holds
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sampled check over ±[1e-8, {}] with {} magnitudes (heuristic, not a proof)", self.u_max, self.samples)?;
        match self.first_violation {
            None => writeln!(f, "u·f(u) > 0 for u != 0: pass")?,
            Some(u) => writeln!(f, "u·f(u) > 0 for u != 0: FAIL (first violation at u = {u})")?,
        }
        let verdict = if self.positive_slope_holds { "pass" } else { "FAIL" };
        write!(f, "f'(0) > 0: {verdict} (f'(0) = {})", self.fprime_at_zero)
    }
}
