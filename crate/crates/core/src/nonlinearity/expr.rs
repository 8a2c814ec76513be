//! Expression tree over the single free variable `u`, with a generic evaluator
//! shared by plain `f64` evaluation and forward-mode differentiation.

use std::fmt;

use super::EvalError;

/// Binary operators of the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Built-in functions. `Max` and `Min` accept two or more arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Abs,
    Max,
    Min,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "abs" => Some(Func::Abs),
            "max" => Some(Func::Max),
            "min" => Some(Func::Min),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Arithmetic needed by the evaluator. Implemented for `f64` and [`Dual`].
pub(crate) trait Number: Copy {
    fn constant(x: f64) -> Self;
    fn variable(x: f64) -> Self;
    fn value(self) -> f64;
    fn neg(self) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn pow(self, o: Self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;
}

/// Integer-valued exponents take the `powf` path that accepts negative bases.
fn real_pow(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        base.powf(exponent)
    }
}

impl Number for f64 {
    fn constant(x: f64) -> Self {
        x
    }
    fn variable(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn neg(self) -> Self {
        -self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn pow(self, o: Self) -> Self {
        real_pow(self, o)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Forward-mode dual number `v + d·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Number for Dual {
    fn constant(x: f64) -> Self {
        Dual { v: x, d: 0.0 }
    }
    fn variable(x: f64) -> Self {
        Dual { v: x, d: 1.0 }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(self, o: Self) -> Self {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(self, o: Self) -> Self {
        let v = self.v / o.v;
        Dual { v, d: (self.d - v * o.d) / o.v }
    }
    fn pow(self, o: Self) -> Self {
        let v = real_pow(self.v, o.v);
        let d = if o.d == 0.0 {
            if o.v == 0.0 || self.d == 0.0 {
                0.0
            } else {
                o.v * real_pow(self.v, o.v - 1.0) * self.d
            }
        } else {
            // variable exponent: only defined for a positive base
            v * (o.d * self.v.ln() + o.v * self.d / self.v)
        };
        Dual { v, d }
    }
    fn exp(self) -> Self {
        let v = self.v.exp();
        Dual { v, d: v * self.d }
    }
    fn ln(self) -> Self {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
    fn abs(self) -> Self {
        // abs'(0) = 1
        if self.v >= 0.0 {
            self
        } else {
            self.neg()
        }
    }
}

/// `m + τ·ln Σ exp((x_i − m)/τ)` with `m` the largest argument. The shift is
/// exact, so treating `m` as a constant keeps the derivative correct.
fn soft_max<N: Number>(xs: &[N], temperature: f64) -> N {
    let m = xs.iter().map(|x| x.value()).fold(f64::NEG_INFINITY, f64::max);
    let tau = N::constant(temperature);
    let shift = N::constant(m);
    let sum = xs[1..].iter().fold(xs[0].sub(shift).div(tau).exp(), |acc, x| acc.add(x.sub(shift).div(tau).exp()));
    shift.add(tau.mul(sum.ln()))
}

impl Expr {
    /// Evaluates the tree at `u`. Every intermediate value must be finite.
    pub(crate) fn eval<N: Number>(&self, u: f64) -> Result<N, EvalError> {
        self.eval_with(u, None)
    }

    /// As [`Expr::eval`], optionally replacing `max`/`min` by a log-sum-exp
    /// softening at the given temperature.
    pub(crate) fn eval_with<N: Number>(&self, u: f64, smoothing: Option<f64>) -> Result<N, EvalError> {
        let out = match self {
            Expr::Num(x) => N::constant(*x),
            Expr::Var => N::variable(u),
            Expr::Neg(a) => a.eval_with::<N>(u, smoothing)?.neg(),
            Expr::Binary(op, a, b) => {
                let a = a.eval_with::<N>(u, smoothing)?;
                let b = b.eval_with::<N>(u, smoothing)?;
                match op {
                    BinOp::Add => a.add(b),
                    BinOp::Sub => a.sub(b),
                    BinOp::Mul => a.mul(b),
                    BinOp::Div => a.div(b),
                    BinOp::Pow => a.pow(b),
                }
            }
            Expr::Call(func, args) => {
                let vals = args.iter().map(|e| e.eval_with::<N>(u, smoothing)).collect::<Result<Vec<N>, _>>()?;
                match (func, smoothing) {
                    (Func::Exp, _) => vals[0].exp(),
                    (Func::Abs, _) => vals[0].abs(),
                    (Func::Max, Some(t)) => soft_max(&vals, t),
                    (Func::Min, Some(t)) => {
                        let neg: Vec<N> = vals.iter().map(|x| x.neg()).collect();
                        soft_max(&neg, t).neg()
                    }
                    // ties keep the earlier argument, so its derivative wins
                    (Func::Max, None) => {
                        vals[1..].iter().fold(vals[0], |acc, &x| if x.value() > acc.value() { x } else { acc })
                    }
                    (Func::Min, None) => {
                        vals[1..].iter().fold(vals[0], |acc, &x| if x.value() < acc.value() { x } else { acc })
                    }
                }
            }
        };
        if out.value().is_finite() {
            Ok(out)
        } else {
            Err(EvalError::Domain { u, detail: self.node_label() })
        }
    }

    fn node_label(&self) -> String {
        match self {
            Expr::Num(_) | Expr::Var => "operand".to_string(),
            Expr::Neg(_) => "negation".to_string(),
            Expr::Binary(op, _, _) => format!("operator `{}`", op.symbol()),
            Expr::Call(f, _) => format!("{}()", f.name()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var => write!(f, "u"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
