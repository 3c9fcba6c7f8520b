//! A small expression language for writing vector fields, outputs, Lyapunov
//! candidates and predicates: parser, IEEE-double evaluator, and symbolic
//! differentiation.
//!
//! The grammar (precedence low to high): addition/subtraction,
//! multiplication/division, unary minus, power `^`. The exponent of `^` is a
//! rational literal: a bare integer (`x^3`) or a parenthesized rational
//! (`x^(4/3)`, `x^(-1/2)`); a bare slash after the exponent divides, so
//! `x^2/2` is (x²)/2. Call forms: `abs(e)`, `sqrt(e)`, `pow(e, p/q)`,
//! `spow(e, p/q)`, `apow(e, p/q)`. Variables are `x1..xn` plus `t` for
//! time-dependent signals. Whitespace is insignificant.
//!
//! `spow(e, q) = sign(e)·|e|^q` and `apow(e, q) = |e|^q` are total on the
//! reals for q > 0; they are what fractional powers of signed quantities
//! should be written with. Plain `^` with a non-integer exponent demands a
//! nonnegative base at evaluation time.

mod parser;

pub use parser::{parse, ParseError};

use num_rational::Rational64;
use serde::{Serialize, Serializer};
use std::fmt;

/// Exponents are exact rationals so degree bookkeeping stays exact.
pub type Exponent = Rational64;

/// A variable: state coordinate `x1..xn` (zero-based index) or time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::T => write!(f, "t"),
        }
    }
}

/// Expression AST. Immutable; `parse`, `eval` and `diff` are pure.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `e^q`; integer q works on any base, fractional q needs base ≥ 0.
    Pow(Box<Expr>, Exponent),
    /// `sign(e)·|e|^q`
    SPow(Box<Expr>, Exponent),
    /// `|e|^q`
    APow(Box<Expr>, Exponent),
}

/// Variable bindings for evaluation.
#[derive(Clone, Copy, Debug)]
pub struct Env<'a> {
    pub x: &'a [f64],
    pub t: Option<f64>,
}

impl<'a> Env<'a> {
    pub fn state(x: &'a [f64]) -> Self {
        Env { x, t: None }
    }

    pub fn with_time(x: &'a [f64], t: f64) -> Self {
        Env { x, t: Some(t) }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative base {base} raised to non-integer exponent {exponent}")]
    NegativeBase { base: f64, exponent: Exponent },
    #[error("zero base raised to negative exponent {0}")]
    ZeroToNegative(Exponent),
    #[error("sqrt of negative value {0}")]
    NegativeSqrt(f64),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
}

pub type EvalResult<T> = Result<T, EvalError>;

fn exp_f64(q: Exponent) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(Var::X(i))
    }

    pub fn eval(&self, env: &Env) -> EvalResult<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(Var::X(i)) => env
                .x
                .get(*i)
                .copied()
                .ok_or_else(|| EvalError::UnboundVariable(format!("x{}", i + 1))),
            Expr::Var(Var::T) => env
                .t
                .ok_or_else(|| EvalError::UnboundVariable("t".to_string())),
            Expr::Neg(e) => Ok(-e.eval(env)?),
            Expr::Abs(e) => Ok(e.eval(env)?.abs()),
            Expr::Sqrt(e) => {
                let v = e.eval(env)?;
                if v < 0.0 {
                    return Err(EvalError::NegativeSqrt(v));
                }
                Ok(v.sqrt())
            }
            Expr::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            Expr::Sub(a, b) => Ok(a.eval(env)? - b.eval(env)?),
            Expr::Mul(a, b) => Ok(a.eval(env)? * b.eval(env)?),
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval(env)? / d)
            }
            Expr::Pow(e, q) => {
                let v = e.eval(env)?;
                if q.is_integer() {
                    let n = *q.numer();
                    if v == 0.0 && n < 0 {
                        return Err(EvalError::ZeroToNegative(*q));
                    }
                    Ok(powi(v, n))
                } else if v > 0.0 {
                    Ok(v.powf(exp_f64(*q)))
                } else if v == 0.0 {
                    if *q.numer() > 0 {
                        Ok(0.0)
                    } else {
                        Err(EvalError::ZeroToNegative(*q))
                    }
                } else {
                    Err(EvalError::NegativeBase {
                        base: v,
                        exponent: *q,
                    })
                }
            }
            Expr::SPow(e, q) => {
                let v = e.eval(env)?;
                let p = exp_f64(*q);
                if v == 0.0 && p < 0.0 {
                    return Err(EvalError::ZeroToNegative(*q));
                }
                Ok(v.signum() * v.abs().powf(p))
            }
            Expr::APow(e, q) => {
                let v = e.eval(env)?;
                let p = exp_f64(*q);
                if v == 0.0 && p < 0.0 {
                    return Err(EvalError::ZeroToNegative(*q));
                }
                Ok(v.abs().powf(p))
            }
        }
    }

    /// Symbolic partial derivative with respect to `var`.
    ///
    /// Valid away from the kinks of `abs`/`spow`/`apow` (and wherever the
    /// classical derivative exists): d/dx spow(x,q) = q·apow(x,q-1),
    /// d/dx apow(x,q) = q·spow(x,q-1), d/dx abs(x) = sign(x) written as
    /// spow(x,0). Zero/one pruning only, no general simplifier.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(e) => neg(e.diff(var)),
            Expr::Abs(e) => mul(Expr::SPow(e.clone(), Exponent::from(0)), e.diff(var)),
            Expr::Sqrt(e) => div(e.diff(var), mul(Expr::Num(2.0), Expr::Sqrt(e.clone()))),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.diff(var), (**b).clone()),
                    mul((**a).clone(), b.diff(var)),
                ),
                Expr::Pow(b.clone(), Exponent::from(2)),
            ),
            Expr::Pow(e, q) => mul(mul(rat_num(*q), Expr::Pow(e.clone(), q - 1)), e.diff(var)),
            Expr::SPow(e, q) => mul(mul(rat_num(*q), Expr::APow(e.clone(), q - 1)), e.diff(var)),
            Expr::APow(e, q) => mul(mul(rat_num(*q), Expr::SPow(e.clone(), q - 1)), e.diff(var)),
        }
    }

    /// Largest state index used, if any (`x3` reports 3).
    pub fn max_state_index(&self) -> Option<usize> {
        let mut m = None;
        self.visit(&mut |e| {
            if let Expr::Var(Var::X(i)) = e {
                m = Some(m.map_or(i + 1, |cur: usize| cur.max(i + 1)));
            }
        });
        m
    }

    pub fn uses_time(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Var(Var::T)) {
                found = true;
            }
        });
        found
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Abs(e) | Expr::Sqrt(e) => e.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Pow(e, _) | Expr::SPow(e, _) | Expr::APow(e, _) => e.visit(f),
        }
    }
}

fn rat_num(q: Exponent) -> Expr {
    Expr::Num(exp_f64(q))
}

fn powi(v: f64, n: i64) -> f64 {
    if n.unsigned_abs() <= i32::MAX as u64 {
        v.powi(n as i32)
    } else {
        v.powf(n as f64)
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

// Pruning constructors used by diff; they keep derivative ASTs from
// exploding with x*0 and 0+x noise.
fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        Expr::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::Num(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        Expr::Num(0.0)
    } else if is_one(&b) {
        a
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

fn neg(e: Expr) -> Expr {
    if is_zero(&e) {
        e
    } else {
        Expr::Neg(Box::new(e))
    }
}

fn fmt_exponent(f: &mut fmt::Formatter<'_>, q: &Exponent) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; printing and re-parsing yields a
    /// structurally identical AST.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(e) => write!(f, "(-{})", e),
            Expr::Abs(e) => write!(f, "abs({})", e),
            Expr::Sqrt(e) => write!(f, "sqrt({})", e),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Pow(e, q) => {
                match **e {
                    Expr::Var(v) => write!(f, "{}^", v)?,
                    _ => write!(f, "({})^", e)?,
                }
                if q.is_integer() && *q.numer() >= 0 {
                    fmt_exponent(f, q)
                } else {
                    write!(f, "(")?;
                    fmt_exponent(f, q)?;
                    write!(f, ")")
                }
            }
            Expr::SPow(e, q) => {
                write!(f, "spow({}, ", e)?;
                fmt_exponent(f, q)?;
                write!(f, ")")
            }
            Expr::APow(e, q) => {
                write!(f, "apow({}, ", e)?;
                fmt_exponent(f, q)?;
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, x: &[f64]) -> f64 {
        parse(text).unwrap().eval(&Env::state(x)).unwrap()
    }

    #[test]
    fn signed_cube_root() {
        assert_eq!(ev("spow(x1, 1/3)", &[-8.0]), -2.0);
    }

    #[test]
    fn example_lyapunov_at_ones() {
        // (|x1|^{4/3} + x2^4)^{1/2} at (1,1) is sqrt(2)
        let v = ev("pow(apow(x1, 4/3) + x2^4, 1/2)", &[1.0, 1.0]);
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = parse("x2^3/x1").unwrap();
        assert_eq!(
            e.eval(&Env::state(&[0.0, 1.0])),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn negative_base_fractional_power_is_an_error() {
        let e = parse("x1^(1/2)").unwrap();
        assert!(matches!(
            e.eval(&Env::state(&[-1.0])),
            Err(EvalError::NegativeBase { .. })
        ));
    }

    #[test]
    fn integer_power_of_negative_base_is_fine() {
        assert_eq!(ev("x1^3", &[-2.0]), -8.0);
    }

    #[test]
    fn derivative_of_example_lyapunov() {
        // dV/dx1 at (1,1) is (2/3)·2^{-1/2}
        let v = parse("pow(apow(x1, 4/3) + x2^4, 1/2)").unwrap();
        let d = v.diff(Var::X(0));
        let got = d.eval(&Env::state(&[1.0, 1.0])).unwrap();
        let want = (2.0 / 3.0) / 2.0_f64.sqrt();
        assert!((got - want).abs() < 1e-14, "got {got}, want {want}");
    }

    #[test]
    fn derivative_wrt_absent_variable_is_zero() {
        let e = parse("x2^3").unwrap();
        assert_eq!(e.diff(Var::X(0)), Expr::Num(0.0));
    }

    #[test]
    fn finite_difference_cross_check() {
        let exprs = [
            "pow(apow(x1, 4/3) + x2^4, 1/2)",
            "spow(x1, 5/3) * x2 - abs(x2)/x1",
            "sqrt(x1^2 + x2^2)",
            "(x1^4 + x2^4)/4",
        ];
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng = rng
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            // in [0.1, 2.1] with random sign, away from kinks
            let u = (rng >> 11) as f64 / (1u64 << 53) as f64;
            let s = if rng & 1 == 0 { 1.0 } else { -1.0 };
            s * (0.1 + 2.0 * u)
        };
        for text in exprs {
            let e = parse(text).unwrap();
            for var in [Var::X(0), Var::X(1)] {
                let d = e.diff(var);
                for _ in 0..100 {
                    let x = [next(), next()];
                    let h = 1e-6;
                    let mut xp = x;
                    let mut xm = x;
                    let i = match var {
                        Var::X(i) => i,
                        Var::T => unreachable!(),
                    };
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (e.eval(&Env::state(&xp)).unwrap()
                        - e.eval(&Env::state(&xm)).unwrap())
                        / (2.0 * h);
                    let sym = d.eval(&Env::state(&x)).unwrap();
                    let scale = fd.abs().max(sym.abs()).max(1e-6);
                    assert!(
                        (fd - sym).abs() / scale < 1e-6,
                        "{text} d/d{var:?} at {x:?}: fd {fd} vs sym {sym}"
                    );
                }
            }
        }
    }

    #[test]
    fn spow_product_matches_apow_of_sum() {
        // spow(x,q)·spow(x,r) = apow(x,q+r) for q,r > 0
        for &x in &[-3.0f64, -0.7, 0.3, 2.5] {
            for &(q, r) in &[(1.0 / 3.0, 2.0 / 3.0), (0.5, 1.5), (2.0, 3.0)] {
                let lhs = x.signum() * x.abs().powf(q) * x.signum() * x.abs().powf(r);
                let rhs = x.abs().powf(q + r);
                assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
            }
        }
    }
}
