//! Metric component expressions.
//!
//! Scenario files describe metric components as strings such as
//! `"1 + 0.05*cos(x1 - 2*x3)*(1 + t^2)"`. They are parsed once into an
//! immutable [`Expr`] tree and evaluated over jets, which yields all partial
//! derivatives the curvature pipeline needs.

mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jet::{plateau, Elementary, Jet, JetError, JetLayout};

pub use parser::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    /// `plateau(t, a, b)`: smooth, `1` for `t <= a`, `0` for `t >= b`.
    Plateau,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sqrt,
        Func::Plateau,
    ];

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Plateau => "plateau",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Plateau => 3,
            _ => 1,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a literal exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("variable `{name}` is not valid in dimension {dim}")]
    InvalidVariable { name: String, dim: usize },
}

/// Variable bindings for jet evaluation; every bound jet shares one layout.
#[derive(Debug, Clone)]
pub struct JetEnv {
    layout: Arc<JetLayout>,
    vars: HashMap<String, Jet>,
}

impl JetEnv {
    pub fn new(layout: Arc<JetLayout>) -> Self {
        JetEnv {
            layout,
            vars: HashMap::new(),
        }
    }

    /// Binds `t, x1, .., x_{n-1}` to coordinate jets at `point`.
    pub fn coordinates(point: &[f64], order: usize) -> Self {
        let jets = Jet::coordinates(point, order);
        let mut env = JetEnv::new(JetLayout::get(point.len(), order));
        for (i, j) in jets.into_iter().enumerate() {
            env.bind(coordinate_name(i), j);
        }
        env
    }

    /// Binds `t, x1, ..` to arbitrary jets (all in the same layout).
    pub fn from_jets(values: &[Jet]) -> Self {
        let mut env = JetEnv::new(values[0].layout().clone());
        for (i, j) in values.iter().enumerate() {
            env.bind(coordinate_name(i), j.clone());
        }
        env
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Jet) {
        assert_eq!(
            value.layout().len(),
            self.layout.len(),
            "environment jets must share one layout"
        );
        self.vars.insert(name.into(), value);
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }
}

/// `t` for index 0, `x{i}` otherwise.
pub fn coordinate_name(i: usize) -> String {
    if i == 0 {
        "t".to_string()
    } else {
        format!("x{i}")
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse(text)
    }

    pub fn eval_jet(&self, env: &JetEnv) -> Result<Jet, EvalError> {
        Ok(match self {
            Expr::Const(v) => Jet::constant_in(&env.layout, *v),
            Expr::Pi => Jet::constant_in(&env.layout, std::f64::consts::PI),
            Expr::Var(name) => env
                .vars
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::UnknownVariable(name.clone()))?,
            Expr::Neg(a) => -a.eval_jet(env)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_jet(env)?;
                let b = b.eval_jet(env)?;
                match op {
                    BinOp::Add => a.try_add(&b)?,
                    BinOp::Sub => a.try_sub(&b)?,
                    BinOp::Mul => a.try_mul(&b)?,
                    BinOp::Div => a.try_div(&b)?,
                }
            }
            Expr::Pow(a, c) => a.eval_jet(env)?.compose(Elementary::Pow(*c))?,
            Expr::Call(f, args) => {
                let a = args[0].eval_jet(env)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln()?,
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt()?,
                    Func::Plateau => {
                        // the cutoff interval is read from the constant terms
                        let lo = args[1].eval_jet(env)?.constant_term();
                        let hi = args[2].eval_jet(env)?.constant_term();
                        plateau(&a, lo, hi)
                    }
                }
            }
        })
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, vars: &HashMap<String, f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(name) => *vars
                .get(name)
                .ok_or_else(|| EvalError::UnknownVariable(name.clone()))?,
            Expr::Neg(a) => -a.eval_f64(vars)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_f64(vars)?;
                let b = b.eval_f64(vars)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(JetError::ZeroDivisor.into());
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(a, c) => {
                let a = a.eval_f64(vars)?;
                if c.fract() == 0.0 {
                    if *c < 0.0 && a == 0.0 {
                        return Err(JetError::Domain { func: "pow", value: a }.into());
                    }
                    a.powi(*c as i32)
                } else {
                    if a <= 0.0 {
                        return Err(JetError::Domain { func: "pow", value: a }.into());
                    }
                    a.powf(*c)
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_f64(vars)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(JetError::Domain { func: "log", value: a }.into());
                        }
                        a.ln()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => {
                        if a <= 0.0 {
                            return Err(JetError::Domain { func: "sqrt", value: a }.into());
                        }
                        a.sqrt()
                    }
                    Func::Plateau => {
                        let lo = args[1].eval_f64(vars)?;
                        let hi = args[2].eval_f64(vars)?;
                        crate::jet::plateau_value(a, lo, hi)
                    }
                }
            }
        })
    }

    /// Names of every referenced variable.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Expr::Const(_) | Expr::Pi => {}
        }
    }

    /// Checks that only `t, x1, .., x_{dim-1}` appear.
    pub fn validate_dimension(&self, dim: usize) -> Result<(), EvalError> {
        for name in self.variables() {
            let ok = (0..dim).any(|i| coordinate_name(i) == name);
            if !ok {
                return Err(EvalError::InvalidVariable { name, dim });
            }
        }
        Ok(())
    }

    /// Replaces every occurrence of a variable by an expression.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        match self {
            Expr::Var(n) if n == name => value.clone(),
            Expr::Var(_) | Expr::Const(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(name, value))),
            Expr::Pow(a, c) => Expr::Pow(Box::new(a.substitute(name, value)), *c),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute(name, value)),
                Box::new(b.substitute(name, value)),
            ),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(name, value)).collect())
            }
        }
    }
}

fn fmt_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(f, "{}", v as i64)
    } else {
        write!(f, "{v:?}")
    }
}

/// Fully parenthesized; re-parses to an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => fmt_number(f, *v),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, c) => {
                if *c >= 0.0 && c.fract() == 0.0 {
                    write!(f, "({a} ^ ")?;
                    fmt_number(f, *c)?;
                    f.write_str(")")
                } else {
                    write!(f, "({a} ^ (")?;
                    fmt_number(f, *c)?;
                    f.write_str("))")
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
