//! Scalar expression language used for `f`, `g`, `V̄`, `ρ` and `U`.
//!
//! Grammar (usual precedence, `^` binds tightest and is right associative,
//! unary minus binds looser than `^` but tighter than `*` and `/`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)?
//! exponent:= ('-' | '+') exponent | power
//! primary := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos tan exp log sqrt abs atan`. Constants: `pi`, `e`.

mod antiderivative;
mod diff;
mod parse;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

pub use antiderivative::{antiderivative, Antiderivative};
pub use parse::parse_expr;

use crate::error::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan,
    /// Only produced by differentiating `abs`; not accepted by the parser.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan => "atan",
            Func::Sign => "sign",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => core::f64::consts::PI,
            Constant::E => core::f64::consts::E,
        }
    }
}

/// Expression tree. Variables are indices into the owning [`Expr`]'s
/// variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Num(_) | Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Node::Num(_) | Node::Const(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) | Node::Call(_, a) => a.has_vars(),
            Node::Binary(_, a, b) => a.has_vars() || b.has_vars(),
        }
    }

    fn eval(&self, values: &[f64], vars: &[String]) -> Result<f64, ExprError> {
        let v = match self {
            Node::Num(x) => *x,
            Node::Const(c) => c.value(),
            Node::Var(i) => values[*i],
            Node::Neg(a) => -a.eval(values, vars)?,
            Node::Binary(op, a, b) => {
                let l = a.eval(values, vars)?;
                let r = b.eval(values, vars)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(self.domain(vars, "division by zero"));
                        }
                        l / r
                    }
                    BinOp::Pow => {
                        if l == 0.0 && r < 0.0 {
                            return Err(self.domain(vars, "zero raised to a negative power"));
                        }
                        if l < 0.0 && r.fract() != 0.0 {
                            return Err(self.domain(vars, "negative base with non-integer exponent"));
                        }
                        l.powf(r)
                    }
                }
            }
            Node::Call(func, a) => {
                let x = a.eval(values, vars)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(vars, "logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(vars, "square root of a negative number"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Atan => x.atan(),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain(vars, "non-finite result"))
        }
    }

    fn domain(&self, vars: &[String], reason: &'static str) -> ExprError {
        ExprError::Domain {
            expr: Printer { node: self, vars }.to_string(),
            reason,
        }
    }

    /// Folds every variable-free subtree into a literal. Subtrees whose
    /// evaluation fails are left untouched.
    fn fold(&self) -> Node {
        if !self.has_vars() {
            if let Ok(v) = self.eval(&[], &[]) {
                return Node::Num(v);
            }
        }
        match self {
            Node::Neg(a) => Node::Neg(Box::new(a.fold())),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.fold())),
            Node::Binary(op, a, b) => Node::Binary(*op, Box::new(a.fold()), Box::new(b.fold())),
            other => other.clone(),
        }
    }
}

struct Printer<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer { node, vars: self.vars };
        match self.node {
            Node::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => write!(out, "(-{})", -x),
            Node::Num(x) => write!(out, "{x}"),
            Node::Const(Constant::Pi) => out.write_str("pi"),
            Node::Const(Constant::E) => out.write_str("e"),
            Node::Var(i) => match self.vars.get(*i) {
                Some(name) => out.write_str(name),
                None => write!(out, "${i}"),
            },
            Node::Neg(a) => write!(out, "(-{})", sub(a)),
            Node::Binary(op, a, b) => write!(out, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Call(f, a) => write!(out, "{}({})", f.name(), sub(a)),
        }
    }
}

/// A parsed expression together with its ordered variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn parse(text: &str, allowed_vars: &[&str]) -> Result<Self, ExprError> {
        parse_expr(text, allowed_vars)
    }

    /// A literal constant over the given variables.
    pub fn constant(value: f64, vars: &[&str]) -> Self {
        Self {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root: Node::Num(value),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Evaluates with positional values matching [`Expr::vars`].
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        if values.len() < self.vars.len() {
            return Err(ExprError::Unbound(self.vars[values.len()].clone()));
        }
        self.root.eval(values, &self.vars)
    }

    /// Evaluates with named bindings.
    pub fn eval_with(&self, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for name in &self.vars {
            match bindings.iter().find(|(n, _)| n == name) {
                Some((_, v)) => values.push(*v),
                None if self.root.depends_on(values.len()) => {
                    return Err(ExprError::Unbound(name.clone()))
                }
                None => values.push(0.0),
            }
        }
        self.root.eval(&values, &self.vars)
    }

    /// Exact derivative with respect to `var`. Unknown variables give zero.
    pub fn diff(&self, var: &str) -> Expr {
        let root = match self.var_index(var) {
            Some(i) => diff::derivative(&self.root, i),
            None => Node::Num(0.0),
        };
        Expr {
            vars: self.vars.clone(),
            root,
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        self.var_index(var).is_some_and(|i| self.root.depends_on(i))
    }

    /// The constant-folded value when the expression has no free variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self.root.fold() {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    /// True when the expression constant-folds to the literal `0`.
    pub fn is_identically_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            vars: &self.vars,
        }
        .fmt(f)
    }
}

/// Evaluates `e` under named bindings.
pub fn eval_expr(e: &Expr, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
    e.eval_with(bindings)
}

pub fn diff_expr(e: &Expr, var: &str) -> Expr {
    e.diff(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use core::f64::consts::PI;

    #[test]
    fn evaluates_examples() {
        let e = Expr::parse("lambda^2", &["lambda"]).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 9.0);
        let e = Expr::parse("exp(0)*pi", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), PI);
    }

    #[test]
    fn log_of_negative_is_a_domain_error() {
        let e = Expr::parse("log(s)", &["s"]).unwrap();
        match e.eval_with(&[("s", -1.0)]) {
            Err(ExprError::Domain { expr, .. }) => assert_eq!(expr, "log(s)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_domain_errors() {
        let cases = [("1/s", 0.0), ("s^(-1)", 0.0), ("s^0.5", -2.0), ("sqrt(s)", -1.0), ("exp(s)", 1e4)];
        for (text, s) in cases {
            let e = Expr::parse(text, &["s"]).unwrap();
            assert!(
                matches!(e.eval(&[s]), Err(ExprError::Domain { .. })),
                "{text} at {s}"
            );
        }
        // negative base with integer exponent is fine
        let e = Expr::parse("s^3", &["s"]).unwrap();
        assert_eq!(e.eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn unbound_variable() {
        let e = Expr::parse("R*t", &["R", "t"]).unwrap();
        assert_eq!(e.eval_with(&[("R", 1.0)]), Err(ExprError::Unbound("t".into())));
        assert_eq!(e.eval_with(&[("R", 2.0), ("t", 3.0)]).unwrap(), 6.0);
    }

    #[test]
    fn zero_detection_is_syntactic() {
        assert!(Expr::parse("0", &["lambda"]).unwrap().is_identically_zero());
        assert!(Expr::parse("2*0 - (1-1)", &["lambda"]).unwrap().is_identically_zero());
        assert!(!Expr::parse("0*lambda", &["lambda"]).unwrap().is_identically_zero());
        assert!(!Expr::parse("lambda", &["lambda"]).unwrap().is_identically_zero());
    }

    #[test]
    fn display_is_fully_parenthesised() {
        let e = Expr::parse("-x^2 + sin(x)/2", &["x"]).unwrap();
        assert_eq!(format!("{e}"), "((-(x ^ 2)) + (sin(x) / 2))");
    }
}
