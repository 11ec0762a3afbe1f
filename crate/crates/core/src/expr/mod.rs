//! Scalar expression language for problem coefficients.
//!
//! Expressions are parsed against a fixed list of variable names and
//! evaluated by slot, so a compiled [`Expression`] can be shared freely
//! between threads.

mod homogeneity;
mod parser;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use homogeneity::{check_homogeneity, check_homogeneity_with, HomogeneityReport};

/// Deviation allowed by [`check_homogeneity`] before a declaration is rejected.
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` at {pos} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        pos: usize,
        expected: usize,
        found: usize,
    },
    #[error("domain error in `{node}`: {msg}")]
    Domain { node: String, msg: String },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
}

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
pub enum NamedConst {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,
    Min,
    Max,
    Tanh,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            "min" => Func::Min,
            "max" => Func::Max,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Min => "min",
            Func::Max => "max",
            Func::Tanh => "tanh",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(NamedConst),
    /// Index into the variable list of the owning [`Expression`].
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression together with the variable names it was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

impl Expression {
    pub fn parse(text: &str, variables: &[&str]) -> Result<Expression, ExprError> {
        let vars: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
        let root = parser::Parser::new(text, &vars)?.parse()?;
        Ok(Expression { root, vars })
    }

    /// A constant expression over the given variables.
    pub fn constant(value: f64, variables: &[&str]) -> Expression {
        Expression {
            root: Node::Num(value),
            vars: variables.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// True when the tree references the named variable.
    pub fn depends_on(&self, name: &str) -> bool {
        fn walk(node: &Node, idx: usize) -> bool {
            match node {
                Node::Var(i) => *i == idx,
                Node::Num(_) | Node::Const(_) => false,
                Node::Neg(a) => walk(a, idx),
                Node::Binary(_, a, b) => walk(a, idx) || walk(b, idx),
                Node::Call(_, args) => args.iter().any(|a| walk(a, idx)),
            }
        }
        self.slot(name).is_some_and(|i| walk(&self.root, i))
    }

    /// Evaluates with values given in the order of [`Expression::variables`].
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        eval_node(&self.root, values, &self.vars)
    }

    /// Evaluates with named bindings; every variable must be bound.
    pub fn evaluate(&self, bindings: &HashMap<&str, f64>) -> Result<f64, ExprError> {
        let values = self
            .vars
            .iter()
            .map(|v| {
                bindings
                    .get(v.as_str())
                    .copied()
                    .ok_or_else(|| ExprError::Unbound(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&values)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.vars)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, vars: &[String]) -> fmt::Result {
    match node {
        Node::Num(v) => write!(f, "{v:?}"),
        Node::Const(NamedConst::Pi) => write!(f, "pi"),
        Node::Const(NamedConst::E) => write!(f, "e"),
        Node::Var(i) => write!(f, "{}", vars[*i]),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            write!(f, "(")?;
            write_node(f, a, vars)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, b, vars)?;
            write!(f, ")")
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write_node(f, a, vars)?;
            }
            write!(f, ")")
        }
    }
}

struct Shown<'a>(&'a Node, &'a [String]);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self.0, self.1)
    }
}

fn domain(node: &Node, vars: &[String], msg: &str) -> ExprError {
    ExprError::Domain {
        node: Shown(node, vars).to_string(),
        msg: msg.to_string(),
    }
}

fn eval_node(node: &Node, values: &[f64], vars: &[String]) -> Result<f64, ExprError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Const(NamedConst::Pi) => Ok(std::f64::consts::PI),
        Node::Const(NamedConst::E) => Ok(std::f64::consts::E),
        Node::Var(i) => values
            .get(*i)
            .copied()
            .ok_or_else(|| ExprError::Unbound(vars[*i].clone())),
        Node::Neg(a) => Ok(-eval_node(a, values, vars)?),
        Node::Binary(op, a, b) => {
            let x = eval_node(a, values, vars)?;
            let y = eval_node(b, values, vars)?;
            match op {
                BinOp::Add => Ok(x + y),
                BinOp::Sub => Ok(x - y),
                BinOp::Mul => Ok(x * y),
                BinOp::Div => {
                    if y == 0.0 {
                        Err(domain(node, vars, "division by zero"))
                    } else {
                        Ok(x / y)
                    }
                }
                BinOp::Pow => power(x, y).ok_or_else(|| {
                    if x == 0.0 {
                        domain(node, vars, "division by zero")
                    } else {
                        domain(node, vars, "negative base with non-integer exponent")
                    }
                }),
            }
        }
        Node::Call(func, args) => {
            let a = eval_node(&args[0], values, vars)?;
            Ok(match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Atan => a.atan(),
                Func::Exp => a.exp(),
                Func::Tanh => a.tanh(),
                Func::Abs => a.abs(),
                Func::Sign => {
                    if a > 0.0 {
                        1.0
                    } else if a < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                Func::Log => {
                    if a <= 0.0 {
                        return Err(domain(node, vars, "logarithm of a non-positive value"));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(domain(node, vars, "square root of a negative value"));
                    }
                    a.sqrt()
                }
                Func::Min => a.min(eval_node(&args[1], values, vars)?),
                Func::Max => a.max(eval_node(&args[1], values, vars)?),
            })
        }
    }
}

fn power(base: f64, exp: f64) -> Option<f64> {
    if base == 0.0 && exp < 0.0 {
        return None;
    }
    if exp.fract() == 0.0 {
        if exp.abs() <= i32::MAX as f64 {
            return Some(base.powi(exp as i32));
        }
        return Some(base.powf(exp));
    }
    if base < 0.0 {
        return None;
    }
    Some(base.powf(exp))
}

/// Symmetry class of a homogeneous term under `t -> -t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Declared positive homogeneity `h(c t) = c^order h(t)` in one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityDecl {
    pub order: f64,
    pub parity: Parity,
    pub variable: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xt(text: &str) -> Expression {
        Expression::parse(text, &["x", "t"]).unwrap()
    }

    #[test]
    fn power_node() {
        let e = xt("t^3");
        assert_eq!(
            e.root(),
            &Node::Binary(BinOp::Pow, Box::new(Node::Var(1)), Box::new(Node::Num(3.0)))
        );
    }

    #[test]
    fn arithmetic_identity() {
        let e = xt("-pi^2*t + t^3/(1+t^2)");
        let v = e.eval(&[0.0, 1.0]).unwrap();
        let pi = std::f64::consts::PI;
        assert!((v - (-pi * pi + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn malformed_reports_star() {
        match Expression::parse("t + * 2", &["x", "t"]) {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fractional_odd_power() {
        let e = xt("sign(t)*abs(t)^0.5");
        assert_eq!(e.eval(&[0.0, 4.0]).unwrap(), 2.0);
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(e.eval(&[0.0, -4.0]).unwrap(), -2.0);
    }

    #[test]
    fn named_constant() {
        assert_eq!(xt("pi^2").eval(&[0.0, 0.0]).unwrap(), 9.869604401089358);
    }

    #[test]
    fn precedence() {
        let e = xt("-2^2");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), -4.0);
        let e = xt("2^3^2");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 512.0);
        let e = xt("8/4/2");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 1.0);
        let e = xt("2^-1");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 0.5);
        let e = xt("1 - 2 - 3");
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), -4.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            xt("sqrt(t)").eval(&[0.0, -1.0]),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            xt("log(t)").eval(&[0.0, -1.0]),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            xt("1/t").eval(&[0.0, 0.0]),
            Err(ExprError::Domain { .. })
        ));
        match xt("t^0.5").eval(&[0.0, -1.0]) {
            Err(ExprError::Domain { node, .. }) => assert_eq!(node, "(t ^ 0.5)"),
            other => panic!("unexpected {other:?}"),
        }
        // integer exponents accept negative bases
        assert_eq!(xt("t^3").eval(&[0.0, -2.0]).unwrap(), -8.0);
    }

    #[test]
    fn identifier_and_arity_errors() {
        assert!(matches!(
            Expression::parse("y + 1", &["x", "t"]),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            Expression::parse("min(t)", &["x", "t"]),
            Err(ExprError::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            Expression::parse("sin(t, x)", &["x", "t"]),
            Err(ExprError::Arity { expected: 1, found: 2, .. })
        ));
        assert!(matches!(
            Expression::parse("", &["x", "t"]),
            Err(ExprError::Syntax { .. })
        ));
    }

    #[test]
    fn named_bindings() {
        let e = xt("x*t + max(x, t)");
        let mut b = HashMap::new();
        b.insert("x", 2.0);
        b.insert("t", 3.0);
        assert_eq!(e.evaluate(&b).unwrap(), 9.0);
        b.remove("t");
        assert!(matches!(e.evaluate(&b), Err(ExprError::Unbound(_))));
    }

    #[test]
    fn display_round_trip() {
        for text in [
            "-pi^2*t + t^3/(1+t^2)",
            "sign(t)*abs(t)^0.5 + 0.1*sin(2*pi*x)",
            "min(x, -t)^2 - e*exp(-t^2)",
            "1e-7*t - 2.5e3",
        ] {
            let a = xt(text);
            let b = xt(&a.to_string());
            assert_eq!(a, b, "{text}");
        }
    }

    #[test]
    fn dependency_scan() {
        let e = xt("x + 1");
        assert!(e.depends_on("x"));
        assert!(!e.depends_on("t"));
    }
}
