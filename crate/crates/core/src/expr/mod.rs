//! Scalar expressions for the phase `f` and weight `g`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`, and it is right
//! associative: `2^3^2 = 2^9`.

mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{Compiled, EvalError, Params};
pub use parse::{parse, ParseError};

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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Atan,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt, Func::Abs, Func::Atan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Literal as written, so formatting reproduces it.
    Number(String),
    Symbol(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed expression. `offset` is the byte position of the node in the
/// source text and is carried into evaluation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub offset: usize,
}

/// Name of the integration variable.
pub const VARIABLE: &str = "x";

impl Expr {
    /// Names referenced by the expression other than `x` and the builtin `pi`.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out.remove(VARIABLE);
        out.remove("pi");
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out.contains(name)
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match &self.node {
            Node::Number(_) => {}
            Node::Symbol(s) => {
                out.insert(s.clone());
            }
            Node::Neg(e) | Node::Call(_, e) => e.collect_symbols(out),
            Node::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Number(text) => write!(f, "{text}"),
            Node::Symbol(s) => write!(f, "{s}"),
            Node::Neg(e) => write!(f, "(-{e})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}
