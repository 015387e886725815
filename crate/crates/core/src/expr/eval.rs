use std::collections::BTreeMap;

use num_complex::Complex;
use thiserror::Error;

use super::{BinOp, Expr, Func, Node, VARIABLE};
use crate::jet::{Jet, JetError};
use crate::real::{ipow, Real};

/// Parameter bindings, name to value.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol '{name}' at offset {offset}")]
    UnboundSymbol { name: String, offset: usize },
    #[error("{what} at offset {offset}")]
    Domain { what: String, offset: usize },
    #[error("at offset {offset}: {source}")]
    Jet { offset: usize, source: JetError },
}

fn domain(what: &str, offset: usize) -> EvalError {
    EvalError::Domain { what: what.to_string(), offset }
}

/// Largest exponent magnitude evaluated by repeated squaring.
const MAX_INT_POWER: f64 = 1024.0;

#[derive(Debug, Clone)]
enum Op<R: Real> {
    Const(R),
    X,
    Neg(Box<Op<R>>),
    Bin(BinOp, Box<Op<R>>, Box<Op<R>>, usize),
    Call(Func, Box<Op<R>>, usize),
    PowInt(Box<Op<R>>, i32, usize),
    PowConst(Box<Op<R>>, R, usize),
    /// `a^b` with `b` depending on `x`: `exp(b log a)`.
    PowVar(Box<Op<R>>, Box<Op<R>>, usize),
}

/// An expression with every parameter resolved, ready for repeated
/// evaluation at carrier precision `R`.
#[derive(Debug, Clone)]
pub struct Compiled<R: Real = f64> {
    root: Op<R>,
}

impl Expr {
    pub fn compile<R: Real>(&self, params: &Params) -> Result<Compiled<R>, EvalError> {
        Ok(Compiled { root: lower(self, params)? })
    }

    pub fn eval_real(&self, x: f64, params: &Params) -> Result<f64, EvalError> {
        self.compile::<f64>(params)?.eval(x)
    }

    pub fn eval_jet<R: Real>(&self, x: &Jet<R>, params: &Params) -> Result<Jet<R>, EvalError> {
        self.compile::<R>(params)?.eval_jet(x)
    }
}

fn lower<R: Real>(e: &Expr, params: &Params) -> Result<Op<R>, EvalError> {
    let op = match &e.node {
        Node::Number(text) => Op::Const(
            R::from_literal(text).ok_or_else(|| domain(&format!("malformed number '{text}'"), e.offset))?,
        ),
        Node::Symbol(name) if name == VARIABLE => Op::X,
        Node::Symbol(name) => match params.get(name) {
            Some(&v) => Op::Const(R::from_f64(v)),
            None if name == "pi" => Op::Const(R::pi()),
            None => return Err(EvalError::UnboundSymbol { name: name.clone(), offset: e.offset }),
        },
        Node::Neg(inner) => Op::Neg(Box::new(lower(inner, params)?)),
        Node::Call(func, arg) => Op::Call(*func, Box::new(lower(arg, params)?), e.offset),
        Node::Binary(BinOp::Pow, base, exponent) => {
            let base = Box::new(lower(base, params)?);
            match lower::<R>(exponent, params)? {
                Op::Const(p) => {
                    let pf = p.to_f64();
                    if R::from_f64(pf) == p && pf.fract() == 0.0 && pf.abs() <= MAX_INT_POWER {
                        Op::PowInt(base, pf as i32, e.offset)
                    } else {
                        Op::PowConst(base, p, e.offset)
                    }
                }
                other => Op::PowVar(base, Box::new(other), e.offset),
            }
        }
        Node::Binary(op, a, b) => Op::Bin(*op, Box::new(lower(a, params)?), Box::new(lower(b, params)?), e.offset),
    };
    // fold subtrees that do not depend on x
    if !matches!(op, Op::Const(_)) && !uses_x(&op) {
        return Ok(Op::Const(real(&op, R::zero())?));
    }
    Ok(op)
}

fn uses_x<R: Real>(op: &Op<R>) -> bool {
    match op {
        Op::Const(_) => false,
        Op::X => true,
        Op::Neg(a) | Op::Call(_, a, _) | Op::PowInt(a, _, _) | Op::PowConst(a, _, _) => uses_x(a),
        Op::Bin(_, a, b, _) | Op::PowVar(a, b, _) => uses_x(a) || uses_x(b),
    }
}

fn real<R: Real>(op: &Op<R>, x: R) -> Result<R, EvalError> {
    Ok(match op {
        Op::Const(c) => *c,
        Op::X => x,
        Op::Neg(a) => -real(a, x)?,
        Op::Bin(op, a, b, offset) => {
            let (a, b) = (real(a, x)?, real(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == R::zero() {
                        return Err(domain("division by zero", *offset));
                    }
                    a / b
                }
                BinOp::Pow => unreachable!("powers are lowered separately"),
            }
        }
        Op::Call(func, a, offset) => {
            let a = real(a, x)?;
            match func {
                Func::Exp => a.exp(),
                Func::Log if a > R::zero() => a.ln(),
                Func::Log => return Err(domain("log of non-positive value", *offset)),
                Func::Sqrt if a >= R::zero() => a.sqrt(),
                Func::Sqrt => return Err(domain("sqrt of negative value", *offset)),
                Func::Sin => a.sin_cos().0,
                Func::Cos => a.sin_cos().1,
                Func::Abs => a.abs(),
                Func::Atan => a.atan(),
            }
        }
        Op::PowInt(a, n, offset) => {
            let a = real(a, x)?;
            let p = ipow(a, n.unsigned_abs(), R::one(), |u, v| *u * *v);
            if *n >= 0 {
                p
            } else if p == R::zero() {
                return Err(domain("division by zero in negative power", *offset));
            } else {
                R::one() / p
            }
        }
        Op::PowConst(a, p, offset) => {
            let a = real(a, x)?;
            if a > R::zero() {
                a.powf(*p)
            } else if a == R::zero() && *p > R::zero() {
                R::zero()
            } else {
                return Err(domain("non-integer power of non-positive value", *offset));
            }
        }
        Op::PowVar(a, b, offset) => {
            let (a, b) = (real(a, x)?, real(b, x)?);
            if a <= R::zero() {
                return Err(domain("variable power of non-positive value", *offset));
            }
            (b * a.ln()).exp()
        }
    })
}

fn jet<R: Real>(op: &Op<R>, x: &Jet<R>) -> Result<Jet<R>, EvalError> {
    let lift = |c: R| Jet::constant(Complex::new(c, R::zero()), x.base_point(), x.degree());
    let wrap = |offset: usize| move |source: JetError| EvalError::Jet { offset, source };
    Ok(match op {
        Op::Const(c) => lift(*c),
        Op::X => x.clone(),
        Op::Neg(a) => jet(a, x)?.neg(),
        Op::Bin(op, a, b, offset) => {
            let (a, b) = (jet(a, x)?, jet(b, x)?);
            match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b),
                BinOp::Pow => unreachable!("powers are lowered separately"),
            }
            .map_err(wrap(*offset))?
        }
        Op::Call(func, a, offset) => {
            let a = jet(a, x)?;
            match func {
                Func::Exp => Ok(a.exp()),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Sin => Ok(a.sin_cos().0),
                Func::Cos => Ok(a.sin_cos().1),
                Func::Abs => a.abs(),
                Func::Atan => a.atan(),
            }
            .map_err(wrap(*offset))?
        }
        Op::PowInt(a, n, offset) => {
            let p = jet(a, x)?.powi(n.unsigned_abs());
            if *n >= 0 {
                p
            } else {
                lift(R::one()).div(&p).map_err(wrap(*offset))?
            }
        }
        Op::PowConst(a, p, offset) => jet(a, x)?.powf(*p).map_err(wrap(*offset))?,
        Op::PowVar(a, b, offset) => {
            let log_a = jet(a, x)?.ln().map_err(wrap(*offset))?;
            jet(b, x)?.mul(&log_a).map_err(wrap(*offset))?.exp()
        }
    })
}

impl<R: Real> Compiled<R> {
    pub fn eval(&self, x: R) -> Result<R, EvalError> {
        real(&self.root, x)
    }

    pub fn eval_jet(&self, x: &Jet<R>) -> Result<Jet<R>, EvalError> {
        jet(&self.root, x)
    }

    /// Jet of degree `degree` at `x0`.
    pub fn jet_at(&self, x0: R, degree: usize) -> Result<Jet<R>, EvalError> {
        let x = Jet::variable_at(x0, degree).map_err(|source| EvalError::Jet { offset: 0, source })?;
        self.eval_jet(&x)
    }

    /// The constant value if the expression does not depend on `x`.
    pub fn as_constant(&self) -> Option<R> {
        match self.root {
            Op::Const(c) => Some(c),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::expr::parse;
    use proptest::prelude::*;

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn ev(text: &str, x: f64, p: &[(&str, f64)]) -> Result<f64, EvalError> {
        parse(text).unwrap().eval_real(x, &params(p))
    }

    #[test]
    fn real_evaluation() {
        assert_eq!(ev("x^2+1", 2.0, &[]).unwrap(), 5.0);
        assert_eq!(ev("T*x", 3.0, &[("T", 100.0)]).unwrap(), 300.0);
        assert_eq!(ev("2+3*4", 0.0, &[]).unwrap(), 14.0);
        assert_eq!(ev("2^3^2", 0.0, &[]).unwrap(), 512.0);
        assert_eq!(ev("-x^2", 3.0, &[]).unwrap(), -9.0);
        assert_eq!(ev("x^-2", 2.0, &[]).unwrap(), 0.25);
        assert_eq!(ev("x^0.5", 4.0, &[]).unwrap(), 2.0);
        assert!((ev("2^x", 0.5, &[]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((ev("cos(2*pi*x)", 0.5, &[]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(ev("abs(x) + atan(0)", -2.0, &[]).unwrap(), 2.0);
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(ev("log(x)", 0.0, &[]), Err(EvalError::Domain { what: "log of non-positive value".into(), offset: 0 }));
        assert!(matches!(ev("1/x", 0.0, &[]), Err(EvalError::Domain { offset: 1, .. })));
        assert!(matches!(ev("sqrt(x - 2)", 1.0, &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(ev("x^0.5", -1.0, &[]), Err(EvalError::Domain { .. })));
        assert_eq!(ev("T*x", 1.0, &[]), Err(EvalError::UnboundSymbol { name: "T".into(), offset: 0 }));
    }

    fn coeffs(text: &str, x0: f64, degree: usize) -> Vec<f64> {
        let x = Jet::<f64>::variable(x0, degree).unwrap();
        parse(text).unwrap().eval_jet(&x, &Params::new()).unwrap().real_coeffs()
    }

    #[test]
    fn jet_evaluation() {
        assert_eq!(coeffs("x^2", 0.0, 4), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(coeffs("x^2+x^3", 0.0, 3), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(coeffs("exp(x)", 0.0, 2), vec![1.0, 1.0, 0.5]);
        assert_eq!(coeffs("x^-1", 1.0, 3), vec![1.0, -1.0, 1.0, -1.0]);
        let c = coeffs("2^x", 0.0, 2);
        let ln2 = 2f64.ln();
        assert!((c[1] - ln2).abs() < 1e-15 && (c[2] - ln2 * ln2 / 2.0).abs() < 1e-15);
        let x = Jet::<f64>::variable(0.0, 2).unwrap();
        let err = parse("1 + log(x)").unwrap().eval_jet(&x, &Params::new()).unwrap_err();
        assert!(matches!(err, EvalError::Jet { offset: 4, source: JetError::Domain { .. } }));
    }

    #[test]
    fn double_double_literals_are_exact_to_carrier_precision() {
        let e = parse("1/3").unwrap().compile::<Dd>(&Params::new()).unwrap();
        let third = e.as_constant().unwrap();
        assert!((third * Dd::from(3.0) - Dd::ONE).hi().abs() < 1e-31);
        let e = parse("0.1").unwrap().compile::<Dd>(&Params::new()).unwrap();
        assert!((e.as_constant().unwrap() * Dd::from(10.0) - Dd::ONE).hi().abs() < 1e-31);
    }

    const SMOOTH: [&str; 6] = [
        "x^3 - 2*x + 1",
        "exp(sin(x)) / (1 + x^2)",
        "sqrt(2 + cos(x)) * atan(x/3)",
        "log(3 + x) ^ 2 - x^-1",
        "-x^2 / (4 - x) + 2^x",
        "T*(x + x^2/10)",
    ];

    proptest! {
        #[test]
        fn jet_constant_term_is_the_real_value(i in 0usize..SMOOTH.len(), x in 0.3f64..2.5, d in 1usize..7) {
            let e = parse(SMOOTH[i]).unwrap();
            let p = params(&[("T", 7.0)]);
            let jet = e.eval_jet(&Jet::<f64>::variable(x, d).unwrap(), &p).unwrap();
            let v = e.eval_real(x, &p).unwrap();
            prop_assert!((jet.constant_term().re - v).abs() <= 4.0 * f64::EPSILON * v.abs());
            prop_assert_eq!(jet.constant_term().im, 0.0);
        }

        #[test]
        fn formatting_round_trips(i in 0usize..SMOOTH.len(), xs in prop::collection::vec(0.3f64..2.5, 100)) {
            let e = parse(SMOOTH[i]).unwrap();
            let back = parse(&e.to_string()).unwrap();
            let p = params(&[("T", 7.0)]);
            for x in xs {
                let (a, b) = (e.eval_real(x, &p).unwrap(), back.eval_real(x, &p).unwrap());
                prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
            }
        }
    }
}
