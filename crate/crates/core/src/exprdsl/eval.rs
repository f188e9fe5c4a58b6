use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func, Span};
use crate::jets::{Jet3, JetError, Point};

/// An evaluation failure, located at the sub-expression that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} (at bytes {}..{})", span.start, span.end)]
pub struct EvalError {
    pub span: Span,
    pub source: JetError,
}

fn at(e: &Expr) -> impl Fn(JetError) -> EvalError + '_ {
    move |source| EvalError { span: e.span.clone(), source }
}

/// Jet of `e` at `x`, treating `x_i` as the `i`-th coordinate function.
pub fn eval_expr(e: &Expr, x: &Point, params: &[f64]) -> Result<Jet3, EvalError> {
    eval_with(e, &Jet3::variables(x), params)
}

/// Jet of `e` with `x_i` bound to `vars[i-1]`. Binding the variables to the
/// jets of other fields evaluates the composition, so an ambient metric can
/// be pulled back along an immersion.
pub fn eval_with(e: &Expr, vars: &[Jet3], params: &[f64]) -> Result<Jet3, EvalError> {
    let Some(first) = vars.first() else {
        return Err(at(e)(JetError::InvalidArgument("no variable jets supplied".into())));
    };
    eval_jet(e, vars, params, first.dim())
}

fn eval_jet(e: &Expr, vars: &[Jet3], params: &[f64], dim: usize) -> Result<Jet3, EvalError> {
    let err = at(e);
    match &e.kind {
        ExprKind::Num(v) => Jet3::constant(*v, dim).map_err(err),
        ExprKind::Var(i) => vars
            .get(i - 1)
            .cloned()
            .ok_or(JetError::IndexOutOfRange { index: *i, dim: vars.len() })
            .map_err(err),
        ExprKind::Param(i) => {
            let v = param(params, *i).map_err(&err)?;
            Jet3::constant(v, dim).map_err(err)
        }
        ExprKind::Neg(a) => Ok(-eval_jet(a, vars, params, dim)?),
        ExprKind::Binary(op, a, b) => {
            let a = eval_jet(a, vars, params, dim)?;
            let b = eval_jet(b, vars, params, dim)?;
            match op {
                BinOp::Add => Ok(&a + &b),
                BinOp::Sub => Ok(&a - &b),
                BinOp::Mul => Ok(&a * &b),
                BinOp::Div => a.checked_div(&b).map_err(err),
                BinOp::Pow => a.pow(&b).map_err(err),
            }
        }
        ExprKind::Call(f, a) => {
            let a = eval_jet(a, vars, params, dim)?;
            match f {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Exp => Ok(a.exp()),
                Func::Ln => a.ln().map_err(err),
                Func::Sqrt => a.sqrt().map_err(err),
            }
        }
    }
}

fn param(params: &[f64], i: usize) -> Result<f64, JetError> {
    params.get(i - 1).copied().ok_or(JetError::IndexOutOfRange { index: i, dim: params.len() })
}

/// Plain value of `e` at `x`, with no derivatives. This is the function the
/// finite-difference oracle samples, so it shares nothing with the jet path
/// beyond the tree itself.
pub fn eval_value(e: &Expr, x: &[f64], params: &[f64]) -> Result<f64, EvalError> {
    let err = at(e);
    let v = match &e.kind {
        ExprKind::Num(v) => *v,
        ExprKind::Var(i) => *x.get(i - 1).ok_or(JetError::IndexOutOfRange { index: *i, dim: x.len() }).map_err(err)?,
        ExprKind::Param(i) => param(params, *i).map_err(err)?,
        ExprKind::Neg(a) => -eval_value(a, x, params)?,
        ExprKind::Binary(op, a, b) => {
            let a = eval_value(a, x, params)?;
            let b = eval_value(b, x, params)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return Err(err(JetError::Domain { op: "/", value: b })),
                BinOp::Div => a / b,
                BinOp::Pow => {
                    let integral = b.fract() == 0.0;
                    if (integral && a == 0.0 && b < 0.0) || (!integral && !(a > 0.0)) {
                        return Err(err(JetError::Domain { op: "^", value: a }));
                    }
                    a.powf(b)
                }
            }
        }
        ExprKind::Call(f, a) => {
            let a = eval_value(a, x, params)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Ln if !(a > 0.0) => return Err(err(JetError::Domain { op: "ln", value: a })),
                Func::Ln => a.ln(),
                Func::Sqrt if a < 0.0 => return Err(err(JetError::Domain { op: "sqrt", value: a })),
                Func::Sqrt => a.sqrt(),
            }
        }
    };
    Ok(v)
}
