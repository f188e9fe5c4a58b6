use std::fmt;
use std::ops::Range;

/// Byte range of a node in its source text.
pub type Span = Range<usize>;

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
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    /// Chart coordinate, 1-based as written (`x1` is `Var(1)`).
    Var(usize),
    /// Parameter, 1-based as written (`p1` is `Param(1)`).
    Param(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Expression tree. Equality ignores source spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn num(v: f64) -> Self {
        Self::new(ExprKind::Num(v), 0..0)
    }

    pub fn var(i: usize) -> Self {
        Self::new(ExprKind::Var(i), 0..0)
    }

    pub fn param(i: usize) -> Self {
        Self::new(ExprKind::Param(i), 0..0)
    }

    pub fn neg(e: Expr) -> Self {
        Self::new(ExprKind::Neg(Box::new(e)), 0..0)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::Binary(op, Box::new(a), Box::new(b)), 0..0)
    }

    pub fn call(f: Func, a: Expr) -> Self {
        Self::new(ExprKind::Call(f, Box::new(a)), 0..0)
    }

    /// Largest variable index referenced (0 when the expression has none).
    pub fn max_var(&self) -> usize {
        match &self.kind {
            ExprKind::Var(i) => *i,
            ExprKind::Num(_) | ExprKind::Param(_) => 0,
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.max_var(),
            ExprKind::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Same expression with every `x_i` renamed to `x_{i+offset}`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        let kind = match &self.kind {
            ExprKind::Var(i) => ExprKind::Var(i + offset),
            ExprKind::Num(v) => ExprKind::Num(*v),
            ExprKind::Param(p) => ExprKind::Param(*p),
            ExprKind::Neg(a) => ExprKind::Neg(Box::new(a.shift_vars(offset))),
            ExprKind::Call(f, a) => ExprKind::Call(*f, Box::new(a.shift_vars(offset))),
            ExprKind::Binary(op, a, b) => {
                ExprKind::Binary(*op, Box::new(a.shift_vars(offset)), Box::new(b.shift_vars(offset)))
            }
        };
        Expr::new(kind, self.span.clone())
    }

    /// True for a literal number (after peeling unary minus).
    pub fn as_number(&self) -> Option<f64> {
        match &self.kind {
            ExprKind::Num(v) => Some(*v),
            ExprKind::Neg(a) => a.as_number().map(|v| -v),
            _ => None,
        }
    }
}

/// Fully parenthesised rendering; re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Var(i) => write!(f, "x{i}"),
            ExprKind::Param(i) => write!(f, "p{i}"),
            ExprKind::Neg(a) => write!(f, "(-{a})"),
            ExprKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
