use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{JetError, Point};

/// Value and partial derivatives through order three of a scalar field at a point.
///
/// `d2` and `d3` are stored densely. Every constructor and operation computes
/// only the canonical entries (`i <= j <= k`) and mirrors them, so the
/// arrays are exactly symmetric, bit for bit.
#[derive(Clone, PartialEq)]
pub struct Jet3 {
    dim: usize,
    value: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl fmt::Debug for Jet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet3")
            .field("dim", &self.dim)
            .field("value", &self.value)
            .field("d1", &self.d1)
            .finish_non_exhaustive()
    }
}

impl Jet3 {
    fn zeros(dim: usize, value: f64) -> Self {
        Self {
            dim,
            value,
            d1: vec![0.0; dim],
            d2: vec![0.0; dim * dim],
            d3: vec![0.0; dim * dim * dim],
        }
    }

    /// The constant `c` in a chart of dimension `dim`.
    pub fn constant(c: f64, dim: usize) -> Result<Self, JetError> {
        if dim == 0 {
            return Err(JetError::InvalidArgument("jet dimension must be at least 1".into()));
        }
        Ok(Self::zeros(dim, c))
    }

    /// The coordinate function `x_i` at `x`.
    pub fn variable(i: usize, x: &Point) -> Result<Self, JetError> {
        let dim = x.dim();
        if i >= dim {
            return Err(JetError::IndexOutOfRange { index: i, dim });
        }
        let mut jet = Self::zeros(dim, x[i]);
        jet.d1[i] = 1.0;
        Ok(jet)
    }

    /// All coordinate functions at `x`, in order.
    pub fn variables(x: &Point) -> Vec<Self> {
        (0..x.dim())
            .map(|i| Self::variable(i, x).expect("index in range"))
            .collect()
    }

    /// Builds a jet from explicit derivative arrays, symmetrising nothing:
    /// callers must hand in symmetric `d2`/`d3`.
    pub fn from_parts(value: f64, d1: Vec<f64>, d2: Vec<f64>, d3: Vec<f64>) -> Result<Self, JetError> {
        let dim = d1.len();
        if dim == 0 {
            return Err(JetError::InvalidArgument("jet dimension must be at least 1".into()));
        }
        if d2.len() != dim * dim || d3.len() != dim * dim * dim {
            return Err(JetError::InvalidArgument("derivative array sizes do not match dimension".into()));
        }
        Ok(Self { dim, value, d1, d2, d3 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.d1[i]
    }

    pub fn gradient(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.d2[i * self.dim + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d3[(i * self.dim + j) * self.dim + k]
    }

    /// Partial derivative indexed by a list of coordinates, e.g. `[0, 0, 1]`
    /// for the third derivative twice in `x_0` and once in `x_1`.
    pub fn partial(&self, multi_index: &[usize]) -> Option<f64> {
        if multi_index.iter().any(|&i| i >= self.dim) {
            return None;
        }
        match *multi_index {
            [] => Some(self.value),
            [i] => Some(self.d1(i)),
            [i, j] => Some(self.d2(i, j)),
            [i, j, k] => Some(self.d3(i, j, k)),
            _ => None,
        }
    }

    /// True when every derivative slot is zero.
    pub fn is_constant(&self) -> bool {
        self.d1.iter().all(|&v| v == 0.0)
            && self.d2.iter().all(|&v| v == 0.0)
            && self.d3.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.d1.iter().all(|v| v.is_finite())
            && self.d2.iter().all(|v| v.is_finite())
            && self.d3.iter().all(|v| v.is_finite())
    }

    /// The jet of `∂_i` of this field. The result is exact through order two;
    /// its third-order slot would need fourth derivatives and is left at zero.
    pub(crate) fn differentiate(&self, i: usize) -> Jet3 {
        let n = self.dim;
        let mut out = Self::zeros(n, self.d1[i]);
        for j in 0..n {
            out.d1[j] = self.d2(i, j);
            for k in 0..n {
                out.d2[j * n + k] = self.d3(i, j, k);
            }
        }
        out
    }

    fn check_dim(&self, other: &Jet3) -> Result<(), JetError> {
        if self.dim != other.dim {
            return Err(JetError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    fn set2(&mut self, i: usize, j: usize, v: f64) {
        let n = self.dim;
        self.d2[i * n + j] = v;
        self.d2[j * n + i] = v;
    }

    fn set3(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.dim;
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            self.d3[(a * n + b) * n + c] = v;
        }
    }

    /// Applies a scalar function `g` given its derivatives `[g, g', g'', g''']`
    /// at `self.value()` (Faà di Bruno through order three).
    pub fn compose(&self, g: [f64; 4]) -> Jet3 {
        let n = self.dim;
        let [g0, g1, g2, g3] = g;
        let mut out = Self::zeros(n, g0);
        for i in 0..n {
            out.d1[i] = g1 * self.d1[i];
        }
        for i in 0..n {
            for j in i..n {
                let v = g1 * self.d2(i, j) + g2 * self.d1[i] * self.d1[j];
                out.set2(i, j, v);
                for k in j..n {
                    let (ui, uj, uk) = (self.d1[i], self.d1[j], self.d1[k]);
                    let v = g1 * self.d3(i, j, k)
                        + g2 * (self.d2(i, j) * uk + self.d2(i, k) * uj + self.d2(j, k) * ui)
                        + g3 * ui * uj * uk;
                    out.set3(i, j, k, v);
                }
            }
        }
        out
    }

    fn product(&self, b: &Jet3) -> Jet3 {
        let a = self;
        let n = a.dim;
        let mut out = Self::zeros(n, a.value * b.value);
        for i in 0..n {
            out.d1[i] = a.d1[i] * b.value + a.value * b.d1[i];
        }
        for i in 0..n {
            for j in i..n {
                let v = a.d2(i, j) * b.value
                    + a.d1[i] * b.d1[j]
                    + a.d1[j] * b.d1[i]
                    + a.value * b.d2(i, j);
                out.set2(i, j, v);
                for k in j..n {
                    let v = a.d3(i, j, k) * b.value
                        + a.d2(i, j) * b.d1[k]
                        + a.d2(i, k) * b.d1[j]
                        + a.d2(j, k) * b.d1[i]
                        + a.d1[i] * b.d2(j, k)
                        + a.d1[j] * b.d2(i, k)
                        + a.d1[k] * b.d2(i, j)
                        + a.value * b.d3(i, j, k);
                    out.set3(i, j, k, v);
                }
            }
        }
        out
    }

    fn zip(&self, other: &Jet3, f: impl Fn(f64, f64) -> f64) -> Jet3 {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
        Jet3 {
            dim: self.dim,
            value: f(self.value, other.value),
            d1: self.d1.iter().zip(&other.d1).map(|(a, b)| f(*a, *b)).collect(),
            d2: self.d2.iter().zip(&other.d2).map(|(a, b)| f(*a, *b)).collect(),
            d3: self.d3.iter().zip(&other.d3).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        Jet3 {
            dim: self.dim,
            value: c * self.value,
            d1: self.d1.iter().map(|v| c * v).collect(),
            d2: self.d2.iter().map(|v| c * v).collect(),
            d3: self.d3.iter().map(|v| c * v).collect(),
        }
    }

    pub fn recip(&self) -> Result<Jet3, JetError> {
        let t = self.value;
        if t == 0.0 || !t.is_finite() {
            return Err(JetError::Domain { op: "/", value: t });
        }
        let r = 1.0 / t;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn checked_div(&self, other: &Jet3) -> Result<Jet3, JetError> {
        self.check_dim(other)?;
        if other.is_constant() {
            if other.value == 0.0 {
                return Err(JetError::Domain { op: "/", value: 0.0 });
            }
            return Ok(self.scale(1.0 / other.value));
        }
        Ok(self.product(&other.recip()?))
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Jet3, JetError> {
        let t = self.value;
        if !(t > 0.0) {
            return Err(JetError::Domain { op: "ln", value: t });
        }
        let r = 1.0 / t;
        Ok(self.compose([t.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn sqrt(&self) -> Result<Jet3, JetError> {
        let t = self.value;
        if !(t > 0.0) {
            return Err(JetError::Domain { op: "sqrt", value: t });
        }
        let s = t.sqrt();
        let r = 1.0 / t;
        Ok(self.compose([s, 0.5 / s, -0.25 * r / s, 0.375 * r * r / s]))
    }

    /// `self^p` for a constant exponent. Integer exponents accept any base
    /// (negative exponents still reject zero); other exponents need a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet3, JetError> {
        let t = self.value;
        if p == 0.0 {
            return Ok(Self::zeros(self.dim, 1.0));
        }
        let integral = p.fract() == 0.0 && p.abs() < i32::MAX as f64;
        if integral {
            let k = p as i32;
            if t == 0.0 && k < 0 {
                return Err(JetError::Domain { op: "^", value: t });
            }
            let pw = |e: i32| -> f64 {
                if t == 0.0 && e < 0 {
                    0.0
                } else {
                    t.powi(e)
                }
            };
            let g1 = p * pw(k - 1);
            let g2 = p * (p - 1.0) * pw(k - 2);
            let g3 = p * (p - 1.0) * (p - 2.0) * pw(k - 3);
            return Ok(self.compose([pw(k), g1, g2, g3]));
        }
        if !(t > 0.0) {
            return Err(JetError::Domain { op: "^", value: t });
        }
        Ok(self.compose([
            t.powf(p),
            p * t.powf(p - 1.0),
            p * (p - 1.0) * t.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0),
        ]))
    }

    /// General power. A constant exponent goes through [`Jet3::powf`];
    /// otherwise `exp(b ln a)`, which needs a positive base.
    pub fn pow(&self, exponent: &Jet3) -> Result<Jet3, JetError> {
        self.check_dim(exponent)?;
        if exponent.is_constant() {
            return self.powf(exponent.value);
        }
        if !(self.value > 0.0) {
            return Err(JetError::Domain { op: "^", value: self.value });
        }
        Ok((exponent * &self.ln()?).exp())
    }
}

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        self.product(rhs)
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: Jet3) -> Jet3 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        (&self).neg()
    }
}

/// The arithmetic vocabulary shared by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl JetOp {
    pub fn arity(self) -> usize {
        match self {
            JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div | JetOp::Pow => 2,
            _ => 1,
        }
    }
}

/// Applies `op` to `args`, checking arity, dimensions and domains.
pub fn jet_arith(op: JetOp, args: &[&Jet3]) -> Result<Jet3, JetError> {
    if args.len() != op.arity() {
        return Err(JetError::InvalidArgument(format!(
            "{op:?} takes {} argument(s), got {}",
            op.arity(),
            args.len()
        )));
    }
    if let [a, b] = args {
        a.check_dim(b)?;
    }
    let a = args[0];
    match op {
        JetOp::Add => Ok(a + args[1]),
        JetOp::Sub => Ok(a - args[1]),
        JetOp::Mul => Ok(a * args[1]),
        JetOp::Div => a.checked_div(args[1]),
        JetOp::Pow => a.pow(args[1]),
        JetOp::Neg => Ok(-a),
        JetOp::Sin => Ok(a.sin()),
        JetOp::Cos => Ok(a.cos()),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Ln => a.ln(),
        JetOp::Sqrt => a.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn constants_have_no_derivatives() {
        let j = Jet3::constant(5.0, 2).unwrap();
        assert_eq!(j.value(), 5.0);
        assert_eq!(j.gradient(), &[0.0, 0.0]);
        assert!(Jet3::constant(0.0, 3).unwrap().is_constant());
        let j = Jet3::constant(-1.5, 1).unwrap();
        assert_eq!((j.value(), j.d1(0)), (-1.5, 0.0));
        assert!(matches!(Jet3::constant(1.0, 0), Err(JetError::InvalidArgument(_))));
    }

    #[test]
    fn coordinate_functions() {
        let x = pt(&[2.0, 3.0]);
        let a = Jet3::variable(0, &x).unwrap();
        let b = Jet3::variable(1, &x).unwrap();
        assert_eq!((a.value(), a.gradient()), (2.0, &[1.0, 0.0][..]));
        assert_eq!((b.value(), b.gradient()), (3.0, &[0.0, 1.0][..]));
        let origin = pt(&[0.0, 0.0]);
        assert_eq!(
            Jet3::variable(2, &origin),
            Err(JetError::IndexOutOfRange { index: 2, dim: 2 })
        );
    }

    #[test]
    fn bilinear_product() {
        let x = pt(&[2.0, 3.0]);
        let p = &Jet3::variable(0, &x).unwrap() * &Jet3::variable(1, &x).unwrap();
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.gradient(), &[3.0, 2.0]);
        assert_eq!(p.d2(0, 1), 1.0);
        assert_eq!(p.d2(1, 0), 1.0);
        assert_eq!(p.d2(0, 0), 0.0);
    }

    #[test]
    fn sine_at_zero() {
        let s = Jet3::variable(0, &pt(&[0.0])).unwrap().sin();
        assert_eq!((s.value(), s.d1(0), s.d2(0, 0), s.d3(0, 0, 0)), (0.0, 1.0, -0.0, -1.0));
    }

    #[test]
    fn exp_at_one() {
        let e = Jet3::variable(0, &pt(&[1.0])).unwrap().exp();
        let c = std::f64::consts::E;
        for v in [e.value(), e.d1(0), e.d2(0, 0), e.d3(0, 0, 0)] {
            assert!((v - c).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_errors_name_the_operation() {
        let z = Jet3::variable(0, &pt(&[0.0])).unwrap();
        assert_eq!(z.ln(), Err(JetError::Domain { op: "ln", value: 0.0 }));
        assert_eq!(z.sqrt(), Err(JetError::Domain { op: "sqrt", value: 0.0 }));
        let one = Jet3::constant(1.0, 1).unwrap();
        assert_eq!(one.checked_div(&z), Err(JetError::Domain { op: "/", value: 0.0 }));
        assert!(z.powf(-1.0).is_err());
        assert!(z.powf(0.5).is_err());
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let x = Jet3::variable(0, &pt(&[-2.0])).unwrap();
        let c = x.powf(3.0).unwrap();
        assert_eq!((c.value(), c.d1(0), c.d2(0, 0), c.d3(0, 0, 0)), (-8.0, 12.0, -12.0, 6.0));
        let z = Jet3::variable(0, &pt(&[0.0])).unwrap().powf(2.0).unwrap();
        assert_eq!((z.value(), z.d1(0), z.d2(0, 0), z.d3(0, 0, 0)), (0.0, 0.0, 2.0, 0.0));
    }

    #[test]
    fn variable_exponent_matches_closed_form() {
        // x^y at (2, 3): d/dx = y x^(y-1) = 12, d/dy = x^y ln x = 8 ln 2
        let x = pt(&[2.0, 3.0]);
        let a = Jet3::variable(0, &x).unwrap();
        let b = Jet3::variable(1, &x).unwrap();
        let p = a.pow(&b).unwrap();
        assert!((p.value() - 8.0).abs() < 1e-13);
        assert!((p.d1(0) - 12.0).abs() < 1e-12);
        assert!((p.d1(1) - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn arith_checks_arity_and_dims() {
        let a = Jet3::constant(1.0, 1).unwrap();
        let b = Jet3::constant(1.0, 2).unwrap();
        assert!(matches!(jet_arith(JetOp::Add, &[&a]), Err(JetError::InvalidArgument(_))));
        assert_eq!(
            jet_arith(JetOp::Add, &[&a, &b]),
            Err(JetError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn differentiate_shifts_orders() {
        let x = pt(&[1.5, -0.5]);
        let u = Jet3::variable(0, &x).unwrap();
        let v = Jet3::variable(1, &x).unwrap();
        let f = &(&u * &u) * &v.sin();
        let du = f.differentiate(0);
        assert_eq!(du.value(), f.d1(0));
        assert_eq!(du.d1(1), f.d2(0, 1));
        assert_eq!(du.d2(0, 1), f.d3(0, 0, 1));
    }
}
