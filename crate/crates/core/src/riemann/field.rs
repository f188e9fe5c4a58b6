use nalgebra::DMatrix;

use crate::error::GeomError;
use crate::exprdsl::{eval_expr, parse, Expr};
use crate::jets::{Jet3, Point};

/// Metric coefficients at a point as jets, `entries[i*n + j] = g_ij`.
/// Each entry carries exact first and second partials; third partials are
/// not used by any consumer and may be absent.
#[derive(Debug, Clone)]
pub struct MetricJet {
    n: usize,
    entries: Vec<Jet3>,
}

impl MetricJet {
    /// Wraps a row-major `n×n` array of jets, checking symmetry of values.
    /// The upper triangle is authoritative and mirrored into the lower one.
    pub fn new(n: usize, mut entries: Vec<Jet3>, point: &[f64]) -> Result<Self, GeomError> {
        if entries.len() != n * n {
            return Err(GeomError::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (entries[i * n + j].value(), entries[j * n + i].value());
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(GeomError::AsymmetricMetric { i, j, point: point.to_vec() });
                }
                entries[j * n + i] = entries[i * n + j].clone();
            }
        }
        Ok(Self { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of chart coordinates the entries are differentiated against.
    pub fn chart_dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Jet3 {
        &self.entries[i * self.n + j]
    }

    pub fn value(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).value())
    }

    /// `∂_k g` as a matrix.
    pub fn d1(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).d1(k))
    }

    /// `∂_k ∂_l g` as a matrix.
    pub fn d2(&self, k: usize, l: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).d2(k, l))
    }

    /// The block of rows and columns `idx`.
    pub fn restrict(&self, idx: &[usize]) -> MetricJet {
        let entries = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.entry(i, j).clone()).collect();
        MetricJet { n: idx.len(), entries }
    }
}

/// Anything that yields metric jets on a chart: an explicit coefficient
/// matrix, or the metric induced by an immersion.
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;
    fn metric_jet(&self, x: &Point) -> Result<MetricJet, GeomError>;
}

impl<T: MetricSource + ?Sized> MetricSource for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn metric_jet(&self, x: &Point) -> Result<MetricJet, GeomError> {
        (**self).metric_jet(x)
    }
}

/// A metric given by an `n×n` matrix of expressions over `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    entries: Vec<Expr>,
    params: Vec<f64>,
}

impl MetricField {
    pub fn new(rows: Vec<Vec<Expr>>, params: Vec<f64>) -> Result<Self, GeomError> {
        let n = rows.len();
        if n == 0 {
            return Err(GeomError::Config("metric must have at least one row".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(GeomError::DimensionMismatch { expected: n, found: r.len() });
        }
        let entries: Vec<Expr> = rows.into_iter().flatten().collect();
        if let Some(e) = entries.iter().find(|e| e.max_var() > n) {
            return Err(GeomError::DimensionMismatch { expected: n, found: e.max_var() });
        }
        Ok(Self { dim: n, entries, params })
    }

    /// Parses a matrix of expression strings over `x1..xn` and `p1..pk`.
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>], params: Vec<f64>) -> Result<Self, GeomError> {
        let n = rows.len();
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s.as_ref(), n, params.len())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parsed, params)
    }

    /// Diagonal metric from the given diagonal expressions.
    pub fn diagonal(diag: Vec<Expr>, params: Vec<f64>) -> Result<Self, GeomError> {
        let n = diag.len();
        let mut rows = vec![vec![Expr::num(0.0); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            rows[i][i] = d;
        }
        Self::new(rows, params)
    }

    /// The Euclidean metric on `R^n`.
    pub fn flat(n: usize) -> Self {
        Self::diagonal(vec![Expr::num(1.0); n], vec![]).expect("identity metric is well formed")
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim + j]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    /// True when no entry depends on the coordinates.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| e.max_var() == 0)
    }
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric_jet(&self, x: &Point) -> Result<MetricJet, GeomError> {
        if x.dim() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        let n = self.dim;
        let mut jets: Vec<Jet3> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // Identical off-diagonal ASTs need only one evaluation.
                if j < i && self.entry(i, j) == self.entry(j, i) {
                    let mirrored = jets[j * n + i].clone();
                    jets.push(mirrored);
                } else {
                    jets.push(eval_expr(self.entry(i, j), x, &self.params)?);
                }
            }
        }
        MetricJet::new(n, jets, x.coords())
    }
}
