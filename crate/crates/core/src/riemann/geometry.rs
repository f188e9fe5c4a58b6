use nalgebra::{Cholesky, DMatrix, DVector};

use super::{MetricJet, MetricSource};
use crate::error::GeomError;
use crate::jets::{Jet3, Point};

/// Relative residual below which Gram–Schmidt declares a seed dependent.
const PIVOT_THRESHOLD: f64 = 1e-12;

/// Vectors orthonormal against a metric at a point, in chart components.
#[derive(Debug, Clone)]
pub struct OrthoFrame {
    pub point: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
    pub metric: DMatrix<f64>,
}

impl OrthoFrame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Frame vectors as the columns of a matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.metric.nrows();
        DMatrix::from_fn(n, self.vectors.len(), |i, j| self.vectors[j][i])
    }

    /// `max |g(e_i, e_j) − δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let e = self.matrix();
        let gram = e.transpose() * &self.metric * &e;
        let k = gram.nrows();
        (gram - DMatrix::identity(k, k)).abs().max()
    }
}

/// Modified Gram–Schmidt with one re-orthogonalisation pass, against the
/// inner product `metric`, starting from the already orthonormal `basis`.
pub(crate) fn gram_schmidt(
    metric: &DMatrix<f64>,
    basis: &[DVector<f64>],
    seeds: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, GeomError> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(seeds.len());
    for (index, seed) in seeds.iter().enumerate() {
        let seed_norm = seed.dot(&(metric * seed)).max(0.0).sqrt();
        let mut v = seed.clone();
        for _ in 0..2 {
            for e in basis.iter().chain(&out) {
                let c = v.dot(&(metric * e));
                v.axpy(-c, e, 1.0);
            }
        }
        let norm = v.dot(&(metric * &v)).max(0.0).sqrt();
        if !(norm > PIVOT_THRESHOLD * seed_norm) || norm == 0.0 {
            return Err(GeomError::DependentVectors { index });
        }
        out.push(v / norm);
    }
    Ok(out)
}

/// Like [`gram_schmidt`] but skips seeds whose relative residual falls below
/// `rel_tol`, stopping once `want` vectors are found.
pub(crate) fn gram_schmidt_skipping(
    metric: &DMatrix<f64>,
    basis: &[DVector<f64>],
    seeds: &[DVector<f64>],
    want: usize,
    rel_tol: f64,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(want);
    for seed in seeds {
        if out.len() == want {
            break;
        }
        let seed_norm = seed.dot(&(metric * seed)).max(0.0).sqrt();
        let v = residual(metric, basis.iter().chain(&out), seed);
        let norm = v.dot(&(metric * &v)).max(0.0).sqrt();
        if norm > rel_tol * seed_norm && norm > 0.0 {
            out.push(v / norm);
        }
    }
    out
}

/// Completes `basis` (orthonormal against `metric`) with `count` further
/// vectors chosen from the coordinate axes, taking at each step the axis
/// with the largest residual (lowest index on ties).
pub(crate) fn complete_by_pivoting(metric: &DMatrix<f64>, basis: &[DVector<f64>], count: usize) -> Vec<DVector<f64>> {
    let dim = metric.nrows();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for i in 0..dim {
            let v = residual(metric, basis.iter().chain(&out), &unit(dim, i));
            let norm = v.dot(&(metric * &v)).max(0.0).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        match best {
            Some((norm, v)) if norm > 0.0 => out.push(v / norm),
            _ => break,
        }
    }
    out
}

/// `seed` minus its projections onto the orthonormal `basis`, applied twice.
fn residual<'a>(metric: &DMatrix<f64>, basis: impl Iterator<Item = &'a DVector<f64>> + Clone, seed: &DVector<f64>) -> DVector<f64> {
    let mut v = seed.clone();
    for _ in 0..2 {
        for e in basis.clone() {
            let c = v.dot(&(metric * e));
            v.axpy(-c, e, 1.0);
        }
    }
    v
}

/// Connection and curvature of a metric at one point.
///
/// Metric index `i` is differentiated along chart coordinate `coords[i]`,
/// which lets a block of a larger metric (a leaf of a warped product) be
/// treated as a metric in its own right.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    n: usize,
    coords: Vec<usize>,
    point: Vec<f64>,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    /// `Γ^k_ij` at `[k][i][j]`.
    gamma: Vec<f64>,
    /// `g(R(∂i,∂j)∂k, ∂l)` at `[i][j][k][l]`.
    riem: Vec<f64>,
}

impl PointGeometry {
    pub fn at(source: &dyn MetricSource, x: &Point) -> Result<Self, GeomError> {
        let mj = source.metric_jet(x)?;
        let coords: Vec<usize> = (0..mj.dim()).collect();
        Self::from_jet(&mj, &coords, x.coords())
    }

    pub fn from_jet(mj: &MetricJet, coords: &[usize], point: &[f64]) -> Result<Self, GeomError> {
        let n = mj.dim();
        if coords.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, found: coords.len() });
        }
        let g = mj.value();
        let chol = Cholesky::new(g.clone()).ok_or_else(|| GeomError::DegenerateMetric { point: point.to_vec() })?;
        let ginv = chol.inverse();
        if !ginv.iter().all(|v| v.is_finite()) {
            return Err(GeomError::DegenerateMetric { point: point.to_vec() });
        }

        let dg: Vec<DMatrix<f64>> = coords.iter().map(|&c| mj.d1(c)).collect();
        let ddg: Vec<Vec<DMatrix<f64>>> =
            coords.iter().map(|&a| coords.iter().map(|&b| mj.d2(a, b)).collect()).collect();
        let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&ginv * d * &ginv)).collect();

        let i3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        // Γ_{l,ij} (first kind) and its derivatives ∂_m Γ_{l,ij}.
        let mut first = vec![0.0; n * n * n];
        let mut dfirst = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first[i3(l, i, j)] = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    for m in 0..n {
                        dfirst[m * n * n * n + i3(l, i, j)] =
                            0.5 * (ddg[m][i][(j, l)] + ddg[m][j][(i, l)] - ddg[m][l][(i, j)]);
                    }
                }
            }
        }
        let mut gamma = vec![0.0; n * n * n];
        let mut dgamma = vec![0.0; n * n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * first[i3(l, i, j)];
                    }
                    gamma[i3(k, i, j)] = s;
                    for m in 0..n {
                        let mut d = 0.0;
                        for l in 0..n {
                            d += dginv[m][(k, l)] * first[i3(l, i, j)]
                                + ginv[(k, l)] * dfirst[m * n * n * n + i3(l, i, j)];
                        }
                        dgamma[m * n * n * n + i3(k, i, j)] = d;
                    }
                }
            }
        }

        // R^l_kij = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik
        let mut upper = vec![0.0; n * n * n * n];
        let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut s = dgamma[i * n * n * n + i3(l, j, k)] - dgamma[j * n * n * n + i3(l, i, k)];
                        for m in 0..n {
                            s += gamma[i3(l, i, m)] * gamma[i3(m, j, k)] - gamma[i3(l, j, m)] * gamma[i3(m, i, k)];
                        }
                        upper[i4(l, k, i, j)] = s;
                    }
                }
            }
        }
        let mut riem = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for q in 0..n {
                            s += g[(l, q)] * upper[i4(q, k, i, j)];
                        }
                        riem[i4(i, j, k, l)] = s;
                    }
                }
            }
        }

        Ok(Self { n, coords: coords.to_vec(), point: point.to_vec(), g, ginv, gamma, riem })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.ginv
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    /// `Γ(u, v)^k = Γ^k_ij u^i v^j`.
    pub fn christoffel_apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.christoffel(k, i, j) * u[i] * v[j];
                }
            }
            s
        })
    }

    /// Coordinate component `g(R(∂i,∂j)∂k, ∂l)`.
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riem[((i * self.n + j) * self.n + k) * self.n + l]
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.g * v))
    }

    /// `R(X,Y,Z,W) = g(R(X,Y)Z, W)`.
    pub fn curvature(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let xyz = xy * z[k];
                    if xyz == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        s += xyz * w[l] * self.riemann(i, j, k, l);
                    }
                }
            }
        }
        s
    }

    /// `K(X∧Y) = R(X,Y,Y,X) / (g(X,X)g(Y,Y) − g(X,Y)²)`.
    pub fn sectional(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, GeomError> {
        let gram = self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2);
        if !(gram > 1e-12) {
            return Err(GeomError::DegeneratePlane { gram });
        }
        Ok(self.curvature(x, y, y, x) / gram)
    }

    /// `Σ_{i<j} K(e_i ∧ e_j)` over a coordinate-seeded orthonormal frame.
    pub fn scalar_curvature(&self) -> Result<f64, GeomError> {
        let frame = self.orthonormal_frame(None)?;
        Ok(frame_pair_sum(self, &frame.vectors, &frame.vectors, true))
    }

    fn chart_d1(&self, psi: &Jet3) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| psi.d1(self.coords[i]))
    }

    pub fn gradient(&self, psi: &Jet3) -> DVector<f64> {
        &self.ginv * self.chart_d1(psi)
    }

    pub fn grad_norm_sq(&self, psi: &Jet3) -> f64 {
        let d = self.chart_d1(psi);
        d.dot(&(&self.ginv * &d))
    }

    /// Geometer's Laplacian `−g^{ij}(∂_ij ψ − Γ^k_ij ∂_k ψ)`.
    pub fn laplacian(&self, psi: &Jet3) -> f64 {
        let n = self.n;
        let d1 = self.chart_d1(psi);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut hess = psi.d2(self.coords[i], self.coords[j]);
                for k in 0..n {
                    hess -= self.christoffel(k, i, j) * d1[k];
                }
                s += self.ginv[(i, j)] * hess;
            }
        }
        -s
    }

    /// Gram–Schmidt over `seeds` (coordinate vectors when `None`),
    /// preserving the flag of spans.
    pub fn orthonormal_frame(&self, seeds: Option<&[DVector<f64>]>) -> Result<OrthoFrame, GeomError> {
        let coordinate: Vec<DVector<f64>>;
        let seeds = match seeds {
            Some(s) => s,
            None => {
                coordinate = (0..self.n).map(|i| unit(self.n, i)).collect();
                &coordinate
            }
        };
        if let Some(s) = seeds.iter().find(|s| s.len() != self.n) {
            return Err(GeomError::DimensionMismatch { expected: self.n, found: s.len() });
        }
        let vectors = gram_schmidt(&self.g, &[], seeds)?;
        Ok(OrthoFrame { point: self.point.clone(), vectors, metric: self.g.clone() })
    }

    /// Largest violation of the algebraic curvature symmetries: the two
    /// antisymmetries, pair symmetry and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let r = |i, j, k, l| self.riemann(i, j, k, l);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = r(i, j, k, l);
                        worst = worst
                            .max((v + r(j, i, k, l)).abs())
                            .max((v + r(i, j, l, k)).abs())
                            .max((v - r(k, l, i, j)).abs())
                            .max((v + r(j, k, i, l) + r(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `Σ K(u_a ∧ v_b)` over pairs of orthonormal vectors; with `distinct`,
/// `us` and `vs` are the same list and only pairs `a < b` are counted.
pub(crate) fn frame_pair_sum(geo: &PointGeometry, us: &[DVector<f64>], vs: &[DVector<f64>], distinct: bool) -> f64 {
    let mut s = 0.0;
    for (a, u) in us.iter().enumerate() {
        for (b, v) in vs.iter().enumerate() {
            if distinct && b <= a {
                continue;
            }
            s += geo.curvature(u, v, v, u);
        }
    }
    s
}

pub(crate) fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}
