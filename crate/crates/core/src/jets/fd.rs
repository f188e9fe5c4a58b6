use super::{DomainBox, JetError};

/// Default central-difference step for a derivative of the given order:
/// `1e-4` for orders one and two, `1e-2` for order three.
pub fn default_step(order: usize) -> f64 {
    if order >= 3 {
        1e-2
    } else {
        1e-4
    }
}

/// One-dimensional central stencil `(offset, weight)` for the `order`-th
/// derivative, all with truncation error O(h²).
fn stencil(order: usize, h: f64) -> Vec<(f64, f64)> {
    match order {
        0 => vec![(0.0, 1.0)],
        1 => vec![(-1.0, -0.5 / h), (1.0, 0.5 / h)],
        2 => {
            let w = 1.0 / (h * h);
            vec![(-1.0, w), (0.0, -2.0 * w), (1.0, w)]
        }
        _ => {
            let w = 1.0 / (h * h * h);
            vec![(-2.0, -0.5 * w), (-1.0, w), (1.0, -w), (2.0, 0.5 * w)]
        }
    }
}

/// Central finite-difference estimate of the partial derivative of `field` at
/// `x` named by `multi_index` (a list of coordinate indices, order 1 to 3).
///
/// Mixed partials use the tensor product of the per-axis stencils, so every
/// estimate is second-order accurate in `step`. When `domain` is given, every
/// stencil node must lie inside it.
pub fn fd_partial(
    field: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    multi_index: &[usize],
    step: f64,
    domain: Option<&DomainBox>,
) -> Result<f64, JetError> {
    if !(step > 0.0) {
        return Err(JetError::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if multi_index.is_empty() || multi_index.len() > 3 {
        return Err(JetError::InvalidArgument(format!(
            "derivative order must be 1..=3, got {}",
            multi_index.len()
        )));
    }
    if let Some(&i) = multi_index.iter().find(|&&i| i >= x.len()) {
        return Err(JetError::IndexOutOfRange { index: i, dim: x.len() });
    }
    let mut counts = vec![0usize; x.len()];
    for &i in multi_index {
        counts[i] += 1;
    }
    let axes: Vec<(usize, Vec<(f64, f64)>)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(a, &c)| (a, stencil(c, step)))
        .collect();

    let mut total = 0.0;
    let mut idx = vec![0usize; axes.len()];
    let mut node = x.to_vec();
    loop {
        let mut w = 1.0;
        node.copy_from_slice(x);
        for ((axis, st), &k) in axes.iter().zip(&idx) {
            node[*axis] += st[k].0 * step;
            w *= st[k].1;
        }
        if let Some(d) = domain {
            if !d.contains(&node) {
                return Err(JetError::StencilOutsideDomain { point: node });
            }
        }
        total += w * field(&node);

        // odometer over the tensor-product stencil
        let mut p = 0;
        loop {
            if p == idx.len() {
                return Ok(total);
            }
            idx[p] += 1;
            if idx[p] < axes[p].1.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivative_of_square() {
        let d = fd_partial(&|x| x[0] * x[0], &[3.0], &[0], 1e-4, None).unwrap();
        assert!((d - 6.0).abs() < 1e-6);
    }

    #[test]
    fn second_derivative_of_constant() {
        let d = fd_partial(&|_| 4.2, &[0.3], &[0, 0], 1e-4, None).unwrap();
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn third_derivative_of_cube() {
        for x in [-1.3, 0.0, 2.5] {
            let d = fd_partial(&|x| x[0].powi(3), &[x], &[0, 0, 0], 1e-2, None).unwrap();
            assert!((d - 6.0).abs() < 1e-3, "{d}");
        }
    }

    #[test]
    fn mixed_partials() {
        // f = x^2 y^3: f_xy = 6 x y^2, f_xyy = 12 x y
        let f = |x: &[f64]| x[0] * x[0] * x[1].powi(3);
        let d = fd_partial(&f, &[1.0, 2.0], &[0, 1], 1e-4, None).unwrap();
        assert!((d - 24.0).abs() < 1e-5);
        let d = fd_partial(&f, &[1.0, 2.0], &[1, 0, 1], 1e-2, None).unwrap();
        assert!((d - 24.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_requests() {
        let f = |x: &[f64]| x[0];
        assert!(fd_partial(&f, &[0.0], &[0], 0.0, None).is_err());
        assert!(fd_partial(&f, &[0.0], &[], 1e-4, None).is_err());
        assert!(fd_partial(&f, &[0.0], &[0, 0, 0, 0], 1e-4, None).is_err());
        let b = DomainBox::new(vec![0.0], vec![1.0], vec![]).unwrap();
        assert!(matches!(
            fd_partial(&f, &[0.0], &[0], 1e-4, Some(&b)),
            Err(JetError::StencilOutsideDomain { .. })
        ));
    }
}
