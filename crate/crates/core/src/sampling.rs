//! Deterministic low-discrepancy sampling of a [`DomainBox`].

use crate::jets::{DomainBox, JetError};

/// Prime bases for the Halton coordinates, one per axis.
const BASES: [u8; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Candidates tried per requested point before giving up on a domain whose
/// exclusions swallow almost everything.
const MAX_TRIES_PER_POINT: usize = 10_000;

/// `count` points of the Halton sequence mapped affinely onto the box,
/// skipping excluded candidates. The sequence starts at index `seed + 1`,
/// so the order of the returned points is fixed by the Halton index.
pub fn halton_points(domain: &DomainBox, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, JetError> {
    domain.validate()?;
    let dim = domain.dim();
    if dim > BASES.len() {
        return Err(JetError::InvalidArgument(format!("Halton sampling supports at most {} axes", BASES.len())));
    }
    let start = usize::try_from(seed)
        .ok()
        .and_then(|s| s.checked_add(1))
        .ok_or_else(|| JetError::InvalidArgument("seed too large".into()))?;
    let mut out = Vec::with_capacity(count);
    let budget = count.saturating_mul(MAX_TRIES_PER_POINT).max(MAX_TRIES_PER_POINT);
    for index in (start..).take(budget) {
        if out.len() == count {
            break;
        }
        let x: Vec<f64> = (0..dim)
            .map(|k| {
                let u = halton::number(BASES[k], index);
                domain.lower[k] + u * (domain.upper[k] - domain.lower[k])
            })
            .collect();
        if domain.contains(&x) {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(JetError::InvalidArgument(format!("only {} of {count} sample points fall inside the domain", out.len())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Exclusion;

    #[test]
    fn first_points_of_unit_square() {
        let b = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![]).unwrap();
        let p = halton_points(&b, 3, 0).unwrap();
        assert_eq!(p, vec![vec![0.5, 1.0 / 3.0], vec![0.25, 2.0 / 3.0], vec![0.75, 1.0 / 9.0]]);
        // The seed shifts the start of the sequence.
        assert_eq!(halton_points(&b, 2, 1).unwrap(), p[1..].to_vec());
    }

    #[test]
    fn exclusions_are_respected() {
        let tube = Exclusion { axes: vec![0, 1], center: vec![0.0, 0.0], radius: 0.5 };
        let b = DomainBox::new(vec![-1.0, -1.0, 0.0], vec![1.0, 1.0, 1.0], vec![tube.clone()]).unwrap();
        let p = halton_points(&b, 200, 42).unwrap();
        assert!(p.iter().all(|x| b.contains(x) && !tube.excludes(x)));
    }

    #[test]
    fn swallowed_domain_errors() {
        let ball = Exclusion { axes: vec![], center: vec![0.0], radius: 0.999_999_9 };
        let b = DomainBox::new(vec![-1.0], vec![1.0], vec![ball]).unwrap();
        assert!(halton_points(&b, 5, 0).is_err());
    }
}
