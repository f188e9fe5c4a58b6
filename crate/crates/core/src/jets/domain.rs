use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::JetError;

/// Chart coordinates of a point; always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, JetError> {
        if coords.is_empty() {
            return Err(JetError::InvalidArgument("point has no coordinates".into()));
        }
        if let Some(v) = coords.iter().find(|v| !v.is_finite()) {
            return Err(JetError::InvalidArgument(format!("non-finite coordinate {v}")));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A ball removed from a [`DomainBox`], measured in the coordinates listed in
/// `axes` (all coordinates when `axes` is empty). Restricting the axes turns
/// the ball into a tube, which is how a singular axis such as `r = 0` is cut out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    #[serde(default)]
    pub axes: Vec<usize>,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Exclusion {
    fn axes(&self, dim: usize) -> Vec<usize> {
        if self.axes.is_empty() {
            (0..dim).collect()
        } else {
            self.axes.clone()
        }
    }

    pub fn excludes(&self, x: &[f64]) -> bool {
        let axes = self.axes(x.len());
        let d2: f64 = axes
            .iter()
            .zip(&self.center)
            .map(|(&a, c)| (x[a] - c).powi(2))
            .sum();
        d2 < self.radius * self.radius
    }
}

/// Product of closed coordinate intervals minus excluded balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub exclude: Vec<Exclusion>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, exclude: Vec<Exclusion>) -> Result<Self, JetError> {
        let b = Self { lower, upper, exclude };
        b.validate()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<(), JetError> {
        let n = self.lower.len();
        if n == 0 || self.upper.len() != n {
            return Err(JetError::InvalidArgument("box bounds must be non-empty and of equal length".into()));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(JetError::InvalidArgument(format!("empty interval on axis {i}: [{lo}, {hi}]")));
            }
        }
        for e in &self.exclude {
            let axes = e.axes(n);
            if axes.len() != e.center.len() || axes.iter().any(|&a| a >= n) {
                return Err(JetError::InvalidArgument("exclusion axes/center do not fit the box".into()));
            }
            if !(e.radius > 0.0) {
                return Err(JetError::InvalidArgument("exclusion radius must be positive".into()));
            }
            // A ball is convex, so it covers the (projected) box iff it covers every corner.
            let covers = (0..1usize << axes.len()).all(|mask| {
                axes.iter().enumerate().zip(&e.center).map(|((bit, &a), c)| {
                    let v = if mask >> bit & 1 == 1 { self.upper[a] } else { self.lower[a] };
                    (v - c).powi(2)
                }).sum::<f64>()
                    < e.radius * e.radius
            });
            if covers {
                return Err(JetError::InvalidArgument("an exclusion covers the whole box".into()));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| lo <= v && v <= hi)
            && !self.exclude.iter().any(|e| e.excludes(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_reject_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
        assert_eq!(Point::new(vec![1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn tube_exclusion() {
        let b = DomainBox::new(
            vec![-1.0, -1.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![Exclusion { axes: vec![0, 1], center: vec![0.0, 0.0], radius: 0.1 }],
        )
        .unwrap();
        assert!(!b.contains(&[0.05, 0.0, 0.7]));
        assert!(b.contains(&[0.5, 0.0, 0.7]));
        assert!(!b.contains(&[0.5, 0.0, 1.5]));
    }

    #[test]
    fn degenerate_boxes_rejected() {
        assert!(DomainBox::new(vec![0.0], vec![0.0], vec![]).is_err());
        let covering = Exclusion { axes: vec![], center: vec![0.0], radius: 5.0 };
        assert!(DomainBox::new(vec![-1.0], vec![1.0], vec![covering]).is_err());
    }
}
