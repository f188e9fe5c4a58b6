use nalgebra::DVector;

use super::SffData;
use crate::error::GeomError;

/// Classification predicates; the `D*`/mixed ones need declared blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassFlag {
    TotallyGeodesic,
    TotallyUmbilical,
    Minimal,
    MixedTotallyGeodesic,
    D1TotallyGeodesic,
    D1Minimal,
    D2Minimal,
    D2TotallyUmbilical,
}

impl ClassFlag {
    pub const ALL: [ClassFlag; 8] = [
        ClassFlag::TotallyGeodesic,
        ClassFlag::TotallyUmbilical,
        ClassFlag::Minimal,
        ClassFlag::MixedTotallyGeodesic,
        ClassFlag::D1TotallyGeodesic,
        ClassFlag::D1Minimal,
        ClassFlag::D2Minimal,
        ClassFlag::D2TotallyUmbilical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassFlag::TotallyGeodesic => "totally_geodesic",
            ClassFlag::TotallyUmbilical => "totally_umbilical",
            ClassFlag::Minimal => "minimal",
            ClassFlag::MixedTotallyGeodesic => "mixed_totally_geodesic",
            ClassFlag::D1TotallyGeodesic => "D1_totally_geodesic",
            ClassFlag::D1Minimal => "D1_minimal",
            ClassFlag::D2Minimal => "D2_minimal",
            ClassFlag::D2TotallyUmbilical => "D2_totally_umbilical",
        }
    }

    pub fn needs_blocks(self) -> bool {
        !matches!(self, ClassFlag::TotallyGeodesic | ClassFlag::TotallyUmbilical | ClassFlag::Minimal)
    }

    /// Defining residual at one point; `None` for block flags without blocks.
    pub fn residual(self, s: &SffData) -> Option<f64> {
        if self.needs_blocks() && s.blocks.is_none() {
            return None;
        }
        let n = s.sub_dim();
        Some(match self {
            ClassFlag::TotallyGeodesic => s.norm_sq().sqrt(),
            ClassFlag::TotallyUmbilical => s.umbilicity_residual(0..n, &s.mean),
            ClassFlag::Minimal => s.mean_norm(),
            ClassFlag::MixedTotallyGeodesic => s.block_pair_max(s.leaf(), s.fiber()),
            ClassFlag::D1TotallyGeodesic => s.block_pair_max(s.leaf(), s.leaf()),
            ClassFlag::D1Minimal => s.partial_mean(s.leaf()).norm(),
            ClassFlag::D2Minimal => s.partial_mean(s.fiber()).norm(),
            ClassFlag::D2TotallyUmbilical => s.umbilicity_residual(s.fiber(), &s.partial_mean(s.fiber())),
        })
    }
}

impl SffData {
    /// `max ‖h(e_i, e_j)‖` over `i ∈ us`, `j ∈ vs`.
    pub fn block_pair_max(&self, us: std::ops::Range<usize>, vs: std::ops::Range<usize>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in us {
            for j in vs.clone() {
                worst = worst.max(self.h_frame(i, j).norm());
            }
        }
        worst
    }

    /// `max ‖h(e_i, e_j) − δ_ij v‖` over pairs in `block`.
    pub fn umbilicity_residual(&self, block: std::ops::Range<usize>, v: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in block.clone() {
            for j in block.clone() {
                let mut d = self.h_frame(i, j);
                if i == j {
                    d -= v;
                }
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Worst residual of one flag over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagOutcome {
    pub flag: ClassFlag,
    pub worst: Option<f64>,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub tol: f64,
    pub outcomes: Vec<FlagOutcome>,
}

impl Classification {
    pub fn get(&self, flag: ClassFlag) -> Result<bool, GeomError> {
        self.outcomes
            .iter()
            .find(|o| o.flag == flag)
            .and_then(|o| o.holds)
            .ok_or_else(|| GeomError::Config(format!("{} needs a warped declaration", flag.name())))
    }
}

/// Each flag holds iff its residual is below `tol` at every point.
pub fn classify(data: &[SffData], tol: f64) -> Classification {
    let outcomes = ClassFlag::ALL
        .iter()
        .map(|&flag| {
            let mut worst: Option<f64> = Some(0.0);
            for s in data {
                worst = match (worst, flag.residual(s)) {
                    (Some(w), Some(r)) => Some(if w.is_nan() || r.is_nan() { f64::NAN } else { w.max(r) }),
                    _ => None,
                };
            }
            let holds = worst.map(|w| w < tol);
            FlagOutcome { flag, worst, holds }
        })
        .collect();
    Classification { tol, outcomes }
}
