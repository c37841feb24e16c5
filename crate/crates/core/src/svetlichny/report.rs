use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::states::{Family, FamilyParameter};

use super::{algebraic_cap, gghz_bound_alpha, lhv_bound, ms_bound, Variant};

/// Slack on the strict `analytic_max > lhv_bound` comparison.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Analytic (and optionally numeric) Svetlichny summary for one family
/// member. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: FamilyParameter,
    pub variant_best: Variant,
    pub lhv_bound: f64,
    pub algebraic_cap: f64,
    pub analytic_max: f64,
    pub numeric_max: Option<f64>,
    /// `None` for MS states with odd N > 3, where the n-tangle is undefined.
    pub tangle: Option<f64>,
    pub violates: bool,
}

impl BoundReport {
    /// Records a maximizer run.
    pub fn with_numeric(mut self, value: f64, variant: Variant) -> Self {
        self.numeric_max = Some(value);
        self.variant_best = variant;
        self
    }
}

pub fn violation_report(family: &FamilyParameter) -> Result<BoundReport> {
    let n = family.num_qubits;
    let analytic_max = match family.family {
        Family::Gghz => gghz_bound_alpha(n, family.alpha)?,
        Family::Ms => ms_bound(n, family.alpha)?,
    };
    let lhv = lhv_bound(n);
    Ok(BoundReport {
        family: *family,
        // Both variants share the same maximum.
        variant_best: Variant::Plus,
        lhv_bound: lhv,
        algebraic_cap: algebraic_cap(n),
        analytic_max,
        numeric_max: None,
        tangle: family.tangle(),
        violates: analytic_max > lhv + VIOLATION_SLACK,
    })
}
