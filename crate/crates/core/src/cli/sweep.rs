use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximizer::OptimizerConfig;
use crate::states::{gghz_alpha_from_tangle, ms_alpha_from_tangle, Family, FamilyParameter};
use crate::svetlichny::violation_report;

use super::{run_optimizer, OutputFormat, SweepArgs, VariantPolicy};

/// The swept parameter and its closed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridAxis {
    Alpha { start: f64, stop: f64 },
    Tau { start: f64, stop: f64 },
}

impl GridAxis {
    fn point(&self, i: usize, count: usize) -> f64 {
        let (a, b) = match *self {
            GridAxis::Alpha { start, stop } | GridAxis::Tau { start, stop } => (start, stop),
        };
        if i + 1 == count {
            b
        } else {
            a + (b - a) * i as f64 / (count - 1) as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
    pub axis: GridAxis,
    pub count: usize,
    pub variant: VariantPolicy,
    /// `None` skips the numerical maximizer.
    pub optimizer: Option<OptimizerConfig>,
    pub format: OutputFormat,
    pub out: PathBuf,
}

impl SweepSpec {
    pub(super) fn from_args(args: &SweepArgs) -> Result<Self> {
        let axis = if args.tau_start.is_some() || args.tau_stop.is_some() {
            GridAxis::Tau {
                start: args.tau_start.unwrap_or(0.0),
                stop: args.tau_stop.unwrap_or(1.0),
            }
        } else {
            GridAxis::Alpha {
                start: args.alpha_start.unwrap_or(0.0),
                stop: args.alpha_stop.unwrap_or(FRAC_PI_2),
            }
        };
        let spec = SweepSpec {
            family: args.family.into(),
            n_min: args.n,
            n_max: args.n_max.unwrap_or(args.n),
            axis,
            count: args.count,
            variant: args.variant,
            optimizer: args.optimize.then(|| args.optimizer.config()),
            format: args.format,
            out: args.out.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::invalid(format!(
                "grid count {} is below 2",
                self.count
            )));
        }
        if self.n_max < self.n_min {
            return Err(Error::invalid(format!(
                "n-max {} is below n {}",
                self.n_max, self.n_min
            )));
        }
        if let Some(cfg) = &self.optimizer {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// One line of sweep output. Serialized field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub tau: Option<f64>,
    /// Variant that produced `numeric_max`, or the requested policy when the
    /// maximizer is off.
    pub variant: String,
    pub lhv_bound: f64,
    pub analytic_max: f64,
    pub numeric_max: Option<f64>,
    pub violates: bool,
    pub optimizer_restarts_converged: Option<usize>,
}

fn alpha_for(family: Family, n: usize, axis: &GridAxis, x: f64) -> Result<f64> {
    match axis {
        GridAxis::Alpha { .. } => Ok(x),
        GridAxis::Tau { .. } => match family {
            Family::Gghz => gghz_alpha_from_tangle(x),
            Family::Ms => ms_alpha_from_tangle(n, x),
        },
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity((spec.n_max - spec.n_min + 1) * spec.count);
    for n in spec.n_min..=spec.n_max {
        for i in 0..spec.count {
            let x = spec.axis.point(i, spec.count);
            let alpha = alpha_for(spec.family, n, &spec.axis, x)?;
            let param = FamilyParameter::new(spec.family, n, alpha)?;
            let report = violation_report(&param)?;
            let tau = match spec.axis {
                GridAxis::Tau { .. } => Some(x),
                GridAxis::Alpha { .. } => report.tangle,
            };
            let mut row = SweepRow {
                family: spec.family,
                n,
                alpha,
                tau,
                variant: spec.variant.name().to_string(),
                lhv_bound: report.lhv_bound,
                analytic_max: report.analytic_max,
                numeric_max: None,
                violates: report.violates,
                optimizer_restarts_converged: None,
            };
            if let Some(cfg) = &spec.optimizer {
                let result = run_optimizer(&param, spec.variant, cfg)?;
                row.numeric_max = Some(result.best_value);
                row.variant = result.best_variant.name().to_string();
                row.optimizer_restarts_converged = Some(result.restarts_converged);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(writer: W, rows: &[SweepRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> std::result::Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}
