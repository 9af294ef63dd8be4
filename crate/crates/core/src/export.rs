//! CSV row types for every analysis.
//!
//! | file | columns |
//! |------|---------|
//! | `spectral.csv` | `model_id,sampler,unit,gap,relaxation_time,reversible` |
//! | `mixing_curve.csv` | `model_id,sampler,unit,t,worst_tv` |
//! | `mixing_summary.csv` | `model_id,sampler,unit,mixing_time,threshold,truncated` |
//! | `coupling.csv` | `model_id,sampler,replicate,coalescence_updates,truncated` |
//! | `coupling_summary.csv` | `model_id,sampler,replicates,mean,median,q90,truncated_count,sandwich_violations` |
//! | `summary.csv` | `experiment,model_id,sampler,unit,metric,value` |
//!
//! Floats use Rust's shortest round-trip formatting, so equal values always
//! serialize to equal bytes.

use std::io::Write;

use serde::Serialize;

use crate::chain::StepUnit;
use crate::coupling::CouplingReport;
use crate::error::{Error, Result};
use crate::mixing::MixingReport;
use crate::spectral::SpectralReport;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRow {
    pub model_id: String,
    pub sampler: String,
    pub unit: StepUnit,
    pub gap: f64,
    pub relaxation_time: f64,
    pub reversible: bool,
}

impl SpectralRow {
    pub fn new(model_id: &str, sampler: &str, unit: StepUnit, r: &SpectralReport) -> Self {
        SpectralRow {
            model_id: model_id.into(),
            sampler: sampler.into(),
            unit,
            gap: r.gap,
            relaxation_time: r.relaxation_time,
            reversible: r.reversible,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingCurveRow {
    pub model_id: String,
    pub sampler: String,
    pub unit: StepUnit,
    pub t: u64,
    pub worst_tv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingSummaryRow {
    pub model_id: String,
    pub sampler: String,
    pub unit: StepUnit,
    pub mixing_time: u64,
    pub threshold: f64,
    pub truncated: bool,
}

pub fn mixing_rows(model_id: &str, sampler: &str, r: &MixingReport) -> (Vec<MixingCurveRow>, MixingSummaryRow) {
    let curve = r
        .tv_curve
        .iter()
        .map(|&(t, worst_tv)| MixingCurveRow {
            model_id: model_id.into(),
            sampler: sampler.into(),
            unit: r.unit,
            t,
            worst_tv,
        })
        .collect();
    let summary = MixingSummaryRow {
        model_id: model_id.into(),
        sampler: sampler.into(),
        unit: r.unit,
        mixing_time: r.mixing_time,
        threshold: r.threshold,
        truncated: r.truncated,
    };
    (curve, summary)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingRow {
    pub model_id: String,
    pub sampler: String,
    pub replicate: u64,
    pub coalescence_updates: u64,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingSummaryRow {
    pub model_id: String,
    pub sampler: String,
    pub replicates: u64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub truncated_count: u64,
    pub sandwich_violations: u64,
}

pub fn coupling_rows(model_id: &str, r: &CouplingReport) -> (Vec<CouplingRow>, CouplingSummaryRow) {
    let sampler = r.sampler.as_str();
    let rows = r
        .outcomes
        .iter()
        .map(|o| CouplingRow {
            model_id: model_id.into(),
            sampler: sampler.into(),
            replicate: o.replicate,
            coalescence_updates: o.updates,
            truncated: o.truncated,
        })
        .collect();
    let summary = CouplingSummaryRow {
        model_id: model_id.into(),
        sampler: sampler.into(),
        replicates: r.replicates,
        mean: r.mean,
        median: r.median,
        q90: r.q90,
        truncated_count: r.truncated_count,
        sandwich_violations: r.sandwich_violations,
    };
    (rows, summary)
}

/// One scalar result in the long format shared by all analyses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub model_id: String,
    pub sampler: String,
    pub unit: String,
    pub metric: String,
    pub value: f64,
}

impl SummaryRow {
    pub fn new(experiment: &str, model_id: &str, sampler: &str, unit: &str, metric: &str, value: f64) -> Self {
        SummaryRow {
            experiment: experiment.into(),
            model_id: model_id.into(),
            sampler: sampler.into(),
            unit: unit.into(),
            metric: metric.into(),
            value,
        }
    }
}

/// Writes a header (taken from the row type) and one line per row. An
/// empty slice still produces the header when `header` is given.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], header: &[&str], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}

pub const SPECTRAL_HEADER: &[&str] = &["model_id", "sampler", "unit", "gap", "relaxation_time", "reversible"];
pub const MIXING_CURVE_HEADER: &[&str] = &["model_id", "sampler", "unit", "t", "worst_tv"];
pub const MIXING_SUMMARY_HEADER: &[&str] =
    &["model_id", "sampler", "unit", "mixing_time", "threshold", "truncated"];
pub const COUPLING_HEADER: &[&str] = &["model_id", "sampler", "replicate", "coalescence_updates", "truncated"];
pub const COUPLING_SUMMARY_HEADER: &[&str] = &[
    "model_id",
    "sampler",
    "replicates",
    "mean",
    "median",
    "q90",
    "truncated_count",
    "sandwich_violations",
];
pub const SUMMARY_HEADER: &[&str] = &["experiment", "model_id", "sampler", "unit", "metric", "value"];

/// Renders rows to an in-memory CSV string.
pub fn to_csv_string<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, header, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_csv_layout() {
        let row = SpectralRow {
            model_id: "hardcore_knn:2".into(),
            sampler: "random_update".into(),
            unit: StepUnit::VariableUpdate,
            gap: 0.25,
            relaxation_time: 4.0,
            reversible: true,
        };
        let s = to_csv_string(&[row], SPECTRAL_HEADER).unwrap();
        assert_eq!(
            s,
            "model_id,sampler,unit,gap,relaxation_time,reversible\nhardcore_knn:2,random_update,variable_update,0.25,4.0,true\n"
        );
    }

    #[test]
    fn empty_rows_keep_header() {
        let s = to_csv_string::<SummaryRow>(&[], SUMMARY_HEADER).unwrap();
        assert_eq!(s, "experiment,model_id,sampler,unit,metric,value\n");
    }
}
