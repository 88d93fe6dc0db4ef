//! `FairnessReport` and its flat emitters.
//!
//! CSV column order: `acc,auc,delta_sp,delta_eo,distance_bias,n_eval`,
//! then `bin{b}_count,bin{b}_acc` for `b = 0..10`. Undefined values are
//! empty cells in CSV and `null` in JSON lines.

use std::io::Write;

use ndarray::Array2;
use serde::Serialize;

use super::{auc, delta_eo, delta_sp, ProbeBin};
use crate::error::{Error, Result};
use crate::graph::{Graph, RATIO_BINS};
use crate::model::{positive_scores, predict};

pub const REPORT_FIELDS: [&str; 6] = ["acc", "auc", "delta_sp", "delta_eo", "distance_bias", "n_eval"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FairnessReport {
    pub acc: f64,
    pub auc: Option<f64>,
    pub delta_sp: Option<f64>,
    pub delta_eo: Option<f64>,
    pub distance_bias: Option<f64>,
    pub probe_bins: Option<Vec<ProbeBin>>,
    pub n_eval: usize,
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(msg)) => {
            log::debug!("metric undefined: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Accuracy, AUC, ΔSP and ΔEO of `logits` on `mask`. Metrics that are
/// undefined on the mask (e.g. a group without positives) are `None`.
pub fn evaluate(logits: &Array2<f64>, g: &Graph, mask: &[usize]) -> Result<FairnessReport> {
    if mask.is_empty() {
        return Err(Error::validation("evaluation mask is empty"));
    }
    let labels = g.label_vec();
    let pred = predict(logits);
    let scores = positive_scores(logits);
    let correct = mask.iter().filter(|&&i| pred[i] == labels[i]).count();
    Ok(FairnessReport {
        acc: correct as f64 / mask.len() as f64,
        auc: defined(auc(&scores, &labels, mask))?,
        delta_sp: defined(delta_sp(&pred, g.sensitive(), mask))?,
        delta_eo: defined(delta_eo(&pred, &labels, g.sensitive(), mask))?,
        distance_bias: None,
        probe_bins: None,
        n_eval: mask.len(),
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl FairnessReport {
    pub fn csv_header() -> String {
        let mut cols: Vec<String> = REPORT_FIELDS.iter().map(|s| s.to_string()).collect();
        for b in 0..RATIO_BINS {
            cols.push(format!("bin{b}_count"));
            cols.push(format!("bin{b}_acc"));
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.acc.to_string(),
            cell(self.auc),
            cell(self.delta_sp),
            cell(self.delta_eo),
            cell(self.distance_bias),
            self.n_eval.to_string(),
        ];
        for b in 0..RATIO_BINS {
            let bin = self.probe_bins.as_ref().and_then(|bins| bins.get(b));
            cols.push(bin.map(|x| x.count.to_string()).unwrap_or_default());
            cols.push(cell(bin.and_then(|x| x.accuracy)));
        }
        cols.join(",")
    }
}

pub fn write_reports_csv<W: Write>(mut w: W, reports: &[FairnessReport]) -> std::io::Result<()> {
    writeln!(w, "{}", FairnessReport::csv_header())?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_reports_jsonl<W: Write>(mut w: W, reports: &[FairnessReport]) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}
