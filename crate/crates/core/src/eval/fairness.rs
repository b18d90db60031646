use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};

/// Per-class true-positive rates for the two protected groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRates {
    pub class: usize,
    /// `P(Ŷ = y | C = c, Y = y)` for `c = 0, 1`; `None` when the cell is empty.
    pub tpr: [Option<f64>; 2],
    pub support: [usize; 2],
    /// `TPR_0 − TPR_1`, present only when both cells have support.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    /// Mean per-class recall over classes present in the truth.
    pub ba: f64,
    pub gap_rms: f64,
    pub gap_max: f64,
    pub per_class: Vec<ClassRates>,
    /// Classes left out of the gap aggregation for lack of support.
    pub excluded_classes: Vec<usize>,
}

/// Accuracy, balanced accuracy and TPR gaps between protected groups 0 and 1.
pub fn fairness_metrics(
    preds: &[usize],
    truth: &[usize],
    protected: &[usize],
) -> Result<FairnessReport> {
    if preds.len() != truth.len() || truth.len() != protected.len() {
        return Err(shape_err(
            "fairness_metrics",
            format!("{} entries", truth.len()),
            format!("{} predictions, {} protected", preds.len(), protected.len()),
        ));
    }
    if truth.is_empty() {
        return Err(Error::Empty("fairness_metrics input".into()));
    }
    if let Some(&c) = protected.iter().find(|&&c| c > 1) {
        return Err(Error::InvalidArgument(format!(
            "protected value {c} outside {{0, 1}}"
        )));
    }
    let k = truth.iter().chain(preds).max().expect("non-empty") + 1;
    // hits[c][y], totals[c][y]
    let mut hits = vec![[0usize; 2]; k];
    let mut totals = vec![[0usize; 2]; k];
    let mut correct = 0usize;
    for ((&p, &y), &c) in preds.iter().zip(truth).zip(protected) {
        totals[y][c] += 1;
        if p == y {
            hits[y][c] += 1;
            correct += 1;
        }
    }
    let mut per_class = Vec::new();
    let mut excluded = Vec::new();
    let mut recalls = Vec::new();
    let mut gaps = Vec::new();
    for y in 0..k {
        let support = totals[y];
        if support[0] + support[1] == 0 {
            continue;
        }
        recalls.push((hits[y][0] + hits[y][1]) as f64 / (support[0] + support[1]) as f64);
        let tpr = [0, 1].map(|c| (support[c] > 0).then(|| hits[y][c] as f64 / support[c] as f64));
        let gap = match tpr {
            [Some(a), Some(b)] => Some(a - b),
            _ => None,
        };
        match gap {
            Some(g) => gaps.push(g),
            None => excluded.push(y),
        }
        per_class.push(ClassRates {
            class: y,
            tpr,
            support,
            gap,
        });
    }
    if !excluded.is_empty() {
        warn!("classes {excluded:?} lack support in a protected group and are left out of the gap");
    }
    let gap_rms = if gaps.is_empty() {
        0.0
    } else {
        (gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64).sqrt()
    };
    let gap_max = gaps.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Ok(FairnessReport {
        accuracy: correct as f64 / truth.len() as f64,
        ba: recalls.iter().sum::<f64>() / recalls.len() as f64,
        gap_rms,
        gap_max,
        per_class,
        excluded_classes: excluded,
    })
}
