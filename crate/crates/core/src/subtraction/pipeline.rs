use log::info;
use serde::{Deserialize, Serialize};

use super::{train_information_subtraction, SubtractionConfig, Subtractor};
use crate::error::{shape_err, Result};
use crate::eval::{venn_base, venn_row, Classifier, PredictorConfig, VennReport};
use crate::mi::OracleConfig;
use crate::numerics::Matrix;

/// Training-side summary of the two-stage unbiased predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorReport {
    pub train_accuracy: f64,
    pub final_loss: f64,
    pub n_classes: usize,
}

/// Stage one removes the information about `c` from `x` (the generator
/// reads `x`, the critics score `(x, c, z)` and `(c, z)`); stage two fits
/// a classifier on the generated `z` for `config.n4` epochs.
pub fn train_unbiased_predictor(
    config: &SubtractionConfig,
    x: &Matrix,
    c: &Matrix,
    y: &[usize],
) -> Result<(Subtractor, Classifier, PredictorReport)> {
    if x.rows() != y.len() {
        return Err(shape_err(
            "train_unbiased_predictor",
            format!("{} labels", x.rows()),
            y.len(),
        ));
    }
    let subtractor = train_information_subtraction(config, c, x)?;
    let z = subtractor.generate_representation(x)?;
    let n_classes = y.iter().max().map_or(2, |m| (m + 1).max(2));
    let pcfg = PredictorConfig::from_subtraction(config);
    let (clf, losses) = Classifier::train(&z, y, n_classes, &pcfg)?;
    let report = PredictorReport {
        train_accuracy: clf.accuracy(&z, y)?,
        final_loss: losses.last().copied().unwrap_or(f64::NAN),
        n_classes,
    };
    info!(
        "unbiased predictor: train accuracy {:.4}",
        report.train_accuracy
    );
    Ok((subtractor, clf, report))
}

/// One sector representation and the run that produced it.
#[derive(Debug)]
pub struct VennSector {
    pub name: String,
    pub condition: Vec<String>,
    pub subtractor: Subtractor,
    pub z: Matrix,
}

#[derive(Debug)]
pub struct VennDecomposition {
    pub sectors: Vec<VennSector>,
    pub report: VennReport,
}

const VENN_PLAN: [(&str, &[&str]); 4] = [
    ("Z1", &["S", "W"]),
    ("Z4", &["W", "Z1"]),
    ("Z5", &["S", "Z1"]),
    ("Z7", &["Z1", "Z4", "Z5"]),
];

fn venn_condition(cond: &[&str], s: &Matrix, w: &Matrix, sectors: &[VennSector]) -> Result<Matrix> {
    let parts: Vec<&Matrix> = cond
        .iter()
        .map(|c| match *c {
            "S" => s,
            "W" => w,
            other => {
                &sectors
                    .iter()
                    .find(|z| z.name == other)
                    .expect("earlier sector")
                    .z
            }
        })
        .collect();
    Matrix::hcat(&parts)
}

/// Iterative decomposition of target `g` against `s` and `w`:
/// `Z1 | {S,W}`, then `Z4 | {W,Z1}`, `Z5 | {S,Z1}`, and `Z7 | {Z1,Z4,Z5}`.
/// Sector `i` uses seed `config.seed.derive(i)`.
pub fn venn_decompose(
    g: &Matrix,
    s: &Matrix,
    w: &Matrix,
    config: &SubtractionConfig,
    oracle: &OracleConfig,
) -> Result<VennDecomposition> {
    let mut sectors: Vec<VennSector> = Vec::new();
    for (i, (name, cond)) in VENN_PLAN.iter().enumerate() {
        let c = venn_condition(cond, s, w, &sectors)?;
        let cfg = SubtractionConfig {
            seed: config.seed.derive(i as u64 + 1),
            ..config.clone()
        };
        info!("venn sector {name}: conditioning on {{{}}}", cond.join(","));
        let sub = train_information_subtraction(&cfg, &c, g)?;
        let z = sub.generate_representation(g)?;
        sectors.push(VennSector {
            name: name.to_string(),
            condition: cond.iter().map(|c| c.to_string()).collect(),
            subtractor: sub,
            z,
        });
    }
    let report = venn_report(g, s, w, &sectors, oracle)?;
    Ok(VennDecomposition { sectors, report })
}

/// Report for already trained sectors, evaluated on `(g, s, w)`. These may
/// be a different scaling of the training inputs.
pub fn venn_report(
    g: &Matrix,
    s: &Matrix,
    w: &Matrix,
    sectors: &[VennSector],
    oracle: &OracleConfig,
) -> Result<VennReport> {
    let base = venn_base(g, s, w, oracle)?;
    let mut rows = Vec::new();
    for sector in sectors {
        let cond: Vec<&str> = sector.condition.iter().map(String::as_str).collect();
        let c = venn_condition(&cond, s, w, sectors)?;
        rows.push(venn_row(
            &sector.name,
            sector.condition.clone(),
            &sector.z,
            &c,
            g,
            oracle,
        )?);
    }
    Ok(VennReport {
        base,
        rows,
        rows_used: g.rows().min(oracle.max_rows),
    })
}
