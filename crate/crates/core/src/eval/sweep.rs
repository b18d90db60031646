use std::io::Write;

use log::info;
use serde::{Deserialize, Serialize};

use super::info::{ksg_bits, subsample_indices};
use crate::error::{Error, Result};
use crate::mi::OracleConfig;
use crate::numerics::{Matrix, Seed};
use crate::subtraction::{train_information_subtraction, DiagnosticsTrace, SubtractionConfig};

/// One information-plane point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    /// `I(Y;X,Z)` in bits.
    pub i_full_bits: f64,
    /// `I(X;Z)` in bits.
    pub i_leak_bits: f64,
    pub seed: Seed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    #[serde(skip)]
    pub traces: Vec<DiagnosticsTrace>,
}

impl SweepResult {
    /// Whether the `λ = 0` point leaks at least as much as every other
    /// point, up to `slack` bits.
    pub fn zero_lambda_leaks_most(&self, slack: f64) -> bool {
        let Some(zero) = self.points.iter().find(|p| p.lambda == 0.0) else {
            return false;
        };
        self.points
            .iter()
            .all(|p| zero.i_leak_bits >= p.i_leak_bits - slack)
    }

    /// Adjacent pairs (by increasing λ) where the leak rises by more than `slack`.
    pub fn leak_increases(&self, slack: f64) -> Vec<(f64, f64)> {
        self.points
            .windows(2)
            .filter(|w| w[1].i_leak_bits > w[0].i_leak_bits + slack)
            .map(|w| (w[0].lambda, w[1].lambda))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lambda", "i_full_bits", "i_leak_bits", "seed"])?;
        for p in &self.points {
            out.write_record([
                p.lambda.to_string(),
                p.i_full_bits.to_string(),
                p.i_leak_bits.to_string(),
                p.seed.0.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// One full run per λ. Point `i` uses seed `base.seed + i`.
pub fn lambda_sweep(
    base: &SubtractionConfig,
    lambdas: &[f64],
    x: &Matrix,
    y: &Matrix,
    oracle: &OracleConfig,
) -> Result<SweepResult> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidArgument(
            "a sweep needs at least 2 lambdas".into(),
        ));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "sweep lambdas must be strictly increasing".into(),
        ));
    }
    let idx = subsample_indices(x.rows(), oracle.max_rows);
    let (xs, ys) = (x.select_rows(&idx), y.select_rows(&idx));
    let mut result = SweepResult::default();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let cfg = SubtractionConfig {
            lambda,
            seed: Seed(base.seed.0.wrapping_add(i as u64)),
            ..base.clone()
        };
        let s = train_information_subtraction(&cfg, x, y)?;
        let z = s.generate_representation(&ys)?;
        let point = SweepPoint {
            lambda,
            i_full_bits: ksg_bits(&Matrix::hcat(&[&xs, &z])?, &ys, oracle.ksg_k)?,
            i_leak_bits: ksg_bits(&xs, &z, oracle.ksg_k)?,
            seed: cfg.seed,
        };
        info!(
            "sweep lambda={lambda}: full={:.3} bits, leak={:.3} bits",
            point.i_full_bits, point.i_leak_bits
        );
        result.points.push(point);
        result.traces.push(s.trace().clone());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lambda: f64, leak: f64) -> SweepPoint {
        SweepPoint {
            lambda,
            i_full_bits: 1.0,
            i_leak_bits: leak,
            seed: Seed(0),
        }
    }

    #[test]
    fn monotonicity_checks() {
        let r = SweepResult {
            points: vec![pt(0.0, 1.0), pt(1.0, 0.5), pt(2.0, 0.55), pt(5.0, 0.9)],
            traces: vec![],
        };
        assert!(r.zero_lambda_leaks_most(0.0));
        assert_eq!(r.leak_increases(0.1), vec![(2.0, 5.0)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn rejects_bad_lambda_lists() {
        let x = Matrix::zeros(4, 1);
        let c = SubtractionConfig::default();
        let o = OracleConfig::default();
        assert!(lambda_sweep(&c, &[1.0], &x, &x, &o).is_err());
        assert!(lambda_sweep(&c, &[1.0, 1.0], &x, &x, &o).is_err());
    }
}
