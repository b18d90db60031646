use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{shape_err, Error, Result};

/// Mean squared error over all entries and its gradient w.r.t. `pred`.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    let diff = pred.sub(target)?;
    let n = diff.data().len().max(1) as f64;
    let loss = diff.frobenius_sq() / n;
    Ok((loss, diff.scale(2.0 / n)))
}

/// Row-wise softmax probabilities.
pub fn softmax(logits: &Matrix) -> Matrix {
    let k = logits.cols();
    let mut out = logits.data().to_vec();
    for row in out.chunks_mut(k.max(1)) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            s += *v;
        }
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    Matrix::from_raw(logits.rows(), k, out)
}

/// Mean softmax cross-entropy (nats) and its gradient w.r.t. the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    if logits.rows() != labels.len() {
        return Err(shape_err(
            "softmax_cross_entropy",
            logits.rows(),
            labels.len(),
        ));
    }
    if logits.rows() == 0 {
        return Err(Error::Empty("softmax_cross_entropy batch".into()));
    }
    let k = logits.cols();
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {k} classes"
        )));
    }
    let mut p = softmax(logits);
    let n = labels.len() as f64;
    let mut loss = 0.0;
    let data = p.data_mut();
    for (r, &l) in labels.iter().enumerate() {
        let row = &mut data[r * k..(r + 1) * k];
        loss -= row[l].max(f64::MIN_POSITIVE).ln();
        row[l] -= 1.0;
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    Ok((loss / n, p))
}

/// Per-column affine standardization fitted on one matrix and applied to
/// others. Constant columns are only centered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        Self {
            means: x.column_means(),
            stds: x.column_stds(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(shape_err("Standardizer::apply", self.dim(), x.cols()));
        }
        let c = x.cols();
        let mut out = x.data().to_vec();
        for row in out.chunks_mut(c.max(1)) {
            for (j, v) in row.iter_mut().enumerate() {
                let s = self.stds[j];
                *v = (*v - self.means[j]) / if s > 0.0 { s } else { 1.0 };
            }
        }
        Ok(Matrix::from_raw(x.rows(), c, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_gradient_matches_differences() {
        let logits = Matrix::new(2, 3, vec![0.1, -0.4, 0.9, 1.2, 0.3, -0.7]).unwrap();
        let labels = [2, 0];
        let (_, g) = softmax_cross_entropy(&logits, &labels).unwrap();
        let h = 1e-6;
        for i in 0..6 {
            let mut a = logits.clone();
            a.data_mut()[i] += h;
            let mut b = logits.clone();
            b.data_mut()[i] -= h;
            let fd = (softmax_cross_entropy(&a, &labels).unwrap().0
                - softmax_cross_entropy(&b, &labels).unwrap().0)
                / (2.0 * h);
            assert!((fd - g.data()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_logits_give_log_k() {
        let (l, _) = softmax_cross_entropy(&Matrix::zeros(4, 4), &[0, 1, 2, 3]).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-12);
        assert!(softmax_cross_entropy(&Matrix::zeros(1, 2), &[2]).is_err());
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let x = Matrix::new(3, 2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0]).unwrap();
        let s = Standardizer::fit(&x);
        let z = s.apply(&x).unwrap();
        assert_eq!(z.column_means(), vec![0.0, 0.0]);
        assert!((z.column_stds()[0] - 1.0).abs() < 1e-12);
        assert!(s.apply(&Matrix::zeros(1, 3)).is_err());
    }
}
