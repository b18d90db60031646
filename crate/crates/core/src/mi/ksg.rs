//! Kraskov-Stögbauer-Grassberger mutual information (first variant).
//!
//! `I = ψ(k) + ψ(n) − ⟨ψ(n_x + 1) + ψ(n_y + 1)⟩` with max-norm balls. Columns
//! are z-scored first, then every point receives a ~1e-10 jitter derived
//! from its own coordinates so that ties (discrete columns, duplicates)
//! break the same way regardless of row order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::digamma;

use super::{EstimatorKind, MiEstimate};
use crate::error::{shape_err, Error, Result};
use crate::numerics::{splitmix64, Matrix};

const JITTER: f64 = 1e-10;

/// Column z-scoring plus content-seeded jitter. Constant columns stay at 0
/// before jitter.
fn prepare(x: &Matrix, y: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows();
    let norm = |m: &Matrix| -> Vec<f64> {
        let means = m.column_means();
        let stds = m.column_stds();
        let mut out = Vec::with_capacity(m.data().len());
        for r in 0..m.rows() {
            for (c, v) in m.row(r).iter().enumerate() {
                let s = stds[c];
                out.push(if s > 0.0 { (v - means[c]) / s } else { 0.0 });
            }
        }
        out
    };
    let mut xs = norm(x);
    let mut ys = norm(y);
    let (dx, dy) = (x.cols(), y.cols());

    // Hash each joint row by content; identical rows get an occurrence
    // counter so the jittered point multiset is order independent.
    let hashes: Vec<u64> = (0..n)
        .map(|r| {
            let mut h = 0x1234_5678_9ABC_DEF0u64;
            for v in x.row(r).iter().chain(y.row(r)) {
                h = splitmix64(h ^ v.to_bits());
            }
            h
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| hashes[i]);
    let mut occurrence = vec![0u64; n];
    for w in 1..n {
        let (a, b) = (order[w - 1], order[w]);
        if hashes[a] == hashes[b] {
            occurrence[b] = occurrence[a] + 1;
        }
    }
    for r in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(hashes[r] ^ occurrence[r]));
        for v in &mut xs[r * dx..(r + 1) * dx] {
            *v += JITTER * rng.random_range(-1.0..1.0);
        }
        for v in &mut ys[r * dy..(r + 1) * dy] {
            *v += JITTER * rng.random_range(-1.0..1.0);
        }
    }
    (xs, ys)
}

#[inline]
fn cheb(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// KSG estimate of `I(X; Y)` in nats.
pub fn ksg_mi(x: &Matrix, y: &Matrix, k: usize) -> Result<MiEstimate> {
    let n = x.rows();
    if y.rows() != n {
        return Err(shape_err(
            "ksg_mi",
            format!("{n} rows"),
            format!("{} rows", y.rows()),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("ksg k must be at least 1".into()));
    }
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "ksg needs more than k={k} rows, got {n}"
        )));
    }
    if x.cols() == 0 || y.cols() == 0 {
        return Err(Error::Empty("ksg_mi variable with no columns".into()));
    }
    let (xs, ys) = prepare(x, y);
    let (dx, dy) = (x.cols(), y.cols());
    let xrow = |i: usize| &xs[i * dx..(i + 1) * dx];
    let yrow = |i: usize| &ys[i * dy..(i + 1) * dy];

    let mut dxs = vec![0.0; n];
    let mut dys = vec![0.0; n];
    let mut joint = vec![0.0; n - 1];
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let (xi, yi) = (xrow(i), yrow(i));
        let mut w = 0;
        for j in 0..n {
            let a = cheb(xi, xrow(j));
            let b = cheb(yi, yrow(j));
            dxs[j] = a;
            dys[j] = b;
            if j != i {
                joint[w] = a.max(b);
                w += 1;
            }
        }
        let (_, eps, _) = joint.select_nth_unstable_by(k - 1, f64::total_cmp);
        let eps = *eps;
        let mut nx = 0usize;
        let mut ny = 0usize;
        for j in 0..n {
            if j == i {
                continue;
            }
            if dxs[j] < eps {
                nx += 1;
            }
            if dys[j] < eps {
                ny += 1;
            }
        }
        terms.push(digamma((nx + 1) as f64) + digamma((ny + 1) as f64));
    }
    // Summing in sorted order keeps the result bitwise invariant to row order.
    terms.sort_by(f64::total_cmp);
    let mean = terms.iter().sum::<f64>() / n as f64;
    let value = digamma(k as f64) + digamma(n as f64) - mean;
    Ok(MiEstimate::from_nats(value, n, EstimatorKind::Ksg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_errors() {
        let a = Matrix::zeros(5, 1);
        assert!(ksg_mi(&a, &Matrix::zeros(4, 1), 2).is_err());
        assert!(ksg_mi(&a, &a, 0).is_err());
        assert!(ksg_mi(&a, &a, 5).is_err());
    }

    #[test]
    fn duplicates_do_not_break_it() {
        let x = Matrix::column(vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
        let e = ksg_mi(&x, &x, 2).unwrap();
        assert!(e.value_nats.is_finite());
    }
}
