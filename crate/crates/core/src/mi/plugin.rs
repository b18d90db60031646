use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Equal-width bin index of every entry, per column, over the observed range.
pub(crate) fn bin_indices(x: &Matrix, bins: usize) -> Vec<Vec<u32>> {
    let cols = x.cols();
    let mut lo = vec![f64::INFINITY; cols];
    let mut hi = vec![f64::NEG_INFINITY; cols];
    for r in 0..x.rows() {
        for (c, &v) in x.row(r).iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    (0..x.rows())
        .map(|r| {
            x.row(r)
                .iter()
                .enumerate()
                .map(|(c, &v)| {
                    let width = hi[c] - lo[c];
                    if width > 0.0 {
                        (((v - lo[c]) / width * bins as f64) as usize).min(bins - 1) as u32
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Plug-in Shannon entropy (bits) of an equal-width joint histogram with
/// `bins` bins per column.
pub fn plugin_entropy(x: &Matrix, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Empty("plugin_entropy input".into()));
    }
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for key in bin_indices(x, bins) {
        *counts.entry(key).or_default() += 1;
    }
    let mut c: Vec<usize> = counts.into_values().collect();
    c.sort_unstable();
    let n = x.rows() as f64;
    let h: f64 = c
        .iter()
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}
