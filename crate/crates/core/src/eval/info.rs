use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::mi::{ksg_mi, plugin_entropy, EstimatorKind, OracleConfig};
use crate::numerics::Matrix;

const LN2: f64 = std::f64::consts::LN_2;

/// A reported quantity in bits and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub bits: f64,
    pub estimator: EstimatorKind,
}

impl Cell {
    fn new(bits: f64, estimator: EstimatorKind) -> Self {
        Self { bits, estimator }
    }
}

/// Seven information quantities among a condition `x`, a target `y` and a
/// representation `z`. The two conditional cells are exact differences of
/// the cells they are built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub i_xy: Cell,
    pub h_y: Cell,
    pub h_y_given_x: Cell,
    pub i_zy: Cell,
    pub i_zx: Cell,
    pub i_zxy: Cell,
    pub i_zy_given_x: Cell,
    pub rows_used: usize,
}

impl InfoReport {
    /// Cells in table order with their column labels.
    pub fn cells(&self) -> [(&'static str, Cell); 7] {
        [
            ("I(X;Y)", self.i_xy),
            ("H(Y)", self.h_y),
            ("H(Y|X)", self.h_y_given_x),
            ("I(Z;Y)", self.i_zy),
            ("I(Z;X)", self.i_zx),
            ("I(Z,X;Y)", self.i_zxy),
            ("I(Z;Y|X)", self.i_zy_given_x),
        ]
    }
}

/// Evenly spaced row indices, at most `max` of them.
pub(crate) fn subsample_indices(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        (0..n).collect()
    } else {
        (0..max).map(|i| i * n / max).collect()
    }
}

pub(crate) fn ksg_bits(a: &Matrix, b: &Matrix, k: usize) -> Result<f64> {
    Ok(ksg_mi(a, b, k)?.value_nats / LN2)
}

fn check_rows(parts: &[&Matrix]) -> Result<usize> {
    let n = parts[0].rows();
    if let Some(p) = parts.iter().find(|p| p.rows() != n) {
        return Err(shape_err(
            "information_report",
            format!("{n} rows"),
            format!("{} rows", p.rows()),
        ));
    }
    if n == 0 {
        return Err(Error::Empty("information_report input".into()));
    }
    Ok(n)
}

/// Mutual informations by KSG, `H(Y)` by the plug-in estimator, and the
/// conditional cells by the identities `H(Y|X) = H(Y) − I(X;Y)` and
/// `I(Z;Y|X) = I(Z,X;Y) − I(X;Y)`. All in bits.
pub fn information_report(
    z: &Matrix,
    x: &Matrix,
    y: &Matrix,
    oracle: &OracleConfig,
) -> Result<InfoReport> {
    let problems = oracle.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidArgument(problems.join("; ")));
    }
    let n = check_rows(&[z, x, y])?;
    let idx = subsample_indices(n, oracle.max_rows);
    let (z, x, y) = (
        z.select_rows(&idx),
        x.select_rows(&idx),
        y.select_rows(&idx),
    );
    let k = oracle.ksg_k;
    let i_xy = ksg_bits(&x, &y, k)?;
    let h_y = plugin_entropy(&y, oracle.plugin_bins)?;
    let i_zy = ksg_bits(&z, &y, k)?;
    let i_zx = ksg_bits(&z, &x, k)?;
    let i_zxy = ksg_bits(&Matrix::hcat(&[&z, &x])?, &y, k)?;
    Ok(InfoReport {
        i_xy: Cell::new(i_xy, EstimatorKind::Ksg),
        h_y: Cell::new(h_y, EstimatorKind::Plugin),
        h_y_given_x: Cell::new(h_y - i_xy, EstimatorKind::Identity),
        i_zy: Cell::new(i_zy, EstimatorKind::Ksg),
        i_zx: Cell::new(i_zx, EstimatorKind::Ksg),
        i_zxy: Cell::new(i_zxy, EstimatorKind::Ksg),
        i_zy_given_x: Cell::new(i_zxy - i_xy, EstimatorKind::Identity),
        rows_used: idx.len(),
    })
}

/// Marginal quantities among the three base variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VennBase {
    pub h_g: f64,
    pub h_s: f64,
    pub h_w: f64,
    pub i_gs: f64,
    pub i_sw: f64,
    pub i_wg: f64,
}

/// One sector row: `I(Zi;G|C)`, `I(Zi;C)` and `I(G;C)` for its condition set `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VennRow {
    pub sector: String,
    pub condition: Vec<String>,
    pub i_z_g_given_c: f64,
    pub i_z_c: f64,
    pub i_g_c: f64,
    /// `I(Zi,C;G)`, from which the conditional cell is derived.
    pub i_zc_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VennReport {
    pub base: VennBase,
    pub rows: Vec<VennRow>,
    pub rows_used: usize,
}

/// Base quantities for `(G, S, W)`.
pub fn venn_base(g: &Matrix, s: &Matrix, w: &Matrix, oracle: &OracleConfig) -> Result<VennBase> {
    let n = check_rows(&[g, s, w])?;
    let idx = subsample_indices(n, oracle.max_rows);
    let (g, s, w) = (
        g.select_rows(&idx),
        s.select_rows(&idx),
        w.select_rows(&idx),
    );
    let k = oracle.ksg_k;
    Ok(VennBase {
        h_g: plugin_entropy(&g, oracle.plugin_bins)?,
        h_s: plugin_entropy(&s, oracle.plugin_bins)?,
        h_w: plugin_entropy(&w, oracle.plugin_bins)?,
        i_gs: ksg_bits(&g, &s, k)?,
        i_sw: ksg_bits(&s, &w, k)?,
        i_wg: ksg_bits(&w, &g, k)?,
    })
}

/// One sector row for representation `z` under condition `c` on target `g`.
pub fn venn_row(
    sector: &str,
    condition: Vec<String>,
    z: &Matrix,
    c: &Matrix,
    g: &Matrix,
    oracle: &OracleConfig,
) -> Result<VennRow> {
    let n = check_rows(&[z, c, g])?;
    let idx = subsample_indices(n, oracle.max_rows);
    let (z, c, g) = (
        z.select_rows(&idx),
        c.select_rows(&idx),
        g.select_rows(&idx),
    );
    let k = oracle.ksg_k;
    let i_g_c = ksg_bits(&g, &c, k)?;
    let i_zc_g = ksg_bits(&Matrix::hcat(&[&z, &c])?, &g, k)?;
    Ok(VennRow {
        sector: sector.to_string(),
        condition,
        i_z_g_given_c: i_zc_g - i_g_c,
        i_z_c: ksg_bits(&z, &c, k)?,
        i_g_c,
        i_zc_g,
    })
}
