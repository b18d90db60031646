use std::collections::BTreeSet;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    /// One-hot expanded when used as a feature.
    Categorical,
    /// Two-valued; a single 0/1 column.
    Binary,
    /// Read but not kept.
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Feature,
    Target,
    Protected,
    Domain,
    Ignore,
}

impl Role {
    fn is_label(self) -> bool {
        matches!(self, Role::Target | Role::Protected | Role::Domain)
    }
}

/// How one CSV column is read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default = "default_role")]
    pub role: Role,
    /// Fixed category order; discovered (sorted) from the file when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

fn default_role() -> Role {
    Role::Feature
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    /// Field values treated as missing; such rows are dropped.
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    /// The file has no header row; `columns` then lists every field in order.
    #[serde(default)]
    pub headerless: bool,
    /// Lines starting with this character are skipped.
    #[serde(default)]
    pub comment: Option<char>,
    /// Characters stripped from both ends of every field after whitespace.
    #[serde(default)]
    pub trim_chars: String,
}

fn default_missing() -> Vec<String> {
    vec![String::new()]
}

/// A stored column and where it lives in the value table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
    pub start: usize,
    pub width: usize,
    pub categories: Vec<String>,
}

/// Standardization statistics for one stored column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

/// Column-oriented table with role tags and encoding metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<ColumnInfo>,
    values: Matrix,
    standardization: Vec<ColumnStats>,
}

/// Side information from CSV ingestion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_dropped_missing: usize,
    pub unknown_categories: usize,
}

impl Dataset {
    /// Dataset of plain continuous columns.
    pub fn from_continuous(cols: Vec<(&str, Role, Vec<f64>)>) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.2.len());
        if cols.iter().any(|c| c.2.len() != n) {
            return Err(Error::Data("columns differ in length".into()));
        }
        let width = cols.len();
        let mut data = vec![0.0; n * width];
        let mut columns = Vec::with_capacity(width);
        for (j, (name, role, v)) in cols.into_iter().enumerate() {
            for (i, x) in v.into_iter().enumerate() {
                data[i * width + j] = x;
            }
            columns.push(ColumnInfo {
                name: name.to_string(),
                kind: ColumnKind::Continuous,
                role,
                start: j,
                width: 1,
                categories: vec![],
            });
        }
        Ok(Self {
            columns,
            values: Matrix::new(n, width, data)?,
            standardization: vec![],
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn columns(&self) -> &[ColumnInfo] {
        &self.columns
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn standardization(&self) -> &[ColumnStats] {
        &self.standardization
    }

    pub fn info(&self, name: &str) -> Result<&ColumnInfo> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Data(format!("no column named {name}")))
    }

    /// Stored values of one column (one-hot groups keep their width).
    pub fn column(&self, name: &str) -> Result<Matrix> {
        let c = self.info(name)?;
        Ok(self.values.select_cols(c.start, c.start + c.width))
    }

    /// Several columns side by side.
    pub fn columns_matrix(&self, names: &[&str]) -> Result<Matrix> {
        let parts = names
            .iter()
            .map(|n| self.column(n))
            .collect::<Result<Vec<_>>>()?;
        Matrix::hcat(&parts.iter().collect::<Vec<_>>())
    }

    /// All columns carrying `role`, in schema order.
    pub fn role_matrix(&self, role: Role) -> Result<Matrix> {
        let names: Vec<&str> = self
            .columns
            .iter()
            .filter(|c| c.role == role)
            .map(|c| c.name.as_str())
            .collect();
        if names.is_empty() {
            return Err(Error::Data(format!("no column with role {role:?}")));
        }
        self.columns_matrix(&names)
    }

    /// Integer labels of the single column carrying `role`.
    pub fn labels(&self, role: Role) -> Result<Vec<usize>> {
        let cols: Vec<&ColumnInfo> = self.columns.iter().filter(|c| c.role == role).collect();
        if cols.len() != 1 || cols[0].width != 1 {
            return Err(Error::Data(format!(
                "expected exactly one label column with role {role:?}"
            )));
        }
        let c = cols[0];
        (0..self.n_rows())
            .map(|r| {
                let v = self.values.get(r, c.start);
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Data(format!(
                        "column {} holds non-label value {v}",
                        c.name
                    )))
                }
            })
            .collect()
    }

    /// Names of the stored matrix columns, one-hot groups expanded.
    pub fn value_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.values.cols());
        for c in &self.columns {
            if c.width == 1 {
                out.push(c.name.clone());
            } else {
                for cat in &c.categories {
                    out.push(format!("{}={}", c.name, cat));
                }
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            values: self.values.select_rows(idx),
            standardization: self.standardization.clone(),
        }
    }

    /// Continuous feature statistics from this (training) dataset.
    pub fn fit_standardization(&self) -> Vec<ColumnStats> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Continuous && c.role == Role::Feature)
            .map(|c| {
                let m = self.values.select_cols(c.start, c.start + 1);
                ColumnStats {
                    name: c.name.clone(),
                    mean: m.column_means()[0],
                    std: m.column_stds()[0],
                }
            })
            .collect()
    }

    /// z-scores the listed columns in place; zero-variance columns are only centered.
    pub fn apply_standardization(&mut self, stats: &[ColumnStats]) -> Result<()> {
        for s in stats {
            let start = self.info(&s.name)?.start;
            let cols = self.values.cols();
            let scale = if s.std > 0.0 { 1.0 / s.std } else { 1.0 };
            let data = self.values.data_mut();
            for r in 0..data.len() / cols {
                let v = &mut data[r * cols + start];
                *v = (*v - s.mean) * scale;
            }
        }
        self.standardization = stats.to_vec();
        Ok(())
    }

    /// Writes a header row plus the stored values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.value_names())?;
        for r in 0..self.n_rows() {
            w.write_record(self.values.row(r).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a CSV and encodes it according to `schema`. Categories not fixed
/// in the schema are discovered from the file.
pub fn load_csv_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<(Dataset, LoadReport)> {
    let (header, rows, dropped) = read_rows(path.as_ref(), schema)?;
    let idx = header_positions(&header, schema)?;
    let mut resolved = schema.clone();
    for (spec, &pos) in resolved.columns.iter_mut().zip(&idx) {
        if matches!(spec.kind, ColumnKind::Categorical | ColumnKind::Binary)
            && spec.categories.is_none()
        {
            let seen: BTreeSet<&str> = rows.iter().map(|r| r[pos].as_str()).collect();
            spec.categories = Some(seen.into_iter().map(String::from).collect());
        }
    }
    let (ds, mut report) = encode(&header, &rows, &resolved)?;
    report.rows_dropped_missing = dropped;
    Ok((ds, report))
}

/// Reads a CSV with categories fixed by an earlier load; unseen categories
/// become an all-zero group (features) and are counted.
pub fn load_csv_with_encoding(
    path: impl AsRef<Path>,
    reference: &Dataset,
    schema: &Schema,
) -> Result<(Dataset, LoadReport)> {
    let mut resolved = schema.clone();
    for spec in &mut resolved.columns {
        if let Some(info) = reference.columns.iter().find(|c| c.name == spec.name) {
            if !info.categories.is_empty() {
                spec.categories = Some(info.categories.clone());
            }
        }
    }
    let (header, rows, dropped) = read_rows(path.as_ref(), schema)?;
    let (mut ds, mut report) = encode(&header, &rows, &resolved)?;
    report.rows_dropped_missing = dropped;
    if !reference.standardization.is_empty() {
        ds.apply_standardization(&reference.standardization)?;
    }
    Ok((ds, report))
}

type Rows = Vec<Vec<String>>;

fn read_rows(path: &Path, schema: &Schema) -> Result<(Vec<String>, Rows, usize)> {
    let mut builder = csv::ReaderBuilder::new();
    builder
        .trim(csv::Trim::All)
        .has_headers(!schema.headerless)
        .flexible(true);
    if let Some(c) = schema.comment {
        let b = u8::try_from(c)
            .map_err(|_| Error::Data(format!("comment character {c:?} is not ASCII")))?;
        builder.comment(Some(b));
    }
    let mut rdr = builder.from_path(path)?;
    let header: Vec<String> = if schema.headerless {
        schema.columns.iter().map(|c| c.name.clone()).collect()
    } else {
        rdr.headers()?.iter().map(String::from).collect()
    };
    let idx = header_positions(&header, schema)?;
    let trim: Vec<char> = schema.trim_chars.chars().collect();
    let mut rows = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row: Vec<String> = rec
            .iter()
            .map(|f| f.trim_matches(trim.as_slice()).trim().to_string())
            .collect();
        let missing = idx.iter().zip(&schema.columns).any(|(&p, spec)| {
            spec.kind != ColumnKind::Skip
                && row
                    .get(p)
                    .is_none_or(|v| schema.missing.iter().any(|m| m == v))
        });
        if missing {
            dropped += 1;
        } else {
            rows.push(row);
        }
    }
    if dropped > 0 {
        warn!(
            "{}: dropped {dropped} rows with missing values",
            path.display()
        );
    }
    Ok((header, rows, dropped))
}

fn header_positions(header: &[String], schema: &Schema) -> Result<Vec<usize>> {
    schema
        .columns
        .iter()
        .map(|spec| {
            header
                .iter()
                .position(|h| h == &spec.name)
                .ok_or_else(|| Error::Data(format!("CSV header lacks schema column {}", spec.name)))
        })
        .collect()
}

pub(super) fn encode(
    header: &[String],
    rows: &[Vec<String>],
    schema: &Schema,
) -> Result<(Dataset, LoadReport)> {
    let idx = header_positions(header, schema)?;
    let mut columns = Vec::new();
    let mut width = 0;
    for spec in &schema.columns {
        if spec.kind == ColumnKind::Skip
            || spec.role == Role::Ignore && spec.kind != ColumnKind::Continuous
        {
            continue;
        }
        let categories = spec.categories.clone().unwrap_or_default();
        if spec.kind == ColumnKind::Binary && categories.len() > 2 {
            return Err(Error::Data(format!(
                "binary column {} has {} categories",
                spec.name,
                categories.len()
            )));
        }
        let w = if spec.kind == ColumnKind::Categorical && !spec.role.is_label() {
            categories.len()
        } else {
            1
        };
        columns.push(ColumnInfo {
            name: spec.name.clone(),
            kind: spec.kind,
            role: spec.role,
            start: width,
            width: w,
            categories,
        });
        width += w;
    }
    let mut data = vec![0.0; rows.len() * width];
    let mut unknown = 0usize;
    for (r, row) in rows.iter().enumerate() {
        let out = &mut data[r * width..(r + 1) * width];
        for col in &columns {
            let pos = idx[schema
                .columns
                .iter()
                .position(|s| s.name == col.name)
                .unwrap()];
            let raw = row[pos].as_str();
            match col.kind {
                ColumnKind::Continuous => {
                    out[col.start] = raw
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            Error::Data(format!("column {}: cannot parse {raw:?}", col.name))
                        })?;
                }
                ColumnKind::Categorical | ColumnKind::Binary => {
                    match col.categories.iter().position(|c| c == raw) {
                        Some(k) if col.kind == ColumnKind::Categorical && !col.role.is_label() => {
                            out[col.start + k] = 1.0
                        }
                        Some(k) => out[col.start] = k as f64,
                        None if col.role.is_label() => {
                            return Err(Error::Data(format!(
                                "label column {} has unseen value {raw:?}",
                                col.name
                            )))
                        }
                        None => unknown += 1,
                    }
                }
                ColumnKind::Skip => {}
            }
        }
    }
    if unknown > 0 {
        warn!("{unknown} unseen category values mapped to all-zero groups");
    }
    let ds = Dataset {
        columns,
        values: Matrix::new(rows.len(), width, data)?,
        standardization: vec![],
    };
    Ok((
        ds,
        LoadReport {
            rows_read: rows.len(),
            rows_dropped_missing: 0,
            unknown_categories: unknown,
        },
    ))
}

/// How rows are divided into training and test sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    /// Seeded shuffle, then the first `train_n` rows train and the next
    /// `test_n` rows test.
    Iid {
        train_n: usize,
        test_n: usize,
        seed: u64,
    },
    /// Partition by the label of `column`. Optional caps subsample each side.
    ByDomain {
        column: String,
        train_domains: Vec<String>,
        test_domains: Vec<String>,
        #[serde(default)]
        max_train: Option<usize>,
        #[serde(default)]
        max_test: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
}

/// Splits rows per `spec`. The two sides are disjoint.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    match spec {
        SplitSpec::Iid {
            train_n,
            test_n,
            seed,
        } => {
            let n = dataset.n_rows();
            if train_n + test_n > n {
                return Err(Error::InvalidArgument(format!(
                    "split asks for {train_n}+{test_n} rows, dataset has {n}"
                )));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut Seed(*seed).rng());
            let train = dataset.select_rows(&idx[..*train_n]);
            let test = dataset.select_rows(&idx[*train_n..train_n + test_n]);
            Ok((train, test))
        }
        SplitSpec::ByDomain {
            column,
            train_domains,
            test_domains,
            max_train,
            max_test,
            seed,
        } => {
            let info = dataset.info(column)?;
            if info.width != 1 {
                return Err(Error::Data(format!(
                    "domain column {column} must be a label column"
                )));
            }
            let resolve = |names: &[String]| -> Result<Vec<f64>> {
                names
                    .iter()
                    .map(|d| {
                        if info.categories.is_empty() {
                            d.parse::<f64>()
                                .map_err(|_| Error::Data(format!("bad domain value {d}")))
                        } else {
                            info.categories
                                .iter()
                                .position(|c| c == d)
                                .map(|k| k as f64)
                                .ok_or_else(|| {
                                    Error::Data(format!("unknown domain {d} in column {column}"))
                                })
                        }
                    })
                    .collect()
            };
            let tr = resolve(train_domains)?;
            let te = resolve(test_domains)?;
            if tr.iter().any(|d| te.contains(d)) {
                return Err(Error::InvalidArgument(
                    "train and test domains overlap".into(),
                ));
            }
            let (mut a, mut b) = (vec![], vec![]);
            for r in 0..dataset.n_rows() {
                let v = dataset.values.get(r, info.start);
                if tr.contains(&v) {
                    a.push(r);
                } else if te.contains(&v) {
                    b.push(r);
                }
            }
            if a.is_empty() || b.is_empty() {
                return Err(Error::Data("a split side selects no rows".into()));
            }
            let mut rng = Seed(*seed).rng();
            for (rows, cap) in [(&mut a, max_train), (&mut b, max_test)] {
                if let Some(cap) = cap {
                    if rows.len() > *cap {
                        rows.shuffle(&mut rng);
                        rows.truncate(*cap);
                        rows.sort_unstable();
                    }
                }
            }
            Ok((dataset.select_rows(&a), dataset.select_rows(&b)))
        }
    }
}
