//! Layouts of the two public benchmark tables.

use std::path::Path;

use super::dataset::{encode, ColumnKind, ColumnSpec, Dataset, LoadReport, Role, Schema};
use crate::error::{Error, Result};

fn col(name: &str, kind: ColumnKind, role: Role) -> ColumnSpec {
    ColumnSpec {
        name: name.into(),
        kind,
        role,
        categories: None,
    }
}

/// Schema for the raw census income files (`adult.data`, `adult.test`).
///
/// Sex is the protected label (`Female` = 0, `Male` = 1) and income the
/// target (`<=50K` = 0, `>50K` = 1). `?` is kept as its own category and the
/// sampling weight column is dropped.
pub fn adult_schema() -> Schema {
    use ColumnKind::*;
    let f = Role::Feature;
    Schema {
        columns: vec![
            col("age", Continuous, f),
            col("workclass", Categorical, f),
            col("fnlwgt", Skip, Role::Ignore),
            col("education", Categorical, f),
            col("education_num", Continuous, f),
            col("marital_status", Categorical, f),
            col("occupation", Categorical, f),
            col("relationship", Categorical, f),
            col("race", Categorical, f),
            ColumnSpec {
                categories: Some(vec!["Female".into(), "Male".into()]),
                ..col("sex", Categorical, Role::Protected)
            },
            col("capital_gain", Continuous, f),
            col("capital_loss", Continuous, f),
            col("hours_per_week", Continuous, f),
            col("native_country", Categorical, f),
            ColumnSpec {
                categories: Some(vec!["<=50K".into(), ">50K".into()]),
                ..col("income", Categorical, Role::Target)
            },
        ],
        missing: vec![String::new()],
        headerless: true,
        comment: Some('|'),
        trim_chars: ".".into(),
    }
}

/// Wilderness areas in file order.
pub const COVERTYPE_DOMAINS: [&str; 4] = ["rawah", "neota", "comanche_peak", "cache_la_poudre"];

const COVERTYPE_CONTINUOUS: [&str; 10] = [
    "elevation",
    "aspect",
    "slope",
    "horizontal_distance_to_hydrology",
    "vertical_distance_to_hydrology",
    "horizontal_distance_to_roadways",
    "hillshade_9am",
    "hillshade_noon",
    "hillshade_3pm",
    "horizontal_distance_to_fire_points",
];

/// Loads the raw 55-column forest cover file (`covertype.data`, no header).
///
/// Features are the ten continuous columns and the forty soil indicators.
/// The four wilderness indicators collapse into a `wilderness` domain label
/// and the cover type (1..=7) becomes the target `cover_type` (0..=6).
pub fn load_covertype(path: impl AsRef<Path>) -> Result<(Dataset, LoadReport)> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut header: Vec<String> = COVERTYPE_CONTINUOUS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=40).map(|i| format!("soil_{i}")));
    header.push("wilderness".into());
    header.push("cover_type".into());
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 55 {
            return Err(Error::Data(format!(
                "{}: line {} has {} fields, expected 55",
                path.display(),
                line + 1,
                rec.len()
            )));
        }
        let mut row: Vec<String> = rec.iter().take(10).map(String::from).collect();
        row.extend(rec.iter().skip(14).take(40).map(String::from));
        let area = (10..14).filter(|&j| &rec[j] == "1").collect::<Vec<_>>();
        let [area] = area[..] else {
            return Err(Error::Data(format!(
                "{}: line {} does not mark exactly one wilderness area",
                path.display(),
                line + 1
            )));
        };
        row.push(COVERTYPE_DOMAINS[area - 10].into());
        row.push(rec[54].to_string());
        rows.push(row);
    }
    let mut columns: Vec<ColumnSpec> = COVERTYPE_CONTINUOUS
        .iter()
        .map(|n| col(n, ColumnKind::Continuous, Role::Feature))
        .collect();
    columns.extend((1..=40).map(|i| ColumnSpec {
        categories: Some(vec!["0".into(), "1".into()]),
        ..col(&format!("soil_{i}"), ColumnKind::Binary, Role::Feature)
    }));
    columns.push(ColumnSpec {
        categories: Some(COVERTYPE_DOMAINS.iter().map(|s| s.to_string()).collect()),
        ..col("wilderness", ColumnKind::Categorical, Role::Domain)
    });
    columns.push(ColumnSpec {
        categories: Some((1..=7).map(|i| i.to_string()).collect()),
        ..col("cover_type", ColumnKind::Categorical, Role::Target)
    });
    let schema = Schema {
        columns,
        missing: vec![],
        headerless: true,
        comment: None,
        trim_chars: String::new(),
    };
    encode(&header, &rows, &schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::load_csv_dataset;
    use std::io::Write;

    #[test]
    fn adult_layout() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            "|1x3 Cross validator\n\
             39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K.\n\
             50, ?, 83311, HS-grad, 9, Married-civ-spouse, ?, Husband, Black, Female, 0, 0, 13, ?, >50K.\n"
        )
        .unwrap();
        let (ds, rep) = load_csv_dataset(f.path(), &adult_schema()).unwrap();
        assert_eq!(rep.rows_read, 2);
        assert_eq!(ds.labels(Role::Protected).unwrap(), vec![1, 0]);
        assert_eq!(ds.labels(Role::Target).unwrap(), vec![0, 1]);
        // 5 continuous + 2 categories in each of 7 categorical columns
        assert_eq!(ds.role_matrix(Role::Feature).unwrap().cols(), 5 + 14);
        assert!(ds.info("fnlwgt").is_err());
    }

    fn cover_line(area: usize, cover: usize) -> String {
        let mut v = vec!["1".to_string(); 10];
        v.extend((0..4).map(|j| if j == area { "1" } else { "0" }.to_string()));
        v.extend((0..40).map(|j| if j == 3 { "1" } else { "0" }.to_string()));
        v.push(cover.to_string());
        v.join(",")
    }

    #[test]
    fn covertype_layout() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}\n{}", cover_line(1, 7), cover_line(3, 2)).unwrap();
        let (ds, _) = load_covertype(f.path()).unwrap();
        assert_eq!(ds.role_matrix(Role::Feature).unwrap().cols(), 50);
        assert_eq!(ds.labels(Role::Domain).unwrap(), vec![1, 3]);
        assert_eq!(ds.labels(Role::Target).unwrap(), vec![6, 1]);
    }

    #[test]
    fn covertype_rejects_bad_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1,2,3").unwrap();
        assert!(load_covertype(f.path()).is_err());
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "{}", cover_line(9, 1)).unwrap();
        assert!(load_covertype(g.path()).is_err());
    }
}
