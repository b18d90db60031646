//! Plain-text tables with two decimals.

use super::{FairnessReport, InfoReport, SweepResult, VennReport};

/// Right-aligned columns separated by two spaces, with a rule under the header.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = header.iter().map(|h| h.chars().count()).collect::<Vec<_>>();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:>w$}", c, w = width[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn f2(v: f64) -> String {
    format!("{v:.2}")
}

/// Seven-column information table with `X`, `Y` replaced by the given names.
pub fn info_table(report: &InfoReport, x_name: &str, y_name: &str) -> String {
    let header: Vec<String> = report
        .cells()
        .iter()
        .map(|(label, _)| {
            label
                .chars()
                .map(|ch| match ch {
                    'X' => x_name.to_string(),
                    'Y' => y_name.to_string(),
                    c => c.to_string(),
                })
                .collect()
        })
        .collect();
    let row = report.cells().iter().map(|(_, c)| f2(c.bits)).collect();
    table(&header, &[row])
}

/// Accuracy, BA and gaps, one column per feature set.
pub fn fairness_table(columns: &[(&str, &FairnessReport)]) -> String {
    let mut header = vec![String::new()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    let metric = |name: &str, f: &dyn Fn(&FairnessReport) -> f64| -> Vec<String> {
        let mut r = vec![name.to_string()];
        r.extend(columns.iter().map(|(_, rep)| f2(f(rep))));
        r
    };
    let rows = vec![
        metric("Accuracy", &|r| r.accuracy),
        metric("BA", &|r| r.ba),
        metric("Gap RMS", &|r| r.gap_rms),
        metric("Gap max", &|r| r.gap_max),
    ];
    table(&header, &rows)
}

/// One accuracy row, one column per feature set.
pub fn accuracy_table(columns: &[(&str, f64)]) -> String {
    let mut header = vec![String::new()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    let mut row = vec!["Accuracy".to_string()];
    row.extend(columns.iter().map(|(_, a)| f2(*a)));
    table(&header, &[row])
}

/// Base quantities followed by one row per sector.
pub fn venn_table(report: &VennReport) -> String {
    let b = &report.base;
    let mut out = String::new();
    let base = vec![
        vec![
            "H(G)".into(),
            f2(b.h_g),
            "H(S)".into(),
            f2(b.h_s),
            "H(W)".into(),
            f2(b.h_w),
        ],
        vec![
            "I(G;S)".into(),
            f2(b.i_gs),
            "I(S;W)".into(),
            f2(b.i_sw),
            "I(W;G)".into(),
            f2(b.i_wg),
        ],
    ];
    let header: Vec<String> = ["", "bits", "", "bits", "", "bits"]
        .map(String::from)
        .to_vec();
    out.push_str(&table(&header, &base));
    out.push('\n');
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let c = r.condition.join(",");
            vec![
                format!("I({};G | {c})", r.sector),
                f2(r.i_z_g_given_c),
                format!("I({};{c})", r.sector),
                f2(r.i_z_c),
                format!("I(G;{c})"),
                f2(r.i_g_c),
            ]
        })
        .collect();
    out.push_str(&table(&header, &rows));
    out
}

/// λ against retained and leaked information.
pub fn sweep_table(result: &SweepResult) -> String {
    let header = ["lambda", "I(Y;X,Z)", "I(X;Z)"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|p| {
            vec![
                format!("{}", p.lambda),
                f2(p.i_full_bits),
                f2(p.i_leak_bits),
            ]
        })
        .collect();
    table(&header, &rows)
}
