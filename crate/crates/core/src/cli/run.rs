use std::fs;
use std::path::PathBuf;

use log::info;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::data::{
    gaussian_mi_nats, gen_correlated_gaussians, gen_fair_synthetic, load_covertype,
    load_csv_dataset, simulate_lotka_volterra, split, Dataset, Role,
};
use crate::error::Result;
use crate::eval::render::{
    accuracy_table, fairness_table, info_table, sweep_table, table, venn_table,
};
use crate::eval::{
    fairness_metrics, information_report, lambda_sweep, Classifier, PredictorConfig,
};
use crate::mi::{fit_smile, ksg_mi, SmileFitConfig};
use crate::numerics::checkpoint::save_mlp;
use crate::numerics::{Matrix, Seed};
use crate::subtraction::{
    train_information_subtraction, train_unbiased_predictor, venn_decompose, venn_report,
    DiagnosticsTrace, TRACE_HEADER,
};

/// Where a finished run left its artifacts.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub report: serde_json::Value,
}

struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&self, name: &str, body: &str) -> Result<()> {
        fs::write(self.path(name), body)?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<serde_json::Value> {
        let v = serde_json::to_value(value)?;
        fs::write(self.path(name), serde_json::to_string_pretty(&v)? + "\n")?;
        Ok(v)
    }

    fn trace(&self, trace: &DiagnosticsTrace) -> Result<()> {
        trace.write_csv(fs::File::create(self.path("trace.csv"))?)
    }

    /// Trace of several runs with a leading `run` column.
    fn traces(&self, runs: &[(String, &DiagnosticsTrace)]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path("trace.csv"))?;
        let mut header = vec!["run"];
        header.extend(TRACE_HEADER);
        w.write_record(&header)?;
        for (run, trace) in runs {
            for r in &trace.records {
                let mut rec = vec![run.clone()];
                rec.extend(r.csv_fields());
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn checkpoints(&self) -> Result<PathBuf> {
        let d = self.path("checkpoints");
        fs::create_dir_all(&d)?;
        Ok(d)
    }
}

/// Runs an already resolved and validated config into its run directory.
pub(crate) fn execute(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir)?;
    let out = Artifacts { dir: dir.clone() };
    out.text("config.resolved", &cfg.to_toml())?;
    info!("{} run in {}", cfg.kind.as_str(), dir.display());
    let report = match cfg.kind {
        ExperimentKind::LotkaVolterra => lotka_volterra(cfg, &out)?,
        ExperimentKind::Venn => venn(cfg, &out)?,
        ExperimentKind::FairSynth => fair_synth(cfg, &out)?,
        ExperimentKind::Sweep => sweep(cfg, &out)?,
        ExperimentKind::Adult => adult(cfg, &out)?,
        ExperimentKind::Covertype => covertype(cfg, &out)?,
        ExperimentKind::GaussianOracle => gaussian_oracle(cfg, &out)?,
    };
    Ok(RunSummary {
        run_dir: dir,
        report,
    })
}

fn labels_column(labels: &[usize]) -> Matrix {
    Matrix::from_raw(labels.len(), 1, labels.iter().map(|&l| l as f64).collect())
}

fn one_hot(labels: &[usize], k: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), k);
    for (i, &l) in labels.iter().enumerate() {
        m.set(i, l, 1.0);
    }
    m
}

fn lv_columns(cfg: &ExperimentConfig, out: &Artifacts) -> Result<(Dataset, bool)> {
    let sec = cfg.lotka_volterra.clone().unwrap_or_default();
    let ds = simulate_lotka_volterra(&sec.params)?;
    ds.write_csv(out.path("data.csv"))?;
    Ok((ds, sec.log_scale))
}

fn scaled(m: &Matrix, log: bool) -> Matrix {
    if log {
        m.map(f64::ln)
    } else {
        m.clone()
    }
}

fn lotka_volterra(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let (ds, log) = lv_columns(cfg, out)?;
    let (s, g) = (ds.column("S")?, ds.column("G")?);
    let (s_in, g_in) = (scaled(&s, log), scaled(&g, log));
    let sub = train_information_subtraction(&cfg.subtraction, &s_in, &g_in)?;
    out.trace(sub.trace())?;
    sub.save(out.checkpoints()?)?;
    let z = sub.generate_representation(&g_in)?;
    let info = information_report(&z, &s, &g, &cfg.oracle)?;
    out.text("report.txt", &info_table(&info, "S", "G"))?;
    out.json(
        "report.json",
        &json!({ "kind": cfg.kind, "info": info, "final_epoch": sub.trace().last() }),
    )
}

fn venn(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let (ds, log) = lv_columns(cfg, out)?;
    let (g, s, w) = (ds.column("G")?, ds.column("S")?, ds.column("W")?);
    let dec = venn_decompose(
        &scaled(&g, log),
        &scaled(&s, log),
        &scaled(&w, log),
        &cfg.subtraction,
        &cfg.oracle,
    )?;
    let runs: Vec<(String, &DiagnosticsTrace)> = dec
        .sectors
        .iter()
        .map(|s| (s.name.clone(), s.subtractor.trace()))
        .collect();
    out.traces(&runs)?;
    let ck = out.checkpoints()?;
    for sector in &dec.sectors {
        sector.subtractor.save(ck.join(&sector.name))?;
    }
    let report = venn_report(&g, &s, &w, &dec.sectors, &cfg.oracle)?;
    out.text("report.txt", &venn_table(&report))?;
    out.json("report.json", &json!({ "kind": cfg.kind, "venn": report }))
}

fn fair_data(cfg: &ExperimentConfig, out: &Artifacts) -> Result<(Matrix, Matrix)> {
    let f = cfg.fair_synth.clone().unwrap_or_default();
    let ds = gen_fair_synthetic(&f, Seed(cfg.seed).derive(1000))?;
    ds.write_csv(out.path("data.csv"))?;
    Ok((ds.column("X")?, ds.column("Y")?))
}

fn fair_synth(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let (x, y) = fair_data(cfg, out)?;
    let sub = train_information_subtraction(&cfg.subtraction, &x, &y)?;
    out.trace(sub.trace())?;
    sub.save(out.checkpoints()?)?;
    let z = sub.generate_representation(&y)?;
    let info = information_report(&z, &x, &y, &cfg.oracle)?;
    out.text("report.txt", &info_table(&info, "X", "Y"))?;
    out.json(
        "report.json",
        &json!({ "kind": cfg.kind, "info": info, "final_epoch": sub.trace().last() }),
    )
}

fn sweep(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let (x, y) = fair_data(cfg, out)?;
    let sec = cfg.sweep.clone().unwrap_or_default();
    let result = lambda_sweep(&cfg.subtraction, &sec.lambdas, &x, &y, &cfg.oracle)?;
    let runs: Vec<(String, &DiagnosticsTrace)> = result
        .points
        .iter()
        .zip(&result.traces)
        .map(|(p, t)| (format!("{}", p.lambda), t))
        .collect();
    out.traces(&runs)?;
    result.write_csv(fs::File::create(out.path("sweep.csv"))?)?;
    let zero_max = result.zero_lambda_leaks_most(sec.slack_bits);
    let increases = result.leak_increases(sec.slack_bits);
    let mut text = sweep_table(&result);
    text.push_str(&format!(
        "\nlambda=0 leaks most: {}\nleak increases beyond slack: {}\n",
        if zero_max { "yes" } else { "no" },
        if increases.is_empty() {
            "none".to_string()
        } else {
            format!("{increases:?}")
        }
    ));
    out.text("report.txt", &text)?;
    out.json(
        "report.json",
        &json!({
            "kind": cfg.kind,
            "points": result.points,
            "zero_lambda_leaks_most": zero_max,
            "leak_increases": increases,
        }),
    )
}

struct Split {
    x: Matrix,
    y: Vec<usize>,
    c: Vec<usize>,
}

fn standardized_split(
    ds: &Dataset,
    spec: &crate::data::SplitSpec,
    condition: Role,
) -> Result<(Split, Split)> {
    let (mut train, mut test) = split(ds, spec)?;
    let stats = train.fit_standardization();
    train.apply_standardization(&stats)?;
    test.apply_standardization(&stats)?;
    let part = |d: &Dataset| -> Result<Split> {
        Ok(Split {
            x: d.role_matrix(Role::Feature)?,
            y: d.labels(Role::Target)?,
            c: d.labels(condition)?,
        })
    };
    Ok((part(&train)?, part(&test)?))
}

fn n_classes(a: &[usize], b: &[usize]) -> usize {
    a.iter().chain(b).max().map_or(2, |m| (m + 1).max(2))
}

fn adult(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let sec = cfg.adult.as_ref().expect("validated");
    let (ds, load) = load_csv_dataset(&sec.path, &sec.schema)?;
    let (tr, te) = standardized_split(&ds, &sec.split, Role::Protected)?;
    info!(
        "adult: {} train, {} test, {} features",
        tr.y.len(),
        te.y.len(),
        tr.x.cols()
    );
    let k = n_classes(&tr.y, &te.y);
    let c_tr = labels_column(&tr.c);
    let c_te = labels_column(&te.c);
    let (sub, clf_z, training) = train_unbiased_predictor(&cfg.subtraction, &tr.x, &c_tr, &tr.y)?;
    out.trace(sub.trace())?;
    let ck = out.checkpoints()?;
    sub.save(ck.join("subtraction"))?;
    save_mlp(clf_z.model(), ck.join("predictor_z.bin"))?;
    let z_tr = sub.generate_representation(&tr.x)?;
    let z_te = sub.generate_representation(&te.x)?;

    let pcfg = PredictorConfig::from_subtraction(&cfg.subtraction);
    let xc_tr = Matrix::hcat(&[&tr.x, &c_tr])?;
    let xc_te = Matrix::hcat(&[&te.x, &c_te])?;
    let (clf_xc, _) = Classifier::train(&xc_tr, &tr.y, k, &pcfg)?;
    let (clf_x, _) = Classifier::train(&tr.x, &tr.y, k, &pcfg)?;
    save_mlp(clf_xc.model(), ck.join("predictor_xc.bin"))?;
    save_mlp(clf_x.model(), ck.join("predictor_x.bin"))?;
    let f_xc = fairness_metrics(&clf_xc.predict(&xc_te)?, &te.y, &te.c)?;
    let f_x = fairness_metrics(&clf_x.predict(&te.x)?, &te.y, &te.c)?;
    let f_z = fairness_metrics(&clf_z.predict(&z_te)?, &te.y, &te.c)?;
    let info = information_report(&z_tr, &c_tr, &tr.x, &cfg.oracle)?;
    let text = format!(
        "{}\n{}",
        info_table(&info, "C", "X"),
        fairness_table(&[("{X,C}", &f_xc), ("X", &f_x), ("Z", &f_z)])
    );
    out.text("report.txt", &text)?;
    out.json(
        "report.json",
        &json!({
            "kind": cfg.kind,
            "load": load,
            "train_rows": tr.y.len(),
            "test_rows": te.y.len(),
            "feature_dim": tr.x.cols(),
            "info": info,
            "unbiased_training": training,
            "fairness": { "xc": f_xc, "x": f_x, "z": f_z },
        }),
    )
}

fn covertype(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let sec = cfg.covertype.as_ref().expect("validated");
    let (ds, load) = load_covertype(&sec.path)?;
    let domains = ds.info("wilderness")?.categories.len();
    let (tr, te) = standardized_split(&ds, &sec.split, Role::Domain)?;
    info!(
        "covertype: {} train, {} test, {} features",
        tr.y.len(),
        te.y.len(),
        tr.x.cols()
    );
    let k = n_classes(&tr.y, &te.y);
    let c_tr = one_hot(&tr.c, domains);
    let c_te = one_hot(&te.c, domains);
    let sub = train_information_subtraction(&cfg.subtraction, &c_tr, &tr.x)?;
    out.trace(sub.trace())?;
    let ck = out.checkpoints()?;
    sub.save(ck.join("subtraction"))?;
    let z_tr = sub.generate_representation(&tr.x)?;
    let z_te = sub.generate_representation(&te.x)?;
    let pcfg = PredictorConfig::from_subtraction(&cfg.subtraction);
    let sets: [(&str, Matrix, Matrix); 4] = [
        (
            "{X,C}",
            Matrix::hcat(&[&tr.x, &c_tr])?,
            Matrix::hcat(&[&te.x, &c_te])?,
        ),
        ("X", tr.x.clone(), te.x.clone()),
        ("Z", z_tr.clone(), z_te.clone()),
        (
            "{X,Z}",
            Matrix::hcat(&[&tr.x, &z_tr])?,
            Matrix::hcat(&[&te.x, &z_te])?,
        ),
    ];
    let mut accuracies = Vec::new();
    for (i, (name, train_f, test_f)) in sets.iter().enumerate() {
        let (clf, _) = Classifier::train(train_f, &tr.y, k, &pcfg)?;
        save_mlp(clf.model(), ck.join(format!("predictor_{i}.bin")))?;
        let acc = clf.accuracy(test_f, &te.y)?;
        info!("covertype: accuracy with {name} = {acc:.4}");
        accuracies.push((*name, acc));
    }
    out.text("report.txt", &accuracy_table(&accuracies))?;
    let acc_json: serde_json::Map<String, serde_json::Value> = accuracies
        .iter()
        .map(|(n, a)| (n.to_string(), json!(a)))
        .collect();
    out.json(
        "report.json",
        &json!({
            "kind": cfg.kind,
            "load": load,
            "train_rows": tr.y.len(),
            "test_rows": te.y.len(),
            "feature_dim": tr.x.cols(),
            "accuracy": acc_json,
        }),
    )
}

#[derive(Serialize)]
struct OracleRow {
    rho: f64,
    truth_nats: f64,
    ksg_nats: f64,
    smile_nats: f64,
}

fn gaussian_oracle(cfg: &ExperimentConfig, out: &Artifacts) -> Result<serde_json::Value> {
    let sec = cfg.gaussian_oracle.clone().unwrap_or_default();
    let mut w = csv::Writer::from_path(out.path("trace.csv"))?;
    w.write_record(["run", "step", "smile_nats"])?;
    let mut rows = Vec::new();
    for (i, &rho) in sec.rhos.iter().enumerate() {
        let (x, y) = gen_correlated_gaussians(sec.n, rho, 1, Seed(cfg.seed).derive(i as u64))?;
        let ksg = ksg_mi(&x, &y, cfg.oracle.ksg_k)?.value_nats;
        let critic = SmileFitConfig {
            seed: sec.critic.seed.derive(100 + i as u64),
            ..sec.critic.clone()
        };
        let fit = fit_smile(&x, &y, &critic)?;
        for (step, v) in &fit.trace {
            w.write_record([i.to_string(), step.to_string(), v.to_string()])?;
        }
        let row = OracleRow {
            rho,
            truth_nats: gaussian_mi_nats(rho, 1),
            ksg_nats: ksg,
            smile_nats: fit.estimate_nats,
        };
        info!(
            "rho={rho}: truth {:.4}, ksg {:.4}, smile {:.4} nats",
            row.truth_nats, row.ksg_nats, row.smile_nats
        );
        rows.push(row);
    }
    w.flush()?;
    let header = ["rho", "truth", "KSG", "SMILE"].map(String::from).to_vec();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}", r.rho),
                format!("{:.2}", r.truth_nats),
                format!("{:.2}", r.ksg_nats),
                format!("{:.2}", r.smile_nats),
            ]
        })
        .collect();
    out.text("report.txt", &format!("nats\n{}", table(&header, &body)))?;
    out.json("report.json", &json!({ "kind": cfg.kind, "rows": rows }))
}
