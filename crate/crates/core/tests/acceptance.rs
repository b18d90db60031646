//! Acceptance criteria, one test each, at desk scale.
//!
//! Every test writes a single `PASS`/`FAIL` line to stderr (bypassing the
//! harness capture). Criteria with exact answers also assert; criteria that
//! depend on stochastic training only report, so an honest miss does not
//! break the build.
//!
//! Environment:
//! - `INFOSUB_ACCEPTANCE_SEEDS`: seeds per multi-seed criterion (default 5)
//! - `INFOSUB_ADULT`: path to `adult.data` (default `data/adult/adult.data`)
//! - `INFOSUB_COVERTYPE`: path to `covtype.data` (default `data/covertype/covtype.data`)

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use infosub::cli::{run_config, ExperimentConfig};
use infosub::data::{simulate_lotka_volterra, LvParams};
use infosub::eval::fairness_metrics;
use infosub::mi::{dv_estimate_weighted, Block, Critic};
use infosub::numerics::{Activation, Matrix, Mlp, Seed};
use rand::Rng;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn seeds() -> u64 {
    std::env::var("INFOSUB_ACCEPTANCE_SEEDS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(5)
}

fn data_path(var: &str, default: &str) -> PathBuf {
    std::env::var(var)
        .map(PathBuf::from)
        .unwrap_or_else(|_| root().join(default))
}

fn report(id: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let line = format!(
        "{} [{id:>2}] {name}: {detail} ({:.0}s)\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn config(name: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(root().join("configs").join(name)).unwrap();
    ExperimentConfig::from_toml(&text).unwrap()
}

fn run(cfg: &ExperimentConfig, out: &Path, seed: u64) -> Value {
    run_config(cfg, Some(out), Some(seed)).unwrap().report
}

fn bits(v: &Value, cell: &str) -> f64 {
    v["info"][cell]["bits"].as_f64().unwrap()
}

#[test]
fn c01_gradient_oracle() {
    let t = Instant::now();
    let mut rng = Seed(77).rng();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let mut dims = vec![rng.random_range(1..=5)];
        for _ in 0..rng.random_range(1..=3) {
            dims.push(rng.random_range(1..=32));
        }
        dims.push(rng.random_range(1..=3));
        let act = if case % 2 == 0 {
            Activation::Relu
        } else {
            Activation::Tanh
        };
        let init = Mlp::new(&dims, act, Seed(case)).unwrap();
        let biases: Vec<Vec<f64>> = dims[1..]
            .iter()
            .map(|&d| (0..d).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let model = Mlp::from_parameters(init.weights().to_vec(), biases, act).unwrap();
        let rows = rng.random_range(1..=4);
        let x = Matrix::new(
            rows,
            dims[0],
            (0..rows * dims[0])
                .map(|_| rng.random_range(-1.5..1.5))
                .collect(),
        )
        .unwrap();
        let out_dim = *dims.last().unwrap();
        let r = Matrix::new(
            rows,
            out_dim,
            (0..rows * out_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let loss = |m: &Mlp| -> f64 {
            m.predict(&x)
                .unwrap()
                .data()
                .iter()
                .zip(r.data())
                .map(|(a, b)| a * b)
                .sum()
        };
        let (_, cache) = model.forward(&x).unwrap();
        let (grads, _) = model.backward(&cache, &r).unwrap();
        for layer in 0..model.weights().len() {
            let n = model.weights()[layer].data().len();
            for _ in 0..n.min(24) {
                let idx = rng.random_range(0..n);
                let mut w = model.weights().to_vec();
                w[layer].data_mut()[idx] += eps;
                let up =
                    loss(&Mlp::from_parameters(w.clone(), model.biases().to_vec(), act).unwrap());
                w[layer].data_mut()[idx] -= 2.0 * eps;
                let down = loss(&Mlp::from_parameters(w, model.biases().to_vec(), act).unwrap());
                let fd = (up - down) / (2.0 * eps);
                let a = grads.weights[layer].data()[idx];
                worst = worst.max((a - fd).abs() / (a.abs() + fd.abs()).max(1e-4));
            }
        }
    }
    let pass = worst < 1e-4 && t.elapsed().as_secs() < 60;
    report(
        1,
        "gradient oracle",
        pass,
        &format!("max relative error {worst:.2e}"),
        t,
    );
    assert!(pass);
}

#[test]
fn c02_estimators_against_gaussian_truth() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("gaussian_oracle.toml");
    let rep = run(&cfg, dir.path(), cfg.seed);
    let mut pass = true;
    let mut cells = vec![];
    for row in rep["rows"].as_array().unwrap() {
        let f = |k: &str| row[k].as_f64().unwrap();
        let (truth, ksg, smile) = (f("truth_nats"), f("ksg_nats"), f("smile_nats"));
        pass &= (ksg - truth).abs() <= 0.05 && (smile - truth).abs() <= 0.10;
        cells.push(format!(
            "rho {}: ksg {ksg:+.3} smile {smile:+.3} truth {truth:.3}",
            f("rho")
        ));
    }
    pass &= t.elapsed().as_secs() < 300;
    report(
        2,
        "MI estimators vs Gaussian truth",
        pass,
        &cells.join("; "),
        t,
    );
}

#[test]
fn c03_exact_kl_oracle() {
    let t = Instant::now();
    let mut rng = Seed(3).rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let pa = [p[0] + p[1], p[2] + p[3]];
        let pb = [p[0] + p[2], p[1] + p[3]];
        // Hidden unit (a, b) fires on one-hot pair (a, b); the output weight is the log ratio.
        let mut w1 = Matrix::zeros(4, 4);
        let mut w2 = Matrix::zeros(4, 1);
        let (mut ra, mut rb, mut wj, mut wm) = (vec![], vec![], vec![], vec![]);
        let mut exact = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let u = 2 * a + b;
                let ratio = p[u] / (pa[a] * pb[b]);
                w1.set(a, u, 1.0);
                w1.set(2 + b, u, 1.0);
                w2.set(u, 0, ratio.ln());
                exact += p[u] * ratio.ln();
                ra.extend([(a == 0) as u8 as f64, (a == 1) as u8 as f64]);
                rb.extend([(b == 0) as u8 as f64, (b == 1) as u8 as f64]);
                wj.push(p[u]);
                wm.push(pa[a] * pb[b]);
            }
        }
        let model = Mlp::from_parameters(
            vec![w1, w2],
            vec![vec![-1.0; 4], vec![0.0]],
            Activation::Relu,
        )
        .unwrap();
        let critic =
            Critic::from_model(model, vec![Block::new("a", 2), Block::new("b", 2)]).unwrap();
        let (ma, mb) = (
            Matrix::new(4, 2, ra).unwrap(),
            Matrix::new(4, 2, rb).unwrap(),
        );
        let est = dv_estimate_weighted(&critic, &[&ma, &mb], &wj, &[&ma, &mb], &wm).unwrap();
        worst = worst.max((est.value_nats - exact).abs());
    }
    let pass = worst < 1e-9;
    report(
        3,
        "exact-KL oracle",
        pass,
        &format!("max |DV - KL| = {worst:.1e} over 200 tables"),
        t,
    );
    assert!(pass);
}

#[test]
fn c04_simulator_exactness() {
    let t = Instant::now();
    let p = LvParams::default();
    let s = p.step(p.initial());
    let hand = [8.94375, 10.7525, 11.015, 101.75];
    let err = [s.w, s.s, s.r, s.g]
        .iter()
        .zip(hand)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ds = simulate_lotka_volterra(&p).unwrap();
    let healthy = ds.values().data().iter().all(|v| v.is_finite())
        && ["W", "S", "R", "G"]
            .iter()
            .all(|c| ds.column(c).unwrap().data().iter().all(|&v| v > 0.0));
    let pass = err < 1e-12 && healthy && ds.values().rows() == 1500;
    report(
        4,
        "simulator exactness",
        pass,
        &format!("one-step error {err:.1e}, 1500 rows positive and finite: {healthy}"),
        t,
    );
    assert!(pass);
}

#[test]
fn c05_synthetic_subtraction() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("lotka_volterra.toml");
    let mut good = 0;
    let mut cells = vec![];
    for seed in 0..seeds() {
        let rep = run(&cfg, dir.path(), seed);
        let (cond, leak) = (bits(&rep, "i_zy_given_x"), bits(&rep, "i_zx"));
        good += (cond >= 1.0 && leak <= 0.5) as u64;
        cells.push(format!("{cond:.2}/{leak:.2}"));
    }
    let need = (seeds() * 4).div_ceil(5);
    report(
        5,
        "synthetic subtraction",
        good >= need,
        &format!(
            "{good}/{} seeds with I(Z;G|S) >= 1.0 and I(Z;S) <= 0.5 bits [{}]",
            seeds(),
            cells.join(", ")
        ),
        t,
    );
}

#[test]
fn c06_synthetic_fair_learning() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fair_synth.toml");
    let mut good = 0;
    let mut cells = vec![];
    for seed in 0..seeds() {
        let rep = run(&cfg, dir.path(), seed);
        let (cond, leak) = (bits(&rep, "i_zy_given_x"), bits(&rep, "i_zx"));
        good += (cond >= 2.0 && leak <= 0.5) as u64;
        cells.push(format!("{cond:.2}/{leak:.2}"));
    }
    let need = (seeds() * 4).div_ceil(5);
    report(
        6,
        "synthetic fair learning",
        good >= need,
        &format!(
            "{good}/{} seeds with I(Z;Y|X) >= 2.0 and I(Z;X) <= 0.5 bits [{}]",
            seeds(),
            cells.join(", ")
        ),
        t,
    );
}

#[test]
fn c07_adult_fairness_direction() {
    let t = Instant::now();
    let path = data_path("INFOSUB_ADULT", "data/adult/adult.data");
    if !path.is_file() {
        report(
            7,
            "adult fairness direction",
            false,
            &format!("{} not found", path.display()),
            t,
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("adult.toml");
    cfg.adult.as_mut().unwrap().path = path;
    let rep = run(&cfg, dir.path(), cfg.seed);
    let f = |set: &str, k: &str| rep["fairness"][set][k].as_f64().unwrap();
    let (gz, gx) = (f("z", "gap_rms"), f("x", "gap_rms"));
    let (bz, bx) = (f("z", "ba"), f("x", "ba"));
    let (az, ax) = (f("z", "accuracy"), f("x", "accuracy"));
    let pass = gz <= 0.6 * gx && bz > bx && az >= ax - 0.03;
    report(
        7,
        "adult fairness direction",
        pass,
        &format!("gap_rms Z {gz:.3} vs X {gx:.3}, BA Z {bz:.3} vs X {bx:.3}, accuracy Z {az:.3} vs X {ax:.3}"),
        t,
    );
}

#[test]
fn c08_covertype_direction() {
    let t = Instant::now();
    let path = data_path("INFOSUB_COVERTYPE", "data/covertype/covtype.data");
    if !path.is_file() {
        report(
            8,
            "covertype direction",
            false,
            &format!("{} not found; set INFOSUB_COVERTYPE", path.display()),
            t,
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("covertype.toml");
    cfg.covertype.as_mut().unwrap().path = path;
    let mut good = 0;
    let mut cells = vec![];
    for seed in 0..seeds() {
        let rep = run(&cfg, dir.path(), seed);
        let a = |k: &str| rep["accuracy"][k].as_f64().unwrap();
        let (xz, x, z) = (a("{X,Z}"), a("X"), a("Z"));
        good += (xz >= x && x > z) as u64;
        cells.push(format!("{xz:.3}/{x:.3}/{z:.3}"));
    }
    let need = (seeds() * 3).div_ceil(5);
    report(
        8,
        "covertype direction",
        good >= need,
        &format!(
            "{good}/{} seeds with acc{{X,Z}} >= acc X > acc Z [{}]",
            seeds(),
            cells.join(", ")
        ),
        t,
    );
}

#[test]
fn c09_fairness_metric_oracle() {
    let t = Instant::now();
    let mut rng = Seed(9).rng();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=150);
        let k = rng.random_range(1..=4);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let prot: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let r = fairness_metrics(&preds, &truth, &prot).unwrap();
        let correct = (0..n).filter(|&i| preds[i] == truth[i]).count() as f64 / n as f64;
        let mut recalls = vec![];
        let mut gaps = vec![];
        for y in 0..k {
            let rate = |grp: Option<usize>| {
                let sel: Vec<usize> = (0..n)
                    .filter(|&i| truth[i] == y && grp.is_none_or(|g| prot[i] == g))
                    .collect();
                (!sel.is_empty()).then(|| {
                    sel.iter().filter(|&&i| preds[i] == y).count() as f64 / sel.len() as f64
                })
            };
            if let Some(rec) = rate(None) {
                recalls.push(rec);
            }
            if let (Some(a), Some(b)) = (rate(Some(0)), rate(Some(1))) {
                gaps.push(a - b);
            }
        }
        let ba = recalls.iter().sum::<f64>() / recalls.len() as f64;
        let rms = if gaps.is_empty() {
            0.0
        } else {
            (gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64).sqrt()
        };
        let max = gaps.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if r.accuracy != correct || r.ba != ba || r.gap_rms != rms || r.gap_max != max {
            mismatches += 1;
        }
    }
    let hand = fairness_metrics(
        &[0, 0, 1, 1, 0, 1, 1, 1],
        &[0, 0, 1, 1, 0, 0, 1, 1],
        &[0, 0, 0, 0, 1, 1, 1, 1],
    )
    .unwrap();
    let hand_ok = (hand.gap_rms - 0.35355).abs() < 1e-5 && hand.gap_max == 0.5;
    let pass = mismatches == 0 && hand_ok;
    report(
        9,
        "fairness-metric oracle",
        pass,
        &format!("{mismatches} mismatches in 1000, hand case ok: {hand_ok}"),
        t,
    );
    assert!(pass);
}

#[test]
fn c10_venn_decomposition() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("venn.toml");
    let rep = run(&cfg, dir.path(), cfg.seed);
    let v = &rep["venn"];
    let i_gs = v["base"]["i_gs"].as_f64().unwrap();
    let rows = v["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["sector"].as_str().unwrap()).collect();
    let shaped = names == ["Z1", "Z4", "Z5", "Z7"];
    let identity = rows.iter().all(|r| {
        let f = |k: &str| r[k].as_f64().unwrap();
        f("i_z_g_given_c") == f("i_zc_g") - f("i_g_c")
    });
    let pass = shaped && identity && (i_gs - 0.93).abs() <= 0.3;
    report(
        10,
        "venn decomposition",
        pass,
        &format!("sectors {names:?}, identity cells exact: {identity}, I(G;S) = {i_gs:.2} bits"),
        t,
    );
}

#[test]
fn c11_lambda_sweep() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sweep.toml");
    let summary = run_config(&cfg, Some(dir.path()), None).unwrap();
    let rep = summary.report;
    let zero_max = rep["zero_lambda_leaks_most"].as_bool().unwrap();
    let increases = rep["leak_increases"].as_array().unwrap().len();
    let csv_ok = summary.run_dir.join("sweep.csv").is_file();
    let leaks: Vec<String> = rep["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{}:{:.2}", p["lambda"], p["i_leak_bits"].as_f64().unwrap()))
        .collect();
    let pass = zero_max && increases == 0 && csv_ok;
    report(
        11,
        "lambda sweep",
        pass,
        &format!("leak by lambda [{}], lambda=0 maximal: {zero_max}, increases beyond slack: {increases}", leaks.join(", ")),
        t,
    );
}

#[test]
fn c12_determinism() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    for name in [
        "lotka_volterra.toml",
        "fair_synth.toml",
        "gaussian_oracle.toml",
    ] {
        let mut cfg = config(name);
        cfg.subtraction.n1 = 5;
        cfg.subtraction.n2 = 15;
        if let Some(g) = cfg.gaussian_oracle.as_mut() {
            g.n = 500;
            g.critic.steps = 50;
            g.critic.log_every = 10;
        }
        let first = run_config(&cfg, Some(&dir.path().join("a")), Some(3))
            .unwrap()
            .run_dir;
        let resolved = ExperimentConfig::from_toml(
            &std::fs::read_to_string(first.join("config.resolved")).unwrap(),
        )
        .unwrap();
        let second = run_config(&resolved, Some(&dir.path().join("b")), None)
            .unwrap()
            .run_dir;
        same &= std::fs::read(first.join("trace.csv")).unwrap()
            == std::fs::read(second.join("trace.csv")).unwrap();
    }
    report(
        12,
        "determinism",
        same,
        &format!("trace.csv identical after re-running resolved configs: {same}"),
        t,
    );
    assert!(same);
}
