//! Closed-form and brute-force checks for the estimators and metrics.

use infosub::data::gen_correlated_gaussians;
use infosub::eval::fairness_metrics;
use infosub::mi::{
    dv_bound, dv_estimate_weighted, ksg_mi, plugin_entropy, shuffle_marginal, Block, Critic,
};
use infosub::numerics::{Activation, Matrix, Mlp, Seed};
use rand::Rng;

/// Exact `KL(P_ab ‖ P_a ⊗ P_b)` by enumeration.
fn exact_mi(p: &[[f64; 2]; 2]) -> f64 {
    let pa = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let pb = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let mut kl = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            if p[a][b] > 0.0 {
                kl += p[a][b] * (p[a][b] / (pa[a] * pb[b])).ln();
            }
        }
    }
    kl
}

/// A critic that outputs `table[a][b]` on one-hot inputs: hidden unit
/// `(a, b)` fires only when both indicators are on.
fn table_critic(table: &[[f64; 2]; 2]) -> Critic {
    let mut w1 = Matrix::zeros(4, 4);
    let mut w2 = Matrix::zeros(4, 1);
    for a in 0..2 {
        for b in 0..2 {
            let unit = 2 * a + b;
            w1.set(a, unit, 1.0);
            w1.set(2 + b, unit, 1.0);
            w2.set(unit, 0, table[a][b]);
        }
    }
    let model = Mlp::from_parameters(
        vec![w1, w2],
        vec![vec![-1.0; 4], vec![0.0]],
        Activation::Relu,
    )
    .unwrap();
    Critic::from_model(model, vec![Block::new("a", 2), Block::new("b", 2)]).unwrap()
}

fn one_hot(v: usize) -> [f64; 2] {
    let mut o = [0.0; 2];
    o[v] = 1.0;
    o
}

#[test]
fn optimal_critic_gives_exact_kl_on_two_by_two_tables() {
    let mut rng = Seed(7).rng();
    for _ in 0..200 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p = [
            [raw[0] / total, raw[1] / total],
            [raw[2] / total, raw[3] / total],
        ];
        let pa = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
        let pb = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
        let mut t = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                t[a][b] = (p[a][b] / (pa[a] * pb[b])).ln();
            }
        }
        let critic = table_critic(&t);
        let (mut ra, mut rb, mut wj, mut wm) = (vec![], vec![], vec![], vec![]);
        for a in 0..2 {
            for b in 0..2 {
                ra.extend(one_hot(a));
                rb.extend(one_hot(b));
                wj.push(p[a][b]);
                wm.push(pa[a] * pb[b]);
            }
        }
        let ma = Matrix::new(4, 2, ra).unwrap();
        let mb = Matrix::new(4, 2, rb).unwrap();
        let est = dv_estimate_weighted(&critic, &[&ma, &mb], &wj, &[&ma, &mb], &wm).unwrap();
        let truth = exact_mi(&p);
        assert!(
            (est.value_nats - truth).abs() < 1e-9,
            "{} vs {truth}",
            est.value_nats
        );
    }
}

#[test]
fn deterministic_pair_has_ln2_information() {
    let p = [[0.5, 0.0], [0.0, 0.5]];
    let t = [[2f64.ln(), -30.0], [-30.0, 2f64.ln()]];
    let critic = table_critic(&t);
    let a = Matrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let ma = Matrix::new(4, 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
    let mb = Matrix::new(4, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
    let est =
        dv_estimate_weighted(&critic, &[&a, &a], &[0.5, 0.5], &[&ma, &mb], &[0.25; 4]).unwrap();
    // e^-30 terms perturb the partition function below 1e-12.
    assert!((est.value_nats - exact_mi(&p)).abs() < 1e-9);
}

fn brute_force_fairness(preds: &[usize], truth: &[usize], prot: &[usize]) -> (f64, f64, f64, f64) {
    let n = truth.len();
    let k = truth.iter().chain(preds).max().unwrap() + 1;
    let correct = (0..n).filter(|&i| preds[i] == truth[i]).count();
    let mut recalls = vec![];
    let mut gaps = vec![];
    for y in 0..k {
        let support = (0..n).filter(|&i| truth[i] == y).count();
        if support == 0 {
            continue;
        }
        let hits = (0..n).filter(|&i| truth[i] == y && preds[i] == y).count();
        recalls.push(hits as f64 / support as f64);
        let mut tpr = [None; 2];
        for (c, slot) in tpr.iter_mut().enumerate() {
            let mut s = 0;
            let mut h = 0;
            for i in 0..n {
                if truth[i] == y && prot[i] == c {
                    s += 1;
                    if preds[i] == y {
                        h += 1;
                    }
                }
            }
            if s > 0 {
                *slot = Some(h as f64 / s as f64);
            }
        }
        if let [Some(a), Some(b)] = tpr {
            gaps.push(a - b);
        }
    }
    let rms = if gaps.is_empty() {
        0.0
    } else {
        (gaps.iter().map(|g| g * g).sum::<f64>() / gaps.len() as f64).sqrt()
    };
    let max = gaps.iter().map(|g: &f64| g.abs()).fold(0.0, f64::max);
    (
        correct as f64 / n as f64,
        recalls.iter().sum::<f64>() / recalls.len() as f64,
        rms,
        max,
    )
}

#[test]
fn fairness_matches_brute_force_on_random_instances() {
    let mut rng = Seed(11).rng();
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        let k = rng.random_range(1..=5);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let prot: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let r = fairness_metrics(&preds, &truth, &prot).unwrap();
        let (acc, ba, rms, max) = brute_force_fairness(&preds, &truth, &prot);
        assert_eq!(r.accuracy, acc);
        assert_eq!(r.ba, ba);
        assert_eq!(r.gap_rms, rms);
        assert_eq!(r.gap_max, max);
    }
}

#[test]
fn hand_case_gap() {
    let truth = [0, 0, 1, 1, 0, 0, 1, 1];
    let preds = [0, 0, 1, 1, 0, 1, 1, 1];
    let prot = [0, 0, 0, 0, 1, 1, 1, 1];
    let r = fairness_metrics(&preds, &truth, &prot).unwrap();
    assert!((r.gap_rms - 0.35355339059327373).abs() < 1e-12);
    assert_eq!(r.gap_max, 0.5);
}

#[test]
fn ksg_matches_gaussian_truth() {
    for (i, rho) in [0.0, 0.3, 0.5, 0.6, 0.9].into_iter().enumerate() {
        let (x, y) = gen_correlated_gaussians(5000, rho, 1, Seed(40 + i as u64)).unwrap();
        let truth = -0.5 * (1.0 - rho * rho).ln();
        let est = ksg_mi(&x, &y, 5).unwrap().value_nats;
        assert!((est - truth).abs() < 0.05, "rho {rho}: {est} vs {truth}");
    }
}

#[test]
fn ksg_on_independent_uniforms_is_near_zero() {
    let mut rng = Seed(5).rng();
    let x = Matrix::new(2000, 1, (0..2000).map(|_| rng.random::<f64>()).collect()).unwrap();
    let y = Matrix::new(2000, 1, (0..2000).map(|_| rng.random::<f64>()).collect()).unwrap();
    assert!(ksg_mi(&x, &y, 5).unwrap().value_nats.abs() <= 0.05);
}

#[test]
fn plugin_matches_independent_histogram() {
    let (x, _) = gen_correlated_gaussians(10000, 0.0, 1, Seed(9)).unwrap();
    let v = x.data();
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = [0usize; 32];
    for &a in v {
        let b = (((a - lo) / (hi - lo)) * 32.0).floor() as usize;
        counts[b.min(31)] += 1;
    }
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / v.len() as f64;
            -p * p.log2()
        })
        .sum();
    assert!((plugin_entropy(&x, 32).unwrap() - h).abs() < 1e-12);
}

#[test]
fn shuffling_destroys_dependence() {
    let (x, y) = gen_correlated_gaussians(10000, 0.9, 1, Seed(3)).unwrap();
    let ys = shuffle_marginal(&x, &y, &mut Seed(4).rng()).unwrap();
    let (a, b) = (x.data(), ys.data());
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a
        .iter()
        .zip(b)
        .map(|(p, q)| (p - ma) * (q - mb))
        .sum::<f64>()
        / n;
    let sa = (a.iter().map(|p| (p - ma).powi(2)).sum::<f64>() / n).sqrt();
    let sb = (b.iter().map(|q| (q - mb).powi(2)).sum::<f64>() / n).sqrt();
    assert!((cov / (sa * sb)).abs() < 0.05);
}

#[test]
fn untrained_critic_on_independent_data_is_near_zero() {
    let mut total = 0.0;
    for s in 0..10 {
        let (x, y) = gen_correlated_gaussians(1000, 0.0, 1, Seed(100 + s)).unwrap();
        let critic = Critic::new(
            vec![Block::new("x", 1), Block::new("y", 1)],
            &[16],
            Activation::Relu,
            Seed(s),
        )
        .unwrap();
        let ys = shuffle_marginal(&x, &y, &mut Seed(200 + s).rng()).unwrap();
        let j = critic.scores(&critic.assemble(&[&x, &y]).unwrap()).unwrap();
        let m = critic
            .scores(&critic.assemble(&[&x, &ys]).unwrap())
            .unwrap();
        total += dv_bound(&j, &m, None).unwrap().value;
    }
    assert!((total / 10.0).abs() < 0.05, "{}", total / 10.0);
}
