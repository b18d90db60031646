use infosub::data::{split, ColumnKind, ColumnSpec, Dataset, Role, Schema, SplitSpec};
use infosub::eval::{fairness_metrics, information_report};
use infosub::mi::{dv_bound, ksg_mi, plugin_entropy, OracleConfig};
use infosub::numerics::{clip_global_norm, Activation, GradientSet, Matrix, Mlp, Optimizer, Seed};
use proptest::prelude::*;

fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dv_is_shift_invariant(j in scores(40), m in scores(40), c in -20.0f64..20.0) {
        let a = dv_bound(&j, &m, None).unwrap().value;
        let js: Vec<f64> = j.iter().map(|t| t + c).collect();
        let ms: Vec<f64> = m.iter().map(|t| t + c).collect();
        let b = dv_bound(&js, &ms, None).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn wide_clip_equals_plain_dv(j in scores(40), m in scores(40), tau in 50.0f64..500.0) {
        let a = dv_bound(&j, &m, None).unwrap().value;
        let b = dv_bound(&j, &m, Some(tau)).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn constant_critic_beyond_clip(c in 5.5f64..40.0, sign in prop::bool::ANY, tau in 0.5f64..5.0) {
        let c = if sign { c } else { -c };
        let v = dv_bound(&[c; 3], &[c; 5], Some(tau)).unwrap().value;
        prop_assert!((v - (c - c.signum() * tau)).abs() < 1e-12);
    }

    #[test]
    fn clipping_never_grows_and_keeps_direction(
        vals in prop::collection::vec(-100.0f64..100.0, 6),
        max_norm in 0.01f64..50.0,
    ) {
        let model = Mlp::from_parameters(
            vec![Matrix::zeros(2, 2)],
            vec![vec![0.0; 2]],
            Activation::Relu,
        ).unwrap();
        let mut g = GradientSet::zeros_like(&model);
        g.weights[0].data_mut().copy_from_slice(&vals[..4]);
        g.biases[0].copy_from_slice(&vals[4..]);
        let before: Vec<f64> = g.values().collect();
        let n0 = g.norm();
        clip_global_norm(&mut g, max_norm);
        let after: Vec<f64> = g.values().collect();
        prop_assert!(g.norm() <= n0 + 1e-12);
        prop_assert!(g.norm() <= max_norm + 1e-9);
        if n0 > 0.0 {
            let scale = g.norm() / n0;
            for (a, b) in before.iter().zip(&after) {
                prop_assert!((a * scale - b).abs() < 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn zero_gradient_steps_are_identity(seed in 0u64..1000, adam in prop::bool::ANY, steps in 1usize..5) {
        let mut model = Mlp::new(&[3, 5, 2], Activation::Tanh, Seed(seed)).unwrap();
        let before = model.clone();
        let mut opt = if adam { Optimizer::adam(1e-2) } else { Optimizer::sgd(1e-2) }.unwrap();
        let zero = GradientSet::zeros_like(&model);
        for _ in 0..steps {
            opt.step(&mut model, &zero).unwrap();
        }
        prop_assert_eq!(model.weights(), before.weights());
        prop_assert_eq!(model.biases(), before.biases());
    }

    #[test]
    fn forward_is_pure(seed in 0u64..1000, rows in 1usize..8) {
        let model = Mlp::new(&[2, 7, 7, 3], Activation::Relu, Seed(seed)).unwrap();
        let mut rng = Seed(seed + 1).rng();
        let x = Matrix::new(rows, 2, (0..rows * 2).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect()).unwrap();
        let a = model.predict(&x).unwrap();
        let b = model.predict(&x).unwrap();
        let (c, _) = model.forward(&x).unwrap();
        prop_assert_eq!(a.data(), b.data());
        prop_assert_eq!(a.data(), c.data());
    }

    #[test]
    fn fairness_invariants(
        truth in prop::collection::vec(0usize..4, 1..120),
        seed in 0u64..1000,
    ) {
        let mut rng = Seed(seed).rng();
        let preds: Vec<usize> = truth.iter().map(|_| rand::Rng::random_range(&mut rng, 0..4)).collect();
        let prot: Vec<usize> = truth.iter().map(|_| rand::Rng::random_range(&mut rng, 0..2)).collect();
        let r = fairness_metrics(&preds, &truth, &prot).unwrap();
        for v in [r.accuracy, r.ba] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let max_abs = r.per_class.iter().filter_map(|c| c.gap).map(f64::abs).fold(0.0, f64::max);
        prop_assert_eq!(r.gap_max, max_abs);
        prop_assert!(r.gap_rms <= r.gap_max + 1e-12);
        for c in &r.per_class {
            for t in c.tpr.iter().flatten() {
                prop_assert!((0.0..=1.0).contains(t));
            }
        }
    }

    #[test]
    fn balanced_symmetric_confusion_gives_ba_equal_accuracy(k in 2usize..5, per in 1usize..20, hits in 0usize..20) {
        let hits = hits.min(per);
        let mut truth = vec![];
        let mut preds = vec![];
        for y in 0..k {
            for i in 0..per {
                truth.push(y);
                preds.push(if i < hits { y } else { (y + 1) % k });
            }
        }
        let prot = vec![0; truth.len()];
        let r = fairness_metrics(&preds, &truth, &prot).unwrap();
        prop_assert!((r.ba - r.accuracy).abs() < 1e-12);
    }

    #[test]
    fn estimators_are_permutation_invariant(seed in 0u64..200) {
        let (x, y) = infosub::data::gen_correlated_gaussians(300, 0.5, 1, Seed(seed)).unwrap();
        let mut idx: Vec<usize> = (0..300).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut Seed(seed + 7).rng());
        let (xp, yp) = (x.select_rows(&idx), y.select_rows(&idx));
        prop_assert_eq!(ksg_mi(&x, &y, 5).unwrap().value_nats, ksg_mi(&xp, &yp, 5).unwrap().value_nats);
        prop_assert_eq!(plugin_entropy(&x, 16).unwrap(), plugin_entropy(&xp, 16).unwrap());
    }

    #[test]
    fn report_identities_are_exact(seed in 0u64..50) {
        let (x, y) = infosub::data::gen_correlated_gaussians(200, 0.6, 1, Seed(seed)).unwrap();
        let (z, _) = infosub::data::gen_correlated_gaussians(200, 0.0, 2, Seed(seed + 1000)).unwrap();
        let r = information_report(&z, &x, &y, &OracleConfig::default()).unwrap();
        prop_assert_eq!(r.h_y_given_x.bits, r.h_y.bits - r.i_xy.bits);
        prop_assert_eq!(r.i_zy_given_x.bits, r.i_zxy.bits - r.i_xy.bits);
    }

    #[test]
    fn iid_splits_are_disjoint_and_deterministic(n in 4usize..200, frac in 0.1f64..0.9, seed in 0u64..100) {
        let ds = Dataset::from_continuous(vec![("id", Role::Feature, (0..n).map(|i| i as f64).collect())]).unwrap();
        let train_n = ((n as f64 * frac) as usize).max(1);
        let test_n = n - train_n;
        prop_assume!(test_n > 0);
        let spec = SplitSpec::Iid { train_n, test_n, seed };
        let (a, b) = split(&ds, &spec).unwrap();
        let (a2, b2) = split(&ds, &spec).unwrap();
        prop_assert_eq!(a.values(), a2.values());
        prop_assert_eq!(b.values(), b2.values());
        let mut all: Vec<f64> = a.values().data().iter().chain(b.values().data()).cloned().collect();
        all.sort_by(f64::total_cmp);
        prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn one_hot_decodes_to_the_original(values in prop::collection::vec(0usize..5, 1..60)) {
        let names = ["a", "b", "c", "d", "e"];
        let mut text = String::from("col,y\n");
        for v in &values {
            text.push_str(&format!("{},1\n", names[*v]));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, text).unwrap();
        let schema = Schema {
            columns: vec![
                ColumnSpec { name: "col".into(), kind: ColumnKind::Categorical, role: Role::Feature, categories: None },
                ColumnSpec { name: "y".into(), kind: ColumnKind::Continuous, role: Role::Target, categories: None },
            ],
            missing: vec![],
            headerless: false,
            comment: None,
            trim_chars: String::new(),
        };
        let (ds, _) = infosub::data::load_csv_dataset(&path, &schema).unwrap();
        let info = ds.info("col").unwrap().clone();
        let m = ds.column("col").unwrap();
        for (r, v) in values.iter().enumerate() {
            let row = m.row(r);
            prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
            let hot = row.iter().position(|&e| e == 1.0).unwrap();
            prop_assert_eq!(&info.categories[hot], names[*v]);
        }
    }
}
