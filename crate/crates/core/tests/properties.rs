use proptest::prelude::*;
use stockrank::features::{FeatureMatrix, RowId};
use stockrank::metrics::{ndcg_top_fraction, pearson, spearman};
use stockrank::models::{fit, ModelSpec};
use stockrank::panel::{ColumnSchema, Panel};
use stockrank::ranks::average_ranks;
use stockrank::selection::{redundancy_prune, select_training_periods, LabelledBlock, Learner, SubsetOptions};
use stockrank::synth::{generate_panel, SynthConfig};
use stockrank::target::{chrono_scale_rank, rank_normalize, TransformSpec};

fn vec_pair(n: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (prop::collection::vec(-100.0..100.0f64, n), prop::collection::vec(-100.0..100.0f64, n)))
}

fn not_constant(v: &[f64]) -> bool {
    v.iter().any(|x| *x != v[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ranks_sum_to_triangle(v in prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 0.5, 2.0, 3.0]), 1..40)) {
        let r = average_ranks(&v);
        let n = v.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        prop_assert!(r.iter().all(|x| *x >= 1.0 && *x <= n));
    }

    #[test]
    fn spearman_bounded_symmetric_and_monotone_invariant((a, b) in vec_pair(3..40)) {
        prop_assume!(not_constant(&a) && not_constant(&b));
        let s = spearman(&a, &b).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
        prop_assert!((s - spearman(&b, &a).unwrap()).abs() < 1e-12);
        let warped: Vec<f64> = a.iter().map(|x| x.powi(3) + 7.0).collect();
        prop_assert!((s - spearman(&warped, &b).unwrap()).abs() < 1e-12);
        prop_assert!(pearson(&a, &b).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn ndcg_in_unit_interval_and_perfect_on_truth((p, t) in vec_pair(2..60)) {
        prop_assume!(not_constant(&t));
        let g = ndcg_top_fraction(&p, &t, 0.2).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&g));
        prop_assert!((ndcg_top_fraction(&t, &t, 0.2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_normalize_is_order_preserving(v in prop::collection::vec(-10.0..10.0f64, 2..50)) {
        let r = rank_normalize(&v).unwrap();
        prop_assert!(r.iter().all(|x| (-1.0..=1.0).contains(x)));
        for i in 0..v.len() {
            for j in 0..v.len() {
                if v[i] < v[j] {
                    prop_assert!(r[i] < r[j]);
                }
            }
        }
    }

    #[test]
    fn chrono_power_zero_is_plain_rank(v in prop::collection::vec(-10.0..10.0f64, 2..50)) {
        let pairs: Vec<(usize, f64)> = v.iter().enumerate().map(|(i, y)| (i % 5 + 1, *y)).collect();
        prop_assert_eq!(chrono_scale_rank(&pairs, &TransformSpec { power: 0.0 }).unwrap(), rank_normalize(&v).unwrap());
    }

    #[test]
    fn ridge_satisfies_normal_equations(seed in 0u64..1000, alpha in 1e-3..1e3f64) {
        let mut c = SynthConfig::noiseless(1, 30, vec![1.0, -2.0, 0.5], seed);
        c.n_months = 2;
        c.noise_sigma = 0.3;
        let (panel, _) = generate_panel(&c).unwrap();
        let rows: Vec<Vec<f64>> = panel.periods()[0].observations.iter().map(|o| o.monthly.iter().map(|v| v.unwrap()).collect()).collect();
        let y: Vec<f64> = panel.periods()[0].observations.iter().map(|o| o.target.unwrap()).collect();
        let names = ["a", "b", "c", "d", "e", "f"];
        let x = FeatureMatrix::from_rows(&names, &rows).unwrap();
        let m = fit(&x, &y, &ModelSpec::ridge(alpha, false)).unwrap();
        for j in 0..6 {
            let xj = x.columns()[j].as_slice();
            let g: f64 = (0..6).map(|k| xj.iter().zip(&x.columns()[k]).map(|(a, b)| a * b).sum::<f64>() * m.weights[k]).sum();
            let xty: f64 = xj.iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!((g + alpha * m.weights[j] - xty).abs() < 1e-8 * (1.0 + xty.abs()));
        }
    }

    #[test]
    fn synth_panels_round_trip_through_csv(seed in 0u64..500, missing in 0.0..0.5f64) {
        let mut c = SynthConfig::noiseless(3, 12, vec![0.5, 1.0], seed);
        c.n_months = 2;
        c.missing_rate = missing;
        c.noise_sigma = 1.0;
        let (panel, _) = generate_panel(&c).unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice(), ColumnSchema { n_variables: 2, n_months: 2 }, "mem".into()).unwrap();
        prop_assert_eq!(back.periods(), panel.periods());
        prop_assert_eq!(back.checksum(), panel.checksum());
    }

    #[test]
    fn redundancy_prune_ignores_dropped_features(cols in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 6), 2..7)) {
        let names: Vec<String> = (0..cols.len()).map(|i| format!("f{i}")).collect();
        let ids = (0..6).map(|i| RowId { ordinal: i + 1, obs_id: "mean".into() }).collect::<Vec<_>>();
        let m = FeatureMatrix::new(names.clone(), cols.clone(), ids).unwrap();
        let full = redundancy_prune(&names, &m, 0.5).unwrap();
        prop_assert!(!full.kept.is_empty());
        prop_assert_eq!(full.kept.len() + full.dropped.len(), names.len());
        // removing every dropped feature from the input changes nothing
        let again = redundancy_prune(&full.kept, &m, 0.5).unwrap();
        prop_assert_eq!(again.kept, full.kept.clone());
        prop_assert!(again.dropped.is_empty());
    }
}

fn blocks_from(panel: &Panel) -> Vec<LabelledBlock> {
    let schema = panel.schema();
    panel
        .periods()
        .iter()
        .map(|p| {
            let rows: Vec<Vec<f64>> = p
                .observations
                .iter()
                .map(|o| (0..schema.n_variables).map(|v| o.series(schema, v).iter().sum::<f64>() / schema.n_months as f64).collect())
                .collect();
            let names: Vec<String> = (0..schema.n_variables).map(|v| format!("X{}_mean", v + 1)).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut x = FeatureMatrix::from_rows(&refs, &rows).unwrap();
            x = x.select_rows(&(0..rows.len()).collect::<Vec<_>>());
            LabelledBlock::new(p.id.ordinal, x, p.observations.iter().map(|o| o.target.unwrap()).collect()).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn period_subset_never_empty_and_never_worse(seed in 0u64..10_000, flip in prop::collection::vec(any::<bool>(), 5)) {
        let mut c = SynthConfig::noiseless(6, 25, vec![1.0, -0.7, 0.3], seed);
        c.n_months = 2;
        c.noise_sigma = 0.8;
        c.true_coefficients.push(vec![-1.0, 0.7, -0.3]);
        c.regime_of_period = Some(flip.iter().map(|f| usize::from(*f)).chain([0]).collect());
        let (panel, _) = generate_panel(&c).unwrap();
        let mut blocks = blocks_from(&panel);
        let validation = vec![blocks.pop().unwrap()];
        let features: Vec<String> = (1..=3).map(|v| format!("X{v}_mean")).collect();
        let learner = Learner::new(ModelSpec::ridge(1.0, true), Default::default());
        let out = select_training_periods(&blocks, &features, &learner, &validation, Default::default(), SubsetOptions::default()).unwrap();
        prop_assert!(!out.kept.is_empty());
        prop_assert_eq!(out.kept.len() + out.dropped.len(), blocks.len());
        let trace: Vec<f64> = out.score_trace.iter().map(|s| s.score).collect();
        prop_assert!(trace.windows(2).all(|w| w[1] > w[0] + 1e-9));
        prop_assert!(out.model_fits <= 1 + 10 * blocks.len());
    }
}
