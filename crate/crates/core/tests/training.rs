mod common;

use doagc::clustering::{kmeans, KMeansConfig};
use doagc::data::generate_synthetic;
use doagc::metrics::accuracy;
use doagc::model::{train, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fixture_features_are_moderately_separable() {
    let g = generate_synthetic(&common::fixture_spec(0.1)).unwrap();
    let c = kmeans(&g.features, 3, &KMeansConfig::default(), &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let acc = accuracy(&c.assignments, g.labels.as_ref().unwrap()).unwrap();
    assert!((0.7..=0.9).contains(&acc), "{acc}");
}

#[test]
fn fixture_run_reduces_loss_and_clusters() {
    let g = generate_synthetic(&common::fixture_spec(0.2)).unwrap();
    let out = train(&g, 3, &TrainConfig::default()).unwrap();
    let first = &out.trace.records[0];
    let last = out.trace.records.last().unwrap();
    assert_eq!(out.trace.records.len(), 200);
    assert!(last.loss < first.loss);
    assert!(last.loss_rec < first.loss_rec);
    let acc = out.metrics.unwrap().acc;
    assert!(acc >= 0.75, "ACC {acc}");
}

#[test]
fn identical_configs_give_identical_traces() {
    let g = generate_synthetic(&common::fixture_spec(0.3)).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        hidden_dim: 32,
        embed_dim: 8,
        ..TrainConfig::default()
    };
    let a = train(&g, 3, &cfg).unwrap();
    let b = train(&g, 3, &cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.embedding, b.embedding);
    let other = train(&g, 3, &TrainConfig { seed: 7, ..cfg }).unwrap();
    assert_ne!(a.trace, other.trace);
}

#[test]
fn gradient_of_total_objective_on_small_instance() {
    let spec = doagc::data::SynthSpec {
        n: 12,
        k: 3,
        homophily: vec![0.3, 0.6],
        edges: 15,
        feature_dim: 5,
        center_separation: 2.0,
        feature_noise: 0.5,
        seed: 9,
    };
    let g = generate_synthetic(&spec).unwrap();
    for order in [1, 3] {
        let cfg = TrainConfig {
            hidden_dim: 7,
            embed_dim: 4,
            order,
            ..TrainConfig::default()
        };
        let err = common::gradient_check(&g, &cfg, &[0.25, 0.8], 1e-5);
        assert!(err < 1e-4, "order {order}: {err}");
    }
}
