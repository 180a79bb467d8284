use layercomp_adaptive::{
    build_model, evaluate, infer_adaptive, load_idx, measure_h_max, saturate, train_mlp,
    AdaptiveError, Dataset, GrayZonePolicy, TrainConfig,
};
use layercomp_core::PartitioningVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn idx_images(n: u32, side: u32, pixels: &[u8]) -> Vec<u8> {
    let mut b = Vec::new();
    for v in [0x0803u32, n, side, side] {
        b.extend_from_slice(&v.to_be_bytes());
    }
    b.extend_from_slice(pixels);
    b
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut b = 0x0801u32.to_be_bytes().to_vec();
    b.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    b.extend_from_slice(labels);
    b
}

/// 4x4 images whose digit decides which half of the image is lit.
fn synthetic(n: usize, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut px = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let digit: u8 = rng.random_range(0..10);
        for k in 0..16 {
            let lit = (k < 8) == (digit % 2 == 1);
            let base = if lit { 160 } else { 20 };
            px.push(base + rng.random_range(0..95u8));
        }
        labels.push(digit);
    }
    (px, labels)
}

fn write_pair(
    dir: &std::path::Path,
    images: &[u8],
    labels: &[u8],
) -> (std::path::PathBuf, std::path::PathBuf) {
    let (a, b) = (dir.join("img"), dir.join("lbl"));
    std::fs::write(&a, images).unwrap();
    std::fs::write(&b, labels).unwrap();
    (a, b)
}

fn small_dataset(n: usize, seed: u64) -> Dataset {
    let dir = tempfile::tempdir().unwrap();
    let (px, labels) = synthetic(n, seed);
    let (a, b) = write_pair(
        dir.path(),
        &idx_images(n as u32, 4, &px),
        &idx_labels(&labels),
    );
    load_idx(a, b).unwrap()
}

#[test]
fn idx_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = write_pair(dir.path(), &idx_images(1, 28, &[0; 784]), &idx_labels(&[7]));
    let d = load_idx(&a, &b).unwrap();
    assert_eq!(
        (d.len(), d.features(), d.label(0), d.digit(0)),
        (1, 784, 1, 7)
    );
    assert!(d.sample(0).iter().all(|&v| v == 0.0));

    let (a, b) = write_pair(
        dir.path(),
        &idx_images(2, 1, &[0, 255]),
        &idx_labels(&[1, 2, 3]),
    );
    assert!(matches!(
        load_idx(&a, &b),
        Err(AdaptiveError::CountMismatch {
            images: 2,
            labels: 3
        })
    ));
    let (a, b) = write_pair(dir.path(), &idx_labels(&[1]), &idx_labels(&[1]));
    assert!(matches!(
        load_idx(&a, &b),
        Err(AdaptiveError::BadMagic { .. })
    ));
    assert!(matches!(
        load_idx(dir.path().join("missing"), &b),
        Err(AdaptiveError::Io { .. })
    ));
}

fn trained(seed: u64) -> layercomp_core::nn::Network {
    let cfg = TrainConfig {
        hidden: vec![6, 6],
        epochs: 30,
        batch: 10,
        lr: 0.01,
        seed,
    };
    train_mlp(&small_dataset(400, 1), &cfg).unwrap().network
}

#[test]
fn training_is_deterministic() {
    assert_eq!(trained(4), trained(4));
    assert_ne!(trained(4), trained(5));
}

#[test]
fn adaptive_trace_is_prefix_of_full_path() {
    let net = trained(2);
    let test = small_dataset(150, 9);
    let model = build_model(&net, 4, -8).unwrap();
    let policy = GrayZonePolicy::new(0.3, 0.6).unwrap();
    let eval = evaluate(&model, &test, &policy).unwrap();
    for i in 0..test.len() {
        let x = saturate(test.sample(i), model.input_partitioning());
        let t = infer_adaptive(&model, &x, &policy).unwrap();
        assert_eq!(t, eval.traces[i]);
        assert_eq!(t.outputs, eval.paths[i][..t.resolutions_used]);
        assert_eq!(t.prediction, u8::from(t.final_output > 0.5));
        for r in 1..t.resolutions_used {
            assert!(policy.in_zone(t.outputs[r - 1]));
        }
    }
    let m = eval.metrics(&policy).unwrap();
    assert!(m.demand.ratios.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(m.demand.ratios[0], 1.0);
    assert!(m.one_shot.accuracy > 0.9, "{m:?}");
    assert_eq!(eval, evaluate(&model, &test, &policy).unwrap());
}

#[test]
fn saturation_keeps_ones_representable() {
    let pv = PartitioningVector::unit_spaced(0, 4).unwrap();
    assert_eq!(saturate(&[1.0, 0.5, 0.0], &pv), vec![0.9375, 0.5, 0.0]);
}

#[test]
fn h_max_covers_every_pre_activation() {
    let net = trained(3);
    let data = small_dataset(50, 2);
    let h = measure_h_max(&net, &data).unwrap();
    let mut max = 0.0f64;
    for i in 0..data.len() {
        for layer in net.pre_activations(data.sample(i)).unwrap() {
            max = layer.iter().fold(max, |m, v| m.max(v.abs()));
        }
    }
    assert!(max < 2f64.powi(h) && max >= 2f64.powi(h - 1));
}
