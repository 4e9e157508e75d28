mod common;

use std::path::Path;

use first_spike::data::{load_csv, load_idx, CsvSchema};
use first_spike::harness::{load_data, ExperimentConfig, Preset};

fn file(name: &str) -> Option<std::path::PathBuf> {
    let p = Path::new(&common::data_dir()).join(name);
    if p.is_file() {
        Some(p)
    } else {
        eprintln!("skipping: {} not found (run scripts/fetch_data.sh)", p.display());
        None
    }
}

#[test]
fn iris_file_loads() {
    let Some(path) = file("iris.data") else { return };
    let ds = load_csv(&path, &CsvSchema::iris()).unwrap();
    assert_eq!(ds.len(), 150);
    assert_eq!(ds.feature_count, 4);
    assert_eq!(ds.class_counts(), vec![50, 50, 50]);
    assert_eq!(ds.dropped, 0);
}

#[test]
fn wisconsin_file_drops_incomplete_rows() {
    let Some(path) = file("breast-cancer-wisconsin.data") else { return };
    let ds = load_csv(&path, &CsvSchema::wisconsin()).unwrap();
    assert_eq!(ds.len(), 683);
    assert_eq!(ds.dropped, 16);
    assert_eq!(ds.feature_count, 9);
    assert_eq!(ds.class_counts(), vec![444, 239]);
    assert!(ds.features.iter().flatten().all(|&v| (1.0..=10.0).contains(&v)));
}

#[test]
fn mnist_files_load() {
    if !common::mnist_available() {
        eprintln!("skipping: MNIST not found (run scripts/fetch_data.sh)");
        return;
    }
    let dir = Path::new(&common::data_dir()).join("mnist");
    let test = load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte")).unwrap();
    assert_eq!(test.len(), 10_000);
    assert_eq!(test.feature_count, 784);
    assert_eq!(test.classes, 10);
    assert!(test.features.iter().flatten().all(|&v| (0.0..=255.0).contains(&v) && v.fract() == 0.0));

    let mut cfg = ExperimentConfig::preset(Preset::MnistLatency).desk_scale();
    cfg.data_dir = common::data_dir();
    let data = load_data(&cfg).unwrap();
    assert_eq!(data.train.len(), 10_000);
    assert_eq!(data.test.as_ref().unwrap().len(), 10_000);
}
