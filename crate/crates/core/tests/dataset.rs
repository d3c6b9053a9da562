mod common;

use std::fs;

use common::*;
use lcrsr::dataset::normalize_columns_in_place;
use lcrsr::io::{read_labels, read_matrix, write_labels, write_matrix, MatrixFormat};
use lcrsr::{load_dataset, save_dataset, Error, MultiViewDataset};
use ndarray::{array, Array2};
use proptest::prelude::*;

#[test]
fn both_formats_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = rng(1);
    let mut m = gaussian(7, 5, &mut g);
    m[[0, 0]] = 1e-300;
    m[[1, 1]] = -0.0;
    m[[2, 2]] = 123456789.125;
    for format in [MatrixFormat::Csv, MatrixFormat::F64le] {
        let path = dir.path().join(format!("m.{}", format.extension()));
        write_matrix(&path, &m, format).unwrap();
        let back = read_matrix(&path, format).unwrap();
        assert!(m.iter().zip(back.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn manifest_resolves_relative_paths_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let data = MultiViewDataset::new(vec![array![[1.0, 2.0, 3.0]], array![[0.0, 1.0, 0.0], [5.0, 5.0, 5.0]]])
        .unwrap()
        .with_labels(vec![0, 1, 1], None)
        .unwrap();
    let manifest = save_dataset(&data, &dir.path().join("nested"), MatrixFormat::Csv).unwrap();
    let back = load_dataset(&manifest).unwrap();
    assert_eq!(back, data);
    assert_eq!(back.k(), Some(2));
    assert_eq!(back.total_features(), 3);
}

#[test]
fn handwritten_manifest_with_mixed_formats() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "1,2\n3,4\n").unwrap();
    write_matrix(&dir.path().join("b.f64"), &array![[9.0, 8.0]], MatrixFormat::F64le).unwrap();
    fs::write(dir.path().join("y.txt"), "0\n1\n").unwrap();
    fs::write(
        dir.path().join("m.json"),
        r#"{"views":[{"path":"a.csv","format":"csv"},{"path":"b.f64","format":"f64le"}],"labels":"y.txt"}"#,
    )
    .unwrap();
    let data = load_dataset(&dir.path().join("m.json")).unwrap();
    assert_eq!(data.view(0), &array![[1.0, 2.0], [3.0, 4.0]]);
    assert_eq!(data.view(1), &array![[9.0, 8.0]]);
    assert_eq!(data.labels(), Some(&[0, 1][..]));
}

#[test]
fn schema_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let err = load_dataset(&missing).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("absent.json"));

    assert!(matches!(
        MultiViewDataset::new(vec![Array2::zeros((2, 3)), Array2::zeros((2, 4))]),
        Err(Error::Schema(_))
    ));
    assert!(matches!(MultiViewDataset::new(vec![]), Err(Error::Schema(_))));
    assert!(MultiViewDataset::new(vec![array![[f64::NAN]]]).is_err());

    fs::write(dir.path().join("ragged.csv"), "1,2\n3\n").unwrap();
    assert!(matches!(read_matrix(&dir.path().join("ragged.csv"), MatrixFormat::Csv), Err(Error::Format { .. })));
    fs::write(dir.path().join("nan.csv"), "1,NaN\n").unwrap();
    assert_eq!(read_matrix(&dir.path().join("nan.csv"), MatrixFormat::Csv).unwrap_err().exit_code(), 3);
    fs::write(dir.path().join("short.f64"), [1u8, 0, 0]).unwrap();
    assert!(read_matrix(&dir.path().join("short.f64"), MatrixFormat::F64le).is_err());
    fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert!(matches!(load_dataset(&dir.path().join("bad.json")), Err(Error::Format { .. })));
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.csv");
    write_labels(&path, &[3, 0, 12]).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "3\n0\n12\n");
    assert_eq!(read_labels(&path).unwrap(), vec![3, 0, 12]);
}

#[test]
fn normalize_example() {
    let data = MultiViewDataset::new(vec![array![[3.0, 0.0], [4.0, 0.0]]]).unwrap();
    assert_eq!(data.normalize_columns().view(0), &array![[0.6, 0.0], [0.8, 0.0]]);
}

proptest! {
    #[test]
    fn normalization_is_idempotent(values in prop::collection::vec(-100.0f64..100.0, 12)) {
        let mut once = Array2::from_shape_vec((3, 4), values).unwrap();
        normalize_columns_in_place(&mut once);
        let mut twice = once.clone();
        normalize_columns_in_place(&mut twice);
        for (a, b) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        for col in once.columns() {
            let n = col.dot(&col).sqrt();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }
    }
}
