// Write a multi-view dataset to disk as a manifest plus matrix files, read it
// back and normalize it.

use lcrsr::io::MatrixFormat;
use lcrsr::synthetic::{generate, ModelSpec};
use lcrsr::{load_dataset, save_dataset};

pub fn run_example() -> lcrsr::Result<()> {
    let (data, _) = generate(&ModelSpec::two_subspaces(2), 0.02, 3)?;
    let dir = tempfile::tempdir().expect("temporary directory");

    for format in [MatrixFormat::Csv, MatrixFormat::F64le] {
        let target = dir.path().join(format.extension());
        let manifest = save_dataset(&data, &target, format)?;
        let back = load_dataset(&manifest)?;
        assert_eq!(back.views(), data.views());
        println!(
            "{:?}: {} views of {:?} features, {} samples, k={:?} from {}",
            format,
            back.n_views(),
            back.views().iter().map(|x| x.nrows()).collect::<Vec<_>>(),
            back.n_samples(),
            back.k(),
            manifest.display()
        );
    }
    println!("{}", std::fs::read_to_string(dir.path().join("csv/manifest.json")).unwrap());

    let unit = data.normalize_columns();
    let norm0: f64 = unit.view(0).column(0).iter().map(|x| x * x).sum::<f64>().sqrt();
    println!("column 0 of view 0 after normalization has norm {norm0:.12}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
