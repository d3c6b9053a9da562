// The `cluster` command end to end: save a dataset, run the command layer and
// inspect the files it writes.

use lcrsr::cli::{cmd_cluster, ClusterOptions};
use lcrsr::clustering::RowEmbedding;
use lcrsr::io::MatrixFormat;
use lcrsr::save_dataset;
use lcrsr::synthetic::{generate, ModelSpec};

pub fn run_example() -> lcrsr::Result<()> {
    let work = tempfile::tempdir().expect("temporary directory");
    let (data, truth) = generate(&ModelSpec::two_subspaces(2), 0.0, 21)?;
    let manifest = save_dataset(&data, &work.path().join("data"), MatrixFormat::F64le)?;

    let out = work.path().join("run");
    let opts = ClusterOptions {
        repeats: 10,
        embedding: RowEmbedding::ShapeInteraction,
        normalize: true,
        seed: 21,
        trace: Some(out.join("trace.csv")),
        ..ClusterOptions::new(&manifest, truth.r0, &out)
    };
    let report = cmd_cluster(&opts)?;

    let mut files: Vec<_> = std::fs::read_dir(&out)
        .expect("output directory")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    println!("wrote {}", files.join(", "));
    println!("{}", std::fs::read_to_string(out.join("metrics.csv")).unwrap());
    println!(
        "solver {} iterations, stage times {:.3}s total",
        report.solver.iterations, report.timings.total_s
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
