// Leading eigenvectors of a large symmetric matrix, checked against the full
// decomposition.

use lcrsr::linalg::{full_symmetric_eigen, top_r_eigenvectors};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> lcrsr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, d, r) = (400, 30, 6);
    let a = Array2::from_shape_fn((d, n), |_| rng.random::<f64>() - 0.5);
    // A Gram matrix like the one the solver builds: n x n, rank d.
    let m = a.t().dot(&a);

    let top = top_r_eigenvectors(&m, r)?;
    let (values, vectors) = full_symmetric_eigen(&m)?;
    let reference = vectors.slice(ndarray::s![.., ..r]).to_owned();
    let diff = &top.vectors.projector() - &reference.dot(&reference.t());
    let err = diff.iter().map(|x| x * x).sum::<f64>().sqrt();

    println!("top {r} eigenvalues: {:?}", &top.values);
    println!("reference:           {:?}", &values[..r]);
    println!("projector difference {err:.2e}");
    println!("orthonormality error {:.2e}", top.vectors.orthonormality_error());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
