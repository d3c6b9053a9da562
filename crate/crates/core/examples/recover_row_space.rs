// Recover the shared row space of two corrupted views and compare it with
// the ground truth.
//
// Run with `cargo run --release --example recover_row_space`.

use lcrsr::synthetic::{basis_snr_db, generate, recovery_score, ModelSpec};
use lcrsr::{solve, SolverConfig};

pub fn run_example() -> lcrsr::Result<()> {
    // Two rank-2 subspaces in a 50-dimensional latent space, seen through two
    // 100-dimensional views with 4% of entries flipped to ±1.
    let spec = ModelSpec::two_subspaces(2);
    let (data, truth) = generate(&spec, 0.04, 7)?;
    println!(
        "{} views, {} samples, true rank {}",
        data.n_views(),
        data.n_samples(),
        truth.r0
    );

    let result = solve(&data, &SolverConfig::new(truth.r0, 2e-2))?;
    let snr = basis_snr_db(&truth.v0, &result.v_hat)?;
    println!(
        "converged={} after {} iterations, objective {:.6}",
        result.converged,
        result.iterations,
        result.final_objective()
    );
    println!("row-space SNR {snr:.1} dB, score {}", recovery_score(snr));

    for (v, (s_hat, s0)) in result.s_hat.iter().zip(&truth.s0).enumerate() {
        let hits = s_hat
            .iter()
            .zip(s0)
            .filter(|(a, b)| **b != 0.0 && a.signum() == b.signum() && **a != 0.0)
            .count();
        let planted = s0.iter().filter(|x| **x != 0.0).count();
        println!("view {v}: {hits}/{planted} planted errors found with the right sign");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
