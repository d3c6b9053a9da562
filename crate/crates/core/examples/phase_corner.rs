// A small slice of the recovery phase experiment: an easy cell and a hard
// cell, a few trials each.

use lcrsr::synthetic::{phase_experiment, PhaseConfig};

pub fn run_example() -> lcrsr::Result<()> {
    let config = PhaseConfig {
        r_values: vec![2, 20],
        rho_values: vec![0.02, 0.4],
        trials: 2,
        seed: 5,
        ..PhaseConfig::default()
    };
    let grid = phase_experiment(&config)?;
    print!("{}", grid.to_csv());
    println!(
        "easy cell (rank 4, 2% corruption): {}",
        grid.score(2, 0.02).unwrap()
    );
    println!(
        "hard cell (rank 40, 40% corruption): {}",
        grid.score(20, 0.4).unwrap()
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
