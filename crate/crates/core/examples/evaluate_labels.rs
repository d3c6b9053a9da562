// Agreement scores between a predicted clustering and the ground truth.

use lcrsr::metrics::{acc, adjusted_rand_index, nmi, pairwise_f, ContingencyTable, Scores};

pub fn run_example() -> lcrsr::Result<()> {
    let truth = [0, 0, 0, 1, 1, 1, 2, 2];
    let pred = [1, 1, 0, 0, 0, 0, 2, 2];

    let table = ContingencyTable::new(&pred, &truth)?;
    println!("contingency (rows: predicted, columns: true)");
    for i in 0..table.k_pred() {
        let row: Vec<String> = (0..table.k_true()).map(|j| table.count(i, j).to_string()).collect();
        println!("  {}", row.join(" "));
    }
    println!("nmi {:.4}", nmi(&pred, &truth)?);
    println!("acc {:.4}", acc(&pred, &truth)?);
    println!("f   {:.4}", pairwise_f(&pred, &truth)?);
    println!("ari {:.4}", adjusted_rand_index(&pred, &truth)?);

    let renamed: Vec<usize> = truth.iter().map(|l| (l + 1) % 3).collect();
    let s = Scores::compute(&renamed, &truth)?;
    println!("renamed truth scores {:?}", s);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
