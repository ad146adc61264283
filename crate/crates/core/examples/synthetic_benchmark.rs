//! A small MI benchmark grid with per-cell summaries written next to the
//! records.

use dine::bench::{run_benchmark, sidecar_path, summarize_cells, write_cell_summaries, write_records, BenchmarkConfig, Task};

fn main() -> dine::Result<()> {
    let cfg = BenchmarkConfig {
        ns: vec![500, 1000],
        rhos: vec![0.0, 0.6],
        runs: 3,
        seed: 1,
        ..BenchmarkConfig::new(Task::Mi)
    };
    let out = run_benchmark(&cfg)?;
    let summaries = summarize_cells(&out.records);
    for s in &summaries {
        println!(
            "n {:>4} rho {:.1}: mean {:.4} [{:.4}, {:.4}] truth {:.4}",
            s.n, s.rho, s.mean, s.ci_low, s.ci_high, s.ground_truth
        );
    }

    let path = std::env::temp_dir().join("dine-benchmark-example.csv");
    write_records(&path, &out.records)?;
    write_cell_summaries(sidecar_path(&path, "summary"), &summaries)?;
    println!("{} records in {}", out.records.len(), path.display());
    Ok(())
}
