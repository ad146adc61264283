//! F1, AUC and error rates of the CI test over labelled independent and
//! dependent runs.

use dine::bench::{cit_metrics, run_benchmark, BenchmarkConfig, Task};

fn main() -> dine::Result<()> {
    let cfg = BenchmarkConfig {
        ns: vec![500],
        d_zs: vec![5],
        runs: 10,
        seed: 4,
        ..BenchmarkConfig::new(Task::Cit)
    };
    let out = run_benchmark(&cfg)?;
    for (cell, m) in cit_metrics(&out.records, cfg.alpha)? {
        println!("cell pair {cell}: {} independent, {} dependent runs", m.n_independent, m.n_dependent);
        println!("  F1 {:.3}", m.f1);
        println!("  AUC {:.3}", m.auc()?);
        println!("  type I {:.2}, type II {:.2}", m.type1_rate.unwrap(), m.type2_rate.unwrap());
    }
    Ok(())
}
