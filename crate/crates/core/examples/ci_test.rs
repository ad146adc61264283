//! Permutation test of `X ⫫ Y | Z` on one independent and one dependent
//! scenario.

use dine::citest::{ci_test, CITestConfig};
use dine::datagen::{draw_dependent_rho, generate, ScenarioConfig};

fn main() -> dine::Result<()> {
    let seed = 21;
    for rho in [0.0, draw_dependent_rho(seed)] {
        let scenario = generate(&ScenarioConfig::sampled(500, 1, 5, rho, seed))?;
        let result = ci_test(&scenario.dataset, &CITestConfig::default().with_seed(seed))?;
        let null_max = result.permuted_stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "rho {rho:+.3}: statistic {:.4}, largest permuted {null_max:.4}, p = {:.2}, {:?}",
            result.statistic, result.p_value, result.decision
        );
    }
    Ok(())
}
