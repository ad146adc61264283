//! Conditional density of a flow trained on `x = z + ε`: the fitted density
//! follows its conditioning value.

use dine::flow::{fit, ConditionalFlow, FlowConfig};
use dine::{Dataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> dine::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 2000;
    let z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x: Vec<f64> = z.iter().map(|&z| 2.0 * z + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
    let data = Dataset::new(
        Matrix::column_vector(x.clone()),
        Matrix::column_vector(x),
        Matrix::column_vector(z),
    )?;

    let mut flow = ConditionalFlow::new(FlowConfig::new(1, 1))?;
    let mut twin = ConditionalFlow::new(FlowConfig::new(1, 1))?;
    fit(&mut flow, &mut twin, &data)?;

    for z in [-0.5, 0.0, 0.5] {
        let grid: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let dens: Vec<f64> = grid.iter().map(|&x| flow.log_density(&[x], &[z]).map(f64::exp)).collect::<Result<_, _>>()?;
        let (mode, _) = grid.iter().zip(&dens).fold((0.0, 0.0), |b, (&x, &p)| if p > b.1 { (x, p) } else { b });
        let median = flow.invert_transform(&[0.5], &[z])?[0];
        println!("z = {z:+.1}: mode near {mode:+.1}, median {median:+.3} (true center {:+.1})", 2.0 * z);
    }
    Ok(())
}
