//! Fits one flow to skewed data and maps it to a standard Gaussian surrogate.

use dine::flow::{fit, ConditionalFlow, FlowConfig};
use dine::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

fn skewness(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n / s2.powf(1.5)
}

fn main() -> dine::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let exp = Exp::new(1.0).unwrap();
    let raw: Vec<f64> = (0..2000).map(|_| exp.sample(&mut rng)).collect();
    let x = Matrix::column_vector(raw.clone());
    let z = Matrix::zeros(raw.len(), 0);

    // the joint trainer fits two flows; the second one models a copy of x
    let mut flow = ConditionalFlow::new(FlowConfig::new(1, 0))?;
    let mut twin = ConditionalFlow::new(FlowConfig::new(1, 0))?;
    let data = dine::Dataset::unconditional(x.clone(), x.clone())?;
    let report = fit(&mut flow, &mut twin, &data)?;

    let out = flow.to_gaussian(&x, &z)?;
    let g = out.values.column(0);
    let m = &out.diagnostics()[0];
    println!("final loss {:.4}", report.loss_trace.last().unwrap());
    println!("input skewness {:.3}", skewness(&raw));
    println!("surrogate mean {:+.4}, variance {:.4}, skewness {:.3}", m.mean, m.variance, skewness(&g));
    Ok(())
}
