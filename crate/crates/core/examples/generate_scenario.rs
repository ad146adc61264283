//! Writes a synthetic scenario to CSV and reads it back.

use dine::datagen::{generate, Bijection, ScenarioConfig, ZFamily};
use dine::io::{read_dataset, write_dataset, ColumnSpec};

fn main() -> dine::Result<()> {
    let cfg = ScenarioConfig::new(500, 2, 3, 0.7, 42)
        .with_bijections(Bijection::Log, Bijection::Sigmoid)
        .with_z_family(ZFamily::Laplace);
    let scenario = generate(&cfg)?;
    print!("{}", scenario.metadata());

    let dir = std::env::temp_dir().join("dine-generate-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("scenario.csv");
    write_dataset(&path, &scenario.dataset)?;

    let back = read_dataset(&path, &ColumnSpec::default())?;
    println!("wrote {} and read back {} rows with dims {:?}", path.display(), back.n(), back.dims());
    Ok(())
}
