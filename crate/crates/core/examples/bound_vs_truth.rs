//! Monte Carlo distances against the shape of the non-uniform bound.

use berry_esseen::simulation::{bound_vs_truth, TruthSpec};
use berry_esseen::statistics::{build_model, BuildOptions, StatisticKind};
use berry_esseen::DistributionSpec;

fn main() -> berry_esseen::Result<()> {
    let model = build_model(StatisticKind::Student { mu: 1.0 }, &DistributionSpec::normal(1.0, 1.0), &BuildOptions::default())?;
    let spec = TruthSpec {
        n_grid: vec![400, 1600],
        z_grid: vec![-5.0, -4.0, -3.0, -2.0, 2.0, 3.0, 4.0, 5.0],
        replicates: 50_000,
        seed: 3,
        workers: 1,
    };
    let table = bound_vs_truth(&model, &spec)?;
    print!("{}", table.to_csv());
    for (n, c) in &table.implied_by_n {
        println!("implied constant at n = {n}: {c:.4e}");
    }
    Ok(())
}
