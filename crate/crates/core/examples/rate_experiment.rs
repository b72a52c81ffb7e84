//! Kolmogorov distance of standardized Student's T to normality, and its
//! fitted rate. Pass a replicate count to change the default of 20000.

use berry_esseen::simulation::{run_experiment, ExperimentSpec};
use berry_esseen::statistics::StatisticKind;
use berry_esseen::DistributionSpec;

fn main() -> berry_esseen::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let mut spec = ExperimentSpec::new(
        StatisticKind::Student { mu: 1.0 },
        DistributionSpec::StandardizedExponential { shift: 1.0 },
        vec![50, 100, 200, 400, 800, 1600],
    );
    spec.replicates = replicates;
    spec.seed = 42;
    spec.bootstrap = 200;
    let run = run_experiment(&spec)?;
    println!("sigma1 = {:.6}", run.sigma1);
    for r in &run.results {
        println!("n = {:>5}  D_n = {:.5}  max |z|^3 gap = {:.5}  sentinels = {}", r.n, r.uniform, r.max_polynomial, r.sentinels);
    }
    if let Some(rate) = &run.rate {
        println!("slope = {:.3} +/- {:.3} (predicted {:?})", rate.slope, rate.half_width, rate.predicted_order);
    }
    Ok(())
}
