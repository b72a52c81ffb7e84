//! Detecting laws on which the linear part of a statistic vanishes.

use berry_esseen::statistics::{degeneracy_check, StatisticKind};
use berry_esseen::DistributionSpec;

fn main() -> berry_esseen::Result<()> {
    let c = (2.0f64 / 1.25).sqrt();
    let four_point = DistributionSpec::DiscreteAtoms {
        values: vec![vec![c, 0.5 * c], vec![-c, -0.5 * c], vec![0.5 * c, c], vec![-0.5 * c, -c]],
        probabilities: vec![0.25; 4],
    };
    let shift = 2.0 * 0.21f64.sqrt() / 0.4;
    let cases = [
        (StatisticKind::Student { mu: shift }, DistributionSpec::TwoPointBernoulliShift { p: 0.3, shift: None }),
        (StatisticKind::Student { mu: 1.0 }, DistributionSpec::normal(1.0, 1.0)),
        (StatisticKind::Pearson { rho: 0.8 }, four_point),
        (StatisticKind::Pearson { rho: 0.0 }, DistributionSpec::bivariate_normal(0.0)),
    ];
    for (kind, obs) in &cases {
        let r = degeneracy_check(kind, obs)?;
        println!(
            "{:<9} {:<28} sigma1 = {:<10.3e} degenerate = {:<5} {}",
            r.statistic,
            obs.kind_name(),
            r.sigma1,
            r.degenerate,
            r.witness.unwrap_or_default()
        );
    }
    Ok(())
}
