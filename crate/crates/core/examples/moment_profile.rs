//! Moment scalars and tail sums of summand laws.

use berry_esseen::{moment_profile, tail_sum, DistributionSpec, ExpectationMode};

fn main() -> berry_esseen::Result<()> {
    let alphas = [1.5, 2.0, 3.0];
    let specs = [
        ("rademacher", DistributionSpec::rademacher()),
        ("standard normal", DistributionSpec::standard_normal()),
        ("centered exponential", DistributionSpec::StandardizedExponential { shift: 0.0 }),
        ("heavy tail, p = 2.5", DistributionSpec::HeavyTailLogcorrected { p: 2.5 }),
    ];
    for (name, spec) in &specs {
        let profile = moment_profile(spec, &alphas, 100, ExpectationMode::Exact)?;
        print!("{name:>22}:");
        for &a in &alphas {
            match profile.norm_v_moment(a) {
                Some(m) if m.is_finite() => print!("  ||V||_{a} = {:.6}", m.value(a)?),
                _ => print!("  ||V||_{a} = inf"),
            }
        }
        println!("  G(0.03) = {:.4e}", tail_sum(&profile, 0.03)?);
    }
    Ok(())
}
