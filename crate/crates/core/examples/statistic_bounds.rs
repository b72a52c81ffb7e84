//! Uniform and non-uniform bounds for non-central Student's T.

use berry_esseen::bounds::{iid_p3_constants, nonuniform_fs_bound, uniform_fs_bound, BoundInputs};
use berry_esseen::statistics::{build_model, BuildOptions, StatisticKind};
use berry_esseen::DistributionSpec;

fn main() -> berry_esseen::Result<()> {
    let opts = BuildOptions::default();
    let model = build_model(StatisticKind::Student { mu: 1.0 }, &DistributionSpec::normal(1.0, 1.0), &opts)?;
    println!(
        "||L|| = {:.5}  sigma1 = {:.5}  M = {:.4} (certified {:.4})  C1 = {:.4}",
        model.norm_l,
        model.sigma1.value,
        model.m,
        model.m_certified,
        model.c1()
    );
    for n in [100, 1_000, 10_000] {
        let profile = model.moment_profile(n, &[1.5, 2.0, 3.0], &opts)?;
        let inputs = BoundInputs::iid(model.norm_l, model.sigma1.value, model.m, model.epsilon, 3.0, profile)?;
        let (a1, a2) = iid_p3_constants(&model.scalars(), inputs.profile.norm_v(2.0)?, inputs.profile.norm_v(3.0)?, n)?;
        let uniform = uniform_fs_bound(&inputs, None, None)?;
        println!("\nn = {n}: A1 = {a1:.4}, A2 = {a2:.4}, uniform total = {:.4e}", uniform.total_modulo_constant);
        for t in &uniform.terms {
            println!("  {:<32} {:.4e}", t.label, t.value);
        }
        for z in [2.0, 4.0, 8.0] {
            match nonuniform_fs_bound(&inputs, z) {
                Ok(r) => {
                    let terms: Vec<String> = r.terms.iter().map(|t| format!("{} {:.3e}", t.label, t.value)).collect();
                    println!("  z = {z}: non-uniform total = {:.4e}  [{}]", r.total_modulo_constant, terms.join(", "))
                }
                Err(e) => println!("  z = {z}: {e}"),
            }
        }
    }
    Ok(())
}
