//! Large-`z` defect of `x + x²` under a heavy-tailed summand law.

use berry_esseen::simulation::{optimality_demo, DemoSpec, ZRule};

fn main() -> berry_esseen::Result<()> {
    let spec = DemoSpec {
        p: 2.5,
        n_grid: vec![1_000, 4_000, 16_000],
        rules: vec![ZRule::Kappa(1.0), ZRule::Power(0.75)],
        replicates: 4_000,
        seed: 7,
        workers: 1,
        linear: false,
    };
    let report = optimality_demo(&spec)?;
    println!("{:>6} {:>14} {:>12} {:>12} {:>10} {:>9}", "n", "rule", "defect", "n P(V>w)", "ratio", "± se");
    for r in &report.rows {
        println!(
            "{:>6} {:>14} {:>12.4e} {:>12.4e} {:>10.4} {:>9.4}",
            r.n,
            format!("{:?}", r.rule),
            r.defect,
            r.tail,
            r.ratio,
            r.ratio_std_err
        );
    }
    Ok(())
}
