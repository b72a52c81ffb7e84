//! Numerical certification of the smoothness constant.

use berry_esseen::statistics::{certify_smoothness, smoothness_certify};
use berry_esseen::verify::shipped_models;
use berry_esseen::statistics::{build_model, BuildOptions};

fn main() -> berry_esseen::Result<()> {
    let quad = |x: &[f64]| x[0] + x[0] * x[0];
    let c = certify_smoothness(&quad, &[1.0], 0.5, 10_000, 1)?;
    println!("x + x^2: M_hat = {:.8}, violations = {}", c.m_hat, c.violations);

    let opts = BuildOptions { certify_points: 20_000, ..BuildOptions::default() };
    for (kind, obs) in shipped_models() {
        let model = build_model(kind.clone(), &obs, &opts)?;
        let cert = smoothness_certify(&model, 0.5, 20_000, 99)?;
        println!("{:<9} M_hat = {:.4}  violations = {}  (model M = {:.4})", kind.name(), cert.m_hat, cert.violations, model.m);
    }
    Ok(())
}
