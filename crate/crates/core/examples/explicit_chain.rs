//! Fully explicit (but suboptimal) bound via truncation, and the linear
//! Berry-Esseen bound for a discrete sum.

use berry_esseen::bounds::{linear_be_bound, suboptimal_exp_bound, SuboptimalNorms, DEFAULT_BE_CONSTANT};
use berry_esseen::family::{DiscreteLaw, PairLaw};

fn main() -> berry_esseen::Result<()> {
    let norms = SuboptimalNorms { v2: 1.0, vp: 1.0, lv: 1.0, sigma1: 1.0 };
    for n in [1_000usize, 100_000, 10_000_000, 1_000_000_000] {
        let r = suboptimal_exp_bound(n, 3.0, norms, 2.0, 0.5, DEFAULT_BE_CONSTANT)?;
        println!("n = {n:>10}: total = {:.4e}", r.total_modulo_constant);
        for t in &r.terms {
            println!("    {:<18} {:.4e}", t.label, t.value);
        }
    }

    let xi = DiscreteLaw::symmetric_pair(0.1);
    let pairs = vec![PairLaw::diagonal(&xi); 100];
    for z in [0.0, 1.0, 3.0] {
        let b = linear_be_bound(&pairs, z, 3.0)?;
        println!("linear part at z = {z}: B1 = {:.4e}, B2 = {:.4e}", b.b1, b.b2);
    }
    Ok(())
}
