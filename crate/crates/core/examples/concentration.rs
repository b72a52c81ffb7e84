//! The exactly checkable inequalities on small discrete families.

use berry_esseen::bounds::BoundInputs;
use berry_esseen::concentration::{hoeffding_suite, hoeffding_tail, max_suite, max_sum_check, sum_tail_bound, tilt, tilt_suite};
use berry_esseen::family::{DiscreteFamily, DiscreteLaw};
use berry_esseen::moments::{Moment, MomentProfile, TailSum};

fn main() -> berry_esseen::Result<()> {
    let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(0.5), 4)?;
    let exact: f64 = fam.sum_law_merged().iter().filter(|a| a.0 >= 2.0).map(|a| a.1).sum();
    let bound = hoeffding_tail(2.0, 1.0, &|t| fam.tail_sum(t))?;
    println!("P(W >= 2) = {exact}, Hoeffding-type bound = {bound:.5}");

    let tilted = tilt(&fam, 0.7)?;
    println!("tilt c = 0.7: E e^(cW) = {:.6}, identity residual = {:.1e}", tilted.normalizer(), tilted.identity_residual()?);

    let pair = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(1.0), 2)?;
    let m = max_sum_check(&pair, 0.5)?;
    println!("max-of-sums at x = 0.5: {} >= {} >= {:.4} holds = {}", m.lhs, m.mid, m.rhs, m.holds);

    let profile = MomentProfile::from_sums(vec![(1.5, Moment::exact(0.05)), (2.0, Moment::exact(0.1)), (3.0, Moment::exact(0.2))], TailSum::zero());
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, profile)?;
    let s = sum_tail_bound(&inputs, 3.0)?;
    println!("sum-tail lemma at z = 3: x = {}, Lambda1 = {:.5}, bound = {:.5}", s.x, s.lambda1, s.bound);

    for suite in [hoeffding_suite(100, 1), max_suite(1000, 1), tilt_suite(100, 1)] {
        println!("{:<12} checks = {:<6} violations = {}", suite.name, suite.checks, suite.violations);
    }
    Ok(())
}
