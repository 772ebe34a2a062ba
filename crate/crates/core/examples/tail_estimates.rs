//! Right-tail probabilities by plain Monte Carlo and the rate function they
//! approach. The normalised log-probability carries an O(1/N) correction,
//! visible here as a steady drift towards the limit.

use bernoulli_lpp::ldp::{rate_i, XI_MAX};
use bernoulli_lpp::montecarlo::{estimate_tail, Design};
use bernoulli_lpp::optimize::bisect_decreasing;
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.25, None)?;
    let target = 0.01;
    let r = bisect_decreasing(
        |r| target - rate_i(1.0, 1.0, 0.25, r, XI_MAX).map_or(f64::INFINITY, |v| v.value.to_f64()),
        0.8661,
        1.0,
        1e-13,
    );
    println!("r = {r:.6}, rate_I(r) = {target}");
    let mut previous = None;
    for n in [25, 50, 100, 200] {
        let e = estimate_tail(&law, Design::new(&law, false, 1.0, 1.0, n, 50_000, 3), r)?;
        let prob = e.probability.expect("tail estimates carry a probability");
        print!(
            "N {n:>4}: P = {:.3e} [{:.2e}, {:.2e}], -log P / N = {:.4} ± {:.4}",
            prob.estimate, prob.wilson_low, prob.wilson_high, e.point, e.half_width_95
        );
        if let Some(prev) = previous {
            print!(", a + b/N fit {:.4}", 2.0 * e.point - prev);
        }
        println!();
        previous = Some(e.point);
    }
    let beyond = estimate_tail(&law, Design::new(&law, false, 1.0, 1.0, 50, 10_000, 3), 1.05)?;
    println!("r = 1.05 > s: censored = {}, rate >= {:.4}", beyond.censored, beyond.point);
    Ok(())
}
