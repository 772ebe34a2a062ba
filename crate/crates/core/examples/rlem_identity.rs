//! The boundary-model right-tail rate computed two ways: directly from the
//! Bernoulli rate on the axis, and as a minimum over exit points of a
//! boundary rate plus a bulk rate.

use bernoulli_lpp::ldp::{h_rate, rlem_gap};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.25, Some(0.6))?;
    let (s, t, r) = (1.0, 1.0, 0.7);
    for n in [101, 201, 401] {
        let rep = rlem_gap(s, t, &law, r, n)?;
        println!(
            "{n:>4} exit points: direct {:.9}, minimized {:.9} at a = {:+.3}, gap {:.1e}",
            rep.left.to_f64(),
            rep.right.to_f64(),
            rep.argmin_a,
            rep.gap
        );
    }
    println!("\nexit-point profile H(a, a, r):");
    for k in 0..=8 {
        let a = -t + (s + t) * k as f64 / 8.0;
        println!("  a {a:+.2}: {:.6}", h_rate(a, a, s, t, &law, r)?.to_f64());
    }
    Ok(())
}
