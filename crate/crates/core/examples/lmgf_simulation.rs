//! Empirical log-MGFs against their limits, for both models.

use bernoulli_lpp::ldp::istar;
use bernoulli_lpp::lmgf::{lambda_boundary, Part};
use bernoulli_lpp::montecarlo::{estimate_lmgf, Design};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let iid = validate_params(0.25, None)?;
    let bnd = validate_params(0.25, Some(0.5))?;
    for xi in [-0.2, 0.1, 0.2, 0.3] {
        let a = estimate_lmgf(&iid, Design::new(&iid, false, 1.0, 1.0, 200, 20_000, 4), xi)?;
        let b = estimate_lmgf(&bnd, Design::new(&bnd, true, 1.0, 1.0, 200, 20_000, 4), xi)?;
        let lb = if xi >= 0.0 {
            format!("{:.4}", lambda_boundary(1.0, 1.0, &bnd, xi, Part::Full)?.value.to_f64())
        } else {
            "-".into()
        };
        println!(
            "xi {xi:+.1}: i.i.d. {:.4} ± {:.4} (limit {:.4}); boundary {:.4} ± {:.4} (limit {lb})",
            a.point,
            a.half_width_95,
            istar(1.0, 1.0, 0.25, xi)?,
            b.point,
            b.half_width_95
        );
    }
    Ok(())
}
