//! Monte Carlo growth rates G/N against the limit shapes, at increasing N.

use bernoulli_lpp::montecarlo::{estimate_growth, Design};
use bernoulli_lpp::shape::{gpp, gpp_boundary};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let iid = validate_params(0.25, None)?;
    let bnd = validate_params(0.25, Some(0.5))?;
    let target_iid = gpp(1.0, 1.0, 0.25)?.value;
    let target_bnd = gpp_boundary(1.0, 1.0, &bnd)?;
    for n in [100, 300, 1000] {
        let a = estimate_growth(&iid, Design::new(&iid, false, 1.0, 1.0, n, 50, 1))?;
        let b = estimate_growth(&bnd, Design::new(&bnd, true, 1.0, 1.0, n, 50, 1))?;
        println!(
            "N {n:>5}: i.i.d. {:.4} ± {:.4} (limit {target_iid:.4}), boundary {:.4} ± {:.4} (limit {target_bnd:.4})",
            a.point, a.half_width_95, b.point, b.half_width_95
        );
    }
    Ok(())
}
