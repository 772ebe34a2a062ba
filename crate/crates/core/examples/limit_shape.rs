//! Limit shapes of the i.i.d. and boundary models, and where the boundary
//! model switches between its two restricted shapes.

use bernoulli_lpp::lattice::FirstStep;
use bernoulli_lpp::shape::{characteristic_direction, gpp, gpp_boundary, gpp_restricted, variational_gpp};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let p = 0.25;
    println!("i.i.d. shape at p = {p}");
    println!("{:>5} {:>5} {:>10} {:>12} {:>16}", "s", "t", "gpp", "variational", "branch");
    for &(s, t) in &[(1.0, 0.25), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (1.0, 5.0)] {
        let closed = gpp(s, t, p)?;
        let var = variational_gpp(s, t, p)?;
        println!("{s:>5} {t:>5} {:>10.6} {:>12.6} {:>16}", closed.value, var.value, closed.branch.as_str());
    }

    let law = validate_params(p, Some(0.5))?;
    let (_, slope) = characteristic_direction(&law)?;
    println!("\nboundary model u = 0.5: characteristic slope {slope:.6}");
    for &t in &[0.05, slope, 0.5] {
        let hor = gpp_restricted(1.0, t, &law, FirstStep::Horizontal)?;
        let ver = gpp_restricted(1.0, t, &law, FirstStep::Vertical)?;
        println!(
            "t = {t:.4}: stationary {:.6}, first step e1 {:.6} ({}), first step e2 {:.6} ({})",
            gpp_boundary(1.0, t, &law)?,
            hor.value,
            hor.branch.as_str(),
            ver.value,
            ver.branch.as_str()
        );
    }
    Ok(())
}
