//! The right-tail rate function of the i.i.d. model: its convex dual J*, the
//! optimal boundary parameter u*, and the Legendre transform back.

use bernoulli_lpp::ldp::{dual_curve, jstar, jstar_derivative, rate_i, JstarMethod, XI_MAX};
use bernoulli_lpp::shape::gpp;

fn main() -> bernoulli_lpp::Result<()> {
    let (s, t, p) = (2.0, 1.0, 0.5);
    let xis: Vec<f64> = (0..=6).map(|k| 0.5 * k as f64).collect();
    let curve = dual_curve(s, t, p, &xis)?;
    println!("J*(xi) for (s, t) = ({s}, {t}), p = {p}");
    for k in 0..xis.len() {
        let var = jstar(s, t, p, xis[k], JstarMethod::Variational)?.value;
        println!(
            "  xi {:>4}: J* {:.6} (variational {:.6}), u* {:.6}, slope {:.6}",
            xis[k],
            curve.jstar[k],
            var,
            curve.u_star[k].unwrap_or(f64::NAN),
            jstar_derivative(s, t, p, xis[k])?
        );
    }

    let g = gpp(s, t, p)?.value;
    println!("\nrate I(r) on [gpp, s] = [{g:.4}, {s}]");
    for k in 0..=8 {
        let r = g + (s - g) * k as f64 / 8.0;
        let v = rate_i(s, t, p, r, XI_MAX)?;
        println!(
            "  r {r:.4}: I = {:.6}, maximizing xi {:.4}{}",
            v.value.to_f64(),
            v.argmax_xi.unwrap_or(f64::NAN),
            if v.saturated { " (saturated)" } else { "" }
        );
    }
    Ok(())
}
