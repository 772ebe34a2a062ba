//! Limiting log-MGF of the boundary model: the horizontal and vertical
//! restrictions, the switching line t = ell s, and the pole.

use bernoulli_lpp::lmgf::{lambda_boundary, thresholds, Part};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.25, Some(0.5))?;
    println!("pole at xi = {:.6} (ln 3)", law.geometric_pole()?);
    println!("{:>5} {:>10} {:>10} {:>10} {:>13} {:>8} {:>8} {:>8}", "xi", "hor", "ver", "full", "regime", "k+", "k-", "ell");
    for k in 0..=12 {
        let xi = 0.1 * k as f64;
        let get = |part| lambda_boundary(1.0, 1.0, &law, xi, part);
        let full = get(Part::Full)?;
        let th = thresholds(&law, xi)?;
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{xi:>5.1} {:>10} {:>10} {:>10} {:>13} {:>8.4} {:>8} {:>8}",
            format!("{:.6}", get(Part::Hor)?.value.to_f64()),
            format!("{:.6}", get(Part::Ver)?.value.to_f64()),
            format!("{:.6}", full.value.to_f64()),
            full.regime.as_str(),
            th.k_plus,
            fmt(th.k_minus),
            fmt(th.ell)
        );
    }
    Ok(())
}
