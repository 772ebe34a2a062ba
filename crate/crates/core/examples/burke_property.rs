//! The Burke property: exactly, for a single local update and two chained
//! ones, and statistically along down-right paths of simulated lattices.

use bernoulli_lpp::burke::{exact_burke_factorization, mc_stationarity_check, two_stage_factorization};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    for &(p, u) in &[(0.25, 0.5), (0.1, 0.9), (0.5, 0.75), (0.25, 1.0)] {
        let law = validate_params(p, Some(u))?;
        let one = exact_burke_factorization(&law, 80)?;
        let two = two_stage_factorization(&law, 60)?;
        println!(
            "p = {p}, u = {u}: joint deviation {:.2e} (truncated mass {:.2e}), chained {:.2e}",
            one.max_abs_deviation, one.truncation_mass, two.max_abs_deviation
        );
    }

    let law = validate_params(0.25, Some(0.5))?;
    let report = mc_stationarity_check(&law, 32, 32, 20_000, 1)?;
    println!("\n32x32 lattice, 20000 replicates, passed = {}", report.passed);
    for path in &report.paths {
        println!("  {}", path.path);
        for m in &path.marginals {
            println!("    {:<24} {:.5} vs {:.5}  z = {:+.2}", m.label, m.empirical, m.expected, m.z);
        }
        for c in &path.correlations {
            println!("    corr {:<12} {:+.4} (|.| < {:.4})", c.pair, c.correlation, report.correlation_threshold);
        }
    }
    Ok(())
}
