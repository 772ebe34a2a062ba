//! Left-tail probabilities decay faster than exponentially in N: the
//! normalised log-probability keeps growing.

use bernoulli_lpp::montecarlo::{left_tail_diagnostic, Design};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.25, None)?;
    let report = left_tail_diagnostic(&law, Design::new(&law, false, 1.0, 1.0, 10, 200_000, 5), 0.6, &[10, 15, 20, 25, 30])?;
    println!("P(G <= {} N), limit shape {:.4}", report.r, report.shape_value);
    for row in &report.rows {
        println!(
            "  N {:>3}: hits {:>6}, -log P / N {}{:.4}",
            row.n,
            row.probability.hits,
            if row.censored { ">= " } else { "" },
            row.normalized
        );
    }
    println!("increasing over {} uncensored rows: {}", report.uncensored, report.increasing);
    Ok(())
}
