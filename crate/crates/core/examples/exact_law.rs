//! Exhaustive oracles on small lattices: path enumeration against the
//! dynamic programme, and the exact law of the corner passage time.

use bernoulli_lpp::lattice::{brute_force_passage, corner_passage_time, exact_law, passage_time, sample_environment};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.4, Some(0.7))?;
    let env = sample_environment(&law, 4, 3, 2024, true)?;
    let field = passage_time(&env);
    println!("passage times on a 4x3 boundary environment (row j = 3 first):");
    for j in (0..=3).rev() {
        let row: Vec<String> = (0..=4).map(|i| format!("{:>3}", field.get(i, j))).collect();
        println!("  {}", row.join(""));
    }
    println!("DP corner {} / enumeration {}", corner_passage_time(&env), brute_force_passage(&env)?);

    let iid = validate_params(0.4, None)?;
    let exact = exact_law(&iid, 3, 3, false, None)?;
    println!("\nexact law of G(3,3), p = 0.4, i.i.d.:");
    for (g, q) in exact.probabilities.iter().enumerate() {
        println!("  P(G = {g}) = {q:.6}");
    }
    println!("  mean {:.6}, total mass {:.12}", exact.mean(), exact.total());

    let boundary = exact_law(&law, 2, 2, true, None)?;
    println!(
        "\nboundary model 2x2: mean {:.6}, geometric cutoff {:?}, discarded mass {:.2e}",
        boundary.mean(),
        boundary.y_cutoff,
        boundary.truncation_mass
    );
    Ok(())
}
