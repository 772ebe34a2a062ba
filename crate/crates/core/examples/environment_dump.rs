//! Reproducible environments: the same (seed, stream) always gives the same
//! lattice, which can be written to and read back from binary or JSON dumps.

use bernoulli_lpp::lattice::{corner_passage_time, decode_binary, decode_json, encode_binary, encode_json, sample_environment_stream};
use bernoulli_lpp::validate_params;

fn main() -> bernoulli_lpp::Result<()> {
    let law = validate_params(0.3, Some(0.6))?;
    let env = sample_environment_stream(&law, 6, 4, 42, 7, true)?;
    let bin = encode_binary(&env);
    let text = encode_json(&env);
    println!("6x4 boundary environment, seed 42 stream 7, G = {}", corner_passage_time(&env));
    println!("binary dump: {} bytes", bin.len());
    println!("json dump:\n{text}");
    assert_eq!(decode_binary(&bin)?, env);
    assert_eq!(decode_json(&text)?, env);
    let again = sample_environment_stream(&law, 6, 4, 42, 7, true)?;
    println!("resampled identical: {}", again == env);
    Ok(())
}
