//! Environments, passage times, gradient fields and exhaustive oracles.

mod dp;
mod dump;
mod env;
mod oracle;

pub use dp::{
    alpha_field, burke_step, corner_passage_time, increment_fields, passage_time,
    restricted_passage_time, AlphaField, BurkeTriple, CornerSampler, FirstStep, Increments,
    PassageField,
};
pub use dump::{decode_binary, decode_json, encode_binary, encode_json};
pub use env::{sample_environment, sample_environment_stream, EnvironmentGrid};
pub use oracle::{
    brute_force_passage, default_y_cutoff, exact_law, ExactLaw, MAX_ENUMERATED_STEPS,
    MAX_EXACT_CONFIGS,
};
