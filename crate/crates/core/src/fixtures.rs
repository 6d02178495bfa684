//! The three bundled worked examples: the Heisenberg algebra, a
//! six-dimensional algebra with a two-dimensional center and a
//! nine-dimensional algebra with a three-dimensional center.

use crate::algebra::LieAlgebraSpec;
use crate::config::{parse_config_str, ConfigDocument};

pub const HEISENBERG_JSON: &str = include_str!("../fixtures/heisenberg.json");
pub const EXAMPLE2_JSON: &str = include_str!("../fixtures/example2.json");
pub const EXAMPLE3_JSON: &str = include_str!("../fixtures/example3.json");

/// Config text for example 1, 2 or 3.
pub fn example_json(which: u8) -> Option<&'static str> {
    match which {
        1 => Some(HEISENBERG_JSON),
        2 => Some(EXAMPLE2_JSON),
        3 => Some(EXAMPLE3_JSON),
        _ => None,
    }
}

pub fn example_config(which: u8) -> Option<ConfigDocument> {
    example_json(which).map(|t| parse_config_str(t).expect("bundled fixture is valid"))
}

fn algebra(which: u8) -> LieAlgebraSpec {
    example_config(which)
        .and_then(|c| c.spec().ok())
        .expect("bundled fixture is valid")
}

pub fn heisenberg_algebra() -> LieAlgebraSpec {
    algebra(1)
}

pub fn example2_algebra() -> LieAlgebraSpec {
    algebra(2)
}

pub fn example3_algebra() -> LieAlgebraSpec {
    algebra(3)
}
