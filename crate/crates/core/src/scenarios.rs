//! Scenarios shipped with the crate; the JSON sources live in `scenarios/`.

use crate::error::{Error, Result};
use crate::solver::ScenarioDescriptor;

pub const BUILTIN_NAMES: [&str; 4] =
    ["flat_linear", "flat_polynomial", "triple_junction_linear", "cosh_gradient_consistency"];

/// JSON text of a built-in scenario.
pub fn builtin_json(name: &str) -> Option<&'static str> {
    match name {
        "flat_linear" => Some(include_str!("../scenarios/flat_linear.json")),
        "flat_polynomial" => Some(include_str!("../scenarios/flat_polynomial.json")),
        "triple_junction_linear" => Some(include_str!("../scenarios/triple_junction_linear.json")),
        "cosh_gradient_consistency" => Some(include_str!("../scenarios/cosh_gradient_consistency.json")),
        _ => None,
    }
}

pub fn builtin(name: &str) -> Result<ScenarioDescriptor> {
    let text = builtin_json(name).ok_or_else(|| {
        Error::Config(format!("unknown built-in scenario `{name}`; known: {}", BUILTIN_NAMES.join(", ")))
    })?;
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_files() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name, name);
        }
        assert!(builtin("nope").is_err());
    }
}
