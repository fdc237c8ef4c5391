use agg_core::{StrategyId, TypeSymmetricProfile};
use serde::Deserialize;

use super::{join, parse, rows, prob, FormatError};

pub const HEADER: &str = "listing/v1";

/// Output of the enumeration oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum Listing {
    /// Pure equilibria as one strategy id per agent, in lexicographic order.
    PureNash(Vec<Vec<StrategyId>>),
    /// Type-symmetric grid profiles with regret at most `eps`, in grid order.
    GridSearch { units: u32, eps: f64, profiles: Vec<TypeSymmetricProfile> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[allow(dead_code)]
    format: String,
    kind: String,
    #[serde(default)]
    units: Option<u32>,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    count: Option<usize>,
    profiles: serde_json::Value,
}

pub fn read_listing(text: &str) -> Result<Listing, FormatError> {
    let raw: Raw = parse(text, HEADER)?;
    let invalid = |m: &str| FormatError::Invalid(m.to_string());
    let listing = match raw.kind.as_str() {
        "pure-nash" => Listing::PureNash(serde_json::from_value(raw.profiles).map_err(|e| invalid(&e.to_string()))?),
        "grid-search" => {
            let vectors: Vec<Vec<Vec<f64>>> = serde_json::from_value(raw.profiles).map_err(|e| invalid(&e.to_string()))?;
            Listing::GridSearch {
                units: raw.units.ok_or_else(|| invalid("grid-search listing without `units`"))?,
                eps: raw.eps.ok_or_else(|| invalid("grid-search listing without `eps`"))?,
                profiles: vectors.into_iter().map(TypeSymmetricProfile::new).collect(),
            }
        }
        k => return Err(invalid(&format!("listing kind must be `pure-nash` or `grid-search`, found `{k}`"))),
    };
    let len = match &listing {
        Listing::PureNash(p) => p.len(),
        Listing::GridSearch { profiles, .. } => profiles.len(),
    };
    if raw.count.is_some_and(|c| c != len) {
        return Err(invalid("`count` disagrees with the number of profiles"));
    }
    Ok(listing)
}

pub fn write_pure_listing(profiles: &[Vec<StrategyId>]) -> String {
    let lines = rows(profiles, |p| format!("\n    [{}]", join(p, |s| s.to_string())));
    let body = if profiles.is_empty() { String::new() } else { format!("{lines}\n  ") };
    format!(
        "{{\n  \"format\": \"{HEADER}\",\n  \"kind\": \"pure-nash\",\n  \"count\": {},\n  \"profiles\": [{body}]\n}}\n",
        profiles.len()
    )
}

pub fn write_grid_listing(units: u32, eps: f64, profiles: &[TypeSymmetricProfile]) -> String {
    let lines = rows(profiles, |p| format!("\n    [{}]", join(&p.vectors, |v| format!("[{}]", join(v, |&x| prob(x))))));
    let body = if profiles.is_empty() { String::new() } else { format!("{lines}\n  ") };
    format!(
        "{{\n  \"format\": \"{HEADER}\",\n  \"kind\": \"grid-search\",\n  \"units\": {units},\n  \"eps\": {},\n  \"count\": {},\n  \"profiles\": [{body}]\n}}\n",
        prob(eps),
        profiles.len()
    )
}
