use std::collections::BTreeMap;
use std::fmt::Write as _;

use agg_core::{ActionGraphGame, Payoff, PlayerType};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::Number;

use super::{join, parse, quote, FormatError};

pub const HEADER: &str = "agg/v1";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    #[allow(dead_code)]
    format: String,
    n: u32,
    #[serde(default)]
    labels: Option<Vec<String>>,
    types: Vec<TypeEntry>,
    edges: Vec<(usize, usize)>,
    utilities: BTreeMap<String, Vec<(Vec<u32>, Number, Number)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeEntry {
    count: u32,
    strategies: Vec<usize>,
}

fn integer(n: &Number) -> Result<BigInt, FormatError> {
    n.as_str().parse().map_err(|_| FormatError::Invalid(format!("payoff component {n} is not an integer")))
}

/// Parses an `agg/v1` file. Semantic problems (incomplete tables, bad
/// counts) are left for the validator.
pub fn read_game(text: &str) -> Result<ActionGraphGame, FormatError> {
    let file: GameFile = parse(text, HEADER)?;
    let mut utilities = BTreeMap::new();
    for (key, rows) in file.utilities {
        let s: usize = key.parse().map_err(|_| FormatError::Invalid(format!("utility key `{key}` is not a strategy id")))?;
        let mut entries = Vec::with_capacity(rows.len());
        for (counts, num, den) in rows {
            let (num, den) = (integer(&num)?, integer(&den)?);
            if den.is_zero() {
                return Err(FormatError::Invalid(format!("zero denominator in the table of strategy {s}")));
            }
            entries.push((counts, Payoff::new(num, den)));
        }
        utilities.insert(s, entries);
    }
    let count = match &file.labels {
        Some(l) => l.len(),
        None => {
            let from_types = file.types.iter().flat_map(|t| t.strategies.iter().copied());
            let from_edges = file.edges.iter().flat_map(|&(a, b)| [a, b]);
            let from_tables = utilities.keys().copied();
            from_types.chain(from_edges).chain(from_tables).max().map_or(0, |m| m + 1)
        }
    };
    if utilities.keys().any(|&s| s >= count) {
        return Err(FormatError::Invalid("utility table for a strategy beyond the label list".into()));
    }
    let labels = file.labels.unwrap_or_else(|| (0..count).map(|i| format!("s{i}")).collect());
    let types = file.types.into_iter().map(|t| PlayerType::new(t.count, t.strategies)).collect();
    let mut entries = vec![Vec::new(); count];
    for (s, e) in utilities {
        entries[s] = e;
    }
    Ok(ActionGraphGame::from_parts(file.n, labels, types, file.edges, entries))
}

/// Canonical `agg/v1` text: configurations of every table in lexicographic
/// order, payoffs in lowest terms.
pub fn write_game(game: &ActionGraphGame) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"format\": \"{HEADER}\",\n  \"n\": {},", game.n());
    let _ = writeln!(out, "  \"labels\": [{}],", join(game.labels(), |l| quote(l)));
    out.push_str("  \"types\": [");
    let types: Vec<String> = game
        .types()
        .iter()
        .map(|t| format!("\n    {{\"count\": {}, \"strategies\": [{}]}}", t.agent_count, join(&t.strategies, |s| s.to_string())))
        .collect();
    out.push_str(&types.join(","));
    out.push_str(if types.is_empty() { "],\n" } else { "\n  ],\n" });
    let _ = writeln!(out, "  \"edges\": [{}],", join(game.graph().edges(), |(a, b)| format!("[{a}, {b}]")));
    out.push_str("  \"utilities\": {");
    let mut tables = Vec::new();
    // Keys sort as strings so that reading and writing agree.
    let mut keys: Vec<usize> = (0..game.strategy_count()).collect();
    keys.sort_by_key(|s| s.to_string());
    for s in keys {
        let t = game.utility_table(s);
        let rows: Vec<String> = t
            .entries()
            .map(|(c, p)| (c, p.clone()))
            .chain(t.stray().iter().cloned())
            .map(|(c, p)| format!("\n      [[{}], {}, {}]", join(&c, |x| x.to_string()), p.numer(), p.denom()))
            .collect();
        if rows.is_empty() {
            tables.push(format!("\n    \"{s}\": []"));
        } else {
            tables.push(format!("\n    \"{s}\": [{}\n    ]", rows.join(",")));
        }
    }
    out.push_str(&tables.join(","));
    out.push_str(if tables.is_empty() { "}\n}\n" } else { "\n  }\n}\n" });
    out
}
