use agg_core::reductions::GraphicalGame;
use serde::Deserialize;

use super::{join, parse, rows, FormatError};

pub const HEADER: &str = "gg/v1";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[allow(dead_code)]
    format: String,
    players: usize,
    edges: Vec<(usize, usize)>,
    payoffs: Vec<Vec<u8>>,
}

/// `payoffs[i]` is indexed by the bits (own choice, then neighbors in
/// ascending order), most significant first, with `t` = 1.
pub fn read_graphical(text: &str) -> Result<GraphicalGame, FormatError> {
    let raw: Raw = parse(text, HEADER)?;
    GraphicalGame::new(raw.players, raw.edges, raw.payoffs).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_graphical(h: &GraphicalGame) -> String {
    let payoffs = rows(0..h.players(), |i| format!("\n    [{}]", join(h.table(i), |x| x.to_string())));
    let payoffs = if h.players() == 0 { String::new() } else { format!("{payoffs}\n  ") };
    format!(
        "{{\n  \"format\": \"{HEADER}\",\n  \"players\": {},\n  \"edges\": [{}],\n  \"payoffs\": [{payoffs}]\n}}\n",
        h.players(),
        join(h.edges(), |(a, b)| format!("[{a}, {b}]")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let h = GraphicalGame::new(3, vec![(1, 0), (1, 2)], vec![vec![0, 1, 2, 0], vec![2; 8], vec![1, 1, 0, 0]]).unwrap();
        let text = write_graphical(&h);
        assert_eq!(read_graphical(&text).unwrap(), h);
    }

    #[test]
    fn invalid_tables_are_reported() {
        let text = "{\"format\": \"gg/v1\", \"players\": 1, \"edges\": [], \"payoffs\": [[0, 5]]}";
        assert!(matches!(read_graphical(text), Err(FormatError::Invalid(_))));
    }
}
