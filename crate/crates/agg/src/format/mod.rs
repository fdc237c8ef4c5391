//! Text formats. Every format is a JSON object whose `format` key names the
//! format and version; writers produce one canonical layout so that equal
//! values serialize to identical bytes.

mod circuit;
mod game;
mod graphical;
mod listing;
mod profile;

pub use circuit::{read_circuit, write_circuit};
pub use game::{read_game, write_game};
pub use graphical::{read_graphical, write_graphical};
pub use listing::{read_listing, write_grid_listing, write_pure_listing, Listing};
pub use profile::{read_profile, write_profile, ProfileFile};

use serde::de::DeserializeOwned;

/// Problems reading a file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown key `{key}` at line {line}, column {column}")]
    UnknownKey { key: String, line: usize, column: usize },
    #[error("expected format `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("{0}")]
    Invalid(String),
}

/// Reads `text` as `T`, checking the `format` tag first.
fn parse<T: DeserializeOwned>(text: &str, header: &'static str) -> Result<T, FormatError> {
    #[derive(serde::Deserialize)]
    struct Tag {
        format: Option<String>,
    }
    let tag: Tag = serde_json::from_str(text).map_err(convert)?;
    match tag.format {
        Some(f) if f == header => {}
        Some(f) => return Err(FormatError::Header { expected: header, found: f }),
        None => return Err(FormatError::Header { expected: header, found: String::new() }),
    }
    serde_json::from_str(text).map_err(convert)
}

fn convert(e: serde_json::Error) -> FormatError {
    let message = e.to_string();
    let (line, column) = (e.line(), e.column());
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return FormatError::UnknownKey { key, line, column };
    }
    let message = match message.rfind(" at line ") {
        Some(at) => message[..at].to_string(),
        None => message,
    };
    FormatError::Parse { line, column, message }
}

/// A probability with 17 significant digits.
pub(crate) fn prob(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn join<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Joins items that each start on their own line.
pub(crate) fn rows<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(",")
}

pub(crate) fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}
