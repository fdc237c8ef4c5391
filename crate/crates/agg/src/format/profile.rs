use agg_core::{MixedProfile, TypeSymmetricProfile};
use serde::Deserialize;

use super::{join, parse, rows, prob, FormatError};

pub const HEADER: &str = "profile/v1";

/// A profile file holds either one vector per type or one per agent.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileFile {
    Type(TypeSymmetricProfile),
    Agent(MixedProfile),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[allow(dead_code)]
    format: String,
    kind: String,
    vectors: Vec<Vec<f64>>,
}

pub fn read_profile(text: &str) -> Result<ProfileFile, FormatError> {
    let raw: Raw = parse(text, HEADER)?;
    match raw.kind.as_str() {
        "type" => Ok(ProfileFile::Type(TypeSymmetricProfile::new(raw.vectors))),
        "agent" => Ok(ProfileFile::Agent(MixedProfile::new(raw.vectors))),
        k => Err(FormatError::Invalid(format!("profile kind must be `type` or `agent`, found `{k}`"))),
    }
}

/// Probabilities are written with 17 significant digits, which reads back
/// to the same binary64 value.
pub fn write_profile(p: &ProfileFile) -> String {
    let (kind, vectors) = match p {
        ProfileFile::Type(t) => ("type", &t.vectors),
        ProfileFile::Agent(m) => ("agent", &m.vectors),
    };
    let lines = rows(vectors, |v| format!("\n    [{}]", join(v, |&x| prob(x))));
    let body = if vectors.is_empty() { String::new() } else { format!("{lines}\n  ") };
    format!("{{\n  \"format\": \"{HEADER}\",\n  \"kind\": \"{kind}\",\n  \"vectors\": [{body}]\n}}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let v = vec![vec![0.1, 0.2, 0.7000000000000001], vec![1.0 / 3.0, 2.0 / 3.0], vec![1.0]];
        for p in [ProfileFile::Type(TypeSymmetricProfile::new(v.clone())), ProfileFile::Agent(MixedProfile::new(v.clone()))] {
            let text = write_profile(&p);
            let back = read_profile(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(write_profile(&back), text);
        }
    }

    #[test]
    fn bad_kind() {
        let text = "{\"format\": \"profile/v1\", \"kind\": \"player\", \"vectors\": []}";
        assert!(matches!(read_profile(text), Err(FormatError::Invalid(_))));
    }
}
