//! Flat `key = value` text configuration.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// ignored; keys are trimmed and lower-cased; a repeated key keeps the last
/// value.
pub fn parse_key_values(text: &str, source_name: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(source_name, i + 1, format!("expected key = value, found {line:?}")));
        };
        let key = k.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(Error::parse(source_name, i + 1, "empty key"));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Typed lookup; a present but unparsable value is an error.
pub fn get_parsed<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Invalid(format!("bad value {v:?} for {key}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blanks_and_case() {
        let m = parse_key_values("# c\n\nV_Min = 12\nname=base # not a comment\n", "t").unwrap();
        assert_eq!(m["v_min"], "12");
        assert_eq!(m["name"], "base # not a comment");
        assert_eq!(get_parsed::<f64>(&m, "v_min").unwrap(), Some(12.0));
        assert_eq!(get_parsed::<f64>(&m, "absent").unwrap(), None);
        assert!(get_parsed::<f64>(&m, "name").is_err());
    }

    #[test]
    fn missing_equals_reports_line() {
        let err = parse_key_values("a = 1\nbroken\n", "cfg").unwrap_err();
        assert!(err.to_string().contains('2'), "{err}");
    }
}
