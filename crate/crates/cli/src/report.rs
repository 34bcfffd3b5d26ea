//! Flat `key=value` run reports.

use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};

/// Key excluded from [`RunReport::canonical`]; it is the only field that
/// depends on the machine rather than the inputs.
pub const WALL_TIME_KEY: &str = "wall_ms";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("line {0}: expected `key=value`")]
    MissingSeparator(usize),
    #[error("line {0}: invalid key")]
    BadKey(usize),
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
}

/// An ordered list of fields. Keys are nonempty and contain no `=`, spaces or
/// newlines; values contain no newlines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    fields: Vec<(String, String)>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty() && !key.contains(|c: char| c == '=' || c.is_whitespace())
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.set("command", command);
        r
    }

    /// Sets a field, replacing an existing value in place. Newlines in the
    /// value are replaced by spaces.
    pub fn set(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        assert!(valid_key(key), "invalid report key `{key}`");
        let value = value.to_string().replace(['\n', '\r'], " ");
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Every field except the wall time, for comparing runs.
    pub fn canonical(&self) -> String {
        let mut copy = self.clone();
        copy.fields.retain(|(k, _)| k != WALL_TIME_KEY);
        copy.to_text()
    }

    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut report = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ReportError::MissingSeparator(line_no))?;
            if !valid_key(k) {
                return Err(ReportError::BadKey(line_no));
            }
            if report.get(k).is_some() {
                return Err(ReportError::DuplicateKey { line: line_no, key: k.to_string() });
            }
            report.fields.push((k.to_string(), v.to_string()));
        }
        Ok(report)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = RunReport::new("decide");
        r.set("s", "4/5").set("verdict", "AT_LEAST_C").set("note", "a=b c").set(WALL_TIME_KEY, 12);
        let back = RunReport::parse(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert!(!r.canonical().contains(WALL_TIME_KEY));
        assert_eq!(back.get("note"), Some("a=b c"));
    }

    #[test]
    fn set_replaces() {
        let mut r = RunReport::new("x");
        r.set("k", 1).set("k", "two\nlines");
        assert_eq!(r.fields().len(), 2);
        assert_eq!(r.get("k"), Some("two lines"));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(RunReport::parse("a=1\nnope\n"), Err(ReportError::MissingSeparator(2)));
        assert_eq!(RunReport::parse("=1\n"), Err(ReportError::BadKey(1)));
        assert!(matches!(RunReport::parse("a=1\na=2\n"), Err(ReportError::DuplicateKey { line: 2, .. })));
    }

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
