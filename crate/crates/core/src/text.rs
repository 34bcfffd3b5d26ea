//! Line-oriented tokenizer shared by the text formats.

use std::fmt;

use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

/// One non-empty line with comments (`# ...`) stripped.
pub struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<&'a str>,
}

impl<'a> Line<'a> {
    pub fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.number, message)
    }

    pub fn keyword(&self) -> &'a str {
        self.tokens[0]
    }

    pub fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        if self.tokens.len() != n {
            return Err(self.err(format!(
                "expected {} fields after `{}`, found {}",
                n - 1,
                self.keyword(),
                self.tokens.len() - 1
            )));
        }
        Ok(())
    }

    pub fn usize_at(&self, i: usize) -> Result<usize, ParseError> {
        self.tokens[i]
            .parse()
            .map_err(|_| self.err(format!("invalid index `{}`", self.tokens[i])))
    }

    pub fn rational_at(&self, i: usize) -> Result<Rational, ParseError> {
        parse_rational(self.tokens[i])
            .ok_or_else(|| self.err(format!("invalid number `{}`", self.tokens[i])))
    }
}

pub fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some(Line { number: i + 1, tokens })
    })
}

/// Checks the `<MAGIC> <version>` header and returns the remaining lines.
pub fn with_header<'a>(
    text: &'a str,
    magic: &str,
    version: &str,
) -> Result<std::iter::Peekable<impl Iterator<Item = Line<'a>>>, ParseError> {
    let mut it = lines(text).peekable();
    match it.next() {
        Some(line) if line.tokens == [magic, version] => Ok(it),
        Some(line) => Err(line.err(format!("expected header `{magic} {version}`"))),
        None => Err(ParseError::new(1, format!("empty input, expected `{magic} {version}`"))),
    }
}
