//! Relaxed extraction of flat argument dictionaries from raw model output.
//!
//! Models wrap their answer in prose and code fences, use Python-style single
//! quotes, leave trailing commas and forget to quote values. The grammar here
//! accepts all of that for a single flat `{key: value, ...}` object and records
//! each repair it applied as a warning. Nested objects and arrays are rejected.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::schema::{canonicalize_key, canonicalize_value, ArgumentMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no balanced {{...}} region in model output")]
    NoArgumentObject,
    #[error("malformed arguments ({reason}) in {span:?}")]
    MalformedArguments { span: String, reason: String },
}

impl ParseError {
    /// Stable variant name, as used in fixture `.expected` files.
    pub fn name(&self) -> &'static str {
        match self {
            ParseError::NoArgumentObject => "NoArgumentObject",
            ParseError::MalformedArguments { .. } => "MalformedArguments",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub map: ArgumentMap,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOrder {
    /// Entry order as stored in the map.
    Given,
    /// Lexicographic by key.
    Sorted,
}

pub const WARN_CODE_FENCE: &str = "stripped code fence";
pub const WARN_SURROUNDING_TEXT: &str = "ignored surrounding text";
pub const WARN_SINGLE_QUOTES: &str = "converted single quotes";
pub const WARN_TRAILING_COMMA: &str = "removed trailing comma";
pub const WARN_UNQUOTED_KEY: &str = "quoted bare key";
pub const WARN_UNQUOTED_VALUE: &str = "quoted bare value";
pub const WARN_LITERAL: &str = "stringified literal";

#[derive(Default)]
struct Warnings(Vec<String>);

impl Warnings {
    fn add(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.0.contains(&w) {
            self.0.push(w);
        }
    }
}

fn fence_pattern() -> &'static Regex {
    static FENCE: OnceLock<Regex> = OnceLock::new();
    FENCE.get_or_init(|| Regex::new(r"```[A-Za-z0-9_+-]*").unwrap())
}

pub fn extract_argument_map(raw: &str) -> Result<ParseOutcome, ParseError> {
    let mut warnings = Warnings::default();
    let text = if raw.contains("```") {
        warnings.add(WARN_CODE_FENCE);
        fence_pattern().replace_all(raw, " ").into_owned()
    } else {
        raw.to_string()
    };

    let (start, end) = find_object_region(&text).ok_or(ParseError::NoArgumentObject)?;
    if !text[..start].trim().is_empty() || !text[end..].trim().is_empty() {
        warnings.add(WARN_SURROUNDING_TEXT);
    }
    let region = &text[start..end];
    let entries = RegionParser::new(region, &mut warnings).parse()?;

    let mut map = ArgumentMap::new();
    for (key, value) in entries {
        let malformed = |reason: String| ParseError::MalformedArguments {
            span: region.to_string(),
            reason,
        };
        let key = canonicalize_key(&key).map_err(|_| malformed(format!("invalid key {key:?}")))?;
        let value = canonicalize_value(&value);
        if value.is_empty() {
            warnings.add(format!("dropped empty value for key {key}"));
            continue;
        }
        if map.contains_key(&key) {
            warnings.add(format!("ignored duplicate key {key}"));
            continue;
        }
        map.insert(&key, &value).map_err(|e| malformed(e.to_string()))?;
    }
    Ok(ParseOutcome {
        map,
        warnings: warnings.0,
    })
}

/// Byte range of the first balanced `{...}` region. Each `{` is tried in turn,
/// first with quote-aware matching, then with plain brace counting (for values
/// such as `O'Brien` that open a quote which never closes).
fn find_object_region(text: &str) -> Option<(usize, usize)> {
    for (start, ch) in text.char_indices() {
        if ch != '{' {
            continue;
        }
        if let Some(end) = balanced_end(&text[start..], true).or_else(|| balanced_end(&text[start..], false)) {
            return Some((start, start + end));
        }
    }
    None
}

fn balanced_end(s: &str, quote_aware: bool) -> Option<usize> {
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == q {
                quote = None;
            }
            continue;
        }
        match ch {
            '"' | '\'' if quote_aware => quote = Some(ch),
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

struct RegionParser<'a, 'w> {
    region: &'a str,
    chars: Vec<char>,
    pos: usize,
    warnings: &'w mut Warnings,
}

impl<'a, 'w> RegionParser<'a, 'w> {
    fn new(region: &'a str, warnings: &'w mut Warnings) -> Self {
        RegionParser {
            region,
            chars: region.chars().collect(),
            pos: 0,
            warnings,
        }
    }

    fn fail(&self, reason: impl fmt::Display) -> ParseError {
        ParseError::MalformedArguments {
            span: self.region.to_string(),
            reason: format!("{reason} at char {}", self.pos),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(format!("expected {want:?}")))
        }
    }

    fn parse(mut self) -> Result<Vec<(String, String)>, ParseError> {
        self.expect('{')?;
        let mut entries = Vec::new();
        self.skip_ws();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(entries);
        }
        loop {
            let key = self.parse_key()?;
            self.expect(':')?;
            let value = self.parse_value()?;
            entries.push((key, value));
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    self.skip_ws();
                    if self.peek() == Some('}') {
                        self.warnings.add(WARN_TRAILING_COMMA);
                        self.pos += 1;
                        break;
                    }
                }
                Some('}') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.fail("expected ',' or '}'")),
            }
        }
        Ok(entries)
    }

    fn parse_key(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(q @ ('"' | '\'')) => self.parse_quoted(q),
            Some(_) => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| !matches!(c, ':' | ',' | '{' | '}' | '[' | ']' | '"' | '\''))
                {
                    self.pos += 1;
                }
                let key: String = self.chars[start..self.pos].iter().collect();
                if key.trim().is_empty() {
                    return Err(self.fail("missing key"));
                }
                self.warnings.add(WARN_UNQUOTED_KEY);
                Ok(key.trim().to_string())
            }
            None => Err(self.fail("unexpected end")),
        }
    }

    fn parse_value(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(q @ ('"' | '\'')) => self.parse_quoted(q),
            Some('{' | '[') => Err(self.fail("nested value")),
            Some(_) => {
                let start = self.pos;
                while self.peek().is_some_and(|c| !matches!(c, ',' | '}' | '{' | '[' | ']')) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                let word = word.trim();
                if matches!(self.peek(), Some('{' | '[' | ']')) {
                    return Err(self.fail("unexpected bracket in bare value"));
                }
                if word.is_empty() {
                    return Err(self.fail("missing value"));
                }
                match word {
                    "null" | "None" | "none" | "NULL" => Ok(String::new()),
                    "true" | "false" | "True" | "False" => {
                        self.warnings.add(WARN_LITERAL);
                        Ok(word.to_lowercase())
                    }
                    _ if word.parse::<f64>().is_ok() && !word.contains(char::is_alphabetic) => {
                        self.warnings.add(WARN_LITERAL);
                        Ok(word.to_string())
                    }
                    _ => {
                        self.warnings.add(WARN_UNQUOTED_VALUE);
                        Ok(word.to_string())
                    }
                }
            }
            None => Err(self.fail("unexpected end")),
        }
    }

    fn parse_quoted(&mut self, quote: char) -> Result<String, ParseError> {
        if quote == '\'' {
            self.warnings.add(WARN_SINGLE_QUOTES);
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(ch) = self.peek() else {
                return Err(self.fail("unterminated string"));
            };
            self.pos += 1;
            match ch {
                c if c == quote => return Ok(out),
                '\\' => {
                    let Some(esc) = self.peek() else {
                        return Err(self.fail("unterminated escape"));
                    };
                    self.pos += 1;
                    match esc {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'b' | 'f' => out.push(' '),
                        'u' => out.push(self.parse_unicode_escape()?),
                        '"' | '\'' | '\\' | '/' => out.push(esc),
                        other => {
                            out.push('\\');
                            out.push(other);
                        }
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn parse_unicode_escape(&mut self) -> Result<char, ParseError> {
        let hex4 = |p: &mut Self| -> Result<u32, ParseError> {
            let end = p.pos + 4;
            if end > p.chars.len() {
                return Err(p.fail("short unicode escape"));
            }
            let digits: String = p.chars[p.pos..end].iter().collect();
            p.pos = end;
            u32::from_str_radix(&digits, 16).map_err(|_| p.fail("bad unicode escape"))
        };
        let hi = hex4(self)?;
        if (0xD800..0xDC00).contains(&hi) {
            if self.chars.get(self.pos) == Some(&'\\') && self.chars.get(self.pos + 1) == Some(&'u') {
                self.pos += 2;
                let lo = hex4(self)?;
                let code = 0x10000 + ((hi - 0xD800) << 10) + (lo.wrapping_sub(0xDC00) & 0x3FF);
                return Ok(char::from_u32(code).unwrap_or(char::REPLACEMENT_CHARACTER));
            }
            return Ok(char::REPLACEMENT_CHARACTER);
        }
        Ok(char::from_u32(hi).unwrap_or(char::REPLACEMENT_CHARACTER))
    }
}

/// Renders `{"k1": "v1", "k2": "v2"}` with JSON string escaping.
pub fn serialize_argument_map(map: &ArgumentMap, order: KeyOrder) -> String {
    let mut entries: Vec<(&str, &str)> = map.iter().collect();
    if order == KeyOrder::Sorted {
        entries.sort_by(|a, b| a.0.cmp(b.0));
    }
    let body: Vec<String> = entries
        .iter()
        .map(|(k, v)| format!("{}: {}", json_string(k), json_string(v)))
        .collect();
    format!("{{{}}}", body.join(", "))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}
