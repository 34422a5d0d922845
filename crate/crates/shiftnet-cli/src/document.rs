//! Line-oriented spec documents: `key: value` fields and nested
//! `begin` / `end` blocks. Lines starting with `#` are comments.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Field { key: String, value: String },
    Block(Document),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub entries: Vec<Entry>,
}

impl Document {
    pub fn field(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push(Entry::Field {
            key: key.to_string(),
            value: value.into(),
        });
        self
    }

    pub fn block(&mut self, doc: Document) -> &mut Self {
        self.entries.push(Entry::Block(doc));
        self
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    /// Every value stored under `key`, in order.
    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.fields().filter(move |(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn fields(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Field { key, value } => Some((key.as_str(), value.as_str())),
            Entry::Block(_) => None,
        })
    }

    fn write_to(&self, out: &mut String) {
        for e in &self.entries {
            match e {
                Entry::Field { key, value } if value.is_empty() => {
                    out.push_str(key);
                    out.push_str(":\n");
                }
                Entry::Field { key, value } => {
                    out.push_str(key);
                    out.push_str(": ");
                    out.push_str(value);
                    out.push('\n');
                }
                Entry::Block(inner) => {
                    out.push_str("begin\n");
                    inner.write_to(out);
                    out.push_str("end\n");
                }
            }
        }
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

pub fn is_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && k != "begin"
        && k != "end"
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut stack: Vec<Document> = vec![Document::default()];
    let mut opened: Vec<usize> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        let column = raw.len() - raw.trim_start().len() + 1;
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed {
            "begin" => {
                stack.push(Document::default());
                opened.push(line);
            }
            "end" => {
                if opened.pop().is_none() {
                    return Err(ParseError {
                        line,
                        column,
                        message: "`end` without `begin`".into(),
                    });
                }
                let inner = stack.pop().expect("block open");
                stack.last_mut().expect("outer document").block(inner);
            }
            _ => {
                let Some((key, value)) = trimmed.split_once(':') else {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("expected `key: value`, found `{trimmed}`"),
                    });
                };
                let key = key.trim_end();
                if !is_key(key) {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("invalid key `{key}`"),
                    });
                }
                stack.last_mut().expect("document").field(key, value.trim());
            }
        }
    }
    if let Some(line) = opened.pop() {
        return Err(ParseError {
            line,
            column: 1,
            message: "`begin` without `end`".into(),
        });
    }
    Ok(stack.pop().expect("root document"))
}

pub fn render_document(doc: &Document) -> String {
    doc.to_string()
}
