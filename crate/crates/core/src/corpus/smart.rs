//! Reader for the SMART distribution layout shared by the Adi, Cranfield and
//! Medlars collections: records open with `.I <id>` and are split into
//! sections by single-letter markers (`.T`, `.A`, `.W`, `.B`, `.X`, ...).

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use crate::corpus::tokenize::Tokenizer;
use crate::error::{Error, Result};

pub type DocId = u32;

/// Sections whose text is indexed. Authors, bibliographic data and
/// cross-references are kept but never tokenized.
pub const INDEXED_SECTIONS: [char; 2] = ['T', 'W'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    pub fields: BTreeMap<char, String>,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: DocId) -> Self {
        Document {
            id,
            fields: BTreeMap::new(),
            tokens: Vec::new(),
        }
    }

    /// Title followed by body text.
    pub fn indexable_text(&self) -> String {
        INDEXED_SECTIONS
            .iter()
            .filter_map(|marker| self.fields.get(marker))
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn tokenize(&mut self, tokenizer: &Tokenizer) {
        self.tokens = tokenizer.tokenize(&self.indexable_text());
    }
}

/// Recognise a section marker line: a dot, one ASCII uppercase letter, then
/// end of line or whitespace. Returns the marker and the rest of the line.
fn marker(line: &str) -> Option<(char, &str)> {
    let rest = line.strip_prefix('.')?;
    let mut chars = rest.chars();
    let letter = chars.next().filter(char::is_ascii_uppercase)?;
    let tail = chars.as_str();
    if tail.is_empty() || tail.starts_with(char::is_whitespace) {
        Some((letter, tail.trim()))
    } else {
        None
    }
}

/// Parse a SMART-format stream into documents (or queries, which share the
/// layout). Tokens are left empty; see [`parse_and_tokenize`].
pub fn parse_smart_collection<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs: Vec<Document> = Vec::new();
    let mut seen = HashSet::new();
    let mut section: Option<char> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');

        if let Some((letter, tail)) = marker(line) {
            if letter == 'I' {
                let id: DocId = tail
                    .split_whitespace()
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&id| id > 0)
                    .ok_or_else(|| {
                        Error::parse(line_no, format!("expected a positive record id after .I, got {tail:?}"))
                    })?;
                if !seen.insert(id) {
                    return Err(Error::parse(line_no, format!("duplicate record id {id}")));
                }
                docs.push(Document::new(id));
                section = None;
            } else {
                let doc = docs.last_mut().ok_or_else(|| {
                    Error::parse(line_no, format!("section .{letter} before any .I record"))
                })?;
                section = Some(letter);
                let field = doc.fields.entry(letter).or_default();
                if !tail.is_empty() {
                    push_line(field, tail);
                }
            }
            continue;
        }

        if line.trim().is_empty() {
            continue;
        }
        let doc = docs
            .last_mut()
            .ok_or_else(|| Error::parse(line_no, "content before any .I record"))?;
        // Text directly after `.I` without a marker is treated as body text.
        let field = doc.fields.entry(section.unwrap_or('W')).or_default();
        push_line(field, line);
    }
    Ok(docs)
}

fn push_line(field: &mut String, line: &str) {
    if !field.is_empty() {
        field.push('\n');
    }
    field.push_str(line);
}

pub fn parse_and_tokenize<R: BufRead>(reader: R, tokenizer: &Tokenizer) -> Result<Vec<Document>> {
    let mut docs = parse_smart_collection(reader)?;
    for doc in &mut docs {
        doc.tokenize(tokenizer);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Document>> {
        parse_smart_collection(text.as_bytes())
    }

    #[test]
    fn single_record() {
        let docs = parse(".I 1\n.W\nretrieval of information\n").unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].id, 1);
        assert_eq!(docs[0].indexable_text(), "retrieval of information");

        let mut doc = docs[0].clone();
        doc.tokenize(&Tokenizer::default());
        assert_eq!(doc.tokens, vec!["retriev", "inform"]);
    }

    #[test]
    fn empty_stream() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn sections_and_indexed_text() {
        let text = ".I 7\n.T\nA Title\n.A\nSmith, J.\n.W\nbody line one\nbody line two\n.B\nCACM 1970\n.X\n3 5 7\n.I 8\n.W\nsecond\n";
        let docs = parse(text).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].fields[&'A'], "Smith, J.");
        assert_eq!(docs[0].indexable_text(), "A Title\nbody line one\nbody line two");
        assert_eq!(docs[1].id, 8);
    }

    #[test]
    fn zero_padded_ids_and_crlf() {
        let docs = parse(".I 001\r\n.W\r\nfoo bar\r\n").unwrap();
        assert_eq!(docs[0].id, 1);
        assert_eq!(docs[0].fields[&'W'], "foo bar");
    }

    #[test]
    fn content_before_record_is_an_error() {
        let err = parse("\nstray text\n.I 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse(".W\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let err = parse(".I 3\n.W\na\n.I 3\n.W\nb\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn bad_id() {
        assert!(parse(".I abc\n").is_err());
        assert!(parse(".I 0\n").is_err());
    }

    #[test]
    fn dotted_words_are_not_markers() {
        let docs = parse(".I 1\n.W\n.NET framework\n").unwrap();
        assert_eq!(docs[0].fields[&'W'], ".NET framework");
    }
}
