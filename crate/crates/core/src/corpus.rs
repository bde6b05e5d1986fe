//! Labeled documents and the tokenizer.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{CategoryId, Taxonomy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Tokens with fewer characters than this are dropped.
    pub min_len: usize,
    pub stopwords: Vec<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_len: 2,
            stopwords: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Tokenizer {
    config: TokenizerConfig,
    stopwords: HashSet<String>,
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> Self {
        let stopwords = config
            .stopwords
            .iter()
            .map(|w| if config.lowercase { w.to_lowercase() } else { w.clone() })
            .collect();
        Tokenizer { config, stopwords }
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= self.config.min_len.max(1))
            .map(|t| {
                if self.config.lowercase {
                    t.to_lowercase()
                } else {
                    t.to_string()
                }
            })
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

/// Tokenizes with the default configuration.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub label: Option<CategoryId>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, tokenizer: &Tokenizer) -> Self {
        let text = text.into();
        Document {
            id: id.into(),
            tokens: tokenizer.tokenize(&text),
            text,
            label: None,
        }
    }

    pub fn with_label(mut self, label: CategoryId) -> Self {
        self.label = Some(label);
        self
    }
}

/// One line of a documents file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadReport {
    pub accepted: usize,
    /// `(document id, label)` of records whose label is not in the taxonomy.
    pub rejected: Vec<(String, String)>,
    /// Ids of accepted documents that produced no tokens.
    pub empty: Vec<String>,
}

impl LoadReport {
    pub fn summary(&self) -> String {
        format!(
            "accepted {} documents, rejected {} (unknown label), {} empty",
            self.accepted,
            self.rejected.len(),
            self.empty.len()
        )
    }
}

/// Resolves records against the taxonomy. Records whose label does not name
/// a category are dropped and listed in the report.
pub fn resolve_documents<I>(
    records: I,
    taxonomy: &Taxonomy,
    tokenizer: &Tokenizer,
) -> (Vec<Document>, LoadReport)
where
    I: IntoIterator<Item = DocumentRecord>,
{
    let mut report = LoadReport::default();
    let mut docs = Vec::new();
    for rec in records {
        let label = match &rec.label {
            None => None,
            Some(path) => match taxonomy.id_of(path) {
                Some(id) => Some(id),
                None => {
                    report.rejected.push((rec.id, path.clone()));
                    continue;
                }
            },
        };
        let mut doc = Document::new(rec.id, rec.text, tokenizer);
        doc.label = label;
        if doc.tokens.is_empty() {
            report.empty.push(doc.id.clone());
        }
        report.accepted += 1;
        docs.push(doc);
    }
    (docs, report)
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<DocumentRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DocumentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_documents(
    path: impl AsRef<Path>,
    taxonomy: &Taxonomy,
    tokenizer: &Tokenizer,
) -> Result<(Vec<Document>, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = read_records(BufReader::new(file))?;
    Ok(resolve_documents(records, taxonomy, tokenizer))
}

pub fn write_documents<W: Write>(mut w: W, docs: &[Document], taxonomy: &Taxonomy) -> Result<()> {
    for doc in docs {
        let rec = DocumentRecord {
            id: doc.id.clone(),
            text: doc.text.clone(),
            label: doc.label.map(|l| taxonomy.path(l).to_string()),
        };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w).map_err(|e| Error::io("<documents>", e))?;
    }
    Ok(())
}

/// Reads a plain-text training corpus: one sentence per line.
pub fn read_sentences(path: impl AsRef<Path>, tokenizer: &Tokenizer) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let tokens = tokenizer.tokenize(&line);
        if !tokens.is_empty() {
            out.push(tokens);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Trump became prez"), ["trump", "became", "prez"]);
        assert!(tokenize("").is_empty());
        // "US-President, 2017!" splits into US / President / 2017, all >= 2 chars.
        assert_eq!(tokenize("US-President, 2017!"), ["us", "president", "2017"]);
        assert_eq!(tokenize("a I x-y 42"), ["42"]);
    }

    #[test]
    fn stopwords_are_optional() {
        let tok = Tokenizer::new(TokenizerConfig {
            stopwords: vec!["The".into()],
            ..Default::default()
        });
        assert_eq!(tok.tokenize("the cat"), ["cat"]);
        assert_eq!(tokenize("the cat"), ["the", "cat"]);
    }

    #[test]
    fn resolve_reports_bad_labels_and_empty_text() {
        let tax = Taxonomy::parse("Top\nTop/Society\nTop/Society/Government\nTop/Society/Government/President").unwrap();
        let recs = vec![
            DocumentRecord {
                id: "d1".into(),
                text: "Trump became prez".into(),
                label: Some("Top/Society/Government/President".into()),
            },
            DocumentRecord {
                id: "d2".into(),
                text: "nothing".into(),
                label: Some("Top/Nonexistent".into()),
            },
            DocumentRecord {
                id: "d3".into(),
                text: "".into(),
                label: None,
            },
        ];
        let (docs, report) = resolve_documents(recs, &tax, &Tokenizer::default());
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].tokens.len(), 3);
        assert_eq!(docs[0].label, tax.id_of("Top/Society/Government/President"));
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected, vec![("d2".to_string(), "Top/Nonexistent".to_string())]);
        assert_eq!(report.empty, vec!["d3".to_string()]);
    }

    #[test]
    fn malformed_record_reports_line() {
        let input = "{\"id\":\"a\",\"text\":\"x\"}\n\n{\"id\": 3}\n";
        match read_records(input.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
