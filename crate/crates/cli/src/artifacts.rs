use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxovec::corpus::{read_records, DocumentRecord};
use taxovec::{CentroidModel, Error, Result, Taxonomy, TfIdfModel};

pub const TAXONOMY_FILE: &str = "taxonomy.txt";
pub const TFIDF_FILE: &str = "tfidf.json";
pub const CENTROIDS_FILE: &str = "centroids.jsonl";
pub const VECTORS_FILE: &str = "vectors.txt";

/// The output of `build`: taxonomy, tf-idf statistics and centroids.
pub struct Models {
    pub taxonomy: Taxonomy,
    pub tfidf: TfIdfModel,
    pub centroids: CentroidModel,
}

impl Models {
    pub fn load(dir: &Path) -> Result<Self> {
        let taxonomy = Taxonomy::load(dir.join(TAXONOMY_FILE))?;
        let tfidf = TfIdfModel::load(dir.join(TFIDF_FILE))?;
        let centroids = CentroidModel::load(dir.join(CENTROIDS_FILE), &taxonomy, tfidf.vocab())?;
        Ok(Models {
            taxonomy,
            tfidf,
            centroids,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join(TAXONOMY_FILE), self.taxonomy.to_text().as_bytes())?;
        self.tfidf.save(dir.join(TFIDF_FILE))?;
        self.centroids.save(dir.join(CENTROIDS_FILE), self.tfidf.vocab())
    }
}

pub fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source: e,
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Opens `path`, or standard input for `-`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn read_document_records(path: &Path) -> Result<Vec<DocumentRecord>> {
    read_records(open_input(path)?)
}

/// A gold label or a single prediction.
#[derive(Deserialize)]
struct Labeled {
    id: String,
    label: Option<String>,
}

/// Reads `{"id", "label"}` lines; extra fields such as `text` are ignored.
/// Lines without a label are skipped.
pub fn read_gold(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (line, rec) in json_lines::<Labeled>(path)? {
        if let Some(label) = rec.label {
            if out.insert(rec.id.clone(), label).is_some() {
                return Err(parse_error(line, format!("duplicate document id `{}`", rec.id)));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub category: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingLine {
    pub id: String,
    pub ranking: Vec<Scored>,
}

/// Reads rankings as written by `classify`. Header lines are skipped and a
/// plain `{"id", "label"}` line counts as a ranking of length one.
pub fn read_rankings(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for (line, value) in json_lines::<serde_json::Value>(path)? {
        if value.get("id").is_none() {
            if value.get("measure").is_some() {
                continue;
            }
            return Err(parse_error(line, "expected a ranking or a header".into()));
        }
        let ranking = if value.get("ranking").is_some() {
            let r: RankingLine = serde_json::from_value(value).map_err(|e| parse_error(line, e.to_string()))?;
            (r.id, r.ranking.into_iter().map(|s| s.category).collect())
        } else {
            let r: Labeled = serde_json::from_value(value).map_err(|e| parse_error(line, e.to_string()))?;
            (r.id, r.label.into_iter().collect())
        };
        if out.insert(ranking.0.clone(), ranking.1).is_some() {
            return Err(parse_error(line, format!("duplicate document id `{}`", ranking.0)));
        }
    }
    Ok(out)
}

fn json_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut text = String::new();
    open_input(path)?.read_to_string(&mut text).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line).map_err(|e| parse_error(i + 1, e.to_string()))?;
        out.push((i + 1, v));
    }
    Ok(out)
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

pub fn store_path(dir: &Path) -> PathBuf {
    dir.join(VECTORS_FILE)
}
