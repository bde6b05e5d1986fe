//! word2vec text format: a `count dim` header, then `key v1 ... vD` lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::store::EmbeddingStore;
use crate::error::{Error, Result};

pub fn read_word2vec_text<R: BufRead>(reader: R) -> Result<EmbeddingStore> {
    let mut lines = reader.lines().enumerate();
    let (count, dim) = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io("<embeddings>", e))?;
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(c)), Some(Ok(d)), None) if d > 0 => (c, d),
                _ => {
                    return Err(Error::Format {
                        line: 1,
                        message: format!("expected `count dim` header, got `{line}`"),
                    })
                }
            }
        }
        None => {
            return Err(Error::Format {
                line: 1,
                message: "missing header".into(),
            })
        }
    };

    let mut store = EmbeddingStore::new(dim);
    let mut values = Vec::with_capacity(dim);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<embeddings>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().expect("nonblank line");
        values.clear();
        for p in parts {
            let v: f64 = p.parse().map_err(|_| Error::Format {
                line: lineno,
                message: format!("bad number `{p}`"),
            })?;
            values.push(v);
        }
        if values.len() != dim {
            return Err(Error::Format {
                line: lineno,
                message: format!("`{key}` has {} components, header says {dim}", values.len()),
            });
        }
        if store.contains(key) {
            return Err(Error::Format {
                line: lineno,
                message: format!("duplicate key `{key}`"),
            });
        }
        store
            .insert(key, &values)
            .map_err(|e| Error::Format { line: lineno, message: e.to_string() })?;
    }
    if store.len() != count {
        return Err(Error::Format {
            line: 1,
            message: format!("header declares {count} vectors, file has {}", store.len()),
        });
    }
    Ok(store)
}

/// Writes input vectors with six decimals.
pub fn write_word2vec_text<W: Write>(mut w: W, store: &EmbeddingStore) -> std::io::Result<()> {
    writeln!(w, "{} {}", store.len(), store.dim())?;
    for (key, v) in store.iter() {
        w.write_all(key.as_bytes())?;
        for x in v {
            // avoid "-0.000000"
            let x = if x.abs() < 5e-7 { 0.0 } else { *x };
            write!(w, " {x:.6}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec_text(BufReader::new(file))
}

pub fn save_word2vec_text(path: impl AsRef<Path>, store: &EmbeddingStore) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_word2vec_text(&mut w, store)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
