//! Plain-text word vector files (GloVe layout): one word followed by its
//! space-separated components per line.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use gaze_core::embeddings::EmbeddingSpace;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: expected {expected} components, found {got}")]
    Dimension {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn load_vectors(path: &Path) -> Result<EmbeddingSpace, VectorError> {
    let f = File::open(path).map_err(|source| VectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_vectors(BufReader::new(f))
}

/// Reads vectors; the dimension is taken from the first line. A repeated
/// word replaces the earlier vector.
pub fn read_vectors<R: BufRead>(reader: R) -> Result<EmbeddingSpace, VectorError> {
    let mut space: Option<EmbeddingSpace> = None;
    let mut row = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| VectorError::Parse {
            line: lineno,
            detail: e.to_string(),
        })?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        row.clear();
        for f in fields {
            let x: f64 = f.parse().map_err(|_| VectorError::Parse {
                line: lineno,
                detail: format!("not a number: {f:?}"),
            })?;
            row.push(x);
        }
        if row.is_empty() {
            return Err(VectorError::Parse {
                line: lineno,
                detail: format!("word {word:?} has no components"),
            });
        }
        let space = match &mut space {
            Some(s) => s,
            None => space.insert(EmbeddingSpace::new(row.len()).expect("non-empty row")),
        };
        if row.len() != space.dim() {
            return Err(VectorError::Dimension {
                line: lineno,
                expected: space.dim(),
                got: row.len(),
            });
        }
        if space.insert(word, &row).expect("dimension checked") {
            log::warn!("line {lineno}: duplicate word {word:?}, keeping the later vector");
        }
    }
    space.ok_or(VectorError::Parse {
        line: 0,
        detail: "no vectors in file".into(),
    })
}

/// Text form of a space's input vectors, in vocabulary order. Components
/// use the shortest representation that parses back to the same value.
pub fn format_vectors(space: &EmbeddingSpace) -> String {
    let mut out = String::new();
    for (i, w) in space.words().iter().enumerate() {
        out.push_str(w);
        for x in space.row(i) {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}
