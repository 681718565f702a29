//! Document metadata from CSV: `doc_id,title,author_gender,narrator,year`.

use std::collections::BTreeMap;
use std::io::Read;

use gaze_core::model::{AuthorGender, DocMetadata, Narrator};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetadataError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row for {doc_id:?}: {detail}")]
    Value { doc_id: String, detail: String },
}

#[derive(Deserialize)]
struct Row {
    doc_id: String,
    title: String,
    author_gender: String,
    narrator: String,
    year: Option<i32>,
}

pub fn read_metadata_csv<R: Read>(reader: R) -> Result<BTreeMap<String, DocMetadata>, MetadataError> {
    let mut out = BTreeMap::new();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for row in rdr.deserialize() {
        let row: Row = row?;
        let author_gender = AuthorGender::parse(&row.author_gender).ok_or_else(|| MetadataError::Value {
            doc_id: row.doc_id.clone(),
            detail: format!("author_gender {:?} is not F, M or U", row.author_gender),
        })?;
        let narrator = Narrator::parse(&row.narrator).ok_or_else(|| MetadataError::Value {
            doc_id: row.doc_id.clone(),
            detail: format!("narrator {:?} is not 1p-F, 1p-M, 3p or multiple", row.narrator),
        })?;
        out.insert(
            row.doc_id,
            DocMetadata {
                title: row.title,
                author_gender,
                narrator,
                year: row.year,
            },
        );
    }
    Ok(out)
}
