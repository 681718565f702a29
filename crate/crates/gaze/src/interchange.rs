//! Annotation interchange JSON, one document per file.
//!
//! ```json
//! { "doc_id": "...", "tokens": ["..."], "sentences": [[0, 7]],
//!   "entities": [{"span": [0, 1], "label": "PERSON"}],
//!   "coref_chains": [[[0, 1], [7, 8]]],
//!   "srl_frames": [{"predicate": [1, 2], "args": [{"span": [0, 1], "role": "ARG0"}]}],
//!   "metadata": {"title": "...", "author_gender": "F", "narrator": "3p", "year": 1862} }
//! ```

use gaze_core::model::{
    AnnotatedDocument, Argument, AuthorGender, DocMetadata, DocumentError, DocumentParts,
    EntityMention, Frame, Narrator, Role, Span,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDocument {
    doc_id: String,
    tokens: Vec<String>,
    sentences: Vec<Span>,
    entities: Vec<WireEntity>,
    coref_chains: Vec<Vec<Span>>,
    srl_frames: Vec<WireFrame>,
    metadata: WireMetadata,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEntity {
    span: Span,
    label: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFrame {
    predicate: Span,
    args: Vec<WireArg>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireArg {
    span: Span,
    role: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireMetadata {
    title: String,
    author_gender: AuthorGender,
    narrator: Narrator,
    year: Option<i32>,
}

/// Parses and validates one interchange document.
pub fn parse_annotation_document(bytes: &[u8]) -> Result<AnnotatedDocument, DocumentError> {
    let wire: WireDocument = serde_json::from_slice(bytes).map_err(|e| {
        // best effort: recover the id for the error report
        let doc_id = serde_json::from_slice::<serde_json::Value>(bytes)
            .ok()
            .and_then(|v| v.get("doc_id").and_then(|d| d.as_str()).map(String::from))
            .unwrap_or_default();
        DocumentError::schema(&doc_id, e)
    })?;

    let mut srl_frames = Vec::with_capacity(wire.srl_frames.len());
    for f in wire.srl_frames {
        let mut args = Vec::with_capacity(f.args.len());
        for a in f.args {
            let role = Role::from_label(&a.role).ok_or_else(|| {
                DocumentError::schema(&wire.doc_id, format!("bad role string {:?}", a.role))
            })?;
            args.push(Argument { span: a.span, role });
        }
        srl_frames.push(Frame {
            predicate: f.predicate,
            args,
        });
    }

    AnnotatedDocument::new(DocumentParts {
        doc_id: wire.doc_id,
        tokens: wire.tokens,
        sentences: wire.sentences,
        entities: wire
            .entities
            .into_iter()
            .map(|e| EntityMention {
                span: e.span,
                label: e.label,
            })
            .collect(),
        coref_chains: wire.coref_chains,
        srl_frames,
        metadata: DocMetadata {
            title: wire.metadata.title,
            author_gender: wire.metadata.author_gender,
            narrator: wire.metadata.narrator,
            year: wire.metadata.year,
        },
    })
}

/// Serializes a document back to interchange JSON.
pub fn to_json(doc: &AnnotatedDocument) -> String {
    let p = doc.to_parts();
    let wire = WireDocument {
        doc_id: p.doc_id,
        tokens: p.tokens,
        sentences: p.sentences,
        entities: p
            .entities
            .into_iter()
            .map(|e| WireEntity {
                span: e.span,
                label: e.label,
            })
            .collect(),
        coref_chains: p.coref_chains,
        srl_frames: p
            .srl_frames
            .into_iter()
            .map(|f| WireFrame {
                predicate: f.predicate,
                args: f
                    .args
                    .into_iter()
                    .map(|a| WireArg {
                        span: a.span,
                        role: a.role.label().into(),
                    })
                    .collect(),
            })
            .collect(),
        metadata: WireMetadata {
            title: p.metadata.title,
            author_gender: p.metadata.author_gender,
            narrator: p.metadata.narrator,
            year: p.metadata.year,
        },
    };
    crate::canonical::to_canonical_json(&wire)
}
