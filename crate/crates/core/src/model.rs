//! Document and annotation data model.
//!
//! Spans index tokens and are end-exclusive. A document is only ever
//! constructed through [`AnnotatedDocument::new`], which enforces that
//! sentences partition the token range and that every annotation span sits
//! inside a single sentence.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Binary gender label used by both metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Gender::Female => "F",
            Gender::Male => "M",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AuthorGender {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "U")]
    Unknown,
}

impl AuthorGender {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "F" | "f" => Some(AuthorGender::Female),
            "M" | "m" => Some(AuthorGender::Male),
            "U" | "u" | "" => Some(AuthorGender::Unknown),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            AuthorGender::Female => "F",
            AuthorGender::Male => "M",
            AuthorGender::Unknown => "U",
        }
    }
}

/// Narrative perspective of a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Narrator {
    #[serde(rename = "1p-F")]
    FirstPersonFemale,
    #[serde(rename = "1p-M")]
    FirstPersonMale,
    #[serde(rename = "3p")]
    ThirdPerson,
    #[serde(rename = "multiple")]
    Multiple,
}

impl Narrator {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "1p-F" => Some(Narrator::FirstPersonFemale),
            "1p-M" => Some(Narrator::FirstPersonMale),
            "3p" => Some(Narrator::ThirdPerson),
            "multiple" | "Multiple" => Some(Narrator::Multiple),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMetadata {
    pub title: String,
    pub author_gender: AuthorGender,
    pub narrator: Narrator,
    pub year: Option<i32>,
}

impl Default for DocMetadata {
    fn default() -> Self {
        DocMetadata {
            title: String::new(),
            author_gender: AuthorGender::Unknown,
            narrator: Narrator::ThirdPerson,
            year: None,
        }
    }
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(s: Span) -> Self {
        (s.start, s.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub lower: String,
}

/// Semantic role of a frame argument. Anything but agent and patient is
/// collapsed into `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "ARG0")]
    Arg0,
    #[serde(rename = "ARG1")]
    Arg1,
    #[serde(rename = "OTHER")]
    Other,
}

impl Role {
    /// Maps a PropBank-style label onto a role. `ARG2`, `ARGM-LOC`, `R-ARG0`
    /// and friends become `Other`; strings that are not role labels at all
    /// are rejected.
    pub fn from_label(label: &str) -> Option<Role> {
        match label {
            "ARG0" => Some(Role::Arg0),
            "ARG1" => Some(Role::Arg1),
            "OTHER" => Some(Role::Other),
            l if is_propbank_label(l) => Some(Role::Other),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Arg0 => "ARG0",
            Role::Arg1 => "ARG1",
            Role::Other => "OTHER",
        }
    }
}

fn is_propbank_label(l: &str) -> bool {
    let core = l
        .strip_prefix("R-")
        .or_else(|| l.strip_prefix("C-"))
        .unwrap_or(l);
    core.len() > 3 && core.starts_with("ARG")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub span: Span,
    pub label: String,
}

impl EntityMention {
    pub fn is_person(&self) -> bool {
        self.label == "PERSON"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Argument {
    pub span: Span,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub predicate: Span,
    pub args: Vec<Argument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("schema error in document {doc_id:?}: {detail}")]
    Schema { doc_id: String, detail: String },
    #[error("span error in document {doc_id:?}: {what} span {span} {detail}")]
    Span {
        doc_id: String,
        what: &'static str,
        span: Span,
        detail: &'static str,
    },
}

/// Raw material for a document before validation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentParts {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub sentences: Vec<Span>,
    pub entities: Vec<EntityMention>,
    pub coref_chains: Vec<Vec<Span>>,
    pub srl_frames: Vec<Frame>,
    pub metadata: DocMetadata,
}

/// A validated, immutable annotated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    doc_id: String,
    tokens: Vec<Token>,
    sentences: Vec<Span>,
    entities: Vec<EntityMention>,
    coref_chains: Vec<Vec<Span>>,
    srl_frames: Vec<Frame>,
    metadata: DocMetadata,
}

impl AnnotatedDocument {
    pub fn new(parts: DocumentParts) -> Result<Self, DocumentError> {
        let DocumentParts {
            doc_id,
            tokens,
            sentences,
            entities,
            coref_chains,
            srl_frames,
            metadata,
        } = parts;

        if let Some(pos) = tokens.iter().position(|t| t.is_empty()) {
            return Err(DocumentError::Schema {
                doc_id,
                detail: alloc::format!("token {pos} is empty"),
            });
        }
        let n = tokens.len();

        // sentences must tile [0, n) in order
        let mut cursor = 0;
        for s in &sentences {
            if s.is_empty() || s.end > n {
                return Err(span_err(doc_id, "sentence", *s, "is empty or out of range"));
            }
            if s.start != cursor {
                return Err(span_err(doc_id, "sentence", *s, "leaves a gap or overlaps"));
            }
            cursor = s.end;
        }
        if cursor != n {
            let tail = Span::new(cursor, n);
            return Err(span_err(doc_id, "sentence", tail, "is not covered by any sentence"));
        }

        let check = |what: &'static str, span: Span| -> Result<(), DocumentError> {
            if span.is_empty() || span.end > n {
                return Err(span_err(doc_id.clone(), what, span, "is empty or out of range"));
            }
            if sentence_index(&sentences, span.start) != sentence_index(&sentences, span.end - 1) {
                return Err(span_err(doc_id.clone(), what, span, "crosses a sentence boundary"));
            }
            Ok(())
        };
        for e in &entities {
            check("entity", e.span)?;
        }
        for chain in &coref_chains {
            for m in chain {
                check("coref mention", *m)?;
            }
        }
        for f in &srl_frames {
            check("predicate", f.predicate)?;
            for a in &f.args {
                check("argument", a.span)?;
            }
        }

        let tokens = tokens
            .into_iter()
            .enumerate()
            .map(|(index, text)| Token {
                index,
                lower: text.to_lowercase(),
                text,
            })
            .collect();

        Ok(AnnotatedDocument {
            doc_id,
            tokens,
            sentences,
            entities,
            coref_chains,
            srl_frames,
            metadata,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentences(&self) -> &[Span] {
        &self.sentences
    }

    pub fn entities(&self) -> &[EntityMention] {
        &self.entities
    }

    pub fn coref_chains(&self) -> &[Vec<Span>] {
        &self.coref_chains
    }

    pub fn srl_frames(&self) -> &[Frame] {
        &self.srl_frames
    }

    pub fn metadata(&self) -> &DocMetadata {
        &self.metadata
    }

    pub fn with_metadata(mut self, metadata: DocMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Case-folded token strings covered by `span`.
    pub fn lower_words(&self, span: Span) -> impl Iterator<Item = &str> + '_ {
        self.tokens[span.start..span.end].iter().map(|t| t.lower.as_str())
    }

    /// Case-folded surface of `span`, tokens joined by single spaces.
    pub fn surface(&self, span: Span) -> String {
        let mut out = String::new();
        for (i, w) in self.lower_words(span).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(w);
        }
        out
    }

    /// Breaks the document back into its raw parts.
    pub fn to_parts(&self) -> DocumentParts {
        DocumentParts {
            doc_id: self.doc_id.clone(),
            tokens: self.tokens.iter().map(|t| t.text.clone()).collect(),
            sentences: self.sentences.clone(),
            entities: self.entities.clone(),
            coref_chains: self.coref_chains.clone(),
            srl_frames: self.srl_frames.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

fn span_err(doc_id: String, what: &'static str, span: Span, detail: &'static str) -> DocumentError {
    DocumentError::Span {
        doc_id,
        what,
        span,
        detail,
    }
}

fn sentence_index(sentences: &[Span], token: usize) -> usize {
    sentences.partition_point(|s| s.end <= token)
}

impl DocumentError {
    pub fn doc_id(&self) -> &str {
        match self {
            DocumentError::Schema { doc_id, .. } | DocumentError::Span { doc_id, .. } => doc_id,
        }
    }

    pub fn schema(doc_id: &str, detail: impl ToString) -> Self {
        DocumentError::Schema {
            doc_id: doc_id.into(),
            detail: detail.to_string(),
        }
    }
}
