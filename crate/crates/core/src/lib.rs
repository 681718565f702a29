//! Measurement core for female objectification in narrative text.
//!
//! Two per-document metrics are computed from token-indexed annotations:
//!
//! - **agency bias**: male agentivity divided by female agentivity, minus one,
//!   where agentivity is the share of a gender's semantic-role arguments that
//!   are agents;
//! - **appearance bias**: the change in a WEAT score (female vs. male words
//!   against appearance words) after fine-tuning word vectors on the text with
//!   CBOW and negative sampling.
//!
//! Per-document results are aggregated across a corpus with one-sample
//! t-tests. Everything here is pure computation over in-memory values; file
//! formats, the annotation interchange JSON and the command line live in the
//! `gaze` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agency;
pub mod boilerplate;
pub mod embeddings;
pub mod ledger;
pub mod lexicon;
pub mod model;
pub mod stats;
pub mod toy;
pub mod weat;

pub use agency::{agency_bias, extract_gendered_arguments, AgencyResult, GenderedArgument};
pub use embeddings::{EmbeddingSpace, FinetuneConfig};
pub use ledger::{build_ledger, GenderLedger, GenderedEntity};
pub use model::{
    AnnotatedDocument, AuthorGender, DocMetadata, Gender, Narrator, Role, Span, Token,
};
pub use stats::{BiasReport, CorpusSummary};
pub use weat::{WeatReport, WordSets};
