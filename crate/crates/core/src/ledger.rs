//! Gendered entity extraction.
//!
//! PERSON mentions are grouped by case-folded surface. Groups with enough
//! mentions are labelled by the honorific heuristic (a gendered title right
//! before a mention) and, when that is silent or split, by a majority vote
//! over gendered third-person pronouns in coreference chains touching the
//! entity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lexicon;
use crate::model::{AnnotatedDocument, Gender, Span};

pub const DEFAULT_MIN_MENTIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerConfig {
    pub min_mentions: usize,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            min_mentions: DEFAULT_MIN_MENTIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Honorific,
    Coref,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Tie,
    NoEvidence,
    BelowThreshold,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderCounts {
    pub female: usize,
    pub male: usize,
}

impl GenderCounts {
    pub fn add(&mut self, g: Gender) {
        match g {
            Gender::Female => self.female += 1,
            Gender::Male => self.male += 1,
        }
    }

    pub fn get(&self, g: Gender) -> usize {
        match g {
            Gender::Female => self.female,
            Gender::Male => self.male,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.female == 0 && self.male == 0
    }

    /// The strictly larger side, if any.
    pub fn majority(&self) -> Option<Gender> {
        use core::cmp::Ordering::*;
        match self.female.cmp(&self.male) {
            Greater => Some(Gender::Female),
            Less => Some(Gender::Male),
            Equal => None,
        }
    }

    pub fn swapped(self) -> Self {
        GenderCounts {
            female: self.male,
            male: self.female,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedEntity {
    pub surface: String,
    pub gender: Gender,
    pub method: Method,
    pub mention_spans: Vec<Span>,
    pub honorific_counts: GenderCounts,
    pub pronoun_counts: GenderCounts,
    pub is_surname: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub surface: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderLedger {
    pub doc_id: String,
    pub entities: Vec<GenderedEntity>,
    pub excluded: Vec<Excluded>,
    /// For every case-folded token seen right after a gendered honorific
    /// anywhere in the document, how often each gender's title preceded it.
    pub honorific_observations: BTreeMap<String, GenderCounts>,
}

impl GenderLedger {
    pub fn entity(&self, surface: &str) -> Option<&GenderedEntity> {
        self.entities
            .binary_search_by(|e| e.surface.as_str().cmp(surface))
            .ok()
            .map(|i| &self.entities[i])
    }

    pub fn is_surname(&self, surface: &str) -> bool {
        self.entity(surface).is_some_and(|e| e.is_surname)
    }

    /// Distinct case-folded tokens of gendered entity surfaces, honorific
    /// titles left out.
    pub fn entity_tokens(&self) -> BTreeSet<String> {
        self.entities
            .iter()
            .flat_map(|e| e.surface.split(' '))
            .filter(|w| !lexicon::is_honorific(w))
            .map(String::from)
            .collect()
    }
}

/// PERSON mention groups keyed by case-folded surface, split into those
/// meeting `min_mentions` and those below it.
pub fn group_person_mentions(
    doc: &AnnotatedDocument,
    min_mentions: usize,
) -> (Vec<(String, Vec<Span>)>, Vec<(String, Vec<Span>)>) {
    let mut groups: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    for e in doc.entities().iter().filter(|e| e.is_person()) {
        groups.entry(doc.surface(e.span)).or_default().push(e.span);
    }
    groups
        .into_iter()
        .map(|(s, mut spans)| {
            spans.sort();
            spans.dedup();
            (s, spans)
        })
        .partition(|(_, spans)| spans.len() >= min_mentions.max(1))
}

/// PERSON entities with at least three mentions.
pub fn extract_person_entities(doc: &AnnotatedDocument) -> Vec<(String, Vec<Span>)> {
    group_person_mentions(doc, DEFAULT_MIN_MENTIONS).0
}

/// Counts mentions introduced by a female or male honorific, either as the
/// token right before the mention or as the mention's own first token.
pub fn honorific_gender(spans: &[Span], doc: &AnnotatedDocument) -> GenderCounts {
    let tokens = doc.tokens();
    let mut counts = GenderCounts::default();
    for s in spans {
        let before = s
            .start
            .checked_sub(1)
            .and_then(|i| lexicon::honorific_gender(&tokens[i].text));
        let inside = if s.len() >= 2 {
            lexicon::honorific_gender(&tokens[s.start].text)
        } else {
            None
        };
        if let Some(g) = before.or(inside) {
            counts.add(g);
        }
    }
    counts
}

/// Counts she/her/herself versus he/him/himself over every coreference
/// chain that contains at least one of the entity's mentions.
pub fn coref_gender(spans: &[Span], doc: &AnnotatedDocument) -> GenderCounts {
    let mut counts = GenderCounts::default();
    for chain in doc.coref_chains() {
        if !chain.iter().any(|m| spans.contains(m)) {
            continue;
        }
        for m in chain.iter().filter(|m| m.len() == 1) {
            if let Some(g) = lexicon::pronoun_gender(&doc.tokens()[m.start].lower) {
                counts.add(g);
            }
        }
    }
    counts
}

fn honorific_observations(doc: &AnnotatedDocument) -> BTreeMap<String, GenderCounts> {
    let mut out: BTreeMap<String, GenderCounts> = BTreeMap::new();
    for w in doc.tokens().windows(2) {
        if lexicon::is_honorific(&w[1].text) {
            continue;
        }
        if let Some(g) = lexicon::honorific_gender(&w[0].text) {
            out.entry(w[1].lower.clone()).or_default().add(g);
        }
    }
    out
}

pub fn build_ledger(doc: &AnnotatedDocument) -> GenderLedger {
    build_ledger_with(doc, &LedgerConfig::default())
}

pub fn build_ledger_with(doc: &AnnotatedDocument, cfg: &LedgerConfig) -> GenderLedger {
    let (kept, below) = group_person_mentions(doc, cfg.min_mentions);
    let mut entities = Vec::new();
    let mut excluded: Vec<Excluded> = below
        .into_iter()
        .map(|(surface, _)| Excluded {
            surface,
            reason: ExclusionReason::BelowThreshold,
        })
        .collect();

    for (surface, spans) in kept {
        let honorific = honorific_gender(&spans, doc);
        let pronouns = coref_gender(&spans, doc);
        let (gender, method) = if let Some(g) = honorific.majority() {
            (g, Method::Honorific)
        } else if let Some(g) = pronouns.majority() {
            (g, Method::Coref)
        } else {
            let reason = if pronouns.is_zero() && honorific.is_zero() {
                ExclusionReason::NoEvidence
            } else {
                ExclusionReason::Tie
            };
            excluded.push(Excluded { surface, reason });
            continue;
        };
        entities.push(GenderedEntity {
            surface,
            gender,
            method,
            mention_spans: spans,
            honorific_counts: honorific,
            pronoun_counts: pronouns,
            is_surname: method == Method::Honorific,
        });
    }
    excluded.sort_by(|a, b| a.surface.cmp(&b.surface));

    GenderLedger {
        doc_id: doc.doc_id().into(),
        entities,
        excluded,
        honorific_observations: honorific_observations(doc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DocumentParts, EntityMention};
    use alloc::string::ToString;
    use alloc::vec;

    /// One sentence per whitespace-separated text; `persons` are token
    /// indices tagged PERSON, `chains` are lists of single-token mentions.
    fn doc(text: &str, persons: &[usize], chains: &[&[usize]]) -> AnnotatedDocument {
        let tokens: Vec<String> = text.split_whitespace().map(|s| s.to_string()).collect();
        let n = tokens.len();
        AnnotatedDocument::new(DocumentParts {
            doc_id: "d".into(),
            tokens,
            sentences: vec![Span::new(0, n)],
            entities: persons
                .iter()
                .map(|&i| EntityMention {
                    span: Span::new(i, i + 1),
                    label: "PERSON".into(),
                })
                .collect(),
            coref_chains: chains
                .iter()
                .map(|c| c.iter().map(|&i| Span::new(i, i + 1)).collect())
                .collect(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn threshold_and_case_folding() {
        let d = doc("Alice Alice Alice Bob Bob", &[0, 1, 2, 3, 4], &[]);
        let got = extract_person_entities(&d);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, "alice");
        assert_eq!(got[0].1.len(), 3);

        let d = doc("Alice alice Alice", &[0, 1, 2], &[]);
        let got = extract_person_entities(&d);
        assert_eq!(got, vec![("alice".to_string(), vec![Span::new(0, 1), Span::new(1, 2), Span::new(2, 3)])]);

        let d = doc("nobody here", &[], &[]);
        assert!(extract_person_entities(&d).is_empty());
    }

    #[test]
    fn honorific_counts() {
        let d = doc("Mr. Darcy came . Mr. Darcy left . Darcy", &[1, 5, 8], &[]);
        let (ents, _) = group_person_mentions(&d, 3);
        let c = honorific_gender(&ents[0].1, &d);
        assert_eq!((c.female, c.male), (0, 2));
        let l = build_ledger(&d);
        assert!(l.entities[0].is_surname);
        assert_eq!(l.entities[0].gender, Gender::Male);
        assert_eq!(l.entities[0].method, Method::Honorific);

        let d = doc("Jane Jane Jane", &[0, 1, 2], &[]);
        assert!(honorific_gender(&[Span::new(0, 1)], &d).is_zero());
    }

    #[test]
    fn mixed_honorifics_fall_through_to_coref() {
        // Mrs. Smith / Mr. Smith, then five female pronouns in one chain.
        let d = doc(
            "Mrs. Smith Mr. Smith Smith she her she herself she",
            &[1, 3, 4],
            &[&[1, 5, 6, 7, 8, 9]],
        );
        let l = build_ledger(&d);
        let e = &l.entities[0];
        assert_eq!((e.honorific_counts.female, e.honorific_counts.male), (1, 1));
        assert_eq!((e.pronoun_counts.female, e.pronoun_counts.male), (5, 0));
        assert_eq!(e.gender, Gender::Female);
        assert_eq!(e.method, Method::Coref);
        assert!(!e.is_surname);
    }

    #[test]
    fn coref_counts() {
        let d = doc("Alice she her Alice Alice", &[0, 3, 4], &[&[0, 1, 2]]);
        let c = coref_gender(&[Span::new(0, 1)], &d);
        assert_eq!((c.female, c.male), (2, 0));

        let d = doc("Pat he Pat she Pat", &[0, 2, 4], &[&[0, 1], &[2, 3]]);
        let spans = [Span::new(0, 1), Span::new(2, 3), Span::new(4, 5)];
        let c = coref_gender(&spans, &d);
        assert_eq!((c.female, c.male), (1, 1));
        let l = build_ledger(&d);
        assert!(l.entities.is_empty());
        assert_eq!(l.excluded[0].reason, ExclusionReason::Tie);

        let c = coref_gender(&[Span::new(4, 5)], &d);
        assert!(c.is_zero());
    }

    #[test]
    fn possessive_his_is_not_counted() {
        let d = doc("Tom his his his Tom Tom", &[0, 4, 5], &[&[0, 1, 2, 3]]);
        let l = build_ledger(&d);
        assert_eq!(l.excluded[0].reason, ExclusionReason::NoEvidence);
    }

    #[test]
    fn ungendered_entities_all_excluded() {
        let d = doc("Kim Kim Kim Lee Lee Lee Jo", &[0, 1, 2, 3, 4, 5, 6], &[]);
        let l = build_ledger(&d);
        assert!(l.entities.is_empty());
        let reasons: Vec<_> = l.excluded.iter().map(|e| (e.surface.as_str(), e.reason)).collect();
        assert_eq!(
            reasons,
            vec![
                ("jo", ExclusionReason::BelowThreshold),
                ("kim", ExclusionReason::NoEvidence),
                ("lee", ExclusionReason::NoEvidence)
            ]
        );
    }

    #[test]
    fn observations_record_tokens_after_titles() {
        let d = doc("Mr. Bennet and Mrs. Bennet met Mr. Darcy", &[], &[]);
        let l = build_ledger(&d);
        assert_eq!(l.honorific_observations["bennet"], GenderCounts { female: 1, male: 1 });
        assert_eq!(l.honorific_observations["darcy"], GenderCounts { female: 0, male: 1 });
    }
}
