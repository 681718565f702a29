//! Gendered argument extraction and agency bias.
//!
//! An ARG0/ARG1 span is a gendered argument when one of four conditions
//! holds, tried in order:
//!
//! - (a) the span is exactly a gendered entity from the ledger;
//! - (b) the span is exactly a common gendered word;
//! - (c) its last word is an (a)/(b) word and every (a)/(b) word in it
//!   carries the same gender;
//! - (d) it contains at least one (a)/(b) word, its last word is a surname
//!   found by the honorific heuristic, and the (a)/(b) words agree.
//!
//! At word level, surnames do not count as (a) words. Their gender is
//! decided by the title or noun that comes with them ("Mrs. Darcy" is
//! female even when the ledger's `darcy` is male), which is what (d) is for.
//!
//! Arguments are counted per distinct span: a span that is ARG0 in one frame
//! and ARG1 in another is one argument, and it is an agent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::GenderLedger;
use crate::lexicon;
use crate::model::{AnnotatedDocument, Gender, Role, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "a")]
    EntityMatch,
    #[serde(rename = "b")]
    CommonMatch,
    #[serde(rename = "c")]
    LastWord,
    #[serde(rename = "d")]
    Surname,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolesSeen {
    pub arg0: bool,
    pub arg1: bool,
}

impl RolesSeen {
    fn add(&mut self, role: Role) {
        match role {
            Role::Arg0 => self.arg0 = true,
            Role::Arg1 => self.arg1 = true,
            Role::Other => {}
        }
    }

    pub fn is_agent(&self) -> bool {
        self.arg0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedArgument {
    pub span: Span,
    pub gender: Gender,
    pub matched_by: Condition,
    pub roles_seen: RolesSeen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedBias {
    #[error("no female arguments")]
    NoFemaleArguments,
    #[error("no male arguments")]
    NoMaleArguments,
    #[error("female agentivity is zero")]
    ZeroFemaleAgentivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgencyResult {
    pub female_agents: usize,
    pub female_arguments: usize,
    pub male_agents: usize,
    pub male_arguments: usize,
    pub female_agentivity: Option<f64>,
    pub male_agentivity: Option<f64>,
    pub agency_bias: Result<f64, UndefinedBias>,
}

impl AgencyResult {
    pub fn bias(&self) -> Option<f64> {
        self.agency_bias.ok()
    }
}

/// Word-level gender evidence for conditions (c) and (d).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum WordEvidence {
    None,
    Gendered(Gender),
    Conflicting,
}

struct Classifier<'a> {
    doc: &'a AnnotatedDocument,
    ledger: &'a GenderLedger,
}

impl Classifier<'_> {
    fn word_evidence(&self, lower: &str) -> WordEvidence {
        let entity = self
            .ledger
            .entity(lower)
            .filter(|e| !e.is_surname)
            .map(|e| e.gender);
        match (entity, lexicon::common_entity_gender(lower)) {
            (None, None) => WordEvidence::None,
            (Some(g), None) | (None, Some(g)) => WordEvidence::Gendered(g),
            (Some(a), Some(b)) if a == b => WordEvidence::Gendered(a),
            _ => WordEvidence::Conflicting,
        }
    }

    fn classify(&self, span: Span) -> Option<(Gender, Condition)> {
        let surface = self.doc.surface(span);
        if let Some(e) = self.ledger.entity(&surface) {
            return Some((e.gender, Condition::EntityMatch));
        }
        if let Some(g) = lexicon::common_entity_gender(&surface) {
            return Some((g, Condition::CommonMatch));
        }
        if span.len() < 2 {
            return None;
        }

        let words: Vec<&str> = self.doc.lower_words(span).collect();
        let mut agreed: Option<Gender> = None;
        for w in &words {
            match self.word_evidence(w) {
                WordEvidence::None => {}
                WordEvidence::Conflicting => return None,
                WordEvidence::Gendered(g) => match agreed {
                    None => agreed = Some(g),
                    Some(prev) if prev != g => return None,
                    Some(_) => {}
                },
            }
        }
        let gender = agreed?;
        let last = words[words.len() - 1];
        if let WordEvidence::Gendered(_) = self.word_evidence(last) {
            return Some((gender, Condition::LastWord));
        }
        if self.ledger.is_surname(last) {
            return Some((gender, Condition::Surname));
        }
        None
    }
}

/// Classifies one argument span, returning its gender and the first
/// condition that holds.
pub fn classify_argument_span(
    span: Span,
    doc: &AnnotatedDocument,
    ledger: &GenderLedger,
) -> Option<(Gender, Condition)> {
    Classifier { doc, ledger }.classify(span)
}

pub fn extract_gendered_arguments(
    doc: &AnnotatedDocument,
    ledger: &GenderLedger,
) -> Vec<GenderedArgument> {
    let mut roles: BTreeMap<Span, RolesSeen> = BTreeMap::new();
    for frame in doc.srl_frames() {
        for arg in frame.args.iter().filter(|a| a.role != Role::Other) {
            roles.entry(arg.span).or_default().add(arg.role);
        }
    }
    let classifier = Classifier { doc, ledger };
    roles
        .into_iter()
        .filter_map(|(span, roles_seen)| {
            let (gender, matched_by) = classifier.classify(span)?;
            Some(GenderedArgument {
                span,
                gender,
                matched_by,
                roles_seen,
            })
        })
        .collect()
}

pub fn agency_bias(args: &[GenderedArgument]) -> AgencyResult {
    let count = |g: Gender| {
        let of_gender = args.iter().filter(|a| a.gender == g);
        let total = of_gender.clone().count();
        let agents = of_gender.filter(|a| a.roles_seen.is_agent()).count();
        (agents, total)
    };
    let (female_agents, female_arguments) = count(Gender::Female);
    let (male_agents, male_arguments) = count(Gender::Male);
    agency_from_counts(female_agents, female_arguments, male_agents, male_arguments)
}

pub fn agency_from_counts(
    female_agents: usize,
    female_arguments: usize,
    male_agents: usize,
    male_arguments: usize,
) -> AgencyResult {
    let ratio = |agents: usize, total: usize| (total > 0).then(|| agents as f64 / total as f64);
    let female_agentivity = ratio(female_agents, female_arguments);
    let male_agentivity = ratio(male_agents, male_arguments);
    let agency_bias = match (female_agentivity, male_agentivity) {
        (None, _) => Err(UndefinedBias::NoFemaleArguments),
        (_, None) => Err(UndefinedBias::NoMaleArguments),
        (Some(f), _) if f == 0.0 => Err(UndefinedBias::ZeroFemaleAgentivity),
        (Some(f), Some(m)) => Ok(m / f - 1.0),
    };
    AgencyResult {
        female_agents,
        female_arguments,
        male_agents,
        male_arguments,
        female_agentivity,
        male_agentivity,
        agency_bias,
    }
}
