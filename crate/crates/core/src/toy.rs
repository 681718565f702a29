//! Deterministic rule-based annotator for a small English fragment.
//!
//! This exists to produce test fixtures without neural models. Accepted
//! sentences look like
//!
//! ```text
//! sentence := clause ("and" clause)* terminator
//! clause   := [np] verb [np] (prep np)* [particle] [","? quote]
//! np       := Name | Title Name | pronoun | det word+ | quote
//! ```
//!
//! Only the first clause needs a subject; later ones without a subject
//! share it. A subject `det word+` phrase is limited to one noun. Names are
//! capitalized single tokens that are not function words. The subject is
//! ARG0, the direct object (or else the first prepositional object) is
//! ARG1, and remaining prepositional phrases are OTHER. Third-person
//! pronouns corefer with the nearest preceding name of the same gender;
//! name gender comes from a title before any of the name's mentions or from
//! a short built-in list.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::lexicon;
use crate::model::{
    AnnotatedDocument, Argument, DocMetadata, DocumentError, DocumentParts, EntityMention, Frame,
    Gender, Role, Span,
};

const ABBREVIATIONS: &[&str] = &["mr.", "mrs.", "m.", "mme.", "mlle.", "dr.", "st.", "ms."];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "his", "her", "their", "my", "your", "its", "our", "this", "that", "some",
];
const PRONOUNS: &[&str] = &[
    "she", "he", "her", "him", "herself", "himself", "i", "me", "you", "we", "us", "they", "them",
    "it",
];
const PREPOSITIONS: &[&str] = &[
    "to", "at", "with", "over", "in", "on", "by", "from", "toward", "towards", "into", "near",
    "for", "about", "under", "through", "across", "behind", "after", "before", "up", "down",
    "away", "out",
];
const OPEN_QUOTES: &[&str] = &["\"", "\u{201c}"];
const CLOSE_QUOTES: &[&str] = &["\"", "\u{201d}"];

pub const TOY_FEMALE_NAMES: &[&str] = &[
    "alice", "anna", "carol", "clara", "emma", "eve", "grace", "jane", "lucy", "mary", "ruth",
    "sarah",
];
pub const TOY_MALE_NAMES: &[&str] = &[
    "bob", "dave", "frank", "george", "henry", "james", "john", "mark", "paul", "peter", "tom",
    "walter",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToyGrammarError {
    #[error("sentence {sentence}: unexpected {found:?} at token {token}, expected {expected}")]
    Unexpected {
        sentence: usize,
        token: usize,
        found: String,
        expected: &'static str,
    },
    #[error(transparent)]
    Document(#[from] DocumentError),
}

fn is_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | '!' | '?' | ';' | ':' | '"' | '(' | ')' | '\u{201c}' | '\u{201d}'
    )
}

/// Splits on whitespace, then peels punctuation off both ends of each chunk.
/// Known title abbreviations keep their period.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        while let Some(c) = rest.chars().next().filter(|&c| is_punct(c)) {
            out.push(c.to_string());
            rest = &rest[c.len_utf8()..];
        }
        let mut tail = Vec::new();
        while let Some(c) = rest.chars().next_back().filter(|&c| is_punct(c)) {
            if ABBREVIATIONS.contains(&rest.to_lowercase().as_str()) {
                break;
            }
            tail.push(c.to_string());
            rest = &rest[..rest.len() - c.len_utf8()];
        }
        if !rest.is_empty() {
            out.push(rest.to_string());
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

fn is_terminator(t: &str) -> bool {
    matches!(t, "." | "!" | "?")
}

/// Sentence boundaries: after a terminator outside quotes, or after the
/// closing quote that directly follows a terminator inside quotes.
pub fn split_sentences(tokens: &[String]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_quote = false;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i].as_str();
        if in_quote && CLOSE_QUOTES.contains(&t) {
            in_quote = false;
            if i > 0 && is_terminator(&tokens[i - 1]) {
                out.push(Span::new(start, i + 1));
                start = i + 1;
            }
        } else if !in_quote && OPEN_QUOTES.contains(&t) {
            in_quote = true;
        } else if !in_quote && is_terminator(t) {
            out.push(Span::new(start, i + 1));
            start = i + 1;
        }
        i += 1;
    }
    if start < tokens.len() {
        out.push(Span::new(start, tokens.len()));
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Det,
    Pronoun,
    Prep,
    And,
    Comma,
    OpenQuote,
    Honorific,
    Name,
    Word,
    Other,
}

fn classify(tok: &str) -> Class {
    let lower = tok.to_lowercase();
    let l = lower.as_str();
    if l == "and" {
        Class::And
    } else if l == "," {
        Class::Comma
    } else if OPEN_QUOTES.contains(&l) {
        Class::OpenQuote
    } else if lexicon::is_honorific(tok) && (tok.ends_with('.') || l == "sir" || l == "miss") {
        Class::Honorific
    } else if PRONOUNS.contains(&l) {
        Class::Pronoun
    } else if DETERMINERS.contains(&l) {
        Class::Det
    } else if PREPOSITIONS.contains(&l) {
        Class::Prep
    } else if tok.chars().next().is_some_and(char::is_uppercase)
        && tok.chars().all(char::is_alphabetic)
    {
        Class::Name
    } else if tok.chars().all(|c| c.is_alphabetic() || c == '-' || c == '\'') {
        Class::Word
    } else {
        Class::Other
    }
}

struct SentenceParser<'a> {
    tokens: &'a [String],
    classes: Vec<Class>,
    sentence: usize,
    pos: usize,
    end: usize,
    frames: Vec<Frame>,
    names: Vec<usize>,
}

impl SentenceParser<'_> {
    fn class(&self, i: usize) -> Option<Class> {
        (i < self.end).then(|| self.classes[i])
    }

    fn err(&self, expected: &'static str) -> ToyGrammarError {
        ToyGrammarError::Unexpected {
            sentence: self.sentence,
            token: self.pos,
            found: self
                .tokens
                .get(self.pos)
                .filter(|_| self.pos < self.end)
                .cloned()
                .unwrap_or_else(|| "end of sentence".into()),
            expected,
        }
    }

    fn starts_np(&self, i: usize) -> bool {
        matches!(
            self.class(i),
            Some(Class::Det | Class::Pronoun | Class::Name | Class::Honorific | Class::OpenQuote)
        )
    }

    /// "her" is a determiner when a plain word follows it.
    fn pronoun_is_det(&self, i: usize) -> bool {
        self.tokens[i].eq_ignore_ascii_case("her") && self.class(i + 1) == Some(Class::Word)
    }

    fn np(&mut self, subject: bool) -> Result<Span, ToyGrammarError> {
        let i = self.pos;
        let span = match self.class(i) {
            Some(Class::OpenQuote) => {
                let close = (i + 1..self.end)
                    .find(|&j| CLOSE_QUOTES.contains(&self.tokens[j].as_str()))
                    .ok_or_else(|| self.err("closing quote"))?;
                Span::new(i, close + 1)
            }
            Some(Class::Honorific) if self.class(i + 1) == Some(Class::Name) => {
                self.names.push(i + 1);
                Span::new(i, i + 2)
            }
            Some(Class::Name) => {
                self.names.push(i);
                Span::new(i, i + 1)
            }
            Some(Class::Pronoun) if !self.pronoun_is_det(i) => Span::new(i, i + 1),
            Some(Class::Det | Class::Pronoun) => {
                let mut j = i + 1;
                while self.class(j) == Some(Class::Word) && (j == i + 1 || !subject) {
                    j += 1;
                }
                if j == i + 1 {
                    self.pos = j;
                    return Err(self.err("noun after determiner"));
                }
                Span::new(i, j)
            }
            _ => return Err(self.err("noun phrase")),
        };
        self.pos = span.end;
        Ok(span)
    }

    fn clause(&mut self, subject: Span) -> Result<(), ToyGrammarError> {
        if self.class(self.pos) != Some(Class::Word) {
            return Err(self.err("verb"));
        }
        let predicate = Span::new(self.pos, self.pos + 1);
        self.pos += 1;
        let mut args = alloc::vec![Argument {
            span: subject,
            role: Role::Arg0
        }];
        let mut patient: Option<Span> = None;

        if self.starts_np(self.pos) && self.class(self.pos) != Some(Class::OpenQuote) {
            patient = Some(self.np(false)?);
        }
        loop {
            match self.class(self.pos) {
                Some(Class::Prep) if self.starts_np(self.pos + 1) => {
                    let prep = self.pos;
                    self.pos += 1;
                    let obj = self.np(false)?;
                    if patient.is_none() {
                        patient = Some(obj);
                    } else {
                        args.push(Argument {
                            span: Span::new(prep, obj.end),
                            role: Role::Other,
                        });
                    }
                }
                // particle: "walked over"
                Some(Class::Prep) => self.pos += 1,
                Some(Class::Comma) if self.class(self.pos + 1) == Some(Class::OpenQuote) => {
                    self.pos += 1;
                }
                Some(Class::OpenQuote) => {
                    let quote = self.np(false)?;
                    if patient.is_none() {
                        patient = Some(quote);
                    } else {
                        args.push(Argument {
                            span: quote,
                            role: Role::Other,
                        });
                    }
                }
                _ => break,
            }
        }
        if let Some(span) = patient {
            args.insert(
                1,
                Argument {
                    span,
                    role: Role::Arg1,
                },
            );
        }
        self.frames.push(Frame { predicate, args });
        Ok(())
    }

    fn parse(&mut self) -> Result<(), ToyGrammarError> {
        if self.end > self.pos && is_terminator(&self.tokens[self.end - 1]) {
            self.end -= 1;
        }
        if self.pos == self.end {
            return Ok(());
        }
        let mut subject = self.np(true)?;
        self.clause(subject)?;
        while self.pos < self.end {
            if self.class(self.pos) == Some(Class::Comma) && self.class(self.pos + 1) == Some(Class::And) {
                self.pos += 1;
            }
            if self.class(self.pos) != Some(Class::And) {
                return Err(self.err("\"and\" or end of sentence"));
            }
            self.pos += 1;
            if self.starts_np(self.pos) {
                subject = self.np(true)?;
            }
            self.clause(subject)?;
        }
        Ok(())
    }
}

fn name_genders(tokens: &[String], names: &[usize]) -> BTreeMap<String, Gender> {
    let mut out = BTreeMap::new();
    for &i in names {
        let lower = tokens[i].to_lowercase();
        if let Some(g) = i
            .checked_sub(1)
            .and_then(|p| lexicon::honorific_gender(&tokens[p]))
        {
            out.entry(lower).or_insert(g);
        }
    }
    for &i in names {
        let lower = tokens[i].to_lowercase();
        let listed = if TOY_FEMALE_NAMES.contains(&lower.as_str()) {
            Some(Gender::Female)
        } else if TOY_MALE_NAMES.contains(&lower.as_str()) {
            Some(Gender::Male)
        } else {
            None
        };
        if let Some(g) = listed {
            out.entry(lower).or_insert(g);
        }
    }
    out
}

fn coref_chains(tokens: &[String], names: &[usize], pronouns: &[usize]) -> Vec<Vec<Span>> {
    let genders = name_genders(tokens, names);
    let mut chains: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    for &i in names {
        chains
            .entry(tokens[i].to_lowercase())
            .or_default()
            .push(Span::new(i, i + 1));
    }
    for &p in pronouns {
        let Some(g) = lexicon::pronoun_gender(&tokens[p].to_lowercase()) else {
            continue;
        };
        let antecedent = names
            .iter()
            .rev()
            .filter(|&&n| n < p)
            .map(|&n| tokens[n].to_lowercase())
            .find(|name| genders.get(name) == Some(&g));
        if let Some(name) = antecedent {
            chains.entry(name).or_default().push(Span::new(p, p + 1));
        }
    }
    // first mention order keeps output stable and readable
    let mut out: Vec<Vec<Span>> = chains
        .into_values()
        .filter(|c| c.len() >= 2)
        .map(|mut c| {
            c.sort();
            c
        })
        .collect();
    out.sort();
    out
}

/// Annotates `text` under the toy grammar.
pub fn toy_annotate(doc_id: &str, text: &str) -> Result<AnnotatedDocument, ToyGrammarError> {
    let tokens = tokenize(text);
    let sentences = split_sentences(&tokens);
    let classes: Vec<Class> = tokens.iter().map(|t| classify(t)).collect();

    let mut frames = Vec::new();
    let mut names = Vec::new();
    for (si, s) in sentences.iter().enumerate() {
        let mut p = SentenceParser {
            tokens: &tokens,
            classes: classes.clone(),
            sentence: si,
            pos: s.start,
            end: s.end,
            frames: Vec::new(),
            names: Vec::new(),
        };
        p.parse()?;
        frames.extend(p.frames);
        names.extend(p.names);
    }
    names.sort_unstable();

    // pronouns that head their own argument span
    let mut pronouns: Vec<usize> = frames
        .iter()
        .flat_map(|f| f.args.iter())
        .filter(|a| a.span.len() == 1 && classes[a.span.start] == Class::Pronoun)
        .map(|a| a.span.start)
        .collect();
    pronouns.sort_unstable();
    pronouns.dedup();

    let coref = coref_chains(&tokens, &names, &pronouns);
    let entities = names
        .iter()
        .map(|&i| EntityMention {
            span: Span::new(i, i + 1),
            label: "PERSON".into(),
        })
        .collect();

    Ok(AnnotatedDocument::new(DocumentParts {
        doc_id: doc_id.into(),
        tokens,
        sentences,
        entities,
        coref_chains: coref,
        srl_frames: frames,
        metadata: DocMetadata::default(),
    })?)
}
