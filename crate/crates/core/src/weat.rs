//! WEAT scores over male, female and appearance word sets, and appearance
//! bias as the change in score from a space to its fine-tuned version.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::EmbeddingSpace;
use crate::ledger::GenderLedger;
use crate::lexicon;
use crate::model::Gender;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeatError {
    #[error("{set} word set has {remaining} usable words")]
    EmptySet { set: &'static str, remaining: usize },
    #[error("zero vector for {0:?}")]
    ZeroVector(String),
    #[error("association scores have zero spread but mean {mean}")]
    DegenerateScore { mean: f64 },
    #[error("spaces have dimensions {pre} and {post}")]
    DimensionMismatch { pre: usize, post: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSets {
    pub male: BTreeSet<String>,
    pub female: BTreeSet<String>,
    pub appearance: BTreeSet<String>,
}

fn normalize<'a>(words: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    words
        .into_iter()
        .map(|w| w.trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

impl WordSets {
    /// The fixed male and female target words plus the given appearance
    /// vocabulary. Words are trimmed, case-folded and deduplicated; target
    /// words are removed from the appearance set.
    pub fn base<'a>(appearance: impl IntoIterator<Item = &'a str>) -> Self {
        let mut sets = WordSets {
            male: normalize(lexicon::BASE_MALE_WORDS.iter().copied()),
            female: normalize(lexicon::BASE_FEMALE_WORDS.iter().copied()),
            appearance: normalize(appearance),
        };
        sets.restore_disjointness();
        sets
    }

    /// Adds extra target words, e.g. from user-supplied lists.
    pub fn extend_targets<'a>(
        &mut self,
        male: impl IntoIterator<Item = &'a str>,
        female: impl IntoIterator<Item = &'a str>,
    ) {
        self.male.extend(normalize(male));
        self.female.extend(normalize(female));
        self.restore_disjointness();
    }

    /// Adds the document's gendered entity tokens. A token already in the
    /// opposite target set is skipped.
    pub fn augment(&self, entity_tokens: &EntityTokens) -> Self {
        let mut out = self.clone();
        for w in &entity_tokens.female {
            if !self.male.contains(w) {
                out.female.insert(w.clone());
            }
        }
        for w in &entity_tokens.male {
            if !self.female.contains(w) {
                out.male.insert(w.clone());
            }
        }
        out.restore_disjointness();
        out
    }

    fn restore_disjointness(&mut self) {
        let both: Vec<String> = self.male.intersection(&self.female).cloned().collect();
        for w in both {
            self.male.remove(&w);
            self.female.remove(&w);
        }
        let male = &self.male;
        let female = &self.female;
        self.appearance.retain(|w| !male.contains(w) && !female.contains(w));
    }

    pub fn all_words(&self) -> BTreeSet<String> {
        self.male
            .iter()
            .chain(&self.female)
            .chain(&self.appearance)
            .cloned()
            .collect()
    }

    pub fn is_disjoint(&self) -> bool {
        self.male.is_disjoint(&self.female)
            && self.male.is_disjoint(&self.appearance)
            && self.female.is_disjoint(&self.appearance)
    }

    /// Same sets with male and female exchanged.
    pub fn swapped(&self) -> Self {
        WordSets {
            male: self.female.clone(),
            female: self.male.clone(),
            appearance: self.appearance.clone(),
        }
    }

    fn restricted(&self, keep: impl Fn(&str) -> bool) -> (Self, DroppedWords) {
        let split = |set: &BTreeSet<String>| -> (BTreeSet<String>, Vec<String>) {
            let (kept, dropped): (Vec<&String>, Vec<&String>) = set.iter().partition(|w| keep(w));
            (
                kept.into_iter().cloned().collect(),
                dropped.into_iter().cloned().collect(),
            )
        };
        let (male, dm) = split(&self.male);
        let (female, df) = split(&self.female);
        let (appearance, da) = split(&self.appearance);
        (
            WordSets {
                male,
                female,
                appearance,
            },
            DroppedWords {
                male: dm,
                female: df,
                appearance: da,
            },
        )
    }
}

/// Case-folded entity tokens to add to the female and male target sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityTokens {
    pub female: BTreeSet<String>,
    pub male: BTreeSet<String>,
}

/// Picks entity tokens for the WEAT target sets.
///
/// Single-token entities are used directly. For two-token entities, an
/// honorific first token contributes the second token unless that token ever
/// follows an opposite-gender honorific; otherwise the first token is used
/// unless the second is a surname seen with both male and female titles.
/// Tokens that end up voted into both genders are dropped.
pub fn select_entity_weat_tokens(ledger: &GenderLedger) -> EntityTokens {
    let observed = |w: &str, g: Gender| {
        ledger
            .honorific_observations
            .get(w)
            .map_or(0, |c| c.get(g))
    };
    let mut votes: BTreeMap<&str, (bool, bool)> = BTreeMap::new();

    for e in &ledger.entities {
        let words: Vec<&str> = e.surface.split(' ').collect();
        let pick = match words.as_slice() {
            [w] => (observed(w, e.gender.opposite()) == 0).then_some(*w),
            [first, second] if lexicon::is_honorific(first) => {
                (observed(second, e.gender.opposite()) == 0).then_some(*second)
            }
            [first, second] => {
                let mixed = observed(second, Gender::Female) > 0 && observed(second, Gender::Male) > 0;
                (!mixed && !lexicon::is_honorific(first)).then_some(*first)
            }
            _ => None,
        };
        if let Some(w) = pick {
            let slot = votes.entry(w).or_insert((false, false));
            match e.gender {
                Gender::Female => slot.0 = true,
                Gender::Male => slot.1 = true,
            }
        }
    }

    let mut out = EntityTokens::default();
    for (w, (f, m)) in votes {
        match (f, m) {
            (true, false) => {
                out.female.insert(w.to_string());
            }
            (false, true) => {
                out.male.insert(w.to_string());
            }
            _ => {}
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn unit_rows(space: &EmbeddingSpace, words: &BTreeSet<String>) -> Result<Vec<Vec<f64>>, WeatError> {
    words
        .iter()
        .map(|w| {
            let v = space
                .vector(w)
                .ok_or_else(|| WeatError::EmptySet { set: "vocabulary", remaining: 0 })?;
            let n = norm(v);
            if n == 0.0 {
                return Err(WeatError::ZeroVector(w.clone()));
            }
            Ok(v.iter().map(|x| x / n).collect())
        })
        .collect()
}

fn mean_cos(units: &[Vec<f64>], a: &[f64]) -> f64 {
    let s: f64 = units
        .iter()
        .map(|u| u.iter().zip(a).map(|(x, y)| x * y).sum::<f64>())
        .sum();
    s / units.len() as f64
}

/// `s(a)`: mean cosine of `a` with the female words minus mean cosine with
/// the male words. All words must be in `space`.
pub fn association(space: &EmbeddingSpace, sets: &WordSets, a: &str) -> Result<f64, WeatError> {
    let f = unit_rows(space, &sets.female)?;
    let m = unit_rows(space, &sets.male)?;
    let mut single = BTreeSet::new();
    single.insert(a.to_string());
    let a = unit_rows(space, &single)?;
    association_units(&f, &m, &a[0])
}

fn association_units(f: &[Vec<f64>], m: &[Vec<f64>], a: &[f64]) -> Result<f64, WeatError> {
    if f.is_empty() {
        return Err(WeatError::EmptySet { set: "female", remaining: 0 });
    }
    if m.is_empty() {
        return Err(WeatError::EmptySet { set: "male", remaining: 0 });
    }
    Ok(mean_cos(f, a) - mean_cos(m, a))
}

/// Per-appearance-word associations, in word order.
pub fn associations(space: &EmbeddingSpace, sets: &WordSets) -> Result<Vec<f64>, WeatError> {
    let f = unit_rows(space, &sets.female)?;
    let m = unit_rows(space, &sets.male)?;
    let a = unit_rows(space, &sets.appearance)?;
    a.iter().map(|a| association_units(&f, &m, a)).collect()
}

/// Effective sets: the words of `sets` present in `space`.
pub fn effective_sets(space: &EmbeddingSpace, sets: &WordSets) -> (WordSets, DroppedWords) {
    sets.restricted(|w| space.contains(w))
}

/// Mean of `s(a)` over appearance words divided by its sample standard
/// deviation. Words missing from `space` are ignored.
pub fn weat_score(space: &EmbeddingSpace, sets: &WordSets) -> Result<f64, WeatError> {
    let (eff, _) = effective_sets(space, sets);
    score_effective(space, &eff)
}

fn score_effective(space: &EmbeddingSpace, eff: &WordSets) -> Result<f64, WeatError> {
    for (set, words, min) in [
        ("male", &eff.male, 1),
        ("female", &eff.female, 1),
        ("appearance", &eff.appearance, 2),
    ] {
        if words.len() < min {
            return Err(WeatError::EmptySet {
                set,
                remaining: words.len(),
            });
        }
    }
    let s = associations(space, eff)?;
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let sd = libm::sqrt(var);
    if sd < EPS {
        if mean.abs() < EPS {
            return Ok(0.0);
        }
        return Err(WeatError::DegenerateScore { mean });
    }
    Ok(mean / sd)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedWords {
    pub male: Vec<String>,
    pub female: Vec<String>,
    pub appearance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatReport {
    pub weat_pre: f64,
    pub weat_post: f64,
    pub appearance_bias: f64,
    pub dropped_words: DroppedWords,
    /// The word sets both scores were computed over.
    pub effective: WordSets,
}

/// WEAT after fine-tuning minus WEAT before, both computed over the words
/// present in both spaces.
pub fn appearance_bias(
    pre: &EmbeddingSpace,
    post: &EmbeddingSpace,
    sets: &WordSets,
) -> Result<WeatReport, WeatError> {
    if pre.dim() != post.dim() {
        return Err(WeatError::DimensionMismatch {
            pre: pre.dim(),
            post: post.dim(),
        });
    }
    let (effective, dropped_words) = sets.restricted(|w| pre.contains(w) && post.contains(w));
    let weat_pre = score_effective(pre, &effective)?;
    let weat_post = score_effective(post, &effective)?;
    Ok(WeatReport {
        weat_pre,
        weat_post,
        appearance_bias: weat_post - weat_pre,
        dropped_words,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{build_ledger_with, LedgerConfig};
    use crate::model::{AnnotatedDocument, DocumentParts, EntityMention, Span};
    use alloc::vec;

    fn space(rows: &[(&str, &[f64])]) -> EmbeddingSpace {
        let mut s = EmbeddingSpace::new(rows[0].1.len()).unwrap();
        for (w, v) in rows {
            s.insert(w, v).unwrap();
        }
        s
    }

    fn sets(m: &[&str], f: &[&str], a: &[&str]) -> WordSets {
        WordSets {
            male: normalize(m.iter().copied()),
            female: normalize(f.iter().copied()),
            appearance: normalize(a.iter().copied()),
        }
    }

    #[test]
    fn hand_cosine() {
        let sp = space(&[("f", &[1.0, 0.0]), ("m", &[0.0, 1.0]), ("a", &[1.0, 0.0])]);
        let s = sets(&["m"], &["f"], &["a"]);
        assert!((association(&sp, &s, "a").unwrap() - 1.0).abs() < 1e-15);
        assert!((association(&sp, &s.swapped(), "a").unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn equidistant_words_have_zero_association() {
        let sp = space(&[("f", &[1.0, 0.0]), ("m", &[0.0, 1.0]), ("a", &[1.0, 1.0])]);
        let s = sets(&["m"], &["f"], &["a"]);
        assert!(association(&sp, &s, "a").unwrap().abs() < 1e-15);
    }

    #[test]
    fn zero_spread_conventions() {
        // both appearance words equidistant: all s(a) = 0 -> score 0
        let sp = space(&[
            ("f", &[1.0, 0.0]),
            ("m", &[0.0, 1.0]),
            ("a", &[1.0, 1.0]),
            ("b", &[2.0, 2.0]),
            ("c", &[1.0, 0.0]),
            ("d", &[3.0, 0.0]),
        ]);
        assert_eq!(weat_score(&sp, &sets(&["m"], &["f"], &["a", "b"])).unwrap(), 0.0);
        assert!(matches!(
            weat_score(&sp, &sets(&["m"], &["f"], &["c", "d"])),
            Err(WeatError::DegenerateScore { .. })
        ));
    }

    #[test]
    fn score_from_two_associations() {
        // s-values 1 and 3 are impossible for cosines, so check the ratio
        // arithmetic through scaled values instead: s = {0.1, 0.3}.
        let mean: f64 = 0.2;
        let sd = libm::sqrt(0.02);
        assert!((mean / sd - core::f64::consts::SQRT_2).abs() < 1e-12);
        let sp = space(&[
            ("f", &[1.0, 0.0]),
            ("m", &[0.0, 1.0]),
            ("a", &[0.9, 0.1]),
            ("b", &[0.6, 0.4]),
        ]);
        let s = sets(&["m"], &["f"], &["a", "b"]);
        let vals = associations(&sp, &s).unwrap();
        let m = (vals[0] + vals[1]) / 2.0;
        let sd = libm::sqrt(((vals[0] - m).powi(2) + (vals[1] - m).powi(2)) / 1.0);
        assert!((weat_score(&sp, &s).unwrap() - m / sd).abs() < 1e-12);
    }

    #[test]
    fn missing_sets_error() {
        let sp = space(&[("f", &[1.0, 0.0]), ("a", &[1.0, 1.0]), ("b", &[1.0, 2.0])]);
        assert!(matches!(
            weat_score(&sp, &sets(&["m"], &["f"], &["a", "b"])),
            Err(WeatError::EmptySet { set: "male", .. })
        ));
        let sp = space(&[("f", &[1.0, 0.0]), ("m", &[0.0, 1.0]), ("a", &[1.0, 1.0])]);
        assert!(matches!(
            weat_score(&sp, &sets(&["m"], &["f"], &["a", "zzz"])),
            Err(WeatError::EmptySet { set: "appearance", remaining: 1 })
        ));
        let sp = space(&[("f", &[0.0, 0.0]), ("m", &[0.0, 1.0]), ("a", &[1.0, 1.0]), ("b", &[1.0, 0.0])]);
        assert!(matches!(
            weat_score(&sp, &sets(&["m"], &["f"], &["a", "b"])),
            Err(WeatError::ZeroVector(_))
        ));
    }

    #[test]
    fn identical_spaces_give_zero_bias() {
        let sp = space(&[
            ("f", &[1.0, 0.2]),
            ("m", &[0.1, 1.0]),
            ("a", &[0.9, 0.1]),
            ("b", &[0.2, 0.4]),
        ]);
        let r = appearance_bias(&sp, &sp, &sets(&["m"], &["f"], &["a", "b", "gone"])).unwrap();
        assert_eq!(r.appearance_bias, 0.0);
        assert_eq!(r.dropped_words.appearance, vec!["gone".to_string()]);
    }

    #[test]
    fn base_sets_are_disjoint_and_deduplicated() {
        let s = WordSets::base(["Dress", "dress", " lip ", "", "she"]);
        assert_eq!(s.appearance.len(), 2);
        assert!(s.male.contains("mr") && s.male.contains("sir"));
        assert!(s.is_disjoint());
        let aug = s.augment(&EntityTokens {
            female: normalize(["dress", "alice", "he"]),
            male: normalize(["bob"]),
        });
        assert!(aug.female.contains("alice") && aug.female.contains("dress"));
        assert!(!aug.female.contains("he"));
        assert!(!aug.appearance.contains("dress"));
        assert!(aug.male.contains("bob"));
        assert!(aug.is_disjoint());
    }

    fn ledger_for(
        text: &str,
        persons: &[(usize, usize)],
        chains: &[&[(usize, usize)]],
    ) -> GenderLedger {
        let tokens: Vec<String> = text.split_whitespace().map(|s| s.to_string()).collect();
        let n = tokens.len();
        let doc = AnnotatedDocument::new(DocumentParts {
            doc_id: "d".into(),
            tokens,
            sentences: vec![Span::new(0, n)],
            entities: persons
                .iter()
                .map(|&s| EntityMention {
                    span: s.into(),
                    label: "PERSON".into(),
                })
                .collect(),
            coref_chains: chains
                .iter()
                .map(|c| c.iter().map(|&s| s.into()).collect())
                .collect(),
            ..Default::default()
        })
        .unwrap();
        build_ledger_with(&doc, &LedgerConfig { min_mentions: 1 })
    }

    #[test]
    fn single_token_entity_selected() {
        let l = ledger_for("Alice she", &[(0, 1)], &[&[(0, 1), (1, 2)]]);
        let t = select_entity_weat_tokens(&l);
        assert!(t.female.contains("alice"));
    }

    #[test]
    fn honorific_two_token_entity() {
        let l = ledger_for("Mr. Darcy bowed", &[(0, 2)], &[]);
        assert_eq!(l.entities[0].surface, "mr. darcy");
        let t = select_entity_weat_tokens(&l);
        assert!(t.male.contains("darcy"));
        assert!(!t.male.contains("mr."));
    }

    #[test]
    fn mixed_honorific_surname_blocks_first_name() {
        // elizabeth bennet: F via pronoun; bennet seen after Mr. and Mrs.
        let l = ledger_for(
            "Elizabeth Bennet she Mr. Bennet Mrs. Bennet",
            &[(0, 2)],
            &[&[(0, 2), (2, 3)]],
        );
        let e = l.entity("elizabeth bennet").unwrap();
        assert_eq!(e.gender, Gender::Female);
        let t = select_entity_weat_tokens(&l);
        assert!(!t.female.contains("elizabeth"));

        let l = ledger_for("Jane Eyre she", &[(0, 2)], &[&[(0, 2), (2, 3)]]);
        assert!(select_entity_weat_tokens(&l).female.contains("jane"));
    }

    #[test]
    fn opposite_honorific_blocks_token() {
        let l = ledger_for("Mr. Grey Mrs. Grey", &[(0, 2)], &[]);
        assert_eq!(l.entities[0].surface, "mr. grey");
        assert!(select_entity_weat_tokens(&l).male.is_empty());
    }
}
