//! Fixed word lists: gendered honorific titles, common gendered entities for
//! argument classification, and the base male/female WEAT target words.

use crate::model::Gender;

const FEMALE_HONORIFICS: &[&str] = &["madam", "madame", "mademoiselle", "miss", "mlle", "mme", "mrs"];
const MALE_HONORIFICS: &[&str] = &["m", "monsieur", "mr", "sir"];

/// Gender of an honorific title. Case-insensitive, and a single trailing
/// period is ignored, so `"Mr"`, `"mr."` and `"MR."` all match.
pub fn honorific_gender(token: &str) -> Option<Gender> {
    let t = token.strip_suffix('.').unwrap_or(token);
    if t.is_empty() || t.len() > 16 {
        return None;
    }
    let mut buf = [0u8; 16];
    let lower = ascii_lower(t, &mut buf)?;
    if FEMALE_HONORIFICS.contains(&lower) {
        Some(Gender::Female)
    } else if MALE_HONORIFICS.contains(&lower) {
        Some(Gender::Male)
    } else {
        None
    }
}

pub fn is_honorific(token: &str) -> bool {
    honorific_gender(token).is_some()
}

fn ascii_lower<'a>(s: &str, buf: &'a mut [u8; 16]) -> Option<&'a str> {
    if !s.is_ascii() {
        return None;
    }
    let b = &mut buf[..s.len()];
    b.copy_from_slice(s.as_bytes());
    b.make_ascii_lowercase();
    core::str::from_utf8(b).ok()
}

pub const COMMON_FEMALE_ENTITIES: &[&str] = &[
    "abbess", "aunt", "bachelorette", "baroness", "bride", "countess", "dame", "daughter", "doe",
    "druidess", "duchess", "empress", "female", "females", "firewoman", "girl", "girlfriend",
    "girls", "goddaughter", "godmother", "grandmother", "heiress", "her", "heroine", "herself",
    "ladies", "lady", "madam", "mademoiselle", "mailwoman", "matriarch", "miss", "miss.", "mother",
    "mothers", "mrs", "mrs.", "niece", "nun", "policewoman", "princess", "queen", "saleswoman",
    "she", "sister", "sorceress", "stepmother", "widow", "wife", "witch", "wives", "woman",
    "women",
];

pub const COMMON_MALE_ENTITIES: &[&str] = &[
    "abbot", "bachelor", "baron", "boy", "boyfriend", "boys", "brother", "druid", "duke", "earl",
    "emperor", "father", "fathers", "fireman", "friar", "gentleman", "godfather", "godson",
    "grandfather", "groom", "he", "heir", "him", "himself", "husband", "husbands", "king",
    "knight", "mailman", "male", "males", "man", "men", "mister", "monsieur", "mr", "mr.",
    "nephew", "patriarch", "policeman", "prince", "salesman", "sir", "son", "sorcerer", "stag",
    "stepfather", "uncle", "widower", "wizard",
];

/// The two common-entity word lists, case-folded.
pub fn common_gendered_lexicon() -> (&'static [&'static str], &'static [&'static str]) {
    (COMMON_FEMALE_ENTITIES, COMMON_MALE_ENTITIES)
}

/// Gender of a case-folded word if it is a common gendered entity.
pub fn common_entity_gender(lower: &str) -> Option<Gender> {
    if COMMON_FEMALE_ENTITIES.contains(&lower) {
        Some(Gender::Female)
    } else if COMMON_MALE_ENTITIES.contains(&lower) {
        Some(Gender::Male)
    } else {
        None
    }
}

pub const BASE_MALE_WORDS: &[&str] = &[
    "boy", "brother", "father", "he", "him", "himself", "husband", "male", "man", "mr", "sir",
    "uncle",
];

pub const BASE_FEMALE_WORDS: &[&str] = &[
    "aunt", "female", "girl", "her", "herself", "lady", "miss", "mother", "she", "sister", "wife",
    "woman",
];

/// The appearance words printed alongside the target lists; the full
/// vocabulary comes from a lexicon file.
pub const SAMPLE_APPEARANCE_WORDS: &[&str] = &[
    "belt", "complexion", "dress", "eye", "lip", "outfit", "plain", "pore", "purse", "ravishing",
    "ugly", "voluptuous",
];

pub const FEMALE_PRONOUNS: &[&str] = &["she", "her", "herself"];
pub const MALE_PRONOUNS: &[&str] = &["he", "him", "himself"];

/// Gender of a third-person singular pronoun (possessive `his` excluded).
pub fn pronoun_gender(lower: &str) -> Option<Gender> {
    if FEMALE_PRONOUNS.contains(&lower) {
        Some(Gender::Female)
    } else if MALE_PRONOUNS.contains(&lower) {
        Some(Gender::Male)
    } else {
        None
    }
}
