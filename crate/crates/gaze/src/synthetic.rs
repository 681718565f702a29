//! Generator for small corpora with a known, planted bias, written in the
//! toy grammar so that annotation is deterministic.

use std::fs;
use std::io;
use std::path::Path;

use gaze_core::embeddings::EmbeddingSpace;
use gaze_core::model::{AnnotatedDocument, AuthorGender, DocMetadata, Gender, Narrator};
use gaze_core::toy::{toy_annotate, TOY_FEMALE_NAMES, TOY_MALE_NAMES};
use gaze_core::weat::WordSets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::write_atomic;
use crate::interchange::to_json;
use crate::vectors::format_vectors;

pub const APPEARANCE_NOUNS: &[&str] = &[
    "dress", "lip", "complexion", "figure", "hair", "eye", "bonnet", "gown",
];
pub const APPEARANCE_ADJECTIVES: &[&str] = &["pretty", "beautiful", "slender", "pale", "lovely"];
/// Appearance words that never occur in planted text.
pub const UNUSED_APPEARANCE_WORDS: &[&str] = &["handsome", "ravishing", "plain"];
pub const NEUTRAL_NOUNS: &[&str] = &[
    "letter", "horse", "table", "road", "book", "window", "garden", "carriage",
];
pub const NEUTRAL_ADJECTIVES: &[&str] = &["old", "wooden", "long", "heavy", "small"];
const VERBS: &[&str] = &["touched", "noticed", "held", "watched", "found", "brushed"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub docs: usize,
    pub sentences: usize,
    pub female_agent_p: f64,
    pub male_agent_p: f64,
    /// Gender whose sentences use appearance nouns.
    pub appearance_gender: Gender,
    pub pronoun_p: f64,
    /// Consecutive sentences about the same character.
    pub paragraph: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            docs: 20,
            sentences: 150,
            female_agent_p: 0.4,
            male_agent_p: 0.8,
            appearance_gender: Gender::Female,
            pronoun_p: 0.6,
            paragraph: 6,
            dim: 32,
            seed: 7,
        }
    }
}

impl PlantedConfig {
    /// Same corpus shape with the planted effects pointing the other way.
    pub fn mirrored(&self) -> Self {
        PlantedConfig {
            female_agent_p: self.male_agent_p,
            male_agent_p: self.female_agent_p,
            appearance_gender: self.appearance_gender.opposite(),
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub texts: Vec<(String, String)>,
    pub documents: Vec<AnnotatedDocument>,
    pub pretrained: EmbeddingSpace,
    pub word_sets: WordSets,
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.gen_range(0..words.len())]
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn planted_text(cfg: &PlantedConfig, index: usize, rng: &mut ChaCha8Rng) -> String {
    let female = capitalize(TOY_FEMALE_NAMES[index % TOY_FEMALE_NAMES.len()]);
    let male = capitalize(TOY_MALE_NAMES[index % TOY_MALE_NAMES.len()]);
    let mut introduced = [false, false];
    let mut sentences = Vec::with_capacity(cfg.sentences);
    let mut g = Gender::Female;
    for i in 0..cfg.sentences {
        if i % cfg.paragraph.max(1) == 0 {
            g = if rng.gen_bool(0.5) { Gender::Female } else { Gender::Male };
        }
        let slot = usize::from(g == Gender::Male);
        let (name, subj, obj, poss, agent_p) = match g {
            Gender::Female => (&female, "She", "her", "her", cfg.female_agent_p),
            Gender::Male => (&male, "He", "him", "his", cfg.male_agent_p),
        };
        let use_pronoun = introduced[slot] && rng.gen_bool(cfg.pronoun_p);
        introduced[slot] = true;
        let (noun, adj) = if g == cfg.appearance_gender {
            (pick(rng, APPEARANCE_NOUNS), pick(rng, APPEARANCE_ADJECTIVES))
        } else {
            (pick(rng, NEUTRAL_NOUNS), pick(rng, NEUTRAL_ADJECTIVES))
        };
        let verb = pick(rng, VERBS);
        let s = if rng.gen_bool(agent_p) {
            let who = if use_pronoun { subj } else { name.as_str() };
            format!("{who} {verb} {poss} {adj} {noun}.")
        } else {
            let who = if use_pronoun { obj } else { name.as_str() };
            format!("{} {noun} {verb} {who}.", capitalize(poss))
        };
        sentences.push(s);
    }
    sentences.join(" ")
}

/// Female/male counterparts among the base target words.
const TARGET_PAIRS: &[(&str, &str)] = &[
    ("girl", "boy"),
    ("sister", "brother"),
    ("mother", "father"),
    ("she", "he"),
    ("her", "him"),
    ("herself", "himself"),
    ("wife", "husband"),
    ("female", "male"),
    ("woman", "man"),
    ("miss", "mr"),
    ("lady", "sir"),
    ("aunt", "uncle"),
    ("hers", "his"),
];

/// Random vectors for every word the corpus or the word sets can use.
/// Component 0 is a gender axis: paired target words share all other
/// components and sit at opposite ends of it, every other word sits at 0.
pub fn synthetic_pretrained(words: impl IntoIterator<Item = String>, dim: usize, seed: u64) -> EmbeddingSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut space = EmbeddingSpace::new(dim).expect("positive dimension");
    let scale = 1.0 / (dim as f64).sqrt();
    let mut row = vec![0.0; dim];
    let draw = |rng: &mut ChaCha8Rng, row: &mut [f64]| {
        for x in row.iter_mut() {
            *x = rng.gen_range(-scale..scale);
        }
    };
    for &(f, m) in TARGET_PAIRS {
        draw(&mut rng, &mut row);
        row[0] = scale;
        space.insert(f, &row).expect("dimension matches");
        row[0] = -scale;
        space.insert(m, &row).expect("dimension matches");
    }
    for w in words {
        if space.contains(&w) {
            continue;
        }
        draw(&mut rng, &mut row);
        row[0] = 0.0;
        space.insert(&w, &row).expect("dimension matches");
    }
    space
}

/// Base sets plus "his", the male counterpart of the possessive "her"
/// used in planted text.
pub fn planted_word_sets() -> WordSets {
    let mut sets = WordSets::base(
        APPEARANCE_NOUNS
            .iter()
            .chain(APPEARANCE_ADJECTIVES)
            .chain(UNUSED_APPEARANCE_WORDS)
            .copied(),
    );
    sets.extend_targets(["his"], None);
    sets
}

pub fn planted_corpus(cfg: &PlantedConfig) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut texts = Vec::with_capacity(cfg.docs);
    let mut documents = Vec::with_capacity(cfg.docs);
    for i in 0..cfg.docs {
        let id = format!("planted{i:02}");
        let text = planted_text(cfg, i, &mut rng);
        let doc = toy_annotate(&id, &text)
            .expect("planted text is in the toy grammar")
            .with_metadata(DocMetadata {
                title: format!("Planted {i}"),
                author_gender: if i % 2 == 0 { AuthorGender::Female } else { AuthorGender::Male },
                narrator: Narrator::ThirdPerson,
                year: None,
            });
        texts.push((id, text));
        documents.push(doc);
    }
    let word_sets = planted_word_sets();
    let mut vocab: Vec<String> = documents
        .iter()
        .flat_map(|d| d.tokens().iter().map(|t| t.text.to_lowercase()))
        .collect();
    vocab.extend(word_sets.all_words());
    let pretrained = synthetic_pretrained(vocab, cfg.dim, cfg.seed ^ 0x5eed);
    PlantedCorpus {
        texts,
        documents,
        pretrained,
        word_sets,
    }
}

impl PlantedCorpus {
    /// Lays the corpus out as CLI inputs: `annotations/*.json`,
    /// `vectors.txt` and `wordsets/appearance.txt`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        let ann = dir.join("annotations");
        let ws = dir.join("wordsets");
        fs::create_dir_all(&ann)?;
        fs::create_dir_all(&ws)?;
        for d in &self.documents {
            write_atomic(&ann.join(format!("{}.json", d.doc_id())), to_json(d).as_bytes())?;
        }
        write_atomic(&dir.join("vectors.txt"), format_vectors(&self.pretrained).as_bytes())?;
        let mut appearance: Vec<&str> = self.word_sets.appearance.iter().map(String::as_str).collect();
        appearance.push("");
        write_atomic(&ws.join("appearance.txt"), appearance.join("\n").as_bytes())?;
        write_atomic(&ws.join("male.txt"), b"his\n")?;
        let mut meta = String::from("doc_id,title,author_gender,narrator,year\n");
        for d in &self.documents {
            let m = d.metadata();
            meta.push_str(&format!("{},{},{},3p,\n", d.doc_id(), m.title, m.author_gender.code()));
        }
        write_atomic(&dir.join("metadata.csv"), meta.as_bytes())
    }
}
