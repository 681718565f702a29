//! Word vectors and CBOW negative-sampling fine-tuning.
//!
//! Training runs a fixed number of SGD updates regardless of document
//! length: positions walk the token stream in order and wrap around until
//! the budget is spent. Each update predicts the centre word from the mean of
//! its context vectors against sampled negatives.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::GenderLedger;
use crate::model::AnnotatedDocument;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("no token survives min_count")]
    EmptyVocab,
    #[error("vector for {word:?} has dimension {got}, expected {expected}")]
    Dimension {
        word: String,
        expected: usize,
        got: usize,
    },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
}

/// A vocabulary with input vectors and, while training, output vectors.
/// Rows are stored flat in vocabulary order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    dim: usize,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingSpace {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(EmbeddingSpace {
            dim,
            words: Vec::new(),
            index: BTreeMap::new(),
            input: Vec::new(),
            output: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_row(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn has_output(&self) -> bool {
        !self.output.is_empty()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Adds a word, or replaces its vector when already present. Returns
    /// `true` on replacement.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<bool, EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::Dimension {
                word: word.into(),
                expected: self.dim,
                got: vector.len(),
            });
        }
        if let Some(i) = self.index_of(word) {
            self.input[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector);
            return Ok(true);
        }
        self.index.insert(word.into(), self.words.len());
        self.words.push(word.into());
        self.input.extend_from_slice(vector);
        if self.has_output() {
            self.output.extend(core::iter::repeat_n(0.0, self.dim));
        }
        Ok(false)
    }

    /// Allocates zeroed output vectors for training.
    pub fn with_zero_output(mut self) -> Self {
        self.output = vec![0.0; self.input.len()];
        self
    }

    /// Drops training-only state.
    pub fn without_output(mut self) -> Self {
        self.output = Vec::new();
        self
    }

    /// Sets row `i` of the output vectors, allocating them if needed.
    pub fn set_output(&mut self, i: usize, vector: &[f64]) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::Dimension {
                word: self.words[i].clone(),
                expected: self.dim,
                got: vector.len(),
            });
        }
        if !self.has_output() {
            self.output = vec![0.0; self.input.len()];
        }
        self.output_row_mut(i).copy_from_slice(vector);
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        self.input.iter_mut().for_each(|x| *x *= c);
    }

    fn input_row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.input[i * self.dim..(i + 1) * self.dim]
    }

    fn output_row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.output[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub window: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub total_steps: u64,
    pub min_count: usize,
    pub unigram_power: f64,
    pub seed: u64,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            window: 5,
            negatives: 5,
            initial_lr: 0.025,
            final_lr: 2.5e-6,
            total_steps: 10_000,
            min_count: 1,
            unigram_power: 0.75,
            seed: 0,
        }
    }
}

impl FinetuneConfig {
    /// Learning rate for `step` in `0..total_steps`, linear from
    /// `initial_lr` down to `final_lr` at the last step.
    pub fn learning_rate(&self, step: u64) -> f64 {
        if self.total_steps <= 1 {
            return self.initial_lr;
        }
        let t = step as f64 / (self.total_steps - 1) as f64;
        self.initial_lr + (self.final_lr - self.initial_lr) * t
    }
}

const INIT_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn token_counts(doc: &AnnotatedDocument) -> (Vec<&str>, BTreeMap<&str, usize>) {
    let mut order = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in doc.tokens() {
        let c = counts.entry(t.lower.as_str()).or_insert(0);
        if *c == 0 {
            order.push(t.lower.as_str());
        }
        *c += 1;
    }
    (order, counts)
}

/// Builds the space to fine-tune on `doc`.
///
/// The vocabulary is the document's case-folded tokens with at least
/// `min_count` occurrences, in first-occurrence order, followed by any
/// `retain` words found in `pretrained` (sorted). Retained words never enter
/// the training stream; they keep the WEAT vocabulary intact. Gendered
/// entity tokens and words missing from `pretrained` get uniform random
/// vectors in `[-0.5/d, 0.5/d]`; output vectors start at zero.
pub fn build_finetune_space(
    doc: &AnnotatedDocument,
    ledger: &GenderLedger,
    pretrained: &EmbeddingSpace,
    cfg: &FinetuneConfig,
    retain: &BTreeSet<String>,
) -> Result<EmbeddingSpace, EmbeddingError> {
    let (order, counts) = token_counts(doc);
    let mut vocab: Vec<&str> = order
        .into_iter()
        .filter(|w| counts[w] >= cfg.min_count)
        .collect();
    if vocab.is_empty() {
        return Err(EmbeddingError::EmptyVocab);
    }
    let in_doc: BTreeSet<&str> = vocab.iter().copied().collect();
    vocab.extend(
        retain
            .iter()
            .map(String::as_str)
            .filter(|w| !in_doc.contains(w) && pretrained.contains(w)),
    );

    let dim = pretrained.dim();
    let entity_tokens = ledger.entity_tokens();
    let mut rng = rng_for(cfg.seed, INIT_STREAM);
    let bound = 0.5 / dim as f64;
    let mut space = EmbeddingSpace::new(dim)?;
    let mut buf = vec![0.0; dim];
    for w in vocab {
        match pretrained.vector(w) {
            Some(v) if !entity_tokens.contains(w) => buf.copy_from_slice(v),
            _ => buf
                .iter_mut()
                .for_each(|x| *x = rng.gen_range(-bound..=bound)),
        }
        space.insert(w, &buf)?;
    }
    Ok(space.with_zero_output())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, i.e. `-ln σ(-x)`, without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + libm::log1p(libm::exp(-x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Gradients of the CBOW-NS loss for the rows an instance touches, sorted
/// by row index.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub input: Vec<(usize, Vec<f64>)>,
    pub output: Vec<(usize, Vec<f64>)>,
}

/// Loss and exact gradients for one CBOW negative-sampling instance:
///
/// `h = mean(v_c for c in context)`,
/// `loss = -ln σ(u_center · h) - Σ_k ln σ(-u_k · h)`.
///
/// Repeated indices accumulate. Requires a non-empty `context` and output
/// vectors.
pub fn cbow_ns_loss_grad(
    space: &EmbeddingSpace,
    center: usize,
    context: &[usize],
    negatives: &[usize],
) -> (f64, Gradients) {
    assert!(!context.is_empty(), "CBOW context must be non-empty");
    assert!(space.has_output(), "space has no output vectors");
    let d = space.dim();
    let inv = 1.0 / context.len() as f64;

    let mut h = vec![0.0; d];
    for &c in context {
        axpy(inv, space.row(c), &mut h);
    }

    let mut dh = vec![0.0; d];
    let mut output: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut loss = 0.0;

    let targets = core::iter::once((center, true)).chain(negatives.iter().map(|&k| (k, false)));
    for (row, positive) in targets {
        let u = space.output_row(row);
        let score = dot(u, &h);
        // dL/dscore
        let g = if positive {
            loss += softplus(-score);
            sigmoid(score) - 1.0
        } else {
            loss += softplus(score);
            sigmoid(score)
        };
        axpy(g, u, &mut dh);
        let slot = output.entry(row).or_insert_with(|| vec![0.0; d]);
        axpy(g, &h, slot);
    }

    let mut input: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &c in context {
        let slot = input.entry(c).or_insert_with(|| vec![0.0; d]);
        axpy(inv, &dh, slot);
    }

    (
        loss,
        Gradients {
            input: input.into_iter().collect(),
            output: output.into_iter().collect(),
        },
    )
}

/// Samples words proportionally to `count^power` by inverse CDF.
struct UnigramTable {
    cumulative: Vec<f64>,
}

impl UnigramTable {
    fn new(counts: &[usize], power: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                if c > 0 {
                    acc += libm::pow(c as f64, power);
                }
                acc
            })
            .collect();
        UnigramTable { cumulative }
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn weight(&self, i: usize) -> f64 {
        let prev = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        self.cumulative[i] - prev
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let x = rng.gen::<f64>() * self.total();
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone)]
pub struct FinetuneRun {
    pub space: EmbeddingSpace,
    /// SGD updates consumed, always `total_steps`.
    pub steps: u64,
    /// Loss of every update that had a non-empty context, in order.
    pub losses: Vec<f64>,
}

/// Fine-tunes `space` on `doc` for exactly `cfg.total_steps` updates.
pub fn finetune(
    doc: &AnnotatedDocument,
    space: &EmbeddingSpace,
    cfg: &FinetuneConfig,
) -> Result<FinetuneRun, EmbeddingError> {
    let mut space = space.clone();
    if cfg.total_steps == 0 {
        return Ok(FinetuneRun {
            space,
            steps: 0,
            losses: Vec::new(),
        });
    }
    if !space.has_output() {
        space = space.with_zero_output();
    }

    let stream: Vec<usize> = doc
        .tokens()
        .iter()
        .filter_map(|t| space.index_of(&t.lower))
        .collect();
    if stream.is_empty() {
        return Err(EmbeddingError::EmptyVocab);
    }
    let mut counts = vec![0usize; space.len()];
    for &w in &stream {
        counts[w] += 1;
    }
    let table = UnigramTable::new(&counts, cfg.unigram_power);
    let mut rng = rng_for(cfg.seed, TRAIN_STREAM);
    let window = cfg.window.max(1);

    let mut context = Vec::with_capacity(2 * window);
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let mut losses = Vec::new();

    for step in 0..cfg.total_steps {
        let pos = (step % stream.len() as u64) as usize;
        let lr = cfg.learning_rate(step);
        let radius = rng.gen_range(1..=window);
        let center = stream[pos];

        context.clear();
        context.extend_from_slice(&stream[pos.saturating_sub(radius)..pos]);
        context.extend_from_slice(&stream[(pos + 1).min(stream.len())..(pos + 1 + radius).min(stream.len())]);
        if context.is_empty() {
            continue;
        }

        negatives.clear();
        if table.total() - table.weight(center) > 0.0 {
            while negatives.len() < cfg.negatives {
                let k = table.sample(&mut rng);
                if k != center {
                    negatives.push(k);
                }
            }
        }

        let (loss, grads) = cbow_ns_loss_grad(&space, center, &context, &negatives);
        losses.push(loss);
        for (row, g) in &grads.output {
            axpy(-lr, g, space.output_row_mut(*row));
        }
        for (row, g) in &grads.input {
            axpy(-lr, g, space.input_row_mut(*row));
        }
    }

    Ok(FinetuneRun {
        space,
        steps: cfg.total_steps,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::build_ledger;
    use crate::model::{DocumentParts, EntityMention, Span};
    use alloc::string::ToString;

    fn plain_doc(words: &[&str]) -> AnnotatedDocument {
        let n = words.len();
        AnnotatedDocument::new(DocumentParts {
            doc_id: "d".into(),
            tokens: words.iter().map(|s| s.to_string()).collect(),
            sentences: if n > 0 { vec![Span::new(0, n)] } else { vec![] },
            ..Default::default()
        })
        .unwrap()
    }

    fn pretrained(words: &[(&str, [f64; 2])]) -> EmbeddingSpace {
        let mut s = EmbeddingSpace::new(2).unwrap();
        for (w, v) in words {
            s.insert(w, v).unwrap();
        }
        s
    }

    #[test]
    fn insert_replaces_duplicates() {
        let mut s = EmbeddingSpace::new(2).unwrap();
        assert!(!s.insert("a", &[1.0, 0.0]).unwrap());
        assert!(s.insert("a", &[0.0, 1.0]).unwrap());
        assert_eq!(s.len(), 1);
        assert_eq!(s.vector("a"), Some(&[0.0, 1.0][..]));
        assert!(matches!(s.insert("b", &[1.0]), Err(EmbeddingError::Dimension { .. })));
        assert_eq!(EmbeddingSpace::new(0), Err(EmbeddingError::ZeroDimension));
    }

    #[test]
    fn entity_tokens_are_reinitialized() {
        let mut parts = plain_doc(&["the", "Alice", "Alice", "Alice", "she"]).to_parts();
        parts.entities = (1..4)
            .map(|i| EntityMention {
                span: Span::new(i, i + 1),
                label: "PERSON".into(),
            })
            .collect();
        parts.coref_chains = vec![vec![Span::new(1, 2), Span::new(4, 5)]];
        let doc = AnnotatedDocument::new(parts).unwrap();
        let ledger = build_ledger(&doc);
        assert_eq!(ledger.entities.len(), 1);

        let pre = pretrained(&[("the", [1.0, 2.0]), ("alice", [3.0, 4.0])]);
        let cfg = FinetuneConfig::default();
        let space = build_finetune_space(&doc, &ledger, &pre, &cfg, &BTreeSet::new()).unwrap();
        assert_eq!(space.words(), &["the", "alice", "she"]);
        assert_eq!(space.vector("the"), Some(&[1.0, 2.0][..]));
        let alice = space.vector("alice").unwrap();
        assert_ne!(alice, &[3.0, 4.0]);
        assert!(alice.iter().all(|x| x.abs() <= 0.25));
        assert!(space.output.iter().all(|&x| x == 0.0));

        let again = build_finetune_space(&doc, &ledger, &pre, &cfg, &BTreeSet::new()).unwrap();
        assert_eq!(space, again);
    }

    #[test]
    fn all_oov_rows_are_random() {
        let doc = plain_doc(&["x", "y"]);
        let ledger = build_ledger(&doc);
        let pre = pretrained(&[("z", [1.0, 1.0])]);
        let space =
            build_finetune_space(&doc, &ledger, &pre, &FinetuneConfig::default(), &BTreeSet::new())
                .unwrap();
        assert_eq!(space.len(), 2);
        assert!(space.input.iter().all(|x| x.abs() <= 0.25 && *x != 0.0));
    }

    #[test]
    fn retained_words_come_from_pretrained_only() {
        let doc = plain_doc(&["x"]);
        let ledger = build_ledger(&doc);
        let pre = pretrained(&[("dress", [1.0, 0.0])]);
        let retain: BTreeSet<String> = ["dress", "belt"].iter().map(|s| s.to_string()).collect();
        let space =
            build_finetune_space(&doc, &ledger, &pre, &FinetuneConfig::default(), &retain).unwrap();
        assert_eq!(space.words(), &["x", "dress"]);
    }

    #[test]
    fn min_count_can_empty_the_vocab() {
        let doc = plain_doc(&["x", "y"]);
        let ledger = build_ledger(&doc);
        let cfg = FinetuneConfig {
            min_count: 2,
            ..Default::default()
        };
        let pre = EmbeddingSpace::new(2).unwrap();
        assert_eq!(
            build_finetune_space(&doc, &ledger, &pre, &cfg, &BTreeSet::new()),
            Err(EmbeddingError::EmptyVocab)
        );
    }

    #[test]
    fn zero_vectors_loss_is_two_log_two() {
        let mut s = EmbeddingSpace::new(3).unwrap();
        for w in ["a", "b", "c"] {
            s.insert(w, &[0.0; 3]).unwrap();
        }
        let s = s.with_zero_output();
        let (loss, g) = cbow_ns_loss_grad(&s, 0, &[1], &[2]);
        assert!((loss - 2.0 * core::f64::consts::LN_2).abs() < 1e-15);
        // h = 0 and u = 0, so every gradient is zero even though σ(0) = 1/2
        assert!(g.input.iter().chain(&g.output).all(|(_, v)| v.iter().all(|&x| x == 0.0)));
        assert_eq!(g.output.iter().map(|(r, _)| *r).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn no_negatives_only_positive_term() {
        let mut s = EmbeddingSpace::new(2).unwrap();
        s.insert("a", &[0.3, -0.1]).unwrap();
        s.insert("b", &[0.2, 0.5]).unwrap();
        let mut s = s.with_zero_output();
        s.output_row_mut(0).copy_from_slice(&[0.7, 0.4]);
        let (loss, g) = cbow_ns_loss_grad(&s, 0, &[1], &[]);
        let score = 0.7 * 0.2 + 0.4 * 0.5;
        assert!((loss - libm::log1p(libm::exp(-score))).abs() < 1e-15);
        assert_eq!(g.output.len(), 1);
    }

    #[test]
    fn extreme_scores_stay_finite() {
        let mut s = EmbeddingSpace::new(1).unwrap();
        s.insert("a", &[1000.0]).unwrap();
        s.insert("b", &[1000.0]).unwrap();
        let mut s = s.with_zero_output();
        s.output_row_mut(0)[0] = -1000.0;
        s.output_row_mut(1)[0] = 1000.0;
        let (loss, g) = cbow_ns_loss_grad(&s, 0, &[1], &[1]);
        assert!(loss.is_finite() && loss > 1e5);
        assert!(g.input.iter().all(|(_, v)| v.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn zero_steps_is_identity() {
        let doc = plain_doc(&["a", "b", "c"]);
        let ledger = build_ledger(&doc);
        let pre = pretrained(&[("a", [1.0, 0.0])]);
        let cfg = FinetuneConfig {
            total_steps: 0,
            ..Default::default()
        };
        let space = build_finetune_space(&doc, &ledger, &pre, &cfg, &BTreeSet::new()).unwrap();
        let run = finetune(&doc, &space, &cfg).unwrap();
        assert_eq!(run.space, space);
        assert_eq!(run.steps, 0);
    }

    #[test]
    fn learning_rate_schedule() {
        let cfg = FinetuneConfig {
            total_steps: 11,
            initial_lr: 1.0,
            final_lr: 0.0,
            ..Default::default()
        };
        assert_eq!(cfg.learning_rate(0), 1.0);
        assert!((cfg.learning_rate(5) - 0.5).abs() < 1e-15);
        assert_eq!(cfg.learning_rate(10), 0.0);
    }

    #[test]
    fn unigram_table_skips_zero_counts() {
        let t = UnigramTable::new(&[0, 4, 0, 1], 1.0);
        assert_eq!(t.total(), 5.0);
        assert_eq!(t.weight(0), 0.0);
        let mut rng = rng_for(7, 0);
        for _ in 0..200 {
            let k = t.sample(&mut rng);
            assert!(k == 1 || k == 3);
        }
    }

    #[test]
    fn single_word_vocab_trains_without_negatives() {
        let doc = plain_doc(&["a", "a", "a"]);
        let ledger = build_ledger(&doc);
        let pre = pretrained(&[("a", [0.1, 0.2])]);
        let cfg = FinetuneConfig {
            total_steps: 10,
            ..Default::default()
        };
        let space = build_finetune_space(&doc, &ledger, &pre, &cfg, &BTreeSet::new()).unwrap();
        let run = finetune(&doc, &space, &cfg).unwrap();
        assert_eq!(run.steps, 10);
        assert_eq!(run.losses.len(), 10);
    }
}
