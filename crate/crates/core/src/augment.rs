//! Vocabularies, overlap filtering of external corpora, and shuffled
//! training pairs.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::conllu::Instance;
use crate::deptree::{linearize_instance, shuffle};
use crate::{seeded_rng, Error, Result};

pub const UNK: &str = "<unk>";
pub const PAD: &str = "<blank>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Specials in index order 0..=3.
pub const SPECIALS: [&str; 4] = [UNK, PAD, BOS, EOS];

/// Metadata key that carries a pair's target inside a corpus file.
pub const TARGET_KEY: &str = "target";

/// An indexed symbol table with the four specials at indices 0..=3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Specials followed by `symbols` in the given order; duplicates and
    /// symbols equal to a special are skipped.
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            symbols: Vec::new(),
            index: HashMap::new(),
        };
        for s in SPECIALS {
            vocab.push(s.to_owned());
        }
        for s in symbols {
            vocab.push(s.into());
        }
        vocab
    }

    /// Keeps the `max_size` most frequent symbols, ties broken
    /// lexicographically.
    pub fn from_counts(counts: HashMap<String, u64>, max_size: usize) -> Self {
        let mut ranked: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(s, _)| !SPECIALS.contains(&s.as_str()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);
        Self::from_symbols(ranked.into_iter().map(|(s, _)| s))
    }

    fn push(&mut self, symbol: String) {
        if !self.index.contains_key(&symbol) {
            self.index.insert(symbol.clone(), self.symbols.len());
            self.symbols.push(symbol);
        }
    }

    /// Total size including specials.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn get(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    /// Index of `symbol`, or of [`UNK`] when absent.
    pub fn index_or_unk(&self, symbol: &str) -> usize {
        self.get(symbol).unwrap_or(0)
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    /// Membership among the non-special symbols.
    pub fn contains(&self, symbol: &str) -> bool {
        matches!(self.get(symbol), Some(i) if i >= SPECIALS.len())
    }

    /// One symbol per line, specials included.
    pub fn write_lines<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.symbols {
            writeln!(w, "{s}")?;
        }
        Ok(())
    }

    pub fn read_lines<R: BufRead>(r: R) -> Result<Self> {
        let lines = r.lines().collect::<std::io::Result<Vec<String>>>()?;
        if lines.len() < SPECIALS.len()
            || lines[..SPECIALS.len()]
                .iter()
                .zip(SPECIALS)
                .any(|(a, b)| a != b)
        {
            return Err(Error::InvalidArgument(
                "vocabulary file must start with the special symbols".into(),
            ));
        }
        Ok(Self::from_symbols(lines.into_iter().skip(SPECIALS.len())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VocabField {
    Lemma,
    /// Gold surface forms; instances without gold contribute nothing.
    Form,
}

/// Occurrence counts of arbitrary symbol values.
pub fn count_field_values<I, S>(values: I) -> HashMap<String, u64>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for v in values {
        let v = v.as_ref();
        match counts.get_mut(v) {
            Some(c) => *c += 1,
            None => {
                counts.insert(v.to_owned(), 1);
            }
        }
    }
    counts
}

pub fn count_field(corpus: &[Instance], field: VocabField) -> HashMap<String, u64> {
    match field {
        VocabField::Lemma => count_field_values(
            corpus
                .iter()
                .flat_map(|inst| inst.tokens().iter().map(|t| t.lemma.as_str())),
        ),
        VocabField::Form => count_field_values(
            corpus
                .iter()
                .flat_map(|inst| inst.gold_surface().unwrap_or_default()),
        ),
    }
}

/// The `max_size` most frequent values of `field`, preceded by the specials.
pub fn build_vocab(corpus: &[Instance], max_size: usize, field: VocabField) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::InvalidArgument("max_size must be >= 1".into()));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Vocabulary::from_counts(count_field(corpus, field), max_size))
}

/// Fraction of token occurrences whose lemma is a regular vocabulary symbol.
pub fn vocab_overlap(inst: &Instance, vocab: &Vocabulary) -> f64 {
    // Instances always hold at least one token.
    let hits = inst
        .tokens()
        .iter()
        .filter(|t| vocab.contains(&t.lemma))
        .count();
    hits as f64 / inst.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total: usize,
    pub kept: usize,
    pub threshold: f64,
}

/// Keeps instances whose overlap is at least `threshold`, preserving order.
pub fn filter_corpus(
    corpus: &[Instance],
    vocab: &Vocabulary,
    threshold: f64,
) -> Result<(Vec<Instance>, FilterStats)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let kept: Vec<Instance> = corpus
        .iter()
        .filter(|inst| vocab_overlap(inst, vocab) >= threshold)
        .cloned()
        .collect();
    let stats = FilterStats {
        total: corpus.len(),
        kept: kept.len(),
        threshold,
    };
    Ok((kept, stats))
}

/// A shuffled source instance and its gold-order target forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingPair {
    pub source: Instance,
    pub target: Vec<String>,
}

impl TrainingPair {
    pub fn new(source: Instance, target: Vec<String>) -> Result<Self> {
        if target.len() != source.len() {
            return Err(Error::LengthMismatch {
                expected: source.len(),
                actual: target.len(),
            });
        }
        Ok(TrainingPair { source, target })
    }

    /// The source with the target stored under the `target` metadata key,
    /// for writing pairs as an ordinary corpus.
    pub fn to_instance(&self) -> Instance {
        let mut meta: BTreeMap<String, String> = self.source.metadata().clone();
        meta.insert(TARGET_KEY.into(), self.target.join(" "));
        self.source.clone().with_metadata(meta)
    }

    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let mut meta = inst.metadata().clone();
        let target = meta.remove(TARGET_KEY).ok_or(Error::MissingGold)?;
        let target = target.split_whitespace().map(str::to_owned).collect();
        Self::new(inst.clone().with_metadata(meta), target)
    }
}

/// Shuffles a gold sentence into a source and keeps its forms as target.
pub fn make_training_pair(gold: &Instance, seed: u64) -> Result<TrainingPair> {
    let target = gold.gold_surface().ok_or(Error::MissingGold)?.to_vec();
    TrainingPair::new(shuffle(gold, seed), target)
}

/// Pairs for a whole corpus. Per-instance seeds are drawn in order from a
/// generator seeded with `seed`; with `linearize`, each shuffled source is
/// then reordered by a random depth-first traversal of its tree.
pub fn make_training_pairs(
    corpus: &[Instance],
    seed: u64,
    linearize: bool,
) -> Result<Vec<TrainingPair>> {
    let mut rng = seeded_rng(seed);
    corpus
        .iter()
        .enumerate()
        .map(|(i, gold)| {
            let shuffle_seed = rng.next_u64();
            let linearize_seed = rng.next_u64();
            let mut pair = make_training_pair(gold, shuffle_seed).map_err(|e| e.in_instance(i))?;
            if linearize {
                pair.source = linearize_instance(&pair.source, linearize_seed);
            }
            Ok(pair)
        })
        .collect()
}

/// Shuffles every instance, drawing per-instance seeds in order from a
/// generator seeded with `seed`.
pub fn shuffle_corpus(corpus: &[Instance], seed: u64) -> Vec<Instance> {
    let mut rng = seeded_rng(seed);
    corpus
        .iter()
        .map(|inst| shuffle(inst, rng.next_u64()))
        .collect()
}
