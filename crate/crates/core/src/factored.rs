//! Factored input encoding.
//!
//! Every source token is described by six factors (lemma, XPOS, position,
//! UPOS, head position, deprel), each with its own vocabulary and embedding
//! matrix. A token's dense representation is the concatenation of one row
//! from each matrix. Non-lemma embedding widths follow `floor(|V|^0.7)`.

use std::borrow::Cow;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{count_field_values, TrainingPair, Vocabulary};
use crate::conllu::Instance;
use crate::delemma::{append_forms, DelemmaMap, SourceToken};
use crate::{seeded_rng, Error, Result};

pub const DEFAULT_SEPARATOR: &str = "\u{FFE8}";
pub const DEFAULT_LEMMA_EMBEDDING: usize = 300;
pub const DEFAULT_LEMMA_VOCAB: usize = 30_000;
pub const DEFAULT_POSITION_CAP: usize = 99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Lemma,
    Xpos,
    Position,
    Upos,
    Head,
    Deprel,
}

impl Factor {
    /// Schema order.
    pub const ALL: [Factor; 6] = [
        Factor::Lemma,
        Factor::Xpos,
        Factor::Position,
        Factor::Upos,
        Factor::Head,
        Factor::Deprel,
    ];

    /// Column order of exported source files (token-file field order).
    pub const EXPORT_COLUMNS: [Factor; 6] = [
        Factor::Lemma,
        Factor::Upos,
        Factor::Xpos,
        Factor::Position,
        Factor::Head,
        Factor::Deprel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Lemma => "lemma",
            Factor::Xpos => "xpos",
            Factor::Position => "position",
            Factor::Upos => "upos",
            Factor::Head => "head",
            Factor::Deprel => "deprel",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Factor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown factor {s:?}")))
    }
}

/// `floor(vocab_size^0.7)`, at least 1.
pub fn embedding_size_heuristic(vocab_size: usize) -> Result<usize> {
    if vocab_size == 0 {
        return Err(Error::InvalidArgument("vocabulary size must be >= 1".into()));
    }
    let exact = (vocab_size as f64).powf(0.7);
    // powf can land just below an exact integer (e.g. 1024^0.7 = 128).
    let nearest = exact.round();
    let size = if (exact - nearest).abs() < 1e-9 {
        nearest
    } else {
        exact.floor()
    };
    Ok((size as usize).max(1))
}

/// String value of `factor` for a source token. Position and head values
/// above `cap` are clamped to `cap`.
pub fn factor_value(token: &SourceToken, factor: Factor, cap: usize) -> Cow<'_, str> {
    match factor {
        Factor::Lemma => Cow::Borrowed(&token.lemma),
        Factor::Xpos => Cow::Borrowed(&token.xpos),
        Factor::Upos => Cow::Borrowed(&token.upos),
        Factor::Deprel => Cow::Borrowed(&token.deprel),
        Factor::Position => Cow::Owned(token.position.min(cap).to_string()),
        Factor::Head => Cow::Owned(token.head.min(cap).to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSpec {
    pub factor: Factor,
    pub vocab: Vocabulary,
    pub embedding_size: usize,
}

#[derive(Clone, Debug)]
pub struct SchemaConfig {
    pub lemma_vocab_size: usize,
    pub lemma_embedding: usize,
    pub position_cap: usize,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            lemma_vocab_size: DEFAULT_LEMMA_VOCAB,
            lemma_embedding: DEFAULT_LEMMA_EMBEDDING,
            position_cap: DEFAULT_POSITION_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSchema {
    factors: Vec<FactorSpec>,
    position_cap: usize,
}

/// One vocabulary index per factor, in schema order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredToken(pub Vec<usize>);

impl FactorSchema {
    /// Assembles a schema from vocabularies given in schema order.
    pub fn new(
        vocabs: Vec<(Factor, Vocabulary)>,
        lemma_embedding: usize,
        position_cap: usize,
    ) -> Result<Self> {
        let names: Vec<Factor> = vocabs.iter().map(|(f, _)| *f).collect();
        if names != Factor::ALL {
            return Err(Error::InvalidArgument(format!(
                "factors must be {:?}, got {:?}",
                Factor::ALL,
                names
            )));
        }
        if lemma_embedding == 0 {
            return Err(Error::InvalidArgument("lemma embedding must be >= 1".into()));
        }
        let factors = vocabs
            .into_iter()
            .map(|(factor, vocab)| {
                let embedding_size = match factor {
                    Factor::Lemma => lemma_embedding,
                    _ => embedding_size_heuristic(vocab.len())?,
                };
                Ok(FactorSpec {
                    factor,
                    vocab,
                    embedding_size,
                })
            })
            .collect::<Result<_>>()?;
        Ok(FactorSchema {
            factors,
            position_cap,
        })
    }

    /// Builds vocabularies from source sequences (usually the output of
    /// [`append_forms`]). The lemma vocabulary is capped at
    /// `lemma_vocab_size`; position and head cover `0..=position_cap`.
    pub fn build(sources: &[Vec<SourceToken>], config: &SchemaConfig) -> Result<Self> {
        if config.lemma_vocab_size == 0 {
            return Err(Error::InvalidArgument("vocab size must be >= 1".into()));
        }
        let tokens = || sources.iter().flatten();
        let index_vocab = || Vocabulary::from_symbols((0..=config.position_cap).map(|i| i.to_string()));
        let vocabs = Factor::ALL
            .into_iter()
            .map(|f| {
                let vocab = match f {
                    Factor::Lemma => Vocabulary::from_counts(
                        count_field_values(tokens().map(|t| t.lemma.as_str())),
                        config.lemma_vocab_size,
                    ),
                    Factor::Position | Factor::Head => index_vocab(),
                    _ => Vocabulary::from_counts(
                        count_field_values(
                            tokens().map(|t| factor_value(t, f, config.position_cap).into_owned()),
                        ),
                        usize::MAX,
                    ),
                };
                (f, vocab)
            })
            .collect();
        Self::new(vocabs, config.lemma_embedding, config.position_cap)
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn position_cap(&self) -> usize {
        self.position_cap
    }

    pub fn spec(&self, factor: Factor) -> &FactorSpec {
        self.factors
            .iter()
            .find(|s| s.factor == factor)
            .expect("schema holds every factor")
    }

    /// Sum of the per-factor embedding sizes.
    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|s| s.embedding_size).sum()
    }

    /// Unknown values map to the unknown special of each factor.
    pub fn encode_token(&self, token: &SourceToken) -> FactoredToken {
        FactoredToken(
            self.factors
                .iter()
                .map(|s| {
                    s.vocab
                        .index_or_unk(&factor_value(token, s.factor, self.position_cap))
                })
                .collect(),
        )
    }

    pub fn encode_sequence(&self, tokens: &[SourceToken]) -> Vec<FactoredToken> {
        tokens.iter().map(|t| self.encode_token(t)).collect()
    }

    /// Encodes the instance's own tokens, in their given order.
    pub fn encode_instance(&self, inst: &Instance) -> Vec<FactoredToken> {
        inst.tokens()
            .iter()
            .map(|t| self.encode_token(&SourceToken::from(t)))
            .collect()
    }

    /// Writes the schema JSON to `path` and one vocabulary file per factor
    /// next to it, named `<stem>.<factor>.vocab`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = path.parent().unwrap_or(Path::new(""));
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("schema")
            .to_owned();
        let mut entries = Vec::new();
        for spec in &self.factors {
            let file = format!("{stem}.{}.vocab", spec.factor);
            spec.vocab
                .write_lines(BufWriter::new(File::create(dir.join(&file))?))?;
            entries.push(SchemaEntry {
                name: spec.factor,
                vocab_file: file,
                vocab_size: spec.vocab.len(),
                embedding_size: spec.embedding_size,
            });
        }
        let doc = SchemaFile {
            factors: entries,
            total_dim: self.total_dim(),
            position_cap: self.position_cap,
            columns: Factor::EXPORT_COLUMNS.to_vec(),
        };
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &doc)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: SchemaFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut vocabs = Vec::new();
        let mut lemma_embedding = 0;
        for e in &doc.factors {
            let file: PathBuf = dir.join(&e.vocab_file);
            let vocab = Vocabulary::read_lines(BufReader::new(File::open(file)?))?;
            if vocab.len() != e.vocab_size {
                return Err(Error::InvalidArgument(format!(
                    "vocabulary {} has {} symbols, schema says {}",
                    e.vocab_file,
                    vocab.len(),
                    e.vocab_size
                )));
            }
            if e.name == Factor::Lemma {
                lemma_embedding = e.embedding_size;
            }
            vocabs.push((e.name, vocab));
        }
        let schema = Self::new(vocabs, lemma_embedding, doc.position_cap)?;
        if schema.total_dim() != doc.total_dim {
            return Err(Error::InvalidArgument(format!(
                "total_dim {} does not match factor sizes ({})",
                doc.total_dim,
                schema.total_dim()
            )));
        }
        Ok(schema)
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaEntry {
    name: Factor,
    vocab_file: String,
    vocab_size: usize,
    embedding_size: usize,
}

#[derive(Serialize, Deserialize)]
struct SchemaFile {
    factors: Vec<SchemaEntry>,
    total_dim: usize,
    position_cap: usize,
    /// Factor order of the fields in exported source files.
    columns: Vec<Factor>,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// One embedding matrix per factor, shaped `vocab size x embedding size`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    factors: Vec<Factor>,
    matrices: Vec<Matrix>,
}

impl EmbeddingSet {
    /// Uniform values in `[-0.1, 0.1]` from the seeded generator.
    pub fn init(schema: &FactorSchema, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let matrices = schema
            .factors()
            .iter()
            .map(|s| {
                let rows = s.vocab.len();
                let cols = s.embedding_size;
                Matrix {
                    rows,
                    cols,
                    data: (0..rows * cols).map(|_| rng.gen_range(-0.1..=0.1)).collect(),
                }
            })
            .collect();
        EmbeddingSet {
            factors: schema.factors().iter().map(|s| s.factor).collect(),
            matrices,
        }
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn dim(&self) -> usize {
        self.matrices.iter().map(|m| m.cols).sum()
    }

    /// Concatenates the selected row of every factor matrix.
    pub fn embed(&self, token: &FactoredToken) -> Result<Vec<f64>> {
        if token.0.len() != self.matrices.len() {
            return Err(Error::LengthMismatch {
                expected: self.matrices.len(),
                actual: token.0.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim());
        for ((m, &idx), f) in self.matrices.iter().zip(&token.0).zip(&self.factors) {
            if idx >= m.rows {
                return Err(Error::IndexOutOfRange {
                    factor: f.name().into(),
                    index: idx,
                    size: m.rows,
                });
            }
            out.extend_from_slice(m.row(idx));
        }
        Ok(out)
    }
}

fn check_field(value: &str, separator: &str) -> Result<()> {
    if value.contains(separator) {
        return Err(Error::SeparatorCollision {
            separator: separator.into(),
            token: value.into(),
        });
    }
    if value.is_empty() || value.contains(char::is_whitespace) {
        return Err(Error::SeparatorCollision {
            separator: " ".into(),
            token: value.into(),
        });
    }
    Ok(())
}

/// One source line: tokens joined by spaces, factors joined by `separator`
/// in [`Factor::EXPORT_COLUMNS`] order.
pub fn source_line(tokens: &[SourceToken], separator: &str, cap: usize) -> Result<String> {
    let mut words = Vec::with_capacity(tokens.len());
    for t in tokens {
        let fields = Factor::EXPORT_COLUMNS
            .iter()
            .map(|&f| {
                let v = factor_value(t, f, cap);
                check_field(&v, separator)?;
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        words.push(fields.join(separator));
    }
    Ok(words.join(" "))
}

/// Splits an exported source line back into per-token factor strings
/// (export column order).
pub fn parse_source_line(line: &str, separator: &str) -> Result<Vec<Vec<String>>> {
    line.split(' ')
        .filter(|w| !w.is_empty())
        .map(|w| {
            let fields: Vec<String> = w.split(separator).map(str::to_owned).collect();
            if fields.len() != Factor::EXPORT_COLUMNS.len() {
                return Err(Error::InvalidArgument(format!(
                    "token {w:?} has {} factors, expected {}",
                    fields.len(),
                    Factor::EXPORT_COLUMNS.len()
                )));
            }
            Ok(fields)
        })
        .collect()
}

/// Source sequences for a set of pairs: tokens, separator, suggestions.
pub fn pair_sources(pairs: &[TrainingPair], map: &DelemmaMap) -> Vec<Vec<SourceToken>> {
    pairs.iter().map(|p| append_forms(&p.source, map)).collect()
}

/// Line-aligned source and target file contents.
pub fn export_factored(
    pairs: &[TrainingPair],
    schema: &FactorSchema,
    map: &DelemmaMap,
    separator: &str,
) -> Result<(String, String)> {
    if separator.is_empty() || separator.contains(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!(
            "separator {separator:?} must be non-empty and contain no whitespace"
        )));
    }
    let mut source = String::new();
    let mut target = String::new();
    for (i, pair) in pairs.iter().enumerate() {
        if pair.target.len() != pair.source.len() {
            return Err(Error::LengthMismatch {
                expected: pair.source.len(),
                actual: pair.target.len(),
            }
            .in_instance(i));
        }
        let seq = append_forms(&pair.source, map);
        source.push_str(&source_line(&seq, separator, schema.position_cap()).map_err(|e| e.in_instance(i))?);
        source.push('\n');
        for form in &pair.target {
            check_field(form, separator).map_err(|e| e.in_instance(i))?;
        }
        target.push_str(&pair.target.join(" "));
        target.push('\n');
    }
    Ok((source, target))
}
