use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use srp::augment::{build_vocab, filter_corpus, make_training_pairs, shuffle_corpus, TrainingPair, VocabField};
use srp::conllu::{parse_corpus, serialize_corpus, split_blocks, validate_block, Instance};
use srp::delemma::{coverage_counts, DelemmaMap};
use srp::factored::{export_factored, pair_sources, FactorSchema, SchemaConfig, DEFAULT_SEPARATOR};
use srp::metrics::evaluate_lines;
use srp::realizer::{realize_identity, realize_oracle, realize_tree, PrecedenceTable};

/// Surface realization data pipeline: shuffling, suggestion maps, corpus
/// filtering, factored export, baseline realizers and evaluation.
#[derive(Parser)]
#[command(name = "srp", version)]
struct Cli {
    #[command(flatten)]
    config: Config,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Seed for every random choice in the pipeline.
    #[arg(long, global = true, env = "SRP_SEED", default_value_t = 0)]
    seed: u64,

    /// Minimum vocabulary overlap kept by `filter`.
    #[arg(long = "threshold", global = true, env = "SRP_OVERLAP_THRESHOLD", default_value_t = 0.95)]
    overlap_threshold: f64,

    /// Lemma vocabulary cap for `export`.
    #[arg(long, global = true, env = "SRP_VOCAB_SIZE", default_value_t = 30_000)]
    vocab_size: usize,

    #[arg(long, global = true, env = "SRP_LEMMA_EMBEDDING", default_value_t = 300)]
    lemma_embedding: usize,

    /// Factor separator in exported source files.
    #[arg(long, global = true, env = "SRP_SEPARATOR", default_value = DEFAULT_SEPARATOR)]
    separator: String,

    /// Largest position/head value with its own symbol.
    #[arg(long, global = true, env = "SRP_POSITION_CAP", default_value_t = 99)]
    position_cap: usize,
}

impl Config {
    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.overlap_threshold) {
            bail!("--threshold must be in [0, 1], got {}", self.overlap_threshold);
        }
        if self.vocab_size == 0 || self.lemma_embedding == 0 || self.position_cap == 0 {
            bail!("--vocab-size, --lemma-embedding and --position-cap must be >= 1");
        }
        if self.separator.is_empty() || self.separator.contains(char::is_whitespace) {
            bail!("--separator must be non-empty and contain no whitespace");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Identity,
    Tree,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Check every instance of a corpus; exits non-zero on any violation.
    Validate { corpus: PathBuf },

    /// Shuffle every instance into a task input.
    Shuffle {
        corpus: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },

    /// Build a (lemma, xpos) -> form map from a gold corpus.
    BuildMap {
        gold: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },

    /// Fraction of gold tokens whose form the map suggests.
    Coverage { map: PathBuf, gold: PathBuf },

    /// Keep instances whose lemmas overlap the in-domain vocabulary.
    Filter {
        corpus: PathBuf,
        #[arg(long)]
        vocab_from: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the statistics JSON (default: standard error).
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },

    /// Shuffled source / gold target pairs from gold corpora.
    Pairs {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        /// Reorder each shuffled source by a random depth-first traversal.
        #[arg(long)]
        linearize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },

    /// Write factored source/target files and the factor schema.
    Export {
        pairs: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        schema_out: PathBuf,
        #[arg(long)]
        source_out: PathBuf,
        #[arg(long)]
        target_out: PathBuf,
    },

    /// Realize sentences with a deterministic baseline.
    Realize {
        corpus: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        mode: Mode,
        /// Precedence table JSON for tree mode.
        #[arg(long)]
        precedence: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },

    /// Score hypotheses against references (one sentence per line).
    Evaluate {
        hypotheses: PathBuf,
        references: PathBuf,
        /// Also write the JSON report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<Instance>> {
    parse_corpus(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_map(path: &Path) -> Result<DelemmaMap> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    DelemmaMap::read_tsv(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn lines(sentences: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.join(" "));
        out.push('\n');
    }
    out
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = &cli.config;
    cfg.check()?;

    match cli.command {
        Command::Validate { corpus } => {
            let text = read(&corpus)?;
            let reports: Vec<_> = split_blocks(&text).iter().map(|b| validate_block(b)).collect();
            let failed: Vec<usize> = reports
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.ok)
                .map(|(i, _)| i)
                .collect();
            let body = reports
                .iter()
                .enumerate()
                .map(|(i, r)| json!({ "instance": i, "ok": r.ok, "violations": r.violations }))
                .collect::<Vec<_>>();
            write_out(None, &format!("{}\n", serde_json::to_string_pretty(&body)?))?;
            if !failed.is_empty() {
                eprintln!("{} of {} instances invalid: {:?}", failed.len(), reports.len(), failed);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Shuffle { corpus, output } => {
            let shuffled = shuffle_corpus(&read_corpus(&corpus)?, cfg.seed);
            write_out(output.as_deref(), &serialize_corpus(&shuffled))?;
        }
        Command::BuildMap { gold, output } => {
            let map = DelemmaMap::build(&read_corpus(&gold)?)?;
            write_out(output.as_deref(), &map.to_tsv())?;
        }
        Command::Coverage { map, gold } => {
            let cov = coverage_counts(&read_map(&map)?, &read_corpus(&gold)?)?;
            let body = json!({ "coverage": cov.fraction(), "tokens": cov.tokens, "covered": cov.covered });
            write_out(None, &format!("{body}\n"))?;
        }
        Command::Filter {
            corpus,
            vocab_from,
            output,
            stats_out,
        } => {
            let vocab = build_vocab(&read_corpus(&vocab_from)?, usize::MAX, VocabField::Lemma)?;
            let (kept, stats) = filter_corpus(&read_corpus(&corpus)?, &vocab, cfg.overlap_threshold)?;
            write_out(output.as_deref(), &serialize_corpus(&kept))?;
            let stats = format!("{}\n", serde_json::to_string(&stats)?);
            match stats_out {
                Some(p) => fs::write(&p, stats).with_context(|| format!("writing {}", p.display()))?,
                None => eprint!("{stats}"),
            }
        }
        Command::Pairs {
            corpora,
            linearize,
            output,
        } => {
            let mut gold = Vec::new();
            for path in &corpora {
                gold.extend(read_corpus(path)?);
            }
            let pairs = make_training_pairs(&gold, cfg.seed, linearize)?;
            let insts: Vec<Instance> = pairs.iter().map(TrainingPair::to_instance).collect();
            write_out(output.as_deref(), &serialize_corpus(&insts))?;
        }
        Command::Export {
            pairs,
            map,
            schema_out,
            source_out,
            target_out,
        } => {
            let pairs = read_corpus(&pairs)?
                .iter()
                .enumerate()
                .map(|(i, inst)| TrainingPair::from_instance(inst).map_err(|e| e.in_instance(i)))
                .collect::<srp::Result<Vec<_>>>()?;
            let map = read_map(&map)?;
            let schema = FactorSchema::build(
                &pair_sources(&pairs, &map),
                &SchemaConfig {
                    lemma_vocab_size: cfg.vocab_size,
                    lemma_embedding: cfg.lemma_embedding,
                    position_cap: cfg.position_cap,
                },
            )?;
            let (source, target) = export_factored(&pairs, &schema, &map, &cfg.separator)?;
            schema.save(&schema_out)?;
            write_out(Some(&source_out), &source)?;
            write_out(Some(&target_out), &target)?;
        }
        Command::Realize {
            corpus,
            map,
            mode,
            precedence,
            output,
        } => {
            let corpus = read_corpus(&corpus)?;
            let map = read_map(&map)?;
            let table = match precedence {
                Some(p) => PrecedenceTable::from_json(&read(&p)?)?,
                None => PrecedenceTable::default(),
            };
            let realized = corpus
                .iter()
                .enumerate()
                .map(|(i, inst)| match mode {
                    Mode::Identity => Ok(realize_identity(inst, &map)),
                    Mode::Tree => Ok(realize_tree(inst, &map, &table)),
                    Mode::Oracle => TrainingPair::from_instance(inst)
                        .and_then(|p| realize_oracle(&p))
                        .map_err(|e| e.in_instance(i)),
                })
                .collect::<srp::Result<Vec<_>>>()?;
            write_out(output.as_deref(), &lines(realized))?;
        }
        Command::Evaluate {
            hypotheses,
            references,
            output,
        } => {
            let report = evaluate_lines(&read(&hypotheses)?, &read(&references)?)?;
            let body = format!("{}\n", serde_json::to_string_pretty(&report)?);
            if let Some(p) = output {
                fs::write(&p, &body).with_context(|| format!("writing {}", p.display()))?;
            }
            write_out(None, &body)?;
            eprint!("{}", report.to_table());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
