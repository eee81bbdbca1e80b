//! Six-column token format.
//!
//! One token per line with the tab-separated fields
//! `POSITION LEMMA UPOS XPOS HEAD DEPREL`. Comment lines start with `#`; a
//! `# text = ...` comment carries the gold surface realization as
//! whitespace-separated forms. Instances in a corpus are separated by a
//! blank line.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

const TEXT_KEY: &str = "text";

/// A single input token.
///
/// `head` is the position of the governing token, or 0 for the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub position: usize,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn new(
        position: usize,
        lemma: impl Into<String>,
        upos: impl Into<String>,
        xpos: impl Into<String>,
        head: usize,
        deprel: impl Into<String>,
    ) -> Self {
        Token {
            position,
            lemma: lemma.into(),
            upos: upos.into(),
            xpos: xpos.into(),
            head,
            deprel: deprel.into(),
        }
    }
}

/// A validated token sequence with an optional reference realization.
///
/// Construction goes through [`Instance::new`], which enforces that positions
/// are exactly `1..=n`, that there is a single root, and that the head
/// relation is acyclic. Tokens are kept in the order they were given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    tokens: Vec<Token>,
    gold_surface: Option<Vec<String>>,
    metadata: BTreeMap<String, String>,
}

impl Instance {
    pub fn new(
        tokens: Vec<Token>,
        gold_surface: Option<Vec<String>>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let report = validate_tokens(&tokens);
        if !report.ok {
            return Err(Error::Invalid(report.violations));
        }
        Ok(Instance {
            tokens,
            gold_surface,
            metadata,
        })
    }

    /// Builds an instance without gold surface or metadata.
    pub fn from_tokens(tokens: Vec<Token>) -> Result<Self> {
        Self::new(tokens, None, BTreeMap::new())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false for a constructed instance; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn gold_surface(&self) -> Option<&[String]> {
        self.gold_surface.as_deref()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// The token at a 1-based position.
    pub fn token_at(&self, position: usize) -> Option<&Token> {
        self.tokens.iter().find(|t| t.position == position)
    }

    /// Position of the unique root token.
    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .find(|t| t.head == 0)
            .map(|t| t.position)
            .expect("validated instance has a root")
    }

    /// Tokens sorted by position.
    pub fn tokens_by_position(&self) -> Vec<&Token> {
        let mut sorted: Vec<&Token> = self.tokens.iter().collect();
        sorted.sort_by_key(|t| t.position);
        sorted
    }

    pub fn with_gold_surface(mut self, gold: Option<Vec<String>>) -> Self {
        self.gold_surface = gold;
        self
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, String>) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn into_parts(self) -> (Vec<Token>, Option<Vec<String>>, BTreeMap<String, String>) {
        (self.tokens, self.gold_surface, self.metadata)
    }
}

/// A single broken rule found by [`validate_tokens`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub position: Option<usize>,
    pub message: String,
}

impl Violation {
    fn new(rule: &'static str, position: Option<usize>, message: impl Into<String>) -> Self {
        Violation {
            rule,
            position,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "{} (token {}): {}", self.rule, p, self.message),
            None => write!(f, "{}: {}", self.rule, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

fn bad_chars(s: &str) -> bool {
    s.contains(['\t', '\n', '\r'])
}

/// Checks every token and instance invariant, collecting all violations.
pub fn validate_tokens(tokens: &[Token]) -> ValidationReport {
    let mut violations = Vec::new();
    let n = tokens.len();

    if n == 0 {
        violations.push(Violation::new("empty", None, "instance has no tokens"));
        return ValidationReport::from_violations(violations);
    }

    for t in tokens {
        let pos = Some(t.position);
        if t.position == 0 {
            violations.push(Violation::new("position", pos, "position must be >= 1"));
        }
        if t.head != 0 && t.head == t.position {
            violations.push(Violation::new("self-loop", pos, "token is its own head"));
        }
        for (name, value) in [
            ("lemma", &t.lemma),
            ("upos", &t.upos),
            ("xpos", &t.xpos),
            ("deprel", &t.deprel),
        ] {
            if value.is_empty() {
                violations.push(Violation::new("field", pos, format!("empty {name}")));
            } else if bad_chars(value) {
                violations.push(Violation::new(
                    "field",
                    pos,
                    format!("{name} contains a tab or line break"),
                ));
            }
        }
    }

    // Positions must be exactly 1..=n.
    let mut seen = vec![false; n + 1];
    for t in tokens {
        if (1..=n).contains(&t.position) {
            if seen[t.position] {
                violations.push(Violation::new(
                    "duplicate-position",
                    Some(t.position),
                    "position occurs more than once",
                ));
            }
            seen[t.position] = true;
        } else if t.position != 0 {
            violations.push(Violation::new(
                "position",
                Some(t.position),
                format!("position out of range 1..={n}"),
            ));
        }
    }
    for (p, present) in seen.iter().enumerate().skip(1) {
        if !present {
            violations.push(Violation::new(
                "missing-position",
                Some(p),
                "position missing",
            ));
        }
    }

    for t in tokens {
        if t.head > n {
            violations.push(Violation::new(
                "head-range",
                Some(t.position),
                format!("head out of range: {} > {}", t.head, n),
            ));
        }
    }

    let roots = tokens.iter().filter(|t| t.head == 0).count();
    if roots == 0 {
        violations.push(Violation::new("root", None, "no root token (head 0)"));
    } else if roots > 1 {
        violations.push(Violation::new(
            "root",
            None,
            format!("{roots} root tokens; exactly one required"),
        ));
    }

    // Cycle detection only makes sense once positions and heads are sound.
    if violations.is_empty() {
        let mut head_of = vec![0usize; n + 1];
        for t in tokens {
            head_of[t.position] = t.head;
        }
        // 0 = unvisited, 1 = on current path, 2 = reaches root
        let mut state = vec![0u8; n + 1];
        state[0] = 2;
        for start in 1..=n {
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = head_of[cur];
            }
            if state[cur] == 1 {
                violations.push(Violation::new(
                    "cycle",
                    Some(cur),
                    "head relation contains a cycle",
                ));
                // Mark so the same cycle is reported once.
                for p in path {
                    state[p] = 2;
                }
                continue;
            }
            for p in path {
                state[p] = 2;
            }
        }
    }

    ValidationReport::from_violations(violations)
}

struct RawBlock {
    tokens: Vec<Token>,
    gold: Option<Vec<String>>,
    metadata: BTreeMap<String, String>,
}

fn parse_raw(block: &str) -> Result<RawBlock> {
    let mut tokens = Vec::new();
    let mut gold = None;
    let mut metadata = BTreeMap::new();
    let mut any = false;

    for (i, line) in block.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            if any {
                return Err(Error::Syntax {
                    line: lineno,
                    message: "blank line inside instance".into(),
                });
            }
            continue;
        }
        any = true;

        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            let (key, value) = match comment.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (comment, ""),
            };
            if key == TEXT_KEY {
                gold = Some(value.split_whitespace().map(str::to_owned).collect());
            } else {
                metadata.insert(key.to_owned(), value.to_owned());
            }
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::Syntax {
                line: lineno,
                message: format!("expected 6 tab-separated fields, found {}", fields.len()),
            });
        }
        let int = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Syntax {
                line: lineno,
                message: format!("{what} is not a non-negative integer: {s:?}"),
            })
        };
        tokens.push(Token {
            position: int(fields[0], "position")?,
            lemma: fields[1].to_owned(),
            upos: fields[2].to_owned(),
            xpos: fields[3].to_owned(),
            head: int(fields[4], "head")?,
            deprel: fields[5].to_owned(),
        });
    }

    if tokens.is_empty() {
        return Err(Error::EmptyBlock);
    }
    Ok(RawBlock {
        tokens,
        gold,
        metadata,
    })
}

/// Parses one instance block.
pub fn parse_instance(block: &str) -> Result<Instance> {
    let raw = parse_raw(block)?;
    Instance::new(raw.tokens, raw.gold, raw.metadata)
}

/// Parses a block and reports every problem instead of stopping at the
/// first; syntax errors show up as a single `syntax` violation.
pub fn validate_block(block: &str) -> ValidationReport {
    match parse_raw(block) {
        Ok(raw) => validate_tokens(&raw.tokens),
        Err(e) => ValidationReport::from_violations(vec![Violation::new(
            "syntax",
            None,
            e.to_string(),
        )]),
    }
}

/// Serializes an instance: `# text` first (when present), then other
/// metadata sorted by key, then token lines in position order.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    if let Some(gold) = &inst.gold_surface {
        out.push_str("# text = ");
        out.push_str(&gold.join(" "));
        out.push('\n');
    }
    for (k, v) in &inst.metadata {
        if v.is_empty() {
            out.push_str(&format!("# {k}\n"));
        } else {
            out.push_str(&format!("# {k} = {v}\n"));
        }
    }
    for t in inst.tokens_by_position() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            t.position, t.lemma, t.upos, t.xpos, t.head, t.deprel
        ));
    }
    out
}

/// Splits corpus text into instance blocks on blank lines.
pub fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

pub fn parse_corpus(text: &str) -> Result<Vec<Instance>> {
    split_blocks(text)
        .iter()
        .enumerate()
        .map(|(i, block)| parse_instance(block).map_err(|e| e.in_instance(i)))
        .collect()
}

/// Every instance is followed by a blank line.
pub fn serialize_corpus(corpus: &[Instance]) -> String {
    let mut out = String::new();
    for inst in corpus {
        out.push_str(&serialize_instance(inst));
        out.push('\n');
    }
    out
}
