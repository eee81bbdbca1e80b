//! `(lemma, xpos) -> form` suggestion maps.
//!
//! A map is built by counting aligned `(token, gold form)` observations. Each
//! key holds its forms in canonical order: count descending, then form
//! ascending. Maps persist as a four-column TSV `lemma xpos form count`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::conllu::{Instance, Token};
use crate::{Error, Result};

/// Reserved symbol placed between source tokens and appended suggestions.
pub const SEPARATOR_SYMBOL: &str = "<sep>";

/// Deprel assigned to appended suggestion tokens.
pub const SUGGEST_DEPREL: &str = "suggest";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormCount {
    pub form: String,
    pub count: u64,
}

type Key = (String, String);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DelemmaMap {
    entries: BTreeMap<Key, Vec<FormCount>>,
}

fn canonical(forms: HashMap<String, u64>) -> Vec<FormCount> {
    let mut list: Vec<FormCount> = forms
        .into_iter()
        .map(|(form, count)| FormCount { form, count })
        .collect();
    list.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.form.cmp(&b.form)));
    list
}

#[derive(Default)]
struct Counter(HashMap<Key, HashMap<String, u64>>);

impl Counter {
    fn add(&mut self, lemma: &str, xpos: &str, form: &str, count: u64) {
        *self
            .0
            .entry((lemma.to_owned(), xpos.to_owned()))
            .or_default()
            .entry(form.to_owned())
            .or_default() += count;
    }

    fn add_map(&mut self, map: &DelemmaMap) {
        for ((lemma, xpos), forms) in &map.entries {
            for fc in forms {
                self.add(lemma, xpos, &fc.form, fc.count);
            }
        }
    }

    fn finish(self) -> DelemmaMap {
        DelemmaMap {
            entries: self
                .0
                .into_iter()
                .map(|(k, forms)| (k, canonical(forms)))
                .collect(),
        }
    }
}

/// Pairs each token (in position order) with its gold form.
pub(crate) fn aligned_gold(inst: &Instance) -> Result<Vec<(&Token, &str)>> {
    let gold = inst.gold_surface().ok_or(Error::MissingGold)?;
    if gold.len() != inst.len() {
        return Err(Error::LengthMismatch {
            expected: inst.len(),
            actual: gold.len(),
        });
    }
    Ok(inst
        .tokens_by_position()
        .into_iter()
        .zip(gold.iter().map(String::as_str))
        .collect())
}

impl DelemmaMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts `(lemma, xpos) -> form` over a gold-aligned corpus.
    pub fn build(corpus: &[Instance]) -> Result<Self> {
        let mut counter = Counter::default();
        for (i, inst) in corpus.iter().enumerate() {
            for (tok, form) in aligned_gold(inst).map_err(|e| e.in_instance(i))? {
                counter.add(&tok.lemma, &tok.xpos, form, 1);
            }
        }
        Ok(counter.finish())
    }

    /// Sums counts per `(key, form)`. Commutative and associative.
    pub fn merge(&self, other: &DelemmaMap) -> DelemmaMap {
        let mut counter = Counter::default();
        counter.add_map(self);
        counter.add_map(other);
        counter.finish()
    }

    /// All candidate forms in canonical order; empty when the key is absent.
    pub fn lookup(&self, lemma: &str, xpos: &str) -> Vec<&str> {
        self.entry(lemma, xpos)
            .iter()
            .map(|fc| fc.form.as_str())
            .collect()
    }

    pub fn entry(&self, lemma: &str, xpos: &str) -> &[FormCount] {
        // BTreeMap<(String, String), _> cannot be queried with borrowed
        // tuples, so allocate the key.
        self.entries
            .get(&(lemma.to_owned(), xpos.to_owned()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn most_frequent(&self, lemma: &str, xpos: &str) -> Option<&str> {
        self.entry(lemma, xpos).first().map(|fc| fc.form.as_str())
    }

    /// Number of `(lemma, xpos)` keys.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &[FormCount])> {
        self.entries
            .iter()
            .map(|((l, x), forms)| (l.as_str(), x.as_str(), forms.as_slice()))
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (lemma, xpos, forms) in self.iter() {
            for fc in forms {
                writeln!(w, "{lemma}\t{xpos}\t{}\t{}", fc.form, fc.count)?;
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("map strings are UTF-8")
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut entries: HashMap<Key, HashMap<String, u64>> = HashMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::MapFormat {
                line: lineno,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [lemma, xpos, form, count] = fields[..] else {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            };
            let count: u64 = count
                .parse()
                .map_err(|_| err(format!("invalid count {count:?}")))?;
            if count == 0 {
                return Err(err("count must be >= 1".into()));
            }
            let forms = entries
                .entry((lemma.to_owned(), xpos.to_owned()))
                .or_default();
            if forms.insert(form.to_owned(), count).is_some() {
                return Err(err(format!("duplicate form {form:?}")));
            }
        }
        Ok(DelemmaMap {
            entries: entries
                .into_iter()
                .map(|(k, forms)| (k, canonical(forms)))
                .collect(),
        })
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        Self::read_tsv(text.as_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub tokens: usize,
    pub covered: usize,
}

impl Coverage {
    /// An empty corpus is vacuously covered.
    pub fn fraction(&self) -> f64 {
        if self.tokens == 0 {
            1.0
        } else {
            self.covered as f64 / self.tokens as f64
        }
    }
}

/// Counts tokens whose gold form is among the map's candidates.
pub fn coverage_counts(map: &DelemmaMap, corpus: &[Instance]) -> Result<Coverage> {
    let mut cov = Coverage {
        tokens: 0,
        covered: 0,
    };
    for (i, inst) in corpus.iter().enumerate() {
        for (tok, form) in aligned_gold(inst).map_err(|e| e.in_instance(i))? {
            cov.tokens += 1;
            if map
                .entry(&tok.lemma, &tok.xpos)
                .iter()
                .any(|fc| fc.form == form)
            {
                cov.covered += 1;
            }
        }
    }
    Ok(cov)
}

pub fn coverage(map: &DelemmaMap, corpus: &[Instance]) -> Result<f64> {
    coverage_counts(map, corpus).map(|c| c.fraction())
}

/// One element of a model source sequence: an input token, the separator,
/// or an appended suggestion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceToken {
    /// Lemma for input tokens; the suggested form for suggestions.
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub position: usize,
    pub head: usize,
    pub deprel: String,
}

impl From<&Token> for SourceToken {
    fn from(t: &Token) -> Self {
        SourceToken {
            lemma: t.lemma.clone(),
            upos: t.upos.clone(),
            xpos: t.xpos.clone(),
            position: t.position,
            head: t.head,
            deprel: t.deprel.clone(),
        }
    }
}

impl SourceToken {
    pub fn separator() -> Self {
        SourceToken {
            lemma: SEPARATOR_SYMBOL.into(),
            upos: SEPARATOR_SYMBOL.into(),
            xpos: SEPARATOR_SYMBOL.into(),
            position: 0,
            head: 0,
            deprel: SEPARATOR_SYMBOL.into(),
        }
    }

    fn suggestion(form: &str, trigger: &Token) -> Self {
        SourceToken {
            lemma: form.to_owned(),
            upos: trigger.upos.clone(),
            xpos: trigger.xpos.clone(),
            position: 0,
            head: 0,
            deprel: SUGGEST_DEPREL.into(),
        }
    }
}

/// The instance's tokens (in their given order), then [`SEPARATOR_SYMBOL`],
/// then every candidate form of every token.
///
/// Suggestions copy UPOS and XPOS from the token that triggered them and use
/// position 0, head 0 and deprel [`SUGGEST_DEPREL`].
pub fn append_forms(inst: &Instance, map: &DelemmaMap) -> Vec<SourceToken> {
    let mut out: Vec<SourceToken> = inst.tokens().iter().map(SourceToken::from).collect();
    out.push(SourceToken::separator());
    for tok in inst.tokens() {
        for fc in map.entry(&tok.lemma, &tok.xpos) {
            out.push(SourceToken::suggestion(&fc.form, tok));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(words: &[(&str, &str, &str)]) -> Instance {
        // Flat tree: first token is the root, others attach to it.
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, (lemma, xpos, _))| {
                let head = if i == 0 { 0 } else { 1 };
                Token::new(i + 1, *lemma, "X", *xpos, head, if i == 0 { "root" } else { "dep" })
            })
            .collect();
        Instance::from_tokens(tokens)
            .unwrap()
            .with_gold_surface(Some(words.iter().map(|w| w.2.to_owned()).collect()))
    }

    #[test]
    fn single_observation() {
        let map = DelemmaMap::build(&[sentence(&[("be", "VBZ", "is")])]).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(
            map.entry("be", "VBZ"),
            [FormCount {
                form: "is".into(),
                count: 1
            }]
        );
    }

    #[test]
    fn canonical_order_by_count() {
        let corpus = vec![
            sentence(&[("be", "VBZ", "is"), ("be", "VBZ", "'s")]),
            sentence(&[("be", "VBZ", "is")]),
            sentence(&[("be", "VBZ", "is")]),
        ];
        let map = DelemmaMap::build(&corpus).unwrap();
        let entry: Vec<(&str, u64)> = map
            .entry("be", "VBZ")
            .iter()
            .map(|fc| (fc.form.as_str(), fc.count))
            .collect();
        assert_eq!(entry, [("is", 3), ("'s", 1)]);
        assert_eq!(map.lookup("be", "VBZ"), ["is", "'s"]);
        assert!(map.lookup("be", "VBD").is_empty());
        assert_eq!(map.most_frequent("be", "VBZ"), Some("is"));
    }

    #[test]
    fn ties_break_lexicographically() {
        let corpus = vec![sentence(&[("x", "X", "b"), ("x", "X", "a")])];
        let map = DelemmaMap::build(&corpus).unwrap();
        assert_eq!(map.lookup("x", "X"), ["a", "b"]);
    }

    #[test]
    fn build_requires_gold() {
        let inst = sentence(&[("be", "VBZ", "is")]).with_gold_surface(None);
        assert!(matches!(
            DelemmaMap::build(&[inst]),
            Err(Error::InInstance { index: 0, .. })
        ));
        let short = sentence(&[("be", "VBZ", "is"), ("a", "DT", "a")])
            .with_gold_surface(Some(vec!["is".into()]));
        assert!(DelemmaMap::build(&[short]).is_err());
    }

    #[test]
    fn merge_identity_and_union() {
        let a = DelemmaMap::build(&[sentence(&[("be", "VBZ", "is")])]).unwrap();
        let b = DelemmaMap::build(&[sentence(&[("dog", "NNS", "dogs")])]).unwrap();
        assert_eq!(a.merge(&DelemmaMap::new()), a);
        let ab = a.merge(&b);
        assert_eq!(ab.len(), 2);
        assert_eq!(ab.lookup("dog", "NNS"), ["dogs"]);
        assert_eq!(ab, b.merge(&a));
    }

    #[test]
    fn coverage_cases() {
        let corpus = vec![sentence(&[("be", "VBZ", "is"), ("dog", "NN", "dog")])];
        let map = DelemmaMap::build(&corpus).unwrap();
        assert_eq!(coverage(&map, &corpus).unwrap(), 1.0);
        assert_eq!(coverage(&DelemmaMap::new(), &corpus).unwrap(), 0.0);
        let half = DelemmaMap::build(&[sentence(&[("be", "VBZ", "is")])]).unwrap();
        assert_eq!(coverage(&half, &corpus).unwrap(), 0.5);
        assert_eq!(coverage(&map, &[]).unwrap(), 1.0);
    }

    #[test]
    fn append_forms_layout() {
        let corpus = vec![
            sentence(&[("be", "VBZ", "is"), ("be", "VBZ", "'s")]),
            sentence(&[("be", "VBZ", "is")]),
        ];
        let map = DelemmaMap::build(&corpus).unwrap();
        let input = Instance::from_tokens(vec![Token::new(1, "be", "AUX", "VBZ", 0, "root")])
            .unwrap();

        let empty = append_forms(&input, &DelemmaMap::new());
        assert_eq!(empty.len(), 2);
        assert_eq!(empty[1], SourceToken::separator());

        let seq = append_forms(&input, &map);
        let lemmas: Vec<&str> = seq.iter().map(|t| t.lemma.as_str()).collect();
        assert_eq!(lemmas, ["be", "<sep>", "is", "'s"]);
        assert_eq!(seq[2].upos, "AUX");
        assert_eq!(seq[2].xpos, "VBZ");
        assert_eq!((seq[2].position, seq[2].head), (0, 0));
        assert_eq!(seq[2].deprel, SUGGEST_DEPREL);
    }

    #[test]
    fn tsv_round_trip_and_errors() {
        let corpus = vec![sentence(&[("be", "VBZ", "is"), ("be", "VBZ", "'s"), ("be", "VBZ", "is")])];
        let map = DelemmaMap::build(&corpus).unwrap();
        let text = map.to_tsv();
        assert_eq!(text, "be\tVBZ\tis\t2\nbe\tVBZ\t's\t1\n");
        assert_eq!(DelemmaMap::from_tsv(&text).unwrap(), map);

        assert!(DelemmaMap::from_tsv("a\tb\tc\n").is_err());
        assert!(DelemmaMap::from_tsv("a\tb\tc\t0\n").is_err());
        assert!(DelemmaMap::from_tsv("a\tb\tc\tx\n").is_err());
        assert!(DelemmaMap::from_tsv("a\tb\tc\t1\na\tb\tc\t2\n").is_err());
    }
}
