//! Corpus BLEU, NIST and DIST.
//!
//! Sentences are whitespace-tokenized and compared case-sensitively against a
//! single reference each. DIST is character-level:
//! `100 * (1 - levenshtein(hyp, ref) / max(|hyp|, |ref|))`, averaged over
//! sentences for the corpus score.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BLEU_MAX_ORDER: usize = 4;
pub const NIST_MAX_ORDER: usize = 5;

pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}

fn check_aligned<T>(hyps: &[T], refs: &[T]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            expected: refs.len(),
            actual: hyps.len(),
        });
    }
    if refs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u64> {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and hypothesis n-gram totals, plus lengths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; BLEU_MAX_ORDER],
    pub totals: [u64; BLEU_MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn sentence(hyp: &[String], reference: &[String]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..Default::default()
        };
        for n in 1..=BLEU_MAX_ORDER {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            stats.totals[n - 1] = h.values().sum();
            stats.matches[n - 1] = h
                .iter()
                .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn add(&mut self, other: &BleuStats) {
        for i in 0..BLEU_MAX_ORDER {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        }
    }

    /// BLEU x 100. Without `smoothing`, any zero precision gives 0; with
    /// `Some(eps)`, a zero match count is replaced by `eps`.
    pub fn score(&self, smoothing: Option<f64>) -> f64 {
        let bp = self.brevity_penalty();
        if bp == 0.0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for i in 0..BLEU_MAX_ORDER {
            let total = self.totals[i] as f64;
            let matched = self.matches[i] as f64;
            let p = match (self.matches[i], smoothing) {
                (0, None) => return 0.0,
                (0, Some(eps)) => eps / total.max(1.0),
                _ => matched / total,
            };
            log_sum += p.ln();
        }
        100.0 * bp * (log_sum / BLEU_MAX_ORDER as f64).exp()
    }
}

fn bleu_stats(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<BleuStats> {
    check_aligned(hyps, refs)?;
    let mut total = BleuStats::default();
    for (h, r) in hyps.iter().zip(refs) {
        total.add(&BleuStats::sentence(h, r));
    }
    Ok(total)
}

/// Corpus BLEU (orders 1..=4, uniform weights, no smoothing), x 100.
pub fn bleu(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<f64> {
    Ok(bleu_stats(hyps, refs)?.score(None))
}

/// Corpus BLEU with add-epsilon smoothing of zero-match orders.
pub fn bleu_smoothed(hyps: &[Vec<String>], refs: &[Vec<String>], epsilon: f64) -> Result<f64> {
    Ok(bleu_stats(hyps, refs)?.score(Some(epsilon)))
}

/// `beta` such that the NIST length factor is 0.5 at a length ratio of 2/3.
pub fn nist_beta() -> f64 {
    0.5f64.ln() / 1.5f64.ln().powi(2)
}

/// NIST length factor `exp(beta * ln^2(min(ratio, 1)))`.
pub fn nist_length_penalty(ratio: f64) -> f64 {
    if ratio >= 1.0 {
        1.0
    } else if ratio <= 0.0 {
        0.0
    } else {
        (nist_beta() * ratio.ln().powi(2)).exp()
    }
}

/// Corpus NIST with orders 1..=5.
///
/// Information weights come from the reference side of the corpus:
/// `info(w1..wn) = log2(count(w1..wn-1) / count(w1..wn))`, where the count of
/// the empty prefix is the number of reference words.
pub fn nist(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<f64> {
    check_aligned(hyps, refs)?;

    let mut ref_counts: Vec<BTreeMap<&[String], u64>> = vec![BTreeMap::new(); NIST_MAX_ORDER + 1];
    let mut ref_words = 0u64;
    for r in refs {
        ref_words += r.len() as u64;
        for (n, counts) in ref_counts.iter_mut().enumerate().skip(1) {
            for (g, c) in ngram_counts(r, n) {
                *counts.entry(g).or_insert(0) += c;
            }
        }
    }
    let info = |g: &[String]| -> f64 {
        let n = g.len();
        let count = ref_counts[n][g] as f64;
        let prefix = if n == 1 {
            ref_words as f64
        } else {
            ref_counts[n - 1][&g[..n - 1]] as f64
        };
        (prefix / count).log2()
    };

    let mut info_sum = [0.0f64; NIST_MAX_ORDER + 1];
    let mut hyp_ngrams = [0u64; NIST_MAX_ORDER + 1];
    let mut hyp_words = 0u64;
    for (h, r) in hyps.iter().zip(refs) {
        hyp_words += h.len() as u64;
        for n in 1..=NIST_MAX_ORDER {
            let hc = ngram_counts(h, n);
            let rc = ngram_counts(r, n);
            hyp_ngrams[n] += hc.values().sum::<u64>();
            for (g, c) in hc {
                if let Some(&rcount) = rc.get(g) {
                    info_sum[n] += c.min(rcount) as f64 * info(g);
                }
            }
        }
    }

    let score: f64 = (1..=NIST_MAX_ORDER)
        .map(|n| info_sum[n] / hyp_ngrams[n].max(1) as f64)
        .sum();
    let ratio = if ref_words == 0 {
        1.0
    } else {
        hyp_words as f64 / ref_words as f64
    };
    Ok(score * nist_length_penalty(ratio))
}

/// Edit distance over arbitrary sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character-level inverse normalized edit distance, x 100.
pub fn dist(hyp: &str, reference: &str) -> f64 {
    let h: Vec<char> = hyp.chars().collect();
    let r: Vec<char> = reference.chars().collect();
    let longest = h.len().max(r.len());
    if longest == 0 {
        return 100.0;
    }
    100.0 * (1.0 - levenshtein(&h, &r) as f64 / longest as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub index: usize,
    pub dist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub sentences: usize,
    pub hypothesis_tokens: usize,
    pub reference_tokens: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub nist: f64,
    pub dist: f64,
    pub per_sentence: Vec<SentenceScore>,
    pub counts: Counts,
}

impl EvalReport {
    /// Plain-text table with BLEU, DIST and NIST columns.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>10} {:>10} {:>10}", "BLEU", "DIST", "NIST");
        let _ = writeln!(
            out,
            "{:>10.2} {:>10.2} {:>10.2}",
            self.bleu, self.dist, self.nist
        );
        let _ = writeln!(
            out,
            "sentences={} hyp_tokens={} ref_tokens={}",
            self.counts.sentences, self.counts.hypothesis_tokens, self.counts.reference_tokens
        );
        out
    }
}

/// Scores a tokenized corpus. Per-sentence DIST compares the tokens joined
/// by single spaces.
pub fn evaluate(hyps: &[Vec<String>], refs: &[Vec<String>]) -> Result<EvalReport> {
    check_aligned(hyps, refs)?;
    let per_sentence: Vec<SentenceScore> = hyps
        .iter()
        .zip(refs)
        .enumerate()
        .map(|(index, (h, r))| SentenceScore {
            index,
            dist: dist(&h.join(" "), &r.join(" ")),
        })
        .collect();
    let dist_mean = per_sentence.iter().map(|s| s.dist).sum::<f64>() / per_sentence.len() as f64;
    Ok(EvalReport {
        bleu: bleu(hyps, refs)?,
        nist: nist(hyps, refs)?,
        dist: dist_mean,
        per_sentence,
        counts: Counts {
            sentences: hyps.len(),
            hypothesis_tokens: hyps.iter().map(Vec::len).sum(),
            reference_tokens: refs.iter().map(Vec::len).sum(),
        },
    })
}

/// Scores line-aligned texts, one sentence per line.
pub fn evaluate_lines(hyp_text: &str, ref_text: &str) -> Result<EvalReport> {
    let hyps: Vec<Vec<String>> = hyp_text.lines().map(tokenize).collect();
    let refs: Vec<Vec<String>> = ref_text.lines().map(tokenize).collect();
    evaluate(&hyps, &refs)
}
