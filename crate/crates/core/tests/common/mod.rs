#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use srp::conllu::{Instance, Token};

pub const LEMMAS: &[&str] = &[
    "the", "dog", "cat", "run", "be", "a", "of", "see", "house", ".", ",", "big", "to", "in",
];
pub const UPOS: &[&str] = &["NOUN", "VERB", "DET", "ADP", "ADJ", "PUNCT"];
pub const XPOS: &[&str] = &["NN", "NNS", "VB", "VBZ", "VBD", "DT", "IN", "JJ", "."];
pub const DEPRELS: &[&str] = &[
    "nsubj", "obj", "det", "case", "amod", "punct", "obl", "mark", "aux", "acl", "conj", "weird",
];

/// Assembles a valid instance from a parent choice per node and a position
/// permutation: node `i > 0` attaches to node `parent[i] % i`, node 0 is the
/// root, and node `i` gets position `perm[i]`.
pub fn assemble(
    parent: &[usize],
    perm: &[usize],
    labels: &[(usize, usize, usize, usize)],
) -> Instance {
    let n = perm.len();
    let tokens = (0..n)
        .map(|i| {
            let head = if i == 0 { 0 } else { perm[parent[i] % i] };
            let (l, u, x, d) = labels[i];
            Token::new(
                perm[i],
                LEMMAS[l % LEMMAS.len()],
                UPOS[u % UPOS.len()],
                XPOS[x % XPOS.len()],
                head,
                if i == 0 { "root" } else { DEPRELS[d % DEPRELS.len()] },
            )
        })
        .collect();
    Instance::from_tokens(tokens).expect("assembled tree is valid")
}

pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let parent: Vec<usize> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    let labels: Vec<_> = (0..n)
        .map(|_| (rng.gen(), rng.gen(), rng.gen(), rng.gen()))
        .collect();
    let mut inst = assemble(&parent, &perm, &labels);
    // Tokens in file order by position, as a parsed corpus would hold them.
    let (mut tokens, _, _) = inst.clone().into_parts();
    tokens.sort_by_key(|t| t.position);
    inst = Instance::from_tokens(tokens).unwrap();
    inst
}

/// Gold surface derived from lemma and XPOS, with some variation so that a
/// key can map to several forms.
pub fn with_gold<R: Rng>(inst: Instance, rng: &mut R) -> Instance {
    let gold = inst
        .tokens_by_position()
        .iter()
        .map(|t| match rng.gen_range(0..4) {
            0 => format!("{}s", t.lemma),
            1 => t.lemma.to_uppercase(),
            _ => t.lemma.clone(),
        })
        .collect();
    inst.with_gold_surface(Some(gold))
}

pub fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0..1000usize, n),
                Just((1..=n).collect::<Vec<usize>>()).prop_shuffle(),
                prop::collection::vec(
                    (0..100usize, 0..100usize, 0..100usize, 0..100usize),
                    n,
                ),
                prop::collection::btree_map("[a-z_]{1,8}", "[a-z0-9]{1,6}", 0..3),
            )
        })
        .prop_map(|(parent, perm, labels, meta)| {
            let meta: BTreeMap<String, String> =
                meta.into_iter().filter(|(k, _)| k != "text").collect();
            let inst = assemble(&parent, &perm, &labels);
            let (mut tokens, _, _) = inst.into_parts();
            tokens.sort_by_key(|t| t.position);
            Instance::new(tokens, None, meta).unwrap()
        })
}

/// Instance plus an aligned gold surface.
pub fn gold_instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    instance_strategy(max_n).prop_flat_map(|inst| {
        let n = inst.len();
        (Just(inst), prop::collection::vec(0..3usize, n)).prop_map(|(inst, variant)| {
            let gold = inst
                .tokens_by_position()
                .iter()
                .zip(variant)
                .map(|(t, v)| match v {
                    0 => t.lemma.clone(),
                    1 => format!("{}s", t.lemma),
                    _ => t.lemma.to_uppercase(),
                })
                .collect();
            inst.with_gold_surface(Some(gold))
        })
    })
}

/// Parent position of every token, keyed by position.
pub fn heads(inst: &Instance) -> HashMap<usize, usize> {
    inst.tokens().iter().map(|t| (t.position, t.head)).collect()
}

/// Whether `anc` is `node` or one of its ancestors, by walking head pointers.
pub fn is_ancestor(heads: &HashMap<usize, usize>, anc: usize, mut node: usize) -> bool {
    loop {
        if node == anc {
            return true;
        }
        if node == 0 {
            return false;
        }
        node = heads[&node];
    }
}

/// Contiguity of every subtree in `seq`, checked by ancestor walks.
pub fn contiguous_by_ancestry(inst: &Instance, seq: &[usize]) -> bool {
    let h = heads(inst);
    for t in inst.tokens() {
        let idx: Vec<usize> = seq
            .iter()
            .enumerate()
            .filter(|(_, &p)| is_ancestor(&h, t.position, p))
            .map(|(i, _)| i)
            .collect();
        let lo = *idx.iter().min().unwrap();
        let hi = *idx.iter().max().unwrap();
        if hi - lo + 1 != idx.len() {
            return false;
        }
    }
    true
}

/// Multiset of root paths: each token's labels followed by the labels of its
/// ancestors. Equal for isomorphic labelled trees.
pub fn root_paths(inst: &Instance) -> Vec<String> {
    let by_pos: HashMap<usize, &Token> = inst.tokens().iter().map(|t| (t.position, t)).collect();
    let mut paths: Vec<String> = inst
        .tokens()
        .iter()
        .map(|t| {
            let mut parts = Vec::new();
            let mut cur = t.position;
            while cur != 0 {
                let tok = by_pos[&cur];
                parts.push(format!("{}/{}/{}/{}", tok.lemma, tok.upos, tok.xpos, tok.deprel));
                cur = tok.head;
            }
            parts.join(" <- ")
        })
        .collect();
    paths.sort();
    paths
}
