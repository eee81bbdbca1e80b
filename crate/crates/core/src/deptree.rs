//! Dependency trees rebuilt from head indices, random depth-first
//! linearization, and seeded shuffling of task inputs.
//!
//! Linearization is pre-order: a head is emitted before the subtrees of its
//! children, and the order in which children are visited is a uniform random
//! permutation drawn per node from a [`crate::SeededRng`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::conllu::{Instance, Token};
use crate::{seeded_rng, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    root: usize,
    /// Indexed by position; slot 0 is unused.
    children: Vec<Vec<usize>>,
    tokens: Vec<Token>,
}

impl DepTree {
    /// Builds the tree of a validated instance. Child lists are in ascending
    /// position order.
    pub fn build(inst: &Instance) -> Self {
        let n = inst.len();
        let mut children = vec![Vec::new(); n + 1];
        let tokens: Vec<Token> = inst.tokens_by_position().into_iter().cloned().collect();
        for t in &tokens {
            if t.head != 0 {
                children[t.head].push(t.position);
            }
        }
        DepTree {
            root: inst.root(),
            children,
            tokens,
        }
    }

    pub fn node_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn children(&self, position: usize) -> &[usize] {
        &self.children[position]
    }

    pub fn token(&self, position: usize) -> &Token {
        &self.tokens[position - 1]
    }

    /// Positions in pre-order with children visited in stored order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(self.children[node].iter().rev());
        }
        out
    }

    /// Order-independent encoding of the labelled tree.
    ///
    /// Each node contributes its lemma, UPOS, XPOS and deprel; children are
    /// encoded recursively and sorted, so two instances have the same form
    /// iff their trees are isomorphic as labelled unordered trees.
    pub fn canonical_form(&self) -> String {
        // Post-order over an explicit stack; encodings are length-prefixed so
        // that concatenation is unambiguous.
        let n = self.node_count();
        let mut enc: Vec<Option<String>> = vec![None; n + 1];
        let mut stack = vec![(self.root, false)];
        while let Some((node, expanded)) = stack.pop() {
            if !expanded {
                stack.push((node, true));
                for &c in &self.children[node] {
                    stack.push((c, false));
                }
                continue;
            }
            let t = self.token(node);
            let mut kids: Vec<String> = self.children[node]
                .iter()
                .map(|&c| enc[c].take().expect("child encoded"))
                .collect();
            kids.sort();
            let mut s = String::from("(");
            for field in [&t.lemma, &t.upos, &t.xpos, &t.deprel] {
                s.push_str(&format!("{}:{}", field.len(), field));
            }
            for k in kids {
                s.push_str(&k);
            }
            s.push(')');
            enc[node] = Some(s);
        }
        enc[self.root].take().expect("root encoded")
    }
}

/// Canonical tree form of an instance; see [`DepTree::canonical_form`].
pub fn canonical_form(inst: &Instance) -> String {
    DepTree::build(inst).canonical_form()
}

/// A permutation of the positions `1..=n`, listing old positions in their
/// new order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(sequence: Vec<usize>) -> Result<Self> {
        let n = sequence.len();
        let mut seen = vec![false; n + 1];
        for &p in &sequence {
            if p == 0 || p > n {
                return Err(Error::InvalidOrdering(format!(
                    "position {p} outside 1..={n}"
                )));
            }
            if seen[p] {
                return Err(Error::InvalidOrdering(format!("position {p} repeated")));
            }
            seen[p] = true;
        }
        Ok(Ordering(sequence))
    }

    pub fn identity(n: usize) -> Self {
        Ordering((1..=n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The ordering that undoes `self` when applied after it.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p - 1] = i + 1;
        }
        Ordering(inv)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Random pre-order linearization drawing child orders from `rng`.
pub fn linearize_with<R: Rng + ?Sized>(tree: &DepTree, rng: &mut R) -> Ordering {
    let mut out = Vec::with_capacity(tree.node_count());
    let mut stack = vec![tree.root];
    let mut kids = Vec::new();
    while let Some(node) = stack.pop() {
        out.push(node);
        kids.clear();
        kids.extend_from_slice(&tree.children[node]);
        kids.shuffle(rng);
        stack.extend(kids.iter().rev());
    }
    Ordering(out)
}

/// Random pre-order linearization; the same `(tree, seed)` always gives the
/// same ordering.
pub fn linearize_random(tree: &DepTree, seed: u64) -> Ordering {
    linearize_with(tree, &mut seeded_rng(seed))
}

/// Whether every subtree of `tree` occupies a contiguous span of `sequence`.
pub fn subtrees_contiguous(tree: &DepTree, sequence: &[usize]) -> bool {
    let n = tree.node_count();
    if sequence.len() != n {
        return false;
    }
    let mut index_of = vec![usize::MAX; n + 1];
    for (i, &p) in sequence.iter().enumerate() {
        if p == 0 || p > n || index_of[p] != usize::MAX {
            return false;
        }
        index_of[p] = i;
    }
    // (min index, max index, size) per subtree, filled bottom-up.
    let mut span = vec![(usize::MAX, 0usize, 0usize); n + 1];
    let order = tree.preorder();
    for &node in order.iter().rev() {
        let mut lo = index_of[node];
        let mut hi = index_of[node];
        let mut size = 1;
        for &c in tree.children(node) {
            let (clo, chi, cs) = span[c];
            lo = lo.min(clo);
            hi = hi.max(chi);
            size += cs;
        }
        if hi - lo + 1 != size {
            return false;
        }
        span[node] = (lo, hi, size);
    }
    true
}

/// Renumbers an instance so that its tokens follow `ord`.
///
/// Heads are remapped through the same permutation, with 0 preserved. The
/// gold surface is the reference sentence and is carried over unchanged.
pub fn reorder(inst: &Instance, ord: &Ordering) -> Result<Instance> {
    let n = inst.len();
    if ord.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: ord.len(),
        });
    }
    let mut new_pos = vec![0usize; n + 1];
    for (i, &old) in ord.as_slice().iter().enumerate() {
        new_pos[old] = i + 1;
    }
    let tokens = ord
        .as_slice()
        .iter()
        .map(|&old| {
            let t = inst.token_at(old).expect("ordering covers instance positions");
            Token {
                position: new_pos[old],
                head: new_pos[t.head],
                ..t.clone()
            }
        })
        .collect();
    Instance::new(
        tokens,
        inst.gold_surface().map(<[String]>::to_vec),
        inst.metadata().clone(),
    )
}

/// A uniformly random permutation of `1..=n` from the seeded generator.
pub fn random_ordering<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Ordering {
    let mut seq: Vec<usize> = (1..=n).collect();
    seq.shuffle(rng);
    Ordering(seq)
}

/// Shuffles an instance into a task input. The gold surface is dropped.
pub fn shuffle(inst: &Instance, seed: u64) -> Instance {
    let ord = random_ordering(inst.len(), &mut seeded_rng(seed));
    reorder(inst, &ord)
        .expect("permutation of a valid instance is valid")
        .with_gold_surface(None)
}

/// Reorders an instance by a random depth-first linearization of its tree.
pub fn linearize_instance(inst: &Instance, seed: u64) -> Instance {
    let ord = linearize_random(&DepTree::build(inst), seed);
    reorder(inst, &ord).expect("linearization is a permutation")
}
