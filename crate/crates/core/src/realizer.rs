//! Deterministic realizers.
//!
//! `realize_identity` keeps the input order, `realize_tree` orders every
//! head's dependents by a [`PrecedenceTable`], and `realize_oracle` returns
//! the gold target. All three delemmatize with the most frequent form from a
//! [`DelemmaMap`], falling back to the lemma.

use serde::{Deserialize, Serialize};

use crate::augment::TrainingPair;
use crate::conllu::{Instance, Token};
use crate::delemma::DelemmaMap;
use crate::deptree::{DepTree, Ordering};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Before,
    After,
}

/// Which dependents go left of their head, and in what order.
///
/// Dependents whose deprel is in `before` precede the head, ordered by their
/// label's index in `before` and then by input order; `after` works the same
/// on the right. Labels in neither list go to `unknown_side`, behind the
/// listed ones on that side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecedenceTable {
    pub before: Vec<String>,
    pub after: Vec<String>,
    pub unknown_side: Side,
}

const DEFAULT_BEFORE: &[&str] = &[
    "mark", "case", "cc", "expl", "nsubj", "nsubj:pass", "csubj", "aux", "aux:pass", "advmod",
    "cop", "det", "det:predet", "nmod:poss", "nummod", "amod", "compound",
];

const DEFAULT_AFTER: &[&str] = &[
    "obj", "iobj", "xcomp", "ccomp", "obl", "nmod", "acl", "acl:relcl", "advcl", "appos", "conj",
    "parataxis", "punct",
];

impl Default for PrecedenceTable {
    fn default() -> Self {
        PrecedenceTable {
            before: DEFAULT_BEFORE.iter().map(|s| s.to_string()).collect(),
            after: DEFAULT_AFTER.iter().map(|s| s.to_string()).collect(),
            unknown_side: Side::After,
        }
    }
}

impl PrecedenceTable {
    pub fn new(before: Vec<String>, after: Vec<String>, unknown_side: Side) -> Result<Self> {
        let table = PrecedenceTable {
            before,
            after,
            unknown_side,
        };
        table.validate()?;
        Ok(table)
    }

    /// `before` and `after` must be disjoint.
    pub fn validate(&self) -> Result<()> {
        if let Some(dup) = self.before.iter().find(|l| self.after.contains(l)) {
            return Err(Error::InvalidArgument(format!(
                "deprel {dup:?} is listed both before and after the head"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: PrecedenceTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    /// Side of the head and rank within that side.
    fn place(&self, deprel: &str) -> (Side, usize) {
        if let Some(i) = self.before.iter().position(|l| l == deprel) {
            (Side::Before, i)
        } else if let Some(i) = self.after.iter().position(|l| l == deprel) {
            (Side::After, i)
        } else {
            let rank = match self.unknown_side {
                Side::Before => self.before.len(),
                Side::After => self.after.len(),
            };
            (self.unknown_side, rank)
        }
    }
}

/// Most frequent form of the token's `(lemma, xpos)`, or the lemma.
pub fn delemmatize(token: &Token, map: &DelemmaMap) -> String {
    map.most_frequent(&token.lemma, &token.xpos)
        .unwrap_or(&token.lemma)
        .to_owned()
}

/// Tokens in their given order, delemmatized.
pub fn realize_identity(inst: &Instance, map: &DelemmaMap) -> Vec<String> {
    inst.tokens().iter().map(|t| delemmatize(t, map)).collect()
}

/// The order `realize_tree` emits positions in.
pub fn tree_order(inst: &Instance, prec: &PrecedenceTable) -> Ordering {
    let tree = DepTree::build(inst);
    let mut out = Vec::with_capacity(inst.len());

    enum Step {
        Expand(usize),
        Emit(usize),
    }
    let mut stack = vec![Step::Expand(tree.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Emit(p) => out.push(p),
            Step::Expand(p) => {
                let mut before = Vec::new();
                let mut after = Vec::new();
                // Child lists are in ascending position order, which is the
                // input order tie-breaker.
                for &c in tree.children(p) {
                    let (side, rank) = prec.place(&tree.token(c).deprel);
                    match side {
                        Side::Before => before.push((rank, c)),
                        Side::After => after.push((rank, c)),
                    }
                }
                before.sort_by_key(|&(rank, _)| rank);
                after.sort_by_key(|&(rank, _)| rank);
                // Pushed in reverse so they pop in emission order.
                for &(_, c) in after.iter().rev() {
                    stack.push(Step::Expand(c));
                }
                stack.push(Step::Emit(p));
                for &(_, c) in before.iter().rev() {
                    stack.push(Step::Expand(c));
                }
            }
        }
    }
    Ordering::new(out).expect("tree traversal visits each position once")
}

/// Orders the instance by its tree and the precedence table, then
/// delemmatizes.
pub fn realize_tree(inst: &Instance, map: &DelemmaMap, prec: &PrecedenceTable) -> Vec<String> {
    tree_order(inst, prec)
        .as_slice()
        .iter()
        .map(|&p| delemmatize(inst.token_at(p).expect("ordered position exists"), map))
        .collect()
}

/// The pair's gold target.
pub fn realize_oracle(pair: &TrainingPair) -> Result<Vec<String>> {
    if pair.target.is_empty() {
        return Err(Error::MissingGold);
    }
    Ok(pair.target.clone())
}
