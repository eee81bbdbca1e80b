//! Template-generated English-like sentences with gold trees.
//!
//! Used for the bundled sample corpora and for tests that need many
//! realistic gold instances. Every sentence comes with lemmas, UPOS/XPOS,
//! heads, deprels and its inflected surface forms.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::conllu::{Instance, Token};
use crate::{seeded_rng, SeededRng};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    /// Probability that a noun is drawn from the rare-noun list.
    pub rare_noun_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rare_noun_rate: 0.0,
        }
    }
}

struct Noun {
    lemma: &'static str,
    plural: &'static str,
}

const fn n(lemma: &'static str, plural: &'static str) -> Noun {
    Noun { lemma, plural }
}

const NOUNS: &[Noun] = &[
    n("dog", "dogs"),
    n("cat", "cats"),
    n("child", "children"),
    n("man", "men"),
    n("woman", "women"),
    n("teacher", "teachers"),
    n("bird", "birds"),
    n("student", "students"),
    n("farmer", "farmers"),
    n("doctor", "doctors"),
];

const PLACES: &[Noun] = &[
    n("house", "houses"),
    n("city", "cities"),
    n("garden", "gardens"),
    n("river", "rivers"),
    n("park", "parks"),
    n("library", "libraries"),
];

const THINGS: &[Noun] = &[
    n("book", "books"),
    n("ball", "balls"),
    n("letter", "letters"),
    n("car", "cars"),
    n("box", "boxes"),
    n("story", "stories"),
];

const RARE_NOUNS: &[Noun] = &[
    n("aardvark", "aardvarks"),
    n("zeppelin", "zeppelins"),
    n("quokka", "quokkas"),
    n("sextant", "sextants"),
    n("lorikeet", "lorikeets"),
];

struct Verb {
    lemma: &'static str,
    third: &'static str,
    past: &'static str,
}

const fn v(lemma: &'static str, third: &'static str, past: &'static str) -> Verb {
    Verb { lemma, third, past }
}

const TRANSITIVE: &[Verb] = &[
    v("see", "sees", "saw"),
    v("like", "likes", "liked"),
    v("find", "finds", "found"),
    v("take", "takes", "took"),
    v("read", "reads", "read"),
    v("watch", "watches", "watched"),
    v("carry", "carries", "carried"),
];

const INTRANSITIVE: &[Verb] = &[
    v("sleep", "sleeps", "slept"),
    v("run", "runs", "ran"),
    v("wait", "waits", "waited"),
    v("sing", "sings", "sang"),
    v("arrive", "arrives", "arrived"),
];

const ADJECTIVES: &[&str] = &["big", "small", "old", "young", "happy", "quiet", "red"];
const PREPOSITIONS: &[&str] = &["in", "near", "behind"];
const ADVERBS: &[&str] = &["often", "never", "always"];
const MODALS: &[&str] = &["will", "can", "must"];

/// A token under construction: `head` is a 0-based index or `None` for root.
struct Word {
    form: String,
    lemma: String,
    upos: &'static str,
    xpos: &'static str,
    head: Option<usize>,
    deprel: &'static str,
}

#[derive(Default)]
struct Builder {
    words: Vec<Word>,
}

impl Builder {
    fn push(
        &mut self,
        form: impl Into<String>,
        lemma: impl Into<String>,
        upos: &'static str,
        xpos: &'static str,
        deprel: &'static str,
    ) -> usize {
        self.words.push(Word {
            form: form.into(),
            lemma: lemma.into(),
            upos,
            xpos,
            head: None,
            deprel,
        });
        self.words.len() - 1
    }

    fn attach(&mut self, dep: usize, head: usize) {
        self.words[dep].head = Some(head);
    }

    fn finish(self) -> Instance {
        let gold = self.words.iter().map(|w| w.form.clone()).collect();
        let tokens = self
            .words
            .into_iter()
            .enumerate()
            .map(|(i, w)| Token {
                position: i + 1,
                lemma: w.lemma,
                upos: w.upos.into(),
                xpos: w.xpos.into(),
                head: w.head.map_or(0, |h| h + 1),
                deprel: w.deprel.into(),
            })
            .collect();
        Instance::new(tokens, Some(gold), BTreeMap::new()).expect("templates build valid trees")
    }
}

struct Gen<'a> {
    rng: SeededRng,
    config: &'a SynthConfig,
}

impl Gen<'_> {
    fn noun_from(&mut self, list: &'static [Noun]) -> &'static Noun {
        if self.rng.gen_bool(self.config.rare_noun_rate.clamp(0.0, 1.0)) {
            RARE_NOUNS.choose(&mut self.rng).unwrap()
        } else {
            list.choose(&mut self.rng).unwrap()
        }
    }

    /// Emits `[det] [adj] noun` and returns the noun index and plurality.
    fn noun_phrase(&mut self, b: &mut Builder, list: &'static [Noun], deprel: &'static str) -> (usize, bool) {
        let noun = self.noun_from(list);
        let plural = self.rng.gen_bool(0.3);
        let det = if plural {
            *["the", "some"].choose(&mut self.rng).unwrap()
        } else {
            *["the", "a", "this"].choose(&mut self.rng).unwrap()
        };
        let d = b.push(det, det, "DET", "DT", "det");
        let adj = if self.rng.gen_bool(0.4) {
            let a = *ADJECTIVES.choose(&mut self.rng).unwrap();
            Some(b.push(a, a, "ADJ", "JJ", "amod"))
        } else {
            None
        };
        let (form, xpos) = if plural {
            (noun.plural, "NNS")
        } else {
            (noun.lemma, "NN")
        };
        let head = b.push(form, noun.lemma, "NOUN", xpos, deprel);
        b.attach(d, head);
        if let Some(a) = adj {
            b.attach(a, head);
        }
        (head, plural)
    }

    /// `prep [det] [adj] place`, attached as an oblique of `head`.
    fn prepositional(&mut self, b: &mut Builder, head: usize) {
        let p = *PREPOSITIONS.choose(&mut self.rng).unwrap();
        let case = b.push(p, p, "ADP", "IN", "case");
        let (noun, _) = self.noun_phrase(b, PLACES, "obl");
        b.attach(case, noun);
        b.attach(noun, head);
    }

    /// Finite verb form agreeing with the subject, or the bare form after a
    /// modal.
    fn verb(&mut self, b: &mut Builder, verb: &Verb, plural: bool, modal: bool) -> usize {
        if modal {
            b.push(verb.lemma, verb.lemma, "VERB", "VB", "root")
        } else if self.rng.gen_bool(0.5) {
            b.push(verb.past, verb.lemma, "VERB", "VBD", "root")
        } else if plural {
            b.push(verb.lemma, verb.lemma, "VERB", "VBP", "root")
        } else {
            b.push(verb.third, verb.lemma, "VERB", "VBZ", "root")
        }
    }

    fn clause(&mut self, transitive: bool) -> Instance {
        let mut b = Builder::default();
        let (subj, plural) = self.noun_phrase(&mut b, NOUNS, "nsubj");
        let aux = if self.rng.gen_bool(0.3) {
            let m = *MODALS.choose(&mut self.rng).unwrap();
            Some(b.push(m, m, "AUX", "MD", "aux"))
        } else {
            None
        };
        let adv = if self.rng.gen_bool(0.25) {
            let a = *ADVERBS.choose(&mut self.rng).unwrap();
            Some(b.push(a, a, "ADV", "RB", "advmod"))
        } else {
            None
        };
        let verb = if transitive {
            TRANSITIVE.choose(&mut self.rng).unwrap()
        } else {
            INTRANSITIVE.choose(&mut self.rng).unwrap()
        };
        let root = self.verb(&mut b, verb, plural, aux.is_some());
        b.attach(subj, root);
        for dep in [aux, adv].into_iter().flatten() {
            b.attach(dep, root);
        }
        if transitive {
            let (obj, _) = self.noun_phrase(&mut b, THINGS, "obj");
            b.attach(obj, root);
        }
        if self.rng.gen_bool(0.5) {
            self.prepositional(&mut b, root);
        }
        let punct = b.push(".", ".", "PUNCT", ".", "punct");
        b.attach(punct, root);
        b.finish()
    }

    /// `there be a lot to learn about [det] place .`
    fn existential(&mut self) -> Instance {
        let mut b = Builder::default();
        let there = b.push("there", "there", "PRON", "EX", "expl");
        let (form, xpos) = if self.rng.gen_bool(0.5) {
            ("is", "VBZ")
        } else {
            ("was", "VBD")
        };
        let be = b.push(form, "be", "VERB", xpos, "root");
        let a = b.push("a", "a", "DET", "DT", "det");
        let lot = b.push("lot", "lot", "NOUN", "NN", "nsubj");
        let to = b.push("to", "to", "PART", "TO", "mark");
        let verb = *["learn", "see", "read"].choose(&mut self.rng).unwrap();
        let learn = b.push(verb, verb, "VERB", "VB", "acl");
        let about = b.push("about", "about", "ADP", "IN", "case");
        let (place, _) = self.noun_phrase(&mut b, PLACES, "obl");
        let dot = b.push(".", ".", "PUNCT", ".", "punct");
        b.attach(there, be);
        b.attach(a, lot);
        b.attach(lot, be);
        b.attach(to, learn);
        b.attach(learn, lot);
        b.attach(about, place);
        b.attach(place, learn);
        b.attach(dot, be);
        b.finish()
    }

    fn sentence(&mut self) -> Instance {
        match self.rng.gen_range(0..10) {
            0 => self.existential(),
            1..=5 => self.clause(true),
            _ => self.clause(false),
        }
    }
}

/// `count` gold sentences, deterministic in `seed`.
pub fn generate(count: usize, seed: u64, config: &SynthConfig) -> Vec<Instance> {
    let mut g = Gen {
        rng: seeded_rng(seed),
        config,
    };
    (0..count).map(|_| g.sentence()).collect()
}
