//! Synthetic English-like phrasebooks for desk-scale experiments.
//!
//! Sentences come from small template grammars whose slots draw words with
//! Zipf-distributed frequencies, so common phrases repeat the way they do
//! in real phrasebooks. Output lines are raw text (capitals, commas, extra
//! spaces) and go through normalization like any user-supplied corpus.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The bundled mini-corpora, as `(name, raw text)`.
pub const BUNDLED: [(&str, &str); 3] = [
    ("travel", include_str!("../../data/corpora/travel.txt")),
    ("household", include_str!("../../data/corpora/household.txt")),
    ("pseudo", include_str!("../../data/corpora/pseudo.txt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusStyle {
    Travel,
    Household,
    /// Invented words built from English syllables.
    Pseudo,
}

impl CorpusStyle {
    pub const ALL: [CorpusStyle; 3] = [CorpusStyle::Travel, CorpusStyle::Household, CorpusStyle::Pseudo];

    pub fn name(&self) -> &'static str {
        match self {
            CorpusStyle::Travel => "travel",
            CorpusStyle::Household => "household",
            CorpusStyle::Pseudo => "pseudo",
        }
    }
    /// Raw text of the bundled corpus in this style.
    pub fn bundled(&self) -> &'static str {
        BUNDLED[*self as usize].1
    }
}

impl fmt::Display for CorpusStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown corpus style {s:?}"))
    }
}

const PRON: &[&str] = &["i", "we", "you", "they", "she", "he"];
const MODAL: &[&str] = &["can", "will", "should", "could", "must", "might"];
const QW: &[&str] = &["where", "when", "how", "why", "what time"];
const PREP: &[&str] = &["near", "in", "at", "behind", "beside", "from", "to", "under", "with", "for"];
const TIME: &[&str] = &[
    "today", "tomorrow", "tonight", "now", "later", "soon", "again", "every day", "this morning", "next week",
];
const DET: &[&str] = &["the", "a", "my", "your", "this", "that", "our", "some", "their", "every"];

const TRAVEL_VERB: &[&str] = &[
    "need", "want", "like", "see", "have", "find", "take", "book", "love", "miss", "visit", "know", "pay", "reach",
    "leave", "carry", "show", "order", "rent", "check", "share", "follow", "cross", "wait for", "ask for",
];
const TRAVEL_NOUN: &[&str] = &[
    "ticket", "room", "train", "station", "hotel", "bus", "map", "key", "table", "bag", "car", "beach", "museum",
    "street", "friend", "city", "bridge", "market", "garden", "window", "phone", "coffee", "dinner", "water",
    "bottle", "passport", "airport", "taxi", "guide", "church", "castle", "river", "park", "shop", "bank", "doctor",
    "menu", "price", "seat", "flight", "platform", "harbour", "island", "mountain", "village", "square", "tower",
    "festival", "receipt", "luggage", "pharmacy", "bakery", "restaurant", "ferry", "border", "tunnel", "valley",
    "gallery", "theatre", "concert", "postcard", "umbrella", "camera", "jacket", "sandwich", "breakfast",
];
const TRAVEL_ADJ: &[&str] = &[
    "small", "big", "cheap", "nice", "old", "new", "quiet", "warm", "cold", "good", "late", "early", "clean",
    "free", "busy", "open", "closed", "local", "famous", "crowded", "beautiful", "expensive", "next", "last",
];
const TRAVEL_FIXED: &[&str] = &[
    "Thank you very much.",
    "Good morning.",
    "How much is it?",
    "See you tomorrow.",
    "Excuse me.",
    "I don't understand.",
    "Do you speak English?",
    "Where is the toilet?",
    "Can you help me?",
    "The bill, please.",
    "Have a nice trip.",
    "What's your name?",
];

const HOME_VERB: &[&str] = &[
    "clean", "fix", "open", "close", "wash", "cook", "move", "paint", "buy", "sell", "water", "feed", "bring",
    "fold", "hang", "empty", "fill", "light", "lock", "heat", "cut", "sort", "borrow", "return", "put away",
];
const HOME_NOUN: &[&str] = &[
    "kitchen", "door", "window", "chair", "table", "bed", "lamp", "sofa", "oven", "fridge", "sink", "floor",
    "garden", "plant", "dog", "cat", "shirt", "towel", "blanket", "pillow", "cup", "plate", "spoon", "knife",
    "kettle", "carpet", "mirror", "shelf", "drawer", "basket", "bucket", "ladder", "hammer", "curtain", "garage",
    "bicycle", "letter", "parcel", "book", "clock", "radio", "heater", "stairs", "roof", "fence", "gate", "soap",
    "bread", "milk", "cheese", "apple", "soup", "rice", "onion", "butter", "sugar", "honey", "tea", "cake",
];
const HOME_ADJ: &[&str] = &[
    "dirty", "clean", "broken", "heavy", "light", "wet", "dry", "empty", "full", "soft", "hard", "fresh", "sharp",
    "red", "blue", "green", "white", "black", "warm", "cold", "tidy", "noisy", "little", "spare",
];
const HOME_FIXED: &[&str] = &[
    "Dinner is ready.",
    "I'm tired.",
    "Good night.",
    "Turn off the light.",
    "Is anyone home?",
    "Please close the door.",
    "I love you.",
    "Where are my keys?",
    "Let's go for a walk.",
    "It's raining again.",
    "Don't forget the milk.",
];

const ONSET: &[&str] = &[
    "b", "br", "c", "ch", "cl", "d", "dr", "f", "fl", "g", "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "pr",
    "qu", "r", "s", "sh", "sl", "st", "t", "th", "tr", "v", "w", "wh", "y", "z",
];
const NUCLEUS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ee", "oo", "ou", "y"];
const CODA: &[&str] = &["", "", "", "n", "r", "s", "t", "l", "m", "ck", "ng", "nd", "st", "x"];

#[derive(Clone, Copy)]
enum Slot {
    Lit(&'static str),
    Pron,
    Modal,
    Qw,
    Prep,
    Time,
    Det,
    Verb,
    Noun,
    Adj,
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|k| 1.0 / (k as f64).powf(s))).expect("non-empty list")
}

struct Lexicon {
    verbs: Vec<String>,
    nouns: Vec<String>,
    adjs: Vec<String>,
    fixed: Vec<String>,
}

struct Sampler {
    lex: Lexicon,
    pron: WeightedIndex<f64>,
    modal: WeightedIndex<f64>,
    qw: WeightedIndex<f64>,
    prep: WeightedIndex<f64>,
    time: WeightedIndex<f64>,
    det: WeightedIndex<f64>,
    verb: WeightedIndex<f64>,
    noun: WeightedIndex<f64>,
    adj: WeightedIndex<f64>,
    fixed: WeightedIndex<f64>,
}

impl Sampler {
    fn new(lex: Lexicon) -> Self {
        Self {
            pron: zipf(PRON.len(), 1.0),
            modal: zipf(MODAL.len(), 1.0),
            qw: zipf(QW.len(), 1.0),
            prep: zipf(PREP.len(), 1.0),
            time: zipf(TIME.len(), 1.0),
            det: zipf(DET.len(), 1.0),
            verb: zipf(lex.verbs.len(), 1.0),
            noun: zipf(lex.nouns.len(), 1.0),
            adj: zipf(lex.adjs.len(), 1.0),
            fixed: zipf(lex.fixed.len(), 1.0),
            lex,
        }
    }

    fn word<R: Rng>(&self, slot: Slot, rng: &mut R) -> &str {
        match slot {
            Slot::Lit(w) => w,
            Slot::Pron => PRON[self.pron.sample(rng)],
            Slot::Modal => MODAL[self.modal.sample(rng)],
            Slot::Qw => QW[self.qw.sample(rng)],
            Slot::Prep => PREP[self.prep.sample(rng)],
            Slot::Time => TIME[self.time.sample(rng)],
            Slot::Det => DET[self.det.sample(rng)],
            Slot::Verb => &self.lex.verbs[self.verb.sample(rng)],
            Slot::Noun => &self.lex.nouns[self.noun.sample(rng)],
            Slot::Adj => &self.lex.adjs[self.adj.sample(rng)],
        }
    }
}

/// Templates with their terminator.
fn templates() -> Vec<(Vec<Slot>, char)> {
    use Slot::*;
    vec![
        (vec![Pron, Verb, Det, Noun], '.'),
        (vec![Pron, Verb, Det, Adj, Noun, Time], '.'),
        (vec![Lit("where"), Lit("is"), Det, Noun], '?'),
        (vec![Det, Noun, Lit("is"), Adj], '.'),
        (vec![Pron, Modal, Verb, Det, Noun, Prep, Det, Noun], '.'),
        (vec![Modal, Pron, Verb, Det, Noun, Time], '?'),
        (vec![Qw, Lit("can"), Pron, Verb, Det, Noun], '?'),
        (vec![Lit("is"), Det, Noun, Adj], '?'),
        (vec![Det, Adj, Noun, Lit("is"), Prep, Det, Noun], '.'),
        (vec![Lit("please"), Verb, Det, Noun], '.'),
        (vec![Pron, Lit("did"), Lit("not"), Verb, Det, Noun, Time], '.'),
        (vec![Lit("there"), Lit("is"), Det, Adj, Noun, Prep, Det, Noun], '.'),
    ]
}

fn pseudo_lexicon(rng: &mut ChaCha8Rng) -> Lexicon {
    let mut seen = std::collections::BTreeSet::new();
    let mut make = |n: usize, rng: &mut ChaCha8Rng| -> Vec<String> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let syllables = 1 + rng.gen_range(0..3);
            let w: String = (0..syllables)
                .map(|_| {
                    format!(
                        "{}{}{}",
                        ONSET[rng.gen_range(0..ONSET.len())],
                        NUCLEUS[rng.gen_range(0..NUCLEUS.len())],
                        CODA[rng.gen_range(0..CODA.len())]
                    )
                })
                .collect();
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    };
    let verbs = make(40, rng);
    let nouns = make(160, rng);
    let adjs = make(40, rng);
    let fixed = (0..10)
        .map(|i| {
            let mut s = format!("{} {}", capitalize(&nouns[i]), verbs[i]);
            s.push(if i % 3 == 0 { '?' } else { '.' });
            s
        })
        .collect();
    Lexicon { verbs, nouns, adjs, fixed }
}

fn owned(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Generates `lines` raw phrasebook lines.
pub fn generate_corpus(style: CorpusStyle, lines: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = match style {
        CorpusStyle::Travel => Lexicon {
            verbs: owned(TRAVEL_VERB),
            nouns: owned(TRAVEL_NOUN),
            adjs: owned(TRAVEL_ADJ),
            fixed: owned(TRAVEL_FIXED),
        },
        CorpusStyle::Household => Lexicon {
            verbs: owned(HOME_VERB),
            nouns: owned(HOME_NOUN),
            adjs: owned(HOME_ADJ),
            fixed: owned(HOME_FIXED),
        },
        CorpusStyle::Pseudo => pseudo_lexicon(&mut rng),
    };
    let sampler = Sampler::new(lexicon);
    let templates = templates();
    let pick_template = zipf(templates.len(), 0.8);
    (0..lines)
        .map(|_| {
            if rng.gen_bool(0.08) {
                return sampler.lex.fixed[sampler.fixed.sample(&mut rng)].clone();
            }
            let (slots, term) = &templates[pick_template.sample(&mut rng)];
            let words: Vec<&str> = slots.iter().map(|s| sampler.word(*s, &mut rng)).collect();
            let mut line = capitalize(&words.join(" "));
            if words.len() > 5 && rng.gen_bool(0.2) {
                if let Some(i) = line.rfind(' ') {
                    line.insert(i, ',');
                }
            }
            line.push(*term);
            line
        })
        .collect()
}
