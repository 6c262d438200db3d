//! Fixtures shared by the benchmarks.

use speller_core::insilico::{read_corpus, synth};
use speller_core::{KnowledgeBase, NormalizeMode};

/// Knowledge base built from a bundled mini-corpus.
pub fn bundled_kb(name: &str) -> KnowledgeBase {
    let (_, raw) = synth::BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled corpus {name:?}"));
    let mut kb = KnowledgeBase::new();
    for (s, n) in read_corpus(raw.as_bytes(), NormalizeMode::default()).expect("bundled corpus parses") {
        kb.add_sentence_n(&s, n).expect("corpus sentences have words");
    }
    kb
}
