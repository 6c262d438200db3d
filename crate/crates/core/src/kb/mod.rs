//! The knowledge base: a word dictionary and a sentence store, both with
//! frequencies, answering the prefix queries the speller needs.

mod persist;
pub(crate) mod radix;

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

use crate::text::{self, is_word_char, NormalizeMode, Sentence, Word};
use radix::RadixTree;

pub use persist::KB_HEADER;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("{0:?} is not a candidate character after prefix {1:?}")]
    NotACandidate(char, String),
    #[error("sentence {0:?} contains no words")]
    EmptySentence(String),
    #[error("unsupported knowledge-base header {0:?}")]
    Version(String),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Word dictionary with occurrence counts.
#[derive(Debug, Clone, Default)]
pub struct WordTrie {
    tree: RadixTree,
}

impl WordTrie {
    pub fn insert(&mut self, word: &Word, count: u64) -> u64 {
        self.tree.insert(word.as_str().as_bytes(), count)
    }

    pub fn count(&self, word: &str) -> u64 {
        self.tree.get(word.as_bytes())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.count(word) > 0
    }

    /// Total occurrences of words starting with `prefix`.
    pub fn prefix_count(&self, prefix: &str) -> u64 {
        self.tree.prefix_total(prefix.as_bytes())
    }

    /// Number of distinct words starting with `prefix`.
    pub fn prefix_words(&self, prefix: &str) -> u64 {
        self.tree.prefix_keys(prefix.as_bytes())
    }

    pub fn distinct(&self) -> u64 {
        self.tree.distinct()
    }

    pub fn occurrences(&self) -> u64 {
        self.tree.total()
    }

    /// Words starting with `prefix`, most frequent first, ties in
    /// lexicographic order. Lazy.
    pub fn ranked<'a>(&'a self, prefix: &str) -> impl Iterator<Item = (String, u64)> + 'a {
        self.tree
            .ranked(prefix.as_bytes())
            .map(|(k, n)| (bytes_to_string(k), n))
    }

    /// All words with their counts, lexicographically.
    pub fn iter(&self) -> impl Iterator<Item = (String, u64)> {
        self.tree
            .keys_with_prefix(b"")
            .into_iter()
            .map(|(k, n)| (bytes_to_string(k), n))
    }
}

/// Sentences with occurrence counts, indexed by text prefix.
#[derive(Debug, Clone, Default)]
pub struct SentenceStore {
    tree: RadixTree,
}

impl SentenceStore {
    pub fn insert(&mut self, sentence: &Sentence, count: u64) -> u64 {
        self.tree.insert(sentence.as_str().as_bytes(), count)
    }

    pub fn count(&self, sentence: &str) -> u64 {
        self.tree.get(sentence.as_bytes())
    }

    pub fn total(&self) -> u64 {
        self.tree.total()
    }

    pub fn distinct(&self) -> u64 {
        self.tree.distinct()
    }

    /// Summed count of sentences whose text starts with `prefix`.
    pub fn prefix_count(&self, prefix: &str) -> u64 {
        self.tree.prefix_total(prefix.as_bytes())
    }

    /// Sentences whose text starts with `prefix`, lexicographically.
    pub fn with_prefix(&self, prefix: &str) -> Vec<(String, u64)> {
        self.tree
            .keys_with_prefix(prefix.as_bytes())
            .into_iter()
            .map(|(k, n)| (bytes_to_string(k), n))
            .collect()
    }

    /// For sentences starting with `prefix`, the word characters that follow
    /// the prefix up to the next separator, with summed counts.
    fn word_runs(&self, prefix: &str) -> Vec<(String, u64)> {
        self.tree
            .run_totals(prefix.as_bytes(), |b| is_word_char(b as char))
            .into_iter()
            .map(|(k, n)| (bytes_to_string(k), n))
            .collect()
    }
}

fn bytes_to_string(bytes: Vec<u8>) -> String {
    // Keys are inserted from `&str` over an ASCII alphabet.
    String::from_utf8(bytes).expect("radix keys are ASCII")
}

/// Counts reported by an ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IngestStats {
    /// Sentence occurrences added (with multiplicity).
    pub sentences: u64,
    /// Distinct sentences added by this ingestion.
    pub new_sentences: u64,
    /// Distinct words in the KB after ingestion.
    pub distinct_words: u64,
    /// Word occurrences added.
    pub word_occurrences: u64,
    /// Characters of the added word occurrences.
    pub word_chars: u64,
    /// Lines whose trailing material had no terminator.
    pub unterminated: u64,
    /// Sentences without any word (e.g. a lone terminator).
    pub empty_sentences: u64,
}

impl IngestStats {
    pub fn mean_chars_per_word(&self) -> f64 {
        if self.word_occurrences == 0 {
            0.0
        } else {
            self.word_chars as f64 / self.word_occurrences as f64
        }
    }

    pub fn mean_words_per_sentence(&self) -> f64 {
        if self.sentences == 0 {
            0.0
        } else {
            self.word_occurrences as f64 / self.sentences as f64
        }
    }
}

/// One line of a phrasebook: an optional `count<TAB>` prefix then raw text.
pub fn parse_phrasebook_line(line: &str) -> (u64, &str) {
    if let Some((head, rest)) = line.split_once('\t') {
        if let Ok(n) = head.trim().parse::<u64>() {
            return (n, rest);
        }
    }
    (1, line)
}

/// Word prediction distribution entry.
pub type Ranked = Vec<(Word, f64)>;

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    words: WordTrie,
    sentences: SentenceStore,
    /// Word counts added outside any sentence.
    extra_words: BTreeMap<String, u64>,
    word_chars: u64,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn words(&self) -> &WordTrie {
        &self.words
    }

    pub fn sentences(&self) -> &SentenceStore {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.words.distinct() == 0
    }

    /// Words inserted on their own (not derived from a stored sentence).
    pub fn extra_words(&self) -> &BTreeMap<String, u64> {
        &self.extra_words
    }

    pub fn stats(&self) -> IngestStats {
        IngestStats {
            sentences: self.sentences.total(),
            new_sentences: self.sentences.distinct(),
            distinct_words: self.words.distinct(),
            word_occurrences: self.words.occurrences(),
            word_chars: self.word_chars,
            unterminated: 0,
            empty_sentences: 0,
        }
    }

    /// Records a completed sentence once.
    pub fn add_sentence(&mut self, sentence: &Sentence) -> Result<(), KbError> {
        self.add_sentence_n(sentence, 1)
    }

    /// Records `count` occurrences of a sentence and of each of its words
    /// (words repeated inside the sentence are counted each time).
    pub fn add_sentence_n(&mut self, sentence: &Sentence, count: u64) -> Result<(), KbError> {
        let words: Vec<Word> = sentence
            .words()
            .map(|w| Word::new(w).expect("split on word characters"))
            .collect();
        if words.is_empty() {
            return Err(KbError::EmptySentence(sentence.to_string()));
        }
        if count == 0 {
            return Ok(());
        }
        self.sentences.insert(sentence, count);
        for w in &words {
            self.words.insert(w, count);
            self.word_chars += w.as_str().len() as u64 * count;
        }
        Ok(())
    }

    /// Adds a word outside any sentence.
    pub fn add_word(&mut self, word: &Word, count: u64) {
        if count == 0 {
            return;
        }
        self.words.insert(word, count);
        self.word_chars += word.as_str().len() as u64 * count;
        *self.extra_words.entry(word.as_str().to_string()).or_default() += count;
    }

    /// Reads a phrasebook: each line is `count<TAB>text` or bare `text`.
    /// Lines are normalized and split into sentences; every sentence gets
    /// the line's count.
    pub fn ingest_phrasebook<R: BufRead>(&mut self, reader: R, mode: NormalizeMode) -> Result<IngestStats, KbError> {
        let before = self.stats();
        let mut stats = IngestStats::default();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| KbError::Io { line: idx + 1, source })?;
            let (count, raw) = parse_phrasebook_line(&line);
            let split = text::split_sentences(&text::normalize(raw, mode));
            if !split.discarded.is_empty() {
                stats.unterminated += 1;
            }
            for sentence in &split.sentences {
                match self.add_sentence_n(sentence, count) {
                    Ok(()) => {}
                    Err(KbError::EmptySentence(_)) => stats.empty_sentences += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        let after = self.stats();
        stats.sentences = after.sentences - before.sentences;
        stats.new_sentences = after.new_sentences - before.new_sentences;
        stats.distinct_words = after.distinct_words;
        stats.word_occurrences = after.word_occurrences - before.word_occurrences;
        stats.word_chars = after.word_chars - before.word_chars;
        Ok(stats)
    }

    /// Characters `c` such that some stored word starts with `prefix + c`,
    /// in byte order.
    pub fn char_candidates(&self, prefix: &str) -> Vec<char> {
        self.words
            .tree
            .next_bytes(prefix.as_bytes())
            .into_iter()
            .map(char::from)
            .collect()
    }

    /// Label selection: the longest string starting with `c` that every word
    /// with prefix `prefix + c` continues with.
    pub fn label_extension(&self, prefix: &str, c: char) -> Result<String, KbError> {
        if !c.is_ascii() {
            return Err(KbError::NotACandidate(c, prefix.to_string()));
        }
        self.words
            .tree
            .forced_extension(prefix.as_bytes(), c as u8)
            .map(bytes_to_string)
            .ok_or_else(|| KbError::NotACandidate(c, prefix.to_string()))
    }

    /// Probability of each word starting with `prefix` to be the next word,
    /// from word frequencies alone.
    pub fn swp_distribution(&self, prefix: &str) -> Ranked {
        let total = self.words.prefix_count(prefix);
        if total == 0 {
            return Vec::new();
        }
        self.words
            .ranked(prefix)
            .map(|(w, n)| (Word::new(w).expect("stored words are valid"), n as f64 / total as f64))
            .collect()
    }

    /// Probability of each word to complete the open sentence `ssp`, from
    /// the stored sentences whose text starts with `ssp`. Empty when no
    /// stored sentence matches.
    pub fn ssp_distribution(&self, ssp: &str) -> Ranked {
        let swp = text::swp(ssp);
        let mut counts: Vec<(String, u64)> = self
            .sentences
            .word_runs(ssp)
            .into_iter()
            .map(|(rest, n)| (format!("{swp}{rest}"), n))
            .filter(|(w, _)| !w.is_empty())
            .collect();
        let total: u64 = counts.iter().map(|c| c.1).sum();
        if total == 0 {
            return Vec::new();
        }
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        counts
            .into_iter()
            .map(|(w, n)| (Word::new(w).expect("stored words are valid"), n as f64 / total as f64))
            .collect()
    }
}
