//! Desk experiments: phrasebook splitting, experiment knowledge bases,
//! automated error-free spelling, and CSV reports.

mod report;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{oracle_choice, EngineConfig, EngineError, SpellSession};
use crate::kb::{parse_phrasebook_line, KbError, KnowledgeBase};
use crate::metrics::{self, MetricsError, Phase, RateConfig, RateEstimate, SpellerKind};
use crate::text::{self, NormalizeMode, Sentence, Word};

pub use report::{write_csv, ReportRow, CSV_HEADER};

#[derive(Debug, Error)]
pub enum InsilicoError {
    #[error("corpus has {distinct} distinct sentences, {needed} needed")]
    InsufficientSentences { distinct: usize, needed: usize },
    #[error("cannot spell word {word:?} of sentence {sentence:?}")]
    Unspellable { word: String, sentence: String },
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Distinct sentences with occurrence counts, in first-seen order.
pub type Corpus = Vec<(Sentence, u64)>;

/// Reads a phrasebook into a corpus, merging repeated sentences into counts.
pub fn read_corpus<R: BufRead>(reader: R, mode: NormalizeMode) -> Result<Corpus, InsilicoError> {
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut corpus: Corpus = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| InsilicoError::Io { line: idx + 1, source })?;
        let (count, raw) = parse_phrasebook_line(&line);
        for sentence in text::split_sentences(&text::normalize(raw, mode)).sentences {
            if sentence.words().next().is_none() {
                continue;
            }
            match index.get(sentence.as_str()) {
                Some(&i) => corpus[i].1 += count,
                None => {
                    index.insert(sentence.as_str().to_string(), corpus.len());
                    corpus.push((sentence, count));
                }
            }
        }
    }
    Ok(corpus)
}

/// Writes `count<TAB>sentence` lines.
pub fn write_corpus<W: Write>(mut sink: W, corpus: &[(Sentence, u64)]) -> std::io::Result<()> {
    for (s, n) in corpus {
        writeln!(sink, "{n}\t{s}")?;
    }
    sink.flush()
}

/// Test phrasebooks inside (`a_in`) and outside (`a_out`) the knowledge
/// base, and the knowledge-base source `p_l` (the corpus minus `a_out`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhrasebookSplit {
    pub a_in: Corpus,
    pub a_out: Corpus,
    pub p_l: Corpus,
    pub n_in: usize,
    pub n_out: usize,
    pub seed: u64,
}

/// Draws disjoint uniform samples of `n_in` and `n_out` distinct sentences.
pub fn split_phrasebook(corpus: &[(Sentence, u64)], n_in: usize, n_out: usize, seed: u64) -> Result<PhrasebookSplit, InsilicoError> {
    let needed = n_in + n_out;
    if corpus.len() < needed {
        return Err(InsilicoError::InsufficientSentences {
            distinct: corpus.len(),
            needed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, corpus.len(), needed).into_vec();
    let (in_idx, out_idx) = picked.split_at(n_in);
    let mut is_out = vec![false; corpus.len()];
    for &i in out_idx {
        is_out[i] = true;
    }
    Ok(PhrasebookSplit {
        a_in: in_idx.iter().map(|&i| corpus[i].clone()).collect(),
        a_out: out_idx.iter().map(|&i| corpus[i].clone()).collect(),
        p_l: corpus
            .iter()
            .zip(&is_out)
            .filter(|(_, &out)| !out)
            .map(|(e, _)| e.clone())
            .collect(),
        n_in,
        n_out,
        seed,
    })
}

/// Knowledge base of all `p_l` sentences, plus every `a_out` word missing
/// from them with count 1.
pub fn build_experiment_kb(split: &PhrasebookSplit) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    for (s, n) in &split.p_l {
        kb.add_sentence_n(s, *n).expect("corpus sentences have words");
    }
    for (s, _) in &split.a_out {
        for w in s.words() {
            if !kb.words().contains(w) {
                kb.add_word(&Word::new(w).expect("sentence words are valid"), 1);
            }
        }
    }
    kb
}

/// Which test phrasebook a record covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PhrasebookTag {
    AIn,
    AOut,
    /// Any other phrasebook.
    Other,
}

impl PhrasebookTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhrasebookTag::AIn => "A_in",
            PhrasebookTag::AOut => "A_out",
            PhrasebookTag::Other => "other",
        }
    }
}

impl fmt::Display for PhrasebookTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhrasebookTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a_in" | "ain" | "in" => Ok(PhrasebookTag::AIn),
            "a_out" | "aout" | "out" => Ok(PhrasebookTag::AOut),
            "other" => Ok(PhrasebookTag::Other),
            _ => Err(format!("unknown phrasebook tag {s:?}")),
        }
    }
}

/// Totals for spelling one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SentenceRow {
    pub chars: u64,
    pub words: u64,
    pub selections: u64,
    pub intensifications: u64,
    pub time_s: f64,
}

/// Size of the fixed baseline matrix.
pub const BASELINE_DIMS: (usize, usize) = (6, 6);

/// Spells `target` error-free and returns its totals. The knowledge base
/// is not modified.
pub fn simulate_sentence(
    kb: &KnowledgeBase,
    target: &Sentence,
    speller: SpellerKind,
    config: &EngineConfig,
) -> Result<SentenceRow, InsilicoError> {
    let chars = target.len() as u64;
    let words = target.words().count() as u64;
    if speller == SpellerKind::Baseline {
        let (r, c) = BASELINE_DIMS;
        return Ok(SentenceRow {
            chars,
            words,
            selections: chars,
            intensifications: chars * metrics::intensifications(r, c, &config.timing),
            time_s: chars as f64 * metrics::selection_time(r, c, &config.timing, Phase::Plain),
        });
    }
    let session = spell_with_oracle(kb, target, speller, config)?;
    let intensifications = session
        .log()
        .iter()
        .map(|r| metrics::intensifications(r.nrows, r.ncols, &config.timing))
        .sum();
    Ok(SentenceRow {
        chars,
        words,
        selections: session.log().len() as u64,
        intensifications,
        time_s: session.virtual_time(),
    })
}

/// Runs the oracle policy on a fresh session until `target` is spelled.
pub fn spell_with_oracle(
    kb: &KnowledgeBase,
    target: &Sentence,
    speller: SpellerKind,
    config: &EngineConfig,
) -> Result<SpellSession, InsilicoError> {
    let mut config = config.clone();
    config.predictions = speller.predictions();
    let goal = target.as_str();
    let mut session = SpellSession::new(kb, &config);
    while session.spelled() != goal {
        let done = session.spelled().len();
        let unspellable = || InsilicoError::Unspellable {
            word: word_at(goal, done).to_string(),
            sentence: goal.to_string(),
        };
        let symbol = oracle_choice(session.matrix(), &goal[done..]).ok_or_else(unspellable)?.clone();
        session.apply_frozen(kb, &config, &symbol)?;
        if !goal.starts_with(session.spelled()) {
            return Err(unspellable());
        }
    }
    Ok(session)
}

fn word_at(sentence: &str, at: usize) -> &str {
    let start = sentence[..at].rfind(|c: char| !text::is_word_char(c)).map_or(0, |i| i + 1);
    let end = sentence[at..]
        .find(|c: char| !text::is_word_char(c))
        .map_or(sentence.len(), |i| at + i);
    &sentence[start..end]
}

/// Settings shared by the runs of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub lang: String,
    pub engine: EngineConfig,
    /// Commit each spelled sentence to the knowledge base before the next.
    pub learn: bool,
    pub seed: u64,
    /// `(n, runs)` for the rate estimates attached to each record.
    pub rates: Option<(usize, usize)>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            lang: "en".into(),
            engine: EngineConfig::default(),
            learn: false,
            seed: 0,
            rates: None,
        }
    }
}

/// Per-sentence rows of one (speller, phrasebook) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub lang: String,
    pub speller: SpellerKind,
    pub phrasebook: PhrasebookTag,
    pub rows: Vec<SentenceRow>,
    pub nrs: u32,
    pub rates: Option<RateEstimate>,
    pub seed: u64,
}

/// Aggregates over the rows of a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregates {
    pub chars: u64,
    pub words: u64,
    pub sentences: u64,
    pub selections: u64,
    pub intensifications: u64,
    pub time_s: f64,
    pub mean_t_char_s: f64,
    pub mean_t_word_s: f64,
    pub ocm: f64,
    pub sm: f64,
    pub isr: f64,
}

impl SimulationRecord {
    pub fn predictions(&self) -> bool {
        self.speller.predictions()
    }

    pub fn aggregates(&self) -> Aggregates {
        let sum = |f: fn(&SentenceRow) -> u64| self.rows.iter().map(f).sum::<u64>();
        let chars = sum(|r| r.chars);
        let words = sum(|r| r.words);
        let selections = sum(|r| r.selections);
        let intensifications = sum(|r| r.intensifications);
        let time_s: f64 = self.rows.iter().map(|r| r.time_s).sum();
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        Aggregates {
            chars,
            words,
            sentences: self.rows.len() as u64,
            selections,
            intensifications,
            time_s,
            mean_t_char_s: ratio(time_s, chars as f64),
            mean_t_word_s: ratio(time_s, words as f64),
            ocm: ratio(chars as f64 * 60.0, time_s),
            sm: ratio(selections as f64 * 60.0, time_s),
            isr: ratio(intensifications as f64, selections as f64 * self.nrs as f64),
        }
    }
}

/// Spells every sentence of `phrasebook` with one speller.
///
/// Sentences run in parallel on the current rayon pool unless
/// `config.learn` is set, in which case they run in order and each one is
/// committed to a private copy of `kb` once spelled.
pub fn simulate_phrasebook(
    kb: &KnowledgeBase,
    phrasebook: &[Sentence],
    speller: SpellerKind,
    tag: PhrasebookTag,
    config: &SimulationConfig,
) -> Result<SimulationRecord, InsilicoError> {
    let rows = if config.learn && speller != SpellerKind::Baseline {
        let mut kb = kb.clone();
        let mut rows = Vec::with_capacity(phrasebook.len());
        for s in phrasebook {
            rows.push(simulate_sentence(&kb, s, speller, &config.engine)?);
            kb.add_sentence(s)?;
        }
        rows
    } else {
        phrasebook
            .par_iter()
            .map(|s| simulate_sentence(kb, s, speller, &config.engine))
            .collect::<Result<Vec<_>, _>>()?
    };
    let rates = match config.rates {
        Some((n, runs)) => Some(rates_for(kb, speller, n, runs, config)?),
        None => None,
    };
    Ok(SimulationRecord {
        lang: config.lang.clone(),
        speller,
        phrasebook: tag,
        rows,
        nrs: config.engine.timing.nrs,
        rates,
        seed: config.seed,
    })
}

fn rates_for(kb: &KnowledgeBase, speller: SpellerKind, n: usize, runs: usize, config: &SimulationConfig) -> Result<RateEstimate, InsilicoError> {
    let mut rc = RateConfig::new(speller, n, runs, config.seed);
    rc.engine = config.engine.clone();
    Ok(metrics::estimate_rates(kb, &rc)?)
}

/// The three spellers compared by an experiment, in report order.
pub const SPELLERS: [SpellerKind; 3] = [
    SpellerKind::Polymorph { predictions: true },
    SpellerKind::Polymorph { predictions: false },
    SpellerKind::Baseline,
];

/// Runs every speller over `a_in` and `a_out`. Rate estimates depend only
/// on the knowledge base and the speller, so each is computed once and
/// shared by both phrasebooks.
pub fn run_experiment(
    kb: &KnowledgeBase,
    a_in: &[Sentence],
    a_out: &[Sentence],
    config: &SimulationConfig,
) -> Result<Vec<SimulationRecord>, InsilicoError> {
    let no_rates = SimulationConfig {
        rates: None,
        ..config.clone()
    };
    let mut records = Vec::with_capacity(SPELLERS.len() * 2);
    for speller in SPELLERS {
        let rates = match config.rates {
            Some((n, runs)) => Some(rates_for(kb, speller, n, runs, config)?),
            None => None,
        };
        for (tag, book) in [(PhrasebookTag::AIn, a_in), (PhrasebookTag::AOut, a_out)] {
            let mut record = simulate_phrasebook(kb, book, speller, tag, &no_rates)?;
            record.rates = rates;
            records.push(record);
        }
    }
    Ok(records)
}

/// Sentences of a corpus, dropping counts.
pub fn sentences_of(corpus: &[(Sentence, u64)]) -> Vec<Sentence> {
    corpus.iter().map(|(s, _)| s.clone()).collect()
}
