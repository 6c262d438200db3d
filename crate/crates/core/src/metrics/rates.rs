//! Monte-Carlo estimation of the information rate, absolute rate and
//! absolute redundancy of a speller's channel code.
//!
//! Each run draws words independently from the knowledge-base unigram
//! distribution, joins them with spaces, and spells the stream error-free.
//! At every selection the model probability of the chosen symbol is the
//! unigram mass of the continuations routed to that symbol by the selection
//! policy, divided by the mass of all continuations of the current word
//! prefix still possible. Words offered as predictions and passed over are
//! no longer possible until the word ends. The per-selection surprisal
//! averages to `r_n`; the log of the number of non-empty cells averages to
//! `R_n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::engine::{build_matrix, oracle_choice, EngineConfig, EngineError, Mandatory, Symbol};
use crate::kb::KnowledgeBase;
use crate::text::{self, UserAlphabet, SPACE};

/// Which channel code is being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpellerKind {
    /// Fixed character-by-character matrix.
    Baseline,
    /// Knowledge-base driven polymorphic matrix.
    Polymorph { predictions: bool },
}

impl SpellerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpellerKind::Baseline => "baseline",
            SpellerKind::Polymorph { .. } => "polymorph",
        }
    }

    pub fn predictions(&self) -> bool {
        matches!(self, SpellerKind::Polymorph { predictions: true })
    }
}

impl fmt::Display for SpellerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpellerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" | "p3speller" => Ok(SpellerKind::Baseline),
            "polymorph" => Ok(SpellerKind::Polymorph { predictions: true }),
            other => Err(format!("unknown speller {other:?} (expected polymorph or baseline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub speller: SpellerKind,
    /// Selections per run.
    pub n: usize,
    pub runs: usize,
    pub seed: u64,
    /// Matrix settings for the polymorphic speller; `predictions` is taken
    /// from `speller`.
    pub engine: EngineConfig,
}

impl RateConfig {
    pub fn new(speller: SpellerKind, n: usize, runs: usize, seed: u64) -> Self {
        Self {
            speller,
            n,
            runs,
            seed,
            engine: EngineConfig::default(),
        }
    }
}

/// Rates in bits per selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub r_n: f64,
    pub big_r_n: f64,
    pub d_n: f64,
    pub n: usize,
    pub runs: usize,
    /// Standard error over runs of the per-run redundancy.
    pub std_error: f64,
}

struct RunResult {
    surprisal: f64,
    sizes: BTreeMap<usize, u64>,
}

/// Estimates `r_n`, `R_n` and `D_n = R_n - r_n`.
pub fn estimate_rates(kb: &KnowledgeBase, config: &RateConfig) -> Result<RateEstimate, MetricsError> {
    if config.n < 1 {
        return Err(MetricsError::NonPositive("n"));
    }
    if config.runs < 1 {
        return Err(MetricsError::NonPositive("runs"));
    }
    if kb.is_empty() {
        return Err(MetricsError::EmptyKnowledgeBase);
    }
    let vocabulary: Vec<(String, u64)> = kb.words().iter().collect();
    let sampler = WeightedIndex::new(vocabulary.iter().map(|(_, n)| *n)).map_err(|_| MetricsError::EmptyKnowledgeBase)?;
    let mut engine = config.engine.clone();
    engine.predictions = config.speller.predictions();

    let results: Vec<RunResult> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(run as u64);
            let mut words = std::iter::from_fn(|| Some(vocabulary[sampler.sample(&mut rng)].0.as_str()));
            simulate_run(kb, config.speller, &engine, config.n, &mut words)
        })
        .collect::<Result<_, _>>()?;

    let n = config.n as f64;
    let runs = config.runs as f64;
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    for r in &results {
        for (k, c) in &r.sizes {
            *histogram.entry(*k).or_default() += c;
        }
    }
    let total_selections = (config.n * config.runs) as f64;
    // Grouped by alphabet size so a constant alphabet gives log2 |S| exactly.
    let big_r_n: f64 = histogram
        .iter()
        .map(|(&k, &c)| (c as f64 / total_selections) * (k as f64).log2())
        .sum();
    let per_run_r: Vec<f64> = results.iter().map(|r| r.surprisal / n).collect();
    let r_n = per_run_r.iter().sum::<f64>() / runs;
    let per_run_d: Vec<f64> = results
        .iter()
        .zip(&per_run_r)
        .map(|(r, rr)| {
            let big: f64 = r.sizes.iter().map(|(&k, &c)| (c as f64 / n) * (k as f64).log2()).sum();
            big - rr
        })
        .collect();
    let mean_d = per_run_d.iter().sum::<f64>() / runs;
    let std_error = if config.runs > 1 {
        let var = per_run_d.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (runs - 1.0);
        (var / runs).sqrt()
    } else {
        0.0
    };
    Ok(RateEstimate {
        r_n,
        big_r_n,
        d_n: big_r_n - r_n,
        n: config.n,
        runs: config.runs,
        std_error,
    })
}

/// Spells `n` selections of the word stream and accumulates surprisal and
/// alphabet sizes.
fn simulate_run<'w>(
    kb: &KnowledgeBase,
    speller: SpellerKind,
    engine: &EngineConfig,
    n: usize,
    words: &mut impl Iterator<Item = &'w str>,
) -> Result<RunResult, MetricsError> {
    let baseline_size = UserAlphabet::default().channel_size();
    let mut target = String::new();
    let mut spelled = String::new();
    let mut surprisal = 0.0;
    let mut sizes: BTreeMap<usize, u64> = BTreeMap::new();
    // Predicted words ruled out for the word being spelled.
    let mut excluded: BTreeSet<String> = BTreeSet::new();

    for _ in 0..n {
        // Keep the current word and its closing space in the target.
        while !target[spelled.len()..].contains(SPACE) {
            let w = words.next().ok_or(MetricsError::EmptyKnowledgeBase)?;
            target.push_str(w);
            target.push(SPACE);
        }
        let remaining = &target[spelled.len()..];
        let swp = text::swp(&spelled);
        let excluded_below = |prefix: &str| -> u64 {
            excluded
                .iter()
                .filter(|w| w.starts_with(prefix))
                .map(|w| kb.words().count(w))
                .sum()
        };
        let prefix_mass = kb.words().prefix_count(swp) - excluded_below(swp);

        let (mass, size, piece) = match speller {
            SpellerKind::Baseline => {
                let next = remaining.chars().next().expect("target extends past spelled text");
                let mass = if next == SPACE {
                    kb.words().count(swp)
                } else {
                    kb.words().prefix_count(&format!("{swp}{next}"))
                };
                (mass, baseline_size, next.to_string())
            }
            SpellerKind::Polymorph { .. } => {
                let matrix = build_matrix(kb, &spelled, engine);
                let symbol = oracle_choice(&matrix, remaining)
                    .ok_or_else(|| stuck(remaining))?
                    .clone();
                let offered: BTreeSet<&str> = matrix
                    .predictions()
                    .map(|(_, w, _)| w.as_str())
                    .filter(|w| !excluded.contains(*w))
                    .collect();
                let claimed_below = |prefix: &str| -> u64 {
                    offered
                        .iter()
                        .filter(|w| w.starts_with(prefix))
                        .map(|w| kb.words().count(w))
                        .sum()
                };
                let (mass, piece) = match &symbol {
                    Symbol::Prediction { word, spell, .. } => (kb.words().count(word.as_str()), spell.clone()),
                    Symbol::Character(c) => {
                        let prefix = format!("{swp}{c}");
                        let mass = kb.words().prefix_count(&prefix) - excluded_below(&prefix) - claimed_below(&prefix);
                        (mass, kb.label_extension(swp, *c).map_err(EngineError::from)?)
                    }
                    Symbol::Mandatory(Mandatory::Space) => {
                        let gone = offered.contains(swp) || excluded.contains(swp);
                        (if gone { 0 } else { kb.words().count(swp) }, SPACE.to_string())
                    }
                    other => return Err(stuck(&other.label())),
                };
                if piece.ends_with(SPACE) {
                    excluded.clear();
                } else {
                    excluded.extend(offered.into_iter().map(str::to_string));
                }
                (mass, matrix.symbols_len(), piece)
            }
        };
        if mass == 0 || prefix_mass == 0 {
            return Err(stuck(remaining));
        }
        surprisal -= (mass as f64 / prefix_mass as f64).log2();
        *sizes.entry(size).or_default() += 1;
        spelled.push_str(&piece);
    }
    Ok(RunResult { surprisal, sizes })
}

fn stuck(at: &str) -> MetricsError {
    MetricsError::Engine(EngineError::NotInMatrix(at.chars().take(16).collect()))
}
