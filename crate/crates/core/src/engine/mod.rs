//! The spelling state machine: per-selection matrix construction, selection
//! handling with label selection and word predictions, undo, and sentence
//! commits to the knowledge base.

mod matrix;
mod session;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{KbError, KnowledgeBase};
use crate::metrics::TimingConfig;
use crate::text::{self, UserAlphabet, Word, SPACE};

pub use matrix::{matrix_total, near_square, Mandatory, MatrixDims, SelectionMatrix, Symbol, SymbolKind};
pub use session::{Applied, Delta, SelectionRecord, SpellSession};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("symbol {0:?} is not in the current matrix")]
    NotInMatrix(String),
    #[error("cell ({0}, {1}) is empty")]
    EmptyCell(usize, usize),
    #[error("cell ({0}, {1}) is outside the matrix")]
    OutOfBounds(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Always-present symbols, in display order. Must contain undo.
    pub mandatory: Vec<Mandatory>,
    /// Minimum number of prediction cells exceeded whenever enough
    /// candidates exist.
    pub p_sharp: usize,
    /// Show prediction symbols (and the prediction phase).
    pub predictions: bool,
    pub timing: TimingConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            mandatory: vec![
                Mandatory::Space,
                Mandatory::Terminator('.'),
                Mandatory::Terminator('?'),
                Mandatory::Undo,
            ],
            p_sharp: 4,
            predictions: true,
            timing: TimingConfig::default(),
        }
    }
}

impl EngineConfig {
    pub fn without_predictions() -> Self {
        Self {
            predictions: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !self.mandatory.contains(&Mandatory::Undo) {
            return Err(EngineError::Config("mandatory symbols must include undo".into()));
        }
        let unique: HashSet<_> = self.mandatory.iter().collect();
        if unique.len() != self.mandatory.len() {
            return Err(EngineError::Config("duplicate mandatory symbol".into()));
        }
        for m in &self.mandatory {
            if let Mandatory::Terminator(c) = m {
                if !['.', '?', '!'].contains(c) {
                    return Err(EngineError::Config(format!("{c:?} is not a terminator")));
                }
            }
        }
        self.timing.validate().map_err(EngineError::Config)
    }

    /// The alphabet implied by the configured terminators.
    pub fn alphabet(&self) -> UserAlphabet {
        if self.mandatory.contains(&Mandatory::Terminator('!')) {
            UserAlphabet::with_exclamation()
        } else {
            UserAlphabet::default()
        }
    }
}

/// Prediction spell string: the word remainder after `swp`, then a space.
pub fn prediction_spell(word: &str, swp: &str) -> String {
    let mut spell = word[swp.len()..].to_string();
    spell.push(SPACE);
    spell
}

/// Builds the selection matrix for the text spelled so far.
///
/// Predictions come from the sentence store first (words completing the
/// open sentence), then from word frequencies; the number shown follows
/// [`matrix_total`].
pub fn build_matrix(kb: &KnowledgeBase, spelled: &str, config: &EngineConfig) -> SelectionMatrix {
    let alphabet = config.alphabet();
    let ssp = text::ssp_with(spelled, &alphabet);
    let swp = text::swp(ssp);

    let characters: Vec<Symbol> = kb
        .char_candidates(swp)
        .into_iter()
        .map(Symbol::Character)
        .collect();
    let mandatory: Vec<Symbol> = config.mandatory.iter().copied().map(Symbol::Mandatory).collect();
    let base = characters.len() + mandatory.len();

    let available = if config.predictions {
        kb.words().prefix_words(swp) as usize
    } else {
        0
    };
    let dims = matrix_total(base, config.p_sharp, available);

    let mut words: Vec<Word> = Vec::with_capacity(dims.n_pred);
    if dims.n_pred > 0 {
        let mut seen: HashSet<String> = HashSet::new();
        for (w, _) in kb.ssp_distribution(ssp).into_iter().take(dims.n_pred) {
            seen.insert(w.as_str().to_string());
            words.push(w);
        }
        if words.len() < dims.n_pred {
            for (w, _) in kb.words().ranked(swp) {
                if words.len() == dims.n_pred {
                    break;
                }
                if seen.insert(w.clone()) {
                    words.push(Word::new(w).expect("stored words are valid"));
                }
            }
        }
    }
    let predictions = words
        .into_iter()
        .enumerate()
        .map(|(id, word)| {
            let spell = prediction_spell(word.as_str(), swp);
            Symbol::Prediction { id, word, spell }
        })
        .collect();
    SelectionMatrix::layout(dims, predictions, characters, mandatory)
}

/// Error-free selection policy for spelling a known target: the
/// lowest-id prediction whose spell string is the next chunk of
/// `remaining`, otherwise the symbol for its next character.
pub fn oracle_choice<'m>(matrix: &'m SelectionMatrix, remaining: &str) -> Option<&'m Symbol> {
    if let Some(sym) = matrix
        .symbols()
        .filter(|s| matches!(s, Symbol::Prediction { spell, .. } if remaining.starts_with(spell.as_str())))
        .min_by_key(|s| match s {
            Symbol::Prediction { id, .. } => *id,
            _ => usize::MAX,
        })
    {
        return Some(sym);
    }
    let next = remaining.chars().next()?;
    match next {
        SPACE => matrix.mandatory(Mandatory::Space),
        c if text::is_word_char(c) => matrix.character(c),
        c => matrix.mandatory(Mandatory::Terminator(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Sentence;

    fn worked_example_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.add_sentence_n(&Sentence::new("the_word_that_matters.").unwrap(), 2).unwrap();
        kb.add_sentence_n(&Sentence::new("the_end.").unwrap(), 5).unwrap();
        kb.add_word(&Word::new("those").unwrap(), 1);
        kb.add_word(&Word::new("xylophone").unwrap(), 1);
        kb
    }

    #[test]
    fn ssp_prediction_ranks_before_swp() {
        let kb = worked_example_kb();
        let m = build_matrix(&kb, "the_word_th", &EngineConfig::default());
        let preds: Vec<(usize, &str, &str)> = m.predictions().map(|(i, w, s)| (i, w.as_str(), s)).collect();
        assert_eq!(preds[0], (0, "that", "at_"));
        assert_eq!(preds[1], (1, "the", "e_"));
        assert_eq!(preds[2], (2, "those", "ose_"));
        assert_eq!(m.get(0, 0), Some(&Symbol::Prediction {
            id: 0,
            word: Word::new("that").unwrap(),
            spell: "at_".into(),
        }));
    }

    #[test]
    fn empty_text_offers_initial_letters() {
        let kb = worked_example_kb();
        let m = build_matrix(&kb, "", &EngineConfig::without_predictions());
        let chars: Vec<char> = m
            .symbols()
            .filter_map(|s| match s {
                Symbol::Character(c) => Some(*c),
                _ => None,
            })
            .collect();
        assert_eq!(chars, vec!['e', 'm', 't', 'w', 'x']);
        assert_eq!(m.n_pred(), 0);
        assert_eq!(m.n_mand(), 4);
    }

    #[test]
    fn empty_kb_gives_mandatory_only() {
        let m = build_matrix(&KnowledgeBase::new(), "", &EngineConfig::default());
        assert_eq!(m.symbols_len(), 4);
        assert_eq!((m.rows(), m.cols()), (2, 2));
        let labels: Vec<String> = m.symbols().map(Symbol::label).collect();
        assert_eq!(labels, ["_", ".", "?", "undo"]);
    }

    #[test]
    fn out_of_dictionary_keeps_mandatory_symbols() {
        let kb = worked_example_kb();
        let m = build_matrix(&kb, "qqq", &EngineConfig::default());
        assert_eq!(m.n_char(), 0);
        assert!(m.mandatory(Mandatory::Undo).is_some());
        assert!(m.mandatory(Mandatory::Space).is_some());
    }

    #[test]
    fn oracle_prefers_matching_prediction() {
        let kb = worked_example_kb();
        let config = EngineConfig::default();
        let m = build_matrix(&kb, "the_word_th", &config);
        assert_eq!(oracle_choice(&m, "at_matters.").map(Symbol::label), Some("0'".into()));
        assert_eq!(oracle_choice(&m, "ose."), Some(&Symbol::Character('o')));
        assert_eq!(oracle_choice(&m, "qua"), None);
        let m = build_matrix(&kb, "the_end", &config);
        assert_eq!(oracle_choice(&m, "."), Some(&Symbol::Mandatory(Mandatory::Terminator('.'))));
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        let mut c = EngineConfig::default();
        c.mandatory.retain(|m| *m != Mandatory::Undo);
        assert!(c.validate().is_err());
        let mut c = EngineConfig::default();
        c.mandatory.push(Mandatory::Terminator(';'));
        assert!(c.validate().is_err());
    }
}
