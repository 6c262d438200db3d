use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::{build_matrix, EngineConfig, EngineError, Mandatory, SelectionMatrix, Symbol, SymbolKind};
use crate::kb::KnowledgeBase;
use crate::metrics::{self, MetricsError, MetricsReport, Phase};
use crate::text::{self, Sentence, SPACE};

/// Text change caused by one selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", content = "text", rename_all = "lowercase")]
pub enum Delta {
    Spelled(String),
    Erased(String),
}

impl Delta {
    pub fn spelled(&self) -> Option<&str> {
        match self {
            Delta::Spelled(s) => Some(s),
            Delta::Erased(_) => None,
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Spelled(s) => f.write_str(s),
            Delta::Erased(s) => write!(f, "-{s}"),
        }
    }
}

/// One logged selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRecord {
    pub step: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub n_char: usize,
    pub n_mand: usize,
    pub n_pred: usize,
    pub symbol_kind: SymbolKind,
    pub delta: Delta,
    pub correct: Option<bool>,
    /// Virtual clock after this selection, in seconds.
    pub t_virtual_s: f64,
    pub phase: Phase,
}

/// Result of applying a selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub delta: Delta,
    /// The sentence closed by a terminator selection, if it has words.
    pub completed: Option<Sentence>,
}

#[derive(Debug, Clone)]
struct UndoEntry {
    previous: String,
    log_index: usize,
}

/// State of one spelling session.
#[derive(Debug, Clone)]
pub struct SpellSession {
    spelled: String,
    undo_stack: Vec<UndoEntry>,
    log: Vec<SelectionRecord>,
    completed: Vec<Sentence>,
    clock: f64,
    matrix: SelectionMatrix,
}

impl SpellSession {
    pub fn new(kb: &KnowledgeBase, config: &EngineConfig) -> Self {
        Self {
            spelled: String::new(),
            undo_stack: Vec::new(),
            log: Vec::new(),
            completed: Vec::new(),
            clock: 0.0,
            matrix: build_matrix(kb, "", config),
        }
    }

    pub fn spelled(&self) -> &str {
        &self.spelled
    }

    pub fn ssp(&self) -> &str {
        text::ssp(&self.spelled)
    }

    pub fn swp(&self) -> &str {
        text::swp(self.ssp())
    }

    pub fn matrix(&self) -> &SelectionMatrix {
        &self.matrix
    }

    pub fn log(&self) -> &[SelectionRecord] {
        &self.log
    }

    pub fn completed(&self) -> &[Sentence] {
        &self.completed
    }

    pub fn virtual_time(&self) -> f64 {
        self.clock
    }

    pub fn undo_depth(&self) -> usize {
        self.undo_stack.len()
    }

    pub fn symbol_at(&self, row: usize, col: usize) -> Result<&Symbol, EngineError> {
        if row >= self.matrix.rows() || col >= self.matrix.cols() {
            return Err(EngineError::OutOfBounds(row, col));
        }
        self.matrix.get(row, col).ok_or(EngineError::EmptyCell(row, col))
    }

    /// Applies a selection without writing to the knowledge base and
    /// without rebuilding the matrix. Callers sharing a KB commit
    /// `completed` themselves, then call [`SpellSession::refresh`].
    pub fn advance(
        &mut self,
        kb: &KnowledgeBase,
        config: &EngineConfig,
        symbol: &Symbol,
        correct: Option<bool>,
    ) -> Result<Applied, EngineError> {
        if !self.matrix.contains(symbol) {
            return Err(EngineError::NotInMatrix(symbol.label()));
        }
        let mut completed = None;
        let delta = match symbol {
            Symbol::Mandatory(Mandatory::Undo) => match self.undo_stack.pop() {
                Some(entry) => {
                    let erased = self.spelled[entry.previous.len()..].to_string();
                    self.spelled = entry.previous;
                    if let Some(rec) = self.log.get_mut(entry.log_index) {
                        rec.correct.get_or_insert(false);
                    }
                    Delta::Erased(erased)
                }
                None => Delta::Erased(String::new()),
            },
            other => {
                let piece = match other {
                    Symbol::Character(c) => kb.label_extension(self.swp(), *c)?,
                    Symbol::Prediction { spell, .. } => spell.clone(),
                    Symbol::Mandatory(Mandatory::Space) => SPACE.to_string(),
                    Symbol::Mandatory(Mandatory::Terminator(t)) => {
                        let candidate = format!("{}{t}", self.ssp());
                        completed = Sentence::with_alphabet(candidate, &config.alphabet())
                            .ok()
                            .filter(|s| s.words().next().is_some());
                        t.to_string()
                    }
                    Symbol::Mandatory(Mandatory::Undo) => unreachable!(),
                };
                self.undo_stack.push(UndoEntry {
                    previous: self.spelled.clone(),
                    log_index: self.log.len(),
                });
                self.spelled.push_str(&piece);
                Delta::Spelled(piece)
            }
        };

        let phase = if config.predictions && self.matrix.n_pred() > 0 {
            Phase::Prediction
        } else {
            Phase::Plain
        };
        self.clock += metrics::selection_time(self.matrix.rows(), self.matrix.cols(), &config.timing, phase);
        self.log.push(SelectionRecord {
            step: self.log.len() + 1,
            nrows: self.matrix.rows(),
            ncols: self.matrix.cols(),
            n_char: self.matrix.n_char(),
            n_mand: self.matrix.n_mand(),
            n_pred: self.matrix.n_pred(),
            symbol_kind: symbol.kind(),
            delta: delta.clone(),
            correct,
            t_virtual_s: self.clock,
            phase,
        });
        if let Some(s) = &completed {
            self.completed.push(s.clone());
        }
        Ok(Applied { delta, completed })
    }

    /// Rebuilds the matrix for the current text.
    pub fn refresh(&mut self, kb: &KnowledgeBase, config: &EngineConfig) {
        self.matrix = build_matrix(kb, &self.spelled, config);
    }

    /// Applies a selection, commits a completed sentence to the knowledge
    /// base, and rebuilds the matrix.
    pub fn apply_selection(
        &mut self,
        kb: &mut KnowledgeBase,
        config: &EngineConfig,
        symbol: &Symbol,
    ) -> Result<Applied, EngineError> {
        let applied = self.advance(kb, config, symbol, None)?;
        if let Some(s) = &applied.completed {
            kb.add_sentence(s)?;
        }
        self.refresh(kb, config);
        Ok(applied)
    }

    /// Applies a selection against a read-only knowledge base.
    pub fn apply_frozen(
        &mut self,
        kb: &KnowledgeBase,
        config: &EngineConfig,
        symbol: &Symbol,
    ) -> Result<Applied, EngineError> {
        let applied = self.advance(kb, config, symbol, None)?;
        self.refresh(kb, config);
        Ok(applied)
    }

    /// Aggregates the selection log. Selections flagged incorrect (or
    /// undone) count as errors.
    pub fn metrics(&self, config: &EngineConfig) -> Result<MetricsReport, MetricsError> {
        if self.log.is_empty() {
            return Err(MetricsError::EmptyLog);
        }
        let intensifications: u64 = self
            .log
            .iter()
            .map(|r| metrics::intensifications(r.nrows, r.ncols, &config.timing))
            .sum();
        let errors = self.log.iter().filter(|r| r.correct == Some(false)).count() as u64;
        MetricsReport::from_totals(
            self.spelled.len() as u64,
            self.log.len() as u64,
            intensifications,
            self.clock,
            config.timing.nrs,
            Some(errors),
        )
    }

    /// Writes the log as CSV:
    /// `step,nrows,ncols,n_char,n_mand,n_pred,symbol_kind,delta,correct,t_virtual_s`.
    pub fn write_log_csv<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "step", "nrows", "ncols", "n_char", "n_mand", "n_pred", "symbol_kind", "delta", "correct", "t_virtual_s",
        ])?;
        for r in &self.log {
            w.write_record([
                r.step.to_string(),
                r.nrows.to_string(),
                r.ncols.to_string(),
                r.n_char.to_string(),
                r.n_mand.to_string(),
                r.n_pred.to_string(),
                r.symbol_kind.to_string(),
                r.delta.to_string(),
                r.correct.map_or(String::new(), |c| c.to_string()),
                format!("{:.3}", r.t_virtual_s),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Word;

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.add_sentence_n(&Sentence::new("the_word_that_matters.").unwrap(), 2).unwrap();
        kb.add_sentence_n(&Sentence::new("the_end.").unwrap(), 5).unwrap();
        for w in ["those", "xylophone", "xylem", "xylography"] {
            kb.add_word(&Word::new(w).unwrap(), 1);
        }
        kb
    }

    fn spell_chars(session: &mut SpellSession, kb: &mut KnowledgeBase, config: &EngineConfig, text: &str) {
        for c in text.chars() {
            let sym = match c {
                '_' => Symbol::Mandatory(Mandatory::Space),
                '.' | '?' => Symbol::Mandatory(Mandatory::Terminator(c)),
                c => Symbol::Character(c),
            };
            session.apply_selection(kb, config, &sym).unwrap();
        }
    }

    #[test]
    fn prediction_spells_remainder_and_space() {
        let mut kb = kb();
        let config = EngineConfig::default();
        let mut s = SpellSession::new(&kb, &config);
        // "the" then "_" then "word" then "_" then "th" by characters.
        spell_chars(&mut s, &mut kb, &config, "t");
        assert_eq!(s.spelled(), "th");
        spell_chars(&mut s, &mut kb, &config, "e_w_t");
        assert_eq!(s.spelled(), "the_word_th");
        let (id, word, spell) = s.matrix().predictions().next().unwrap();
        assert_eq!((id, word.as_str(), spell), (0, "that", "at_"));
        let sym = s.matrix().get(0, 0).unwrap().clone();
        let applied = s.apply_selection(&mut kb, &config, &sym).unwrap();
        assert_eq!(applied.delta, Delta::Spelled("at_".into()));
        assert_eq!(s.ssp(), "the_word_that_");
    }

    #[test]
    fn label_selection_spells_forced_suffix() {
        let mut kb = kb();
        let config = EngineConfig::without_predictions();
        let mut s = SpellSession::new(&kb, &config);
        s.apply_selection(&mut kb, &config, &Symbol::Character('x')).unwrap();
        assert_eq!(s.spelled(), "xyl");
        s.apply_selection(&mut kb, &config, &Symbol::Character('o')).unwrap();
        assert_eq!(s.swp(), "xylo");
        let applied = s.apply_selection(&mut kb, &config, &Symbol::Character('p')).unwrap();
        assert_eq!(applied.delta, Delta::Spelled("phone".into()));
    }

    #[test]
    fn undo_restores_and_marks_error() {
        let mut kb = kb();
        let config = EngineConfig::default();
        let mut s = SpellSession::new(&kb, &config);
        s.apply_selection(&mut kb, &config, &Symbol::Character('x')).unwrap();
        let undo = Symbol::Mandatory(Mandatory::Undo);
        let applied = s.apply_selection(&mut kb, &config, &undo).unwrap();
        assert_eq!(s.spelled(), "");
        assert_eq!(applied.delta, Delta::Erased("xyl".into()));
        assert_eq!(s.log().len(), 2);
        assert_eq!(s.log()[0].correct, Some(false));
        let report = s.metrics(&config).unwrap();
        assert_eq!(report.selections, 2);
        assert_eq!(report.ac, Some(0.5));
        // Undo on an empty stack is a logged no-op.
        let applied = s.apply_selection(&mut kb, &config, &undo).unwrap();
        assert_eq!(applied.delta, Delta::Erased(String::new()));
        assert_eq!(s.log().len(), 3);
    }

    #[test]
    fn terminator_commits_sentence() {
        let mut kb = kb();
        let config = EngineConfig::without_predictions();
        let mut s = SpellSession::new(&kb, &config);
        let before = kb.sentences().count("the_end.");
        spell_chars(&mut s, &mut kb, &config, "te_e.");
        assert_eq!(s.spelled(), "the_end.");
        assert_eq!(kb.sentences().count("the_end."), before + 1);
        assert_eq!(s.completed().len(), 1);
        // Terminator with an empty open sentence spells but does not commit.
        let total = kb.sentences().total();
        let applied = s.apply_selection(&mut kb, &config, &Symbol::Mandatory(Mandatory::Terminator('?'))).unwrap();
        assert_eq!(applied.completed, None);
        assert_eq!(kb.sentences().total(), total);
        assert_eq!(s.spelled(), "the_end.?");
    }

    #[test]
    fn frozen_session_does_not_touch_kb() {
        let kb = kb();
        let config = EngineConfig::without_predictions();
        let mut s = SpellSession::new(&kb, &config);
        for sym in [Symbol::Character('t'), Symbol::Character('e'), Symbol::Mandatory(Mandatory::Terminator('.'))] {
            s.apply_frozen(&kb, &config, &sym).unwrap();
        }
        assert_eq!(s.completed().len(), 1);
        assert_eq!(kb.sentences().count("the."), 0);
    }

    #[test]
    fn rejects_symbols_outside_matrix() {
        let mut kb = kb();
        let config = EngineConfig::default();
        let mut s = SpellSession::new(&kb, &config);
        let err = s.apply_selection(&mut kb, &config, &Symbol::Character('q')).unwrap_err();
        assert!(matches!(err, EngineError::NotInMatrix(_)));
        assert!(s.log().is_empty());
        assert!(matches!(s.symbol_at(99, 0), Err(EngineError::OutOfBounds(99, 0))));
    }

    #[test]
    fn metrics_need_selections() {
        let kb = kb();
        let config = EngineConfig::default();
        let s = SpellSession::new(&kb, &config);
        assert!(matches!(s.metrics(&config), Err(MetricsError::EmptyLog)));
    }

    #[test]
    fn virtual_clock_and_csv() {
        let mut kb = kb();
        let config = EngineConfig::without_predictions();
        let mut s = SpellSession::new(&kb, &config);
        spell_chars(&mut s, &mut kb, &config, "t");
        let r = &s.log()[0];
        let expected = metrics::selection_time(r.nrows, r.ncols, &config.timing, Phase::Plain);
        assert_eq!(s.virtual_time(), expected);
        let mut buf = Vec::new();
        s.write_log_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,nrows,ncols,n_char,n_mand,n_pred,symbol_kind,delta,correct,t_virtual_s"
        );
        assert!(lines.next().unwrap().starts_with("1,3,3,5,4,0,character,th,,"));
    }
}
