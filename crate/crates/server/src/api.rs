//! JSON bodies of the HTTP interface.

use serde::{Deserialize, Serialize};
use speller_core::engine::{Delta, EngineConfig, Mandatory, SelectionMatrix, Symbol};
use speller_core::metrics::{MetricsReport, TimingConfig};
use speller_core::{IngestStats, NormalizeMode};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UploadKb {
    pub name: String,
    /// Phrasebook text: `count<TAB>sentence` or bare text per line.
    pub phrasebook: String,
    #[serde(default)]
    pub normalize: Option<String>,
}

impl UploadKb {
    pub fn mode(&self) -> Result<NormalizeMode, String> {
        self.normalize.as_deref().map_or(Ok(NormalizeMode::default()), str::parse)
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct KbInfo {
    pub name: String,
    pub sentences: u64,
    pub distinct_sentences: u64,
    pub distinct_words: u64,
    pub word_occurrences: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KbCreated {
    #[serde(flatten)]
    pub info: KbInfo,
    pub ingested_sentences: u64,
    pub unterminated_lines: u64,
}

impl KbCreated {
    pub fn new(info: KbInfo, stats: &IngestStats) -> Self {
        Self {
            info,
            ingested_sentences: stats.sentences,
            unterminated_lines: stats.unterminated,
        }
    }
}

/// Engine settings a client may override; anything absent keeps its
/// default.
#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub p_sharp: Option<usize>,
    pub predictions: Option<bool>,
    /// Offer `!` as a third terminator.
    pub exclamation: Option<bool>,
    pub nrs: Option<u32>,
    pub sd: Option<f64>,
    pub isi: Option<f64>,
    pub pre_s: Option<f64>,
    pub post_s: Option<f64>,
    pub ppd: Option<f64>,
}

impl ConfigOverrides {
    pub fn apply(&self) -> EngineConfig {
        let mut c = EngineConfig::default();
        if let Some(p) = self.p_sharp {
            c.p_sharp = p;
        }
        if let Some(p) = self.predictions {
            c.predictions = p;
        }
        if self.exclamation == Some(true) {
            let undo = c.mandatory.iter().position(|m| *m == Mandatory::Undo).unwrap_or(c.mandatory.len());
            c.mandatory.insert(undo, Mandatory::Terminator('!'));
        }
        let t: &mut TimingConfig = &mut c.timing;
        if let Some(v) = self.nrs {
            t.nrs = v;
        }
        for (field, value) in [
            (&mut t.sd, self.sd),
            (&mut t.isi, self.isi),
            (&mut t.pre_s, self.pre_s),
            (&mut t.post_s, self.post_s),
            (&mut t.ppd, self.ppd),
        ] {
            if let Some(v) = value {
                *field = v;
            }
        }
        c
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub kb: String,
    #[serde(default)]
    pub config: ConfigOverrides,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostSelection {
    pub row: usize,
    pub col: usize,
    #[serde(default)]
    pub correct: Option<bool>,
    /// Client-chosen token; repeating it returns the first response
    /// without selecting again.
    #[serde(default)]
    pub nonce: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostUndo {
    #[serde(default)]
    pub nonce: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    /// `character`, `space`, `terminator`, `undo`, `prediction` or `empty`.
    pub kind: String,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prediction_id: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub word: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spell: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Prediction {
    pub prediction_id: usize,
    pub word: String,
    pub spell: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixView {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Cell>,
    /// Prediction-phase legend, in id order.
    pub predictions: Vec<Prediction>,
    /// How long the legend is shown before the matrix; zero when there is
    /// no prediction phase.
    pub ppd_s: f64,
}

impl MatrixView {
    pub fn new(m: &SelectionMatrix, config: &EngineConfig) -> Self {
        let mut cells = Vec::with_capacity(m.rows() * m.cols());
        for row in 0..m.rows() {
            for col in 0..m.cols() {
                cells.push(match m.get(row, col) {
                    None => Cell {
                        row,
                        col,
                        kind: "empty".into(),
                        label: String::new(),
                        prediction_id: None,
                        word: None,
                        spell: None,
                    },
                    Some(sym) => {
                        let (prediction_id, word, spell) = match sym {
                            Symbol::Prediction { id, word, spell } => (Some(*id), Some(word.to_string()), Some(spell.clone())),
                            _ => (None, None, None),
                        };
                        Cell {
                            row,
                            col,
                            kind: sym.kind().to_string(),
                            label: sym.label(),
                            prediction_id,
                            word,
                            spell,
                        }
                    }
                });
            }
        }
        let predictions: Vec<Prediction> = m
            .predictions()
            .map(|(id, w, s)| Prediction {
                prediction_id: id,
                word: w.to_string(),
                spell: s.to_string(),
            })
            .collect();
        let ppd_s = if config.predictions && !predictions.is_empty() {
            config.timing.ppd
        } else {
            0.0
        };
        Self {
            rows: m.rows(),
            cols: m.cols(),
            cells,
            predictions,
            ppd_s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsView {
    pub selections: u64,
    pub characters: u64,
    pub errors: u64,
    pub ac: Option<f64>,
    pub isr: Option<f64>,
    pub ocm_model: Option<f64>,
    pub sm_model: Option<f64>,
    pub ocm_wall: Option<f64>,
    pub sm_wall: Option<f64>,
    pub model_time_s: f64,
    pub wall_time_s: f64,
}

impl MetricsView {
    pub fn new(report: Option<MetricsReport>, characters: u64, wall_time_s: f64) -> Self {
        let per_minute = |n: u64| (wall_time_s > 0.0).then(|| n as f64 * 60.0 / wall_time_s);
        match report {
            Some(r) => Self {
                selections: r.selections,
                characters: r.characters,
                errors: r.errors,
                ac: r.ac,
                isr: Some(r.isr),
                ocm_model: Some(r.ocm),
                sm_model: Some(r.sm),
                ocm_wall: per_minute(r.characters),
                sm_wall: per_minute(r.selections),
                model_time_s: r.total_time_s,
                wall_time_s,
            },
            None => Self {
                selections: 0,
                characters,
                errors: 0,
                ac: None,
                isr: None,
                ocm_model: None,
                sm_model: None,
                ocm_wall: None,
                sm_wall: None,
                model_time_s: 0.0,
                wall_time_s,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SessionView {
    pub id: String,
    pub kb: String,
    pub spelled: String,
    pub ssp: String,
    pub swp: String,
    pub matrix: MatrixView,
    pub completed: Vec<String>,
    pub metrics: MetricsView,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionResult {
    /// Text added by the selection, or removed when `erased` is set.
    pub delta: String,
    pub erased: bool,
    pub kind: String,
    pub sentence_complete: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sentence: Option<String>,
    #[serde(flatten)]
    pub state: SessionView,
}

impl SelectionResult {
    pub fn delta_parts(delta: &Delta) -> (String, bool) {
        match delta {
            Delta::Spelled(s) => (s.clone(), false),
            Delta::Erased(s) => (s.clone(), true),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
