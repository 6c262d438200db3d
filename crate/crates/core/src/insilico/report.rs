use std::io::Write;

use serde::Serialize;

use super::{InsilicoError, SimulationRecord};

pub const CSV_HEADER: [&str; 16] = [
    "lang",
    "speller",
    "pred",
    "phrasebook",
    "chars",
    "words",
    "sentences",
    "mean_t_char_s",
    "mean_t_word_s",
    "ocm",
    "sm",
    "isr",
    "r_n",
    "R_n",
    "D_n",
    "seed",
];

/// One CSV line. Rate columns are empty when no estimate was requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub lang: String,
    pub speller: String,
    pub pred: bool,
    pub phrasebook: String,
    pub chars: u64,
    pub words: u64,
    pub sentences: u64,
    pub mean_t_char_s: f64,
    pub mean_t_word_s: f64,
    pub ocm: f64,
    pub sm: f64,
    pub isr: f64,
    pub r_n: Option<f64>,
    #[serde(rename = "R_n")]
    pub big_r_n: Option<f64>,
    #[serde(rename = "D_n")]
    pub d_n: Option<f64>,
    pub seed: u64,
}

impl From<&SimulationRecord> for ReportRow {
    fn from(r: &SimulationRecord) -> Self {
        let a = r.aggregates();
        ReportRow {
            lang: r.lang.clone(),
            speller: r.speller.to_string(),
            pred: r.predictions(),
            phrasebook: r.phrasebook.to_string(),
            chars: a.chars,
            words: a.words,
            sentences: a.sentences,
            mean_t_char_s: a.mean_t_char_s,
            mean_t_word_s: a.mean_t_word_s,
            ocm: a.ocm,
            sm: a.sm,
            isr: a.isr,
            r_n: r.rates.map(|e| e.r_n),
            big_r_n: r.rates.map(|e| e.big_r_n),
            d_n: r.rates.map(|e| e.d_n),
            seed: r.seed,
        }
    }
}

/// Writes the header and one row per record.
pub fn write_csv<W: Write>(sink: W, records: &[SimulationRecord]) -> Result<(), InsilicoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(ReportRow::from(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
