//! Text serialization of a knowledge base.
//!
//! ```text
//! polymorph-kb v1
//! S<TAB>count<TAB>sentence
//! W<TAB>count<TAB>word
//! ```
//!
//! `W` records carry only words added outside sentences; sentence words are
//! recomputed on load.

use std::io::{BufRead, Write};

use super::{KbError, KnowledgeBase};
use crate::text::{Sentence, Word};

pub const KB_HEADER: &str = "polymorph-kb v1";

impl KnowledgeBase {
    pub fn save<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "{KB_HEADER}")?;
        for (s, n) in self.sentences.with_prefix("") {
            writeln!(sink, "S\t{n}\t{s}")?;
        }
        for (w, n) in &self.extra_words {
            writeln!(sink, "W\t{n}\t{w}")?;
        }
        sink.flush()
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self, KbError> {
        let mut lines = source.lines();
        let header = match lines.next() {
            None => return Err(KbError::Malformed { line: 1, msg: "missing header".into() }),
            Some(h) => h.map_err(|source| KbError::Io { line: 1, source })?,
        };
        if header.trim_end() != KB_HEADER {
            return Err(KbError::Version(header));
        }
        let mut kb = KnowledgeBase::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line.map_err(|source| KbError::Io { line: line_no, source })?;
            if line.is_empty() {
                continue;
            }
            let malformed = |msg: String| KbError::Malformed { line: line_no, msg };
            let mut fields = line.splitn(3, '\t');
            let (Some(tag), Some(count), Some(text)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(malformed(format!("expected 3 tab-separated fields in {line:?}")));
            };
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| malformed(format!("bad count {count:?}")))?;
            match tag {
                "S" => {
                    let sentence = Sentence::new(text).map_err(|e| malformed(e.to_string()))?;
                    kb.add_sentence_n(&sentence, count).map_err(|e| malformed(e.to_string()))?;
                }
                "W" => {
                    let word = Word::new(text).map_err(|e| malformed(e.to_string()))?;
                    kb.add_word(&word, count);
                }
                other => return Err(malformed(format!("unknown record tag {other:?}"))),
            }
        }
        Ok(kb)
    }

    pub fn save_to_path(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_from_path(path: impl AsRef<std::path::Path>) -> Result<Self, KbError> {
        let file = std::fs::File::open(path).map_err(|source| KbError::Io { line: 0, source })?;
        Self::load(std::io::BufReader::new(file))
    }
}
