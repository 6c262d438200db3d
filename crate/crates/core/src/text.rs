//! User alphabet, normalization, and the string calculus over spelled text:
//! words, sentences, the suffix word prefix (SWP) and the suffix sentence
//! prefix (SSP).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

/// The space character as it appears in spelled text.
pub const SPACE: char = '_';

/// Default sentence terminators.
pub const DEFAULT_TERMINATORS: [char; 2] = ['.', '?'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("character {0:?} is not in the user alphabet")]
    OutOfAlphabet(char),
    #[error("sentence {0:?} does not end with a terminator")]
    Unterminated(String),
    #[error("sentence {0:?} has a terminator before its last position")]
    EarlyTerminator(String),
    #[error("word {0:?} is empty or contains non-word characters")]
    InvalidWord(String),
    #[error("transliteration table line {line}: {msg}")]
    Table { line: usize, msg: String },
}

/// Characters that may occur inside a word: `a`-`z` and the apostrophe.
#[inline]
pub fn is_word_char(c: char) -> bool {
    c.is_ascii_lowercase() || c == '\''
}

/// The channel alphabet: word characters, the space and the terminators.
///
/// The undo control symbol is not a character and is counted separately by
/// [`UserAlphabet::channel_size`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAlphabet {
    characters: Vec<char>,
    terminators: Vec<char>,
}

impl Default for UserAlphabet {
    fn default() -> Self {
        Self::with_terminators(&DEFAULT_TERMINATORS)
    }
}

impl UserAlphabet {
    /// Alphabet with `!` enabled as a third terminator.
    pub fn with_exclamation() -> Self {
        Self::with_terminators(&['.', '?', '!'])
    }

    fn with_terminators(terminators: &[char]) -> Self {
        let mut characters: Vec<char> = ('a'..='z').collect();
        characters.push('\'');
        characters.push(SPACE);
        characters.extend_from_slice(terminators);
        Self {
            characters,
            terminators: terminators.to_vec(),
        }
    }

    pub fn characters(&self) -> &[char] {
        &self.characters
    }

    pub fn terminators(&self) -> &[char] {
        &self.terminators
    }

    pub fn contains(&self, c: char) -> bool {
        self.characters.contains(&c)
    }

    pub fn is_terminator(&self, c: char) -> bool {
        self.terminators.contains(&c)
    }

    /// Number of selectable channel symbols of a character-by-character
    /// speller: every character plus undo.
    pub fn channel_size(&self) -> usize {
        self.characters.len() + 1
    }
}

/// A string over the alphabet whose only terminator is its last character.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence(String);

impl Sentence {
    pub fn new(text: impl Into<String>) -> Result<Self, TextError> {
        Self::with_alphabet(text, &UserAlphabet::default())
    }

    pub fn with_alphabet(text: impl Into<String>, alphabet: &UserAlphabet) -> Result<Self, TextError> {
        let text = text.into();
        if let Some(bad) = text.chars().find(|&c| !alphabet.contains(c)) {
            return Err(TextError::OutOfAlphabet(bad));
        }
        match text.chars().last() {
            Some(last) if alphabet.is_terminator(last) => {}
            _ => return Err(TextError::Unterminated(text)),
        }
        let body = &text[..text.len() - 1];
        if body.chars().any(|c| alphabet.is_terminator(c)) {
            return Err(TextError::EarlyTerminator(text));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn terminator(&self) -> char {
        // Non-empty by construction.
        self.0.chars().last().unwrap_or('.')
    }

    /// The words of the sentence, in order, with repetitions.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.0
            .split(|c: char| !is_word_char(c))
            .filter(|w| !w.is_empty())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Sentence {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A non-empty string over `[a-z']`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(String);

impl Word {
    pub fn new(text: impl Into<String>) -> Result<Self, TextError> {
        let text = text.into();
        if text.is_empty() || !text.chars().all(is_word_char) {
            return Err(TextError::InvalidWord(text));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Word {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// How accented letters are transliterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizeMode {
    /// Fixed table lookup (`è` -> `e'`, `ó` -> `o'`, `ä` -> `a`, `ß` -> `ss`).
    #[default]
    TableMap,
    /// Strip the accent; append an apostrophe when the letter ends a word.
    PhrasebookRule,
}

impl FromStr for NormalizeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table-map" | "map" | "section21-map" => Ok(Self::TableMap),
            "phrasebook-rule" | "rule" => Ok(Self::PhrasebookRule),
            other => Err(format!(
                "unknown normalize mode {other:?} (expected table-map or phrasebook-rule)"
            )),
        }
    }
}

impl fmt::Display for NormalizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TableMap => "table-map",
            Self::PhrasebookRule => "phrasebook-rule",
        })
    }
}

/// Code point to replacement mapping, loaded from a TSV table.
#[derive(Debug, Clone, Default)]
pub struct TranslitTable {
    map: HashMap<char, String>,
}

const BUNDLED_TABLE: &str = include_str!("../data/translit.tsv");

impl TranslitTable {
    /// The table shipped with the crate.
    pub fn bundled() -> &'static TranslitTable {
        static TABLE: OnceLock<TranslitTable> = OnceLock::new();
        TABLE.get_or_init(|| TranslitTable::parse(BUNDLED_TABLE).expect("bundled table is valid"))
    }

    /// Parses lines of `source<TAB>replacement`, where the source is either a
    /// literal character or `U+XXXX`. Text after a further tab is ignored;
    /// blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut map = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let source = fields.next().unwrap_or_default().trim();
            let replacement = fields.next().ok_or_else(|| TextError::Table {
                line: line_no,
                msg: "missing replacement column".into(),
            })?;
            let source = parse_code_point(source).ok_or_else(|| TextError::Table {
                line: line_no,
                msg: format!("bad source code point {source:?}"),
            })?;
            if let Some(bad) = replacement
                .chars()
                .find(|&c| !is_word_char(c))
            {
                return Err(TextError::Table {
                    line: line_no,
                    msg: format!("replacement contains {bad:?}"),
                });
            }
            map.insert(source, replacement.to_string());
        }
        Ok(Self { map })
    }

    pub fn get(&self, c: char) -> Option<&str> {
        self.map.get(&c).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Base letter of an accented letter: a replacement that, without its
    /// apostrophe, is a single letter.
    fn base_letter(&self, c: char) -> Option<char> {
        let rep = self.get(c)?;
        let mut letters = rep.chars().filter(|&c| c != '\'');
        match (letters.next(), letters.next()) {
            (Some(b), None) if b != c => Some(b),
            _ => None,
        }
    }
}

fn parse_code_point(s: &str) -> Option<char> {
    if let Some(hex) = s.strip_prefix("U+").or_else(|| s.strip_prefix("u+")) {
        return u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
    }
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// Normalizes raw text into the default user alphabet using the bundled
/// transliteration table.
pub fn normalize(raw: &str, mode: NormalizeMode) -> String {
    normalize_with(raw, mode, &UserAlphabet::default(), TranslitTable::bundled())
}

/// Normalizes raw text: case folding, transliteration, deletion of
/// characters outside the alphabet, and collapsing of whitespace runs into a
/// single `_`.
///
/// Separators are never emitted at the start or end of the output, nor next
/// to a terminator, so every sentence produced by [`split_sentences`] starts
/// with a word character.
pub fn normalize_with(
    raw: &str,
    mode: NormalizeMode,
    alphabet: &UserAlphabet,
    table: &TranslitTable,
) -> String {
    // Lowercase first so the table and word-final checks see folded text.
    let folded: Vec<char> = raw.chars().flat_map(char::to_lowercase).collect();
    let mut out = String::with_capacity(folded.len());
    let mut pending_space = false;

    let push = |out: &mut String, pending: &mut bool, piece: &str| {
        for c in piece.chars() {
            if alphabet.is_terminator(c) {
                *pending = false;
                out.push(c);
            } else {
                if *pending {
                    if let Some(last) = out.chars().last() {
                        if !alphabet.is_terminator(last) {
                            out.push(SPACE);
                        }
                    }
                    *pending = false;
                }
                out.push(c);
            }
        }
    };

    for (i, &c) in folded.iter().enumerate() {
        if c.is_whitespace() || c == SPACE {
            pending_space = true;
            continue;
        }
        match mode {
            NormalizeMode::TableMap => {
                if let Some(rep) = table.get(c) {
                    push(&mut out, &mut pending_space, rep);
                    continue;
                }
            }
            NormalizeMode::PhrasebookRule => {
                if let Some(base) = table.base_letter(c) {
                    let word_final = folded
                        .get(i + 1)
                        .is_none_or(|&n| !(n.is_alphabetic() || n == '\''));
                    let mut piece = String::from(base);
                    if word_final {
                        piece.push('\'');
                    }
                    push(&mut out, &mut pending_space, &piece);
                    continue;
                }
                if let Some(rep) = table.get(c) {
                    push(&mut out, &mut pending_space, rep);
                    continue;
                }
            }
        }
        if c != SPACE && alphabet.contains(c) {
            let mut buf = [0u8; 4];
            push(&mut out, &mut pending_space, c.encode_utf8(&mut buf));
        }
    }
    out
}

/// Terminator-ended segments of a normalized string.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitOutcome {
    pub sentences: Vec<Sentence>,
    /// Trailing material after the last terminator, discarded.
    pub discarded: String,
}

impl SplitOutcome {
    pub fn discarded_chars(&self) -> usize {
        self.discarded.len()
    }
}

/// Splits normalized text into maximal terminator-ended sentences.
pub fn split_sentences(text: &str) -> SplitOutcome {
    split_sentences_with(text, &UserAlphabet::default())
}

pub fn split_sentences_with(text: &str, alphabet: &UserAlphabet) -> SplitOutcome {
    let mut sentences = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if alphabet.is_terminator(c) {
            let end = i + c.len_utf8();
            // Segments come from normalized text; anything else is skipped.
            if let Ok(s) = Sentence::with_alphabet(&text[start..end], alphabet) {
                sentences.push(s);
            }
            start = end;
        }
    }
    SplitOutcome {
        sentences,
        discarded: text[start..].to_string(),
    }
}

/// Suffix word prefix: the maximal trailing run of word characters.
pub fn swp(spelled: &str) -> &str {
    let start = spelled
        .char_indices()
        .rev()
        .find(|&(_, c)| !is_word_char(c))
        .map_or(0, |(i, c)| i + c.len_utf8());
    &spelled[start..]
}

/// Suffix sentence prefix: everything after the last terminator.
pub fn ssp(spelled: &str) -> &str {
    ssp_with(spelled, &UserAlphabet::default())
}

pub fn ssp_with<'a>(spelled: &'a str, alphabet: &UserAlphabet) -> &'a str {
    let start = spelled
        .char_indices()
        .rev()
        .find(|&(_, c)| alphabet.is_terminator(c))
        .map_or(0, |(i, c)| i + c.len_utf8());
    &spelled[start..]
}
