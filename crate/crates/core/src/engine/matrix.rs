use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{Word, SPACE};

/// Always-present control and punctuation symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type", content = "char")]
pub enum Mandatory {
    Space,
    Terminator(char),
    Undo,
}

impl Mandatory {
    pub fn label(&self) -> String {
        match self {
            Mandatory::Space => SPACE.to_string(),
            Mandatory::Terminator(c) => c.to_string(),
            Mandatory::Undo => "undo".to_string(),
        }
    }
}

/// One cell of the selection matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Character(char),
    Mandatory(Mandatory),
    /// A predicted word; selecting it spells `spell`, the word remainder
    /// after the current SWP followed by a space.
    Prediction { id: usize, word: Word, spell: String },
}

impl Symbol {
    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Character(_) => SymbolKind::Character,
            Symbol::Mandatory(Mandatory::Space) => SymbolKind::Space,
            Symbol::Mandatory(Mandatory::Terminator(_)) => SymbolKind::Terminator,
            Symbol::Mandatory(Mandatory::Undo) => SymbolKind::Undo,
            Symbol::Prediction { .. } => SymbolKind::Prediction,
        }
    }

    /// Text shown in the cell.
    pub fn label(&self) -> String {
        match self {
            Symbol::Character(c) => c.to_string(),
            Symbol::Mandatory(m) => m.label(),
            Symbol::Prediction { id, .. } => format!("{id}'"),
        }
    }

    pub fn is_mandatory(&self) -> bool {
        matches!(self, Symbol::Mandatory(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Character,
    Space,
    Terminator,
    Undo,
    Prediction,
}

impl SymbolKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymbolKind::Character => "character",
            SymbolKind::Space => "space",
            SymbolKind::Terminator => "terminator",
            SymbolKind::Undo => "undo",
            SymbolKind::Prediction => "prediction",
        }
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rows, columns and number of prediction cells of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDims {
    pub rows: usize,
    pub cols: usize,
    pub n_pred: usize,
}

impl MatrixDims {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// The smallest near-square grid (`k x k` or `(k-1) x k`) with at least
/// `at_least` cells, as `(rows, cols)`.
pub fn near_square(at_least: usize) -> (usize, usize) {
    let mut k = 1usize;
    loop {
        if k >= 2 && k * (k - 1) >= at_least {
            return (k - 1, k);
        }
        if k * k >= at_least {
            return (k, k);
        }
        k += 1;
    }
}

/// Sizes the matrix for `base` character and mandatory symbols.
///
/// When more than `p_sharp` predictions are available, the grid is the
/// smallest near-square leaving room for at least `p_sharp + 1` of them and
/// every free cell is filled with a prediction; otherwise all available
/// predictions are shown. Capping at availability may shrink the grid.
pub fn matrix_total(base: usize, p_sharp: usize, available_predictions: usize) -> MatrixDims {
    let base = base.max(1);
    let n_pred = if available_predictions > p_sharp {
        let (r, c) = near_square(base + p_sharp + 1);
        (r * c - base).min(available_predictions)
    } else {
        available_predictions
    };
    let (rows, cols) = near_square(base + n_pred);
    MatrixDims { rows, cols, n_pred }
}

/// A row-major grid of symbols; trailing cells may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Option<Symbol>>,
    n_char: usize,
    n_mand: usize,
    n_pred: usize,
}

impl SelectionMatrix {
    /// Lays out predictions, then characters, then mandatory symbols.
    pub(crate) fn layout(
        dims: MatrixDims,
        predictions: Vec<Symbol>,
        characters: Vec<Symbol>,
        mandatory: Vec<Symbol>,
    ) -> Self {
        let (n_pred, n_char, n_mand) = (predictions.len(), characters.len(), mandatory.len());
        let mut cells: Vec<Option<Symbol>> = predictions
            .into_iter()
            .chain(characters)
            .chain(mandatory)
            .map(Some)
            .collect();
        debug_assert!(cells.len() <= dims.cells());
        cells.resize(dims.cells(), None);
        Self {
            rows: dims.rows,
            cols: dims.cols,
            cells,
            n_char,
            n_mand,
            n_pred,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> MatrixDims {
        MatrixDims {
            rows: self.rows,
            cols: self.cols,
            n_pred: self.n_pred,
        }
    }

    pub fn n_char(&self) -> usize {
        self.n_char
    }

    pub fn n_mand(&self) -> usize {
        self.n_mand
    }

    pub fn n_pred(&self) -> usize {
        self.n_pred
    }

    /// Number of non-empty cells.
    pub fn symbols_len(&self) -> usize {
        self.n_char + self.n_mand + self.n_pred
    }

    pub fn cells(&self) -> &[Option<Symbol>] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Symbol> {
        if row >= self.rows || col >= self.cols {
            return None;
        }
        self.cells[row * self.cols + col].as_ref()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.cells.iter().flatten()
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.symbols().any(|s| s == symbol)
    }

    /// `(row, col)` of a symbol.
    pub fn position(&self, symbol: &Symbol) -> Option<(usize, usize)> {
        self.cells
            .iter()
            .position(|c| c.as_ref() == Some(symbol))
            .map(|i| (i / self.cols, i % self.cols))
    }

    pub fn predictions(&self) -> impl Iterator<Item = (usize, &Word, &str)> {
        self.symbols().filter_map(|s| match s {
            Symbol::Prediction { id, word, spell } => Some((*id, word, spell.as_str())),
            _ => None,
        })
    }

    pub fn character(&self, c: char) -> Option<&Symbol> {
        self.symbols().find(|s| matches!(s, Symbol::Character(x) if *x == c))
    }

    pub fn mandatory(&self, m: Mandatory) -> Option<&Symbol> {
        self.symbols().find(|s| matches!(s, Symbol::Mandatory(x) if *x == m))
    }
}

impl fmt::Display for SelectionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    self.get(r, c)
                        .map_or_else(|| "·".to_string(), Symbol::label)
                })
                .collect();
            writeln!(f, "{}", row.iter().map(|s| format!("{s:>5}")).collect::<String>())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn near_square_sequence() {
        let totals: Vec<usize> = (1..=43)
            .map(|x| {
                let (r, c) = near_square(x);
                r * c
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(totals, vec![1, 2, 4, 6, 9, 12, 16, 20, 25, 30, 36, 42, 49]);
        assert_eq!(near_square(10), (3, 4));
        assert_eq!(near_square(36), (6, 6));
    }

    #[test]
    fn matrix_total_examples() {
        assert_eq!(matrix_total(31, 4, 100), MatrixDims { rows: 6, cols: 6, n_pred: 5 });
        assert_eq!(matrix_total(6, 3, 100), MatrixDims { rows: 3, cols: 4, n_pred: 6 });
        let d = matrix_total(6, 3, 2);
        assert_eq!(d, MatrixDims { rows: 3, cols: 3, n_pred: 2 });
        assert_eq!(d.cells() - 6 - d.n_pred, 1);
        assert_eq!(matrix_total(31, 4, 0), MatrixDims { rows: 6, cols: 6, n_pred: 0 });
        // Capping at availability shrinks the grid: 20 + 5 fits 5x5.
        assert_eq!(matrix_total(20, 4, 5), MatrixDims { rows: 5, cols: 5, n_pred: 5 });
    }

    proptest! {
        #[test]
        fn matrix_total_contract(base in 1usize..60, p in 0usize..10, avail in 0usize..80) {
            let d = matrix_total(base, p, avail);
            prop_assert!(d.rows == d.cols || d.rows + 1 == d.cols);
            prop_assert!(base + d.n_pred <= d.cells());
            prop_assert!(d.n_pred <= avail);
            if avail > p {
                prop_assert!(d.n_pred > p);
            } else {
                prop_assert_eq!(d.n_pred, avail);
            }
            let (r, c) = near_square(base + d.n_pred);
            prop_assert_eq!((r, c), (d.rows, d.cols));
        }
    }
}
