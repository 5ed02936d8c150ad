use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One raw CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// A feature column declaration (label and ignored columns are handled by
/// the loader and never reach the schema).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDecl {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnDecl {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Numeric }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Categorical }
    }
}

/// A transaction before encoding: named cells in schema order plus an
/// optional fraud label (1 = fraud).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub values: Vec<(String, Cell)>,
    pub label: Option<u8>,
}

impl RawRecord {
    /// Looks up a cell by column name. `hint` is the expected position and
    /// is checked first.
    pub fn cell(&self, name: &str, hint: usize) -> Option<&Cell> {
        match self.values.get(hint) {
            Some((n, c)) if n == name => Some(c),
            _ => self.values.iter().find(|(n, _)| n == name).map(|(_, c)| c),
        }
    }
}
