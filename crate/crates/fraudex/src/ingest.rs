//! CSV loading and the schema config format.
//!
//! A schema config is a plain-text file with one `column = role` line per
//! CSV column, where role is `numeric`, `categorical`, `label` or `ignore`.
//! Blank lines and `#` comments are skipped. At most one column may be the
//! label.
//!
//! ```text
//! # IEEE-CIS extract
//! TransactionAmt = numeric
//! ProductCD      = categorical
//! TransactionID  = ignore
//! isFraud        = label
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fraudex_core::data::{Cell, ColumnDecl, ColumnEncoding, ColumnKind, Dataset, RawRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {}: {source}", path.display())]
    Open { path: PathBuf, source: std::io::Error },
    #[error("{}: header does not match the schema config (not in config: {unexpected:?}; missing from header: {missing:?})", path.display())]
    HeaderMismatch { path: PathBuf, unexpected: Vec<String>, missing: Vec<String> },
    #[error("{}: row {row} has {found} fields, expected {expected}", path.display())]
    Arity { path: PathBuf, row: u64, expected: usize, found: usize },
    #[error("{}: row {row}: label `{value}` is not 0 or 1", path.display())]
    BadLabel { path: PathBuf, row: u64, value: String },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("schema config line {line}: {message}")]
    Config { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Numeric,
    Categorical,
    Label,
    Ignore,
}

impl FromStr for ColumnRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "numeric" => Ok(Self::Numeric),
            "categorical" => Ok(Self::Categorical),
            "label" => Ok(Self::Label),
            "ignore" => Ok(Self::Ignore),
            other => Err(format!("unknown role `{other}` (expected numeric, categorical, label or ignore)")),
        }
    }
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Numeric => "numeric",
            Self::Categorical => "categorical",
            Self::Label => "label",
            Self::Ignore => "ignore",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub columns: Vec<(String, ColumnRole)>,
}

impl SchemaConfig {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut columns: Vec<(String, ColumnRole)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| IngestError::Config { line: i + 1, message };
            let (name, role) = line.split_once('=').ok_or_else(|| err("expected `column = role`".into()))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(err("empty column name".into()));
            }
            if columns.iter().any(|(n, _)| n == name) {
                return Err(err(format!("column `{name}` declared twice")));
            }
            let role: ColumnRole = role.trim().parse().map_err(err)?;
            if role == ColumnRole::Label && columns.iter().any(|(_, r)| *r == ColumnRole::Label) {
                return Err(err("more than one label column".into()));
            }
            columns.push((name.to_string(), role));
        }
        if columns.is_empty() {
            return Err(IngestError::Config { line: 0, message: "no columns declared".into() });
        }
        Ok(Self { columns })
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Open { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        self.columns.iter().map(|(n, r)| format!("{n} = {r}\n")).collect()
    }

    /// Feature columns in declaration order.
    pub fn declarations(&self) -> Vec<ColumnDecl> {
        self.columns
            .iter()
            .filter_map(|(name, role)| match role {
                ColumnRole::Numeric => Some(ColumnDecl { name: name.clone(), kind: ColumnKind::Numeric }),
                ColumnRole::Categorical => Some(ColumnDecl { name: name.clone(), kind: ColumnKind::Categorical }),
                _ => None,
            })
            .collect()
    }

    pub fn label(&self) -> Option<&str> {
        self.columns.iter().find(|(_, r)| *r == ColumnRole::Label).map(|(n, _)| n.as_str())
    }

    fn role_of(&self, name: &str) -> Option<ColumnRole> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }
}

/// Reads a headed, comma-delimited UTF-8 CSV. Empty cells are missing.
/// Numeric cells that do not parse are kept as text so the schema fit can
/// spot misdeclared columns; encoding treats them as missing.
pub fn load_csv(path: &Path, config: &SchemaConfig) -> Result<Vec<RawRecord>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Open { path: path.into(), source })?;
    let csv_err = |source| IngestError::Csv { path: path.into(), source };
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();

    let in_header: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let in_config: BTreeSet<&str> = config.columns.iter().map(|(n, _)| n.as_str()).collect();
    if in_header != in_config || in_header.len() != header.len() {
        return Err(IngestError::HeaderMismatch {
            path: path.into(),
            unexpected: in_header.difference(&in_config).map(|s| s.to_string()).collect(),
            missing: in_config.difference(&in_header).map(|s| s.to_string()).collect(),
        });
    }
    let roles: Vec<ColumnRole> = header.iter().map(|h| config.role_of(h).expect("checked above")).collect();

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        // Header is line 1, so data rows are numbered from 2.
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != header.len() {
            return Err(IngestError::Arity { path: path.into(), row: line, expected: header.len(), found: row.len() });
        }
        let mut values = Vec::with_capacity(header.len());
        let mut label = None;
        for ((name, role), field) in header.iter().zip(&roles).zip(row.iter()) {
            let field = field.trim();
            match role {
                ColumnRole::Ignore => {}
                ColumnRole::Label => {
                    label = match field {
                        "" => None,
                        "0" | "0.0" => Some(0),
                        "1" | "1.0" => Some(1),
                        other => {
                            return Err(IngestError::BadLabel { path: path.into(), row: line, value: other.into() });
                        }
                    }
                }
                ColumnRole::Numeric => values.push((name.clone(), numeric_cell(field))),
                ColumnRole::Categorical => {
                    let cell = if field.is_empty() { Cell::Missing } else { Cell::Text(field.to_string()) };
                    values.push((name.clone(), cell));
                }
            }
        }
        records.push(RawRecord { values, label });
    }
    Ok(records)
}

fn numeric_cell(field: &str) -> Cell {
    if field.is_empty() {
        return Cell::Missing;
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Number(v),
        Ok(_) => Cell::Missing,
        Err(_) => Cell::Text(field.to_string()),
    }
}

/// Writes an encoded dataset back out as raw CSV (numeric columns
/// de-standardized, categorical codes decoded, missing as empty) together
/// with the matching schema config. The label column is `is_fraud`.
pub fn write_csv(data: &Dataset, csv_path: &Path, schema_path: &Path) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(csv_path)?;
    let mut header = data.feature_names();
    if data.labels.is_some() {
        header.push(LABEL_COLUMN.into());
    }
    writer.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for (i, x) in data.matrix.iter_rows().enumerate() {
        row.clear();
        for (j, spec) in data.schema.columns.iter().enumerate() {
            row.push(match &spec.encoding {
                ColumnEncoding::Numeric(s) => format!("{}", s.mean + s.std * x[j]),
                ColumnEncoding::Categorical(map) => map.value_of(x[j] as u32).unwrap_or("").to_string(),
            });
        }
        if let Some(labels) = &data.labels {
            row.push(labels[i].to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;

    let mut config = SchemaConfig::default();
    for spec in &data.schema.columns {
        let role = match spec.kind() {
            ColumnKind::Numeric => ColumnRole::Numeric,
            ColumnKind::Categorical => ColumnRole::Categorical,
        };
        config.columns.push((spec.name.clone(), role));
    }
    if data.labels.is_some() {
        config.columns.push((LABEL_COLUMN.into(), ColumnRole::Label));
    }
    std::fs::write(schema_path, config.render())?;
    Ok(())
}

pub const LABEL_COLUMN: &str = "is_fraud";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_roles_and_comments() {
        let cfg = SchemaConfig::parse("# c\nTransactionAmt = numeric\n\nProductCD=categorical # w/c/r\nisFraud = label\nid = ignore\n").unwrap();
        assert_eq!(cfg.columns.len(), 4);
        assert_eq!(cfg.label(), Some("isFraud"));
        assert_eq!(cfg.declarations().len(), 2);
        assert_eq!(SchemaConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_config() {
        for text in ["a = numeric\na = label", "a numeric", "a = float", "a = label\nb = label", "# nothing"] {
            assert!(matches!(SchemaConfig::parse(text), Err(IngestError::Config { .. })), "{text}");
        }
    }

    #[test]
    fn numeric_cells() {
        assert_eq!(numeric_cell("49.0"), Cell::Number(49.0));
        assert_eq!(numeric_cell(""), Cell::Missing);
        assert_eq!(numeric_cell("abc"), Cell::Text("abc".into()));
    }
}
