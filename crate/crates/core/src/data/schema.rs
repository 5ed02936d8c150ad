use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Cell, ColumnDecl, ColumnKind, Dataset, RawRecord};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericStats {
    pub mean: f64,
    /// Always strictly positive; constant columns get 1.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEntry {
    pub value: String,
    pub code: u32,
    /// Share of training rows carrying this value.
    pub frequency: f64,
}

/// Category text ↔ dense integer code. Code 0 is reserved for missing or
/// unseen values; observed categories get codes 1.. in descending training
/// frequency (ties broken by the category text).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub entries: Vec<CategoryEntry>,
    /// Share of training rows where the cell was missing (code 0).
    pub missing_frequency: f64,
}

impl CategoryMap {
    pub fn code_of(&self, value: &str) -> u32 {
        self.entries.iter().find(|e| e.value == value).map_or(0, |e| e.code)
    }

    pub fn value_of(&self, code: u32) -> Option<&str> {
        if code == 0 {
            return None;
        }
        self.entries.get(code as usize - 1).map(|e| e.value.as_str())
    }

    /// Number of codes including the reserved 0.
    pub fn cardinality(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn frequency_of(&self, value: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.value == value).map(|e| e.frequency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoding {
    Numeric(NumericStats),
    Categorical(CategoryMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub encoding: ColumnEncoding,
}

impl ColumnSpec {
    pub fn kind(&self) -> ColumnKind {
        match self.encoding {
            ColumnEncoding::Numeric(_) => ColumnKind::Numeric,
            ColumnEncoding::Categorical(_) => ColumnKind::Categorical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<ColumnKind> {
        self.columns.iter().map(ColumnSpec::kind).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn category_map(&self, column: usize) -> Option<&CategoryMap> {
        match &self.columns.get(column)?.encoding {
            ColumnEncoding::Categorical(m) => Some(m),
            ColumnEncoding::Numeric(_) => None,
        }
    }

    /// Code for `value` in categorical column `column` (0 if unseen).
    pub fn encode_category(&self, column: usize, value: &str) -> Option<u32> {
        self.category_map(column).map(|m| m.code_of(value))
    }

    /// Category text for `code`; `None` for code 0 or non-categorical columns.
    pub fn decode_category(&self, column: usize, code: u32) -> Option<&str> {
        self.category_map(column)?.value_of(code)
    }

    /// Schema of a column subset, in the given order.
    pub fn select(&self, columns: &[usize]) -> Schema {
        Schema { columns: columns.iter().map(|&j| self.columns[j].clone()).collect() }
    }
}

fn cell_text(cell: &Cell) -> Option<String> {
    match cell {
        Cell::Text(s) => Some(s.clone()),
        Cell::Number(v) => Some(format!("{v}")),
        Cell::Missing => None,
    }
}

/// Fits category maps and numeric statistics on training records.
pub fn fit_schema(records: &[RawRecord], declarations: &[ColumnDecl]) -> Result<Schema> {
    if records.is_empty() {
        return Err(Error::Empty("fit_schema needs at least one record"));
    }
    let n = records.len() as f64;
    let mut columns = Vec::with_capacity(declarations.len());
    for (j, decl) in declarations.iter().enumerate() {
        let mut cells = Vec::with_capacity(records.len());
        for r in records {
            cells.push(r.cell(&decl.name, j).ok_or_else(|| Error::MissingColumn(decl.name.clone()))?);
        }
        let encoding = match decl.kind {
            ColumnKind::Numeric => {
                let mut values = Vec::new();
                let mut non_numeric = 0usize;
                for c in &cells {
                    match c {
                        Cell::Number(v) if v.is_finite() => values.push(*v),
                        Cell::Number(_) | Cell::Text(_) => non_numeric += 1,
                        Cell::Missing => {}
                    }
                }
                let fraction = non_numeric as f64 / n;
                if fraction > 0.5 {
                    return Err(Error::LikelyMisdeclared { column: decl.name.clone(), fraction: fraction * 100.0 });
                }
                let (mean, std) = crate::math::mean_std(&values);
                let std = if std > 0.0 && std.is_finite() { std } else { 1.0 };
                ColumnEncoding::Numeric(NumericStats { mean, std })
            }
            ColumnKind::Categorical => {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                let mut missing = 0usize;
                for c in &cells {
                    match cell_text(c) {
                        Some(t) => *counts.entry(t).or_default() += 1,
                        None => missing += 1,
                    }
                }
                let mut ordered: Vec<(String, usize)> = counts.into_iter().collect();
                // BTreeMap iteration is sorted by text, so a stable sort on
                // descending count leaves ties in text order.
                ordered.sort_by(|a, b| b.1.cmp(&a.1));
                let entries = ordered
                    .into_iter()
                    .enumerate()
                    .map(|(i, (value, count))| CategoryEntry { value, code: i as u32 + 1, frequency: count as f64 / n })
                    .collect();
                ColumnEncoding::Categorical(CategoryMap { entries, missing_frequency: missing as f64 / n })
            }
        };
        columns.push(ColumnSpec { name: decl.name.clone(), encoding });
    }
    Ok(Schema { columns })
}

/// Encodes records under a fitted schema. Numeric cells are z-scored, with
/// missing or unparseable cells imputed at the training mean (0); categorical
/// cells become codes, unseen values code 0. Row ids are record positions.
pub fn encode(records: &[RawRecord], schema: &Schema) -> Dataset {
    let m = schema.len();
    let mut data = Vec::with_capacity(records.len() * m);
    for r in records {
        for (j, col) in schema.columns.iter().enumerate() {
            let cell = r.cell(&col.name, j).unwrap_or(&Cell::Missing);
            let v = match &col.encoding {
                ColumnEncoding::Numeric(s) => match cell {
                    Cell::Number(v) if v.is_finite() => (v - s.mean) / s.std,
                    _ => 0.0,
                },
                ColumnEncoding::Categorical(map) => match cell_text(cell) {
                    Some(t) => map.code_of(&t) as f64,
                    None => 0.0,
                },
            };
            data.push(v);
        }
    }
    let labels = if records.iter().all(|r| r.label.is_some()) && !records.is_empty() {
        Some(records.iter().map(|r| r.label.unwrap_or(0)).collect())
    } else {
        None
    };
    Dataset {
        matrix: Matrix::from_vec(records.len(), m, data),
        labels,
        schema: schema.clone(),
        row_ids: (0..records.len() as u64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn rec(amt: Cell, product: Option<&str>, label: u8) -> RawRecord {
        RawRecord {
            values: vec![
                ("TransactionAmt".to_string(), amt),
                ("ProductCD".to_string(), product.map_or(Cell::Missing, |p| Cell::Text(p.to_string()))),
            ],
            label: Some(label),
        }
    }

    fn decls() -> Vec<ColumnDecl> {
        vec![ColumnDecl::numeric("TransactionAmt"), ColumnDecl::categorical("ProductCD")]
    }

    #[test]
    fn category_codes_follow_descending_frequency() {
        let recs = vec![
            rec(Cell::Number(1.0), Some("W"), 0),
            rec(Cell::Number(2.0), Some("C"), 0),
            rec(Cell::Number(3.0), Some("W"), 1),
            rec(Cell::Number(4.0), Some("R"), 0),
            rec(Cell::Number(5.0), Some("W"), 0),
            rec(Cell::Number(6.0), Some("C"), 0),
        ];
        let schema = fit_schema(&recs, &decls()).unwrap();
        let map = schema.category_map(1).unwrap();
        assert_eq!(map.code_of("W"), 1);
        assert_eq!(map.code_of("C"), 2);
        assert_eq!(map.code_of("R"), 3);
        assert_eq!(map.code_of("discover"), 0);
        assert_eq!(map.cardinality(), 4);
    }

    #[test]
    fn constant_numeric_column_gets_unit_std() {
        let recs = vec![rec(Cell::Number(7.0), Some("W"), 0), rec(Cell::Number(7.0), Some("C"), 1)];
        let schema = fit_schema(&recs, &decls()).unwrap();
        match schema.columns[0].encoding {
            ColumnEncoding::Numeric(s) => assert_eq!(s, NumericStats { mean: 7.0, std: 1.0 }),
            _ => unreachable!(),
        }
    }

    #[test]
    fn misdeclared_numeric_column_is_rejected() {
        let recs = vec![
            rec(Cell::Text("abc".into()), Some("W"), 0),
            rec(Cell::Text("def".into()), Some("W"), 0),
            rec(Cell::Number(1.0), Some("W"), 0),
        ];
        assert!(matches!(fit_schema(&recs, &decls()), Err(Error::LikelyMisdeclared { .. })));
    }

    #[test]
    fn missing_column_is_reported() {
        let recs = vec![rec(Cell::Number(1.0), Some("W"), 0)];
        let d = vec![ColumnDecl::numeric("card1")];
        assert_eq!(fit_schema(&recs, &d), Err(Error::MissingColumn("card1".into())));
    }

    #[test]
    fn encode_imputes_and_maps_unseen() {
        let train = vec![rec(Cell::Number(1.0), Some("W"), 0), rec(Cell::Number(3.0), Some("C"), 1)];
        let schema = fit_schema(&train, &decls()).unwrap();
        let test = vec![
            rec(Cell::Number(2.0), Some("discover"), 0),
            rec(Cell::Missing, None, 1),
            rec(Cell::Text("n/a".into()), Some("W"), 0),
        ];
        let ds = encode(&test, &schema);
        assert_eq!(ds.matrix.row(0), &[0.0, 0.0]);
        assert_eq!(ds.matrix.row(1), &[0.0, 0.0]);
        assert_eq!(ds.matrix.row(2)[0], 0.0);
        assert_eq!(ds.labels.as_deref(), Some(&[0u8, 1, 0][..]));
    }
}
