//! Transaction records, schema fitting/encoding, splits and synthetic data.

mod dataset;
mod record;
mod schema;
mod synthetic;

pub use dataset::{split, Dataset};
pub use record::{Cell, ColumnDecl, ColumnKind, RawRecord};
pub use schema::{encode, fit_schema, CategoryEntry, CategoryMap, ColumnEncoding, ColumnSpec, NumericStats, Schema};
pub use synthetic::{generate_synthetic, GenerativeTerm, GenerativeWeights, SyntheticSpec, DETECTABILITY_FLOOR};
