//! Model files: a JSON envelope around the trained [`ScoreFunction`], the
//! spec that produced it and the schema needed to encode new rows.
//!
//! Floats are written with shortest round-trip formatting, so a loaded
//! model scores bit-identically to the one that was saved. The `format`
//! and `version` fields are checked on load; version bumps only on
//! incompatible changes.

use std::path::Path;

use anyhow::{bail, Context};
use fraudex_core::data::Schema;
use fraudex_core::models::{ModelSpec, ScoreFunction};
use serde::{Deserialize, Serialize};

pub const MODEL_FORMAT: &str = "fraudex-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    pub schema: Schema,
    pub model: ScoreFunction,
}

impl ModelFile {
    pub fn new(spec: ModelSpec, schema: Schema, model: ScoreFunction) -> Self {
        Self { format: MODEL_FORMAT.into(), version: MODEL_VERSION, spec, schema, model }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text).context("not a model file")?;
        if header.format != MODEL_FORMAT {
            bail!("unexpected format `{}` (expected `{MODEL_FORMAT}`)", header.format);
        }
        if header.version != MODEL_VERSION {
            bail!("model file version {} is not supported (this build reads version {MODEL_VERSION})", header.version);
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("loading {}", path.display()))
    }
}
