//! Output envelopes and CSV helpers shared by the subcommands.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use genfpp::process::Model;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// JSON envelope: schema version, command echo, parameters, rng metadata, payload.
#[derive(Serialize)]
pub struct OutputRecord<'a> {
    pub schema_version: &'static str,
    pub command: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<Value>,
    pub payload: Value,
}

impl<'a> OutputRecord<'a> {
    pub fn new(command: &'a [String], payload: Value) -> Self {
        OutputRecord { schema_version: SCHEMA_VERSION, command, params: None, rng: None, payload }
    }

    pub fn params(mut self, model: &Model) -> Self {
        self.params = Some(serde_json::to_value(model).expect("parameters serialize"));
        self
    }

    pub fn rng(mut self, seed: u64, stream: u64) -> Self {
        self.rng = Some(json!({ "generator": "ChaCha20", "seed": seed, "stream": stream }));
        self
    }

    pub fn paths(mut self, n: usize) -> Self {
        if let Some(Value::Object(m)) = self.rng.as_mut() {
            m.insert("paths".into(), json!(n));
        }
        self
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("output serializes")
    }
}

pub fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// (model, nu, delta or gamma, lambda) as CSV fields.
pub fn model_fields(model: &Model) -> [String; 4] {
    match model {
        Model::Gen1(p) => ["gen1".into(), p.nu.to_string(), p.delta.to_string(), p.lambda.to_string()],
        Model::Gen2(p) => ["gen2".into(), p.nu.to_string(), p.gamma_exp.to_string(), p.lambda.to_string()],
    }
}
