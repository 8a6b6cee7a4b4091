//! Parameter files: a JSON document holding the format version, layer sizes,
//! the number format (`"float"` or `{total_bits, int_bits}`), and per layer a
//! row-major weight matrix plus a bias vector. Quantized values are stored as
//! raw two's-complement integers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fxp::{QFormat, QValue};

use super::{FloatParams, LayerParams, ModelError, Params, QuantParams};

pub const PARAMS_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyParams {
    Float(FloatParams),
    Quant(QuantParams),
}

impl AnyParams {
    pub fn layer_sizes(&self) -> Vec<usize> {
        match self {
            AnyParams::Float(p) => p.layer_sizes(),
            AnyParams::Quant(p) => p.layer_sizes(),
        }
    }

    pub fn qformat(&self) -> Option<QFormat> {
        match self {
            AnyParams::Float(_) => None,
            AnyParams::Quant(p) => Some(p.qformat()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FloatTag {
    Float,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FormatTag {
    Float(FloatTag),
    Fixed(QFormat),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc<T> {
    // Checked before the typed parse; kept so the schema stays closed.
    #[allow(dead_code)]
    format_version: u64,
    layer_sizes: Vec<usize>,
    #[allow(dead_code)]
    qformat: FormatTag,
    layers: Vec<LayerDoc<T>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc<T> {
    weights: Vec<Vec<T>>,
    biases: Vec<T>,
}

fn parse_err(e: impl std::fmt::Display) -> ModelError {
    ModelError::Parse(e.to_string())
}

/// Serializes parameters; one weight row per line.
pub fn write_params(params: &AnyParams) -> String {
    match params {
        AnyParams::Float(p) => render(p, FormatTag::Float(FloatTag::Float), |&v| v),
        AnyParams::Quant(p) => render(p, FormatTag::Fixed(p.qformat()), |v| v.raw()),
    }
}

fn render<T: Copy, S: Serialize>(params: &Params<T>, tag: FormatTag, encode: impl Fn(&T) -> S) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format_version\": {PARAMS_FORMAT_VERSION},");
    let _ = writeln!(out, "  \"layer_sizes\": {},", json(&params.layer_sizes()));
    let _ = writeln!(out, "  \"qformat\": {},", json(&tag));
    out.push_str("  \"layers\": [\n");
    for (l, layer) in params.layers().iter().enumerate() {
        out.push_str("    {\n      \"weights\": [\n");
        let rows: Vec<String> = layer
            .rows()
            .map(|row| format!("        {}", json(&row.iter().map(&encode).collect::<Vec<S>>())))
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n      ],\n");
        let biases: Vec<S> = layer.biases().iter().map(&encode).collect();
        let _ = writeln!(out, "      \"biases\": {}", json(&biases));
        out.push_str(if l + 1 == params.layers().len() { "    }\n" } else { "    },\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

fn json<S: Serialize + ?Sized>(value: &S) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Parses a parameter document, checking version, schema and dimensions.
pub fn read_params(text: &str) -> Result<AnyParams, ModelError> {
    let doc: Value = serde_json::from_str(text).map_err(parse_err)?;
    let version = doc
        .get("format_version")
        .ok_or_else(|| parse_err("missing format_version"))?
        .as_u64()
        .ok_or_else(|| parse_err("format_version is not an integer"))?;
    if version != PARAMS_FORMAT_VERSION {
        return Err(ModelError::Version { found: version, expected: PARAMS_FORMAT_VERSION });
    }
    let tag: FormatTag = serde_json::from_value(doc.get("qformat").cloned().ok_or_else(|| parse_err("missing qformat"))?)
        .map_err(|_| parse_err("qformat must be \"float\" or {total_bits, int_bits} of a valid format"))?;
    match tag {
        FormatTag::Float(_) => {
            let file: FileDoc<f64> = serde_json::from_value(doc).map_err(parse_err)?;
            Ok(AnyParams::Float(assemble(file, Ok)?))
        }
        FormatTag::Fixed(fmt) => {
            let file: FileDoc<i64> = serde_json::from_value(doc).map_err(parse_err)?;
            Ok(AnyParams::Quant(assemble(file, |raw| QValue::from_raw(raw, fmt).map_err(ModelError::from))?))
        }
    }
}

fn assemble<S: Copy, T: Copy>(file: FileDoc<S>, decode: impl Fn(S) -> Result<T, ModelError>) -> Result<Params<T>, ModelError> {
    if file.layer_sizes.len() != file.layers.len() + 1 {
        return Err(ModelError::Shape(format!(
            "header lists {} layer sizes for {} layers",
            file.layer_sizes.len(),
            file.layers.len()
        )));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (l, doc) in file.layers.into_iter().enumerate() {
        let (inputs, neurons) = (file.layer_sizes[l], file.layer_sizes[l + 1]);
        if doc.weights.len() != neurons || doc.weights.iter().any(|r| r.len() != inputs) {
            return Err(ModelError::Shape(format!(
                "layer {l} weights do not form a {neurons}x{inputs} matrix"
            )));
        }
        let weights = doc.weights.into_iter().flatten().map(&decode).collect::<Result<Vec<T>, _>>()?;
        let biases = doc.biases.into_iter().map(&decode).collect::<Result<Vec<T>, _>>()?;
        layers.push(LayerParams::new(neurons, inputs, weights, biases)?);
    }
    Params::new(layers)
}

pub fn save_params(path: &Path, params: &AnyParams) -> Result<(), ModelError> {
    std::fs::write(path, write_params(params))
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

pub fn load_params(path: &Path) -> Result<AnyParams, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    read_params(&text)
}
