//! File formats shared with the CLI and the external VAE trainer.
//!
//! * Weight interchange (`format_version` 1): dense layers only.
//! * Vectors: `{"len": N, "data": [...]}`.
//! * Parity fixtures: latents plus the exporter's own forward outputs.
//!
//! Floats are written by `serde_json`, which emits the shortest decimal
//! that round-trips the `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{DemixError, Result};
use crate::gennet::{Activation, GeneratorNet, Layer};
use crate::linalg::DenseMatrix;

pub const WEIGHTS_FORMAT_VERSION: u64 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DemixError + '_ {
    move |source| DemixError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: impl Into<String>, reason: impl Into<String>) -> DemixError {
    DemixError::Parse {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{file_name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err("$", format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Generator weights

pub fn weights_to_json(net: &GeneratorNet) -> Value {
    let layers: Vec<Value> = net
        .layers()
        .iter()
        .map(|l| {
            json!({
                "weights": {
                    "rows": l.weights.rows(),
                    "cols": l.weights.cols(),
                    "data": l.weights.data(),
                },
                "bias": l.bias,
                "activation": l.activation.name(),
            })
        })
        .collect();
    json!({
        "format_version": WEIGHTS_FORMAT_VERSION,
        "latent_dim": net.latent_dim(),
        "output_dim": net.output_dim(),
        "layers": layers,
        "lipschitz_hint": net.lipschitz_bound(),
    })
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(format!("{path}.{key}"), "missing field"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn as_f64_vec(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| parse_err(format!("{path}[{i}]"), "expected a number"))
        })
        .collect()
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(path, "expected an object"))
}

/// Parses an interchange document. Unknown top-level keys are ignored.
pub fn weights_from_json(doc: &Value) -> Result<GeneratorNet> {
    let root = as_object(doc, "$")?;
    let version = get(root, "format_version", "$")?
        .as_u64()
        .ok_or_else(|| parse_err("$.format_version", "expected an integer"))?;
    if version != WEIGHTS_FORMAT_VERSION {
        return Err(DemixError::UnsupportedVersion {
            found: version,
            supported: WEIGHTS_FORMAT_VERSION,
        });
    }
    let latent_dim = as_usize(get(root, "latent_dim", "$")?, "$.latent_dim")?;
    let output_dim = as_usize(get(root, "output_dim", "$")?, "$.output_dim")?;
    let layer_docs = get(root, "layers", "$")?
        .as_array()
        .ok_or_else(|| parse_err("$.layers", "expected an array"))?;
    if let Some(hint) = root.get("lipschitz_hint") {
        if !hint.is_null() && hint.as_f64().is_none() {
            return Err(parse_err("$.lipschitz_hint", "expected a number"));
        }
    }

    let mut layers = Vec::with_capacity(layer_docs.len());
    for (i, ld) in layer_docs.iter().enumerate() {
        let lp = format!("$.layers[{i}]");
        let lo = as_object(ld, &lp)?;
        let wp = format!("{lp}.weights");
        let wo = as_object(get(lo, "weights", &lp)?, &wp)?;
        let rows = as_usize(get(wo, "rows", &wp)?, &format!("{wp}.rows"))?;
        let cols = as_usize(get(wo, "cols", &wp)?, &format!("{wp}.cols"))?;
        let data = as_f64_vec(get(wo, "data", &wp)?, &format!("{wp}.data"))?;
        let bias = as_f64_vec(get(lo, "bias", &lp)?, &format!("{lp}.bias"))?;
        let act_str = get(lo, "activation", &lp)?
            .as_str()
            .ok_or_else(|| parse_err(format!("{lp}.activation"), "expected a string"))?;
        let activation = Activation::parse(act_str).ok_or_else(|| {
            parse_err(
                format!("{lp}.activation"),
                format!("unknown activation `{act_str}`"),
            )
        })?;
        let structural = |reason: String| DemixError::Structure { layer: i, reason };
        if rows * cols != data.len() || rows == 0 || cols == 0 {
            return Err(structural(format!(
                "weights declare {rows}x{cols} but carry {} values",
                data.len()
            )));
        }
        if bias.len() != rows {
            return Err(structural(format!("bias has {} entries, expected {rows}", bias.len())));
        }
        let weights = DenseMatrix::from_row_major(rows, cols, data)
            .map_err(|e| structural(e.to_string()))?;
        layers.push(Layer::new(weights, bias, activation).map_err(|e| structural(e.to_string()))?);
    }
    let net = GeneratorNet::new(layers)?;
    if net.latent_dim() != latent_dim {
        return Err(DemixError::Structure {
            layer: 0,
            reason: format!("latent_dim is {latent_dim} but first layer takes {}", net.latent_dim()),
        });
    }
    if net.output_dim() != output_dim {
        return Err(DemixError::Structure {
            layer: net.depth() - 1,
            reason: format!("output_dim is {output_dim} but last layer yields {}", net.output_dim()),
        });
    }
    Ok(net)
}

pub fn save_weights(net: &GeneratorNet, path: &Path) -> Result<()> {
    write_json(path, &weights_to_json(net))
}

pub fn load_weights(path: &Path) -> Result<GeneratorNet> {
    weights_from_json(&read_json_value(path)?)
}

// ---------------------------------------------------------------------------
// Vectors

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub len: usize,
    pub data: Vec<f64>,
}

impl VectorFile {
    pub fn new(data: Vec<f64>) -> Self {
        Self {
            len: data.len(),
            data,
        }
    }
}

pub fn vector_from_json(doc: &Value) -> Result<Vec<f64>> {
    let root = as_object(doc, "$")?;
    let len = as_usize(get(root, "len", "$")?, "$.len")?;
    let data = as_f64_vec(get(root, "data", "$")?, "$.data")?;
    if data.len() != len {
        return Err(parse_err("$.data", format!("len says {len} but data has {}", data.len())));
    }
    Ok(data)
}

pub fn save_vector(data: &[f64], path: &Path) -> Result<()> {
    write_json(path, &VectorFile::new(data.to_vec()))
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_json(&read_json_value(path)?)
}

// ---------------------------------------------------------------------------
// Parity fixtures

/// Latents and the outputs an external implementation computed for them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParityFixture {
    pub tolerance: f64,
    pub cases: Vec<ParityCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParityCase {
    pub latent: Vec<f64>,
    pub output: Vec<f64>,
}

pub fn load_parity(path: &Path) -> Result<ParityFixture> {
    let v = read_json_value(path)?;
    serde_json::from_value(v).map_err(|e| parse_err("$", e.to_string()))
}

/// Largest absolute deviation between `net` and the fixture outputs.
pub fn parity_max_abs_error(net: &GeneratorNet, fixture: &ParityFixture) -> Result<f64> {
    let mut worst = 0.0f64;
    for case in &fixture.cases {
        let out = net.forward(&case.latent)?;
        crate::error::dim_check("parity output", case.output.len(), out.len())?;
        for (a, b) in out.iter().zip(&case.output) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
