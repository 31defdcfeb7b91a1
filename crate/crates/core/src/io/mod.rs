//! Files: JSON datasets and models, LP and LaTeX output, run configuration.

mod config;
mod latex;
mod lp;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use config::{ClassifierBackend, FinetuneHyperparameters, RunConfig, RunPaths, DEFAULT_CONFIG_TOML};
pub use latex::emit_latex;
pub use lp::emit_lp;

use crate::ir::MilpModel;
use crate::pipeline::ProblemInstance;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The file is not valid JSON for the expected schema. `pointer` is the
    /// JSON pointer of the offending value.
    #[error("{}: schema violation at `{pointer}`: {message}", path.display())]
    Schema {
        path: PathBuf,
        pointer: String,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn escape_pointer(segment: &str) -> String {
    segment.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            serde_path_to_error::Segment::Seq { index } => write!(out, "/{index}").unwrap(),
            serde_path_to_error::Segment::Map { key } => write!(out, "/{}", escape_pointer(key)).unwrap(),
            serde_path_to_error::Segment::Enum { variant } => write!(out, "/{}", escape_pointer(variant)).unwrap(),
            serde_path_to_error::Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Parse JSON text, reporting schema errors with a JSON pointer.
pub fn from_json_str<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
        path: path.to_path_buf(),
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    from_json_str(&text, path)
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), IoError> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_atomic(path, to_json_pretty(value).as_bytes())
}

/// Load and validate an instance.
pub fn load_instance<S>(path: impl AsRef<Path>) -> Result<ProblemInstance<S>, IoError>
where
    S: Scalar + DeserializeOwned,
{
    let path = path.as_ref();
    let inst: ProblemInstance<S> = load_json(path)?;
    inst.validate().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(inst)
}

pub fn load_model<S>(path: impl AsRef<Path>) -> Result<MilpModel<S>, IoError>
where
    S: Scalar + DeserializeOwned,
{
    let path = path.as_ref();
    let model: MilpModel<S> = load_json(path)?;
    model.validate().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(model)
}

pub fn save_model<S: Scalar + Serialize>(model: &MilpModel<S>, path: impl AsRef<Path>) -> Result<(), IoError> {
    save_json(model, path)
}

/// A labeled classifier item file: a JSON array.
pub fn load_labeled(path: impl AsRef<Path>) -> Result<Vec<crate::classifier::LabeledDescription>, IoError> {
    load_json(path)
}
