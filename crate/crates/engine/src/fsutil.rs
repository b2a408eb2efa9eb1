//! Small filesystem helpers shared by the persistence modules.

use std::path::Path;

use crate::error::{EngineError, Result};

/// Writes `bytes` to `path` atomically: write a temp sibling, then rename.
/// A crash mid-write leaves the previous file intact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| EngineError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| EngineError::io(path, e))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))
}

pub fn create_dir_all(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| EngineError::io(path, e))
}

/// Parses JSON, mapping failures to a format error carrying the path.
pub fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| EngineError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}
