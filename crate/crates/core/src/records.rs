//! Versioned JSON record files.
//!
//! Every artifact (manifest, bag list, checkpoint, predictions, report) is a
//! single self-describing JSON document with a `schema_version` field.
//! Writes go through a temp-file-then-rename so readers never observe a
//! partial file.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Serialize `value` as pretty JSON and atomically replace `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let wrap = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut body = serde_json::to_string_pretty(value).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    body.push('\n');
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body).map_err(wrap)?;
    fs::rename(&tmp, path).map_err(wrap)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let body = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&body).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Check a file's schema version before trusting the rest of its fields.
pub fn check_schema(path: &Path, found: u32, expected: u32) -> Result<()> {
    if found != expected {
        return Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found,
            expected,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Doc {
        schema_version: u32,
        values: Vec<f64>,
    }

    #[test]
    fn round_trip_preserves_floats_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.json");
        let doc = Doc {
            schema_version: 1,
            values: vec![0.1, 1.0 / 3.0, 1e-300, -7.25],
        };
        write_json(&path, &doc).unwrap();
        let back: Doc = read_json(&path).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn corrupt_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.json");
        fs::write(&path, "{not json").unwrap();
        match read_json::<Doc>(&path) {
            Err(Error::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn schema_version_is_enforced() {
        let err = check_schema(Path::new("x.json"), 2, 1).unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: 2, .. }));
    }
}
