//! File formats.
//!
//! Every JSON file carries a `format` tag and a `version`; loading a file
//! with another tag or version fails instead of guessing. All writes go to
//! a temporary file in the target directory which is then renamed over the
//! destination.

mod bundle;
mod manifest;
mod run;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use bundle::{BundlePart, ContactRecord, MatrixBundle, RingRecord, BUNDLE_FORMAT};
pub use manifest::{AssemblyManifest, GeometryConfig, InsertionOverride, PartSpec, MANIFEST_FORMAT};
pub use run::{
    read_convergence_csv, write_convergence_csv, NeighborRecord, PointRecord, RunReport, RunSummary, SequenceFile, SequenceRecord, Step,
    VerificationReport, ExhaustiveSummary, REPORT_FORMAT, SEQUENCE_FORMAT, VERIFICATION_FORMAT,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to `path` by way of a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::io(format!("temporary file in {}", dir.display()), e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(format!("renaming onto {}", path.display()), e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path.display().to_string(), e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Reads a tagged JSON file, checking `format` and `version` before
/// decoding the rest.
pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &'static str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    from_json_str(&text, kind).map_err(|e| match e {
        Error::Json { source, .. } => Error::json(path.display().to_string(), source),
        other => other,
    })
}

pub(crate) fn from_json_str<T: DeserializeOwned>(text: &str, kind: &'static str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::json(kind, e))?;
    check_header(&value, kind)?;
    serde_json::from_value(value).map_err(|e| Error::json(kind, e))
}

fn check_header(value: &serde_json::Value, kind: &'static str) -> Result<()> {
    let format = value.get("format").and_then(|f| f.as_str());
    if format != Some(kind) {
        let found = format.map_or_else(|| "nothing".to_string(), |f| format!("`{f}`"));
        return Err(Error::BundleCorrupt(format!("expected a `{kind}` file, found {found}")));
    }
    let found = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::BundleCorrupt(format!("`{kind}` file has no version")))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion {
            kind,
            found: found.min(u64::from(u32::MAX)) as u32,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, serde::Deserialize)]
    struct Tagged {
        format: String,
        version: u32,
        x: i32,
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn header_is_checked() {
        let ok = r#"{"format":"asg-test","version":1,"x":3}"#;
        let t: Tagged = from_json_str(ok, "asg-test").unwrap();
        assert_eq!(t.x, 3);
        let newer = r#"{"format":"asg-test","version":2,"x":3}"#;
        assert!(matches!(
            from_json_str::<Tagged>(newer, "asg-test"),
            Err(Error::SchemaVersion { found: 2, expected: 1, .. })
        ));
        let other = r#"{"format":"asg-other","version":1,"x":3}"#;
        assert!(matches!(from_json_str::<Tagged>(other, "asg-test"), Err(Error::BundleCorrupt(_))));
    }
}
