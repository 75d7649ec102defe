use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh `{0}` has no triangles")]
    EmptyMesh(String),

    #[error("mesh `{name}` is invalid: {reason}")]
    InvalidMesh { name: String, reason: String },

    #[error("resolution {resolution} mm is too coarse for `{name}`: only {cells} occupied cells (need at least 8)")]
    ResolutionTooCoarse {
        name: String,
        resolution: f64,
        cells: usize,
    },

    #[error("voxel grids have different resolutions ({0} vs {1})")]
    ResolutionMismatch(f64, f64),

    #[error("parts interpenetrate in the assembled pose ({0} shared cells)")]
    InterpenetratingParts(usize),

    #[error("ring part `{0}` has no radial extent around its axis")]
    DegenerateRing(String),

    #[error("scale factor {0} is outside the supported range [0.25, 4.0]")]
    ScaleOutOfRange(f64),

    #[error("no scale factor in the schedule frees ring part `{0}` in any direction")]
    NoFeasibleScale(String),

    #[error("string-like part `{0}` has no rigid-tip annotation")]
    MissingTipAnnotation(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid manifest: {0}")]
    ManifestInvalid(String),

    #[error("matrix bundle is corrupt: {0}")]
    BundleCorrupt(String),

    #[error("`{kind}` file has schema version {found}, expected {expected}")]
    SchemaVersion {
        kind: &'static str,
        found: u32,
        expected: u32,
    },

    #[error("sequence has {sequence} parts but the bundle has {bundle}")]
    EtaMismatch { sequence: usize, bundle: usize },

    #[error("exhaustive enumeration needs about {needed} evaluations, budget is {budget}")]
    TooLarge { needed: f64, budget: u64 },

    #[error("reference point does not lie below every front point")]
    BadReference,

    #[error("missing run artifact: {0}")]
    MissingArtifacts(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("part `{name}`: {source}")]
    Part {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("deformable part `{name}` holds {percent:.0}% of the product volume; only small rings and strings are supported")]
    LargeDeformable { name: String, percent: f64 },

    #[error("pair ({0}, {1}): {2}")]
    Pair(String, String, Box<Error>),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn in_part(name: &str) -> impl FnOnce(Error) -> Error + '_ {
        move |e| Error::Part {
            name: name.to_string(),
            source: Box::new(e),
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
