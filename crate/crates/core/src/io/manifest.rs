use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_json, write_json, SCHEMA_VERSION};
use crate::deformables::TipAnnotation;
use crate::error::{Error, Result};
use crate::relations::{Deformability, RelationConfig};

pub const MANIFEST_FORMAT: &str = "asg-manifest";

/// An assembled product: one mesh file per part with its pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyManifest {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub parts: Vec<PartSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub insertions: Vec<InsertionOverride>,
    #[serde(default)]
    pub geometry: GeometryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    /// 1-based id; ids must be exactly `1..=eta`.
    pub id: usize,
    pub name: String,
    /// STL or OBJ file, relative to the manifest's directory.
    pub mesh: PathBuf,
    /// Row-major 4x4 transform from mesh coordinates to the assembled
    /// pose. Identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<[[f64; 4]; 4]>,
    #[serde(default)]
    pub deformable: Deformability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tips: Option<TipAnnotation>,
}

/// Forces `I[inserted][receptacle]` to `value` after automatic detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsertionOverride {
    pub inserted: usize,
    pub receptacle: usize,
    #[serde(default = "yes")]
    pub value: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Voxel edge length in model units. When omitted, 1/64 of the
    /// longest edge of the product's bounding box.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    pub tau: f64,
    pub max_rotation: f64,
    pub seed: u64,
    /// Reorient the product so its largest flat footprint faces down.
    pub stable_pose: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let r = RelationConfig::default();
        GeometryConfig {
            resolution: None,
            tau: r.tau,
            max_rotation: r.max_rotation,
            seed: r.seed,
            stable_pose: true,
        }
    }
}

impl GeometryConfig {
    pub fn relation_config(&self) -> RelationConfig {
        RelationConfig {
            tau: self.tau,
            max_rotation: self.max_rotation,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.resolution {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::ConfigInvalid(format!("resolution must be positive, got {r}")));
            }
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::ConfigInvalid(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if !(self.max_rotation > 0.0 && self.max_rotation < std::f64::consts::FRAC_PI_2) {
            return Err(Error::ConfigInvalid(format!(
                "max_rotation must lie in (0, pi/2), got {}",
                self.max_rotation
            )));
        }
        Ok(())
    }
}

impl AssemblyManifest {
    pub fn new(model: impl Into<String>, parts: Vec<PartSpec>) -> Self {
        AssemblyManifest {
            format: MANIFEST_FORMAT.to_string(),
            version: SCHEMA_VERSION,
            model: model.into(),
            parts,
            insertions: Vec::new(),
            geometry: GeometryConfig::default(),
        }
    }

    /// Loads and validates a manifest; mesh paths are resolved against the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut m: AssemblyManifest = read_json(path, MANIFEST_FORMAT)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in &mut m.parts {
            if p.mesh.is_relative() {
                p.mesh = base.join(&p.mesh);
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn eta(&self) -> usize {
        self.parts.len()
    }

    /// Checks ids, names, tags and mesh files. Parts are sorted by id.
    pub fn validate(&mut self) -> Result<()> {
        let bad = |msg: String| Err(Error::ManifestInvalid(msg));
        if self.parts.is_empty() {
            return bad("no parts".into());
        }
        self.parts.sort_by_key(|p| p.id);
        for (k, p) in self.parts.iter().enumerate() {
            if p.id != k + 1 {
                return bad(format!("part ids must be 1..={} without gaps", self.parts.len()));
            }
        }
        let mut names = HashSet::new();
        for p in &self.parts {
            if p.name.is_empty() || !names.insert(p.name.as_str()) {
                return bad(format!("part {} has an empty or repeated name `{}`", p.id, p.name));
            }
            if !p.mesh.is_file() {
                return Err(Error::Part {
                    name: p.name.clone(),
                    source: Box::new(Error::io(
                        format!("mesh {}", p.mesh.display()),
                        std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                    )),
                });
            }
            if p.ring_axis.is_some() && p.deformable != Deformability::Ring {
                return bad(format!("`{}` has a ring_axis but is not a ring", p.name));
            }
            if p.tips.is_some() && p.deformable != Deformability::String {
                return bad(format!("`{}` has tips but is not a string", p.name));
            }
            if p.deformable == Deformability::String && p.tips.is_none() {
                return Err(Error::MissingTipAnnotation(p.name.clone()));
            }
            if let Some(pose) = p.pose {
                if pose.iter().flatten().any(|v| !v.is_finite()) || pose[3] != [0.0, 0.0, 0.0, 1.0] {
                    return bad(format!("`{}` pose must be finite and affine", p.name));
                }
            }
        }
        let eta = self.parts.len();
        for o in &self.insertions {
            if !(1..=eta).contains(&o.inserted) || !(1..=eta).contains(&o.receptacle) || o.inserted == o.receptacle {
                return bad(format!("insertion override {} -> {} is out of range", o.inserted, o.receptacle));
            }
        }
        self.geometry.validate()
    }
}
