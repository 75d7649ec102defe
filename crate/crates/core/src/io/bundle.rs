use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_json, GeometryConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::geometry::{Direction, Frame};
use crate::relations::{Deformability, InterferenceFreeMatrix, RelationSet};

pub const BUNDLE_FORMAT: &str = "asg-bundle";

/// Everything optimisation needs, plus an audit trail of how it was
/// derived. Matrices are indexed by 0-based part index (id - 1) and hold
/// 0/1 entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixBundle {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub eta: usize,
    pub parts: Vec<BundlePart>,
    /// `M[d][i][k] = 1` when part i can leave along d without hitting k,
    /// keyed by direction label.
    pub interference_free: BTreeMap<String, Vec<Vec<u8>>>,
    /// `I[i][k] = 1` when part i is inserted into part k.
    pub insertion: Vec<Vec<u8>>,
    pub degree: Vec<Vec<u8>>,
    /// Geometry settings actually used; `resolution` is always present.
    pub geometry: GeometryConfig,
    /// World axes that became the bundle's x, y and z.
    pub frame: Frame,
    #[serde(default)]
    pub rings: Vec<RingRecord>,
    /// Free displacements of every touching pair, as labels.
    #[serde(default)]
    pub contacts: Vec<ContactRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundlePart {
    pub id: usize,
    pub name: String,
    pub deformable: Deformability,
    /// Occupied voxels of the grid used for the relations.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingRecord {
    pub part: usize,
    pub name: String,
    pub scale_factor: f64,
    pub axis: [f64; 3],
    pub center: [f64; 3],
    /// Displacements free at the adopted factor.
    pub free: Vec<String>,
    /// Factors tried first, in order, that left the ring stuck.
    pub rejected: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactRecord {
    pub part_i: usize,
    pub part_k: usize,
    pub degree: u8,
    pub free: Vec<String>,
}

fn to_u8(m: &[Vec<bool>]) -> Vec<Vec<u8>> {
    m.iter().map(|r| r.iter().map(|&b| u8::from(b)).collect()).collect()
}

fn to_bool(name: &str, m: &[Vec<u8>], eta: usize) -> Result<Vec<Vec<bool>>> {
    if m.len() != eta || m.iter().any(|r| r.len() != eta) {
        return Err(Error::BundleCorrupt(format!("{name} matrix is not {eta}x{eta}")));
    }
    m.iter()
        .map(|r| {
            r.iter()
                .map(|&v| match v {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(Error::BundleCorrupt(format!("{name} matrix holds {v}, expected 0 or 1"))),
                })
                .collect()
        })
        .collect()
}

impl MatrixBundle {
    pub fn new(model: impl Into<String>, rel: &RelationSet, parts: Vec<BundlePart>, geometry: GeometryConfig) -> Self {
        let interference_free = Direction::ALL
            .into_iter()
            .map(|d| (d.to_string(), to_u8(&rel.interference_free.rows(d))))
            .collect();
        MatrixBundle {
            format: BUNDLE_FORMAT.to_string(),
            version: SCHEMA_VERSION,
            model: model.into(),
            eta: rel.eta(),
            parts,
            interference_free,
            insertion: to_u8(&rel.insertion),
            degree: rel.degree.clone(),
            geometry,
            frame: Frame::identity(),
            rings: Vec::new(),
            contacts: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let b: MatrixBundle = read_json(path, BUNDLE_FORMAT)?;
        b.relations()?;
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Decodes and checks the matrices.
    pub fn relations(&self) -> Result<RelationSet> {
        let eta = self.eta;
        let corrupt = |m: String| Err(Error::BundleCorrupt(m));
        if eta == 0 {
            return corrupt("no parts".into());
        }
        if self.parts.len() != eta {
            return corrupt(format!("{} part records for eta = {eta}", self.parts.len()));
        }
        for (k, p) in self.parts.iter().enumerate() {
            if p.id != k + 1 {
                return corrupt(format!("part record {k} has id {}", p.id));
            }
        }
        let mut rows = Vec::new();
        for d in Direction::ALL {
            let label = d.to_string();
            let m = self
                .interference_free
                .get(&label)
                .ok_or_else(|| Error::BundleCorrupt(format!("missing interference-free matrix {label}")))?;
            rows.push((d, to_bool(&label, m, eta)?));
        }
        if self.interference_free.len() != 6 {
            return corrupt("unexpected interference-free matrix keys".into());
        }
        let m = InterferenceFreeMatrix::from_rows(eta, &rows)?;
        for d in Direction::ALL {
            for i in 0..eta {
                for k in 0..eta {
                    if m.get(d, i, k) != m.get(d.opposite(), k, i) {
                        return corrupt(format!("interference-free {d} is not the transpose of its opposite at ({i}, {k})"));
                    }
                }
            }
        }
        let insertion = to_bool("insertion", &self.insertion, eta)?;
        if self.degree.len() != eta || self.degree.iter().any(|r| r.len() != eta) {
            return corrupt(format!("degree matrix is not {eta}x{eta}"));
        }
        for i in 0..eta {
            if self.degree[i][i] != 0 || insertion[i][i] {
                return corrupt(format!("diagonal entry {i} is not zero"));
            }
            for k in 0..eta {
                if self.degree[i][k] > 12 || self.degree[i][k] != self.degree[k][i] {
                    return corrupt(format!("degree matrix entry ({i}, {k}) is not a symmetric value in 0..=12"));
                }
            }
        }
        Ok(RelationSet {
            names: self.parts.iter().map(|p| p.name.clone()).collect(),
            interference_free: m,
            insertion,
            degree: self.degree.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack_bundle() -> MatrixBundle {
        let mut m = InterferenceFreeMatrix::new(2);
        m.set(Direction::NEG_Z, 1, 0, false);
        m.set(Direction::POS_Z, 0, 1, false);
        let rel = RelationSet {
            names: vec!["plate".into(), "cube".into()],
            interference_free: m,
            insertion: vec![vec![false; 2]; 2],
            degree: vec![vec![0, 5], vec![5, 0]],
        };
        let parts = vec![
            BundlePart { id: 1, name: "plate".into(), deformable: Deformability::Rigid, cells: 800 },
            BundlePart { id: 2, name: "cube".into(), deformable: Deformability::Rigid, cells: 1000 },
        ];
        MatrixBundle::new("stack", &rel, parts, GeometryConfig { resolution: Some(1.0), ..Default::default() })
    }

    #[test]
    fn round_trip() {
        let b = stack_bundle();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.json");
        b.save(&p).unwrap();
        let back = MatrixBundle::load(&p).unwrap();
        assert_eq!(back, b);
        let rel = back.relations().unwrap();
        assert!(!rel.interference_free.get(Direction::NEG_Z, 1, 0));
        assert_eq!(rel.degree, vec![vec![0, 5], vec![5, 0]]);
    }

    #[test]
    fn corrupt_matrices_are_rejected() {
        let mut b = stack_bundle();
        b.degree[0][1] = 7;
        assert!(matches!(b.relations(), Err(Error::BundleCorrupt(_))));
        let mut b = stack_bundle();
        b.interference_free.get_mut("+z").unwrap()[0][1] = 1;
        assert!(matches!(b.relations(), Err(Error::BundleCorrupt(_))));
        let mut b = stack_bundle();
        b.insertion[0][1] = 2;
        assert!(matches!(b.relations(), Err(Error::BundleCorrupt(_))));
        let mut b = stack_bundle();
        b.interference_free.remove("-x");
        assert!(matches!(b.relations(), Err(Error::BundleCorrupt(_))));
    }

    #[test]
    fn version_mismatch_fails_loudly() {
        let b = stack_bundle();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.json");
        let mut v = serde_json::to_value(&b).unwrap();
        v["version"] = 9.into();
        std::fs::write(&p, v.to_string()).unwrap();
        assert!(matches!(MatrixBundle::load(&p), Err(Error::SchemaVersion { found: 9, .. })));
    }
}
