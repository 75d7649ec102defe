//! From part meshes in their assembled poses to a matrix bundle.

use nalgebra::Matrix4;
use rayon::prelude::*;

use crate::deformables::{find_feasible_scale, string_tip_grids, RingScalingResult, TipAnnotation};
use crate::error::{Error, Result};
use crate::geometry::{load_mesh, load_obj_objects, stable_pose_frame, voxelize, Displacement, Frame, TriangleMesh, Vector, VoxelGrid};
use crate::io::{AssemblyManifest, BundlePart, ContactRecord, GeometryConfig, InsertionOverride, MatrixBundle, RingRecord};
use crate::relations::{extract_relations, ConstraintFreeInfo, Deformability, Part, RelationSet};

/// Default voxel count along the longest edge of the product.
pub const DEFAULT_CELLS_PER_EDGE: f64 = 64.0;

/// Deformable parts above this share of the product's occupied volume are
/// refused (seats, covers, cloth).
pub const LARGE_DEFORMABLE_SHARE: f64 = 0.25;

/// A part's meshes, already in the assembled pose.
#[derive(Debug, Clone)]
pub struct PartInput {
    pub name: String,
    /// One mesh, or the named sub-objects of an OBJ file.
    pub objects: Vec<TriangleMesh>,
    pub deformable: Deformability,
    pub ring_axis: Option<Vector>,
    pub tips: Option<TipAnnotation>,
}

impl PartInput {
    pub fn rigid(name: impl Into<String>, mesh: TriangleMesh) -> Self {
        PartInput {
            name: name.into(),
            objects: vec![mesh],
            deformable: Deformability::Rigid,
            ring_axis: None,
            tips: None,
        }
    }

    pub fn ring(name: impl Into<String>, mesh: TriangleMesh, axis: Option<Vector>) -> Self {
        PartInput {
            deformable: Deformability::Ring,
            ring_axis: axis,
            ..PartInput::rigid(name, mesh)
        }
    }
}

/// Result of the extraction stage.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub model: String,
    /// Grids actually used for the relations, in the bundle frame; rings
    /// are their scaled copies and strings their tips.
    pub parts: Vec<Part>,
    pub relations: RelationSet,
    pub table: Vec<ConstraintFreeInfo>,
    pub rings: Vec<RingScalingResult>,
    pub frame: Frame,
    pub geometry: GeometryConfig,
}

impl Extraction {
    pub fn eta(&self) -> usize {
        self.parts.len()
    }

    pub fn contact_pairs(&self) -> usize {
        self.table.iter().filter(|t| t.contact).count()
    }

    pub fn bundle(&self) -> MatrixBundle {
        let parts = self
            .parts
            .iter()
            .map(|p| BundlePart {
                id: p.id,
                name: p.name.clone(),
                deformable: p.deformable,
                cells: p.grid.occupied_count(),
            })
            .collect();
        let mut b = MatrixBundle::new(&self.model, &self.relations, parts, self.geometry);
        b.frame = self.frame;
        b.rings = self
            .rings
            .iter()
            .map(|r| RingRecord {
                part: r.part + 1,
                name: self.parts[r.part].name.clone(),
                scale_factor: r.scale_factor,
                axis: r.axis.into(),
                center: r.center.coords.into(),
                free: labels(&r.free),
                rejected: r.rejected.clone(),
            })
            .collect();
        b.contacts = self
            .table
            .iter()
            .filter(|t| t.contact)
            .map(|t| ContactRecord {
                part_i: t.part_i + 1,
                part_k: t.part_k + 1,
                degree: self.relations.degree[t.part_i][t.part_k],
                free: labels(&t.free),
            })
            .collect();
        b
    }

    /// A few lines for the terminal.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "model {}: eta = {}, {} contact pairs, resolution {}\n",
            self.model,
            self.eta(),
            self.contact_pairs(),
            self.geometry.resolution.unwrap_or_default()
        );
        if !self.frame.is_identity() {
            s += &format!("reoriented: world {} is up\n", self.frame.z);
        }
        for r in &self.rings {
            s += &format!(
                "ring `{}` scaled by {} (free: {})\n",
                self.parts[r.part].name,
                r.scale_factor,
                labels(&r.free).join(" ")
            );
        }
        for p in self.parts.iter().filter(|p| p.deformable == Deformability::String) {
            s += &format!("string `{}` reduced to its rigid tips\n", p.name);
        }
        s
    }
}

fn labels(free: &[bool; 12]) -> Vec<String> {
    Displacement::ALL
        .iter()
        .filter(|d| free[d.index()])
        .map(|d| d.label())
        .collect()
}

fn default_resolution(inputs: &[PartInput]) -> Result<f64> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for m in inputs.iter().flat_map(|p| &p.objects) {
        if let Some((a, b)) = m.aabb() {
            for i in 0..3 {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(b[i]);
            }
        }
    }
    let edge = (0..3).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
    if edge.is_finite() && edge > 0.0 {
        Ok(edge / DEFAULT_CELLS_PER_EDGE)
    } else {
        Err(Error::ManifestInvalid("product has no extent".into()))
    }
}

/// Voxelizes the parts and derives every relation matrix.
pub fn extract(
    model: &str,
    inputs: &[PartInput],
    geometry: &GeometryConfig,
    overrides: &[InsertionOverride],
) -> Result<Extraction> {
    geometry.validate()?;
    let mut geometry = *geometry;
    let res = match geometry.resolution {
        Some(r) => r,
        None => default_resolution(inputs)?,
    };
    geometry.resolution = Some(res);
    let cfg = geometry.relation_config();

    let mut grids: Vec<VoxelGrid> = inputs
        .par_iter()
        .map(|p| {
            let grid = match p.deformable {
                Deformability::String => {
                    let tips = string_tip_grids(&p.name, &p.objects, p.tips.as_ref(), res)?;
                    VoxelGrid::union(res, &tips.iter().collect::<Vec<_>>())
                }
                _ => voxelize(&TriangleMesh::merged(&p.name, &p.objects), res)?,
            };
            Ok(grid)
        })
        .zip(inputs.par_iter())
        .map(|(g, p): (Result<VoxelGrid>, _)| g.map_err(Error::in_part(&p.name)))
        .collect::<Result<_>>()?;

    let frame = if geometry.stable_pose {
        Frame::with_up(stable_pose_frame(&grids))
    } else {
        Frame::identity()
    };
    if !frame.is_identity() {
        log::info!("reorienting product: world {} becomes +z", frame.z);
        grids = grids.iter().map(|g| frame.map_grid(g)).collect();
    }

    let total: usize = grids.iter().map(VoxelGrid::occupied_count).sum();
    for (p, g) in inputs.iter().zip(&grids) {
        let share = g.occupied_count() as f64 / total as f64;
        if p.deformable != Deformability::Rigid && inputs.len() > 1 && share > LARGE_DEFORMABLE_SHARE {
            return Err(Error::LargeDeformable {
                name: p.name.clone(),
                percent: 100.0 * share,
            });
        }
    }

    let mut rings = Vec::new();
    for (i, p) in inputs.iter().enumerate() {
        if p.deformable != Deformability::Ring {
            continue;
        }
        let others: Vec<&VoxelGrid> = grids.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, g)| g).collect();
        let others = VoxelGrid::union(res, &others);
        let axis = p.ring_axis.map(|a| frame.map_vector(a));
        let r = find_feasible_scale(i, &p.name, &grids[i], axis, &others, &cfg).map_err(Error::in_part(&p.name))?;
        grids[i] = r.scaled_grid.clone();
        rings.push(r);
    }

    let parts: Vec<Part> = inputs
        .iter()
        .zip(grids)
        .enumerate()
        .map(|(i, (p, grid))| Part {
            id: i + 1,
            name: p.name.clone(),
            grid,
            deformable: p.deformable,
        })
        .collect();
    let (mut relations, table) = extract_relations(&parts, &cfg)?;
    apply_overrides(&mut relations, &parts, overrides);
    Ok(Extraction {
        model: model.to_string(),
        parts,
        relations,
        table,
        rings,
        frame,
        geometry,
    })
}

/// Applies manifest insertion overrides; ring parts never take part in
/// insertions, whatever the overrides say.
fn apply_overrides(rel: &mut RelationSet, parts: &[Part], overrides: &[InsertionOverride]) {
    for o in overrides {
        rel.insertion[o.inserted - 1][o.receptacle - 1] = o.value;
    }
    for (i, p) in parts.iter().enumerate() {
        if p.deformable == Deformability::Ring {
            for k in 0..parts.len() {
                rel.insertion[i][k] = false;
                rel.insertion[k][i] = false;
            }
        }
    }
}

/// Loads every mesh of a validated manifest and applies the poses.
pub fn load_inputs(manifest: &AssemblyManifest) -> Result<Vec<PartInput>> {
    manifest
        .parts
        .par_iter()
        .map(|spec| {
            let wrap = Error::in_part(&spec.name);
            let is_obj = spec.mesh.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"));
            let objects = if is_obj && spec.deformable == Deformability::String {
                load_obj_objects(&spec.mesh).map_err(wrap)?
            } else {
                vec![load_mesh(&spec.mesh).map_err(wrap)?]
            };
            let objects = match spec.pose {
                Some(rows) => {
                    let pose = Matrix4::from_fn(|r, c| rows[r][c]);
                    objects.iter().map(|m| m.transformed(&pose)).collect()
                }
                None => objects,
            };
            Ok(PartInput {
                name: spec.name.clone(),
                objects,
                deformable: spec.deformable,
                ring_axis: spec.ring_axis.map(Vector::from),
                tips: spec.tips.clone(),
            })
        })
        .collect()
}

/// Manifest to extraction, with optional overrides of the geometry
/// settings.
pub fn extract_manifest(manifest: &AssemblyManifest, resolution: Option<f64>, seed: Option<u64>) -> Result<Extraction> {
    let mut geometry = manifest.geometry;
    if resolution.is_some() {
        geometry.resolution = resolution;
    }
    if let Some(s) = seed {
        geometry.seed = s;
    }
    let inputs = load_inputs(manifest)?;
    extract(&manifest.model, &inputs, &geometry, &manifest.insertions)
}
