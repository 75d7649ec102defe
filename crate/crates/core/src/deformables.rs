//! Deformable parts.
//!
//! Ring-shaped parts (rubber bands, belts) are assessed on a radially
//! stretched or shrunk copy of their grid: the first factor of a fixed
//! schedule that frees the ring in some direction is adopted, and the
//! scaled grid stands in for the ring in every relation. String-like parts
//! (cables) contribute only their rigid tips.

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    contact_patch, overlap_count, voxelize, Displacement, Point, TriangleMesh, Vector, VoxelGrid,
};
use crate::relations::{free_flags, RelationConfig, RotationPivot};

pub const MIN_SCALE: f64 = 0.25;
pub const MAX_SCALE: f64 = 4.0;

/// Outcome of the scale search for one ring part.
#[derive(Debug, Clone, PartialEq)]
pub struct RingScalingResult {
    pub part: usize,
    pub scale_factor: f64,
    pub axis: Vector,
    pub center: Point,
    pub scaled_grid: VoxelGrid,
    /// Constraint-free flags of the scaled ring against everything else,
    /// in [`Displacement::ALL`] order.
    pub free: [bool; 12],
    /// Factors tried before the adopted one, in order.
    pub rejected: Vec<f64>,
}

/// Direction of least spread of the occupied cell centres, which is the
/// symmetry axis of a flat ring. Oriented so its largest component is
/// positive.
pub fn principal_axis(g: &VoxelGrid) -> Option<Vector> {
    let c = g.centroid()?;
    let mut cov = Matrix3::zeros();
    for cell in g.iter_occupied() {
        let d = g.cell_center(cell) - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let j = eig.eigenvalues.imin();
    let mut v: Vector = eig.eigenvectors.column(j).into_owned();
    let big = v.iamax();
    if v[big] < 0.0 {
        v = -v;
    }
    Some(v.normalize())
}

/// Moves every cell of the ring radially by `(factor - 1) * rho_c`, where
/// `rho_c` is the mid radius between the innermost and outermost cells.
///
/// The ring's centre line is thereby scaled by `factor` while its cross
/// section keeps its size. Rasterisation samples the source cell of every
/// target cell centre, so the result has no cracks even under strong
/// contraction.
pub fn radial_scale(g: &VoxelGrid, axis: Vector, center: Point, factor: f64) -> Result<VoxelGrid> {
    if !(MIN_SCALE..=MAX_SCALE).contains(&factor) {
        return Err(Error::ScaleOutOfRange(factor));
    }
    let axis = axis.normalize();
    let radial = |p: &Point| {
        let d = p - center;
        d - axis * d.dot(&axis)
    };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for c in g.iter_occupied() {
        let rho = radial(&g.cell_center(c)).norm();
        lo = lo.min(rho);
        hi = hi.max(rho);
    }
    let r = g.resolution();
    if g.is_empty() || hi < r {
        return Err(Error::DegenerateRing(format!("{} occupied cells", g.occupied_count())));
    }
    let shift = (factor - 1.0) * 0.5 * (lo + hi);
    if shift == 0.0 {
        return Ok(g.clone());
    }
    let (blo, bhi) = g.occupied_bounds().expect("non-empty");
    let pad = (shift.abs() / r).ceil() as i64 + 1;
    let mut cells = Vec::new();
    for z in blo[2] - pad..=bhi[2] + pad {
        for y in blo[1] - pad..=bhi[1] + pad {
            for x in blo[0] - pad..=bhi[0] + pad {
                let q = g.cell_center([x, y, z]);
                let out = radial(&q);
                let rho = out.norm();
                let src_rho = rho - shift;
                if src_rho < 0.0 || rho == 0.0 {
                    continue;
                }
                let p = q - out + out * (src_rho / rho);
                if g.contains(g.cell_of(&p)) {
                    cells.push([x, y, z]);
                }
            }
        }
    }
    Ok(VoxelGrid::from_cells(r, cells))
}

/// Scale factors in search order: 1.0, 1.05, 0.95, 1.10, 0.90, ... within
/// `[0.5, 2.0]`.
pub fn scale_schedule() -> Vec<f64> {
    let mut out = vec![1.0];
    for k in 1..=20 {
        let up = (100 + 5 * k) as f64 / 100.0;
        out.push(up);
        if k <= 10 {
            out.push((100 - 5 * k) as f64 / 100.0);
        }
    }
    out
}

/// Constraint-free flags of `ring` against `others` with no shortcuts:
/// an overlapping ring is blocked everywhere, and a ring with no contact
/// is still displaced about its own centroid.
pub fn raw_free_flags(
    ring: &VoxelGrid,
    others: &VoxelGrid,
    rng: &mut ChaCha8Rng,
    cfg: &RelationConfig,
) -> Result<[bool; 12]> {
    let mut free = [false; 12];
    if overlap_count(ring, others)? > 0 {
        return Ok(free);
    }
    let patch = contact_patch(ring, others)?;
    let pivot = if patch.is_empty() {
        RotationPivot::free_standing(ring, cfg.max_rotation)
    } else {
        let component = rng.gen_range(0..patch.components.len());
        RotationPivot::from_patch(&patch, component, cfg.max_rotation)
    };
    for (d, f) in free_flags(ring, others, &pivot, cfg.tau, Displacement::ALL.into_iter())? {
        free[d.index()] = f;
    }
    Ok(free)
}

/// Searches the scale schedule for the first factor at which the ring is
/// free in at least one of the twelve displacements against `others`
/// (typically the union of every other part).
pub fn find_feasible_scale(
    part: usize,
    name: &str,
    ring: &VoxelGrid,
    axis: Option<Vector>,
    others: &VoxelGrid,
    cfg: &RelationConfig,
) -> Result<RingScalingResult> {
    let axis = match axis {
        Some(a) if a.norm() > 0.0 => a.normalize(),
        Some(_) => return Err(Error::DegenerateRing(format!("{name}: zero ring axis"))),
        None => principal_axis(ring).ok_or_else(|| Error::DegenerateRing(name.to_string()))?,
    };
    let center = ring.centroid().ok_or_else(|| Error::DegenerateRing(name.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX - part as u64);
    let mut rejected = Vec::new();
    for factor in scale_schedule() {
        let scaled = radial_scale(ring, axis, center, factor)
            .map_err(|e| Error::Pair(name.to_string(), "ring scaling".into(), Box::new(e)))?;
        let free = raw_free_flags(&scaled, others, &mut rng, cfg)?;
        if free.iter().any(|&f| f) {
            log::info!("ring `{name}` adopts scale {factor}");
            return Ok(RingScalingResult {
                part,
                scale_factor: factor,
                axis,
                center,
                scaled_grid: scaled,
                free,
                rejected,
            });
        }
        rejected.push(factor);
    }
    Err(Error::NoFeasibleScale(name.to_string()))
}

/// How the rigid tips of a string-like part are marked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TipAnnotation {
    /// Names of OBJ sub-objects that are rigid.
    Objects(Vec<String>),
    /// Axis-aligned boxes `[min, max]` in assembled coordinates; cells
    /// whose centres fall inside are rigid.
    Boxes(Vec<[[f64; 3]; 2]>),
}

/// Voxel grids of the rigid tips of a string-like part. `objects` are the
/// part's named sub-meshes in assembled pose.
pub fn string_tip_grids(
    name: &str,
    objects: &[TriangleMesh],
    tips: Option<&TipAnnotation>,
    resolution: f64,
) -> Result<Vec<VoxelGrid>> {
    let missing = || Error::MissingTipAnnotation(name.to_string());
    match tips {
        None => Err(missing()),
        Some(TipAnnotation::Objects(names)) if names.is_empty() => Err(missing()),
        Some(TipAnnotation::Boxes(boxes)) if boxes.is_empty() => Err(missing()),
        Some(TipAnnotation::Objects(names)) => names
            .iter()
            .map(|tip| {
                let mesh = objects.iter().find(|m| &m.name == tip).ok_or_else(|| {
                    Error::ManifestInvalid(format!("part `{name}` has no sub-object `{tip}`"))
                })?;
                voxelize(mesh, resolution)
            })
            .collect(),
        Some(TipAnnotation::Boxes(boxes)) => {
            let whole = voxelize(&TriangleMesh::merged(name, objects), resolution)?;
            boxes
                .iter()
                .map(|[lo, hi]| {
                    let inside = whole.iter_occupied().filter(|&c| {
                        let p = whole.cell_center(c);
                        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
                    });
                    let g = VoxelGrid::from_cells(resolution, inside);
                    if g.is_empty() {
                        Err(Error::ManifestInvalid(format!("a tip box of `{name}` contains no cells")))
                    } else {
                        Ok(g)
                    }
                })
                .collect()
        }
    }
}
