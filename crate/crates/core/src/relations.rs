//! Pairwise part relations extracted from assembled voxel grids.
//!
//! Three part-by-part matrices come out of this module: which translation
//! directions let one part leave without hitting another
//! ([`InterferenceFreeMatrix`]), which parts are inserted into which
//! (insertion matrix), and how tightly two touching parts hold each other
//! (degree of constraint, 12 minus the free infinitesimal displacements).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    contact_patch, overlap_count, rotate, Axis, ContactPatch, Direction, Displacement,
    DisplacementKind, Point, VoxelGrid,
};

/// Deformability tag of a part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deformability {
    #[default]
    Rigid,
    Ring,
    String,
}

/// A part in its assembled pose.
#[derive(Debug, Clone)]
pub struct Part {
    /// 1-based part id.
    pub id: usize,
    pub name: String,
    pub grid: VoxelGrid,
    pub deformable: Deformability,
}

impl Part {
    pub fn rigid(id: usize, name: impl Into<String>, grid: VoxelGrid) -> Self {
        Part {
            id,
            name: name.into(),
            grid,
            deformable: Deformability::Rigid,
        }
    }
}

/// Knobs for the infinitesimal-displacement tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationConfig {
    /// A rotated part interferes only if it overlaps the other part in more
    /// than `tau * occupied` cells.
    pub tau: f64,
    /// Largest trial rotation in radians.
    pub max_rotation: f64,
    /// Seeds the choice among several contact components.
    pub seed: u64,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            tau: 0.002,
            max_rotation: 0.5,
            seed: 0,
        }
    }
}

/// Constraint-free information of part `part_i` displaced against
/// `part_k` (0-based indices). `free[j]` follows [`Displacement::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFreeInfo {
    pub part_i: usize,
    pub part_k: usize,
    pub contact: bool,
    pub free: [bool; 12],
}

impl ConstraintFreeInfo {
    pub fn no_contact(part_i: usize, part_k: usize) -> Self {
        ConstraintFreeInfo {
            part_i,
            part_k,
            contact: false,
            free: [true; 12],
        }
    }

    pub fn is_free(&self, d: Displacement) -> bool {
        self.free[d.index()]
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// Translation entries seen from the other part: moving `k` along `+a`
    /// is moving `i` along `-a`.
    pub fn transposed_translations(&self) -> [bool; 6] {
        let mut t = [false; 6];
        for d in Direction::ALL {
            t[d.index()] = self.free[d.opposite().index()];
        }
        t
    }
}

/// 12 minus the number of free displacements, or 0 without contact.
pub fn degree_of_constraint(info: &ConstraintFreeInfo) -> u8 {
    if !info.contact {
        return 0;
    }
    (12 - info.free_count()) as u8
}

/// `M[d][i][k]`: part `i` can translate along `d` to infinity without
/// hitting part `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceFreeMatrix {
    eta: usize,
    cells: [Vec<bool>; 6],
}

impl InterferenceFreeMatrix {
    /// All entries free.
    pub fn new(eta: usize) -> Self {
        InterferenceFreeMatrix {
            eta,
            cells: std::array::from_fn(|_| vec![true; eta * eta]),
        }
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn get(&self, d: Direction, i: usize, k: usize) -> bool {
        self.cells[d.index()][i * self.eta + k]
    }

    pub fn set(&mut self, d: Direction, i: usize, k: usize, free: bool) {
        self.cells[d.index()][i * self.eta + k] = free;
    }

    /// Matrix for one direction as nested rows.
    pub fn rows(&self, d: Direction) -> Vec<Vec<bool>> {
        self.cells[d.index()].chunks(self.eta).map(<[bool]>::to_vec).collect()
    }

    pub fn from_rows(eta: usize, rows: &[(Direction, Vec<Vec<bool>>)]) -> Result<Self> {
        let mut m = InterferenceFreeMatrix::new(eta);
        for (d, r) in rows {
            if r.len() != eta || r.iter().any(|row| row.len() != eta) {
                return Err(Error::BundleCorrupt(format!("matrix {d} is not {eta}x{eta}")));
            }
            for (i, row) in r.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    m.set(*d, i, k, v);
                }
            }
        }
        Ok(m)
    }
}

/// The three relation matrices of a product.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet {
    pub names: Vec<String>,
    pub interference_free: InterferenceFreeMatrix,
    /// `insertion[i][k]`: part `i` is inserted into part `k`.
    pub insertion: Vec<Vec<bool>>,
    pub degree: Vec<Vec<u8>>,
}

impl RelationSet {
    pub fn eta(&self) -> usize {
        self.names.len()
    }
}

fn pair_rng(seed: u64, i: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 32) | k as u64);
    rng
}

fn translation_free(moving: &VoxelGrid, fixed: &VoxelGrid, d: Direction) -> Result<bool> {
    Ok(overlap_count(&moving.translated(d.step()), fixed)? == 0)
}

/// Pivot and trial angles for the rotational displacements of one contact
/// component. The angle about each axis moves the contact face farthest
/// from the pivot line by about one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RotationPivot {
    pub origin: Point,
    pub angles: [f64; 3],
}

impl RotationPivot {
    pub(crate) fn from_patch(patch: &ContactPatch, component: usize, max_rotation: f64) -> Self {
        let origin = patch.component_centroid(component);
        let r = patch.resolution;
        let angles = Axis::ALL.map(|axis| {
            let a = axis.index();
            let reach = patch.components[component]
                .iter()
                .map(|&f| {
                    let mut v = patch.faces[f].center - origin;
                    v[a] = 0.0;
                    v.norm()
                })
                .fold(0.0, f64::max);
            (r / reach.max(r)).min(max_rotation)
        });
        RotationPivot { origin, angles }
    }

    /// Pivot for a part with no contact: its own centroid, one-cell angles.
    pub(crate) fn free_standing(g: &VoxelGrid, max_rotation: f64) -> Self {
        let origin = g.centroid().unwrap_or(Point::origin());
        let r = g.resolution();
        let angles = Axis::ALL.map(|axis| {
            let a = axis.index();
            let reach = g
                .iter_occupied()
                .map(|c| {
                    let mut v = g.cell_center(c) - origin;
                    v[a] = 0.0;
                    v.norm()
                })
                .fold(0.0, f64::max);
            (r / reach.max(r)).min(max_rotation)
        });
        RotationPivot { origin, angles }
    }
}

/// Rotating `moving` by `+θ` relative to `fixed` is the same relative
/// motion as rotating `fixed` by `-θ` about the same pivot, so the part
/// with fewer cells is the one turned and the tolerance scales with it.
fn rotation_free(
    moving: &VoxelGrid,
    fixed: &VoxelGrid,
    d: Displacement,
    pivot: &RotationPivot,
    tau: f64,
) -> Result<bool> {
    let mut angle = pivot.angles[d.axis.index()] * d.sign.value() as f64;
    let (turned, other) = if fixed.occupied_count() < moving.occupied_count() {
        angle = -angle;
        (fixed, moving)
    } else {
        (moving, fixed)
    };
    let rotated = rotate(turned, d.axis.unit(), pivot.origin, angle);
    let allowed = tau * turned.occupied_count() as f64;
    Ok(overlap_count(&rotated, other)? as f64 <= allowed)
}

/// Evaluates the requested displacements of `moving` against `fixed`.
pub(crate) fn free_flags(
    moving: &VoxelGrid,
    fixed: &VoxelGrid,
    pivot: &RotationPivot,
    tau: f64,
    which: impl Iterator<Item = Displacement>,
) -> Result<Vec<(Displacement, bool)>> {
    which
        .map(|d| {
            let free = match d.kind {
                DisplacementKind::Translation => {
                    translation_free(moving, fixed, d.direction().expect("translation"))?
                }
                DisplacementKind::Rotation => rotation_free(moving, fixed, d, pivot, tau)?,
            };
            Ok((d, free))
        })
        .collect()
}

fn choose_pivot(patch: &ContactPatch, cfg: &RelationConfig, i: usize, k: usize) -> RotationPivot {
    let mut rng = pair_rng(cfg.seed, i, k);
    let component = rng.gen_range(0..patch.components.len());
    RotationPivot::from_patch(patch, component, cfg.max_rotation)
}

fn pair_error(parts: &[Part], i: usize, k: usize, e: Error) -> Error {
    Error::Pair(parts[i].name.clone(), parts[k].name.clone(), Box::new(e))
}

/// Constraint-free information of `parts[i]` against `parts[k]`, with all
/// twelve displacements evaluated directly.
pub fn constraint_free_info(
    parts: &[Part],
    i: usize,
    k: usize,
    cfg: &RelationConfig,
) -> Result<ConstraintFreeInfo> {
    let run = || -> Result<ConstraintFreeInfo> {
        let (gi, gk) = (&parts[i].grid, &parts[k].grid);
        let patch = contact_patch(gi, gk)?;
        if patch.is_empty() {
            return Ok(ConstraintFreeInfo::no_contact(i, k));
        }
        let pivot = choose_pivot(&patch, cfg, i.min(k), i.max(k));
        let mut free = [false; 12];
        for (d, f) in free_flags(gi, gk, &pivot, cfg.tau, Displacement::ALL.into_iter())? {
            free[d.index()] = f;
        }
        Ok(ConstraintFreeInfo {
            part_i: i,
            part_k: k,
            contact: true,
            free,
        })
    };
    run().map_err(|e| pair_error(parts, i, k, e))
}

/// Same result as [`constraint_free_info`] for `i < k`, but only positive
/// translations are evaluated; negative ones come from moving `k` the
/// positive way against `i`.
fn constraint_free_info_shortcut(
    parts: &[Part],
    i: usize,
    k: usize,
    cfg: &RelationConfig,
) -> Result<ConstraintFreeInfo> {
    let run = || -> Result<ConstraintFreeInfo> {
        let (gi, gk) = (&parts[i].grid, &parts[k].grid);
        let patch = contact_patch(gi, gk)?;
        if patch.is_empty() {
            return Ok(ConstraintFreeInfo::no_contact(i, k));
        }
        let pivot = choose_pivot(&patch, cfg, i, k);
        let mut free = [false; 12];
        for axis in Axis::ALL {
            let pos = Direction::new(axis, crate::geometry::Sign::Pos);
            free[pos.index()] = translation_free(gi, gk, pos)?;
            free[pos.opposite().index()] = translation_free(gk, gi, pos)?;
        }
        let rotations = Displacement::ALL.into_iter().filter(|d| d.kind == DisplacementKind::Rotation);
        for (d, f) in free_flags(gi, gk, &pivot, cfg.tau, rotations)? {
            free[d.index()] = f;
        }
        Ok(ConstraintFreeInfo {
            part_i: i,
            part_k: k,
            contact: true,
            free,
        })
    };
    run().map_err(|e| pair_error(parts, i, k, e))
}

fn upper_pairs(eta: usize) -> Vec<(usize, usize)> {
    (0..eta).flat_map(|i| (i + 1..eta).map(move |k| (i, k))).collect()
}

/// Constraint-free information for every pair `i < k`, in row-major pair
/// order.
pub fn constraint_free_table(parts: &[Part], cfg: &RelationConfig) -> Result<Vec<ConstraintFreeInfo>> {
    upper_pairs(parts.len())
        .into_par_iter()
        .map(|(i, k)| constraint_free_info_shortcut(parts, i, k, cfg))
        .collect()
}

/// Symmetric degree-of-constraint matrix from the upper-triangle table.
pub fn degree_from_table(eta: usize, table: &[ConstraintFreeInfo]) -> Vec<Vec<u8>> {
    let mut c = vec![vec![0u8; eta]; eta];
    for info in table {
        let v = degree_of_constraint(info);
        c[info.part_i][info.part_k] = v;
        c[info.part_k][info.part_i] = v;
    }
    c
}

/// Degree-of-constraint matrix of the product.
pub fn degree_matrix(parts: &[Part], cfg: &RelationConfig) -> Result<Vec<Vec<u8>>> {
    Ok(degree_from_table(parts.len(), &constraint_free_table(parts, cfg)?))
}

/// Occupied extent of every lattice column along one axis.
fn column_extents(g: &VoxelGrid, axis: Axis) -> HashMap<(i64, i64), (i64, i64)> {
    let a = axis.index();
    let (u, v) = axis.others();
    let mut cols: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    for c in g.iter_occupied() {
        let e = cols.entry((c[u.index()], c[v.index()])).or_insert((c[a], c[a]));
        e.0 = e.0.min(c[a]);
        e.1 = e.1.max(c[a]);
    }
    cols
}

/// Interference-free matrices for all six translation directions.
///
/// Part `i` sweeping along `+a` meets part `k` exactly when some lattice
/// column holds a cell of `k` beyond the lowest cell of `i`; the mirrored
/// test handles `-a`. This equals stepping the part one cell at a time.
pub fn interference_free_matrix(parts: &[Part]) -> InterferenceFreeMatrix {
    let eta = parts.len();
    let mut m = InterferenceFreeMatrix::new(eta);
    for axis in Axis::ALL {
        let cols: Vec<_> = parts.par_iter().map(|p| column_extents(&p.grid, axis)).collect();
        let pos = Direction::new(axis, crate::geometry::Sign::Pos);
        let neg = pos.opposite();
        let blocked: Vec<(usize, usize, bool, bool)> = (0..eta)
            .into_par_iter()
            .flat_map_iter(|i| (0..eta).filter(move |&k| k != i).map(move |k| (i, k)))
            .map(|(i, k)| {
                let (mut up, mut down) = (false, false);
                for (key, &(lo_i, hi_i)) in &cols[i] {
                    if let Some(&(lo_k, hi_k)) = cols[k].get(key) {
                        up |= hi_k > lo_i;
                        down |= lo_k < hi_i;
                    }
                }
                (i, k, up, down)
            })
            .collect();
        for (i, k, up, down) in blocked {
            m.set(pos, i, k, !up);
            m.set(neg, i, k, !down);
        }
    }
    m
}

/// Auto-detected insertion matrix.
///
/// Part `i` counts as inserted into `k` when they touch, `i`'s translations
/// relative to `k` are free along one axis only (in one or both senses)
/// with the four lateral ones blocked, the pair's degree is at least 8, and
/// `i` has fewer cells than `k`. Rows and columns of ring parts are zero.
pub fn detect_insertions(parts: &[Part], table: &[ConstraintFreeInfo]) -> Vec<Vec<bool>> {
    let eta = parts.len();
    let mut ins = vec![vec![false; eta]; eta];
    for info in table {
        if !info.contact || degree_of_constraint(info) < 8 {
            continue;
        }
        let forward: [bool; 6] = std::array::from_fn(|j| info.free[j]);
        let backward = info.transposed_translations();
        for (i, k, t) in [(info.part_i, info.part_k, forward), (info.part_k, info.part_i, backward)] {
            if peg_signature(&t) && parts[i].grid.occupied_count() < parts[k].grid.occupied_count() {
                ins[i][k] = true;
            }
        }
    }
    for (r, p) in parts.iter().enumerate() {
        if p.deformable == Deformability::Ring {
            for x in 0..eta {
                ins[r][x] = false;
                ins[x][r] = false;
            }
        }
    }
    ins
}

fn peg_signature(translations: &[bool; 6]) -> bool {
    let free_axes: Vec<Axis> = Axis::ALL
        .into_iter()
        .filter(|a| {
            let p = Direction::new(*a, crate::geometry::Sign::Pos);
            translations[p.index()] || translations[p.opposite().index()]
        })
        .collect();
    free_axes.len() == 1
}

/// Runs the whole extraction on parts in their assembled poses.
pub fn extract_relations(parts: &[Part], cfg: &RelationConfig) -> Result<(RelationSet, Vec<ConstraintFreeInfo>)> {
    let table = constraint_free_table(parts, cfg)?;
    let set = RelationSet {
        names: parts.iter().map(|p| p.name.clone()).collect(),
        interference_free: interference_free_matrix(parts),
        insertion: detect_insertions(parts, &table),
        degree: degree_from_table(parts.len(), &table),
    };
    Ok((set, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sweep_is_clear;
    use crate::testutil::block;

    fn parts(grids: Vec<VoxelGrid>) -> Vec<Part> {
        grids
            .into_iter()
            .enumerate()
            .map(|(i, g)| Part::rigid(i + 1, format!("P{}", i + 1), g))
            .collect()
    }

    fn stack() -> Vec<Part> {
        parts(vec![block([0, 0, 0], [20, 20, 2]), block([5, 5, 2], [15, 15, 12])])
    }

    fn peg_in_through_hole() -> Vec<Part> {
        let board: Vec<_> = block([0, 0, 0], [20, 20, 10])
            .iter_occupied()
            .filter(|c| !(8..12).contains(&c[0]) || !(8..12).contains(&c[1]))
            .collect();
        parts(vec![VoxelGrid::from_cells(1.0, board), block([8, 8, 3], [12, 12, 7])])
    }

    fn names(info: &ConstraintFreeInfo) -> Vec<String> {
        Displacement::ALL
            .into_iter()
            .filter(|d| info.is_free(*d))
            .map(|d| d.label())
            .collect()
    }

    #[test]
    fn separated_parts_are_free_everywhere() {
        let p = parts(vec![block([0; 3], [10; 3]), block([15, 0, 0], [25, 10, 10])]);
        let info = constraint_free_info(&p, 0, 1, &RelationConfig::default()).unwrap();
        assert_eq!(info.free, [true; 12]);
        assert_eq!(degree_of_constraint(&info), 0);
    }

    #[test]
    fn cube_on_plate_has_seven_free_displacements() {
        let p = stack();
        let info = constraint_free_info(&p, 1, 0, &RelationConfig::default()).unwrap();
        assert_eq!(names(&info), ["+x", "-x", "+y", "-y", "+z", "+θz", "-θz"]);
        assert_eq!(degree_of_constraint(&info), 5);
        assert_eq!(degree_matrix(&p, &RelationConfig::default()).unwrap(), vec![vec![0, 5], vec![5, 0]]);
    }

    #[test]
    fn snug_square_peg_slides_along_the_hole_only() {
        let p = peg_in_through_hole();
        let info = constraint_free_info(&p, 1, 0, &RelationConfig::default()).unwrap();
        assert_eq!(names(&info), ["+z", "-z"]);
        let (set, _) = extract_relations(&p, &RelationConfig::default()).unwrap();
        assert!(set.insertion[1][0]);
        assert!(!set.insertion[0][1]);
    }

    #[test]
    fn point_contact_gives_zero_degree() {
        let info = ConstraintFreeInfo {
            part_i: 0,
            part_k: 1,
            contact: true,
            free: [true; 12],
        };
        assert_eq!(degree_of_constraint(&info), 0);
        let mut locked = info;
        locked.free = [false; 12];
        assert_eq!(degree_of_constraint(&locked), 12);
    }

    #[test]
    fn stack_interference_and_insertion() {
        let p = stack();
        let m = interference_free_matrix(&p);
        assert!(m.get(Direction::POS_Z, 1, 0));
        assert!(!m.get(Direction::NEG_Z, 1, 0));
        assert!(m.get(Direction::POS_X, 1, 0));
        let (set, _) = extract_relations(&p, &RelationConfig::default()).unwrap();
        assert_eq!(set.insertion, vec![vec![false; 2]; 2]);
    }

    #[test]
    fn blind_hole_peg_leaves_one_way() {
        let cup: Vec<_> = block([0, 0, 0], [10, 10, 8])
            .iter_occupied()
            .filter(|c| !((3..7).contains(&c[0]) && (3..7).contains(&c[1]) && c[2] >= 3))
            .collect();
        let p = parts(vec![VoxelGrid::from_cells(1.0, cup), block([3, 3, 3], [7, 7, 12])]);
        let m = interference_free_matrix(&p);
        let free: Vec<_> = Direction::ALL.into_iter().filter(|d| m.get(*d, 1, 0)).collect();
        assert_eq!(free, [Direction::POS_Z]);
        let (set, _) = extract_relations(&p, &RelationConfig::default()).unwrap();
        assert!(set.insertion[1][0]);
    }

    #[test]
    fn column_method_matches_stepping_sweep() {
        let p = peg_in_through_hole();
        let mut all = p.clone();
        all.extend(stack().into_iter().map(|mut q| {
            q.grid = q.grid.translated([0, 0, 10]);
            q
        }));
        let m = interference_free_matrix(&all);
        for i in 0..all.len() {
            for k in 0..all.len() {
                if i == k {
                    continue;
                }
                for d in Direction::ALL {
                    assert_eq!(m.get(d, i, k), sweep_is_clear(&all[i].grid, &all[k].grid, d), "{i} {k} {d}");
                }
            }
        }
    }

    #[test]
    fn interpenetration_names_the_pair() {
        let p = parts(vec![block([0; 3], [4; 3]), block([2; 3], [6; 3])]);
        let err = degree_matrix(&p, &RelationConfig::default()).unwrap_err();
        assert!(matches!(&err, Error::Pair(a, b, e) if a == "P1" && b == "P2"
            && matches!(**e, Error::InterpenetratingParts(8))));
    }

    #[test]
    fn ring_rows_are_zeroed() {
        let mut p = peg_in_through_hole();
        p[1].deformable = Deformability::Ring;
        let (set, _) = extract_relations(&p, &RelationConfig::default()).unwrap();
        assert_eq!(set.insertion, vec![vec![false; 2]; 2]);
    }

    #[test]
    fn shortcut_table_equals_direct_evaluation() {
        let mut all = peg_in_through_hole();
        all.extend(stack().into_iter().map(|mut q| {
            q.grid = q.grid.translated([0, 0, 10]);
            q
        }));
        let cfg = RelationConfig { seed: 7, ..Default::default() };
        let table = constraint_free_table(&all, &cfg).unwrap();
        assert_eq!(table.len(), 6);
        for info in &table {
            let (i, k) = (info.part_i, info.part_k);
            assert_eq!(*info, constraint_free_info(&all, i, k, &cfg).unwrap());
            let back = constraint_free_info(&all, k, i, &cfg).unwrap();
            for d in Direction::ALL {
                let t = Displacement::translation(d);
                assert_eq!(info.is_free(t), back.is_free(Displacement::translation(d.opposite())));
            }
        }
    }
}
