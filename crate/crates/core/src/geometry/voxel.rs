use std::io::{Read, Write};

use fixedbitset::FixedBitSet;
use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::{Displacement, DisplacementKind, Point, Vector};
use crate::error::{Error, Result};

/// Dense occupancy over an axis-aligned block of the global lattice.
///
/// Cell `(i, j, k)` covers `[i·r, (i+1)·r) × [j·r, (j+1)·r) × [k·r, (k+1)·r)`
/// in world millimetres, so two grids with the same resolution always agree
/// on what a cell is and set operations between them are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    resolution: f64,
    min: [i64; 3],
    dims: [usize; 3],
    cells: FixedBitSet,
}

#[derive(Serialize, Deserialize)]
struct DebugHeader {
    format: String,
    version: u32,
    resolution: f64,
    min: [i64; 3],
    dims: [usize; 3],
    occupied: usize,
}

const DEBUG_FORMAT: &str = "asg-voxels";

impl VoxelGrid {
    pub fn empty(resolution: f64, min: [i64; 3], dims: [usize; 3]) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        VoxelGrid {
            resolution,
            min,
            dims,
            cells: FixedBitSet::with_capacity(dims[0] * dims[1] * dims[2]),
        }
    }

    /// Builds the tightest grid holding the given lattice cells.
    pub fn from_cells(resolution: f64, cells: impl IntoIterator<Item = [i64; 3]>) -> Self {
        let cells: Vec<[i64; 3]> = cells.into_iter().collect();
        let Some(first) = cells.first() else {
            return VoxelGrid::empty(resolution, [0; 3], [0; 3]);
        };
        let mut lo = *first;
        let mut hi = *first;
        for c in &cells {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let dims = [0, 1, 2].map(|a| (hi[a] - lo[a] + 1) as usize);
        let mut grid = VoxelGrid::empty(resolution, lo, dims);
        for c in cells {
            grid.set(c);
        }
        grid
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// World position of the grid's minimum corner.
    pub fn origin(&self) -> Point {
        Point::new(
            self.min[0] as f64 * self.resolution,
            self.min[1] as f64 * self.resolution,
            self.min[2] as f64 * self.resolution,
        )
    }

    pub fn min_index(&self) -> [i64; 3] {
        self.min
    }

    /// One past the last lattice index along each axis.
    pub fn max_index(&self) -> [i64; 3] {
        [0, 1, 2].map(|a| self.min[a] + self.dims[a] as i64)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.occupied_count() == 0
    }

    fn offset(&self, idx: [i64; 3]) -> Option<usize> {
        let mut local = [0usize; 3];
        for a in 0..3 {
            let l = idx[a] - self.min[a];
            if l < 0 || l >= self.dims[a] as i64 {
                return None;
            }
            local[a] = l as usize;
        }
        Some(local[0] + self.dims[0] * (local[1] + self.dims[1] * local[2]))
    }

    fn index_at(&self, offset: usize) -> [i64; 3] {
        let x = offset % self.dims[0];
        let y = (offset / self.dims[0]) % self.dims[1];
        let z = offset / (self.dims[0] * self.dims[1]);
        [
            self.min[0] + x as i64,
            self.min[1] + y as i64,
            self.min[2] + z as i64,
        ]
    }

    pub fn contains(&self, idx: [i64; 3]) -> bool {
        self.offset(idx).is_some_and(|o| self.cells.contains(o))
    }

    /// Marks a cell; panics if it lies outside the grid block.
    pub fn set(&mut self, idx: [i64; 3]) {
        let o = self
            .offset(idx)
            .unwrap_or_else(|| panic!("cell {idx:?} outside grid {:?}+{:?}", self.min, self.dims));
        self.cells.insert(o);
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.count_ones(..)
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        self.cells.ones().map(|o| self.index_at(o))
    }

    pub fn cell_center(&self, idx: [i64; 3]) -> Point {
        let r = self.resolution;
        Point::new(
            (idx[0] as f64 + 0.5) * r,
            (idx[1] as f64 + 0.5) * r,
            (idx[2] as f64 + 0.5) * r,
        )
    }

    pub fn cell_of(&self, p: &Point) -> [i64; 3] {
        [0, 1, 2].map(|a| (p[a] / self.resolution).floor() as i64)
    }

    /// Tight bounds `[lo, hi]` (inclusive) of the occupied cells.
    pub fn occupied_bounds(&self) -> Option<([i64; 3], [i64; 3])> {
        let mut it = self.iter_occupied();
        let first = it.next()?;
        Some(it.fold((first, first), |(mut lo, mut hi), c| {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
            (lo, hi)
        }))
    }

    pub fn centroid(&self) -> Option<Point> {
        let n = self.occupied_count();
        if n == 0 {
            return None;
        }
        let sum = self
            .iter_occupied()
            .fold(Vector::zeros(), |acc, c| acc + self.cell_center(c).coords);
        Some(Point::from(sum / n as f64))
    }

    /// Shifts the grid by whole cells.
    pub fn translated(&self, delta: [i64; 3]) -> VoxelGrid {
        let mut g = self.clone();
        for a in 0..3 {
            g.min[a] += delta[a];
        }
        g
    }

    pub fn union(resolution: f64, grids: &[&VoxelGrid]) -> VoxelGrid {
        VoxelGrid::from_cells(resolution, grids.iter().flat_map(|g| g.iter_occupied()))
    }

    /// Maps every occupied cell through an integer lattice map.
    pub fn map_cells(&self, f: impl Fn([i64; 3]) -> [i64; 3]) -> VoxelGrid {
        VoxelGrid::from_cells(self.resolution, self.iter_occupied().map(f))
    }

    /// Debug serialisation: one JSON header line followed by the raw
    /// occupancy bits (x fastest, little-endian bit order within bytes).
    pub fn write_debug<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = DebugHeader {
            format: DEBUG_FORMAT.into(),
            version: 1,
            resolution: self.resolution,
            min: self.min,
            dims: self.dims,
            occupied: self.occupied_count(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for o in self.cells.ones() {
            bytes[o / 8] |= 1 << (o % 8);
        }
        w.write_all(&bytes)
    }

    pub fn read_debug<R: Read>(mut r: R) -> Result<VoxelGrid> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)
            .map_err(|e| Error::io("reading voxel debug file", e))?;
        let nl = buf
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::BundleCorrupt("voxel debug file has no header".into()))?;
        let header: DebugHeader =
            serde_json::from_slice(&buf[..nl]).map_err(|e| Error::json("voxel header", e))?;
        if header.format != DEBUG_FORMAT {
            return Err(Error::BundleCorrupt(format!("unexpected format `{}`", header.format)));
        }
        if header.version != 1 {
            return Err(Error::SchemaVersion {
                kind: "voxel debug",
                found: header.version,
                expected: 1,
            });
        }
        let mut grid = VoxelGrid::empty(header.resolution, header.min, header.dims);
        let bits = &buf[nl + 1..];
        if bits.len() != grid.len().div_ceil(8) {
            return Err(Error::BundleCorrupt("voxel bitset has wrong length".into()));
        }
        for o in 0..grid.len() {
            if bits[o / 8] & (1 << (o % 8)) != 0 {
                grid.cells.insert(o);
            }
        }
        if grid.occupied_count() != header.occupied {
            return Err(Error::BundleCorrupt("voxel occupied count mismatch".into()));
        }
        Ok(grid)
    }
}

pub(crate) fn same_resolution(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Number of world cells occupied by both grids.
pub fn overlap_count(a: &VoxelGrid, b: &VoxelGrid) -> Result<usize> {
    if !same_resolution(a.resolution, b.resolution) {
        return Err(Error::ResolutionMismatch(a.resolution, b.resolution));
    }
    let lo = [0, 1, 2].map(|i| a.min[i].max(b.min[i]));
    let hi = [0, 1, 2].map(|i| a.max_index()[i].min(b.max_index()[i]));
    if (0..3).any(|i| lo[i] >= hi[i]) {
        return Ok(0);
    }
    let mut count = 0;
    for z in lo[2]..hi[2] {
        for y in lo[1]..hi[1] {
            let (Some(oa), Some(ob)) = (a.offset([lo[0], y, z]), b.offset([lo[0], y, z])) else {
                continue;
            };
            for dx in 0..(hi[0] - lo[0]) as usize {
                if a.cells.contains(oa + dx) && b.cells.contains(ob + dx) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Rotates every occupied cell centre about the line through `origin`
/// along `axis` and re-rasterises: a target cell is occupied if any source
/// centre lands in it.
pub fn rotate(g: &VoxelGrid, axis: Vector, origin: Point, angle: f64) -> VoxelGrid {
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
    g.map_cells(|c| {
        let p = g.cell_center(c);
        let q = origin + rot * (p - origin);
        g.cell_of(&q)
    })
}

/// Default rotation magnitude: the angle that moves the occupied cell
/// farthest from `origin` by one cell. `None` when every cell sits on the
/// origin.
pub fn default_rotation_angle(g: &VoxelGrid, origin: Point) -> Option<f64> {
    let r_max = g
        .iter_occupied()
        .map(|c| (g.cell_center(c) - origin).norm())
        .fold(0.0, f64::max);
    (r_max > 1e-12).then(|| g.resolution / r_max)
}

/// Applies one of the twelve displacements.
///
/// `magnitude` is in millimetres for translations (rounded to whole cells)
/// and radians for rotations; `None` selects the defaults of one cell and
/// [`default_rotation_angle`] respectively.
pub fn displace(
    g: &VoxelGrid,
    d: Displacement,
    origin: Point,
    magnitude: Option<f64>,
) -> VoxelGrid {
    match d.kind {
        DisplacementKind::Translation => {
            let cells = magnitude.map_or(1, |m| (m / g.resolution).round() as i64);
            let mut delta = [0; 3];
            delta[d.axis.index()] = cells * d.sign.value();
            g.translated(delta)
        }
        DisplacementKind::Rotation => {
            let angle = match magnitude.or_else(|| default_rotation_angle(g, origin)) {
                Some(a) => a,
                None => {
                    log::warn!("rotation requested about a point coinciding with every cell; grid unchanged");
                    return g.clone();
                }
            };
            rotate(g, d.axis.unit(), origin, angle * d.sign.value() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Axis, Direction, Sign};

    fn block(lo: [i64; 3], hi: [i64; 3]) -> VoxelGrid {
        let mut cells = Vec::new();
        for x in lo[0]..hi[0] {
            for y in lo[1]..hi[1] {
                for z in lo[2]..hi[2] {
                    cells.push([x, y, z]);
                }
            }
        }
        VoxelGrid::from_cells(1.0, cells)
    }

    #[test]
    fn overlap_of_disjoint_identical_and_shifted_cubes() {
        let a = block([0; 3], [10; 3]);
        let far = block([30, 0, 0], [40, 10, 10]);
        assert_eq!(overlap_count(&a, &far).unwrap(), 0);
        assert_eq!(overlap_count(&a, &a).unwrap(), 1000);
        let shifted = a.translated([5, 0, 0]);
        assert_eq!(overlap_count(&a, &shifted).unwrap(), 500);
        assert_eq!(overlap_count(&shifted, &a).unwrap(), 500);
    }

    #[test]
    fn overlap_rejects_mixed_resolutions() {
        let a = block([0; 3], [2; 3]);
        let b = VoxelGrid::from_cells(0.5, [[0, 0, 0]]);
        assert!(matches!(overlap_count(&a, &b), Err(Error::ResolutionMismatch(..))));
    }

    #[test]
    fn translation_moves_origin_by_one_cell() {
        let a = block([0; 3], [3; 3]);
        let up = displace(&a, Displacement::translation(Direction::POS_Z), Point::origin(), None);
        assert_eq!(up.occupied_count(), a.occupied_count());
        assert_eq!(up.origin().z, a.origin().z + 1.0);
    }

    #[test]
    fn rotating_a_cell_about_its_own_center_is_identity() {
        let g = VoxelGrid::from_cells(1.0, [[2, 3, 4]]);
        let c = g.cell_center([2, 3, 4]);
        for d in Displacement::ALL {
            if d.kind == DisplacementKind::Rotation {
                assert_eq!(displace(&g, d, c, None), g);
                assert_eq!(displace(&g, d, c, Some(0.3)).iter_occupied().collect::<Vec<_>>(), vec![[2, 3, 4]]);
            }
        }
    }

    #[test]
    fn bar_rotation_matches_per_cell_oracle() {
        // 10 mm bar along x, rotated 0.1 rad about z through its end.
        let bar = block([0, 0, 0], [10, 1, 1]);
        let origin = Point::new(0.0, 0.5, 0.5);
        let rotated = displace(&bar, Displacement::rotation(Axis::Z, Sign::Pos), origin, Some(0.1));
        // oracle: explicit trig on each centre, no rotation matrices
        let mut expected = std::collections::BTreeSet::new();
        for x in 0..10 {
            let (px, py) = (x as f64 + 0.5, 0.0);
            let (c, s) = (0.1f64.cos(), 0.1f64.sin());
            let qx = px * c - py * s;
            let qy = px * s + py * c + 0.5;
            expected.insert([qx.floor() as i64, qy.floor() as i64, 0]);
        }
        let got: std::collections::BTreeSet<_> = rotated.iter_occupied().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn debug_format_round_trips() {
        let g = block([-2, 0, 3], [1, 2, 5]);
        let mut buf = Vec::new();
        g.write_debug(&mut buf).unwrap();
        let back = VoxelGrid::read_debug(&buf[..]).unwrap();
        assert_eq!(back, g);
        let mut bad = buf.clone();
        bad.pop();
        assert!(VoxelGrid::read_debug(&bad[..]).is_err());
    }
}
