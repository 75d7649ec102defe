use std::collections::VecDeque;

use super::{Point, TriangleMesh, Vector, VoxelGrid};
use crate::error::{Error, Result};

/// Rasterises a mesh onto the global lattice at `resolution` mm.
///
/// Closed meshes (every edge shared by an even number of triangles) are
/// filled by ray parity along +z through the cell centres. Anything else
/// falls back to a conservative surface shell plus an exterior flood fill
/// from the grid boundary; the interior is everything the flood cannot
/// reach. The grid covers the mesh bounding box padded by one cell.
pub fn voxelize(mesh: &TriangleMesh, resolution: f64) -> Result<VoxelGrid> {
    mesh.validate()?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::ConfigInvalid(format!("resolution {resolution} must be positive")));
    }
    let welded = mesh.welded();
    if welded.triangles.is_empty() {
        return Err(Error::EmptyMesh(mesh.name.clone()));
    }
    let (lo_pt, hi_pt) = welded.aabb().expect("validated mesh has vertices");
    let mut lo = [0i64; 3];
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let first = (lo_pt[a] / resolution).floor() as i64;
        let last = ((hi_pt[a] / resolution).ceil() as i64 - 1).max(first);
        lo[a] = first - 1;
        dims[a] = (last + 1 - lo[a] + 1) as usize;
    }
    let mut grid = VoxelGrid::empty(resolution, lo, dims);
    if welded.is_closed() {
        parity_fill(&welded, &mut grid);
    } else {
        log::debug!("mesh `{}` is not closed; using shell + flood fill", mesh.name);
        shell_flood_fill(&welded, &mut grid);
    }
    let cells = grid.occupied_count();
    if cells < 8 {
        return Err(Error::ResolutionTooCoarse {
            name: mesh.name.clone(),
            resolution,
            cells,
        });
    }
    Ok(grid)
}

fn parity_fill(mesh: &TriangleMesh, grid: &mut VoxelGrid) {
    let r = grid.resolution();
    let lo = grid.min_index();
    let [nx, ny, nz] = grid.dims();
    // Sample columns slightly off the half-cell lines so rays never graze
    // the lattice-aligned edges typical of CAD boxes.
    let (ex, ey) = (r * 3.7e-7, r * 6.1e-7);
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); nx * ny];
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if det.abs() < 1e-15 * r * r {
            continue;
        }
        let (min_x, max_x) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
        let (min_y, max_y) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
        let i0 = ((min_x / r).floor() as i64 - 1).max(lo[0]);
        let i1 = ((max_x / r).ceil() as i64 + 1).min(lo[0] + nx as i64 - 1);
        let j0 = ((min_y / r).floor() as i64 - 1).max(lo[1]);
        let j1 = ((max_y / r).ceil() as i64 + 1).min(lo[1] + ny as i64 - 1);
        for j in j0..=j1 {
            let py = (j as f64 + 0.5) * r + ey;
            for i in i0..=i1 {
                let px = (i as f64 + 0.5) * r + ex;
                let w0 = (c.x - b.x) * (py - b.y) - (c.y - b.y) * (px - b.x);
                let w1 = (a.x - c.x) * (py - c.y) - (a.y - c.y) * (px - c.x);
                let w2 = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
                let inside = if det > 0.0 {
                    w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0
                } else {
                    w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0
                };
                if inside {
                    let z = (w0 * a.z + w1 * b.z + w2 * c.z) / det;
                    columns[(i - lo[0]) as usize + nx * (j - lo[1]) as usize].push(z);
                }
            }
        }
    }
    for (col, hits) in columns.iter_mut().enumerate() {
        if hits.is_empty() {
            continue;
        }
        if hits.len() % 2 == 1 {
            log::debug!("odd ray parity ({} hits) in column {col}; ignoring last hit", hits.len());
        }
        hits.sort_by(f64::total_cmp);
        let i = lo[0] + (col % nx) as i64;
        let j = lo[1] + (col / nx) as i64;
        for pair in hits.chunks_exact(2) {
            let k0 = ((pair[0] / r - 0.5).ceil() as i64).max(lo[2]);
            let k1 = ((pair[1] / r - 0.5).floor() as i64).min(lo[2] + nz as i64 - 1);
            for k in k0..=k1 {
                let zc = (k as f64 + 0.5) * r;
                if zc > pair[0] && zc < pair[1] {
                    grid.set([i, j, k]);
                }
            }
        }
    }
}

fn shell_flood_fill(mesh: &TriangleMesh, grid: &mut VoxelGrid) {
    let r = grid.resolution();
    let lo = grid.min_index();
    let hi = grid.max_index();
    let mut shell = VoxelGrid::empty(r, lo, grid.dims());
    let half = Vector::repeat(0.5 * r);
    for t in &mesh.triangles {
        let tri = t.map(|i| mesh.vertices[i]);
        let mut bmin = [0i64; 3];
        let mut bmax = [0i64; 3];
        for a in 0..3 {
            let mn = tri.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
            let mx = tri.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
            bmin[a] = ((mn / r).floor() as i64 - 1).max(lo[a]);
            bmax[a] = ((mx / r).floor() as i64 + 1).min(hi[a] - 1);
        }
        for x in bmin[0]..=bmax[0] {
            for y in bmin[1]..=bmax[1] {
                for z in bmin[2]..=bmax[2] {
                    let c = grid.cell_center([x, y, z]);
                    if tri_box_overlap(c, half, &tri) {
                        shell.set([x, y, z]);
                    }
                }
            }
        }
    }
    // Flood the exterior from every boundary cell of the padded grid.
    let mut outside = VoxelGrid::empty(r, lo, grid.dims());
    let mut queue = VecDeque::new();
    for c in boundary_cells(lo, hi) {
        if !shell.contains(c) && !outside.contains(c) {
            outside.set(c);
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        for d in NEIGHBORS_6 {
            let n = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            if (0..3).any(|a| n[a] < lo[a] || n[a] >= hi[a]) {
                continue;
            }
            if !shell.contains(n) && !outside.contains(n) {
                outside.set(n);
                queue.push_back(n);
            }
        }
    }
    for x in lo[0]..hi[0] {
        for y in lo[1]..hi[1] {
            for z in lo[2]..hi[2] {
                if !outside.contains([x, y, z]) {
                    grid.set([x, y, z]);
                }
            }
        }
    }
}

pub(crate) const NEIGHBORS_6: [[i64; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

fn boundary_cells(lo: [i64; 3], hi: [i64; 3]) -> impl Iterator<Item = [i64; 3]> {
    let mut out = Vec::new();
    for x in lo[0]..hi[0] {
        for y in lo[1]..hi[1] {
            for z in lo[2]..hi[2] {
                let on_face = x == lo[0]
                    || x == hi[0] - 1
                    || y == lo[1]
                    || y == hi[1] - 1
                    || z == lo[2]
                    || z == hi[2] - 1;
                if on_face {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out.into_iter()
}

/// Separating-axis triangle/box test (closed box).
fn tri_box_overlap(center: Point, half: Vector, tri: &[Point; 3]) -> bool {
    let v = tri.map(|p| p - center);
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let eps = 1e-12 * half.max();
    // 9 edge cross-product axes
    for edge in &e {
        for a in 0..3 {
            let mut axis = Vector::zeros();
            axis[a] = 1.0;
            let l = axis.cross(edge);
            if l.norm_squared() < 1e-30 {
                continue;
            }
            let p = v.map(|x| x.dot(&l));
            let (mn, mx) = (p[0].min(p[1]).min(p[2]), p[0].max(p[1]).max(p[2]));
            let rad = half.x * l.x.abs() + half.y * l.y.abs() + half.z * l.z.abs();
            if mn > rad + eps || mx < -rad - eps {
                return false;
            }
        }
    }
    // box face normals
    for a in 0..3 {
        let mn = v[0][a].min(v[1][a]).min(v[2][a]);
        let mx = v[0][a].max(v[1][a]).max(v[2][a]);
        if mn > half[a] + eps || mx < -half[a] - eps {
            return false;
        }
    }
    // triangle plane
    let n = e[0].cross(&e[1]);
    let d = n.dot(&v[0]);
    let rad = half.x * n.x.abs() + half.y * n.y.abs() + half.z * n.z.abs();
    d.abs() <= rad + eps
}
