use std::collections::HashMap;

use super::voxelize::NEIGHBORS_6;
use super::{overlap_count, Direction, Point, VoxelGrid};
use crate::error::{Error, Result};

/// A shared face between an occupied cell of the first grid and a
/// face-adjacent occupied cell of the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactFace {
    /// Cell of the first grid.
    pub cell: [i64; 3],
    /// Outward normal of the first grid's cell, pointing into the second.
    pub normal: Direction,
    pub center: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactPatch {
    pub faces: Vec<ContactFace>,
    /// Mean of the face centres; `None` for an empty patch.
    pub centroid: Option<Point>,
    /// Shared area in mm².
    pub area: f64,
    /// Face indices of each planar, edge-connected component, ordered by
    /// first face.
    pub components: Vec<Vec<usize>>,
    pub resolution: f64,
}

impl ContactPatch {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn component_centroid(&self, component: usize) -> Point {
        centroid_of(self.components[component].iter().map(|&i| &self.faces[i]), self.resolution)
            .expect("components are non-empty")
    }
}

// Face centres are exact on the half-cell lattice; summing doubled integer
// coordinates keeps centroids independent of face order.
fn centroid_of<'a>(faces: impl Iterator<Item = &'a ContactFace>, resolution: f64) -> Option<Point> {
    let mut sum = [0i64; 3];
    let mut n = 0i64;
    for f in faces {
        let step = f.normal.step();
        for a in 0..3 {
            sum[a] += 2 * f.cell[a] + 1 + step[a];
        }
        n += 1;
    }
    (n > 0).then(|| {
        let scale = resolution / (2 * n) as f64;
        Point::new(sum[0] as f64 * scale, sum[1] as f64 * scale, sum[2] as f64 * scale)
    })
}

/// All cell faces where `a` touches `b`. Fails when the grids overlap.
pub fn contact_patch(a: &VoxelGrid, b: &VoxelGrid) -> Result<ContactPatch> {
    let shared = overlap_count(a, b)?;
    if shared > 0 {
        return Err(Error::InterpenetratingParts(shared));
    }
    let r = a.resolution();
    let (b_lo, b_hi) = (b.min_index(), b.max_index());
    let mut faces = Vec::new();
    for c in a.iter_occupied() {
        if (0..3).any(|i| c[i] < b_lo[i] - 1 || c[i] > b_hi[i]) {
            continue;
        }
        for (k, d) in NEIGHBORS_6.iter().enumerate() {
            let n = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            if b.contains(n) {
                let normal = Direction::from_index(k);
                let center = Point::new(
                    (c[0] as f64 + 0.5 + 0.5 * d[0] as f64) * r,
                    (c[1] as f64 + 0.5 + 0.5 * d[1] as f64) * r,
                    (c[2] as f64 + 0.5 + 0.5 * d[2] as f64) * r,
                );
                faces.push(ContactFace { cell: c, normal, center });
            }
        }
    }
    let components = label_components(&faces);
    let centroid = centroid_of(faces.iter(), r);
    Ok(ContactPatch {
        area: faces.len() as f64 * r * r,
        centroid,
        components,
        faces,
        resolution: r,
    })
}

fn label_components(faces: &[ContactFace]) -> Vec<Vec<usize>> {
    let index: HashMap<(usize, [i64; 3]), usize> = faces
        .iter()
        .enumerate()
        .map(|(i, f)| ((f.normal.index(), f.cell), i))
        .collect();
    let mut label = vec![usize::MAX; faces.len()];
    let mut components = Vec::new();
    for start in 0..faces.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < members.len() {
            let f = faces[members[head]];
            head += 1;
            let (u, v) = f.normal.axis.others();
            for axis in [u, v] {
                for s in [-1, 1] {
                    let mut n = f.cell;
                    n[axis.index()] += s;
                    if let Some(&j) = index.get(&(f.normal.index(), n)) {
                        if label[j] == usize::MAX {
                            label[j] = id;
                            members.push(j);
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn block(lo: [i64; 3], hi: [i64; 3]) -> VoxelGrid {
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
    fn cube_on_plate_has_one_flat_patch() {
        let plate = block([0, 0, 0], [20, 20, 2]);
        let cube = block([5, 5, 2], [15, 15, 12]);
        let p = contact_patch(&cube, &plate).unwrap();
        assert_eq!(p.faces.len(), 100);
        assert_eq!(p.components.len(), 1);
        assert_eq!(p.centroid, Some(Point::new(10.0, 10.0, 2.0)));
        assert_eq!(p.area, 100.0);
        assert!(p.faces.iter().all(|f| f.normal == Direction::NEG_Z));
    }

    #[test]
    fn separated_parts_have_empty_patch() {
        let a = block([0; 3], [4; 3]);
        let b = block([7, 0, 0], [10, 4, 4]);
        let p = contact_patch(&a, &b).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.centroid, None);
    }

    #[test]
    fn overlapping_parts_are_rejected() {
        let a = block([0; 3], [4; 3]);
        assert!(matches!(contact_patch(&a, &a), Err(Error::InterpenetratingParts(64))));
    }

    #[test]
    fn l_bracket_contact_splits_into_two_components() {
        // bracket: floor z in [0,2), wall x in [0,2)
        let mut cells: Vec<[i64; 3]> = block([0, 0, 0], [10, 6, 2]).iter_occupied().collect();
        cells.extend(block([0, 0, 2], [2, 6, 10]).iter_occupied());
        let bracket = VoxelGrid::from_cells(1.0, cells);
        let cube = block([2, 1, 2], [6, 5, 6]);
        let p = contact_patch(&bracket, &cube).unwrap();
        assert_eq!(p.components.len(), 2);
        // brute-force adjacency oracle: count neighbouring pairs directly
        let mut floor = 0;
        let mut wall = 0;
        for c in bracket.iter_occupied() {
            for d in NEIGHBORS_6 {
                let n = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
                if cube.contains(n) {
                    if d == [0, 0, 1] {
                        floor += 1;
                    } else if d == [1, 0, 0] {
                        wall += 1;
                    }
                }
            }
        }
        let mut sizes: Vec<_> = p.components.iter().map(|c| c.len()).collect();
        sizes.sort();
        let mut expect = vec![floor, wall];
        expect.sort();
        assert_eq!(sizes, expect);
        assert_eq!((floor, wall), (16, 16));
    }

    #[test]
    fn patch_is_symmetric() {
        let plate = block([0, 0, 0], [9, 7, 2]);
        let cube = block([3, -2, 2], [8, 4, 5]);
        let ab = contact_patch(&plate, &cube).unwrap();
        let ba = contact_patch(&cube, &plate).unwrap();
        assert_eq!(ab.faces.len(), ba.faces.len());
        assert_eq!(ab.centroid, ba.centroid);
    }
}
