use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Axis, Direction, Point, Sign, Vector, VoxelGrid};

/// Picks the product's resting orientation: the axis-aligned "down"
/// direction whose extreme layer of cells has the largest footprint.
/// Returns the world direction that becomes +Z. Ties keep the input
/// orientation, then follow the order -x, +x, -y, +y, +z for "down".
pub fn stable_pose_frame(product: &[VoxelGrid]) -> Direction {
    let cells: HashSet<[i64; 3]> = product.iter().flat_map(|g| g.iter_occupied()).collect();
    if cells.is_empty() {
        return Direction::POS_Z;
    }
    let candidates = [
        Direction::NEG_Z,
        Direction::NEG_X,
        Direction::POS_X,
        Direction::NEG_Y,
        Direction::POS_Y,
        Direction::POS_Z,
    ];
    let mut best = (Direction::NEG_Z, 0usize);
    for down in candidates {
        let a = down.axis.index();
        let layer = match down.sign {
            Sign::Neg => cells.iter().map(|c| c[a]).min(),
            Sign::Pos => cells.iter().map(|c| c[a]).max(),
        }
        .expect("non-empty");
        let footprint = cells.iter().filter(|c| c[a] == layer).count();
        if footprint > best.1 {
            best = (down, footprint);
        }
    }
    best.0.opposite()
}

/// A right-handed frame whose axes are signed world axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub x: Direction,
    pub y: Direction,
    pub z: Direction,
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            x: Direction::POS_X,
            y: Direction::POS_Y,
            z: Direction::POS_Z,
        }
    }

    /// Frame with +Z along `up`; X is the first positive world axis not
    /// parallel to `up`, so X and Y stay aligned with world axes.
    pub fn with_up(up: Direction) -> Self {
        let x_axis = Axis::ALL
            .into_iter()
            .find(|&a| a != up.axis)
            .expect("two axes remain");
        let x = Direction::new(x_axis, Sign::Pos);
        let yv = up.vector().cross(&x.vector());
        let y = Direction::ALL
            .into_iter()
            .find(|d| (d.vector() - yv).norm() < 1e-9)
            .expect("cross product of axes is an axis");
        Frame { x, y, z: up }
    }

    pub fn is_identity(&self) -> bool {
        *self == Frame::identity()
    }

    fn axes(&self) -> [Direction; 3] {
        [self.x, self.y, self.z]
    }

    /// World lattice cell → frame lattice cell.
    pub fn map_cell(&self, c: [i64; 3]) -> [i64; 3] {
        self.axes().map(|d| match d.sign {
            Sign::Pos => c[d.axis.index()],
            Sign::Neg => -c[d.axis.index()] - 1,
        })
    }

    pub fn map_vector(&self, v: Vector) -> Vector {
        let [a, b, c] = self.axes().map(|d| v[d.axis.index()] * d.sign.value() as f64);
        Vector::new(a, b, c)
    }

    pub fn map_point(&self, p: Point) -> Point {
        Point::from(self.map_vector(p.coords))
    }

    pub fn map_grid(&self, g: &VoxelGrid) -> VoxelGrid {
        if self.is_identity() {
            return g.clone();
        }
        g.map_cells(|c| self.map_cell(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn footprint(cells: &[[i64; 3]], down: Direction) -> usize {
        let a = down.axis.index();
        let vals = cells.iter().map(|c| c[a]);
        let layer = if down.sign == Sign::Neg { vals.min() } else { vals.max() }.unwrap();
        cells.iter().filter(|c| c[a] == layer).count()
    }

    #[test]
    fn plate_rests_on_its_largest_face() {
        // plate standing on edge: largest faces are normal to x
        let plate = block([0, 0, 0], [2, 20, 15]);
        let up = stable_pose_frame(&[plate]);
        assert_eq!(up.axis, Axis::X);
        assert_eq!(up, Direction::POS_X);
    }

    #[test]
    fn cube_keeps_input_orientation() {
        assert_eq!(stable_pose_frame(&[block([0; 3], [5; 3])]), Direction::POS_Z);
    }

    #[test]
    fn t_shape_matches_six_way_enumeration() {
        // T: a wide bar on top of a thin stem, standing along z
        let stem = block([4, 0, 0], [6, 3, 8]);
        let bar = block([0, 0, 8], [10, 3, 10]);
        let grids = [stem.clone(), bar.clone()];
        let cells: Vec<_> = stem.iter_occupied().chain(bar.iter_occupied()).collect();
        let order = [
            Direction::NEG_Z,
            Direction::NEG_X,
            Direction::POS_X,
            Direction::NEG_Y,
            Direction::POS_Y,
            Direction::POS_Z,
        ];
        let mut best = order[0];
        for d in order {
            if footprint(&cells, d) > footprint(&cells, best) {
                best = d;
            }
        }
        assert_eq!(stable_pose_frame(&grids), best.opposite());
    }

    #[test]
    fn frames_are_right_handed_signed_permutations() {
        for up in Direction::ALL {
            let f = Frame::with_up(up);
            let (x, y, z) = (f.x.vector(), f.y.vector(), f.z.vector());
            assert!((x.cross(&y) - z).norm() < 1e-12, "{up}");
            assert_eq!(f.map_vector(up.vector()), Vector::z());
            // cell mapping agrees with point mapping of cell centres
            let g = VoxelGrid::from_cells(1.0, [[3, -2, 5]]);
            let mapped = f.map_grid(&g);
            let c = mapped.iter_occupied().next().unwrap();
            let p = f.map_point(g.cell_center([3, -2, 5]));
            assert_eq!(mapped.cell_center(c), p);
        }
        assert!(Frame::with_up(Direction::POS_Z).is_identity());
    }
}
