use crate::geometry::VoxelGrid;

/// Unit-resolution box of cells `lo..hi` on each axis.
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
