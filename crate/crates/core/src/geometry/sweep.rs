use super::{overlap_count, Direction, VoxelGrid};

/// Translates `moving` one cell at a time along `d` from its pose until
/// its bounding box has passed `obstacle`; true if no step overlaps.
///
/// This is the literal simulation. Relation extraction uses a per-column
/// extent test that gives the same answer in one pass.
pub fn sweep_is_clear(moving: &VoxelGrid, obstacle: &VoxelGrid, d: Direction) -> bool {
    if moving.is_empty() || obstacle.is_empty() {
        return true;
    }
    let (m_lo, m_hi) = moving.occupied_bounds().expect("non-empty");
    let (o_lo, o_hi) = obstacle.occupied_bounds().expect("non-empty");
    let a = d.axis.index();
    let step = d.step();
    let mut t = 0i64;
    loop {
        t += 1;
        let lo = m_lo[a] + t * step[a];
        let hi = m_hi[a] + t * step[a];
        let passed = if step[a] > 0 { lo > o_hi[a] } else { hi < o_lo[a] };
        if passed {
            return true;
        }
        let shifted = moving.translated([step[0] * t, step[1] * t, step[2] * t]);
        if overlap_count(&shifted, obstacle).expect("same lattice") > 0 {
            return false;
        }
    }
}
