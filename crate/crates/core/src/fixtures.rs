//! Built-in test products.
//!
//! Each fixture is a small assembled product made of boxes and extruded
//! loops on a 1 mm lattice, so voxelization at 1 mm is exact for the boxes.
//! They exercise the relation extraction and give the optimiser products
//! whose best sequences are known.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::geometry::{write_stl, Direction, TriangleMesh};
use crate::io::{AssemblyManifest, GeometryConfig, InsertionOverride, PartSpec};
use crate::pipeline::{extract, Extraction, PartInput};
use crate::sequence::Chromosome;

pub const NAMES: [&str; 6] = ["stack2", "pegboard4", "bracket5", "pulley_band", "frame7", "stack33"];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub parts: Vec<PartInput>,
    pub geometry: GeometryConfig,
    pub insertions: Vec<InsertionOverride>,
}

impl Fixture {
    fn new(name: &'static str, description: &'static str, parts: Vec<PartInput>) -> Self {
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.objects = p.objects.into_iter().map(TriangleMesh::quantized_f32).collect();
                p
            })
            .collect();
        Fixture {
            name,
            description,
            parts,
            geometry: GeometryConfig {
                resolution: Some(1.0),
                ..GeometryConfig::default()
            },
            insertions: Vec::new(),
        }
    }

    pub fn eta(&self) -> usize {
        self.parts.len()
    }

    pub fn extract(&self) -> Result<Extraction> {
        extract(self.name, &self.parts, &self.geometry, &self.insertions)
    }

    /// Writes one STL per part and `manifest.json` into `dir`; returns the
    /// manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(format!("creating {}", dir.display()), e))?;
        let mut specs = Vec::new();
        for (i, p) in self.parts.iter().enumerate() {
            let file = format!("{:02}_{}.stl", i + 1, p.name);
            write_stl(&TriangleMesh::merged(&p.name, &p.objects), &dir.join(&file))?;
            specs.push(PartSpec {
                id: i + 1,
                name: p.name.clone(),
                mesh: file.into(),
                pose: None,
                deformable: p.deformable,
                ring_axis: p.ring_axis.map(Into::into),
                tips: p.tips.clone(),
            });
        }
        let mut m = AssemblyManifest::new(self.name, specs);
        m.geometry = self.geometry;
        m.insertions = self.insertions.clone();
        let path = dir.join("manifest.json");
        m.save(&path)?;
        Ok(path)
    }
}

pub fn by_name(name: &str) -> Option<Fixture> {
    Some(match name {
        "stack2" => stack2(),
        "pegboard4" => pegboard4(),
        "bracket5" => bracket5(),
        "pulley_band" => pulley_band(),
        "frame7" => frame7(),
        "stack33" => stack33(),
        _ => return None,
    })
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().map(|n| by_name(n).expect("known fixture")).collect()
}

fn boxes(name: &str, b: &[([f64; 3], [f64; 3])]) -> PartInput {
    PartInput::rigid(name, TriangleMesh::boxes(name, b))
}

fn cuboid(name: &str, lo: [f64; 3], hi: [f64; 3]) -> PartInput {
    boxes(name, &[(lo, hi)])
}

/// A `[x0, x1] x [y0, y1]` slab between `z0` and `z1` with rectangular
/// pockets `[x0, x1] x [y0, y1]` cut through it, as disjoint boxes.
fn slab_with_pockets(outer: [f64; 4], pockets: &[[f64; 4]], z0: f64, z1: f64) -> Vec<([f64; 3], [f64; 3])> {
    let mut xs = vec![outer[0], outer[1]];
    let mut ys = vec![outer[2], outer[3]];
    for p in pockets {
        xs.extend([p[0], p[1]]);
        ys.extend([p[2], p[3]]);
    }
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let mut out = Vec::new();
    for wx in xs.windows(2) {
        // merge along y so the soup stays small
        let mut run: Option<(f64, f64)> = None;
        for wy in ys.windows(2) {
            let (cx, cy) = (0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1]));
            let cut = pockets.iter().any(|p| cx > p[0] && cx < p[1] && cy > p[2] && cy < p[3]);
            run = match (run, cut) {
                (None, false) => Some((wy[0], wy[1])),
                (Some((a, _)), false) => Some((a, wy[1])),
                (Some((a, b)), true) => {
                    out.push(([wx[0], a, z0], [wx[1], b, z1]));
                    None
                }
                (None, true) => None,
            };
        }
        if let Some((a, b)) = run {
            out.push(([wx[0], a, z0], [wx[1], b, z1]));
        }
    }
    out
}

/// A 10 mm cube resting on a plate.
pub fn stack2() -> Fixture {
    Fixture::new(
        "stack2",
        "10 mm cube resting on a 20 x 20 x 2 mm plate",
        vec![
            cuboid("plate", [0.0, 0.0, 0.0], [20.0, 20.0, 2.0]),
            cuboid("cube", [5.0, 5.0, 2.0], [15.0, 15.0, 12.0]),
        ],
    )
}

/// Base, a board with a square through hole, a peg through the board and
/// a cap with a blind socket over the peg.
pub fn pegboard4() -> Fixture {
    let hole = [8.0, 12.0, 8.0, 12.0];
    let mut cap = slab_with_pockets([6.0, 14.0, 6.0, 14.0], &[hole], 6.0, 10.0);
    cap.push(([6.0, 6.0, 10.0], [14.0, 14.0, 11.0]));
    Fixture::new(
        "pegboard4",
        "base, board with a through hole, peg and socket cap",
        vec![
            cuboid("base", [0.0, 0.0, 0.0], [20.0, 20.0, 2.0]),
            boxes("board", &slab_with_pockets([0.0, 20.0, 0.0, 20.0], &[hole], 2.0, 6.0)),
            cuboid("peg", [8.0, 8.0, 2.0], [12.0, 12.0, 10.0]),
            boxes("cap", &cap),
        ],
    )
}

/// Part 1 is a bracket lying across parts 2, 3 and 5, which stand on the
/// base (part 4). Parts 2 and 3 are pegged into the base; part 5 can also
/// slide in sideways under the bracket.
pub fn bracket5() -> Fixture {
    let peg_a = [5.0, 9.0, 8.0, 12.0];
    let peg_b = [19.0, 23.0, 8.0, 12.0];
    let mut base = vec![([0.0, 0.0, 0.0], [42.0, 20.0, 1.0])];
    base.extend(slab_with_pockets([0.0, 42.0, 0.0, 20.0], &[peg_a, peg_b], 1.0, 4.0));
    let block = |name: &str, x0: f64, peg: Option<[f64; 4]>| {
        let mut b = vec![([x0, 5.0, 4.0], [x0 + 10.0, 15.0, 12.0])];
        if let Some(p) = peg {
            b.push(([p[0], p[2], 1.0], [p[1], p[3], 4.0]));
        }
        boxes(name, &b)
    };
    let tab = |x0: f64| ([x0, 5.0, 7.0], [x0 + 2.0, 15.0, 12.0]);
    Fixture::new(
        "bracket5",
        "bracket over three blocks on a base, two of them pegged",
        vec![
            boxes("bracket", &[([0.0, 5.0, 12.0], [40.0, 15.0, 14.0]), tab(0.0), tab(14.0), tab(28.0)]),
            block("block_a", 2.0, Some(peg_a)),
            block("block_b", 16.0, Some(peg_b)),
            boxes("base", &base),
            block("block_c", 30.0, None),
        ],
    )
}

impl Fixture {
    /// For `bracket5`: everything lowered with the bracket last, so it
    /// meets all three blocks at once.
    pub fn simultaneous_contact_order() -> Chromosome {
        Chromosome::uniform(vec![3, 1, 2, 4, 0], Direction::NEG_Z)
    }
}

const SEGMENTS: usize = 64;

fn arc(center: [f64; 2], radius: f64, from: usize, to: usize) -> Vec<[f64; 2]> {
    (from..=to)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / SEGMENTS as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect()
}

fn full_circle(center: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
    let mut c = arc(center, radius, 0, SEGMENTS);
    c.pop();
    c
}

fn annulus(name: &str, center: [f64; 2], r_in: f64, r_out: f64, z0: f64, z1: f64) -> TriangleMesh {
    TriangleMesh::extruded_loop(name, &full_circle(center, r_out), Some(&full_circle(center, r_in)), z0, z1)
}

/// Outline of a belt wrapped around two pulleys of equal radius.
fn stadium(left: [f64; 2], right: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
    let q = SEGMENTS / 4;
    let mut pts = arc(right, radius, 0, q);
    pts.extend(arc(left, radius, q, 3 * q));
    pts.extend(arc(right, radius, 3 * q, SEGMENTS - 1));
    pts
}

/// Two flanged pulleys on shafts with an elastic band in their grooves.
pub fn pulley_band() -> Fixture {
    let (ca, cb) = ([15.0, 12.0], [45.0, 12.0]);
    let shaft = |name: &str, c: [f64; 2]| {
        PartInput::rigid(name, TriangleMesh::extruded_loop(name, &full_circle(c, 3.0), None, 3.0, 14.0))
    };
    let pulley = |name: &str, c: [f64; 2]| {
        let pieces = [
            annulus(name, c, 3.0, 10.0, 3.0, 5.0),
            annulus(name, c, 3.0, 8.0, 5.0, 9.0),
            annulus(name, c, 3.0, 8.5, 9.0, 10.0),
        ];
        PartInput::rigid(name, TriangleMesh::merged(name, &pieces))
    };
    let band = TriangleMesh::extruded_loop("band", &stadium(ca, cb, 10.0), Some(&stadium(ca, cb, 8.0)), 5.0, 9.0);
    Fixture::new(
        "pulley_band",
        "base, two shafts, two flanged pulleys and a band around both",
        vec![
            cuboid("base", [0.0, 0.0, 0.0], [60.0, 24.0, 3.0]),
            shaft("shaft_a", ca),
            shaft("shaft_b", cb),
            pulley("pulley_a", ca),
            pulley("pulley_b", cb),
            PartInput::ring("band", band, None),
        ],
    )
}

/// Two pegged posts carry a beam; a pin passes through the beam and is
/// capped by a knob; a slider rests against one post.
pub fn frame7() -> Fixture {
    let peg_a = [5.0, 9.0, 8.0, 12.0];
    let peg_b = [31.0, 35.0, 8.0, 12.0];
    let pin = [18.0, 22.0, 8.0, 12.0];
    let mut base = vec![([0.0, 0.0, 0.0], [40.0, 20.0, 1.0])];
    base.extend(slab_with_pockets([0.0, 40.0, 0.0, 20.0], &[peg_a, peg_b], 1.0, 4.0));
    let post = |name: &str, x0: f64, p: [f64; 4]| {
        boxes(name, &[([x0, 7.0, 4.0], [x0 + 6.0, 13.0, 15.0]), ([p[0], p[2], 1.0], [p[1], p[3], 4.0])])
    };
    let mut knob = slab_with_pockets([14.0, 26.0, 5.0, 15.0], &[pin], 18.0, 21.0);
    knob.push(([14.0, 5.0, 21.0], [26.0, 15.0, 22.0]));
    Fixture::new(
        "frame7",
        "base, two pegged posts, beam, pin through the beam, knob and slider",
        vec![
            boxes("base", &base),
            post("post_a", 4.0, peg_a),
            post("post_b", 30.0, peg_b),
            boxes("beam", &slab_with_pockets([2.0, 38.0, 7.0, 13.0], &[pin], 15.0, 18.0)),
            cuboid("pin", [18.0, 8.0, 4.0], [22.0, 12.0, 21.0]),
            boxes("knob", &knob),
            cuboid("slider", [10.0, 7.0, 4.0], [14.0, 13.0, 10.0]),
        ],
    )
}

/// A plate carrying sixteen towers of two 5 mm cubes.
pub fn stack33() -> Fixture {
    let mut parts = vec![cuboid("plate", [0.0, 0.0, 0.0], [40.0, 40.0, 2.0])];
    for t in 0..16 {
        let (x, y) = (2.0 + 10.0 * (t % 4) as f64, 2.0 + 10.0 * (t / 4) as f64);
        for level in 0..2 {
            let z = 2.0 + 5.0 * level as f64;
            let name = format!("cube_{t:02}_{level}");
            parts.push(cuboid(&name, [x, y, z], [x + 5.0, y + 5.0, z + 5.0]));
        }
    }
    Fixture::new("stack33", "plate with sixteen towers of two cubes", parts)
}
