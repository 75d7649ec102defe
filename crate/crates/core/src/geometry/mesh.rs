use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::Matrix4;

use super::{Point, Vector};
use crate::error::{Error, Result};

/// A triangle soup with shared vertices, in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(name: impl Into<String>, vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Self {
        TriangleMesh {
            name: name.into(),
            vertices,
            triangles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::EmptyMesh(self.name.clone()));
        }
        let n = self.vertices.len();
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh {
                name: self.name.clone(),
                reason: format!("triangle {t:?} indexes past {n} vertices"),
            });
        }
        if self.vertices.iter().any(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh {
                name: self.name.clone(),
                reason: "non-finite vertex".into(),
            });
        }
        Ok(())
    }

    pub fn aabb(&self) -> Option<(Point, Point)> {
        let mut it = self.vertices.iter();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    /// Applies a homogeneous 4×4 transform (row-major, column vectors).
    pub fn transformed(&self, pose: &Matrix4<f64>) -> TriangleMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|v| pose.transform_point(v))
            .collect();
        TriangleMesh {
            name: self.name.clone(),
            vertices,
            triangles: self.triangles.clone(),
        }
    }

    pub fn translated(&self, offset: Vector) -> TriangleMesh {
        TriangleMesh {
            name: self.name.clone(),
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Concatenates several meshes into one soup.
    pub fn merged(name: impl Into<String>, parts: &[TriangleMesh]) -> TriangleMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in parts {
            let base = vertices.len();
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        TriangleMesh::new(name, vertices, triangles)
    }

    /// Rounds every coordinate through `f32`, matching what an STL round
    /// trip produces.
    pub fn quantized_f32(mut self) -> TriangleMesh {
        for v in &mut self.vertices {
            for c in v.coords.iter_mut() {
                *c = *c as f32 as f64;
            }
        }
        self
    }

    /// True when every undirected edge is used by an even number of
    /// triangles, which is what parity filling needs.
    pub fn is_closed(&self) -> bool {
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = if a < b { (a, b) } else { (b, a) };
                *edges.entry(key).or_default() += 1;
            }
        }
        edges.values().all(|&c| c % 2 == 0)
    }

    /// Merges bit-identical vertices so that edge sharing can be detected.
    pub fn welded(&self) -> TriangleMesh {
        let mut index: HashMap<[u64; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let remap: Vec<usize> = self
            .vertices
            .iter()
            .map(|v| {
                let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
                *index.entry(key).or_insert_with(|| {
                    vertices.push(*v);
                    vertices.len() - 1
                })
            })
            .collect();
        let triangles = self
            .triangles
            .iter()
            .map(|t| t.map(|i| remap[i]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        TriangleMesh::new(self.name.clone(), vertices, triangles)
    }

    pub fn cuboid(name: impl Into<String>, min: [f64; 3], max: [f64; 3]) -> TriangleMesh {
        let [x0, y0, z0] = min;
        let [x1, y1, z1] = max;
        let vertices = vec![
            Point::new(x0, y0, z0),
            Point::new(x1, y0, z0),
            Point::new(x1, y1, z0),
            Point::new(x0, y1, z0),
            Point::new(x0, y0, z1),
            Point::new(x1, y0, z1),
            Point::new(x1, y1, z1),
            Point::new(x0, y1, z1),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriangleMesh::new(name, vertices, triangles)
    }

    /// Union of disjoint (face-sharing allowed) boxes as one closed soup.
    pub fn boxes(name: impl Into<String>, boxes: &[([f64; 3], [f64; 3])]) -> TriangleMesh {
        let parts: Vec<_> = boxes
            .iter()
            .map(|(lo, hi)| TriangleMesh::cuboid("", *lo, *hi))
            .collect();
        TriangleMesh::merged(name, &parts)
    }

    /// Prism over a closed loop in the XY plane, optionally with a hole.
    /// `outer` and `inner` must have the same number of points and matching
    /// parameterisation when a hole is present; both are counter-clockwise.
    pub fn extruded_loop(
        name: impl Into<String>,
        outer: &[[f64; 2]],
        inner: Option<&[[f64; 2]]>,
        z0: f64,
        z1: f64,
    ) -> TriangleMesh {
        let n = outer.len();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for &[x, y] in outer {
            vertices.push(Point::new(x, y, z0));
        }
        for &[x, y] in outer {
            vertices.push(Point::new(x, y, z1));
        }
        let ob = |i: usize| i % n;
        let ot = |i: usize| n + i % n;
        for i in 0..n {
            triangles.push([ob(i), ob(i + 1), ot(i + 1)]);
            triangles.push([ob(i), ot(i + 1), ot(i)]);
        }
        match inner {
            Some(inner) => {
                assert_eq!(inner.len(), n, "inner loop must match outer loop");
                let base = vertices.len();
                for &[x, y] in inner {
                    vertices.push(Point::new(x, y, z0));
                }
                for &[x, y] in inner {
                    vertices.push(Point::new(x, y, z1));
                }
                let ib = |i: usize| base + i % n;
                let it = |i: usize| base + n + i % n;
                for i in 0..n {
                    // inner wall faces inward (towards the hole)
                    triangles.push([ib(i), it(i + 1), ib(i + 1)]);
                    triangles.push([ib(i), it(i), it(i + 1)]);
                    // bottom annulus
                    triangles.push([ob(i), ib(i + 1), ob(i + 1)]);
                    triangles.push([ob(i), ib(i), ib(i + 1)]);
                    // top annulus
                    triangles.push([ot(i), ot(i + 1), it(i + 1)]);
                    triangles.push([ot(i), it(i + 1), it(i)]);
                }
            }
            None => {
                let cb = vertices.len();
                let (sx, sy) = outer
                    .iter()
                    .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
                vertices.push(Point::new(sx / n as f64, sy / n as f64, z0));
                vertices.push(Point::new(sx / n as f64, sy / n as f64, z1));
                for i in 0..n {
                    triangles.push([cb, ob(i + 1), ob(i)]);
                    triangles.push([cb + 1, ot(i), ot(i + 1)]);
                }
            }
        }
        TriangleMesh::new(name, vertices, triangles)
    }

    pub fn cylinder(
        name: impl Into<String>,
        center: [f64; 2],
        radius: f64,
        z0: f64,
        z1: f64,
        segments: usize,
    ) -> TriangleMesh {
        let ring = circle(center, radius, segments);
        TriangleMesh::extruded_loop(name, &ring, None, z0, z1)
    }

    pub fn uv_sphere(name: impl Into<String>, center: Point, radius: f64, stacks: usize, slices: usize) -> TriangleMesh {
        let mut vertices = vec![center + Vector::new(0.0, 0.0, radius)];
        for i in 1..stacks {
            let phi = std::f64::consts::PI * i as f64 / stacks as f64;
            for j in 0..slices {
                let theta = std::f64::consts::TAU * j as f64 / slices as f64;
                vertices.push(
                    center
                        + radius
                            * Vector::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()),
                );
            }
        }
        vertices.push(center - Vector::new(0.0, 0.0, radius));
        let south = vertices.len() - 1;
        let ring = |i: usize, j: usize| 1 + (i - 1) * slices + j % slices;
        let mut triangles = Vec::new();
        for j in 0..slices {
            triangles.push([0, ring(1, j), ring(1, j + 1)]);
            triangles.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
        }
        for i in 1..stacks - 1 {
            for j in 0..slices {
                triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        TriangleMesh::new(name, vertices, triangles)
    }

    /// Torus around the Z axis through `center`.
    pub fn torus(
        name: impl Into<String>,
        center: Point,
        major: f64,
        minor: f64,
        major_segments: usize,
        minor_segments: usize,
    ) -> TriangleMesh {
        let mut vertices = Vec::new();
        for i in 0..major_segments {
            let u = std::f64::consts::TAU * i as f64 / major_segments as f64;
            for j in 0..minor_segments {
                let v = std::f64::consts::TAU * j as f64 / minor_segments as f64;
                let r = major + minor * v.cos();
                vertices.push(center + Vector::new(r * u.cos(), r * u.sin(), minor * v.sin()));
            }
        }
        let idx = |i: usize, j: usize| (i % major_segments) * minor_segments + j % minor_segments;
        let mut triangles = Vec::new();
        for i in 0..major_segments {
            for j in 0..minor_segments {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        TriangleMesh::new(name, vertices, triangles)
    }
}

/// Counter-clockwise polygon approximating a circle.
pub(crate) fn circle(center: [f64; 2], radius: f64, segments: usize) -> Vec<[f64; 2]> {
    (0..segments)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / segments as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect()
}

fn mesh_from_stl(name: &str, indexed: stl_io::IndexedMesh) -> TriangleMesh {
    let vertices = indexed
        .vertices
        .iter()
        .map(|v| Point::new(v[0] as f64, v[1] as f64, v[2] as f64))
        .collect();
    let triangles = indexed.faces.iter().map(|f| f.vertices).collect();
    TriangleMesh::new(name, vertices, triangles)
}

fn lower_ext(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Loads an STL (binary or ASCII) or OBJ file as a single mesh.
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mesh")
        .to_string();
    let mesh = match lower_ext(path).as_str() {
        "stl" => {
            let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let indexed = stl_io::read_stl(&mut BufReader::new(file))
                .map_err(|e| Error::io(format!("reading STL {}", path.display()), e))?;
            mesh_from_stl(&name, indexed)
        }
        "obj" => {
            let objects = load_obj_objects(path)?;
            TriangleMesh::merged(name, &objects)
        }
        other => {
            return Err(Error::InvalidMesh {
                name,
                reason: format!("unsupported mesh format `.{other}`"),
            })
        }
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Loads every named object (`o`/`g`) of an OBJ file as its own mesh.
pub fn load_obj_objects(path: &Path) -> Result<Vec<TriangleMesh>> {
    let options = tobj::LoadOptions {
        single_index: true,
        triangulate: true,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj(path, &options).map_err(|e| Error::InvalidMesh {
        name: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(models
        .into_iter()
        .map(|m| {
            let p = &m.mesh.positions;
            let vertices = p
                .chunks_exact(3)
                .map(|c| Point::new(c[0] as f64, c[1] as f64, c[2] as f64))
                .collect();
            let triangles = m
                .mesh
                .indices
                .chunks_exact(3)
                .map(|c| [c[0] as usize, c[1] as usize, c[2] as usize])
                .collect();
            TriangleMesh::new(m.name, vertices, triangles)
        })
        .collect())
}

/// Writes a binary STL.
pub fn write_stl(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let tris: Vec<stl_io::Triangle> = mesh
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i]);
            let n = (b - a).cross(&(c - a));
            let n = if n.norm() > 0.0 { n.normalize() } else { n };
            let v = |p: Point| stl_io::Vertex::new([p.x as f32, p.y as f32, p.z as f32]);
            stl_io::Triangle {
                normal: stl_io::Normal::new([n.x as f32, n.y as f32, n.z as f32]),
                vertices: [v(a), v(b), v(c)],
            }
        })
        .collect();
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    stl_io::write_stl(&mut BufWriter::new(file), tris.iter())
        .map_err(|e| Error::io(format!("writing STL {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_are_closed() {
        assert!(TriangleMesh::cuboid("c", [0.0; 3], [1.0; 3]).is_closed());
        assert!(TriangleMesh::cylinder("c", [0.0, 0.0], 2.0, 0.0, 1.0, 24).is_closed());
        let ring = circle([0.0, 0.0], 3.0, 24);
        let hole = circle([0.0, 0.0], 2.0, 24);
        assert!(TriangleMesh::extruded_loop("a", &ring, Some(&hole), 0.0, 1.0).is_closed());
        assert!(TriangleMesh::torus("t", Point::origin(), 5.0, 1.0, 16, 8).is_closed());
        assert!(TriangleMesh::uv_sphere("s", Point::origin(), 1.0, 8, 12).is_closed());
    }

    #[test]
    fn empty_and_out_of_range_meshes_are_rejected() {
        let empty = TriangleMesh::new("e", vec![], vec![]);
        assert!(matches!(empty.validate(), Err(Error::EmptyMesh(_))));
        let bad = TriangleMesh::new("b", vec![Point::origin()], vec![[0, 1, 2]]);
        assert!(matches!(bad.validate(), Err(Error::InvalidMesh { .. })));
    }

    #[test]
    fn stl_round_trip_preserves_geometry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.stl");
        let cube = TriangleMesh::cuboid("cube", [0.0; 3], [10.0; 3]);
        write_stl(&cube, &path).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.triangles.len(), 12);
        assert_eq!(back.vertices.len(), 8);
        assert!(back.is_closed());
        assert_eq!(back.aabb(), cube.aabb());
    }

    #[test]
    fn ascii_stl_and_obj_objects_load() {
        let dir = tempfile::tempdir().unwrap();
        let stl = dir.path().join("tri.stl");
        std::fs::write(
            &stl,
            "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\nendsolid t\n",
        )
        .unwrap();
        assert_eq!(load_mesh(&stl).unwrap().triangles.len(), 1);

        let obj = dir.path().join("wire.obj");
        std::fs::write(
            &obj,
            "o pin\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\no cable\nv 5 5 5\nv 6 5 5\nv 5 6 5\nf 4 5 6\n",
        )
        .unwrap();
        let objects = load_obj_objects(&obj).unwrap();
        let names: Vec<_> = objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["pin", "cable"]);
        assert_eq!(load_mesh(&obj).unwrap().triangles.len(), 2);
    }
}
