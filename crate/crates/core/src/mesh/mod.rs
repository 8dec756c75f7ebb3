//! Triangulated surfaces in Euclidean 3-space, their extrinsic balls, and
//! the finite-element exit-moment hierarchy on them.

mod ball;
mod diagnostics;
mod fem;
mod generate;
mod io;
mod verify;

use std::collections::HashMap;

use crate::{Error, Result};

pub use ball::{extract_extrinsic_ball, ExtrinsicBallMesh};
pub use diagnostics::{estimate_hypothesis_fields, HypothesisFields, VertexDiagnostic};
pub use fem::{
    mesh_spectrum, solve_discrete_hierarchy, solve_spd, CsrMatrix, DiscreteHierarchy, MeshDivergenceCheck, SolveStats,
    DEFAULT_SOLVER_TOL,
};
pub use generate::{catenoid, disk, helicoid, sphere_cap, Generator};
pub use io::{load_mesh, parse_mesh, LoadedMesh, MeshFormat};
pub use verify::{flat_disk_error, verify_mesh, MeshQuality, MeshReport, MeshVerdict};

pub type Point = [f64; 3];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub(crate) fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// How the pole is chosen when a mesh is loaded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoleSelector {
    Index(usize),
    Nearest(Point),
}

impl PoleSelector {
    pub fn resolve(self, vertices: &[Point]) -> Result<usize> {
        match self {
            PoleSelector::Index(i) if i < vertices.len() => Ok(i),
            PoleSelector::Index(i) => Err(Error::Validation(format!(
                "pole index {i} out of range for {} vertices",
                vertices.len()
            ))),
            PoleSelector::Nearest(p) => vertices
                .iter()
                .enumerate()
                .min_by(|a, b| dist(*a.1, p).total_cmp(&dist(*b.1, p)))
                .map(|(i, _)| i)
                .ok_or_else(|| Error::Validation("mesh has no vertices".into())),
        }
    }
}

/// A validated manifold triangle mesh with a distinguished pole vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    pole: usize,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>, pole: PoleSelector) -> Result<Self> {
        let pole = pole.resolve(&vertices)?;
        let mesh = SurfaceMesh { vertices, faces, pole };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn pole(&self) -> usize {
        self.pole
    }

    pub fn pole_point(&self) -> Point {
        self.vertices[self.pole]
    }

    pub fn with_pole(&self, pole: PoleSelector) -> Result<Self> {
        let pole = pole.resolve(&self.vertices)?;
        Ok(SurfaceMesh { pole, ..self.clone() })
    }

    /// Apply `x -> Q x + t` to every vertex.
    pub fn transformed(&self, q: [[f64; 3]; 3], t: Point) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|x| {
                let mut y = t;
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += dot(q[i], *x);
                }
                y
            })
            .collect();
        SurfaceMesh {
            vertices,
            ..self.clone()
        }
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        self.faces
            .iter()
            .flat_map(|f| (0..3).map(move |i| (f[i], f[(i + 1) % 3])))
            .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Number of faces on each undirected edge.
    pub fn edge_faces(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for f in &self.faces {
            for i in 0..3 {
                *count.entry(edge_key(f[i], f[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        count
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.faces.is_empty() {
            return Err(Error::Validation("mesh has no faces".into()));
        }
        if let Some(v) = self.vertices.iter().position(|x| x.iter().any(|c| !c.is_finite())) {
            return Err(Error::Validation(format!("vertex {v} has a non-finite coordinate")));
        }
        for (i, f) in self.faces.iter().enumerate() {
            if let Some(&v) = f.iter().find(|&&v| v >= n) {
                return Err(Error::Validation(format!(
                    "face {i} references vertex {v} but the mesh has {n} vertices"
                )));
            }
        }
        let scale = self.max_edge().max(f64::MIN_POSITIVE);
        let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Validation(format!("face {i} repeats a vertex: {f:?}")));
            }
            let area = triangle_area(self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]);
            if area <= 1e-14 * scale * scale {
                return Err(Error::Validation(format!("face {i} is degenerate (area {area:e})")));
            }
            let mut key = *f;
            key.sort_unstable();
            if let Some(j) = seen.insert(key, i) {
                return Err(Error::Validation(format!("face {i} repeats face {j}")));
            }
        }
        let mut bad: Vec<_> = self
            .edge_faces()
            .into_iter()
            .filter(|&(_, c)| c > 2)
            .map(|(e, _)| e)
            .collect();
        if !bad.is_empty() {
            bad.sort_unstable();
            let shown: Vec<String> = bad.iter().take(10).map(|(a, b)| format!("({a},{b})")).collect();
            return Err(Error::Validation(format!(
                "{} non-manifold edge(s) border more than two faces: {}",
                bad.len(),
                shown.join(" ")
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (Vec<Point>, Vec<[usize; 3]>) {
        (
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    #[test]
    fn accepts_manifold_mesh() {
        let (v, f) = square();
        let m = SurfaceMesh::new(v, f, PoleSelector::Nearest([0.9, 0.8, 0.0])).unwrap();
        assert_eq!(m.pole(), 2);
        assert!((m.max_edge() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_meshes() {
        let (v, mut f) = square();
        f.push([2, 0, 1]);
        let err = SurfaceMesh::new(v.clone(), f, PoleSelector::Index(0)).unwrap_err();
        assert!(err.to_string().contains("repeats face 0"), "{err}");

        let mut v2 = v.clone();
        v2.push([0.5, 0.5, 1.0]);
        let f = vec![[0, 1, 2], [0, 2, 3], [0, 2, 4]];
        let err = SurfaceMesh::new(v2, f, PoleSelector::Index(0)).unwrap_err();
        assert!(err.to_string().contains("(0,2)"), "{err}");

        let f = vec![[0, 1, 1]];
        assert!(SurfaceMesh::new(v.clone(), f, PoleSelector::Index(0)).is_err());
        let f = vec![[0, 1, 9]];
        assert!(SurfaceMesh::new(v.clone(), f, PoleSelector::Index(0)).is_err());
        let (v, f) = square();
        assert!(SurfaceMesh::new(v, f, PoleSelector::Index(4)).is_err());
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(SurfaceMesh::new(v, vec![[0, 1, 2]], PoleSelector::Index(0)).is_err());
    }

    #[test]
    fn rigid_motion_preserves_lengths() {
        let (v, f) = square();
        let m = SurfaceMesh::new(v, f, PoleSelector::Index(0)).unwrap();
        let (c, s) = (0.6, 0.8);
        let q = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let t = m.transformed(q, [3.0, -1.0, 2.0]);
        assert!((t.max_edge() - m.max_edge()).abs() < 1e-14);
    }
}
