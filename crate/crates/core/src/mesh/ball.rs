//! Extrinsic balls `D_R = B_R(p) ∩ P` cut out of a surface mesh.

use std::collections::{HashMap, VecDeque};

use super::{dist, dot, edge_key, sub, triangle_area, Point, SurfaceMesh};
use crate::{Error, Result};

/// The pole component of a mesh clipped to an ambient ball.
///
/// Vertices are the parent vertices strictly inside the ball followed by
/// clip points, which sit on parent edges at ambient distance `R` and carry
/// the Dirichlet data.
#[derive(Clone, Debug)]
pub struct ExtrinsicBallMesh {
    parent: SurfaceMesh,
    radius: f64,
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    interior_count: usize,
    parent_index: Vec<usize>,
    pole: usize,
    loops: Vec<Vec<usize>>,
}

/// Parameter `t ∈ (0, 1]` where `a + t (b - a)` meets the sphere `|x - p| = R`,
/// given `|a - p| < R ≤ |b - p|`.
fn clip_parameter(a: Point, b: Point, p: Point, radius: f64) -> f64 {
    let e = sub(b, a);
    let f = sub(a, p);
    let ee = dot(e, e);
    let fe = dot(f, e);
    let c = dot(f, f) - radius * radius;
    let disc = (fe * fe - ee * c).max(0.0);
    // stable form of the root of larger magnitude
    let q = -(fe + disc.sqrt().copysign(fe));
    let t = if fe >= 0.0 { c / q } else { q / ee };
    t.clamp(0.0, 1.0)
}

/// Clip `mesh` to the ambient ball of radius `R` about its pole and keep the
/// connected component containing the pole.
pub fn extract_extrinsic_ball(mesh: &SurfaceMesh, radius: f64) -> Result<ExtrinsicBallMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
    }
    let p = mesh.pole_point();
    let verts = mesh.vertices();
    let d: Vec<f64> = verts.iter().map(|x| dist(*x, p)).collect();
    let mut r = radius;
    for _ in 0..8 {
        if d.iter().all(|&di| (di - r).abs() > 1e-13 * radius) {
            break;
        }
        r += 1e-12 * radius;
    }
    let inside: Vec<bool> = d.iter().map(|&di| di < r).collect();

    // faces reachable from the pole through edges that touch the ball
    let mut edge_to_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in mesh.faces().iter().enumerate() {
        for i in 0..3 {
            edge_to_faces
                .entry(edge_key(f[i], f[(i + 1) % 3]))
                .or_default()
                .push(fi);
        }
    }
    let mut in_component = vec![false; mesh.faces().len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (fi, f) in mesh.faces().iter().enumerate() {
        if f.contains(&mesh.pole()) {
            in_component[fi] = true;
            queue.push_back(fi);
        }
    }
    if queue.is_empty() {
        return Err(Error::Domain("the pole lies on no face".into()));
    }
    while let Some(fi) = queue.pop_front() {
        let f = mesh.faces()[fi];
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            if !(inside[a] || inside[b]) {
                continue;
            }
            let shared = &edge_to_faces[&edge_key(a, b)];
            if shared.len() == 1 {
                return Err(Error::Domain(format!(
                    "the ball of radius {radius} reaches the mesh boundary at edge ({a}, {b}); \
                     it is not compactly contained in the surface"
                )));
            }
            for &g in shared {
                if !in_component[g] {
                    in_component[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }

    let mut kept: Vec<usize> = mesh
        .faces()
        .iter()
        .zip(&in_component)
        .filter(|(_, &keep)| keep)
        .flat_map(|(f, _)| f.iter().copied())
        .filter(|&v| inside[v])
        .collect();
    kept.sort_unstable();
    kept.dedup();
    let parent_index = kept;
    let index: HashMap<usize, usize> = parent_index.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut vertices: Vec<Point> = parent_index.iter().map(|&v| verts[v]).collect();
    let interior_count = vertices.len();

    let mut clips: HashMap<(usize, usize), usize> = HashMap::new();
    let mut clip = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *clips.entry((a, b)).or_insert_with(|| {
            let t = clip_parameter(verts[a], verts[b], p, r);
            let e = sub(verts[b], verts[a]);
            vertices.push([verts[a][0] + t * e[0], verts[a][1] + t * e[1], verts[a][2] + t * e[2]]);
            vertices.len() - 1
        })
    };

    let mut faces = Vec::new();
    for (fi, f) in mesh.faces().iter().enumerate() {
        if !in_component[fi] {
            continue;
        }
        let count = f.iter().filter(|&&v| inside[v]).count();
        match count {
            3 => faces.push([index[&f[0]], index[&f[1]], index[&f[2]]]),
            2 => {
                let s = (0..3).find(|&i| !inside[f[i]]).unwrap();
                let (a, b, c) = (f[(s + 1) % 3], f[(s + 2) % 3], f[s]);
                let qb = clip(b, c, &mut vertices);
                let qa = clip(a, c, &mut vertices);
                let (ia, ib) = (index[&a], index[&b]);
                if dist(vertices[ia], vertices[qb]) <= dist(vertices[ib], vertices[qa]) {
                    faces.push([ia, ib, qb]);
                    faces.push([ia, qb, qa]);
                } else {
                    faces.push([ia, ib, qa]);
                    faces.push([ib, qb, qa]);
                }
            }
            1 => {
                let s = (0..3).find(|&i| inside[f[i]]).unwrap();
                let (a, b, c) = (f[s], f[(s + 1) % 3], f[(s + 2) % 3]);
                let qb = clip(a, b, &mut vertices);
                let qc = clip(a, c, &mut vertices);
                faces.push([index[&a], qb, qc]);
            }
            _ => unreachable!("component faces touch the ball"),
        }
    }
    let pole = index[&mesh.pole()];
    let loops = boundary_loops(&faces, interior_count, vertices.len())?;
    Ok(ExtrinsicBallMesh {
        parent: mesh.clone(),
        radius: r,
        vertices,
        faces,
        interior_count,
        parent_index,
        pole,
        loops,
    })
}

fn boundary_loops(faces: &[[usize; 3]], first_clip: usize, n: usize) -> Result<Vec<Vec<usize>>> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for i in 0..3 {
            *count.entry(edge_key(f[i], f[(i + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edges: Vec<(usize, usize)> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
    edges.sort_unstable();
    for &(a, b) in &edges {
        if a < first_clip || b < first_clip {
            return Err(Error::Validation(format!(
                "boundary edge ({a}, {b}) of the clipped ball has an interior endpoint"
            )));
        }
        next[a].push(b);
        next[b].push(a);
    }
    let mut used = vec![false; n];
    let mut loops = Vec::new();
    for start in first_clip..n {
        if used[start] || next[start].is_empty() {
            continue;
        }
        let mut chain = vec![start];
        used[start] = true;
        let mut prev = start;
        let mut cur = next[start][0];
        while cur != start {
            if used[cur] {
                return Err(Error::Validation(format!(
                    "boundary of the clipped ball is pinched at node {cur}"
                )));
            }
            used[cur] = true;
            chain.push(cur);
            let step = next[cur].iter().copied().find(|&x| x != prev);
            match step {
                Some(x) if next[cur].len() == 2 => {
                    prev = cur;
                    cur = x;
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "boundary of the clipped ball is not a closed curve at node {cur}"
                    )))
                }
            }
        }
        loops.push(chain);
    }
    Ok(loops)
}

impl ExtrinsicBallMesh {
    pub fn parent(&self) -> &SurfaceMesh {
        &self.parent
    }

    /// The radius actually used (nudged by `1e-12 R` if a vertex sat on the sphere).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Vertices `0..interior_count()` are interior; the rest are clip points.
    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v >= self.interior_count
    }

    /// Parent index of interior vertex `v`.
    pub fn parent_vertex(&self, v: usize) -> Option<usize> {
        self.parent_index.get(v).copied()
    }

    pub fn pole(&self) -> usize {
        self.pole
    }

    pub fn pole_point(&self) -> Point {
        self.vertices[self.pole]
    }

    /// Ambient distance from the pole, `r(x) = |x - p|`.
    pub fn distance(&self, v: usize) -> f64 {
        dist(self.vertices[v], self.pole_point())
    }

    /// Ordered boundary chains (closed).
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    pub fn boundary_length(&self) -> f64 {
        self.loops
            .iter()
            .map(|l| {
                (0..l.len())
                    .map(|i| dist(self.vertices[l[i]], self.vertices[l[(i + 1) % l.len()]]))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| triangle_area(self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]))
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |i| edge_key(f[i], f[(i + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// `V - E + F`; 1 for a topological disk.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Largest deviation of a clip point's distance from `R`.
    pub fn boundary_distance_error(&self) -> f64 {
        (self.interior_count..self.vertices.len())
            .map(|v| (self.distance(v) - self.radius).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{catenoid, disk, helicoid, PoleSelector};
    use std::f64::consts::PI;

    #[test]
    fn clip_parameter_lands_on_sphere() {
        let p = [0.0; 3];
        for (a, b) in [
            ([0.1, 0.0, 0.0], [2.0, 0.3, 0.0]),
            ([0.0, 0.9, 0.0], [0.0, 1.0 + 1e-14, 0.0]),
        ] {
            let t = clip_parameter(a, b, p, 1.0);
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0];
            assert!((dist(x, p) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn disk_sub_ball() {
        let m = disk(1.0, 30).unwrap();
        let b = extract_extrinsic_ball(&m, 0.5).unwrap();
        assert_eq!(b.euler_characteristic(), 1);
        assert_eq!(b.boundary_loops().len(), 1);
        assert!((b.boundary_length() - PI).abs() < 1e-3);
        assert!((b.area() - PI / 4.0).abs() < 1e-3);
        assert!(b.boundary_distance_error() < 1e-12);
        assert!((0..b.interior_count()).all(|v| b.distance(v) < b.radius()));
        assert_eq!(b.pole_point(), [0.0; 3]);
    }

    #[test]
    fn vertex_on_the_sphere_nudges_radius() {
        let m = disk(1.0, 10).unwrap();
        let b = extract_extrinsic_ball(&m, 0.5).unwrap();
        assert!(b.radius() > 0.5 && b.radius() < 0.5 + 1e-11);
        assert_eq!(b.euler_characteristic(), 1);
    }

    #[test]
    fn catenoid_ball_is_a_disk() {
        let m = catenoid(1.6, 90).unwrap();
        let b = extract_extrinsic_ball(&m, 0.8).unwrap();
        assert_eq!(b.euler_characteristic(), 1);
        assert_eq!(b.boundary_loops().len(), 1);
        let h = helicoid(1.6, 1.0, 20).unwrap();
        assert_eq!(extract_extrinsic_ball(&h, 1.0).unwrap().euler_characteristic(), 1);
    }

    #[test]
    fn ball_touching_the_mesh_boundary_is_rejected() {
        let m = disk(1.0, 10).unwrap();
        assert!(matches!(extract_extrinsic_ball(&m, 1.5), Err(Error::Domain(_))));
        assert!(extract_extrinsic_ball(&m, -1.0).is_err());
    }

    #[test]
    fn other_components_are_dropped() {
        // a second disk floating next to the first one
        let a = disk(1.0, 6).unwrap();
        let mut verts = a.vertices().to_vec();
        let mut faces = a.faces().to_vec();
        let off = verts.len();
        verts.extend(a.vertices().iter().map(|x| [x[0], x[1], 0.3]));
        faces.extend(a.faces().iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        let two = SurfaceMesh::new(verts, faces, PoleSelector::Index(0)).unwrap();
        let b = extract_extrinsic_ball(&two, 0.55).unwrap();
        assert_eq!(b.faces().len(), extract_extrinsic_ball(&a, 0.55).unwrap().faces().len());
    }
}
