//! Sampled radial mean curvature `C(x) = -<∇r, H_P>` and radial tangency
//! `T(x) = |∇^P r|` on an extrinsic ball. `∇^P r` is the ambient gradient
//! projected onto each incident face, averaged with area weights.
//!
//! Both are evaluated on the complete stars of the parent mesh. `H_P` is the normalised mean curvature vector, half the
//! trace of the second fundamental form, so a sphere of radius `ρ` gives
//! `C = r / (2 ρ²)`.

use serde::Serialize;

use super::fem::cotangents;
use super::{cross, dot, norm, sub, triangle_area, ExtrinsicBallMesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VertexDiagnostic {
    /// Index in the ball mesh.
    pub vertex: usize,
    pub r: f64,
    pub c: f64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisFields {
    pub samples: Vec<VertexDiagnostic>,
    /// Boundary clip points and the pole.
    pub not_computed: Vec<usize>,
    pub min_t: f64,
    pub max_t: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub max_abs_c: f64,
}

/// Voronoi area of the corner at `a` of triangle `(a, b, c)`, with the
/// usual split for obtuse triangles.
fn mixed_area(a: Point, b: Point, c: Point) -> f64 {
    let area = triangle_area(a, b, c);
    let [ca, cb, cc] = cotangents(a, b, c);
    if ca < 0.0 {
        0.5 * area
    } else if cb < 0.0 || cc < 0.0 {
        0.25 * area
    } else {
        0.125 * (dot(sub(b, a), sub(b, a)) * cc + dot(sub(c, a), sub(c, a)) * cb)
    }
}

pub fn estimate_hypothesis_fields(ball: &ExtrinsicBallMesh) -> HypothesisFields {
    let parent = ball.parent();
    let verts = parent.vertices();
    let p = parent.pole_point();
    let mut star: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for (fi, f) in parent.faces().iter().enumerate() {
        for &v in f {
            star[v].push(fi);
        }
    }

    let mut samples = Vec::new();
    let mut not_computed: Vec<usize> = (ball.interior_count()..ball.vertices().len()).collect();
    for v in 0..ball.interior_count() {
        let pv = ball.parent_vertex(v).unwrap();
        let x = verts[pv];
        let r = norm(sub(x, p));
        if v == ball.pole() || r == 0.0 {
            not_computed.push(v);
            continue;
        }
        let radial = [(x[0] - p[0]) / r, (x[1] - p[1]) / r, (x[2] - p[2]) / r];
        let mut lap = [0.0; 3];
        let mut area = 0.0;
        let mut grad = [0.0; 3];
        let mut weight = 0.0;
        for &fi in &star[pv] {
            let f = parent.faces()[fi];
            let s = f.iter().position(|&u| u == pv).unwrap();
            let (a, b, c) = (f[s], f[(s + 1) % 3], f[(s + 2) % 3]);
            let (xa, xb, xc) = (verts[a], verts[b], verts[c]);
            let [_, cb, cc] = cotangents(xa, xb, xc);
            for i in 0..3 {
                lap[i] += 0.5 * (cc * (xb[i] - xa[i]) + cb * (xc[i] - xa[i]));
            }
            area += mixed_area(xa, xb, xc);

            let normal = cross(sub(xb, xa), sub(xc, xa));
            let twice = norm(normal);
            let n = [normal[0] / twice, normal[1] / twice, normal[2] / twice];
            let face_area = 0.5 * twice;
            let along = dot(radial, n);
            for i in 0..3 {
                grad[i] += face_area * (radial[i] - along * n[i]);
            }
            weight += face_area;
        }
        // Δx = 2 H for a surface, and ∇r = (x - p) / r in Euclidean space
        let h = [lap[0] / (2.0 * area), lap[1] / (2.0 * area), lap[2] / (2.0 * area)];
        let c = -dot(radial, h);
        let t = norm([grad[0] / weight, grad[1] / weight, grad[2] / weight]);
        samples.push(VertexDiagnostic { vertex: v, r, c, t });
    }
    not_computed.sort_unstable();
    let fold =
        |f: fn(&VertexDiagnostic) -> f64, init: f64, pick: fn(f64, f64) -> f64| samples.iter().map(f).fold(init, pick);
    let min_t = fold(|s| s.t, f64::INFINITY, f64::min);
    let max_t = fold(|s| s.t, f64::NEG_INFINITY, f64::max);
    let min_c = fold(|s| s.c, f64::INFINITY, f64::min);
    let max_c = fold(|s| s.c, f64::NEG_INFINITY, f64::max);
    let max_abs_c = fold(|s| s.c.abs(), 0.0, f64::max);
    HypothesisFields {
        samples,
        not_computed,
        min_t,
        max_t,
        min_c,
        max_c,
        max_abs_c,
    }
}
