//! Parametric test surfaces with the pole at a grid vertex.

use std::f64::consts::PI;
use std::fmt;

use super::{Point, PoleSelector, SurfaceMesh};
use crate::{Error, Result};

/// Join two closed rings of vertices into a band of triangles, walking
/// both rings in order of angle. Vertex `j` of a ring with `n` vertices and
/// offset `s` sits at the angular fraction `(j + s) / n`.
fn stitch(faces: &mut Vec<[usize; 3]>, inner: &[usize], inner_offset: f64, outer: &[usize], outer_offset: f64) {
    let (ni, no) = (inner.len(), outer.len());
    let (mut i, mut o) = (0, 0);
    while i < ni || o < no {
        let next_inner = (i as f64 + 1.0 + inner_offset) / ni as f64;
        let next_outer = (o as f64 + 1.0 + outer_offset) / no as f64;
        if o < no && (i == ni || next_outer <= next_inner) {
            faces.push([inner[i % ni], outer[o], outer[(o + 1) % no]]);
            o += 1;
        } else {
            faces.push([inner[i], outer[o % no], inner[(i + 1) % ni]]);
            i += 1;
        }
    }
}

/// Concentric-ring triangulation of a polar cap: ring `i` has `6 i`
/// vertices at parameter `i / rings`, mapped through `place(t, angle)`.
fn polar(rings: usize, place: impl Fn(f64, f64) -> Point) -> Result<SurfaceMesh> {
    if rings == 0 {
        return Err(Error::Validation("need at least one ring".into()));
    }
    let mut vertices = vec![place(0.0, 0.0)];
    let mut faces = Vec::new();
    let mut prev = vec![0usize];
    let mut prev_offset = 0.0;
    for i in 1..=rings {
        let count = 6 * i;
        let t = i as f64 / rings as f64;
        // stagger alternate rings for better angles
        let offset = if i % 2 == 0 { 0.5 } else { 0.0 };
        let ring: Vec<usize> = (0..count)
            .map(|j| {
                vertices.push(place(t, 2.0 * PI * (j as f64 + offset) / count as f64));
                vertices.len() - 1
            })
            .collect();
        if i == 1 {
            for j in 0..count {
                faces.push([0, ring[j], ring[(j + 1) % count]]);
            }
        } else {
            stitch(&mut faces, &prev, prev_offset, &ring, offset);
        }
        prev = ring;
        prev_offset = offset;
    }
    SurfaceMesh::new(vertices, faces, PoleSelector::Index(0))
}

/// Planar disk of the given radius in the `z = 0` plane, pole at the centre.
pub fn disk(radius: f64, rings: usize) -> Result<SurfaceMesh> {
    polar(rings, |t, a| [radius * t * a.cos(), radius * t * a.sin(), 0.0])
}

/// Cap of the sphere of radius `rho` centred at `(0, 0, -rho)` spanning polar
/// angles up to `max_angle`; the pole is the origin.
pub fn sphere_cap(rho: f64, max_angle: f64, rings: usize) -> Result<SurfaceMesh> {
    if !(max_angle > 0.0 && max_angle < PI) {
        return Err(Error::Validation(format!(
            "cap angle must lie in (0, π), got {max_angle}"
        )));
    }
    polar(rings, |t, a| {
        let phi = t * max_angle;
        [
            rho * phi.sin() * a.cos(),
            rho * phi.sin() * a.sin(),
            rho * (phi.cos() - 1.0),
        ]
    })
}

/// Structured grid over `[u0, u1] × [v0, v1]` with alternating diagonals.
/// `periodic_u` closes the grid in the first parameter.
fn grid(
    nu: usize,
    nv: usize,
    periodic_u: bool,
    place: impl Fn(usize, usize) -> Point,
) -> (Vec<Point>, Vec<[usize; 3]>) {
    let cols = if periodic_u { nu } else { nu + 1 };
    let mut vertices = Vec::with_capacity(cols * (nv + 1));
    for j in 0..=nv {
        for i in 0..cols {
            vertices.push(place(i, j));
        }
    }
    let id = |i: usize, j: usize| j * cols + i % cols;
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    (vertices, faces)
}

/// Catenoid `(cosh v cos θ, cosh v sin θ, v)` for `|v| ≤ v_max`, with
/// `segments` points around the neck; the pole is `(1, 0, 0)`.
pub fn catenoid(v_max: f64, segments: usize) -> Result<SurfaceMesh> {
    if segments < 6 || !(v_max > 0.0) {
        return Err(Error::Validation("catenoid needs segments >= 6 and v_max > 0".into()));
    }
    let step = 2.0 * PI / segments as f64;
    let half = (v_max / step).ceil().max(1.0) as usize;
    let (vertices, faces) = grid(segments, 2 * half, true, |i, j| {
        let theta = i as f64 * step;
        let v = (j as f64 - half as f64) * v_max / half as f64;
        [v.cosh() * theta.cos(), v.cosh() * theta.sin(), v]
    });
    SurfaceMesh::new(vertices, faces, PoleSelector::Index(half * segments))
}

/// Helicoid `(u cos θ, u sin θ, pitch θ)` for `|u|, |pitch θ| ≤ extent`,
/// with `2 * half` intervals per side; the pole is the origin.
pub fn helicoid(extent: f64, pitch: f64, half: usize) -> Result<SurfaceMesh> {
    if half == 0 || !(extent > 0.0 && pitch > 0.0) {
        return Err(Error::Validation(
            "helicoid needs half >= 1, extent > 0, pitch > 0".into(),
        ));
    }
    let n = 2 * half;
    let h = extent / half as f64;
    let (vertices, faces) = grid(n, n, false, |i, j| {
        let u = i as f64 * h - extent;
        let theta = (j as f64 * h - extent) / pitch;
        [u * theta.cos(), u * theta.sin(), pitch * theta]
    });
    SurfaceMesh::new(vertices, faces, PoleSelector::Index(half * (n + 1) + half))
}

/// A named generator with its parameters, as written on the command line:
/// `disk:radius=1.25,rings=40`, `sphere:rho=1,angle=1.2,rings=40`,
/// `catenoid:vmax=1.6,segments=120`, `helicoid:extent=1.6,pitch=1,half=40`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Disk { radius: f64, rings: usize },
    SphereCap { rho: f64, angle: f64, rings: usize },
    Catenoid { v_max: f64, segments: usize },
    Helicoid { extent: f64, pitch: f64, half: usize },
}

impl Generator {
    pub fn build(&self) -> Result<SurfaceMesh> {
        match *self {
            Generator::Disk { radius, rings } => disk(radius, rings),
            Generator::SphereCap { rho, angle, rings } => sphere_cap(rho, angle, rings),
            Generator::Catenoid { v_max, segments } => catenoid(v_max, segments),
            Generator::Helicoid { extent, pitch, half } => helicoid(extent, pitch, half),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Disk { .. } => "disk",
            Generator::SphereCap { .. } => "sphere",
            Generator::Catenoid { .. } => "catenoid",
            Generator::Helicoid { .. } => "helicoid",
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut pairs = Vec::new();
        for a in args.split(',').filter(|a| !a.trim().is_empty()) {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("generator argument '{a}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("generator argument '{a}' is not numeric")))?;
            pairs.push((k.trim().to_string(), v));
        }
        let get = |k: &str, default: f64| pairs.iter().find(|(n, _)| n == k).map(|&(_, v)| v).unwrap_or(default);
        let known: &[&str] = match name.trim() {
            "disk" => &["radius", "rings"],
            "sphere" => &["rho", "angle", "rings"],
            "catenoid" => &["vmax", "segments"],
            "helicoid" => &["extent", "pitch", "half"],
            other => return Err(Error::Usage(format!("unknown mesh generator '{other}'"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Usage(format!("generator '{name}' has no parameter '{k}'")));
        }
        let count = |k: &str, default: f64| get(k, default).round().max(0.0) as usize;
        Ok(match name.trim() {
            "disk" => Generator::Disk {
                radius: get("radius", 1.25),
                rings: count("rings", 40.0),
            },
            "sphere" => Generator::SphereCap {
                rho: get("rho", 1.0),
                angle: get("angle", 1.5),
                rings: count("rings", 40.0),
            },
            "catenoid" => Generator::Catenoid {
                v_max: get("vmax", 1.6),
                segments: count("segments", 120.0),
            },
            _ => Generator::Helicoid {
                extent: get("extent", 1.6),
                pitch: get("pitch", 1.0),
                half: count("half", 40.0),
            },
        })
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Disk { radius, rings } => write!(f, "disk:radius={radius},rings={rings}"),
            Generator::SphereCap { rho, angle, rings } => {
                write!(f, "sphere:rho={rho},angle={angle},rings={rings}")
            }
            Generator::Catenoid { v_max, segments } => write!(f, "catenoid:vmax={v_max},segments={segments}"),
            Generator::Helicoid { extent, pitch, half } => {
                write!(f, "helicoid:extent={extent},pitch={pitch},half={half}")
            }
        }
    }
}
