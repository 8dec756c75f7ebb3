//! End-to-end check of `Â_k(D_R) ≤ Â_k(B^{0,2}_R)` on a surface mesh.

use serde::Serialize;

use super::fem::cotangents;
use super::{
    disk, estimate_hypothesis_fields, extract_extrinsic_ball, mesh_spectrum, solve_discrete_hierarchy, SurfaceMesh,
};
use crate::spectrum::{moment_spectrum, DEFAULT_TOL};
use crate::warp_models::ModelSpace;
use crate::Result;

/// Disk meshes used for calibration extend this far past `R`.
const CALIBRATION_MARGIN: f64 = 1.25;
/// Ratio of the longest edge of a generated disk to its ring spacing.
const DISK_EDGE_RATIO: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshQuality {
    pub vertices: usize,
    pub faces: usize,
    pub interior_vertices: usize,
    pub max_edge: f64,
    pub min_angle_deg: f64,
    pub euler_characteristic: i64,
    pub boundary_distance_error: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshVerdict {
    pub k: usize,
    pub mesh_value: f64,
    pub model_value: f64,
    /// `Â_k(model) (1 + mesh_tol) - Â_k(mesh)`, non-negative when the bound holds.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshReport {
    pub radius: f64,
    pub max_order: usize,
    pub mesh_spectrum: Vec<f64>,
    pub boundary_length: f64,
    pub model_spectrum: Vec<f64>,
    pub mesh_tol: f64,
    pub verdicts: Vec<MeshVerdict>,
    pub all_hold: bool,
    pub pole_values: Vec<f64>,
    pub min_t: f64,
    pub max_abs_c: f64,
    pub c_range: (f64, f64),
    pub divergence_gaps: Vec<f64>,
    pub quality: MeshQuality,
}

/// Largest relative error of `Â_0..Â_K` on a flat disk whose longest edge
/// matches `max_edge`.
pub fn flat_disk_error(max_edge: f64, radius: f64, max_order: usize, solver_tol: f64) -> Result<f64> {
    let extent = CALIBRATION_MARGIN * radius;
    let rings = ((DISK_EDGE_RATIO * extent / max_edge).ceil() as usize).max(4);
    let ball = extract_extrinsic_ball(&disk(extent, rings)?, radius)?;
    let h = solve_discrete_hierarchy(&ball, max_order.max(1), solver_tol)?;
    let mesh = mesh_spectrum(&h)?;
    let model = moment_spectrum(&ModelSpace::space_form(2, 0.0)?, radius, max_order, DEFAULT_TOL)?;
    Ok((0..=max_order)
        .map(|k| (mesh.values[k] - model.values[k]).abs() / model.values[k])
        .fold(0.0, f64::max))
}

fn min_angle(ball: &super::ExtrinsicBallMesh) -> f64 {
    ball.faces()
        .iter()
        .flat_map(|f| cotangents(ball.vertices()[f[0]], ball.vertices()[f[1]], ball.vertices()[f[2]]))
        .map(|c| (1.0 / c).atan().rem_euclid(std::f64::consts::PI))
        .fold(f64::INFINITY, f64::min)
        .to_degrees()
}

/// Clip, solve, and compare against the Euclidean disk of the same radius.
/// `mesh_tol = None` calibrates it as twice the flat-disk error at the
/// mesh's resolution.
pub fn verify_mesh(
    mesh: &SurfaceMesh,
    radius: f64,
    max_order: usize,
    solver_tol: f64,
    mesh_tol: Option<f64>,
) -> Result<MeshReport> {
    let ball = extract_extrinsic_ball(mesh, radius)?;
    let h = solve_discrete_hierarchy(&ball, max_order.max(1), solver_tol)?;
    let spectrum = mesh_spectrum(&h)?;
    let model = moment_spectrum(&ModelSpace::space_form(2, 0.0)?, ball.radius(), max_order, DEFAULT_TOL)?;
    let max_edge = mesh.max_edge();
    let mesh_tol = match mesh_tol {
        Some(t) => t,
        None => 2.0 * flat_disk_error(max_edge, radius, max_order, solver_tol)?,
    };
    let verdicts: Vec<MeshVerdict> = (0..=max_order)
        .map(|k| {
            let bound = model.values[k] * (1.0 + mesh_tol);
            MeshVerdict {
                k,
                mesh_value: spectrum.values[k],
                model_value: model.values[k],
                margin: bound - spectrum.values[k],
                holds: spectrum.values[k] <= bound,
            }
        })
        .collect();
    let diag = estimate_hypothesis_fields(&ball);
    let divergence_gaps = (0..h.max_order())
        .map(|k| h.divergence_check(k).map(|c| c.relative_gap))
        .collect::<Result<Vec<_>>>()?;
    let quality = MeshQuality {
        vertices: ball.vertices().len(),
        faces: ball.faces().len(),
        interior_vertices: ball.interior_count(),
        max_edge,
        min_angle_deg: min_angle(&ball),
        euler_characteristic: ball.euler_characteristic(),
        boundary_distance_error: ball.boundary_distance_error(),
        warnings: h.warnings().to_vec(),
    };
    Ok(MeshReport {
        radius: ball.radius(),
        max_order,
        mesh_spectrum: spectrum.values[..=max_order].to_vec(),
        boundary_length: spectrum.boundary_volume,
        model_spectrum: model.values.clone(),
        mesh_tol,
        all_hold: verdicts.iter().all(|v| v.holds),
        verdicts,
        pole_values: (0..=h.max_order()).map(|k| h.at_pole(k).unwrap()).collect(),
        min_t: diag.min_t,
        max_abs_c: diag.max_abs_c,
        c_range: (diag.min_c, diag.max_c),
        divergence_gaps,
        quality,
    })
}
