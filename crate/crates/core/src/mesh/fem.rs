//! Linear finite elements for `Δu_k + k u_{k-1} = 0`, `u_k = 0` on `∂D_R`.

use serde::Serialize;

use super::{cross, dot, norm, sub, ExtrinsicBallMesh};
use crate::spectrum::{MomentSpectrum, Provenance};
use crate::{Error, Result};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sum duplicate `(row, col, value)` triplets into a square matrix.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_start[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        CsrMatrix {
            n,
            row_start,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[i]..self.row_start[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// The block on the first `k` rows and columns.
    pub fn leading_block(&self, k: usize) -> CsrMatrix {
        let triplets = (0..k)
            .flat_map(|i| self.row(i).filter(|&(j, _)| j < k).map(move |(j, v)| (i, j, v)))
            .collect();
        CsrMatrix::from_triplets(k, triplets)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite system, started from zero.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.dim();
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::numeric(
            format!("stiffness matrix is singular: row {i} has diagonal {}", diag[i]),
            0.0,
            0.0,
        ));
    }
    let b_norm = norm_of(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = dot_of(&r, &z);
    let max_iter = 20 * n + 100;
    for it in 1..=max_iter {
        a.mul(&p, &mut ap);
        let pap = dot_of(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::numeric(
                format!("stiffness matrix is not positive definite (pᵀAp = {pap:e})"),
                0.0,
                0.0,
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm_of(&r) / b_norm;
        if res <= tol {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    relative_residual: res,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot_of(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::numeric(
        format!("conjugate gradients did not reach {tol:e} in {max_iter} iterations"),
        0.0,
        0.0,
    ))
}

fn dot_of(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_of(a: &[f64]) -> f64 {
    dot_of(a, a).sqrt()
}

/// Cotangents of the angles of triangle `(a, b, c)` at `a`, `b`, `c`.
pub(crate) fn cotangents(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let area2 = norm(cross(sub(b, a), sub(c, a))).max(f64::MIN_POSITIVE);
    [
        dot(sub(b, a), sub(c, a)) / area2,
        dot(sub(c, b), sub(a, b)) / area2,
        dot(sub(a, c), sub(b, c)) / area2,
    ]
}

/// Cotangent stiffness matrix and lumped (one third of each face) mass.
pub(crate) fn assemble(vertices: &[[f64; 3]], faces: &[[usize; 3]]) -> (CsrMatrix, Vec<f64>) {
    let n = vertices.len();
    let mut triplets = Vec::with_capacity(faces.len() * 9);
    let mut mass = vec![0.0; n];
    for f in faces {
        let x = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
        let cot = cotangents(x[0], x[1], x[2]);
        let area = 0.5 * norm(cross(sub(x[1], x[0]), sub(x[2], x[0])));
        for i in 0..3 {
            let (j, k) = (f[(i + 1) % 3], f[(i + 2) % 3]);
            let w = 0.5 * cot[i];
            triplets.push((j, k, -w));
            triplets.push((k, j, -w));
            triplets.push((j, j, w));
            triplets.push((k, k, w));
            mass[f[i]] += area / 3.0;
        }
    }
    (CsrMatrix::from_triplets(n, triplets), mass)
}

/// Nodal exit-moment fields `u_0..u_K` on a clipped ball.
#[derive(Clone, Debug)]
pub struct DiscreteHierarchy {
    ball: ExtrinsicBallMesh,
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    values: Vec<Vec<f64>>,
    tol: f64,
    stats: Vec<SolveStats>,
    warnings: Vec<String>,
}

/// Flux form of the divergence identity on the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshDivergenceCheck {
    pub k: usize,
    /// `Σ_i M_i u_k(i)` over interior nodes.
    pub volume: f64,
    /// `-Σ_b (L u_{k+1})_b / (k+1)` over boundary nodes.
    pub flux: f64,
    pub relative_gap: f64,
}

pub fn solve_discrete_hierarchy(ball: &ExtrinsicBallMesh, max_order: usize, tol: f64) -> Result<DiscreteHierarchy> {
    if max_order == 0 {
        return Err(Error::Usage("the discrete hierarchy needs order K >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Usage(format!("solver tolerance must be positive, got {tol}")));
    }
    let n = ball.vertices().len();
    let ni = ball.interior_count();
    if ni == 0 {
        return Err(Error::Domain("the extrinsic ball has no interior vertices".into()));
    }
    let (stiffness, mass) = assemble(ball.vertices(), ball.faces());
    let mut warnings = Vec::new();
    let negative = (0..n)
        .flat_map(|i| stiffness.row(i).filter(move |&(j, v)| j > i && v > 0.0))
        .count();
    if negative > 0 {
        warnings.push(format!("{negative} edge(s) have negative cotangent weights"));
    }
    let block = stiffness.leading_block(ni);
    let mut values = vec![vec![1.0; n]];
    let mut stats = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let prev = &values[k - 1];
        let rhs: Vec<f64> = (0..ni).map(|i| k as f64 * mass[i] * prev[i]).collect();
        let (u, s) = solve_spd(&block, &rhs, tol)?;
        let nonpositive = u.iter().filter(|&&v| v <= 0.0).count();
        if nonpositive > 0 {
            warnings.push(format!(
                "u_{k} is not positive at {nonpositive} interior node(s); the mesh violates the discrete maximum principle"
            ));
        }
        let mut full = u;
        full.resize(n, 0.0);
        values.push(full);
        stats.push(s);
    }
    Ok(DiscreteHierarchy {
        ball: ball.clone(),
        stiffness,
        mass,
        values,
        tol,
        stats,
        warnings,
    })
}

impl DiscreteHierarchy {
    pub fn ball(&self) -> &ExtrinsicBallMesh {
        &self.ball
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn field(&self, k: usize) -> Option<&[f64]> {
        self.values.get(k).map(Vec::as_slice)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn solve_stats(&self) -> &[SolveStats] {
        &self.stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `u_k` at the pole.
    pub fn at_pole(&self, k: usize) -> Option<f64> {
        self.field(k).map(|u| u[self.ball.pole()])
    }

    /// `∫ u_k dV ≈ Σ_i M_i u_k(i)`.
    pub fn integral(&self, k: usize) -> Option<f64> {
        self.field(k)
            .map(|u| u.iter().zip(&self.mass).map(|(a, b)| a * b).sum())
    }

    pub fn divergence_check(&self, k: usize) -> Result<MeshDivergenceCheck> {
        if k + 1 > self.max_order() {
            return Err(Error::Usage(format!(
                "the flux of u_{} is needed but the hierarchy stops at {}",
                k + 1,
                self.max_order()
            )));
        }
        let ni = self.ball.interior_count();
        let next = &self.values[k + 1];
        let flux: f64 = -(ni..self.stiffness.dim())
            .map(|b| self.stiffness.row(b).map(|(j, v)| v * next[j]).sum::<f64>())
            .sum::<f64>()
            / (k + 1) as f64;
        let volume: f64 = (0..ni).map(|i| self.mass[i] * self.values[k][i]).sum();
        Ok(MeshDivergenceCheck {
            k,
            volume,
            flux,
            relative_gap: (volume - flux).abs() / volume.abs().max(f64::MIN_POSITIVE),
        })
    }
}

/// `Â_k = (u_kᵀ M 1) / |∂D_R|` for `k = 0..=K`.
pub fn mesh_spectrum(h: &DiscreteHierarchy) -> Result<MomentSpectrum> {
    let length = h.ball.boundary_length();
    if !(length > 0.0) {
        return Err(Error::Domain("the extrinsic ball has zero boundary length".into()));
    }
    let values = (0..=h.max_order()).map(|k| h.integral(k).unwrap() / length).collect();
    Ok(MomentSpectrum::new(h.ball.radius(), values, length, Provenance::Mesh))
}
