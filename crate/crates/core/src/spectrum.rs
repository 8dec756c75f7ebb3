//! Exit-time moment hierarchy on geodesic balls of model spaces.
//!
//! On `B^w_R` the moments are radial and solve
//! `ũ_k'' + (m-1)(w'/w) ũ_k' = -k ũ_{k-1}` with `ũ_k(R) = 0`, `ũ_0 ≡ 1`.
//! Integrating once,
//!
//! ```text
//! ũ_k'(r) = -k ∫_0^r w^{m-1} ũ_{k-1} / w^{m-1}(r),    ũ_k(r) = -∫_r^R ũ_k'
//! ```
//!
//! and the isoperimetric exit moment spectrum is
//! `Â_k = ∫_B ũ_k / Vol(∂B) = -ũ_{k+1}'(R) / (k+1)`.
//!
//! Every level is held on a shared piecewise Chebyshev grid, so the inner
//! antiderivative of one level is computed once and reused by the next.

use serde::Serialize;

use crate::chebyshev::{Panels, PiecewiseCheb};
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::warp_models::ModelSpace;

/// Default relative accuracy of the profiles.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default highest order when a caller does not choose one.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Below this fraction of `R` the slope uses its series limit
/// `-k r ũ_{k-1}(0) / m`.
const SERIES_THRESHOLD: f64 = 1e-6;
const INITIAL_PANELS: usize = 4;
const MAX_PANELS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Volume integral of `ũ_k` divided by the boundary area.
    Quadrature,
    /// `-ũ'_{k+1}(R)/(k+1)` from the integral form of the slope.
    BoundaryDerivative,
    Mesh,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Quadrature => "quadrature",
            Provenance::BoundaryDerivative => "boundary_derivative",
            Provenance::Mesh => "mesh",
            Provenance::MonteCarlo => "monte_carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        Some(match s {
            "quadrature" => Provenance::Quadrature,
            "boundary_derivative" => Provenance::BoundaryDerivative,
            "mesh" => Provenance::Mesh,
            "monte_carlo" => Provenance::MonteCarlo,
            _ => return None,
        })
    }
}

/// `Â_0..Â_K` of one domain, with the raw moments
/// `A_{1,k} = ∫ u_k = Â_k · Vol(∂D)` alongside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSpectrum {
    pub radius: f64,
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub boundary_volume: f64,
    pub provenance: Provenance,
}

impl MomentSpectrum {
    pub fn new(radius: f64, values: Vec<f64>, boundary_volume: f64, provenance: Provenance) -> Self {
        let raw = values.iter().map(|v| v * boundary_volume).collect();
        MomentSpectrum {
            radius,
            values,
            raw,
            boundary_volume,
            provenance,
        }
    }

    pub fn max_order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }
}

/// Solved profiles `ũ_0..ũ_K` on `[0, R]`.
#[derive(Clone, Debug)]
pub struct RadialProfileSet {
    model: ModelSpace,
    radius: f64,
    tol: f64,
    density: PiecewiseCheb,
    profiles: Vec<PiecewiseCheb>,
    slopes: Vec<PiecewiseCheb>,
    // ∫_0^R w^{m-1} ũ_{k-1}, index k (entry 0 unused)
    inner_at_boundary: Vec<f64>,
    error_estimates: Vec<f64>,
}

/// Solve the exit-moment hierarchy up to order `max_order` on `B^w_R`.
pub fn solve_hierarchy(model: &ModelSpace, radius: f64, max_order: usize, tol: f64) -> Result<RadialProfileSet> {
    if !(radius > 0.0) || radius > model.domain_max() {
        return Err(Error::Domain(format!(
            "ball radius must lie in (0, {}], got {radius}",
            model.domain_max()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let threshold = tol.max(1e-14);
    let mut panels = Panels::uniform(0.0, radius, INITIAL_PANELS);
    loop {
        let set = build(model, radius, max_order, tol, panels.clone())?;
        let mut marks = vec![false; panels.len()];
        for p in 0..panels.len() {
            let vals = set.density.panel_values(p);
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if crate::chebyshev::tail(vals) > threshold * scale {
                marks[p] = true;
            }
        }
        for k in 1..=max_order {
            let scale = set.profiles[k].max_abs();
            set.profiles[k].mark_unresolved(threshold * scale, &mut marks);
            let scale = set.slopes[k].max_abs();
            set.slopes[k].mark_unresolved(threshold * scale, &mut marks);
        }
        if !marks.iter().any(|&m| m) {
            return Ok(set);
        }
        if panels.len() * 2 > MAX_PANELS {
            let worst = marks.iter().position(|&m| m).unwrap_or(0);
            let (lo, hi) = panels.bounds(worst);
            return Err(Error::numeric(
                format!("profiles unresolved with {} panels", panels.len()),
                lo,
                hi,
            ));
        }
        panels = panels.refine(&marks);
    }
}

fn build(model: &ModelSpace, radius: f64, max_order: usize, tol: f64, panels: Panels) -> Result<RadialProfileSet> {
    let m = model.dim() as f64;
    let density = PiecewiseCheb::from_fn(panels.clone(), |r| model.sphere_density(r));
    if density.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("warping function not finite on the ball", 0.0, radius));
    }
    let nodes = panels.nodes();
    let ones = PiecewiseCheb::from_values(panels.clone(), vec![1.0; nodes.len()]);
    let zeros = PiecewiseCheb::from_values(panels.clone(), vec![0.0; nodes.len()]);
    let mut profiles = vec![ones];
    let mut slopes = vec![zeros];
    let mut inner_at_boundary = vec![0.0];
    let quad = Quadrature::relative(1e-12);
    let (_, first_end) = panels.bounds(0);

    for k in 1..=max_order {
        let prev = &profiles[k - 1];
        let kf = k as f64;
        let integrand: Vec<f64> = density.values().iter().zip(prev.values()).map(|(d, u)| d * u).collect();
        let inner = PiecewiseCheb::from_values(panels.clone(), integrand).cumulative();
        let prev_at_0 = prev.first();

        let mut slope = Vec::with_capacity(nodes.len());
        for (i, &r) in nodes.iter().enumerate() {
            let s = if r < SERIES_THRESHOLD * radius {
                -kf * r * prev_at_0 / m
            } else if r < first_end {
                // r ∫_0^1 (w(rx)/w(r))^{m-1} ũ_{k-1}(rx) dx keeps full relative
                // accuracy where the inner integral is tiny
                let wr = model.warping().eval(r);
                let mean = quad.value(
                    |x| (model.warping().eval(r * x) / wr).powi(model.dim() as i32 - 1) * prev.eval(r * x),
                    0.0,
                    1.0,
                )?;
                -kf * r * mean
            } else {
                -kf * inner.values()[i] / density.values()[i]
            };
            slope.push(s);
        }
        let slope = PiecewiseCheb::from_values(panels.clone(), slope);
        let drop = slope.cumulative();
        let total = drop.last();
        let values: Vec<f64> = drop.values().iter().map(|c| c - total).collect();
        let mut profile = PiecewiseCheb::from_values(panels.clone(), values);
        // exact Dirichlet data at the boundary node
        let n = profile.values().len();
        let mut vals = profile.values().to_vec();
        vals[n - 1] = 0.0;
        profile = PiecewiseCheb::from_values(panels.clone(), vals);

        inner_at_boundary.push(inner.last());
        profiles.push(profile);
        slopes.push(slope);
    }

    let error_estimates = profiles
        .iter()
        .map(|p| {
            let scale = p.first().abs().max(f64::MIN_POSITIVE);
            p.worst_tail().0 / scale
        })
        .collect();

    Ok(RadialProfileSet {
        model: model.clone(),
        radius,
        tol,
        density,
        profiles,
        slopes,
        inner_at_boundary,
        error_estimates,
    })
}

impl RadialProfileSet {
    pub fn model(&self) -> &ModelSpace {
        &self.model
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_order(&self) -> usize {
        self.profiles.len() - 1
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Number of Chebyshev panels the adaptive grid settled on.
    pub fn panel_count(&self) -> usize {
        self.density.panels().len()
    }

    /// Estimated relative truncation error of `ũ_k`.
    pub fn error_estimate(&self, k: usize) -> f64 {
        self.error_estimates[k]
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.max_order() {
            return Err(Error::Usage(format!(
                "order {k} exceeds the solved maximum {}",
                self.max_order()
            )));
        }
        Ok(())
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= 0.0 && r <= self.radius) {
            return Err(Error::Domain(format!(
                "profiles live on [0, {}], got r = {r}",
                self.radius
            )));
        }
        Ok(())
    }

    /// `ũ_k(r)`.
    pub fn value(&self, k: usize, r: f64) -> Result<f64> {
        self.check_order(k)?;
        self.check_radius(r)?;
        if k == 0 {
            return Ok(1.0);
        }
        if r == self.radius {
            return Ok(0.0);
        }
        Ok(self.profiles[k].eval(r))
    }

    /// `ũ_k'(r)`.
    pub fn derivative(&self, k: usize, r: f64) -> Result<f64> {
        self.check_order(k)?;
        self.check_radius(r)?;
        if k == 0 {
            return Ok(0.0);
        }
        if r == self.radius {
            return Ok(self.boundary_slope(k));
        }
        Ok(self.slopes[k].eval(r))
    }

    /// `ũ_k'(R) = -k ∫_0^R w^{m-1} ũ_{k-1} / w^{m-1}(R)`.
    pub fn boundary_slope(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        -(k as f64) * self.inner_at_boundary[k] / self.model.sphere_density(self.radius)
    }

    /// `Â_k = -ũ'_{k+1}(R) / (k+1)`.
    pub fn exit_moment(&self, k: usize) -> Result<f64> {
        if k + 1 > self.max_order() {
            return Err(Error::Usage(format!(
                "Â_{k} needs ũ_{} but the hierarchy stops at order {}",
                k + 1,
                self.max_order()
            )));
        }
        Ok(-self.boundary_slope(k + 1) / (k + 1) as f64)
    }

    /// `Â_0..Â_{K-1}` by the boundary-derivative route.
    pub fn spectrum(&self) -> MomentSpectrum {
        let values = (0..self.max_order()).map(|k| self.exit_moment(k).unwrap()).collect();
        MomentSpectrum::new(
            self.radius,
            values,
            self.sphere_volume(),
            Provenance::BoundaryDerivative,
        )
    }

    fn sphere_volume(&self) -> f64 {
        self.model.omega() * self.model.sphere_density(self.radius)
    }

    /// `∫_0^R ũ_k w^{m-1} / w^{m-1}(R)` by independent adaptive quadrature
    /// of the interpolated profile.
    pub fn volume_moment(&self, k: usize) -> Result<f64> {
        self.check_order(k)?;
        let quad = Quadrature::relative(1e-12);
        let integral = quad.value(
            |t| self.model.sphere_density(t) * self.profiles[k].eval(t),
            0.0,
            self.radius,
        )?;
        Ok(integral / self.model.sphere_density(self.radius))
    }

    /// `Â_0..Â_K` by the volume-integral route.
    pub fn volume_spectrum(&self) -> Result<MomentSpectrum> {
        let values = (0..=self.max_order())
            .map(|k| self.volume_moment(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentSpectrum::new(
            self.radius,
            values,
            self.sphere_volume(),
            Provenance::Quadrature,
        ))
    }

    /// Compare the two routes to `Â_k`.
    pub fn verify_divergence_identity(&self, k: usize, tol: f64) -> Result<DivergenceCheck> {
        let boundary = self.exit_moment(k)?;
        let volume = self.volume_moment(k)?;
        let residual = (volume - boundary).abs() / boundary.abs().max(f64::MIN_POSITIVE);
        Ok(DivergenceCheck {
            volume,
            boundary,
            residual,
            passed: residual <= tol,
        })
    }

    /// Max over `grid` of `|ũ_k'' + (m-1)(w'/w)ũ_k' + k ũ_{k-1}|`, with
    /// `ũ_k''` from centered differences of the slope, normalised by
    /// `k max|ũ_{k-1}|`.
    pub fn verify_ode_residual(&self, k: usize, grid: &[f64]) -> Result<f64> {
        if k == 0 {
            return Err(Error::Usage("the ODE residual starts at order 1".into()));
        }
        self.check_order(k)?;
        let m = self.model.dim() as f64;
        let scale = k as f64 * self.profiles[k - 1].max_abs();
        let mut worst = 0.0f64;
        for &r in grid {
            if !(r > 0.0 && r < self.radius) {
                return Err(Error::Domain(format!(
                    "ODE residual grid must lie in (0, {}), got {r}",
                    self.radius
                )));
            }
            let h = (1e-5 * self.radius).min(0.5 * r).min(0.5 * (self.radius - r));
            let second = (self.slopes[k].eval(r + h) - self.slopes[k].eval(r - h)) / (2.0 * h);
            let eta = self.model.eta(r)?;
            let res = second + (m - 1.0) * eta * self.slopes[k].eval(r) + k as f64 * self.profiles[k - 1].eval(r);
            worst = worst.max(res.abs());
        }
        Ok(worst / scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceCheck {
    pub volume: f64,
    pub boundary: f64,
    pub residual: f64,
    pub passed: bool,
}

/// `Â_0..Â_K` of `B^w_R`, solving the hierarchy to order `K+1`.
pub fn moment_spectrum(model: &ModelSpace, radius: f64, max_order: usize, tol: f64) -> Result<MomentSpectrum> {
    Ok(solve_hierarchy(model, radius, max_order + 1, tol)?.spectrum())
}

/// Evenly spaced interior grid of `n` points in `(0, R)`.
pub fn interior_grid(radius: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| radius * i as f64 / (n + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(m: usize) -> ModelSpace {
        ModelSpace::space_form(m, 0.0).unwrap()
    }

    fn hyp(m: usize, b: f64) -> ModelSpace {
        ModelSpace::space_form(m, b).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn euclidean_disk_first_two_levels() {
        let set = solve_hierarchy(&flat(2), 1.0, 3, DEFAULT_TOL).unwrap();
        for r in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let u1 = (1.0 - r * r) / 4.0;
            assert!((set.value(1, r).unwrap() - u1).abs() < 1e-14, "r={r}");
            // (3 - 4r^2 + r^4) / 32 solves u2'' + u2'/r = -2 u1
            let u2 = (3.0 - 4.0 * r * r + r.powi(4)) / 32.0;
            assert!((set.value(2, r).unwrap() - u2).abs() < 1e-14, "r={r}");
        }
        assert!(rel(set.value(1, 0.0).unwrap(), 0.25) < 1e-14);
        assert!(rel(set.exit_moment(0).unwrap(), 0.5) < 1e-14);
        assert!(rel(set.exit_moment(1).unwrap(), 0.0625) < 1e-13);
    }

    #[test]
    fn order_zero_is_constant() {
        let set = solve_hierarchy(&hyp(3, -1.0), 0.8, 0, DEFAULT_TOL).unwrap();
        assert_eq!(set.value(0, 0.3).unwrap(), 1.0);
        assert_eq!(set.derivative(0, 0.3).unwrap(), 0.0);
        assert!(matches!(set.exit_moment(0), Err(Error::Usage(_))));
    }

    #[test]
    fn hyperbolic_plane_mean_exit_time() {
        let set = solve_hierarchy(&hyp(2, -1.0), 1.0, 1, DEFAULT_TOL).unwrap();
        let exact = 2.0 * 0.5f64.cosh().ln();
        assert!(rel(set.value(1, 0.0).unwrap(), exact) < 1e-13);
        assert!(rel(set.exit_moment(0).unwrap(), 0.5f64.tanh()) < 1e-13);
    }

    #[test]
    fn regularity_and_dirichlet_data() {
        let set = solve_hierarchy(&hyp(3, -4.0), 1.5, 4, DEFAULT_TOL).unwrap();
        for k in 1..=4 {
            assert_eq!(set.value(k, 1.5).unwrap(), 0.0);
            assert_eq!(set.derivative(k, 0.0).unwrap(), 0.0);
            assert!(set.derivative(k, 1e-8).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn divergence_identity_examples() {
        let set = solve_hierarchy(&flat(2), 1.0, 2, DEFAULT_TOL).unwrap();
        let c = set.verify_divergence_identity(0, 1e-9).unwrap();
        assert!(c.passed && rel(c.volume, 0.5) < 1e-12 && rel(c.boundary, 0.5) < 1e-12);
        let c = set.verify_divergence_identity(1, 1e-9).unwrap();
        assert!(c.passed && rel(c.volume, 0.0625) < 1e-12);
        let set = solve_hierarchy(&hyp(3, -1.0), 0.8, 3, DEFAULT_TOL).unwrap();
        let c = set.verify_divergence_identity(2, 1e-8).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn ode_residual_is_small() {
        let grid = interior_grid(1.0, 50);
        let set = solve_hierarchy(&flat(2), 1.0, 3, DEFAULT_TOL).unwrap();
        assert!(set.verify_ode_residual(1, &grid).unwrap() < 1e-6);
        let set = solve_hierarchy(&hyp(2, -1.0), 1.0, 3, DEFAULT_TOL).unwrap();
        for k in 1..=3 {
            let res = set.verify_ode_residual(k, &grid).unwrap();
            assert!(res.is_finite() && res < 1e-6, "k={k} res={res}");
        }
        assert!(set.verify_ode_residual(0, &grid).is_err());
        assert!(set.verify_ode_residual(1, &[1.0]).is_err());
    }

    #[test]
    fn usage_and_domain_errors() {
        let m = hyp(2, 1.0);
        assert!(matches!(
            solve_hierarchy(&m, 4.0, 2, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            solve_hierarchy(&m, 0.0, 2, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(solve_hierarchy(&m, 1.0, 2, 0.0).is_err());
        let set = solve_hierarchy(&m, 1.0, 2, DEFAULT_TOL).unwrap();
        assert!(matches!(set.value(3, 0.5), Err(Error::Usage(_))));
        assert!(matches!(set.value(1, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_carries_raw_moments() {
        let s = moment_spectrum(&flat(2), 1.0, 1, DEFAULT_TOL).unwrap();
        assert_eq!(s.values.len(), 2);
        assert_eq!(s.provenance, Provenance::BoundaryDerivative);
        // A_{1,1} = torsional rigidity of the unit disk, π/8
        assert!(rel(s.raw[1], std::f64::consts::PI / 8.0) < 1e-12);
        for p in [
            Provenance::Quadrature,
            Provenance::BoundaryDerivative,
            Provenance::Mesh,
            Provenance::MonteCarlo,
        ] {
            assert_eq!(Provenance::parse(p.as_str()), Some(p));
        }
    }
}
