//! Monte-Carlo estimates of exit-time moments from model-space balls.
//!
//! The radial part of Brownian motion with generator `Δ` on `M^m_w` solves
//! `dr = √2 dB + (m-1) η_w(r) dt`, started at `r0` and absorbed at `R`.
//! Its exit time `τ` has `E[τ^k] = ũ_k(r0)`, which makes the simulation an
//! oracle for the quadrature profiles that shares no code with them.
//!
//! Each path owns a ChaCha8 stream selected by `(seed, path index)`, and
//! sums are reduced pairwise in path order, so estimates do not depend on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::spectrum::RadialProfileSet;
use crate::warp_models::ModelSpace;
use crate::{Error, Result};

/// Below `BESSEL_FACTOR * √dt` the singular drift is integrated exactly in
/// the Euclidean tangent space.
const BESSEL_FACTOR: f64 = 10.0;
const TOTAL_STEP_BUDGET: f64 = 1e8;
/// A path survives `EXIT_TIME_CAP * R²` time units with probability below
/// `exp(-λ_1 EXIT_TIME_CAP R²)`, which is negligible for every model ball.
const EXIT_TIME_CAP: f64 = 50.0;

#[derive(Clone, Debug)]
pub struct DiffusionConfig {
    pub model: ModelSpace,
    pub radius: f64,
    pub r0: f64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub max_order: usize,
    /// Per-path step limit; `None` picks a default from `dt`, `R` and `paths`.
    pub step_budget: Option<u64>,
}

impl DiffusionConfig {
    pub fn new(model: ModelSpace, radius: f64) -> Self {
        DiffusionConfig {
            model,
            radius,
            r0: 0.0,
            dt: 1e-4,
            paths: 100_000,
            seed: 1,
            max_order: 2,
            step_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.paths == 0 {
            return Err(Error::Validation("paths must be at least 1".into()));
        }
        if !(self.radius > 0.0) || self.radius > self.model.domain_max() {
            return Err(Error::Domain(format!(
                "exit radius must lie in (0, {}], got {}",
                self.model.domain_max(),
                self.radius
            )));
        }
        if !(self.r0 >= 0.0 && self.r0 < self.radius) {
            return Err(Error::Validation(format!(
                "start radius must lie in [0, {}), got {}",
                self.radius, self.r0
            )));
        }
        if self.max_order == 0 {
            return Err(Error::Validation("max order must be at least 1".into()));
        }
        Ok(())
    }

    /// Steps allowed per path before the run is abandoned.
    pub fn effective_step_budget(&self) -> u64 {
        self.step_budget.unwrap_or_else(|| {
            let shared = TOTAL_STEP_BUDGET / self.paths as f64;
            let needed = EXIT_TIME_CAP * self.radius * self.radius / self.dt;
            shared.max(needed).ceil() as u64
        })
    }

    fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let scale = self.radius * self.radius;
        if self.dt > 1e-3 * scale {
            out.push(format!(
                "dt = {} is not small against R² = {scale}; expect O(dt) bias",
                self.dt
            ));
        }
        let m = self.model.dim() as f64;
        let kappa = (0..=16)
            .map(|i| 0.5 * self.radius + 0.5 * self.radius * i as f64 / 16.0)
            .filter_map(|r| self.model.radial_curvature(r).ok())
            .fold(0.0f64, |a, k| a.max(k.abs()));
        if (m - 1.0) * kappa * self.dt > 1e-2 {
            out.push(format!(
                "dt = {} is not small against the drift stiffness (m-1)|K| = {}",
                self.dt,
                (m - 1.0) * kappa
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub mean: f64,
    pub std_error: f64,
    pub paths_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloRun {
    pub estimates: Vec<MomentEstimate>,
    pub mean_steps: f64,
    pub max_steps: u64,
    pub warnings: Vec<String>,
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

struct Stepper<'a> {
    model: &'a ModelSpace,
    m: f64,
    radius: f64,
    dt: f64,
    sigma: f64,
    r_min: f64,
}

impl Stepper<'_> {
    /// `(m-1)(η_w(r) - 1/r)`, the part of the drift left after removing the
    /// flat Bessel term.
    fn curvature_drift(&self, r: f64) -> f64 {
        if r < 1e-8 * self.radius {
            return 0.0;
        }
        let j = self.model.warping().jet(r);
        (self.m - 1.0) * (j.d1 / j.v - 1.0 / r)
    }

    fn drift(&self, r: f64) -> f64 {
        let j = self.model.warping().jet(r);
        (self.m - 1.0) * j.d1 / j.v
    }

    fn step(&self, r: f64, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        if r >= self.r_min {
            return r + self.drift(r) * self.dt + self.sigma * z;
        }
        let along = r + self.curvature_drift(r) * self.dt + self.sigma * z;
        let mut across = 0.0;
        for _ in 1..self.model.dim() {
            let y: f64 = rng.sample(StandardNormal);
            across += y * y;
        }
        (along * along + self.sigma * self.sigma * across).sqrt()
    }

    /// Exit time of one path, or `None` if the budget runs out.
    fn exit_time(&self, r0: f64, budget: u64, rng: &mut ChaCha8Rng) -> Option<(f64, u64)> {
        let mut r = r0;
        for n in 0..budget {
            let next = self.step(r, rng);
            let t = n as f64 * self.dt;
            if next >= self.radius {
                let frac = (self.radius - r) / (next - r);
                return Some((t + frac * self.dt, n + 1));
            }
            // the continuous path may have crossed R between the two samples
            let gap = (self.radius - r) * (self.radius - next);
            let crossed = (-2.0 * gap / (self.sigma * self.sigma)).exp();
            if rng.random::<f64>() < crossed {
                return Some((t + 0.5 * self.dt, n + 1));
            }
            r = next;
        }
        None
    }
}

/// Estimate `E[τ^k]`, `k = 1..=K`, for the exit time from `B^w_R` started
/// on the sphere of radius `r0`.
pub fn sample_exit_moments(cfg: &DiffusionConfig) -> Result<MonteCarloRun> {
    cfg.validate()?;
    let stepper = Stepper {
        model: &cfg.model,
        m: cfg.model.dim() as f64,
        radius: cfg.radius,
        dt: cfg.dt,
        sigma: (2.0 * cfg.dt).sqrt(),
        r_min: BESSEL_FACTOR * cfg.dt.sqrt(),
    };
    let budget = cfg.effective_step_budget();
    let results: Vec<Option<(f64, u64)>> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            stepper.exit_time(cfg.r0, budget, &mut rng)
        })
        .collect();
    if let Some(i) = results.iter().position(Option::is_none) {
        return Err(Error::Timeout(format!(
            "path {i} did not exit within {budget} steps of dt = {}",
            cfg.dt
        )));
    }
    let (times, steps): (Vec<f64>, Vec<u64>) = results.into_iter().flatten().unzip();
    let n = times.len() as f64;
    let mut estimates = Vec::with_capacity(cfg.max_order);
    for k in 1..=cfg.max_order {
        let powers: Vec<f64> = times.iter().map(|t| t.powi(k as i32)).collect();
        let mean = pairwise_sum(&powers) / n;
        let std_error = if times.len() > 1 {
            let sq: Vec<f64> = powers.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        estimates.push(MomentEstimate {
            k,
            mean,
            std_error,
            paths_used: times.len(),
        });
    }
    let steps_f: Vec<f64> = steps.iter().map(|&s| s as f64).collect();
    Ok(MonteCarloRun {
        estimates,
        mean_steps: pairwise_sum(&steps_f) / n,
        max_steps: steps.iter().copied().max().unwrap_or(0),
        warnings: cfg.warnings(),
    })
}

/// One row of a Monte-Carlo versus quadrature comparison. `z` is `None`
/// for `k = 0`, where both sides equal 1 exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZScore {
    pub k: usize,
    pub mc_mean: f64,
    pub std_err: f64,
    pub quad_value: f64,
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureComparison {
    pub run: MonteCarloRun,
    pub rows: Vec<ZScore>,
}

/// Simulate `cfg` and score it against profiles solved on the same ball.
pub fn compare_to_quadrature(cfg: &DiffusionConfig, profiles: &RadialProfileSet) -> Result<QuadratureComparison> {
    if profiles.model().id() != cfg.model.id() || profiles.model().dim() != cfg.model.dim() {
        return Err(Error::Usage(format!(
            "profiles were solved on {} but the simulation runs on {}",
            profiles.model().id(),
            cfg.model.id()
        )));
    }
    if (profiles.radius() - cfg.radius).abs() > 1e-12 * cfg.radius {
        return Err(Error::Usage(format!(
            "profiles were solved for R = {} but the simulation exits at R = {}",
            profiles.radius(),
            cfg.radius
        )));
    }
    if profiles.max_order() < cfg.max_order {
        return Err(Error::Usage(format!(
            "profiles stop at order {} but moments up to {} were requested",
            profiles.max_order(),
            cfg.max_order
        )));
    }
    let run = sample_exit_moments(cfg)?;
    let rows = z_scores_against(&run.estimates, cfg.r0, profiles)?;
    Ok(QuadratureComparison { run, rows })
}

/// Score estimates against `profiles` without checking that both describe
/// the same ball; used for negative controls.
pub fn z_scores_against(estimates: &[MomentEstimate], r0: f64, profiles: &RadialProfileSet) -> Result<Vec<ZScore>> {
    let mut rows = vec![ZScore {
        k: 0,
        mc_mean: 1.0,
        std_err: 0.0,
        quad_value: 1.0,
        z: None,
    }];
    let r = r0.min(profiles.radius());
    for e in estimates {
        let quad = profiles.value(e.k, r)?;
        let z = if e.std_error > 0.0 {
            Some((e.mean - quad) / e.std_error)
        } else {
            None
        };
        rows.push(ZScore {
            k: e.k,
            mc_mean: e.mean,
            std_err: e.std_error,
            quad_value: quad,
            z,
        });
    }
    Ok(rows)
}
