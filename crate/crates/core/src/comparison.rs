//! Isoperimetric comparison spaces `C^m_{w,g,h}` and the checks around
//! them.
//!
//! Given an ambient curvature controller `w`, a radial tangency bound `g`
//! and a radial mean-convexity bound `h`, the comparison space is the
//! `W`-model with
//!
//! ```text
//! s(r) = ∫_0^r dt / g(t)
//! (Λ w g)' = m Λ (w' - h w) / g,       (Λ^{1/(m-1)})'(0) = 1
//! W(s) = Λ(r(s))^{1/(m-1)}
//! ```
//!
//! The `Λ` equation is singular at the pole. Writing `Λ w g = r^m F(r)`,
//! `ln F` has the finite derivative `m(w' - h w)/(w g²) - m/r` and
//! `F(0) = 1` realises the boundary condition.

use std::sync::Arc;

use serde::Serialize;

use crate::chebyshev::PiecewiseCheb;
use crate::dual::Jet;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::radial::{RadialFn, SharedRadial};
use crate::spectrum::{solve_hierarchy, MomentSpectrum, RadialProfileSet};
use crate::warp_models::{ModelSpace, WarpingFunction};

/// Default number of balance / lemma grid points.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// The regularised `ln F` integrand is extrapolated below `EPS_FRACTION · R`.
const EPS_FRACTION: f64 = 1e-6;
const MAX_PANELS: usize = 4096;

/// Which comparison theorem the bounds feed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Lower bound on the spectrum, general tangency bound `g`, `h = h₁`.
    Below,
    /// Upper bound on the spectrum, `g ≡ 1`, `h = h₂`.
    Above,
}

/// Tangency bound `g` and mean-convexity bound `h`.
#[derive(Clone, Debug)]
pub struct BoundingFunctions {
    g: SharedRadial,
    h: SharedRadial,
    side: Side,
    warnings: Vec<String>,
}

impl BoundingFunctions {
    pub fn below(g: SharedRadial, h: SharedRadial) -> Self {
        BoundingFunctions {
            g,
            h,
            side: Side::Below,
            warnings: Vec::new(),
        }
    }

    pub fn above(h: SharedRadial) -> Self {
        BoundingFunctions {
            g: crate::radial::constant(1.0),
            h,
            side: Side::Above,
            warnings: Vec::new(),
        }
    }

    /// General constructor; for [`Side::Above`] a supplied `g` is replaced
    /// by `g ≡ 1` and a warning is recorded.
    pub fn new(g: SharedRadial, h: SharedRadial, side: Side) -> Self {
        match side {
            Side::Below => BoundingFunctions::below(g, h),
            Side::Above => {
                let mut b = BoundingFunctions::above(h);
                let forced = (0..=16).any(|i| (g.value(i as f64 / 16.0) - 1.0).abs() > 0.0);
                if forced {
                    b.warnings.push(format!(
                        "tangency bound '{}' replaced by g = 1 for an upper-bound constellation",
                        g.label()
                    ));
                }
                b
            }
        }
    }

    pub fn g(&self) -> &SharedRadial {
        &self.g
    }

    pub fn h(&self) -> &SharedRadial {
        &self.h
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `g(0) = 1` and `0 < g ≤ 1` on a grid over `[0, R]`; `h` finite there.
    pub fn validate(&self, radius: f64) -> Result<()> {
        let g0 = self.g.value(0.0);
        if (g0 - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "tangency bound must satisfy g(0) = 1, got {g0}"
            )));
        }
        for i in 0..=512 {
            let r = radius * i as f64 / 512.0;
            let g = self.g.jet(r);
            if !g.is_finite() || g.v <= 0.0 {
                return Err(Error::Validation(format!(
                    "tangency bound must be positive, g({r}) = {}",
                    g.v
                )));
            }
            if g.v > 1.0 + 1e-12 {
                return Err(Error::Validation(format!(
                    "tangency bound must not exceed 1, g({r}) = {}",
                    g.v
                )));
            }
            if i > 0 && !self.h.jet(r).is_finite() {
                return Err(Error::Validation(format!(
                    "mean-convexity bound is not finite at r = {r}"
                )));
            }
        }
        Ok(())
    }
}

/// `s(r) = ∫_0^r dt/g(t)` and its inverse.
#[derive(Clone, Debug)]
pub struct StretchingMap {
    g: SharedRadial,
    forward: PiecewiseCheb,
    radius: f64,
}

/// Build the stretching map of `g` on `[0, R]`.
pub fn build_stretching(g: &SharedRadial, radius: f64, tol: f64) -> Result<StretchingMap> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    for i in 0..=512 {
        let r = radius * i as f64 / 512.0;
        let v = g.value(r);
        if !(v > 0.0) {
            return Err(Error::Validation(format!(
                "tangency bound must be positive, g({r}) = {v}"
            )));
        }
    }
    let speed = PiecewiseCheb::adaptive(0.0, radius, |r| 1.0 / g.value(r), tol, |_, _| 0.0, MAX_PANELS)?;
    Ok(StretchingMap {
        g: g.clone(),
        forward: speed.cumulative(),
        radius,
    })
}

impl StretchingMap {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `s(R)`.
    pub fn stretched_radius(&self) -> f64 {
        self.forward.last()
    }

    pub fn forward(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.forward.eval(r.min(self.radius))
    }

    /// `s'(r) = 1/g(r)`.
    pub fn speed(&self, r: f64) -> f64 {
        1.0 / self.g.value(r)
    }

    /// `r(s)` by safeguarded Newton iteration on the monotone map.
    pub fn inverse(&self, s: f64) -> f64 {
        let s_max = self.stretched_radius();
        if s <= 0.0 {
            return 0.0;
        }
        if s >= s_max {
            return self.radius;
        }
        let (mut lo, mut hi) = (0.0, self.radius);
        let mut r = (s * self.radius / s_max).clamp(lo, hi);
        for _ in 0..100 {
            let f = self.forward.eval(r) - s;
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = f * self.g.value(r);
            let mut next = r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-15 * self.radius {
                return next;
            }
            r = next;
        }
        r
    }
}

/// Analytic jet of `W` composed with the inverse stretching.
struct ComparisonWarp {
    w: WarpingFunction,
    g: SharedRadial,
    h: SharedRadial,
    m: f64,
    log_f: PiecewiseCheb,
    stretch: StretchingMap,
}

impl ComparisonWarp {
    fn lambda(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        r.powf(self.m) * self.log_f.eval(r).exp() / (self.w.eval(r) * self.g.value(r))
    }

    /// `(ln Λ)'` and `(ln Λ)''` at `r > 0`.
    fn log_lambda_derivs(&self, r: f64) -> (f64, f64) {
        let m = self.m;
        let w = self.w.jet(r);
        let g = self.g.jet(r);
        let h = self.h.jet(r);
        let phi = w.d1 - h.v * w.v;
        let dphi = w.d2 - h.d1 * w.v - h.v * w.d1;
        let den = w.v * g.v * g.v;
        let dden = w.d1 * g.v * g.v + 2.0 * w.v * g.v * g.d1;
        let l1 = m * phi / den - w.d1 / w.v - g.d1 / g.v;
        let l2 = m * (dphi / den - phi * dden / (den * den))
            - (w.d2 / w.v - (w.d1 / w.v).powi(2))
            - (g.d2 / g.v - (g.d1 / g.v).powi(2));
        (l1, l2)
    }

    fn jet_at_radius(&self, r: f64) -> Jet {
        let k = self.m - 1.0;
        let big_w = self.lambda(r).powf(1.0 / k);
        let (l1, l2) = self.log_lambda_derivs(r);
        let g = self.g.jet(r);
        let w_r = big_w * l1 / k;
        let d1 = w_r * g.v;
        let d2 = g.v / k * (w_r * l1 * g.v + big_w * l2 * g.v + big_w * l1 * g.d1);
        Jet::new(big_w, d1, d2)
    }
}

impl RadialFn for ComparisonWarp {
    fn jet(&self, s: f64) -> Jet {
        if s <= 0.0 {
            // W(0) = 0, W'(0) = 1; W''(0) by its limit
            let tiny = 1e-7 * self.stretch.radius();
            let j = self.jet_at_radius(tiny);
            return Jet::new(0.0, 1.0, j.d2);
        }
        self.jet_at_radius(self.stretch.inverse(s))
    }

    fn label(&self) -> String {
        format!("C[{}; g={}; h={}]", self.w.id(), self.g.label(), self.h.label())
    }
}

/// The comparison space `C^m_{w,g,h}` over `[0, s(R)]`.
#[derive(Clone)]
pub struct ComparisonSpace {
    warp: Arc<ComparisonWarp>,
    bounds: BoundingFunctions,
    radius: f64,
    model: ModelSpace,
}

impl std::fmt::Debug for ComparisonSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComparisonSpace")
            .field("label", &self.warp.label())
            .field("dim", &self.model.dim())
            .field("radius", &self.radius)
            .field("stretched_radius", &self.stretched_radius())
            .finish()
    }
}

/// Construct `C^m_{w,g,h}` on `[0, R]`.
pub fn build_comparison_space(
    w: &WarpingFunction,
    bounds: &BoundingFunctions,
    m: usize,
    radius: f64,
    tol: f64,
) -> Result<ComparisonSpace> {
    if m < 2 {
        return Err(Error::Validation(format!("dimension must be at least 2, got {m}")));
    }
    if !(radius > 0.0) || radius > w.domain_max() {
        return Err(Error::Domain(format!(
            "radius must lie in (0, {}], got {radius}",
            w.domain_max()
        )));
    }
    bounds.validate(radius)?;
    let mf = m as f64;
    let g = bounds.g().clone();
    let h = bounds.h().clone();

    let psi = |t: f64| {
        let wj = w.jet(t);
        let gv = g.value(t);
        mf * (wj.d1 - h.value(t) * wj.v) / (wj.v * gv * gv) - mf / t
    };
    let eps = EPS_FRACTION * radius;
    let (p1, p2) = (psi(eps), psi(2.0 * eps));
    if !(p1.is_finite() && p2.is_finite()) || p1.abs() * eps > 1e-3 {
        return Err(Error::Validation(format!(
            "mean-convexity bound '{}' blows up at the pole; (w' - h w)/(w g²) - 1/r is not integrable",
            h.label()
        )));
    }
    let regularised = |t: f64| {
        if t < eps {
            // linear extrapolation from [eps, 2 eps]
            p1 + (p2 - p1) * (t - eps) / eps
        } else {
            psi(t)
        }
    };
    // both terms of psi are of size m / t and cancel near the pole
    let noise = |lo: f64, _hi: f64| 64.0 * f64::EPSILON * mf / lo.max(eps) + tol / radius;
    let integrand = PiecewiseCheb::adaptive(0.0, radius, regularised, tol, noise, MAX_PANELS)?;
    let log_f = integrand.cumulative();
    let stretch = build_stretching(&g, radius, tol)?;

    let warp = Arc::new(ComparisonWarp {
        w: w.clone(),
        g: g.clone(),
        h: h.clone(),
        m: mf,
        log_f,
        stretch,
    });
    for &r in warp.log_f.panels().nodes().iter().skip(1) {
        let l = warp.lambda(r);
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::numeric(format!("Λ({r}) = {l} is not positive"), 0.0, r));
        }
    }
    let s_max = warp.stretch.stretched_radius();
    let label = warp.label();
    let model = ModelSpace::new(m, WarpingFunction::trusted(label, warp.clone(), s_max))?;
    Ok(ComparisonSpace {
        warp,
        bounds: bounds.clone(),
        radius,
        model,
    })
}

impl ComparisonSpace {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `s(R)`.
    pub fn stretched_radius(&self) -> f64 {
        self.warp.stretch.stretched_radius()
    }

    pub fn stretching(&self) -> &StretchingMap {
        &self.warp.stretch
    }

    pub fn bounds(&self) -> &BoundingFunctions {
        &self.bounds
    }

    pub fn base_warping(&self) -> &WarpingFunction {
        &self.warp.w
    }

    /// The comparison space as an ordinary model space on `[0, s(R)]`.
    pub fn as_model(&self) -> &ModelSpace {
        &self.model
    }

    pub fn lambda(&self, r: f64) -> f64 {
        self.warp.lambda(r)
    }

    /// `W(s)`.
    pub fn warping_at(&self, s: f64) -> f64 {
        self.model.warping().eval(s)
    }

    pub fn label(&self) -> String {
        self.warp.label()
    }

    /// Max over `grid ⊂ (0, R)` of
    /// `|(Λwg)' - mΛ(w' - hw)/g| / |mΛ(w' - hw)/g|`, the derivative taken
    /// by centered differences of the computed `Λwg`.
    pub fn lambda_ode_residual(&self, grid: &[f64]) -> f64 {
        let m = self.dim() as f64;
        let w = &self.warp.w;
        let g = &self.warp.g;
        let h = &self.warp.h;
        let product = |r: f64| self.lambda(r) * w.eval(r) * g.value(r);
        grid.iter()
            .map(|&r| {
                let step = (1e-5 * self.radius).min(0.5 * r).min(0.5 * (self.radius - r));
                let fd = (product(r + step) - product(r - step)) / (2.0 * step);
                let rhs = m * self.lambda(r) * (w.deriv1(r) - h.value(r) * w.eval(r)) / g.value(r);
                (fd - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// `φ(r) = w'(r) - h(r) w(r)`.
    fn phi(&self, r: f64) -> f64 {
        let w = self.warp.w.jet(r);
        w.d1 - self.warp.h.value(r) * w.v
    }

    /// Balance margin `q_W(s(r)) (η_w(r) - h(r)) - g(r)/m` at `r > 0`.
    ///
    /// Computed as `∫_0^r (Λ/g)(u) [φ(r) - φ(u)] du / (Λ(r) w(r))`.
    pub fn balance_margin(&self, r: f64) -> Result<f64> {
        let phi_r = self.phi(r);
        let quad = Quadrature {
            abs_floor: 16.0 * f64::EPSILON * phi_r.abs() * r * self.lambda(r) / self.warp.g.value(r),
            ..Quadrature::relative(1e-11)
        };
        let integral = quad.value(
            |u| self.lambda(u) / self.warp.g.value(u) * (phi_r - self.phi(u)),
            0.0,
            r,
        )?;
        Ok(integral / (self.lambda(r) * self.warp.w.eval(r)))
    }

    /// The same margin from its definition, with `q_W` taken from the model
    /// volumes of the `W`-space.
    pub fn balance_margin_direct(&self, r: f64) -> Result<f64> {
        let s = self.warp.stretch.forward(r);
        let q = self.model.isoperimetric_quotient(s)?;
        let w = self.warp.w.jet(r);
        let eta = w.d1 / w.v;
        Ok(q * (eta - self.warp.h.value(r)) - self.warp.g.value(r) / self.dim() as f64)
    }
}

/// `n` points log-spaced on `[1e-3 · top, top]`.
pub fn log_grid(top: f64, n: usize) -> Vec<f64> {
    let lo = (1e-3 * top).ln();
    let hi = top.ln();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                top
            } else {
                (lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub balanced: bool,
    pub strict: bool,
    pub min_margin: f64,
    /// Stretched radius `s` where the minimum occurs.
    pub argmin: f64,
    /// `min (η_w - h)` over the grid; positive whenever balanced.
    pub min_eta_minus_h: f64,
    pub grid: Vec<f64>,
    pub margins: Vec<f64>,
}

/// Evaluate the balance condition on `grid` (stretched radii in
/// `(0, s(R)]`). Balanced iff the minimum margin is `≥ 0` (`> 0` when
/// `strict`).
pub fn balance_check(cs: &ComparisonSpace, strict: bool, grid: &[f64]) -> Result<BalanceReport> {
    let s_max = cs.stretched_radius();
    let mut margins = Vec::with_capacity(grid.len());
    let mut min_eta_minus_h = f64::INFINITY;
    for &s in grid {
        if !(s > 0.0 && s <= s_max * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("balance grid must lie in (0, {s_max}], got {s}")));
        }
        let r = cs.stretching().inverse(s);
        margins.push(cs.balance_margin(r)?);
        let w = cs.base_warping().jet(r);
        min_eta_minus_h = min_eta_minus_h.min(w.d1 / w.v - cs.bounds().h().value(r));
    }
    let (argmin, min_margin) =
        grid.iter().zip(&margins).fold(
            (f64::NAN, f64::INFINITY),
            |acc, (&s, &m)| if m < acc.1 { (s, m) } else { acc },
        );
    let balanced = if strict { min_margin > 0.0 } else { min_margin >= 0.0 };
    Ok(BalanceReport {
        balanced,
        strict,
        min_margin,
        argmin,
        min_eta_minus_h,
        grid: grid.to_vec(),
        margins,
    })
}

/// Default balance grid: 512 log-spaced stretched radii.
pub fn default_balance_grid(cs: &ComparisonSpace) -> Vec<f64> {
    log_grid(cs.stretched_radius(), DEFAULT_GRID_POINTS)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    /// Minimum over all orders and grid points.
    pub min: f64,
    /// Minimum per order `k = 1..K`.
    pub per_order: Vec<f64>,
    /// Radius `r` where the overall minimum occurs.
    pub argmin: f64,
}

/// Minimum over `k = 1..K` and `grid ⊂ (0, R]` of `f_k'' - f_k' η_w`,
/// where `f_k = ũ^W_k ∘ s`, evaluated through the identity
/// `g² (f_k'' - f_k' η_w) = -k f_{k-1} - m (η_w - h) f_k'`.
pub fn lemma_paren_check(cs: &ComparisonSpace, max_order: usize, grid: &[f64]) -> Result<LemmaReport> {
    if max_order == 0 {
        return Err(Error::Usage("the lemma check needs K >= 1".into()));
    }
    let profiles = solve_hierarchy(
        cs.as_model(),
        cs.stretched_radius(),
        max_order,
        crate::spectrum::DEFAULT_TOL,
    )?;
    lemma_from_profiles(cs, &profiles, grid)
}

fn lemma_from_profiles(cs: &ComparisonSpace, profiles: &RadialProfileSet, grid: &[f64]) -> Result<LemmaReport> {
    let m = cs.dim() as f64;
    let mut per_order = vec![f64::INFINITY; profiles.max_order()];
    let mut best = (f64::INFINITY, f64::NAN);
    for &r in grid {
        if !(r > 0.0 && r <= cs.radius() * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "lemma grid must lie in (0, {}], got {r}",
                cs.radius()
            )));
        }
        let r = r.min(cs.radius());
        let s = cs.stretching().forward(r).min(cs.stretched_radius());
        let g = cs.bounds().g().value(r);
        let w = cs.base_warping().jet(r);
        let eta = w.d1 / w.v;
        let h = cs.bounds().h().value(r);
        for k in 1..=profiles.max_order() {
            let f_prev = profiles.value(k - 1, s)?;
            let df = profiles.derivative(k, s)? / g;
            let v = (-(k as f64) * f_prev - m * (eta - h) * df) / (g * g);
            per_order[k - 1] = per_order[k - 1].min(v);
            if v < best.0 {
                best = (v, r);
            }
        }
    }
    Ok(LemmaReport {
        min: best.0,
        per_order,
        argmin: best.1,
    })
}

/// Default lemma grid: 512 log-spaced radii in `(0, R]`.
pub fn default_lemma_grid(cs: &ComparisonSpace) -> Vec<f64> {
    log_grid(cs.radius(), DEFAULT_GRID_POINTS)
}

/// Inequality direction between a domain's spectrum and its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `Â_k(domain) ≤ Â_k(bound)`.
    Le,
    /// `Â_k(domain) ≥ Â_k(bound)`.
    Ge,
}

impl Direction {
    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "le" | "<=" => Some(Direction::Le),
            "ge" | ">=" => Some(Direction::Ge),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Le => "le",
            Direction::Ge => "ge",
        }
    }

    /// Signed margin, non-negative when `value` respects `bound`.
    pub fn margin(self, value: f64, bound: f64) -> f64 {
        match self {
            Direction::Le => bound - value,
            Direction::Ge => value - bound,
        }
    }
}

/// The hypothesis package of a comparison theorem.
#[derive(Clone, Debug)]
pub struct Constellation {
    pub ambient_dim: usize,
    pub submanifold_dim: usize,
    pub radius: f64,
    pub comparison: ComparisonSpace,
}

impl Constellation {
    pub fn new(
        ambient_dim: usize,
        submanifold_dim: usize,
        w: &WarpingFunction,
        bounds: &BoundingFunctions,
        radius: f64,
        tol: f64,
    ) -> Result<Self> {
        if submanifold_dim < 2 || ambient_dim < submanifold_dim {
            return Err(Error::Validation(format!(
                "need n >= m >= 2, got n = {ambient_dim}, m = {submanifold_dim}"
            )));
        }
        let comparison = build_comparison_space(w, bounds, submanifold_dim, radius, tol)?;
        Ok(Constellation {
            ambient_dim,
            submanifold_dim,
            radius,
            comparison,
        })
    }

    pub fn side(&self) -> Side {
        self.comparison.bounds().side()
    }
}

/// Spectrum of the bounding ball together with the inequality it enters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSpectrum {
    pub spectrum: MomentSpectrum,
    pub direction: Direction,
    pub ball_radius: f64,
}

/// `Â_0..Â_K` of the comparison ball: `B^W_{s(R)}` bounds from below,
/// `B^W_R` from above. The comparison space must be balanced.
pub fn spectrum_bound(con: &Constellation, max_order: usize) -> Result<BoundSpectrum> {
    let cs = &con.comparison;
    let balance = balance_check(cs, false, &default_balance_grid(cs))?;
    if !balance.balanced {
        return Err(Error::Hypothesis(format!(
            "comparison space {} is not w-balanced (min margin {:.3e} at s = {:.4})",
            cs.label(),
            balance.min_margin,
            balance.argmin
        )));
    }
    let (ball_radius, direction) = match con.side() {
        Side::Below => (cs.stretched_radius(), Direction::Ge),
        Side::Above => (cs.radius(), Direction::Le),
    };
    let ball_radius = ball_radius.min(cs.as_model().domain_max());
    let profiles = solve_hierarchy(cs.as_model(), ball_radius, max_order + 1, crate::spectrum::DEFAULT_TOL)?;
    Ok(BoundSpectrum {
        spectrum: profiles.spectrum(),
        direction,
        ball_radius,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntrinsicVerdict {
    pub k: usize,
    pub ambient: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
    pub strict: bool,
}

/// Relative slack allowed when an inequality is checked numerically.
pub const VERDICT_REL_TOL: f64 = 1e-10;

/// Compare `Â_k(B^N_R)` with `Â_k(B^w_R)` for two model spaces, after
/// checking on a grid that the radial curvatures are ordered as
/// `direction` requires (`le`: `K_N ≤ K_w`, `ge`: `K_N ≥ K_w`).
pub fn compare_intrinsic(
    ambient: &ModelSpace,
    bound: &ModelSpace,
    radius: f64,
    max_order: usize,
    direction: Direction,
) -> Result<Vec<IntrinsicVerdict>> {
    if ambient.dim() != bound.dim() {
        return Err(Error::Usage(format!(
            "models must share the dimension, got {} and {}",
            ambient.dim(),
            bound.dim()
        )));
    }
    for i in 1..=256 {
        let r = radius * i as f64 / 256.0;
        let kn = ambient.radial_curvature(r)?;
        let kb = bound.radial_curvature(r)?;
        let slack = 1e-9 * (1.0 + kn.abs().max(kb.abs()));
        let ok = match direction {
            Direction::Le => kn <= kb + slack,
            Direction::Ge => kn >= kb - slack,
        };
        if !ok {
            return Err(Error::Hypothesis(format!(
                "radial curvature of {} ({kn:.6}) is not {} that of {} ({kb:.6}) at r = {r}",
                ambient.id(),
                if direction == Direction::Le { "below" } else { "above" },
                bound.id()
            )));
        }
    }
    let tol = crate::spectrum::DEFAULT_TOL;
    let sa = solve_hierarchy(ambient, radius, max_order + 1, tol)?.spectrum();
    let sb = solve_hierarchy(bound, radius, max_order + 1, tol)?.spectrum();
    Ok(sa
        .values
        .iter()
        .zip(&sb.values)
        .enumerate()
        .map(|(k, (&a, &b))| {
            let margin = direction.margin(a, b);
            IntrinsicVerdict {
                k,
                ambient: a,
                bound: b,
                margin,
                holds: margin >= -VERDICT_REL_TOL * b.abs(),
                strict: margin > VERDICT_REL_TOL * b.abs(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{constant, jet_fn};
    use crate::warp_models::space_form_warping;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn stretching_examples() {
        let s = build_stretching(&constant(1.0), 2.0, 1e-13).unwrap();
        assert!((s.forward(1.3) - 1.3).abs() < 1e-14);
        assert!((s.inverse(0.7) - 0.7).abs() < 1e-14);

        let g = jet_fn("1/(1+r)", |r| Jet::constant(1.0) / (r + 1.0));
        let s = build_stretching(&g, 1.0, 1e-13).unwrap();
        assert!((s.stretched_radius() - 1.5).abs() < 1e-13);
        for r in [0.1, 0.5, 0.9] {
            assert!((s.forward(r) - (r + r * r / 2.0)).abs() < 1e-13);
            assert!((s.forward(s.inverse(s.forward(r))) - s.forward(r)).abs() < 1e-12);
        }

        let g = jet_fn("exp(-r)", |r| (-r).exp());
        let s = build_stretching(&g, 1.0, 1e-13).unwrap();
        assert!((s.stretched_radius() - (std::f64::consts::E - 1.0)).abs() < 1e-13);

        let g = jet_fn("1-r", |r| -r + 1.0);
        assert!(matches!(build_stretching(&g, 1.5, 1e-12), Err(Error::Validation(_))));
    }

    #[test]
    fn reduction_to_base_model() {
        for b in [0.0, -1.0] {
            let w = space_form_warping(b);
            let bounds = BoundingFunctions::below(constant(1.0), constant(0.0));
            let cs = build_comparison_space(&w, &bounds, 3, 1.2, 1e-13).unwrap();
            assert!((cs.stretched_radius() - 1.2).abs() < 1e-14);
            for i in 0..=60 {
                let s = 1.2 * i as f64 / 60.0;
                let got = cs.as_model().warping().jet(s);
                let want = w.jet(s);
                assert!((got.v - want.v).abs() < 1e-10, "s={s}");
                if s > 0.0 {
                    assert!((got.d1 - want.d1).abs() < 1e-8, "s={s}");
                    assert!((got.d2 - want.d2).abs() < 1e-6, "s={s} {} {}", got.d2, want.d2);
                }
            }
        }
    }

    #[test]
    fn constant_mean_convexity_closed_form() {
        for (m, h0) in [(2usize, 0.1), (3, 0.3)] {
            let bounds = BoundingFunctions::below(constant(1.0), constant(h0));
            let cs = build_comparison_space(&space_form_warping(0.0), &bounds, m, 1.0, 1e-13).unwrap();
            for i in 1..=40 {
                let s = i as f64 / 40.0;
                let want = s * (-(m as f64) * h0 * s / (m as f64 - 1.0)).exp();
                assert!(rel(cs.warping_at(s), want) < 1e-10, "m={m} s={s}");
            }
            let grid = crate::spectrum::interior_grid(1.0, 30);
            assert!(cs.lambda_ode_residual(&grid) < 1e-7);
        }
    }

    #[test]
    fn stable_margin_matches_definition() {
        let g = jet_fn("exp(-0.2r)", |r| (r * -0.2).exp());
        let bounds = BoundingFunctions::below(g, constant(0.1));
        let cs = build_comparison_space(&space_form_warping(-1.0), &bounds, 3, 1.0, 1e-13).unwrap();
        for r in [0.2, 0.5, 1.0] {
            let a = cs.balance_margin(r).unwrap();
            let b = cs.balance_margin_direct(r).unwrap();
            assert!((a - b).abs() < 1e-8, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn balance_examples() {
        let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
        let cs = build_comparison_space(&space_form_warping(-1.0), &flat, 2, 1.0, 1e-13).unwrap();
        let margin = cs.balance_margin(1.0).unwrap();
        let expected = 0.5f64.tanh() / 1f64.tanh() - 0.5;
        assert!((margin - expected).abs() < 1e-10, "{margin} vs {expected}");
        assert!(balance_check(&cs, true, &default_balance_grid(&cs)).unwrap().balanced);

        let cs = build_comparison_space(&space_form_warping(0.0), &flat, 3, 1.0, 1e-13).unwrap();
        let rep = balance_check(&cs, false, &default_balance_grid(&cs)).unwrap();
        assert!(rep.balanced && rep.min_margin.abs() < 1e-12);
        assert!(!balance_check(&cs, true, &default_balance_grid(&cs)).unwrap().balanced);

        let convex = BoundingFunctions::below(constant(1.0), constant(0.2));
        let cs = build_comparison_space(&space_form_warping(0.0), &convex, 2, 1.0, 1e-13).unwrap();
        let rep = balance_check(&cs, false, &default_balance_grid(&cs)).unwrap();
        assert!(!rep.balanced && rep.min_margin < 0.0);
        assert!(rep.min_eta_minus_h > 0.0);
        assert!(matches!(balance_check(&cs, false, &[2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn lemma_examples() {
        let flat = BoundingFunctions::below(constant(1.0), constant(0.0));
        let cs = build_comparison_space(&space_form_warping(0.0), &flat, 2, 1.0, 1e-13).unwrap();
        let rep = lemma_paren_check(&cs, 1, &default_lemma_grid(&cs)).unwrap();
        assert!(rep.min.abs() < 1e-12, "{rep:?}");

        let cs = build_comparison_space(&space_form_warping(-1.0), &flat, 2, 1.0, 1e-13).unwrap();
        let rep = lemma_paren_check(&cs, 3, &default_lemma_grid(&cs)).unwrap();
        assert!(rep.min > 0.0, "{rep:?}");
    }

    #[test]
    fn bound_spectra() {
        let w0 = space_form_warping(0.0);
        let above = BoundingFunctions::above(constant(0.0));
        let con = Constellation::new(3, 2, &w0, &above, 1.0, 1e-13).unwrap();
        let b = spectrum_bound(&con, 1).unwrap();
        assert_eq!(b.direction, Direction::Le);
        assert!(rel(b.spectrum.values[1], 0.0625) < 1e-10);

        let g = jet_fn("exp(-r)", |r| (-r).exp());
        let below = BoundingFunctions::below(g, constant(0.0));
        let con = Constellation::new(3, 2, &w0, &below, 1.0, 1e-13).unwrap();
        let b = spectrum_bound(&con, 2).unwrap();
        assert_eq!(b.direction, Direction::Ge);
        assert!((b.ball_radius - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert!(b.spectrum.values.iter().all(|v| *v > 0.0));

        let convex = BoundingFunctions::below(constant(1.0), constant(0.2));
        let con = Constellation::new(3, 2, &w0, &convex, 1.0, 1e-13).unwrap();
        assert!(matches!(spectrum_bound(&con, 2), Err(Error::Hypothesis(_))));
        assert!(Constellation::new(2, 3, &w0, &above, 1.0, 1e-13).is_err());
    }

    #[test]
    fn above_side_forces_unit_tangency() {
        let g = jet_fn("exp(-r)", |r| (-r).exp());
        let b = BoundingFunctions::new(g, constant(0.0), Side::Above);
        assert_eq!(b.g().value(0.7), 1.0);
        assert_eq!(b.warnings().len(), 1);
    }

    #[test]
    fn intrinsic_examples() {
        let n = ModelSpace::space_form(2, -1.0).unwrap();
        let flat = ModelSpace::space_form(2, 0.0).unwrap();
        let v = compare_intrinsic(&n, &flat, 1.0, 3, Direction::Le).unwrap();
        assert!(rel(v[0].ambient, 0.5f64.tanh()) < 1e-12);
        assert!(rel(v[0].bound, 0.5) < 1e-12);
        assert!(v.iter().all(|x| x.holds && x.strict));

        let h4 = ModelSpace::space_form(2, -4.0).unwrap();
        let v = compare_intrinsic(&n, &h4, 1.0, 3, Direction::Ge).unwrap();
        assert!(rel(v[0].bound, 1f64.tanh() / 2.0) < 1e-12);
        assert!(v.iter().all(|x| x.holds));

        let v = compare_intrinsic(&n, &n, 1.0, 3, Direction::Ge).unwrap();
        assert!(v.iter().all(|x| x.holds && !x.strict && x.margin == 0.0));

        assert!(matches!(
            compare_intrinsic(&n, &flat, 1.0, 3, Direction::Ge),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn singular_mean_convexity_is_rejected() {
        let bounds = BoundingFunctions::below(constant(1.0), jet_fn("1/r", |r| Jet::constant(1.0) / r));
        let err = build_comparison_space(&space_form_warping(0.0), &bounds, 2, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }
}
