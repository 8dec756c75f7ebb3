//! Warping functions and the radial geometry of rotationally symmetric
//! model spaces `M^m_w = [0, R) ×_w S^{m-1}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dual::Jet;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::radial::{RadialFn, SharedRadial};

/// Relative tolerance used for volume quadratures.
pub const VOLUME_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpKind {
    /// Constant curvature `b`.
    SpaceForm {
        b: f64,
    },
    Custom {
        label: String,
    },
}

/// Closed-form warping of the constant curvature space form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceForm {
    pub b: f64,
}

impl RadialFn for SpaceForm {
    fn jet(&self, r: f64) -> Jet {
        let b = self.b;
        if b > 0.0 {
            let k = b.sqrt();
            let (s, c) = (k * r).sin_cos();
            Jet::new(s / k, c, -k * s)
        } else if b < 0.0 {
            let k = (-b).sqrt();
            let (s, c) = ((k * r).sinh(), (k * r).cosh());
            Jet::new(s / k, c, k * s)
        } else {
            Jet::new(r, 1.0, 0.0)
        }
    }

    fn label(&self) -> String {
        format!("Q[{}]", self.b)
    }
}

/// A warping function `w` with `w(0) = 0`, `w'(0) = 1` and `w > 0` on
/// `(0, domain_max]`.
#[derive(Clone)]
pub struct WarpingFunction {
    kind: WarpKind,
    profile: SharedRadial,
    domain_max: f64,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("kind", &self.kind)
            .field("domain_max", &self.domain_max)
            .finish()
    }
}

/// `Q_b` on its natural domain. For `b > 0` the domain stops just short of
/// the antipodal point `π/√b`.
pub fn space_form_warping(b: f64) -> WarpingFunction {
    let domain_max = if b > 0.0 {
        PI / b.sqrt() * (1.0 - 1e-9)
    } else {
        f64::INFINITY
    };
    WarpingFunction {
        kind: WarpKind::SpaceForm { b },
        profile: Arc::new(SpaceForm { b }),
        domain_max,
    }
}

/// `Q_b` restricted to `[0, r_max]`.
pub fn space_form_warping_on(b: f64, r_max: f64) -> Result<WarpingFunction> {
    if !(r_max > 0.0) {
        return Err(Error::Domain(format!("R_max must be positive, got {r_max}")));
    }
    if b > 0.0 && r_max >= PI / b.sqrt() {
        return Err(Error::Domain(format!(
            "R_max = {r_max} reaches the conjugate point pi/sqrt(b) = {} of Q_{b}",
            PI / b.sqrt()
        )));
    }
    let mut w = space_form_warping(b);
    w.domain_max = r_max;
    Ok(w)
}

impl WarpingFunction {
    /// A user-supplied warping function, validated on a sample grid.
    pub fn custom(profile: SharedRadial, domain_max: f64) -> Result<Self> {
        if !(domain_max > 0.0 && domain_max.is_finite()) {
            return Err(Error::Domain(format!(
                "custom warping functions need a finite positive domain, got {domain_max}"
            )));
        }
        let w = WarpingFunction {
            kind: WarpKind::Custom { label: profile.label() },
            profile,
            domain_max,
        };
        w.validate()?;
        w.check_derivatives(64)?;
        Ok(w)
    }

    /// Wrap a profile that is known to be admissible by construction.
    pub(crate) fn trusted(label: String, profile: SharedRadial, domain_max: f64) -> Self {
        WarpingFunction {
            kind: WarpKind::Custom { label },
            profile,
            domain_max,
        }
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    /// Curvature constant when this is a space form.
    pub fn space_form_b(&self) -> Option<f64> {
        match self.kind {
            WarpKind::SpaceForm { b } => Some(b),
            WarpKind::Custom { .. } => None,
        }
    }

    pub fn id(&self) -> String {
        match &self.kind {
            WarpKind::SpaceForm { b } => format!("Q[{b}]"),
            WarpKind::Custom { label } => label.clone(),
        }
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn jet(&self, r: f64) -> Jet {
        self.profile.jet(r)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    pub fn deriv1(&self, r: f64) -> f64 {
        self.profile.jet(r).d1
    }

    pub fn deriv2(&self, r: f64) -> f64 {
        self.profile.jet(r).d2
    }

    pub fn profile(&self) -> &SharedRadial {
        &self.profile
    }

    /// Check `w(0) = 0`, `w'(0) = 1` and positivity on a grid.
    pub fn validate(&self) -> Result<()> {
        let at0 = self.jet(0.0);
        if !at0.v.is_finite() || at0.v.abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "warping function must vanish at 0, got w(0) = {}",
                at0.v
            )));
        }
        if !at0.d1.is_finite() || (at0.d1 - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "warping function must have unit slope at 0, got w'(0) = {}",
                at0.d1
            )));
        }
        let r_max = self.domain_max;
        for i in 1..=256 {
            let r = r_max * i as f64 / 256.0;
            let j = self.jet(r);
            if !j.is_finite() {
                return Err(Error::Validation(format!("warping function is not finite at r = {r}")));
            }
            if j.v <= 0.0 {
                return Err(Error::Validation(format!(
                    "warping function must be positive on (0, R_max], w({r}) = {}",
                    j.v
                )));
            }
        }
        Ok(())
    }

    /// Compare the supplied derivatives with centered differences on an
    /// interior grid. Returns the worst discrepancy relative to the
    /// derivative scale, erroring above `1e-6`.
    pub fn check_derivatives(&self, points: usize) -> Result<f64> {
        let r_max = if self.domain_max.is_finite() {
            self.domain_max
        } else {
            4.0
        };
        let h = 1e-4 * r_max;
        let grid: Vec<f64> = (0..points)
            .map(|i| r_max * (0.05 + 0.9 * i as f64 / (points.max(2) - 1) as f64))
            .collect();
        let jets: Vec<Jet> = grid.iter().map(|&r| self.jet(r)).collect();
        let scale1 = jets.iter().fold(1.0f64, |m, j| m.max(j.d1.abs()));
        let scale2 = jets.iter().fold(1.0f64, |m, j| m.max(j.d2.abs()));
        let mut worst = 0.0f64;
        for (&r, j) in grid.iter().zip(&jets) {
            let fd1 = (self.eval(r + h) - self.eval(r - h)) / (2.0 * h);
            let fd2 = (self.deriv1(r + h) - self.deriv1(r - h)) / (2.0 * h);
            let e1 = (fd1 - j.d1).abs() / scale1;
            let e2 = (fd2 - j.d2).abs() / scale2;
            worst = worst.max(e1).max(e2);
            if e1 > 1e-6 || e2 > 1e-6 {
                return Err(Error::Validation(format!(
                    "supplied derivatives disagree with finite differences at r = {r} \
                     (relative errors {e1:.2e}, {e2:.2e})"
                )));
            }
        }
        Ok(worst)
    }
}

/// Area of the unit `n`-sphere in `R^{n+1}`, `2 π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let m = n + 1;
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    if k.is_multiple_of(2) {
        // Γ(n) = (n-1)!
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Γ(n + 1/2) = sqrt(pi) (1/2)(3/2)...(n - 1/2)
        let n = k / 2;
        PI.sqrt() * (0..n).map(|i| i as f64 + 0.5).product::<f64>()
    }
}

/// An `m`-dimensional rotationally symmetric model space.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    dim: usize,
    warping: WarpingFunction,
}

impl ModelSpace {
    pub fn new(dim: usize, warping: WarpingFunction) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Validation(format!(
                "model dimension must be at least 2, got {dim}"
            )));
        }
        Ok(ModelSpace { dim, warping })
    }

    /// The space form of curvature `b` in dimension `dim`.
    pub fn space_form(dim: usize, b: f64) -> Result<Self> {
        ModelSpace::new(dim, space_form_warping(b))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    pub fn domain_max(&self) -> f64 {
        self.warping.domain_max
    }

    pub fn id(&self) -> String {
        format!("{}/m{}", self.warping.id(), self.dim)
    }

    fn check_open(&self, r: f64, what: &str) -> Result<()> {
        if !(r > 0.0) || r > self.domain_max() {
            return Err(Error::Domain(format!(
                "{what} needs 0 < r <= {}, got r = {r}",
                self.domain_max()
            )));
        }
        Ok(())
    }

    fn check_closed(&self, r: f64, what: &str) -> Result<()> {
        if !(r >= 0.0) || r > self.domain_max() {
            return Err(Error::Domain(format!(
                "{what} needs 0 <= r <= {}, got r = {r}",
                self.domain_max()
            )));
        }
        Ok(())
    }

    /// `K_w(r) = -w''(r) / w(r)`.
    pub fn radial_curvature(&self, r: f64) -> Result<f64> {
        self.check_open(r, "radial curvature")?;
        let j = self.warping.jet(r);
        Ok(-j.d2 / j.v)
    }

    /// Mean curvature `w'/w` of the distance sphere of radius `r`.
    pub fn eta(&self, r: f64) -> Result<f64> {
        self.check_open(r, "sphere mean curvature")?;
        let j = self.warping.jet(r);
        Ok(j.d1 / j.v)
    }

    /// `ω_{m-1}`, the area of the unit `(m-1)`-sphere.
    pub fn omega(&self) -> f64 {
        unit_sphere_area(self.dim - 1)
    }

    /// `w(r)^{m-1}`, the sphere area without the `ω_{m-1}` factor.
    pub fn sphere_density(&self, r: f64) -> f64 {
        self.warping.eval(r).powi(self.dim as i32 - 1)
    }

    pub fn sphere_volume(&self, r: f64) -> Result<f64> {
        self.check_closed(r, "sphere volume")?;
        Ok(self.omega() * self.sphere_density(r))
    }

    /// `∫_0^r w^{m-1}`, the ball volume without the `ω_{m-1}` factor.
    pub fn ball_density(&self, r: f64) -> Result<f64> {
        self.check_closed(r, "ball volume")?;
        if r == 0.0 {
            return Ok(0.0);
        }
        // floor relative to the natural size r w(r)^{m-1} of the integral
        let scale = r * self.sphere_density(r);
        let quad = Quadrature {
            rel_tol: VOLUME_TOL,
            abs_floor: 1e-14 * scale,
            ..Default::default()
        };
        quad.value(|t| self.sphere_density(t), 0.0, r)
    }

    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        Ok(self.omega() * self.ball_density(r)?)
    }

    /// `q_w(r) = ∫_0^r w^{m-1} / w^{m-1}(r)`.
    pub fn isoperimetric_quotient(&self, r: f64) -> Result<f64> {
        self.check_open(r, "isoperimetric quotient")?;
        Ok(self.ball_density(r)? / self.sphere_density(r))
    }
}
