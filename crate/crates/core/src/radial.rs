//! Radial functions with first and second derivatives.

use std::fmt;
use std::sync::Arc;

use crate::dual::Jet;

/// A scalar function of the radius, evaluated together with its first two
/// derivatives.
pub trait RadialFn: Send + Sync {
    fn jet(&self, r: f64) -> Jet;

    fn value(&self, r: f64) -> f64 {
        self.jet(r).v
    }

    /// Human-readable identifier used in reports.
    fn label(&self) -> String;
}

pub type SharedRadial = Arc<dyn RadialFn>;

impl fmt::Debug for dyn RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialFn({})", self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl RadialFn for Constant {
    fn jet(&self, _r: f64) -> Jet {
        Jet::constant(self.0)
    }

    fn label(&self) -> String {
        format!("{}", self.0)
    }
}

/// A radial function given by a closure over [`Jet`] arithmetic.
pub struct JetFn<F> {
    f: F,
    label: String,
}

impl<F> JetFn<F>
where
    F: Fn(Jet) -> Jet + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        JetFn { f, label: label.into() }
    }
}

impl<F> RadialFn for JetFn<F>
where
    F: Fn(Jet) -> Jet + Send + Sync,
{
    fn jet(&self, r: f64) -> Jet {
        (self.f)(Jet::variable(r))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Convenience constructor for a shared closure-backed radial function.
pub fn jet_fn<F>(label: impl Into<String>, f: F) -> SharedRadial
where
    F: Fn(Jet) -> Jet + Send + Sync + 'static,
{
    Arc::new(JetFn::new(label, f))
}

pub fn constant(c: f64) -> SharedRadial {
    Arc::new(Constant(c))
}
