//! Piecewise Chebyshev representation of radial functions.
//!
//! A function on `[a, b]` is stored by its values at the Chebyshev points
//! of the second kind on each panel of a partition. Values interpolate
//! spectrally (barycentric formula) and integrate spectrally (coefficient
//! recurrence), which is what the exit-moment hierarchy needs: nested
//! antiderivatives evaluated everywhere at near machine precision.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Points per panel (polynomial degree `NODES - 1`).
pub const NODES: usize = 17;
const DEG: usize = NODES - 1;

struct Basis {
    x: [f64; NODES],
    bary: [f64; NODES],
    // values -> Chebyshev coefficients
    coeff: [[f64; NODES]; NODES],
    // values -> cumulative integral from -1, sampled at the nodes
    integ: [[f64; NODES]; NODES],
}

fn cheb_t(k: usize, j: usize) -> f64 {
    // T_k at the ascending node x_j = -cos(pi j / DEG)
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (PI * (k * j) as f64 / DEG as f64).cos()
}

fn basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut x = [0.0; NODES];
        let mut bary = [0.0; NODES];
        for j in 0..NODES {
            x[j] = -(PI * j as f64 / DEG as f64).cos();
            bary[j] = if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        x[0] = -1.0;
        x[DEG] = 1.0;
        bary[0] *= 0.5;
        bary[DEG] *= 0.5;

        let mut coeff = [[0.0; NODES]; NODES];
        for (k, row) in coeff.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                let end = if j == 0 || j == DEG { 0.5 } else { 1.0 };
                let top = if k == 0 || k == DEG { 0.5 } else { 1.0 };
                *c = 2.0 / DEG as f64 * end * top * cheb_t(k, j);
            }
        }

        let mut integ = [[0.0; NODES]; NODES];
        for j in 0..NODES {
            let c: Vec<f64> = (0..NODES + 2)
                .map(|k| if k < NODES { coeff[k][j] } else { 0.0 })
                .collect();
            // antiderivative coefficients b_1..b_{DEG+1}
            let mut b = [0.0; NODES + 1];
            b[1] = c[0] - 0.5 * c[2];
            for k in 2..=NODES {
                b[k] = (c[k - 1] - c[k + 1]) / (2.0 * k as f64);
            }
            let at_left: f64 = (1..=NODES).map(|k| if k % 2 == 0 { b[k] } else { -b[k] }).sum();
            for i in 0..NODES {
                let v: f64 = (1..=NODES).map(|k| b[k] * cheb_t(k, i)).sum();
                integ[i][j] = v - at_left;
            }
        }
        Basis { x, bary, coeff, integ }
    })
}

/// A partition of an interval into panels.
#[derive(Clone, Debug, PartialEq)]
pub struct Panels {
    breaks: Vec<f64>,
}

impl Panels {
    pub fn uniform(a: f64, b: f64, count: usize) -> Self {
        let count = count.max(1);
        let breaks = (0..=count)
            .map(|i| a + (b - a) * i as f64 / count as f64)
            .collect::<Vec<_>>();
        let mut p = Panels { breaks };
        *p.breaks.last_mut().unwrap() = b;
        p
    }

    pub fn from_breaks(breaks: Vec<f64>) -> Self {
        debug_assert!(breaks.len() >= 2);
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        Panels { breaks }
    }

    pub fn len(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> f64 {
        self.breaks[0]
    }

    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn bounds(&self, panel: usize) -> (f64, f64) {
        (self.breaks[panel], self.breaks[panel + 1])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Node `j` of panel `p`.
    pub fn node(&self, p: usize, j: usize) -> f64 {
        let (a, b) = self.bounds(p);
        match j {
            0 => a,
            DEG => b,
            _ => 0.5 * (a + b) + 0.5 * (b - a) * basis().x[j],
        }
    }

    /// All nodes, panel-major (`len() * NODES` entries; shared breakpoints
    /// appear twice).
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len())
            .flat_map(|p| (0..NODES).map(move |j| (p, j)))
            .map(|(p, j)| self.node(p, j))
            .collect()
    }

    /// Index of the panel containing `x` (clamped to the end panels).
    pub fn locate(&self, x: f64) -> usize {
        let n = self.len();
        match self.breaks[1..n].binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
        .min(n - 1)
    }

    /// Bisect every panel whose flag is set.
    pub fn refine(&self, split: &[bool]) -> Panels {
        let mut breaks = Vec::with_capacity(self.breaks.len() * 2);
        breaks.push(self.breaks[0]);
        for (p, &s) in split.iter().enumerate().take(self.len()) {
            let (a, b) = self.bounds(p);
            if s {
                breaks.push(0.5 * (a + b));
            }
            breaks.push(b);
        }
        Panels { breaks }
    }
}

/// Chebyshev coefficients of one panel's samples.
pub fn coefficients(values: &[f64]) -> [f64; NODES] {
    let basis = basis();
    let mut c = [0.0; NODES];
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = basis.coeff[k].iter().zip(values).map(|(a, v)| a * v).sum();
    }
    c
}

/// Size of the two highest coefficients, an estimate of the truncation error
/// of the panel interpolant.
pub fn tail(values: &[f64]) -> f64 {
    let c = coefficients(values);
    c[DEG].abs().max(c[DEG - 1].abs())
}

/// Piecewise Chebyshev interpolant of a scalar function.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseCheb {
    panels: Panels,
    values: Vec<f64>,
}

impl PiecewiseCheb {
    pub fn from_fn<F: FnMut(f64) -> f64>(panels: Panels, mut f: F) -> Self {
        let values = panels.nodes().into_iter().map(&mut f).collect();
        PiecewiseCheb { panels, values }
    }

    /// Sample `f` on `[a, b]`, bisecting panels until every panel's
    /// truncation estimate is below `rel_tol * max|f|`, or below
    /// `noise(lo, hi)` on a panel `[lo, hi]` where `f` carries rounding noise.
    pub fn adaptive<F: FnMut(f64) -> f64, N: Fn(f64, f64) -> f64>(
        a: f64,
        b: f64,
        mut f: F,
        rel_tol: f64,
        noise: N,
        max_panels: usize,
    ) -> crate::Result<Self> {
        let mut panels = Panels::uniform(a, b, 4);
        loop {
            let g = PiecewiseCheb::from_fn(panels.clone(), &mut f);
            if let Some(p) = g.values.iter().position(|v| !v.is_finite()) {
                let (lo, hi) = panels.bounds(p / NODES);
                return Err(crate::Error::numeric("non-finite sample", lo, hi));
            }
            let scale = rel_tol.max(1e-15) * g.max_abs();
            let marks: Vec<bool> = (0..panels.len())
                .map(|p| {
                    let (lo, hi) = panels.bounds(p);
                    tail(g.panel_values(p)) > scale.max(noise(lo, hi))
                })
                .collect();
            if !marks.iter().any(|&m| m) {
                return Ok(g);
            }
            if panels.len() * 2 > max_panels {
                let (_, worst) = g.worst_tail();
                let (lo, hi) = panels.bounds(worst);
                return Err(crate::Error::numeric("function unresolved", lo, hi));
            }
            panels = panels.refine(&marks);
        }
    }

    pub fn from_values(panels: Panels, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), panels.len() * NODES);
        PiecewiseCheb { panels, values }
    }

    pub fn panels(&self) -> &Panels {
        &self.panels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn panel_values(&self, p: usize) -> &[f64] {
        &self.values[p * NODES..(p + 1) * NODES]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at the right end of the domain.
    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Value at the left end of the domain.
    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.panels.locate(x);
        let (a, b) = self.panels.bounds(p);
        let t = (2.0 * x - a - b) / (b - a);
        let vals = self.panel_values(p);
        let basis = basis();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..NODES {
            let d = t - basis.x[j];
            if d == 0.0 {
                return vals[j];
            }
            let w = basis.bary[j] / d;
            num += w * vals[j];
            den += w;
        }
        num / den
    }

    /// Antiderivative `x -> ∫_start^x f`.
    pub fn cumulative(&self) -> PiecewiseCheb {
        let basis = basis();
        let mut out = Vec::with_capacity(self.values.len());
        let mut offset = 0.0;
        for p in 0..self.panels.len() {
            let (a, b) = self.panels.bounds(p);
            let scale = 0.5 * (b - a);
            let vals = self.panel_values(p);
            for row in basis.integ.iter() {
                let s: f64 = row.iter().zip(vals).map(|(m, v)| m * v).sum();
                out.push(offset + scale * s);
            }
            offset = *out.last().unwrap();
        }
        PiecewiseCheb {
            panels: self.panels.clone(),
            values: out,
        }
    }

    /// Largest per-panel truncation estimate, and the panel it occurs on.
    pub fn worst_tail(&self) -> (f64, usize) {
        (0..self.panels.len())
            .map(|p| (tail(self.panel_values(p)), p))
            .fold((0.0, 0), |acc, t| if t.0 > acc.0 { t } else { acc })
    }

    /// Flag panels whose truncation estimate exceeds `threshold`.
    pub fn mark_unresolved(&self, threshold: f64, marks: &mut [bool]) {
        for (p, m) in marks.iter_mut().enumerate() {
            if tail(self.panel_values(p)) > threshold {
                *m = true;
            }
        }
    }
}
