//! Globally adaptive Gauss–Kronrod (10/21 point) integration.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1], decreasing; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_226_891_642,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 21-point Kronrod sweep over `[a, b]`, returning `(value, error)`.
pub fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[10];
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integrator settings.
///
/// Convergence is declared once the summed error estimate drops below
/// `max(abs_floor, rel_tol * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-10,
            abs_floor: 1e-14,
            max_intervals: 4000,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Default::default()
        }
    }

    /// Purely relative target; used where the integral itself can be tiny.
    pub fn relative(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            abs_floor: 0.0,
            ..Default::default()
        }
    }

    /// Integrate `f` over `[a, b]`.
    ///
    /// The initial partition is graded geometrically towards `a`, where the
    /// radial integrands of this crate vanish to high order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!(
                "integration bounds must be finite, got [{a}, {b}]"
            )));
        }
        let len = b - a;
        let cuts = [0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0];
        let mut heap = BinaryHeap::with_capacity(64);
        let mut total = 0.0;
        let mut total_err = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (a + w[0] * len, a + w[1] * len);
            let (value, error) = qk21(&f, lo, hi);
            total += value;
            total_err += error;
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
            });
        }

        loop {
            if !total.is_finite() {
                let worst = heap.peek().copied().unwrap();
                return Err(Error::numeric("non-finite integrand", worst.a, worst.b));
            }
            let target = self.abs_floor.max(self.rel_tol * total.abs());
            if total_err <= target {
                break;
            }
            if heap.len() >= self.max_intervals {
                let worst = heap.peek().copied().unwrap();
                return Err(Error::numeric(
                    format!(
                        "quadrature did not reach tolerance {:.1e} (error {:.3e})",
                        self.rel_tol, total_err
                    ),
                    worst.a,
                    worst.b,
                ));
            }
            let worst = heap.pop().unwrap();
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval can no longer be split in floating point
                return Err(Error::numeric("quadrature interval underflow", worst.a, worst.b));
            }
            let (v1, e1) = qk21(&f, worst.a, mid);
            let (v2, e2) = qk21(&f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Piece {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Piece {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }

        // re-sum to shed the drift of the running updates
        let mut pieces: Vec<Piece> = heap.into_vec();
        pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
        let value = pieces.iter().map(|p| p.value).sum();
        let error = pieces.iter().map(|p| p.error).sum();
        Ok(Estimate {
            value,
            error,
            intervals: pieces.len(),
        })
    }

    /// Convenience wrapper returning only the value.
    pub fn value<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate(f, a, b).map(|e| e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let v = q.value(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn smooth_transcendental() {
        let q = Quadrature::with_rel_tol(1e-12);
        let v = q.value(f64::sinh, 0.0, 1.0).unwrap();
        assert!((v - (1f64.cosh() - 1.0)).abs() < 1e-13);
        let v = q.value(|x| (-x * x).exp(), 0.0, 6.0).unwrap();
        let half_sqrt_pi = 0.5 * std::f64::consts::PI.sqrt();
        assert!((v - half_sqrt_pi).abs() < 1e-12);
    }

    #[test]
    fn tiny_integral_with_relative_target() {
        // ∫_0^1e-4 t^4 dt = 2e-21; the absolute floor would swallow it.
        let q = Quadrature::relative(1e-12);
        let v = q.value(|t| t.powi(4), 0.0, 1e-4).unwrap();
        assert!((v / 2e-21 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = Quadrature::default();
        let v = q.value(|x| x.cos(), 1.0, 0.0).unwrap();
        assert!((v + 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn failure_reports_worst_interval() {
        let q = Quadrature {
            rel_tol: 1e-14,
            abs_floor: 0.0,
            max_intervals: 8,
        };
        match q.integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0) {
            Err(Error::Numeric { lo, hi, .. }) => assert!(lo == 0.0 && hi > 0.0),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }
}
