//! Second-order forward-mode dual numbers.
//!
//! A [`Jet`] carries `f(r)`, `f'(r)` and `f''(r)` through arithmetic, so any
//! closed-form radial function written with these operations gets exact
//! first and second derivatives for free.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Jet { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable at `r`.
    pub const fn variable(r: f64) -> Self {
        Jet { v: r, d1: 1.0, d2: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Chain rule for a scalar function with value `f0`, derivative `f1`
    /// and second derivative `f2` at `self.v`.
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet {
        Jet {
            v: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Jet {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Jet {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Jet {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Jet {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2)
    }

    pub fn sqrt(self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    /// Constant real exponent.
    pub fn powf(self, p: f64) -> Jet {
        if p == 0.0 {
            return Jet::constant(1.0);
        }
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let f0 = self.v.powf(p);
        let f1 = p * self.v.powf(p - 1.0);
        let f2 = p * (p - 1.0) * self.v.powf(p - 2.0);
        self.chain(f0, f1, f2)
    }

    /// Integer exponent; well defined at zero and for negative bases.
    pub fn powi(self, n: i32) -> Jet {
        match n {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let f0 = self.v.powi(n);
                let f1 = n as f64 * self.v.powi(n - 1);
                let f2 = (n * (n - 1)) as f64 * self.v.powi(n - 2);
                self.chain(f0, f1, f2)
            }
        }
    }

    /// Variable exponent, `self^e = exp(e ln self)`.
    pub fn pow(self, e: Jet) -> Jet {
        if e.d1 == 0.0 && e.d2 == 0.0 {
            return self.powf(e.v);
        }
        (e * self.ln()).exp()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        let q1 = (self.d1 - q * o.d1) * inv;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) * inv;
        Jet::new(q, q1, q2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet::new(self.v * s, self.d1 * s, self.d2 * s)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        Jet::new(self.v + s, self.d1, self.d2)
    }
}
