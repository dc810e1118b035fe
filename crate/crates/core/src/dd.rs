//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`, which
//! gives roughly 106 bits of significand. Used to evaluate the alternating
//! binomial sums of the leakage CDFs, where the individual terms exceed the
//! result by many orders of magnitude.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unit roundoff of double-double arithmetic (2^-104, conservative).
pub const DD_EPS: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// `self^n` by binary powering.
    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

/// `ln 2` as a double-double.
pub const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Euler–Mascheroni constant as a double-double.
pub const EULER_GAMMA: Dd = Dd {
    hi: 0.577_215_664_901_532_9,
    lo: -4.942_915_152_430_645e-18,
};

impl Dd {
    /// `e^x` for `|x| < 700`.
    pub fn exp(x: Dd) -> Dd {
        if x.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (x.hi / LN2.hi).round();
        let r = x - LN2 * k;
        // r / 1024 is exact
        let r = Dd {
            hi: r.hi / 1024.0,
            lo: r.lo / 1024.0,
        };
        // s = e^r - 1, squared up via (1+s)^2 - 1 = s(2+s)
        let mut term = r;
        let mut s = r;
        for j in 2..16 {
            term = term * r / (j as f64);
            s = s + term;
        }
        for _ in 0..10 {
            s = s * (s + Dd::new(2.0));
        }
        let sum = s + Dd::ONE;
        let scale = 2f64.powi(k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    /// Natural logarithm of a positive value.
    pub fn ln(x: Dd) -> Dd {
        let y = Dd::new(x.hi.ln());
        y + x * Dd::exp(-y) - Dd::ONE
    }
}

/// Exponential integral `E1(x)` for `x > 0` to double-double accuracy.
pub fn e1(x: f64) -> Dd {
    let xd = Dd::new(x);
    if x <= 1.5 {
        let mut term = Dd::ONE;
        let mut sum = Dd::ZERO;
        for k in 1..400u32 {
            term = term * (-x) / (k as f64);
            let contrib = term / (k as f64);
            sum = sum + contrib;
            if contrib.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - Dd::ln(xd) - sum
    } else {
        let tiny = Dd::new(1e-300);
        let mut b = xd + Dd::ONE;
        let mut c = Dd::ONE / tiny;
        let mut d = Dd::ONE / b;
        let mut h = d;
        for i in 1..20_000u32 {
            let a = -((i as f64) * (i as f64));
            b = b + Dd::new(2.0);
            d = Dd::ONE / (d * a + b);
            c = b + Dd::new(a) / c;
            let del = c * d;
            h = h * del;
            if (del - Dd::ONE).hi.abs() < 1e-33 {
                break;
            }
        }
        h * Dd::exp(-xd)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let e = e + self.lo * rhs;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        // Long division: two correction steps.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: f64) -> Dd {
        self / Dd::new(rhs)
    }
}
