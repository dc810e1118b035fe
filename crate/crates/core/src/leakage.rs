//! Statistics of the interference leakage left by a zero-forcing beamformer
//! under RVQ feedback, and the leakage thresholds built on them.
//!
//! With `Z = sin^2` of the quantization angle, `G ~ beta(1, N-2)` the share
//! of the error vector seen by a fixed direction in the null space, and
//! `R = ||h||^2 ~ Gamma(N, 1)`, the normalized leakage is `V = Z G` and the
//! leakage including the fading magnitude is `D = R V`.
//!
//! The closed forms of `P_V` and `P_D` are alternating binomial sums. They
//! are evaluated in double-double arithmetic alongside a running bound on
//! the rounding error; when the bound exceeds [`CLOSED_FORM_TOL`] (large
//! `B`), evaluation switches to a one-dimensional quadrature over the law
//! of `Z`. Every value reports which path produced it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::channel::{eta, QuantizedCsi};
use crate::config::{CmiMode, SystemConfig};
use crate::dd::{self, Dd, DD_EPS};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::{binomial, chi2_cdf, chi2_sf, factorial};

/// Largest `B` for which the closed forms are attempted at all.
pub const CLOSED_FORM_MAX_BITS: u32 = 8;
/// Largest tolerated rounding-error bound of a closed-form value.
pub const CLOSED_FORM_TOL: f64 = 1e-12;
/// Relative accuracy of the double-double `exp` and `E1`.
const SPECIAL_REL_ERR: f64 = 1e-27;
const FALLBACK_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMethod {
    ClosedForm,
    Fallback,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub method: EvalMethod,
    /// Bound on the absolute evaluation error.
    pub error_bound: f64,
}

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Domain {
            what: "antenna count (need N >= 2)",
            value: n as f64,
        })
    } else {
        Ok(())
    }
}

/// `P_Z(z) = 1 - (1 - z^{N-1})^{2^B}`.
pub fn cdf_z(z: f64, n: usize, bits: u32) -> Result<f64> {
    check_n(n)?;
    check_unit("z", z)?;
    Ok(cdf_z_unchecked(z, n, bits))
}

fn cdf_z_unchecked(z: f64, n: usize, bits: u32) -> f64 {
    let m = 2f64.powi(bits as i32);
    let a = z.powi(n as i32 - 1);
    if a >= 1.0 {
        return 1.0;
    }
    -(m * (-a).ln_1p()).exp_m1()
}

/// Density of `Z`.
pub fn pdf_z(z: f64, n: usize, bits: u32) -> Result<f64> {
    check_n(n)?;
    check_unit("z", z)?;
    let m = 2f64.powi(bits as i32);
    let nm1 = n as f64 - 1.0;
    let a = z.powi(n as i32 - 1);
    let lead = if n == 2 { 1.0 } else { z.powi(n as i32 - 2) };
    if a >= 1.0 {
        return Ok(if bits == 0 { nm1 * lead } else { 0.0 });
    }
    Ok(m * nm1 * lead * ((m - 1.0) * (-a).ln_1p()).exp())
}

/// Inverse of [`cdf_z`].
pub fn quantile_z(u: f64, n: usize, bits: u32) -> f64 {
    let m = 2f64.powi(bits as i32);
    let inner = -((-u).ln_1p() / m).exp_m1();
    inner.powf(1.0 / (n as f64 - 1.0)).clamp(0.0, 1.0)
}

/// `P_G(g) = 1 - (1-g)^{N-2}`; for `N = 2`, `G = 1` almost surely.
pub fn cdf_g(g: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_unit("g", g)?;
    Ok(cdf_g_unchecked(g, n))
}

fn cdf_g_unchecked(g: f64, n: usize) -> f64 {
    if g >= 1.0 {
        return 1.0;
    }
    if n == 2 {
        return 0.0;
    }
    -((n as f64 - 2.0) * (-g).ln_1p()).exp_m1()
}

/// `P(R G <= c)` for `R ~ Gamma(N, 1)` and independent `G`.
fn cdf_rg(c: f64, n: usize) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let mut h = chi2_cdf(c, n as u32);
    let denom = factorial(n as u32 - 1);
    for j in 1..=(n - 2) {
        let term = binomial((n - 2) as u64, j as u64) * (-c).powi(j as i32) * factorial((n - j - 1) as u32)
            / denom
            * chi2_sf(c, (n - j) as u32);
        h -= term;
    }
    h.clamp(0.0, 1.0)
}

/// Distribution of the normalized leakage `V` and of `D = R V`.
#[derive(Clone, Debug)]
pub struct LeakageDistribution {
    n: usize,
    bits: u32,
    closed: Option<ClosedForm>,
}

/// Coefficients of the closed forms. With
/// `c_nm = C(N-2,n) C(M,m) (-1)^{n+m} m / (m(N-1) - n)`,
/// `a_n = sum_m c_nm` and `g_m = sum_n c_nm`:
///
/// `P_V(v) = 1 + (N-1) [ sum_n a_n v^n - sum_m g_m v^{m(N-1)} ]`.
///
/// Both inner sums telescope into products:
/// `a_n = -C(N-2,n) (-1)^n / (N-1) prod_{j=1}^{M} j / (j - n/(N-1))` and
/// `g_m = C(M,m) (-1)^{m+N} m (N-2)! / prod_{j=0}^{N-2} (m(N-1) - j)`.
#[derive(Clone, Debug)]
struct ClosedForm {
    a: Vec<Dd>,
    g: Vec<Dd>,
}

impl ClosedForm {
    fn new(n: usize, bits: u32) -> Self {
        let big_m = 1u64 << bits;
        let nm1 = (n - 1) as u64;
        let nm2 = (n - 2) as u64;
        let a = (0..=nm2)
            .map(|j| {
                let mut prod = Dd::ONE;
                if j > 0 {
                    for t in 1..=big_m {
                        prod = prod * (t as f64) / (Dd::new(t as f64) - Dd::new(j as f64) / (nm1 as f64));
                    }
                }
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                prod * (binomial(nm2, j) * sign) / (nm1 as f64)
            })
            .collect();
        let mut g = vec![Dd::ZERO; big_m as usize + 1];
        let mut c_m = Dd::ONE;
        let fact = factorial(nm2 as u32);
        for m in 1..=big_m {
            c_m = c_m * ((big_m - m + 1) as f64) / (m as f64);
            let mut denom = Dd::ONE;
            for j in 0..=nm2 {
                denom = denom * ((m * nm1 - j) as f64);
            }
            let sign = if (m + n as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
            g[m as usize] = c_m * (sign * m as f64 * fact) / denom;
        }
        ClosedForm { a, g }
    }

    /// Relative rounding growth of one term.
    fn unit(&self) -> f64 {
        (2 * (self.a.len() + self.g.len()) + 64) as f64 * DD_EPS
    }
}

impl LeakageDistribution {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        check_n(n)?;
        if bits > 24 {
            return Err(Error::Domain {
                what: "CDI bits",
                value: bits as f64,
            });
        }
        let closed = (bits <= CLOSED_FORM_MAX_BITS).then(|| ClosedForm::new(n, bits));
        Ok(LeakageDistribution { n, bits, closed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `eta / (N-1)`: mean of `V`, the minimum average normalized leakage.
    pub fn mean_v(&self) -> f64 {
        eta(self.n, self.bits).expect("validated") / (self.n as f64 - 1.0)
    }

    pub fn cdf_v(&self, v: f64) -> Result<CdfValue> {
        check_unit("v", v)?;
        if v == 0.0 || v == 1.0 {
            return Ok(CdfValue {
                value: v,
                method: EvalMethod::ClosedForm,
                error_bound: 0.0,
            });
        }
        if let Some(cf) = self.closed_v(v) {
            return Ok(cf);
        }
        Ok(self.fallback_v(v))
    }

    pub fn cdf_d(&self, d: f64) -> Result<CdfValue> {
        if !(d >= 0.0) {
            return Err(Error::Domain {
                what: "d",
                value: d,
            });
        }
        if d == 0.0 {
            return Ok(CdfValue {
                value: 0.0,
                method: EvalMethod::ClosedForm,
                error_bound: 0.0,
            });
        }
        // P(D > d) <= P(R > d)
        let tail = chi2_sf(d, self.n as u32);
        if tail < 1e-17 {
            return Ok(CdfValue {
                value: 1.0,
                method: EvalMethod::ClosedForm,
                error_bound: tail,
            });
        }
        if let Some(cf) = self.closed_d(d) {
            return Ok(cf);
        }
        Ok(self.fallback_d(d))
    }

    /// Closed form of `P_V`, or `None` if the error bound is too large.
    pub fn closed_v(&self, v: f64) -> Option<CdfValue> {
        let cf = self.closed.as_ref()?;
        let n = self.n;
        let vd = Dd::new(v);
        let mut sum = Dd::ZERO;
        let mut mag = 0.0;
        let mut p = Dd::ONE;
        for (j, coef) in cf.a.iter().enumerate() {
            if j > 0 {
                p = p * vd;
            }
            sum = sum + *coef * p;
            mag += coef.hi.abs() * p.hi;
        }
        let step = vd.powi(n as u32 - 1);
        let mut p = Dd::ONE;
        for m in 1..cf.g.len() {
            p = p * step;
            sum = sum - cf.g[m] * p;
            mag += cf.g[m].hi.abs() * p.hi;
        }
        let value = (Dd::ONE + sum * (n as f64 - 1.0)).to_f64();
        let error_bound = cf.unit() * ((n as f64 - 1.0) * mag + 1.0);
        accept(value, error_bound)
    }

    /// Closed form of `P_D`, or `None` if the error bound is too large:
    ///
    /// `P_D(d) = 1 + e^{-d}/(N-2)! (B1 - B2 - B3) - E1(d)/(N-2)! B4` with
    ///
    /// - `B1 = sum_n a_n sum_{l=0}^{s_n} s_n!/(s_n-l)! d^{N-1-l}`, `s_n = N-1-n`,
    /// - `B2 = g_1 d^{N-1}`,
    /// - `B3 = sum_{m>=2} g_m sum_{l=1}^{i-1} (-1)^{l-1} d^{N-1+l} (i-1-l)!/(i-1)!`,
    /// - `B4 = sum_{m>=2} g_m (-1)^{i-1} d^{m(N-1)} / (i-1)!`,
    ///
    /// where `i = (m-1)(N-1)`.
    pub fn closed_d(&self, d: f64) -> Option<CdfValue> {
        let parts = self.closed_d_braces(d)?;
        let value = parts.value();
        if !value.is_finite() {
            return None;
        }
        accept(value, parts.error_bound())
    }

    /// The four braces of the closed form of `P_D`, for diagnostics and
    /// tests.
    pub fn closed_d_braces(&self, d: f64) -> Option<DBraces> {
        let cf = self.closed.as_ref()?;
        if !(d > 0.0) {
            return None;
        }
        let n = self.n;
        let nm1 = n - 1;
        let dd = Dd::new(d);

        // B1: powers d^{N-1-l}
        let mut b1 = Dd::ZERO;
        let mut mag1 = 0.0;
        for (j, coef) in cf.a.iter().enumerate() {
            let s = nm1 - j;
            // sum_{l=0}^{s} s!/(s-l)! d^{N-1-l}, computed from l = s downwards
            let mut inner = Dd::ZERO;
            let mut ratio = Dd::ONE; // s!/(s-l)!
            let mut inner_mag = 0.0;
            for l in 0..=s {
                if l > 0 {
                    ratio = ratio * ((s - l + 1) as f64);
                }
                let t = ratio * dd.powi((nm1 - l) as u32);
                inner = inner + t;
                inner_mag += t.hi.abs();
            }
            b1 = b1 + *coef * inner;
            mag1 += coef.hi.abs() * inner_mag;
        }

        let dn1 = dd.powi(nm1 as u32);
        let b2 = cf.g[1] * dn1;
        let mag2 = cf.g[1].hi.abs() * dn1.hi.abs();

        // B3 and B4, m >= 2
        let mut b3 = Dd::ZERO;
        let mut mag3 = 0.0;
        let mut b4 = Dd::ZERO;
        let mut mag4 = 0.0;
        let big_m = cf.g.len() - 1;
        // t = d^p / (p - N)! for p = m(N-1), advanced one power at a time
        let mut t = dd.powi(n as u32);
        let mut p = n;
        // B3 inner sum is d^{N-1} T(i-1) with T(q) = d/q (1 - T(q-1)), T(0) = 0;
        // the absolute sum obeys A(q) = d/q (1 + A(q-1))
        let dn1_mag = dn1.hi.abs();
        let mut tq = Dd::ZERO;
        let mut aq = 0.0;
        let mut q = 0;
        for m in 2..=big_m {
            let i = (m - 1) * nm1;
            let target = m * nm1;
            while p < target {
                p += 1;
                t = t * d / Dd::new((p - n) as f64);
            }
            let sign4 = if (i - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            b4 = b4 + cf.g[m] * t * sign4;
            mag4 += cf.g[m].hi.abs() * t.hi.abs();

            while q < i - 1 {
                q += 1;
                tq = (Dd::ONE - tq) * d / Dd::new(q as f64);
                aq = (1.0 + aq) * d / q as f64;
            }
            b3 = b3 + cf.g[m] * dn1 * tq;
            mag3 += cf.g[m].hi.abs() * dn1_mag * aq;
        }

        let fact = factorial(n as u32 - 2);
        let pref = Dd::exp(Dd::new(-d)) / fact;
        let e1 = dd::e1(d) / fact;
        Some(DBraces {
            b1,
            b2,
            b3,
            b4,
            pref,
            e1,
            mags: [mag1, mag2, mag3, mag4],
            unit: cf.unit(),
        })
    }

    /// `P_V(v) = P_Z(v) + int_{P_Z(v)}^1 P_G(v / z(u)) du`.
    pub fn fallback_v(&self, v: f64) -> CdfValue {
        let (n, bits) = (self.n, self.bits);
        let pz = cdf_z_unchecked(v, n, bits);
        if n == 2 {
            return CdfValue {
                value: pz,
                method: EvalMethod::Fallback,
                error_bound: 1e-15,
            };
        }
        let integral = integrate(
            |u| {
                let z = quantile_z(u, n, bits);
                if z <= v {
                    1.0
                } else {
                    cdf_g_unchecked(v / z, n)
                }
            },
            pz,
            1.0,
            FALLBACK_TOL,
        );
        CdfValue {
            value: (pz + integral.value).clamp(0.0, 1.0),
            method: EvalMethod::Fallback,
            error_bound: integral.error.max(1e-15),
        }
    }

    /// `P_D(d) = int_0^1 P(R G <= d / z(u)) du`.
    pub fn fallback_d(&self, d: f64) -> CdfValue {
        let (n, bits) = (self.n, self.bits);
        let integral = integrate(
            |u| {
                let z = quantile_z(u, n, bits);
                if z <= 0.0 {
                    1.0
                } else {
                    cdf_rg(d / z, n)
                }
            },
            0.0,
            1.0,
            FALLBACK_TOL,
        );
        CdfValue {
            value: integral.value.clamp(0.0, 1.0),
            method: EvalMethod::Fallback,
            error_bound: integral.error.max(1e-15),
        }
    }

    /// `P_V^{-1}(p)` by bisection on `[0, 1]`.
    pub fn quantile_v(&self, p: f64) -> Result<f64> {
        invert_cdf(|v| self.cdf_v(v).map(|c| c.value).unwrap_or(f64::NAN), p, 0.0, 1.0)
    }

    /// `P_D^{-1}(p)` by bisection on `[0, 10 N (B+2)]`, doubling the upper
    /// end until it brackets `p`.
    pub fn quantile_d(&self, p: f64) -> Result<f64> {
        let f = |d: f64| self.cdf_d(d).map(|c| c.value).unwrap_or(f64::NAN);
        let mut hi = 10.0 * self.n as f64 * (self.bits as f64 + 2.0);
        while f(hi) < p && hi < 1e6 {
            hi *= 2.0;
        }
        invert_cdf(f, p, 0.0, hi)
    }
}

/// The four braces of the closed form of `P_D`, in double-double.
#[derive(Clone, Copy, Debug)]
pub struct DBraces {
    pub b1: Dd,
    pub b2: Dd,
    pub b3: Dd,
    pub b4: Dd,
    /// `e^{-d}/(N-2)!`
    pub pref: Dd,
    /// `E1(d)/(N-2)!`
    pub e1: Dd,
    mags: [f64; 4],
    unit: f64,
}

impl DBraces {
    pub fn value(&self) -> f64 {
        (Dd::ONE + self.pref * (self.b1 - self.b2 - self.b3) - self.e1 * self.b4).to_f64()
    }

    pub fn error_bound(&self) -> f64 {
        let [m1, m2, m3, m4] = self.mags;
        let scale = self.pref.hi.abs() * (m1 + m2 + m3) + self.e1.hi.abs() * m4;
        self.unit * (scale + 1.0) + SPECIAL_REL_ERR * scale
    }
}

fn accept(value: f64, error_bound: f64) -> Option<CdfValue> {
    if !value.is_finite() || !error_bound.is_finite() || error_bound > CLOSED_FORM_TOL {
        return None;
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return None;
    }
    Some(CdfValue {
        value: value.clamp(0.0, 1.0),
        method: EvalMethod::ClosedForm,
        error_bound,
    })
}

/// Bisection inverse of a nondecreasing function on `[lo, hi]`:
/// halve the interval keeping `cdf(lo) <= target <= cdf(hi)` and return
/// the midpoint once `|cdf(mid) - target|` is within rounding.
pub fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = cdf(lo);
    let f_hi = cdf(hi);
    if !(target >= f_lo && target <= f_hi) {
        return Err(Error::Bracket {
            target,
            lo: f_lo,
            hi: f_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = cdf(mid);
        if (f - target).abs() <= 1e-13 {
            return Ok(mid);
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `P_tilde xi^2 A eta / (N-1)`: the smallest expected leakage a beamformer
/// of power `P_tilde` can cause at a user with the given statistics.
pub fn min_avg_leakage(p_tilde: f64, xi_sq: f64, a: f64, n: usize, bits: u32) -> Result<f64> {
    check_n(n)?;
    Ok(p_tilde * xi_sq * a * eta(n, bits)? / (n as f64 - 1.0))
}

/// Minimum-leakage threshold: `P_tilde eta/(N-1) sum_{j != k} xi_j^2 A_j`
/// (with `A_j = N` for average CF-CMI).
pub fn threshold_malc(p_tilde: f64, csi: &QuantizedCsi, k: usize, config: &SystemConfig) -> Result<f64> {
    let n = csi.n() as f64;
    let sum: f64 = (0..csi.k())
        .filter(|&j| j != k)
        .map(|j| csi.xi_sq[j] * if config.cmi_mode == CmiMode::Average { n } else { csi.cmi[j] })
        .sum();
    Ok(p_tilde * csi.eta / (n - 1.0) * sum)
}

/// Relaxed threshold: the `delta` percentile of the zero-forcing leakage,
/// `P_tilde sum_{j != k} xi_j^2 P_D^{-1}(delta)` for average CF-CMI and
/// `P_tilde sum_{j != k} xi_j^2 A_j P_V^{-1}(delta)` otherwise.
pub fn threshold_ralc(p_tilde: f64, csi: &QuantizedCsi, k: usize, config: &SystemConfig) -> Result<f64> {
    let designer = ThresholdDesigner::cached(config)?;
    Ok(designer.ralc(p_tilde, csi, k))
}

/// Leakage-threshold kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    Malc,
    Ralc,
}

/// Percentile point for the relaxed threshold, computed once per
/// `(N, B, CF-CMI mode, delta)`.
#[derive(Clone, Debug)]
pub struct ThresholdDesigner {
    pub mode: CmiMode,
    pub delta: f64,
    /// `P_D^{-1}(delta)` (average CF-CMI) or `P_V^{-1}(delta)`.
    pub percentile: f64,
    /// Lower end of the admissible `delta` interval.
    pub delta_min: f64,
    pub method: EvalMethod,
}

type CacheKey = (usize, u32, bool, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<ThresholdDesigner>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<ThresholdDesigner>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl ThresholdDesigner {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let dist = LeakageDistribution::new(config.n, config.cdi_bits)?;
        let average = config.cmi_mode == CmiMode::Average;
        let nf = config.n as f64;
        let (delta_min, method) = if average {
            let c = dist.cdf_d(nf * dist.mean_v())?;
            (c.value, c.method)
        } else {
            let c = dist.cdf_v(dist.mean_v())?;
            (c.value, c.method)
        };
        if !(config.delta > delta_min && config.delta < 1.0) {
            let msg = format!(
                "delta = {} is outside the admissible interval ({delta_min:.6}, 1)",
                config.delta
            );
            if config.allow_low_delta && config.delta < 1.0 && config.delta > 0.0 {
                log::warn!("{msg}; continuing because low delta is allowed");
            } else {
                return Err(Error::Config(msg));
            }
        }
        let percentile = if average {
            dist.quantile_d(config.delta)?
        } else {
            dist.quantile_v(config.delta)?
        };
        let method = if average {
            dist.cdf_d(percentile)?.method
        } else {
            dist.cdf_v(percentile)?.method
        }
        .min_with(method);
        Ok(ThresholdDesigner {
            mode: config.cmi_mode,
            delta: config.delta,
            percentile,
            delta_min,
            method,
        })
    }

    /// Shared instance for the configuration's `(N, B, mode, delta)`.
    pub fn cached(config: &SystemConfig) -> Result<Arc<Self>> {
        let key = (
            config.n,
            config.cdi_bits,
            config.cmi_mode == CmiMode::Average,
            config.delta.to_bits(),
        );
        if let Some(d) = cache().lock().expect("threshold cache poisoned").get(&key) {
            return Ok(d.clone());
        }
        let designer = Arc::new(Self::new(config)?);
        cache()
            .lock()
            .expect("threshold cache poisoned")
            .insert(key, designer.clone());
        Ok(designer)
    }

    pub fn ralc(&self, p_tilde: f64, csi: &QuantizedCsi, k: usize) -> f64 {
        let sum: f64 = (0..csi.k())
            .filter(|&j| j != k)
            .map(|j| {
                if self.mode == CmiMode::Average {
                    csi.xi_sq[j]
                } else {
                    csi.xi_sq[j] * csi.cmi[j]
                }
            })
            .sum();
        p_tilde * sum * self.percentile
    }
}

impl EvalMethod {
    fn min_with(self, other: EvalMethod) -> EvalMethod {
        if self == EvalMethod::Fallback || other == EvalMethod::Fallback {
            EvalMethod::Fallback
        } else {
            EvalMethod::ClosedForm
        }
    }
}

/// Threshold of either kind for user `k` at power `p_tilde`.
pub fn threshold(
    kind: ThresholdKind,
    p_tilde: f64,
    csi: &QuantizedCsi,
    k: usize,
    config: &SystemConfig,
) -> Result<f64> {
    match kind {
        ThresholdKind::Malc => threshold_malc(p_tilde, csi, k, config),
        ThresholdKind::Ralc => threshold_ralc(p_tilde, csi, k, config),
    }
}
