//! Special functions: log-gamma, beta, exponential integral and the
//! chi-square law of `||h||^2` for an `N`-dimensional unit-variance complex
//! Gaussian vector (a Gamma(N, 1) variable).

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, 9 terms).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "log_gamma argument",
            value: x,
        });
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    // Integers up to 20 are exact through the factorial table.
    if x == x.trunc() && x <= 21.0 {
        return ln_factorial(x as u32 - 1);
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

fn ln_factorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc.ln()
}

/// `n!` as a float (exact up to 22!).
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Beta function `β(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            what: "beta first argument",
            value: x,
        });
    }
    if !(y > 0.0) {
        return Err(Error::Domain {
            what: "beta second argument",
            value: y,
        });
    }
    Ok((log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?).exp())
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series for `x <= 1`, continued fraction (modified Lentz) above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            what: "E1 argument",
            value: x,
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() - sum)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

/// CDF of `||h||^2` for `h` with `n` i.i.d. unit-variance complex Gaussian
/// entries: `1 - e^{-r} Σ_{l<n} r^l / l!`.
pub fn chi2_cdf(r: f64, n: u32) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return 1.0;
    }
    let s = n as f64;
    if r < s + 1.0 {
        lower_series(r, n)
    } else {
        1.0 - upper_sum(r, n)
    }
}

/// Survival function `1 - chi2_cdf(r, n)`, accurate in both tails.
pub fn chi2_sf(r: f64, n: u32) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r.is_infinite() {
        return 0.0;
    }
    if r < n as f64 + 1.0 {
        1.0 - lower_series(r, n)
    } else {
        upper_sum(r, n)
    }
}

/// Density `r^{n-1} e^{-r} / Γ(n)`.
pub fn chi2_pdf(r: f64, n: u32) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    if r == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    ((n as f64 - 1.0) * r.ln() - r - ln_factorial(n - 1)).exp()
}

fn lower_series(r: f64, n: u32) -> f64 {
    // P(n, r) = e^{-r} r^n / n! * Σ_k r^k / ((n+1)...(n+k))
    let s = n as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..1000 {
        term *= r / (s + k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (s * r.ln() - r - ln_factorial(n)).exp() * sum
}

fn upper_sum(r: f64, n: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..n {
        term *= r / l as f64;
        sum += term;
    }
    (-r).exp() * sum
}

/// Inverse of [`chi2_cdf`] by bracketed bisection on `[0, n + 20√n]`
/// (the upper end doubles until it brackets `p`).
pub fn chi2_cdf_inverse(p: f64, n: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "chi2 inverse probability",
            value: p,
        });
    }
    if n == 0 {
        return Err(Error::Domain {
            what: "chi2 dimension",
            value: 0.0,
        });
    }
    let mut lo = 0.0;
    let mut hi = n as f64 + 20.0 * (n as f64).sqrt();
    while chi2_cdf(hi, n) < p {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let f = chi2_cdf(mid, n);
        if (f - p).abs() <= 1e-12 && (hi - lo) < 1e-9 * mid.max(1e-300) {
            return Ok(mid);
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
