//! Reciprocal gamma and the two-parameter Mittag-Leffler function on the real line.
//!
//! `E_{a,b}(z) = sum_k z^k / Gamma(a k + b)`. The power series is only usable
//! for small negative arguments: for `a < 1` its terms grow to enormous size
//! before they decay, and the alternating sum cancels catastrophically. For
//! `z < -1` the function is evaluated instead from the real integral
//!
//! ```text
//! E_{a,b}(-x) = 1/(a pi) int_0^inf r^((1-b)/a) exp(-r^(1/a))
//!               (r sin(pi (1-b)) + x sin(pi (1-b+a))) / (r^2 + 2 r x cos(a pi) + x^2) dr
//! ```
//!
//! (valid for `0 < a < 1`, `0 < b < 1 + a`), or from the algebraic asymptotic
//! expansion when its exponentially small remainder is negligible.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

// Rational approximation of Gamma(1 + z) on [0, 1) (W. J. Cody's coefficients).
const GAMMA_P: [f64; 8] = [
    -1.716_185_138_865_495_e0,
    2.476_565_080_557_592_e1,
    -3.798_042_564_709_456_e2,
    6.293_311_553_128_184_e2,
    8.669_662_027_904_133_e2,
    -3.145_127_296_884_837_e4,
    -3.614_441_341_869_117_e4,
    6.645_614_382_024_054_e4,
];
const GAMMA_Q: [f64; 8] = [
    -3.084_023_001_197_39_e1,
    3.153_506_269_796_041_e2,
    -1.015_156_367_490_219_e3,
    -3.107_771_671_572_311_e3,
    2.253_811_842_098_015_e4,
    4.755_846_277_527_881_e3,
    -1.346_599_598_649_693_e5,
    -1.151_322_596_755_535_e5,
];

/// Largest argument with a finite double-precision gamma value.
const GAMMA_MAX_ARG: f64 = 171.0;

/// Gamma(1 + z) for z in [0, 1).
fn gamma_1p(z: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 1.0;
    for (p, q) in GAMMA_P.iter().zip(GAMMA_Q.iter()) {
        num = (num + p) * z;
        den = den * z + q;
    }
    num / den + 1.0
}

/// Gamma(x) for 0 < x <= GAMMA_MAX_ARG.
fn gamma_pos(x: f64) -> f64 {
    if x < 1.0 {
        return gamma_1p(x) / x;
    }
    let mut y = x;
    let mut prod = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        prod *= y;
    }
    prod * gamma_1p(y - 1.0)
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 30.0 {
        gamma_pos(x).ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// sin(pi x) with exact argument reduction.
fn sin_pi(x: f64) -> f64 {
    let mut r = x % 2.0;
    if r < 0.0 {
        r += 2.0;
    }
    if r <= 0.25 {
        (PI * r).sin()
    } else if r < 0.75 {
        (PI * (r - 0.5)).cos()
    } else if r <= 1.25 {
        (PI * (1.0 - r)).sin()
    } else if r < 1.75 {
        -(PI * (r - 1.5)).cos()
    } else {
        -(PI * (2.0 - r)).sin()
    }
}

/// `1 / Gamma(x)`, an entire function: zero at the poles `0, -1, -2, ...`.
pub fn recip_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x > GAMMA_MAX_ARG {
        return (-ln_gamma_stirling(x)).exp();
    }
    if x >= 0.5 {
        return 1.0 / gamma_pos(x);
    }
    if x > 0.0 {
        return x / gamma_1p(x);
    }
    // Reflection: 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi, with Gamma(1 - x) = (-x) Gamma(-x).
    let s = sin_pi(x) / PI;
    let w = -x;
    if w + 1.0 > GAMMA_MAX_ARG {
        return s.signum() * (s.abs().ln() + ln_gamma_stirling(1.0 + w)).exp();
    }
    let g = if w < 1.0 {
        gamma_1p(w)
    } else {
        w * gamma_pos(w)
    };
    s * g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlfParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MlfParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::Unsupported(format!(
                "alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// One-parameter function `E_alpha = E_{alpha,1}`.
    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }
}

/// Evaluates `E_{alpha,beta}(z)` for `alpha` in (0, 1] and real `z`.
///
/// Relative accuracy is about 1e-12 or better on `alpha` in [0.3, 1],
/// `z` in [-50, 5]. With `alpha = 1` and non-integer `beta`, arguments
/// below -1 are not supported.
pub fn mittag_leffler(p: MlfParams, z: f64) -> Result<f64> {
    let MlfParams { alpha, beta } = MlfParams::new(p.alpha, p.beta)?;
    if alpha > 1.0 {
        return Err(Error::Unsupported(format!("alpha = {alpha} > 1")));
    }
    if z.is_nan() {
        return Err(Error::Unsupported("z is NaN".into()));
    }
    eval(alpha, beta, z)
}

fn eval(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(recip_gamma(beta));
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    if z >= -1.0 {
        return Ok(taylor(alpha, beta, z));
    }
    if alpha == 1.0 {
        // E_{1,k+1}(z) = (E_{1,k}(z) - 1/Gamma(k)) / z, starting from exp.
        if beta == beta.floor() {
            let mut e = z.exp();
            let mut k = 1.0;
            while k < beta {
                e = (e - recip_gamma(k)) / z;
                k += 1.0;
            }
            return Ok(e);
        }
        return Err(Error::Unsupported(format!(
            "alpha = 1 with non-integer beta = {beta} at z = {z}"
        )));
    }
    if beta > 1.0 {
        // E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z
        let lower = eval(alpha, beta - alpha, z)?;
        return Ok((lower - recip_gamma(beta - alpha)) / z);
    }
    let x = -z;
    // Beyond the algebraic series, E(-x) carries a term of size
    // exp(x^(1/alpha) cos(pi / alpha)); the series alone is used only when it
    // is far below double precision.
    let decay = x.powf(1.0 / alpha) * (PI / alpha).cos();
    if decay <= -60.0 {
        if let Some(v) = asymptotic(alpha, beta, x) {
            return Ok(v);
        }
    }
    Ok(integral(alpha, beta, x))
}

fn taylor(alpha: f64, beta: f64, z: f64) -> f64 {
    let small = z.abs() <= 1.0;
    let lnz = z.abs().ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..20_000u32 {
        let arg = alpha * k as f64 + beta;
        let mag = if small {
            z.abs().powi(k as i32) * recip_gamma(arg)
        } else {
            (k as f64 * lnz - ln_gamma(arg)).exp()
        };
        let term = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        sum += term;
        if k > 0 && mag <= prev && mag <= 1e-17 * sum.abs() {
            break;
        }
        prev = mag;
    }
    sum
}

/// `-sum_{k>=1} (-x)^-k / Gamma(beta - alpha k)`, truncated at the smallest term.
///
/// Truncation is judged on the bound `|1/Gamma(y)| <= Gamma(1 - y) / pi` for
/// `y <= 0`, since individual terms vanish near the poles of Gamma.
fn asymptotic(alpha: f64, beta: f64, x: f64) -> Option<f64> {
    let mut sum: f64 = 0.0;
    let mut xk = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..500 {
        xk /= x;
        let y = beta - alpha * k as f64;
        let term = xk * recip_gamma(y);
        sum += if k % 2 == 1 { term } else { -term };
        let bound = if y <= 0.0 {
            (ln_gamma(1.0 - y) - k as f64 * x.ln()).exp() / PI
        } else {
            term.abs()
        };
        if bound <= 1e-17 * sum.abs() {
            return Some(sum);
        }
        if bound > prev {
            return None;
        }
        prev = bound;
    }
    None
}

fn integral(alpha: f64, beta: f64, x: f64) -> f64 {
    let (s, c) = (PI * alpha).sin_cos();
    let s1 = (PI * (1.0 - beta)).sin();
    let s2 = (PI * (1.0 - beta + alpha)).sin();
    let p = (1.0 - beta) / alpha;
    let inv_alpha = 1.0 / alpha;
    let kernel = |r: f64| {
        if r == 0.0 {
            return if p == 0.0 { x * s2 / (x * x) } else { 0.0 };
        }
        let e = (-r.powf(inv_alpha)).exp();
        if e == 0.0 {
            return 0.0;
        }
        r.powf(p) * e * (r * s1 + x * s2) / (r * r + 2.0 * r * x * c + x * x)
    };
    // exp(-r^(1/alpha)) < 1e-30 beyond this point.
    let upper = 70f64.powf(alpha);
    let mut breaks = Vec::new();
    if c < 0.0 {
        // Denominator minimum (a sharp peak when alpha is close to 1).
        breaks.push(-x * c);
        let width = x * s;
        breaks.push(-x * c - width);
        breaks.push(-x * c + width);
    }
    quad::integrate_split(kernel, 0.0, upper, &breaks, 1e-14, 0.0) / (alpha * PI)
}

/// `v0 * E_alpha(-theta t^alpha)`, the decay envelope.
pub fn ml_envelope(alpha: f64, theta: f64, v0: f64, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Parameter(format!("t = {t} must be nonnegative")));
    }
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!(
            "theta = {theta} must be positive"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} not in (0, 1]")));
    }
    Ok(v0 * mittag_leffler(MlfParams::one(alpha)?, -theta * t.powf(alpha))?)
}
