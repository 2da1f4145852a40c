//! Special functions needed by the model: log-gamma and the modified
//! Bessel function of the second kind.
//!
//! `K_nu(x)` is evaluated by Temme's series for `x <= 2` and a
//! Thompson–Barnett continued fraction for `x > 2`, both at reduced order
//! `|mu| <= 1/2`, followed by the (stable) upward recurrence in the
//! order. Everything is tracked in a scaled form so that `ln_bessel_k`
//! stays finite where `K` itself would overflow.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub use statrs::function::gamma::ln_gamma;

const EPS: f64 = f64::EPSILON;
const MAX_ITER: usize = 20_000;

/// Log of the multivariate gamma function `Gamma_p(a)`.
pub fn ln_mv_gamma(p: usize, a: f64) -> f64 {
    let mut acc = 0.25 * (p * (p - 1)) as f64 * PI.ln();
    for j in 0..p {
        acc += ln_gamma(a - 0.5 * j as f64);
    }
    acc
}

/// `gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)]/(2 mu)`, stable at `mu -> 0`,
/// plus `gam2`, `1/Gamma(1+mu)` and `1/Gamma(1-mu)`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let gampl = (-ln_gamma(1.0 + mu)).exp();
    let gammi = (-ln_gamma(1.0 - mu)).exp();
    let gam1 = if mu.abs() < 1e-3 {
        // odd Taylor terms of 1/Gamma(1+z); even ones cancel
        let m2 = mu * mu;
        -(0.577_215_664_901_532_9
            + m2 * (-0.042_002_635_034_095_24 + m2 * -0.042_197_734_555_544_34))
    } else {
        (gammi - gampl) / (2.0 * mu)
    };
    let gam2 = 0.5 * (gammi + gampl);
    (gam1, gam2, gampl, gammi)
}

/// `ln K_nu(x)` for real order and `x > 0`.
pub fn ln_bessel_k(order: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParam(format!(
            "bessel_k requires x > 0, got {x}"
        )));
    }
    if !order.is_finite() {
        return Err(Error::InvalidParam("bessel_k order must be finite".into()));
    }
    // K_{-nu} = K_{nu}
    let nu = order.abs();
    let n = (nu + 0.5).floor() as usize;
    let mu = nu - n as f64; // |mu| <= 1/2

    // (ln K_mu, ln K_{mu+1}) at reduced order
    let (lk0, lk1) = if x <= 2.0 {
        k_temme_series(mu, x)
    } else {
        k_continued_fraction(mu, x)
    };
    if n == 0 {
        return Ok(lk0);
    }

    // upward recurrence K_{m+1} = K_{m-1} + 2m/x K_m in scaled form
    let mut scale = lk1;
    let mut k0 = (lk0 - scale).exp();
    let mut k1 = 1.0;
    let mut m = mu + 1.0;
    for _ in 1..n {
        let k2 = k0 + (2.0 * m / x) * k1;
        k0 = k1;
        k1 = k2;
        m += 1.0;
        if k1 > 1e280 {
            k0 *= 1e-280;
            k1 *= 1e-280;
            scale += 280.0 * std::f64::consts::LN_10;
        }
    }
    Ok(scale + k1.ln())
}

/// `K_nu(x)` in linear scale; overflows to `inf` where the log form
/// exceeds ~709.
pub fn bessel_k(order: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_k(order, x)?.exp())
}

// Temme's series, x <= 2, |mu| <= 1/2. Returns (ln K_mu, ln K_{mu+1}).
fn k_temme_series(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / gampl;
    let mut q = 0.5 / (e * gammi);
    let mut c = 1.0;
    let d2 = x2 * x2;
    let mut sum1 = p;
    let mut i = 1.0;
    loop {
        ff = (i * ff + p + q) / (i * i - mu * mu);
        c *= d2 / i;
        p /= i - mu;
        q /= i + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - i * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
        i += 1.0;
        if i as usize > MAX_ITER {
            break;
        }
    }
    (sum.ln(), (sum1 * 2.0 / x).ln())
}

// Thompson–Barnett CF2, x > 2, |mu| <= 1/2. Returns (ln K_mu, ln K_{mu+1}).
fn k_continued_fraction(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    // ln K_mu = 0.5 ln(pi/(2x)) - x - ln s
    let lk0 = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
    let lk1 = lk0 + ((mu + x + 0.5 - h) / x).ln();
    (lk0, lk1)
}
