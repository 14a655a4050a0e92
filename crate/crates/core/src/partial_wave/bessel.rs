//! Bessel functions of the first kind for real order, and their zeros.
//!
//! `J_nu(x)` comes from the ascending series wherever its terms decrease
//! monotonically (`x <= 2` or `x²/4 <= nu + 1`). Elsewhere Steed's method
//! is used: a continued fraction for `J'/J` at order `nu`, backward
//! recurrence down to an order `mu < x`, and the complex continued fraction
//! for `(J' + iY')/(J + iY)` at `mu`, normalized through the Wronskian.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: f64 = 200.0;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 1e4;
/// Largest zero index accepted by [`bessel_zero`].
pub const MAX_ZERO_INDEX: usize = 10_000;

const FPMIN: f64 = 1e-300;
const CF_EPS: f64 = 4.0 * f64::EPSILON;
const RESCALE: f64 = 1e200;

/// `J_nu(x)` for `nu` in `[0, 200]` and `x` in `[0, 1e4]`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(format!(
            "bessel argument {x} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    Ok(j_and_derivative(nu, x)?.0)
}

/// `(J_nu(x), J'_nu(x))` without the public range limits.
pub(crate) fn j_and_derivative(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(nu >= 0.0 && nu.is_finite() && x >= 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("invalid bessel input nu = {nu}, x = {x}")));
    }
    if x == 0.0 {
        let value = if nu == 0.0 { 1.0 } else { 0.0 };
        let slope = match nu {
            n if n == 1.0 => 0.5,
            n if n > 0.0 && n < 1.0 => f64::INFINITY,
            _ => 0.0,
        };
        return Ok((value, slope));
    }
    if x <= 2.0 || 0.25 * x * x <= nu + 1.0 {
        Ok(ascending_series(nu, x))
    } else {
        steed(nu, x)
    }
}

fn ascending_series(nu: f64, x: f64) -> (f64, f64) {
    let log_prefactor = nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0);
    if log_prefactor < -745.0 {
        return (0.0, 0.0);
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = nu;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (nu + k));
        sum += term;
        dsum += term * (2.0 * k + nu);
        if term.abs() <= 0.5 * f64::EPSILON * sum.abs() || k > 500.0 {
            break;
        }
    }
    let pre = log_prefactor.exp();
    (pre * sum, pre * dsum / x)
}

fn steed(nu: f64, x: f64) -> Result<(f64, f64)> {
    let nl = if nu > x - 1.5 {
        (nu - x + 1.5).floor() as usize
    } else {
        0
    };
    let mu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;
    let max_iter = 100_000 + 20 * x as usize;

    // CF1: h = J'_nu / J_nu, modified Lentz
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..max_iter {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numeric(format!(
            "J'/J continued fraction did not converge at nu = {nu}, x = {x}"
        )));
    }

    // unnormalized downward recurrence from nu to mu
    let mut rjl = isign * 1e-30;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE {
            rjl /= RESCALE;
            rjpl /= RESCALE;
            rjl1 /= RESCALE;
            rjp1 /= RESCALE;
        }
    }
    if rjl == 0.0 {
        rjl = f64::EPSILON;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J' + iY') / (J + iY) at order mu
    let mut a = 0.25 - mu * mu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let fact2 = a * xi / (p * p + q * q);
    let mut cr = br + q * fact2;
    let mut ci = bi + p * fact2;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 1..max_iter {
        a += 2.0 * i as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        let fact3 = a / (cr * cr + ci * ci);
        cr = br + cr * fact3;
        ci = bi - ci * fact3;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numeric(format!(
            "Steed continued fraction did not converge at nu = {nu}, x = {x}"
        )));
    }

    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let scale = rjmu / rjl;
    Ok((rjl1 * scale, rjp1 * scale))
}

fn check_order(nu: f64) -> Result<()> {
    if (0.0..=MAX_ORDER).contains(&nu) {
        Ok(())
    } else {
        Err(Error::domain(format!("bessel order {nu} outside [0, {MAX_ORDER}]")))
    }
}

/// The `k`-th positive zero `j_{nu,k}` (`k >= 1`).
pub fn bessel_zero(nu: f64, k: usize) -> Result<f64> {
    check_order(nu)?;
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::domain(format!(
            "zero index {k} outside [1, {MAX_ZERO_INDEX}]"
        )));
    }
    if k > 50 {
        if let Some(guess) = mcmahon(nu, k) {
            let (lo, hi) = (guess - 0.4, guess + 0.4);
            let flo = j_and_derivative(nu, lo)?.0;
            let fhi = j_and_derivative(nu, hi)?.0;
            if flo * fhi < 0.0 {
                return refine(nu, lo, hi, flo);
            }
            return Err(Error::numeric(format!(
                "no sign change in [{lo}, {hi}] around the asymptotic estimate of j({nu}, {k})"
            )));
        }
    }
    Ok(*bessel_zeros(nu, k)?.last().expect("k >= 1"))
}

/// The first `count` positive zeros of `J_nu`, ascending.
///
/// Zeros are located one at a time. Consecutive zeros are more than
/// `j_{0,2} - j_{0,1} > 3.1` apart, so a scan with step 0.5 from a point
/// known to lie between `j_k` and `j_{k+1}` cannot skip a root. The start
/// point uses the monotonicity of the zero spacing: above `pi` and
/// shrinking for `nu > 1/2`, below `pi` and growing for `nu < 1/2`.
pub fn bessel_zeros(nu: f64, count: usize) -> Result<Vec<f64>> {
    check_order(nu)?;
    let mut zeros: Vec<f64> = Vec::with_capacity(count);
    while zeros.len() < count {
        let start = match zeros.len() {
            0 => nu,
            1 => zeros[0] + 2.5,
            n => {
                let last = zeros[n - 1];
                let spacing = last - zeros[n - 2];
                let lower = if nu < 0.5 { spacing } else { PI };
                last + lower - 0.01
            }
        };
        zeros.push(scan_for_zero(nu, start, zeros.len() + 1)?);
    }
    Ok(zeros)
}

/// Zeros of `J_nu` below `limit`.
pub fn bessel_zeros_below(nu: f64, limit: f64) -> Result<Vec<f64>> {
    check_order(nu)?;
    let mut zeros: Vec<f64> = Vec::new();
    loop {
        let start = match zeros.len() {
            0 => nu,
            1 => zeros[0] + 2.5,
            n => {
                let spacing = zeros[n - 1] - zeros[n - 2];
                zeros[n - 1] + if nu < 0.5 { spacing } else { PI } - 0.01
            }
        };
        if start >= limit {
            break;
        }
        let z = scan_for_zero(nu, start, zeros.len() + 1)?;
        if z >= limit {
            break;
        }
        zeros.push(z);
    }
    Ok(zeros)
}

fn scan_for_zero(nu: f64, start: f64, k: usize) -> Result<f64> {
    const STEP: f64 = 0.5;
    let mut a = start;
    let mut fa = j_and_derivative(nu, a)?.0;
    if fa == 0.0 && k > 1 {
        return Ok(a);
    }
    // no zero index is this far past the start for nu <= 200
    for _ in 0..200 {
        let b = a + STEP;
        let fb = j_and_derivative(nu, b)?.0;
        if fb == 0.0 {
            return Ok(b);
        }
        if fa * fb < 0.0 {
            return refine(nu, a, b, fa);
        }
        a = b;
        fa = fb;
    }
    Err(Error::numeric(format!(
        "bracket failure: no sign change of J_{nu} within 100 of x = {start} (zero #{k})"
    )))
}

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with a sign change.
fn refine(nu: f64, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64> {
    let lo_negative = f_lo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, fp) = j_and_derivative(nu, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if (f < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / fp;
        let next = if fp != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(x);
        }
    }
    Err(Error::numeric(format!(
        "zero refinement for J_{nu} stalled in [{lo}, {hi}]"
    )))
}

/// McMahon's large-`k` expansion, when its trailing terms are negligible.
fn mcmahon(nu: f64, k: usize) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let beta = (k as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * beta;
    let t1 = (mu - 1.0) / e;
    let t2 = 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3));
    let t3 = 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5));
    if t2.abs() + t3.abs() > 1e-3 || beta - t1 <= nu {
        return None;
    }
    Some(beta - t1 - t2 - t3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(2.3, 0.0).unwrap(), 0.0);
        let v = bessel_j(0.5, PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-14, "{v}");
        for &x in &[0.1, 1.0, 2.5, 7.0, 33.0, 99.0, 850.0] {
            let j = bessel_j(0.5, x).unwrap();
            let exact = (2.0 / (PI * x)).sqrt() * x.sin();
            // the closed form itself loses ~x·eps in sin(x)
            let tol = 1e-13 * x.max(1.0);
            assert!((j - exact).abs() < tol, "x = {x}: {j} vs {exact}");
            let j15 = bessel_j(1.5, x).unwrap();
            let exact15 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((j15 - exact15).abs() < tol, "x = {x}: {j15} vs {exact15}");
        }
    }

    #[test]
    fn range_checks() {
        assert!(bessel_j(-0.1, 1.0).is_err());
        assert!(bessel_j(200.5, 1.0).is_err());
        assert!(bessel_j(1.0, -1.0).is_err());
        assert!(bessel_j(1.0, 2e4).is_err());
        assert!(bessel_zero(1.0, 0).is_err());
        assert!(bessel_zero(201.0, 1).is_err());
    }

    #[test]
    fn half_order_zeros_are_multiples_of_pi() {
        for k in [1usize, 2, 3, 10, 49, 50, 51, 400, 10_000] {
            let z = bessel_zero(0.5, k).unwrap();
            let exact = k as f64 * PI;
            assert!(((z - exact) / exact).abs() < 1e-12, "k = {k}: {z}");
        }
    }

    #[test]
    fn asymptotic_and_sequential_zeros_agree() {
        for &nu in &[0.0, 0.3, 2.7, 12.0] {
            let seq = bessel_zeros(nu, 80).unwrap();
            for k in 51..=80 {
                let z = bessel_zero(nu, k).unwrap();
                assert!(((z - seq[k - 1]) / z).abs() < 1e-13, "nu = {nu}, k = {k}");
            }
        }
    }

    #[test]
    fn zeros_below_limit() {
        let z = bessel_zeros_below(0.0, 20.0).unwrap();
        assert_eq!(z.len(), 6);
        assert!(z[5] < 20.0);
        let all = bessel_zeros(0.0, 7).unwrap();
        assert!(all[6] > 20.0);
        assert_eq!(&all[..6], &z[..]);
    }
}
