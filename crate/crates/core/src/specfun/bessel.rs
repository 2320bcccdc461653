use crate::error::{Error, Result};
use crate::specfun::gamma::lgamma_pos;

/// Supported public order range for [`bessel_j`].
pub const BESSEL_NU_MIN: f64 = -0.5;
pub const BESSEL_NU_MAX: f64 = 6.0;

/// Bessel function of the first kind J_nu(x) for nu in [-1/2, 6] and x >= 0.
///
/// The power series is used for x <= max(12, 2|nu|) and the Hankel
/// asymptotic expansion beyond; the crossover keeps the asymptotic series
/// well inside its convergent-looking regime so the envelope-relative error
/// stays below 1e-10 through the oscillatory range needed by the operator
/// quadratures (arguments up to ~2e4).
///
/// ```
/// use rmstat_core::specfun::bessel_j;
/// let j0 = bessel_j(0.0, 0.0).unwrap();
/// assert_eq!(j0, 1.0);
/// // J_{1/2}(x) = sqrt(2/(pi x)) sin x
/// let x = 2.7;
/// let want = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
/// assert!((bessel_j(0.5, x).unwrap() - want).abs() < 1e-12);
/// ```
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    if !(BESSEL_NU_MIN..=BESSEL_NU_MAX).contains(&nu) {
        return Err(Error::Domain(format!(
            "bessel_j supports nu in [{BESSEL_NU_MIN}, {BESSEL_NU_MAX}], got {nu}"
        )));
    }
    Ok(bessel_j_raw(nu, x))
}

/// Derivative J'_nu(x) for x > 0, via J'_nu = (nu/x) J_nu - J_{nu+1}.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "bessel_j_prime requires x > 0, got {x}"
        )));
    }
    if !(BESSEL_NU_MIN..=BESSEL_NU_MAX).contains(&nu) {
        return Err(Error::Domain(format!(
            "bessel_j_prime supports nu in [{BESSEL_NU_MIN}, {BESSEL_NU_MAX}], got {nu}"
        )));
    }
    Ok((nu / x) * bessel_j_raw(nu, x) - bessel_j_raw(nu + 1.0, x))
}

/// Unchecked evaluation, used internally for orders in (-2, 8) that arise
/// from recurrences on the public range.
pub(crate) fn bessel_j_raw(nu: f64, x: f64) -> f64 {
    debug_assert!(nu > -2.0 && nu < 8.5);
    if nu < 0.0 && nu.fract() == 0.0 {
        // J_{-n} = (-1)^n J_n for integer n; the series has a Gamma pole.
        let n = -nu;
        let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * bessel_j_raw(n, x);
    }
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= 12.0f64.max(2.0 * nu.abs()) {
        series_j(nu, x)
    } else {
        hankel_j(nu, x)
    }
}

// Ascending series with compensated summation. The largest term at the
// crossover x = 12 is ~4e3, so the compensation keeps the absolute error
// near 1e-15 despite the alternating cancellation.
fn series_j(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    // t0 = (x/2)^nu / Gamma(nu + 1), with the nu+1 <= 0 case shifted up.
    let t0 = if nu + 1.0 > 0.0 {
        (nu * half.ln() - lgamma_pos(nu + 1.0)).exp()
    } else {
        // Gamma(nu+1) = Gamma(nu+2) / (nu+1); nu+2 > 0 here.
        (nu * half.ln() - lgamma_pos(nu + 2.0)).exp() * (nu + 1.0)
    };
    let q = -half * half;
    let mut term = t0;
    let mut sum = t0;
    let mut comp = 0.0f64;
    for m in 1..400 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        // Kahan update.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

// Hankel asymptotic expansion:
//   J_nu(x) ~ sqrt(2/(pi x)) [ P cos w - Q sin w ],  w = x - nu pi/2 - pi/4,
// with P, Q the even/odd-k sums of a_k(nu)/x^k and
//   a_k = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k).
// Terms are accumulated until they stop decreasing or drop below 1e-18.
fn hankel_j(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0f64;
    let mut q = 0.0f64;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..36 {
        let kf = k as f64;
        let factor = (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        term *= factor;
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        if k % 2 == 1 {
            // Odd k feeds Q with alternating sign (-1)^((k-1)/2).
            let sign = if (k - 1) % 4 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            // Even k feeds P with alternating sign (-1)^(k/2).
            let sign = if k % 4 == 0 { 1.0 } else { -1.0 };
            p += sign * term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let w = x - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}
