use crate::error::{Error, Result};
use crate::specfun::gamma::lgamma_pos;

/// Stability envelope for the normalized three-term recurrences.
pub const ORTHO_MAX_INDEX: usize = 500;

/// i-th orthonormal Hermite function phi_i(x).
///
/// These orthonormalize {x^i e^{-x^2/2}} over R, so phi_0(x) =
/// pi^{-1/4} e^{-x^2/2} and the normalized recurrence is
/// phi_{i+1} = x sqrt(2/(i+1)) phi_i - sqrt(i/(i+1)) phi_{i-1}.
/// Working on the normalized functions directly (never raw polynomials
/// times weights) keeps every intermediate bounded.
pub fn hermite_fn(i: usize, x: f64) -> Result<f64> {
    check_index(i)?;
    Ok(*hermite_fn_seq(i, x)?.last().unwrap())
}

/// phi_0(x) .. phi_n(x) in one recurrence pass.
pub fn hermite_fn_seq(n: usize, x: f64) -> Result<Vec<f64>> {
    check_index(n)?;
    let mut out = Vec::with_capacity(n + 1);
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(phi0);
    if n == 0 {
        return Ok(out);
    }
    out.push(x * std::f64::consts::SQRT_2 * phi0);
    for i in 1..n {
        let ip1 = (i + 1) as f64;
        let next = x * (2.0 / ip1).sqrt() * out[i] - (i as f64 / ip1).sqrt() * out[i - 1];
        out.push(next);
    }
    Ok(out)
}

/// i-th orthonormal Laguerre function with parameter nu, evaluated at x > 0.
///
/// These orthonormalize {x^{nu/2} e^{-x/2} x^i} over R+, i.e. the weight
/// x^nu e^{-x} absorbed as x^{nu/2} e^{-x/2}:
/// phi_0(x) = x^{nu/2} e^{-x/2} / sqrt(Gamma(nu+1)).
pub fn laguerre_fn(i: usize, nu: f64, x: f64) -> Result<f64> {
    check_index(i)?;
    Ok(*laguerre_fn_seq(i, nu, x)?.last().unwrap())
}

/// phi_0(x) .. phi_n(x) for the Laguerre family in one pass.
pub fn laguerre_fn_seq(n: usize, nu: f64, x: f64) -> Result<Vec<f64>> {
    check_index(n)?;
    if !(nu > -1.0) {
        return Err(Error::Domain(format!(
            "laguerre_fn requires nu > -1, got {nu}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("laguerre_fn requires x > 0, got {x}")));
    }
    let mut out = Vec::with_capacity(n + 1);
    let log_phi0 = 0.5 * nu * x.ln() - 0.5 * x - 0.5 * lgamma_pos(nu + 1.0);
    let phi0 = log_phi0.exp();
    out.push(phi0);
    if n == 0 {
        return Ok(out);
    }
    // Normalized recurrence:
    // phi_{i+1} = [(2i + nu + 1 - x) phi_i - sqrt(i (i+nu)) phi_{i-1}]
    //             / sqrt((i+1)(i + nu + 1)).
    out.push((nu + 1.0 - x) * phi0 / (nu + 1.0).sqrt());
    for i in 1..n {
        let ifl = i as f64;
        let num = (2.0 * ifl + nu + 1.0 - x) * out[i] - (ifl * (ifl + nu)).sqrt() * out[i - 1];
        out.push(num / ((ifl + 1.0) * (ifl + 1.0 + nu)).sqrt());
    }
    Ok(out)
}

fn check_index(i: usize) -> Result<()> {
    if i > ORTHO_MAX_INDEX {
        return Err(Error::StabilityEnvelope(format!(
            "orthonormal function index {i} exceeds the stability envelope {ORTHO_MAX_INDEX}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_legendre;

    #[test]
    fn hermite_ground_state() {
        let want = std::f64::consts::PI.powf(-0.25);
        let got = hermite_fn(0, 0.0).unwrap();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        assert!((got - 0.751_125_544_4).abs() < 1e-9);
    }

    #[test]
    fn odd_hermite_vanishes_at_origin() {
        assert_eq!(hermite_fn(1, 0.0).unwrap(), 0.0);
        assert_eq!(hermite_fn(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hermite_orthonormality_by_quadrature() {
        let q = gauss_legendre(200, -20.0, 20.0).unwrap();
        let seqs: Vec<Vec<f64>> = q
            .nodes()
            .iter()
            .map(|&x| hermite_fn_seq(20, x).unwrap())
            .collect();
        for i in (0..=20).step_by(5) {
            for j in (0..=20).step_by(4) {
                let mut acc = 0.0;
                for (s, &w) in seqs.iter().zip(q.weights()) {
                    acc += w * s[i] * s[j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-10, "({i},{j}): {acc}");
            }
        }
    }

    #[test]
    fn laguerre_ground_state_values() {
        // nu = 0: phi_0(x) = e^{-x/2}, so -> 1 as x -> 0+.
        let got = laguerre_fn(0, 0.0, 1e-12).unwrap();
        assert!((got - 1.0).abs() < 1e-9);
        // nu = 2, x = 1: e^{-1/2}/sqrt(2).
        let got = laguerre_fn(0, 2.0, 1.0).unwrap();
        let want = (-0.5f64).exp() / 2.0f64.sqrt();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.428_881_942_4).abs() < 1e-9);
    }

    #[test]
    fn laguerre_orthonormality_by_quadrature() {
        // The x = u^2 substitution removes the x^{nu/2} endpoint singularity
        // for nu = -1/2, so one rule serves all three parameter values.
        for &nu in &[-0.5, 0.0, 1.0] {
            // Gauss nodes are interior, so starting the interval at zero
            // keeps every evaluation point inside the x > 0 domain.
            let q = gauss_legendre(400, 0.0, 200.0f64.sqrt()).unwrap();
            let seqs: Vec<Vec<f64>> = q
                .nodes()
                .iter()
                .map(|&u| laguerre_fn_seq(20, nu, u * u).unwrap())
                .collect();
            for i in (0..=20).step_by(7) {
                for j in (0..=20).step_by(5) {
                    let mut acc = 0.0;
                    for ((s, &w), &u) in seqs.iter().zip(q.weights()).zip(q.nodes()) {
                        acc += w * 2.0 * u * s[i] * s[j];
                    }
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((acc - want).abs() < 1e-9, "nu={nu} ({i},{j}): {acc}");
                }
            }
        }
    }

    #[test]
    fn recurrences_stable_to_high_index() {
        // Values stay bounded and finite out to the envelope.
        let h = hermite_fn_seq(500, 1.7).unwrap();
        assert!(h.iter().all(|v| v.is_finite() && v.abs() < 10.0));
        let l = laguerre_fn_seq(500, 0.5, 35.0).unwrap();
        assert!(l.iter().all(|v| v.is_finite() && v.abs() < 10.0));
    }

    #[test]
    fn index_and_domain_errors() {
        assert!(hermite_fn(501, 0.0).is_err());
        assert!(laguerre_fn(0, -1.0, 1.0).is_err());
        assert!(laguerre_fn(0, 0.0, 0.0).is_err());
        assert!(laguerre_fn(0, 0.0, -2.0).is_err());
    }
}
