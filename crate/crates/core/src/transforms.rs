//! Numerical integral transforms: the cosine transform C(f), the Fourier
//! transform with the convention f_hat(xi) = (1/2pi) int f e^{-i xi x} dx,
//! the Mellin transform on the vertical line 2iy, and the paired integral
//! int_0^inf x C(f) C(g) dx.
//!
//! Oscillatory integrals use fixed-order Gauss panels sized so every cosine
//! oscillation receives at least `oscillation_safety` nodes, followed by a
//! half-period tail summed with iterated averaging (the tail integrals
//! alternate in sign, so the averaging table converges geometrically). The
//! Mellin singularity at x = 0 is removed by an analytic subtraction rather
//! than a contour shift.

use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, Quadrature};
use crate::symbols::TestFunction;
use crate::C64;

/// Quadrature budget for one transform evaluation.
#[derive(Debug, Clone, Copy)]
pub struct TransformConfig {
    /// Minimum number of panels across the non-oscillatory head.
    pub panel_count: usize,
    /// Gauss points per panel.
    pub points_per_panel: usize,
    /// Hard cap on the integration range [0, truncation_radius] for slowly
    /// decaying integrands.
    pub truncation_radius: f64,
    /// Minimum quadrature points per oscillation period.
    pub oscillation_safety: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            panel_count: 48,
            points_per_panel: 16,
            truncation_radius: 400.0,
            oscillation_safety: 4.0,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panel_count == 0
            || self.points_per_panel < 4
            || !(self.truncation_radius > 0.0)
            || !(self.oscillation_safety > 0.0)
        {
            return Err(Error::Config(
                "transform config requires positive fields and points_per_panel >= 4".into(),
            ));
        }
        Ok(())
    }

    /// Panel width that keeps at least `oscillation_safety` nodes per period
    /// of cos(omega y), never coarser than `points_per_panel / 2` radians of
    /// phase per panel.
    fn panel_width(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return f64::INFINITY;
        }
        let by_phase = 0.5 * self.points_per_panel as f64 / omega;
        let by_safety =
            (2.0 * std::f64::consts::PI / omega) * self.points_per_panel as f64
                / self.oscillation_safety;
        by_phase.min(by_safety)
    }
}

const MAX_PANELS: usize = 300_000;
const MAX_TAIL_HALF_PERIODS: usize = 256;

// Fixed smoothing depth for the alternating half-period tail. A binomial
// average of the last DEPTH+1 partial sums cancels the alternation to
// order DEPTH while staying numerically stable however many terms arrive
// (an ever-deepening average table turns factorially unstable instead).
const TAIL_DEPTH: usize = 12;
const TAIL_BINOMIAL: [f64; TAIL_DEPTH + 1] = [
    1.0, 12.0, 66.0, 220.0, 495.0, 792.0, 924.0, 792.0, 495.0, 220.0, 66.0, 12.0, 1.0,
];

// How far past the |g| ~ 1e-6 decay hint the head integral runs; the extra
// factor pushes the plain-truncation error of fast-decaying integrands to
// the machine floor.
const DECAY_EXTENSION: f64 = 3.0;

/// Reusable base rule mapped onto each panel.
fn base_rule(points: usize) -> Quadrature {
    gauss_legendre(points, 0.0, 1.0).expect("points_per_panel validated > 0")
}

// Graded panel integration: widths start at a base resolving O(1) variation
// of the integrand near the origin, grow proportionally to the distance out
// (algebraic tails flatten in relative terms), and are always capped by the
// oscillation width.
fn integrate_panels<F: Fn(f64) -> C64>(
    g: &F,
    a: f64,
    b: f64,
    osc_width: f64,
    cfg: &TransformConfig,
) -> Result<C64> {
    if b <= a {
        return Ok(C64::new(0.0, 0.0));
    }
    let span = b - a;
    let base = (span / cfg.panel_count as f64).min(0.25);
    let rule = base_rule(cfg.points_per_panel);
    let mut acc = C64::new(0.0, 0.0);
    let mut cursor = a;
    let mut panels = 0usize;
    while cursor < b {
        let w = osc_width
            .min(base.max(cursor.abs() / 6.0))
            .min(b - cursor)
            .max(span * 1e-12);
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            acc += wt * w * g(cursor + t * w);
        }
        cursor += w;
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Resolution(format!(
                "oscillatory integral over ({a}, {b}) exceeds the {MAX_PANELS}-panel budget"
            )));
        }
    }
    Ok(acc)
}

/// Plain decaying integral int_0^inf g(y) dy: panel quadrature to the
/// truncation radius plus a graded far tail for algebraically decaying
/// integrands. This is the x = 0 cosine transform of a map without stored
/// metadata.
pub fn integrate_decay<F: Fn(f64) -> C64>(
    g: &F,
    decay_radius: f64,
    cfg: &TransformConfig,
) -> Result<C64> {
    cfg.validate()?;
    let end = (decay_radius.max(1.0) * DECAY_EXTENSION).min(cfg.truncation_radius);
    Ok(integrate_panels(g, 0.0, end, f64::INFINITY, cfg)? + far_tail(g, end, cfg))
}

/// int_from^inf g(y) dy for a smooth decaying (non-oscillatory) integrand:
/// geometrically graded panels out to where the pieces stop mattering.
/// Handles 1/y^2-type tails that a fixed truncation radius would drop.
pub fn far_tail<F: Fn(f64) -> C64>(g: &F, from: f64, cfg: &TransformConfig) -> C64 {
    let rule = base_rule(cfg.points_per_panel.max(8));
    let mut acc = C64::new(0.0, 0.0);
    let mut cursor = from.max(1e-6);
    for _ in 0..2000 {
        let w = cursor / 6.0;
        let mut piece = C64::new(0.0, 0.0);
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            piece += wt * w * g(cursor + t * w);
        }
        acc += piece;
        cursor += w;
        if piece.norm() < 1e-16 * acc.norm().max(1e-12) || cursor > 1e12 {
            break;
        }
    }
    acc
}

/// Cosine transform of a complex-valued map: int_0^inf g(y) cos(x y) dy.
///
/// `decay_radius` is a hint for where |g| has become negligible (~1e-6 of
/// its scale); the head integral runs to roughly that point (capped by the
/// config truncation radius) and the remainder is summed half-period by
/// half-period with iterated averaging.
pub fn cosine_transform_map<F: Fn(f64) -> C64>(
    g: &F,
    x: f64,
    decay_radius: f64,
    cfg: &TransformConfig,
) -> Result<C64> {
    cfg.validate()?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "cosine transform argument must be >= 0, got {x}"
        )));
    }
    let radius = decay_radius.max(1.0) * DECAY_EXTENSION;
    let head_end = radius.min(cfg.truncation_radius);
    let osc = |y: f64| g(y) * (x * y).cos();

    // Too few oscillations to play the alternating-tail game: plain panels
    // over the full (truncated) range.
    if x * head_end < 4.0 * std::f64::consts::PI {
        return integrate_panels(&osc, 0.0, head_end, cfg.panel_width(x), cfg);
    }

    // Head: a modest smooth region plus whole oscillations up to the first
    // cosine zero past it.
    let t0 = (24.0 * std::f64::consts::PI / x).max(8.0).min(head_end);
    let mut total = integrate_panels(&osc, 0.0, t0, cfg.panel_width(x), cfg)?;

    let half = std::f64::consts::PI / x;
    let j0 = ((x * t0 - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).ceil() as i64;
    let mut z = (std::f64::consts::FRAC_PI_2 + j0 as f64 * std::f64::consts::PI) / x;
    total += integrate_panels(&osc, t0, z, cfg.panel_width(x), cfg)?;

    // Alternating half-period tail, smoothed to fixed binomial depth.
    let rule = base_rule(cfg.points_per_panel);
    let mut recent: Vec<C64> = Vec::with_capacity(TAIL_DEPTH + 1);
    let mut partial = C64::new(0.0, 0.0);
    let mut best = C64::new(0.0, 0.0);
    let mut prev_best: Option<C64> = None;
    let mut settled = 0;
    for _ in 0..MAX_TAIL_HALF_PERIODS {
        let mut piece = C64::new(0.0, 0.0);
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            piece += wt * half * osc(z + t * half);
        }
        z += half;
        partial += piece;
        if recent.len() == TAIL_DEPTH + 1 {
            recent.remove(0);
        }
        recent.push(partial);
        let scale = total.norm().max(1.0e-30);
        if recent.len() <= TAIL_DEPTH {
            best = partial;
            if piece.norm() < 1e-16 * scale {
                break;
            }
            continue;
        }
        let mut est = C64::new(0.0, 0.0);
        for (s, &c) in recent.iter().zip(&TAIL_BINOMIAL) {
            est += c * s;
        }
        est /= TAIL_BINOMIAL.iter().sum::<f64>();
        best = est;
        if piece.norm() < 1e-16 * scale {
            break;
        }
        if let Some(p) = prev_best {
            if (est - p).norm() < 1e-15 * scale.max(est.norm()) {
                settled += 1;
                if settled >= 2 {
                    break;
                }
            } else {
                settled = 0;
            }
        }
        prev_best = Some(est);
    }
    Ok(total + best)
}

/// Cosine transform C(f)(x) = int_0^inf f(y) cos(xy) dy of a catalog
/// function. The x = 0 value is the stored half-line integral.
pub fn cosine_transform(f: &TestFunction, x: f64, cfg: &TransformConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "cosine_transform requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(f.integral_halfline);
    }
    let g = |y: f64| C64::new(f.eval(y), 0.0);
    Ok(cosine_transform_map(&g, x, f.support_radius, cfg)?.re)
}

/// Fourier transform with the fixed convention
/// f_hat(xi) = (1/2pi) int_R f(x) e^{-i xi x} dx.
///
/// For the even real catalog functions this equals (1/pi) C(f)(|xi|) and is
/// real; the numerical route goes through the cosine transform.
pub fn fourier_transform(f: &TestFunction, xi: f64, cfg: &TransformConfig) -> Result<C64> {
    let c = cosine_transform(f, xi.abs(), cfg)?;
    Ok(C64::new(c / std::f64::consts::PI, 0.0))
}

/// Mellin transform on the critical line: M(f)(2iy) = int_0^inf f(x) x^{2iy-1} dx.
///
/// The x^{-1} endpoint is regularized by subtracting f(0) on (0,1), whose
/// Mellin part is f(0)/(2iy) in closed form; the remainder is integrated in
/// logarithmic coordinates, splitting panels at the u = 0 value jump.
pub fn mellin_line(f: &TestFunction, y: f64, cfg: &TransformConfig) -> Result<C64> {
    cfg.validate()?;
    if y == 0.0 {
        return Err(Error::Divergence(
            "M(f)(0) is not regularized by the f(0) subtraction".into(),
        ));
    }
    let f0 = f.value_at_zero;
    let omega = 2.0 * y.abs();
    let width = cfg.panel_width(omega);
    const U_SPAN: f64 = 16.0;
    let lower = integrate_panels(
        &|u: f64| (f.eval(u.exp()) - f0) * C64::from_polar(1.0, 2.0 * y * u),
        -U_SPAN,
        0.0,
        width,
        cfg,
    )?;
    let upper = integrate_panels(
        &|u: f64| f.eval(u.exp()) * C64::from_polar(1.0, 2.0 * y * u),
        0.0,
        U_SPAN,
        width,
        cfg,
    )?;
    let analytic = f0 / C64::new(0.0, 2.0 * y);
    Ok(lower + upper + analytic)
}

/// One argument of [`cosine_pair_integral`]: a catalog function or a raw
/// complex map with a decay hint.
pub enum PairInput<'a> {
    Test(&'a TestFunction),
    Map {
        eval: &'a (dyn Fn(f64) -> C64 + Sync),
        decay_radius: f64,
    },
}

impl<'a> PairInput<'a> {
    /// Cosine transform evaluator for this input. Catalog functions with a
    /// stored closed-form transform use it; everything else is numeric.
    fn transform(&self, x: f64, cfg: &TransformConfig) -> Result<C64> {
        match self {
            PairInput::Test(f) => {
                if let Some(cf) = &f.cosine_transform_closed_form {
                    Ok(C64::new(cf(x), 0.0))
                } else {
                    Ok(C64::new(cosine_transform(f, x, cfg)?, 0.0))
                }
            }
            PairInput::Map { eval, decay_radius } => {
                if x == 0.0 {
                    integrate_decay(&|y: f64| eval(y), *decay_radius, cfg)
                } else {
                    cosine_transform_map(&|y: f64| eval(y), x, *decay_radius, cfg)
                }
            }
        }
    }
}

/// The paired transform integral int_0^inf x C(f)(x) C(g)(x) dx, truncated
/// where the integrand has decayed below 1e-12 of the accumulated value.
pub fn cosine_pair_integral(
    f: &PairInput<'_>,
    g: &PairInput<'_>,
    cfg: &TransformConfig,
) -> Result<C64> {
    cfg.validate()?;
    let rule = base_rule(cfg.points_per_panel);
    let panel = 0.5;
    let mut acc = C64::new(0.0, 0.0);
    let mut x0 = 0.0;
    let mut quiet_panels = 0;
    for _ in 0..480 {
        let mut piece = C64::new(0.0, 0.0);
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let x = x0 + t * panel;
            let cf = f.transform(x, cfg)?;
            let cg = g.transform(x, cfg)?;
            piece += wt * panel * x * cf * cg;
        }
        acc += piece;
        x0 += panel;
        if piece.norm() < 1e-12 * acc.norm().max(1e-12) {
            quiet_panels += 1;
            if quiet_panels >= 3 && x0 >= 8.0 {
                break;
            }
        } else {
            quiet_panels = 0;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{bump, catalog_function, cauchy, gaussian, make_symbol, zero};

    fn cfg() -> TransformConfig {
        TransformConfig::default()
    }

    #[test]
    fn cosine_transform_cauchy_closed_form() {
        // C(f)(x) = (pi/2) e^{-x}
        let f = cauchy();
        for &x in &[0.05, 0.3, 1.0, 2.7, 8.0] {
            let got = cosine_transform(&f, x, &cfg()).unwrap();
            let want = 0.5 * std::f64::consts::PI * (-x).exp();
            assert!(
                (got - want).abs() < 1e-9,
                "x={x}: got {got}, want {want}, diff {}",
                (got - want).abs()
            );
        }
        let got = cosine_transform(&f, 1.0, &cfg()).unwrap();
        assert!((got - 0.577_863_7).abs() < 1e-6);
    }

    #[test]
    fn cosine_transform_gaussian_closed_form() {
        let f = gaussian();
        let want0 = 0.5 * std::f64::consts::PI.sqrt();
        assert_eq!(cosine_transform(&f, 0.0, &cfg()).unwrap(), want0);
        for &x in &[0.2, 1.0, 3.0, 10.0] {
            let got = cosine_transform(&f, x, &cfg()).unwrap();
            let want = want0 * (-0.25 * x * x).exp();
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn cosine_transform_bump_at_zero_is_half_line_integral() {
        let f = bump();
        let got = cosine_transform(&f, 0.0, &cfg()).unwrap();
        assert_eq!(got, f.integral_halfline);
        // And numerically at a tiny x the transform approaches it.
        let near = cosine_transform(&f, 1e-6, &cfg()).unwrap();
        assert!((near - got).abs() < 1e-9);
    }

    #[test]
    fn unresolvable_oscillation_is_a_resolution_error() {
        let f = cauchy();
        let err = cosine_transform(&f, 1.0e9, &cfg());
        assert!(matches!(err, Err(crate::error::Error::Resolution(_))));
    }

    #[test]
    fn cosine_transform_is_linear() {
        // Same decay hint for all three maps pins the quadrature nodes, so
        // linearity holds to rounding.
        let f = gaussian();
        let g = cauchy();
        let cfgv = cfg();
        let radius = 1.0e3;
        let tf = |y: f64| C64::new(f.eval(y), 0.0);
        let tg = |y: f64| C64::new(g.eval(y), 0.0);
        let tm = |y: f64| C64::new(2.0 * f.eval(y) - 0.5 * g.eval(y), 0.0);
        for &x in &[0.4, 1.7] {
            let cf = cosine_transform_map(&tf, x, radius, &cfgv).unwrap();
            let cg = cosine_transform_map(&tg, x, radius, &cfgv).unwrap();
            let cm = cosine_transform_map(&tm, x, radius, &cfgv).unwrap();
            assert!(
                (cm - (2.0 * cf - 0.5 * cg)).norm() < 1e-12,
                "x={x}: {}",
                (cm - (2.0 * cf - 0.5 * cg)).norm()
            );
        }
    }

    #[test]
    fn fourier_transform_values_and_evenness() {
        let f = gaussian();
        let got = fourier_transform(&f, 0.0, &cfg()).unwrap();
        let want = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((got.re - want).abs() < 1e-10);
        assert!((got.re - 0.282_094_8).abs() < 1e-6);
        assert_eq!(got.im, 0.0);

        let c = cauchy();
        let got = fourier_transform(&c, 2.0, &cfg()).unwrap();
        let want = 0.5 * (-2.0f64).exp();
        assert!((got.re - want).abs() < 1e-9);
        assert!((got.re - 0.067_667_6).abs() < 1e-6);

        let plus = fourier_transform(&f, 1.3, &cfg()).unwrap();
        let minus = fourier_transform(&f, -1.3, &cfg()).unwrap();
        assert_eq!(plus, minus);
    }

    #[test]
    fn mellin_cauchy_on_the_line() {
        // M(1/(1+x^2))(s) = (pi/2) / sin(pi s / 2), continued to s = 2iy.
        // At y = 1/2: (pi/2) / sin(i pi/2) = -i (pi/2) / sinh(pi/2).
        let f = cauchy();
        let got = mellin_line(&f, 0.5, &cfg()).unwrap();
        let want = C64::new(
            0.0,
            -0.5 * std::f64::consts::PI / (std::f64::consts::FRAC_PI_2.sinh()),
        );
        assert!(
            (got - want).norm() < 1e-7,
            "got {got}, want {want}, diff {}",
            (got - want).norm()
        );

        // Brute-force oracle for the same value: the regularized integral
        // on a fine log grid, done with an independent direct scheme.
        let oracle = mellin_oracle(&f, 0.5);
        assert!((got - oracle).norm() < 1e-6, "oracle {oracle}, got {got}");
    }

    #[test]
    fn mellin_gaussian_closed_form() {
        // M(e^{-x^2})(2iy) = Gamma(iy) / 2, so |M|^2 = pi / (4 y sinh(pi y)).
        for &y in &[0.3, 0.8, 1.5] {
            let got = mellin_line(&gaussian(), y, &cfg()).unwrap();
            let want =
                std::f64::consts::PI / (4.0 * y * (std::f64::consts::PI * y).sinh());
            assert!(
                (got.norm_sqr() - want).abs() < 1e-8,
                "y={y}: |M|^2 = {}, want {want}",
                got.norm_sqr()
            );
        }
    }

    #[test]
    fn mellin_conjugation_and_divergence_flag() {
        let f = cauchy();
        let plus = mellin_line(&f, 0.7, &cfg()).unwrap();
        let minus = mellin_line(&f, -0.7, &cfg()).unwrap();
        assert!((minus - plus.conj()).norm() < 1e-12);
        assert!(mellin_line(&f, 0.0, &cfg()).is_err());
    }

    // Independent direct evaluation of the regularized Mellin integral with
    // trapezoid sums in log coordinates, split at the u = 0 value jump.
    fn mellin_oracle(f: &TestFunction, y: f64) -> C64 {
        let trapz = |lo: f64, hi: f64, sub: f64| -> C64 {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..=n {
                let u = lo + i as f64 * h;
                let val = (f.eval(u.exp()) - sub) * C64::from_polar(1.0, 2.0 * y * u);
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * h * val;
            }
            acc
        };
        trapz(-14.0, 0.0, f.value_at_zero) + trapz(0.0, 14.0, 0.0)
            + f.value_at_zero / C64::new(0.0, 2.0 * y)
    }

    #[test]
    fn pair_integral_closed_forms() {
        // cauchy: int_0^inf x (pi/2)^2 e^{-2x} dx = pi^2/16.
        let c = cauchy();
        let got = cosine_pair_integral(&PairInput::Test(&c), &PairInput::Test(&c), &cfg())
            .unwrap();
        let want = std::f64::consts::PI * std::f64::consts::PI / 16.0;
        assert!((got.re - want).abs() < 1e-7, "{} vs {want}", got.re);
        assert!(got.im.abs() < 1e-12);

        // gaussian: int_0^inf x (pi/4) e^{-x^2/2} dx = pi/4.
        let g = gaussian();
        let got = cosine_pair_integral(&PairInput::Test(&g), &PairInput::Test(&g), &cfg())
            .unwrap();
        assert!((got.re - std::f64::consts::FRAC_PI_4).abs() < 1e-7);

        // Zero second factor kills the integral.
        let z = zero();
        let got = cosine_pair_integral(&PairInput::Test(&g), &PairInput::Test(&z), &cfg())
            .unwrap();
        assert!(got.norm() < 1e-14);
    }

    #[test]
    fn pair_integral_with_numeric_maps_matches_closed_route() {
        // Feed the gaussian through the Map route; transforms become numeric.
        let g = gaussian();
        let eval = |x: f64| C64::new((-x * x).exp(), 0.0);
        let got = cosine_pair_integral(
            &PairInput::Map {
                eval: &eval,
                decay_radius: 6.0,
            },
            &PairInput::Map {
                eval: &eval,
                decay_radius: 6.0,
            },
            &cfg(),
        )
        .unwrap();
        let want = cosine_pair_integral(&PairInput::Test(&g), &PairInput::Test(&g), &cfg())
            .unwrap();
        assert!((got - want).norm() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn parseval_style_consistency() {
        // 2 int_0^inf x fhat(x) fhat(-x) dx = (2/pi^2) int_0^inf x C(f)^2 dx,
        // both sides computed through separate paths.
        let cfgv = cfg();
        for f in [gaussian(), cauchy()] {
            let rule = gauss_legendre(600, 1e-4, 40.0).unwrap();
            let lhs = 2.0
                * rule.integrate(|x| {
                    let fp = fourier_transform(&f, x, &cfgv).unwrap().re;
                    let fm = fourier_transform(&f, -x, &cfgv).unwrap().re;
                    x * fp * fm
                });
            let pair =
                cosine_pair_integral(&PairInput::Test(&f), &PairInput::Test(&f), &cfgv)
                    .unwrap();
            let rhs = 2.0 / (std::f64::consts::PI * std::f64::consts::PI) * pair.re;
            assert!((lhs - rhs).abs() < 1e-8, "{}: {lhs} vs {rhs}", f.id());
        }
    }

    #[test]
    fn variance_routes_agree_mellin_vs_cosine() {
        // (1/pi^2) int_R |M(f)(2iy)|^2 y tanh(pi y) dy
        //   = (1/pi^2) int_0^inf x C(f)^2 dx
        let cfgv = cfg();
        for (f, want) in [
            (cauchy(), 1.0 / 16.0),
            (gaussian(), 1.0 / (4.0 * std::f64::consts::PI)),
        ] {
            let rule = gauss_legendre(400, 1e-6, 8.0).unwrap();
            let mellin_side = 2.0 / (std::f64::consts::PI * std::f64::consts::PI)
                * rule.integrate(|y| {
                    let m = mellin_line(&f, y, &cfgv).unwrap();
                    m.norm_sqr() * y * (std::f64::consts::PI * y).tanh()
                });
            let pair =
                cosine_pair_integral(&PairInput::Test(&f), &PairInput::Test(&f), &cfgv)
                    .unwrap();
            let cosine_side =
                pair.re / (std::f64::consts::PI * std::f64::consts::PI);
            assert!(
                (mellin_side - cosine_side).abs() < 1e-5,
                "{}: mellin {mellin_side} vs cosine {cosine_side}",
                f.id()
            );
            assert!((cosine_side - want).abs() < 1e-6, "{}", f.id());
        }
    }

    #[test]
    fn symbol_powers_transform_cleanly() {
        // C(sigma)(x) for a gaussian symbol decays fast and the pair
        // integral of sigma^1 with sigma^1 is finite and conjugates with k.
        let f = catalog_function("gaussian").unwrap();
        let sp = make_symbol(&f, 0.2);
        let sm = make_symbol(&f, -0.2);
        let ep = |x: f64| sp.eval(x);
        let em = |x: f64| sm.eval(x);
        let cfgv = cfg();
        let pp = cosine_pair_integral(
            &PairInput::Map { eval: &ep, decay_radius: f.support_radius },
            &PairInput::Map { eval: &ep, decay_radius: f.support_radius },
            &cfgv,
        )
        .unwrap();
        let mm = cosine_pair_integral(
            &PairInput::Map { eval: &em, decay_radius: f.support_radius },
            &PairInput::Map { eval: &em, decay_radius: f.support_radius },
            &cfgv,
        )
        .unwrap();
        assert!((mm - pp.conj()).norm() < 1e-9);
    }
}
