//! Catalog of admissible test functions f and the symbol e^{ikf} - 1.
//!
//! A [`TestFunction`] is even as used everywhere downstream (the half-line
//! definition is extended by f(|x|) internally), continuous, integrable and
//! vanishing at infinity. It carries closed-form metadata (integrals, value
//! at zero, optional cosine transform) that the transform and asymptotics
//! modules consume directly and that the tests check against quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real-valued statistic function with its closed-form metadata.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    eval: RealFn,
    /// Closed-form half-line integral of f.
    pub integral_halfline: f64,
    /// Closed-form whole-line integral (twice the half-line value for even f).
    pub integral_fullline: f64,
    /// f(0).
    pub value_at_zero: f64,
    /// sup |f|, used for branch and small-k gating.
    pub sup_abs: f64,
    /// Radius beyond which |f| <= 1e-6.
    pub support_radius: f64,
    /// Closed-form cosine transform C(f)(x) = int_0^inf f(y) cos(xy) dy, if known.
    pub cosine_transform_closed_form: Option<RealFn>,
    /// Declared number of derivatives in L1 (not computed; gates which
    /// closed-form predictions a function may be used with).
    pub smoothness: u32,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("integral_halfline", &self.integral_halfline)
            .field("value_at_zero", &self.value_at_zero)
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl TestFunction {
    /// Build a test function from a half-line definition; evaluation takes
    /// |x| internally so the even extension is automatic.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        integral_halfline: f64,
        value_at_zero: f64,
        sup_abs: f64,
        support_radius: f64,
        cosine_transform_closed_form: Option<RealFn>,
        smoothness: u32,
    ) -> Self {
        let eval: RealFn = Arc::new(move |x: f64| eval(x.abs()));
        TestFunction {
            id: id.into(),
            eval,
            integral_halfline,
            integral_fullline: 2.0 * integral_halfline,
            value_at_zero,
            sup_abs,
            support_radius,
            cosine_transform_closed_form,
            smoothness,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    /// Pointwise square f^2 with metadata derived where that is exact.
    pub fn squared(&self) -> TestFunction {
        let inner = self.eval.clone();
        let sq: RealFn = Arc::new(move |x: f64| {
            let v = inner(x);
            v * v
        });
        TestFunction {
            id: format!("{}^2", self.id),
            eval: sq,
            // No closed form is claimed for the square's integrals; the
            // callers that need them (operator traces) integrate numerically.
            integral_halfline: f64::NAN,
            integral_fullline: f64::NAN,
            value_at_zero: self.value_at_zero * self.value_at_zero,
            sup_abs: self.sup_abs * self.sup_abs,
            support_radius: self.support_radius,
            cosine_transform_closed_form: None,
            smoothness: self.smoothness,
        }
    }
}

/// The symbol sigma(x) = e^{i k f(x)} - 1.
#[derive(Clone, Debug)]
pub struct Symbol {
    f: TestFunction,
    k: f64,
}

impl Symbol {
    pub fn f(&self) -> &TestFunction {
        &self.f
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eval(&self, x: f64) -> C64 {
        C64::from_polar(1.0, self.k * self.f.eval(x)) - 1.0
    }
}

/// Construct the symbol for a test function and Fourier-dual parameter k.
///
/// ```
/// use rmstat_core::symbols::{catalog_function, make_symbol};
/// let f = catalog_function("gaussian").unwrap();
/// let sigma = make_symbol(&f, 0.4);
/// // e^{ikf} - 1 sits on the unit circle shifted by -1.
/// assert!(((sigma.eval(0.7) + 1.0).norm() - 1.0).abs() < 1e-15);
/// ```
pub fn make_symbol(f: &TestFunction, k: f64) -> Symbol {
    Symbol { f: f.clone(), k }
}

/// Pointwise n-th power x -> (sigma(x))^n.
pub fn symbol_power(sigma: &Symbol, n: u32) -> Result<impl Fn(f64) -> C64 + Send + Sync + Clone> {
    if n < 1 {
        return Err(Error::Domain("symbol_power requires n >= 1".into()));
    }
    let s = sigma.clone();
    Ok(move |x: f64| s.eval(x).powu(n))
}

/// Default catalog: gaussian, cauchy, a smooth compactly supported bump,
/// and the zero function (useful as a null statistic in sweeps).
///
/// The exponential e^{-|x|} is deliberately absent: its even extension is
/// not C^1 at the origin, so it sits outside the smoothness gates used by
/// the closed-form predictions. It can still be registered manually through
/// [`TestFunction::new`] for stress tests.
pub fn catalog() -> Vec<TestFunction> {
    vec![gaussian(), cauchy(), bump(), zero()]
}

/// Look up a catalog function by its stable id.
pub fn catalog_function(id: &str) -> Result<TestFunction> {
    catalog()
        .into_iter()
        .find(|f| f.id() == id)
        .ok_or_else(|| Error::Domain(format!("unknown test function id '{id}'")))
}

pub fn gaussian() -> TestFunction {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    TestFunction::new(
        "gaussian",
        |x| (-x * x).exp(),
        0.5 * sqrt_pi,
        1.0,
        1.0,
        (6.0 * std::f64::consts::LN_10).sqrt(),
        Some(Arc::new(move |x: f64| 0.5 * sqrt_pi * (-0.25 * x * x).exp())),
        16,
    )
}

pub fn cauchy() -> TestFunction {
    TestFunction::new(
        "cauchy",
        |x| 1.0 / (1.0 + x * x),
        0.5 * std::f64::consts::PI,
        1.0,
        1.0,
        1.0e3,
        Some(Arc::new(|x: f64| {
            0.5 * std::f64::consts::PI * (-x.abs()).exp()
        })),
        16,
    )
}

/// Smooth bump exp(1 - 1/(1 - (x/R)^2)) on |x| < R, zero outside, R = 2.
pub fn bump() -> TestFunction {
    let r = BUMP_RADIUS;
    TestFunction::new(
        "bump",
        move |x| bump_eval(x, r),
        r * BUMP_UNIT_HALF_INTEGRAL,
        1.0,
        1.0,
        r,
        None,
        16,
    )
}

pub fn zero() -> TestFunction {
    TestFunction::new("zero", |_| 0.0, 0.0, 0.0, 0.0, 0.0, Some(Arc::new(|_| 0.0)), u32::MAX)
}

pub const BUMP_RADIUS: f64 = 2.0;

// int_0^1 exp(1 - 1/(1 - t^2)) dt, frozen from panel Gauss-Legendre
// quadrature converged to fourteen digits (the integrand is smooth and
// compactly supported); checked against independent quadrature in the tests.
const BUMP_UNIT_HALF_INTEGRAL: f64 = 0.603_450_161_218_935_9;

fn bump_eval(x: f64, r: f64) -> f64 {
    let t = x / r;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}
