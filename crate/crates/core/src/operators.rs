//! Construction and Nystrom discretization of the integral operators:
//! finite-N Christoffel-Darboux kernels, the sine and Bessel limit kernels,
//! the finite-interval Wiener-Hopf operator on (-alpha, alpha), and the
//! truncated Wiener-Hopf / Hankel pair on (0, alpha).
//!
//! Operators store the raw kernel values K(x_i, x_j) on their quadrature
//! grid; the weight symmetrization w^{1/2} K w^{1/2} happens in the
//! determinant module. Construction parallelizes over matrix rows; entries
//! are independent pure computations, so results are deterministic.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, hermite_fn_seq, laguerre_fn_seq, Quadrature};
use crate::specfun::bessel_j_raw as bessel_raw;
use crate::symbols::{Symbol, TestFunction};
use crate::transforms::{cosine_transform_map, far_tail, integrate_decay, TransformConfig};
use crate::C64;

/// Which ensemble a finite-N kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Hermite,
    Laguerre,
}

/// What a discretized operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    SineWienerHopf,
    Bessel,
    FiniteWienerHopf,
    Hankel,
    FiniteNHermite,
    FiniteNLaguerre,
    Composite,
}

/// Where an operator came from: kind, scale, order, ensemble size, symbol k.
#[derive(Debug, Clone, Copy)]
pub struct Provenance {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub nu: f64,
    pub ensemble_n: usize,
    pub k: f64,
}

/// A dense complex Nystrom matrix together with its grid and provenance.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: Quadrature,
    matrix: Vec<C64>,
    n: usize,
    provenance: Provenance,
}

impl DiscretizedOperator {
    pub fn from_parts(grid: Quadrature, matrix: Vec<C64>, provenance: Provenance) -> Self {
        let n = grid.len();
        assert_eq!(matrix.len(), n * n, "matrix dimensions must equal grid size");
        DiscretizedOperator {
            grid,
            matrix,
            n,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Quadrature {
        &self.grid
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[i * self.n + j]
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    /// Entrywise complex conjugate (the operator built at -k for real f).
    pub fn conj(&self) -> DiscretizedOperator {
        let mut p = self.provenance;
        p.k = -p.k;
        DiscretizedOperator {
            grid: self.grid.clone(),
            matrix: self.matrix.iter().map(|z| z.conj()).collect(),
            n: self.n,
            provenance: p,
        }
    }

    pub fn same_grid(&self, other: &DiscretizedOperator) -> bool {
        self.n == other.n
            && self
                .grid
                .nodes()
                .iter()
                .zip(other.grid.nodes())
                .all(|(a, b)| a == b)
    }

    /// Largest entry magnitude, the max-norm used by the identity checks.
    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &DiscretizedOperator) -> Result<DiscretizedOperator> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DiscretizedOperator) -> Result<DiscretizedOperator> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DiscretizedOperator,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<DiscretizedOperator> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "operator arithmetic requires identical grids".into(),
            ));
        }
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DiscretizedOperator {
            grid: self.grid.clone(),
            matrix,
            n: self.n,
            provenance: Provenance {
                kind: OperatorKind::Composite,
                ..self.provenance
            },
        })
    }
}

/// A symbol as the operator builders consume it: a pointwise complex map
/// with a decay hint, a reality tag, and (for the k = 0 real path on
/// catalog functions) the stored closed-form cosine transform; when that
/// metadata is present the difference-kernel builders use it instead of
/// numerically transforming a slowly decaying function.
#[derive(Clone)]
pub struct SymbolFn {
    eval: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    pub decay_radius: f64,
    pub k_tag: f64,
    pub is_real: bool,
    cosine_closed_form: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    cosine_at_zero: Option<f64>,
}

impl SymbolFn {
    /// Real test function (the k = 0 path where sigma is replaced by f).
    pub fn from_test_function(f: &TestFunction) -> Self {
        let closed = f.cosine_transform_closed_form.clone();
        let c0 = f.integral_halfline;
        let f = f.clone();
        SymbolFn {
            decay_radius: f.support_radius.max(1.0),
            k_tag: 0.0,
            is_real: true,
            cosine_closed_form: closed,
            cosine_at_zero: if c0.is_finite() { Some(c0) } else { None },
            eval: Arc::new(move |x: f64| C64::new(f.eval(x), 0.0)),
        }
    }

    pub fn from_symbol(s: &Symbol) -> Self {
        let k = s.k();
        let sym = s.clone();
        SymbolFn {
            decay_radius: sym.f().support_radius.max(1.0),
            k_tag: k,
            is_real: k == 0.0,
            cosine_closed_form: None,
            cosine_at_zero: None,
            eval: Arc::new(move |x: f64| sym.eval(x)),
        }
    }

    pub fn from_map(
        eval: impl Fn(f64) -> C64 + Send + Sync + 'static,
        decay_radius: f64,
        k_tag: f64,
    ) -> Self {
        SymbolFn {
            eval: Arc::new(eval),
            decay_radius: decay_radius.max(1.0),
            k_tag,
            is_real: false,
            cosine_closed_form: None,
            cosine_at_zero: None,
        }
    }

    pub fn eval(&self, x: f64) -> C64 {
        (self.eval)(x)
    }

    /// The symbol of the pointwise product (1 + a)(1 + b) - 1 = a + b + ab,
    /// needed by the Wiener-Hopf/Hankel product identities.
    pub fn one_plus_product_minus_one(a: &SymbolFn, b: &SymbolFn) -> SymbolFn {
        let ea = a.eval.clone();
        let eb = b.eval.clone();
        SymbolFn {
            decay_radius: a.decay_radius.max(b.decay_radius),
            k_tag: a.k_tag + b.k_tag,
            is_real: a.is_real && b.is_real,
            cosine_closed_form: None,
            cosine_at_zero: None,
            eval: Arc::new(move |x: f64| {
                let va = ea(x);
                let vb = eb(x);
                va + vb + va * vb
            }),
        }
    }
}

/// The sine kernel sin(x-y) / (pi (x-y)), continuous through the diagonal.
pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() < 1e-4 {
        // sinc series keeps full precision through the removable point.
        let d2 = d * d;
        (1.0 - d2 / 6.0 + d2 * d2 / 120.0) / std::f64::consts::PI
    } else {
        d.sin() / (std::f64::consts::PI * d)
    }
}

/// The Bessel kernel of order nu at (x, y), x, y > 0:
/// (J_nu(rx) ry J'_nu(ry) - rx J'_nu(rx) J_nu(ry)) / (2 (x - y)),
/// rx = sqrt(x), ry = sqrt(y), with the L'Hopital closed form on the
/// diagonal. The raw quotient loses ~8 digits inside |x - y| < 1e-6, so
/// that band evaluates the diagonal form at the midpoint (the first-order
/// symmetric approximant in x - y).
pub fn bessel_kernel(nu: f64, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(Error::Domain(format!(
            "bessel_kernel requires x, y > 0, got ({x}, {y})"
        )));
    }
    if !(-0.5..=6.0).contains(&nu) {
        return Err(Error::Domain(format!(
            "bessel_kernel supports nu in [-1/2, 6], got {nu}"
        )));
    }
    Ok(bessel_kernel_raw(nu, x, y))
}

pub(crate) fn bessel_kernel_raw(nu: f64, x: f64, y: f64) -> f64 {
    if (x - y).abs() < 1e-6 {
        return bessel_kernel_diag(nu, 0.5 * (x + y));
    }
    let rx = x.sqrt();
    let ry = y.sqrt();
    let jx = bessel_raw(nu, rx);
    let jy = bessel_raw(nu, ry);
    let jpx = (nu / rx) * jx - bessel_raw(nu + 1.0, rx);
    let jpy = (nu / ry) * jy - bessel_raw(nu + 1.0, ry);
    (jx * ry * jpy - rx * jpx * jy) / (2.0 * (x - y))
}

// Diagonal value (1/4) [J_nu(r)^2 - J_{nu+1}(r) J_{nu-1}(r)], r = sqrt(x),
// with J_{nu-1} taken from the three-term recurrence.
fn bessel_kernel_diag(nu: f64, x: f64) -> f64 {
    let r = x.sqrt();
    let j = bessel_raw(nu, r);
    let jp1 = bessel_raw(nu + 1.0, r);
    let jm1 = 2.0 * nu / r * j - jp1;
    0.25 * (j * j - jp1 * jm1)
}

/// Finite-N Christoffel-Darboux kernel K_N(x, y) = sum_{i<N} phi_i(x) phi_i(y).
///
/// The summed form is used for N <= 50 and near the diagonal; beyond that
/// the two-term Christoffel-Darboux identity takes over. The two forms
/// agree to 1e-10 (checked in the tests).
pub fn finite_n_kernel(ensemble: Ensemble, n: usize, nu: f64, x: f64, y: f64) -> Result<f64> {
    check_finite_n(ensemble, n, nu, x, y)?;
    let scale = x.abs().max(y.abs()).max(1.0);
    if n > 50 && (x - y).abs() > 1e-8 * scale {
        return finite_n_kernel_cd(ensemble, n, nu, x, y);
    }
    let sx = ortho_seq(ensemble, n, nu, x)?;
    let sy = ortho_seq(ensemble, n, nu, y)?;
    Ok(sx.iter().take(n).zip(sy.iter().take(n)).map(|(a, b)| a * b).sum())
}

fn check_finite_n(ensemble: Ensemble, n: usize, nu: f64, x: f64, y: f64) -> Result<()> {
    if n == 0 || n > 300 {
        return Err(Error::StabilityEnvelope(format!(
            "finite_n_kernel supports 1 <= N <= 300, got {n}"
        )));
    }
    if ensemble == Ensemble::Laguerre {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::Domain("laguerre kernel requires x, y > 0".into()));
        }
        if !(nu > -1.0) {
            return Err(Error::Domain("laguerre kernel requires nu > -1".into()));
        }
    }
    Ok(())
}

fn finite_n_kernel_cd(ensemble: Ensemble, n: usize, nu: f64, x: f64, y: f64) -> Result<f64> {
    let sx = ortho_seq(ensemble, n, nu, x)?;
    let sy = ortho_seq(ensemble, n, nu, y)?;
    let nf = n as f64;
    let prefactor = match ensemble {
        Ensemble::Hermite => (nf / 2.0).sqrt(),
        Ensemble::Laguerre => -(nf * (nf + nu)).sqrt(),
    };
    Ok(prefactor * (sx[n] * sy[n - 1] - sx[n - 1] * sy[n]) / (x - y))
}

fn ortho_seq(ensemble: Ensemble, n: usize, nu: f64, x: f64) -> Result<Vec<f64>> {
    match ensemble {
        Ensemble::Hermite => hermite_fn_seq(n, x),
        Ensemble::Laguerre => laguerre_fn_seq(n, nu, x),
    }
}

/// The kernel rescaled into its scaling-limit coordinates:
/// hermite (bulk)       (1/sqrt(2N)) K_N(x/sqrt(2N), y/sqrt(2N)),
/// laguerre (hard edge) (1/(4N)) K_N(x/(4N), y/(4N)).
pub fn rescaled_finite_n_kernel(
    ensemble: Ensemble,
    n: usize,
    nu: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    match ensemble {
        Ensemble::Hermite => {
            let s = (2.0 * n as f64).sqrt();
            Ok(finite_n_kernel(ensemble, n, nu, x / s, y / s)? / s)
        }
        Ensemble::Laguerre => {
            let s = 4.0 * n as f64;
            Ok(finite_n_kernel(ensemble, n, nu, x / s, y / s)? / s)
        }
    }
}

// ---------------------------------------------------------------------------
// Cosine-field spline: C(sigma) sampled on a uniform grid and interpolated
// with a natural cubic spline. The transform varies on the O(1) scale of the
// symbol's core, so a 0.02 step keeps the interpolation error near 1e-9
// while making the difference/sum kernel entries O(1) to fill.
// ---------------------------------------------------------------------------

const SPLINE_STEP: f64 = 0.02;

struct CosineSpline {
    h: f64,
    values: Vec<C64>,
    second: Vec<C64>,
}

impl CosineSpline {
    fn build(sym: &SymbolFn, umax: f64, cfg: &TransformConfig) -> Result<CosineSpline> {
        let segments = (umax / SPLINE_STEP).ceil() as usize + 1;
        let h = umax / segments as f64;
        let values: Vec<C64> = if let Some(cf) = &sym.cosine_closed_form {
            (0..=segments)
                .map(|i| C64::new(cf(i as f64 * h), 0.0))
                .collect()
        } else {
            (0..=segments)
                .into_par_iter()
                .map(|i| {
                    let u = i as f64 * h;
                    if u == 0.0 {
                        if let Some(c0) = sym.cosine_at_zero {
                            Ok(C64::new(c0, 0.0))
                        } else {
                            integrate_decay(&|y: f64| sym.eval(y), sym.decay_radius, cfg)
                        }
                    } else {
                        cosine_transform_map(&|y: f64| sym.eval(y), u, sym.decay_radius, cfg)
                    }
                })
                .collect::<Result<_>>()?
        };
        Ok(CosineSpline {
            h,
            second: spline_second_derivatives(&values, h),
            values,
        })
    }

    fn eval(&self, u: f64) -> C64 {
        let u = u.abs();
        let m = self.values.len();
        let idx = ((u / self.h) as usize).min(m - 2);
        let a = idx as f64 * self.h;
        let t = (u - a) / self.h;
        let s = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        s * self.values[idx]
            + t * self.values[idx + 1]
            + h2 * ((s * s * s - s) * self.second[idx] + (t * t * t - t) * self.second[idx + 1])
    }
}

// Second derivatives of the cubic spline on a uniform grid: the (1, 4, 1)
// tridiagonal system M_{i-1} + 4 M_i + M_{i+1} = 6 d2y_i / h^2, solved by
// the Thomas algorithm. The left end uses the not-a-knot condition
// (M_0 = 2 M_1 - M_2): the transform of a slowly decaying symbol can carry
// a genuine one-sided kink at u = 0 (its first moment need not converge),
// so no derivative may be assumed there; not-a-knot only asks for
// one-sided smoothness. The right end stays natural (the transform has
// decayed there). On a uniform grid not-a-knot decouples the first
// interior equation to 6 M_1 = r_1.
fn spline_second_derivatives(values: &[C64], h: f64) -> Vec<C64> {
    let m = values.len();
    let mut second = vec![C64::new(0.0, 0.0); m];
    if m < 4 {
        return second;
    }
    let r = |i: usize| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
    second[1] = r(1) / 6.0;
    // Unknowns M_2 .. M_{m-2}; M_{m-1} = 0 and M_1 now known.
    let rows = m - 3;
    if rows > 0 {
        let mut diag = vec![4.0f64; rows];
        let mut rhs = vec![C64::new(0.0, 0.0); rows];
        rhs[0] = r(2) - second[1];
        for i in 1..rows {
            rhs[i] = r(i + 2);
        }
        for i in 1..rows {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            let carry = rhs[i - 1] * w;
            rhs[i] -= carry;
        }
        second[rows + 1] = rhs[rows - 1] / diag[rows - 1];
        for i in (0..rows - 1).rev() {
            second[i + 2] = (rhs[i] - second[i + 3]) / diag[i];
        }
    }
    second[0] = 2.0 * second[1] - second[2];
    second
}

// ---------------------------------------------------------------------------
// Operator builders
// ---------------------------------------------------------------------------

const MAX_WH_GRID: usize = 1000;
const MAX_BESSEL_GRID: usize = 600;

/// Wiener-Hopf operator on (-alpha, alpha) with difference kernel
/// k(u) = (1/pi) C(sigma)(u), the sine-ensemble operator.
pub fn build_wiener_hopf(
    sym: &SymbolFn,
    alpha: f64,
    n: usize,
    cfg: &TransformConfig,
) -> Result<DiscretizedOperator> {
    check_wh_args(alpha, n)?;
    let grid = gauss_legendre(n, -alpha, alpha)?;
    let spline = CosineSpline::build(sym, 2.0 * alpha * 1.0001, cfg)?;
    let matrix = difference_kernel_matrix(&grid, &spline, false);
    Ok(DiscretizedOperator::from_parts(
        grid,
        matrix,
        Provenance {
            kind: OperatorKind::SineWienerHopf,
            alpha,
            nu: f64::NAN,
            ensemble_n: 0,
            k: sym.k_tag,
        },
    ))
}

/// Finite Wiener-Hopf operator on (0, alpha), kernel (1/pi) C(sigma)(x - y).
pub fn build_finite_wh(
    sym: &SymbolFn,
    alpha: f64,
    n: usize,
    cfg: &TransformConfig,
) -> Result<DiscretizedOperator> {
    check_wh_args(alpha, n)?;
    let grid = gauss_legendre(n, 0.0, alpha)?;
    let spline = CosineSpline::build(sym, alpha * 1.0001, cfg)?;
    let matrix = difference_kernel_matrix(&grid, &spline, false);
    Ok(DiscretizedOperator::from_parts(
        grid,
        matrix,
        Provenance {
            kind: OperatorKind::FiniteWienerHopf,
            alpha,
            nu: f64::NAN,
            ensemble_n: 0,
            k: sym.k_tag,
        },
    ))
}

/// Hankel operator on (0, alpha), kernel (1/pi) C(sigma)(x + y).
pub fn build_hankel(
    sym: &SymbolFn,
    alpha: f64,
    n: usize,
    cfg: &TransformConfig,
) -> Result<DiscretizedOperator> {
    check_wh_args(alpha, n)?;
    let grid = gauss_legendre(n, 0.0, alpha)?;
    let spline = CosineSpline::build(sym, 2.0 * alpha * 1.0001, cfg)?;
    let matrix = difference_kernel_matrix(&grid, &spline, true);
    Ok(DiscretizedOperator::from_parts(
        grid,
        matrix,
        Provenance {
            kind: OperatorKind::Hankel,
            alpha,
            nu: f64::NAN,
            ensemble_n: 0,
            k: sym.k_tag,
        },
    ))
}

fn check_wh_args(alpha: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if n == 0 || n > MAX_WH_GRID {
        return Err(Error::Domain(format!(
            "grid size must lie in 1..={MAX_WH_GRID}, got {n}"
        )));
    }
    Ok(())
}

fn difference_kernel_matrix(grid: &Quadrature, spline: &CosineSpline, sum: bool) -> Vec<C64> {
    let n = grid.len();
    let nodes = grid.nodes();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let mut matrix = vec![C64::new(0.0, 0.0); n * n];
    matrix.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            let u = if sum {
                nodes[i] + nodes[j]
            } else {
                nodes[i] - nodes[j]
            };
            *slot = inv_pi * spline.eval(u);
        }
    });
    matrix
}

/// Result of a Bessel-operator build: the Nystrom matrix on (0, 1) and an
/// estimate of the kernel mass lost to truncating the t-integral.
pub type BesselBuild = (DiscretizedOperator, f64);

/// Bessel-ensemble operator on (0, 1): entry (i, j) is
/// alpha^2 int_0^inf u sigma(u) sqrt(x_i x_j) J_nu(alpha u x_i) J_nu(alpha u x_j) du,
/// the hard-edge operator with symbol sigma(t/alpha) pulled back to unit scale.
///
/// The t-integral truncates where |sigma| stays below 1e-12, capped by the
/// configured truncation radius for slowly decaying symbols; the estimated
/// tail (through the Bessel product envelope) is returned alongside.
/// Quadrature panels resolve the fastest phase alpha (x_i + x_j) as well as
/// the symbol's own variation.
pub fn build_bessel_operator(
    sym: &SymbolFn,
    alpha: f64,
    nu: f64,
    n: usize,
    cfg: &TransformConfig,
) -> Result<BesselBuild> {
    cfg.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(nu >= -0.5) {
        return Err(Error::Domain(format!(
            "bessel operator requires nu >= -1/2, got {nu}"
        )));
    }
    if n == 0 || n > MAX_BESSEL_GRID {
        return Err(Error::Domain(format!(
            "grid size must lie in 1..={MAX_BESSEL_GRID}, got {n}"
        )));
    }
    let grid = gauss_legendre(n, 0.0, 1.0)?;
    let cut = truncation_point(sym, cfg);

    // Panel width: half of points_per_panel in phase at the fastest
    // oscillation, and never wider than the symbol's variation scale.
    let omega_max = 2.0 * alpha;
    let width = (0.5 * cfg.points_per_panel as f64 / omega_max).min(0.25);
    let panels = (cut / width).ceil() as usize;
    if panels * cfg.points_per_panel > 8_000_000 {
        return Err(Error::Resolution(format!(
            "bessel operator t-grid would need {panels} panels; reduce alpha or truncation"
        )));
    }
    let rule = gauss_legendre(cfg.points_per_panel, 0.0, 1.0)?;
    let w_panel = cut / panels as f64;

    let nodes = grid.nodes();
    let sqrt_nodes: Vec<f64> = nodes.iter().map(|&x| x.sqrt()).collect();
    let mut re = vec![0.0f64; n * n];
    let mut im = vec![0.0f64; n * n];
    let complex_symbol = !sym.is_real;

    // Accumulate K += G^T diag(c) G block by block, where G carries the
    // sqrt(x) J_nu(alpha u x) factors; rows run in parallel, the block order
    // is fixed, so the result is deterministic.
    let block_panels = 64usize;
    let ppp = cfg.points_per_panel;
    let mut ts: Vec<f64> = Vec::with_capacity(block_panels * ppp);
    let mut cs_re: Vec<f64> = Vec::with_capacity(block_panels * ppp);
    let mut cs_im: Vec<f64> = Vec::with_capacity(block_panels * ppp);
    let alpha2 = alpha * alpha;
    let mut p0 = 0usize;
    while p0 < panels {
        let pend = (p0 + block_panels).min(panels);
        ts.clear();
        cs_re.clear();
        cs_im.clear();
        for p in p0..pend {
            let lo = p as f64 * w_panel;
            for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
                let u = lo + t * w_panel;
                let s = sym.eval(u);
                ts.push(u);
                cs_re.push(wt * w_panel * u * s.re * alpha2);
                cs_im.push(wt * w_panel * u * s.im * alpha2);
            }
        }
        let l = ts.len();
        let mut g = vec![0.0f64; n * l];
        g.par_chunks_mut(l).enumerate().for_each(|(i, row)| {
            let xi = nodes[i];
            let sq = sqrt_nodes[i];
            for (m, slot) in row.iter_mut().enumerate() {
                *slot = sq * bessel_raw(nu, alpha * ts[m] * xi);
            }
        });
        let g_ref = &g;
        let cs_re_ref = &cs_re;
        let cs_im_ref = &cs_im;
        re.par_chunks_mut(n)
            .zip(im.par_chunks_mut(n))
            .enumerate()
            .for_each(|(i, (row_re, row_im))| {
                let gi = &g_ref[i * l..(i + 1) * l];
                for j in i..n {
                    let gj = &g_ref[j * l..(j + 1) * l];
                    let mut acc_re = 0.0;
                    for m in 0..l {
                        acc_re += cs_re_ref[m] * gi[m] * gj[m];
                    }
                    row_re[j] += acc_re;
                    if complex_symbol {
                        let mut acc_im = 0.0;
                        for m in 0..l {
                            acc_im += cs_im_ref[m] * gi[m] * gj[m];
                        }
                        row_im[j] += acc_im;
                    }
                }
            });
        p0 = pend;
    }

    let mut matrix = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let z = C64::new(re[i * n + j], im[i * n + j]);
            matrix[i * n + j] = z;
            matrix[j * n + i] = z;
        }
    }

    // The kernel mass beyond the truncation point is asymptotically a
    // narrow diagonal band: the Bessel product envelope turns
    // alpha^2 u sigma(u) sqrt(xy) J J into (alpha/pi) sigma(u) cos(alpha u (x-y))
    // plus a fast phase. Its smooth diagonal part, (alpha/pi) times the
    // remaining symbol mass, is added back to the diagonal; what stays
    // unaccounted (the oscillatory parts) feeds the returned estimate.
    let tail_mass = far_tail(&|u: f64| sym.eval(u), cut, cfg);
    let diag_correction = alpha / std::f64::consts::PI * tail_mass;
    for i in 0..n {
        matrix[i * n + i] += diag_correction;
    }
    let tail_estimate = sym.eval(cut).norm() / std::f64::consts::PI
        + alpha / std::f64::consts::PI * cut * sym.eval(1e12_f64.max(2.0 * cut)).norm();

    Ok((
        DiscretizedOperator::from_parts(
            grid,
            matrix,
            Provenance {
                kind: OperatorKind::Bessel,
                alpha,
                nu,
                ensemble_n: 0,
                k: sym.k_tag,
            },
        ),
        tail_estimate,
    ))
}

// Last u (on a coarse scan) where |sigma| is still above 1e-12, capped by
// the configured truncation radius.
fn truncation_point(sym: &SymbolFn, cfg: &TransformConfig) -> f64 {
    let cap = cfg.truncation_radius;
    let hard = (3.0 * sym.decay_radius).min(cap);
    let step = (hard / 4000.0).max(1e-3);
    let mut last_live = step;
    let mut u = step;
    while u <= hard {
        if sym.eval(u).norm() >= 1e-12 {
            last_live = u;
        }
        u += step;
    }
    (last_live + step).min(cap).max(4.0)
}

/// Finite-N operator with kernel sigma(x) times the rescaled
/// Christoffel-Darboux kernel, the exact-N counterpart of the limit
/// operators. The Hermite (bulk) kernel lives on a symmetric interval in
/// the rescaled variable; the Laguerre (hard edge) kernel lives on (0, X)
/// with the symbol evaluated at the square root of the rescaled eigenvalue,
/// matching the statistic.
pub fn build_finite_n_symbol_op(
    ensemble: Ensemble,
    n_ens: usize,
    nu: f64,
    f: &TestFunction,
    k: f64,
    quad_n: usize,
) -> Result<DiscretizedOperator> {
    if n_ens == 0 || n_ens > 300 {
        return Err(Error::StabilityEnvelope(format!(
            "finite-N operator supports 1 <= N <= 300, got {n_ens}"
        )));
    }
    if quad_n == 0 || quad_n > MAX_WH_GRID {
        return Err(Error::Domain(format!("invalid quadrature size {quad_n}")));
    }
    let fc = f.clone();
    let weight = move |x: f64| -> C64 {
        if k == 0.0 {
            C64::new(fc.eval(x), 0.0)
        } else {
            C64::from_polar(1.0, k * fc.eval(x)) - 1.0
        }
    };
    match ensemble {
        Ensemble::Hermite => {
            let radius = sigma_cut_radius(f, k);
            let grid = gauss_legendre(quad_n, -radius, radius)?;
            let scale = (2.0 * n_ens as f64).sqrt();
            let seqs: Vec<Vec<f64>> = grid
                .nodes()
                .par_iter()
                .map(|&x| hermite_fn_seq(n_ens - 1, x / scale))
                .collect::<Result<_>>()?;
            let matrix = cd_weighted_matrix(&grid, &seqs, n_ens, 1.0 / scale, &weight);
            Ok(DiscretizedOperator::from_parts(
                grid,
                matrix,
                Provenance {
                    kind: OperatorKind::FiniteNHermite,
                    alpha: f64::NAN,
                    nu: f64::NAN,
                    ensemble_n: n_ens,
                    k,
                },
            ))
        }
        Ensemble::Laguerre => {
            if !(nu > -1.0) {
                return Err(Error::Domain("laguerre requires nu > -1".into()));
            }
            let radius = sigma_cut_radius(f, k);
            let grid = gauss_legendre(quad_n, 0.0, radius * radius)?;
            let scale = 4.0 * n_ens as f64;
            let seqs: Vec<Vec<f64>> = grid
                .nodes()
                .par_iter()
                .map(|&u| laguerre_fn_seq(n_ens - 1, nu, u / scale))
                .collect::<Result<_>>()?;
            let sqrt_weight = move |u: f64| weight(u.sqrt());
            let matrix = cd_weighted_matrix(&grid, &seqs, n_ens, 1.0 / scale, &sqrt_weight);
            Ok(DiscretizedOperator::from_parts(
                grid,
                matrix,
                Provenance {
                    kind: OperatorKind::FiniteNLaguerre,
                    alpha: f64::NAN,
                    nu,
                    ensemble_n: n_ens,
                    k,
                },
            ))
        }
    }
}

// Radius where the symbol factor has dropped to ~1e-13: scan |f| against
// 1e-13 / max(|k|, 1).
fn sigma_cut_radius(f: &TestFunction, k: f64) -> f64 {
    let level = 1e-13 / k.abs().max(1.0);
    let hard = (4.0 * f.support_radius.max(1.0)).min(1.0e3);
    let step = hard / 4000.0;
    let mut last_live = step;
    let mut x = step;
    while x <= hard {
        if f.eval(x).abs() >= level {
            last_live = x;
        }
        x += step;
    }
    (last_live + 1.0).min(hard)
}

fn cd_weighted_matrix(
    grid: &Quadrature,
    seqs: &[Vec<f64>],
    n_ens: usize,
    kernel_scale: f64,
    weight: &(dyn Fn(f64) -> C64 + Sync),
) -> Vec<C64> {
    let n = grid.len();
    let nodes = grid.nodes();
    let mut matrix = vec![C64::new(0.0, 0.0); n * n];
    matrix.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let w = weight(nodes[i]);
        for (j, slot) in row.iter_mut().enumerate() {
            let mut k_sum = 0.0;
            for m in 0..n_ens {
                k_sum += seqs[i][m] * seqs[j][m];
            }
            *slot = w * (k_sum * kernel_scale);
        }
    });
    matrix
}

// Integral of the spline over [0, z] (exact per segment; the cubic's
// segment integral is the trapezoid term minus the curvature correction).
impl CosineSpline {
    fn prefix_integrals(&self) -> Vec<C64> {
        let h = self.h;
        let m = self.values.len();
        let mut table = vec![C64::new(0.0, 0.0); m];
        for i in 0..m - 1 {
            let seg = 0.5 * h * (self.values[i] + self.values[i + 1])
                - h * h * h / 24.0 * (self.second[i] + self.second[i + 1]);
            table[i + 1] = table[i] + seg;
        }
        table
    }

    fn cumulative_to(&self, table: &[C64], z: f64) -> C64 {
        let h = self.h;
        let m = self.values.len();
        let z = z.clamp(0.0, (m - 1) as f64 * h);
        let full = ((z / h) as usize).min(m - 2);
        let mut acc = table[full];
        // Partial segment by a short Gauss rule on the spline itself.
        let a = full as f64 * h;
        if z > a {
            let rule = gauss_legendre(6, a, z).expect("valid partial segment");
            for (&u, &w) in rule.nodes().iter().zip(rule.weights()) {
                acc += w * self.eval(u);
            }
        }
        acc
    }
}

/// Variance of the hard-edge statistic at nu = -1/2 through the exact
/// one-dimensional trace formulas of the Wiener-Hopf plus Hankel
/// representation on (0, alpha):
///   tr (W+H)(f^2) = alpha k2(0) + (1/2) int_0^2a k2,
///   tr [(W+H)(f)]^2 = 2 int_0^a (a-u) k^2 + 2 int_0^2a k(v) K(m(v)) dv
///                     + int_0^2a min(v, 2a-v) k(v)^2 dv,
/// with k = (1/pi) C(f), K its antiderivative, m(v) = min(v, 2a - v).
/// Grid-free: the only discretization is the transform spline and the 1-D
/// panel quadrature, so the alpha = 40 cancellation survives intact.
pub fn half_order_variance(
    f: &TestFunction,
    alpha: f64,
    resolution: usize,
    cfg: &TransformConfig,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let span = 2.0 * alpha * 1.0001;
    let sym = SymbolFn::from_test_function(f);
    let fsq = f.squared();
    let sym2 = SymbolFn::from_test_function(&fsq);
    let c = CosineSpline::build(&sym, span, cfg)?;
    let c2 = CosineSpline::build(&sym2, span, cfg)?;
    let c_prefix = c.prefix_integrals();
    let c2_prefix = c2.prefix_integrals();
    let inv_pi = 1.0 / std::f64::consts::PI;
    let k = |u: f64| inv_pi * c.eval(u).re;

    let tr_fsq = alpha * inv_pi * c2.values[0].re
        + 0.5 * inv_pi * c2.cumulative_to(&c2_prefix, 2.0 * alpha).re;

    let panels = resolution.max(400);
    let seg = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| -> Result<f64> {
        let mut acc = 0.0;
        let rule = gauss_legendre(12, 0.0, 1.0)?;
        let w = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + w * p as f64;
            for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
                acc += wt * w * g(lo + t * w);
            }
        }
        Ok(acc)
    };
    let tr_w2 = 2.0 * seg(0.0, alpha, &|u| (alpha - u) * k(u) * k(u))?;
    // Split the Hankel and cross terms at v = alpha where min(v, 2a-v) kinks.
    let h_term = |v: f64| v.min(2.0 * alpha - v) * k(v) * k(v);
    let tr_h2 = seg(0.0, alpha, &h_term)? + seg(alpha, 2.0 * alpha, &h_term)?;
    let cross = |v: f64| {
        let m = v.min(2.0 * alpha - v);
        k(v) * inv_pi * c.cumulative_to(&c_prefix, m).re
    };
    let tr_wh = seg(0.0, alpha, &cross)? + seg(alpha, 2.0 * alpha, &cross)?;

    Ok(tr_fsq - (tr_w2 + 2.0 * tr_wh + tr_h2))
}

/// Variance of the bulk statistic through the same exact trace formulas on
/// (-alpha, alpha): tr A(f^2) - tr A(f)^2 with
/// tr A(f^2) = 2 alpha k2(0), tr A(f)^2 = 2 int_0^2a (2a - u) k(u)^2 du.
pub fn sine_operator_variance(
    f: &TestFunction,
    alpha: f64,
    resolution: usize,
    cfg: &TransformConfig,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let span = 2.0 * alpha * 1.0001;
    let sym = SymbolFn::from_test_function(f);
    let fsq = f.squared();
    let sym2 = SymbolFn::from_test_function(&fsq);
    let c = CosineSpline::build(&sym, span, cfg)?;
    let c2 = CosineSpline::build(&sym2, span, cfg)?;
    let inv_pi = 1.0 / std::f64::consts::PI;
    let k = |u: f64| inv_pi * c.eval(u).re;

    let tr_fsq = 2.0 * alpha * inv_pi * c2.values[0].re;
    let panels = resolution.max(400);
    let rule = gauss_legendre(12, 0.0, 1.0)?;
    let w = 2.0 * alpha / panels as f64;
    let mut tr_sq = 0.0;
    for p in 0..panels {
        let lo = w * p as f64;
        for (&t, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let u = lo + t * w;
            tr_sq += wt * w * (2.0 * alpha - u) * k(u) * k(u);
        }
    }
    Ok(tr_fsq - 2.0 * tr_sq)
}

/// Sup-norm distance between the rescaled finite-N kernel and its scaling
/// limit on the standard 10x10 probe grid over [0.2, 3]^2.
pub fn kernel_limit_distance(ensemble: Ensemble, nu: f64, n: usize) -> Result<f64> {
    let grid: Vec<f64> = (0..10).map(|i| 0.2 + 2.8 * i as f64 / 9.0).collect();
    let mut sup: f64 = 0.0;
    for &x in &grid {
        for &y in &grid {
            let finite = rescaled_finite_n_kernel(ensemble, n, nu, x, y)?;
            let limit = match ensemble {
                Ensemble::Hermite => sine_kernel(x, y),
                Ensemble::Laguerre => bessel_kernel(nu, x, y)?,
            };
            sup = sup.max((finite - limit).abs());
        }
    }
    Ok(sup)
}

/// Residual max-norms of the Wiener-Hopf/Hankel product identities and the
/// inverse identity at truncation alpha, measured over the observation
/// window x, y <= window.
///
/// The identities hold for the operators on the half line; truncating to
/// (0, alpha) leaves a reflection defect pinned to the moving alpha-corner
/// whose magnitude does not shrink with alpha. Convergence is therefore
/// measured where it genuinely happens: on a fixed window, with the corner
/// receding from it as alpha grows.
///
/// Returns (hankel-product residual, wiener-hopf-product residual,
/// inverse-identity residual).
pub fn identity_residuals(
    phi_f: &TestFunction,
    psi_f: &TestFunction,
    k: f64,
    alpha: f64,
    window: f64,
    n: usize,
    cfg: &TransformConfig,
) -> Result<(f64, f64, f64)> {
    let s1 = SymbolFn::from_symbol(&crate::symbols::make_symbol(phi_f, k));
    let s2 = SymbolFn::from_symbol(&crate::symbols::make_symbol(psi_f, k));
    let s12 = SymbolFn::one_plus_product_minus_one(&s1, &s2);
    let w1 = build_finite_wh(&s1, alpha, n, cfg)?;
    let w2 = build_finite_wh(&s2, alpha, n, cfg)?;
    let h1 = build_hankel(&s1, alpha, n, cfg)?;
    let h2 = build_hankel(&s2, alpha, n, cfg)?;
    let h12 = build_hankel(&s12, alpha, n, cfg)?;
    let w12 = build_finite_wh(&s12, alpha, n, cfg)?;

    let windowed_max = |op: &DiscretizedOperator| -> f64 {
        let nodes = op.grid().nodes();
        let mut max = 0.0f64;
        for i in 0..op.n() {
            if nodes[i] > window {
                break;
            }
            for j in 0..op.n() {
                if nodes[j] > window {
                    break;
                }
                max = max.max(op.entry(i, j).norm());
            }
        }
        max
    };

    // W(phi) H(psi) + H(phi) W(psi) = H(phi psi), with the finite-symbol
    // conventions W(1+s) = I + W(s) and H(1+s) = H(s).
    let hankel_residual = windowed_max(
        &h2.add(&op_compose(&w1, &h2)?)?
            .add(&h1)?
            .add(&op_compose(&h1, &w2)?)?
            .sub(&h12)?,
    );

    // W(phi) W(psi) = W(phi psi) - H(phi) H(psi).
    let wh_residual = windowed_max(
        &w1.add(&w2)?
            .add(&op_compose(&w1, &w2)?)?
            .sub(&w12)?
            .add(&op_compose(&h1, &h2)?)?,
    );

    // (W(phi) + H(phi)) (W(phi^{-1}) + H(phi^{-1})) = I with
    // phi^{-1} - 1 = e^{-ikf} - 1.
    let s1_inv = SymbolFn::from_symbol(&crate::symbols::make_symbol(phi_f, -k));
    let w1i = build_finite_wh(&s1_inv, alpha, n, cfg)?;
    let h1i = build_hankel(&s1_inv, alpha, n, cfg)?;
    let id = nystrom_identity(w1.grid());
    let left = id.add(&w1)?.add(&h1)?;
    let right = id.add(&w1i)?.add(&h1i)?;
    let inverse_residual = windowed_max(&op_compose(&left, &right)?.sub(&id)?);

    Ok((hankel_residual, wh_residual, inverse_residual))
}

/// Quadrature-weighted operator product:
/// C(x_i, x_j) = sum_l A(x_i, x_l) w_l B(x_l, x_j).
pub fn op_compose(
    a: &DiscretizedOperator,
    b: &DiscretizedOperator,
) -> Result<DiscretizedOperator> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(
            "op_compose requires identical grids".into(),
        ));
    }
    let n = a.n();
    let w = a.grid().weights().to_vec();
    let b_matrix = b.matrix();
    let a_ref = &a;
    let mut matrix = vec![C64::new(0.0, 0.0); n * n];
    matrix.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for l in 0..n {
            let ail_w = a_ref.entry(i, l) * w[l];
            if ail_w.re == 0.0 && ail_w.im == 0.0 {
                continue;
            }
            let brow = &b_matrix[l * n..(l + 1) * n];
            for (slot, &blj) in row.iter_mut().zip(brow) {
                *slot += ail_w * blj;
            }
        }
    });
    Ok(DiscretizedOperator::from_parts(
        a.grid().clone(),
        matrix,
        Provenance {
            kind: OperatorKind::Composite,
            ..*a.provenance()
        },
    ))
}

/// The Nystrom identity on a grid: K(x_i, x_j) = delta_ij / w_i, the unit
/// of quadrature-weighted composition.
pub fn nystrom_identity(grid: &Quadrature) -> DiscretizedOperator {
    let n = grid.len();
    let mut matrix = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        matrix[i * n + i] = C64::new(1.0 / grid.weights()[i], 0.0);
    }
    DiscretizedOperator::from_parts(
        grid.clone(),
        matrix,
        Provenance {
            kind: OperatorKind::Composite,
            alpha: f64::NAN,
            nu: f64::NAN,
            ensemble_n: 0,
            k: 0.0,
        },
    )
}
