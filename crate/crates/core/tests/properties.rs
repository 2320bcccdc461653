//! Property tests for the structural invariants that hold at every input,
//! complementing the value-pinned oracle tests.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rmstat_core::asymptotics::kac_identity_check;
use rmstat_core::fredholm::fredholm_det;
use rmstat_core::operators::{DiscretizedOperator, OperatorKind, Provenance};
use rmstat_core::specfun::gauss_legendre;
use rmstat_core::symbols::{catalog, make_symbol};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_legendre_weights_positive_and_sum(n in 1usize..120, span in 0.1f64..50.0) {
        let q = gauss_legendre(n, -0.3, -0.3 + span).unwrap();
        prop_assert!(q.weights().iter().all(|&w| w > 0.0));
        let total: f64 = q.weights().iter().sum();
        prop_assert!((total - span).abs() < 1e-12 * span.max(1.0));
    }

    #[test]
    fn gauss_legendre_monomial_exactness(n in 1usize..40, d_frac in 0.0f64..1.0) {
        let d = ((2 * n - 1) as f64 * d_frac) as i32;
        let q = gauss_legendre(n, 0.0, 1.0).unwrap();
        let got = q.integrate(|x| x.powi(d));
        let exact = 1.0 / (d as f64 + 1.0);
        prop_assert!((got - exact).abs() < 1e-13 * exact.max(1.0));
    }

    #[test]
    fn symbol_modulus_and_conjugation(which in 0usize..3, k in -3.0f64..3.0, x in -30.0f64..30.0) {
        let f = &catalog()[which];
        let s = make_symbol(f, k);
        let sc = make_symbol(f, -k);
        // e^{ikf} stays on the unit circle.
        prop_assert!(((s.eval(x) + 1.0).norm() - 1.0).abs() < 1e-14);
        // Flipping k conjugates the symbol of a real function.
        prop_assert!((sc.eval(x) - s.eval(x).conj()).norm() < 1e-15);
        // Evenness.
        prop_assert!((s.eval(-x) - s.eval(x)).norm() == 0.0);
    }

    #[test]
    fn rank_one_determinant_identity(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..5)) {
        // K(x, y) = u(x) u(y) with u a random polynomial on (0, 1):
        // det(I + K) = 1 + int u^2.
        let grid = gauss_legendre(60, 0.0, 1.0).unwrap();
        let u = |x: f64| -> f64 {
            coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum()
        };
        let n = grid.len();
        let mut matrix = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = C64::new(u(grid.nodes()[i]) * u(grid.nodes()[j]), 0.0);
            }
        }
        let op = DiscretizedOperator::from_parts(
            grid.clone(),
            matrix,
            Provenance {
                kind: OperatorKind::Composite,
                alpha: f64::NAN,
                nu: f64::NAN,
                ensemble_n: 0,
                k: 0.0,
            },
        );
        let norm_sq = grid.integrate(|x| u(x) * u(x));
        let det = fredholm_det(&op).unwrap();
        prop_assert!((det.value.re - (1.0 + norm_sq)).abs() < 1e-10 * (1.0 + norm_sq));
        prop_assert!(det.value.im.abs() < 1e-12);
        // log and value stay consistent.
        prop_assert!((det.log_value.exp() - det.value).norm() < 1e-10);
    }

    #[test]
    fn kac_identity_random_vectors(a in proptest::collection::vec(-1.0f64..1.0, 1..7)) {
        let (lhs, rhs) = kac_identity_check(&a).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }
}
