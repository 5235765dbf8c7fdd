use altlin::catalog::{KTransform, MagneticGauge};
use altlin::geometry::{
    compatibility_check, frame_from_jacobian, oscillator_residual, poisson_bracket, pushforward_frame_2d,
    pushforward_frame_general,
};
use altlin::linalg::{fd_jacobian, max_abs};
use altlin::linstruct::{Diffeo, Point};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Jacobian of `q = Q(1 + λR²)` written out by hand.
fn k_jacobian(lambda: f64, big_q: f64, big_p: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            1.0 + lambda * (3.0 * big_q * big_q + big_p * big_p),
            2.0 * lambda * big_q * big_p,
            2.0 * lambda * big_q * big_p,
            1.0 + lambda * (big_q * big_q + 3.0 * big_p * big_p),
        ],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn k_pushforward_tensors(big_q in -2.0f64..2.0, big_p in -2.0f64..2.0) {
        let t = KTransform::new(0.1).unwrap();
        let w = Point::from_vec(vec![big_q, big_p]);
        let x = Diffeo::forward(&t, &w);
        let fast = pushforward_frame_2d(&t, &x).unwrap();
        let slow = pushforward_frame_general(&t, &x).unwrap();
        let c = compatibility_check(&fast);
        prop_assert!(c.passes(1e-10), "{c:?}");
        prop_assert!(max_abs(&(&fast.omega - &slow.omega)) < 1e-10);
        prop_assert!(max_abs(&(&fast.j - &slow.j)) < 1e-10);
        prop_assert!(max_abs(&(&fast.g - &slow.g)) < 1e-10);
        prop_assert!(max_abs(&(&fast.lambda - &slow.lambda)) < 1e-10);

        let a = k_jacobian(0.1, big_q, big_p);
        let d = a.determinant();
        prop_assert!((fast.d - d).abs() < 1e-10 * d);
        let dq = DVector::from_vec(vec![1.0, 0.0]);
        let dp = DVector::from_vec(vec![0.0, 1.0]);
        prop_assert!((poisson_bracket(&fast, &dq, &dp) - d).abs() < 1e-10 * d.max(1.0));
        prop_assert!(oscillator_residual(&fast) < 1e-10 * x.amax().max(1.0));
    }

    #[test]
    fn magnetic_pushforward_preserves_compatibility(v in proptest::collection::vec(-1.5f64..1.5, 6)) {
        let m = MagneticGauge::quadratic(0.7);
        let w = Point::from_vec(v);
        let x = m.forward(&w);
        let f = pushforward_frame_general(&m, &x).unwrap();
        prop_assert!(compatibility_check(&f).passes(1e-9));
        prop_assert!(max_abs(&(f.lambda.clone() * -&f.omega - DMatrix::identity(6, 6))) < 1e-9);
    }
}

#[test]
fn spot_value_at_unit_q() {
    let t = KTransform::new(0.1).unwrap();
    let x = Diffeo::forward(&t, &Point::from_vec(vec![1.0, 0.0]));
    assert!((x[0] - 1.1).abs() < 1e-15);
    let f = pushforward_frame_2d(&t, &x).unwrap();
    assert!((f.d - 1.43).abs() < 1e-12);
}

#[test]
fn finite_difference_jacobian_reproduces_frame() {
    let t = KTransform::new(1.0).unwrap();
    let w = Point::from_vec(vec![0.3, -0.8]);
    let x = Diffeo::forward(&t, &w);
    let a = fd_jacobian(|y| Diffeo::forward(&t, y), &w, 1e-6);
    let fd = frame_from_jacobian(&x, &w, &a).unwrap();
    let exact = pushforward_frame_2d(&t, &x).unwrap();
    assert!(max_abs(&(fd.j - exact.j)) < 1e-7);
    assert!(max_abs(&(fd.g - exact.g)) < 1e-7);
}
