use altlin::dynamics::{larmor_constants, MagneticSystem};
use nalgebra::Vector4;
use proptest::prelude::*;

proptest! {
    #[test]
    fn closed_form_flow_matches_exponential(b in -3.0f64..3.0, t in 0.0f64..12.0) {
        let sys = MagneticSystem::new(b);
        prop_assert!((sys.f(t) - sys.f_expm(t)).amax() < 1e-10);
        prop_assert!(sys.symplectic_residual(t) < 1e-10);
    }

    #[test]
    fn flow_is_a_group(b in -3.0f64..3.0, t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let sys = MagneticSystem::new(b);
        prop_assert!((sys.f(t1) * sys.f(t2) - sys.f(t1 + t2)).amax() < 1e-12);
    }

    #[test]
    fn larmor_constants_and_energy_are_conserved(
        b in 0.1f64..3.0,
        t in 0.0f64..20.0,
        x in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let sys = MagneticSystem::new(b);
        let x0 = Vector4::from_column_slice(&x);
        let xt = sys.evolve(&x0, t);
        let (a0, b0) = larmor_constants(&x0, b);
        let (a1, b1) = larmor_constants(&xt, b);
        prop_assert!((a0 - a1).abs() < 1e-9 && (b0 - b1).abs() < 1e-9);
        prop_assert!((sys.hamiltonian(&x0) - sys.hamiltonian(&xt)).abs() < 1e-9);
    }
}
