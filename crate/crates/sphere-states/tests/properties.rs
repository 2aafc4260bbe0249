use density_core::{Builtin, Grid};
use proptest::prelude::*;
use sphere_states::ConditionedTensor;

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn functionals_are_nonnegative_and_satisfy_villani(mu in 0.3f64..1.6, sigma in 0.25f64..0.9, n in 4usize..40) {
        let f = Builtin::Bimodal { mu, sigma }.sample_unit_energy(&Grid::default()).unwrap();
        let ct = ConditionedTensor::new(&f, n).unwrap();
        let h = ct.entropy_hn().unwrap().value;
        let d0 = ct.entropy_production_dn(0.0).unwrap().value;
        let d1 = ct.entropy_production_dn(1.0).unwrap().value;
        prop_assert!(h >= -1e-8 && d0 >= -1e-8 && d1 >= d0 - 1e-8);
        prop_assert!(d1 >= h / 3.0 - 1e-8 * n as f64);
        prop_assert!((ct.marginal_mass().unwrap().value - 1.0).abs() < 1e-6);
        prop_assert!(ct.log_power_integral(1.0).unwrap().value >= 0.0);
    }
}
