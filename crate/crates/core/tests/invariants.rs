use cliffourier::algebra::{AlgebraSpec, Multivector};
use cliffourier::kernel::{eval_i, eval_kernel, KernelSign};
use cliffourier::random::{random_smooth_field, rng_from_seed};
use cliffourier::transform::{rel_linf, transform, Side, TransformRequest};
use cliffourier::GridSpec;
use proptest::prelude::*;

fn mv(n: usize) -> impl Strategy<Value = Multivector> {
    let spec = AlgebraSpec::new(n).unwrap();
    prop::collection::vec(-1.0f64..1.0, spec.blade_count())
        .prop_map(move |c| Multivector::from_coeffs(spec, c).unwrap())
}

fn triple() -> impl Strategy<Value = (Multivector, Multivector, Multivector)> {
    (1usize..=3).prop_flat_map(|n| (mv(n), mv(n), mv(n)))
}

fn vec_n(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let lhs = &(&a * &b) * &c;
        let rhs = &a * &(&b * &c);
        let scale = a.norm() * b.norm() * c.norm() + 1.0;
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn product_distributes((a, b, c) in triple()) {
        let lhs = &a * &(&b + &c);
        let rhs = &(&a * &b) + &(&a * &c);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + a.norm() * (b.norm() + c.norm())));
    }

    #[test]
    fn reversion_is_anti_involution((a, b, _c) in triple()) {
        let lhs = (&a * &b).reversion();
        let rhs = &b.reversion() * &a.reversion();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + a.norm() * b.norm()));
        prop_assert!(a.reversion().reversion().max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn product_norm_is_submultiplicative((a, b, _c) in triple()) {
        let m = a.spec().generators() as i32;
        let bound = 2f64.powf(m as f64 / 2.0) * a.norm() * b.norm();
        prop_assert!((&a * &b).norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_is_unit_and_inverted_by_opposite_sign(
        (x, y) in (1usize..=3).prop_flat_map(|n| (vec_n(n), vec_n(n)))
    ) {
        let spec = AlgebraSpec::new(x.len()).unwrap();
        let k = eval_kernel(spec, &x, &y, KernelSign::Forward).unwrap();
        let kinv = eval_kernel(spec, &x, &y, KernelSign::Inverse).unwrap();
        prop_assert!((k.norm() - 1.0).abs() < 1e-12);
        prop_assert!((&k * &kinv).max_abs_diff(&Multivector::one(spec)) < 1e-12);
        prop_assert!(k.reversion().max_abs_diff(&kinv) < 1e-12);
        prop_assert!(k.in_bivector_subalgebra());
    }

    #[test]
    fn kernel_commutes_with_i(
        (x, y) in (1usize..=3).prop_flat_map(|n| (vec_n(n), vec_n(n)))
    ) {
        let spec = AlgebraSpec::new(x.len()).unwrap();
        let k = eval_kernel(spec, &x, &y, KernelSign::Forward).unwrap();
        let i = eval_i(spec, &x, &y).unwrap();
        prop_assert!((&k * &i).max_abs_diff(&(&i * &k)) < 1e-12);
    }

    #[test]
    fn transform_preserves_norm(seed in any::<u64>(), n in 1usize..=2, left in any::<bool>()) {
        let spec = AlgebraSpec::new(n).unwrap();
        let grid = GridSpec::from_extent(vec![32; n], &vec![-6.0; n], &vec![6.0; n]).unwrap();
        let f = random_smooth_field(&grid, spec, &mut rng_from_seed(seed)).unwrap();
        let side = if left { Side::Left } else { Side::Right };
        let t = transform(&f, &TransformRequest::forward(side)).unwrap();
        prop_assert!((t.l2_norm() - f.l2_norm()).abs() <= 1e-10 * f.l2_norm());
    }

    #[test]
    fn transform_is_linear_in_scalars(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let spec = AlgebraSpec::new(1).unwrap();
        let grid = GridSpec::centered(vec![16], vec![0.5]).unwrap();
        let mut rng = rng_from_seed(seed);
        let f = random_smooth_field(&grid, spec, &mut rng).unwrap();
        let g = random_smooth_field(&grid, spec, &mut rng).unwrap();
        let req = TransformRequest::forward(Side::Left);
        let lhs = transform(&f.scale(alpha).add(&g).unwrap(), &req).unwrap();
        let rhs = transform(&f, &req).unwrap().scale(alpha).add(&transform(&g, &req).unwrap()).unwrap();
        prop_assert!(rel_linf(&lhs, &rhs).unwrap() < 1e-12);
    }
}
