use cliffourier::algebra::AlgebraSpec;
use cliffourier::fieldio::sample;
use cliffourier::monogenic::{dirac_residual_norm, ExtensionSpec, ExtensionVariant};
use cliffourier::random::{random_field, random_smooth_field, random_smooth_subalgebra_field, rng_from_seed};
use cliffourier::transform::{cft_fast_detailed, rel_linf, transform, Side, TransformRequest};
use cliffourier::{ExtendedPoint, FieldGenerator, GridSpec, Multivector, Profile, SampledField};
use proptest::prelude::*;

fn smooth_grid(n: usize) -> GridSpec {
    let dims = if n == 1 { 64 } else { 32 };
    GridSpec::from_extent(vec![dims; n], &vec![-8.0; n], &vec![8.0; n]).unwrap()
}

/// `Σ_x f(x) g(x) · weight` as a multivector.
fn quadrature_product(f: &SampledField, g: &SampledField) -> Multivector {
    let mut acc = Multivector::zero(f.spec());
    for j in 0..f.len() {
        acc += &(&f.value(j) * &g.value(j));
    }
    acc.scale(f.grid().measure_weight())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplication_formula(seed in any::<u64>(), n in 1usize..=2) {
        let spec = AlgebraSpec::new(n).unwrap();
        // Self-dual grid: the frequency grid coincides with the spatial one.
        let dims = if n == 1 { 64 } else { 32 };
        let grid = GridSpec::centered(vec![dims; n], vec![(std::f64::consts::TAU / dims as f64).sqrt(); n]).unwrap();
        prop_assert!(grid.frequency_grid().same_as(&grid));
        let mut rng = rng_from_seed(seed);
        let f = random_smooth_field(&grid, spec, &mut rng).unwrap();
        let g = random_smooth_field(&grid, spec, &mut rng).unwrap();
        let fr = transform(&f, &TransformRequest::forward(Side::Right)).unwrap();
        let gl = transform(&g, &TransformRequest::forward(Side::Left)).unwrap();
        let lhs = quadrature_product(&fr, &g);
        let rhs = quadrature_product(&f, &gl);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-6 * (1.0 + lhs.norm()));
    }

    #[test]
    fn sup_norm_is_bounded_by_l1(seed in any::<u64>(), n in 1usize..=2, left in any::<bool>()) {
        let spec = AlgebraSpec::new(n).unwrap();
        let grid = GridSpec::centered(vec![16; n], vec![0.5; n]).unwrap();
        let f = random_field(&grid, spec, &mut rng_from_seed(seed)).unwrap();
        let side = if left { Side::Left } else { Side::Right };
        let t = transform(&f, &TransformRequest::forward(side)).unwrap();
        prop_assert!(t.max_norm() <= 2f64.powi(n as i32) * f.l1_norm());
    }

    #[test]
    fn fast_engine_residue_is_negligible(seed in any::<u64>(), n in 1usize..=2, left in any::<bool>()) {
        let spec = AlgebraSpec::new(n).unwrap();
        let grid = GridSpec::centered(vec![16; n], vec![0.4; n]).unwrap();
        let f = random_field(&grid, spec, &mut rng_from_seed(seed)).unwrap();
        let side = if left { Side::Left } else { Side::Right };
        let out = cft_fast_detailed(&f, &TransformRequest::forward(side)).unwrap();
        prop_assert!(out.residue <= 1e-12);
    }

    #[test]
    fn subalgebra_fields_have_equal_left_and_right_transforms(seed in any::<u64>(), n in 1usize..=2) {
        let spec = AlgebraSpec::new(n).unwrap();
        let grid = smooth_grid(n);
        let f = random_smooth_subalgebra_field(&grid, spec, &mut rng_from_seed(seed)).unwrap();
        let l = transform(&f, &TransformRequest::forward(Side::Left)).unwrap();
        let r = transform(&f, &TransformRequest::forward(Side::Right)).unwrap();
        prop_assert!(rel_linf(&l, &r).unwrap() <= 1e-12);
    }

    #[test]
    fn every_variant_is_monogenic_on_scalar_densities(
        y in -2.0f64..2.0,
        yp in -1.5f64..-0.2,
        variant in prop::sample::select(ExtensionVariant::ALL.to_vec()),
    ) {
        let spec = AlgebraSpec::new(1).unwrap();
        let grid = GridSpec::cell_centered(vec![128], &[0.0], &[2.0]).unwrap();
        let gen = FieldGenerator::new(
            Profile::BoxIndicator { lower: vec![0.5], upper: vec![1.5] },
            Multivector::one(spec),
        ).unwrap();
        let ext = ExtensionSpec::new(variant, sample(&gen, &grid, spec).unwrap()).unwrap();
        let p = ExtendedPoint::new(vec![y], vec![yp]).unwrap();
        let coarse = dirac_residual_norm(&ext, &p, 1e-3).unwrap();
        let fine = dirac_residual_norm(&ext, &p, 5e-4).unwrap();
        prop_assert!(coarse <= 1e-4);
        prop_assert!(coarse / fine > 3.5 && coarse / fine < 4.5, "ratio {}", coarse / fine);
    }
}

#[test]
fn box_spectrum_decays_toward_the_nyquist_shell() {
    let spec = AlgebraSpec::new(1).unwrap();
    let grid = GridSpec::from_extent(vec![128], &[-8.0], &[8.0]).unwrap();
    let gen = FieldGenerator::new(
        Profile::BoxIndicator { lower: vec![-1.0], upper: vec![1.0] },
        Multivector::one(spec),
    )
    .unwrap();
    let t = transform(&sample(&gen, &grid, spec).unwrap(), &TransformRequest::forward(Side::Left)).unwrap();
    let fg = t.grid().clone();
    let top = fg.origin()[0].abs();
    let centre = (0..fg.len()).find(|&m| fg.point(m)[0] == 0.0).unwrap();
    let shell = (0..fg.len())
        .filter(|&m| fg.point(m)[0].abs() >= 0.9 * top)
        .map(|m| t.node_norm(m))
        .fold(0.0, f64::max);
    assert!(shell < 0.2 * t.node_norm(centre), "{shell} vs {}", t.node_norm(centre));
}
