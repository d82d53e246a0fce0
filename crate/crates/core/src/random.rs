//! Seeded random multivectors and fields for property checks and the
//! verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{is_bivector_blade, AlgebraSpec, Multivector};
use crate::fieldio::{FieldError, GridSpec, SampledField};

/// Default seed used by the command-line tool when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 1234;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients drawn uniformly from `[-1, 1]`.
pub fn random_multivector<R: Rng + ?Sized>(spec: AlgebraSpec, rng: &mut R) -> Multivector {
    let coeffs = (0..spec.blade_count()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Multivector::from_vec_unchecked(spec, coeffs)
}

/// Random element of the commutative subalgebra spanned by products of
/// `B_i = e_i e'_i`.
pub fn random_subalgebra_element<R: Rng + ?Sized>(spec: AlgebraSpec, rng: &mut R) -> Multivector {
    let coeffs = (0..spec.blade_count() as u32)
        .map(|mask| {
            if is_bivector_blade(mask, spec.n()) {
                rng.random_range(-1.0..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    Multivector::from_vec_unchecked(spec, coeffs)
}

/// Independent uniform `[-1, 1]` coefficients at every node.
pub fn random_field<R: Rng + ?Sized>(
    grid: &GridSpec,
    spec: AlgebraSpec,
    rng: &mut R,
) -> Result<SampledField, FieldError> {
    SampledField::from_fn(grid.clone(), spec, |_| random_multivector(spec, rng))
}

/// Random smooth, rapidly decaying field
/// `exp(-|x - c|² / (2w²)) (A + Σ_i (x_i - c_i) C_i)` with random constant
/// multivectors, centre `c ∈ [-0.5, 0.5]^n` and width `w ∈ [0.7, 1.0]`.
pub fn random_smooth_field<R: Rng + ?Sized>(
    grid: &GridSpec,
    spec: AlgebraSpec,
    rng: &mut R,
) -> Result<SampledField, FieldError> {
    smooth_field_with(grid, spec, rng, random_multivector)
}

/// As [`random_smooth_field`] with values in the `B_i` subalgebra.
pub fn random_smooth_subalgebra_field<R: Rng + ?Sized>(
    grid: &GridSpec,
    spec: AlgebraSpec,
    rng: &mut R,
) -> Result<SampledField, FieldError> {
    smooth_field_with(grid, spec, rng, random_subalgebra_element)
}

fn smooth_field_with<R: Rng + ?Sized>(
    grid: &GridSpec,
    spec: AlgebraSpec,
    rng: &mut R,
    draw: fn(AlgebraSpec, &mut R) -> Multivector,
) -> Result<SampledField, FieldError> {
    let n = spec.n();
    let center: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
    let width: f64 = rng.random_range(0.7..=1.0);
    let constant = draw(spec, rng);
    let linear: Vec<Multivector> = (0..n).map(|_| draw(spec, rng)).collect();
    SampledField::from_fn(grid.clone(), spec, |x| {
        let r2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum();
        let envelope = (-r2 / (2.0 * width * width)).exp();
        let mut value = constant.clone();
        for (i, c) in linear.iter().enumerate() {
            value += &c.scale(x[i] - center[i]);
        }
        value.scale(envelope)
    })
}
