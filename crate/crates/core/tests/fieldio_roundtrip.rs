use cliffourier::algebra::AlgebraSpec;
use cliffourier::fieldio::{
    decode_field, encode_field, read_field, read_field_in, write_field, FieldError, GridSpec, SampledField,
};
use cliffourier::random::{random_field, rng_from_seed};
use proptest::prelude::*;

fn field(n: usize, dims: usize, complex: bool, seed: u64) -> SampledField {
    let spec = AlgebraSpec::new(n).unwrap();
    let grid = GridSpec::new(vec![dims; n], vec![-1.25; n], vec![0.3; n]).unwrap();
    let f = random_field(&grid, spec, &mut rng_from_seed(seed)).unwrap();
    if complex {
        let g = random_field(&grid, spec, &mut rng_from_seed(seed ^ 1)).unwrap();
        SampledField::from_parts(&f, &g).unwrap()
    } else {
        f
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_decode_is_lossless(
        n in 1usize..=2,
        half in 1usize..=4,
        complex in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let f = field(n, 2 * half, complex, seed);
        let g = decode_field(&encode_field(&f)).unwrap();
        prop_assert!(g.grid().same_as(f.grid()));
        prop_assert_eq!(g.is_complex(), f.is_complex());
        prop_assert_eq!(g.data(), f.data());
    }

    #[test]
    fn any_truncation_is_rejected(cut in 1usize..64, seed in any::<u64>()) {
        let bytes = encode_field(&field(1, 4, false, seed));
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_field(&bytes[..keep]).is_err());
    }
}

#[test]
fn file_roundtrip_and_algebra_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.mvf");
    let f = field(2, 4, true, 9);
    write_field(&f, &path).unwrap();
    let g = read_field(&path).unwrap();
    assert_eq!(g.data(), f.data());
    assert!(read_field_in(&path, AlgebraSpec::new(2).unwrap()).is_ok());
    let err = read_field_in(&path, AlgebraSpec::new(1).unwrap()).unwrap_err();
    assert!(matches!(err, FieldError::AlgebraMismatch { .. }), "{err:?}");
}

#[test]
fn corrupt_headers_are_rejected() {
    let mut bytes = encode_field(&field(1, 4, false, 3));
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert_eq!(decode_field(&bad).unwrap_err().code(), "bad-magic");
    bytes.push(0);
    assert!(decode_field(&bytes).is_err());
    assert!(matches!(
        read_field("/definitely/not/here.mvf").unwrap_err(),
        FieldError::Io(_)
    ));
}
