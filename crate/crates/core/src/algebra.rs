//! Dense multivector arithmetic in the Clifford algebra `G_{2n}`.
//!
//! The algebra is generated by `e_1..e_n` (the base space) and `e'_1..e'_n`
//! (the primed copy used by the transform kernel), all squaring to `+1`.
//! A basis blade is addressed by a bitmask: bit `i` (for `i < n`) stands for
//! `e_{i+1}` and bit `n + i` for `e'_{i+1}`. The blade is the product of its
//! generators in ascending bit order, and coefficient arrays are indexed by
//! the mask value directly.
//!
//! Products use a per-dimension Cayley sign table computed once from
//! [`blade_sign`], which is the only place reordering signs are derived.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported base dimension (256 blades).
pub const MAX_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("base dimension {0} outside 1..={MAX_N}")]
    InvalidDimension(usize),
    #[error("algebra mismatch: G_{{2*{left}}} vs G_{{2*{right}}}")]
    SpecMismatch { left: usize, right: usize },
    #[error("grade {grade} outside 0..={max}")]
    GradeOutOfRange { grade: usize, max: usize },
    #[error("blade mask {mask:#x} invalid for n = {n}")]
    InvalidBlade { mask: u32, n: usize },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("non-finite coefficient at blade {0}")]
    NonFinite(usize),
    #[error("generator index {index} outside 0..{n}")]
    GeneratorOutOfRange { index: usize, n: usize },
}

/// The algebra `G_{2n}` over the base space `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSpec {
    n: usize,
}

impl AlgebraSpec {
    pub fn new(n: usize) -> Result<Self, AlgebraError> {
        if n == 0 || n > MAX_N {
            return Err(AlgebraError::InvalidDimension(n));
        }
        Ok(Self { n })
    }

    /// Base dimension `n`.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators, `2n`.
    #[inline]
    pub fn generators(&self) -> usize {
        2 * self.n
    }

    /// Number of basis blades, `4^n`.
    #[inline]
    pub fn blade_count(&self) -> usize {
        1 << (2 * self.n)
    }

    /// `e_{i+1}` for zero-based `i`.
    pub fn e(&self, i: usize) -> Result<BladeIndex, AlgebraError> {
        self.check_generator(i)?;
        Ok(BladeIndex(1 << i))
    }

    /// `e'_{i+1}` for zero-based `i`.
    pub fn e_prime(&self, i: usize) -> Result<BladeIndex, AlgebraError> {
        self.check_generator(i)?;
        Ok(BladeIndex(1 << (self.n + i)))
    }

    /// The bivector `B_{i+1} = e_{i+1} e'_{i+1}` for zero-based `i`.
    pub fn bivector(&self, i: usize) -> Result<BladeIndex, AlgebraError> {
        self.check_generator(i)?;
        Ok(BladeIndex((1 << i) | (1 << (self.n + i))))
    }

    pub fn contains(&self, blade: BladeIndex) -> bool {
        (blade.0 as usize) < self.blade_count()
    }

    /// Product of two basis blades: `e_a e_b = sign * e_{a XOR b}`.
    pub fn blade_product(
        &self,
        a: BladeIndex,
        b: BladeIndex,
    ) -> Result<(f64, BladeIndex), AlgebraError> {
        for blade in [a, b] {
            if !self.contains(blade) {
                return Err(AlgebraError::InvalidBlade {
                    mask: blade.0,
                    n: self.n,
                });
            }
        }
        Ok((blade_sign(a.0, b.0), BladeIndex(a.0 ^ b.0)))
    }

    fn check_generator(&self, i: usize) -> Result<(), AlgebraError> {
        if i >= self.n {
            return Err(AlgebraError::GeneratorOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &AlgebraSpec) -> Result<(), AlgebraError> {
        if self != other {
            return Err(AlgebraError::SpecMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Cayley sign table, row-major `[a * blade_count + b]`.
    pub(crate) fn sign_table(&self) -> &'static [i8] {
        static TABLES: [OnceLock<Vec<i8>>; MAX_N + 1] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        TABLES[self.n].get_or_init(|| {
            let count = self.blade_count() as u32;
            let mut table = Vec::with_capacity((count * count) as usize);
            for a in 0..count {
                for b in 0..count {
                    table.push(blade_sign(a, b) as i8);
                }
            }
            table
        })
    }
}

/// Bitmask address of a basis blade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BladeIndex(pub u32);

impl BladeIndex {
    pub const SCALAR: BladeIndex = BladeIndex(0);

    #[inline]
    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Sign picked up by reversing the generator order: `(-1)^(k(k-1)/2)`.
    #[inline]
    pub fn reversion_sign(self) -> f64 {
        let k = self.grade();
        if (k * k.saturating_sub(1) / 2).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Reordering sign of the blade product `e_a e_b` for a positive-definite
/// metric: each generator of `b` is moved left past every generator of `a`
/// with a larger index; repeated generators then square to `+1`.
#[inline]
pub fn blade_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Accumulates `scale * (a b)` into `out`. Skips zero coefficients of `a`
/// and `b`, which keeps products with sparse operands cheap.
#[inline]
pub(crate) fn gp_accumulate(table: &[i8], a: &[f64], b: &[f64], scale: f64, out: &mut [f64]) {
    let count = a.len();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let row = &table[i * count..(i + 1) * count];
        let ai = ai * scale;
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0.0 {
                continue;
            }
            out[i ^ j] += f64::from(row[j]) * ai * bj;
        }
    }
}

/// Real multivector with one coefficient per basis blade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multivector {
    spec: AlgebraSpec,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(spec: AlgebraSpec) -> Self {
        Self {
            spec,
            coeffs: vec![0.0; spec.blade_count()],
        }
    }

    pub fn scalar(spec: AlgebraSpec, value: f64) -> Self {
        let mut mv = Self::zero(spec);
        mv.coeffs[0] = value;
        mv
    }

    pub fn one(spec: AlgebraSpec) -> Self {
        Self::scalar(spec, 1.0)
    }

    /// `coeff * e_blade`.
    pub fn blade(spec: AlgebraSpec, blade: BladeIndex, coeff: f64) -> Result<Self, AlgebraError> {
        if !spec.contains(blade) {
            return Err(AlgebraError::InvalidBlade {
                mask: blade.0,
                n: spec.n(),
            });
        }
        let mut mv = Self::zero(spec);
        mv.coeffs[blade.index()] = coeff;
        Ok(mv)
    }

    pub fn from_coeffs(spec: AlgebraSpec, coeffs: Vec<f64>) -> Result<Self, AlgebraError> {
        if coeffs.len() != spec.blade_count() {
            return Err(AlgebraError::CoefficientCount {
                expected: spec.blade_count(),
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite(i));
        }
        Ok(Self { spec, coeffs })
    }

    /// Builds from a coefficient slice without the finiteness check; used on
    /// hot paths where the values come from finite arithmetic.
    pub(crate) fn from_slice_unchecked(spec: AlgebraSpec, coeffs: &[f64]) -> Self {
        debug_assert_eq!(coeffs.len(), spec.blade_count());
        Self {
            spec,
            coeffs: coeffs.to_vec(),
        }
    }

    pub(crate) fn from_vec_unchecked(spec: AlgebraSpec, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), spec.blade_count());
        Self { spec, coeffs }
    }

    #[inline]
    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    #[inline]
    pub fn coeff(&self, blade: BladeIndex) -> f64 {
        self.coeffs[blade.index()]
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn geometric_product(&self, other: &Multivector) -> Result<Multivector, AlgebraError> {
        self.spec.ensure_same(&other.spec)?;
        let mut out = vec![0.0; self.coeffs.len()];
        gp_accumulate(
            self.spec.sign_table(),
            &self.coeffs,
            &other.coeffs,
            1.0,
            &mut out,
        );
        Ok(Multivector::from_vec_unchecked(self.spec, out))
    }

    /// The grade-`k` part `<A>_k`.
    pub fn grade_projection(&self, k: usize) -> Result<Multivector, AlgebraError> {
        let max = self.spec.generators();
        if k > max {
            return Err(AlgebraError::GradeOutOfRange { grade: k, max });
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if (i as u32).count_ones() as usize == k { c } else { 0.0 })
            .collect();
        Ok(Multivector::from_vec_unchecked(self.spec, coeffs))
    }

    /// Reversion `A^†`.
    pub fn reversion(&self) -> Multivector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * BladeIndex(i as u32).reversion_sign())
            .collect();
        Multivector::from_vec_unchecked(self.spec, coeffs)
    }

    /// `A · B = <A B^†>_0`.
    pub fn scalar_product(&self, other: &Multivector) -> Result<f64, AlgebraError> {
        self.spec.ensure_same(&other.spec)?;
        // <A B†>_0 only collects equal blades; e_I e_I† = 1 for every I.
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// True iff every nonzero blade pairs `e_i` with `e'_i`, i.e. the
    /// multivector lies in the commutative subalgebra `G(B_1..B_n)`.
    pub fn in_bivector_subalgebra(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(mask, &c)| c == 0.0 || is_bivector_blade(mask as u32, self.spec.n()))
    }

    pub fn scale(&self, factor: f64) -> Multivector {
        Multivector::from_vec_unchecked(self.spec, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Multivector) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Multivector, tol: f64) -> bool {
        self.spec == other.spec && self.max_abs_diff(other) <= tol
    }
}

/// Blade masks of the bivector subalgebra pair bit `i` with bit `n + i`.
#[inline]
pub(crate) fn is_bivector_blade(mask: u32, n: usize) -> bool {
    let low = mask & ((1 << n) - 1);
    let high = mask >> n;
    low == high
}

impl Add for &Multivector {
    type Output = Multivector;

    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.spec, rhs.spec, "multivector algebra mismatch");
        Multivector::from_vec_unchecked(
            self.spec,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Add for Multivector {
    type Output = Multivector;

    fn add(self, rhs: Multivector) -> Multivector {
        &self + &rhs
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.spec, rhs.spec, "multivector algebra mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;

    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.spec, rhs.spec, "multivector algebra mismatch");
        Multivector::from_vec_unchecked(
            self.spec,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Sub for Multivector {
    type Output = Multivector;

    fn sub(self, rhs: Multivector) -> Multivector {
        &self - &rhs
    }
}

impl Neg for &Multivector {
    type Output = Multivector;

    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;

    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

/// Geometric product. Panics on an algebra mismatch; use
/// [`Multivector::geometric_product`] for the fallible form.
impl Mul for &Multivector {
    type Output = Multivector;

    fn mul(self, rhs: &Multivector) -> Multivector {
        self.geometric_product(rhs).expect("multivector algebra mismatch")
    }
}

impl Mul for Multivector {
    type Output = Multivector;

    fn mul(self, rhs: Multivector) -> Multivector {
        &self * &rhs
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;

    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;

    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

/// Human-readable blade name, e.g. `e1e2'`.
pub fn blade_name(blade: BladeIndex, n: usize) -> String {
    if blade.0 == 0 {
        return "1".to_string();
    }
    let mut name = String::new();
    for bit in 0..2 * n {
        if blade.0 & (1 << bit) != 0 {
            if bit < n {
                name.push_str(&format!("e{}", bit + 1));
            } else {
                name.push_str(&format!("e{}'", bit - n + 1));
            }
        }
    }
    name
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{}", blade_name(BladeIndex(i as u32), self.spec.n()))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Element of the complexification `C ⊗ G_{2n}`. The complex unit `i` is
/// central and commutes with every blade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMultivector {
    pub re: Multivector,
    pub im: Multivector,
}

impl ComplexMultivector {
    pub fn new(re: Multivector, im: Multivector) -> Result<Self, AlgebraError> {
        re.spec.ensure_same(&im.spec)?;
        Ok(Self { re, im })
    }

    pub fn zero(spec: AlgebraSpec) -> Self {
        Self {
            re: Multivector::zero(spec),
            im: Multivector::zero(spec),
        }
    }

    pub fn from_real(re: Multivector) -> Self {
        let im = Multivector::zero(re.spec);
        Self { re, im }
    }

    /// The complex unit `i·1`.
    pub fn i(spec: AlgebraSpec) -> Self {
        Self {
            re: Multivector::zero(spec),
            im: Multivector::one(spec),
        }
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.re.spec
    }

    /// `(a + ib)(c + id) = (ac - bd) + i(ad + bc)` with geometric products.
    pub fn complex_product(&self, other: &ComplexMultivector) -> Result<Self, AlgebraError> {
        let spec = self.spec();
        spec.ensure_same(&other.spec())?;
        let table = spec.sign_table();
        let count = spec.blade_count();
        let mut re = vec![0.0; count];
        let mut im = vec![0.0; count];
        gp_accumulate(table, &self.re.coeffs, &other.re.coeffs, 1.0, &mut re);
        gp_accumulate(table, &self.im.coeffs, &other.im.coeffs, -1.0, &mut re);
        gp_accumulate(table, &self.re.coeffs, &other.im.coeffs, 1.0, &mut im);
        gp_accumulate(table, &self.im.coeffs, &other.re.coeffs, 1.0, &mut im);
        Ok(Self {
            re: Multivector::from_vec_unchecked(spec, re),
            im: Multivector::from_vec_unchecked(spec, im),
        })
    }

    /// Multiplies by the complex scalar `re + i im`.
    pub fn scale_complex(&self, re: f64, im: f64) -> Self {
        Self {
            re: &self.re.scale(re) - &self.im.scale(im),
            im: &self.re.scale(im) + &self.im.scale(re),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &ComplexMultivector) -> f64 {
        self.re.max_abs_diff(&other.re).max(self.im.max_abs_diff(&other.im))
    }
}

impl Add for &ComplexMultivector {
    type Output = ComplexMultivector;

    fn add(self, rhs: &ComplexMultivector) -> ComplexMultivector {
        ComplexMultivector {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &ComplexMultivector {
    type Output = ComplexMultivector;

    fn sub(self, rhs: &ComplexMultivector) -> ComplexMultivector {
        ComplexMultivector {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> AlgebraSpec {
        AlgebraSpec::new(n).unwrap()
    }

    #[test]
    fn spec_counts() {
        for n in 1..=MAX_N {
            let spec = g(n);
            assert_eq!(spec.generators(), 2 * n);
            assert_eq!(spec.blade_count(), 1 << (2 * n));
        }
        assert!(AlgebraSpec::new(0).is_err());
        assert!(AlgebraSpec::new(5).is_err());
    }

    #[test]
    fn generator_squares_to_one() {
        let spec = g(2);
        let e1 = spec.e(0).unwrap();
        assert_eq!(spec.blade_product(e1, e1).unwrap(), (1.0, BladeIndex::SCALAR));
    }

    #[test]
    fn generators_anticommute() {
        let spec = g(2);
        let e1 = spec.e(0).unwrap();
        let e2 = spec.e(1).unwrap();
        assert_eq!(spec.blade_product(e2, e1).unwrap(), (-1.0, BladeIndex(0b11)));
        assert_eq!(spec.blade_product(e1, e2).unwrap(), (1.0, BladeIndex(0b11)));
    }

    #[test]
    fn scalar_blade_is_identity() {
        let spec = g(2);
        for b in 0..spec.blade_count() as u32 {
            assert_eq!(
                spec.blade_product(BladeIndex::SCALAR, BladeIndex(b)).unwrap(),
                (1.0, BladeIndex(b))
            );
        }
    }

    #[test]
    fn blade_product_rejects_bad_mask() {
        assert!(g(1).blade_product(BladeIndex(4), BladeIndex(0)).is_err());
    }

    #[test]
    fn bivectors_square_to_minus_one_and_commute() {
        let spec = g(3);
        for i in 0..3 {
            let b = Multivector::blade(spec, spec.bivector(i).unwrap(), 1.0).unwrap();
            assert_eq!(&b * &b, Multivector::scalar(spec, -1.0));
            for j in 0..3 {
                let c = Multivector::blade(spec, spec.bivector(j).unwrap(), 1.0).unwrap();
                assert!((&b * &c).approx_eq(&(&c * &b), 0.0));
            }
        }
    }

    #[test]
    fn product_rejects_mismatched_algebras() {
        let a = Multivector::one(g(1));
        let b = Multivector::one(g(2));
        assert!(matches!(
            a.geometric_product(&b),
            Err(AlgebraError::SpecMismatch { left: 1, right: 2 })
        ));
        assert!(a.scalar_product(&b).is_err());
    }

    #[test]
    fn grade_projection_filters() {
        let spec = g(2);
        let mut a = Multivector::scalar(spec, 3.0);
        a.coeffs_mut()[0b01] = 4.0;
        a.coeffs_mut()[0b11] = 5.0;
        let one = a.grade_projection(1).unwrap();
        assert_eq!(one, Multivector::blade(spec, BladeIndex(0b01), 4.0).unwrap());
        let mut total = Multivector::zero(spec);
        for k in 0..=4 {
            total += &a.grade_projection(k).unwrap();
        }
        assert_eq!(total, a);
        let b1 = Multivector::blade(spec, spec.bivector(0).unwrap(), 1.0).unwrap();
        assert_eq!(b1.grade_projection(2).unwrap(), b1);
        assert!(matches!(
            a.grade_projection(5),
            Err(AlgebraError::GradeOutOfRange { grade: 5, max: 4 })
        ));
    }

    #[test]
    fn reversion_signs() {
        let spec = g(2);
        let e1 = Multivector::blade(spec, spec.e(0).unwrap(), 1.0).unwrap();
        assert_eq!(e1.reversion(), e1);
        let e12 = Multivector::blade(spec, BladeIndex(0b11), 1.0).unwrap();
        assert_eq!(e12.reversion(), -&e12);
        assert_eq!(Multivector::one(spec).reversion(), Multivector::one(spec));
    }

    #[test]
    fn scalar_product_examples() {
        let spec = g(2);
        let e12 = Multivector::blade(spec, BladeIndex(0b11), 1.0).unwrap();
        assert_eq!(e12.scalar_product(&e12).unwrap(), 1.0);
        let e1 = Multivector::blade(spec, BladeIndex(0b01), 1.0).unwrap();
        let e2 = Multivector::blade(spec, BladeIndex(0b10), 1.0).unwrap();
        assert_eq!(e1.scalar_product(&e2).unwrap(), 0.0);
        // Agrees with the definition <A B†>_0.
        let a = Multivector::from_coeffs(spec, (0..16).map(|i| i as f64 - 7.5).collect()).unwrap();
        let b = Multivector::from_coeffs(spec, (0..16).map(|i| (i * i) as f64 * 0.1).collect()).unwrap();
        let direct = (&a * &b.reversion()).scalar_part();
        assert!((a.scalar_product(&b).unwrap() - direct).abs() < 1e-12);
        assert!((a.scalar_product(&a).unwrap() - a.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        let spec = g(1);
        let mut a = Multivector::scalar(spec, 3.0);
        a.coeffs_mut()[0b11] = 4.0;
        assert_eq!(a.norm(), 5.0);
        assert_eq!(Multivector::zero(spec).norm(), 0.0);
    }

    #[test]
    fn subalgebra_membership() {
        let spec = g(3);
        let b1 = Multivector::blade(spec, spec.bivector(0).unwrap(), 1.0).unwrap();
        let b2 = Multivector::blade(spec, spec.bivector(1).unwrap(), 1.0).unwrap();
        let b3 = Multivector::blade(spec, spec.bivector(2).unwrap(), 2.0).unwrap();
        assert!((&b1 * &b2).in_bivector_subalgebra());
        assert!(!Multivector::blade(spec, spec.e(0).unwrap(), 1.0)
            .unwrap()
            .in_bivector_subalgebra());
        assert!((&Multivector::one(spec) + &b3).in_bivector_subalgebra());
    }

    #[test]
    fn complex_unit_squares_to_minus_one() {
        let spec = g(2);
        let i = ComplexMultivector::i(spec);
        let sq = i.complex_product(&i).unwrap();
        assert_eq!(sq.re, Multivector::scalar(spec, -1.0));
        assert!(sq.im.is_zero());
    }

    #[test]
    fn from_coeffs_validates() {
        let spec = g(1);
        assert!(matches!(
            Multivector::from_coeffs(spec, vec![0.0; 3]),
            Err(AlgebraError::CoefficientCount { expected: 4, got: 3 })
        ));
        assert!(matches!(
            Multivector::from_coeffs(spec, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(AlgebraError::NonFinite(1))
        ));
    }

    #[test]
    fn display_names_blades() {
        let spec = g(1);
        let mut a = Multivector::scalar(spec, 2.0);
        a.coeffs_mut()[0b11] = -1.0;
        assert_eq!(a.to_string(), "2 + -1*e1e1'");
    }
}
