//! Closed-form transform kernels `e^{∓I(x,y)}`, their extensions to
//! `R^{2n}`, the idempotents `M^s` and the reflections `R_s`.
//!
//! `I(x,y) = Σ B_i x_i y_i` with commuting bivectors `B_i = e_i e'_i`,
//! `B_i² = -1`, so every factor of the kernel is `cos θ - B_i sin θ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{blade_sign, AlgebraSpec, ComplexMultivector, Multivector};

/// Largest `|(x, y')|` accepted by the extended kernels before `exp`
/// would leave the comfortable range of `f64`.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("sign pattern entries must be ±1")]
    InvalidSign,
    #[error("scalar exponent {0} exceeds ±{MAX_EXPONENT}")]
    ExponentRange(f64),
}

/// Which exponential the kernel represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelSign {
    /// `e^{-I(x,y)}`, the forward transform kernel (sign `+1`).
    Forward,
    /// `e^{+I(x,y)}`, the inverse kernel (sign `-1`).
    Inverse,
}

impl KernelSign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            KernelSign::Forward => 1.0,
            KernelSign::Inverse => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            KernelSign::Forward => KernelSign::Inverse,
            KernelSign::Inverse => KernelSign::Forward,
        }
    }
}

/// `s ∈ {-1, 1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self, KernelError> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(KernelError::InvalidSign);
        }
        Ok(Self(signs))
    }

    /// Pattern whose entry `k` is `-1` iff bit `k` of `bits` is set.
    pub fn from_bits(n: usize, bits: usize) -> Self {
        Self((0..n).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// All `2^n` patterns, ordered by [`SignPattern::from_bits`].
    pub fn all(n: usize) -> impl Iterator<Item = SignPattern> {
        (0..1usize << n).map(move |bits| SignPattern::from_bits(n, bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        f64::from(self.0[k])
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

/// A point `ŷ = y + y'` of `R^{2n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPoint {
    pub y: Vec<f64>,
    pub y_prime: Vec<f64>,
}

impl ExtendedPoint {
    pub fn new(y: Vec<f64>, y_prime: Vec<f64>) -> Result<Self, KernelError> {
        if y.len() != y_prime.len() {
            return Err(KernelError::DimensionMismatch {
                expected: y.len(),
                got: y_prime.len(),
            });
        }
        if y.iter().chain(&y_prime).any(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        Ok(Self { y, y_prime })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Euclidean norm `|ŷ|` in `R^{2n}`.
    pub fn norm(&self) -> f64 {
        self.y.iter().chain(&self.y_prime).map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_vec(spec: AlgebraSpec, v: &[f64]) -> Result<(), KernelError> {
    if v.len() != spec.n() {
        return Err(KernelError::DimensionMismatch {
            expected: spec.n(),
            got: v.len(),
        });
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(KernelError::NonFinite);
    }
    Ok(())
}

/// Basis of the commutative subalgebra `G(B_1..B_n)`: entry `S` (a subset
/// of axes as a bitmask) is the blade of `Π_{i∈S} B_i` and the sign picked
/// up by reordering that product into ascending generator order.
#[derive(Debug, Clone)]
pub(crate) struct SubalgebraBasis {
    pub masks: Vec<u32>,
    pub signs: Vec<f64>,
}

impl SubalgebraBasis {
    pub fn new(spec: AlgebraSpec) -> Self {
        let n = spec.n();
        let mut masks = Vec::with_capacity(1 << n);
        let mut signs = Vec::with_capacity(1 << n);
        for subset in 0u32..1 << n {
            let mut mask = 0u32;
            let mut sign = 1.0;
            for i in 0..n {
                if subset >> i & 1 == 1 {
                    let b = (1u32 << i) | (1u32 << (n + i));
                    sign *= blade_sign(mask, b);
                    mask ^= b;
                }
            }
            masks.push(mask);
            signs.push(sign);
        }
        Self { masks, signs }
    }

    /// Expands `Π_i (c_i - σ s_i B_i)` into per-subset coefficients
    /// (already multiplied by the reordering sign).
    pub fn kernel_coeffs(&self, cos: &[f64], sin: &[f64], sign: f64, out: &mut [f64]) {
        let n = cos.len();
        for (subset, slot) in out.iter_mut().enumerate() {
            let mut c = self.signs[subset];
            for i in 0..n {
                if subset >> i & 1 == 1 {
                    c *= -sign * sin[i];
                } else {
                    c *= cos[i];
                }
            }
            *slot = c;
        }
    }

    /// `out += scale · K f` (left) or `out += scale · f K` (right) where `K`
    /// is given by per-subset coefficients from [`Self::kernel_coeffs`].
    #[inline]
    pub fn apply(
        &self,
        table: &[i8],
        coeffs: &[f64],
        f: &[f64],
        left: bool,
        scale: f64,
        out: &mut [f64],
    ) {
        let count = f.len();
        for (subset, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = self.masks[subset] as usize;
            let c = c * scale;
            if left {
                let row = &table[m * count..(m + 1) * count];
                for (b, &fb) in f.iter().enumerate() {
                    out[m ^ b] += c * f64::from(row[b]) * fb;
                }
            } else {
                for (b, &fb) in f.iter().enumerate() {
                    out[b ^ m] += c * f64::from(table[b * count + m]) * fb;
                }
            }
        }
    }

    pub fn to_multivector(&self, spec: AlgebraSpec, coeffs: &[f64]) -> Multivector {
        let mut mv = Multivector::zero(spec);
        for (subset, &c) in coeffs.iter().enumerate() {
            mv.coeffs_mut()[self.masks[subset] as usize] += c;
        }
        mv
    }
}

/// `I(x, y) = Σ_i B_i x_i y_i`.
pub fn eval_i(spec: AlgebraSpec, x: &[f64], y: &[f64]) -> Result<Multivector, KernelError> {
    check_vec(spec, x)?;
    check_vec(spec, y)?;
    let mut mv = Multivector::zero(spec);
    for i in 0..spec.n() {
        let b = (1usize << i) | (1usize << (spec.n() + i));
        mv.coeffs_mut()[b] = x[i] * y[i];
    }
    Ok(mv)
}

/// `Π_i (cos(x_i y_i) - σ B_i sin(x_i y_i))`; `Forward` is `e^{-I(x,y)}`.
pub fn eval_kernel(
    spec: AlgebraSpec,
    x: &[f64],
    y: &[f64],
    sign: KernelSign,
) -> Result<Multivector, KernelError> {
    check_vec(spec, x)?;
    check_vec(spec, y)?;
    let (cos, sin): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).map(|(a, b)| (a * b).sin_cos()).map(|(s, c)| (c, s)).unzip();
    let basis = SubalgebraBasis::new(spec);
    let mut coeffs = vec![0.0; 1 << spec.n()];
    basis.kernel_coeffs(&cos, &sin, sign.value(), &mut coeffs);
    Ok(basis.to_multivector(spec, &coeffs))
}

/// `e^{σ (x,y')}`, guarded against overflow.
pub(crate) fn scalar_weight(x: &[f64], y_prime: &[f64], sign: f64) -> Result<f64, KernelError> {
    let dot: f64 = x.iter().zip(y_prime).map(|(a, b)| a * b).sum();
    let exponent = sign * dot;
    if exponent.abs() > MAX_EXPONENT {
        return Err(KernelError::ExponentRange(exponent));
    }
    Ok(exponent.exp())
}

/// `e^{σ(x,y')} · eval_kernel(x, y, σ)`; for `Forward` this is `e^{-I(x,ŷ)}`.
pub fn eval_extended_kernel_v1(
    spec: AlgebraSpec,
    x: &[f64],
    p: &ExtendedPoint,
    sign: KernelSign,
) -> Result<Multivector, KernelError> {
    check_vec(spec, &p.y_prime)?;
    let weight = scalar_weight(x, &p.y_prime, sign.value())?;
    Ok(eval_kernel(spec, x, &p.y, sign)?.scale(weight))
}

/// `e^{-σ(x,y')} · eval_kernel(x, y, σ)`; for `Forward` this is `e^{-I(ŷ,x)}`.
pub fn eval_extended_kernel_v2(
    spec: AlgebraSpec,
    p: &ExtendedPoint,
    x: &[f64],
    sign: KernelSign,
) -> Result<Multivector, KernelError> {
    check_vec(spec, &p.y_prime)?;
    let weight = scalar_weight(x, &p.y_prime, -sign.value())?;
    Ok(eval_kernel(spec, x, &p.y, sign)?.scale(weight))
}

/// `M^±_k = (1 ± i B_k) / 2`.
pub fn factor_idempotent(spec: AlgebraSpec, k: usize, sign: f64) -> ComplexMultivector {
    let n = spec.n();
    let mut cm = ComplexMultivector::zero(spec);
    cm.re.coeffs_mut()[0] = 0.5;
    cm.im.coeffs_mut()[(1 << k) | (1 << (n + k))] = 0.5 * sign;
    cm
}

/// `M^s = M^{s_1}_1 ⋯ M^{s_n}_n`.
pub fn idempotent(spec: AlgebraSpec, s: &SignPattern) -> Result<ComplexMultivector, KernelError> {
    if s.len() != spec.n() {
        return Err(KernelError::DimensionMismatch {
            expected: spec.n(),
            got: s.len(),
        });
    }
    let mut acc = ComplexMultivector::from_real(Multivector::one(spec));
    for k in 0..spec.n() {
        acc = acc
            .complex_product(&factor_idempotent(spec, k, s.get(k)))
            .expect("same algebra");
    }
    Ok(acc)
}

/// `R_s(y)_k = -s_k y_k`.
pub fn reflect(s: &SignPattern, y: &[f64]) -> Result<Vec<f64>, KernelError> {
    if s.len() != y.len() {
        return Err(KernelError::DimensionMismatch {
            expected: s.len(),
            got: y.len(),
        });
    }
    Ok(y.iter().enumerate().map(|(k, v)| -s.get(k) * v).collect())
}
