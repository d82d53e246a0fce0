//! Clifford–Fourier transforms of multivector-valued fields on `R^n`.
//!
//! Fields take values in the real Clifford algebra `G_{2n}` with generators
//! `e_1..e_n, e'_1..e'_n`. The transform kernel is `exp(-Σ_i B_i x_i y_i)`
//! with the commuting bivectors `B_i = e_i e'_i` (`B_i² = -1`), which makes
//! the classical multidimensional Fourier machinery carry over: Plancherel,
//! inversion, operational calculus, convolution, and extensions into the
//! doubled space `R^n × R^n` that are monogenic for the Dirac operator.

pub mod algebra;
pub mod cli;
pub mod fieldio;
pub mod kernel;
pub mod monogenic;
pub mod random;
pub mod transform;

pub use algebra::{AlgebraError, AlgebraSpec, BladeIndex, ComplexMultivector, Multivector};
pub use fieldio::{FieldError, FieldGenerator, GridSpec, Profile, SampledField};
pub use kernel::{ExtendedPoint, KernelError, KernelSign, SignPattern};
