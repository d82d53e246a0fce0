//! Multivector fields sampled on uniform grids over `R^n`, the MVF1 binary
//! format, built-in samplers and quadrature norms.
//!
//! Integrals are plain Riemann sums: every node stands for the cell of
//! volume `Π spacing` around it. With the normalized measure
//! `dm = (2π)^{-n/2} dx` the per-node weight is `Π spacing · (2π)^{-n/2}`.
//!
//! # MVF1 layout (little-endian)
//!
//! ```text
//! "MVF1" | u32 version = 1 | u32 n | u32 complex
//! u32 dims[n] | f64 origin[n] | f64 spacing[n]
//! per node, row-major (last axis fastest):
//!     4^n f64 coefficients in blade-mask order   (real part)
//!     4^n f64 coefficients                       (imaginary part, complex only)
//! ```

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraSpec, ComplexMultivector, Multivector};

pub const MAGIC: &[u8; 4] = b"MVF1";
pub const FORMAT_VERSION: u32 = 1;
/// Upper bound on `Π dims`.
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("bad magic: expected \"MVF1\"")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionMismatch(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("algebra mismatch: expected n = {expected}, found n = {found}")]
    AlgebraMismatch { expected: usize, found: usize },
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl FieldError {
    /// Stable short code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            FieldError::BadMagic => "bad-magic",
            FieldError::VersionMismatch(_) => "version-mismatch",
            FieldError::TruncatedPayload { .. } => "truncated-payload",
            FieldError::DimensionMismatch(_) => "dimension-mismatch",
            FieldError::AlgebraMismatch { .. } => "algebra-mismatch",
            FieldError::GridMismatch => "grid-mismatch",
            FieldError::InvalidGrid(_) => "invalid-grid",
            FieldError::InvalidParameters(_) => "invalid-parameters",
            FieldError::Algebra(_) => "algebra",
            FieldError::Io(_) => "io",
        }
    }
}

/// Uniform rectangular grid: node `j` sits at `origin + j ∘ spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self, FieldError> {
        let n = dims.len();
        if n == 0 || n > crate::algebra::MAX_N {
            return Err(FieldError::InvalidGrid(format!("dimension {n} outside 1..=4")));
        }
        if origin.len() != n || spacing.len() != n {
            return Err(FieldError::InvalidGrid(
                "dims, origin and spacing must have equal length".into(),
            ));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2 || d % 2 != 0) {
            return Err(FieldError::InvalidGrid(format!("axis length {d} must be even and >= 2")));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(FieldError::InvalidGrid("spacing must be positive and finite".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(FieldError::InvalidGrid("origin must be finite".into()));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= MAX_POINTS)
            .ok_or_else(|| FieldError::InvalidGrid(format!("more than {MAX_POINTS} points")))?;
        debug_assert!(total > 0);
        Ok(Self {
            dims,
            origin,
            spacing,
        })
    }

    /// Grid with nodes `(j - dims/2) · spacing`, symmetric about the origin
    /// up to the unpaired node at `-dims/2 · spacing`.
    pub fn centered(dims: Vec<usize>, spacing: Vec<f64>) -> Result<Self, FieldError> {
        let origin = dims
            .iter()
            .zip(&spacing)
            .map(|(&d, &h)| -((d / 2) as f64) * h)
            .collect();
        Self::new(dims, origin, spacing)
    }

    /// `dims` nodes per axis covering `[lo, hi)` with the first node at `lo`.
    pub fn from_extent(dims: Vec<usize>, lo: &[f64], hi: &[f64]) -> Result<Self, FieldError> {
        if lo.len() != dims.len() || hi.len() != dims.len() {
            return Err(FieldError::InvalidGrid("extent length mismatch".into()));
        }
        let spacing: Vec<f64> = dims
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&d, (a, b))| (b - a) / d as f64)
            .collect();
        Self::new(dims, lo.to_vec(), spacing)
    }

    /// `dims` cells tiling `[lo, hi)` with nodes at the cell centres.
    pub fn cell_centered(dims: Vec<usize>, lo: &[f64], hi: &[f64]) -> Result<Self, FieldError> {
        let grid = Self::from_extent(dims, lo, hi)?;
        let origin = grid
            .origin
            .iter()
            .zip(&grid.spacing)
            .map(|(o, h)| o + 0.5 * h)
            .collect();
        Self::new(grid.dims, origin, grid.spacing)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    /// Row-major multi-index of a flat node index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for axis in (0..self.n()).rev() {
            idx[axis] = flat % self.dims[axis];
            flat /= self.dims[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Coordinates of a flat node index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coord(axis, i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |j| self.point(j))
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Quadrature weight of one node under `dm`.
    pub fn measure_weight(&self) -> f64 {
        self.cell_volume() * (2.0 * PI).powf(-(self.n() as f64) / 2.0)
    }

    /// Frequency grid matched to this grid by the discrete transform:
    /// `y_m = 2π m / (dims · h)` for `m ∈ [-dims/2, dims/2)`.
    pub fn frequency_grid(&self) -> GridSpec {
        let spacing = self
            .dims
            .iter()
            .zip(&self.spacing)
            .map(|(&d, &h)| 2.0 * PI / (d as f64 * h))
            .collect();
        GridSpec::centered(self.dims.clone(), spacing).expect("derived from a valid grid")
    }

    /// Same nodes scaled by `factor` about the coordinate origin.
    pub fn scaled(&self, factor: f64) -> Result<GridSpec, FieldError> {
        if factor.is_nan() || factor <= 0.0 {
            return Err(FieldError::InvalidGrid("scale factor must be positive".into()));
        }
        GridSpec::new(
            self.dims.clone(),
            self.origin.iter().map(|o| o * factor).collect(),
            self.spacing.iter().map(|h| h * factor).collect(),
        )
    }

    /// `origin / spacing` along `axis` when it is an integer (within 1e-9).
    pub fn origin_steps(&self, axis: usize) -> Option<i64> {
        integer_ratio(self.origin[axis], self.spacing[axis])
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        self.dims == other.dims
            && self.origin.iter().zip(&other.origin).all(|(&a, &b)| close(a, b))
            && self.spacing.iter().zip(&other.spacing).all(|(&a, &b)| close(a, b))
    }
}

pub(crate) fn integer_ratio(value: f64, step: f64) -> Option<i64> {
    let r = value / step;
    let rounded = r.round();
    ((r - rounded).abs() <= 1e-9).then_some(rounded as i64)
}

/// One multivector (or complexified multivector) per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    spec: AlgebraSpec,
    complex: bool,
    data: Vec<f64>,
}

impl SampledField {
    pub fn zeros(grid: GridSpec, spec: AlgebraSpec, complex: bool) -> Result<Self, FieldError> {
        check_grid_spec(&grid, spec)?;
        let stride = spec.blade_count() * if complex { 2 } else { 1 };
        let data = vec![0.0; grid.len() * stride];
        Ok(Self {
            grid,
            spec,
            complex,
            data,
        })
    }

    /// Wraps raw node data (layout as in the MVF1 payload).
    pub fn from_data(
        grid: GridSpec,
        spec: AlgebraSpec,
        complex: bool,
        data: Vec<f64>,
    ) -> Result<Self, FieldError> {
        check_grid_spec(&grid, spec)?;
        let stride = spec.blade_count() * if complex { 2 } else { 1 };
        if data.len() != grid.len() * stride {
            return Err(FieldError::DimensionMismatch(format!(
                "expected {} values, got {}",
                grid.len() * stride,
                data.len()
            )));
        }
        Ok(Self {
            grid,
            spec,
            complex,
            data,
        })
    }

    /// Real field with `values[j] = f(x_j)`.
    pub fn from_fn<F>(grid: GridSpec, spec: AlgebraSpec, mut f: F) -> Result<Self, FieldError>
    where
        F: FnMut(&[f64]) -> Multivector,
    {
        let mut field = Self::zeros(grid, spec, false)?;
        for j in 0..field.len() {
            let x = field.grid.point(j);
            let value = f(&x);
            field.spec.ensure_same(&value.spec())?;
            field.re_mut(j).copy_from_slice(value.coeffs());
        }
        Ok(field)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub(crate) fn stride(&self) -> usize {
        self.spec.blade_count() * if self.complex { 2 } else { 1 }
    }

    /// Coefficients of the real part at node `j`.
    #[inline]
    pub fn re(&self, j: usize) -> &[f64] {
        let count = self.spec.blade_count();
        let start = j * self.stride();
        &self.data[start..start + count]
    }

    #[inline]
    pub fn re_mut(&mut self, j: usize) -> &mut [f64] {
        let count = self.spec.blade_count();
        let start = j * self.stride();
        &mut self.data[start..start + count]
    }

    /// Coefficients of the imaginary part at node `j` (complex fields only).
    #[inline]
    pub fn im(&self, j: usize) -> Option<&[f64]> {
        self.complex.then(|| {
            let count = self.spec.blade_count();
            let start = j * self.stride() + count;
            &self.data[start..start + count]
        })
    }

    #[inline]
    pub fn im_mut(&mut self, j: usize) -> Option<&mut [f64]> {
        if !self.complex {
            return None;
        }
        let count = self.spec.blade_count();
        let start = j * self.stride() + count;
        Some(&mut self.data[start..start + count])
    }

    /// Real part at node `j`.
    pub fn value(&self, j: usize) -> Multivector {
        Multivector::from_slice_unchecked(self.spec, self.re(j))
    }

    pub fn complex_value(&self, j: usize) -> ComplexMultivector {
        let re = self.value(j);
        match self.im(j) {
            Some(im) => ComplexMultivector {
                re,
                im: Multivector::from_slice_unchecked(self.spec, im),
            },
            None => ComplexMultivector::from_real(re),
        }
    }

    pub fn set_value(&mut self, j: usize, value: &Multivector) -> Result<(), FieldError> {
        self.spec.ensure_same(&value.spec())?;
        self.re_mut(j).copy_from_slice(value.coeffs());
        Ok(())
    }

    pub fn real_part(&self) -> SampledField {
        if !self.complex {
            return self.clone();
        }
        let mut out = SampledField::zeros(self.grid.clone(), self.spec, false).expect("valid");
        for j in 0..self.len() {
            out.re_mut(j).copy_from_slice(self.re(j));
        }
        out
    }

    /// Imaginary part; zero for real fields.
    pub fn imag_part(&self) -> SampledField {
        let mut out = SampledField::zeros(self.grid.clone(), self.spec, false).expect("valid");
        if self.complex {
            for j in 0..self.len() {
                out.re_mut(j).copy_from_slice(self.im(j).expect("complex"));
            }
        }
        out
    }

    /// Complex field `re + i im` from two real fields on the same grid.
    pub fn from_parts(re: &SampledField, im: &SampledField) -> Result<SampledField, FieldError> {
        re.ensure_compatible(im)?;
        if re.complex || im.complex {
            return Err(FieldError::DimensionMismatch("parts must be real fields".into()));
        }
        let mut out = SampledField::zeros(re.grid.clone(), re.spec, true)?;
        for j in 0..re.len() {
            out.re_mut(j).copy_from_slice(re.re(j));
            out.im_mut(j).expect("complex").copy_from_slice(im.re(j));
        }
        Ok(out)
    }

    pub fn to_complex(&self) -> SampledField {
        if self.complex {
            return self.clone();
        }
        let zero = SampledField::zeros(self.grid.clone(), self.spec, false).expect("valid");
        SampledField::from_parts(self, &zero).expect("same grid")
    }

    pub(crate) fn ensure_compatible(&self, other: &SampledField) -> Result<(), FieldError> {
        self.spec.ensure_same(&other.spec)?;
        if !self.grid.same_as(&other.grid) {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    /// Same values attached to a different grid with the same shape.
    pub fn with_grid(&self, grid: GridSpec) -> Result<SampledField, FieldError> {
        if grid.dims() != self.grid.dims() {
            return Err(FieldError::GridMismatch);
        }
        Ok(SampledField {
            grid,
            ..self.clone()
        })
    }

    fn zip_with(&self, other: &SampledField, op: impl Fn(f64, f64) -> f64) -> Result<SampledField, FieldError> {
        self.ensure_compatible(other)?;
        let (a, b) = if self.complex == other.complex {
            (self.clone(), other.clone())
        } else {
            (self.to_complex(), other.to_complex())
        };
        let data = a.data.iter().zip(&b.data).map(|(&x, &y)| op(x, y)).collect();
        Ok(SampledField { data, ..a })
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField, FieldError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField, FieldError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> SampledField {
        SampledField {
            data: self.data.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Pointwise `f(x) A`.
    pub fn mul_right(&self, a: &Multivector) -> Result<SampledField, FieldError> {
        self.map_parts(|v| v.geometric_product(a))
    }

    /// Pointwise `A f(x)`.
    pub fn mul_left(&self, a: &Multivector) -> Result<SampledField, FieldError> {
        self.map_parts(|v| a.geometric_product(v))
    }

    /// Pointwise geometric product `f(x) g(x)` (complexified when either
    /// factor is complex).
    pub fn product(&self, other: &SampledField) -> Result<SampledField, FieldError> {
        self.ensure_compatible(other)?;
        let complex = self.complex || other.complex;
        let mut out = SampledField::zeros(self.grid.clone(), self.spec, complex)?;
        for j in 0..self.len() {
            let v = self.complex_value(j).complex_product(&other.complex_value(j))?;
            out.re_mut(j).copy_from_slice(v.re.coeffs());
            if let Some(im) = out.im_mut(j) {
                im.copy_from_slice(v.im.coeffs());
            }
        }
        Ok(out)
    }

    /// Pointwise reversion `f(x)^†`.
    pub fn reversion(&self) -> SampledField {
        self.map_parts(|v| Ok(v.reversion())).expect("reversion is total")
    }

    /// Applies a real-linear map to the real and imaginary parts of every node.
    pub fn map_parts<F>(&self, f: F) -> Result<SampledField, FieldError>
    where
        F: Fn(&Multivector) -> Result<Multivector, AlgebraError>,
    {
        let mut out = self.clone();
        for j in 0..self.len() {
            let re = f(&self.value(j))?;
            out.spec.ensure_same(&re.spec())?;
            out.re_mut(j).copy_from_slice(re.coeffs());
            if let Some(im) = self.im(j) {
                let im = f(&Multivector::from_slice_unchecked(self.spec, im))?;
                out.im_mut(j).expect("complex").copy_from_slice(im.coeffs());
            }
        }
        Ok(out)
    }

    /// Pointwise `w(x) f(x)` for a scalar weight function.
    pub fn weighted<F: Fn(&[f64]) -> f64>(&self, w: F) -> SampledField {
        let mut out = self.clone();
        let stride = self.stride();
        for j in 0..self.len() {
            let factor = w(&self.grid.point(j));
            for v in &mut out.data[j * stride..(j + 1) * stride] {
                *v *= factor;
            }
        }
        out
    }

    /// `|f(x_j)|` (including the imaginary part for complex fields).
    pub fn node_norm(&self, j: usize) -> f64 {
        let stride = self.stride();
        self.data[j * stride..(j + 1) * stride]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// `max_j |f(x_j)|`.
    pub fn max_norm(&self) -> f64 {
        (0..self.len()).map(|j| self.node_norm(j)).fold(0.0, f64::max)
    }

    /// `max_j |f(x_j) - g(x_j)|`.
    pub fn max_diff(&self, other: &SampledField) -> Result<f64, FieldError> {
        Ok(self.sub(other)?.max_norm())
    }

    /// `‖f‖₂` under `dm`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = (0..self.len()).map(|j| self.node_norm(j).powi(2)).sum();
        (sum * self.grid.measure_weight()).sqrt()
    }

    /// `‖f‖₁` under `dm`.
    pub fn l1_norm(&self) -> f64 {
        let sum: f64 = (0..self.len()).map(|j| self.node_norm(j)).sum();
        sum * self.grid.measure_weight()
    }

    /// `(f, g)₂ = ∫ f(x)·g(x) dx` with the multivector scalar product.
    /// Complex fields contribute `re·re + im·im`.
    pub fn inner_product(&self, other: &SampledField) -> Result<f64, FieldError> {
        self.ensure_compatible(other)?;
        let (a, b) = if self.complex == other.complex {
            (self.clone(), other.clone())
        } else {
            (self.to_complex(), other.to_complex())
        };
        let sum: f64 = a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum();
        Ok(sum * self.grid.cell_volume())
    }
}

/// `‖f‖₂` under `dm`.
pub fn l2_norm(f: &SampledField) -> f64 {
    f.l2_norm()
}

/// `(f, g)₂` with the `dx` measure.
pub fn inner_product(f: &SampledField, g: &SampledField) -> Result<f64, FieldError> {
    f.inner_product(g)
}

fn check_grid_spec(grid: &GridSpec, spec: AlgebraSpec) -> Result<(), FieldError> {
    if grid.n() != spec.n() {
        return Err(FieldError::AlgebraMismatch {
            expected: grid.n(),
            found: spec.n(),
        });
    }
    Ok(())
}

/// Scalar profile of a [`FieldGenerator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-|x - center|² / (2 width²))`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// Indicator of the closed box `[lower, upper]`.
    BoxIndicator { lower: Vec<f64>, upper: Vec<f64> },
    /// Indicator of the closed ball `|x - center| <= radius`.
    BallIndicator { center: Vec<f64>, radius: f64 },
    /// `(c + Σ a_i x_i + Σ b_i x_i²) · exp(-|x|² / (2 width²))`.
    PolynomialGaussian {
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<f64>,
        width: f64,
    },
    /// `Σ_k amplitude_k · cos(frequency_k · x + phase_k)`.
    TrigPolynomial { terms: Vec<TrigTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

impl Profile {
    pub fn kind(&self) -> &'static str {
        match self {
            Profile::Gaussian { .. } => "gaussian",
            Profile::BoxIndicator { .. } => "box-indicator",
            Profile::BallIndicator { .. } => "ball-indicator",
            Profile::PolynomialGaussian { .. } => "polynomial-gaussian",
            Profile::TrigPolynomial { .. } => "trig-polynomial",
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), FieldError> {
        let len_ok = |v: &[f64], what: &str| {
            if v.len() == n && v.iter().all(|c| c.is_finite()) {
                Ok(())
            } else {
                Err(FieldError::InvalidParameters(format!(
                    "{what} must hold {n} finite values"
                )))
            }
        };
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FieldError::InvalidParameters(format!("{what} must be positive")))
            }
        };
        match self {
            Profile::Gaussian { center, width } => {
                len_ok(center, "center")?;
                positive(*width, "width")
            }
            Profile::BoxIndicator { lower, upper } => {
                len_ok(lower, "lower")?;
                len_ok(upper, "upper")?;
                if lower.iter().zip(upper).any(|(a, b)| a >= b) {
                    return Err(FieldError::InvalidParameters("box bounds must satisfy lower < upper".into()));
                }
                Ok(())
            }
            Profile::BallIndicator { center, radius } => {
                len_ok(center, "center")?;
                positive(*radius, "radius")
            }
            Profile::PolynomialGaussian {
                constant,
                linear,
                quadratic,
                width,
            } => {
                if !constant.is_finite() {
                    return Err(FieldError::InvalidParameters("constant must be finite".into()));
                }
                len_ok(linear, "linear")?;
                len_ok(quadratic, "quadratic")?;
                positive(*width, "width")
            }
            Profile::TrigPolynomial { terms } => {
                for t in terms {
                    len_ok(&t.frequency, "frequency")?;
                    if !(t.amplitude.is_finite() && t.phase.is_finite()) {
                        return Err(FieldError::InvalidParameters("non-finite trig term".into()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Gaussian { center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
                (-r2 / (2.0 * width * width)).exp()
            }
            Profile::BoxIndicator { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (a, b))| *a <= *v && *v <= *b);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::BallIndicator { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::PolynomialGaussian {
                constant,
                linear,
                quadratic,
                width,
            } => {
                let poly = constant
                    + x.iter()
                        .zip(linear.iter().zip(quadratic))
                        .map(|(v, (a, b))| a * v + b * v * v)
                        .sum::<f64>();
                let r2: f64 = x.iter().map(|v| v * v).sum();
                poly * (-r2 / (2.0 * width * width)).exp()
            }
            Profile::TrigPolynomial { terms } => terms
                .iter()
                .map(|t| {
                    let arg: f64 = t.frequency.iter().zip(x).map(|(w, v)| w * v).sum();
                    t.amplitude * (arg + t.phase).cos()
                })
                .sum(),
        }
    }
}

/// Scalar profile times a constant multivector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGenerator {
    pub profile: Profile,
    pub blade_weights: Multivector,
}

impl FieldGenerator {
    pub fn new(profile: Profile, blade_weights: Multivector) -> Result<Self, FieldError> {
        profile.validate(blade_weights.spec().n())?;
        Ok(Self {
            profile,
            blade_weights,
        })
    }

    pub fn eval(&self, x: &[f64]) -> Multivector {
        self.blade_weights.scale(self.profile.eval(x))
    }
}

/// `values[j] = profile(x_j) · bladeWeights`.
pub fn sample(gen: &FieldGenerator, grid: &GridSpec, spec: AlgebraSpec) -> Result<SampledField, FieldError> {
    spec.ensure_same(&gen.blade_weights.spec())?;
    gen.profile.validate(spec.n())?;
    SampledField::from_fn(grid.clone(), spec, |x| gen.eval(x))
}

/// Serializes a field into MVF1 bytes.
pub fn encode_field(f: &SampledField) -> Vec<u8> {
    let n = f.grid.n();
    let mut out = Vec::with_capacity(16 + n * 20 + f.data.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&u32::from(f.complex).to_le_bytes());
    for &d in f.grid.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &o in f.grid.origin() {
        out.extend_from_slice(&o.to_le_bytes());
    }
    for &h in f.grid.spacing() {
        out.extend_from_slice(&h.to_le_bytes());
    }
    for &v in &f.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FieldError> {
        if self.pos + len > self.bytes.len() {
            return Err(FieldError::TruncatedPayload {
                expected: self.pos + len,
                found: self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, FieldError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, FieldError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Parses MVF1 bytes.
pub fn decode_field(bytes: &[u8]) -> Result<SampledField, FieldError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(FieldError::BadMagic);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(FieldError::VersionMismatch(version));
    }
    let n = r.u32()? as usize;
    let spec = AlgebraSpec::new(n)
        .map_err(|_| FieldError::DimensionMismatch(format!("n = {n} outside 1..=4")))?;
    let complex = match r.u32()? {
        0 => false,
        1 => true,
        other => return Err(FieldError::DimensionMismatch(format!("complex flag {other}"))),
    };
    let dims = (0..n).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
    let origin = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let spacing = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let grid = GridSpec::new(dims, origin, spacing).map_err(|e| FieldError::DimensionMismatch(e.to_string()))?;
    let values = grid.len() * spec.blade_count() * if complex { 2 } else { 1 };
    let payload = r.take(values * 8)?;
    if r.pos != bytes.len() {
        return Err(FieldError::DimensionMismatch(format!(
            "{} trailing bytes after payload",
            bytes.len() - r.pos
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SampledField::from_data(grid, spec, complex, data)
}

pub fn write_field(f: &SampledField, path: impl AsRef<Path>) -> Result<(), FieldError> {
    fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<SampledField, FieldError> {
    decode_field(&fs::read(path)?)
}

/// Reads a field and checks that it lives in the expected algebra.
pub fn read_field_in(path: impl AsRef<Path>, spec: AlgebraSpec) -> Result<SampledField, FieldError> {
    let field = read_field(path)?;
    if field.spec != spec {
        return Err(FieldError::AlgebraMismatch {
            expected: spec.n(),
            found: field.spec.n(),
        });
    }
    Ok(field)
}

/// Provenance sidecar written next to an MVF1 file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub generator: String,
    pub parameters: serde_json::Value,
    pub created: String,
    #[serde(rename = "tool-version")]
    pub tool_version: String,
}

impl FieldManifest {
    pub fn new(generator: impl Into<String>, parameters: serde_json::Value) -> Self {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            generator: generator.into(),
            parameters,
            created: format!("unix:{secs}"),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// `field.mvf` -> `field.json`.
pub fn manifest_path(path: impl AsRef<Path>) -> PathBuf {
    path.as_ref().with_extension("json")
}

pub fn write_manifest(manifest: &FieldManifest, field_path: impl AsRef<Path>) -> Result<(), FieldError> {
    let text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    fs::write(manifest_path(field_path), text)?;
    Ok(())
}
