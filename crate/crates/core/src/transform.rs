//! Discrete left/right Clifford–Fourier transforms and the grid operators
//! used by the operational calculus.
//!
//! Both engines approximate `∫ e^{-σI(x,y)} f(x) dm(x)` by a Riemann sum
//! with node weight `Π h · (2π)^{-n/2}`:
//!
//! * the direct engine evaluates that sum node by node and accepts any
//!   output grid;
//! * the fast engine computes the classical complex transform of every
//!   coefficient channel with an FFT and recombines
//!   `Σ_s M^s (F f)(R_s y)` (left) or `Σ_s (F f)(R_s y) M^s` (right).
//!
//! The fast engine needs an output grid dual to the input grid
//! (`spacing = 2π / (dims · h)`) that is mirror-symmetric up to whole
//! steps (`2 · origin / spacing` integral), which includes every grid
//! produced by [`GridSpec::frequency_grid`]. For such grids the two engines
//! compute the same finite sum.
//!
//! Translation, reflection and convolution act on node indices with
//! periodic wraparound.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Multivector};
use crate::fieldio::{integer_ratio, FieldError, GridSpec, SampledField};
use crate::kernel::{eval_kernel, KernelError, KernelSign, SignPattern, SubalgebraBasis};

/// Largest accepted imaginary residue of the fast engine, relative to the
/// norm of the result.
pub const RESIDUE_LIMIT: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("request asks for the {requested:?} engine")]
    EngineMismatch { requested: Engine },
    #[error("fast engine needs the dual grid: axis {axis} spacing {found}, expected {expected}")]
    NotDualGrid { axis: usize, expected: f64, found: f64 },
    #[error("axis {axis}: {what} is not a whole number of grid steps")]
    OffLattice { axis: usize, what: &'static str },
    #[error("imaginary residue {0:e} exceeds the fast-engine limit")]
    Residue(f64),
    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(f64),
    #[error("axis {axis} out of range for n = {n}")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("expected a real field")]
    ComplexInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `∫ K(x,y) f(x) dm(x)`.
    Left,
    /// `∫ f(x) K(x,y) dm(x)`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Kernel `e^{-I(x,y)}`.
    Forward,
    /// Kernel `e^{+I(x,y)}`.
    Inverse,
}

impl Direction {
    pub fn sign(self) -> KernelSign {
        match self {
            Direction::Forward => KernelSign::Forward,
            Direction::Inverse => KernelSign::Inverse,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Direct,
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRequest {
    pub side: Side,
    pub direction: Direction,
    pub engine: Engine,
    /// Defaults to the dual grid of the input ([`GridSpec::frequency_grid`]).
    pub output_grid: Option<GridSpec>,
}

impl TransformRequest {
    pub fn new(side: Side, direction: Direction, engine: Engine) -> Self {
        Self {
            side,
            direction,
            engine,
            output_grid: None,
        }
    }

    pub fn forward(side: Side) -> Self {
        Self::new(side, Direction::Forward, Engine::Fast)
    }

    pub fn inverse(side: Side) -> Self {
        Self::new(side, Direction::Inverse, Engine::Fast)
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_output_grid(mut self, grid: GridSpec) -> Self {
        self.output_grid = Some(grid);
        self
    }

    fn output_for(&self, input: &GridSpec) -> GridSpec {
        self.output_grid
            .clone()
            .unwrap_or_else(|| input.frequency_grid())
    }
}

/// Runs the engine named in the request.
pub fn transform(f: &SampledField, req: &TransformRequest) -> Result<SampledField, TransformError> {
    match req.engine {
        Engine::Direct => cft_direct(f, req),
        Engine::Fast => cft_fast(f, req),
    }
}

/// Inverse of the transform described by `req` (same side and engine,
/// kernel sign flipped).
pub fn cft_inverse(f: &SampledField, req: &TransformRequest) -> Result<SampledField, TransformError> {
    let mut flipped = req.clone();
    flipped.direction = req.direction.flipped();
    transform(f, &flipped)
}

/// Riemann sum of the kernel against `f` at a single frequency `y`, with
/// an optional extra node factor `e^{τ (x, y')}`. Returns real and
/// imaginary coefficient vectors (the latter for complex fields).
pub(crate) fn quadrature_at(
    f: &SampledField,
    y: &[f64],
    sign: KernelSign,
    side: Side,
    damping: Option<(&[f64], f64)>,
) -> Result<(Vec<f64>, Option<Vec<f64>>), KernelError> {
    let spec = f.spec();
    let grid = f.grid();
    let n = spec.n();
    if y.len() != n {
        return Err(KernelError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let axes: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|k| {
            (0..grid.dims()[k])
                .map(|a| {
                    let (s, c) = (grid.coord(k, a) * y[k]).sin_cos();
                    (c, s)
                })
                .collect()
        })
        .collect();
    let exponents: Option<Vec<Vec<f64>>> = damping.map(|(yp, tau)| {
        (0..n)
            .map(|k| {
                (0..grid.dims()[k])
                    .map(|a| tau * grid.coord(k, a) * yp[k])
                    .collect()
            })
            .collect()
    });

    let basis = SubalgebraBasis::new(spec);
    let table = spec.sign_table();
    let count = spec.blade_count();
    let left = side == Side::Left;
    let w = grid.measure_weight();
    let mut re = vec![0.0; count];
    let mut im = f.is_complex().then(|| vec![0.0; count]);
    let mut coeffs = vec![0.0; 1 << n];
    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    let mut idx = vec![0usize; n];
    for j in 0..f.len() {
        let mut scale = w;
        if let Some(ex) = &exponents {
            let e: f64 = (0..n).map(|k| ex[k][idx[k]]).sum();
            if e.abs() > crate::kernel::MAX_EXPONENT {
                return Err(KernelError::ExponentRange(e));
            }
            scale *= e.exp();
        }
        for k in 0..n {
            (cos[k], sin[k]) = axes[k][idx[k]];
        }
        basis.kernel_coeffs(&cos, &sin, sign.value(), &mut coeffs);
        basis.apply(table, &coeffs, f.re(j), left, scale, &mut re);
        if let (Some(acc), Some(src)) = (im.as_mut(), f.im(j)) {
            basis.apply(table, &coeffs, src, left, scale, acc);
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < grid.dims()[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok((re, im))
}

/// Direct quadrature on an arbitrary output grid; the oracle for
/// [`cft_fast`].
pub fn cft_direct(f: &SampledField, req: &TransformRequest) -> Result<SampledField, TransformError> {
    if req.engine != Engine::Direct {
        return Err(TransformError::EngineMismatch { requested: req.engine });
    }
    let out_grid = req.output_for(f.grid());
    let mut out = SampledField::zeros(out_grid.clone(), f.spec(), f.is_complex())?;
    let count = f.spec().blade_count();
    let stride = out.stride();
    let sign = req.direction.sign();
    out.data_mut()
        .par_chunks_mut(stride)
        .enumerate()
        .try_for_each(|(j, node)| -> Result<(), KernelError> {
            let y = out_grid.point(j);
            let (re, im) = quadrature_at(f, &y, sign, req.side, None)?;
            node[..count].copy_from_slice(&re);
            if let Some(im) = im {
                node[count..].copy_from_slice(&im);
            }
            Ok(())
        })?;
    Ok(out)
}

/// Per-axis FFT plans for one grid shape.
struct Plans {
    dims: Vec<usize>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
}

impl Plans {
    fn new(dims: &[usize], direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        let ffts = dims.iter().map(|&d| planner.plan_fft(d, direction)).collect();
        Self {
            dims: dims.to_vec(),
            ffts,
        }
    }

    /// In-place unnormalized multidimensional DFT of a row-major array.
    fn run(&self, data: &mut [Complex64]) {
        let total = data.len();
        let mut inner = total;
        for (axis, fft) in self.ffts.iter().enumerate() {
            let len = self.dims[axis];
            inner /= len;
            if inner == 1 {
                fft.process(data);
                continue;
            }
            let mut line = vec![Complex64::new(0.0, 0.0); len];
            let block = len * inner;
            for outer in 0..total / block {
                let base = outer * block;
                for offset in 0..inner {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + offset + i * inner];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + offset + i * inner] = *v;
                    }
                }
            }
        }
    }
}

/// Classical transform of every coefficient channel, evaluable at any
/// lattice frequency `origin' + m ∘ Δ` with integer `m`.
struct Spectrum {
    channels: Vec<Vec<Complex64>>,
    input: GridSpec,
    output: GridSpec,
    sign: f64,
}

impl Spectrum {
    /// `(F f)` with kernel `e^{-iσ x·y}` for every channel of `f`
    /// (complex fields give complex channels).
    fn new(f: &SampledField, sign: KernelSign, output: &GridSpec) -> Result<Self, TransformError> {
        let input = f.grid().clone();
        check_dual(&input, output)?;
        let n = input.n();
        let sigma = sign.value();
        let direction = if sigma > 0.0 {
            FftDirection::Forward
        } else {
            FftDirection::Inverse
        };
        let plans = Plans::new(input.dims(), direction);
        // Pre-modulation e^{-iσ Σ_k j_k h_k o'_k}, separable per axis.
        let premod: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                (0..input.dims()[k])
                    .map(|j| {
                        let phase = -sigma * j as f64 * input.spacing()[k] * output.origin()[k];
                        Complex64::from_polar(1.0, phase)
                    })
                    .collect()
            })
            .collect();
        let node_phase: Vec<Complex64> = (0..f.len())
            .map(|j| {
                input
                    .multi_index(j)
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (k, &i)| acc * premod[k][i])
            })
            .collect();
        let count = f.spec().blade_count();
        let channels = (0..count)
            .into_par_iter()
            .map(|c| {
                let mut data: Vec<Complex64> = (0..f.len())
                    .map(|j| {
                        let re = f.re(j)[c];
                        let im = f.im(j).map_or(0.0, |v| v[c]);
                        Complex64::new(re, im) * node_phase[j]
                    })
                    .collect();
                plans.run(&mut data);
                data
            })
            .collect();
        Ok(Self {
            channels,
            input,
            output: output.clone(),
            sign: sigma,
        })
    }

    /// Writes `(F f)(y)` for `y = origin' + m ∘ Δ` into `out` (one complex
    /// value per channel).
    fn eval(&self, m: &[i64], out: &mut [Complex64]) {
        let n = self.input.n();
        let mut flat = 0usize;
        let mut dot = 0.0;
        for (k, &mk) in m.iter().enumerate().take(n) {
            let len = self.input.dims()[k] as i64;
            flat = flat * len as usize + mk.rem_euclid(len) as usize;
            let y = self.output.origin()[k] + mk as f64 * self.output.spacing()[k];
            dot += self.input.origin()[k] * y;
        }
        let factor = Complex64::from_polar(self.input.measure_weight(), -self.sign * dot);
        for (slot, channel) in out.iter_mut().zip(&self.channels) {
            *slot = factor * channel[flat];
        }
    }
}

fn check_dual(input: &GridSpec, output: &GridSpec) -> Result<(), TransformError> {
    if input.dims() != output.dims() {
        return Err(TransformError::Field(FieldError::GridMismatch));
    }
    for k in 0..input.n() {
        let expected = 2.0 * PI / (input.dims()[k] as f64 * input.spacing()[k]);
        let found = output.spacing()[k];
        if (expected - found).abs() > 1e-12 * expected {
            return Err(TransformError::NotDualGrid {
                axis: k,
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// Classical channel-wise transform `∫ e^{-iσ x·y} f(x) dm(x)` on the dual
/// grid (or `output`); always returns a complex field.
pub fn classical_ft_with(
    f: &SampledField,
    sign: KernelSign,
    output: Option<&GridSpec>,
) -> Result<SampledField, TransformError> {
    let out_grid = output.cloned().unwrap_or_else(|| f.grid().frequency_grid());
    let spectrum = Spectrum::new(f, sign, &out_grid)?;
    let count = f.spec().blade_count();
    let mut out = SampledField::zeros(out_grid.clone(), f.spec(), true)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); count];
    for j in 0..out.len() {
        let m: Vec<i64> = out_grid.multi_index(j).iter().map(|&i| i as i64).collect();
        spectrum.eval(&m, &mut buf);
        for (c, v) in buf.iter().enumerate() {
            out.re_mut(j)[c] = v.re;
            out.im_mut(j).expect("complex")[c] = v.im;
        }
    }
    Ok(out)
}

/// Forward classical transform `(F f)(y) = ∫ e^{-ix·y} f(x) dm(x)`.
pub fn classical_ft(f: &SampledField) -> Result<SampledField, TransformError> {
    classical_ft_with(f, KernelSign::Forward, None)
}

/// Result of the fast engine together with its imaginary residue
/// `‖Im‖ / ‖Re‖` (root-sum-square over all nodes).
#[derive(Debug, Clone)]
pub struct FastOutput {
    pub field: SampledField,
    pub residue: f64,
}

/// FFT-based transform; see the module documentation for grid
/// requirements.
pub fn cft_fast(f: &SampledField, req: &TransformRequest) -> Result<SampledField, TransformError> {
    if req.engine != Engine::Fast {
        return Err(TransformError::EngineMismatch { requested: req.engine });
    }
    if f.is_complex() {
        let re = cft_fast_detailed(&f.real_part(), req)?;
        let im = cft_fast_detailed(&f.imag_part(), req)?;
        return Ok(SampledField::from_parts(&re.field, &im.field)?);
    }
    let out = cft_fast_detailed(f, req)?;
    if out.residue > RESIDUE_LIMIT {
        return Err(TransformError::Residue(out.residue));
    }
    Ok(out.field)
}

/// Fast engine for a real field, reporting the residue instead of
/// rejecting it.
pub fn cft_fast_detailed(f: &SampledField, req: &TransformRequest) -> Result<FastOutput, TransformError> {
    if f.is_complex() {
        return Err(TransformError::ComplexInput);
    }
    let spec = f.spec();
    let n = spec.n();
    let out_grid = req.output_for(f.grid());
    let spectrum = Spectrum::new(f, req.direction.sign(), &out_grid)?;
    // Reflection y_k -> -y_k maps index m_k to r_k - m_k.
    let mirror: Vec<i64> = (0..n)
        .map(|k| {
            integer_ratio(-2.0 * out_grid.origin()[k], out_grid.spacing()[k]).ok_or(
                TransformError::OffLattice {
                    axis: k,
                    what: "output grid reflection",
                },
            )
        })
        .collect::<Result<_, _>>()?;

    let basis = SubalgebraBasis::new(spec);
    let table = spec.sign_table();
    let count = spec.blade_count();
    let subsets = 1usize << n;
    let patterns: Vec<SignPattern> = SignPattern::all(n).collect();
    // M^s = 2^{-n} Σ_S i^{|S|} Π_{k∈S} s_k B_S: real factor per (s, S).
    let idem: Vec<Vec<f64>> = patterns
        .iter()
        .map(|s| {
            (0..subsets)
                .map(|subset| {
                    let sign: f64 = (0..n)
                        .filter(|k| subset >> k & 1 == 1)
                        .map(|k| s.get(k))
                        .product();
                    sign / subsets as f64
                })
                .collect()
        })
        .collect();
    let left = req.side == Side::Left;

    let mut out = SampledField::zeros(out_grid.clone(), spec, false)?;
    let residues: Vec<(f64, f64)> = out
        .data_mut()
        .par_chunks_mut(count)
        .enumerate()
        .map(|(j, node)| {
            let m: Vec<i64> = out_grid.multi_index(j).iter().map(|&i| i as i64).collect();
            // G_S = Σ_s idem[s][S] · (F f)(R_s y), complex per channel.
            let mut g = vec![Complex64::new(0.0, 0.0); subsets * count];
            let mut value = vec![Complex64::new(0.0, 0.0); count];
            let mut reflected = vec![0i64; n];
            for (si, s) in patterns.iter().enumerate() {
                for k in 0..n {
                    reflected[k] = if s.get(k) > 0.0 { mirror[k] - m[k] } else { m[k] };
                }
                spectrum.eval(&reflected, &mut value);
                for subset in 0..subsets {
                    let c = idem[si][subset];
                    let row = &mut g[subset * count..(subset + 1) * count];
                    for (acc, v) in row.iter_mut().zip(&value) {
                        *acc += c * v;
                    }
                }
            }
            // Σ_S i^{|S|} B_S G_S (left) or G_S B_S (right).
            let mut re = vec![0.0; count];
            let mut im = vec![0.0; count];
            let mut unit = vec![0.0; subsets];
            let mut g_re = vec![0.0; count];
            let mut g_im = vec![0.0; count];
            for subset in 0..subsets {
                let row = &g[subset * count..(subset + 1) * count];
                for (c, v) in row.iter().enumerate() {
                    g_re[c] = v.re;
                    g_im[c] = v.im;
                }
                unit.iter_mut().for_each(|u| *u = 0.0);
                unit[subset] = basis.signs[subset];
                // i^{|S|} = (p_re + i p_im).
                let (p_re, p_im) = match subset.count_ones() % 4 {
                    0 => (1.0, 0.0),
                    1 => (0.0, 1.0),
                    2 => (-1.0, 0.0),
                    _ => (0.0, -1.0),
                };
                let unit_coeffs = &unit;
                if p_re != 0.0 {
                    basis.apply(table, unit_coeffs, &g_re, left, p_re, &mut re);
                    basis.apply(table, unit_coeffs, &g_im, left, p_re, &mut im);
                } else {
                    basis.apply(table, unit_coeffs, &g_im, left, -p_im, &mut re);
                    basis.apply(table, unit_coeffs, &g_re, left, p_im, &mut im);
                }
            }
            node.copy_from_slice(&re);
            let re2: f64 = re.iter().map(|v| v * v).sum();
            let im2: f64 = im.iter().map(|v| v * v).sum();
            (re2, im2)
        })
        .collect();
    let (re2, im2) = residues
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let residue = if im2 == 0.0 { 0.0 } else { (im2 / re2.max(f64::MIN_POSITIVE)).sqrt() };
    Ok(FastOutput { field: out, residue })
}

/// `(τ_u f)(x) = f(x - u)`; `u` must be a whole number of grid steps.
pub fn translate(f: &SampledField, u: &[f64]) -> Result<SampledField, TransformError> {
    let grid = f.grid();
    check_axes(f, u.len())?;
    let shifts: Vec<i64> = (0..grid.n())
        .map(|k| {
            integer_ratio(u[k], grid.spacing()[k]).ok_or(TransformError::OffLattice {
                axis: k,
                what: "translation",
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(remap(f, |idx, k| idx - shifts[k]))
}

/// Copies node `source(j)` into node `j` with periodic index wrap.
fn remap(f: &SampledField, source: impl Fn(i64, usize) -> i64) -> SampledField {
    let grid = f.grid();
    let stride = f.stride();
    let mut out = f.clone();
    let data = f.data();
    for j in 0..f.len() {
        let idx = grid.multi_index(j);
        let src: Vec<usize> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| source(i as i64, k).rem_euclid(grid.dims()[k] as i64) as usize)
            .collect();
        let s = grid.flat_index(&src);
        out.data_mut()[j * stride..(j + 1) * stride].copy_from_slice(&data[s * stride..(s + 1) * stride]);
    }
    out
}

fn check_axes(f: &SampledField, len: usize) -> Result<(), TransformError> {
    if len != f.spec().n() {
        return Err(KernelError::DimensionMismatch {
            expected: f.spec().n(),
            got: len,
        }
        .into());
    }
    Ok(())
}

/// `e^{I(x,u)} f(x)` (left) or `f(x) e^{I(x,u)}` (right).
pub fn modulate(f: &SampledField, u: &[f64], side: Side) -> Result<SampledField, TransformError> {
    check_axes(f, u.len())?;
    let spec = f.spec();
    let mut out = f.clone();
    for j in 0..f.len() {
        let x = f.grid().point(j);
        let k = eval_kernel(spec, &x, u, KernelSign::Inverse)?;
        let apply = |v: &[f64]| -> Multivector {
            let v = Multivector::from_slice_unchecked(spec, v);
            match side {
                Side::Left => &k * &v,
                Side::Right => &v * &k,
            }
        };
        let re = apply(f.re(j));
        out.re_mut(j).copy_from_slice(re.coeffs());
        if let Some(im) = f.im(j) {
            let im = apply(im);
            out.im_mut(j).expect("complex").copy_from_slice(im.coeffs());
        }
    }
    Ok(out)
}

/// `h(x) = f(x / λ)`, realized exactly by keeping the samples and scaling
/// the grid by `λ`.
pub fn dilate(f: &SampledField, lambda: f64) -> Result<SampledField, TransformError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TransformError::InvalidDilation(lambda));
    }
    Ok(f.with_grid(f.grid().scaled(lambda)?)?)
}

/// `h(x) = f†(-x)`; the grid must be mirror-symmetric up to whole steps.
pub fn reverse_flip(f: &SampledField) -> Result<SampledField, TransformError> {
    let grid = f.grid();
    let mirror: Vec<i64> = (0..grid.n())
        .map(|k| {
            integer_ratio(-2.0 * grid.origin()[k], grid.spacing()[k]).ok_or(TransformError::OffLattice {
                axis: k,
                what: "reflection",
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(remap(f, |idx, k| mirror[k] - idx).reversion())
}

/// `(f * g)(y) = ∫ f(y - x) g(x) dm(x)` with periodic wraparound; the grid
/// origin must be a whole number of steps so that `y - x` is a node.
pub fn convolve(f: &SampledField, g: &SampledField) -> Result<SampledField, TransformError> {
    f.ensure_compatible(g)?;
    let grid = f.grid().clone();
    let spec = f.spec();
    let n = grid.n();
    let offsets: Vec<i64> = (0..n)
        .map(|k| {
            grid.origin_steps(k).ok_or(TransformError::OffLattice {
                axis: k,
                what: "grid origin",
            })
        })
        .collect::<Result<_, _>>()?;
    let count = spec.blade_count();
    let total = grid.len();
    let forward = Plans::new(grid.dims(), FftDirection::Forward);
    let backward = Plans::new(grid.dims(), FftDirection::Inverse);
    let channel_fft = |field: &SampledField| -> Vec<Vec<Complex64>> {
        (0..count)
            .into_par_iter()
            .map(|c| {
                let mut data: Vec<Complex64> = (0..total)
                    .map(|j| Complex64::new(field.re(j)[c], field.im(j).map_or(0.0, |v| v[c])))
                    .collect();
                forward.run(&mut data);
                data
            })
            .collect()
    };
    let fh = channel_fft(f);
    let gh = channel_fft(g);
    let table = spec.sign_table();
    let products: Vec<Vec<Complex64>> = (0..count)
        .into_par_iter()
        .map(|target| {
            let mut acc = vec![Complex64::new(0.0, 0.0); total];
            for a in 0..count {
                let b = a ^ target;
                let sign = f64::from(table[a * count + b]);
                for ((slot, x), y) in acc.iter_mut().zip(&fh[a]).zip(&gh[b]) {
                    *slot += sign * x * y;
                }
            }
            backward.run(&mut acc);
            acc
        })
        .collect();
    // y_i - x_j = (i - j) h is node i - j - o/h, so output node i reads the
    // circular convolution at index i - o/h.
    let complex = f.is_complex() || g.is_complex();
    let mut out = SampledField::zeros(grid.clone(), spec, complex)?;
    let scale = grid.measure_weight() / total as f64;
    for j in 0..total {
        let idx = grid.multi_index(j);
        let src: Vec<usize> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| (i as i64 - offsets[k]).rem_euclid(grid.dims()[k] as i64) as usize)
            .collect();
        let s = grid.flat_index(&src);
        for c in 0..count {
            let v = products[c][s] * scale;
            out.re_mut(j)[c] = v.re;
            if let Some(im) = out.im_mut(j) {
                im[c] = v.im;
            }
        }
    }
    Ok(out)
}

/// Periodic central difference `(f(x + h e_k) - f(x - h e_k)) / 2h` along
/// axis `k` (0-based).
pub fn partial_derivative(f: &SampledField, k: usize) -> Result<SampledField, TransformError> {
    let grid = f.grid();
    let n = grid.n();
    if k >= n {
        return Err(TransformError::AxisOutOfRange { axis: k, n });
    }
    let plus = remap(f, |i, axis| if axis == k { i + 1 } else { i });
    let minus = remap(f, |i, axis| if axis == k { i - 1 } else { i });
    Ok(plus.sub(&minus)?.scale(0.5 / grid.spacing()[k]))
}

/// Multiplies node values by `c(x)` on the given side, where `c` maps the
/// node coordinates to a multivector.
pub fn multiply_pointwise<F>(f: &SampledField, side: Side, c: F) -> Result<SampledField, TransformError>
where
    F: Fn(&[f64]) -> Multivector,
{
    let spec = f.spec();
    let mut out = f.clone();
    for j in 0..f.len() {
        let a = c(&f.grid().point(j));
        spec.ensure_same(&a.spec())?;
        let apply = |v: &[f64]| -> Multivector {
            let v = Multivector::from_slice_unchecked(spec, v);
            match side {
                Side::Left => &a * &v,
                Side::Right => &v * &a,
            }
        };
        let re = apply(f.re(j));
        out.re_mut(j).copy_from_slice(re.coeffs());
        if let Some(im) = f.im(j) {
            let im = apply(im);
            out.im_mut(j).expect("complex").copy_from_slice(im.coeffs());
        }
    }
    Ok(out)
}

/// Relative L∞ distance `max |a - b| / max |b|` (absolute when `b = 0`).
pub fn rel_linf(a: &SampledField, b: &SampledField) -> Result<f64, TransformError> {
    let diff = a.max_diff(b)?;
    let scale = b.max_norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraSpec;
    use crate::fieldio::{FieldGenerator, Profile};
    use crate::random::{random_field, random_smooth_field, rng_from_seed};

    fn g(n: usize) -> AlgebraSpec {
        AlgebraSpec::new(n).unwrap()
    }

    fn gaussian(spec: AlgebraSpec, grid: &GridSpec) -> SampledField {
        let gen = FieldGenerator::new(
            Profile::Gaussian {
                center: vec![0.0; spec.n()],
                width: 1.0,
            },
            Multivector::one(spec),
        )
        .unwrap();
        crate::fieldio::sample(&gen, grid, spec).unwrap()
    }

    fn direct(side: Side) -> TransformRequest {
        TransformRequest::forward(side).with_engine(Engine::Direct)
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let spec = g(2);
        let grid = GridSpec::centered(vec![8, 8], vec![0.5, 0.5]).unwrap();
        let f = SampledField::zeros(grid, spec, false).unwrap();
        for req in [direct(Side::Left), TransformRequest::forward(Side::Right)] {
            assert_eq!(transform(&f, &req).unwrap().max_norm(), 0.0);
        }
    }

    #[test]
    fn gaussian_value_at_zero_frequency() {
        let spec = g(1);
        let grid = GridSpec::from_extent(vec![256], &[-8.0], &[8.0]).unwrap();
        let f = gaussian(spec, &grid);
        let out = cft_direct(&f, &direct(Side::Left)).unwrap();
        let zero = out.grid().flat_index(&[128]);
        assert_eq!(out.grid().point(zero), vec![0.0]);
        assert!((out.value(zero).scalar_part() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_is_fixed_by_both_engines() {
        let spec = g(1);
        let grid = GridSpec::from_extent(vec![256], &[-8.0], &[8.0]).unwrap();
        let f = gaussian(spec, &grid);
        for engine in [Engine::Direct, Engine::Fast] {
            let out = transform(&f, &TransformRequest::forward(Side::Left).with_engine(engine)).unwrap();
            for j in 0..out.len() {
                let y = out.grid().point(j)[0];
                if y.abs() <= 4.0 {
                    let expected = Multivector::scalar(spec, (-y * y / 2.0).exp());
                    assert!(out.value(j).max_abs_diff(&expected) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn fast_matches_direct_on_random_fields() {
        let mut rng = rng_from_seed(11);
        for (n, dims) in [(1, 16), (2, 8)] {
            let spec = g(n);
            let grid = GridSpec::new(vec![dims; n], vec![-1.3; n], vec![0.3; n]).unwrap();
            let f = random_field(&grid, spec, &mut rng).unwrap();
            for side in [Side::Left, Side::Right] {
                for dir in [Direction::Forward, Direction::Inverse] {
                    let fast = TransformRequest::new(side, dir, Engine::Fast);
                    let slow = TransformRequest::new(side, dir, Engine::Direct);
                    let a = transform(&f, &fast).unwrap();
                    let b = transform(&f, &slow).unwrap();
                    assert!(rel_linf(&a, &b).unwrap() < 1e-10);
                    let detail = cft_fast_detailed(&f, &fast).unwrap();
                    assert!(detail.residue < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fast_engine_accepts_shifted_dual_grid() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![16], vec![0.25]).unwrap();
        let f = random_field(&grid, spec, &mut rng_from_seed(2)).unwrap();
        let freq = grid.frequency_grid();
        let shifted = GridSpec::new(
            vec![16],
            vec![freq.origin()[0] + 0.5 * freq.spacing()[0]],
            freq.spacing().to_vec(),
        )
        .unwrap();
        let a = transform(&f, &TransformRequest::forward(Side::Left).with_output_grid(shifted.clone())).unwrap();
        let b = transform(&f, &direct(Side::Left).with_output_grid(shifted)).unwrap();
        assert!(rel_linf(&a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn fast_engine_rejects_non_dual_grid() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![16], vec![0.25]).unwrap();
        let f = SampledField::zeros(grid.clone(), spec, false).unwrap();
        let req = TransformRequest::forward(Side::Left).with_output_grid(grid);
        assert!(matches!(transform(&f, &req), Err(TransformError::NotDualGrid { .. })));
    }

    #[test]
    fn scalar_field_reduces_to_classical_transform() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![32], vec![0.3]).unwrap();
        let mut rng = rng_from_seed(5);
        let f = SampledField::from_fn(grid, spec, |_| {
            Multivector::scalar(spec, rand::Rng::random_range(&mut rng, -1.0..1.0))
        })
        .unwrap();
        let fo = transform(&f, &TransformRequest::forward(Side::Left)).unwrap();
        let ff = classical_ft(&f).unwrap();
        let b1 = spec.bivector(0).unwrap().index();
        for j in 0..fo.len() {
            assert!((fo.re(j)[0] - ff.re(j)[0]).abs() < 1e-12);
            assert!((fo.re(j)[b1] - ff.im(j).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_restores_field() {
        let spec = g(2);
        let grid = GridSpec::centered(vec![16, 16], vec![0.5, 0.5]).unwrap();
        let f = random_smooth_field(&grid, spec, &mut rng_from_seed(8)).unwrap();
        for side in [Side::Left, Side::Right] {
            let fwd = TransformRequest::forward(side);
            let spectrum = transform(&f, &fwd).unwrap();
            let back = cft_inverse(&spectrum, &fwd.clone().with_output_grid(grid.clone())).unwrap();
            assert!(rel_linf(&back, &f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn complex_fields_transform_linearly() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![8], vec![0.5]).unwrap();
        let mut rng = rng_from_seed(3);
        let a = random_field(&grid, spec, &mut rng).unwrap();
        let b = random_field(&grid, spec, &mut rng).unwrap();
        let z = SampledField::from_parts(&a, &b).unwrap();
        for engine in [Engine::Direct, Engine::Fast] {
            let req = TransformRequest::forward(Side::Right).with_engine(engine);
            let tz = transform(&z, &req).unwrap();
            assert!(tz.real_part().max_diff(&transform(&a, &req).unwrap()).unwrap() < 1e-12);
            assert!(tz.imag_part().max_diff(&transform(&b, &req).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn grid_operator_identities() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![16], vec![0.5]).unwrap();
        let f = random_field(&grid, spec, &mut rng_from_seed(4)).unwrap();
        assert_eq!(translate(&f, &[0.0]).unwrap(), f);
        assert_eq!(dilate(&f, 1.0).unwrap(), f);
        assert!(matches!(dilate(&f, 0.0), Err(TransformError::InvalidDilation(_))));
        assert!(matches!(dilate(&f, -2.0), Err(TransformError::InvalidDilation(_))));
        assert!(translate(&f, &[0.3]).is_err());
        let shifted = translate(&f, &[1.0]).unwrap();
        assert_eq!(shifted.re(2), f.re(0));
        let flipped = reverse_flip(&reverse_flip(&f).unwrap()).unwrap();
        assert_eq!(flipped, f);
        assert!(partial_derivative(&f, 1).is_err());
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let spec = g(2);
        let grid = GridSpec::centered(vec![8, 8], vec![0.5, 0.5]).unwrap();
        let c = Multivector::from_coeffs(spec, (0..16).map(|i| i as f64).collect()).unwrap();
        let f = SampledField::from_fn(grid, spec, |_| c.clone()).unwrap();
        assert_eq!(partial_derivative(&f, 1).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn convolution_with_discrete_delta() {
        let spec = g(2);
        let grid = GridSpec::centered(vec![8, 8], vec![0.5, 0.25]).unwrap();
        let f = random_field(&grid, spec, &mut rng_from_seed(6)).unwrap();
        let mass = (2.0 * PI) / grid.cell_volume();
        let zero = grid.flat_index(&[4, 4]);
        let delta = SampledField::from_fn(grid.clone(), spec, |_| Multivector::zero(spec))
            .map(|mut d| {
                d.set_value(zero, &Multivector::scalar(spec, mass)).unwrap();
                d
            })
            .unwrap();
        assert!(convolve(&f, &delta).unwrap().max_diff(&f).unwrap() < 1e-12);
        assert!(convolve(&delta, &f).unwrap().max_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![8], vec![0.5]).unwrap();
        let mut rng = rng_from_seed(9);
        let f = random_field(&grid, spec, &mut rng).unwrap();
        let h = random_field(&grid, spec, &mut rng).unwrap();
        let fast = convolve(&f, &h).unwrap();
        let w = grid.measure_weight();
        for i in 0..8i64 {
            let mut acc = Multivector::zero(spec);
            for j in 0..8i64 {
                // y - x = (i - j) h, node index i - j + 4.
                let src = (i - j + 4).rem_euclid(8) as usize;
                acc += &(&f.value(src) * &h.value(j as usize)).scale(w);
            }
            assert!(fast.value(i as usize).max_abs_diff(&acc) < 1e-12);
        }
    }
}
