//! Extensions of sampled densities to `R^{2n}` through the extended
//! kernels, finite-difference Dirac checks, Cauchy boundary integrals and
//! the Paley–Wiener verification harness.
//!
//! A point of `R^{2n}` is written `ŷ = y + y'` with `y` along `e_i` and `y'`
//! along `e'_i`. The four extensions of a density `F` are
//!
//! | variant    | value at `ŷ`                              | monogenic |
//! |------------|-------------------------------------------|-----------|
//! | `F1Left`   | `∫ e^{(x,y')} e^{-I(x,y)} F(x) dm(x)`     | left      |
//! | `F1Right`  | `∫ F(x) e^{(x,y')} e^{-I(x,y)} dm(x)`     | for `F` in the `B_i` subalgebra |
//! | `F2Left`   | `∫ e^{-(x,y')} e^{-I(x,y)} F(x) dm(x)`    | for `F` in the `B_i` subalgebra |
//! | `F2Right`  | `∫ F(x) e^{-(x,y')} e^{-I(x,y)} dm(x)`    | right     |
//!
//! `F1*` use the left Dirac operator `e_i ∂/∂y_i + e'_i ∂/∂y'_i`, `F2*`
//! the right one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraSpec, Multivector};
use crate::fieldio::{FieldError, GridSpec, SampledField};
use crate::kernel::{ExtendedPoint, KernelError, KernelSign, MAX_EXPONENT};
use crate::transform::{cft_fast, quadrature_at, Direction, Engine, Side, TransformError, TransformRequest};

/// Boundary-node magnitude (relative to the maximum) above which an
/// extension integrand is treated as not decaying on the grid.
pub const DECAY_THRESHOLD: f64 = 1e-10;
/// Smallest finite-difference step accepted by [`dirac_residual`].
pub const MIN_STEP: f64 = 1e-6;
/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Largest fraction of `|F|²` allowed outside the support region.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MonogenicError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("divergent extension: boundary integrand is {ratio:e} of its maximum")]
    Divergent { ratio: f64 },
    #[error("finite-difference step {0} is below the cancellation guard {MIN_STEP}")]
    StepTooSmall(f64),
    #[error("axis {axis} out of range for n = {n}")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("degenerate rectangle")]
    DegenerateRectangle,
    #[error("density carries {fraction:e} of its mass outside the support region")]
    SupportViolated { fraction: f64 },
    #[error("slice {0:?} is not admissible for this case")]
    InvalidSlice(Vec<f64>),
    #[error("extensions take real-valued densities")]
    ComplexSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionVariant {
    F1Left,
    F1Right,
    F2Left,
    F2Right,
}

impl ExtensionVariant {
    pub const ALL: [ExtensionVariant; 4] = [
        ExtensionVariant::F1Left,
        ExtensionVariant::F1Right,
        ExtensionVariant::F2Left,
        ExtensionVariant::F2Right,
    ];

    /// Sign `τ` of the exponential weight `e^{τ (x, y')}`.
    pub fn weight_sign(self) -> f64 {
        match self {
            ExtensionVariant::F1Left | ExtensionVariant::F1Right => 1.0,
            ExtensionVariant::F2Left | ExtensionVariant::F2Right => -1.0,
        }
    }

    /// Side on which the kernel multiplies the density.
    pub fn kernel_side(self) -> Side {
        match self {
            ExtensionVariant::F1Left | ExtensionVariant::F2Left => Side::Left,
            ExtensionVariant::F1Right | ExtensionVariant::F2Right => Side::Right,
        }
    }

    /// Side of the Dirac operator that annihilates the kernel family.
    pub fn operator_side(self) -> Side {
        match self {
            ExtensionVariant::F1Left | ExtensionVariant::F1Right => Side::Left,
            ExtensionVariant::F2Left | ExtensionVariant::F2Right => Side::Right,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtensionVariant::F1Left => "f1-left",
            ExtensionVariant::F1Right => "f1-right",
            ExtensionVariant::F2Left => "f2-left",
            ExtensionVariant::F2Right => "f2-right",
        }
    }
}

/// A density together with the extension applied to it.
#[derive(Debug, Clone)]
pub struct ExtensionSpec {
    pub variant: ExtensionVariant,
    pub source: SampledField,
}

impl ExtensionSpec {
    pub fn new(variant: ExtensionVariant, source: SampledField) -> Result<Self, MonogenicError> {
        if source.is_complex() {
            return Err(MonogenicError::ComplexSource);
        }
        Ok(Self { variant, source })
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.source.spec()
    }
}

fn check_point(spec: AlgebraSpec, p: &ExtendedPoint) -> Result<(), MonogenicError> {
    if p.n() != spec.n() {
        return Err(KernelError::DimensionMismatch {
            expected: spec.n(),
            got: p.n(),
        }
        .into());
    }
    Ok(())
}

/// Checks that `e^{τ(x,y')} |F(x)|` is negligible on the grid boundary.
fn check_decay(ext: &ExtensionSpec, y_prime: &[f64]) -> Result<(), MonogenicError> {
    let grid = ext.source.grid();
    let tau = ext.variant.weight_sign();
    let mut max_all = 0.0f64;
    let mut max_edge = 0.0f64;
    for j in 0..ext.source.len() {
        let norm = ext.source.node_norm(j);
        if norm == 0.0 {
            continue;
        }
        let x = grid.point(j);
        let e: f64 = tau * x.iter().zip(y_prime).map(|(a, b)| a * b).sum::<f64>();
        if e > MAX_EXPONENT {
            return Err(KernelError::ExponentRange(e).into());
        }
        let v = norm * e.exp();
        max_all = max_all.max(v);
        let on_edge = grid
            .multi_index(j)
            .iter()
            .zip(grid.dims())
            .any(|(&i, &d)| i == 0 || i + 1 == d);
        if on_edge {
            max_edge = max_edge.max(v);
        }
    }
    if max_all > 0.0 && max_edge > DECAY_THRESHOLD * max_all {
        return Err(MonogenicError::Divergent {
            ratio: max_edge / max_all,
        });
    }
    Ok(())
}

/// Value of the extension at `p`, by quadrature over the density grid.
pub fn extend(ext: &ExtensionSpec, p: &ExtendedPoint) -> Result<Multivector, MonogenicError> {
    let spec = ext.spec();
    check_point(spec, p)?;
    check_decay(ext, &p.y_prime)?;
    extend_unchecked(ext, p)
}

fn extend_unchecked(ext: &ExtensionSpec, p: &ExtendedPoint) -> Result<Multivector, MonogenicError> {
    let (re, _) = quadrature_at(
        &ext.source,
        &p.y,
        KernelSign::Forward,
        ext.variant.kernel_side(),
        Some((&p.y_prime, ext.variant.weight_sign())),
    )?;
    Ok(Multivector::from_vec_unchecked(ext.spec(), re))
}

/// [`extend`] at many points, evaluated in parallel; order is preserved.
pub fn extend_many(ext: &ExtensionSpec, points: &[ExtendedPoint]) -> Result<Vec<Multivector>, MonogenicError> {
    points.par_iter().map(|p| extend(ext, p)).collect()
}

/// The slice `f_{y'}(y)` on the density's frequency grid, computed with the
/// fast engine (identical to [`extend`] at those nodes).
pub fn slice(ext: &ExtensionSpec, y_prime: &[f64]) -> Result<SampledField, MonogenicError> {
    let spec = ext.spec();
    if y_prime.len() != spec.n() {
        return Err(KernelError::DimensionMismatch {
            expected: spec.n(),
            got: y_prime.len(),
        }
        .into());
    }
    check_decay(ext, y_prime)?;
    let weighted = exp_weighted(&ext.source, y_prime, ext.variant.weight_sign())?;
    let req = TransformRequest::new(ext.variant.kernel_side(), Direction::Forward, Engine::Fast);
    Ok(cft_fast(&weighted, &req)?)
}

/// Pointwise `e^{τ (x, y')} f(x)` with an overflow guard.
fn exp_weighted(f: &SampledField, y_prime: &[f64], tau: f64) -> Result<SampledField, MonogenicError> {
    let grid = f.grid();
    for j in 0..f.len() {
        let e: f64 = tau * grid.point(j).iter().zip(y_prime).map(|(a, b)| a * b).sum::<f64>();
        if e.abs() > MAX_EXPONENT {
            return Err(KernelError::ExponentRange(e).into());
        }
    }
    Ok(f.weighted(|x| (tau * x.iter().zip(y_prime).map(|(a, b)| a * b).sum::<f64>()).exp()))
}

/// Central-difference estimate of `∂_i g` at `p` for any function `g` on
/// `R^{2n}`: `e_i ∂g/∂y_i + e'_i ∂g/∂y'_i` (left) or
/// `∂g/∂y_i e_i + ∂g/∂y'_i e'_i` (right).
pub fn dirac_residual_of<G>(
    spec: AlgebraSpec,
    g: G,
    p: &ExtendedPoint,
    h: f64,
    axis: usize,
    side: Side,
) -> Result<Multivector, MonogenicError>
where
    G: Fn(&ExtendedPoint) -> Result<Multivector, MonogenicError>,
{
    check_point(spec, p)?;
    if !(h >= MIN_STEP && h.is_finite()) {
        return Err(MonogenicError::StepTooSmall(h));
    }
    let n = spec.n();
    if axis >= n {
        return Err(MonogenicError::AxisOutOfRange { axis, n });
    }
    let shifted = |dy: f64, dyp: f64| {
        let mut q = p.clone();
        q.y[axis] += dy;
        q.y_prime[axis] += dyp;
        q
    };
    let d_y = (g(&shifted(h, 0.0))? - g(&shifted(-h, 0.0))?).scale(0.5 / h);
    let d_yp = (g(&shifted(0.0, h))? - g(&shifted(0.0, -h))?).scale(0.5 / h);
    let e = Multivector::blade(spec, spec.e(axis)?, 1.0)?;
    let ep = Multivector::blade(spec, spec.e_prime(axis)?, 1.0)?;
    Ok(match side {
        Side::Left => &(&e * &d_y) + &(&ep * &d_yp),
        Side::Right => &(&d_y * &e) + &(&d_yp * &ep),
    })
}

/// Central-difference `∂_i` of the extension at `p` (0-based axis), with
/// the operator side matching the variant's kernel family.
pub fn dirac_residual(
    ext: &ExtensionSpec,
    p: &ExtendedPoint,
    h: f64,
    axis: usize,
) -> Result<Multivector, MonogenicError> {
    check_point(ext.spec(), p)?;
    // The four stencil points share the decay check of the centre up to
    // e^{h|x|}, well inside the threshold.
    check_decay(ext, &p.y_prime)?;
    dirac_residual_of(
        ext.spec(),
        |q| extend_unchecked(ext, q),
        p,
        h,
        axis,
        ext.variant.operator_side(),
    )
}

/// `max_i |∂_i f(p)|` over all axes.
pub fn dirac_residual_norm(ext: &ExtensionSpec, p: &ExtendedPoint, h: f64) -> Result<f64, MonogenicError> {
    (0..ext.spec().n()).try_fold(0.0f64, |acc, i| Ok(acc.max(dirac_residual(ext, p, h, i)?.norm())))
}

/// Rectangle `[y_lo, y_hi] × [yp_lo, yp_hi]` in the `(e_k, e'_k)` plane
/// through `base` (whose other coordinates are kept fixed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub axis: usize,
    pub base: ExtendedPoint,
    pub y: (f64, f64),
    pub y_prime: (f64, f64),
}

impl Rectangle {
    fn validate(&self, n: usize) -> Result<(), MonogenicError> {
        if self.axis >= n || self.base.n() != n {
            return Err(MonogenicError::AxisOutOfRange { axis: self.axis, n });
        }
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
        if !(ok(self.y) && ok(self.y_prime)) {
            return Err(MonogenicError::DegenerateRectangle);
        }
        Ok(())
    }

    fn at(&self, y: f64, yp: f64) -> ExtendedPoint {
        let mut p = self.base.clone();
        p.y[self.axis] = y;
        p.y_prime[self.axis] = yp;
        p
    }
}

/// Midpoint-rule boundary integral `∮ n g ds` (left) or `∮ g n ds` (right)
/// over the rectangle, with outward normals `±e_k`, `±e'_k` and
/// `points` nodes per edge.
pub fn cauchy_boundary_integral<G>(
    spec: AlgebraSpec,
    g: G,
    rect: &Rectangle,
    points: usize,
    side: Side,
) -> Result<Multivector, MonogenicError>
where
    G: Fn(&ExtendedPoint) -> Result<Multivector, MonogenicError> + Sync,
{
    rect.validate(spec.n())?;
    if points == 0 {
        return Err(MonogenicError::DegenerateRectangle);
    }
    let k = rect.axis;
    let e = Multivector::blade(spec, spec.e(k)?, 1.0)?;
    let ep = Multivector::blade(spec, spec.e_prime(k)?, 1.0)?;
    let (a, b) = rect.y;
    let (c, d) = rect.y_prime;
    let dy = (b - a) / points as f64;
    let dyp = (d - c) / points as f64;
    // Each edge: (normal, ds, node generator).
    let edge_sum = |along_y: bool, fixed: f64| -> Result<Multivector, MonogenicError> {
        let values: Vec<Multivector> = (0..points)
            .into_par_iter()
            .map(|j| {
                let t = j as f64 + 0.5;
                let p = if along_y {
                    rect.at(a + t * dy, fixed)
                } else {
                    rect.at(fixed, c + t * dyp)
                };
                g(&p)
            })
            .collect::<Result<_, _>>()?;
        let mut acc = Multivector::zero(spec);
        for v in &values {
            acc += v;
        }
        Ok(acc)
    };
    let bottom = edge_sum(true, c)?.scale(dy);
    let top = edge_sum(true, d)?.scale(dy);
    let left = edge_sum(false, a)?.scale(dyp);
    let right = edge_sum(false, b)?.scale(dyp);
    let across_yp = &top - &bottom;
    let across_y = &right - &left;
    Ok(match side {
        Side::Left => &(&ep * &across_yp) + &(&e * &across_y),
        Side::Right => &(&across_yp * &ep) + &(&across_y * &e),
    })
}

/// Norm of the boundary integral of the extension over `rect`.
pub fn cauchy_boundary_check(ext: &ExtensionSpec, rect: &Rectangle, points: usize) -> Result<f64, MonogenicError> {
    rect.validate(ext.spec().n())?;
    for yp in [rect.y_prime.0, rect.y_prime.1] {
        check_decay(ext, &rect.at(0.0, yp).y_prime)?;
    }
    let integral = cauchy_boundary_integral(
        ext.spec(),
        |q| extend_unchecked(ext, q),
        rect,
        points,
        ext.variant.operator_side(),
    )?;
    Ok(integral.norm())
}

/// Density recovered from the `F1Left` slice at `y'`:
/// `F(x) = e^{-(x,y')} (F_o^{-1} f_{y'})(x)`.
pub fn pw_recover(slice: &SampledField, y_prime: &[f64]) -> Result<SampledField, MonogenicError> {
    pw_recover_with(slice, y_prime, ExtensionVariant::F1Left, None)
}

/// Recovery for any variant, on `density_grid` (defaults to the dual of
/// the slice grid).
pub fn pw_recover_with(
    slice: &SampledField,
    y_prime: &[f64],
    variant: ExtensionVariant,
    density_grid: Option<&GridSpec>,
) -> Result<SampledField, MonogenicError> {
    if y_prime.len() != slice.spec().n() {
        return Err(KernelError::DimensionMismatch {
            expected: slice.spec().n(),
            got: y_prime.len(),
        }
        .into());
    }
    let grid = density_grid.cloned().unwrap_or_else(|| slice.grid().frequency_grid());
    let req = TransformRequest::new(variant.kernel_side(), Direction::Inverse, Engine::Fast).with_output_grid(grid);
    let weighted = cft_fast(slice, &req)?;
    exp_weighted(&weighted, y_prime, -variant.weight_sign())
}

/// Support region for the Paley–Wiener checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PwCase {
    /// Open orthant `(0, ∞)^n`; slices need `y' ∈ (-∞, 0)^n`.
    HalfSpace,
    /// Closed ball of the given radius about the origin.
    Ball { radius: f64 },
}

impl PwCase {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            PwCase::HalfSpace => x.iter().all(|&v| v > 0.0),
            PwCase::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12),
        }
    }
}

/// Fraction of `Σ |F|²` carried by nodes outside the region (0 for a zero
/// field).
pub fn outside_mass_fraction(f: &SampledField, case: &PwCase) -> f64 {
    let mut total = 0.0;
    let mut outside = 0.0;
    for j in 0..f.len() {
        let m = f.node_norm(j).powi(2);
        total += m;
        if !case.contains(&f.grid().point(j)) {
            outside += m;
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceNorm {
    pub y_prime: Vec<f64>,
    /// `∫ |f_{y'}(y)|² dm(y)`.
    pub norm_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PwReport {
    /// `max` of the slice norms `∫ |f_{y'}|² dm`.
    pub sup_slice_norm: f64,
    /// `‖F‖₂²`.
    pub density_norm: f64,
    /// Largest fraction of recovered `|F|²` outside the region.
    pub outside_support_mass: f64,
    pub growth_violations: usize,
    pub slice_norms: Vec<SliceNorm>,
    /// Largest `max |F_rec - F| / max |F|` over the slices.
    pub recovery_error: f64,
    /// Constant `C` of the pointwise growth bound (ball case).
    pub growth_constant: f64,
    /// Number of pointwise growth samples checked.
    pub growth_samples: usize,
}

/// Default pointwise growth sample: `ŷ = a·u + b·u'` with unit diagonals
/// `u = Σ e_i / √n`, `u' = Σ e'_i / √n` and `a, b` on ten equally spaced
/// values in `[-3.5, 3.5]`, so `|ŷ| ≤ 3.5·√2 < 5`.
pub fn growth_sample(n: usize) -> Vec<ExtendedPoint> {
    let values: Vec<f64> = (0..10).map(|i| -3.5 + 7.0 * i as f64 / 9.0).collect();
    let unit = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(100);
    for &a in &values {
        for &b in &values {
            out.push(ExtendedPoint {
                y: vec![a * unit; n],
                y_prime: vec![b * unit; n],
            });
        }
    }
    out
}

/// Relative slack used when counting bound violations.
const BOUND_SLACK: f64 = 1e-9;

/// Paley–Wiener checks for the `F1Left` extension of `density`.
pub fn pw_verify(density: &SampledField, case: &PwCase, slices: &[Vec<f64>]) -> Result<PwReport, MonogenicError> {
    let n = density.spec().n();
    if density.is_complex() {
        return Err(MonogenicError::ComplexSource);
    }
    let fraction = outside_mass_fraction(density, case);
    if fraction > SUPPORT_TOLERANCE {
        return Err(MonogenicError::SupportViolated { fraction });
    }
    for yp in slices {
        let admissible = yp.len() == n
            && yp.iter().all(|v| v.is_finite())
            && match case {
                PwCase::HalfSpace => yp.iter().all(|&v| v < 0.0),
                PwCase::Ball { .. } => true,
            };
        if !admissible {
            return Err(MonogenicError::InvalidSlice(yp.clone()));
        }
    }
    let ext = ExtensionSpec::new(ExtensionVariant::F1Left, density.clone())?;
    let density_norm = density.l2_norm().powi(2);
    let max_density = density.max_norm();

    let mut slice_norms = Vec::with_capacity(slices.len());
    let mut outside_support_mass = 0.0f64;
    let mut recovery_error = 0.0f64;
    let mut growth_violations = 0;
    for yp in slices {
        let s = slice(&ext, yp)?;
        let norm_squared = s.l2_norm().powi(2);
        let bound = match case {
            PwCase::HalfSpace => density_norm,
            PwCase::Ball { radius } => {
                let r = yp.iter().map(|v| v * v).sum::<f64>().sqrt();
                (2.0 * radius * r).exp() * density_norm
            }
        };
        if norm_squared > bound * (1.0 + BOUND_SLACK) {
            growth_violations += 1;
        }
        let recovered = pw_recover_with(&s, yp, ExtensionVariant::F1Left, Some(density.grid()))?;
        outside_support_mass = outside_support_mass.max(outside_mass_fraction(&recovered, case));
        let err = recovered.max_diff(density)?;
        recovery_error = recovery_error.max(if max_density > 0.0 { err / max_density } else { err });
        slice_norms.push(SliceNorm {
            y_prime: yp.clone(),
            norm_squared,
        });
    }
    let sup_slice_norm = slice_norms.iter().map(|s| s.norm_squared).fold(0.0, f64::max);

    let mut growth_constant = 0.0;
    let mut growth_samples = 0;
    if let PwCase::Ball { radius } = case {
        // |K F| = |F| for the unit kernel, so Σ w e^{(x,y')} |F| bounds |f(ŷ)|.
        growth_constant = density.l1_norm();
        let points = growth_sample(n);
        let values = extend_many(&ext, &points)?;
        growth_samples = points.len();
        for (p, v) in points.iter().zip(&values) {
            let bound = growth_constant * (radius * p.norm()).exp();
            if v.norm() > bound * (1.0 + BOUND_SLACK) {
                growth_violations += 1;
            }
        }
    }
    Ok(PwReport {
        sup_slice_norm,
        density_norm,
        outside_support_mass,
        growth_violations,
        slice_norms,
        recovery_error,
        growth_constant,
        growth_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldio::{sample, FieldGenerator, Profile};
    use crate::kernel::eval_extended_kernel_v1;
    use crate::transform::cft_direct;
    use std::f64::consts::PI;

    fn g(n: usize) -> AlgebraSpec {
        AlgebraSpec::new(n).unwrap()
    }

    /// Box indicator of `[0, 1]` on a cell-centred grid whose cell edges
    /// include 0 and 1.
    fn unit_box() -> SampledField {
        let spec = g(1);
        let grid = GridSpec::cell_centered(vec![1024], &[-0.5], &[1.5]).unwrap();
        let gen = FieldGenerator::new(
            Profile::BoxIndicator {
                lower: vec![0.0],
                upper: vec![1.0],
            },
            Multivector::one(spec),
        )
        .unwrap();
        sample(&gen, &grid, spec).unwrap()
    }

    /// `(2π)^{-1/2} (e^{z} - 1) / z` with `z = y' - B y`, `B` as the
    /// imaginary unit, returned as `re + im·B₁`.
    fn box_closed_form(y: f64, yp: f64) -> Multivector {
        let spec = g(1);
        let (zr, zi) = (yp, -y);
        let mag = zr.exp();
        let (nr, ni) = (mag * zi.cos() - 1.0, mag * zi.sin());
        let d = zr * zr + zi * zi;
        let (qr, qi) = ((nr * zr + ni * zi) / d, (ni * zr - nr * zi) / d);
        let s = (2.0 * PI).powf(-0.5);
        let mut mv = Multivector::scalar(spec, s * qr);
        mv.coeffs_mut()[spec.bivector(0).unwrap().index()] = s * qi;
        mv
    }

    #[test]
    fn box_extension_matches_closed_form() {
        let ext = ExtensionSpec::new(ExtensionVariant::F1Left, unit_box()).unwrap();
        for (y, yp) in [(0.7, -1.0), (-2.0, -0.3), (3.0, 0.5), (0.2, -2.0)] {
            let p = ExtendedPoint::new(vec![y], vec![yp]).unwrap();
            let v = extend(&ext, &p).unwrap();
            assert!(v.max_abs_diff(&box_closed_form(y, yp)) < 1e-6, "{y} {yp}");
        }
    }

    #[test]
    fn extension_at_zero_offset_is_the_transform() {
        let ext = ExtensionSpec::new(ExtensionVariant::F2Right, unit_box()).unwrap();
        let out = cft_direct(
            &ext.source,
            &TransformRequest::new(Side::Right, Direction::Forward, Engine::Direct),
        )
        .unwrap();
        for j in [0, 100, 511, 700] {
            let y = out.grid().point(j);
            let p = ExtendedPoint::new(y, vec![0.0]).unwrap();
            assert!(extend(&ext, &p).unwrap().max_abs_diff(&out.value(j)) < 1e-12);
        }
    }

    #[test]
    fn non_decaying_integrand_is_rejected() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![64], vec![0.25]).unwrap();
        let f = SampledField::from_fn(grid, spec, |x| Multivector::scalar(spec, (-x[0] * x[0] / 2.0).exp())).unwrap();
        let ext = ExtensionSpec::new(ExtensionVariant::F1Left, f).unwrap();
        let p = ExtendedPoint::new(vec![0.0], vec![40.0]).unwrap();
        assert!(matches!(extend(&ext, &p), Err(MonogenicError::Divergent { .. })));
    }

    #[test]
    fn kernel_residual_is_second_order() {
        let spec = g(2);
        let x = [0.8, -1.3];
        let p = ExtendedPoint::new(vec![0.4, -0.9], vec![0.3, -0.2]).unwrap();
        let k = |q: &ExtendedPoint| Ok(eval_extended_kernel_v1(spec, &x, q, KernelSign::Forward)?);
        let r1 = dirac_residual_of(spec, k, &p, 1e-3, 0, Side::Left).unwrap().norm();
        let r2 = dirac_residual_of(spec, k, &p, 5e-4, 0, Side::Left).unwrap().norm();
        assert!(r1 < 1e-5);
        assert!((r1 / r2 - 4.0).abs() < 0.1);
        let wrong = dirac_residual_of(spec, k, &p, 1e-3, 0, Side::Right).unwrap().norm();
        assert!(wrong > 0.1);
    }

    #[test]
    fn non_monogenic_control() {
        let spec = g(1);
        let p = ExtendedPoint::new(vec![0.3], vec![-0.4]).unwrap();
        let f = |q: &ExtendedPoint| Ok(Multivector::scalar(spec, q.y[0]));
        let r = dirac_residual_of(spec, f, &p, 1e-3, 0, Side::Left).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_guard() {
        let ext = ExtensionSpec::new(ExtensionVariant::F1Left, unit_box()).unwrap();
        let p = ExtendedPoint::new(vec![0.0], vec![-1.0]).unwrap();
        assert!(matches!(dirac_residual(&ext, &p, 1e-7, 0), Err(MonogenicError::StepTooSmall(_))));
        assert!(matches!(dirac_residual(&ext, &p, 1e-3, 1), Err(MonogenicError::AxisOutOfRange { .. })));
    }

    #[test]
    fn cauchy_integral_of_constant_vanishes() {
        let spec = g(2);
        let rect = Rectangle {
            axis: 1,
            base: ExtendedPoint::new(vec![0.1, 0.0], vec![0.2, 0.0]).unwrap(),
            y: (-0.7, 1.1),
            y_prime: (0.3, 2.0),
        };
        let one = |_: &ExtendedPoint| Ok(Multivector::one(spec));
        for side in [Side::Left, Side::Right] {
            assert_eq!(cauchy_boundary_integral(spec, one, &rect, 17, side).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn cauchy_integral_of_linear_control() {
        let spec = g(1);
        let rect = Rectangle {
            axis: 0,
            base: ExtendedPoint::new(vec![0.0], vec![0.0]).unwrap(),
            y: (0.0, 1.0),
            y_prime: (0.0, 1.0),
        };
        let f = |q: &ExtendedPoint| Ok(Multivector::scalar(spec, q.y[0]));
        let v = cauchy_boundary_integral(spec, f, &rect, 8, Side::Left).unwrap();
        let e1 = Multivector::blade(spec, spec.e(0).unwrap(), 1.0).unwrap();
        assert!(v.max_abs_diff(&e1) < 1e-14);
    }

    #[test]
    fn degenerate_rectangle_is_rejected() {
        let ext = ExtensionSpec::new(ExtensionVariant::F1Left, unit_box()).unwrap();
        let rect = Rectangle {
            axis: 0,
            base: ExtendedPoint::new(vec![0.0], vec![0.0]).unwrap(),
            y: (1.0, 1.0),
            y_prime: (-1.0, 0.0),
        };
        assert!(matches!(
            cauchy_boundary_check(&ext, &rect, 16),
            Err(MonogenicError::DegenerateRectangle)
        ));
    }

    #[test]
    fn recovery_round_trip_and_zero_slice() {
        let density = unit_box();
        let ext = ExtensionSpec::new(ExtensionVariant::F1Left, density.clone()).unwrap();
        let grid = density.grid();
        let a = pw_recover_with(&slice(&ext, &[-1.0]).unwrap(), &[-1.0], ExtensionVariant::F1Left, Some(grid)).unwrap();
        let b = pw_recover_with(&slice(&ext, &[-2.0]).unwrap(), &[-2.0], ExtensionVariant::F1Left, Some(grid)).unwrap();
        assert!(a.max_diff(&density).unwrap() < 1e-5);
        assert!(a.max_diff(&b).unwrap() < 1e-5);
        let centred = pw_recover(&slice(&ext, &[-1.0]).unwrap(), &[-1.0]).unwrap();
        assert_eq!(centred.grid(), &grid.frequency_grid().frequency_grid());

        let zero = SampledField::zeros(density.grid().frequency_grid(), g(1), false).unwrap();
        assert_eq!(pw_recover(&zero, &[-1.0]).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn recovery_on_density_grid_for_every_variant() {
        let density = unit_box();
        for variant in ExtensionVariant::ALL {
            let ext = ExtensionSpec::new(variant, density.clone()).unwrap();
            let yp = [-0.7];
            let s = slice(&ext, &yp).unwrap();
            let back = pw_recover_with(&s, &yp, variant, Some(density.grid())).unwrap();
            assert!(back.max_diff(&density).unwrap() < 1e-9, "{variant:?}");
        }
    }

    #[test]
    fn zero_density_report() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![32], vec![0.25]).unwrap();
        let zero = SampledField::zeros(grid, spec, false).unwrap();
        for case in [PwCase::HalfSpace, PwCase::Ball { radius: 1.0 }] {
            let r = pw_verify(&zero, &case, &[vec![-0.5]]).unwrap();
            assert_eq!(r.sup_slice_norm, 0.0);
            assert_eq!(r.density_norm, 0.0);
            assert_eq!(r.outside_support_mass, 0.0);
            assert_eq!(r.growth_violations, 0);
        }
    }

    #[test]
    fn support_and_slice_preconditions() {
        let spec = g(1);
        let grid = GridSpec::centered(vec![32], vec![0.25]).unwrap();
        let f = SampledField::from_fn(grid, spec, |_| Multivector::one(spec)).unwrap();
        assert!(matches!(
            pw_verify(&f, &PwCase::HalfSpace, &[vec![-1.0]]),
            Err(MonogenicError::SupportViolated { .. })
        ));
        let boxed = unit_box();
        assert!(matches!(
            pw_verify(&boxed, &PwCase::Ball { radius: 2.0 }, &[vec![0.5, 0.5]]),
            Err(MonogenicError::InvalidSlice(_))
        ));
    }
}
