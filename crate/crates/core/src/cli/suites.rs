//! Verification suites run by `cliffourier verify <suite>`.

use clap::ValueEnum;
use serde_json::json;

use super::{CliError, RunReport};
use crate::algebra::{AlgebraSpec, Multivector};
use crate::fieldio::{sample, FieldGenerator, GridSpec, Profile, SampledField};
use crate::kernel::ExtendedPoint;
use crate::monogenic::{
    cauchy_boundary_check, dirac_residual_norm, pw_verify, ExtensionSpec, ExtensionVariant, PwCase, Rectangle,
};
use crate::random::{random_field, random_multivector, random_smooth_field, random_smooth_subalgebra_field, rng_from_seed};
use crate::transform::{
    classical_ft, cft_inverse, dilate, modulate, multiply_pointwise, partial_derivative, rel_linf, reverse_flip,
    transform, translate, Direction, Engine, Side, TransformRequest,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Plancherel,
    Opcalc,
    Convolution,
    Inversion,
    F2Identity,
    Monogenic,
    PaleyWiener,
    OracleEquivalence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Plancherel => "plancherel",
            Suite::Opcalc => "opcalc",
            Suite::Convolution => "convolution",
            Suite::Inversion => "inversion",
            Suite::F2Identity => "f2-identity",
            Suite::Monogenic => "monogenic",
            Suite::PaleyWiener => "paley-wiener",
            Suite::OracleEquivalence => "oracle-equivalence",
        }
    }
}

type Emit<'a> = &'a mut dyn FnMut(RunReport);

/// Runs `suite` for each base dimension in `dims`, passing every report
/// line to `emit`.
pub fn run_suite(suite: Suite, dims: &[usize], seed: u64, emit: Emit<'_>) -> Result<(), CliError> {
    let mut ctx = Ctx {
        command: format!("verify {}", suite.name()),
        emit,
    };
    for &n in dims {
        let spec = AlgebraSpec::new(n).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut rng = rng_from_seed(seed.wrapping_add(n as u64));
        match suite {
            Suite::Plancherel => plancherel(&mut ctx, spec, &mut rng)?,
            Suite::Opcalc => opcalc(&mut ctx, spec, &mut rng)?,
            Suite::Convolution => convolution(&mut ctx, spec, &mut rng)?,
            Suite::Inversion => inversion(&mut ctx, spec, &mut rng)?,
            Suite::F2Identity => f2_identity(&mut ctx, spec, &mut rng)?,
            Suite::Monogenic => monogenic(&mut ctx, spec, &mut rng)?,
            Suite::PaleyWiener => paley_wiener(&mut ctx, spec)?,
            Suite::OracleEquivalence => oracle_equivalence(&mut ctx, spec, &mut rng)?,
        }
    }
    Ok(())
}

struct Ctx<'a> {
    command: String,
    emit: Emit<'a>,
}

impl Ctx<'_> {
    fn report(&mut self, check: &str, parameters: serde_json::Value, metrics: &[(&str, f64)], pass: bool) {
        (self.emit)(RunReport::new(&self.command, check, parameters, metrics, pass));
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

/// `[-8, 8)^n` with 128 nodes (n = 1) or 64 per axis.
pub(crate) fn smooth_grid(n: usize) -> GridSpec {
    let dims = if n == 1 { 128 } else { 64 };
    GridSpec::from_extent(vec![dims; n], &vec![-8.0; n], &vec![8.0; n]).expect("valid grid")
}

fn forward(side: Side) -> TransformRequest {
    TransformRequest::forward(side)
}

fn fo(f: &SampledField, side: Side) -> Result<SampledField, CliError> {
    Ok(transform(f, &forward(side))?)
}

fn plancherel(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let grid = smooth_grid(spec.n());
    let f = random_smooth_field(&grid, spec, rng)?;
    let g = random_smooth_field(&grid, spec, rng)?;
    for side in [Side::Left, Side::Right] {
        let (tf, tg) = (fo(&f, side)?, fo(&g, side)?);
        let rel = (tf.l2_norm() - f.l2_norm()).abs() / f.l2_norm();
        let ip = f.inner_product(&g)?;
        let ipt = tf.inner_product(&tg)?;
        let scale = (f.inner_product(&f)? * g.inner_product(&g)?).sqrt();
        let parseval = (ip - ipt).abs() / scale;
        let params = json!({ "n": spec.n(), "dims": grid.dims(), "side": side_name(side) });
        ctx.report(
            "plancherel",
            params.clone(),
            &[("normF", f.l2_norm()), ("normTransform", tf.l2_norm()), ("relNormDiff", rel)],
            rel <= 1e-6,
        );
        ctx.report(
            "parseval",
            params,
            &[("innerProduct", ip), ("innerProductTransform", ipt), ("relDiff", parseval)],
            parseval <= 1e-6,
        );
    }
    let gaussian = gaussian_times(spec, &grid, &Multivector::one(spec))?;
    for side in [Side::Left, Side::Right] {
        let err = gaussian_fixed_point_error(&gaussian, side, 4.0)?;
        ctx.report(
            "gaussian-fixed-point",
            json!({ "n": spec.n(), "dims": grid.dims(), "side": side_name(side), "radius": 4.0 }),
            &[("maxDiff", err)],
            err <= 1e-6,
        );
    }
    Ok(())
}

/// Largest deviation of `F_o g` from `e^{-|y|²/2}` over nodes with
/// `|y| ≤ radius`, for the scalar unit Gaussian `g`.
pub(crate) fn gaussian_fixed_point_error(gaussian: &SampledField, side: Side, radius: f64) -> Result<f64, CliError> {
    let t = fo(gaussian, side)?;
    let grid = t.grid().clone();
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let y = grid.point(i);
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 > radius * radius {
            continue;
        }
        let mut expected = Multivector::zero(gaussian.spec());
        expected.coeffs_mut()[0] = (-0.5 * r2).exp();
        worst = worst.max(t.value(i).max_abs_diff(&expected));
    }
    Ok(worst)
}

fn opcalc(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    let grid = smooth_grid(n);
    let f = random_smooth_field(&grid, spec, rng)?;
    let g = random_smooth_field(&grid, spec, rng)?;
    let a = random_multivector(spec, rng);
    let b = random_multivector(spec, rng);
    let freq = grid.frequency_grid();
    let params = |side: Side| json!({ "n": n, "dims": grid.dims(), "side": side_name(side) });
    for side in [Side::Left, Side::Right] {
        // Constants multiply on the side opposite to the kernel.
        let (combo, expected) = match side {
            Side::Left => (
                f.mul_right(&a)?.add(&g.mul_right(&b)?)?,
                fo(&f, side)?.mul_right(&a)?.add(&fo(&g, side)?.mul_right(&b)?)?,
            ),
            Side::Right => (
                f.mul_left(&a)?.add(&g.mul_left(&b)?)?,
                fo(&f, side)?.mul_left(&a)?.add(&fo(&g, side)?.mul_left(&b)?)?,
            ),
        };
        let err = rel_linf(&fo(&combo, side)?, &expected)?;
        ctx.report("linearity", params(side), &[("relLinf", err)], err <= 1e-6);

        let u: Vec<f64> = (0..n).map(|k| (k as f64 + 2.0) * grid.spacing()[k]).collect();
        let lhs = fo(&translate(&f, &u)?, side)?;
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let rhs = modulate(&fo(&f, side)?, &neg, side)?;
        let err = rel_linf(&lhs, &rhs)?;
        ctx.report("translation", params(side), &[("relLinf", err)], err <= 1e-6);

        let u: Vec<f64> = (0..n).map(|k| (k as f64 + 1.0) * freq.spacing()[k]).collect();
        let lhs = fo(&modulate(&f, &u, side)?, side)?;
        let rhs = translate(&fo(&f, side)?, &u)?;
        let err = rel_linf(&lhs, &rhs)?;
        ctx.report("modulation", params(side), &[("relLinf", err)], err <= 1e-6);

        let lambda = 2.0;
        let lhs = fo(&dilate(&f, lambda)?, side)?;
        let rhs = fo(&f, side)?.scale(lambda.powi(n as i32));
        let err = rel_linf(&lhs.with_grid(rhs.grid().clone())?, &rhs)?;
        ctx.report("dilation-grid", params(side), &[("lambda", lambda), ("relLinf", err)], err <= 1e-6);

        let err = dilation_resampled(spec, side, lambda, rng)?;
        ctx.report("dilation-resampled", params(side), &[("lambda", lambda), ("relLinf", err)], err <= 1e-6);

        let other = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let lhs = fo(&reverse_flip(&f)?, side)?;
        let rhs = fo(&f, other)?.reversion();
        let err = rel_linf(&lhs, &rhs)?;
        ctx.report("reversion", params(side), &[("relLinf", err)], err <= 1e-10);
    }
    if n == 1 {
        let a = random_multivector(spec, rng);
        for side in [Side::Left, Side::Right] {
            let (errors, pass) = differentiation_x(spec, &a, side)?;
            report_convergence(ctx, "differentiation-x", side, &errors, pass);
            let (errors, pass) = differentiation_y(spec, &a, side)?;
            report_convergence(ctx, "differentiation-y", side, &errors, pass);
        }
    }
    Ok(())
}

fn report_convergence(ctx: &mut Ctx, check: &str, side: Side, errors: &[(usize, f64)], pass: bool) {
    let mut metrics: Vec<(String, f64)> = errors.iter().map(|(d, e)| (format!("err{d}"), *e)).collect();
    for w in errors.windows(2) {
        metrics.push((format!("ratio{}", w[1].0), w[0].1 / w[1].1));
    }
    let metrics: Vec<(&str, f64)> = metrics.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    ctx.report(
        check,
        json!({ "n": 1, "side": side_name(side), "dims": errors.iter().map(|e| e.0).collect::<Vec<_>>() }),
        &metrics,
        pass,
    );
}

/// Convergence passes when the finest error is within `1e-4` and every
/// refinement reduces the error by a factor in `[3.5, 4.5]`.
pub(crate) fn second_order(errors: &[(usize, f64)]) -> bool {
    let finest = errors.last().map_or(f64::INFINITY, |e| e.1);
    finest <= 1e-4
        && errors.windows(2).all(|w| {
            let r = w[0].1 / w[1].1;
            (3.5..=4.5).contains(&r)
        })
}

fn gaussian_times(spec: AlgebraSpec, grid: &GridSpec, a: &Multivector) -> Result<SampledField, CliError> {
    let gen = FieldGenerator::new(
        Profile::Gaussian {
            center: vec![0.0; spec.n()],
            width: 1.0,
        },
        a.clone(),
    )?;
    Ok(sample(&gen, grid, spec)?)
}

fn times_bivector_coord(spec: AlgebraSpec, axis: usize, factor: f64) -> impl Fn(&[f64]) -> Multivector {
    let b = Multivector::blade(spec, spec.bivector(axis).expect("axis in range"), 1.0).expect("valid blade");
    move |x: &[f64]| b.scale(factor * x[axis])
}

/// `F_o(∂f/∂x)` against `B y F_o f` (left) or `(f F_o) B y` (right) for a
/// Gaussian times `a` on `[-8, 8)`.
pub(crate) fn differentiation_x(
    spec: AlgebraSpec,
    a: &Multivector,
    side: Side,
) -> Result<(Vec<(usize, f64)>, bool), CliError> {
    let mut errors = Vec::new();
    for dims in [256, 512, 1024] {
        let grid = GridSpec::from_extent(vec![dims], &[-8.0], &[8.0])?;
        let f = gaussian_times(spec, &grid, a)?;
        let lhs = fo(&partial_derivative(&f, 0)?, side)?;
        let tf = fo(&f, side)?;
        let rhs = multiply_pointwise(&tf, side, times_bivector_coord(spec, 0, 1.0))?;
        errors.push((dims, lhs.max_diff(&rhs)? / tf.max_norm()));
    }
    let pass = second_order(&errors);
    Ok((errors, pass))
}

/// `∂(F_o f)/∂y` against `F_o(-B x f)` (left) or `(-x f B) F_o` (right) on a
/// long spatial domain (spacing 0.5) so the frequency step is small.
pub(crate) fn differentiation_y(
    spec: AlgebraSpec,
    a: &Multivector,
    side: Side,
) -> Result<(Vec<(usize, f64)>, bool), CliError> {
    let mut errors = Vec::new();
    for dims in [256, 512, 1024] {
        let grid = GridSpec::centered(vec![dims], vec![0.5])?;
        let f = gaussian_times(spec, &grid, a)?;
        let tf = fo(&f, side)?;
        let lhs = partial_derivative(&tf, 0)?;
        let weighted = multiply_pointwise(&f, side, times_bivector_coord(spec, 0, -1.0))?;
        let rhs = fo(&weighted, side)?;
        errors.push((dims, lhs.max_diff(&rhs)? / tf.max_norm()));
    }
    let pass = second_order(&errors);
    Ok((errors, pass))
}

/// `F_o h(y)` for `h(x) = f(x/λ)` sampled directly against `λ^n F_o f(λ y)`,
/// both by direct quadrature, for a polynomial-Gaussian `f`.
pub(crate) fn dilation_resampled(
    spec: AlgebraSpec,
    side: Side,
    lambda: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64, CliError> {
    let n = spec.n();
    let grid = smooth_grid(n);
    let weights = random_multivector(spec, rng);
    let constant = rng.random_range(0.5..1.5);
    let linear: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quadratic: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let width = 0.5;
    let f = FieldGenerator::new(
        Profile::PolynomialGaussian {
            constant,
            linear: linear.clone(),
            quadratic: quadratic.clone(),
            width,
        },
        weights.clone(),
    )?;
    let h = FieldGenerator::new(
        Profile::PolynomialGaussian {
            constant,
            linear: linear.iter().map(|v| v / lambda).collect(),
            quadratic: quadratic.iter().map(|v| v / (lambda * lambda)).collect(),
            width: width * lambda,
        },
        weights,
    )?;
    let out_dims = vec![16; n];
    let out_grid = GridSpec::centered(out_dims.clone(), vec![0.25; n])?;
    let direct = |field: &SampledField, grid: &GridSpec| -> Result<SampledField, CliError> {
        let req = TransformRequest::new(side, Direction::Forward, Engine::Direct).with_output_grid(grid.clone());
        Ok(transform(field, &req)?)
    };
    let th = direct(&sample(&h, &grid, spec)?, &out_grid)?;
    let tf = direct(&sample(&f, &grid, spec)?, &out_grid.scaled(lambda)?)?;
    let expected = tf.scale(lambda.powi(n as i32)).with_grid(out_grid)?;
    Ok(rel_linf(&th, &expected)?)
}

fn convolution(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    let grid = smooth_grid(n);
    let sub = random_smooth_subalgebra_field(&grid, spec, rng)?;
    let full = random_smooth_field(&grid, spec, rng)?;
    let other = random_smooth_field(&grid, spec, rng)?;
    let params = |side: Side| json!({ "n": n, "dims": grid.dims(), "side": side_name(side) });

    let conv = crate::transform::convolve(&sub, &full)?;
    let err = rel_linf(&fo(&conv, Side::Left)?, &fo(&sub, Side::Left)?.product(&fo(&full, Side::Left)?)?)?;
    ctx.report("convolution-theorem", params(Side::Left), &[("relLinf", err)], err <= 1e-6);

    let conv = crate::transform::convolve(&full, &sub)?;
    let err = rel_linf(&fo(&conv, Side::Right)?, &fo(&full, Side::Right)?.product(&fo(&sub, Side::Right)?)?)?;
    ctx.report("convolution-theorem", params(Side::Right), &[("relLinf", err)], err <= 1e-6);

    let conv = crate::transform::convolve(&full, &other)?;
    let err = rel_linf(&fo(&conv, Side::Left)?, &fo(&full, Side::Left)?.product(&fo(&other, Side::Left)?)?)?;
    ctx.report("convolution-control", params(Side::Left), &[("relLinf", err)], err > 1e-3);
    Ok(())
}

fn inversion(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    let grid = smooth_grid(n);
    let f = random_smooth_field(&grid, spec, rng)?;
    for side in [Side::Left, Side::Right] {
        let params = json!({ "n": n, "dims": grid.dims(), "side": side_name(side) });
        let twice = fo(&fo(&f, side)?, side)?;
        // reverse_flip includes a reversion; undo it to read F_o² f at -x.
        let mirrored = reverse_flip(&twice)?.reversion();
        let err = rel_linf(&mirrored.with_grid(grid.clone())?, &f)?;
        ctx.report("double-transform", params.clone(), &[("relLinf", err)], err <= 1e-6);

        let req = forward(side).with_output_grid(f.grid().frequency_grid());
        let back = cft_inverse(&transform(&f, &req)?, &forward(side).with_output_grid(grid.clone()))?;
        let err = rel_linf(&back, &f)?;
        ctx.report("inverse-forward", params, &[("relLinf", err)], err <= 1e-6);
    }
    Ok(())
}

fn f2_identity(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    let dims = if n == 1 { 32 } else { 16 };
    let grid = GridSpec::centered(vec![dims; n], vec![0.5; n])?;
    let f = random_field(&grid, spec, rng)?;
    let classical = classical_ft(&classical_ft(&f)?)?;
    for side in [Side::Left, Side::Right] {
        let clifford = fo(&fo(&f, side)?, side)?;
        let diff = classical.max_diff(&clifford.to_complex())? / f.max_norm();
        ctx.report(
            "f2-identity",
            json!({ "n": n, "dims": grid.dims(), "side": side_name(side) }),
            &[("maxDiff", diff)],
            diff <= 1e-10,
        );
    }
    Ok(())
}

/// Box indicator of `[0.5, 1.5]^n` on a cell-centred grid over `[0, 2)^n`
/// whose cell edges include the box faces.
pub(crate) fn box_density(spec: AlgebraSpec) -> Result<SampledField, CliError> {
    let n = spec.n();
    let dims = if n == 1 { 256 } else { 64 };
    let grid = GridSpec::cell_centered(vec![dims; n], &vec![0.0; n], &vec![2.0; n])?;
    let gen = FieldGenerator::new(
        Profile::BoxIndicator {
            lower: vec![0.5; n],
            upper: vec![1.5; n],
        },
        Multivector::one(spec),
    )?;
    Ok(sample(&gen, &grid, spec)?)
}

/// Indicator of the closed ball of radius `radius` on a cell-centred grid
/// over `[-2, 2)^n`.
pub(crate) fn ball_density(spec: AlgebraSpec, radius: f64) -> Result<SampledField, CliError> {
    let n = spec.n();
    let dims = if n == 1 { 256 } else { 64 };
    let grid = GridSpec::cell_centered(vec![dims; n], &vec![-2.0; n], &vec![2.0; n])?;
    let gen = FieldGenerator::new(
        Profile::BallIndicator {
            center: vec![0.0; n],
            radius,
        },
        Multivector::one(spec),
    )?;
    Ok(sample(&gen, &grid, spec)?)
}

/// Random point with `y ∈ [-3, 3]^n`, `y' ∈ [-2, -0.1]^n`.
pub(crate) fn random_lower_point(n: usize, rng: &mut ChaCha8Rng) -> ExtendedPoint {
    ExtendedPoint {
        y: (0..n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        y_prime: (0..n).map(|_| rng.random_range(-2.0..-0.1)).collect(),
    }
}

fn monogenic(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    let density = box_density(spec)?;
    let ext = ExtensionSpec::new(ExtensionVariant::F1Left, density)?;
    let mut max_residual = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for _ in 0..50 {
        let p = random_lower_point(n, rng);
        let coarse = dirac_residual_norm(&ext, &p, 1e-3)?;
        let fine = dirac_residual_norm(&ext, &p, 5e-4)?;
        max_residual = max_residual.max(coarse);
        min_ratio = min_ratio.min(coarse / fine);
        max_ratio = max_ratio.max(coarse / fine);
    }
    ctx.report(
        "dirac-residual",
        json!({ "n": n, "variant": "f1-left", "points": 50, "step": 1e-3 }),
        &[("maxResidual", max_residual), ("minRatio", min_ratio), ("maxRatio", max_ratio)],
        max_residual <= 1e-4 && min_ratio >= 3.5 && max_ratio <= 4.5,
    );

    let rect = Rectangle {
        axis: 0,
        base: ExtendedPoint {
            y: vec![0.3; n],
            y_prime: vec![-0.7; n],
        },
        y: (-1.0, 1.0),
        y_prime: (-2.0, -0.5),
    };
    let coarse = cauchy_boundary_check(&ext, &rect, 512)?;
    let fine = cauchy_boundary_check(&ext, &rect, 1024)?;
    ctx.report(
        "cauchy-boundary",
        json!({ "n": n, "variant": "f1-left", "points": [512, 1024] }),
        &[("boundary512", coarse), ("boundary1024", fine), ("ratio", coarse / fine)],
        coarse <= 1e-5 && coarse / fine >= 2.0,
    );
    Ok(())
}

/// `‖F‖²(1 - m^n)` with `m = (e^{-t} - e^{-3t}) / 2t`: the exact gap between
/// `‖F‖²` and the slice norm at `y' = -t(1,…,1)` for the box `[0.5, 1.5]^n`.
pub(crate) fn box_slice_gap(density_norm: f64, t: f64, n: usize) -> f64 {
    let m = ((-t).exp() - (-3.0 * t).exp()) / (2.0 * t);
    density_norm * (1.0 - m.powi(n as i32))
}

fn paley_wiener(ctx: &mut Ctx, spec: AlgebraSpec) -> Result<(), CliError> {
    let n = spec.n();
    let density = box_density(spec)?;
    let ts = [2.0, 1.0, 0.5, 0.1, 0.01];
    let slices: Vec<Vec<f64>> = ts.iter().map(|&t| vec![-t; n]).collect();
    let report = pw_verify(&density, &PwCase::HalfSpace, &slices)?;
    let norms: Vec<f64> = report.slice_norms.iter().map(|s| s.norm_squared).collect();
    let monotone = norms.windows(2).all(|w| w[1] >= w[0]);
    let params = json!({ "n": n, "case": "half-space", "box": [0.5, 1.5], "slices": ts });
    ctx.report(
        "half-space-monotone",
        params.clone(),
        &[("firstSliceNorm", norms[0]), ("lastSliceNorm", norms[norms.len() - 1])],
        monotone,
    );
    ctx.report(
        "half-space-bounded",
        params.clone(),
        &[("supSliceNorm", report.sup_slice_norm), ("densityNorm", report.density_norm)],
        report.sup_slice_norm <= report.density_norm * (1.0 + 1e-12) && report.growth_violations == 0,
    );
    let gap = report.density_norm - norms[norms.len() - 1];
    ctx.report(
        "half-space-limit",
        params.clone(),
        &[
            ("gap", gap),
            ("predictedGap", box_slice_gap(report.density_norm, 0.01, n)),
            ("tolerance", 1e-3),
        ],
        gap.abs() <= 1e-3,
    );
    ctx.report(
        "half-space-recovery",
        params,
        &[
            ("outsideSupportMass", report.outside_support_mass),
            ("recoveryError", report.recovery_error),
        ],
        report.outside_support_mass <= 1e-6 && report.recovery_error <= 1e-5,
    );

    let radius = 1.0;
    let ball = ball_density(spec, radius)?;
    let unit = 1.0 / (n as f64).sqrt();
    let slices: Vec<Vec<f64>> = [-2.0, -0.5, 0.5, 1.0, 2.0].iter().map(|&s| vec![s * unit; n]).collect();
    let report = pw_verify(&ball, &PwCase::Ball { radius }, &slices)?;
    let params = json!({ "n": n, "case": "ball", "radius": radius });
    ctx.report(
        "ball-growth",
        params.clone(),
        &[
            ("growthViolations", report.growth_violations as f64),
            ("growthSamples", report.growth_samples as f64),
            ("growthConstant", report.growth_constant),
        ],
        report.growth_violations == 0,
    );
    ctx.report(
        "ball-support",
        params,
        &[
            ("outsideSupportMass", report.outside_support_mass),
            ("recoveryError", report.recovery_error),
        ],
        report.outside_support_mass <= 1e-6 && report.recovery_error <= 1e-5,
    );
    Ok(())
}

fn oracle_equivalence(ctx: &mut Ctx, spec: AlgebraSpec, rng: &mut ChaCha8Rng) -> Result<(), CliError> {
    let n = spec.n();
    for dims in [16, 32] {
        for i in 0..5 {
            let h = rng.random_range(0.2..0.6);
            let grid = GridSpec::centered(vec![dims; n], vec![h; n])?;
            let f = random_field(&grid, spec, rng)?;
            let side = if i % 2 == 0 { Side::Left } else { Side::Right };
            let direction = if i % 3 == 2 { Direction::Inverse } else { Direction::Forward };
            let fast = transform(&f, &TransformRequest::new(side, direction, Engine::Fast))?;
            let direct = transform(&f, &TransformRequest::new(side, direction, Engine::Direct))?;
            let err = rel_linf(&fast, &direct)?;
            ctx.report(
                "oracle-equivalence",
                json!({
                    "n": n,
                    "dims": dims,
                    "spacing": h,
                    "side": side_name(side),
                    "direction": if direction == Direction::Forward { "forward" } else { "inverse" },
                }),
                &[("relLinf", err)],
                err <= 1e-8,
            );
        }
    }
    Ok(())
}
