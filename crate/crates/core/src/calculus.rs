//! Wirtinger differentiation of chart-defined scalar and matrix fields.
//!
//! All finite differencing happens on the underlying real coordinates
//! `z^i = x^i + sqrt(-1) y^i` and is recombined into Wirtinger form, so no
//! holomorphy of the field entries is assumed (metric entries are not
//! holomorphic). Analytic derivatives, when a field carries them, are
//! preferred; central differences with Richardson extrapolation serve as the
//! fallback and as an independent cross-check.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::{C64, CMatrix};

/// A point in a holomorphic chart of C^n.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    coords: Vec<C64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeomError::InvalidParameter(
                "chart point needs dimension >= 1".into(),
            ));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GeomError::InvalidParameter(
                "chart point has non-finite coordinates".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_re_im(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copy of the point with one real coordinate shifted.
    ///
    /// Real axes are indexed `0..2n`: axis `2i` is `Re z^i`, axis `2i+1` is
    /// `Im z^i`.
    pub fn shifted_real(&self, axis: usize, delta: f64) -> Self {
        let mut coords = self.coords.clone();
        let i = axis / 2;
        if axis % 2 == 0 {
            coords[i].re += delta;
        } else {
            coords[i].im += delta;
        }
        Self { coords }
    }
}

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Use analytic derivatives when the field has them, otherwise fall back
    /// to central differences.
    Auto,
    /// Require analytic derivatives; error if the field lacks them.
    Analytic,
    /// Force central differences even when analytic derivatives exist
    /// (used for cross-checks).
    CentralDifference,
}

/// Differentiation parameters.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeSpec {
    pub scheme: Scheme,
    /// Base step in chart units; the effective step is `step * (1 + |p|)`.
    pub step: f64,
    /// Richardson extrapolation levels applied on top of the second-order
    /// central scheme (level 1 gives observed order 4).
    pub richardson_levels: u32,
}

impl Default for DerivativeSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::Auto,
            step: 1e-4,
            richardson_levels: 1,
        }
    }
}

impl DerivativeSpec {
    pub fn central(step: f64, richardson_levels: u32) -> Self {
        Self {
            scheme: Scheme::CentralDifference,
            step,
            richardson_levels,
        }
    }

    pub fn analytic() -> Self {
        Self {
            scheme: Scheme::Analytic,
            ..Self::default()
        }
    }

    pub(crate) fn effective_step(&self, p: &ChartPoint) -> Result<f64> {
        let h = self.step * (1.0 + p.norm());
        if !(h.is_finite() && h > 0.0) {
            return Err(GeomError::BadStep(h));
        }
        // Below a few ulps the stencil collapses to roundoff noise.
        if h < 64.0 * f64::EPSILON * (1.0 + p.norm()) {
            return Err(GeomError::BadStep(h));
        }
        Ok(h)
    }
}

type ScalarEval = dyn Fn(&ChartPoint) -> C64 + Send + Sync;
type ScalarGrad = dyn Fn(&ChartPoint, usize) -> C64 + Send + Sync;
type ScalarHess = dyn Fn(&ChartPoint, usize, usize) -> C64 + Send + Sync;

/// A complex scalar field on a chart, with optional analytic derivatives.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<ScalarEval>,
    grad_z: Option<Arc<ScalarGrad>>,
    grad_zbar: Option<Arc<ScalarGrad>>,
    hess_mixed: Option<Arc<ScalarHess>>,
}

impl ScalarField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> C64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            grad_z: None,
            grad_zbar: None,
            hess_mixed: None,
        }
    }

    /// Real-valued field; the conjugate gradient is derived from `grad_z`
    /// once one is attached (valid because `d/dzbar f = conj(d/dz f)` for
    /// real `f`).
    pub fn real<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim, move |p| C64::new(eval(p), 0.0))
    }

    pub fn with_grad_z<F>(mut self, grad: F) -> Self
    where
        F: Fn(&ChartPoint, usize) -> C64 + Send + Sync + 'static,
    {
        self.grad_z = Some(Arc::new(grad));
        self
    }

    /// Attach the holomorphic gradient of a real-valued field; the
    /// antiholomorphic one follows by conjugation.
    pub fn with_grad_z_real<F>(mut self, grad: F) -> Self
    where
        F: Fn(&ChartPoint, usize) -> C64 + Send + Sync + 'static,
    {
        let g = Arc::new(grad);
        let g2 = Arc::clone(&g);
        self.grad_z = Some(g);
        self.grad_zbar = Some(Arc::new(move |p, i| g2(p, i).conj()));
        self
    }

    pub fn with_grad_zbar<F>(mut self, grad: F) -> Self
    where
        F: Fn(&ChartPoint, usize) -> C64 + Send + Sync + 'static,
    {
        self.grad_zbar = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian_mixed<F>(mut self, hess: F) -> Self
    where
        F: Fn(&ChartPoint, usize, usize) -> C64 + Send + Sync + 'static,
    {
        self.hess_mixed = Some(Arc::new(hess));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &ChartPoint) -> C64 {
        (self.eval)(p)
    }

    pub fn has_grad_z(&self) -> bool {
        self.grad_z.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.hess_mixed.is_some()
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.dim() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        Ok(())
    }
}

type MatrixEval = dyn Fn(&ChartPoint) -> CMatrix + Send + Sync;
type MatrixD1 = dyn Fn(&ChartPoint, usize) -> CMatrix + Send + Sync;
type MatrixD2 = dyn Fn(&ChartPoint, usize, usize) -> CMatrix + Send + Sync;

/// An n x n complex matrix field (the metric `g_{i jbar}` evaluator), with
/// optional analytic first and mixed second derivatives.
///
/// The antiholomorphic first derivative is never stored: for a Hermitian
/// field `d/dzbar^j G = (d/dz^j G)^H`.
#[derive(Clone)]
pub struct MatrixField {
    dim: usize,
    eval: Arc<MatrixEval>,
    d1: Option<Arc<MatrixD1>>,
    d2: Option<Arc<MatrixD2>>,
}

impl MatrixField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&ChartPoint) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            d1: None,
            d2: None,
        }
    }

    pub fn with_d1<F>(mut self, d1: F) -> Self
    where
        F: Fn(&ChartPoint, usize) -> CMatrix + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_d2<F>(mut self, d2: F) -> Self
    where
        F: Fn(&ChartPoint, usize, usize) -> CMatrix + Send + Sync + 'static,
    {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &ChartPoint) -> CMatrix {
        (self.eval)(p)
    }

    pub fn has_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn has_d2(&self) -> bool {
        self.d2.is_some()
    }

    pub fn d1_analytic(&self, p: &ChartPoint, i: usize) -> Option<CMatrix> {
        self.d1.as_ref().map(|f| f(p, i))
    }

    pub fn d2_analytic(&self, p: &ChartPoint, i: usize, j: usize) -> Option<CMatrix> {
        self.d2.as_ref().map(|f| f(p, i, j))
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.dim() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Central-difference kernels.
// ---------------------------------------------------------------------------

/// Richardson extrapolation of a second-order symmetric estimator.
fn richardson<T, F>(mut eval: F, h0: f64, levels: u32) -> T
where
    T: Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Div<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let n = levels as usize;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let h = h0 / (1u64 << k) as f64;
        let mut row = vec![eval(h)];
        for m in 1..=k {
            let f = 4f64.powi(m as i32);
            let v = (row[m - 1] * f - rows[k - 1][m - 1]) / (f - 1.0);
            row.push(v);
        }
        rows.push(row);
    }
    rows[n][n]
}

fn central_first<T, F>(f: &F, p: &ChartPoint, axis: usize, h: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
    F: Fn(&ChartPoint) -> T,
{
    (f(&p.shifted_real(axis, h)) - f(&p.shifted_real(axis, -h))) / (2.0 * h)
}

fn central_second_same<T, F>(f: &F, p: &ChartPoint, axis: usize, h: f64) -> T
where
    T: std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Div<f64, Output = T>,
    F: Fn(&ChartPoint) -> T,
{
    let c = f(p);
    (f(&p.shifted_real(axis, h)) + f(&p.shifted_real(axis, -h)) - c * 2.0) / (h * h)
}

fn central_second_cross<T, F>(f: &F, p: &ChartPoint, a: usize, b: usize, h: f64) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
    F: Fn(&ChartPoint) -> T,
{
    let pp = f(&p.shifted_real(a, h).shifted_real(b, h));
    let pm = f(&p.shifted_real(a, h).shifted_real(b, -h));
    let mp = f(&p.shifted_real(a, -h).shifted_real(b, h));
    let mm = f(&p.shifted_real(a, -h).shifted_real(b, -h));
    ((pp - pm) - (mp - mm)) / (4.0 * h * h)
}

/// d/dz^i by finite differences of an arbitrary complex-valued function.
pub(crate) fn fd_wirtinger_first<F>(f: &F, p: &ChartPoint, i: usize, h: f64, levels: u32) -> C64
where
    F: Fn(&ChartPoint) -> C64,
{
    let dx = richardson(|h| central_first(f, p, 2 * i, h), h, levels);
    let dy = richardson(|h| central_first(f, p, 2 * i + 1, h), h, levels);
    0.5 * (dx - C64::i() * dy)
}

/// d/dzbar^i by finite differences.
pub(crate) fn fd_wirtinger_first_conj<F>(
    f: &F,
    p: &ChartPoint,
    i: usize,
    h: f64,
    levels: u32,
) -> C64
where
    F: Fn(&ChartPoint) -> C64,
{
    let dx = richardson(|h| central_first(f, p, 2 * i, h), h, levels);
    let dy = richardson(|h| central_first(f, p, 2 * i + 1, h), h, levels);
    0.5 * (dx + C64::i() * dy)
}

/// Mixed second derivative d^2/dz^i dzbar^j by finite differences.
pub(crate) fn fd_wirtinger_second<F>(
    f: &F,
    p: &ChartPoint,
    i: usize,
    j: usize,
    h: f64,
    levels: u32,
) -> C64
where
    F: Fn(&ChartPoint) -> C64,
{
    if i == j {
        // The imaginary cross terms cancel exactly for matching indices.
        let dxx = richardson(|h| central_second_same(f, p, 2 * i, h), h, levels);
        let dyy = richardson(|h| central_second_same(f, p, 2 * i + 1, h), h, levels);
        0.25 * (dxx + dyy)
    } else {
        let dxx = richardson(|h| central_second_cross(f, p, 2 * i, 2 * j, h), h, levels);
        let dyy = richardson(
            |h| central_second_cross(f, p, 2 * i + 1, 2 * j + 1, h),
            h,
            levels,
        );
        let dxy = richardson(
            |h| central_second_cross(f, p, 2 * i, 2 * j + 1, h),
            h,
            levels,
        );
        let dyx = richardson(
            |h| central_second_cross(f, p, 2 * i + 1, 2 * j, h),
            h,
            levels,
        );
        0.25 * ((dxx + dyy) + C64::i() * (dxy - dyx))
    }
}

// ---------------------------------------------------------------------------
// Scalar-field operations.
// ---------------------------------------------------------------------------

fn want_analytic(scheme: Scheme, available: bool) -> Result<bool> {
    match scheme {
        Scheme::Auto => Ok(available),
        Scheme::Analytic => {
            if available {
                Ok(true)
            } else {
                Err(GeomError::MissingAnalyticDerivatives)
            }
        }
        Scheme::CentralDifference => Ok(false),
    }
}

/// `df/dz^i` at `p`.
pub fn wirtinger_first(
    field: &ScalarField,
    p: &ChartPoint,
    i: usize,
    spec: &DerivativeSpec,
) -> Result<C64> {
    field.check_point(p)?;
    if i >= field.dim {
        return Err(GeomError::InvalidParameter(format!(
            "derivative index {i} out of range for dimension {}",
            field.dim
        )));
    }
    if want_analytic(spec.scheme, field.grad_z.is_some())? {
        return Ok(field.grad_z.as_ref().unwrap()(p, i));
    }
    let h = spec.effective_step(p)?;
    Ok(fd_wirtinger_first(
        &|q: &ChartPoint| field.eval(q),
        p,
        i,
        h,
        spec.richardson_levels,
    ))
}

/// `df/dzbar^i` at `p`.
pub fn wirtinger_first_conj(
    field: &ScalarField,
    p: &ChartPoint,
    i: usize,
    spec: &DerivativeSpec,
) -> Result<C64> {
    field.check_point(p)?;
    if want_analytic(spec.scheme, field.grad_zbar.is_some())? {
        return Ok(field.grad_zbar.as_ref().unwrap()(p, i));
    }
    let h = spec.effective_step(p)?;
    Ok(fd_wirtinger_first_conj(
        &|q: &ChartPoint| field.eval(q),
        p,
        i,
        h,
        spec.richardson_levels,
    ))
}

/// Mixed second derivative `d^2 f / dz^i dzbar^j` at `p`.
///
/// Preference order under `Auto`/`Analytic`: analytic Hessian, then a single
/// central-difference level applied to the analytic first derivative, then
/// direct second-order stencils on the field values.
pub fn wirtinger_second(
    field: &ScalarField,
    p: &ChartPoint,
    i: usize,
    j: usize,
    spec: &DerivativeSpec,
) -> Result<C64> {
    field.check_point(p)?;
    if i >= field.dim || j >= field.dim {
        return Err(GeomError::InvalidParameter(format!(
            "derivative indices ({i},{j}) out of range for dimension {}",
            field.dim
        )));
    }
    match spec.scheme {
        Scheme::Analytic | Scheme::Auto => {
            if let Some(h2) = &field.hess_mixed {
                return Ok(h2(p, i, j));
            }
            if let Some(g) = &field.grad_z {
                let h = spec.effective_step(p)?;
                let g = Arc::clone(g);
                return Ok(fd_wirtinger_first_conj(
                    &move |q: &ChartPoint| g(q, i),
                    p,
                    j,
                    h,
                    spec.richardson_levels,
                ));
            }
            if spec.scheme == Scheme::Analytic {
                return Err(GeomError::MissingAnalyticDerivatives);
            }
        }
        Scheme::CentralDifference => {}
    }
    let h = spec.effective_step(p)?;
    Ok(fd_wirtinger_second(
        &|q: &ChartPoint| field.eval(q),
        p,
        i,
        j,
        h,
        spec.richardson_levels,
    ))
}

/// Max absolute difference between the field's analytic derivatives and the
/// central-difference estimates at `p`. Gates curvature computations.
pub fn derivative_self_check(
    field: &ScalarField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<f64> {
    field.check_point(p)?;
    if field.grad_z.is_none() && field.hess_mixed.is_none() {
        return Err(GeomError::MissingAnalyticDerivatives);
    }
    let fd = DerivativeSpec {
        scheme: Scheme::CentralDifference,
        ..*spec
    };
    let mut worst = 0.0f64;
    if let Some(g) = &field.grad_z {
        for i in 0..field.dim {
            let d = (g(p, i) - wirtinger_first(field, p, i, &fd)?).norm();
            worst = worst.max(d);
        }
    }
    if let Some(h2) = &field.hess_mixed {
        for i in 0..field.dim {
            for j in 0..field.dim {
                let d = (h2(p, i, j) - wirtinger_second(field, p, i, j, &fd)?).norm();
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Matrix-field operations.
// ---------------------------------------------------------------------------

/// `dG/dz^i` of a matrix field.
pub fn matrix_first(
    field: &MatrixField,
    p: &ChartPoint,
    i: usize,
    spec: &DerivativeSpec,
) -> Result<CMatrix> {
    field.check_point(p)?;
    if want_analytic(spec.scheme, field.d1.is_some())? {
        return Ok(field.d1.as_ref().unwrap()(p, i));
    }
    let h = spec.effective_step(p)?;
    let f = |q: &ChartPoint| field.eval(q);
    let lv = spec.richardson_levels;
    let dx = richardson(|h| central_first(&f, p, 2 * i, h), h, lv);
    let dy = richardson(|h| central_first(&f, p, 2 * i + 1, h), h, lv);
    Ok((dx - dy * C64::i()) * C64::new(0.5, 0.0))
}

/// Mixed second derivative `d^2 G / dz^i dzbar^j` of a matrix field.
pub fn matrix_second(
    field: &MatrixField,
    p: &ChartPoint,
    i: usize,
    j: usize,
    spec: &DerivativeSpec,
) -> Result<CMatrix> {
    field.check_point(p)?;
    match spec.scheme {
        Scheme::Analytic | Scheme::Auto => {
            if let Some(d2) = &field.d2 {
                return Ok(d2(p, i, j));
            }
            if let Some(d1) = &field.d1 {
                // Central dzbar^j difference of the analytic dz^i derivative.
                let h = spec.effective_step(p)?;
                let f = |q: &ChartPoint| d1(q, i);
                let lv = spec.richardson_levels;
                let dx = richardson(|h| central_first(&f, p, 2 * j, h), h, lv);
                let dy = richardson(|h| central_first(&f, p, 2 * j + 1, h), h, lv);
                return Ok((dx + dy * C64::i()) * C64::new(0.5, 0.0));
            }
            if spec.scheme == Scheme::Analytic {
                return Err(GeomError::MissingAnalyticDerivatives);
            }
        }
        Scheme::CentralDifference => {}
    }
    let h = spec.effective_step(p)?;
    let f = |q: &ChartPoint| field.eval(q);
    let lv = spec.richardson_levels;
    if i == j {
        let dxx = richardson(|h| central_second_same(&f, p, 2 * i, h), h, lv);
        let dyy = richardson(|h| central_second_same(&f, p, 2 * i + 1, h), h, lv);
        Ok((dxx + dyy) * C64::new(0.25, 0.0))
    } else {
        let dxx = richardson(|h| central_second_cross(&f, p, 2 * i, 2 * j, h), h, lv);
        let dyy = richardson(
            |h| central_second_cross(&f, p, 2 * i + 1, 2 * j + 1, h),
            h,
            lv,
        );
        let dxy = richardson(
            |h| central_second_cross(&f, p, 2 * i, 2 * j + 1, h),
            h,
            lv,
        );
        let dyx = richardson(
            |h| central_second_cross(&f, p, 2 * i + 1, 2 * j, h),
            h,
            lv,
        );
        Ok(((dxx + dyy) + (dxy - dyx) * C64::i()) * C64::new(0.25, 0.0))
    }
}

/// Max absolute difference between analytic and central-difference
/// derivatives of a matrix field at `p`.
pub fn matrix_derivative_self_check(
    field: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<f64> {
    field.check_point(p)?;
    if field.d1.is_none() && field.d2.is_none() {
        return Err(GeomError::MissingAnalyticDerivatives);
    }
    let fd = DerivativeSpec {
        scheme: Scheme::CentralDifference,
        ..*spec
    };
    let mut worst = 0.0f64;
    if let Some(d1) = &field.d1 {
        for i in 0..field.dim {
            let diff = d1(p, i) - matrix_first(field, p, i, &fd)?;
            worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    if let Some(d2) = &field.d2 {
        for i in 0..field.dim {
            for j in 0..field.dim {
                let diff = d2(p, i, j) - matrix_second(field, p, i, j, &fd)?;
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec_fd() -> DerivativeSpec {
        DerivativeSpec::central(1e-4, 1)
    }

    #[test]
    fn abs_square_first_derivative_is_conjugate() {
        let f = ScalarField::new(1, |p| p.coords()[0] * p.coords()[0].conj());
        let p = ChartPoint::new(vec![c(0.7, -0.3)]).unwrap();
        let d = wirtinger_first(&f, &p, 0, &spec_fd()).unwrap();
        assert!((d - p.coords()[0].conj()).norm() < 1e-10);
    }

    #[test]
    fn real_part_first_derivative_is_half() {
        let f = ScalarField::new(1, |p| c(p.coords()[0].re, 0.0));
        let p = ChartPoint::new(vec![c(0.2, 0.9)]).unwrap();
        let d = wirtinger_first(&f, &p, 0, &spec_fd()).unwrap();
        assert!((d - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fubini_study_density_second_derivative_at_origin() {
        // (1 + |z|^2)^(-2) has mixed second derivative -2 at the origin.
        let f = ScalarField::new(1, |p| {
            let t = p.coords()[0].norm_sqr();
            c((1.0 + t).powi(-2), 0.0)
        });
        let p = ChartPoint::origin(1);
        let d = wirtinger_second(&f, &p, 0, 0, &spec_fd()).unwrap();
        assert!((d - c(-2.0, 0.0)).norm() < 1e-9, "got {d}");
    }

    #[test]
    fn second_derivatives_of_constant_vanish() {
        let f = ScalarField::new(2, |_| c(3.25, -1.5));
        let p = ChartPoint::new(vec![c(0.3, 0.1), c(-0.2, 0.5)]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = wirtinger_second(&f, &p, i, j, &spec_fd()).unwrap();
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn abs_square_mixed_hessian_is_kronecker() {
        let f = ScalarField::new(2, |p| p.coords()[0] * p.coords()[0].conj());
        let p = ChartPoint::new(vec![c(0.4, 0.2), c(-0.1, 0.7)]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                let d = wirtinger_second(&f, &p, i, j, &spec_fd()).unwrap();
                assert!((d - c(want, 0.0)).norm() < 1e-9, "({i},{j}) -> {d}");
            }
        }
    }

    #[test]
    fn log_one_plus_abs_square_hessian_at_origin() {
        let f = ScalarField::new(1, |p| c((1.0 + p.coords()[0].norm_sqr()).ln(), 0.0));
        let d = wirtinger_second(&f, &ChartPoint::origin(1), 0, 0, &spec_fd()).unwrap();
        assert!((d - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn conjugation_symmetry_of_first_derivatives() {
        // d/dz conj(f) == conj(d/dzbar f) for a non-holomorphic sample field.
        let f = ScalarField::new(1, |p| {
            let z = p.coords()[0];
            z * z * z.conj() + c(0.3, 0.0) * z.conj() * z.conj()
        });
        let fc = ScalarField::new(1, |p| {
            let z = p.coords()[0];
            (z * z * z.conj() + c(0.3, 0.0) * z.conj() * z.conj()).conj()
        });
        let p = ChartPoint::new(vec![c(0.5, -0.4)]).unwrap();
        let lhs = wirtinger_first(&fc, &p, 0, &spec_fd()).unwrap();
        let rhs = wirtinger_first_conj(&f, &p, 0, &spec_fd()).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn mixed_hessian_of_real_field_is_hermitian() {
        let f = ScalarField::new(2, |p| {
            let z1 = p.coords()[0];
            let z2 = p.coords()[1];
            let v = (z1 * z2.conj()).re + 0.5 * z1.norm_sqr() * z2.norm_sqr();
            c(v, 0.0)
        });
        let p = ChartPoint::new(vec![c(0.3, 0.6), c(-0.2, 0.1)]).unwrap();
        let mut h = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = wirtinger_second(&f, &p, i, j, &spec_fd()).unwrap();
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[i][j] - h[j][i].conj()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn central_differences_converge_at_expected_order() {
        // f = cos(x) e^y as a real field with analytic Wirtinger derivative
        // 1/2 (-sin(x) - i cos(x)) e^y.
        let f = ScalarField::new(1, |p| {
            let z = p.coords()[0];
            c(z.re.cos() * z.im.exp(), 0.0)
        });
        let p = ChartPoint::new(vec![c(0.37, 0.21)]).unwrap();
        let exact = {
            let z = p.coords()[0];
            c(-z.re.sin(), -z.re.cos()) * z.im.exp() * 0.5
        };
        let err = |step: f64, lv: u32| {
            let spec = DerivativeSpec::central(step, lv);
            (wirtinger_first(&f, &p, 0, &spec).unwrap() - exact).norm()
        };
        // Plain central differences: order two.
        let r_plain = err(1e-2, 0) / err(5e-3, 0);
        assert!(r_plain > 3.5, "plain ratio {r_plain}");
        // One Richardson level: order four.
        let r_rich = err(1e-2, 1) / err(5e-3, 1);
        assert!(r_rich > 13.0, "richardson ratio {r_rich}");
    }

    #[test]
    fn self_check_flags_wrong_analytic_gradient() {
        let good = ScalarField::new(1, |p| p.coords()[0] * p.coords()[0].conj())
            .with_grad_z(|p, _| p.coords()[0].conj());
        let bad = ScalarField::new(1, |p| p.coords()[0] * p.coords()[0].conj())
            .with_grad_z(|p, _| 2.0 * p.coords()[0].conj());
        let p = ChartPoint::new(vec![c(0.4, 0.3)]).unwrap();
        assert!(derivative_self_check(&good, &p, &spec_fd()).unwrap() < 1e-10);
        assert!(derivative_self_check(&bad, &p, &spec_fd()).unwrap() > 0.1);
    }

    #[test]
    fn analytic_scheme_requires_derivatives() {
        let f = ScalarField::new(1, |p| p.coords()[0]);
        let p = ChartPoint::origin(1);
        let err = wirtinger_first(&f, &p, 0, &DerivativeSpec::analytic());
        assert!(matches!(err, Err(GeomError::MissingAnalyticDerivatives)));
    }

    #[test]
    fn step_underflow_is_rejected() {
        let f = ScalarField::new(1, |p| p.coords()[0]);
        let p = ChartPoint::origin(1);
        let spec = DerivativeSpec::central(1e-18, 0);
        assert!(matches!(
            wirtinger_first(&f, &p, 0, &spec),
            Err(GeomError::BadStep(_))
        ));
    }
}
