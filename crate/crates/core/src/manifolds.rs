//! Built-in chart metrics and their canonical sampling domains.
//!
//! Every builtin ships the analytic first derivatives of its metric matrix;
//! flat, conformal-torus and Hopf metrics also carry analytic mixed second
//! derivatives. The Fubini-Study second derivatives are left to a central
//! difference of the analytic first derivatives, and potential metrics are
//! evaluated from the potential's mixed Hessian.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{wirtinger_second, ChartPoint, DerivativeSpec, MatrixField, ScalarField};
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::{C64, CMatrix};

/// Lattice periods and tensor-product grid of a real 2n-torus underlying a
/// complex n-torus chart.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDomain {
    dim: usize,
    /// 2n real lattice spans, ordered (Re z^1, Im z^1, Re z^2, ...).
    periods: Vec<f64>,
    /// Per-axis sample counts, same ordering.
    grid: Vec<usize>,
}

impl TorusDomain {
    pub fn new(dim: usize, periods: Vec<f64>, grid: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(GeomError::InvalidParameter("torus dimension >= 1".into()));
        }
        if periods.len() != 2 * dim || grid.len() != 2 * dim {
            return Err(GeomError::InvalidParameter(format!(
                "torus with n={dim} needs {} periods and grid counts",
                2 * dim
            )));
        }
        if periods.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(GeomError::InvalidParameter("periods must be positive".into()));
        }
        if grid.iter().any(|&g| g < 4 || g % 2 != 0) {
            return Err(GeomError::InvalidParameter(
                "grid counts must be even and >= 4".into(),
            ));
        }
        Ok(Self { dim, periods, grid })
    }

    /// Unit lattice with the same point count on every real axis.
    pub fn unit(dim: usize, points_per_axis: usize) -> Result<Self> {
        Self::new(dim, vec![1.0; 2 * dim], vec![points_per_axis; 2 * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axes(&self) -> usize {
        2 * self.dim
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.grid[axis] as f64
    }

    pub fn total_points(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.periods.iter().product()
    }

    /// Same lattice with every axis count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.dim,
            self.periods.clone(),
            self.grid.iter().map(|&g| g * factor).collect(),
        )
    }

    /// Decodes a row-major linear index into a chart point.
    pub fn point_at(&self, mut lin: usize) -> ChartPoint {
        let axes = self.axes();
        let mut reals = vec![0.0f64; axes];
        for a in (0..axes).rev() {
            let n = self.grid[a];
            let idx = lin % n;
            lin /= n;
            reals[a] = idx as f64 * self.spacing(a);
        }
        let coords = (0..self.dim)
            .map(|i| C64::new(reals[2 * i], reals[2 * i + 1]))
            .collect();
        ChartPoint::new(coords).expect("grid point is finite")
    }
}

/// Canonical region used for deterministic test sampling.
#[derive(Debug, Clone)]
pub enum SampleDomain {
    /// Fundamental cell of a torus lattice.
    TorusCell(TorusDomain),
    /// Annulus `r_min <= |z| <= r_max` in C^2 minus the origin.
    HopfAnnulus { r_min: f64, r_max: f64 },
    /// Euclidean ball `|z| < radius` in the chart.
    Ball { radius: f64 },
}

/// Deterministic sampling request.
#[derive(Debug, Clone, Copy)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(GeomError::InvalidParameter("sample count >= 1".into()));
        }
        Ok(Self { count, seed })
    }
}

/// A named chart metric together with its sampling domain.
#[derive(Clone)]
pub struct BuiltinMetric {
    name: String,
    dim: usize,
    domain: SampleDomain,
    field: MatrixField,
}

impl BuiltinMetric {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &SampleDomain {
        &self.domain
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    /// Flat metric `g = I` on a torus.
    pub fn flat_torus(domain: TorusDomain) -> Self {
        let n = domain.dim();
        let field = MatrixField::new(n, move |_p| CMatrix::identity(n, n))
            .with_d1(move |_p, _i| CMatrix::zeros(n, n))
            .with_d2(move |_p, _i, _j| CMatrix::zeros(n, n));
        Self {
            name: "flat-torus".into(),
            dim: n,
            domain: SampleDomain::TorusCell(domain),
            field,
        }
    }

    /// Conformally flat torus metric `g = e^u I` for a real periodic factor.
    pub fn conformal_torus(domain: TorusDomain, u: ScalarField) -> Result<Self> {
        let n = domain.dim();
        if u.dim() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: u.dim(),
            });
        }
        let field = scaled_identity_field(n, u);
        Ok(Self {
            name: "conformal-torus".into(),
            dim: n,
            domain: SampleDomain::TorusCell(domain),
            field,
        })
    }

    /// Default conformal torus used across the test suites:
    /// `u = a cos(2 pi Re z^1) + b sin(2 pi Im z^2)`, `(a, b) = (0.3, 0.2)`.
    pub fn default_conformal_torus(domain: TorusDomain) -> Result<Self> {
        let n = domain.dim();
        let u = trig_conformal_factor(n, 0.3, 0.2);
        Self::conformal_torus(domain, u)
    }

    /// Fubini-Study chart metric on C^n:
    /// `g_{k lbar} = delta_kl / (1+|z|^2) - conj(z^k) z^l / (1+|z|^2)^2`.
    pub fn fubini_study(n: usize) -> Self {
        let eval = move |p: &ChartPoint| -> CMatrix {
            let z = p.coords();
            let u = 1.0 + p.norm().powi(2);
            let mut g = CMatrix::zeros(n, n);
            for k in 0..n {
                for l in 0..n {
                    let mut v = -z[k].conj() * z[l] / (u * u);
                    if k == l {
                        v += C64::new(1.0 / u, 0.0);
                    }
                    g[(k, l)] = v;
                }
            }
            g
        };
        let d1 = move |p: &ChartPoint, i: usize| -> CMatrix {
            let z = p.coords();
            let u = 1.0 + p.norm().powi(2);
            let u2 = u * u;
            let u3 = u2 * u;
            let mut m = CMatrix::zeros(n, n);
            for k in 0..n {
                for l in 0..n {
                    let mut v = z[k].conj() * z[l] * z[i].conj() * (2.0 / u3);
                    if l == i {
                        v -= z[k].conj() / u2;
                    }
                    if k == l {
                        v -= z[i].conj() / u2;
                    }
                    m[(k, l)] = v;
                }
            }
            m
        };
        let field = MatrixField::new(n, eval).with_d1(d1);
        Self {
            name: format!("fubini-study-{n}"),
            dim: n,
            domain: SampleDomain::Ball { radius: 2.0 },
            field,
        }
    }

    /// Standard Hopf-surface metric `g = I / |z|^2` on C^2 minus the origin.
    pub fn hopf_surface() -> Self {
        let n = 2usize;
        let eval = move |p: &ChartPoint| -> CMatrix {
            let w = p.norm().powi(2);
            CMatrix::identity(n, n) * C64::new(1.0 / w, 0.0)
        };
        let d1 = move |p: &ChartPoint, i: usize| -> CMatrix {
            let w = p.norm().powi(2);
            let zi = p.coords()[i];
            CMatrix::identity(n, n) * (-zi.conj() / (w * w))
        };
        let d2 = move |p: &ChartPoint, i: usize, j: usize| -> CMatrix {
            let w = p.norm().powi(2);
            let z = p.coords();
            let mut v = z[i].conj() * z[j] * (2.0 / (w * w * w));
            if i == j {
                v -= C64::new(1.0 / (w * w), 0.0);
            }
            CMatrix::identity(n, n) * v
        };
        Self {
            name: "hopf-surface".into(),
            dim: n,
            domain: SampleDomain::HopfAnnulus {
                r_min: 1.0,
                r_max: 2.0,
            },
            field: MatrixField::new(n, eval).with_d1(d1).with_d2(d2),
        }
    }

    /// Metric induced by a potential: `g = [d^2 phi / dz^k dzbar^l]`.
    /// Positive-definiteness is validated at use points, not globally.
    pub fn potential(n: usize, phi: ScalarField, eval_spec: DerivativeSpec) -> Result<Self> {
        if phi.dim() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: phi.dim(),
            });
        }
        let eval = move |p: &ChartPoint| -> CMatrix {
            let mut g = CMatrix::zeros(n, n);
            for k in 0..n {
                for l in 0..n {
                    g[(k, l)] = wirtinger_second(&phi, p, k, l, &eval_spec)
                        .expect("potential Hessian evaluation");
                }
            }
            g
        };
        Ok(Self {
            name: "potential".into(),
            dim: n,
            domain: SampleDomain::Ball { radius: 0.5 },
            field: MatrixField::new(n, eval),
        })
    }

    /// User-supplied periodic metric on a torus.
    pub fn general_torus(domain: TorusDomain, g: MatrixField) -> Result<Self> {
        if g.dim() != domain.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: domain.dim(),
                got: g.dim(),
            });
        }
        Ok(Self {
            name: "general-torus".into(),
            dim: domain.dim(),
            domain: SampleDomain::TorusCell(domain),
            field: g,
        })
    }

    /// Rebrands a metric (used by conformal composition).
    pub(crate) fn with_parts(name: String, dim: usize, domain: SampleDomain, field: MatrixField) -> Self {
        Self {
            name,
            dim,
            domain,
            field,
        }
    }

    pub fn in_domain(&self, p: &ChartPoint) -> bool {
        match &self.domain {
            SampleDomain::HopfAnnulus { .. } => p.norm() > 1e-150,
            _ => true,
        }
    }

    /// Metric matrix at a point, Hermitian-positive-definite checked.
    pub fn metric_at(&self, p: &ChartPoint) -> Result<CMatrix> {
        if p.dim() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if !self.in_domain(p) {
            return Err(GeomError::OutsideDomain(format!(
                "{} at |z| = {:.3e}",
                self.name,
                p.norm()
            )));
        }
        let g = self.field.eval(p);
        linalg::check_hpd(&g)?;
        Ok(g)
    }

    /// Deterministic pseudo-random points in the canonical test domain.
    pub fn random_points(&self, plan: &SamplePlan) -> Vec<ChartPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let n = self.dim;
        let mut out = Vec::with_capacity(plan.count);
        while out.len() < plan.count {
            let p = match &self.domain {
                SampleDomain::TorusCell(dom) => {
                    let coords = (0..n)
                        .map(|i| {
                            let x = rng.gen::<f64>() * dom.periods()[2 * i];
                            let y = rng.gen::<f64>() * dom.periods()[2 * i + 1];
                            C64::new(x, y)
                        })
                        .collect();
                    ChartPoint::new(coords).unwrap()
                }
                SampleDomain::HopfAnnulus { r_min, r_max } => {
                    // Uniform direction on the unit sphere of C^2, radius
                    // drawn uniformly in [r_min, r_max].
                    let mut v = [0.0f64; 4];
                    for x in v.iter_mut() {
                        *x = gaussian(&mut rng);
                    }
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                    let r = r_min + rng.gen::<f64>() * (r_max - r_min);
                    ChartPoint::new(vec![
                        C64::new(v[0], v[1]) * (r / norm),
                        C64::new(v[2], v[3]) * (r / norm),
                    ])
                    .unwrap()
                }
                SampleDomain::Ball { radius } => {
                    // Rejection sampling from the bounding cube.
                    let coords: Vec<C64> = (0..n)
                        .map(|_| {
                            C64::new(
                                (rng.gen::<f64>() * 2.0 - 1.0) * radius,
                                (rng.gen::<f64>() * 2.0 - 1.0) * radius,
                            )
                        })
                        .collect();
                    let p = ChartPoint::new(coords).unwrap();
                    if p.norm() >= *radius {
                        continue;
                    }
                    p
                }
            };
            out.push(p);
        }
        out
    }

    /// Max over lattice translations of the metric mismatch across the
    /// fundamental-cell boundary; guards quadrature validity.
    ///
    /// `face_samples` points per remaining real axis are checked on each
    /// boundary face.
    pub fn periodicity_check(&self, face_samples: usize) -> Result<f64> {
        let dom = match &self.domain {
            SampleDomain::TorusCell(d) => d.clone(),
            _ => {
                return Err(GeomError::InvalidParameter(
                    "periodicity check applies to torus metrics".into(),
                ))
            }
        };
        let axes = dom.axes();
        let m = face_samples.max(2);
        let mut worst = 0.0f64;
        for a in 0..axes {
            // Enumerate a coarse subgrid over the other axes.
            let others: Vec<usize> = (0..axes).filter(|&b| b != a).collect();
            let combos = m.pow(others.len() as u32);
            for c in 0..combos {
                let mut reals = vec![0.0f64; axes];
                let mut rem = c;
                for &b in &others {
                    let idx = rem % m;
                    rem /= m;
                    reals[b] = idx as f64 / m as f64 * dom.periods()[b];
                }
                let base = ChartPoint::new(
                    (0..self.dim)
                        .map(|i| C64::new(reals[2 * i], reals[2 * i + 1]))
                        .collect(),
                )
                .unwrap();
                let shifted = base.shifted_real(a, dom.periods()[a]);
                let ga = self.field.eval(&base);
                let gb = self.field.eval(&shifted);
                let diff = (&ga - &gb)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0f64, f64::max);
                worst = worst.max(diff);
            }
        }
        Ok(worst)
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `e^u I` with derivatives composed from the factor's analytic parts.
pub(crate) fn scaled_identity_field(n: usize, u: ScalarField) -> MatrixField {
    let u_eval = u.clone();
    let field = MatrixField::new(n, move |p: &ChartPoint| {
        let s = u_eval.eval(p).re.exp();
        CMatrix::identity(n, n) * C64::new(s, 0.0)
    });
    let field = if u.has_grad_z() {
        let u1 = u.clone();
        let spec = DerivativeSpec::analytic();
        let field = field.with_d1(move |p: &ChartPoint, i: usize| {
            let s = u1.eval(p).re.exp();
            let gi = crate::calculus::wirtinger_first(&u1, p, i, &spec).expect("analytic grad");
            CMatrix::identity(n, n) * (gi * s)
        });
        if u.has_hessian() {
            let u2 = u.clone();
            field.with_d2(move |p: &ChartPoint, i: usize, j: usize| {
                let s = u2.eval(p).re.exp();
                let gi = crate::calculus::wirtinger_first(&u2, p, i, &spec).expect("grad");
                let gjbar = crate::calculus::wirtinger_first_conj(&u2, p, j, &spec).expect("grad");
                let hij = crate::calculus::wirtinger_second(&u2, p, i, j, &spec).expect("hess");
                CMatrix::identity(n, n) * ((hij + gi * gjbar) * s)
            })
        } else {
            field
        }
    } else {
        field
    };
    field
}

/// Real trigonometric conformal factor
/// `u = a cos(2 pi Re z^1) + b sin(2 pi Im z^2)` (falls back to `Im z^1`
/// when n = 1), with analytic gradient and mixed Hessian. Exactly periodic
/// on the unit lattice.
pub fn trig_conformal_factor(n: usize, a: f64, b: f64) -> ScalarField {
    use std::f64::consts::PI;
    let ax2 = if n >= 2 { 1 } else { 0 };
    let tau = 2.0 * PI;
    ScalarField::real(n, move |p: &ChartPoint| {
        a * (tau * p.coords()[0].re).cos() + b * (tau * p.coords()[ax2].im).sin()
    })
    .with_grad_z_real(move |p: &ChartPoint, i: usize| {
        // d/dz = 1/2 (d/dx - i d/dy)
        let mut v = C64::new(0.0, 0.0);
        if i == 0 {
            v += C64::new(-a * PI * (tau * p.coords()[0].re).sin(), 0.0);
        }
        if i == ax2 {
            // -i/2 * b * tau * cos(tau y)
            v += C64::new(0.0, -b * PI * (tau * p.coords()[ax2].im).cos());
        }
        v
    })
    .with_hessian_mixed(move |p: &ChartPoint, i: usize, j: usize| {
        // 1/4 (dxx + dyy) on the diagonal; cross terms vanish.
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let mut v = 0.0;
        if i == 0 {
            v += -a * PI * PI * (tau * p.coords()[0].re).cos();
        }
        if i == ax2 {
            v += -b * PI * PI * (tau * p.coords()[ax2].im).sin();
        }
        C64::new(v, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{matrix_derivative_self_check, derivative_self_check};

    #[test]
    fn flat_torus_is_identity() {
        let m = BuiltinMetric::flat_torus(TorusDomain::unit(2, 8).unwrap());
        let p = ChartPoint::from_re_im(&[(0.3, 0.1), (0.9, 0.4)]).unwrap();
        let g = m.metric_at(&p).unwrap();
        assert_eq!(g, CMatrix::identity(2, 2));
    }

    #[test]
    fn fubini_study_dim1_at_origin_is_one() {
        let m = BuiltinMetric::fubini_study(1);
        let g = m.metric_at(&ChartPoint::origin(1)).unwrap();
        assert!((g[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hopf_at_unit_point_is_identity() {
        let m = BuiltinMetric::hopf_surface();
        let p = ChartPoint::from_re_im(&[(1.0, 0.0), (0.0, 0.0)]).unwrap();
        let g = m.metric_at(&p).unwrap();
        assert!((&g - CMatrix::identity(2, 2)).norm() < 1e-15);
        assert!(m.metric_at(&ChartPoint::origin(2)).is_err());
    }

    #[test]
    fn hopf_scaling_invariance() {
        // g(2z) = g(z) / 4, which makes the annulus a fundamental domain.
        let m = BuiltinMetric::hopf_surface();
        let p = ChartPoint::from_re_im(&[(0.8, -0.3), (0.2, 1.1)]).unwrap();
        let doubled = ChartPoint::new(p.coords().iter().map(|z| z * 2.0).collect()).unwrap();
        let g1 = m.metric_at(&p).unwrap();
        let g2 = m.metric_at(&doubled).unwrap();
        let diff = (&g1 * C64::new(0.25, 0.0) - &g2).norm();
        assert!(diff < 1e-14, "scaling residual {diff}");
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain() {
        let plan = SamplePlan::new(3, 7).unwrap();
        for m in [
            BuiltinMetric::flat_torus(TorusDomain::unit(2, 8).unwrap()),
            BuiltinMetric::hopf_surface(),
            BuiltinMetric::fubini_study(2),
        ] {
            let a = m.random_points(&plan);
            let b = m.random_points(&plan);
            assert_eq!(a, b, "{} sampling must be deterministic", m.name());
            for p in &a {
                match m.domain() {
                    SampleDomain::TorusCell(d) => {
                        for (i, z) in p.coords().iter().enumerate() {
                            assert!(z.re >= 0.0 && z.re < d.periods()[2 * i]);
                            assert!(z.im >= 0.0 && z.im < d.periods()[2 * i + 1]);
                        }
                    }
                    SampleDomain::HopfAnnulus { r_min, r_max } => {
                        assert!(p.norm() >= *r_min - 1e-12 && p.norm() <= *r_max + 1e-12);
                    }
                    SampleDomain::Ball { radius } => assert!(p.norm() < *radius),
                }
            }
        }
    }

    #[test]
    fn builtin_analytic_derivatives_match_finite_differences() {
        let spec = DerivativeSpec::central(1e-4, 2);
        let plan = SamplePlan::new(4, 11).unwrap();
        for m in [
            BuiltinMetric::flat_torus(TorusDomain::unit(2, 8).unwrap()),
            BuiltinMetric::default_conformal_torus(TorusDomain::unit(2, 8).unwrap()).unwrap(),
            BuiltinMetric::hopf_surface(),
            BuiltinMetric::fubini_study(2),
        ] {
            for p in m.random_points(&plan) {
                let res = matrix_derivative_self_check(m.field(), &p, &spec).unwrap();
                let tol = if m.name() == "flat-torus" { 1e-12 } else { 1e-8 };
                assert!(res < tol, "{} residual {res:.3e} at {:?}", m.name(), p);
            }
        }
    }

    #[test]
    fn trig_factor_self_check() {
        let u = trig_conformal_factor(2, 0.3, 0.2);
        let spec = DerivativeSpec::central(1e-4, 2);
        let plan = SamplePlan::new(4, 3).unwrap();
        let m = BuiltinMetric::flat_torus(TorusDomain::unit(2, 8).unwrap());
        for p in m.random_points(&plan) {
            let res = derivative_self_check(&u, &p, &spec).unwrap();
            assert!(res < 1e-8, "residual {res:.3e}");
        }
    }

    #[test]
    fn periodicity_check_flags_aperiodic_factor() {
        let dom = TorusDomain::unit(2, 8).unwrap();
        let periodic = BuiltinMetric::default_conformal_torus(dom.clone()).unwrap();
        assert!(periodic.periodicity_check(3).unwrap() < 1e-12);

        // u = Re z^1 is deliberately aperiodic: the mismatch across the cell
        // is of order |e^1 - e^0|.
        let u = ScalarField::real(2, |p: &ChartPoint| p.coords()[0].re);
        let aperiodic = BuiltinMetric::conformal_torus(dom, u).unwrap();
        let res = aperiodic.periodicity_check(3).unwrap();
        assert!(res > 1.0, "aperiodic residual {res}");
    }

    #[test]
    fn potential_metric_matches_flat_for_abs_square() {
        // phi = |z|^2 induces the identity metric.
        let phi = ScalarField::real(2, |p: &ChartPoint| p.norm().powi(2));
        let m = BuiltinMetric::potential(2, phi, DerivativeSpec::default()).unwrap();
        let p = ChartPoint::from_re_im(&[(0.1, 0.2), (-0.1, 0.05)]).unwrap();
        let g = m.metric_at(&p).unwrap();
        assert!((&g - CMatrix::identity(2, 2)).norm() < 1e-9);
    }
}
