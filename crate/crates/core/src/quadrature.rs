//! Numerical integration: product-trapezoid quadrature on torus fundamental
//! cells (spectrally accurate for smooth periodic integrands) and Monte
//! Carlo averages over the unit sphere of C^n.
//!
//! Volume convention: integrals of top forms on the torus are evaluated as
//! `det(g) x Lebesgue measure`, normalized so the flat unit torus has volume
//! one. Every verified identity uses the same convention on both sides, so
//! the omitted combinatorial constants cancel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calculus::{ChartPoint, DerivativeSpec, MatrixField, ScalarField};
use crate::curvature::{chern_curvature, hsc_from_tensor, HscSample};
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::manifolds::TorusDomain;
use crate::C64;

/// Fixed chunk length for parallel grid sweeps; partial sums are merged in
/// chunk order so results do not depend on the number of worker threads.
const CHUNK: usize = 1 << 14;

/// Uniform product-trapezoid rule on a torus fundamental cell.
#[derive(Debug, Clone)]
pub struct GridQuadrature {
    domain: TorusDomain,
}

impl GridQuadrature {
    pub fn new(domain: TorusDomain) -> Self {
        Self { domain }
    }

    pub fn domain(&self) -> &TorusDomain {
        &self.domain
    }

    /// Quadrature weight of a single node (uniform).
    pub fn weight(&self) -> f64 {
        self.domain.cell_volume() / self.domain.total_points() as f64
    }

    /// Integrates several real quantities in one sweep over the grid.
    ///
    /// `f` fills `out` with the integrand values at the node; the returned
    /// vector holds the integrals in the same slots. Chunks run in parallel
    /// and are merged by fixed-order summation.
    pub fn integrate_many<F>(&self, slots: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&ChartPoint, &mut [f64]) -> Result<()> + Sync,
    {
        let total = self.domain.total_points();
        let nchunks = total.div_ceil(CHUNK);
        let partials: Vec<Result<Vec<f64>>> = (0..nchunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(total);
                let mut acc = vec![0.0f64; slots];
                let mut vals = vec![0.0f64; slots];
                for lin in lo..hi {
                    let p = self.domain.point_at(lin);
                    for v in vals.iter_mut() {
                        *v = 0.0;
                    }
                    f(&p, &mut vals)?;
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += *v;
                    }
                }
                Ok(acc)
            })
            .collect();
        let w = self.weight();
        let mut out = vec![0.0f64; slots];
        for part in partials {
            let part = part?;
            for (o, p) in out.iter_mut().zip(&part) {
                *o += p;
            }
        }
        for o in out.iter_mut() {
            *o *= w;
        }
        Ok(out)
    }

    /// Integral of a single real-valued integrand.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&ChartPoint) -> Result<f64> + Sync,
    {
        Ok(self.integrate_many(1, |p, out| {
            out[0] = f(p)?;
            Ok(())
        })?[0])
    }
}

/// Integral of a periodic scalar field over the fundamental cell.
///
/// The imaginary part is accumulated alongside and must stay below
/// roundoff scale.
pub fn torus_integral(f: &ScalarField, q: &GridQuadrature) -> Result<f64> {
    let parts = q.integrate_many(2, |p, out| {
        let v = f.eval(p);
        out[0] = v.re;
        out[1] = v.im;
        Ok(())
    })?;
    if parts[1].abs() > 1e-10 * parts[0].abs().max(1.0) {
        return Err(GeomError::ImaginaryResidue {
            what: "torus integral",
            residue: parts[1].abs(),
            limit: 1e-10 * parts[0].abs().max(1.0),
        });
    }
    Ok(parts[0])
}

/// Integral plus a grid-doubling refinement check.
///
/// Returns `(value, |value - refined value|, too_coarse)` where the flag is
/// set when doubling every axis count changes the result by more than `tol`.
pub fn torus_integral_checked(
    f: &ScalarField,
    q: &GridQuadrature,
    tol: f64,
) -> Result<(f64, f64, bool)> {
    let coarse = torus_integral(f, q)?;
    let fine = torus_integral(f, &GridQuadrature::new(q.domain().refined(2)?))?;
    let delta = (coarse - fine).abs();
    Ok((coarse, delta, delta > tol))
}

/// Deterministic uniform sampler on the unit sphere of C^n
/// (normalized standard complex Gaussians, hence exactly unitarily
/// invariant in distribution).
#[derive(Debug, Clone)]
pub struct SphereSampler {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
}

impl SphereSampler {
    pub fn new(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(GeomError::InvalidParameter(
                "sphere sampler needs dim >= 1 and count >= 1".into(),
            ));
        }
        Ok(Self { dim, count, seed })
    }

    /// Streams the directions into a visitor.
    pub fn for_each<F: FnMut(&[C64])>(&self, mut visit: F) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut dir = vec![C64::new(0.0, 0.0); self.dim];
        for _ in 0..self.count {
            let mut norm_sq = 0.0;
            for z in dir.iter_mut() {
                *z = C64::new(standard_normal(&mut rng), standard_normal(&mut rng));
                norm_sq += z.norm_sqr();
            }
            let inv = 1.0 / norm_sq.sqrt().max(1e-300);
            for z in dir.iter_mut() {
                *z *= inv;
            }
            visit(&dir);
        }
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Monte Carlo estimate of the sphere average of
/// `xi^i conj(xi^j) xi^k conj(xi^l)`, whose exact value is
/// `(delta_ij delta_kl + delta_il delta_kj) / (n (n+1))`.
///
/// Returns the estimate and the standard error of the mean.
pub fn sphere_quartic_moment(
    dim: usize,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    sampler: &SphereSampler,
) -> Result<(C64, f64)> {
    if [i, j, k, l].iter().any(|&a| a >= dim) {
        return Err(GeomError::InvalidParameter(
            "moment index out of range".into(),
        ));
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut sum_sq = 0.0f64;
    sampler.for_each(|xi| {
        let m = xi[i] * xi[j].conj() * xi[k] * xi[l].conj();
        sum += m;
        sum_sq += m.norm_sqr();
    });
    let n = sampler.count as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Exact value of the quartic sphere moment.
pub fn sphere_quartic_moment_exact(dim: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let d = |a: usize, b: usize| (a == b) as u64 as f64;
    (d(i, j) * d(k, l) + d(i, l) * d(k, j)) / (dim as f64 * (dim + 1) as f64)
}

/// Monte Carlo average of the holomorphic sectional curvature over the
/// g-unit sphere at `p`, with its standard error.
///
/// Directions are drawn uniformly on the Euclidean sphere and pushed through
/// a g-orthonormal frame at `p`, which realizes the uniform measure on the
/// g-unit sphere; the average equals `(s + s_hat) / (n (n+1))`.
pub fn fs_average_hsc(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
    sampler: &SphereSampler,
) -> Result<(f64, f64)> {
    let r = chern_curvature(metric, p, spec)?;
    let g = metric.eval(p);
    let frame = linalg::unitary_frame(&g)?;
    let n = metric.dim();
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut err: Option<GeomError> = None;
    let mut w = vec![C64::new(0.0, 0.0); n];
    sampler.for_each(|xi| {
        if err.is_some() {
            return;
        }
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = C64::new(0.0, 0.0);
            for (a, x) in xi.iter().enumerate() {
                *wi += frame[(i, a)] * x;
            }
        }
        match hsc_from_tensor(&r, &g, &w) {
            Ok(h) => {
                sum += h;
                sum_sq += h * h;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let count = sampler.count as f64;
    let mean = sum / count;
    let var = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok((mean, (var / count).sqrt()))
}

/// Holomorphic sectional curvature samples over random g-unit directions at
/// one point.
pub fn sample_hsc(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
    sampler: &SphereSampler,
) -> Result<Vec<HscSample>> {
    let r = chern_curvature(metric, p, spec)?;
    let g = metric.eval(p);
    let frame = linalg::unitary_frame(&g)?;
    let n = metric.dim();
    let mut out = Vec::with_capacity(sampler.count);
    let mut err: Option<GeomError> = None;
    sampler.for_each(|xi| {
        if err.is_some() {
            return;
        }
        let mut w = vec![C64::new(0.0, 0.0); n];
        for (i, wi) in w.iter_mut().enumerate() {
            for (a, x) in xi.iter().enumerate() {
                *wi += frame[(i, a)] * x;
            }
        }
        match hsc_from_tensor(&r, &g, &w) {
            Ok(value) => out.push(HscSample {
                direction: w,
                value,
            }),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrates_to_cell_volume() {
        let q = GridQuadrature::new(TorusDomain::unit(2, 8).unwrap());
        let f = ScalarField::real(2, |_| 1.0);
        assert!((torus_integral(&f, &q).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_harmonic_integrates_to_zero() {
        let q = GridQuadrature::new(TorusDomain::unit(2, 8).unwrap());
        let f = ScalarField::real(2, |p| (2.0 * std::f64::consts::PI * p.coords()[0].re).cos());
        assert!(torus_integral(&f, &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn smooth_periodic_integrand_matches_fine_grid_reference() {
        // f = exp(0.3 cos(2 pi x)), reference from a 10x finer grid per axis
        // and the Bessel series sum_k (0.15)^{2k} / (k!)^2 as an independent
        // value.
        let f = ScalarField::real(2, |p| {
            (0.3 * (2.0 * std::f64::consts::PI * p.coords()[0].re).cos()).exp()
        });
        let coarse = GridQuadrature::new(TorusDomain::unit(2, 8).unwrap());
        let fine = GridQuadrature::new(TorusDomain::unit(2, 80).unwrap());
        let a = torus_integral(&f, &coarse).unwrap();
        let b = torus_integral(&f, &fine).unwrap();
        assert!((a - b).abs() < 1e-10, "coarse {a} vs fine {b}");

        let mut bessel = 0.0f64;
        let mut term = 1.0f64;
        for k in 0..25u32 {
            if k > 0 {
                term *= (0.15 / k as f64).powi(2);
            }
            bessel += term;
        }
        assert!((a - bessel).abs() < 1e-10, "quadrature {a} vs series {bessel}");
    }

    #[test]
    fn trig_polynomials_below_nyquist_are_exact() {
        let q = GridQuadrature::new(TorusDomain::unit(1, 8).unwrap());
        // degree-3 trig polynomial with known mean 0.75
        let f = ScalarField::real(1, |p| {
            let tau = 2.0 * std::f64::consts::PI;
            let x = p.coords()[0].re;
            let y = p.coords()[0].im;
            0.75 + 0.3 * (tau * x).cos() + 0.2 * (3.0 * tau * y).sin()
                - 0.1 * (2.0 * tau * x).cos() * (tau * y).sin()
        });
        assert!((torus_integral(&f, &q).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn refinement_check_flags_coarse_grids() {
        let rough = ScalarField::real(1, |p| {
            (20.0 * std::f64::consts::PI * p.coords()[0].re).cos().powi(2)
        });
        let q = GridQuadrature::new(TorusDomain::unit(1, 10).unwrap());
        // 10 points per axis alias the cos^2(10 pi x) wave badly.
        let (_, delta, flagged) = torus_integral_checked(&rough, &q, 1e-6).unwrap();
        assert!(flagged, "delta {delta}");
    }

    #[test]
    fn sphere_moments_match_exact_values() {
        let sampler = SphereSampler::new(2, 40_000, 5).unwrap();
        for (idx, exact) in [
            ((0usize, 0usize, 1usize, 1usize), 1.0 / 6.0),
            ((0, 0, 0, 0), 1.0 / 3.0),
            ((0, 1, 0, 0), 0.0),
        ] {
            let (est, se) = sphere_quartic_moment(2, idx.0, idx.1, idx.2, idx.3, &sampler).unwrap();
            let want = sphere_quartic_moment_exact(2, idx.0, idx.1, idx.2, idx.3);
            assert!((want - exact).abs() < 1e-15);
            let dev = (est - C64::new(exact, 0.0)).norm();
            assert!(dev <= 3.0 * se.max(1e-12), "moment {idx:?}: dev {dev}, se {se}");
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = SphereSampler::new(2, 5, 42).unwrap();
        let mut a = Vec::new();
        s.for_each(|xi| a.push(xi.to_vec()));
        let mut b = Vec::new();
        s.for_each(|xi| b.push(xi.to_vec()));
        assert_eq!(a, b);
        for xi in &a {
            let norm: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
