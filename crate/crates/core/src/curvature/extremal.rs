//! Multi-start projected gradient search for the extremal holomorphic
//! sectional curvature over the g-unit sphere at a point.
//!
//! The metric is absorbed by transforming the curvature tensor into a
//! g-orthonormal frame, so the search runs on the Euclidean unit sphere of
//! C^n where `H` is the plain quartic form. Restarts come from a Kronecker
//! low-discrepancy sequence pushed through a Box-Muller map, offset by the
//! seed, which makes the whole search deterministic in `(seed, restarts)`.

use super::{chern_curvature, CurvatureTensor};
use crate::calculus::{ChartPoint, DerivativeSpec, MatrixField};
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::C64;

/// Result of the extremal search.
#[derive(Debug, Clone)]
pub struct ExtremalHsc {
    pub h_max: f64,
    /// g-unit direction attaining `h_max`.
    pub w_max: Vec<C64>,
    pub h_min: f64,
    pub w_min: Vec<C64>,
    /// False when some restart hit the iteration cap before its gradient
    /// dropped below tolerance (reported, not fatal).
    pub converged: bool,
}

const MAX_ITERS: usize = 300;
const GRAD_TOL: f64 = 1e-12;

/// Multi-start ascent/descent of `H` over the unit g-sphere at `p`.
pub fn extremal_hsc(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
    restarts: usize,
    seed: u64,
) -> Result<ExtremalHsc> {
    if restarts == 0 {
        return Err(GeomError::InvalidParameter("restarts must be >= 1".into()));
    }
    let n = metric.dim();
    let r = chern_curvature(metric, p, spec)?;
    let g = metric.eval(p);
    let frame = linalg::unitary_frame(&g)?;
    let rf = r.frame_transform(&frame);

    let starts = kronecker_directions(n, restarts, seed);
    let mut best_max = f64::NEG_INFINITY;
    let mut best_min = f64::INFINITY;
    let mut xi_max = starts[0].clone();
    let mut xi_min = starts[0].clone();
    let mut converged = true;

    for start in &starts {
        let (v, xi, ok) = climb(&rf, start, 1.0);
        // Stationary values within 1e-9 tie-break by first-found.
        if v > best_max + 1e-9 {
            best_max = v;
            xi_max = xi;
        }
        converged &= ok;
        let (v, xi, ok) = climb(&rf, start, -1.0);
        if -v < best_min - 1e-9 {
            best_min = -v;
            xi_min = xi;
        }
        converged &= ok;
    }

    let to_chart = |xi: &[C64]| -> Vec<C64> {
        let mut w = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for a in 0..n {
                w[i] += frame[(i, a)] * xi[a];
            }
        }
        w
    };
    Ok(ExtremalHsc {
        h_max: best_max,
        w_max: to_chart(&xi_max),
        h_min: best_min,
        w_min: to_chart(&xi_min),
        converged,
    })
}

/// Projected gradient ascent of `sign * Q` on the Euclidean unit sphere.
/// Returns `(sign * Q at the end, point, hit_tolerance)`.
fn climb(rf: &CurvatureTensor, start: &[C64], sign: f64) -> (f64, Vec<C64>, bool) {
    let mut xi = start.to_vec();
    normalize(&mut xi);
    let mut q = sign * rf.quartic(&xi).re;
    let scale = rf.max_abs().max(1e-30);
    let mut ok = false;
    for _ in 0..MAX_ITERS {
        let mut grad = quartic_gradient(rf, &xi);
        for gv in grad.iter_mut() {
            *gv *= 2.0 * sign;
        }
        // Project onto the tangent space of the sphere (real inner product).
        let radial: f64 = xi
            .iter()
            .zip(&grad)
            .map(|(x, g)| (*g * x.conj()).re)
            .sum();
        for (gv, x) in grad.iter_mut().zip(&xi) {
            *gv -= *x * radial;
        }
        let gnorm: f64 = grad.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if gnorm <= GRAD_TOL * scale {
            ok = true;
            break;
        }
        // Backtracking step with a sufficient-increase test.
        let mut alpha = 1.0 / scale.max(gnorm);
        let mut advanced = false;
        for _ in 0..50 {
            let mut cand: Vec<C64> = xi
                .iter()
                .zip(&grad)
                .map(|(x, g)| *x + *g * alpha)
                .collect();
            normalize(&mut cand);
            let qc = sign * rf.quartic(&cand).re;
            if qc > q + 1e-4 * alpha * gnorm * gnorm {
                xi = cand;
                q = qc;
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if !advanced {
            // No ascent direction left at this resolution: stationary.
            ok = true;
            break;
        }
    }
    (q, xi, ok)
}

/// Euclidean gradient `dQ/d(conj xi)` of the quartic form.
fn quartic_gradient(rf: &CurvatureTensor, xi: &[C64]) -> Vec<C64> {
    let n = rf.dim();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = rf.get(i, j, k, l);
                    out[j] += r * xi[i] * xi[k] * xi[l].conj();
                    out[l] += r * xi[i] * xi[j].conj() * xi[k];
                }
            }
        }
    }
    out
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    } else {
        v[0] = C64::new(1.0, 0.0);
    }
}

/// Kronecker sequence on [0,1)^{2n} mapped to directions via Box-Muller.
fn kronecker_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    // Square roots of the first primes give independent irrational shifts.
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let alphas: Vec<f64> = (0..2 * n)
        .map(|m| PRIMES[m % PRIMES.len()].sqrt().fract())
        .collect();
    // Deterministic seed offset in [0,1)^{2n}.
    let offsets: Vec<f64> = (0..2 * n)
        .map(|m| {
            let x = seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add((m as u64 + 1).wrapping_mul(0xbf58476d1ce4e5b9));
            (x >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut gauss = Vec::with_capacity(2 * n);
        for t in 0..n {
            let u1 = (offsets[2 * t] + (k as f64 + 0.5) * alphas[2 * t])
                .fract()
                .max(1e-12);
            let u2 = (offsets[2 * t + 1] + (k as f64 + 0.5) * alphas[2 * t + 1]).fract();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            gauss.push(r * theta.cos());
            gauss.push(r * theta.sin());
        }
        let mut dir: Vec<C64> = (0..n).map(|i| C64::new(gauss[2 * i], gauss[2 * i + 1])).collect();
        normalize(&mut dir);
        out.push(dir);
    }
    out
}
