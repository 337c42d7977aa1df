//! Pointwise Chern-connection curvature quantities of a Hermitian metric.
//!
//! Conventions, with `G` the matrix `g_{i jbar}` and `G^{-1}` its inverse:
//! the raised metric pairs an unbarred with a barred index through
//! `g^{p qbar} = (G^{-1})_{qp}`, so `g^{i lbar} g_{k lbar} = delta_{ik}`.
//! The curvature tensor is
//!
//! `R_{i jbar k lbar} = - d2 g_{k lbar} / dz^i dzbar^j
//!                      + g^{p qbar} (d g_{k qbar}/dz^i)(d g_{p lbar}/dzbar^j)`
//!
//! and the torsion tensor is
//! `T_ij^k = g^{k lbar} (d g_{j lbar}/dz^i - d g_{i lbar}/dz^j)`.

mod extremal;
mod polarize;

pub use extremal::{extremal_hsc, ExtremalHsc};
pub use polarize::polarize_kahler;

use std::collections::BTreeMap;

use crate::calculus::{
    matrix_first, matrix_second, wirtinger_second, ChartPoint, DerivativeSpec, MatrixField,
    ScalarField, Scheme,
};
use crate::error::{GeomError, Result};
use crate::linalg;
use crate::{C64, CMatrix};

/// Absolute floor used when checking that provably-real quantities came out
/// real; combined with a relative factor on the magnitude.
const IM_TOL: f64 = 1e-10;

fn real_checked(z: C64, what: &'static str) -> Result<f64> {
    let limit = IM_TOL * z.re.abs().max(1.0);
    if z.im.abs() > limit {
        return Err(GeomError::ImaginaryResidue {
            what,
            residue: z.im.abs(),
            limit,
        });
    }
    Ok(z.re)
}

// ---------------------------------------------------------------------------
// Tensor containers.
// ---------------------------------------------------------------------------

/// Rank-4 curvature tensor `R_{i jbar k lbar}` at a point.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    dim: usize,
    data: Vec<C64>,
}

impl CurvatureTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: C64) {
        let at = self.idx(i, j, k, l);
        self.data[at] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `R_{i jbar k lbar} = conj(R_{j ibar l kbar})`.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = (self.get(i, j, k, l) - self.get(j, i, l, k).conj()).norm();
                        worst = worst.max(d);
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of the Kahler symmetries
    /// `R_{i jbar k lbar} = R_{k jbar i lbar} = R_{i lbar k jbar}`.
    pub fn kahler_symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst.max((r - self.get(k, j, i, l)).norm());
                        worst = worst.max((r - self.get(i, l, k, j)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Projection onto the Kahler-symmetric part (group average over the
    /// first/third and second/fourth slot swaps). Used as a test oracle.
    pub fn kahler_symmetrize(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let avg = (self.get(i, j, k, l)
                            + self.get(k, j, i, l)
                            + self.get(i, l, k, j)
                            + self.get(k, l, i, j))
                            * 0.25;
                        out.set(i, j, k, l, avg);
                    }
                }
            }
        }
        out
    }

    /// The quartic form `R(W, Wbar, W, Wbar)`.
    pub fn quartic(&self, w: &[C64]) -> C64 {
        let n = self.dim;
        debug_assert_eq!(w.len(), n);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let wij = w[i] * w[j].conj();
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * wij * w[k] * w[l].conj();
                    }
                }
            }
        }
        acc
    }

    /// Transform into the basis whose columns are given by `frame`:
    /// `R'_{a bbar c dbar} = R_{i jbar k lbar} E_i^a conj(E_j^b) E_k^c conj(E_l^d)`.
    pub fn frame_transform(&self, frame: &CMatrix) -> Self {
        let n = self.dim;
        // Contract one slot at a time.
        let mut cur = self.data.clone();
        let mut next = vec![C64::new(0.0, 0.0); cur.len()];
        for slot in 0..4 {
            for v in next.iter_mut() {
                *v = C64::new(0.0, 0.0);
            }
            // Index layout: (i, j, k, l) row-major.
            let strides = [n * n * n, n * n, n, 1];
            let stride = strides[slot];
            for lin in 0..cur.len() {
                let orig = (lin / stride) % n;
                let base = lin - orig * stride;
                let v = cur[lin];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for a in 0..n {
                    let e = if slot % 2 == 0 {
                        frame[(orig, a)]
                    } else {
                        frame[(orig, a)].conj()
                    };
                    next[base + a * stride] += v * e;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Self { dim: n, data: cur }
    }
}

/// Rank-3 torsion tensor `T_ij^k` at a point, antisymmetric in `(i, j)`.
#[derive(Debug, Clone)]
pub struct TorsionTensor {
    dim: usize,
    data: Vec<C64>,
}

impl TorsionTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `T_ij^k = -T_ji^k`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.get(i, j, k) + self.get(j, i, k)).norm());
                }
            }
        }
        worst
    }

    /// `tau_i = T_{ki}^k` (sum over the paired lower/upper index).
    pub fn contract(&self) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|k| self.get(k, i, k)).sum())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Metric jets: value + derivatives under one derivative policy.
// ---------------------------------------------------------------------------

/// Metric value with first derivatives and the inverse, at one point.
pub struct MetricJetFirst {
    pub g: CMatrix,
    pub ginv: CMatrix,
    pub d1: Vec<CMatrix>,
}

/// Full jet including the mixed second derivatives `d2[i*n + j]`.
pub struct MetricJet {
    pub g: CMatrix,
    pub ginv: CMatrix,
    pub d1: Vec<CMatrix>,
    pub d2: Vec<CMatrix>,
}

pub fn metric_jet_first(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<MetricJetFirst> {
    let n = metric.dim();
    let g = metric.eval(p);
    linalg::check_hpd(&g)?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::NotPositiveDefinite("singular metric".into()))?;
    let d1 = (0..n)
        .map(|i| matrix_first(metric, p, i, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricJetFirst { g, ginv, d1 })
}

pub fn metric_jet(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<MetricJet> {
    let n = metric.dim();
    let MetricJetFirst { g, ginv, d1 } = metric_jet_first(metric, p, spec)?;
    let mut d2 = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            d2.push(matrix_second(metric, p, i, j, spec)?);
        }
    }
    Ok(MetricJet { g, ginv, d1, d2 })
}

// ---------------------------------------------------------------------------
// Pointwise curvature operations.
// ---------------------------------------------------------------------------

/// Full Chern curvature tensor at `p`.
pub fn chern_curvature(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<CurvatureTensor> {
    let jet = metric_jet(metric, p, spec)?;
    Ok(curvature_from_jet(&jet))
}

pub(crate) fn curvature_from_jet(jet: &MetricJet) -> CurvatureTensor {
    let n = jet.g.nrows();
    let mut r = CurvatureTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let d2ij = &jet.d2[i * n + j];
            let di = &jet.d1[i];
            let dj = &jet.d1[j];
            for k in 0..n {
                for l in 0..n {
                    let mut second = C64::new(0.0, 0.0);
                    for pp in 0..n {
                        for q in 0..n {
                            // g^{p qbar} dg_{k qbar}/dz^i dg_{p lbar}/dzbar^j
                            second += jet.ginv[(q, pp)] * di[(k, q)] * dj[(l, pp)].conj();
                        }
                    }
                    r.set(i, j, k, l, -d2ij[(k, l)] + second);
                }
            }
        }
    }
    r
}

/// Which contraction produces the Chern-Ricci form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicciMethod {
    /// `R_{i jbar} = g^{k lbar} R_{i jbar k lbar}`.
    Trace,
    /// `R_{i jbar} = - d^2 log det g / dz^i dzbar^j`.
    LogDet,
}

/// Chern-Ricci form by either route.
pub fn chern_ricci(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
    method: RicciMethod,
) -> Result<CMatrix> {
    match method {
        RicciMethod::Trace => {
            let jet = metric_jet(metric, p, spec)?;
            Ok(ricci_from_jet(&jet, &curvature_from_jet(&jet)))
        }
        RicciMethod::LogDet => ricci_logdet(metric, p, spec),
    }
}

pub(crate) fn ricci_from_jet(jet: &MetricJet, r: &CurvatureTensor) -> CMatrix {
    let n = jet.g.nrows();
    let mut ric = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    acc += jet.ginv[(l, k)] * r.get(i, j, k, l);
                }
            }
            ric[(i, j)] = acc;
        }
    }
    ric
}

fn ricci_logdet(metric: &MatrixField, p: &ChartPoint, spec: &DerivativeSpec) -> Result<CMatrix> {
    let n = metric.dim();
    let m = metric.clone();
    let log_det = ScalarField::new(n, move |q: &ChartPoint| {
        let g = m.eval(q);
        C64::new(g.determinant().re.max(f64::MIN_POSITIVE).ln(), 0.0)
    });
    // With analytic metric first derivatives, Jacobi's formula gives the
    // holomorphic gradient of log det analytically; the remaining dzbar
    // level is one central difference.
    let log_det = if metric.has_d1() && spec.scheme != Scheme::CentralDifference {
        let m = metric.clone();
        log_det.with_grad_z_real(move |q: &ChartPoint, i: usize| {
            let g = m.eval(q);
            let ginv = g.try_inverse().expect("metric invertible");
            let d1 = m.d1_analytic(q, i).expect("analytic d1");
            (ginv * d1).trace()
        })
    } else {
        log_det
    };
    let mut ric = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            ric[(i, j)] = -wirtinger_second(&log_det, p, i, j, spec)?;
        }
    }
    Ok(ric)
}

/// The two Chern scalar curvatures `(s, s_hat)`:
/// `s = g^{i jbar} R_{i jbar}` and `s_hat = g^{i lbar} g^{k jbar} R_{i jbar k lbar}`.
pub fn scalar_curvatures(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<(f64, f64)> {
    let jet = metric_jet(metric, p, spec)?;
    let r = curvature_from_jet(&jet);
    scalars_from_jet(&jet, &r)
}

pub(crate) fn scalars_from_jet(jet: &MetricJet, r: &CurvatureTensor) -> Result<(f64, f64)> {
    let n = jet.g.nrows();
    let ric = ricci_from_jet(jet, r);
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += jet.ginv[(j, i)] * ric[(i, j)];
        }
    }
    let mut s_hat = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // g^{i lbar} g^{k jbar} R_{i jbar k lbar}
                    s_hat += jet.ginv[(l, i)] * jet.ginv[(j, k)] * r.get(i, j, k, l);
                }
            }
        }
    }
    Ok((
        real_checked(s, "Chern scalar curvature s")?,
        real_checked(s_hat, "second scalar curvature s_hat")?,
    ))
}

/// Torsion tensor `T_ij^k` at `p`.
pub fn torsion(metric: &MatrixField, p: &ChartPoint, spec: &DerivativeSpec) -> Result<TorsionTensor> {
    let jet = metric_jet_first(metric, p, spec)?;
    Ok(torsion_from_jet(&jet))
}

pub(crate) fn torsion_from_jet(jet: &MetricJetFirst) -> TorsionTensor {
    let n = jet.g.nrows();
    let mut data = vec![C64::new(0.0, 0.0); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..n {
                    acc += jet.ginv[(l, k)] * (jet.d1[i][(j, l)] - jet.d1[j][(i, l)]);
                }
                data[(i * n + j) * n + k] = acc;
            }
        }
    }
    TorsionTensor { dim: n, data }
}

/// Contracted torsion `tau_i = T_{ki}^k` as a vector.
pub fn contracted_torsion(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<Vec<C64>> {
    Ok(torsion(metric, p, spec)?.contract())
}

/// Coefficients of `dz^i` in the codifferential of the metric form:
/// `dbar* omega = -sqrt(-1) T_{ki}^k dz^i`.
pub fn dbar_star_omega(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<Vec<C64>> {
    let tau = contracted_torsion(metric, p, spec)?;
    Ok(tau.into_iter().map(|t| -C64::i() * t).collect())
}

/// Matrix `d tau_i / dzbar^j` of the contracted torsion.
///
/// With analytic metric derivatives this is assembled in closed form from the
/// jet; otherwise the contracted torsion is differentiated by central
/// differences.
pub fn contracted_torsion_dbar(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<CMatrix> {
    let n = metric.dim();
    let analytic = metric.has_d1() && spec.scheme != Scheme::CentralDifference;
    if analytic {
        let jet = metric_jet(metric, p, spec)?;
        return Ok(contracted_torsion_dbar_from_jet(&jet));
    }
    // Finite differences over the contracted-torsion vector field.
    let fd_spec = DerivativeSpec {
        scheme: Scheme::CentralDifference,
        ..*spec
    };
    let step = fd_spec.effective_step(p)?;
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let tau_i = |q: &ChartPoint| -> C64 {
            let jet = metric_jet_first(metric, q, &fd_spec).expect("metric jet");
            torsion_from_jet(&jet).contract()[i]
        };
        for j in 0..n {
            out[(i, j)] = crate::calculus::fd_wirtinger_first_conj(
                &tau_i,
                p,
                j,
                step,
                fd_spec.richardson_levels,
            );
        }
    }
    Ok(out)
}

pub(crate) fn contracted_torsion_dbar_from_jet(jet: &MetricJet) -> CMatrix {
    let n = jet.g.nrows();
    // d/dzbar^j tau_i with tau_i = (G^{-1})_{lk} (d_k g_{i lbar} - d_i g_{k lbar}).
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        // d/dzbar^j G = (d/dz^j G)^H, and d/dzbar^j G^{-1} = -G^{-1} (d_jbar G) G^{-1}.
        let djbar_g = jet.d1[j].adjoint();
        let djbar_ginv = -(&jet.ginv * &djbar_g * &jet.ginv);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    let bracket = jet.d1[k][(i, l)] - jet.d1[i][(k, l)];
                    // d2[k*n + j] = d_k dbar_j G, entry (i, l) = dbar_j d_k g_{i lbar}
                    let dbracket = jet.d2[k * n + j][(i, l)] - jet.d2[i * n + j][(k, l)];
                    acc += djbar_ginv[(l, k)] * bracket + jet.ginv[(l, k)] * dbracket;
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Residual of the pointwise relation between the two scalar curvatures and
/// the torsion term: `|s - s_hat - Re<inner>| + |Im<inner>|` with
/// `inner = g^{i jbar} d T_{ki}^k / dzbar^j`.
pub fn identity_s_hat(metric: &MatrixField, p: &ChartPoint, spec: &DerivativeSpec) -> Result<f64> {
    let jet = metric_jet(metric, p, spec)?;
    let r = curvature_from_jet(&jet);
    let (s, s_hat) = scalars_from_jet(&jet, &r)?;
    let dtau = contracted_torsion_dbar(metric, p, spec)?;
    let n = metric.dim();
    let mut inner = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            inner += jet.ginv[(j, i)] * dtau[(i, j)];
        }
    }
    Ok((s - s_hat - inner.re).abs() + inner.im.abs())
}

/// Holomorphic sectional curvature `H(W) = R(W,Wbar,W,Wbar) / |W|_g^4`.
pub fn hsc(metric: &MatrixField, p: &ChartPoint, w: &[C64], spec: &DerivativeSpec) -> Result<f64> {
    let r = chern_curvature(metric, p, spec)?;
    let g = metric.eval(p);
    hsc_from_tensor(&r, &g, w)
}

/// Same as [`hsc`], reusing a tensor and metric computed once at the point.
pub fn hsc_from_tensor(r: &CurvatureTensor, g: &CMatrix, w: &[C64]) -> Result<f64> {
    let norm_sq = linalg::g_norm_sq(g, w)?;
    if norm_sq <= 0.0 || w.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(GeomError::ZeroVector);
    }
    let q = r.quartic(w);
    let h = q / (norm_sq * norm_sq);
    real_checked(h, "holomorphic sectional curvature")
}

/// All pointwise quantities bundled, with named self-consistency residuals.
#[derive(Debug, Clone)]
pub struct CurvaturePointReport {
    pub point: Vec<C64>,
    pub metric: CMatrix,
    pub ricci: CMatrix,
    pub ricci_logdet: CMatrix,
    pub s: f64,
    pub s_hat: f64,
    pub torsion_max: f64,
    pub dbar_star_form: Vec<C64>,
    pub identity_residuals: BTreeMap<String, f64>,
}

/// Computes the standard per-point report used by verification suites.
pub fn point_report(
    metric: &MatrixField,
    p: &ChartPoint,
    spec: &DerivativeSpec,
) -> Result<CurvaturePointReport> {
    let jet = metric_jet(metric, p, spec)?;
    let r = curvature_from_jet(&jet);
    let ricci = ricci_from_jet(&jet, &r);
    let ricci_logdet = ricci_logdet(metric, p, spec)?;
    let (s, s_hat) = scalars_from_jet(&jet, &r)?;
    let tors = torsion_from_jet(&MetricJetFirst {
        g: jet.g.clone(),
        ginv: jet.ginv.clone(),
        d1: jet.d1.clone(),
    });
    let tau = tors.contract();
    let dbar_star: Vec<C64> = tau.iter().map(|t| -C64::i() * *t).collect();
    let dbar_direct = dbar_star_omega(metric, p, spec)?;
    let assembly = dbar_star
        .iter()
        .zip(&dbar_direct)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);

    let mut residuals = BTreeMap::new();
    residuals.insert(
        "conjugate_symmetry".into(),
        r.conjugate_symmetry_residual(),
    );
    residuals.insert(
        "torsion_antisymmetry".into(),
        tors.antisymmetry_residual(),
    );
    residuals.insert(
        "ricci_route_agreement".into(),
        (&ricci - &ricci_logdet)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    );
    residuals.insert(
        "ricci_hermitian".into(),
        linalg::hermitian_residual(&ricci),
    );
    residuals.insert(
        "scalar_difference_identity".into(),
        identity_s_hat(metric, p, spec)?,
    );
    residuals.insert("codifferential_assembly".into(), assembly);
    // s must equal the trace of g^{-1} ricci (same contraction, recomputed).
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..jet.g.nrows() {
        for j in 0..jet.g.nrows() {
            tr += jet.ginv[(j, i)] * ricci[(i, j)];
        }
    }
    residuals.insert("scalar_trace_consistency".into(), (tr.re - s).abs());

    Ok(CurvaturePointReport {
        point: p.coords().to_vec(),
        metric: jet.g,
        ricci,
        ricci_logdet,
        s,
        s_hat,
        torsion_max: tors.max_abs(),
        dbar_star_form: dbar_star,
        identity_residuals: residuals,
    })
}

/// A sampled holomorphic sectional curvature value, with the g-unit
/// direction it was evaluated on.
#[derive(Debug, Clone)]
pub struct HscSample {
    pub direction: Vec<C64>,
    pub value: f64,
}
