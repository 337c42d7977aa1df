//! Small dense complex-matrix helpers for Hermitian metric blocks.

use nalgebra::Cholesky;

use crate::error::{GeomError, Result};
use crate::{C64, CMatrix};

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Checks that `m` is Hermitian (to roundoff scale) and positive definite.
pub fn check_hpd(m: &CMatrix) -> Result<()> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    let herm = hermitian_residual(m);
    if herm > 1e-8 * scale {
        return Err(GeomError::NotPositiveDefinite(format!(
            "Hermitian residual {herm:.3e} at scale {scale:.3e}"
        )));
    }
    if Cholesky::new(m.clone()).is_none() {
        return Err(GeomError::NotPositiveDefinite(
            "Cholesky factorization failed".into(),
        ));
    }
    Ok(())
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn inverse_hpd(m: &CMatrix) -> Result<CMatrix> {
    check_hpd(m)?;
    m.clone()
        .try_inverse()
        .ok_or_else(|| GeomError::NotPositiveDefinite("singular metric".into()))
}

/// `log det` of a Hermitian positive-definite matrix, as a real number.
pub fn log_det_hpd(m: &CMatrix) -> Result<f64> {
    let det = m.determinant();
    if !(det.re > 0.0) || det.im.abs() > 1e-10 * det.re.abs().max(1.0) {
        return Err(GeomError::NotPositiveDefinite(format!(
            "determinant {det} not positive real"
        )));
    }
    Ok(det.re.ln())
}

/// Real determinant of a Hermitian matrix (imaginary part checked and dropped).
pub fn det_hermitian(m: &CMatrix) -> Result<f64> {
    let det = m.determinant();
    if det.im.abs() > 1e-9 * det.re.abs().max(1.0) {
        return Err(GeomError::ImaginaryResidue {
            what: "determinant of Hermitian matrix",
            residue: det.im.abs(),
            limit: 1e-9 * det.re.abs().max(1.0),
        });
    }
    Ok(det.re)
}

/// Columns form a basis `e_a` of C^n that is orthonormal for the Hermitian
/// metric `g`: `sum_{ij} g_ij e_a^i conj(e_b^j) = delta_ab`.
///
/// Built from the Cholesky factor `g = L L^H` as `E = conj((L^H)^{-1})`, so a
/// Euclidean-unit vector `xi` maps to the g-unit vector `W = E xi`.
pub fn unitary_frame(g: &CMatrix) -> Result<CMatrix> {
    let chol = Cholesky::new(g.clone())
        .ok_or_else(|| GeomError::NotPositiveDefinite("Cholesky failed in frame".into()))?;
    let lh = chol.l().adjoint();
    let lh_inv = lh
        .try_inverse()
        .ok_or_else(|| GeomError::NotPositiveDefinite("singular Cholesky factor".into()))?;
    Ok(lh_inv.map(|z| z.conj()))
}

/// Squared g-norm `sum_{ij} g_ij w^i conj(w^j)` of a tangent vector.
pub fn g_norm_sq(g: &CMatrix, w: &[C64]) -> Result<f64> {
    let n = g.nrows();
    if w.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * w[i] * w[j].conj();
        }
    }
    if acc.im.abs() > 1e-10 * acc.re.abs().max(1.0) {
        return Err(GeomError::ImaginaryResidue {
            what: "squared g-norm",
            residue: acc.im.abs(),
            limit: 1e-10 * acc.re.abs().max(1.0),
        });
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn frame_orthonormalizes_metric() {
        let g = dmatrix![
            c(2.0, 0.0), c(0.3, 0.4);
            c(0.3, -0.4), c(1.5, 0.0);
        ];
        check_hpd(&g).unwrap();
        let e = unitary_frame(&g).unwrap();
        // E^T G conj(E) must be the identity.
        let gram = e.transpose() * &g * e.map(|z| z.conj());
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - c(want, 0.0)).norm() < 1e-12,
                    "gram {:?}",
                    gram
                );
            }
        }
        // A Euclidean-unit vector maps to a g-unit vector.
        let xi = [c(0.6, 0.0), c(0.0, 0.8)];
        let mut w = [c(0.0, 0.0); 2];
        for i in 0..2 {
            for a in 0..2 {
                w[i] += e[(i, a)] * xi[a];
            }
        }
        assert!((g_norm_sq(&g, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hpd_check_rejects_indefinite() {
        let m = dmatrix![c(1.0, 0.0), c(3.0, 0.0); c(3.0, 0.0), c(1.0, 0.0)];
        assert!(check_hpd(&m).is_err());
    }

    #[test]
    fn log_det_matches_product_of_eigenvalues() {
        let g = dmatrix![c(4.0, 0.0), c(0.0, 0.0); c(0.0, 0.0), c(0.25, 0.0)];
        assert!((log_det_hpd(&g).unwrap() - 0.0).abs() < 1e-14);
    }
}
