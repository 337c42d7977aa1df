//! Reconstruction of a Kahler-symmetric curvature tensor from its quartic
//! form `Q(W) = R(W, Wbar, W, Wbar)`.
//!
//! For a tensor with the Kahler symmetries
//! `R_{i jbar k lbar} = R_{k jbar i lbar} = R_{i lbar k jbar}` the quartic
//! form determines the tensor. Expanding `Q(Y + nu Z)` over the fourth roots
//! of unity isolates the bisectional slice `B(Y, Z) = R(Y, Ybar, Z, Zbar)`:
//!
//! `B(Y, Z) = 1/16 sum_nu Q(Y + nu Z) - 1/4 (Q(Y) + Q(Z))`
//!
//! and two further root-of-unity polarizations in each argument pair yield
//! every entry. Collapsing the telescoped sums gives the closed form used
//! here, a weighted sum of 64 evaluations per entry:
//!
//! `R_{i jbar k lbar} = 1/256 sum_{lam,mu,nu} lam mu
//!                      Q(e_i + lam e_j + nu e_k + nu mu e_l)`
//!
//! with exact rational/root-of-unity weights, so no least squares is
//! involved.

use super::CurvatureTensor;
use crate::error::{GeomError, Result};
use crate::C64;

const ROOTS: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// Rebuilds the unique Kahler-symmetric tensor whose quartic form matches
/// `quartic`. Errors when the evaluator cannot come from such a tensor.
pub fn polarize_kahler<F>(quartic: F, dim: usize) -> Result<CurvatureTensor>
where
    F: Fn(&[C64]) -> f64,
{
    if dim == 0 {
        return Err(GeomError::InvalidParameter("dimension must be >= 1".into()));
    }
    let mut r = CurvatureTensor::zeros(dim);
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for lam in ROOTS {
                        for mu in ROOTS {
                            for nu in ROOTS {
                                for v in w.iter_mut() {
                                    *v = C64::new(0.0, 0.0);
                                }
                                w[i] += C64::new(1.0, 0.0);
                                w[j] += lam;
                                w[k] += nu;
                                w[l] += nu * mu;
                                acc += lam * mu * quartic(&w);
                            }
                        }
                    }
                    r.set(i, j, k, l, acc / 256.0);
                }
            }
        }
    }
    verify_reconstruction(&quartic, &r)?;
    Ok(r)
}

/// Re-evaluates the reconstructed tensor's quartic form on a deterministic
/// direction set (including rescaled vectors, so degree mismatches like a
/// |W|^6 evaluator are caught) and compares against the input evaluator.
fn verify_reconstruction<F>(quartic: &F, r: &CurvatureTensor) -> Result<()>
where
    F: Fn(&[C64]) -> f64,
{
    let n = r.dim();
    let mut test_set: Vec<Vec<C64>> = Vec::new();
    for a in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[a] = C64::new(1.0, 0.0);
        test_set.push(e.clone());
        e[a] = C64::new(1.7, 0.0);
        test_set.push(e);
        for b in (a + 1)..n {
            for coef in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-0.5, 0.3)] {
                let mut v = vec![C64::new(0.0, 0.0); n];
                v[a] = C64::new(1.0, 0.0);
                v[b] = coef;
                test_set.push(v);
            }
        }
    }
    // A dense, irrational-looking direction touching every component.
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (a, vv) in v.iter_mut().enumerate() {
        let t = (a + 1) as f64;
        *vv = C64::new((1.3 * t).sin() + 0.4, (0.7 * t).cos() * 0.8);
    }
    test_set.push(v);

    let mut scale = r.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for w in &test_set {
        let want = quartic(w);
        let got = r.quartic(w);
        scale = scale.max(want.abs());
        worst = worst.max((got - C64::new(want, 0.0)).norm());
    }
    if worst > 1e-8 * scale {
        return Err(GeomError::InconsistentEvaluator(worst / scale));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_quartic_form_gives_zero_tensor() {
        let r = polarize_kahler(|_| 0.0, 2).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn rejects_non_quartic_evaluator() {
        // |W|^6 is not the quartic form of any rank-4 tensor.
        let res = polarize_kahler(
            |w| w.iter().map(|z| z.norm_sqr()).sum::<f64>().powi(3),
            1,
        );
        assert!(matches!(res, Err(GeomError::InconsistentEvaluator(_))));
    }

    #[test]
    fn round_trips_a_diagonal_constant_curvature_tensor() {
        // R_{i jbar k lbar} = delta_ij delta_kl + delta_il delta_kj has the
        // Kahler symmetries; its quartic form is 2 |W|^4.
        let n = 2;
        let mut r = CurvatureTensor::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = ((i == j && k == l) as u64 + (i == l && k == j) as u64) as f64;
                        r.set(i, j, k, l, C64::new(v, 0.0));
                    }
                }
            }
        }
        let rebuilt = polarize_kahler(|w| r.quartic(w).re, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        assert!(
                            (rebuilt.get(i, j, k, l) - r.get(i, j, k, l)).norm() < 1e-12,
                            "entry ({i},{j},{k},{l})"
                        );
                    }
                }
            }
        }
    }
}
