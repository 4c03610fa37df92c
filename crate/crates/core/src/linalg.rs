//! Dense complex kernels: cyclic Jacobi for Hermitian matrices and a
//! one-sided Jacobi SVD.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;

pub const EIG_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;
const SVD_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not self-adjoint (relative residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic complex Jacobi. Requires ‖a − a*‖_F ≤ 1e-10·‖a‖_F.
pub fn hermitian_eig(a: &CMat) -> Result<HermitianEig, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::NotSquare { rows: n, cols: a.ncols() });
    }
    let scale = frobenius(a);
    let skew = frobenius(&(a - a.adjoint()));
    if skew > 1e-10 * scale {
        return Err(LinalgError::NotSelfAdjoint { residual: skew / scale.max(f64::MIN_POSITIVE) });
    }
    let mut m = (a + a.adjoint()).scale(0.5);
    let mut v = CMat::identity(n, n);
    if scale == 0.0 {
        return Ok(HermitianEig { values: vec![0.0; n], vectors: v });
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= EIG_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m[(p, q)];
                let abs = g.norm();
                if abs == 0.0 {
                    continue;
                }
                let e = g / abs;
                let ec = e.conj();
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * abs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = akp * c - akq * ec * s;
                    m[(k, q)] = akp * s + akq * ec * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = apk * c - aqk * e * s;
                    m[(q, k)] = apk * s + aqk * e * c;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * ec * s;
                    v[(k, q)] = vkp * s + vkq * ec * c;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    normalize_phases(&mut vectors, None);
    Ok(HermitianEig { values, vectors })
}

/// Make the largest-magnitude entry of each column of `v` real positive,
/// applying the same phase to the matching column of `u`.
fn normalize_phases(v: &mut CMat, mut u: Option<&mut CMat>) {
    for j in 0..v.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..v.nrows() {
            let a = v[(i, j)].norm();
            // Prefer the first index among near-ties so the choice is stable.
            if a > best_abs * (1.0 + 1e-12) {
                best_abs = a;
                best = i;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let phase = (v[(best, j)] / best_abs).conj();
        for i in 0..v.nrows() {
            v[(i, j)] *= phase;
        }
        if let Some(u) = u.as_deref_mut() {
            for i in 0..u.nrows() {
                u[(i, j)] *= phase;
            }
        }
    }
}

/// a = u · diag(s) · v*, singular values descending. `u` is m×k and `v` is
/// n×k with k = min(m, n); columns of `u` for zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// One-sided Hestenes Jacobi SVD.
pub fn svd(a: &CMat) -> Result<Svd, LinalgError> {
    if a.nrows() < a.ncols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u }).map(|mut r| {
            // Re-fix phases on the right frame after swapping roles.
            normalize_phases(&mut r.v, Some(&mut r.u));
            r
        });
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    let mut norms: Vec<f64> = (0..n).map(|j| w.column(j).norm_squared()).collect();
    // Columns below this squared norm are round-off and no longer rotated.
    let floor = (f64::EPSILON * frobenius(a)).powi(2) * m as f64;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let mut gamma = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    gamma += w[(k, i)].conj() * w[(k, j)];
                }
                let abs = gamma.norm();
                if abs <= SVD_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / abs;
                let ec = e.conj();
                let zeta = (beta - alpha) / (2.0 * abs);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (wi, wj) = (w[(k, i)], w[(k, j)]);
                    w[(k, i)] = wi * c - wj * ec * s;
                    w[(k, j)] = wi * s + wj * ec * c;
                }
                for k in 0..n {
                    let (vi, vj) = (v[(k, i)], v[(k, j)]);
                    v[(k, i)] = vi * c - vj * ec * s;
                    v[(k, j)] = vi * s + vj * ec * c;
                }
                norms[i] = w.column(i).norm_squared();
                norms[j] = w.column(j).norm_squared();
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let sig: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]).then(i.cmp(&j)));
    let mut u = CMat::zeros(m, n);
    let mut vv = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sj = sig[src];
        s.push(sj);
        if sj > 0.0 {
            u.set_column(dst, &w.column(src).unscale(sj));
        }
        vv.set_column(dst, &v.column(src));
    }
    normalize_phases(&mut vv, Some(&mut u));
    Ok(Svd { u, s, v: vv })
}

/// Singular values only, descending.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>, LinalgError> {
    Ok(svd(a)?.s)
}

/// Orthonormal basis of the null space of `a` (as columns), using the
/// relative threshold σ ≤ rel_tol·σ_max.
pub fn null_space(a: &CMat, rel_tol: f64) -> Result<(CMat, Vec<f64>), LinalgError> {
    let n = a.ncols();
    // Pad to a tall matrix so every right singular vector is produced.
    let tall = if a.nrows() >= n {
        a.clone()
    } else {
        let mut t = CMat::zeros(n, n);
        t.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        t
    };
    let d = svd(&tall)?;
    let smax = d.s.first().copied().unwrap_or(0.0);
    let idx: Vec<usize> = (0..n).filter(|&j| d.s[j] <= rel_tol * smax || smax == 0.0).collect();
    let mut basis = CMat::zeros(n, idx.len());
    for (c, &j) in idx.iter().enumerate() {
        basis.set_column(c, &d.v.column(j));
    }
    Ok((basis, d.s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(n: usize, m: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, m, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let a = random(n, n, seed);
        (&a + a.adjoint()).scale(0.5)
    }

    #[test]
    fn identity_and_pauli() {
        let e = hermitian_eig(&CMat::identity(3, 3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = hermitian_eig(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(hermitian_eig(&x), Err(LinalgError::NotSelfAdjoint { .. })));
    }

    #[test]
    fn eigen_residuals() {
        for seed in 0..20 {
            let a = random_hermitian(9, seed);
            let e = hermitian_eig(&a).unwrap();
            let scale = frobenius(&a);
            for (k, &lam) in e.values.iter().enumerate() {
                let v = e.vectors.column(k);
                let r = (&a * v - v * c(lam, 0.0)).norm();
                assert!(r <= 1e-10 * scale, "residual {r}");
            }
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!(frobenius(&(gram - CMat::identity(9, 9))) < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_reconstructs() {
        for (seed, (m, n)) in [(5, 5), (7, 3), (3, 7), (6, 6)].iter().enumerate() {
            let a = random(*m, *n, seed as u64 + 100);
            let d = svd(&a).unwrap();
            let k = d.s.len();
            let mut r = CMat::zeros(*m, *n);
            for j in 0..k {
                r += d.u.column(j) * d.v.column(j).adjoint() * c(d.s[j], 0.0);
            }
            assert!(frobenius(&(&a - r)) < 1e-12 * frobenius(&a));
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_detects_exact_rank() {
        // Rank 2 product of thin factors: trailing singular values must sit
        // far below the 1e-9 relative threshold.
        let a = random(8, 2, 7) * random(2, 8, 8);
        let s = singular_values(&a).unwrap();
        assert!(s[1] > 1e-3 * s[0]);
        assert!(s[2] < 1e-13 * s[0], "{:?}", s);
        let (ns, _) = null_space(&a, 1e-9).unwrap();
        assert_eq!(ns.ncols(), 6);
        assert!(frobenius(&(&a * &ns)) < 1e-12 * frobenius(&a));
    }

    #[test]
    fn phase_convention() {
        let a = random(5, 5, 42);
        let d = svd(&a).unwrap();
        for j in 0..5 {
            let col = d.v.column(j);
            let (imax, _) = col.iter().enumerate().fold((0, -1.0), |acc, (i, z)| {
                if z.norm() > acc.1 * (1.0 + 1e-12) {
                    (i, z.norm())
                } else {
                    acc
                }
            });
            assert!(col[imax].im.abs() < 1e-15 && col[imax].re > 0.0);
        }
    }
}
