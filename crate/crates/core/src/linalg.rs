//! Small dense kernels: a cyclic Jacobi eigensolver for real symmetric
//! matrices and the spin-J angular momentum matrices.

use crate::Real;

/// Eigen-decomposition of a real symmetric `n×n` matrix stored row-major.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors, with `vectors[r * n + k]` the `r`-th component of the
/// `k`-th eigenvector.
pub(crate) fn symmetric_eigen<T: Real>(n: usize, matrix: &[T]) -> (Vec<T>, Vec<T>) {
    assert_eq!(matrix.len(), n * n, "matrix must be n×n");
    let mut a = matrix.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }

    let scale: T = a.iter().map(|x| *x * *x).sum::<T>();
    let eps = T::epsilon() * T::epsilon() * scale;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if off <= eps || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = if theta.abs() > T::lit(1e100) {
                    T::one() / (theta + theta)
                } else {
                    let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_k] = v[r * n + old_k];
        }
    }
    (values, vectors)
}

/// `J_x` for spin `J = twice_j / 2` in the `M = −J…+J` basis (row-major).
pub(crate) fn spin_jx<T: Real>(twice_j: u32) -> Vec<T> {
    let n = twice_j as usize + 1;
    let j = T::from_u32(twice_j).unwrap() / T::lit(2.0);
    let mut out = vec![T::zero(); n * n];
    for k in 0..n - 1 {
        // <M+1|J_x|M> = ½ √(J(J+1) − M(M+1))
        let m = T::from_usize_lossy(k) - j;
        let elem = (j * (j + T::one()) - m * (m + T::one())).sqrt() / T::lit(2.0);
        out[(k + 1) * n + k] = elem;
        out[k * n + k + 1] = elem;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, -3.0];
        let (vals, vecs) = symmetric_eigen(3, &m);
        for r in 0..3 {
            for c in 0..3 {
                let rebuilt: f64 = (0..3).map(|k| vecs[r * 3 + k] * vals[k] * vecs[c * 3 + k]).sum();
                assert!((rebuilt - m[r * 3 + c]).abs() < 1e-13);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn jx_spectrum_is_m_values() {
        for twice_j in 1..=6u32 {
            let n = twice_j as usize + 1;
            let (vals, _) = symmetric_eigen(n, &spin_jx::<f64>(twice_j));
            for (k, val) in vals.iter().enumerate() {
                let m = k as f64 - twice_j as f64 / 2.0;
                assert!((val - m).abs() < 1e-13, "2J={twice_j}: {val} vs {m}");
            }
        }
    }
}
