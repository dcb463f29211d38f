//! Small dense linear-algebra routines used by the kernel regularisation
//! path and measurement-error mitigation: a Jacobi eigensolver for symmetric
//! matrices, Gauss-Jordan inversion, and Euclidean projection onto the
//! probability simplex. Matrices are row-major `Vec<T>` slabs.

use crate::scalar::{real, Real};

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns the eigenvalues in ascending order. Only the lower/upper symmetric
/// part is assumed consistent; the input is copied.
pub(crate) fn symmetric_eigenvalues<T: Real>(matrix: &[T], n: usize) -> Vec<T> {
    assert_eq!(matrix.len(), n * n, "matrix must be n*n");
    let mut a: Vec<T> = matrix.to_vec();
    if n <= 1 {
        return a;
    }
    let tol: T = real(1e-14);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        let scale: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= tol * tol * (scale + T::one()) {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (real::<T>(2.0) * apq);
                // Stable rotation: t = sign(theta) / (|theta| + sqrt(theta^2 + 1)).
                let t = if theta >= T::zero() {
                    T::one() / (theta + (theta * theta + T::one()).sqrt())
                } else {
                    -T::one() / (-theta + (theta * theta + T::one()).sqrt())
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
            }
        }
    }
    let mut eigs: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when a pivot underflows (singular matrix).
pub(crate) fn invert<T: Real>(matrix: &[T], n: usize) -> Option<Vec<T>> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        let pivot_value = a[pivot * n + col];
        if pivot_value.abs() < real(1e-300) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let scale = T::one() / a[col * n + col];
        for k in 0..n {
            a[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col];
            if factor == T::zero() {
                continue;
            }
            for k in 0..n {
                let acol = a[col * n + k];
                let icol = inv[col * n + k];
                a[row * n + k] -= factor * acol;
                inv[row * n + k] -= factor * icol;
            }
        }
    }
    Some(inv)
}

/// 1-norm (maximum absolute column sum).
pub(crate) fn norm_1<T: Real>(matrix: &[T], n: usize) -> T {
    let mut best = T::zero();
    for col in 0..n {
        let sum: T = (0..n).map(|row| matrix[row * n + col].abs()).sum();
        if sum > best {
            best = sum;
        }
    }
    best
}

/// Infinity-norm (maximum absolute row sum).
pub(crate) fn norm_inf<T: Real>(matrix: &[T], n: usize) -> T {
    let mut best = T::zero();
    for row in 0..n {
        let sum: T = (0..n).map(|col| matrix[row * n + col].abs()).sum();
        if sum > best {
            best = sum;
        }
    }
    best
}

pub(crate) fn matvec<T: Real>(matrix: &[T], n_rows: usize, n_cols: usize, v: &[T]) -> Vec<T> {
    assert_eq!(v.len(), n_cols);
    (0..n_rows)
        .map(|row| {
            (0..n_cols)
                .map(|col| matrix[row * n_cols + col] * v[col])
                .sum()
        })
        .collect()
}

/// Euclidean projection of `v` onto the probability simplex
/// {p : p >= 0, sum(p) = 1}, via the sort-and-threshold construction.
pub(crate) fn project_to_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = T::zero();
    let mut threshold = T::zero();
    let mut found = false;
    for (k, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - T::one()) / T::from_usize(k + 1).unwrap();
        if value - candidate > T::zero() {
            threshold = candidate;
        } else {
            found = true;
            break;
        }
        if k + 1 == n {
            found = true;
        }
    }
    debug_assert!(found || n == 0);
    v.iter()
        .map(|&x| {
            let shifted = x - threshold;
            if shifted > T::zero() {
                shifted
            } else {
                T::zero()
            }
        })
        .collect()
}
