//! Small dense solvers for the normal equations that show up in KernelSHAP
//! and the LIME surrogate.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Solves `A x = b` for symmetric positive (semi)definite `A` (row-major,
/// `n × n`) by Cholesky. Fails with [`Error::Singular`] when a pivot
/// collapses relative to the diagonal scale.
pub fn solve_spd(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if n > 0 && scale == 0.0 {
        return Err(Error::Singular);
    }
    let tol = scale * 1e-13;
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= tol {
                    return Err(Error::Singular);
                }
                l[i * n + i] = crate::math::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[4, 2], [2, 3]] x = [2, 1]  =>  x = [0.5, 0]
        let x = solve_spd(&[4.0, 2.0, 2.0, 3.0], &[2.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-14);
        assert!(x[1].abs() < 1e-14);
    }

    #[test]
    fn rejects_singular() {
        assert_eq!(solve_spd(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0]), Err(Error::Singular));
    }
}
