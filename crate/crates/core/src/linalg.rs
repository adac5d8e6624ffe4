//! Small dense kernels on flat row-major storage.
//!
//! Blocks in the solvers are at most a few dozen rows wide, so these avoid
//! per-node heap traffic that a general matrix type would bring.

use crate::error::{Error, Result};

/// Solves `a * x = b` in place for `ncols` right-hand sides stored row-major
/// in `b` (shape `n x ncols`). `a` is overwritten with its LU factors.
pub(crate) fn lu_solve_in_place(a: &mut [f64], n: usize, b: &mut [f64], ncols: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * ncols);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::invalid("singular block in dense solve"));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            for c in 0..ncols {
                b.swap(k * ncols + c, piv * ncols + c);
            }
        }
        let diag = a[k * n + k];
        for r in (k + 1)..n {
            let factor = a[r * n + k] / diag;
            if factor == 0.0 {
                continue;
            }
            a[r * n + k] = factor;
            for c in (k + 1)..n {
                a[r * n + c] -= factor * a[k * n + c];
            }
            for c in 0..ncols {
                b[r * ncols + c] -= factor * b[k * ncols + c];
            }
        }
    }
    for k in (0..n).rev() {
        let diag = a[k * n + k];
        for c in 0..ncols {
            let mut s = b[k * ncols + c];
            for j in (k + 1)..n {
                s -= a[k * n + j] * b[j * ncols + c];
            }
            b[k * ncols + c] = s / diag;
        }
    }
    Ok(())
}

/// `y = m * x` for a square row-major `m`.
pub(crate) fn mat_vec(m: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for r in 0..n {
        y[r] = m[r * n..(r + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// `c = a * b` for square row-major matrices.
pub(crate) fn mat_mul(a: &[f64], b: &[f64], n: usize, c: &mut [f64]) {
    for r in 0..n {
        for col in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[r * n + k] * b[k * n + col];
            }
            c[r * n + col] = s;
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Thomas algorithm for a general tridiagonal system.
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (entry 0 ignored), `upper[i]`
/// multiplies `x[i+1]` (last entry ignored).
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::invalid("tridiagonal band lengths differ"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::invalid("zero pivot in tridiagonal solve"));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::invalid("zero pivot in tridiagonal solve"));
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0];
        let mut b = vec![4.0, 3.0];
        lu_solve_in_place(&mut a, 2, &mut b, 1).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert!((b[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lu_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 1.0];
        assert!(lu_solve_in_place(&mut a, 2, &mut b, 1).is_err());
    }

    #[test]
    fn thomas_matches_dense() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let rhs = [1.0, 0.0, 0.0, 1.0];
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
