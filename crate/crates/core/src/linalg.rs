//! Small dense linear algebra: complex least squares by Householder QR
//! and a tridiagonal solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Least-squares solution of `A x ~ b` for a tall complex matrix given in
/// row-major order. Columns are scaled to unit norm before factoring; the
/// returned condition number is the ratio of the largest to smallest
/// diagonal entry of `R` in the scaled problem.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    pub residual_norm: f64,
    pub condition: f64,
}

pub fn least_squares(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<LeastSquares> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if m < n || n == 0 {
        return Err(Error::InsufficientData(format!("{m} equations for {n} unknowns")));
    }
    let mut scale = vec![0.0; n];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            scale[j] += v.norm_sqr();
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { 1.0 / s.sqrt() } else { 1.0 };
    }
    let mut a: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().zip(&scale).map(|(v, s)| v * s).collect())
        .collect();
    let mut b = rhs.to_vec();

    for k in 0..n {
        let norm: f64 = (k..m).map(|i| a[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::FitDegeneracy { condition: f64::INFINITY });
        }
        let phase = if a[k][k].norm() > 0.0 { a[k][k] / a[k][k].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * a[k + i][j]).sum();
            for (i, vi) in v.iter().enumerate() {
                a[k + i][j] -= 2.0 * vi * dot;
            }
        }
        let dot: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * b[k + i]).sum();
        for (i, vi) in v.iter().enumerate() {
            b[k + i] -= 2.0 * vi * dot;
        }
    }

    let diag: Vec<f64> = (0..n).map(|k| a[k][k].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e13 {
        return Err(Error::FitDegeneracy { condition });
    }

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    let residual_norm = b[n..].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for (xj, s) in x.iter_mut().zip(&scale) {
        *xj *= s;
    }
    Ok(LeastSquares {
        solution: x,
        residual_norm,
        condition,
    })
}

/// Solves a tridiagonal system (Thomas algorithm, no pivoting).
/// `lower[i]` couples row `i` to `i-1`, `upper[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { Complex64::new(0.0, 0.0) };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
