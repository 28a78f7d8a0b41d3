//! Thomas algorithm and its cyclic (periodic) variant via the
//! Sherman-Morrison reduction to two plain tridiagonal solves.

use crate::error::{Error, Result};

/// Solves a plain tridiagonal system. `sub[0]` and `sup[n-1]` are ignored so
/// the three bands can share indexing with the cyclic caller.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Size(format!(
            "tridiagonal solve needs equal band lengths, got {}/{}/{}/{}",
            sub.len(),
            n,
            sup.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Internal("tridiagonal pivot vanished".into()));
    }
    d[0] = rhs[0] / beta;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 {
            return Err(Error::Internal("tridiagonal pivot vanished".into()));
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves the cyclic tridiagonal system with wrap entries
/// `A[0][n-1] = sub[0]` and `A[n-1][0] = sup[n-1]`.
pub fn cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::Size(format!(
            "cyclic tridiagonal solve needs n >= 3, got {n}"
        )));
    }
    let alpha = sub[0]; // top-right corner
    let beta = sup[n - 1]; // bottom-left corner
    let gamma = -diag[0];

    let mut diag_mod = diag.to_vec();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= alpha * beta / gamma;

    let x = thomas(sub, &diag_mod, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = beta;
    let z = thomas(sub, &diag_mod, sup, &u)?;

    let fact = (x[0] + alpha * x[n - 1] / gamma) / (1.0 + z[0] + alpha * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}
