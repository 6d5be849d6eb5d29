//! Linear solvers for the frozen-coefficient implicit step.

use crate::error::{Error, Result};

/// Thomas elimination for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
/// Needs a diagonally dominant system, which the implicit step guarantees.
pub fn tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Symmetric positive definite operator given as diagonal plus neighbour
/// couplings `(column, weight)`, meaning `(A x)_i = diag_i x_i − Σ w x_col`.
pub struct SpdStencil {
    pub diag: Vec<f64>,
    pub offdiag: Vec<Vec<(usize, f64)>>,
}

impl SpdStencil {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = self.diag[i] * x[i];
            for (j, w) in &self.offdiag[i] {
                s -= w * x[*j];
            }
            *o = s;
        }
    }

    fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.apply(x, &mut ax);
        ax.iter().zip(b).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Jacobi-preconditioned conjugate gradients, starting from `x`, until
/// `‖b − A x‖∞ ≤ tol · max(1, ‖b‖∞)`.
pub fn conjugate_gradient(a: &SpdStencil, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = b.len();
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let target = tol * scale;
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&a.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rmax <= target {
            // recursive residuals drift; confirm against the true one
            if a.residual_inf(x, b) <= target {
                return Ok(it);
            }
        }
        a.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / a.diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = a.residual_inf(x, b);
    if residual <= target {
        return Ok(max_iter);
    }
    Err(Error::LinearSolve {
        iterations: max_iter,
        residual,
    })
}
