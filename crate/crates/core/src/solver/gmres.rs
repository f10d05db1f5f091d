//! Restarted GMRES for complex sparse systems.

use num_complex::Complex64;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Target for `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    pub restart: usize,
    /// Budget of Arnoldi steps over all cycles.
    pub max_iters: usize,
    /// Right preconditioning with the inverse diagonal.
    pub jacobi: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-10,
            restart: 50,
            max_iters: 10_000,
            jacobi: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub solution: Vec<Complex64>,
    pub iters: usize,
    /// Final relative residual, computed from the true residual vector.
    pub residual: f64,
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, b: &[Complex64], x: &[Complex64], r: &mut [Complex64]) {
    a.matvec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` starting from `x0`.
pub fn gmres(a: &CsrMatrix, b: &[Complex64], x0: &[Complex64], opts: &GmresOptions) -> Result<GmresOutcome> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if b.len() != n { b.len() } else { x0.len() },
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if !bnorm.is_finite() {
        return Err(Error::KrylovNonConvergence {
            iters: 0,
            residual: f64::NAN,
        });
    }
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            solution: vec![zero; n],
            iters: 0,
            residual: 0.0,
        });
    }
    let m = opts.restart.max(1).min(n.max(1));
    let inv_diag: Option<Vec<Complex64>> = opts
        .jacobi
        .then(|| a.diagonal().iter().map(|d| if d.norm() > 0.0 { d.inv() } else { Complex64::new(1.0, 0.0) }).collect());

    let mut x = x0.to_vec();
    let mut r = vec![zero; n];
    let mut w = vec![zero; n];
    let mut z = vec![zero; n];
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    // Column-major Hessenberg, column j has j + 2 entries.
    let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![zero; m];
    let mut g = vec![zero; m + 1];
    let mut total = 0;

    loop {
        residual(a, b, &x, &mut r);
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok(GmresOutcome {
                solution: x,
                iters: total,
                residual: rel,
            });
        }
        if total >= opts.max_iters || !rel.is_finite() {
            return Err(Error::KrylovNonConvergence {
                iters: total,
                residual: rel,
            });
        }

        basis.clear();
        hess.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = zero);
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        for j in 0..m {
            let vj = &basis[j];
            match &inv_diag {
                Some(d) => {
                    for ((zi, vi), di) in z.iter_mut().zip(vj).zip(d) {
                        *zi = vi * di;
                    }
                    a.matvec_into(&z, &mut w);
                }
                None => a.matvec_into(vj, &mut w),
            }
            total += 1;
            let mut h = vec![zero; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                let hij = dotc(vi, &w);
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
                h[i] = hij;
            }
            let hnext = norm(&w);
            h[j + 1] = Complex64::new(hnext, 0.0);

            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i].conj() * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            cs[j] = c;
            sn[j] = s;
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];
            hess.push(h);
            k = j + 1;

            let est = g[j + 1].norm() / bnorm;
            if est <= opts.tol || total >= opts.max_iters || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // Back substitution on the rotated (upper triangular) Hessenberg.
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                acc -= hess[jj][i] * yj;
            }
            y[i] = acc / hess[i][i];
        }
        let mut update = vec![zero; n];
        for (yi, vi) in y.iter().zip(&basis) {
            for (u, v) in update.iter_mut().zip(vi) {
                *u += yi * v;
            }
        }
        if let Some(d) = &inv_diag {
            for (u, di) in update.iter_mut().zip(d) {
                *u *= di;
            }
        }
        for (xi, u) in x.iter_mut().zip(&update) {
            *xi += u;
        }
    }
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s)` with
/// `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, (b.conj() / nb));
    }
    let rho = na.hypot(nb);
    let c = na / rho;
    let s = (a / na) * b.conj() / rho;
    (c, s)
}
