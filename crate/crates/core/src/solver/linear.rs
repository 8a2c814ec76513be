//! Newton corrections for the preconditioned system `(I + P⁻¹D) δ = −R_s`,
//! where `D = diag(f'(u) − f'(0))` and `P` is diagonal in Fourier space.

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use super::{preconditioner_symbol, LinearSolver, SolveError, SolverConfig};
use crate::spectral::Grid;

/// Largest grid served by the dense solver under [`LinearSolver::Auto`].
pub(crate) const DIRECT_MAX_N: usize = 2048;

pub(crate) struct Jacobian<'a> {
    grid: &'a Grid,
    inv_symbol: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> Jacobian<'a> {
    /// `diag` holds `f'(u_j) − f'(0)`.
    pub(crate) fn new(grid: &'a Grid, c: f64, fprime0: f64, diag: Vec<f64>) -> Self {
        let symbol = preconditioner_symbol(c, fprime0);
        let inv_symbol = (0..grid.len()).map(|m| 1.0 / symbol(grid.wavenumber(m))).collect();
        Jacobian { grid, inv_symbol, diag }
    }

    fn inv_precondition(&self, v: &[f64]) -> Vec<f64> {
        let mut hat = self.grid.forward(v);
        for (z, s) in hat.iter_mut().zip(&self.inv_symbol) {
            *z *= *s;
        }
        self.grid.inverse_real(hat)
    }

    pub(crate) fn apply(&self, v: &[f64]) -> Vec<f64> {
        let dv: Vec<f64> = v.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        let pv = self.inv_precondition(&dv);
        v.iter().zip(pv).map(|(a, b)| a + b).collect()
    }

    pub(crate) fn solve(&self, rhs: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>, SolveError> {
        let direct = match cfg.linear_solver {
            LinearSolver::Direct => true,
            LinearSolver::Iterative => false,
            LinearSolver::Auto => self.grid.len() <= DIRECT_MAX_N,
        };
        if direct {
            self.solve_dense_even(rhs)
        } else {
            gmres(|v| self.apply(v), rhs, cfg.gmres_tol, cfg.gmres_restart, cfg.gmres_max_iters)
        }
    }

    /// Dense LU on the even subspace, unknowns `x(s_k)` for `s_k = k·h`,
    /// `k = 0 … n/2`. `P⁻¹` is a circulant with kernel `g`, so the entry for
    /// the even basis vector at `±s_l` is `g[k−l] + g[k+l]` (a single term at
    /// `l = 0` and `l = n/2`).
    fn solve_dense_even(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.grid.len();
        let half = n / 2;
        let centre = self.grid.center();
        let kernel = self.grid.inverse_real(self.inv_symbol.iter().map(|&s| Complex64::new(s, 0.0)).collect());
        let g = |i: i64| kernel[i.rem_euclid(n as i64) as usize];
        let m = half + 1;
        let a = DMatrix::from_fn(m, m, |k, l| {
            let (ki, li) = (k as i64, l as i64);
            let d = self.diag[(centre + l) % n];
            let spread = if l == 0 || l == half { g(ki - li) } else { g(ki - li) + g(ki + li) };
            let identity = if k == l { 1.0 } else { 0.0 };
            identity + d * spread
        });
        let b = DVector::from_fn(m, |k, _| 0.5 * (rhs[(centre + k) % n] + rhs[(centre + n - k) % n]));
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| SolveError::LinearSolver("singular Jacobian on the even subspace".into()))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::LinearSolver("dense solve produced non-finite values".into()));
        }
        let mut out = vec![0.0; n];
        for k in 0..=half {
            out[(centre + k) % n] = x[k];
            out[(centre + n - k) % n] = x[k];
        }
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations, from a
/// zero initial guess. Fails unless `‖b − Ax‖ ≤ tol·‖b‖` is reached.
pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iters: usize,
) -> Result<Vec<f64>, SolveError> {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = tol * b_norm;
    let mut total = 0;
    let mut best = f64::INFINITY;
    while total < max_iters {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        best = best.min(beta);
        if beta <= target {
            return Ok(x);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, rotated in place
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![beta];
        let mut k = 0;
        while k < restart && total < max_iters {
            total += 1;
            let mut w = apply(&basis[k]);
            let mut col = Vec::with_capacity(k + 2);
            for q in &basis {
                let hij = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= hij * qi;
                }
                col.push(hij);
            }
            let w_norm = norm(&w);
            col.push(w_norm);
            for i in 0..k {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * bb;
                col[i + 1] = -sn[i] * a + cs[i] * bb;
            }
            let rr = col[k].hypot(col[k + 1]);
            let (c, s) = if rr == 0.0 { (1.0, 0.0) } else { (col[k] / rr, col[k + 1] / rr) };
            col[k] = rr;
            col[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(col);
            k += 1;
            let estimate = g[k].abs();
            if estimate <= target || w_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }
        // back substitution on the k×k triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[j][i] * y[j];
            }
            if h[i][i] == 0.0 {
                return Err(SolveError::LinearSolver("GMRES breakdown with a singular Hessenberg matrix".into()));
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * qi;
            }
        }
    }
    let ax = apply(&x);
    let r_norm = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>());
    if r_norm <= target {
        Ok(x)
    } else {
        Err(SolveError::LinearSolver(format!(
            "GMRES reached {max_iters} iterations at relative residual {:e} (best {:e})",
            r_norm / b_norm,
            best.min(r_norm) / b_norm
        )))
    }
}
