//! Fixed-point engine for chains of coupled nodes.
//!
//! Every discrete problem in the crate reduces to finding `u_1..u_n` with
//!
//! ```text
//! u_i = Φ_i(s_i),   s_i = w⁻_i u_{i-1} + w⁺_i u_{i+1} + e_i,
//! ```
//!
//! where `u_0` and `u_{n+1}` are fixed and each `Φ_i` is a nonexpansive
//! node map (a scaled resolvent). Two drivers are provided: plain symmetric
//! nonlinear Gauss–Seidel, and a semismooth Newton iteration on
//! `u - Φ(s(u)) = 0` that uses generalized derivatives of the node maps and
//! one block-tridiagonal solve per step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub(crate) trait NodeMap: Sync {
    /// `out = Φ_i(z)` for interior node `i` (1-based).
    fn apply(&self, node: usize, z: &[f64], out: &mut [f64]) -> Result<()>;

    /// Row-major generalized derivative of `Φ_i` at `z`.
    fn jacobian(&self, node: usize, z: &[f64], jac: &mut [f64]) -> Result<()>;
}

/// Iteration used for the node equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    /// Forward/backward nonlinear Gauss–Seidel with exact node updates.
    GaussSeidel,
    /// Semismooth Newton on the node fixed-point map, Gauss–Seidel fallback.
    #[default]
    Newton,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ChainOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub method: SweepMethod,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ChainStats {
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) struct Chain<'a> {
    pub d: usize,
    pub n: usize,
    /// Coupling to the left neighbour, entry `k` belongs to node `k + 1`.
    pub w_minus: Vec<f64>,
    pub w_plus: Vec<f64>,
    /// Affine part of the node argument, `n * d` values.
    pub offset: Vec<f64>,
    pub map: &'a dyn NodeMap,
}

impl Chain<'_> {
    fn argument(&self, u: &[f64], node: usize, z: &mut [f64]) {
        let d = self.d;
        let k = node - 1;
        let (wm, wp) = (self.w_minus[k], self.w_plus[k]);
        let left = &u[(node - 1) * d..node * d];
        let right = &u[(node + 1) * d..(node + 2) * d];
        let e = &self.offset[k * d..(k + 1) * d];
        for c in 0..d {
            z[c] = wm * left[c] + wp * right[c] + e[c];
        }
    }

    /// Sup over nodes of `‖u_i − Φ_i(s_i(u))‖`.
    pub fn residual(&self, u: &[f64]) -> Result<f64> {
        Ok(self.residual_norms(u)?.0)
    }

    /// Sup and sum of squares of the node gaps.
    fn residual_norms(&self, u: &[f64]) -> Result<(f64, f64)> {
        let d = self.d;
        let mut z = vec![0.0; d];
        let mut phi = vec![0.0; d];
        let mut worst: f64 = 0.0;
        let mut squares = 0.0;
        for node in 1..=self.n {
            self.argument(u, node, &mut z);
            self.map.apply(node, &z, &mut phi)?;
            let gap = linalg::dist(&phi, &u[node * d..(node + 1) * d]);
            if gap.is_nan() {
                return Ok((f64::NAN, f64::NAN));
            }
            worst = worst.max(gap);
            squares += gap * gap;
        }
        Ok((worst, squares))
    }

    /// One Gauss–Seidel pass; returns the largest node update.
    pub fn sweep(&self, u: &mut [f64], forward: bool) -> Result<f64> {
        let d = self.d;
        let mut z = vec![0.0; d];
        let mut phi = vec![0.0; d];
        let mut worst: f64 = 0.0;
        let mut visit = |node: usize, u: &mut [f64]| -> Result<()> {
            self.argument(u, node, &mut z);
            self.map.apply(node, &z, &mut phi)?;
            let slot = &mut u[node * d..(node + 1) * d];
            worst = worst.max(linalg::dist(&phi, slot));
            slot.copy_from_slice(&phi);
            Ok(())
        };
        if forward {
            for node in 1..=self.n {
                visit(node, u)?;
            }
        } else {
            for node in (1..=self.n).rev() {
                visit(node, u)?;
            }
        }
        Ok(worst)
    }

    /// Applies one semismooth Newton step; returns the sup-norm of the step.
    pub fn newton_step(&self, u: &mut [f64]) -> Result<f64> {
        if self.d == 1 {
            return self.newton_step_scalar(u);
        }
        let d = self.d;
        let n = self.n;
        let dd = d * d;
        let mut cp = vec![0.0; n * dd];
        let mut gp = vec![0.0; n * d];
        let mut z = vec![0.0; d];
        let mut phi = vec![0.0; d];
        let mut jac = vec![0.0; dd];
        let mut pivot = vec![0.0; dd];
        let mut tmp = vec![0.0; dd];
        let mut rhs = vec![0.0; d * (d + 1)];
        let mut dg = vec![0.0; d];
        for node in 1..=n {
            let k = node - 1;
            self.argument(u, node, &mut z);
            self.map.apply(node, &z, &mut phi)?;
            self.map.jacobian(node, &z, &mut jac)?;
            let (wm, wp) = (self.w_minus[k], self.w_plus[k]);
            let ui = &u[node * d..(node + 1) * d];
            // pivot = I + wm * D * Cp_{k-1}
            if k == 0 {
                pivot.iter_mut().for_each(|v| *v = 0.0);
            } else {
                linalg::mat_mul(&jac, &cp[(k - 1) * dd..k * dd], d, &mut tmp);
                for (p, t) in pivot.iter_mut().zip(&tmp) {
                    *p = wm * t;
                }
            }
            for c in 0..d {
                pivot[c * d + c] += 1.0;
            }
            // rhs = [ -wp * D | g + wm * D * gp_{k-1} ]
            if k == 0 {
                dg.iter_mut().for_each(|v| *v = 0.0);
            } else {
                linalg::mat_vec(&jac, d, &gp[(k - 1) * d..k * d], &mut dg);
            }
            for r in 0..d {
                for c in 0..d {
                    rhs[r * (d + 1) + c] = -wp * jac[r * d + c];
                }
                rhs[r * (d + 1) + d] = phi[r] - ui[r] + wm * dg[r];
            }
            linalg::lu_solve_in_place(&mut pivot, d, &mut rhs, d + 1)?;
            for r in 0..d {
                for c in 0..d {
                    cp[k * dd + r * d + c] = rhs[r * (d + 1) + c];
                }
                gp[k * d + r] = rhs[r * (d + 1) + d];
            }
        }
        let mut worst: f64 = 0.0;
        let mut next = vec![0.0; d];
        let mut delta = vec![0.0; d];
        for k in (0..n).rev() {
            if k == n - 1 {
                delta.copy_from_slice(&gp[k * d..(k + 1) * d]);
            } else {
                linalg::mat_vec(&cp[k * dd..(k + 1) * dd], d, &next, &mut delta);
                for r in 0..d {
                    delta[r] = gp[k * d + r] - delta[r];
                }
            }
            let node = k + 1;
            for r in 0..d {
                u[node * d + r] += delta[r];
            }
            worst = worst.max(linalg::norm(&delta));
            next.copy_from_slice(&delta);
        }
        Ok(worst)
    }

    fn newton_step_scalar(&self, u: &mut [f64]) -> Result<f64> {
        let n = self.n;
        let mut cp = vec![0.0; n];
        let mut gp = vec![0.0; n];
        let mut z = [0.0];
        let mut phi = [0.0];
        let mut jac = [0.0];
        for node in 1..=n {
            let k = node - 1;
            self.argument(u, node, &mut z);
            self.map.apply(node, &z, &mut phi)?;
            self.map.jacobian(node, &z, &mut jac)?;
            let (wm, wp) = (self.w_minus[k], self.w_plus[k]);
            let g = phi[0] - u[node];
            let (prev_c, prev_g) = if k == 0 { (0.0, 0.0) } else { (cp[k - 1], gp[k - 1]) };
            let pivot = 1.0 + wm * jac[0] * prev_c;
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::invalid("zero pivot in Newton chain solve"));
            }
            cp[k] = -wp * jac[0] / pivot;
            gp[k] = (g + wm * jac[0] * prev_g) / pivot;
        }
        let mut worst: f64 = 0.0;
        let mut next = 0.0;
        for k in (0..n).rev() {
            let delta = if k == n - 1 { gp[k] } else { gp[k] - cp[k] * next };
            u[k + 1] += delta;
            worst = worst.max(delta.abs());
            next = delta;
        }
        Ok(worst)
    }

    pub fn solve(&self, u: &mut [f64], opts: &ChainOptions) -> Result<ChainStats> {
        debug_assert_eq!(u.len(), (self.n + 2) * self.d);
        match opts.method {
            SweepMethod::GaussSeidel => self.solve_gauss_seidel(u, opts),
            SweepMethod::Newton => self.solve_newton(u, opts),
        }
    }

    fn solve_gauss_seidel(&self, u: &mut [f64], opts: &ChainOptions) -> Result<ChainStats> {
        let mut update = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            let fwd = self.sweep(u, true)?;
            let bwd = self.sweep(u, false)?;
            iterations += 1;
            update = fwd.max(bwd);
            if !update.is_finite() {
                break;
            }
            if update < opts.tol {
                let residual = self.residual(u)?;
                return Ok(ChainStats { iterations, residual });
            }
        }
        Err(Error::NotConverged {
            what: "Gauss-Seidel sweeps",
            iterations,
            residual: update,
        })
    }

    /// Newton with backtracking on the sum of squared node gaps; sweeps
    /// take over for a while when no acceptable step length is found.
    fn solve_newton(&self, u: &mut [f64], opts: &ChainOptions) -> Result<ChainStats> {
        let (mut gap, mut merit) = self.residual_norms(u)?;
        let mut step = f64::INFINITY;
        let mut backup = u.to_vec();
        let mut direction = vec![0.0; u.len()];
        let mut iterations = 0;
        loop {
            if gap <= opts.tol && step <= opts.tol {
                return Ok(ChainStats { iterations, residual: gap });
            }
            if iterations >= opts.max_iterations {
                return Err(Error::NotConverged {
                    what: "Newton chain solve",
                    iterations,
                    residual: gap,
                });
            }
            iterations += 1;
            backup.copy_from_slice(u);
            let full = match self.newton_step(u) {
                Ok(s) if s.is_finite() => s,
                _ => f64::NAN,
            };
            let mut accepted = false;
            if full.is_finite() {
                for ((dir, new), old) in direction.iter_mut().zip(u.iter()).zip(&backup) {
                    *dir = new - old;
                }
                let mut alpha = 1.0;
                while alpha >= 1e-6 {
                    let (g, m) = self.residual_norms(u)?;
                    let decrease = m <= (1.0 - 1e-4 * alpha) * merit;
                    if g.is_finite() && !decrease && g <= 1e-3 * opts.tol {
                        // Residual at rounding level: on long grids the step
                        // is conditioning noise and cannot shrink further.
                        return Ok(ChainStats { iterations, residual: g });
                    }
                    if g.is_finite() && decrease {
                        gap = g;
                        merit = m;
                        step = alpha * full;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                    for ((x, old), dir) in u.iter_mut().zip(&backup).zip(&direction) {
                        *x = old + alpha * dir;
                    }
                }
            }
            if accepted {
                continue;
            }
            u.copy_from_slice(&backup);
            for _ in 0..20 {
                self.sweep(u, true)?;
                self.sweep(u, false)?;
            }
            (gap, merit) = self.residual_norms(u)?;
            step = f64::INFINITY;
        }
    }
}
