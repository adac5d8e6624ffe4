//! Discrete energy on `[0, n]` and its direct minimization.
//!
//! ```text
//! Ψ(v) = ½ Σ_{i=0}^{N} a_{i+1/2} ‖v_{i+1} − vᵢ‖²/h + Σ_{i=1}^{N} h bᵢ (φ(vᵢ) + (fᵢ, vᵢ))
//! ```
//!
//! over grid functions with `v₀ = x`, `v_{N+1} = 0`, and `+∞` elsewhere.
//! Its minimizer solves the same discrete two-point problem as
//! [`crate::bvp::solve_bvp`] with `y = 0`, which makes it an independent check
//! on the resolvent solver. The fixed boundary terms are dropped.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::grid::{Grid, GridSolution};
use crate::problem::Problem;
use crate::weights::{build_weights, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalOptions {
    /// Sup norm of the gradient mapping at which iteration stops.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            tol: 1e-9,
            max_iterations: 2_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimizer {
    pub solution: GridSolution,
    pub value: f64,
    pub iterations: usize,
    pub gradient_mapping: f64,
    /// `Ψ` of the accepted iterate after each step; nonincreasing up to
    /// rounding.
    pub history: Vec<f64>,
}

fn require_potential(problem: &Problem) -> Result<()> {
    if problem.operator.has_potential() {
        Ok(())
    } else {
        Err(Error::invalid("operator has no convex potential"))
    }
}

/// `Ψ(v)` for node-major `values` on `grid`.
pub fn psi_n(values: &[f64], problem: &Problem, grid: &Grid) -> Result<f64> {
    require_potential(problem)?;
    let d = problem.dim();
    check_dim(grid.len() * d, values.len())?;
    let weights = build_weights(&problem.coefficients, grid)?;
    let forcing = problem.forcing.sample_interior(grid, d);
    Ok(energy(values, problem, &weights, &forcing))
}

fn energy(v: &[f64], problem: &Problem, w: &WeightTable, forcing: &[f64]) -> f64 {
    let d = problem.dim();
    let len = w.grid().len();
    let h = w.grid().step();
    if v[..d] != problem.x[..] || v[(len - 1) * d..].iter().any(|c| *c != 0.0) {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for i in 0..len - 1 {
        let jump: f64 = (0..d).map(|k| (v[(i + 1) * d + k] - v[i * d + k]).powi(2)).sum();
        total += 0.5 * w.a_mid(i) * jump / h;
    }
    for i in 1..len - 1 {
        let vi = &v[i * d..(i + 1) * d];
        let phi = problem.operator.potential_value(vi).unwrap_or(f64::INFINITY);
        let pairing: f64 = vi.iter().zip(&forcing[i * d..(i + 1) * d]).map(|(a, b)| a * b).sum();
        total += h * w.b(i) * (phi + pairing);
    }
    total
}

struct Stepper<'a> {
    problem: &'a Problem,
    weights: &'a WeightTable,
    forcing: &'a [f64],
    step: f64,
    ratios: Vec<(f64, f64)>,
}

impl Stepper<'_> {
    /// `out = prox(v − s ∇g(v))` in the metric `diag(bᵢ h)`; the prox of
    /// `s φ` is the resolvent `J_s`.
    fn forward_backward(&self, v: &[f64], out: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        let d = self.problem.dim();
        let len = self.weights.grid().len();
        let h2 = self.weights.grid().step().powi(2);
        out[..d].copy_from_slice(&v[..d]);
        out[(len - 1) * d..].fill(0.0);
        for i in 1..len - 1 {
            let (am, ap) = self.ratios[i - 1];
            let p = self.weights.p(i);
            for k in 0..d {
                let c = v[i * d + k];
                let g = p * (am * (c - v[(i - 1) * d + k]) - ap * (v[(i + 1) * d + k] - c)) / h2
                    + self.forcing[i * d + k];
                scratch[k] = c - self.step * g;
            }
            self.problem
                .operator
                .resolve_into(self.step, &scratch[..d], &mut out[i * d..(i + 1) * d])?;
        }
        Ok(())
    }
}

/// Minimizes `Ψ` on `[0, horizon]` with step `h` by monotone FISTA with
/// adaptive restart, in the metric `diag(bᵢ h)`.
pub fn minimize_psi(problem: &Problem, horizon: f64, h: f64, opts: &VariationalOptions) -> Result<Minimizer> {
    require_potential(problem)?;
    if !(opts.tol > 0.0) || opts.max_iterations == 0 {
        return Err(Error::invalid("variational tolerance and budget must be positive"));
    }
    let grid = Grid::with_step(horizon, h)?;
    let d = problem.dim();
    let len = grid.len();
    let weights = build_weights(&problem.coefficients, &grid)?;
    let forcing = problem.forcing.sample_interior(&grid, d);
    let ratios: Vec<(f64, f64)> = (1..len - 1).map(|i| weights.neighbour_ratios(i)).collect();
    // Gershgorin bound on the weighted operator.
    let lipschitz = (1..len - 1)
        .map(|i| 2.0 * weights.p(i) * (ratios[i - 1].0 + ratios[i - 1].1) / h.powi(2))
        .fold(0.0, f64::max);
    let stepper = Stepper {
        problem,
        weights: &weights,
        forcing: &forcing,
        step: 1.0 / lipschitz,
        ratios,
    };

    let mut x = vec![0.0; len * d];
    for i in 0..len {
        let s = 1.0 - i as f64 / (len - 1) as f64;
        for k in 0..d {
            x[i * d + k] = s * problem.x[k];
        }
    }
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut z = vec![0.0; len * d];
    let mut probe = vec![0.0; len * d];
    let mut scratch = vec![0.0; d];
    let mut psi_x = energy(&x, problem, &weights, &forcing);
    let mut momentum = 1.0f64;
    let mut restarted = false;
    let mut history = Vec::new();
    let mut gradient_mapping = f64::INFINITY;

    for iteration in 1..=opts.max_iterations {
        stepper.forward_backward(&y, &mut z, &mut scratch)?;
        let psi_z = energy(&z, problem, &weights, &forcing);
        let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        // A plain proximal-gradient step from x always descends, so after a
        // restart an increase can only be rounding and the step is kept.
        if psi_z <= psi_x || restarted {
            restarted = false;
            x_prev.copy_from_slice(&x);
            x.copy_from_slice(&z);
            psi_x = psi_z;
            let a = (momentum - 1.0) / next;
            for j in 0..len * d {
                y[j] = x[j] + a * (x[j] - x_prev[j]);
            }
            momentum = next;
        } else {
            // Restart from the best point.
            x_prev.copy_from_slice(&x);
            y.copy_from_slice(&x);
            momentum = 1.0;
            restarted = true;
        }
        history.push(psi_x);

        if iteration % 10 == 0 || iteration == opts.max_iterations {
            stepper.forward_backward(&x, &mut probe, &mut scratch)?;
            gradient_mapping = x
                .iter()
                .zip(&probe)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / stepper.step;
            if gradient_mapping < opts.tol {
                return Ok(Minimizer {
                    solution: GridSolution::from_values(grid, d, x, 0.0, iteration),
                    value: psi_x,
                    iterations: iteration,
                    gradient_mapping,
                    history,
                });
            }
        }
    }
    Err(Error::NotConverged {
        what: "energy minimization",
        iterations: opts.max_iterations,
        residual: gradient_mapping,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::{solve_bvp, BvpOptions};
    use crate::forcing::ForcingSpec;
    use crate::operators::{MonotoneOperator, ScalarGraph};
    use crate::weights::CoefficientSpec;

    fn free_problem() -> Problem {
        Problem::new(
            MonotoneOperator::zero(1),
            CoefficientSpec::constant(1.0, 0.0),
            ForcingSpec::Zero,
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn linear_decay_energy() {
        let n = 4.0;
        let grid = Grid::with_step(n, 0.01).unwrap();
        let v: Vec<f64> = grid.nodes().iter().map(|t| 1.0 - t / n).collect();
        let psi = psi_n(&v, &free_problem(), &grid).unwrap();
        assert!((psi - 1.0 / (2.0 * n)).abs() < 1e-12, "{psi}");
        let mut off = v.clone();
        off[0] = 0.5;
        assert_eq!(psi_n(&off, &free_problem(), &grid).unwrap(), f64::INFINITY);
    }

    #[test]
    fn requires_potential() {
        let p = Problem::new(
            MonotoneOperator::linear(vec![vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap(),
            CoefficientSpec::constant(1.0, 0.0),
            ForcingSpec::Zero,
            vec![1.0, 0.0],
        )
        .unwrap();
        assert!(minimize_psi(&p, 1.0, 0.1, &VariationalOptions::default()).is_err());
    }

    #[test]
    fn minimizer_matches_resolvent_solver() {
        let p = Problem::new(
            MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap(),
            CoefficientSpec::constant(1.0, -0.5),
            ForcingSpec::Constant { value: vec![0.2] },
            vec![1.0],
        )
        .unwrap();
        let opts = VariationalOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let m = minimize_psi(&p, 2.0, 0.05, &opts).unwrap();
        let bvp = solve_bvp(&p, &m.solution.grid, &[0.0], &BvpOptions::default()).unwrap();
        let gap = m.solution.sup_distance(&bvp, m.solution.grid.len());
        assert!(gap < 1e-8, "{gap}");
        assert!(m.history.windows(2).all(|w| w[1] <= w[0] + 1e-13 * w[0].abs()));
    }
}
