//! Two-point problem `p u'' + q u' ∈ Au + f` on `[0, T]`, `u(0) = x`, `u(T) = y`.
//!
//! The divergence form `(a u')' ∈ b(Au + f)` is discretized with midpoint
//! values of `a`. Dividing node `i` by `a_i` gives
//!
//! ```text
//! (α⁺ᵢ(u_{i+1} − uᵢ) − α⁻ᵢ(uᵢ − u_{i−1}))/h² ∈ (A uᵢ + fᵢ)/pᵢ,   α±ᵢ = a_{i±1/2}/aᵢ,
//! ```
//!
//! which is solved exactly for `uᵢ` by one resolvent:
//! `uᵢ = J_{μᵢ}(w⁻ᵢ u_{i−1} + w⁺ᵢ u_{i+1} − μᵢ fᵢ)` with
//! `μᵢ = h²/(pᵢ(α⁺ᵢ + α⁻ᵢ))` and `w±ᵢ = α±ᵢ/(α⁺ᵢ + α⁻ᵢ)`.

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, ChainOptions, NodeMap, SweepMethod};
use crate::error::{check_dim, Error, Result};
use crate::grid::{Grid, GridSolution};
use crate::operators::MonotoneOperator;
use crate::problem::Problem;
use crate::weights::{build_weights, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvpOptions {
    /// Bound on both the last node update and the fixed-point gap.
    pub tol: f64,
    /// Newton steps, or symmetric sweep pairs for Gauss–Seidel.
    pub max_iterations: usize,
    #[serde(default)]
    pub method: SweepMethod,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            tol: 1e-10,
            max_iterations: 10_000,
            method: SweepMethod::Newton,
        }
    }
}

impl BvpOptions {
    pub fn with_tol(tol: f64) -> Self {
        BvpOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("iteration budget must be positive"));
        }
        Ok(())
    }
}

/// Per-node data of the scaled node equations.
struct NodeCoefficients {
    w_minus: Vec<f64>,
    w_plus: Vec<f64>,
    mu: Vec<f64>,
}

fn node_coefficients(w: &WeightTable) -> NodeCoefficients {
    let n = w.grid().interior();
    let h2 = w.grid().step().powi(2);
    let mut out = NodeCoefficients {
        w_minus: Vec::with_capacity(n),
        w_plus: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
    };
    for i in 1..=n {
        let (am, ap) = w.neighbour_ratios(i);
        let s = am + ap;
        out.w_minus.push(am / s);
        out.w_plus.push(ap / s);
        out.mu.push(h2 / (w.p(i) * s));
    }
    out
}

/// `Φᵢ(s) = J_{μᵢ}(s)`, or its Yosida-regularized analogue.
struct ResolventNodes<'a> {
    op: &'a MonotoneOperator,
    mu: &'a [f64],
    /// Regularization `λ` of `A_λ + λI`.
    yosida: Option<f64>,
}

impl ResolventNodes<'_> {
    /// For the regularized node equation `u + μ(A_λ u + λu) = s`:
    /// `u = J^{A_λ}_ν(c s)` with `c = 1/(1 + μλ)`, `ν = μc`, and
    /// `J^{A_λ}_ν = (λ I + ν J_{λ+ν})/(λ + ν)`.
    fn yosida_params(&self, node: usize, lambda: f64) -> (f64, f64) {
        let mu = self.mu[node - 1];
        let c = 1.0 / (1.0 + mu * lambda);
        (c, mu * c)
    }
}

impl NodeMap for ResolventNodes<'_> {
    fn apply(&self, node: usize, z: &[f64], out: &mut [f64]) -> Result<()> {
        match self.yosida {
            None => self.op.resolve_into(self.mu[node - 1], z, out),
            Some(lambda) => {
                let (c, nu) = self.yosida_params(node, lambda);
                let scaled: Vec<f64> = z.iter().map(|v| c * v).collect();
                self.op.resolve_into(lambda + nu, &scaled, out)?;
                for (o, s) in out.iter_mut().zip(&scaled) {
                    *o = (lambda * s + nu * *o) / (lambda + nu);
                }
                Ok(())
            }
        }
    }

    fn jacobian(&self, node: usize, z: &[f64], jac: &mut [f64]) -> Result<()> {
        match self.yosida {
            None => self.op.resolvent_jacobian(self.mu[node - 1], z, jac),
            Some(lambda) => {
                let d = z.len();
                let (c, nu) = self.yosida_params(node, lambda);
                let scaled: Vec<f64> = z.iter().map(|v| c * v).collect();
                self.op.resolvent_jacobian(lambda + nu, &scaled, jac)?;
                for r in 0..d {
                    for k in 0..d {
                        let id = if r == k { lambda } else { 0.0 };
                        jac[r * d + k] = c * (id + nu * jac[r * d + k]) / (lambda + nu);
                    }
                }
                Ok(())
            }
        }
    }
}

/// Node systems share this setup; `forcing` is node-major on the grid.
fn with_chain<T>(
    problem: &Problem,
    weights: &WeightTable,
    forcing: &[f64],
    yosida: Option<f64>,
    body: impl FnOnce(&Chain) -> Result<T>,
) -> Result<T> {
    let d = problem.dim();
    let coeffs = node_coefficients(weights);
    let n = weights.grid().interior();
    let mut offset = vec![0.0; n * d];
    for i in 1..=n {
        let mu = coeffs.mu[i - 1];
        for k in 0..d {
            offset[(i - 1) * d + k] = -mu * forcing[i * d + k];
        }
    }
    let nodes = ResolventNodes {
        op: &problem.operator,
        mu: &coeffs.mu,
        yosida,
    };
    let chain = Chain {
        d,
        n,
        w_minus: coeffs.w_minus.clone(),
        w_plus: coeffs.w_plus.clone(),
        offset,
        map: &nodes,
    };
    body(&chain)
}

/// Solves on the weight table's grid, starting from `initial` if given.
pub(crate) fn solve_on(
    problem: &Problem,
    weights: &WeightTable,
    forcing: &[f64],
    y: &[f64],
    initial: Option<Vec<f64>>,
    yosida: Option<f64>,
    opts: &BvpOptions,
) -> Result<GridSolution> {
    opts.validate()?;
    let d = problem.dim();
    check_dim(d, y.len())?;
    let grid = *weights.grid();
    let len = grid.len();
    check_dim(len * d, forcing.len())?;
    if let Some(lambda) = yosida {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("regularization must be positive, got {lambda}")));
        }
    }
    let mut u = match initial {
        Some(v) => {
            check_dim(len * d, v.len())?;
            v
        }
        None => {
            // Linear interpolation between the boundary values.
            let mut v = vec![0.0; len * d];
            for i in 0..len {
                let s = i as f64 / (len - 1) as f64;
                for k in 0..d {
                    v[i * d + k] = (1.0 - s) * problem.x[k] + s * y[k];
                }
            }
            v
        }
    };
    u[..d].copy_from_slice(&problem.x);
    u[(len - 1) * d..].copy_from_slice(y);
    let stats = with_chain(problem, weights, forcing, yosida, |chain| {
        chain.solve(
            &mut u,
            &ChainOptions {
                tol: opts.tol,
                max_iterations: opts.max_iterations,
                method: opts.method,
            },
        )
    })?;
    Ok(GridSolution::from_values(grid, d, u, stats.residual, stats.iterations))
}

/// Solves the two-point inclusion with `u(0) = x`, `u(T) = y`.
pub fn solve_bvp(problem: &Problem, grid: &Grid, y: &[f64], opts: &BvpOptions) -> Result<GridSolution> {
    let weights = build_weights(&problem.coefficients, grid)?;
    let forcing = problem.forcing.sample_interior(grid, problem.dim());
    solve_on(problem, &weights, &forcing, y, None, None, opts)
}

/// Solves `(a u')' = b(A_λ u + λu + f)` with the same boundary data.
pub fn solve_bvp_yosida(
    problem: &Problem,
    lambda: f64,
    grid: &Grid,
    y: &[f64],
    opts: &BvpOptions,
) -> Result<GridSolution> {
    let weights = build_weights(&problem.coefficients, grid)?;
    let forcing = problem.forcing.sample_interior(grid, problem.dim());
    solve_on(problem, &weights, &forcing, y, None, Some(lambda), opts)
}

/// Sup over interior nodes of `‖uᵢ − J_{μᵢ}(rᵢ/dᵢ)‖`.
pub fn bvp_residual(sol: &GridSolution, problem: &Problem) -> Result<f64> {
    check_dim(problem.dim(), sol.dim)?;
    let weights = build_weights(&problem.coefficients, &sol.grid)?;
    let forcing = problem.forcing.sample_interior(&sol.grid, problem.dim());
    with_chain(problem, &weights, &forcing, None, |chain| chain.residual(&sol.values))
}

/// Tridiagonal matrix of `u ↦ −(1/b)(a u')'` on interior nodes with zero
/// boundary values: `(lower, diag, upper)`.
pub fn divergence_operator(weights: &WeightTable) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = weights.grid().interior();
    let h2 = weights.grid().step().powi(2);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..=n {
        let (am, ap) = weights.neighbour_ratios(i);
        let p = weights.p(i);
        if i > 1 {
            lower[i - 1] = -p * am / h2;
        }
        diag[i - 1] = p * (am + ap) / h2;
        if i < n {
            upper[i - 1] = -p * ap / h2;
        }
    }
    (lower, diag, upper)
}

/// Largest relative mismatch between `(WM)_{i,i+1}` and `(WM)_{i+1,i}` with
/// `W = diag(bᵢ h)` and `M` from [`divergence_operator`].
///
/// The entries are compared in logarithmic scale so weights that underflow
/// in linear scale are still checked.
pub fn weighted_asymmetry(weights: &WeightTable) -> f64 {
    let (lower, _, upper) = divergence_operator(weights);
    let n = weights.grid().interior();
    let h = weights.grid().step();
    let mut worst: f64 = 0.0;
    for i in 1..n {
        // log|(WM)_{i,i+1}| and log|(WM)_{i+1,i}|
        let left = weights.log_a(i) - weights.p(i).ln() + h.ln() + (-upper[i - 1]).ln();
        let right = weights.log_a(i + 1) - weights.p(i + 1).ln() + h.ln() + (-lower[i]).ln();
        worst = worst.max((left - right).abs());
    }
    // |x/y - 1| ≈ |log x - log y| at this scale.
    worst.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingSpec;
    use crate::operators::ScalarGraph;
    use crate::weights::CoefficientSpec;

    fn problem(op: MonotoneOperator, p: f64, q: f64, f: f64, x: f64) -> Problem {
        let forcing = if f == 0.0 {
            ForcingSpec::Zero
        } else {
            ForcingSpec::constant(vec![f])
        };
        Problem::new(op, CoefficientSpec::constant(p, q), forcing, vec![x]).unwrap()
    }

    #[test]
    fn harmonic_case_is_exact() {
        let pr = problem(MonotoneOperator::zero(1), 1.0, 0.0, 0.0, 1.0);
        let grid = Grid::with_step(1.0, 0.01).unwrap();
        let sol = solve_bvp(&pr, &grid, &[0.0], &BvpOptions::default()).unwrap();
        for i in 0..sol.len() {
            assert!((sol.value(i)[0] - (1.0 - sol.t(i))).abs() < 1e-13);
        }
        assert!(bvp_residual(&sol, &pr).unwrap() <= 1e-12);
    }

    #[test]
    fn drift_case_matches_closed_form() {
        let pr = problem(MonotoneOperator::zero(1), 1.0, -1.0, 1.0, 5.0);
        let c = -1.0 / (4f64.exp() - 1.0);
        let exact = |t: f64| 5.0 - t + c * (t.exp() - 1.0);
        let err = |h: f64| {
            let grid = Grid::with_step(4.0, h).unwrap();
            let sol = solve_bvp(&pr, &grid, &[0.0], &BvpOptions::default()).unwrap();
            (0..sol.len())
                .map(|i| (sol.value(i)[0] - exact(sol.t(i))).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e2 < 1e-4);
        assert!((3.5..4.5).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }

    #[test]
    fn gauss_seidel_and_newton_agree() {
        let op = MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap();
        let pr = problem(op, 1.0, 0.0, 0.0, 1.0);
        let grid = Grid::with_step(4.0, 0.1).unwrap();
        let newton = solve_bvp(&pr, &grid, &[-1.0], &BvpOptions::with_tol(1e-12)).unwrap();
        let gs = solve_bvp(
            &pr,
            &grid,
            &[-1.0],
            &BvpOptions {
                tol: 1e-12,
                max_iterations: 1_000_000,
                method: SweepMethod::GaussSeidel,
            },
        )
        .unwrap();
        assert!(newton.sup_distance(&gs, newton.len()) < 1e-9);
        assert!(newton.residual <= 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_for_every_regularization() {
        let op = MonotoneOperator::linear(vec![vec![1.0]]).unwrap();
        let pr = problem(op, 1.0, 0.0, 0.0, 0.0);
        let grid = Grid::with_step(2.0, 0.05).unwrap();
        for lambda in [1.0, 0.1, 1e-3] {
            let sol = solve_bvp_yosida(&pr, lambda, &grid, &[0.0], &BvpOptions::default()).unwrap();
            assert!(sol.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn perturbed_node_is_detected() {
        let pr = problem(MonotoneOperator::zero(1), 1.0, 0.0, 0.0, 1.0);
        let grid = Grid::with_step(1.0, 0.1).unwrap();
        let mut sol = solve_bvp(&pr, &grid, &[0.0], &BvpOptions::default()).unwrap();
        sol.values[5] += 1.0;
        assert!(bvp_residual(&sol, &pr).unwrap() >= 0.5);
    }

    #[test]
    fn divergence_matrix_is_weighted_symmetric() {
        let coeffs = CoefficientSpec::constant(0.01, -1.0);
        let w = build_weights(&coeffs, &Grid::with_step(50.0, 0.01).unwrap()).unwrap();
        // a = e^{-100 t} underflows long before t = 50.
        assert_eq!(w.a(w.grid().len() - 1), 0.0);
        assert!(weighted_asymmetry(&w) <= 1e-12);
    }
}
