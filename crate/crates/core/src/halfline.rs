//! Bounded solutions on `[0, ∞)`.
//!
//! Two-point problems on `[0, n]` with `u(n) = 0` are solved for
//! `n = n₀, 2n₀, 4n₀, …` on a common step `h`. The restrictions to a window
//! `[0, R]` form a Cauchy sequence; the cascade stops once two consecutive
//! restrictions differ by less than `tol/2`, the other half of the budget
//! going to the node equations.

use serde::{Deserialize, Serialize};

use crate::bvp::{solve_on, BvpOptions};
use crate::chain::SweepMethod;
use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::grid::{cells_for, Grid, GridSolution};
use crate::linalg;
use crate::problem::Problem;
use crate::weights::{build_weights, y_norm, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalflineOptions {
    pub h: f64,
    /// Window `[0, R]` on which convergence is certified.
    pub window: f64,
    /// First horizon; must be at least `2R`.
    pub n0: f64,
    pub tol: f64,
    /// Largest `k` in `n₀ 2^k`.
    pub max_doublings: usize,
    #[serde(default)]
    pub method: SweepMethod,
    pub max_iterations: usize,
    /// Fixed-point tolerance of each two-point solve. The node residual is
    /// amplified by up to `O(N²)` in the solution, so this is kept far below
    /// `tol`.
    #[serde(default = "default_bvp_tol")]
    pub bvp_tol: f64,
}

fn default_bvp_tol() -> f64 {
    1e-10
}

impl Default for HalflineOptions {
    fn default() -> Self {
        HalflineOptions {
            h: 0.01,
            window: 10.0,
            n0: 20.0,
            tol: 1e-3,
            max_doublings: 12,
            method: SweepMethod::Newton,
            max_iterations: 10_000,
            bvp_tol: default_bvp_tol(),
        }
    }
}

impl HalflineOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.bvp_tol > 0.0 && self.bvp_tol.is_finite()) {
            return Err(Error::invalid(format!("two-point tolerance must be positive, got {}", self.bvp_tol)));
        }
        if !(self.window > 0.0) {
            return Err(Error::invalid("window must be positive"));
        }
        if self.n0 < 2.0 * self.window * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "first horizon {} must be at least twice the window {}",
                self.n0, self.window
            )));
        }
        cells_for(self.window, self.h)?;
        cells_for(self.n0, self.h)?;
        Ok(())
    }

    fn bvp(&self) -> BvpOptions {
        BvpOptions {
            tol: self.bvp_tol,
            max_iterations: self.max_iterations,
            method: self.method,
        }
    }
}

/// A-priori quantities attached to a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub horizon: f64,
    pub y_norm: f64,
    pub a_plus_infinity: f64,
    pub p0: f64,
    /// `D = (a_+(∞)/p₀) ‖f‖_Y`.
    pub d: f64,
    /// `E = D + √(D² + ‖x‖²)`.
    pub e: f64,
    /// `sup_i a_-(tᵢ) ‖uᵢ‖²`.
    pub sup_weighted_norm_sq: f64,
    /// `sup_i ‖uᵢ‖`.
    pub sup_norm: f64,
    /// `Σ tᵢ a(tᵢ) ‖u'ᵢ‖² h`.
    pub energy: f64,
    pub slack: f64,
    pub condition_c_satisfied: bool,
    /// `q ∈ L¹`, so plain boundedness is equivalent to condition (C).
    pub condition_c1_applicable: bool,
}

/// `D` and `E` from the problem data alone.
pub fn bounds(problem: &Problem, weights: &WeightTable) -> Result<(f64, f64)> {
    let y = y_norm(&problem.forcing, weights)?.value;
    let d = weights.a_plus_infinity()? / weights.p0() * y;
    let x = linalg::norm(&problem.x);
    Ok((d, d + (d * d + x * x).sqrt()))
}

/// Diagnostics of a solution on the table grid; `(C)` holds if the weighted
/// sup is at most `E² + slack`.
pub fn compute_diagnostics(
    sol: &GridSolution,
    problem: &Problem,
    weights: &WeightTable,
    slack: f64,
) -> Result<Diagnostics> {
    crate::error::check_dim(weights.grid().len(), sol.len())?;
    let yn = y_norm(&problem.forcing, weights)?.value;
    let a_plus_inf = weights.a_plus_infinity()?;
    let p0 = weights.p0();
    let d = a_plus_inf / p0 * yn;
    let xn = linalg::norm(&problem.x);
    let e = d + (d * d + xn * xn).sqrt();
    let h = sol.grid.step();
    let mut sup_w: f64 = 0.0;
    let mut sup_n: f64 = 0.0;
    let mut energy = 0.0;
    for i in 0..sol.len() {
        let n2: f64 = sol.value(i).iter().map(|v| v * v).sum();
        sup_w = sup_w.max(weights.a_minus(i) * n2);
        sup_n = sup_n.max(n2.sqrt());
        let du2: f64 = sol.derivative(i).iter().map(|v| v * v).sum();
        energy += sol.t(i) * weights.a(i) * du2 * h;
    }
    Ok(Diagnostics {
        horizon: sol.grid.horizon(),
        y_norm: yn,
        a_plus_infinity: a_plus_inf,
        p0,
        d,
        e,
        sup_weighted_norm_sq: sup_w,
        sup_norm: sup_n,
        energy,
        slack,
        condition_c_satisfied: sup_w <= e * e + slack,
        condition_c1_applicable: weights.bounded_equivalence(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub horizons: Vec<f64>,
    /// `gaps[k]` compares horizons `k` and `k + 1` on the window.
    pub gaps: Vec<f64>,
    pub accepted_horizon: Option<f64>,
    pub diagnostics: Vec<Diagnostics>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl CascadeReport {
    pub fn last_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(f64::NAN)
    }

    /// Diagnostics of the accepted horizon.
    pub fn accepted_diagnostics(&self) -> Option<&Diagnostics> {
        self.accepted_horizon.and(self.diagnostics.last())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("horizon,window_gap,iterations,residual,sup_weighted_norm_sq,e_squared\n");
        for (k, horizon) in self.horizons.iter().enumerate() {
            let gap = if k == 0 { f64::NAN } else { self.gaps[k - 1] };
            let diag = &self.diagnostics[k];
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                horizon,
                gap,
                self.iterations[k],
                self.residuals[k],
                diag.sup_weighted_norm_sq,
                diag.e * diag.e
            ));
        }
        out
    }
}

/// Bounded solution on the window `[0, R]` and the cascade that produced it.
pub fn solve_halfline(problem: &Problem, opts: &HalflineOptions) -> Result<(GridSolution, CascadeReport)> {
    opts.validate()?;
    let d = problem.dim();
    let window_cells = cells_for(opts.window, opts.h)?;
    let slack = 10.0 * opts.tol;
    {
        // f ∈ Y and the declared tails are checked before any solve.
        let grid = Grid::with_step(opts.n0, opts.h)?;
        let weights = build_weights(&problem.coefficients, &grid)?;
        bounds(problem, &weights)?;
    }
    let mut report = CascadeReport::default();
    let mut prev: Option<GridSolution> = None;
    for k in 0..=opts.max_doublings {
        let horizon = opts.n0 * 2f64.powi(k as i32);
        let grid = Grid::with_step(horizon, opts.h)?;
        let weights = build_weights(&problem.coefficients, &grid)?;
        let forcing = problem.forcing.sample_interior(&grid, d);
        let initial = prev.as_ref().map(|p| {
            let mut v = vec![0.0; grid.len() * d];
            v[..p.values.len()].copy_from_slice(&p.values);
            v
        });
        let sol = solve_on(problem, &weights, &forcing, &vec![0.0; d], initial, None, &opts.bvp())?;
        report.horizons.push(horizon);
        report.iterations.push(sol.iterations);
        report.residuals.push(sol.residual);
        report
            .diagnostics
            .push(compute_diagnostics(&sol, problem, &weights, slack)?);
        if let Some(p) = &prev {
            let gap = sol.sup_distance(p, window_cells + 1);
            report.gaps.push(gap);
            if gap < 0.5 * opts.tol {
                report.accepted_horizon = Some(horizon);
                let window = sol.restrict(window_cells)?;
                return Ok((window, report));
            }
        }
        prev = Some(sol);
    }
    Err(Error::CascadeDiverged {
        report: Box::new(report),
    })
}

/// Starts from `x_k = J_{μ_k} x` and stops when the window solutions are
/// Cauchy below `tol`, or when `‖x_k − x‖ ≤ tol/2`, which bounds the window
/// distance to the solution from `x` by the contraction estimate.
pub fn solve_halfline_closure(problem: &Problem, opts: &HalflineOptions, schedule: &[f64]) -> Result<GridSolution> {
    if schedule.is_empty() {
        return Err(Error::invalid("closure schedule is empty"));
    }
    if let Some(bad) = schedule.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::invalid(format!("closure schedule entries must be positive, got {bad}")));
    }
    let window_cells = cells_for(opts.window, opts.h)?;
    let mut prev: Option<GridSolution> = None;
    let mut last_gap = f64::INFINITY;
    for &mu in schedule {
        let xk = problem.operator.resolve(mu, &problem.x)?;
        let start_gap = linalg::dist(&xk, &problem.x);
        let (sol, _) = solve_halfline(&problem.with_x(xk)?, opts)?;
        if start_gap <= 0.5 * opts.tol {
            return Ok(sol);
        }
        if let Some(p) = &prev {
            last_gap = sol.sup_distance(p, window_cells + 1);
            if last_gap < opts.tol {
                return Ok(sol);
            }
        }
        prev = Some(sol);
    }
    Err(Error::NotConverged {
        what: "closure approximation",
        iterations: schedule.len(),
        residual: last_gap,
    })
}

/// `μ_k = 2^{-k}`, `k = 0..count`.
pub fn default_closure_schedule(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2f64.powi(-(k as i32))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStep {
    /// `f_k(t) = f(max(t, floor))`.
    pub floor: f64,
    /// Window sup distance to the previous step.
    pub window_gap: f64,
    /// `sup √a_-(t) ‖u_k(t) − u_{k−1}(t)‖` on the window.
    pub weighted_gap: f64,
    /// `‖f_k − f_{k−1}‖_Y`.
    pub y_distance: f64,
}

#[derive(Clone, Debug)]
pub struct WeakSolution {
    pub solution: GridSolution,
    pub steps: Vec<WeakStep>,
    /// `2 a_+(∞)/p₀`, the Lipschitz constant of `f ↦ u` in the `Y` norm.
    pub stability_constant: f64,
}

/// Limit of strong solutions for forcings `f_k(t) = f(max(t, η_k))`.
pub fn solve_weak(problem: &Problem, opts: &HalflineOptions, floors: &[f64]) -> Result<WeakSolution> {
    if floors.is_empty() {
        return Err(Error::invalid("floor schedule is empty"));
    }
    if floors.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::invalid("floor schedule entries must be positive"));
    }
    let window_cells = cells_for(opts.window, opts.h)?;
    let grid = Grid::with_step(opts.n0, opts.h)?;
    let weights = build_weights(&problem.coefficients, &grid)?;
    let stability_constant = 2.0 * weights.a_plus_infinity()? / weights.p0();
    let mut steps = Vec::new();
    let mut prev: Option<(GridSolution, ForcingSpec)> = None;
    for &floor in floors {
        let fk = ForcingSpec::Floored {
            base: Box::new(problem.forcing.clone()),
            from: floor,
        };
        let (sol, _) = solve_halfline(&problem.with_forcing(fk.clone())?, opts)?;
        if let Some((p, fp)) = &prev {
            let window_gap = sol.sup_distance(p, window_cells + 1);
            let weighted_gap = (0..=window_cells)
                .map(|i| (0.5 * weights.log_a_minus(i)).exp() * linalg::dist(sol.value(i), p.value(i)))
                .fold(0.0, f64::max);
            let y_distance = y_norm(&ForcingSpec::difference(&fk, fp), &weights)?.value;
            steps.push(WeakStep {
                floor,
                window_gap,
                weighted_gap,
                y_distance,
            });
            if window_gap < opts.tol {
                return Ok(WeakSolution {
                    solution: sol,
                    steps,
                    stability_constant,
                });
            }
        }
        prev = Some((sol, fk));
    }
    Err(Error::NotConverged {
        what: "weak-solution approximation",
        iterations: floors.len(),
        residual: steps.last().map(|s| s.window_gap).unwrap_or(f64::NAN),
    })
}

/// `η_k = η₀ 2^{-k}`, `k = 0..count`.
pub fn default_floor_schedule(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * 2f64.powi(-(k as i32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MonotoneOperator;
    use crate::weights::CoefficientSpec;

    #[test]
    fn zero_data_gives_zero_solution_and_bounds() {
        let pr = Problem::new(
            MonotoneOperator::zero(1),
            CoefficientSpec::constant(1.0, 0.0),
            ForcingSpec::Zero,
            vec![0.0],
        )
        .unwrap();
        let opts = HalflineOptions {
            window: 2.0,
            n0: 4.0,
            h: 0.05,
            ..Default::default()
        };
        let (sol, report) = solve_halfline(&pr, &opts).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
        let diag = report.accepted_diagnostics().unwrap();
        assert_eq!(diag.e, 0.0);
        assert_eq!(diag.sup_weighted_norm_sq, 0.0);
        assert!(diag.condition_c_satisfied && diag.condition_c1_applicable);
    }

    #[test]
    fn drift_example_selects_bounded_branch() {
        let pr = Problem::new(
            MonotoneOperator::zero(1),
            CoefficientSpec::constant(1.0, -1.0),
            ForcingSpec::constant(vec![1.0]),
            vec![5.0],
        )
        .unwrap();
        let (sol, report) = solve_halfline(&pr, &HalflineOptions::default()).unwrap();
        let err = (0..sol.len())
            .map(|i| (sol.value(i)[0] - (5.0 - sol.t(i))).abs())
            .fold(0.0, f64::max);
        assert!(err <= 5e-3, "error {err}");
        let diag = report.accepted_diagnostics().unwrap();
        assert!((diag.y_norm - 4.0).abs() < 1e-3);
        assert!(diag.condition_c_satisfied);
        assert!(!diag.condition_c1_applicable);
    }

    #[test]
    fn rejects_short_first_horizon_and_bad_schedules() {
        let pr = Problem::new(
            MonotoneOperator::linear(vec![vec![1.0]]).unwrap(),
            CoefficientSpec::constant(1.0, 0.0),
            ForcingSpec::Zero,
            vec![1.0],
        )
        .unwrap();
        let opts = HalflineOptions {
            window: 5.0,
            n0: 8.0,
            ..Default::default()
        };
        assert!(matches!(solve_halfline(&pr, &opts), Err(Error::InvalidParameter(_))));
        let ok = HalflineOptions {
            window: 2.0,
            n0: 4.0,
            ..Default::default()
        };
        assert!(solve_halfline_closure(&pr, &ok, &[0.0]).is_err());
        assert!(solve_halfline_closure(&pr, &ok, &[]).is_err());
    }
}
