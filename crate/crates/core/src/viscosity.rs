//! First-order flows `u' + Au + f ∋ 0` and their second-order approximations
//! `ε u'' − u' ∈ Au + f` on the half-line.
//!
//! The wave-equation analogue (fourth order in time) is not covered: it
//! would need a phase-space reformulation as a first-order system before the
//! same machinery applies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvp::weighted_asymmetry;
use crate::error::{check_dim, Error, Result};
use crate::forcing::ForcingSpec;
use crate::grid::{cells_for, Grid, GridSolution};
use crate::halfline::{solve_halfline, HalflineOptions};
use crate::linalg;
use crate::operators::{DiffusionReactionOp, MonotoneOperator, OperatorSpec, ScalarGraph, ScalarMap};
use crate::problem::Problem;
use crate::weights::{build_weights, CoefficientSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diffusivity {
    Constant(f64),
    /// Values at all `m + 2` grid points, boundary points included.
    Samples(Vec<f64>),
}

/// `−(r u_x)_x + β(u)` on an interval with zero Dirichlet values, discretized
/// on `m` interior points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReactionSpec {
    pub interval: [f64; 2],
    pub nodes: usize,
    pub diffusivity: Diffusivity,
    /// `None` means `β = 0`.
    #[serde(default)]
    pub reaction: Option<ScalarGraph>,
}

impl DiffusionReactionSpec {
    pub fn spacing(&self) -> f64 {
        (self.interval[1] - self.interval[0]) / (self.nodes + 1) as f64
    }

    /// Interior points `x_1..x_m`.
    pub fn points(&self) -> Vec<f64> {
        let hx = self.spacing();
        (1..=self.nodes).map(|j| self.interval[0] + j as f64 * hx).collect()
    }

    pub(crate) fn assemble(&self) -> Result<DiffusionReactionOp> {
        let m = self.nodes;
        if m == 0 {
            return Err(Error::invalid("diffusion-reaction needs at least one interior node"));
        }
        if !(self.interval[1] > self.interval[0]) {
            return Err(Error::invalid("diffusion-reaction interval is empty"));
        }
        let r: Vec<f64> = match &self.diffusivity {
            Diffusivity::Constant(c) => vec![*c; m + 2],
            Diffusivity::Samples(s) => {
                check_dim(m + 2, s.len())?;
                s.clone()
            }
        };
        if let Some(bad) = r.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("diffusivity must be nonnegative, got {bad}")));
        }
        let hx2 = self.spacing().powi(2);
        // r_{j+1/2} between points j and j+1, j = 0..=m.
        let mid: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for j in 0..m {
            diag[j] = (mid[j] + mid[j + 1]) / hx2;
            if j > 0 {
                lower[j] = -mid[j] / hx2;
            }
            if j + 1 < m {
                upper[j] = -mid[j + 1] / hx2;
            }
        }
        let beta = match self.reaction {
            None => ScalarMap::Zero,
            Some(g) => ScalarMap::from_graph(g)?,
        };
        Ok(DiffusionReactionOp {
            lower,
            diag,
            upper,
            beta,
        })
    }
}

pub fn build_diffusion_reaction(spec: &DiffusionReactionSpec) -> Result<MonotoneOperator> {
    MonotoneOperator::from_spec(&OperatorSpec::DiffusionReaction(spec.clone()))
}

/// Dense copy of the assembled `L`, row-major.
pub fn diffusion_matrix(spec: &DiffusionReactionSpec) -> Result<Vec<f64>> {
    let op = spec.assemble()?;
    let m = spec.nodes;
    let mut out = vec![0.0; m * m];
    for j in 0..m {
        out[j * m + j] = op.diag[j];
        if j > 0 {
            out[j * m + j - 1] = op.lower[j];
        }
        if j + 1 < m {
            out[j * m + j + 1] = op.upper[j];
        }
    }
    Ok(out)
}

/// Proximal Euler `u^{k+1} = J_τ(u^k − τ f(t_{k+1}))` on `[0, T]`.
pub fn solve_reduced_flow(
    op: &MonotoneOperator,
    f: &ForcingSpec,
    x: &[f64],
    horizon: f64,
    tau: f64,
) -> Result<GridSolution> {
    let d = op.dim();
    check_dim(d, x.len())?;
    f.validate(d)?;
    let steps = cells_for(horizon, tau)?;
    let grid = Grid::new(horizon, steps.max(4) - 1)?;
    let tau = grid.step();
    let mut values = vec![0.0; grid.len() * d];
    values[..d].copy_from_slice(x);
    let mut rhs = vec![0.0; d];
    let mut next = vec![0.0; d];
    for k in 0..grid.len() - 1 {
        f.eval(grid.node(k + 1), &mut rhs);
        for c in 0..d {
            rhs[c] = values[k * d + c] - tau * rhs[c];
        }
        op.resolve_into(tau, &rhs, &mut next)?;
        values[(k + 1) * d..(k + 2) * d].copy_from_slice(&next);
    }
    Ok(GridSolution::from_values(grid, d, values, 0.0, grid.len() - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscosityConfig {
    /// Strictly decreasing positive values.
    pub eps: Vec<f64>,
    /// Step of the reference flow; must divide `h`.
    pub tau: f64,
    pub window: f64,
    pub h: f64,
    pub n0: f64,
    pub tol: f64,
    pub max_doublings: usize,
}

impl ViscosityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() {
            return Err(Error::invalid("epsilon list is empty"));
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::invalid("epsilon values must be positive"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("epsilon values must be strictly decreasing"));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("reference time step must be positive"));
        }
        cells_for(self.h, self.tau)?;
        Ok(())
    }

    fn halfline(&self) -> HalflineOptions {
        HalflineOptions {
            h: self.h,
            window: self.window,
            n0: self.n0,
            tol: self.tol,
            max_doublings: self.max_doublings,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscosityRow {
    pub eps: f64,
    /// Sup over window nodes of the distance to the reference flow.
    pub sup_error: Option<f64>,
    pub solver_status: String,
    pub horizon_used: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscosityTable {
    pub rows: Vec<ViscosityRow>,
}

impl ViscosityTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,sup_error,solver_status,horizon_used\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{},{},{}\n",
                r.eps,
                fmt(r.sup_error),
                r.solver_status,
                fmt(r.horizon_used)
            ));
        }
        out
    }

    /// Errors shrink (weakly) as `ε` decreases; failed rows break the chain.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| match (w[0].sup_error, w[1].sup_error) {
            (Some(a), Some(b)) => b <= a,
            _ => false,
        })
    }
}

/// The `ε`-problem `ε u'' − u' ∈ Au + f`, `u(0) = x`.
pub fn viscous_problem(op: &MonotoneOperator, f: &ForcingSpec, x: &[f64], eps: f64) -> Result<Problem> {
    Problem::new(op.clone(), CoefficientSpec::constant(eps, -1.0), f.clone(), x.to_vec())
}

/// Solves the `ε`-problem for every `ε` and compares with the reference flow.
///
/// Each `ε` runs independently; the table keeps the order of `config.eps`.
pub fn viscosity_sweep(
    op: &MonotoneOperator,
    f: &ForcingSpec,
    x: &[f64],
    config: &ViscosityConfig,
) -> Result<ViscosityTable> {
    config.validate()?;
    let reference = solve_reduced_flow(op, f, x, config.window, config.tau)?;
    let stride = cells_for(config.h, config.tau)?;
    let window_cells = cells_for(config.window, config.h)?;
    let opts = config.halfline();
    let rows = config
        .eps
        .par_iter()
        .map(|&eps| {
            let run = || -> Result<(f64, Option<f64>)> {
                let problem = viscous_problem(op, f, x, eps)?;
                let (sol, report) = solve_halfline(&problem, &opts)?;
                let err = (0..=window_cells)
                    .map(|i| linalg::dist(sol.value(i), reference.value(i * stride)))
                    .fold(0.0, f64::max);
                Ok((err, report.accepted_horizon))
            };
            match run() {
                Ok((err, horizon)) => ViscosityRow {
                    eps,
                    sup_error: Some(err),
                    solver_status: "ok".into(),
                    horizon_used: horizon,
                },
                Err(e) => {
                    let horizon = match &e {
                        Error::CascadeDiverged { report } => report.horizons.last().copied(),
                        _ => None,
                    };
                    ViscosityRow {
                        eps,
                        sup_error: None,
                        solver_status: status_word(&e),
                        horizon_used: horizon,
                    }
                }
            }
        })
        .collect();
    Ok(ViscosityTable { rows })
}

fn status_word(e: &Error) -> String {
    match e {
        Error::NotConverged { .. } => "not-converged".into(),
        Error::CascadeDiverged { .. } => "cascade-diverged".into(),
        e if e.is_validation() => "invalid".into(),
        _ => "error".into(),
    }
}

/// Decay rate of the bounded solution of `ε u'' − u' = α u`.
pub fn characteristic_root(eps: f64, alpha: f64) -> f64 {
    (1.0 - (1.0 + 4.0 * eps * alpha).sqrt()) / (2.0 * eps)
}

/// Weighted asymmetry of the linear part of the discrete `ε`-problem in
/// `(t, x)`: `−(1/b)(a u')'` in time plus `L` in space, with weight
/// `diag(bᵢ h) ⊗ I`.
pub fn space_time_asymmetry(spec: &DiffusionReactionSpec, eps: f64, grid: &Grid) -> Result<f64> {
    let weights = build_weights(&CoefficientSpec::constant(eps, -1.0), grid)?;
    let time = weighted_asymmetry(&weights);
    // In space the weight is the same bᵢ h on both sides of each pair, so the
    // check reduces to the symmetry of L itself.
    let op = spec.assemble()?;
    let mut space: f64 = 0.0;
    for j in 0..spec.nodes.saturating_sub(1) {
        let (a, b) = (op.upper[j], op.lower[j + 1]);
        let scale = a.abs().max(b.abs());
        if scale > 0.0 {
            space = space.max((a - b).abs() / scale);
        }
    }
    Ok(time.max(space))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: usize, reaction: Option<ScalarGraph>) -> DiffusionReactionSpec {
        DiffusionReactionSpec {
            interval: [0.0, 1.0],
            nodes: m,
            diffusivity: Diffusivity::Constant(1.0),
            reaction,
        }
    }

    #[test]
    fn standard_stencil() {
        let l = diffusion_matrix(&spec(3, None)).unwrap();
        let expected = [32.0, -16.0, 0.0, -16.0, 32.0, -16.0, 0.0, -16.0, 32.0];
        for (a, b) in l.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_resolvent_matches_direct_solve() {
        let s = spec(16, None);
        let op = build_diffusion_reaction(&s).unwrap();
        let z: Vec<f64> = (0..16).map(|j| ((j * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let lambda = 1.0;
        let u = op.resolve(lambda, &z).unwrap();
        let a = s.assemble().unwrap();
        let lower: Vec<f64> = a.lower.iter().map(|v| lambda * v).collect();
        let upper: Vec<f64> = a.upper.iter().map(|v| lambda * v).collect();
        let diag: Vec<f64> = a.diag.iter().map(|v| 1.0 + lambda * v).collect();
        let direct = linalg::solve_tridiagonal(&lower, &diag, &upper, &z).unwrap();
        assert!(linalg::dist(&u, &direct) < 1e-12);
        assert_eq!(op.resolve(lambda, &[0.0; 16]).unwrap(), vec![0.0; 16]);
    }

    #[test]
    fn negative_diffusivity_rejected() {
        let mut s = spec(3, None);
        s.diffusivity = Diffusivity::Samples(vec![1.0, -1.0, 1.0, 1.0, 1.0]);
        assert!(build_diffusion_reaction(&s).is_err());
    }

    #[test]
    fn reduced_flow_examples() {
        let lin = MonotoneOperator::linear(vec![vec![1.0]]).unwrap();
        let tau = 0.01;
        let flow = solve_reduced_flow(&lin, &ForcingSpec::Zero, &[1.0], 1.0, tau).unwrap();
        for k in 0..flow.len() {
            assert!((flow.value(k)[0] - (1.0 + tau).powi(-(k as i32))).abs() < 1e-13);
        }
        let sign = MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap();
        let flow = solve_reduced_flow(&sign, &ForcingSpec::Zero, &[2.0], 3.0, tau).unwrap();
        let extinct = (0..flow.len()).find(|&k| flow.value(k)[0] == 0.0).unwrap();
        assert!((flow.t(extinct) - 2.0).abs() <= tau + 1e-12);
        assert!((extinct..flow.len()).all(|k| flow.value(k)[0] == 0.0));
    }

    #[test]
    fn characteristic_root_limit() {
        assert!((characteristic_root(1e-6, 1.0) + 1.0).abs() < 1e-5);
        let r = characteristic_root(0.5, 2.0);
        assert!((0.5 * r * r - r - 2.0).abs() < 1e-12);
    }
}
