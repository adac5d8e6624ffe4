//! `S(t)x = u(t; x, 0)`: the bounded solution with zero forcing, evaluated by
//! fresh half-line solves rather than by time stepping.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::forcing::ForcingSpec;
use crate::grid::GridSolution;
use crate::halfline::{solve_halfline, HalflineOptions};
use crate::linalg;
use crate::operators::MonotoneOperator;
use crate::problem::Problem;
use crate::weights::CoefficientSpec;

type CacheKey = (Vec<u64>, u64);

pub struct SemigroupHandle {
    problem: Problem,
    opts: HalflineOptions,
    cache: RwLock<HashMap<CacheKey, GridSolution>>,
}

impl SemigroupHandle {
    pub fn new(operator: MonotoneOperator, coefficients: CoefficientSpec, opts: HalflineOptions) -> Result<Self> {
        opts.validate()?;
        let d = operator.dim();
        let problem = Problem::new(operator, coefficients, ForcingSpec::Zero, vec![0.0; d])?;
        Ok(SemigroupHandle {
            problem,
            opts,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn options(&self) -> &HalflineOptions {
        &self.opts
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// Window solution from `x` covering at least `[0, t]`.
    pub fn trajectory(&self, x: &[f64], t: f64) -> Result<GridSolution> {
        check_dim(self.dim(), x.len())?;
        let h = self.opts.h;
        let window = if t <= self.opts.window {
            self.opts.window
        } else {
            (t / h).ceil() * h
        };
        let key = (x.iter().map(|v| v.to_bits()).collect(), window.to_bits());
        if let Some(sol) = self.cache.read().unwrap().get(&key) {
            return Ok(sol.clone());
        }
        let mut opts = self.opts;
        opts.window = window;
        if opts.n0 < 2.0 * window {
            opts.n0 = cells_for_at_least(2.0 * window, h) as f64 * h;
        }
        let (sol, _) = solve_halfline(&self.problem.with_x(x.to_vec())?, &opts)?;
        self.cache.write().unwrap().insert(key, sol.clone());
        Ok(sol)
    }

    /// `S(t)x`.
    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("time must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(x.to_vec());
        }
        self.trajectory(x, t)?.value_at(t)
    }
}

fn cells_for_at_least(length: f64, h: f64) -> usize {
    (length / h - 1e-9).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    /// `‖S(s + t)x − S(s)S(t)x‖`.
    pub gap: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_semigroup_law(handle: &SemigroupHandle, s: f64, t: f64, x: &[f64], tol: f64) -> Result<LawReport> {
    if s < 0.0 || t < 0.0 {
        return Err(Error::invalid("semigroup times must be nonnegative"));
    }
    let direct = handle.evaluate(s + t, x)?;
    let mid = handle.evaluate(t, x)?;
    let composed = handle.evaluate(s, &mid)?;
    let gap = linalg::dist(&direct, &composed);
    Ok(LawReport {
        gap,
        tol,
        pass: gap <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub tol: f64,
    pub pass: bool,
}

fn symmetric_matrix(matrix: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = matrix.len();
    if d == 0 || d > 16 {
        return Err(Error::invalid(format!("generator check needs 1 <= d <= 16, got {d}")));
    }
    for row in matrix {
        check_dim(d, row.len())?;
    }
    let m = DMatrix::from_fn(d, d, |r, c| matrix[r][c]);
    let scale = m.amax().max(1.0);
    if (&m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::invalid("generator check needs a symmetric matrix"));
    }
    Ok(m)
}

/// `exp(−√M t) x` by eigendecomposition.
pub fn sqrt_semigroup_oracle(matrix: &[Vec<f64>], x: &[f64], t: f64) -> Result<Vec<f64>> {
    let m = symmetric_matrix(matrix)?;
    check_dim(m.nrows(), x.len())?;
    let eig = m.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|l| *l < -1e-12 * scale) {
        return Err(Error::Hypothesis {
            hypothesis: "monotonicity",
            detail: "matrix is indefinite".into(),
        });
    }
    let q = &eig.eigenvectors;
    let xv = nalgebra::DVector::from_column_slice(x);
    let mut coeffs = q.transpose() * xv;
    for (c, l) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= (-l.max(0.0).sqrt() * t).exp();
    }
    Ok((q * coeffs).iter().cloned().collect())
}

/// Compares `S(t)x` for `A = M`, `p ≡ 1`, `q ≡ 0` with `exp(−√M t)x`.
pub fn check_generator_sqrt(
    matrix: &[Vec<f64>],
    x: &[f64],
    times: &[f64],
    opts: &HalflineOptions,
    tol: f64,
) -> Result<GeneratorReport> {
    symmetric_matrix(matrix)?;
    let op = MonotoneOperator::linear(matrix.to_vec())?;
    let handle = SemigroupHandle::new(op, CoefficientSpec::constant(1.0, 0.0), *opts)?;
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let approx = handle.evaluate(t, x)?;
        let exact = sqrt_semigroup_oracle(matrix, x, t)?;
        errors.push(linalg::dist(&approx, &exact));
    }
    let max_error = errors.iter().cloned().fold(0.0, f64::max);
    Ok(GeneratorReport {
        times: times.to_vec(),
        errors,
        max_error,
        tol,
        pass: max_error <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ScalarGraph;

    fn opts() -> HalflineOptions {
        HalflineOptions {
            h: 0.01,
            window: 2.0,
            n0: 4.0,
            tol: 1e-6,
            ..Default::default()
        }
    }

    #[test]
    fn identity_at_zero_and_zero_is_fixed() {
        let op = MonotoneOperator::linear(vec![vec![4.0]]).unwrap();
        let s = SemigroupHandle::new(op, CoefficientSpec::constant(1.0, 0.0), opts()).unwrap();
        assert_eq!(s.evaluate(0.0, &[0.7]).unwrap(), vec![0.7]);
        assert_eq!(s.evaluate(1.0, &[0.0]).unwrap(), vec![0.0]);
        let v = s.evaluate(1.0, &[1.0]).unwrap()[0];
        assert!((v - (-2.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn law_for_sign_graph() {
        let op = MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap();
        let s = SemigroupHandle::new(op, CoefficientSpec::constant(1.0, 0.0), opts()).unwrap();
        // Closed form from x = 2: u = (t - 2)²/2 up to t = 2, then 0.
        let v = s.evaluate(1.0, &[2.0]).unwrap()[0];
        assert!((v - 0.5).abs() < 1e-3, "{v}");
        let report = check_semigroup_law(&s, 1.0, 1.0, &[2.0], 1e-3).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn generator_rejects_nonsymmetric() {
        let bad = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
        assert!(check_generator_sqrt(&bad, &[1.0, 0.0], &[1.0], &opts(), 1e-3).is_err());
        let zero = vec![vec![0.0]];
        assert_eq!(sqrt_semigroup_oracle(&zero, &[3.0], 2.0).unwrap(), vec![3.0]);
    }
}
