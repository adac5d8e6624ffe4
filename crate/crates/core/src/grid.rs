use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Uniform grid `t_i = i h`, `i = 0..=N+1`, on `[0, T]` with `h = T/(N+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    horizon: f64,
    interior: usize,
}

impl Grid {
    pub fn new(horizon: f64, interior: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("grid horizon must be positive, got {horizon}")));
        }
        if interior < 3 {
            return Err(Error::invalid(format!("grid needs at least 3 interior nodes, got {interior}")));
        }
        Ok(Grid { horizon, interior })
    }

    /// Grid with step `h`; `T/h` must be an integer up to rounding.
    pub fn with_step(horizon: f64, h: f64) -> Result<Self> {
        let cells = cells_for(horizon, h)?;
        Grid::new(horizon, cells - 1)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of interior nodes `N`.
    pub fn interior(&self) -> usize {
        self.interior
    }

    /// Total node count `N + 2`.
    pub fn len(&self) -> usize {
        self.interior + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / (self.interior + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.interior + 1 {
            self.horizon
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

/// Number of cells of width `h` in `[0, length]`, insisting on an integer ratio.
pub(crate) fn cells_for(length: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("grid step must be positive, got {h}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid(format!("interval length must be positive, got {length}")));
    }
    let ratio = length / h;
    let cells = ratio.round();
    if (ratio - cells).abs() > 1e-8 * ratio.max(1.0) || cells < 1.0 {
        return Err(Error::invalid(format!("length {length} is not a multiple of the step {h}")));
    }
    Ok(cells as usize)
}

/// Vector-valued grid function with derivative estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub grid: Grid,
    pub dim: usize,
    /// `(N + 2) * dim` values, node-major.
    pub values: Vec<f64>,
    /// Central differences, second-order one-sided at the ends.
    pub derivatives: Vec<f64>,
    /// Sup over interior nodes of the resolvent fixed-point gap.
    pub residual: f64,
    pub iterations: usize,
}

impl GridSolution {
    pub(crate) fn from_values(grid: Grid, dim: usize, values: Vec<f64>, residual: f64, iterations: usize) -> Self {
        let derivatives = central_differences(&values, dim, grid.step());
        GridSolution {
            grid,
            dim,
            values,
            derivatives,
            residual,
            iterations,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        self.grid.node(i)
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.derivatives[i * self.dim..(i + 1) * self.dim]
    }

    /// Piecewise-linear value at `t` in `[0, T]`.
    pub fn value_at(&self, t: f64) -> Result<Vec<f64>> {
        let horizon = self.grid.horizon();
        if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::invalid(format!("time {t} outside [0, {horizon}]")));
        }
        let s = (t / self.grid.step()).min((self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        let w = s - i as f64;
        Ok(self
            .value(i)
            .iter()
            .zip(self.value(i + 1))
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect())
    }

    /// First `cells + 1` nodes as a solution on `[0, cells h]`.
    pub fn restrict(&self, cells: usize) -> Result<GridSolution> {
        if cells + 1 > self.len() || cells < 4 {
            return Err(Error::invalid(format!("cannot restrict {} nodes to {} cells", self.len(), cells)));
        }
        let h = self.grid.step();
        let grid = Grid::new(cells as f64 * h, cells - 1)?;
        let values = self.values[..(cells + 1) * self.dim].to_vec();
        let derivatives = self.derivatives[..(cells + 1) * self.dim].to_vec();
        Ok(GridSolution {
            grid,
            dim: self.dim,
            values,
            derivatives,
            residual: self.residual,
            iterations: self.iterations,
        })
    }

    /// Sup over the first `count` nodes of the pointwise distance.
    pub fn sup_distance(&self, other: &GridSolution, count: usize) -> f64 {
        (0..count.min(self.len()).min(other.len()))
            .map(|i| linalg::dist(self.value(i), other.value(i)))
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,u_1,..,u_d` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.dim {
            out.push_str(&format!(",u_{k}"));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!("{:.16e}", self.t(i)));
            for v in self.value(i) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn central_differences(values: &[f64], dim: usize, h: f64) -> Vec<f64> {
    let n = values.len() / dim;
    let mut out = vec![0.0; values.len()];
    let at = |i: usize, k: usize| values[i * dim + k];
    for k in 0..dim {
        for i in 1..n - 1 {
            out[i * dim + k] = (at(i + 1, k) - at(i - 1, k)) / (2.0 * h);
        }
        out[k] = (-3.0 * at(0, k) + 4.0 * at(1, k) - at(2, k)) / (2.0 * h);
        let l = n - 1;
        out[l * dim + k] = (3.0 * at(l, k) - 4.0 * at(l - 1, k) + at(l - 2, k)) / (2.0 * h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_nodes() {
        let g = Grid::with_step(1.0, 0.25).unwrap();
        assert_eq!(g.interior(), 3);
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Grid::with_step(1.0, 0.3).is_err());
        assert!(Grid::new(1.0, 2).is_err());
    }

    #[test]
    fn derivatives_exact_for_quadratics() {
        let g = Grid::with_step(1.0, 0.1).unwrap();
        let values: Vec<f64> = g.nodes().iter().map(|t| t * t).collect();
        let sol = GridSolution::from_values(g, 1, values, 0.0, 0);
        for i in 0..sol.len() {
            assert!((sol.derivative(i)[0] - 2.0 * sol.t(i)).abs() < 1e-12);
        }
        assert!((sol.value_at(0.55).unwrap()[0] - 0.305).abs() < 1e-12);
        let r = sol.restrict(5).unwrap();
        assert!((r.grid.horizon() - 0.5).abs() < 1e-15);
        assert_eq!(r.len(), 6);
    }
}
