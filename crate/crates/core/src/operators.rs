//! Maximal monotone operators on `ℝ^d`, accessed only through resolvents.
//!
//! Every operator here has `[0, 0]` in its graph, so `J_λ(0) = 0` and
//! `A_λ(0) = 0`. The available kinds are
//!
//! * `zero`: `A ≡ 0`;
//! * `linear`: `A x = M x` with a positive semidefinite `M`;
//! * `scalar-graph`: a monotone scalar graph applied to each component;
//! * `potential`: the subdifferential of a convex potential `φ` with
//!   `φ(0) = 0 = min φ`; its resolvent is the proximal map of `λφ`;
//! * `diffusion-reaction`: `A u = L u + β(u)` with `L` a symmetric tridiagonal
//!   discretization of `−(r u_x)_x` and `β` a pointwise scalar graph;
//! * `shifted`: `A x = A_base(x + v₀)`, which turns an operator with
//!   `0 ∈ A_base(v₀)` into one whose graph contains the origin. The resolvent
//!   translates as `J_λ(z) = J^base_λ(z + v₀) − v₀`.

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, ChainOptions, NodeMap, SweepMethod};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::viscosity::DiffusionReactionSpec;

/// Monotone scalar graphs that can be applied componentwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "kebab-case")]
pub enum ScalarGraph {
    /// The subdifferential of `|·|`.
    Sign,
    /// `y ↦ |y|^{m−1} y`.
    Power { exponent: f64 },
}

/// Convex potentials with `φ(0) = 0 = min φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "kebab-case")]
pub enum ConvexPotential {
    /// `½ xᵀ M x`, `M` symmetric positive semidefinite.
    Quadratic { matrix: Vec<Vec<f64>> },
    /// `Σ |x_k|`.
    Abs,
    /// `Σ ½ max(x_k, 0)²`.
    PositivePartSquared,
    /// `Σ |x_k|^{m+1} / (m + 1)`.
    Power { exponent: f64 },
}

/// JSON descriptor: `{"kind": "...", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum OperatorSpec {
    Zero {
        dim: usize,
    },
    Linear {
        matrix: Vec<Vec<f64>>,
    },
    ScalarGraph {
        #[serde(flatten)]
        graph: ScalarGraph,
        #[serde(default = "one")]
        dim: usize,
    },
    Potential {
        #[serde(flatten)]
        potential: ConvexPotential,
        #[serde(default = "one")]
        dim: usize,
    },
    DiffusionReaction(DiffusionReactionSpec),
    Shifted {
        base: Box<OperatorSpec>,
        offset: Vec<f64>,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum ScalarMap {
    Zero,
    Sign,
    Power(f64),
    PositivePart,
}

impl ScalarMap {
    pub(crate) fn resolve(self, lambda: f64, z: f64) -> f64 {
        match self {
            ScalarMap::Zero => z,
            ScalarMap::Sign => z.signum() * (z.abs() - lambda).max(0.0),
            ScalarMap::PositivePart => {
                if z > 0.0 {
                    z / (1.0 + lambda)
                } else {
                    z
                }
            }
            ScalarMap::Power(m) => z.signum() * power_root(lambda, m, z.abs()),
        }
    }

    /// Generalized derivative of the scalar resolvent.
    pub(crate) fn slope(self, lambda: f64, z: f64) -> f64 {
        match self {
            ScalarMap::Zero => 1.0,
            ScalarMap::Sign => {
                if z.abs() > lambda {
                    1.0
                } else {
                    0.0
                }
            }
            ScalarMap::PositivePart => {
                if z > 0.0 {
                    1.0 / (1.0 + lambda)
                } else {
                    1.0
                }
            }
            ScalarMap::Power(m) => {
                let s = power_root(lambda, m, z.abs());
                if s > 0.0 {
                    1.0 / (1.0 + lambda * m * s.powf(m - 1.0))
                } else if m > 1.0 {
                    1.0
                } else if m == 1.0 {
                    1.0 / (1.0 + lambda)
                } else {
                    0.0
                }
            }
        }
    }

    fn min_section(self, x: f64) -> f64 {
        match self {
            ScalarMap::Zero => 0.0,
            ScalarMap::Sign => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            ScalarMap::PositivePart => x.max(0.0),
            ScalarMap::Power(m) => x.signum() * x.abs().powf(m),
        }
    }

    pub(crate) fn potential(self, x: f64) -> f64 {
        match self {
            ScalarMap::Zero => 0.0,
            ScalarMap::Sign => x.abs(),
            ScalarMap::PositivePart => 0.5 * x.max(0.0).powi(2),
            ScalarMap::Power(m) => x.abs().powf(m + 1.0) / (m + 1.0),
        }
    }

    /// Least-norm element of `β(x) + c`; only the sign graph is multivalued.
    fn min_shifted(self, x: f64, c: f64) -> f64 {
        match self {
            ScalarMap::Sign if x == 0.0 => c + (-c).clamp(-1.0, 1.0),
            _ => c + self.min_section(x),
        }
    }

    pub(crate) fn from_graph(g: ScalarGraph) -> Result<Self> {
        match g {
            ScalarGraph::Sign => Ok(ScalarMap::Sign),
            ScalarGraph::Power { exponent } => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid(format!("power exponent must be positive, got {exponent}")));
                }
                Ok(ScalarMap::Power(exponent))
            }
        }
    }
}

/// Nonnegative root `s` of `s + λ s^m = a` for `a ≥ 0`.
fn power_root(lambda: f64, m: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if m == 1.0 {
        return a / (1.0 + lambda);
    }
    let mut lo = 0.0;
    let mut hi = a.min((a / lambda).powf(1.0 / m));
    let mut s = hi;
    for _ in 0..200 {
        let f = s + lambda * s.powf(m) - a;
        if f == 0.0 {
            return s;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let df = 1.0 + lambda * m * s.powf(m - 1.0);
        let mut next = s - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 4.0 * f64::EPSILON * s.max(f64::MIN_POSITIVE) {
            return next;
        }
        s = next;
    }
    s
}

#[derive(Clone, Debug)]
pub(crate) struct DiffusionReactionOp {
    /// `L[j][j-1]`, `L[j][j]`, `L[j][j+1]`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub beta: ScalarMap,
}

#[derive(Clone, Debug)]
enum Kind {
    Zero,
    Linear { matrix: Vec<f64>, symmetric: bool },
    Pointwise(ScalarMap),
    DiffusionReaction(DiffusionReactionOp),
    Shifted { base: Box<MonotoneOperator>, offset: Vec<f64> },
}

/// A maximal monotone operator on `ℝ^d` whose graph contains `[0, 0]`.
#[derive(Clone, Debug)]
pub struct MonotoneOperator {
    dim: usize,
    kind: Kind,
    spec: OperatorSpec,
}

/// Tolerance for the implicit diffusion-reaction resolvent.
const INNER_TOL: f64 = 1e-12;
const INNER_MAX_SWEEPS: usize = 100_000;

impl MonotoneOperator {
    pub fn zero(dim: usize) -> Self {
        MonotoneOperator {
            dim,
            kind: Kind::Zero,
            spec: OperatorSpec::Zero { dim },
        }
    }

    pub fn linear(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_spec(&OperatorSpec::Linear { matrix })
    }

    pub fn scalar_graph(graph: ScalarGraph, dim: usize) -> Result<Self> {
        Self::from_spec(&OperatorSpec::ScalarGraph { graph, dim })
    }

    pub fn potential(potential: ConvexPotential, dim: usize) -> Result<Self> {
        Self::from_spec(&OperatorSpec::Potential { potential, dim })
    }

    pub fn shifted(base: OperatorSpec, offset: Vec<f64>) -> Result<Self> {
        Self::from_spec(&OperatorSpec::Shifted {
            base: Box::new(base),
            offset,
        })
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<Self> {
        let (dim, kind) = match spec {
            OperatorSpec::Zero { dim } => (*dim, Kind::Zero),
            OperatorSpec::Linear { matrix } => {
                let (dim, flat) = flatten_matrix(matrix)?;
                let symmetric = check_monotone_matrix(&flat, dim)?;
                (dim, Kind::Linear { matrix: flat, symmetric })
            }
            OperatorSpec::ScalarGraph { graph, dim } => (*dim, Kind::Pointwise(ScalarMap::from_graph(*graph)?)),
            OperatorSpec::Potential { potential, dim } => match potential {
                ConvexPotential::Quadratic { matrix } => {
                    let (d, flat) = flatten_matrix(matrix)?;
                    if !check_monotone_matrix(&flat, d)? {
                        return Err(Error::invalid("quadratic potential needs a symmetric matrix"));
                    }
                    (d, Kind::Linear { matrix: flat, symmetric: true })
                }
                ConvexPotential::Abs => (*dim, Kind::Pointwise(ScalarMap::Sign)),
                ConvexPotential::PositivePartSquared => (*dim, Kind::Pointwise(ScalarMap::PositivePart)),
                ConvexPotential::Power { exponent } => (
                    *dim,
                    Kind::Pointwise(ScalarMap::from_graph(ScalarGraph::Power { exponent: *exponent })?),
                ),
            },
            OperatorSpec::DiffusionReaction(dr) => {
                let op = dr.assemble()?;
                (op.diag.len(), Kind::DiffusionReaction(op))
            }
            OperatorSpec::Shifted { base, offset } => {
                let base = MonotoneOperator::from_spec(base)?;
                check_dim(base.dim, offset.len())?;
                // 0 ∈ A_base(v₀) exactly when v₀ is a fixed point of the resolvent.
                let fixed = base.resolve(1.0, offset)?;
                let gap = linalg::dist(&fixed, offset);
                if gap > 1e-10 * (1.0 + linalg::norm(offset)) {
                    return Err(Error::Hypothesis {
                        hypothesis: "monotonicity",
                        detail: format!("shift offset is not a zero of the base operator (gap {gap:e})"),
                    });
                }
                (
                    base.dim,
                    Kind::Shifted {
                        base: Box::new(base),
                        offset: offset.clone(),
                    },
                )
            }
        };
        if dim == 0 {
            return Err(Error::invalid("operator dimension must be positive"));
        }
        Ok(MonotoneOperator {
            dim,
            kind,
            spec: spec.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    /// `J_λ z = (I + λA)^{-1} z`.
    pub fn resolve(&self, lambda: f64, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.resolve_into(lambda, z, &mut out)?;
        Ok(out)
    }

    pub fn resolve_into(&self, lambda: f64, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_lambda(lambda)?;
        check_dim(self.dim, z.len())?;
        check_dim(self.dim, out.len())?;
        match &self.kind {
            Kind::Zero => out.copy_from_slice(z),
            Kind::Linear { matrix, .. } => {
                let d = self.dim;
                if d == 1 {
                    out[0] = z[0] / (1.0 + lambda * matrix[0]);
                } else {
                    let mut a = shifted_identity(matrix, d, lambda);
                    out.copy_from_slice(z);
                    linalg::lu_solve_in_place(&mut a, d, out, 1)?;
                }
            }
            Kind::Pointwise(map) => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = map.resolve(lambda, v);
                }
            }
            Kind::DiffusionReaction(op) => op.resolve(lambda, z, out)?,
            Kind::Shifted { base, offset } => {
                let moved: Vec<f64> = z.iter().zip(offset).map(|(a, b)| a + b).collect();
                base.resolve_into(lambda, &moved, out)?;
                for (o, b) in out.iter_mut().zip(offset) {
                    *o -= b;
                }
            }
        }
        Ok(())
    }

    /// Yosida approximation `A_λ z = (z − J_λ z)/λ`.
    pub fn yosida(&self, lambda: f64, z: &[f64]) -> Result<Vec<f64>> {
        let j = self.resolve(lambda, z)?;
        Ok(z.iter().zip(&j).map(|(a, b)| (a - b) / lambda).collect())
    }

    /// Least-norm element `A⁰x` of `A(x)`.
    pub fn min_section(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let out = match &self.kind {
            Kind::Zero => vec![0.0; self.dim],
            Kind::Linear { matrix, .. } => {
                let mut y = vec![0.0; self.dim];
                linalg::mat_vec(matrix, self.dim, x, &mut y);
                y
            }
            Kind::Pointwise(map) => x.iter().map(|&v| map.min_section(v)).collect(),
            Kind::DiffusionReaction(op) => {
                let lx = op.apply_l(x);
                x.iter().zip(&lx).map(|(&v, &c)| op.beta.min_shifted(v, c)).collect()
            }
            Kind::Shifted { base, offset } => {
                let moved: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a + b).collect();
                base.min_section(&moved)?
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{x:?}")));
        }
        Ok(out)
    }

    /// Generalized derivative of `z ↦ J_λ z`, row-major `d × d`.
    ///
    /// Exact for the closed-form kinds; for the diffusion-reaction kind it is
    /// the derivative on the active set of the computed resolvent.
    pub fn resolvent_jacobian(&self, lambda: f64, z: &[f64], jac: &mut [f64]) -> Result<()> {
        check_lambda(lambda)?;
        check_dim(self.dim, z.len())?;
        let d = self.dim;
        check_dim(d * d, jac.len())?;
        match &self.kind {
            Kind::Zero => identity(jac, d),
            Kind::Linear { matrix, .. } => {
                if d == 1 {
                    jac[0] = 1.0 / (1.0 + lambda * matrix[0]);
                } else {
                    let mut a = shifted_identity(matrix, d, lambda);
                    identity(jac, d);
                    linalg::lu_solve_in_place(&mut a, d, jac, d)?;
                }
            }
            Kind::Pointwise(map) => {
                jac.iter_mut().for_each(|v| *v = 0.0);
                for (k, &v) in z.iter().enumerate() {
                    jac[k * d + k] = map.slope(lambda, v);
                }
            }
            Kind::DiffusionReaction(op) => op.jacobian(lambda, z, jac)?,
            Kind::Shifted { base, offset } => {
                let moved: Vec<f64> = z.iter().zip(offset).map(|(a, b)| a + b).collect();
                base.resolvent_jacobian(lambda, &moved, jac)?;
            }
        }
        Ok(())
    }

    /// Value of the convex potential when `A = ∂φ` with `φ(0) = 0 = min φ`.
    pub fn potential_value(&self, x: &[f64]) -> Option<f64> {
        if x.len() != self.dim {
            return None;
        }
        match &self.kind {
            Kind::Zero => Some(0.0),
            Kind::Linear { matrix, symmetric } => {
                if !symmetric {
                    return None;
                }
                let mut y = vec![0.0; self.dim];
                linalg::mat_vec(matrix, self.dim, x, &mut y);
                Some(0.5 * linalg::dot(x, &y))
            }
            Kind::Pointwise(map) => Some(x.iter().map(|&v| map.potential(v)).sum()),
            Kind::DiffusionReaction(op) => {
                let lx = op.apply_l(x);
                Some(0.5 * linalg::dot(x, &lx) + x.iter().map(|&v| op.beta.potential(v)).sum::<f64>())
            }
            Kind::Shifted { .. } => None,
        }
    }

    pub fn has_potential(&self) -> bool {
        self.potential_value(&vec![0.0; self.dim]).is_some()
    }

    /// Matrix of a linear operator, row-major.
    pub fn linear_matrix(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Linear { matrix, .. } => Some(matrix),
            Kind::Zero => None,
            _ => None,
        }
    }

    /// True when the operator is affine-linear (zero or a matrix).
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Zero | Kind::Linear { .. })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("resolvent parameter must be positive, got {lambda}")));
    }
    Ok(())
}

fn identity(jac: &mut [f64], d: usize) {
    jac.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..d {
        jac[k * d + k] = 1.0;
    }
}

fn shifted_identity(matrix: &[f64], d: usize, lambda: f64) -> Vec<f64> {
    let mut a: Vec<f64> = matrix.iter().map(|m| lambda * m).collect();
    for k in 0..d {
        a[k * d + k] += 1.0;
    }
    a
}

fn flatten_matrix(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let mut flat = Vec::with_capacity(d * d);
    for row in rows {
        check_dim(d, row.len())?;
        flat.extend_from_slice(row);
    }
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    Ok((d, flat))
}

/// Checks that the symmetric part of `m` is positive semidefinite; returns
/// whether `m` itself is symmetric.
fn check_monotone_matrix(m: &[f64], d: usize) -> Result<bool> {
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut symmetric = true;
    let sym = nalgebra::DMatrix::from_fn(d, d, |r, c| {
        if (m[r * d + c] - m[c * d + r]).abs() > 1e-14 * scale {
            symmetric = false;
        }
        0.5 * (m[r * d + c] + m[c * d + r])
    });
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-12 * scale {
        return Err(Error::Hypothesis {
            hypothesis: "monotonicity",
            detail: format!("linear operator is not monotone (smallest eigenvalue of symmetric part {min:e})"),
        });
    }
    Ok(symmetric)
}

impl DiffusionReactionOp {
    pub(crate) fn apply_l(&self, x: &[f64]) -> Vec<f64> {
        let m = self.diag.len();
        (0..m)
            .map(|j| {
                let mut s = self.diag[j] * x[j];
                if j > 0 {
                    s += self.lower[j] * x[j - 1];
                }
                if j + 1 < m {
                    s += self.upper[j] * x[j + 1];
                }
                s
            })
            .collect()
    }

    fn chain<'a>(&self, lambda: f64, z: &[f64], nodes: &'a BetaNodes) -> Chain<'a> {
        let m = self.diag.len();
        let mut w_minus = Vec::with_capacity(m);
        let mut w_plus = Vec::with_capacity(m);
        let mut offset = Vec::with_capacity(m);
        for (j, (&c, &zj)) in nodes.scale.iter().zip(z).enumerate() {
            w_minus.push(-lambda * self.lower[j] / c);
            w_plus.push(-lambda * self.upper[j] / c);
            offset.push(zj / c);
        }
        Chain {
            d: 1,
            n: m,
            w_minus,
            w_plus,
            offset,
            map: nodes,
        }
    }

    fn nodes(&self, lambda: f64) -> BetaNodes {
        BetaNodes {
            beta: self.beta,
            scale: self.diag.iter().map(|l| 1.0 + lambda * l).collect(),
            lambda,
        }
    }

    /// Solves `(I + λL)u + λβ(u) ∋ z` node by node.
    fn resolve(&self, lambda: f64, z: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.diag.len();
        let nodes = self.nodes(lambda);
        let chain = self.chain(lambda, z, &nodes);
        let scale = z.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let mut u = vec![0.0; m + 2];
        u[1..=m].copy_from_slice(z);
        let opts = ChainOptions {
            tol: INNER_TOL * scale,
            max_iterations: 200,
            method: SweepMethod::Newton,
        };
        if chain.solve(&mut u, &opts).is_err() {
            u[1..=m].copy_from_slice(z);
        }
        // Certify with plain sweeps: the last update must fall below tolerance.
        let mut update = f64::INFINITY;
        let mut sweeps = 0;
        while sweeps < INNER_MAX_SWEEPS {
            update = chain.sweep(&mut u, true)?.max(chain.sweep(&mut u, false)?);
            sweeps += 1;
            if update < INNER_TOL * scale {
                out.copy_from_slice(&u[1..=m]);
                return Ok(());
            }
        }
        Err(Error::NotConverged {
            what: "diffusion-reaction resolvent",
            iterations: sweeps,
            residual: update,
        })
    }

    fn jacobian(&self, lambda: f64, z: &[f64], jac: &mut [f64]) -> Result<()> {
        let m = self.diag.len();
        let mut u = vec![0.0; m];
        self.resolve(lambda, z, &mut u)?;
        let nodes = self.nodes(lambda);
        // du = (I − G W)^{-1} G C^{-1} dz with G the node slopes, W the coupling.
        let mut lower = vec![0.0; m];
        let mut diag = vec![1.0; m];
        let mut upper = vec![0.0; m];
        let mut g = vec![0.0; m];
        for j in 0..m {
            let c = nodes.scale[j];
            let mut s = z[j];
            if j > 0 {
                s -= lambda * self.lower[j] * u[j - 1];
            }
            if j + 1 < m {
                s -= lambda * self.upper[j] * u[j + 1];
            }
            g[j] = self.beta.slope(lambda / c, s / c);
            lower[j] = g[j] * lambda * self.lower[j] / c;
            upper[j] = g[j] * lambda * self.upper[j] / c;
            diag[j] = 1.0;
        }
        let mut rhs = vec![0.0; m];
        for col in 0..m {
            rhs.iter_mut().for_each(|v| *v = 0.0);
            rhs[col] = g[col] / nodes.scale[col];
            let x = linalg::solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            for row in 0..m {
                jac[row * m + col] = x[row];
            }
        }
        Ok(())
    }
}

struct BetaNodes {
    beta: ScalarMap,
    scale: Vec<f64>,
    lambda: f64,
}

impl NodeMap for BetaNodes {
    fn apply(&self, node: usize, z: &[f64], out: &mut [f64]) -> Result<()> {
        let c = self.scale[node - 1];
        out[0] = self.beta.resolve(self.lambda / c, z[0]);
        Ok(())
    }

    fn jacobian(&self, node: usize, z: &[f64], jac: &mut [f64]) -> Result<()> {
        let c = self.scale[node - 1];
        jac[0] = self.beta.slope(self.lambda / c, z[0]);
        Ok(())
    }
}

/// Worst values seen by [`check_properties`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub samples: usize,
    /// Largest `‖J_λz − J_λw‖ / ‖z − w‖`.
    pub max_expansion: f64,
    /// Smallest `(A_λz − A_λw, z − w) / ‖z − w‖²`.
    pub min_monotonicity: f64,
    /// Largest `‖J_λz − J_μ((μ/λ)z + (1 − μ/λ)J_λz)‖`.
    pub max_identity_gap: f64,
    /// Largest `‖A_λx‖ − ‖A⁰x‖`.
    pub max_yosida_excess: f64,
    pub pass: bool,
}

/// Randomized checks of nonexpansiveness, monotonicity of `A_λ`, the
/// resolvent identity and `‖A_λx‖ ≤ ‖A⁰x‖`, on points drawn uniformly from
/// `[−radius, radius]^d`. `slack` bounds each violation.
pub fn check_properties(
    op: &MonotoneOperator,
    samples: usize,
    radius: f64,
    seed: u64,
    slack: f64,
) -> Result<PropertyReport> {
    use rand::{Rng, SeedableRng};
    const LAMBDAS: [f64; 3] = [1e-2, 1.0, 1e2];

    let d = op.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport {
        samples,
        max_expansion: 0.0,
        min_monotonicity: f64::INFINITY,
        max_identity_gap: 0.0,
        max_yosida_excess: f64::NEG_INFINITY,
        pass: true,
    };
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.gen_range(-radius..=radius)).collect() };
    for k in 0..samples {
        let lambda = LAMBDAS[k % LAMBDAS.len()];
        let z = draw(&mut rng);
        let w = draw(&mut rng);
        let dz = linalg::dist(&z, &w);
        if dz == 0.0 {
            continue;
        }
        let jz = op.resolve(lambda, &z)?;
        let jw = op.resolve(lambda, &w)?;
        report.max_expansion = report.max_expansion.max(linalg::dist(&jz, &jw) / dz);

        let az: Vec<f64> = z.iter().zip(&jz).map(|(a, b)| (a - b) / lambda).collect();
        let aw: Vec<f64> = w.iter().zip(&jw).map(|(a, b)| (a - b) / lambda).collect();
        let diff_a: Vec<f64> = az.iter().zip(&aw).map(|(a, b)| a - b).collect();
        let diff_z: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
        report.min_monotonicity = report.min_monotonicity.min(linalg::dot(&diff_a, &diff_z) / (dz * dz));

        let mu = 0.5 * lambda;
        let t = mu / lambda;
        let mixed: Vec<f64> = z.iter().zip(&jz).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let again = op.resolve(mu, &mixed)?;
        report.max_identity_gap = report.max_identity_gap.max(linalg::dist(&jz, &again));

        let min = op.min_section(&z)?;
        let excess = linalg::norm(&az) - linalg::norm(&min);
        report.max_yosida_excess = report.max_yosida_excess.max(excess / linalg::norm(&min).max(1.0));
    }
    report.pass = report.max_expansion <= 1.0 + slack
        && report.min_monotonicity >= -slack
        && report.max_identity_gap <= slack * radius.max(1.0)
        && report.max_yosida_excess <= slack;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign1() -> MonotoneOperator {
        MonotoneOperator::scalar_graph(ScalarGraph::Sign, 1).unwrap()
    }

    #[test]
    fn linear_resolve_closed_form() {
        let op = MonotoneOperator::linear(vec![vec![2.0]]).unwrap();
        assert!((op.resolve(0.5, &[2.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((op.yosida(0.5, &[2.0]).unwrap()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sign_graph_soft_thresholds() {
        let op = sign1();
        assert_eq!(op.resolve(1.0, &[3.0]).unwrap(), vec![2.0]);
        assert_eq!(op.yosida(1.0, &[3.0]).unwrap(), vec![1.0]);
        assert_eq!(op.resolve(1.0, &[-0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_is_fixed_by_every_kind() {
        let ops = vec![
            MonotoneOperator::zero(2),
            MonotoneOperator::linear(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            MonotoneOperator::scalar_graph(ScalarGraph::Power { exponent: 3.0 }, 2).unwrap(),
            MonotoneOperator::potential(ConvexPotential::PositivePartSquared, 2).unwrap(),
        ];
        for op in ops {
            assert_eq!(op.resolve(1.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
            assert_eq!(op.yosida(1.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn min_sections() {
        let lin = MonotoneOperator::linear(vec![vec![3.0]]).unwrap();
        assert_eq!(lin.min_section(&[2.0]).unwrap(), vec![6.0]);
        let s = sign1();
        assert_eq!(s.min_section(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(s.min_section(&[-1.0]).unwrap(), vec![-1.0]);
    }

    #[test]
    fn power_root_solves_equation() {
        for &(lambda, m, a) in &[(1.0, 3.0, 2.0), (1e-3, 2.0, 5.0), (1e3, 0.5, 0.7), (0.3, 1.5, 1e-8)] {
            let s = power_root(lambda, m, a);
            assert!((s + lambda * s.powf(m) - a).abs() <= 1e-13 * a.max(1.0), "{lambda} {m} {a}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let op = sign1();
        assert!(op.resolve(0.0, &[1.0]).is_err());
        assert!(matches!(op.resolve(1.0, &[1.0, 2.0]), Err(Error::Dimension { .. })));
        assert!(MonotoneOperator::linear(vec![vec![-1.0]]).is_err());
        assert!(MonotoneOperator::scalar_graph(ScalarGraph::Power { exponent: -1.0 }, 1).is_err());
    }

    #[test]
    fn shifted_operator_translates_resolvent() {
        // Base is x ↦ max(x, 0), which vanishes at -1; shifted it becomes x ↦ max(x - 1, 0).
        let base = OperatorSpec::Potential {
            potential: ConvexPotential::PositivePartSquared,
            dim: 1,
        };
        let op = MonotoneOperator::shifted(base.clone(), vec![-1.0]).unwrap();
        assert!((op.resolve(1.0, &[3.0]).unwrap()[0] - 2.0).abs() < 1e-15);
        assert_eq!(op.resolve(1.0, &[0.5]).unwrap(), vec![0.5]);
        assert_eq!(op.min_section(&[3.0]).unwrap(), vec![2.0]);
        let bad = MonotoneOperator::shifted(base, vec![0.5]);
        assert!(matches!(bad, Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn descriptor_json_round_trip() {
        let json = r#"{"kind":"scalar-graph","params":{"graph":"power","exponent":3.0}}"#;
        let spec: OperatorSpec = serde_json::from_str(json).unwrap();
        let op = MonotoneOperator::from_spec(&spec).unwrap();
        assert_eq!(op.dim(), 1);
        let back: OperatorSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let lin: OperatorSpec = serde_json::from_str(r#"{"kind":"linear","params":{"matrix":[[2,1],[1,2]]}}"#).unwrap();
        assert_eq!(MonotoneOperator::from_spec(&lin).unwrap().dim(), 2);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let op = MonotoneOperator::linear(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let z = [0.3, -1.2];
        let mut jac = vec![0.0; 4];
        op.resolvent_jacobian(0.7, &z, &mut jac).unwrap();
        let eps = 1e-6;
        for c in 0..2 {
            let mut zp = z;
            zp[c] += eps;
            let a = op.resolve(0.7, &zp).unwrap();
            let b = op.resolve(0.7, &z).unwrap();
            for r in 0..2 {
                assert!(((a[r] - b[r]) / eps - jac[r * 2 + c]).abs() < 1e-8);
            }
        }
    }
}
