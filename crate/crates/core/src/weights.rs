//! Coefficients `(p, q)`, the weights built from them, and the weighted norms.
//!
//! With `a = exp ∫₀ᵗ q/p`, `b = a/p`, `a_± = exp(±∫₀ᵗ q^±/p)` the equation
//! `p u'' + q u' ∈ Au + f` takes the divergence form `(a u')' ∈ b(Au + f)`.
//! Weights are kept as logarithms; `a` can easily underflow when `q/p` is a
//! large negative number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{ForcingSpec, TailClass};
use crate::grid::{cells_for, Grid};
use crate::quadrature;

/// Behaviour of a sampled coefficient past its last sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// Undeclared: the last sample is held for finite solves, and global
    /// quantities (`a_+(∞)`, `‖f‖_Y`) refuse to run.
    #[default]
    None,
    CompactSupport,
    ExponentialDecay { rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledCoefficient {
    /// Uniform samples on `[0, t_max]`, linearly interpolated.
    pub samples: Vec<f64>,
    pub t_max: f64,
    /// Only meaningful for `q`; `p` always holds its last sample.
    #[serde(default)]
    pub tail: Tail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Samples(SampledCoefficient),
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

impl Coefficient {
    pub fn samples(samples: Vec<f64>, t_max: f64, tail: Tail) -> Self {
        Coefficient::Samples(SampledCoefficient { samples, t_max, tail })
    }

    fn interp(s: &SampledCoefficient, t: f64) -> f64 {
        let n = s.samples.len();
        let x = t / s.t_max * (n - 1) as f64;
        let i = (x.floor().max(0.0) as usize).min(n - 2);
        let w = x - i as f64;
        (1.0 - w) * s.samples[i] + w * s.samples[i + 1]
    }

    /// Value used as `p`: past the samples the last one is held.
    fn eval_p(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Samples(s) => {
                if t >= s.t_max {
                    *s.samples.last().unwrap()
                } else {
                    Self::interp(s, t)
                }
            }
        }
    }

    /// Value used as `q`: past the samples the declared tail applies.
    fn eval_q(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Samples(s) => {
                if t <= s.t_max {
                    return Self::interp(s, t);
                }
                let last = *s.samples.last().unwrap();
                match s.tail {
                    Tail::None => last,
                    Tail::CompactSupport => 0.0,
                    Tail::ExponentialDecay { rate } => last * (-rate * (t - s.t_max)).exp(),
                }
            }
        }
    }

    fn knot_spacing(&self) -> Option<(f64, usize)> {
        match self {
            Coefficient::Constant(_) => None,
            Coefficient::Samples(s) => Some((s.t_max / (s.samples.len() - 1) as f64, s.samples.len())),
        }
    }

    fn end(&self) -> f64 {
        match self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Samples(s) => s.t_max,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Coefficient::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::invalid(format!("{name} must be finite")));
                }
            }
            Coefficient::Samples(s) => {
                if s.samples.len() < 2 {
                    return Err(Error::invalid(format!("{name} needs at least two samples")));
                }
                if !(s.t_max > 0.0 && s.t_max.is_finite()) {
                    return Err(Error::invalid(format!("{name}: t_max must be positive")));
                }
                if s.samples.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid(format!("{name} samples must be finite")));
                }
                if let Tail::ExponentialDecay { rate } = s.tail {
                    if !(rate > 0.0 && rate.is_finite()) {
                        return Err(Error::invalid(format!("{name}: tail decay rate must be positive")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which part of `q` enters an integral of `q/p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Full,
    /// `q^+ = max(q, 0)`.
    Plus,
    /// `q^- = max(-q, 0)`.
    Minus,
}

impl Part {
    fn of(self, q: f64) -> f64 {
        match self {
            Part::Full => q,
            Part::Plus => q.max(0.0),
            Part::Minus => (-q).max(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub p: Coefficient,
    pub q: Coefficient,
}

impl CoefficientSpec {
    pub fn constant(p: f64, q: f64) -> Self {
        CoefficientSpec {
            p: Coefficient::Constant(p),
            q: Coefficient::Constant(q),
        }
    }

    pub fn p(&self, t: f64) -> f64 {
        self.p.eval_p(t)
    }

    pub fn q(&self, t: f64) -> f64 {
        self.q.eval_q(t)
    }

    /// Checks `ess inf p > 0` and `q^+ ∈ L¹` as far as the data allow.
    ///
    /// The infimum is taken over the samples only.
    pub fn validate(&self) -> Result<()> {
        self.p.validate("p")?;
        self.q.validate("q")?;
        let p0 = self.p0();
        if p0 <= 0.0 {
            return Err(Error::Hypothesis {
                hypothesis: "coefficients",
                detail: format!("ess inf p must be positive, sampled minimum is {p0}"),
            });
        }
        if let Coefficient::Constant(c) = self.q {
            if c > 0.0 {
                return Err(Error::Hypothesis {
                    hypothesis: "coefficients",
                    detail: format!("constant q = {c} > 0 has a positive part outside L¹"),
                });
            }
        }
        Ok(())
    }

    /// `p₀ = ess inf p`, over samples.
    pub fn p0(&self) -> f64 {
        match &self.p {
            Coefficient::Constant(c) => *c,
            Coefficient::Samples(s) => s.samples.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `p_∞ = ess sup p`, over samples.
    pub fn p_sup(&self) -> f64 {
        match &self.p {
            Coefficient::Constant(c) => *c,
            Coefficient::Samples(s) => s.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn q_tail(&self) -> Option<Tail> {
        match &self.q {
            Coefficient::Constant(_) => None,
            Coefficient::Samples(s) => Some(s.tail),
        }
    }

    /// Whether `q ∈ L¹(0, ∞)`; `None` when the tail is undeclared.
    pub fn q_integrable(&self) -> Option<bool> {
        match &self.q {
            Coefficient::Constant(c) => Some(*c == 0.0),
            Coefficient::Samples(s) => match s.tail {
                Tail::None => None,
                _ => Some(true),
            },
        }
    }

    /// `lim q^-/p` at infinity, the decay rate of `log a_-`.
    pub fn minus_rate_at_infinity(&self) -> Result<f64> {
        let p_end = self.p(f64::INFINITY);
        match &self.q {
            Coefficient::Constant(c) => Ok(Part::Minus.of(*c) / p_end),
            Coefficient::Samples(s) => match s.tail {
                Tail::None => Err(Error::UndeclaredTail("q")),
                _ => Ok(0.0),
            },
        }
    }

    /// Last knot of either coefficient; both are smooth past it.
    fn knot_end(&self) -> f64 {
        self.p.end().max(self.q.end())
    }

    fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut pts = vec![t0, t1];
        for c in [&self.p, &self.q] {
            if let Some((dt, n)) = c.knot_spacing() {
                let first = (t0 / dt).ceil().max(0.0) as usize;
                for j in first..n {
                    let t = j as f64 * dt;
                    if t >= t1 {
                        break;
                    }
                    if t > t0 {
                        pts.push(t);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        // q is linear between its knots; split where it changes sign.
        let mut out = Vec::with_capacity(pts.len());
        for w in pts.windows(2) {
            out.push(w[0]);
            let (qa, qb) = (self.q(w[0]), self.q(w[1]));
            if qa * qb < 0.0 && w[1] <= self.q.end() {
                out.push(w[0] + (w[1] - w[0]) * qa / (qa - qb));
            }
        }
        out.push(*pts.last().unwrap());
        out
    }

    /// `∫_{t0}^{t1} part(q)/p`, with `t1` possibly infinite.
    pub fn integral(&self, part: Part, t0: f64, t1: f64) -> Result<f64> {
        if t1 <= t0 {
            return Ok(0.0);
        }
        let end = self.knot_end();
        let mut total = 0.0;
        if t0 < end {
            let stop = t1.min(end);
            let pts = self.breakpoints(t0, stop);
            for w in pts.windows(2) {
                total += quadrature::integrate(|t| part.of(self.q(t)) / self.p(t), w[0], w[1]);
            }
        }
        let a = t0.max(end);
        if t1 > a {
            total += self.closed_tail(part, a, t1)?;
        }
        Ok(total)
    }

    /// Integral past every knot, where `p` is constant and `q` has its tail form.
    fn closed_tail(&self, part: Part, a: f64, b: f64) -> Result<f64> {
        let p_end = self.p(f64::INFINITY);
        match &self.q {
            Coefficient::Constant(c) => linear_piece(part.of(*c) / p_end, a, b, false),
            Coefficient::Samples(s) => {
                let last = *s.samples.last().unwrap();
                match s.tail {
                    Tail::None => linear_piece(part.of(last) / p_end, a, b, true),
                    Tail::CompactSupport => Ok(0.0),
                    Tail::ExponentialDecay { rate } => {
                        let ea = (-rate * (a - s.t_max)).exp();
                        let eb = if b.is_finite() { (-rate * (b - s.t_max)).exp() } else { 0.0 };
                        Ok(part.of(last) / (p_end * rate) * (ea - eb))
                    }
                }
            }
        }
    }
}

fn linear_piece(slope: f64, a: f64, b: f64, undeclared: bool) -> Result<f64> {
    if slope == 0.0 {
        return Ok(0.0);
    }
    if b.is_finite() {
        return Ok(slope * (b - a));
    }
    if undeclared {
        Err(Error::UndeclaredTail("q"))
    } else {
        Ok(f64::INFINITY)
    }
}

/// Node and midpoint samples of the weights on a uniform grid.
#[derive(Clone, Debug)]
pub struct WeightTable {
    grid: Grid,
    coefficients: CoefficientSpec,
    p: Vec<f64>,
    log_a: Vec<f64>,
    log_a_plus: Vec<f64>,
    log_a_minus: Vec<f64>,
    /// Entry `i` sits at `t_{i+1/2}`.
    log_a_mid: Vec<f64>,
    p0: f64,
}

/// Cumulative trapezoidal quadrature of `q/p`, `q^+/p`, `q^-/p`.
pub fn build_weights(coeffs: &CoefficientSpec, grid: &Grid) -> Result<WeightTable> {
    coeffs.validate()?;
    let n = grid.len();
    let h = grid.step();
    let ts = grid.nodes();
    let p: Vec<f64> = ts.iter().map(|&t| coeffs.p(t)).collect();
    let q: Vec<f64> = ts.iter().map(|&t| coeffs.q(t)).collect();
    if let Some(bad) = p.iter().position(|&v| v <= 0.0) {
        return Err(Error::Hypothesis {
            hypothesis: "coefficients",
            detail: format!("p({}) = {} is not positive", ts[bad], p[bad]),
        });
    }
    let mut log_a = vec![0.0; n];
    let mut log_a_plus = vec![0.0; n];
    let mut log_a_minus = vec![0.0; n];
    let mut log_a_mid = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let g0 = q[i] / p[i];
        let g1 = q[i + 1] / p[i + 1];
        log_a[i + 1] = log_a[i] + 0.5 * h * (g0 + g1);
        log_a_plus[i + 1] = log_a_plus[i] + 0.5 * h * (g0.max(0.0) + g1.max(0.0));
        log_a_minus[i + 1] = log_a_minus[i] - 0.5 * h * ((-g0).max(0.0) + (-g1).max(0.0));
        let tm = ts[i] + 0.5 * h;
        let gm = coeffs.q(tm) / coeffs.p(tm);
        log_a_mid[i] = log_a[i] + 0.25 * h * (g0 + gm);
    }
    Ok(WeightTable {
        grid: *grid,
        coefficients: coeffs.clone(),
        p,
        log_a,
        log_a_plus,
        log_a_minus,
        log_a_mid,
        p0: coeffs.p0(),
    })
}

impl WeightTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &CoefficientSpec {
        &self.coefficients
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn a(&self, i: usize) -> f64 {
        self.log_a[i].exp()
    }

    pub fn a_plus(&self, i: usize) -> f64 {
        self.log_a_plus[i].exp()
    }

    pub fn a_minus(&self, i: usize) -> f64 {
        self.log_a_minus[i].exp()
    }

    pub fn b(&self, i: usize) -> f64 {
        self.log_a[i].exp() / self.p[i]
    }

    /// `a(t_{i+1/2})`.
    pub fn a_mid(&self, i: usize) -> f64 {
        self.log_a_mid[i].exp()
    }

    pub fn log_a(&self, i: usize) -> f64 {
        self.log_a[i]
    }

    pub fn log_a_minus(&self, i: usize) -> f64 {
        self.log_a_minus[i]
    }

    pub fn log_a_mid(&self, i: usize) -> f64 {
        self.log_a_mid[i]
    }

    /// `a_{i±1/2} / a_i` for an interior node.
    pub fn neighbour_ratios(&self, i: usize) -> (f64, f64) {
        (
            (self.log_a_mid[i - 1] - self.log_a[i]).exp(),
            (self.log_a_mid[i] - self.log_a[i]).exp(),
        )
    }

    /// `a_+(∞)`.
    pub fn a_plus_infinity(&self) -> Result<f64> {
        let last = self.grid.len() - 1;
        let rest = self.coefficients.integral(Part::Plus, self.grid.horizon(), f64::INFINITY)?;
        if !rest.is_finite() {
            return Err(Error::Hypothesis {
                hypothesis: "coefficients",
                detail: "q^+/p is not integrable".into(),
            });
        }
        Ok((self.log_a_plus[last] + rest).exp())
    }

    /// `inf_t a_-(t) = a_-(∞)`.
    pub fn a_minus_infinity(&self) -> Result<f64> {
        let last = self.grid.len() - 1;
        let rest = self.coefficients.integral(Part::Minus, self.grid.horizon(), f64::INFINITY)?;
        Ok((self.log_a_minus[last] - rest).exp())
    }

    /// True when `q ∈ L¹`, so that boundedness and condition (C) coincide.
    pub fn bounded_equivalence(&self) -> bool {
        self.coefficients.q_integrable() == Some(true)
    }
}

/// `‖f‖_Y` split into the on-grid part and the off-grid tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YNorm {
    pub value: f64,
    pub tail: f64,
    pub tail_error: f64,
}

/// `‖f‖_Y = ∫₀^∞ ‖f(t)‖ t √a_-(t) dt`.
///
/// Trapezoidal rule on the table grid, Gauss–Legendre past it.
pub fn y_norm(f: &ForcingSpec, w: &WeightTable) -> Result<YNorm> {
    let coeffs = &w.coefficients;
    let rho = coeffs.minus_rate_at_infinity()?;
    let class = f.tail_class();
    match class {
        TailClass::Undeclared => return Err(Error::UndeclaredTail("forcing")),
        TailClass::NonDecaying if rho == 0.0 => {
            return Err(Error::YMembership(
                "forcing does not decay and a_- does not decay either".into(),
            ))
        }
        TailClass::Power(k) if rho == 0.0 && k <= 2.0 => {
            return Err(Error::YMembership(format!(
                "‖f(t)‖ t decays like t^{}, which is not integrable",
                1.0 - k
            )))
        }
        _ => {}
    }
    let h = w.grid.step();
    let n = w.grid.len();
    let d = f.dim().unwrap_or(1);
    let mut buf = vec![0.0; d];
    let mut norm_at = |t: f64| -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        f.eval(t, &mut buf);
        buf.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let mut grid_part = 0.0;
    for i in 0..n {
        let t = w.grid.node(i);
        let g = norm_at(t) * t * (0.5 * w.log_a_minus[i]).exp();
        grid_part += if i == 0 || i == n - 1 { 0.5 * g } else { g };
    }
    grid_part *= h;

    let t0 = w.grid.horizon();
    let log_am0 = w.log_a_minus[n - 1];
    let mut tail = 0.0;
    let mut log_shift = 0.0;
    // Knotted stretch past the grid: coefficients or forcing samples still vary.
    let end = coeffs.knot_end().max(f.knot_end());
    if end > t0 {
        let mut pts = coeffs.breakpoints(t0, end);
        pts.extend(f.knots(t0, end));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let mut err = None;
            tail += quadrature::integrate(
                |t| {
                    let inner = coeffs.integral(Part::Minus, a, t).unwrap_or_else(|e| {
                        err = Some(e);
                        0.0
                    });
                    norm_at(t) * t * (0.5 * (log_am0 - log_shift - inner)).exp()
                },
                a,
                b,
            );
            if let Some(e) = err {
                return Err(e);
            }
            log_shift += coeffs.integral(Part::Minus, a, b)?;
        }
    }
    let start = end.max(t0);
    let mut scale: f64 = 1.0;
    if rho > 0.0 {
        scale = scale.min(2.0 / rho);
    }
    if let Some(r) = f.decay_rate() {
        scale = scale.min(1.0 / r);
    }
    if let Some(Tail::ExponentialDecay { rate }) = coeffs.q_tail() {
        scale = scale.min(1.0 / rate);
    }
    let mut failure = None;
    let mut cumulative = log_shift;
    let (far, tail_error) = quadrature::tail_integral(
        |a, b, _| {
            let base = cumulative;
            let v = quadrature::integrate(
                |t| {
                    let inner = coeffs.closed_tail(Part::Minus, a, t).unwrap_or_else(|e| {
                        failure = Some(e);
                        0.0
                    });
                    norm_at(t) * t * (0.5 * (log_am0 - base - inner)).exp()
                },
                a,
                b,
            );
            cumulative += coeffs.closed_tail(Part::Minus, a, b).unwrap_or(0.0);
            v
        },
        start,
        scale,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    tail += far;
    if !tail_error.is_finite() {
        return Err(Error::YMembership("tail of the Y integral does not settle".into()));
    }
    Ok(YNorm {
        value: grid_part + tail,
        tail,
        tail_error,
    })
}

/// Weighted norm `(∫₀ᵀ b ‖g‖²)^{1/2}` by the trapezoidal rule.
///
/// `values` holds node-major samples of `g` on the table grid.
pub fn xt_norm(values: &[f64], dim: usize, w: &WeightTable, horizon: f64) -> Result<f64> {
    crate::error::check_dim(w.grid.len() * dim, values.len())?;
    if horizon > w.grid.horizon() * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "T = {horizon} exceeds the grid horizon {}",
            w.grid.horizon()
        )));
    }
    let cells = cells_for(horizon, w.grid.step())?;
    let mut s = 0.0;
    for i in 0..=cells {
        let g2: f64 = values[i * dim..(i + 1) * dim].iter().map(|v| v * v).sum();
        let term = w.b(i) * g2;
        s += if i == 0 || i == cells { 0.5 * term } else { term };
    }
    Ok((s * w.grid.step()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(p: f64, q: f64, horizon: f64, h: f64) -> WeightTable {
        build_weights(&CoefficientSpec::constant(p, q), &Grid::with_step(horizon, h).unwrap()).unwrap()
    }

    #[test]
    fn unit_coefficients_give_unit_weights() {
        let w = table(1.0, 0.0, 5.0, 0.1);
        for i in 0..w.grid().len() {
            assert_eq!(w.a(i), 1.0);
            assert_eq!(w.a_plus(i), 1.0);
            assert_eq!(w.a_minus(i), 1.0);
            assert_eq!(w.b(i), 1.0);
        }
        assert_eq!(w.a_plus_infinity().unwrap(), 1.0);
    }

    #[test]
    fn negative_drift_gives_exponential_weights() {
        let w = table(1.0, -1.0, 5.0, 0.1);
        for i in 0..w.grid().len() {
            let t = w.grid().node(i);
            assert_relative_eq!(w.a(i), (-t).exp(), max_relative = 1e-13);
            assert_relative_eq!(w.a_minus(i), (-t).exp(), max_relative = 1e-13);
            assert_eq!(w.a_plus(i), 1.0);
        }
        assert_eq!(w.a_plus_infinity().unwrap(), 1.0);
        assert_eq!(w.a_minus_infinity().unwrap(), 0.0);
    }

    #[test]
    fn compactly_supported_drift() {
        // q = 1 on [0, 1], 0 afterwards; p = 2.
        let q = Coefficient::samples(vec![1.0; 101], 1.0, Tail::CompactSupport);
        let coeffs = CoefficientSpec { p: 2.0.into(), q };
        let w = build_weights(&coeffs, &Grid::with_step(1.0, 0.01).unwrap()).unwrap();
        for i in 0..w.grid().len() {
            let t = w.grid().node(i);
            assert_relative_eq!(w.a(i), (t / 2.0).exp(), max_relative = 1e-13);
        }
        assert_relative_eq!(w.a_plus_infinity().unwrap(), 0.5f64.exp(), max_relative = 1e-13);
        // Same answer from a shorter table: the rest comes from the knotted stretch.
        let w = build_weights(&coeffs, &Grid::with_step(0.5, 0.01).unwrap()).unwrap();
        assert_relative_eq!(w.a_plus_infinity().unwrap(), 0.5f64.exp(), max_relative = 1e-13);
        assert!(w.bounded_equivalence());
    }

    #[test]
    fn h2_violations() {
        let bad_p = CoefficientSpec::constant(0.0, 0.0);
        assert!(matches!(bad_p.validate(), Err(Error::Hypothesis { hypothesis: "coefficients", .. })));
        let bad_q = CoefficientSpec::constant(1.0, 0.5);
        assert!(matches!(bad_q.validate(), Err(Error::Hypothesis { hypothesis: "coefficients", .. })));
    }

    #[test]
    fn undeclared_tail_blocks_global_quantities() {
        let q = Coefficient::samples(vec![0.1, 0.1], 1.0, Tail::None);
        let coeffs = CoefficientSpec { p: 1.0.into(), q };
        let w = build_weights(&coeffs, &Grid::with_step(1.0, 0.1).unwrap()).unwrap();
        assert!(matches!(w.a_plus_infinity(), Err(Error::UndeclaredTail("q"))));
    }

    #[test]
    fn y_norm_examples() {
        let w = table(1.0, -1.0, 20.0, 0.01);
        assert_eq!(y_norm(&ForcingSpec::Zero, &w).unwrap().value, 0.0);
        let one = ForcingSpec::Constant { value: vec![1.0] };
        assert_relative_eq!(y_norm(&one, &w).unwrap().value, 4.0, max_relative = 1e-5);
        let w = table(1.0, 0.0, 20.0, 0.01);
        let cube = ForcingSpec::Power {
            scale: vec![1.0],
            exponent: 3.0,
        };
        // Trapezoid error h²/12 · (g'(T) - g'(0)) ≈ -8e-6 at h = 0.01.
        assert_relative_eq!(y_norm(&cube, &w).unwrap().value, 0.5, max_relative = 5e-5);
        let square = ForcingSpec::Power {
            scale: vec![1.0],
            exponent: 2.0,
        };
        assert!(matches!(y_norm(&square, &w), Err(Error::YMembership(_))));
    }

    #[test]
    fn xt_norm_examples() {
        let w = table(1.0, 0.0, 2.0, 0.001);
        let n = w.grid().len();
        assert_eq!(xt_norm(&vec![0.0; n], 1, &w, 2.0).unwrap(), 0.0);
        assert_relative_eq!(xt_norm(&vec![1.0; n], 1, &w, 2.0).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        let ramp: Vec<f64> = w.grid().nodes();
        assert_relative_eq!(xt_norm(&ramp, 1, &w, 1.0).unwrap(), (1.0f64 / 3.0).sqrt(), max_relative = 1e-6);
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        // q/p = cos t has a closed-form integral.
        let n = 400;
        let samples: Vec<f64> = (0..=n).map(|j| (4.0 * j as f64 / n as f64).cos()).collect();
        let coeffs = CoefficientSpec {
            p: 1.0.into(),
            q: Coefficient::samples(samples, 4.0, Tail::CompactSupport),
        };
        let err = |h: f64| {
            let w = build_weights(&coeffs, &Grid::with_step(4.0, h).unwrap()).unwrap();
            (w.a(w.grid().len() - 1) - 4f64.sin().exp()).abs()
        };
        // Sample spacing 0.01 is a refinement of every grid below, so the
        // interpolation itself is exact at the nodes up to the cosine curvature.
        let (e1, e2) = (err(0.2), err(0.1));
        assert!((3.5..4.5).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }
}
