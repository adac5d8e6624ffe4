use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::grid::Grid;

/// Declared behaviour of sampled forcing past its last sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForcingTail {
    /// The last sample is held for solves; `‖f‖_Y` refuses to run.
    #[default]
    None,
    CompactSupport,
    ExponentialDecay {
        rate: f64,
    },
    /// `f(t) = f(t_max) ((1 + t)/(1 + t_max))^{-exponent}`.
    Power {
        exponent: f64,
    },
}

/// Forcing term `f: [0, ∞) → ℝ^d`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForcingSpec {
    #[default]
    Zero,
    Constant {
        value: Vec<f64>,
    },
    /// `scale (1 + t)^{-exponent}`.
    Power {
        scale: Vec<f64>,
        exponent: f64,
    },
    /// `scale e^{-rate t}`.
    Exponential {
        scale: Vec<f64>,
        rate: f64,
    },
    /// `scale t^{-exponent} e^{-rate t}`; unbounded at the origin.
    Singular {
        scale: Vec<f64>,
        exponent: f64,
        rate: f64,
    },
    /// Uniform samples on `[0, t_max]`, linearly interpolated.
    Samples {
        t_max: f64,
        values: Vec<Vec<f64>>,
        #[serde(default)]
        tail: ForcingTail,
    },
    Sum {
        terms: Vec<ForcingSpec>,
    },
    Scaled {
        factor: f64,
        base: Box<ForcingSpec>,
    },
    /// `f(max(t, from))`: cuts off whatever `base` does near the origin.
    Floored {
        base: Box<ForcingSpec>,
        from: f64,
    },
}

/// Decay class of `‖f(t)‖` as `t → ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum TailClass {
    Compact,
    Exponential(f64),
    Power(f64),
    NonDecaying,
    Undeclared,
}

impl TailClass {
    fn rank(self) -> (u8, f64) {
        match self {
            TailClass::Compact => (0, 0.0),
            TailClass::Exponential(r) => (1, -r),
            TailClass::Power(k) => (2, -k),
            TailClass::NonDecaying => (3, 0.0),
            TailClass::Undeclared => (4, 0.0),
        }
    }

    fn worst(self, other: TailClass) -> TailClass {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

impl ForcingSpec {
    pub fn constant(value: Vec<f64>) -> Self {
        ForcingSpec::Constant { value }
    }

    /// `a - b`.
    pub fn difference(a: &ForcingSpec, b: &ForcingSpec) -> Self {
        ForcingSpec::Sum {
            terms: vec![
                a.clone(),
                ForcingSpec::Scaled {
                    factor: -1.0,
                    base: Box::new(b.clone()),
                },
            ],
        }
    }

    /// Dimension, or `None` when any dimension fits.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ForcingSpec::Zero => None,
            ForcingSpec::Constant { value } => Some(value.len()),
            ForcingSpec::Power { scale, .. }
            | ForcingSpec::Exponential { scale, .. }
            | ForcingSpec::Singular { scale, .. } => Some(scale.len()),
            ForcingSpec::Samples { values, .. } => values.first().map(|v| v.len()),
            ForcingSpec::Sum { terms } => terms.iter().find_map(|t| t.dim()),
            ForcingSpec::Scaled { base, .. } | ForcingSpec::Floored { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let positive = |v: f64, what: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("forcing {what} must be positive, got {v}")))
            }
        };
        let finite = |v: &[f64]| -> Result<()> {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::invalid("forcing coefficients must be finite"))
            }
        };
        match self {
            ForcingSpec::Zero => Ok(()),
            ForcingSpec::Constant { value } => {
                check_dim(dim, value.len())?;
                finite(value)
            }
            ForcingSpec::Power { scale, exponent } => {
                check_dim(dim, scale.len())?;
                finite(scale)?;
                if !(*exponent >= 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid("power forcing exponent must be nonnegative"));
                }
                Ok(())
            }
            ForcingSpec::Exponential { scale, rate } => {
                check_dim(dim, scale.len())?;
                finite(scale)?;
                positive(*rate, "rate")
            }
            ForcingSpec::Singular { scale, exponent, rate } => {
                check_dim(dim, scale.len())?;
                finite(scale)?;
                if !(*exponent > 0.0 && *exponent < 2.0) {
                    return Err(Error::YMembership(format!(
                        "t^-{exponent} near the origin needs exponent in (0, 2)"
                    )));
                }
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("singular forcing rate must be nonnegative"));
                }
                Ok(())
            }
            ForcingSpec::Samples { t_max, values, tail } => {
                positive(*t_max, "t_max")?;
                if values.len() < 2 {
                    return Err(Error::invalid("sampled forcing needs at least two samples"));
                }
                for v in values {
                    check_dim(dim, v.len())?;
                    finite(v)?;
                }
                match tail {
                    ForcingTail::ExponentialDecay { rate } => positive(*rate, "tail rate"),
                    ForcingTail::Power { exponent } => positive(*exponent, "tail exponent"),
                    _ => Ok(()),
                }
            }
            ForcingSpec::Sum { terms } => terms.iter().try_for_each(|t| t.validate(dim)),
            ForcingSpec::Scaled { factor, base } => {
                if !factor.is_finite() {
                    return Err(Error::invalid("forcing factor must be finite"));
                }
                base.validate(dim)
            }
            ForcingSpec::Floored { base, from } => {
                positive(*from, "floor")?;
                base.validate(dim)
            }
        }
    }

    /// Writes `f(t)` into `out`.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.add_to(t, 1.0, out);
    }

    fn add_to(&self, t: f64, factor: f64, out: &mut [f64]) {
        let axpy = |s: &[f64], c: f64, out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(s) {
                *o += c * v;
            }
        };
        match self {
            ForcingSpec::Zero => {}
            ForcingSpec::Constant { value } => axpy(value, factor, out),
            ForcingSpec::Power { scale, exponent } => axpy(scale, factor * (1.0 + t).powf(-exponent), out),
            ForcingSpec::Exponential { scale, rate } => axpy(scale, factor * (-rate * t).exp(), out),
            ForcingSpec::Singular { scale, exponent, rate } => {
                axpy(scale, factor * t.powf(-exponent) * (-rate * t).exp(), out)
            }
            ForcingSpec::Samples { t_max, values, tail } => {
                let n = values.len();
                if t <= *t_max {
                    let x = t / t_max * (n - 1) as f64;
                    let i = (x.floor().max(0.0) as usize).min(n - 2);
                    let w = x - i as f64;
                    axpy(&values[i], factor * (1.0 - w), out);
                    axpy(&values[i + 1], factor * w, out);
                } else {
                    let c = match tail {
                        ForcingTail::None => 1.0,
                        ForcingTail::CompactSupport => 0.0,
                        ForcingTail::ExponentialDecay { rate } => (-rate * (t - t_max)).exp(),
                        ForcingTail::Power { exponent } => ((1.0 + t) / (1.0 + t_max)).powf(-exponent),
                    };
                    axpy(&values[n - 1], factor * c, out);
                }
            }
            ForcingSpec::Sum { terms } => {
                for term in terms {
                    term.add_to(t, factor, out);
                }
            }
            ForcingSpec::Scaled { factor: c, base } => base.add_to(t, factor * c, out),
            ForcingSpec::Floored { base, from } => base.add_to(t.max(*from), factor, out),
        }
    }

    /// Node-major samples on the grid; the two boundary nodes are left at zero
    /// since the node equations only read interior values.
    pub fn sample_interior(&self, grid: &Grid, dim: usize) -> Vec<f64> {
        let n = grid.len();
        let mut out = vec![0.0; n * dim];
        for i in 1..n - 1 {
            self.eval(grid.node(i), &mut out[i * dim..(i + 1) * dim]);
        }
        out
    }

    pub(crate) fn tail_class(&self) -> TailClass {
        match self {
            ForcingSpec::Zero => TailClass::Compact,
            ForcingSpec::Constant { value } => {
                if value.iter().all(|v| *v == 0.0) {
                    TailClass::Compact
                } else {
                    TailClass::NonDecaying
                }
            }
            ForcingSpec::Power { exponent, .. } => {
                if *exponent > 0.0 {
                    TailClass::Power(*exponent)
                } else {
                    TailClass::NonDecaying
                }
            }
            ForcingSpec::Exponential { rate, .. } => TailClass::Exponential(*rate),
            ForcingSpec::Singular { exponent, rate, .. } => {
                if *rate > 0.0 {
                    TailClass::Exponential(*rate)
                } else {
                    TailClass::Power(*exponent)
                }
            }
            ForcingSpec::Samples { tail, .. } => match tail {
                ForcingTail::None => TailClass::Undeclared,
                ForcingTail::CompactSupport => TailClass::Compact,
                ForcingTail::ExponentialDecay { rate } => TailClass::Exponential(*rate),
                ForcingTail::Power { exponent } => TailClass::Power(*exponent),
            },
            ForcingSpec::Sum { terms } => terms
                .iter()
                .map(|t| t.tail_class())
                .fold(TailClass::Compact, TailClass::worst),
            ForcingSpec::Scaled { factor, base } => {
                if *factor == 0.0 {
                    TailClass::Compact
                } else {
                    base.tail_class()
                }
            }
            ForcingSpec::Floored { base, .. } => base.tail_class(),
        }
    }

    /// Fastest exponential rate involved, used to size tail panels.
    pub(crate) fn decay_rate(&self) -> Option<f64> {
        match self {
            ForcingSpec::Exponential { rate, .. } => Some(*rate),
            ForcingSpec::Singular { rate, .. } if *rate > 0.0 => Some(*rate),
            ForcingSpec::Samples {
                tail: ForcingTail::ExponentialDecay { rate },
                ..
            } => Some(*rate),
            ForcingSpec::Sum { terms } => terms.iter().filter_map(|t| t.decay_rate()).reduce(f64::max),
            ForcingSpec::Scaled { base, .. } | ForcingSpec::Floored { base, .. } => base.decay_rate(),
            _ => None,
        }
    }

    /// Last point where `f` fails to be smooth.
    pub(crate) fn knot_end(&self) -> f64 {
        match self {
            ForcingSpec::Samples { t_max, .. } => *t_max,
            ForcingSpec::Sum { terms } => terms.iter().map(|t| t.knot_end()).fold(0.0, f64::max),
            ForcingSpec::Scaled { base, .. } => base.knot_end(),
            ForcingSpec::Floored { base, from } => base.knot_end().max(*from),
            _ => 0.0,
        }
    }

    /// Kinks of `f` inside `(t0, t1)`.
    pub(crate) fn knots(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_knots(t0, t1, &mut out);
        out
    }

    fn collect_knots(&self, t0: f64, t1: f64, out: &mut Vec<f64>) {
        match self {
            ForcingSpec::Samples { t_max, values, .. } => {
                let dt = t_max / (values.len() - 1) as f64;
                let first = (t0 / dt).ceil().max(0.0) as usize;
                for j in first..values.len() {
                    let t = j as f64 * dt;
                    if t >= t1 {
                        break;
                    }
                    if t > t0 {
                        out.push(t);
                    }
                }
            }
            ForcingSpec::Sum { terms } => terms.iter().for_each(|t| t.collect_knots(t0, t1, out)),
            ForcingSpec::Scaled { base, .. } => base.collect_knots(t0, t1, out),
            ForcingSpec::Floored { base, from } => {
                if *from > t0 && *from < t1 {
                    out.push(*from);
                }
                base.collect_knots(t0, t1, out)
            }
            _ => {}
        }
    }
}
