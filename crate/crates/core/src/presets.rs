//! Named test problems with known behaviour.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forcing::ForcingSpec;
use crate::operators::{OperatorSpec, ScalarGraph};
use crate::problem::ProblemSpec;
use crate::viscosity::{DiffusionReactionSpec, Diffusivity};
use crate::weights::CoefficientSpec;

pub const PRESET_NAMES: &[&str] = &[
    "zero",
    "linear",
    "scalar-drift",
    "power-forcing",
    "obstacle",
    "diffusion-reaction",
];

/// Builds a preset; `delta` only matters for `power-forcing` (default 1).
pub fn load_preset(name: &str, delta: Option<f64>) -> Result<ProblemSpec> {
    match name {
        "zero" => Ok(zero()),
        "linear" => Ok(linear(1.0)),
        "scalar-drift" => Ok(scalar_drift()),
        "power-forcing" => Ok(power_forcing(delta.unwrap_or(1.0))),
        "obstacle" | "sign" => Ok(obstacle()),
        "diffusion-reaction" => Ok(diffusion_reaction(32)),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Trivial data: the solution is identically zero.
pub fn zero() -> ProblemSpec {
    ProblemSpec {
        operator: OperatorSpec::Zero { dim: 1 },
        coefficients: CoefficientSpec::constant(1.0, 0.0),
        forcing: ForcingSpec::Zero,
        x: vec![0.0],
    }
}

/// `u'' = α u`, `u(0) = 1`: the bounded solution is `e^{−√α t}`.
pub fn linear(alpha: f64) -> ProblemSpec {
    ProblemSpec {
        operator: OperatorSpec::Linear {
            matrix: vec![vec![alpha]],
        },
        coefficients: CoefficientSpec::constant(1.0, 0.0),
        forcing: ForcingSpec::Zero,
        x: vec![1.0],
    }
}

/// `u'' − u' = 1`, `u(0) = 5`. The weight is `a(t) = e^{−t}` and the solution
/// selected by the weighted bound is `5 − t`, which is unbounded.
pub fn scalar_drift() -> ProblemSpec {
    ProblemSpec {
        operator: OperatorSpec::Zero { dim: 1 },
        coefficients: CoefficientSpec::constant(1.0, -1.0),
        forcing: ForcingSpec::Constant { value: vec![1.0] },
        x: vec![5.0],
    }
}

/// `u'' = (1 + t)^{−2−δ}`, `u(0) = 1`. The forcing has finite weighted norm
/// iff `δ > 0`; the bounded solution is `x − ∫₀ᵗ s f − t ∫ₜ^∞ f`.
pub fn power_forcing(delta: f64) -> ProblemSpec {
    ProblemSpec {
        operator: OperatorSpec::Zero { dim: 1 },
        coefficients: CoefficientSpec::constant(1.0, 0.0),
        forcing: ForcingSpec::Power {
            scale: vec![1.0],
            exponent: 2.0 + delta,
        },
        x: vec![1.0],
    }
}

/// `u'' ∈ sign(u)`, `u(0) = 1`: reaches zero at `t = √2` and stays there.
pub fn obstacle() -> ProblemSpec {
    ProblemSpec {
        operator: OperatorSpec::ScalarGraph {
            graph: ScalarGraph::Sign,
            dim: 1,
        },
        coefficients: CoefficientSpec::constant(1.0, 0.0),
        forcing: ForcingSpec::Zero,
        x: vec![1.0],
    }
}

/// `ε u'' − u' ∈ −Δ u + sign(u)` on `m` interior points of `[0, 1]` with
/// `ε = 0.1` and initial profile `sin(π s)`.
pub fn diffusion_reaction(m: usize) -> ProblemSpec {
    let spec = DiffusionReactionSpec {
        interval: [0.0, 1.0],
        nodes: m,
        diffusivity: Diffusivity::Constant(1.0),
        reaction: Some(ScalarGraph::Sign),
    };
    let x = spec.points().iter().map(|s| (PI * s).sin()).collect();
    ProblemSpec {
        operator: OperatorSpec::DiffusionReaction(spec),
        coefficients: CoefficientSpec::constant(0.1, -1.0),
        forcing: ForcingSpec::Zero,
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Problem;

    #[test]
    fn every_preset_builds() {
        for name in PRESET_NAMES {
            let spec = load_preset(name, None).unwrap();
            Problem::from_spec(&spec).unwrap();
        }
        assert!(matches!(load_preset("nope", None), Err(Error::UnknownPreset(_))));
    }
}
