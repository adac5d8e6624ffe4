use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::forcing::ForcingSpec;
use crate::operators::{MonotoneOperator, OperatorSpec};
use crate::weights::CoefficientSpec;

/// Serializable description of `p u'' + q u' ∈ Au + f`, `u(0) = x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub operator: OperatorSpec,
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub forcing: ForcingSpec,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub operator: MonotoneOperator,
    pub coefficients: CoefficientSpec,
    pub forcing: ForcingSpec,
    pub x: Vec<f64>,
}

impl Problem {
    pub fn new(
        operator: MonotoneOperator,
        coefficients: CoefficientSpec,
        forcing: ForcingSpec,
        x: Vec<f64>,
    ) -> Result<Self> {
        let d = operator.dim();
        check_dim(d, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial point must be finite"));
        }
        forcing.validate(d)?;
        coefficients.validate()?;
        Ok(Problem {
            operator,
            coefficients,
            forcing,
            x,
        })
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        Problem::new(
            MonotoneOperator::from_spec(&spec.operator)?,
            spec.coefficients.clone(),
            spec.forcing.clone(),
            spec.x.clone(),
        )
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            operator: self.operator.spec().clone(),
            coefficients: self.coefficients.clone(),
            forcing: self.forcing.clone(),
            x: self.x.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn with_x(&self, x: Vec<f64>) -> Result<Self> {
        Problem::new(self.operator.clone(), self.coefficients.clone(), self.forcing.clone(), x)
    }

    pub fn with_forcing(&self, forcing: ForcingSpec) -> Result<Self> {
        Problem::new(self.operator.clone(), self.coefficients.clone(), forcing, self.x.clone())
    }
}
