use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{HgrError, Result};
use crate::stats;

/// Smallest sample size accepted by [`SampleVector`].
pub const MIN_OBSERVATIONS: usize = 3;

/// A validated observation vector: at least three finite entries with
/// strictly positive spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVector {
    values: Vec<f64>,
    name: Option<String>,
}

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_OBSERVATIONS {
            return Err(HgrError::TooFewObservations {
                required: MIN_OBSERVATIONS,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(HgrError::NonFinite { index });
        }
        let sd = stats::std_dev(&values);
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(HgrError::ZeroVariance);
        }
        Ok(SampleVector { values, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.values)
    }

    pub fn std_dev(&self) -> f64 {
        stats::std_dev(&self.values)
    }

    /// Applies `f` elementwise and validates the result.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SampleVector> {
        SampleVector::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for SampleVector {
    type Error = HgrError;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        SampleVector::new(values)
    }
}

pub(crate) fn check_paired(a: &SampleVector, b: &SampleVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(HgrError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}
