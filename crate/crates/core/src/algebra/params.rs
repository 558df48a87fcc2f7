use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Full `d² - 1` coordinates, or the reduced `d² - d` form with the
/// W (diagonal) coordinates fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ParameterMode {
    Full,
    #[default]
    Reduced,
}

impl ParameterMode {
    pub fn len(self, d: usize) -> usize {
        match self {
            ParameterMode::Full => d * d - 1,
            ParameterMode::Reduced => d * d - d,
        }
    }
}

/// Coefficients of one local measurement setting over the generator basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    d: usize,
    mode: ParameterMode,
    values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(d: usize, mode: ParameterMode, values: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let expected = mode.len(d);
        if values.len() != expected {
            return Err(Error::ParameterLength {
                d,
                expected,
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter entry {bad}")));
        }
        Ok(Self { d, mode, values })
    }

    pub fn zeros(d: usize, mode: ParameterMode) -> Result<Self> {
        Self::new(d, mode, vec![0.0; mode.len(d)])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> ParameterMode {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coordinates over all `d² - 1` generators; reduced vectors are
    /// zero-padded on the W block.
    pub fn full_values(&self) -> Vec<f64> {
        let mut full = self.values.clone();
        full.resize(self.d * self.d - 1, 0.0);
        full
    }

    pub fn to_full(&self) -> Self {
        Self {
            d: self.d,
            mode: ParameterMode::Full,
            values: self.full_values(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_by_mode() {
        assert_eq!(ParameterMode::Full.len(3), 8);
        assert_eq!(ParameterMode::Reduced.len(3), 6);
        let p = ParameterVector::new(3, ParameterMode::Reduced, vec![1.0; 6]).unwrap();
        let full = p.full_values();
        assert_eq!(full.len(), 8);
        assert_eq!(&full[6..], &[0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ParameterVector::new(3, ParameterMode::Full, vec![0.0; 6]),
            Err(Error::ParameterLength { expected: 8, found: 6, .. })
        ));
        assert!(matches!(
            ParameterVector::new(2, ParameterMode::Full, vec![0.0, f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }
}
