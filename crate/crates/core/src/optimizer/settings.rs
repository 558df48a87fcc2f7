use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Stopping rule shared by every method:
/// `max_i |∂B/∂p_i| · max(|p_i|, 1) ≤ tolerance`.
pub fn stationarity(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(xi, gi)| gi.abs() * xi.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Line-search methods (steepest ascent and conjugate gradient).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial_step: f64,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-6,
            initial_step: 1.0,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tolerance > 0.0
            && self.initial_step > 0.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.max_iterations > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSettings(format!("{self:?}")))
        }
    }
}

/// Damped fictitious-particle dynamics `m p'' = -γ p' + ∇B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSettings {
    pub mass: f64,
    pub friction: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub tolerance: f64,
}

impl Default for RelaxationSettings {
    fn default() -> Self {
        Self {
            mass: 0.1,
            friction: 1.0,
            dt: 0.05,
            max_steps: 20_000,
            tolerance: 1e-6,
        }
    }
}

/// Friction window in which the dynamics were tuned.
pub const FRICTION_RANGE: (f64, f64) = (0.5, 1.5);
/// Time-step window in which the dynamics were tuned.
pub const DT_RANGE: (f64, f64) = (0.01, 0.1);

impl RelaxationSettings {
    /// Rejects non-positive values; returns warnings for values outside the
    /// tuned windows.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [self.mass, self.friction, self.dt, self.tolerance]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_steps == 0 {
            return Err(Error::InvalidSettings(format!("{self:?}")));
        }
        let mut warnings = Vec::new();
        if !(FRICTION_RANGE.0..=FRICTION_RANGE.1).contains(&self.friction) {
            warnings.push(format!(
                "friction {} outside ({}, {})",
                self.friction, FRICTION_RANGE.0, FRICTION_RANGE.1
            ));
        }
        if !(DT_RANGE.0..=DT_RANGE.1).contains(&self.dt) {
            warnings.push(format!("time step {} outside ({}, {})", self.dt, DT_RANGE.0, DT_RANGE.1));
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationarity_guards_origin() {
        assert_eq!(stationarity(&[0.0, 0.0], &[1e-7, -2e-7]), 2e-7);
        assert_eq!(stationarity(&[10.0], &[1e-7]), 1e-6);
    }

    #[test]
    fn relaxation_validation() {
        assert!(RelaxationSettings::default().validate().unwrap().is_empty());
        let wide = RelaxationSettings {
            friction: 3.0,
            dt: 0.2,
            ..Default::default()
        };
        assert_eq!(wide.validate().unwrap().len(), 2);
        let bad = RelaxationSettings {
            mass: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(SearchSettings::default().validate().is_ok());
        assert!(SearchSettings {
            armijo: 2.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
