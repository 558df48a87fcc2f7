//! Dynamic relaxation: a damped particle in the potential `-B`, integrated
//! with classical fourth-order Runge-Kutta on `(p, v)`.

use super::objective::{check_finite, Objective};
use super::settings::{stationarity, RelaxationSettings};
use super::SearchOutcome;
use crate::Result;

/// Position norm beyond which the trajectory counts as diverged.
pub const DIVERGENCE_NORM: f64 = 1e6;

pub fn dynamic_relaxation<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    settings: &RelaxationSettings,
) -> Result<SearchOutcome> {
    settings.validate()?;
    let n = x0.len();
    let (m, gamma, dt) = (settings.mass, settings.friction, settings.dt);
    let mut p = x0.to_vec();
    let mut v = vec![0.0; n];
    check_finite(objective.value(&p)?, "objective at start")?;

    let accel = |v: &[f64], force: &[f64]| -> Vec<f64> {
        v.iter().zip(force).map(|(vi, fi)| (fi - gamma * vi) / m).collect()
    };
    let shifted = |base: &[f64], delta: &[f64], h: f64| -> Vec<f64> {
        base.iter().zip(delta).map(|(b, d)| b + h * d).collect()
    };

    for step in 0..settings.max_steps {
        let f1 = objective.gradient(&p)?;
        let at_rest = stationarity(&p, &v) <= settings.tolerance;
        if at_rest && stationarity(&p, &f1) <= settings.tolerance {
            let value = objective.value(&p)?;
            return Ok(SearchOutcome::new(p, value, step, true));
        }
        let a1 = accel(&v, &f1);

        let p2 = shifted(&p, &v, dt / 2.0);
        let v2 = shifted(&v, &a1, dt / 2.0);
        let a2 = accel(&v2, &objective.gradient(&p2)?);

        let p3 = shifted(&p, &v2, dt / 2.0);
        let v3 = shifted(&v, &a2, dt / 2.0);
        let a3 = accel(&v3, &objective.gradient(&p3)?);

        let p4 = shifted(&p, &v3, dt);
        let v4 = shifted(&v, &a3, dt);
        let a4 = accel(&v4, &objective.gradient(&p4)?);

        for i in 0..n {
            p[i] += dt / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            v[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            let value = objective.value(&p).unwrap_or(f64::NEG_INFINITY);
            return Ok(SearchOutcome::new(p, value, step + 1, false));
        }
    }
    let g = objective.gradient(&p)?;
    let converged = stationarity(&p, &g) <= settings.tolerance && stationarity(&p, &v) <= settings.tolerance;
    let value = objective.value(&p)?;
    Ok(SearchOutcome::new(p, value, settings.max_steps, converged))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Bowl;

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(-x.iter().map(|v| v * v).sum::<f64>())
        }
    }

    #[test]
    fn relaxes_to_origin() {
        let r = dynamic_relaxation(&Bowl, &[1.0, -2.0, 0.5], &RelaxationSettings::default()).unwrap();
        assert!(r.converged);
        let g = Bowl.gradient(&r.x).unwrap();
        assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-6 * 3f64.sqrt());
    }

    #[test]
    fn divergence_is_reported() {
        struct Uphill;
        impl Objective for Uphill {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> Result<f64> {
                Ok(x[0] * x[0])
            }
        }
        let r = dynamic_relaxation(&Uphill, &[1.0], &RelaxationSettings::default()).unwrap();
        assert!(!r.converged);
        assert!(r.x[0].abs() > DIVERGENCE_NORM);
    }

    #[test]
    fn step_budget_exhaustion() {
        let s = RelaxationSettings {
            max_steps: 3,
            ..Default::default()
        };
        let r = dynamic_relaxation(&Bowl, &[1.0, 1.0, 1.0], &s).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
