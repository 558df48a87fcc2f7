//! Steepest ascent and Polak-Ribière+ conjugate gradient with a backtracking
//! Armijo line search.

use super::objective::{check_finite, Objective};
use super::settings::{stationarity, SearchSettings};
use super::SearchOutcome;
use crate::Result;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn step_to(x: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect()
}

/// Accepted point of a line search.
struct LineStep {
    x: Vec<f64>,
    value: f64,
}

/// Halve from `initial_step` until `f(x + t d) ≥ f(x) + c t ∇f·d`, then try
/// the vertex of the parabola through `f(x)`, the slope and the accepted
/// point. `None` after `max_halvings` rejections.
fn line_search<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    fx: f64,
    slope: f64,
    dir: &[f64],
    settings: &SearchSettings,
) -> Result<Option<LineStep>> {
    let mut t = settings.initial_step;
    for _ in 0..=settings.max_halvings {
        let y = step_to(x, dir, t);
        let fy = objective.value(&y)?;
        if fy.is_finite() && fy >= fx + settings.armijo * t * slope {
            let curvature = (fy - fx - slope * t) / (t * t);
            if curvature < 0.0 {
                let vertex = -slope / (2.0 * curvature);
                if vertex.is_finite() && vertex > 0.0 && (vertex - t).abs() > 1e-12 * t {
                    let z = step_to(x, dir, vertex);
                    let fz = objective.value(&z)?;
                    if fz.is_finite() && fz > fy {
                        return Ok(Some(LineStep { x: z, value: fz }));
                    }
                }
            }
            return Ok(Some(LineStep { x: y, value: fy }));
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Gradient ascent.
pub fn steepest_descent<O: Objective + ?Sized>(objective: &O, x0: &[f64], settings: &SearchSettings) -> Result<SearchOutcome> {
    settings.validate()?;
    let mut x = x0.to_vec();
    let mut fx = check_finite(objective.value(&x)?, "objective at start")?;
    for iteration in 0..settings.max_iterations {
        let g = objective.gradient(&x)?;
        if stationarity(&x, &g) <= settings.tolerance {
            return Ok(SearchOutcome::new(x, fx, iteration, true));
        }
        let slope = dot(&g, &g);
        match line_search(objective, &x, fx, slope, &g, settings)? {
            Some(step) => {
                x = step.x;
                fx = step.value;
            }
            None => return Ok(SearchOutcome::new(x, fx, iteration, false)),
        }
    }
    let g = objective.gradient(&x)?;
    let converged = stationarity(&x, &g) <= settings.tolerance;
    Ok(SearchOutcome::new(x, fx, settings.max_iterations, converged))
}

/// Nonlinear conjugate gradient, `β = max(0, g·(g - g_prev)/|g_prev|²)`,
/// restarted along the gradient every `dim` iterations or whenever the
/// direction stops ascending.
pub fn conjugate_gradient<O: Objective + ?Sized>(objective: &O, x0: &[f64], settings: &SearchSettings) -> Result<SearchOutcome> {
    settings.validate()?;
    let n = objective.dim().max(1);
    let mut x = x0.to_vec();
    let mut fx = check_finite(objective.value(&x)?, "objective at start")?;
    let mut g = objective.gradient(&x)?;
    let mut dir = g.clone();
    let mut since_restart = 0;
    for iteration in 0..settings.max_iterations {
        if stationarity(&x, &g) <= settings.tolerance {
            return Ok(SearchOutcome::new(x, fx, iteration, true));
        }
        let mut slope = dot(&g, &dir);
        if slope <= 0.0 || since_restart >= n {
            dir.clone_from(&g);
            slope = dot(&g, &g);
            since_restart = 0;
        }
        let step = match line_search(objective, &x, fx, slope, &dir, settings)? {
            Some(step) => step,
            None if since_restart > 0 => {
                // retry once along the gradient before giving up
                dir.clone_from(&g);
                since_restart = 0;
                match line_search(objective, &x, fx, dot(&g, &g), &dir, settings)? {
                    Some(step) => step,
                    None => return Ok(SearchOutcome::new(x, fx, iteration, false)),
                }
            }
            None => return Ok(SearchOutcome::new(x, fx, iteration, false)),
        };
        x = step.x;
        fx = step.value;
        let g_new = objective.gradient(&x)?;
        let denom = dot(&g, &g);
        let beta = if denom > 0.0 {
            (g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum::<f64>() / denom).max(0.0)
        } else {
            0.0
        };
        for (di, gi) in dir.iter_mut().zip(&g_new) {
            *di = gi + beta * *di;
        }
        g = g_new;
        since_restart += 1;
    }
    let converged = stationarity(&x, &g) <= settings.tolerance;
    Ok(SearchOutcome::new(x, fx, settings.max_iterations, converged))
}
