//! Quasi-Newton minimization with a strong-Wolfe line search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::OptimizerConfig;
use crate::error::{Error, Result};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_SEARCH_TRIALS: usize = 50;
const CURVATURE_GUARD: f64 = 1e-12;
const MAX_STEP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cost: f64,
    /// Euclidean norm of the gradient.
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    GradientThreshold,
    /// The decrease predicted for a full quasi-Newton step is below the
    /// rounding noise of the cost, so no further progress is measurable.
    PrecisionLimit,
    MaxIterations,
    LineSearchFailure,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            StopReason::GradientTolerance | StopReason::GradientThreshold | StopReason::PrecisionLimit
        )
    }
}

/// Rounding noise of a cost evaluated near `f`.
fn noise(f: f64) -> f64 {
    8.0 * f64::EPSILON * (1.0 + f.abs())
}

#[derive(Clone, Debug)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Vec<TraceRecord>,
}

impl BfgsOutcome {
    pub fn converged(&self) -> bool {
        self.stop.is_converged()
    }

    pub fn grad_norm(&self) -> f64 {
        l2(&self.gradient)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

/// Minimizes `f` from `x0`. `f` returns the value and gradient.
///
/// Stops when `||g||_inf < cfg.grad_tolerance`, when the optional early-stop
/// threshold on `||g||_2` is reached, when the predicted decrease drops
/// below the cost's rounding noise, after `cfg.max_iters` accepted steps,
/// or when the line search fails twice in a row (once more after resetting
/// the inverse Hessian). The last accepted iterate is always returned.
pub fn bfgs<F>(mut f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x)?;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Optimization(format!("cost is not finite at the starting point ({fx})")));
    }
    if g.len() != n {
        return Err(Error::Structural(format!("gradient has length {}, expected {n}", g.len())));
    }
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut trace = vec![TraceRecord { iteration: 0, cost: fx, grad_norm: l2(&g) }];
    let mut iterations = 0;
    // makes the first trial step roughly unit length
    let mut f_prev = fx + 0.5 * l2(&g);

    let stop = loop {
        if let Some(tau) = cfg.grad_threshold_early_stop {
            if l2(&g) < tau {
                break StopReason::GradientThreshold;
            }
        }
        if linf(&g) < cfg.grad_tolerance {
            break StopReason::GradientTolerance;
        }
        if iterations >= cfg.max_iters {
            break StopReason::MaxIterations;
        }

        let gv = DVector::from_column_slice(&g);
        let mut p: Vec<f64> = (-(&h_inv * &gv)).iter().copied().collect();
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            h_inv.fill_with_identity();
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        // with a learned curvature model, -slope estimates twice the
        // decrease a full step can still deliver
        if !is_identity(&h_inv) && -slope <= noise(fx) {
            break StopReason::PrecisionLimit;
        }

        // first trial step from the last decrease, capped at the full step
        let alpha0 = (1.01 * 2.0 * (fx - f_prev) / slope).clamp(f64::MIN_POSITIVE, 1.0);
        let alpha0 = if alpha0.is_finite() { alpha0 } else { 1.0 };
        let mut step = line_search(&mut f, &x, fx, &p, slope, alpha0);
        if step.is_none() && !is_identity(&h_inv) {
            log::debug!("line search failed at iteration {iterations}; resetting inverse Hessian");
            h_inv.fill_with_identity();
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
            step = line_search(&mut f, &x, fx, &p, slope, alpha0.min(1.01 / l2(&g)));
        }
        let Some(LineStep { alpha, f: f_new, g: g_new }) = step else {
            break StopReason::LineSearchFailure;
        };

        let s: Vec<f64> = p.iter().map(|v| alpha * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > CURVATURE_GUARD * l2(&s) * l2(&y) {
            let rho = 1.0 / sy;
            let sv = DVector::from_vec(s.clone());
            let yv = DVector::from_vec(y);
            let hy = &h_inv * &yv;
            let yhy = yv.dot(&hy);
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded
            h_inv -= (&hy * sv.transpose() + &sv * hy.transpose()) * rho;
            h_inv += (&sv * sv.transpose()) * (rho * rho * yhy + rho);
        }
        x = axpy(&x, 1.0, &s);
        f_prev = fx;
        fx = f_new;
        g = g_new;
        iterations += 1;
        trace.push(TraceRecord { iteration: iterations, cost: fx, grad_norm: l2(&g) });
    };

    Ok(BfgsOutcome { x, f: fx, gradient: g, iterations, stop, trace })
}

fn is_identity(m: &DMatrix<f64>) -> bool {
    m.iter().enumerate().all(|(k, &v)| {
        let (r, c) = (k % m.nrows(), k / m.nrows());
        v == if r == c { 1.0 } else { 0.0 }
    })
}

struct LineStep {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
}

struct Point {
    alpha: f64,
    f: f64,
    slope: f64,
    g: Vec<f64>,
}

/// Strong-Wolfe bracketing and zoom. Returns `None` when no step with
/// sufficient decrease is found within the trial budget.
fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    p: &[f64],
    slope0: f64,
    alpha0: f64,
) -> Option<LineStep>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut trials = 0;
    let mut eval = |alpha: f64, trials: &mut usize| -> Option<Point> {
        *trials += 1;
        let (fa, ga) = f(&axpy(x, alpha, p)).ok()?;
        if !fa.is_finite() || ga.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Point { alpha, f: fa, slope: dot(&ga, p), g: ga })
    };
    // Near a minimum the predicted decrease can fall below the rounding
    // noise of f; a non-increasing f then counts as sufficient decrease,
    // leaving the curvature test to judge the step.
    let noise = noise(f0);
    let armijo = |pt: &Point| {
        pt.f <= f0 + C1 * pt.alpha * slope0 || (pt.f <= f0 && -C1 * pt.alpha * slope0 <= noise)
    };
    let p_max = linf(p);
    let x_max = linf(x).max(1.0);
    let curvature = |pt: &Point| pt.slope.abs() <= -C2 * slope0;

    let mut prev = Point { alpha: 0.0, f: f0, slope: slope0, g: Vec::new() };
    let mut alpha = alpha0;
    let (mut lo, mut hi) = loop {
        if trials >= MAX_LINE_SEARCH_TRIALS {
            return accept_fallback(prev);
        }
        if alpha * p_max <= f64::EPSILON * x_max {
            return accept_fallback(prev);
        }
        let Some(cur) = eval(alpha, &mut trials) else {
            // non-finite cost: shrink toward the last good point
            alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
            continue;
        };
        if !armijo(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return Some(LineStep { alpha: cur.alpha, f: cur.f, g: cur.g });
        }
        if cur.slope >= 0.0 {
            break (cur, prev);
        }
        alpha = (2.0 * cur.alpha).min(MAX_STEP);
        if alpha == cur.alpha {
            return Some(LineStep { alpha: cur.alpha, f: cur.f, g: cur.g });
        }
        prev = cur;
    };

    // zoom: lo satisfies sufficient decrease and has the lowest f so far
    loop {
        if trials >= MAX_LINE_SEARCH_TRIALS || (hi.alpha - lo.alpha).abs() * p_max <= f64::EPSILON * x_max {
            return accept_fallback(lo);
        }
        let width = hi.alpha - lo.alpha;
        let mut trial = cubic_minimizer(&lo, &hi).unwrap_or(lo.alpha + 0.5 * width);
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let margin = 0.1 * (b - a);
        if !(trial > a + margin && trial < b - margin) {
            trial = lo.alpha + 0.5 * width;
        }
        let Some(cur) = eval(trial, &mut trials) else {
            hi = Point { alpha: trial, f: f64::INFINITY, slope: f64::INFINITY, g: Vec::new() };
            continue;
        };
        if !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Some(LineStep { alpha: cur.alpha, f: cur.f, g: cur.g });
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
}

/// Accepts a point that only satisfies sufficient decrease.
fn accept_fallback(pt: Point) -> Option<LineStep> {
    (pt.alpha > 0.0).then_some(LineStep { alpha: pt.alpha, f: pt.f, g: pt.g })
}

fn cubic_minimizer(a: &Point, b: &Point) -> Option<f64> {
    if !b.f.is_finite() || !b.slope.is_finite() {
        return None;
    }
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { grad_tolerance: 1e-10, ..OptimizerConfig::default() }
    }

    #[test]
    fn quadratic_bowl() {
        let out = bfgs(|x| Ok((x[0] * x[0] + x[1] * x[1], vec![2.0 * x[0], 2.0 * x[1]])), &[1.0, 1.0], &cfg())
            .unwrap();
        assert!(out.f < 1e-10);
        assert!(out.iterations <= 5);
        assert!(out.converged());
    }

    fn rosenbrock(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok((f, g))
    }

    #[test]
    fn stops_at_the_precision_floor() {
        // a bowl shifted far from zero: f resolves differences of ~1e-13 only
        let shifted = |x: &[f64]| {
            let f = -75.0 + 1e-6 * (x[0] * x[0] + 3.0 * x[1] * x[1] + x[0] * x[1]);
            Ok((f, vec![1e-6 * (2.0 * x[0] + x[1]), 1e-6 * (6.0 * x[1] + x[0])]))
        };
        let out = bfgs(shifted, &[3.0, -7.0], &OptimizerConfig { grad_tolerance: 0.0, ..cfg() }).unwrap();
        assert_eq!(out.stop, StopReason::PrecisionLimit);
        assert!(out.converged());
        assert!(out.iterations < 50, "{} iterations", out.iterations);
        assert!(out.f - -75.0 < 1e-12);
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let out = bfgs(rosenbrock, &[-1.2, 1.0], &cfg()).unwrap();
        assert!(out.f < 1e-8, "f = {}", out.f);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn trace_is_monotone() {
        let out = bfgs(rosenbrock, &[-1.2, 1.0], &cfg()).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1].cost <= w[0].cost);
        }
        assert_eq!(out.trace.len(), out.iterations + 1);
    }

    #[test]
    fn early_stop_on_gradient_norm() {
        let c = OptimizerConfig { grad_threshold_early_stop: Some(1e-1), ..cfg() };
        let out = bfgs(rosenbrock, &[-1.2, 1.0], &c).unwrap();
        assert_eq!(out.stop, StopReason::GradientThreshold);
        assert!(out.grad_norm() < 1e-1);
    }

    #[test]
    fn iteration_cap() {
        let c = OptimizerConfig { max_iters: 3, ..cfg() };
        let out = bfgs(rosenbrock, &[-1.2, 1.0], &c).unwrap();
        assert_eq!(out.iterations, 3);
        assert_eq!(out.stop, StopReason::MaxIterations);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let r = bfgs(|_| Ok((f64::NAN, vec![0.0])), &[0.0], &cfg());
        assert!(matches!(r, Err(Error::Optimization(_))));
    }

    #[test]
    fn nan_region_is_avoided() {
        // f = x^2 for x > -0.5, NaN beyond; a unit step from 2 overshoots into NaN
        let f = |x: &[f64]| {
            if x[0] < -0.5 {
                Ok((f64::NAN, vec![f64::NAN]))
            } else {
                Ok(((x[0] - 0.1).powi(2), vec![2.0 * (x[0] - 0.1)]))
            }
        };
        let out = bfgs(f, &[2.0], &cfg()).unwrap();
        assert!((out.x[0] - 0.1).abs() < 1e-8);
    }
}
