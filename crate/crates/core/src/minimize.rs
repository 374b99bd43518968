//! Limited-memory quasi-Newton minimization with backtracking line search.
//!
//! Objectives supply their own gradient through [`Objective`]; use
//! [`CentralDifference`] when no closed form is available.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `grad` and returns how many calls to
    /// the underlying function it spent.
    fn gradient(&mut self, x: &[f64], grad: &mut [f64]) -> usize;
}

/// Central-difference gradient: two evaluations per coordinate, with step
/// `rel_step * max(|x_i|, 1)`.
pub struct CentralDifference<F> {
    pub f: F,
    pub rel_step: f64,
}

impl<F: FnMut(&[f64]) -> f64> CentralDifference<F> {
    pub fn new(f: F, rel_step: f64) -> Self {
        Self { f, rel_step }
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for CentralDifference<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&mut self, x: &[f64], grad: &mut [f64]) -> usize {
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let h = self.rel_step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = (self.f)(&probe);
            probe[i] = x[i] - h;
            let down = (self.f)(&probe);
            probe[i] = x[i];
            grad[i] = (up - down) / (2.0 * h);
        }
        2 * x.len()
    }
}

/// Objective with a closed-form gradient. `fg` returns the value and, when
/// given a buffer, fills in the gradient.
pub struct Analytic<F> {
    pub fg: F,
}

impl<F: FnMut(&[f64], Option<&mut [f64]>) -> f64> Objective for Analytic<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.fg)(x, None)
    }

    fn gradient(&mut self, x: &[f64], grad: &mut [f64]) -> usize {
        (self.fg)(x, Some(grad));
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Stop when the relative objective decrease falls below this.
    pub tol: f64,
    /// Stop when the gradient norm falls below this.
    pub gtol: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iters: 200, tol: 1e-8, gtol: 1e-8, memory: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientNorm,
    RelativeDecrease,
    IterationCap,
    LineSearch,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: &MinimizeOptions) -> Result<Minimum> {
    minimize_projected(obj, x0, opts, |_| {})
}

/// Like [`minimize`], but `project` is applied to every accepted iterate.
/// The projection must leave the objective value unchanged (for example a
/// translation of a translation-invariant configuration).
pub fn minimize_projected<O: Objective>(
    obj: &mut O,
    x0: &[f64],
    opts: &MinimizeOptions,
    mut project: impl FnMut(&mut [f64]),
) -> Result<Minimum> {
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let mut f = obj.value(&x);
    let mut evaluations = 1;
    if !f.is_finite() {
        return Err(Error::Minimization {
            reason: format!("objective is {f} at the starting point"),
            best_x: x,
            best_f: f,
            evaluations,
        });
    }
    let mut g = vec![0.0; n];
    evaluations += obj.gradient(&x, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Minimization {
            reason: "non-finite gradient at the starting point".into(),
            best_x: x,
            best_f: f,
            evaluations,
        });
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut alpha = vec![0.0; opts.memory.max(1)];
    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut stop = StopReason::IterationCap;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        if dot(&g, &g).sqrt() < opts.gtol {
            stop = StopReason::GradientNorm;
            break;
        }

        // Two-loop recursion: d = -H g.
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            alpha[k] = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= alpha[k] * yi);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let beta = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (alpha[k] - beta) * si);
        }

        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = dot(&g, &d);
        }
        // Without curvature information, start with a unit-length step.
        let mut step = if history.is_empty() { 1.0 / dot(&d, &d).sqrt().max(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            trial.iter_mut().zip(x.iter().zip(&d)).for_each(|(t, (xi, di))| *t = xi + step * di);
            project(&mut trial);
            let ft = obj.value(&trial);
            evaluations += 1;
            if ft.is_finite() && ft <= f + ARMIJO * step * slope {
                accepted = Some(ft);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            if !history.is_empty() {
                // Stale curvature; retry from steepest descent.
                history.clear();
                continue;
            }
            stop = StopReason::LineSearch;
            break;
        };
        iterations += 1;

        evaluations += obj.gradient(&trial, &mut g_new);
        if g_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Minimization {
                reason: "non-finite gradient".into(),
                best_x: trial,
                best_f: f_new,
                evaluations,
            });
        }
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            if opts.memory > 0 {
                history.push_back((s, y, 1.0 / sy));
            }
        }

        let decrease = f - f_new;
        let scale = f.abs().max(f_new.abs());
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if decrease <= opts.tol * scale {
            stop = StopReason::RelativeDecrease;
            break;
        }
    }

    Ok(Minimum { x, f, iterations, evaluations, stop })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
    }

    #[test]
    fn quadratic_bowl() {
        let c = [1.0, 2.0, 3.0, 4.0];
        let mut obj = CentralDifference::new(
            |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
            1e-6,
        );
        let m = minimize(&mut obj, &[0.0; 4], &MinimizeOptions::default()).unwrap();
        for (xi, ci) in m.x.iter().zip(&c) {
            assert!((xi - ci).abs() < 1e-6, "{:?}", m.x);
        }
    }

    #[test]
    fn rosenbrock_two_active_coordinates() {
        let mut obj = CentralDifference::new(rosenbrock, 1e-6);
        let m = minimize(&mut obj, &[-1.2, 1.0, 0.0, 0.0], &MinimizeOptions::default()).unwrap();
        assert!(m.f < 1e-6, "f = {} after {} iterations", m.f, m.iterations);
        assert!(m.iterations <= 200);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_function_stays_put() {
        let mut obj = CentralDifference::new(|_: &[f64]| 3.0, 1e-6);
        let x0 = [0.5, -1.0, 2.0, 0.0];
        let m = minimize(&mut obj, &x0, &MinimizeOptions::default()).unwrap();
        assert_eq!(m.x, x0);
        assert_eq!(m.iterations, 0);
        assert_eq!(m.stop, StopReason::GradientNorm);
    }

    #[test]
    fn gradient_uses_two_evaluations_per_parameter() {
        let mut obj = CentralDifference::new(|x: &[f64]| x.iter().sum::<f64>(), 1e-6);
        let mut g = [0.0; 4];
        assert_eq!(obj.gradient(&[0.0; 4], &mut g), 8);
        assert!(g.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let mut obj = CentralDifference::new(|_: &[f64]| f64::NAN, 1e-6);
        let err = minimize(&mut obj, &[0.0], &MinimizeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Minimization { .. }));
    }

    #[test]
    fn analytic_gradient_path() {
        let mut obj = Analytic {
            fg: |x: &[f64], g: Option<&mut [f64]>| {
                if let Some(g) = g {
                    g[0] = 2.0 * (x[0] - 3.0);
                }
                (x[0] - 3.0).powi(2)
            },
        };
        let m = minimize(&mut obj, &[0.0], &MinimizeOptions::default()).unwrap();
        assert!((m.x[0] - 3.0).abs() < 1e-8);
    }
}
