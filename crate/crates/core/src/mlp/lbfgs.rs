//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The two-loop recursion follows Nocedal & Wright, Algorithm 7.4; the line
//! search is their bracketing/zoom scheme (Algorithms 3.5 and 3.6) with
//! safeguarded cubic interpolation.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct LbfgsConfig {
    pub history: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            max_iter: 1000,
            grad_tol: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct LbfgsReport {
    pub iterations: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub termination: Termination,
    /// Objective after each accepted step, starting with the initial value.
    pub loss_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Minimizes `f` in place. `f(x, grad)` returns the objective and writes the
/// gradient.
pub fn minimize<F>(x: &mut [f64], mut f: F, cfg: &LbfgsConfig) -> LbfgsReport
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.history);
    let mut loss_history = vec![fx];
    let mut dir = vec![0.0; n];
    let mut alpha = vec![0.0; cfg.history];
    let mut iterations = 0;

    let termination = loop {
        if norm(&g) < cfg.grad_tol {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iter {
            break Termination::MaxIterations;
        }

        // two-loop recursion: dir = -H g
        dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
        for (i, p) in history.iter().enumerate().rev() {
            alpha[i] = p.rho * dot(&p.s, &dir);
            dir.iter_mut().zip(&p.y).for_each(|(d, yi)| *d -= alpha[i] * yi);
        }
        let gamma = history
            .back()
            .map_or(1.0 / norm(&g).max(1.0), |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (i, p) in history.iter().enumerate() {
            let beta = p.rho * dot(&p.y, &dir);
            dir.iter_mut()
                .zip(&p.s)
                .for_each(|(d, si)| *d += (alpha[i] - beta) * si);
        }

        let mut dg = dot(&dir, &g);
        if dg >= 0.0 {
            // not a descent direction; restart from steepest descent
            history.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi / norm(&g).max(1.0));
            dg = dot(&dir, &g);
        }

        let Some(step) = line_search(x, fx, &dir, dg, &mut f, cfg) else {
            break Termination::LineSearchFailed;
        };
        iterations += 1;

        let s: Vec<f64> = step.x.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        x.copy_from_slice(&step.x);
        g = step.g;
        fx = step.f;
        loss_history.push(fx);
        if sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            if history.len() == cfg.history {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }
    };

    LbfgsReport {
        iterations,
        loss: fx,
        grad_norm: norm(&g),
        termination,
        loss_history,
    }
}

struct Step {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

struct Probe {
    a: f64,
    f: f64,
    dg: f64,
}

/// Minimizer of the cubic interpolating two probes, clamped into the
/// interior of their interval.
fn cubic_min(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.a.min(hi.a), lo.a.max(hi.a));
    let d1 = lo.dg + hi.dg - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    let disc = d1 * d1 - lo.dg * hi.dg;
    let mid = 0.5 * (lo.a + hi.a);
    let t = if disc >= 0.0 {
        let d2 = (hi.a - lo.a).signum() * disc.sqrt();
        hi.a - (hi.a - lo.a) * (hi.dg + d2 - d1) / (hi.dg - lo.dg + 2.0 * d2)
    } else {
        mid
    };
    let margin = 0.1 * (b - a);
    if !t.is_finite() || t < a + margin || t > b - margin {
        mid
    } else {
        t
    }
}

fn line_search<F>(x: &[f64], f0: f64, dir: &[f64], dg0: f64, f: &mut F, cfg: &LbfgsConfig) -> Option<Step>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut eval = |a: f64| -> (Probe, Step) {
        let xa: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + a * di).collect();
        let mut ga = vec![0.0; n];
        let fa = f(&xa, &mut ga);
        let dg = dot(&ga, dir);
        (Probe { a, f: fa, dg }, Step { x: xa, f: fa, g: ga })
    };

    let mut prev = Probe { a: 0.0, f: f0, dg: dg0 };
    let mut a = 1.0;
    let mut evals = 0;
    let (mut lo, mut hi) = loop {
        if evals >= cfg.max_line_search {
            return None;
        }
        evals += 1;
        let (p, step) = eval(a);
        if !p.f.is_finite() {
            // overshoot into overflow; shrink
            a *= 0.1;
            continue;
        }
        if p.f > f0 + cfg.c1 * a * dg0 || (evals > 1 && p.f >= prev.f) {
            break (prev, p);
        }
        if p.dg.abs() <= -cfg.c2 * dg0 {
            return Some(step);
        }
        if p.dg >= 0.0 {
            break (p, prev);
        }
        prev = p;
        a *= 2.0;
    };

    // zoom: lo satisfies sufficient decrease with the lowest f seen so far
    while evals < cfg.max_line_search {
        evals += 1;
        let t = cubic_min(&lo, &hi);
        if (hi.a - lo.a).abs() < 1e-16 * lo.a.abs().max(1.0) {
            break;
        }
        let (p, step) = eval(t);
        if !p.f.is_finite() || p.f > f0 + cfg.c1 * t * dg0 || p.f >= lo.f {
            hi = p;
        } else {
            if p.dg.abs() <= -cfg.c2 * dg0 {
                return Some(step);
            }
            if p.dg * (hi.a - lo.a) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    // accept the best sufficient-decrease point if the interval collapsed
    if lo.a > 0.0 && lo.f < f0 {
        let (_, step) = eval(lo.a);
        return Some(step);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn solves_rosenbrock() {
        let mut x = [-1.2, 1.0];
        let r = minimize(&mut x, rosenbrock, &LbfgsConfig::default());
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5, "{x:?}");
        assert!(r.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn solves_ill_conditioned_quadratic() {
        let scales: Vec<f64> = (0..20).map(|i| 10f64.powf(f64::from(i) / 5.0)).collect();
        let mut x = vec![1.0; 20];
        let r = minimize(
            &mut x,
            |x, g| {
                let mut f = 0.0;
                for i in 0..x.len() {
                    g[i] = scales[i] * x[i];
                    f += 0.5 * scales[i] * x[i] * x[i];
                }
                f
            },
            &LbfgsConfig::default(),
        );
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert!(x.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn respects_iteration_cap() {
        let mut x = [-1.2, 1.0];
        let cfg = LbfgsConfig {
            max_iter: 3,
            ..LbfgsConfig::default()
        };
        let r = minimize(&mut x, rosenbrock, &cfg);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.termination, Termination::MaxIterations);
    }
}
