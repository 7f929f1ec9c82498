//! Tanh-sinh (double-exponential) quadrature on a finite interval.
//!
//! With `u = (π/2)·sinh t` the rule samples `x = tanh u` on `[-1, 1]`. Nodes are
//! placed by their distance to the nearest endpoint, `δ = 1 − tanh u`, so they
//! approach an endpoint down to a configurable floor (`1e-280` by default). Nodes that would round onto
//! an endpoint are clamped to the adjacent interior float, so the rule never
//! samples an endpoint and the weight of the unresolvable sliver is kept. The
//! exact endpoint distance is passed to the integrand with every node.

use std::f64::consts::FRAC_PI_2;

use super::{eval_nodes, target, Limits, PairResult, QuadResult, Status};
use crate::error::Result;
use crate::summation::CompensatedSum;

/// Levels below this never report convergence.
const MIN_LEVEL: u32 = 3;
/// Level-0 terms below this fraction of the absolute sum end the node range.
const NEGLIGIBLE: f64 = 1e-20;

/// `1 − tanh((π/2)·sinh |t|)`, computed without cancellation.
pub(crate) fn de_distance(t: f64) -> f64 {
    let u = FRAC_PI_2 * t.abs().sinh();
    let e2 = (-2.0 * u).exp();
    2.0 * e2 / (1.0 + e2)
}

/// `(π/2)·cosh t · sech²((π/2)·sinh t)`.
pub(crate) fn de_weight(t: f64) -> f64 {
    let u = FRAC_PI_2 * t.abs().sinh();
    let e2 = (-2.0 * u).exp();
    FRAC_PI_2 * t.cosh() * 4.0 * e2 / ((1.0 + e2) * (1.0 + e2))
}

/// Largest `t` whose endpoint distance is still at least `delta`.
pub(crate) fn t_for_distance(delta: f64) -> f64 {
    let u = -0.5 * (0.5 * delta).ln();
    (u / FRAC_PI_2).asinh()
}

struct Rule {
    lo: f64,
    hi: f64,
    half: f64,
}

impl Rule {
    /// Abscissa for signed `t` with its signed endpoint distance (see
    /// [`super::complement`]). Positive `t` approaches `hi`.
    fn node(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.5 * (self.lo + self.hi), self.half);
        }
        let off = self.half * de_distance(t);
        if t > 0.0 {
            ((self.hi - off).min(self.hi.next_down()), -off)
        } else {
            ((self.lo + off).max(self.lo.next_up()), off)
        }
    }
}

pub(super) fn integrate<F>(
    f: &F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<PairResult>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    let rule = Rule {
        lo,
        hi,
        half: 0.5 * (hi - lo),
    };
    let t_hi = t_for_distance(limits.min_distance);
    let t_lo = t_hi;

    let mut sum = CompensatedSum::new();
    let mut l1 = CompensatedSum::new();
    let mut aux = CompensatedSum::new();
    let mut n_evals: u64 = 0;

    let accumulate = |ts: &[f64],
                      fx: &[(f64, f64)],
                      sum: &mut CompensatedSum,
                      l1: &mut CompensatedSum,
                      aux: &mut CompensatedSum| {
        for (&t, &(v, a)) in ts.iter().zip(fx) {
            let w = de_weight(t);
            sum.add(w * v);
            l1.add(w * v.abs());
            aux.add(w * a.abs());
        }
    };

    // Level 0: unit step, also used to find where the terms become negligible.
    let mut ts = vec![0.0];
    let mut k = 1.0;
    while k <= t_hi.max(t_lo) {
        if k <= t_hi {
            ts.push(k);
        }
        if k <= t_lo {
            ts.push(-k);
        }
        k += 1.0;
    }
    let xs: Vec<(f64, f64)> = ts.iter().map(|&t| rule.node(t)).collect();
    let fx = eval_nodes(f, &xs, limits.parallel)?;
    n_evals += xs.len() as u64;
    accumulate(&ts, &fx, &mut sum, &mut l1, &mut aux);
    let scale = l1.value();
    let cut = |side: f64, limit: f64| -> f64 {
        // smallest integer k such that every level-0 term at |t| >= k is negligible
        let mut cut = limit;
        let mut kk = limit.floor();
        while kk >= 1.0 {
            let idx = ts.iter().position(|&t| t == side * kk);
            let Some(i) = idx else { break };
            let term = (de_weight(kk) * fx[i].0).abs();
            if term <= NEGLIGIBLE * scale {
                cut = kk;
                kk -= 1.0;
            } else {
                break;
            }
        }
        cut
    };
    let cut_hi = cut(1.0, t_hi);
    let cut_lo = cut(-1.0, t_lo);

    let mut previous = rule.half * sum.value();
    let mut estimate = previous;
    let mut error = rule.half * l1.value();
    let mut status = Status::MaxDepth;
    let mut level = 0;

    for l in 1..=limits.max_level {
        let h = (0.5f64).powi(l as i32);
        let mut ts = Vec::new();
        let mut j = 0u64;
        loop {
            let t = (2 * j + 1) as f64 * h;
            if t > cut_hi && t > cut_lo {
                break;
            }
            if t <= cut_hi {
                ts.push(t);
            }
            if t <= cut_lo {
                ts.push(-t);
            }
            j += 1;
        }
        if n_evals + ts.len() as u64 > limits.max_evals {
            status = Status::MaxEvals;
            break;
        }
        let xs: Vec<(f64, f64)> = ts.iter().map(|&t| rule.node(t)).collect();
        let fx = eval_nodes(f, &xs, limits.parallel)?;
        n_evals += xs.len() as u64;
        accumulate(&ts, &fx, &mut sum, &mut l1, &mut aux);
        level = l;
        estimate = h * rule.half * sum.value();
        let roundoff = 4.0 * f64::EPSILON * h * rule.half * l1.value();
        error = (estimate - previous).abs().max(roundoff);
        previous = estimate;
        if l >= MIN_LEVEL && error <= target(abs_tol, rel_tol, estimate) {
            status = Status::Converged;
            break;
        }
    }

    let h = (0.5f64).powi(level as i32);
    Ok(PairResult {
        result: QuadResult {
            value: estimate,
            error_estimate: error,
            n_evals,
            subdivisions: level as u64,
            status,
        },
        aux: h * rule.half * aux.value(),
    })
}
