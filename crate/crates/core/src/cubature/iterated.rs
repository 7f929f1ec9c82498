//! Nested 1D quadrature.
//!
//! The innermost axis is integrated with tolerances scaled by
//! `inner_ratio^(dim-1)`; every level carries the integrated inner error
//! estimates upwards, so the reported error is the outer estimate plus the
//! integral of the inner estimates. An inner integral that misses its own
//! tolerance still contributes its estimate to that sum, so the overall status
//! follows the outer integral and the propagated total.
//!
//! A relative target alone is unreachable for inner integrals whose values
//! cancel to near zero, so inner levels also get an absolute floor derived
//! from a cheap pilot estimate of the whole integral.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};

use super::{failure, CubatureConfig, CubatureResult, Integrand, Strategy};
use crate::error::{Error, Result};
use crate::quad1d::{check_tolerances, integrate_pair, target, Limits, PairResult, Status};

/// Loosest relative tolerance of the pilot run.
const PILOT_REL_TOL: f64 = 1e-3;

struct Counters {
    evals: AtomicU64,
    subdivisions: AtomicU64,
    status: AtomicU8,
    inner_unconverged: AtomicU64,
    /// Set once the evaluation budget is spent; remaining integrals are skipped.
    exhausted: AtomicBool,
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Converged => 0,
        Status::MaxDepth => 1,
        Status::MaxEvals => 2,
    }
}

fn code_status(c: u8) -> Status {
    match c {
        0 => Status::Converged,
        1 => Status::MaxDepth,
        _ => Status::MaxEvals,
    }
}

struct Nest<'a, I: ?Sized> {
    f: &'a I,
    order: &'a [usize],
    config: &'a CubatureConfig,
    /// Absolute tolerance of the inner levels before scaling.
    inner_abs: f64,
    counters: Counters,
}

impl<I: Integrand + ?Sized> Nest<'_, I> {
    /// Integrates axes `order[level..]` with the other coordinates fixed in
    /// `point`. Returns the value and the (absolute) error estimate.
    fn level(&self, level: usize, point: [f64; 3], comp: [f64; 3]) -> Result<(f64, f64)> {
        if self.counters.exhausted.load(Ordering::Relaxed) {
            return Ok((0.0, 0.0));
        }
        if self.counters.evals.load(Ordering::Relaxed) >= self.config.max_evals {
            self.counters.exhausted.store(true, Ordering::Relaxed);
            return Ok((0.0, 0.0));
        }
        let axis = self.order[level];
        let interval = &self.f.domain().axes()[axis];
        let scale = self.config.inner_ratio.powi(level as i32);
        let limits = Limits {
            parallel: self.config.parallel && level == 0,
            ..self.config.limits
        };
        let last = level + 1 == self.order.len();
        let dim = self.order.len();
        let g = |x: f64, xc: f64| -> Result<(f64, f64)> {
            let mut p = point;
            let mut c = comp;
            p[axis] = x;
            c[axis] = xc;
            if last {
                let v = self.f.eval_with_complement(&p[..dim], &c[..dim]);
                if !v.is_finite() {
                    return Err(failure(&p[..dim], v));
                }
                Ok((v, 0.0))
            } else {
                self.level(level + 1, p, c)
            }
        };
        let abs = if level == 0 { self.config.abs_tol } else { self.inner_abs };
        let PairResult { result, aux } = integrate_pair(
            &g,
            interval,
            abs * scale,
            self.config.rel_tol * scale,
            &limits,
        )?;
        if last {
            self.counters.evals.fetch_add(result.n_evals, Ordering::Relaxed);
        }
        self.counters
            .subdivisions
            .fetch_add(result.subdivisions, Ordering::Relaxed);
        if level == 0 {
            self.counters
                .status
                .store(status_code(result.status), Ordering::Relaxed);
        } else if !result.status.is_converged() {
            self.counters.inner_unconverged.fetch_add(1, Ordering::Relaxed);
        }
        Ok((result.value, result.error_estimate + aux))
    }
}

/// Iterated integration with the domain's natural axis order (the last axis
/// innermost).
pub fn integrate_iterated<I: Integrand + ?Sized>(
    f: &I,
    config: &CubatureConfig,
) -> Result<CubatureResult> {
    let order: Vec<usize> = (0..f.domain().dim()).collect();
    integrate_iterated_ordered(f, config, &order)
}

/// Iterated integration with `order[0]` outermost. Used to check that the
/// result does not depend on the nesting order.
pub fn integrate_iterated_ordered<I: Integrand + ?Sized>(
    f: &I,
    config: &CubatureConfig,
    order: &[usize],
) -> Result<CubatureResult> {
    check_tolerances(config.abs_tol, config.rel_tol)?;
    let dim = f.domain().dim();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dim).collect::<Vec<_>>() {
        return Err(Error::InvalidConfig(format!(
            "axis order {order:?} is not a permutation of 0..{dim}"
        )));
    }
    if !(config.inner_ratio > 0.0 && config.inner_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "inner tolerance ratio must be in (0, 1], got {}",
            config.inner_ratio
        )));
    }
    let counters = Counters {
        evals: AtomicU64::new(0),
        subdivisions: AtomicU64::new(0),
        status: AtomicU8::new(0),
        inner_unconverged: AtomicU64::new(0),
        exhausted: AtomicBool::new(false),
    };
    let pilot_rel = (100.0 * config.rel_tol).max(PILOT_REL_TOL);
    let mut inner_abs = config.abs_tol;
    let mut counters = if config.rel_tol > 0.0 && pilot_rel > config.rel_tol {
        let pilot_config = CubatureConfig {
            rel_tol: pilot_rel,
            ..*config
        };
        let pilot = Nest {
            f,
            order,
            config: &pilot_config,
            inner_abs: config.abs_tol,
            counters,
        };
        let (estimate, _) = pilot.level(0, [0.0; 3], [0.0; 3])?;
        inner_abs = inner_abs.max(config.rel_tol * estimate.abs());
        pilot.counters
    } else {
        counters
    };
    // evaluations of the pilot count towards the total
    *counters.inner_unconverged.get_mut() = 0;
    let nest = Nest {
        f,
        order,
        config,
        inner_abs,
        counters,
    };
    let (value, error) = nest.level(0, [0.0; 3], [0.0; 3])?;
    let c = nest.counters;
    let mut status = code_status(c.status.into_inner());
    let mut error = error;
    if c.exhausted.into_inner() {
        status = Status::MaxEvals;
        error = f64::INFINITY;
    }
    if status.is_converged() && error > target(config.abs_tol, config.rel_tol, value) {
        status = Status::MaxDepth;
    }
    Ok(CubatureResult {
        value,
        error_estimate: error,
        n_evals: c.evals.into_inner(),
        subdivisions: c.subdivisions.into_inner(),
        status,
        strategy: Strategy::Iterated,
        std_error: None,
        seed: None,
        rejected: None,
        inner_unconverged: Some(c.inner_unconverged.into_inner()),
    })
}
