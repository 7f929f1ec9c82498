//! One-dimensional adaptive quadrature.
//!
//! Finite intervals use an adaptive 7/15-point Gauss–Kronrod rule or the
//! tanh-sinh (double-exponential) rule. Semi-infinite intervals `[lo, ∞)` are
//! first mapped onto `(0, 1]` by `r = lo − ln t` and then integrated with one
//! of the two finite rules.

mod gauss_kronrod;
mod tanh_sinh;

use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) use tanh_sinh::{de_distance, de_weight, t_for_distance};

/// Endpoints of an integration range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bounds {
    Finite { lo: f64, hi: f64 },
    SemiInfinite { lo: f64 },
}

/// Change of variables applied before the quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Plain adaptive Gauss–Kronrod on a finite interval.
    None,
    /// `r = lo − ln t`, then adaptive Gauss–Kronrod on `t ∈ (0, 1]`.
    LogMap,
    /// Tanh-sinh rule; on semi-infinite ranges it is applied after the log map.
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval1D {
    bounds: Bounds,
    transform: Transform,
}

impl Interval1D {
    /// Finite interval `[lo, hi]` with `lo < hi`, integrated by Gauss–Kronrod.
    pub fn finite(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidInterval(format!(
                "finite interval needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            bounds: Bounds::Finite { lo, hi },
            transform: Transform::None,
        })
    }

    /// `[lo, ∞)` with the log map.
    pub fn semi_infinite(lo: f64) -> Result<Self> {
        if !lo.is_finite() {
            return Err(Error::InvalidInterval(format!(
                "semi-infinite interval needs a finite lower limit, got {lo}"
            )));
        }
        Ok(Self {
            bounds: Bounds::SemiInfinite { lo },
            transform: Transform::LogMap,
        })
    }

    pub fn with_transform(self, transform: Transform) -> Result<Self> {
        match (self.bounds, transform) {
            (Bounds::Finite { .. }, Transform::LogMap) => Err(Error::InvalidInterval(
                "log map applies only to semi-infinite intervals".into(),
            )),
            (Bounds::SemiInfinite { .. }, Transform::None) => Err(Error::InvalidInterval(
                "semi-infinite intervals need the log map or tanh-sinh".into(),
            )),
            _ => Ok(Self { transform, ..self }),
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn lo(&self) -> f64 {
        match self.bounds {
            Bounds::Finite { lo, .. } | Bounds::SemiInfinite { lo } => lo,
        }
    }

    /// Upper limit, `+∞` for semi-infinite ranges.
    pub fn hi(&self) -> f64 {
        match self.bounds {
            Bounds::Finite { hi, .. } => hi,
            Bounds::SemiInfinite { .. } => f64::INFINITY,
        }
    }

    /// Whether `x` lies strictly inside the range.
    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lo() && x < self.hi()
    }
}

/// Evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limits {
    /// Maximum bisection depth of the Gauss–Kronrod rule.
    pub max_depth: u32,
    /// Maximum number of integrand evaluations.
    pub max_evals: u64,
    /// Maximum tanh-sinh level (step `2^-level`).
    pub max_level: u32,
    /// Closest approach of a tanh-sinh node to an endpoint, relative to the
    /// half-width.
    pub min_distance: f64,
    /// Evaluate the nodes of one refinement step on the rayon pool. The
    /// result does not depend on this flag or on the pool size.
    pub parallel: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_depth: 60,
            max_evals: 10_000_000,
            max_level: 12,
            min_distance: 1e-280,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxDepth,
    MaxEvals,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxDepth => "max_depth",
            Status::MaxEvals => "max_evals",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Status::Converged)
    }

    /// The less successful of two statuses.
    pub fn worst(self, other: Status) -> Status {
        match (self, other) {
            (Status::MaxEvals, _) | (_, Status::MaxEvals) => Status::MaxEvals,
            (Status::MaxDepth, _) | (_, Status::MaxDepth) => Status::MaxDepth,
            _ => Status::Converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: u64,
    /// Bisections for Gauss–Kronrod, refinement levels for tanh-sinh.
    pub subdivisions: u64,
    pub status: Status,
}

/// A quadrature result together with the integral of an auxiliary
/// non-negative quantity carried alongside the integrand (used to propagate
/// inner error estimates through iterated integrals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairResult {
    pub result: QuadResult,
    pub aux: f64,
}

pub(crate) fn check_tolerances(abs_tol: f64, rel_tol: f64) -> Result<()> {
    let ok = |t: f64| t.is_finite() && t >= 0.0;
    if !(ok(abs_tol) && ok(rel_tol)) || (abs_tol == 0.0 && rel_tol == 0.0) {
        return Err(Error::InvalidTolerance {
            abs: abs_tol,
            rel: rel_tol,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn target(abs_tol: f64, rel_tol: f64, value: f64) -> f64 {
    abs_tol.max(rel_tol * value.abs())
}

#[inline]
pub(crate) fn checked(x: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::EvaluationFailure {
            point: vec![x],
            value,
        })
    }
}

/// Signed distance from `x` to the nearer endpoint: `x − lo` (positive) or
/// `x − hi` (negative). Integrands that lose precision near an endpoint can
/// use it instead of recomputing the difference from the rounded abscissa.
pub(crate) fn complement(x: f64, lo: f64, hi: f64) -> f64 {
    if x - lo <= hi - x {
        x - lo
    } else {
        x - hi
    }
}

/// Integrates a `(value, aux)` pair. The error estimate and termination are
/// driven by `value` only; `aux` is integrated with the same weights, in
/// absolute value. `f` receives each abscissa together with its
/// [`complement`]; on a half-line the complement is `x − lo`.
pub(crate) fn integrate_pair<F>(
    f: &F,
    interval: &Interval1D,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<PairResult>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    check_tolerances(abs_tol, rel_tol)?;
    match (interval.bounds, interval.transform) {
        (Bounds::Finite { lo, hi }, Transform::None) => {
            gauss_kronrod::integrate(f, lo, hi, abs_tol, rel_tol, limits)
        }
        (Bounds::Finite { lo, hi }, Transform::TanhSinh) => {
            tanh_sinh::integrate(f, lo, hi, abs_tol, rel_tol, limits)
        }
        (Bounds::SemiInfinite { lo }, t) => {
            let mapped = |s: f64, sc: f64| -> Result<(f64, f64)> {
                // r − lo = −ln s, computed from the complement next to s = 1
                let dr = if sc < 0.0 { -sc.ln_1p() } else { -s.ln() };
                let r = lo + dr;
                let (v, a) = f(r, dr)?;
                Ok((checked(r, v / s)?, a / s))
            };
            match t {
                Transform::TanhSinh => tanh_sinh::integrate(&mapped, 0.0, 1.0, abs_tol, rel_tol, limits),
                _ => gauss_kronrod::integrate(&mapped, 0.0, 1.0, abs_tol, rel_tol, limits),
            }
        }
        (Bounds::Finite { .. }, Transform::LogMap) => unreachable!("rejected by constructor"),
    }
}

fn scalar<F: Fn(f64) -> f64 + Sync>(f: F) -> impl Fn(f64, f64) -> Result<(f64, f64)> + Sync {
    move |x, _| checked(x, f(x)).map(|v| (v, 0.0))
}

/// Adaptive quadrature of `f` over `interval` using the interval's declared
/// transform. Budget exhaustion is reported through [`QuadResult::status`];
/// a non-finite integrand value is an error carrying the abscissa.
pub fn integrate_adaptive<F>(
    f: F,
    interval: &Interval1D,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_pair(&scalar(f), interval, abs_tol, rel_tol, limits).map(|p| p.result)
}

/// `∫_lo^∞ f`, through the log map and adaptive Gauss–Kronrod. `f` must decay
/// at least exponentially.
pub fn integrate_semi_infinite<F>(
    f: F,
    lo: f64,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let interval = Interval1D::semi_infinite(lo)?;
    integrate_adaptive(f, &interval, abs_tol, rel_tol, limits)
}

/// Bound on `|∫_R^∞ f|` of the form `coefficient · ∫_R^∞ r e^{−rate·r} dr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTailBound {
    pub coefficient: f64,
    pub rate: f64,
}

impl ExpTailBound {
    pub fn bound(&self, cutoff: f64) -> f64 {
        let k = self.rate;
        self.coefficient * (-k * cutoff).exp() * (cutoff / k + 1.0 / (k * k))
    }
}

/// `∫_lo^∞ f` by direct truncation at `lo + cutoff`; the declared tail bound
/// is added to the error estimate. Independent of the log map path.
pub fn integrate_truncated<F>(
    f: F,
    lo: f64,
    cutoff: f64,
    tail: ExpTailBound,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let interval = Interval1D::finite(lo, lo + cutoff)?;
    let mut res = integrate_adaptive(f, &interval, abs_tol, rel_tol, limits)?;
    res.error_estimate += tail.bound(cutoff);
    Ok(res)
}

/// Reported error estimate next to the actual error against a known value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCheck {
    pub reported: f64,
    pub actual: f64,
}

impl ErrorCheck {
    /// Whether the actual error is within `factor` times the reported one.
    pub fn is_honest(&self, factor: f64) -> bool {
        self.actual <= factor * self.reported
    }
}

pub fn estimate_true_error<F>(
    f: F,
    interval: &Interval1D,
    exact: f64,
    abs_tol: f64,
    rel_tol: f64,
    limits: &Limits,
) -> Result<ErrorCheck>
where
    F: Fn(f64) -> f64 + Sync,
{
    let r = integrate_adaptive(f, interval, abs_tol, rel_tol, limits)?;
    Ok(ErrorCheck {
        reported: r.error_estimate,
        actual: (r.value - exact).abs(),
    })
}

/// Evaluates `f` at every abscissa, in parallel when requested. Output order
/// matches input order.
pub(crate) fn eval_nodes<F>(f: &F, xs: &[(f64, f64)], parallel: bool) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    if parallel && xs.len() > 1 {
        use rayon::prelude::*;
        xs.par_iter().map(|&(x, xc)| f(x, xc)).collect()
    } else {
        xs.iter().map(|&(x, xc)| f(x, xc)).collect()
    }
}

#[cfg(test)]
mod tests;
