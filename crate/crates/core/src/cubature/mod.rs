//! Two- and three-dimensional integration over boxes.
//!
//! Three independent strategies share one integrand interface:
//!
//! * [`integrate_iterated`] nests the 1D engine along the axes,
//! * [`integrate_adaptive_nd`] runs a Genz–Malik degree-7/5 rule with global
//!   region subdivision on the per-axis transformed box,
//! * [`integrate_mc`] is a seeded plain Monte Carlo estimator used as a
//!   statistical oracle.
//!
//! All reductions are performed in a fixed order, so the value of every
//! strategy is independent of the size of the rayon pool.

mod genz_malik;
mod iterated;
mod monte_carlo;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad1d::{complement, de_distance, de_weight, Bounds, Interval1D, Limits, Status, Transform};

pub use genz_malik::integrate_adaptive_nd;
pub use iterated::{integrate_iterated, integrate_iterated_ordered};
pub use monte_carlo::{integrate_mc, MC_GENERATOR, MIN_MC_SAMPLES};

/// Axis-aligned integration domain of dimension 2 or 3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    axes: Vec<Interval1D>,
}

impl BoxDomain {
    pub fn new(axes: Vec<Interval1D>) -> Result<Self> {
        if !(2..=3).contains(&axes.len()) {
            return Err(Error::InvalidInterval(format!(
                "box domains have 2 or 3 axes, got {}",
                axes.len()
            )));
        }
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Interval1D] {
        &self.axes
    }
}

/// A pointwise integrand on a [`BoxDomain`]. Implementations must be pure.
pub trait Integrand: Sync {
    fn domain(&self) -> &BoxDomain;
    fn eval(&self, point: &[f64]) -> f64;

    /// Evaluation with the signed distance of every coordinate to its nearer
    /// axis endpoint (`x − lo` if positive, `x − hi` if negative; `x − lo` on
    /// a half-line). The distances are exact where the rounded coordinate is
    /// not, e.g. at tanh-sinh nodes next to an endpoint.
    fn eval_with_complement(&self, point: &[f64], _complement: &[f64]) -> f64 {
        self.eval(point)
    }
}

/// Closure-backed integrand.
pub struct FnIntegrand<F> {
    domain: BoxDomain,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(domain: BoxDomain, f: F) -> Self {
        Self { domain, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, point: &[f64]) -> f64 {
        (self.f)(point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Iterated,
    AdaptiveNd,
    MonteCarlo,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Iterated => "iterated",
            Strategy::AdaptiveNd => "adaptive_nd",
            Strategy::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubatureResult {
    pub value: f64,
    /// One standard error for Monte Carlo.
    pub error_estimate: f64,
    pub n_evals: u64,
    pub subdivisions: u64,
    pub status: Status,
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Non-finite Monte Carlo samples that were redrawn.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<u64>,
    /// Iterated strategy: inner integrals that stopped on their budget. Their
    /// error estimates are part of `error_estimate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_unconverged: Option<u64>,
}

/// Tolerances and budget shared by the deterministic strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubatureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Iterated strategy: each inner level gets the tolerances of the level
    /// above multiplied by this ratio.
    pub inner_ratio: f64,
    /// 1D budget used at every level of the iterated strategy.
    pub limits: Limits,
    /// Total evaluation budget of the adaptive and iterated strategies.
    pub max_evals: u64,
    /// Evaluate on the rayon pool; results are bit-identical either way.
    pub parallel: bool,
}

impl CubatureConfig {
    /// Default 3D settings: relative 1e-7, budget 1e9 evaluations.
    pub fn default_3d() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-7,
            inner_ratio: 0.1,
            limits: Limits {
                min_distance: DE_AXIS_DELTA,
                ..Limits::default()
            },
            max_evals: 1_000_000_000,
            parallel: true,
        }
    }

    /// Default 2D settings: relative 1e-9.
    pub fn default_2d() -> Self {
        Self {
            rel_tol: 1e-9,
            ..Self::default_3d()
        }
    }

    pub fn for_dim(dim: usize) -> Self {
        if dim >= 3 {
            Self::default_3d()
        } else {
            Self::default_2d()
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }
}

/// Endpoint distance at which double-exponential nodes stop, for the axis maps
/// and for the nested 1D rules alike. Closer in, corner-singular integrands
/// exceed the floating-point range while their contribution is negligible.
const DE_AXIS_DELTA: f64 = 1e-30;

/// Map from a finite parameter interval onto one axis of the domain, with its
/// Jacobian. Mirrors the axis transform declared on the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AxisMap {
    Identity { lo: f64, hi: f64 },
    DoubleExp { lo: f64, hi: f64, t_max: f64 },
    Log { lo: f64 },
    LogDoubleExp { lo: f64, t_max: f64 },
}

impl AxisMap {
    pub(crate) fn from_interval(interval: &Interval1D) -> Self {
        let t_max = crate::quad1d::t_for_distance(DE_AXIS_DELTA);
        match (interval.bounds(), interval.transform()) {
            (Bounds::Finite { lo, hi }, Transform::TanhSinh) => AxisMap::DoubleExp { lo, hi, t_max },
            (Bounds::Finite { lo, hi }, _) => AxisMap::Identity { lo, hi },
            (Bounds::SemiInfinite { lo }, Transform::TanhSinh) => AxisMap::LogDoubleExp { lo, t_max },
            (Bounds::SemiInfinite { lo }, _) => AxisMap::Log { lo },
        }
    }

    pub(crate) fn param_range(&self) -> (f64, f64) {
        match *self {
            AxisMap::Identity { lo, hi } => (lo, hi),
            AxisMap::DoubleExp { t_max, .. } | AxisMap::LogDoubleExp { t_max, .. } => (-t_max, t_max),
            AxisMap::Log { .. } => (0.0, 1.0),
        }
    }

    /// Domain coordinate, its endpoint complement and the Jacobian for
    /// parameter `t`.
    pub(crate) fn map(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            AxisMap::Identity { lo, hi } => (t, complement(t, lo, hi), 1.0),
            AxisMap::DoubleExp { lo, hi, .. } => {
                let half = 0.5 * (hi - lo);
                let off = half * de_distance(t);
                let (x, xc) = if t > 0.0 {
                    ((hi - off).min(hi.next_down()), -off)
                } else if t < 0.0 {
                    ((lo + off).max(lo.next_up()), off)
                } else {
                    (lo + half, half)
                };
                (x, xc, half * de_weight(t))
            }
            AxisMap::Log { lo } => {
                let dr = -t.ln();
                (lo + dr, dr, 1.0 / t)
            }
            AxisMap::LogDoubleExp { lo, .. } => {
                // s = (1 + tanh u)/2 on (0, 1), r = lo − ln s
                let half_delta = 0.5 * de_distance(t);
                let (s, dr) = if t >= 0.0 {
                    (1.0 - half_delta, -(-half_delta).ln_1p())
                } else {
                    (half_delta, -half_delta.ln())
                };
                let r = (lo + dr).max(lo.next_up());
                (r, dr, 0.5 * de_weight(t) / s)
            }
        }
    }
}

pub(crate) fn axis_maps(domain: &BoxDomain) -> Vec<AxisMap> {
    domain.axes().iter().map(AxisMap::from_interval).collect()
}

/// Integrates with the requested strategy. Monte Carlo uses `mc_samples`
/// and `seed`; the deterministic strategies use `config`.
pub fn integrate<I: Integrand + ?Sized>(
    f: &I,
    strategy: Strategy,
    config: &CubatureConfig,
    mc_samples: u64,
    seed: u64,
) -> Result<CubatureResult> {
    match strategy {
        Strategy::Iterated => integrate_iterated(f, config),
        Strategy::AdaptiveNd => integrate_adaptive_nd(f, config),
        Strategy::MonteCarlo => integrate_mc(f, mc_samples, seed),
    }
}

pub(crate) fn failure(point: &[f64], value: f64) -> Error {
    Error::EvaluationFailure {
        point: point.to_vec(),
        value,
    }
}
