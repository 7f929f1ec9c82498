//! Integration of catalog entries with a selectable method.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::catalog::CatalogEntry;
use crate::cubature::{self, CubatureConfig};
use crate::error::{Error, Result};
use crate::quad1d::{self, Bounds, Limits, Status, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Adaptive Gauss–Kronrod (log map on a half-line).
    Gk,
    /// Tanh-sinh.
    Ts,
    Iterated,
    Adaptive,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gk => "gk",
            Method::Ts => "ts",
            Method::Iterated => "iterated",
            Method::Adaptive => "adaptive",
            Method::Mc => "mc",
        }
    }

    /// Default for an entry of the given dimension.
    pub fn default_for(dimension: usize) -> Method {
        if dimension == 1 {
            Method::Ts
        } else {
            Method::Iterated
        }
    }

    fn is_one_dimensional(&self) -> bool {
        matches!(self, Method::Gk | Method::Ts)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gk" => Ok(Method::Gk),
            "ts" => Ok(Method::Ts),
            "iterated" => Ok(Method::Iterated),
            "adaptive" => Ok(Method::Adaptive),
            "mc" => Ok(Method::Mc),
            _ => Err(Error::InvalidConfig(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: u64,
    pub mc_samples: u64,
    pub seed: Option<u64>,
    pub parallel: bool,
}

impl Settings {
    /// Relative 1e-12 in 1D; the cubature defaults otherwise.
    pub fn for_dimension(dimension: usize) -> Self {
        let c = CubatureConfig::for_dim(dimension);
        let one_d = dimension == 1;
        Self {
            abs_tol: 0.0,
            rel_tol: if one_d { 1e-12 } else { c.rel_tol },
            max_evals: if one_d { Limits::default().max_evals } else { c.max_evals },
            mc_samples: 1_000_000,
            seed: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Computation {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub method: Method,
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<u64>,
    pub wall_ms: u64,
}

/// Integrates `entry` over its domain. `None` picks the default method for
/// the entry's dimension.
pub fn compute(
    entry: &'static CatalogEntry,
    parameter: Option<f64>,
    method: Option<Method>,
    settings: &Settings,
) -> Result<Computation> {
    let method = method.unwrap_or_else(|| Method::default_for(entry.dimension));
    if method.is_one_dimensional() != (entry.dimension == 1) {
        return Err(Error::InvalidConfig(format!(
            "method {method} does not apply to the {}-dimensional entry {}",
            entry.dimension, entry.id
        )));
    }
    let bound = entry.bind(parameter)?;
    let start = Instant::now();
    let mut out = Computation {
        id: entry.id.to_string(),
        parameter: bound.parameter(),
        method,
        value: 0.0,
        error_estimate: 0.0,
        n_evals: 0,
        status: Status::Converged,
        std_error: None,
        seed: None,
        rejected: None,
        wall_ms: 0,
    };
    if let Some(interval) = entry.interval() {
        let transform = match (method, interval.bounds()) {
            (Method::Ts, _) => Transform::TanhSinh,
            (_, Bounds::Finite { .. }) => Transform::None,
            (_, Bounds::SemiInfinite { .. }) => Transform::LogMap,
        };
        let interval = interval.with_transform(transform)?;
        let limits = Limits {
            max_evals: settings.max_evals,
            parallel: settings.parallel,
            ..Limits::default()
        };
        let r = quad1d::integrate_adaptive(
            |x| bound.eval(&[x]),
            &interval,
            settings.abs_tol,
            settings.rel_tol,
            &limits,
        )?;
        out.value = r.value;
        out.error_estimate = r.error_estimate;
        out.n_evals = r.n_evals;
        out.status = r.status;
    } else {
        let config = CubatureConfig {
            abs_tol: settings.abs_tol,
            rel_tol: settings.rel_tol,
            max_evals: settings.max_evals,
            parallel: settings.parallel,
            ..CubatureConfig::for_dim(entry.dimension)
        };
        let r = match method {
            Method::Iterated => cubature::integrate_iterated(&bound, &config)?,
            Method::Adaptive => cubature::integrate_adaptive_nd(&bound, &config)?,
            _ => {
                let seed = settings.seed.ok_or_else(|| {
                    Error::InvalidConfig("Monte Carlo requires an explicit seed".into())
                })?;
                cubature::integrate_mc(&bound, settings.mc_samples, seed)?
            }
        };
        out.value = r.value;
        out.error_estimate = r.error_estimate;
        out.n_evals = r.n_evals;
        out.status = r.status;
        out.std_error = r.std_error;
        out.seed = r.seed;
        out.rejected = r.rejected;
    }
    out.wall_ms = start.elapsed().as_millis() as u64;
    Ok(out)
}
