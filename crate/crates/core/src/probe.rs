//! Rational·πᵏ factor probe.
//!
//! Given a computed value and the value a displayed relation says it should
//! equal, the probe scans a finite set of multipliers `c` and reports which
//! one makes `c · computed` agree with `expected`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A multiplier of the form `(numerator / denominator) · π^pi_power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Factor {
    pub numerator: u32,
    pub denominator: u32,
    pub pi_power: i32,
}

impl Factor {
    pub const ONE: Factor = Factor {
        numerator: 1,
        denominator: 1,
        pi_power: 0,
    };

    pub const fn new(numerator: u32, denominator: u32, pi_power: i32) -> Self {
        Self {
            numerator,
            denominator,
            pi_power,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64 * PI.powi(self.pi_power)
    }

    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator && self.pi_power == 0
    }

    /// ASCII label such as `2`, `1/16`, `pi^-2` or `1/4*pi^2`.
    pub fn label(&self) -> String {
        let rational = match (self.numerator, self.denominator) {
            (n, 1) => n.to_string(),
            (n, d) => format!("{n}/{d}"),
        };
        match (rational.as_str(), self.pi_power) {
            (r, 0) => r.to_string(),
            ("1", k) => format!("pi^{k}"),
            (r, k) => format!("{r}*pi^{k}"),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Result of scanning the candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMatch {
    /// Candidate with the smallest deviation.
    pub best: Factor,
    /// `|best · computed − expected| / |expected|` (absolute when expected is 0).
    pub relative_deviation: f64,
    /// Every candidate whose deviation is within the tolerance.
    pub within_tolerance: Vec<Factor>,
}

impl ProbeMatch {
    pub fn is_ambiguous(&self) -> bool {
        self.within_tolerance.len() > 1
    }

    pub fn is_match(&self) -> bool {
        self.within_tolerance.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorProbe {
    candidates: Vec<Factor>,
}

impl Default for FactorProbe {
    fn default() -> Self {
        let rationals = [(1, 16), (1, 8), (1, 4), (1, 2), (1, 1), (2, 1), (4, 1), (8, 1), (16, 1)];
        let candidates = [-2, 0, 2]
            .iter()
            .flat_map(|&k| rationals.iter().map(move |&(n, d)| Factor::new(n, d, k)))
            .collect();
        Self { candidates }
    }
}

impl FactorProbe {
    /// A probe over a custom candidate set; the set must contain `1`.
    pub fn with_candidates(candidates: Vec<Factor>) -> Result<Self> {
        if !candidates.iter().any(Factor::is_one) {
            return Err(Error::InvalidConfig(
                "factor probe candidates must include 1".into(),
            ));
        }
        Ok(Self { candidates })
    }

    /// Only the identity factor.
    pub fn identity() -> Self {
        Self {
            candidates: vec![Factor::ONE],
        }
    }

    pub fn candidates(&self) -> &[Factor] {
        &self.candidates
    }

    pub fn probe(&self, computed: f64, expected: f64, tolerance: f64) -> ProbeMatch {
        let scale = if expected == 0.0 { 1.0 } else { expected.abs() };
        let deviation = |f: &Factor| (f.value() * computed - expected).abs() / scale;
        let mut best = self.candidates[0];
        let mut best_dev = f64::INFINITY;
        let mut within = Vec::new();
        for c in &self.candidates {
            let d = deviation(c);
            if d < best_dev || (d == best_dev && c.is_one()) {
                best = *c;
                best_dev = d;
            }
            if d <= tolerance {
                within.push(*c);
            }
        }
        ProbeMatch {
            best,
            relative_deviation: best_dev,
            within_tolerance: within,
        }
    }
}
