//! Seeded plain Monte Carlo on the transformed box.
//!
//! Samples are drawn in chunks; chunk `c` uses a ChaCha8 generator seeded with
//! the user seed on stream `c`, and chunk statistics are merged in chunk
//! order. The estimate therefore depends only on the seed and the sample
//! count, never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{axis_maps, AxisMap, CubatureResult, Integrand, Strategy};
use crate::error::{Error, Result};
use crate::quad1d::Status;

pub const MIN_MC_SAMPLES: u64 = 10_000;
/// Name of the generator recorded with every Monte Carlo result.
pub const MC_GENERATOR: &str = "ChaCha8";
const CHUNK: u64 = 1 << 16;
/// Largest tolerated fraction of non-finite samples.
const MAX_REJECTION_RATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    drawn: u64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return Moments {
                drawn: self.drawn + other.drawn,
                ..other
            };
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * w,
            drawn: self.drawn + other.drawn,
        }
    }
}

fn run_chunk<I: Integrand + ?Sized>(
    f: &I,
    maps: &[AxisMap],
    seed: u64,
    chunk: u64,
    count: u64,
) -> Moments {
    let dim = maps.len();
    let ranges: Vec<(f64, f64)> = maps.iter().map(AxisMap::param_range).collect();
    let vol: f64 = ranges.iter().map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut m = Moments::default();
    let mut x = [0.0; 3];
    let mut xc = [0.0; 3];
    // A pathological integrand stops after a bounded number of draws; the
    // caller then reports the rejection rate.
    let max_draws = 2 * count + 1000;
    while m.n < count && m.drawn < max_draws {
        m.drawn += 1;
        let mut jac = vol;
        for k in 0..dim {
            let u: f64 = rng.gen();
            // (a, b]: keeps the log map away from s = 0
            let (a, b) = ranges[k];
            let (xk, ck, jk) = maps[k].map(b - (b - a) * u);
            x[k] = xk;
            xc[k] = ck;
            jac *= jk;
        }
        let v = if jac == 0.0 { 0.0 } else { f.eval_with_complement(&x[..dim], &xc[..dim]) * jac };
        if v.is_finite() {
            m.push(v);
        }
    }
    m
}

/// Monte Carlo estimate with `n_samples` accepted samples. Non-finite
/// samples are redrawn and counted; more than one in a million is an error.
pub fn integrate_mc<I: Integrand + ?Sized>(f: &I, n_samples: u64, seed: u64) -> Result<CubatureResult> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n_samples}"
        )));
    }
    let maps = axis_maps(f.domain());
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n_samples - c * CHUNK);
            run_chunk(f, &maps, seed, c, count)
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let rejected = total.drawn - total.n;
    if total.n < n_samples || rejected as f64 > MAX_REJECTION_RATE * total.drawn as f64 {
        return Err(Error::RejectionRate {
            rejected,
            drawn: total.drawn,
        });
    }
    let std_error = (total.m2 / (total.n - 1) as f64).sqrt() / (total.n as f64).sqrt();
    Ok(CubatureResult {
        value: total.mean,
        error_estimate: std_error,
        n_evals: total.drawn,
        subdivisions: 0,
        status: Status::Converged,
        strategy: Strategy::MonteCarlo,
        std_error: Some(std_error),
        seed: Some(seed),
        rejected: Some(rejected),
        inner_unconverged: None,
    })
}
