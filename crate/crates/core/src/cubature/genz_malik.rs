//! Globally adaptive Genz–Malik cubature (degree 7 with an embedded degree-5
//! rule) on the per-axis transformed box.
//!
//! Each iteration splits a fixed-size batch of the regions with the largest
//! error estimates. The batch size does not depend on the thread count and
//! the final sum runs over regions in creation order, so the result is
//! bit-identical for any pool size.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{axis_maps, failure, AxisMap, CubatureConfig, CubatureResult, Integrand, Strategy};
use crate::error::Result;
use crate::quad1d::{check_tolerances, target, Status};
use crate::summation::CompensatedSum;

const BATCH: usize = 16;
/// Regions are never halved more often than this along all axes together.
const MAX_DEPTH: u32 = 150;

const LAMBDA2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const LAMBDA4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const LAMBDA5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)
/// Ratio of fourth differences at λ2 and λ4 that cancels for a quadratic.
const DIFF_RATIO: f64 = (9.0 / 70.0) / (9.0 / 10.0);

struct Weights {
    w: [f64; 5],
    e: [f64; 4],
}

impl Weights {
    fn new(dim: usize) -> Self {
        let n = dim as f64;
        Self {
            w: [
                (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0,
                980.0 / 6561.0,
                (1820.0 - 400.0 * n) / 19683.0,
                200.0 / 19683.0,
                6859.0 / 19683.0 / 2f64.powi(dim as i32),
            ],
            e: [
                (729.0 - 950.0 * n + 50.0 * n * n) / 729.0,
                245.0 / 486.0,
                (265.0 - 100.0 * n) / 1458.0,
                25.0 / 729.0,
            ],
        }
    }
}

pub(crate) fn points_per_region(dim: usize) -> u64 {
    let n = dim as u64;
    1 + 4 * n + 2 * n * (n - 1) + (1 << n)
}

#[derive(Debug, Clone)]
struct Region {
    id: u64,
    depth: u32,
    center: [f64; 3],
    half: [f64; 3],
    value: f64,
    error: f64,
    split_axis: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == CmpOrdering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    /// Largest error first; on ties the older region.
    fn cmp(&self, other: &Self) -> CmpOrdering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Rule<'a, I: ?Sized> {
    f: &'a I,
    maps: Vec<AxisMap>,
    dim: usize,
    weights: Weights,
}

impl<I: Integrand + ?Sized> Rule<'_, I> {
    /// Transformed integrand at parameter point `t`.
    fn g(&self, t: &[f64; 3]) -> Result<f64> {
        let mut x = [0.0; 3];
        let mut xc = [0.0; 3];
        let mut jac = 1.0;
        for k in 0..self.dim {
            let (xk, ck, jk) = self.maps[k].map(t[k]);
            x[k] = xk;
            xc[k] = ck;
            jac *= jk;
        }
        if jac == 0.0 {
            return Ok(0.0);
        }
        let v = self.f.eval_with_complement(&x[..self.dim], &xc[..self.dim]);
        let out = v * jac;
        if !out.is_finite() {
            return Err(failure(&x[..self.dim], v));
        }
        Ok(out)
    }

    fn region(&self, id: u64, depth: u32, center: [f64; 3], half: [f64; 3]) -> Result<Region> {
        let d = self.dim;
        let at = |offsets: &[(usize, f64)]| -> Result<f64> {
            let mut t = center;
            for &(k, s) in offsets {
                t[k] += s * half[k];
            }
            self.g(&t)
        };
        let f0 = at(&[])?;
        let mut sum2 = CompensatedSum::new();
        let mut sum3 = CompensatedSum::new();
        let mut diff = [0.0f64; 3];
        for (k, dk) in diff.iter_mut().enumerate().take(d) {
            let a = at(&[(k, -LAMBDA2)])?;
            let b = at(&[(k, LAMBDA2)])?;
            let c = at(&[(k, -LAMBDA4)])?;
            let e = at(&[(k, LAMBDA4)])?;
            sum2.add(a);
            sum2.add(b);
            sum3.add(c);
            sum3.add(e);
            *dk = ((a + b - 2.0 * f0) - DIFF_RATIO * (c + e - 2.0 * f0)).abs();
        }
        let mut sum4 = CompensatedSum::new();
        for i in 0..d {
            for j in i + 1..d {
                for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    sum4.add(at(&[(i, si * LAMBDA4), (j, sj * LAMBDA4)])?);
                }
            }
        }
        let mut sum5 = CompensatedSum::new();
        for corner in 0..(1u32 << d) {
            let offsets: Vec<(usize, f64)> = (0..d)
                .map(|k| (k, if corner >> k & 1 == 1 { LAMBDA5 } else { -LAMBDA5 }))
                .collect();
            sum5.add(at(&offsets)?);
        }
        let (s2, s3, s4, s5) = (sum2.value(), sum3.value(), sum4.value(), sum5.value());
        let w = &self.weights.w;
        let e = &self.weights.e;
        let vol: f64 = half[..d].iter().map(|h| 2.0 * h).product();
        let r7 = vol * (w[0] * f0 + w[1] * s2 + w[2] * s3 + w[3] * s4 + w[4] * s5);
        let r5 = vol * (e[0] * f0 + e[1] * s2 + e[2] * s3 + e[3] * s4);
        // Split the axis with the largest fourth difference; on a tie (e.g. a
        // separable polynomial) the widest axis.
        let mut split_axis = 0;
        for k in 1..d {
            let better = diff[k] > diff[split_axis] * (1.0 + 1e-12)
                || (diff[k] >= diff[split_axis] * (1.0 - 1e-12) && half[k] > half[split_axis]);
            if better {
                split_axis = k;
            }
        }
        Ok(Region {
            id,
            depth,
            center,
            half,
            value: r7,
            error: (r7 - r5).abs(),
            split_axis,
        })
    }
}

/// Globally adaptive cubature. The error estimate is the sum of the
/// per-region differences between the degree-7 and degree-5 rules.
pub fn integrate_adaptive_nd<I: Integrand + ?Sized>(
    f: &I,
    config: &CubatureConfig,
) -> Result<CubatureResult> {
    check_tolerances(config.abs_tol, config.rel_tol)?;
    let dim = f.domain().dim();
    let rule = Rule {
        f,
        maps: axis_maps(f.domain()),
        dim,
        weights: Weights::new(dim),
    };
    let per_region = points_per_region(dim);
    let mut center = [0.0; 3];
    let mut half = [0.0; 3];
    for (k, m) in rule.maps.iter().enumerate() {
        let (a, b) = m.param_range();
        center[k] = 0.5 * (a + b);
        half[k] = 0.5 * (b - a);
    }
    let root = rule.region(0, 0, center, half)?;
    let mut next_id = 1u64;
    let mut n_evals = per_region;
    let mut subdivisions = 0u64;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Region> = Vec::new();
    heap.push(root);

    let totals = |heap: &BinaryHeap<Region>, frozen: &[Region]| -> (f64, f64) {
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for r in heap.iter().chain(frozen) {
            v.add(r.value);
            e.add(r.error);
        }
        (v.value(), e.value())
    };

    let (mut value, mut error) = totals(&heap, &frozen);
    let mut iterations = 0u64;
    let status = loop {
        if iterations.is_multiple_of(256) {
            (value, error) = totals(&heap, &frozen);
        }
        iterations += 1;
        if error <= target(config.abs_tol, config.rel_tol, value) {
            break Status::Converged;
        }
        if heap.is_empty() {
            break Status::MaxDepth;
        }
        let take = BATCH.min(heap.len());
        if n_evals + 2 * per_region * take as u64 > config.max_evals {
            break Status::MaxEvals;
        }
        let mut batch = Vec::with_capacity(take);
        while batch.len() < take {
            match heap.pop() {
                Some(r) if r.depth >= MAX_DEPTH => frozen.push(r),
                Some(r) => batch.push(r),
                None => break,
            }
        }
        let children: Vec<(u64, u32, [f64; 3], [f64; 3])> = batch
            .iter()
            .flat_map(|r| {
                let k = r.split_axis;
                let mut h = r.half;
                h[k] *= 0.5;
                let mut lo = r.center;
                lo[k] -= h[k];
                let mut hi = r.center;
                hi[k] += h[k];
                let id = next_id;
                next_id += 2;
                [(id, r.depth + 1, lo, h), (id + 1, r.depth + 1, hi, h)]
            })
            .collect();
        let evaluated: Vec<Result<Region>> = if config.parallel {
            children
                .par_iter()
                .map(|&(id, depth, c, h)| rule.region(id, depth, c, h))
                .collect()
        } else {
            children
                .iter()
                .map(|&(id, depth, c, h)| rule.region(id, depth, c, h))
                .collect()
        };
        for r in &batch {
            value -= r.value;
            error -= r.error;
        }
        for r in evaluated {
            let r = r?;
            value += r.value;
            error += r.error;
            heap.push(r);
        }
        n_evals += per_region * children.len() as u64;
        subdivisions += batch.len() as u64;
    };

    let mut all: Vec<Region> = heap.into_vec();
    all.extend(frozen);
    all.sort_unstable_by_key(|r| r.id);
    let value: CompensatedSum = all.iter().map(|r| r.value).collect();
    let error: CompensatedSum = all.iter().map(|r| r.error).collect();
    Ok(CubatureResult {
        value: value.value(),
        error_estimate: error.value(),
        n_evals,
        subdivisions,
        status,
        strategy: Strategy::AdaptiveNd,
        std_error: None,
        seed: None,
        rejected: None,
        inner_unconverged: None,
    })
}
