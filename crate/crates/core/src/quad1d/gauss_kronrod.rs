//! Globally adaptive 7/15-point Gauss–Kronrod quadrature with bisection of
//! the subinterval carrying the largest error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{complement, eval_nodes, target, Limits, PairResult, QuadResult, Status};
use crate::error::Result;
use crate::summation::CompensatedSum;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    aux: f64,
    depth: u32,
}

/// QUADPACK's heuristic rescaling of `|K15 − G7|`.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod15<F>(f: &F, ends: (f64, f64), lo: f64, hi: f64, depth: u32, parallel: bool) -> Result<Segment>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut xs = [0.0; 15];
    for j in 0..7 {
        xs[2 * j] = center - half * XGK[j];
        xs[2 * j + 1] = center + half * XGK[j];
    }
    xs[14] = center;
    let nodes = xs.map(|x| (x, complement(x, ends.0, ends.1)));
    let fx = eval_nodes(f, &nodes, parallel)?;

    let fc = fx[14].0;
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    let mut res_abs = WGK[7] * fc.abs();
    let mut aux = WGK[7] * fx[14].1.abs();
    for j in 0..7 {
        let (f1, a1) = fx[2 * j];
        let (f2, a2) = fx[2 * j + 1];
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        aux += WGK[j] * (a1.abs() + a2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fx[2 * j].0 - mean).abs() + (fx[2 * j + 1].0 - mean).abs());
    }
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        aux: aux * half.abs(),
        depth,
    })
}

struct ByError(f64, usize);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger error first; earlier slot first on ties
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
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
    let ends = (lo, hi);
    let first = kronrod15(f, ends, lo, hi, 0, limits.parallel)?;
    let mut segments = vec![first];
    let mut heap = BinaryHeap::new();
    heap.push(ByError(first.error, 0));
    let mut n_evals: u64 = 15;
    let mut subdivisions: u64 = 0;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut depth_limited = false;

    let status = loop {
        if total_error <= target(abs_tol, rel_tol, total_value) {
            break Status::Converged;
        }
        if n_evals + 30 > limits.max_evals {
            break Status::MaxEvals;
        }
        let Some(ByError(_, slot)) = heap.pop() else {
            break if depth_limited { Status::MaxDepth } else { Status::Converged };
        };
        let seg = segments[slot];
        let mid = 0.5 * (seg.lo + seg.hi);
        if seg.depth >= limits.max_depth || !(mid > seg.lo && mid < seg.hi) {
            // frozen: stays in `segments`, never split again
            depth_limited = true;
            continue;
        }
        let left = kronrod15(f, ends, seg.lo, mid, seg.depth + 1, limits.parallel)?;
        let right = kronrod15(f, ends, mid, seg.hi, seg.depth + 1, limits.parallel)?;
        n_evals += 30;
        subdivisions += 1;
        total_value += left.value + right.value - seg.value;
        total_error += left.error + right.error - seg.error;
        segments[slot] = left;
        heap.push(ByError(left.error, slot));
        segments.push(right);
        heap.push(ByError(right.error, segments.len() - 1));
        if subdivisions.is_multiple_of(64) {
            total_value = segments.iter().map(|s| s.value).sum();
            total_error = segments.iter().map(|s| s.error).sum();
        }
    };

    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    let mut aux = CompensatedSum::new();
    for s in &segments {
        value.add(s.value);
        error.add(s.error);
        aux.add(s.aux);
    }
    let value = value.value();
    let error = error.value();
    let status = match status {
        Status::Converged if error > target(abs_tol, rel_tol, value) => Status::MaxDepth,
        s => s,
    };
    Ok(PairResult {
        result: QuadResult {
            value,
            error_estimate: error,
            n_evals,
            subdivisions,
            status,
        },
        aux: aux.value(),
    })
}
