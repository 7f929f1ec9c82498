//! Pointwise integrands.
//!
//! The forms here are algebraically identical to the displayed ones but are
//! arranged to avoid cancellation: with `t = pq`,
//! `1 − t = (1 − p) + p(1 − q)` and `a² − x² = ((1 − t²)² + 4t²(1 − x²)) / 4t²`,
//! so the kernel stays accurate in the singular corner `p, q → 1, |x| → 1`.
//! Hyperbolic forms vanish beyond `r = HYPERBOLIC_CUTOFF`, where every
//! integrand is below `e^-600` and the direct formulas would overflow.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

const HYPERBOLIC_CUTOFF: f64 = 600.0;

/// `r / sinh r`, equal to 1 at the origin.
pub(crate) fn r_over_sinh(r: f64) -> f64 {
    if r.abs() < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r / r.sinh()
    }
}

/// `φ / sin φ`, equal to 1 at the origin.
fn phi_over_sin(phi: f64) -> f64 {
    if phi.abs() < 1e-8 {
        1.0 + phi * phi / 6.0
    } else {
        phi / phi.sin()
    }
}

fn sech(r: f64) -> f64 {
    1.0 / r.cosh()
}

fn ln_cosh(r: f64) -> f64 {
    r + (-2.0 * r).exp().ln_1p() - LN_2
}

/// A coordinate together with its exact distances to both axis endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Coord {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

impl Coord {
    /// From a signed endpoint complement (`x − lo` if positive, `x − hi` if
    /// negative, zero if unknown).
    pub(crate) fn new(x: f64, complement: f64, lo: f64, hi: f64) -> Self {
        let (from_lo, to_hi) = if complement > 0.0 {
            (complement, (hi - lo) - complement)
        } else if complement < 0.0 {
            ((hi - lo) + complement, -complement)
        } else {
            (x - lo, hi - x)
        };
        Self { x, from_lo, to_hi }
    }
}

/// `FRAC_PI_2` is below π/2 by this much.
const PI_2_LO: f64 = 6.123_233_995_736_766e-17;

/// `cos φ` on `[0, π/2]`, accurate next to the upper end.
pub(crate) fn cos_quarter(phi: Coord) -> f64 {
    if phi.to_hi < 0.5 {
        (phi.to_hi + PI_2_LO).sin()
    } else {
        phi.x.cos()
    }
}

/// Coordinates `(p, q, x)` of the triple-integral forms with the complements
/// that vanish in the singular corner.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pqx {
    p: f64,
    q: f64,
    one_minus_p: f64,
    one_minus_q: f64,
    one_minus_x: f64,
    one_plus_x: f64,
    x: f64,
}

impl Pqx {
    /// `x` on `[−1, 1]`.
    pub(crate) fn new(p: Coord, q: Coord, x: Coord) -> Self {
        Self {
            p: p.x,
            q: q.x,
            one_minus_p: p.to_hi,
            one_minus_q: q.to_hi,
            one_minus_x: x.to_hi,
            one_plus_x: x.from_lo,
            x: x.x,
        }
    }

    /// `x` on `[0, 1]`.
    pub(crate) fn folded(p: Coord, q: Coord, x: Coord) -> Self {
        Self {
            one_plus_x: 1.0 + x.x,
            ..Self::new(p, q, x)
        }
    }

    pub(crate) fn plain(p: f64, q: f64, x: f64) -> Self {
        Self {
            p,
            q,
            one_minus_p: 1.0 - p,
            one_minus_q: 1.0 - q,
            one_minus_x: 1.0 - x,
            one_plus_x: 1.0 + x,
            x,
        }
    }

    /// `t = pq`
    fn t(&self) -> f64 {
        self.p * self.q
    }

    /// `1 − t² = ((1 − p) + p(1 − q))(1 + t)`
    fn one_minus_t2(&self) -> f64 {
        (self.one_minus_p + self.p * self.one_minus_q) * (1.0 + self.t())
    }

    fn one_minus_x2(&self) -> f64 {
        self.one_minus_x * self.one_plus_x
    }

    /// `4t²(a² − x²) = (1 − t²)² + 4t²(1 − x²)`
    fn scaled_a2_minus_x2(&self) -> f64 {
        let m = self.one_minus_t2();
        let t = self.t();
        m * m + 4.0 * t * t * self.one_minus_x2()
    }

    /// `F[p, q, x]`
    fn kernel(&self) -> f64 {
        let (p, q) = (self.p, self.q);
        let num = self.one_minus_q * (1.0 + q) * p * self.x + self.one_minus_p * (1.0 + p) * q;
        let den = (1.0 + q * q) * p * self.one_minus_x2().sqrt();
        let t = self.t();
        8.0 * t * t / self.scaled_a2_minus_x2() * num.atan2(den)
    }

    /// The combined arctangent of the even part, scaled by `4p²q² > 0` so
    /// both arguments are polynomial. The second argument changes sign inside
    /// the domain.
    fn fold_angle(&self) -> f64 {
        let (p, q, t) = (self.p, self.q, self.t());
        let root = self.one_minus_x2().sqrt();
        let y = 2.0 * self.one_minus_p * (1.0 + p) * (1.0 + q * q) * t * root;
        let p_minus_q = self.one_minus_q - self.one_minus_p;
        let x = p_minus_q * (p + q) * self.one_minus_t2() + 4.0 * t * t * self.one_minus_x2();
        y.atan2(x)
    }
}

/// `F[p, q, x] = 2/(a² − x²) · arctan[(αx + β) / √((1 + α²)(1 − x²))]`.
pub(crate) fn kernel_f(p: f64, q: f64, x: f64) -> f64 {
    Pqx::plain(p, q, x).kernel()
}

/// Even part of the kernel, `F(x) + F(−x) = 2/(a² − x²) · θ` with `θ` the
/// combined arctangent on `[0, π)`.
pub(crate) fn kernel_fold(p: f64, q: f64, x: f64) -> f64 {
    let c = Pqx::plain(p, q, x);
    let t = c.t();
    8.0 * t * t / c.scaled_a2_minus_x2() * c.fold_angle()
}

pub(crate) fn e5_x1_at(c: &Pqx) -> f64 {
    -16.0 * PI * c.kernel() / (c.one_minus_t2() * (1.0 + c.q * c.q))
}

pub(crate) fn e5_x2_at(c: &Pqx) -> f64 {
    16.0 * PI * c.q * c.q * c.kernel() / (c.one_minus_t2() * (1.0 + c.q * c.q))
}

pub(crate) fn e8_at(c: &Pqx) -> f64 {
    16.0 * PI * c.kernel() / c.one_minus_t2()
}

/// Folded form with the printed normalization: one combined arctangent over
/// `(1 − p²q²)(a² − x²)`.
pub(crate) fn e9_at(c: &Pqx) -> f64 {
    let t = c.t();
    16.0 * PI * 4.0 * t * t * c.fold_angle() / (c.one_minus_t2() * c.scaled_a2_minus_x2())
}

#[cfg(test)]
pub(crate) fn e5_x1(p: f64, q: f64, x: f64) -> f64 {
    e5_x1_at(&Pqx::plain(p, q, x))
}

#[cfg(test)]
pub(crate) fn e5_x2(p: f64, q: f64, x: f64) -> f64 {
    e5_x2_at(&Pqx::plain(p, q, x))
}

#[cfg(test)]
pub(crate) fn e8(p: f64, q: f64, x: f64) -> f64 {
    e8_at(&Pqx::plain(p, q, x))
}

#[cfg(test)]
pub(crate) fn e9(p: f64, q: f64, x: f64) -> f64 {
    e9_at(&Pqx::plain(p, q, x))
}

/// Exponential coordinates `q = e^-u`, `p = e^-v`, `x = sin φ`; `c = cos φ`.
pub(crate) fn e10(u: f64, v: f64, c: f64) -> f64 {
    let r = u + v;
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let sr = r.sinh();
    let y = (sr + (v - u).sinh()) * c;
    let x = sr * (u - v).sinh() + c * c;
    8.0 * PI * c * y.atan2(x) / (sr * (sr * sr + c * c))
}

/// Rotated coordinates with the triangle `|s| ≤ r` mapped to `s = r·t`; the
/// Jacobian `r` is included. `c = cos φ`.
pub(crate) fn e11(r: f64, t: f64, c: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let s = r * t;
    let (sr, ss) = (r.sinh(), s.sinh());
    let angle = ((sr + ss) * c).atan2(c * c - sr * ss);
    4.0 * PI * r_over_sinh(r) * c * angle / (sr * sr + c * c)
}

/// As [`e11`] with the arctangent split into its two halves.
pub(crate) fn e13(r: f64, t: f64, c: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let s = r * t;
    let sr = r.sinh();
    let angle = sr.atan2(c) + s.sinh().atan2(c);
    4.0 * PI * r_over_sinh(r) * c * angle / (c * c + sr * sr)
}

pub(crate) fn e14(r: f64, c: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let sr = r.sinh();
    8.0 * PI * r_over_sinh(r) * sr.atan2(c) * c / (c * c + sr * sr)
}

/// `ψ = μ + (π/2 − μ)·w` with `μ = arctan(sinh r)`; the Jacobian
/// `π/2 − μ` is included. Inverse square-root singular at `w = 0`.
pub(crate) fn e15(r: f64, w: f64, one_minus_w: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let sr = r.sinh();
    let mu = sr.atan();
    let gap = 1.0f64.atan2(sr); // π/2 − μ
    let psi = mu + gap * w;
    let cos_psi = (gap * one_minus_w).sin();
    // sin²ψ − sin²μ = sin(ψ − μ)·sin(ψ + μ) with ψ − μ = gap·w and
    // ψ + μ = π − gap·(2 − w); for a tiny gap the sines are their arguments
    // and the gap cancels against the Jacobian.
    let jac_over_root = if gap < 1e-8 {
        1.0 / (w * (2.0 - w)).sqrt()
    } else {
        gap / ((gap * w).sin().sqrt() * (gap * (2.0 - w)).sin().sqrt())
    };
    8.0 * PI * r_over_sinh(r) * sech(r) * psi * cos_psi * jac_over_root
}

pub(crate) fn e16(r: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let sh = sech(r);
    r_over_sinh(r) * sh * sh.ln_1p()
}

/// Sign of the logarithm argument in the parametric family `f(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogSign {
    /// `ln(1 + a·sech r)`: reproduces the single-integral form at `a = 1`.
    Plus,
    /// `ln(1 − a·sech r)`: the alternative reading, kept for comparison.
    Minus,
}

impl LogSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            LogSign::Plus => "plus",
            LogSign::Minus => "minus",
        }
    }
}

/// `r·ln(1 ± a·sech r) / (sinh r·cosh r)`.
pub fn e17(r: f64, a: f64, sign: LogSign) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    let log = match sign {
        LogSign::Plus => (a * sech(r)).ln_1p(),
        LogSign::Minus if a * sech(r) < 0.5 => (-a * sech(r)).ln_1p(),
        LogSign::Minus => {
            // 1 − a·sech r = (2 sinh²(r/2) + (1 − a)) / cosh r
            let half = (0.5 * r).sinh();
            let head = if a == 1.0 {
                LN_2 + 2.0 * half.ln()
            } else {
                (2.0 * half * half + (1.0 - a)).ln()
            };
            head - ln_cosh(r)
        }
    };
    r_over_sinh(r) * sech(r) * log
}

pub(crate) fn e19(r: f64, a: f64) -> f64 {
    if r > HYPERBOLIC_CUTOFF {
        return 0.0;
    }
    (a * sech(r)).ln_1p()
}

/// Limits of `df/da` at `a → 0⁺` and `a → 1⁻`.
pub(crate) const DFDA_AT_ZERO: f64 = PI * PI / 4.0 - FRAC_PI_2;
pub(crate) const DFDA_AT_ONE: f64 = 0.5;

/// `df/da = −π²(1 − a)/(8a(1 + a)) + (arccos a)² / (2a(1 − a²))`.
///
/// Both terms have a pole at `a = 0`; below `a = 1/2` the poles are cancelled
/// analytically via `arccos a = π/2 − arcsin a`.
pub(crate) fn e20(a: f64) -> f64 {
    if a == 0.0 {
        return DFDA_AT_ZERO;
    }
    if a == 1.0 {
        return DFDA_AT_ONE;
    }
    let one_minus_a2 = (1.0 - a) * (1.0 + a);
    if a < 0.5 {
        let s = a.asin();
        let s_over_a = s / a;
        (PI * PI * (2.0 - a) / 8.0 - 0.5 * PI * s_over_a + 0.5 * s * s_over_a) / one_minus_a2
    } else {
        let c = a.acos();
        -PI * PI * (1.0 - a) / (8.0 * a * (1.0 + a)) + c * c / (2.0 * a * one_minus_a2)
    }
}

/// `[θ² − (π²/8)(1 − cos 2θ)] / sin 2θ`, removable at both ends.
pub(crate) fn e21(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    if theta == FRAC_PI_2 {
        return -FRAC_PI_2;
    }
    if theta <= 0.25 * PI {
        let s = theta.sin();
        (theta * theta - 0.25 * PI * PI * s * s) / (2.0 * theta).sin()
    } else {
        // with δ = π/2 − θ the numerator is δ² − πδ + (π²/4) sin²δ
        let d = FRAC_PI_2 - theta;
        let s = d.sin();
        (d * d - PI * d + 0.25 * PI * PI * s * s) / (2.0 * d).sin()
    }
}

pub(crate) fn e22(phi: f64, c: f64) -> f64 {
    c * (phi - PI) * phi_over_sin(phi)
}

pub(crate) fn e23_a(phi: f64) -> f64 {
    phi_over_sin(phi)
}

pub(crate) fn e23_b(phi: f64) -> f64 {
    phi * phi_over_sin(phi)
}

pub(crate) fn t_sinh1(r: f64) -> f64 {
    r_over_sinh(r)
}

pub(crate) fn t_sinh2(r: f64) -> f64 {
    0.5 * r_over_sinh(2.0 * r)
}
