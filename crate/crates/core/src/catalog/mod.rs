//! Registry of every integrand in the reduction chain, from the two triple
//! integrals down to the one-dimensional Catalan integrals.
//!
//! Entries of the triple and double forms include their printed prefactors
//! (`±16π`, `8π`, `4π`), so each evaluates to the quantity its display
//! claims. The single integrals and the parametric family are bare.

mod kernels;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::cubature::{BoxDomain, Integrand};
use crate::error::{Error, Result};
use crate::quad1d::{Interval1D, Transform};

pub use kernels::{e17 as eval_f_family, LogSign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EntryId {
    #[serde(rename = "E5_X1")]
    E5X1,
    #[serde(rename = "E5_X2")]
    E5X2,
    #[serde(rename = "E8_X")]
    E8X,
    #[serde(rename = "E9_X")]
    E9X,
    #[serde(rename = "E10_X")]
    E10X,
    #[serde(rename = "E11_X")]
    E11X,
    #[serde(rename = "E13_X")]
    E13X,
    #[serde(rename = "E14_X")]
    E14X,
    #[serde(rename = "E15_X")]
    E15X,
    #[serde(rename = "E16_X")]
    E16X,
    #[serde(rename = "E17_F")]
    E17F,
    #[serde(rename = "E19_INNER")]
    E19Inner,
    #[serde(rename = "E20_DFDA")]
    E20Dfda,
    #[serde(rename = "E21_THETA")]
    E21Theta,
    #[serde(rename = "E22_PHI")]
    E22Phi,
    #[serde(rename = "E23_A")]
    E23A,
    #[serde(rename = "E23_B")]
    E23B,
    #[serde(rename = "T_SINH1")]
    TSinh1,
    #[serde(rename = "T_SINH2")]
    TSinh2,
}

impl EntryId {
    pub const ALL: [EntryId; 19] = [
        EntryId::E5X1,
        EntryId::E5X2,
        EntryId::E8X,
        EntryId::E9X,
        EntryId::E10X,
        EntryId::E11X,
        EntryId::E13X,
        EntryId::E14X,
        EntryId::E15X,
        EntryId::E16X,
        EntryId::E17F,
        EntryId::E19Inner,
        EntryId::E20Dfda,
        EntryId::E21Theta,
        EntryId::E22Phi,
        EntryId::E23A,
        EntryId::E23B,
        EntryId::TSinh1,
        EntryId::TSinh2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntryId::E5X1 => "E5_X1",
            EntryId::E5X2 => "E5_X2",
            EntryId::E8X => "E8_X",
            EntryId::E9X => "E9_X",
            EntryId::E10X => "E10_X",
            EntryId::E11X => "E11_X",
            EntryId::E13X => "E13_X",
            EntryId::E14X => "E14_X",
            EntryId::E15X => "E15_X",
            EntryId::E16X => "E16_X",
            EntryId::E17F => "E17_F",
            EntryId::E19Inner => "E19_INNER",
            EntryId::E20Dfda => "E20_DFDA",
            EntryId::E21Theta => "E21_THETA",
            EntryId::E22Phi => "E22_PHI",
            EntryId::E23A => "E23_A",
            EntryId::E23B => "E23_B",
            EntryId::TSinh1 => "T_SINH1",
            EntryId::TSinh2 => "T_SINH2",
        }
    }
}

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntryId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EntryId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownEntry(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Domain {
    Line(Interval1D),
    Box(BoxDomain),
}

impl Domain {
    pub fn axes(&self) -> &[Interval1D] {
        match self {
            Domain::Line(i) => std::slice::from_ref(i),
            Domain::Box(b) => b.axes(),
        }
    }
}

/// Real parameter of a parametric entry, valid on the closed range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: EntryId,
    pub dimension: usize,
    pub variables: &'static [&'static str],
    pub domain: Domain,
    pub description: &'static str,
    /// Constant factor included in the evaluator, if any.
    pub prefactor: Option<&'static str>,
    pub singularities: &'static [&'static str],
    pub parameter: Option<ParameterSpec>,
    /// Where the integral sits in the reduction.
    pub anchor: &'static str,
}

impl CatalogEntry {
    pub fn is_parametric(&self) -> bool {
        self.parameter.is_some()
    }

    pub fn box_domain(&self) -> Option<&BoxDomain> {
        match &self.domain {
            Domain::Box(b) => Some(b),
            Domain::Line(_) => None,
        }
    }

    pub fn interval(&self) -> Option<&Interval1D> {
        match &self.domain {
            Domain::Line(i) => Some(i),
            Domain::Box(_) => None,
        }
    }

    /// Integrand with its parameter fixed; `None` selects the default.
    pub fn bind(&'static self, parameter: Option<f64>) -> Result<BoundEntry> {
        let parameter = match (self.parameter, parameter) {
            (None, None) => None,
            (None, Some(_)) => {
                return Err(Error::Parameter {
                    entry: self.id.to_string(),
                    message: "entry takes no parameter".into(),
                })
            }
            (Some(spec), p) => Some(check_parameter(self.id, spec, p.unwrap_or(spec.default))?),
        };
        Ok(BoundEntry {
            entry: self,
            parameter,
        })
    }
}

fn check_parameter(id: EntryId, spec: ParameterSpec, value: f64) -> Result<f64> {
    if value.is_finite() && value >= spec.min && value <= spec.max {
        Ok(value)
    } else {
        Err(Error::Parameter {
            entry: id.to_string(),
            message: format!(
                "{} = {value} outside [{}, {}]",
                spec.name, spec.min, spec.max
            ),
        })
    }
}

/// A catalog entry with its parameter resolved.
#[derive(Debug, Clone, Copy)]
pub struct BoundEntry {
    entry: &'static CatalogEntry,
    parameter: Option<f64>,
}

impl BoundEntry {
    pub fn entry(&self) -> &'static CatalogEntry {
        self.entry
    }

    pub fn parameter(&self) -> Option<f64> {
        self.parameter
    }

    /// Raw evaluation; the point must have the entry's arity.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_complement(x, &[0.0; 3][..x.len()])
    }

    /// Raw evaluation with signed endpoint complements per coordinate (see
    /// [`Integrand::eval_with_complement`]).
    pub fn eval_complement(&self, x: &[f64], complement: &[f64]) -> f64 {
        use kernels::*;
        let axes = self.entry.domain.axes();
        let coord = |k: usize| Coord::new(x[k], complement[k], axes[k].lo(), axes[k].hi());
        let param = || self.parameter.expect("bound parametric entry");
        match self.entry.id {
            EntryId::E5X1 => e5_x1_at(&Pqx::new(coord(0), coord(1), coord(2))),
            EntryId::E5X2 => e5_x2_at(&Pqx::new(coord(0), coord(1), coord(2))),
            EntryId::E8X => e8_at(&Pqx::new(coord(0), coord(1), coord(2))),
            EntryId::E9X => e9_at(&Pqx::folded(coord(0), coord(1), coord(2))),
            EntryId::E10X => e10(x[0], x[1], cos_quarter(coord(2))),
            EntryId::E11X => e11(x[0], x[1], cos_quarter(coord(2))),
            EntryId::E13X => e13(x[0], x[1], cos_quarter(coord(2))),
            EntryId::E14X => e14(x[0], cos_quarter(coord(1))),
            EntryId::E15X => e15(x[0], x[1], coord(1).to_hi),
            EntryId::E16X => e16(x[0]),
            EntryId::E17F => e17(x[0], param(), LogSign::Plus),
            EntryId::E19Inner => e19(x[0], param()),
            EntryId::E20Dfda => e20(x[0]),
            EntryId::E21Theta => e21(x[0]),
            EntryId::E22Phi => e22(x[0], param()),
            EntryId::E23A => e23_a(x[0]),
            EntryId::E23B => e23_b(x[0]),
            EntryId::TSinh1 => t_sinh1(x[0]),
            EntryId::TSinh2 => t_sinh2(x[0]),
        }
    }
}

impl Integrand for BoundEntry {
    /// Panics for one-dimensional entries, which are integrated with the 1D
    /// engine instead.
    fn domain(&self) -> &BoxDomain {
        self.entry
            .box_domain()
            .expect("one-dimensional entries have no box domain")
    }

    fn eval(&self, point: &[f64]) -> f64 {
        BoundEntry::eval(self, point)
    }

    fn eval_with_complement(&self, point: &[f64], complement: &[f64]) -> f64 {
        self.eval_complement(point, complement)
    }
}

fn finite_ts(lo: f64, hi: f64) -> Interval1D {
    Interval1D::finite(lo, hi)
        .and_then(|i| i.with_transform(Transform::TanhSinh))
        .expect("static interval")
}

fn half_line() -> Interval1D {
    Interval1D::semi_infinite(0.0)
        .and_then(|i| i.with_transform(Transform::TanhSinh))
        .expect("static interval")
}

fn cube(axes: [Interval1D; 3]) -> Domain {
    Domain::Box(BoxDomain::new(axes.to_vec()).expect("static box"))
}

fn square(axes: [Interval1D; 2]) -> Domain {
    Domain::Box(BoxDomain::new(axes.to_vec()).expect("static box"))
}

const CORNER: &str = "corner (p,q,|x|) -> (1,1,1): 1 - p^2 q^2 -> 0 and a -> 1";

fn build() -> Vec<CatalogEntry> {
    let unit = finite_ts(0.0, 1.0);
    let sym = finite_ts(-1.0, 1.0);
    let quarter = finite_ts(0.0, FRAC_PI_2);
    let half = half_line();
    let entry = |id, variables, domain, description, prefactor, singularities, parameter, anchor| {
        let dimension = match &domain {
            Domain::Line(_) => 1,
            Domain::Box(b) => b.dim(),
        };
        CatalogEntry {
            id,
            dimension,
            variables,
            domain,
            description,
            prefactor,
            singularities,
            parameter,
            anchor,
        }
    };
    vec![
        entry(
            EntryId::E5X1,
            &["p", "q", "x"],
            cube([unit, unit, sym]),
            "-16*pi * F[p,q,x] / ((1 - p^2 q^2)(1 + q^2))",
            Some("-16*pi"),
            &[CORNER],
            None,
            "first six-fold integral after three angular integrations",
        ),
        entry(
            EntryId::E5X2,
            &["p", "q", "x"],
            cube([unit, unit, sym]),
            "16*pi * q^2 F[p,q,x] / ((1 - p^2 q^2)(1 + q^2))",
            Some("16*pi"),
            &[CORNER],
            None,
            "second six-fold integral after three angular integrations",
        ),
        entry(
            EntryId::E8X,
            &["p", "q", "x"],
            cube([unit, unit, sym]),
            "16*pi * F[p,q,x] / (1 - p^2 q^2)",
            Some("16*pi"),
            &[CORNER],
            None,
            "difference X = X2 - X1 as one triple integral",
        ),
        entry(
            EntryId::E9X,
            &["p", "q", "x"],
            cube([unit, unit, unit]),
            "16*pi * atan2(2 beta sqrt((1+alpha^2)(1-x^2)), alpha^2 - beta^2 + 1 - x^2) / ((1 - p^2 q^2)(a^2 - x^2))",
            Some("16*pi"),
            &[CORNER, "arctangent denominator changes sign; two-argument form"],
            None,
            "even part in x, folded onto [0, 1]",
        ),
        entry(
            EntryId::E10X,
            &["u", "v", "phi"],
            cube([half, half, quarter]),
            "8*pi * cos(phi) atan2((sinh(u+v) + sinh(v-u)) cos(phi), sinh(u+v) sinh(u-v) + cos^2 phi) / (sinh(u+v)(sinh^2(u+v) + cos^2 phi))",
            Some("8*pi"),
            &["corner u + v -> 0 with phi -> pi/2"],
            None,
            "exponential coordinates q = exp(-u), p = exp(-v), x = sin(phi)",
        ),
        entry(
            EntryId::E11X,
            &["r", "t", "phi"],
            cube([half, sym, quarter]),
            "4*pi * r cos(phi) atan2((sinh r + sinh s) cos(phi), cos^2 phi - sinh r sinh s) / (sinh r (sinh^2 r + cos^2 phi)), s = r t",
            Some("4*pi"),
            &["corner r -> 0 with phi -> pi/2", "triangle |s| <= r mapped to s = r t (Jacobian r)"],
            None,
            "rotated coordinates r = u + v, s = v - u",
        ),
        entry(
            EntryId::E13X,
            &["r", "t", "phi"],
            cube([half, sym, quarter]),
            "4*pi * r cos(phi) [atan(sinh r / cos phi) + atan(sinh s / cos phi)] / (sinh r (cos^2 phi + sinh^2 r)), s = r t",
            Some("4*pi"),
            &["corner r -> 0 with phi -> pi/2", "triangle |s| <= r mapped to s = r t (Jacobian r)"],
            None,
            "arctangent split into its r and s halves",
        ),
        entry(
            EntryId::E14X,
            &["r", "phi"],
            square([half, quarter]),
            "8*pi * (r / sinh r) atan(sinh r / cos phi) cos(phi) / (cos^2 phi + sinh^2 r)",
            Some("8*pi"),
            &["corner r -> 0 with phi -> pi/2"],
            None,
            "odd part in s dropped and the s-integration done",
        ),
        entry(
            EntryId::E15X,
            &["r", "w"],
            square([half, unit]),
            "8*pi * (r / sinh r) cos(mu) psi cos(psi) / sqrt(sin^2 psi - sin^2 mu) * (pi/2 - mu), psi = mu + (pi/2 - mu) w, mu = atan(sinh r)",
            Some("8*pi"),
            &["inverse square root at w = 0 (psi -> mu)"],
            None,
            "substitution tan(psi) = sec(phi) sinh(r) in the phi-integral",
        ),
        entry(
            EntryId::E16X,
            &["r"],
            Domain::Line(half),
            "r sech(r) ln(1 + sech r) / sinh r",
            None,
            &["removable at r = 0 (limit ln 2)"],
            None,
            "single integral after the tabulated psi-integration",
        ),
        entry(
            EntryId::E17F,
            &["r"],
            Domain::Line(half),
            "r ln(1 + a sech r) / (sinh r cosh r)",
            None,
            &["removable at r = 0; the minus-sign reading is log-singular there at a = 1"],
            Some(ParameterSpec {
                name: "a",
                default: 1.0,
                min: 0.0,
                max: 1.0,
            }),
            "parametric family f(a) with f(0) = 0",
        ),
        entry(
            EntryId::E19Inner,
            &["r"],
            Domain::Line(half),
            "ln(1 + a sech r)",
            None,
            &[],
            Some(ParameterSpec {
                name: "a",
                default: 1.0,
                min: 0.0,
                max: 1.0,
            }),
            "remaining integral after integration by parts in df/da",
        ),
        entry(
            EntryId::E20Dfda,
            &["a"],
            Domain::Line(unit),
            "-pi^2 (1 - a) / (8 a (1 + a)) + arccos(a)^2 / (2 a (1 - a^2))",
            None,
            &["removable poles at a = 0 (limit pi^2/4 - pi/2) and a = 1 (limit 1/2)"],
            None,
            "df/da in closed form",
        ),
        entry(
            EntryId::E21Theta,
            &["theta"],
            Domain::Line(quarter),
            "[theta^2 - (pi^2/8)(1 - cos 2 theta)] / sin(2 theta)",
            None,
            &["removable at theta = 0 and theta = pi/2"],
            None,
            "a = cos(theta) in the integral of df/da",
        ),
        entry(
            EntryId::E22Phi,
            &["phi"],
            Domain::Line(quarter),
            "c phi (phi - pi) / sin(phi)",
            None,
            &["removable at phi = 0"],
            Some(ParameterSpec {
                name: "c",
                default: 4.0,
                min: -1e6,
                max: 1e6,
            }),
            "phi = 2 theta with [pi/2, pi] folded back onto [0, pi/2]",
        ),
        entry(
            EntryId::E23A,
            &["phi"],
            Domain::Line(quarter),
            "phi / sin(phi)",
            None,
            &["removable at phi = 0"],
            None,
            "tabulated integral equal to 2G (Catalan's constant)",
        ),
        entry(
            EntryId::E23B,
            &["phi"],
            Domain::Line(quarter),
            "phi^2 / sin(phi)",
            None,
            &["removable at phi = 0"],
            None,
            "tabulated integral equal to 2 pi G - (7/2) zeta(3)",
        ),
        entry(
            EntryId::TSinh1,
            &["r"],
            Domain::Line(half),
            "r / sinh r",
            None,
            &["removable at r = 0"],
            None,
            "tabulated term of the partial-fraction decomposition of df/da",
        ),
        entry(
            EntryId::TSinh2,
            &["r"],
            Domain::Line(half),
            "r / sinh(2r)",
            None,
            &["removable at r = 0"],
            None,
            "tabulated term of the partial-fraction decomposition of df/da",
        ),
    ]
}

/// The full, immutable catalog in reduction order.
pub fn list_entries() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

pub fn entry(id: EntryId) -> &'static CatalogEntry {
    &list_entries()[EntryId::ALL.iter().position(|e| *e == id).expect("all ids present")]
}

pub fn lookup(id: &str) -> Result<&'static CatalogEntry> {
    id.parse().map(entry)
}

/// Derived quantities of the arctangent kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FKernelParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
}

impl FKernelParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !(open(p) && open(q)) {
            return Err(Error::DomainViolation {
                entry: "F".into(),
                point: vec![p, q],
            });
        }
        Ok(Self {
            p,
            q,
            alpha: (1.0 - q * q) / (2.0 * q),
            beta: (1.0 - p * p) / (2.0 * p),
            a: (1.0 + p * p * q * q) / (2.0 * p * q),
        })
    }
}

/// The arctangent kernel `F[p, q, x]` on `p, q ∈ (0, 1)`, `x ∈ (−1, 1)`.
pub fn eval_f(p: f64, q: f64, x: f64) -> Result<f64> {
    FKernelParams::new(p, q).map_err(|_| Error::DomainViolation {
        entry: "F".into(),
        point: vec![p, q, x],
    })?;
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::DomainViolation {
            entry: "F".into(),
            point: vec![p, q, x],
        });
    }
    Ok(kernels::kernel_f(p, q, x))
}

/// `F(p, q, x) + F(p, q, −x)` evaluated as one combined arctangent.
pub fn eval_f_fold(p: f64, q: f64, x: f64) -> Result<f64> {
    eval_f(p, q, x)?;
    Ok(kernels::kernel_fold(p, q, x))
}

/// Validated pointwise evaluation. The point must lie in the entry's closed
/// domain and the value must be finite there.
pub fn eval_entry(id: &str, point: &[f64], parameter: Option<f64>) -> Result<f64> {
    let e = lookup(id)?;
    if point.len() != e.dimension {
        return Err(Error::WrongArity {
            entry: id.to_string(),
            expected: e.dimension,
            got: point.len(),
        });
    }
    if e.is_parametric() && parameter.is_none() {
        return Err(Error::Parameter {
            entry: id.to_string(),
            message: "parameter required".into(),
        });
    }
    let bound = e.bind(parameter)?;
    let inside = point
        .iter()
        .zip(e.domain.axes())
        .all(|(&x, axis)| x >= axis.lo() && x <= axis.hi() && x.is_finite());
    let value = if inside { bound.eval(point) } else { f64::NAN };
    if !value.is_finite() {
        return Err(Error::DomainViolation {
            entry: id.to_string(),
            point: point.to_vec(),
        });
    }
    Ok(value)
}

/// Removable limits of `df/da` at `a → 0⁺` and `a → 1⁻`.
pub fn eval_dfda_limits() -> (f64, f64) {
    (kernels::DFDA_AT_ZERO, kernels::DFDA_AT_ONE)
}
