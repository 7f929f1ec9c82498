//! Mathematical constants and the closed-form targets built from them.
//!
//! Every constant is kept as a decimal string of at least 40 significant
//! digits. The binary64 value is the correctly rounded parse of that string;
//! closed forms are evaluated in double-double arithmetic and rounded once, so
//! they land within an ulp of the true value.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::probe::{Factor, FactorProbe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstantName {
    #[serde(rename = "PI")]
    Pi,
    #[serde(rename = "LN2")]
    Ln2,
    #[serde(rename = "ZETA3")]
    Zeta3,
    #[serde(rename = "CATALAN")]
    Catalan,
}

impl ConstantName {
    pub const ALL: [ConstantName; 4] = [Self::Pi, Self::Ln2, Self::Zeta3, Self::Catalan];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pi => "PI",
            Self::Ln2 => "LN2",
            Self::Zeta3 => "ZETA3",
            Self::Catalan => "CATALAN",
        }
    }

    /// Fifty significant digits.
    pub fn decimal_source(&self) -> &'static str {
        match self {
            Self::Pi => "3.1415926535897932384626433832795028841971693993751",
            Self::Ln2 => "0.69314718055994530941723212145817656807550013436026",
            Self::Zeta3 => "1.2020569031595942853997381615114499907649862923405",
            Self::Catalan => "0.91596559417721901505460351493238411077414937428167",
        }
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownConstant(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedConstant {
    pub name: ConstantName,
    pub decimal_source: &'static str,
    pub value: f64,
    #[serde(skip)]
    precise: DoubleDouble,
}

fn constant_table() -> &'static [NamedConstant; 4] {
    static TABLE: OnceLock<[NamedConstant; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        ConstantName::ALL.map(|name| {
            let src = name.decimal_source();
            NamedConstant {
                name,
                decimal_source: src,
                value: src.parse().expect("constant literal parses"),
                precise: DoubleDouble::parse_decimal(src).expect("constant literal parses"),
            }
        })
    })
}

pub fn named_constant(name: ConstantName) -> &'static NamedConstant {
    &constant_table()[name as usize]
}

pub fn constants() -> &'static [NamedConstant] {
    constant_table()
}

pub fn get_constant(name: &str) -> Result<f64> {
    let name: ConstantName = name.parse()?;
    Ok(named_constant(name).value)
}

pub fn pi() -> f64 {
    named_constant(ConstantName::Pi).value
}
pub fn ln2() -> f64 {
    named_constant(ConstantName::Ln2).value
}
pub fn zeta3() -> f64 {
    named_constant(ConstantName::Zeta3).value
}
pub fn catalan() -> f64 {
    named_constant(ConstantName::Catalan).value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClosedFormId {
    #[serde(rename = "E2X_EQ2")]
    E2xEq2,
    #[serde(rename = "X_EQ22")]
    XEq22,
    #[serde(rename = "X1_EQ24")]
    X1Eq24,
    #[serde(rename = "X2_EQ25")]
    X2Eq25,
    #[serde(rename = "SIGMA_EQ26")]
    SigmaEq26,
    #[serde(rename = "SUM_EQ7")]
    SumEq7,
}

impl ClosedFormId {
    pub const ALL: [ClosedFormId; 6] = [
        Self::E2xEq2,
        Self::XEq22,
        Self::X1Eq24,
        Self::X2Eq25,
        Self::SigmaEq26,
        Self::SumEq7,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::E2xEq2 => "E2X_EQ2",
            Self::XEq22 => "X_EQ22",
            Self::X1Eq24 => "X1_EQ24",
            Self::X2Eq25 => "X2_EQ25",
            Self::SigmaEq26 => "SIGMA_EQ26",
            Self::SumEq7 => "SUM_EQ7",
        }
    }

    pub fn expression(&self) -> &'static str {
        match self {
            Self::E2xEq2 => "ln2/6 - 3*zeta3/(4*pi^2)",
            Self::XEq22 => "pi^4*ln2 - (7/2)*pi^2*zeta3",
            Self::X1Eq24 => "-pi^4*((4/3)*ln2 - (5/pi^2)*zeta3)",
            Self::X2Eq25 => "pi^4*((2/3)*ln2 - (2/pi^2)*zeta3)",
            Self::SigmaEq26 => "-(X1_EQ24 + X2_EQ25)/(4*pi^4)",
            Self::SumEq7 => "3*zeta3 - (2*pi^2/3)*ln2",
        }
    }

    /// Published decimal expansion, where one exists.
    pub fn published_digits(&self) -> Option<&'static str> {
        match self {
            Self::X1Eq24 => {
                Some("-30.70598523924889925762268444608481536875855208165945918981645846")
            }
            Self::X2Eq25 => {
                Some("21.284905670516337983402598547497784400625730440810132220995696061")
            }
            Self::SigmaEq26 => {
                Some("0.0241791589181444058954507621628984314049152384251207335945309986")
            }
            _ => None,
        }
    }
}

impl fmt::Display for ClosedFormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClosedFormId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownClosedForm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub id: ClosedFormId,
    pub expression: &'static str,
    pub paper_digits: Option<&'static str>,
    pub value: f64,
}

fn precise(name: ConstantName) -> DoubleDouble {
    named_constant(name).precise
}

fn rational(n: f64, d: f64) -> DoubleDouble {
    DoubleDouble::from_f64(n) / DoubleDouble::from_f64(d)
}

fn evaluate_precise(id: ClosedFormId) -> DoubleDouble {
    let pi = precise(ConstantName::Pi);
    let ln2 = precise(ConstantName::Ln2);
    let z3 = precise(ConstantName::Zeta3);
    let pi2 = pi * pi;
    let pi4 = pi2 * pi2;
    match id {
        ClosedFormId::E2xEq2 => ln2 / DoubleDouble::from_f64(6.0) - rational(3.0, 4.0) * z3 / pi2,
        ClosedFormId::XEq22 => pi4 * ln2 - rational(7.0, 2.0) * pi2 * z3,
        ClosedFormId::X1Eq24 => -(pi4 * (rational(4.0, 3.0) * ln2 - DoubleDouble::from_f64(5.0) * z3 / pi2)),
        ClosedFormId::X2Eq25 => pi4 * (rational(2.0, 3.0) * ln2 - DoubleDouble::from_f64(2.0) * z3 / pi2),
        ClosedFormId::SigmaEq26 => {
            let sum = evaluate_precise(ClosedFormId::X1Eq24) + evaluate_precise(ClosedFormId::X2Eq25);
            -(sum / (DoubleDouble::from_f64(4.0) * pi4))
        }
        ClosedFormId::SumEq7 => DoubleDouble::from_f64(3.0) * z3 - rational(2.0, 3.0) * pi2 * ln2,
    }
}

fn closed_form_table() -> &'static [ClosedForm; 6] {
    static TABLE: OnceLock<[ClosedForm; 6]> = OnceLock::new();
    TABLE.get_or_init(|| {
        ClosedFormId::ALL.map(|id| ClosedForm {
            id,
            expression: id.expression(),
            paper_digits: id.published_digits(),
            value: evaluate_precise(id).to_f64(),
        })
    })
}

pub fn closed_form(id: ClosedFormId) -> &'static ClosedForm {
    &closed_form_table()[id as usize]
}

pub fn closed_forms() -> &'static [ClosedForm] {
    closed_form_table()
}

pub fn eval_closed_form(id: &str) -> Result<f64> {
    let id: ClosedFormId = id.parse()?;
    Ok(closed_form(id).value)
}

/// Number of leading significant digits on which two decimal renderings
/// agree (sign and leading zeros ignored, so `0.0241…` counts from the `2`).
pub fn matching_digits(a: &str, b: &str) -> usize {
    fn digits(s: &str) -> impl Iterator<Item = char> + '_ {
        s.chars()
            .filter(char::is_ascii_digit)
            .skip_while(|&c| c == '0')
    }
    if a.starts_with('-') != b.starts_with('-') {
        return 0;
    }
    digits(a).zip(digits(b)).take_while(|(x, y)| x == y).count()
}

/// Renders a value with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // exponent of the leading digit after rounding to 17 digits
    let exp: i32 = format!("{x:.16e}")
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// Identifier of a constant-level consistency relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RelationId {
    /// `X1 + X2` against `3ζ(3) − (2π²/3)·ln 2` as printed.
    #[serde(rename = "sum_relation")]
    SumRelation,
    /// `−(X1 + X2)/(4π²)` against the published self-energy digits.
    #[serde(rename = "sigma_denominator")]
    SigmaDenominator,
    /// `π⁴·ln 2 − (7/2)·π²·ζ(3)` against `X2 − X1`.
    #[serde(rename = "difference_closed_form")]
    DifferenceClosedForm,
}

impl RelationId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SumRelation => "sum_relation",
            Self::SigmaDenominator => "sigma_denominator",
            Self::DifferenceClosedForm => "difference_closed_form",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub relation: RelationId,
    /// Left-hand side as printed.
    pub lhs: f64,
    /// Right-hand side as printed.
    pub rhs: f64,
    /// Relative deviation of the printed relation (factor 1).
    pub deviation: f64,
    /// Multiplier `c` with `c · lhs ≈ rhs`.
    pub best_factor: Factor,
    /// Relative deviation after applying `best_factor`.
    pub residual: f64,
}

/// Evaluates the constant-level relations and identifies the multiplier that
/// reconciles each one. Uses the published digit strings for `X1`, `X2` and
/// the self-energy so that no quadrature enters.
pub fn consistency_audit() -> Vec<AuditRow> {
    let probe = FactorProbe::default();
    let pi = PI;
    let x1 = closed_form(ClosedFormId::X1Eq24).value;
    let x2 = closed_form(ClosedFormId::X2Eq25).value;
    let sigma = closed_form(ClosedFormId::SigmaEq26).value;
    let rows = [
        (RelationId::SumRelation, x1 + x2, closed_form(ClosedFormId::SumEq7).value),
        (RelationId::SigmaDenominator, -(x1 + x2) / (4.0 * pi * pi), sigma),
        (RelationId::DifferenceClosedForm, closed_form(ClosedFormId::XEq22).value, x2 - x1),
    ];
    rows.into_iter()
        .map(|(relation, lhs, rhs)| {
            let m = probe.probe(lhs, rhs, 1e-12);
            AuditRow {
                relation,
                lhs,
                rhs,
                deviation: ((lhs - rhs) / rhs).abs(),
                best_factor: m.best,
                residual: m.relative_deviation,
            }
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::approx_constant, clippy::excessive_precision)]
mod tests {
    use super::*;

    fn ulps(a: f64, b: f64) -> i64 {
        (a.to_bits() as i64 - b.to_bits() as i64).abs()
    }

    #[test]
    fn constants_round_trip_at_17_digits() {
        for c in constants() {
            let rendered = format!("{:.16e}", c.value);
            assert_eq!(rendered.parse::<f64>().unwrap(), c.value, "{}", c.name);
            assert_eq!(c.precise.to_f64(), c.value, "{}", c.name);
            let sig = c.decimal_source.chars().filter(char::is_ascii_digit).skip_while(|&d| d == '0').count();
            assert!(sig >= 40, "{} has only {sig} digits", c.name);
        }
    }

    #[test]
    fn constants_agree_with_independent_sources() {
        // std::f64::consts and series evaluations as second references.
        assert_eq!(pi(), std::f64::consts::PI);
        assert_eq!(ln2(), std::f64::consts::LN_2);
        // Catalan: sum (-1)^n/(2n+1)^2, accelerated by pairing terms.
        let mut g = crate::summation::CompensatedSum::new();
        for n in 0..2_000_000u64 {
            let k = (2 * n + 1) as f64;
            g.add(if n % 2 == 0 { 1.0 } else { -1.0 } / (k * k));
        }
        // alternating tail: half of the next term
        let k = 4_000_001.0f64;
        g.add(0.5 / (k * k));
        assert!((g.value() - catalan()).abs() < 1e-14);
        // zeta(3): direct sum plus Euler-Maclaurin tail 1/(2N^2) - 1/(2N^3) + 1/(4N^4)
        let n_terms = 10_000u64;
        let mut z = crate::summation::CompensatedSum::new();
        for n in 1..n_terms {
            let x = n as f64;
            z.add(1.0 / (x * x * x));
        }
        let nn = n_terms as f64;
        z.add(1.0 / (2.0 * nn * nn) + 1.0 / (2.0 * nn * nn * nn) + 1.0 / (4.0 * nn.powi(4)));
        assert!((z.value() - zeta3()).abs() < 4e-16, "{}", z.value() - zeta3());
    }

    #[test]
    fn get_constant_examples() {
        assert!((get_constant("PI").unwrap() - 3.141_592_653_589_793).abs() == 0.0);
        assert_eq!(get_constant("LN2").unwrap(), 0.693_147_180_559_945_3);
        assert_eq!(get_constant("ZETA3").unwrap(), 1.202_056_903_159_594_2);
        assert_eq!(get_constant("CATALAN").unwrap(), 0.915_965_594_177_219);
        assert_eq!(
            get_constant("EULER"),
            Err(Error::UnknownConstant("EULER".into()))
        );
    }

    #[test]
    fn coarse_bounds() {
        assert!(pi() > 3.14159265 && pi() < 3.14159266);
        assert!(ln2() > 0.6931 && ln2() < 0.6932);
        assert!(zeta3() > 1.2020 && zeta3() < 1.2021);
        assert!(catalan() > 0.9159 && catalan() < 0.9160);
    }

    #[test]
    fn closed_forms_match_published_digits() {
        for id in [ClosedFormId::X1Eq24, ClosedFormId::X2Eq25, ClosedFormId::SigmaEq26] {
            let form = closed_form(id);
            let printed: f64 = form.paper_digits.unwrap().parse().unwrap();
            assert!(ulps(form.value, printed) <= 2, "{id}: {} vs {printed}", form.value);
        }
    }

    #[test]
    fn closed_form_examples() {
        let x1 = eval_closed_form("X1_EQ24").unwrap();
        let x2 = eval_closed_form("X2_EQ25").unwrap();
        let s = eval_closed_form("SIGMA_EQ26").unwrap();
        let e2x = eval_closed_form("E2X_EQ2").unwrap();
        assert!((x1 + 30.705_985_239_248_9).abs() < 1e-12);
        assert!((x2 - 21.284_905_670_516_34).abs() < 1e-12);
        assert!((s - 0.024_179_158_918_144_41).abs() < 1e-16);
        assert!(((e2x - s) / s).abs() < 1e-12);
        assert!(eval_closed_form("X3").is_err());
    }

    #[test]
    fn sum_and_sigma_invariants() {
        let pi = pi();
        let x1 = closed_form(ClosedFormId::X1Eq24).value;
        let x2 = closed_form(ClosedFormId::X2Eq25).value;
        let sigma = closed_form(ClosedFormId::SigmaEq26).value;
        let pi_dd = precise(ConstantName::Pi);
        let pi2 = pi_dd * pi_dd;
        let rhs = (DoubleDouble::from_f64(3.0) * pi2 * precise(ConstantName::Zeta3)
            - rational(2.0, 3.0) * pi2 * pi2 * precise(ConstantName::Ln2))
        .to_f64();
        assert!(ulps(x1 + x2, rhs) <= 4, "{} vs {rhs}", x1 + x2);
        assert!((sigma * 4.0 * pi.powi(4) + (x1 + x2)).abs() <= 1e-12);
    }

    #[test]
    fn audit_relations() {
        let rows = consistency_audit();
        assert_eq!(rows.len(), 3);
        let sum = &rows[0];
        assert_eq!(sum.best_factor, Factor::new(1, 1, -2));
        assert!((sum.lhs / (pi() * pi()) + 0.954_554_933_092_628).abs() < 1e-13);
        let sigma = &rows[1];
        assert_eq!(sigma.best_factor, Factor::new(1, 1, -2));
        assert!((sigma.lhs / (pi() * pi()) - 0.024_179_158_918).abs() < 1e-12);
        let diff = &rows[2];
        assert_eq!(diff.best_factor, Factor::new(2, 1, 0));
        assert!((diff.rhs - 51.990_890_909_765).abs() < 1e-11);
        assert!((diff.lhs - 25.995_445_454_882).abs() < 1e-11);
        for r in &rows {
            assert!(r.residual <= 1e-12, "{:?}", r);
            assert!(r.deviation > 0.1);
        }
    }

    #[test]
    fn digit_matching() {
        assert_eq!(matching_digits("0.024179", "0.0241791589"), 5);
        assert_eq!(matching_digits("-30.7059", "30.7059"), 0);
        assert_eq!(matching_digits("-30.70598", "-30.70599"), 6);
    }

    #[test]
    fn sig17_rendering() {
        assert_eq!(format_sig17(-30.705985239248899), "-30.705985239248900");
        assert_eq!(format_sig17(0.024179158918144406), "0.024179158918144407");
        assert_eq!(format_sig17(1e-9), "1.0000000000000001e-9");
    }
}
