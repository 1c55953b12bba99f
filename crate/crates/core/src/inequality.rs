//! Weighted lp-type inequality forms and their evaluation.
//!
//! Every form compares
//!
//! ```text
//! LHS = sum_{mu in outer} lambda_mu * (inner_mu)^p
//! RHS = sum_{mu in rhs}   lambda_mu * (mu * a_mu * gamma_mu)^p
//! ```
//!
//! where `inner_mu` is a head sum `sum_{nu=h}^{mu} a_nu gamma_nu` or a tail sum
//! `sum_{nu=mu}^{m} a_nu gamma_nu`. The right-hand side is always evaluated
//! without a constant; constants enter only through [`check_holds`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{Precision, Real, Scalar};
use crate::sequence::{is_nonneg_decreasing, power_sequence, Sequence};

/// Relative tolerance for float-mode comparisons.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormId {
    HL_1_1,
    HL_1_2,
    HL_1_3,
    HL_1_4,
    T2_1,
    T2_2,
    T2_3,
    T2_4,
    T5_1a,
    T5_1b,
    T5_2a,
    T5_2b,
    C5_1a,
    C5_1b,
    C5_2a,
    C5_2b,
}

impl FormId {
    pub const ALL: [FormId; 16] = [
        FormId::HL_1_1,
        FormId::HL_1_2,
        FormId::HL_1_3,
        FormId::HL_1_4,
        FormId::T2_1,
        FormId::T2_2,
        FormId::T2_3,
        FormId::T2_4,
        FormId::T5_1a,
        FormId::T5_1b,
        FormId::T5_2a,
        FormId::T5_2b,
        FormId::C5_1a,
        FormId::C5_1b,
        FormId::C5_2a,
        FormId::C5_2b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FormId::HL_1_1 => "HL_1_1",
            FormId::HL_1_2 => "HL_1_2",
            FormId::HL_1_3 => "HL_1_3",
            FormId::HL_1_4 => "HL_1_4",
            FormId::T2_1 => "T2_1",
            FormId::T2_2 => "T2_2",
            FormId::T2_3 => "T2_3",
            FormId::T2_4 => "T2_4",
            FormId::T5_1a => "T5_1a",
            FormId::T5_1b => "T5_1b",
            FormId::T5_2a => "T5_2a",
            FormId::T5_2b => "T5_2b",
            FormId::C5_1a => "C5_1a",
            FormId::C5_1b => "C5_1b",
            FormId::C5_2a => "C5_2a",
            FormId::C5_2b => "C5_2b",
        }
    }

    fn layout(self) -> Layout {
        use Family::*;
        use InnerKind::*;
        use PRange::*;
        use Relation::*;
        use Sign::*;
        let l = |relation, inner, sign, p_range, family, multiple, outer_lo, inner_from, rhs_lo| Layout {
            relation,
            inner,
            sign,
            p_range,
            family,
            multiple,
            outer_lo,
            inner_from,
            rhs_lo,
        };
        match self {
            FormId::HL_1_1 => l(Le, Tail, Plus, AtLeastOne, HardyLittlewood, 1, 1, 1, 1),
            FormId::HL_1_2 => l(Le, Head, Minus, AtLeastOne, HardyLittlewood, 1, 1, 1, 1),
            FormId::HL_1_3 => l(Ge, Tail, Plus, AtMostOne, HardyLittlewood, 1, 1, 1, 1),
            FormId::HL_1_4 => l(Ge, Head, Minus, AtMostOne, HardyLittlewood, 1, 1, 1, 1),
            FormId::T2_1 => l(Ge, Head, Minus, AtLeastOne, General, 16, 1, 1, 4),
            FormId::T2_2 => l(Ge, Tail, Plus, AtLeastOne, General, 16, 1, 1, 8),
            FormId::T2_3 => l(Le, Head, Minus, AtMostOne, General, 4, 4, 4, 1),
            FormId::T2_4 => l(Le, Tail, Plus, AtMostOne, General, 4, 4, 1, 1),
            FormId::T5_1a => l(Ge, Tail, Plus, AtLeastOne, PowerWeighted, 16, 1, 1, 8),
            FormId::T5_1b => l(Ge, Head, Minus, AtLeastOne, PowerWeighted, 4, 1, 1, 4),
            FormId::T5_2a => l(Le, Tail, Plus, AtMostOne, PowerWeighted, 4, 4, 1, 1),
            FormId::T5_2b => l(Le, Head, Minus, AtMostOne, PowerWeighted, 4, 4, 4, 1),
            FormId::C5_1a => l(Ge, Tail, Plus, Positive, FixedStart, 1, 1, 1, 1),
            FormId::C5_1b => l(Ge, Head, Minus, Positive, FixedStart, 1, 1, 1, 1),
            FormId::C5_2a => l(Equiv, Tail, Plus, AtLeastOne, FixedStart, 1, 1, 1, 1),
            FormId::C5_2b => l(Equiv, Head, Minus, AtLeastOne, FixedStart, 1, 1, 1, 1),
        }
    }

    pub fn relation(self) -> Relation {
        self.layout().relation
    }

    /// True for the four general-weight forms that carry constant certificates.
    pub fn is_general(self) -> bool {
        self.layout().family == Family::General
    }
}

impl fmt::Display for FormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FormId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown form id {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "GE")]
    Ge,
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "EQUIV")]
    Equiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum InnerKind {
    Head,
    Tail,
}

/// Sign convention of the outer power weight: `mu^(alpha-1)` or `mu^(-alpha-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PRange {
    AtLeastOne,
    AtMostOne,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    HardyLittlewood,
    General,
    PowerWeighted,
    FixedStart,
}

#[derive(Clone, Copy, Debug)]
struct Layout {
    relation: Relation,
    inner: InnerKind,
    sign: Sign,
    p_range: PRange,
    family: Family,
    multiple: usize,
    /// Multiples of `n` for the lower limits.
    outer_lo: usize,
    inner_from: usize,
    rhs_lo: usize,
}

/// Inclusive 1-based index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl IndexRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        IndexRange { lo, hi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSum {
    /// `sum_{nu=from}^{mu}`
    Head { from: usize },
    /// `sum_{nu=mu}^{to}`
    Tail { to: usize },
}

/// Index structure of a form, detached from its weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormShape {
    pub outer: IndexRange,
    pub inner: InnerSum,
    pub rhs: IndexRange,
}

impl FormShape {
    /// Largest index of `a` the form reads.
    pub fn extent(&self) -> usize {
        let inner_hi = match self.inner {
            InnerSum::Head { .. } => self.outer.hi,
            InnerSum::Tail { to } => to,
        };
        self.outer.hi.max(self.rhs.hi).max(inner_hi)
    }
}

/// How the weights of a form are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    /// `lambda_mu = mu^(+-alpha-1)` per the form, `gamma_nu = nu^lambda_exp`.
    Power,
    /// `lambda = gamma = 1` (general forms only).
    Unit,
    /// Explicit weight sequences (general forms only).
    Explicit { lambda: Sequence, gamma: Sequence },
}

/// JSON-serializable descriptor resolved by [`make_named_form`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub id: FormId,
    #[serde(default = "Real::one")]
    pub alpha: Real,
    #[serde(default = "Real::zero")]
    pub lambda_exp: Real,
    pub p: Real,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
}

fn default_weights() -> WeightSpec {
    WeightSpec::Power
}

impl FormSpec {
    pub fn new(id: FormId, p: Real, n: usize, m: usize) -> Self {
        FormSpec { id, alpha: Real::one(), lambda_exp: Real::zero(), p, n, m, weights: WeightSpec::Power }
    }

    pub fn alpha(mut self, alpha: Real) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn lambda_exp(mut self, lambda_exp: Real) -> Self {
        self.lambda_exp = lambda_exp;
        self
    }

    pub fn weights(mut self, weights: WeightSpec) -> Self {
        self.weights = weights;
        self
    }
}

/// A fully resolved inequality instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityForm {
    pub id: FormId,
    pub relation: Relation,
    pub p: Real,
    /// `lambda`, indexed by the outer variable `mu`.
    pub outer_weight: Sequence,
    /// `gamma`, indexed by the inner variable `nu`.
    pub inner_weight: Sequence,
    pub shape: FormShape,
    /// Minimal ratio `m / n` the source inequality is stated for.
    pub multiple: usize,
    pub n: usize,
    pub m: usize,
    /// Whether the inequality is only claimed for non-negative decreasing `a`.
    pub requires_decreasing: bool,
    pub precision: Precision,
}

/// Length of generated weights: through `2^(M+1)` for `2^M <= m < 2^(M+1)`,
/// so dyadic comparisons one block past `m` are defined.
pub fn weight_len(m: usize) -> usize {
    (m + 1).next_power_of_two()
}

fn check_p(id: FormId, p: &Real, range: PRange) -> Result<()> {
    let one = Real::one();
    let ok = match range {
        PRange::AtLeastOne => *p >= one,
        PRange::AtMostOne => p.is_positive() && *p <= one,
        PRange::Positive => p.is_positive(),
    };
    if ok {
        Ok(())
    } else {
        let want = match range {
            PRange::AtLeastOne => "p >= 1",
            PRange::AtMostOne => "0 < p <= 1",
            PRange::Positive => "p > 0",
        };
        Err(Error::BadExponent(format!("{id} requires {want}, got p = {p}")))
    }
}

/// Resolves a named form: weights, ranges and preconditions.
pub fn make_named_form(spec: &FormSpec, prec: Precision) -> Result<InequalityForm> {
    let id = spec.id;
    let layout = id.layout();
    let (n, m) = (spec.n, spec.m);
    check_p(id, &spec.p, layout.p_range)?;
    if n == 0 {
        return Err(Error::PreconditionViolated(format!("{id} requires n >= 1")));
    }
    if layout.family == Family::FixedStart && n != 1 {
        return Err(Error::PreconditionViolated(format!(
            "{id} sums from 1; pass n = 1 and the upper limit as m (got n = {n})"
        )));
    }
    if m < layout.multiple * n {
        let rel = if layout.multiple == 1 { "m >= n".to_string() } else { format!("m >= {}n", layout.multiple) };
        return Err(Error::PreconditionViolated(format!("{id} requires {rel} (n = {n}, m = {m})")));
    }
    if layout.family != Family::General && !spec.alpha.is_positive() {
        return Err(Error::BadExponent(format!("{id} requires alpha > 0, got {}", spec.alpha)));
    }

    let len = weight_len(m);
    let (outer_weight, inner_weight) = match (&spec.weights, layout.family) {
        (WeightSpec::Power, family) => {
            let one = Real::one();
            let outer_exp = match layout.sign {
                Sign::Plus => &spec.alpha - &one,
                Sign::Minus => -(&spec.alpha + &one),
            };
            let inner_exp = if family == Family::HardyLittlewood { Real::zero() } else { spec.lambda_exp.clone() };
            (power_sequence(&outer_exp, len, prec), power_sequence(&inner_exp, len, prec))
        }
        (WeightSpec::Unit, Family::General) => (Sequence::ones(len), Sequence::ones(len)),
        (WeightSpec::Explicit { lambda, gamma }, Family::General) => {
            for (name, w) in [("lambda", lambda), ("gamma", gamma)] {
                if w.len() < m {
                    return Err(Error::InvalidArgument(format!(
                        "{name} has length {} but the form reads indices up to {m}",
                        w.len()
                    )));
                }
            }
            (lambda.clone(), gamma.clone())
        }
        (w, _) => {
            return Err(Error::InvalidArgument(format!(
                "{id} has fixed power weights; {w:?} weights are only accepted by T2_* forms"
            )))
        }
    };

    let inner = match layout.inner {
        InnerKind::Head => InnerSum::Head { from: layout.inner_from * n },
        InnerKind::Tail => InnerSum::Tail { to: m },
    };
    Ok(InequalityForm {
        id,
        relation: layout.relation,
        p: spec.p.clone(),
        outer_weight,
        inner_weight,
        shape: FormShape {
            outer: IndexRange::new(layout.outer_lo * n, m),
            inner,
            rhs: IndexRange::new(layout.rhs_lo * n, m),
        },
        multiple: layout.multiple,
        n,
        m,
        requires_decreasing: layout.family != Family::HardyLittlewood,
        precision: prec,
    })
}

fn check_range(lo: usize, hi: usize, len: usize) -> Result<()> {
    if lo == 0 || lo > hi || hi > len {
        return Err(Error::InvalidRange { lo, hi, len });
    }
    Ok(())
}

/// `sum_{nu=lo}^{hi} a_nu w_nu`, accumulated upward.
pub fn head_sum(a: &Sequence, w: &Sequence, lo: usize, hi: usize) -> Result<Real> {
    check_range(lo, hi, a.len().min(w.len()))?;
    Ok((lo..=hi).map(|nu| a.at(nu) * w.at(nu)).sum())
}

/// `sum_{nu=lo}^{hi} a_nu w_nu`, accumulated downward from `hi`.
pub fn tail_sum(a: &Sequence, w: &Sequence, lo: usize, hi: usize) -> Result<Real> {
    check_range(lo, hi, a.len().min(w.len()))?;
    Ok((lo..=hi).rev().map(|nu| a.at(nu) * w.at(nu)).sum())
}

/// `(sum_{mu=lo}^{hi} b_mu^alpha)^(1/alpha)`; exact when `alpha = 1` and `b` is exact.
pub fn power_sum_norm(b: &Sequence, alpha: &Real, lo: usize, hi: usize, prec: Precision) -> Result<Real> {
    if !alpha.is_positive() {
        return Err(Error::BadExponent(format!("norm exponent must be positive, got {alpha}")));
    }
    check_range(lo, hi, b.len())?;
    let total: Real = (lo..=hi).map(|mu| b.at(mu).pow(alpha, prec)).sum();
    if *alpha == Real::one() {
        return Ok(total);
    }
    let inv = alpha.recip()?;
    Ok(total.pow(&inv, prec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenCheck {
    pub holds: bool,
    /// The `beta`-norm.
    pub lhs: Real,
    /// The `alpha`-norm.
    pub rhs: Real,
}

/// Checks `||b||_beta <= ||b||_alpha` for `0 < alpha < beta`.
///
/// With exact data and integer exponents the comparison is exact: both sides
/// are raised to the power `alpha * beta`, i.e. `(sum b^beta)^alpha` is
/// compared against `(sum b^alpha)^beta` with no roots taken.
pub fn verify_jensen(
    b: &Sequence,
    alpha: &Real,
    beta: &Real,
    range: IndexRange,
    prec: Precision,
) -> Result<JensenCheck> {
    if !alpha.is_positive() || alpha >= beta {
        return Err(Error::BadExponent(format!("need 0 < alpha < beta, got alpha = {alpha}, beta = {beta}")));
    }
    let lhs = power_sum_norm(b, beta, range.lo, range.hi, prec)?;
    let rhs = power_sum_norm(b, alpha, range.lo, range.hi, prec)?;
    let exact_path = match (alpha.as_i64(), beta.as_i64()) {
        (Some(x), Some(y)) if b.values().iter().all(Real::is_exact) => Some((x, y)),
        _ => None,
    };
    let holds = match exact_path {
        Some((x, y)) => {
            let sum_pow = |k: i64| -> Real { (range.lo..=range.hi).map(|mu| b.at(mu).powi(k as i32)).sum() };
            sum_pow(y).powi(x as i32) <= sum_pow(x).powi(y as i32)
        }
        None => within_upper(&lhs, &rhs, DEFAULT_REL_TOL),
    };
    Ok(JensenCheck { holds, lhs, rhs })
}

/// `x <= y (1 + tol)`.
fn within_upper(x: &Real, y: &Real, tol: f64) -> bool {
    if x <= y {
        return true;
    }
    let slack = Real::from_f64_exact(1.0 + tol).expect("finite");
    *x <= y * &slack
}

/// `x >= y (1 - tol)`.
fn within_lower(x: &Real, y: &Real, tol: f64) -> bool {
    if x >= y {
        return true;
    }
    let slack = Real::from_f64_exact(1.0 - tol).expect("finite");
    *x >= y * &slack
}

/// `lhs / rhs0` with the zero conventions made explicit.
#[derive(Clone, Debug, PartialEq)]
pub enum Ratio {
    Finite(Real),
    /// `rhs0 = 0 < lhs`
    Infinite,
    /// `lhs = rhs0 = 0`
    Indeterminate,
}

impl Ratio {
    pub fn of(lhs: &Real, rhs: &Real) -> Ratio {
        match (lhs.is_zero(), rhs.is_zero()) {
            (true, true) => Ratio::Indeterminate,
            (false, true) => Ratio::Infinite,
            _ => Ratio::Finite(lhs / rhs),
        }
    }

    pub fn finite(&self) -> Option<&Real> {
        match self {
            Ratio::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Finite(r) => r.to_f64(),
            Ratio::Infinite => f64::INFINITY,
            Ratio::Indeterminate => f64::NAN,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => f.write_str("inf"),
            Ratio::Indeterminate => f.write_str("nan"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "inf" => Ok(Ratio::Infinite),
            "nan" => Ok(Ratio::Indeterminate),
            _ => serde_json::from_value::<Real>(serde_json::Value::String(s))
                .map(Ratio::Finite)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub lhs: Real,
    pub rhs0: Real,
    pub ratio: Ratio,
    pub exact: bool,
}

/// Both sides of a form for scalars of any kind. Weights and `a` are 0-based
/// slices holding the 1-based sequences.
pub fn evaluate_sides<S: Scalar>(
    shape: &FormShape,
    lambda: &[S],
    gamma: &[S],
    a: &[S],
    p: &Real,
    prec: Precision,
) -> (S, S) {
    let term = |nu: usize| a[nu - 1].times(&gamma[nu - 1]);
    let mut lhs = S::zero();
    let outer = shape.outer;
    match shape.inner {
        InnerSum::Head { from } => {
            let mut inner = S::zero();
            for mu in from.min(outer.lo)..=outer.hi {
                if mu >= from {
                    inner = inner.plus(&term(mu));
                }
                if mu >= outer.lo && !inner.is_zero() {
                    lhs = lhs.plus(&lambda[mu - 1].times(&inner.pow_real(p, prec)));
                }
            }
        }
        InnerSum::Tail { to } => {
            let mut inner = S::zero();
            for mu in (outer.lo..=to.max(outer.hi)).rev() {
                if mu <= to {
                    inner = inner.plus(&term(mu));
                }
                if mu <= outer.hi && !inner.is_zero() {
                    lhs = lhs.plus(&lambda[mu - 1].times(&inner.pow_real(p, prec)));
                }
            }
        }
    }
    let mut rhs = S::zero();
    for mu in shape.rhs.lo..=shape.rhs.hi {
        let inner = S::from_index(mu).times(&term(mu));
        if !inner.is_zero() {
            rhs = rhs.plus(&lambda[mu - 1].times(&inner.pow_real(p, prec)));
        }
    }
    (lhs, rhs)
}

impl InequalityForm {
    /// Checks that `a` is long enough and, where required, decreasing on `1..=m`.
    pub fn admit(&self, a: &Sequence) -> Result<()> {
        let extent = self.shape.extent();
        if a.len() < extent {
            return Err(Error::InvalidRange { lo: 1, hi: extent, len: a.len() });
        }
        if self.requires_decreasing {
            let prefix = a.truncated(extent)?;
            if !is_nonneg_decreasing(&prefix) {
                return Err(Error::SequenceNotAdmissible(format!(
                    "{} is stated for non-negative decreasing sequences",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Weights as `f64`, for screening evaluations.
    pub fn weights_f64(&self) -> (Vec<f64>, Vec<f64>) {
        (self.outer_weight.to_f64_vec(), self.inner_weight.to_f64_vec())
    }
}

pub fn eval_form(form: &InequalityForm, a: &Sequence) -> Result<EvalResult> {
    form.admit(a)?;
    let (lhs, rhs0) = evaluate_sides(
        &form.shape,
        form.outer_weight.values(),
        form.inner_weight.values(),
        a.values(),
        &form.p,
        form.precision,
    );
    let exact = lhs.is_exact() && rhs0.is_exact();
    let ratio = Ratio::of(&lhs, &rhs0);
    Ok(EvalResult { lhs, rhs0, ratio, exact })
}

fn require_positive(c: &Real) -> Result<()> {
    if !c.is_positive() {
        return Err(Error::InvalidArgument(format!("constant must be positive, got {c}")));
    }
    Ok(())
}

/// Whether `lhs >= C rhs0` (GE) or `lhs <= C rhs0` (LE) holds for `a`.
///
/// Exact results are compared exactly; float results with [`DEFAULT_REL_TOL`].
/// A `0/0` instance holds for every constant.
pub fn check_holds(form: &InequalityForm, a: &Sequence, c: &Real) -> Result<bool> {
    require_positive(c)?;
    let r = eval_form(form, a)?;
    let bound = c * &r.rhs0;
    let tol = if r.exact { 0.0 } else { DEFAULT_REL_TOL };
    match form.relation {
        Relation::Ge => Ok(within_lower(&r.lhs, &bound, tol)),
        Relation::Le => Ok(within_upper(&r.lhs, &bound, tol)),
        Relation::Equiv => {
            Err(Error::InvalidArgument(format!("{} is a two-sided equivalence; use check_equivalence", form.id)))
        }
    }
}

/// Two-sided check `lower rhs0 <= lhs <= upper rhs0`.
pub fn check_equivalence(form: &InequalityForm, a: &Sequence, lower: &Real, upper: &Real) -> Result<bool> {
    require_positive(lower)?;
    require_positive(upper)?;
    let r = eval_form(form, a)?;
    let tol = if r.exact { 0.0 } else { DEFAULT_REL_TOL };
    Ok(within_lower(&r.lhs, &(lower * &r.rhs0), tol) && within_upper(&r.lhs, &(upper * &r.rhs0), tol))
}
