//! Sharp-constant estimation over the cone of non-negative decreasing sequences.
//!
//! At `p = 1` both sides are linear in `a`, so the optimum over the cone is
//! attained on a step sequence and [`exact_best_constant_p1`] is exact. For
//! other `p` the heuristic [`search_best_constant`] only gives one-sided
//! bounds, and [`grid_bruteforce`] is the small-scale oracle.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{
    eval_form, evaluate_sides, make_named_form, FormId, FormSpec, InequalityForm, Ratio, Relation, WeightSpec,
};
use crate::real::{Precision, Real};
use crate::sequence::{power_sequence, sample_decreasing_f64, IncrementDist, Sequence};

/// Largest number of grid sequences [`grid_bruteforce`] will enumerate.
pub const GRID_LIMIT: u128 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    StepExactP1,
    GridBruteforce,
    CoordinateDescent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Infimum estimate for GE forms, supremum estimate for LE forms.
    pub best_ratio: Ratio,
    /// Normalized so the first index of the right-hand side range equals 1.
    pub argext: Sequence,
    pub method: SearchMethod,
    pub iterations: usize,
    pub converged: bool,
}

/// `1` on `1..=k`, `0` on `k+1..=len`.
pub fn step_sequence(k: usize, len: usize) -> Result<Sequence> {
    if k == 0 || k > len {
        return Err(Error::InvalidRange { lo: 1, hi: k, len });
    }
    Ok(Sequence::from_ints(&(1..=len).map(|nu| i64::from(nu <= k)).collect::<Vec<_>>()).expect("0/1 values"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayOptimum {
    pub c_star: Ratio,
    pub k_star: usize,
}

fn objective(form: &InequalityForm) -> Result<Relation> {
    match form.relation {
        Relation::Equiv => Err(Error::InvalidArgument(format!(
            "{} is two-sided; there is no single sharp constant to search for",
            form.id
        ))),
        r => Ok(r),
    }
}

/// `true` when `candidate` strictly beats `best` for the relation.
fn improves(relation: Relation, candidate: &Ratio, best: &Ratio) -> bool {
    match (candidate, best) {
        (Ratio::Indeterminate, _) => false,
        (_, Ratio::Indeterminate) => true,
        (Ratio::Finite(c), Ratio::Finite(b)) => match relation {
            Relation::Ge => c < b,
            _ => c > b,
        },
        (Ratio::Infinite, Ratio::Infinite) => false,
        (Ratio::Infinite, _) => relation == Relation::Le,
        (_, Ratio::Infinite) => relation == Relation::Ge,
    }
}

/// Sharp constant at `p = 1` by enumerating all step sequences; ties go to the
/// smallest `k`. Rays with `rhs0 = 0` are ignored, except that an LE ray with
/// `rhs0 = 0 < lhs` makes the constant infinite.
pub fn exact_best_constant_p1(form: &InequalityForm) -> Result<RayOptimum> {
    if form.p != Real::one() {
        return Err(Error::BadExponent(format!("ray enumeration is exact only for p = 1, got {}", form.p)));
    }
    let relation = objective(form)?;
    let len = form.shape.extent();
    let mut best: Option<RayOptimum> = None;
    for k in 1..=len {
        let r = eval_form(form, &step_sequence(k, len)?)?;
        let ratio = match r.ratio {
            Ratio::Infinite if relation == Relation::Le => Ratio::Infinite,
            Ratio::Finite(q) => Ratio::Finite(q),
            _ => continue,
        };
        if best.as_ref().is_none_or(|b| improves(relation, &ratio, &b.c_star)) {
            best = Some(RayOptimum { c_star: ratio, k_star: k });
        }
    }
    best.ok_or(Error::NoAdmissibleRay)
}

/// [`exact_best_constant_p1`] packaged as a [`SearchResult`].
pub fn ray_search(form: &InequalityForm) -> Result<SearchResult> {
    let opt = exact_best_constant_p1(form)?;
    let len = form.shape.extent();
    Ok(SearchResult {
        best_ratio: opt.c_star,
        argext: step_sequence(opt.k_star, len)?,
        method: SearchMethod::StepExactP1,
        iterations: len,
        converged: true,
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Lower is better; `-inf` marks an unbounded LE instance.
fn score(relation: Relation, lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        let r = lhs / rhs;
        if relation == Relation::Ge {
            r
        } else {
            -r
        }
    } else if relation == Relation::Le && lhs > 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Exhaustive enumeration of decreasing sequences with entries in
/// `{0, 1/g, ..., 1}` over the form's extent. Screening is in `f64`;
/// near-optimal candidates are re-evaluated exactly.
pub fn grid_bruteforce(form: &InequalityForm, grid_levels: u32) -> Result<SearchResult> {
    let relation = objective(form)?;
    if grid_levels == 0 {
        return Err(Error::InvalidArgument("grid_levels must be at least 1".into()));
    }
    let len = form.shape.extent();
    let size = binomial(len as u128 + grid_levels as u128, grid_levels as u128);
    if size > GRID_LIMIT {
        return Err(Error::TooLarge { size, limit: GRID_LIMIT });
    }
    let (lambda, gamma) = form.weights_f64();
    let mut scored: Vec<(f64, usize, Vec<u32>)> = Vec::new();
    let mut levels = vec![0u32; len];
    let mut index = 0usize;
    enumerate_grid(&mut levels, 0, grid_levels, &mut |lv| {
        let a: Vec<f64> = lv.iter().map(|&x| f64::from(x)).collect();
        let (l, r) = evaluate_sides(&form.shape, &lambda, &gamma, &a, &form.p, form.precision);
        let s = score(relation, l, r);
        if s.is_finite() || s == f64::NEG_INFINITY {
            scored.push((s, index, lv.to_vec()));
        }
        index += 1;
    });
    if scored.is_empty() {
        return Err(Error::NoAdmissibleRay);
    }
    let best_f = scored.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let tol = if best_f.is_finite() { 1e-9 * best_f.abs().max(1e-300) } else { 0.0 };
    let mut candidates: Vec<&(f64, usize, Vec<u32>)> =
        scored.iter().filter(|c| c.0 == best_f || c.0 <= best_f + tol).collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    candidates.truncate(512);
    candidates.sort_by_key(|c| c.1);

    let mut best: Option<(Ratio, Sequence)> = None;
    for (_, _, lv) in candidates {
        let a = Sequence::from_ints(&lv.iter().map(|&x| i64::from(x)).collect::<Vec<_>>())?;
        let r = eval_form(form, &a)?;
        let ratio = match r.ratio {
            Ratio::Indeterminate => continue,
            Ratio::Infinite if relation == Relation::Ge => continue,
            other => other,
        };
        if best.as_ref().is_none_or(|(b, _)| improves(relation, &ratio, b)) {
            best = Some((ratio, a));
        }
    }
    let (best_ratio, a) = best.ok_or(Error::NoAdmissibleRay)?;
    Ok(SearchResult {
        best_ratio,
        argext: normalize(form, &a)?,
        method: SearchMethod::GridBruteforce,
        iterations: index,
        converged: true,
    })
}

fn enumerate_grid(levels: &mut Vec<u32>, pos: usize, cap: u32, visit: &mut dyn FnMut(&[u32])) {
    if pos == levels.len() {
        visit(levels);
        return;
    }
    let upper = if pos == 0 { cap } else { levels[pos - 1].min(cap) };
    for v in 0..=upper {
        levels[pos] = v;
        enumerate_grid(levels, pos + 1, cap, visit);
    }
}

/// Scales `a` so that its entry at the start of the right-hand side range is 1
/// (or its first entry, when that one vanishes).
fn normalize(form: &InequalityForm, a: &Sequence) -> Result<Sequence> {
    let pivot = a.at(form.shape.rhs.lo.min(a.len()));
    let pivot = if pivot.is_positive() { pivot.clone() } else { a.at(1).clone() };
    if !pivot.is_positive() {
        return Ok(a.clone());
    }
    a.scaled(&pivot.recip()?)
}

#[derive(Clone, Debug)]
struct Descent {
    score: f64,
    a: Vec<f64>,
    sweeps: usize,
    converged: bool,
}

struct Objective<'a> {
    form: &'a InequalityForm,
    relation: Relation,
    lambda: Vec<f64>,
    gamma: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&self, a: &[f64]) -> f64 {
        let (l, r) = evaluate_sides(&self.form.shape, &self.lambda, &self.gamma, a, &self.form.p, self.form.precision);
        score(self.relation, l, r)
    }
}

/// Value of coordinate `nu` obtained by setting the increment `d_nu` to `x`.
fn with_increment(a: &[f64], d: &[f64], nu: usize, x: f64) -> Vec<f64> {
    let delta = x - d[nu];
    a.iter().enumerate().map(|(i, &v)| if i <= nu { v + delta } else { v }).collect()
}

fn increments(a: &[f64]) -> Vec<f64> {
    (0..a.len()).map(|i| (a[i] - a.get(i + 1).copied().unwrap_or(0.0)).max(0.0)).collect()
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn descend(obj: &Objective<'_>, start: Vec<f64>, budget: usize) -> Descent {
    let mut a = start;
    let mut best = obj.eval(&a);
    let mut sweeps = 0;
    let mut converged = false;
    let len = a.len();
    while sweeps < budget && best != f64::NEG_INFINITY {
        sweeps += 1;
        let before = best;
        for nu in 0..len {
            let d = increments(&a);
            let scale = a[0].max(f64::MIN_POSITIVE);
            let at = |u: f64| -> Vec<f64> {
                if u >= 1.0 {
                    (0..len).map(|i| if i <= nu { 1.0 } else { 0.0 }).collect()
                } else {
                    with_increment(&a, &d, nu, scale * u / (1.0 - u))
                }
            };
            let mut best_u = None;
            let mut best_local = best;
            for step in 0..=10 {
                let u = f64::from(step) / 10.0;
                let s = obj.eval(&at(u));
                if s < best_local {
                    best_local = s;
                    best_u = Some(u);
                }
            }
            if let Some(u0) = best_u.filter(|&u| u < 1.0) {
                let (mut lo, mut hi) = ((u0 - 0.1).max(0.0), (u0 + 0.1).min(1.0 - 1e-12));
                for _ in 0..40 {
                    let x1 = hi - GOLDEN * (hi - lo);
                    let x2 = lo + GOLDEN * (hi - lo);
                    if obj.eval(&at(x1)) <= obj.eval(&at(x2)) {
                        hi = x2;
                    } else {
                        lo = x1;
                    }
                }
                let mid = 0.5 * (lo + hi);
                let s = obj.eval(&at(mid));
                if s < best_local {
                    best_local = s;
                    best_u = Some(mid);
                }
            }
            if let Some(u) = best_u {
                if best_local < best - 1e-15 * best.abs() {
                    a = at(u);
                    best = best_local;
                }
            }
        }
        if best >= before {
            converged = true;
            break;
        }
    }
    Descent { score: best, a, sweeps, converged }
}

/// Coordinate descent on the increments `d_nu = a_nu - a_(nu+1) >= 0`.
///
/// Restart 0 starts from the all-ones sequence, the others from random
/// decreasing sequences. `budget` is the number of sweeps per restart. Each
/// coordinate is scanned on `d = R u / (1 - u)` for `u` in `{0, 0.1, ..., 1}`
/// (with `u = 1` the pure step sequence ending at that coordinate) and then
/// refined by golden-section search. The returned ratio is re-evaluated on the
/// normalized exact `argext`, so it is attained by a feasible sequence.
pub fn search_best_constant(form: &InequalityForm, budget: usize, restarts: usize, seed: u64) -> Result<SearchResult> {
    let relation = objective(form)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let len = form.shape.extent();
    let (lambda, gamma) = form.weights_f64();
    let obj = Objective { form, relation, lambda, gamma };
    const DISTS: [IncrementDist; 3] = [
        IncrementDist::Uniform { max: 100 },
        IncrementDist::Sparse { max: 1000, density: 0.2 },
        IncrementDist::Sparse { max: 1_000_000, density: 0.05 },
    ];
    let runs: Vec<Descent> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                vec![1.0; len]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let dist = DISTS[rng.gen_range(0..DISTS.len())];
                let mut a = sample_decreasing_f64(len, dist, &mut rng);
                if a[0] == 0.0 {
                    a = vec![1.0; len];
                }
                a
            };
            descend(&obj, start, budget)
        })
        .collect();
    let winner =
        runs.into_iter().reduce(|best, next| if next.score < best.score { next } else { best }).expect("restarts >= 1");

    let exact = Sequence::from_f64_exact(&winner.a)?;
    let argext = normalize(form, &exact)?;
    let best_ratio = eval_form(form, &argext)?.ratio;
    Ok(SearchResult {
        best_ratio,
        argext,
        method: SearchMethod::CoordinateDescent,
        iterations: winner.sweeps,
        converged: winner.converged,
    })
}

/// How a sweep row chooses `a` when it evaluates a fixed sequence instead of
/// searching.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SequenceRule {
    Ones,
    /// `a_nu = 1 / nu`
    Harmonic,
    /// `a_nu = nu^exponent`
    Power {
        exponent: Real,
    },
}

impl SequenceRule {
    pub fn generate(&self, len: usize, prec: Precision) -> Sequence {
        match self {
            SequenceRule::Ones => Sequence::ones(len),
            SequenceRule::Harmonic => power_sequence(&Real::int(-1), len, prec),
            SequenceRule::Power { exponent } => power_sequence(exponent, len, prec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub id: FormId,
    pub n_values: Vec<usize>,
    /// `m = multiple * n`.
    pub multiple: usize,
    pub p: Real,
    #[serde(default = "Real::one")]
    pub alpha: Real,
    #[serde(default = "Real::zero")]
    pub lambda_exp: Real,
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default)]
    pub fixed: Option<SequenceRule>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_weights() -> WeightSpec {
    WeightSpec::Power
}

fn default_budget() -> usize {
    20
}

fn default_restarts() -> usize {
    4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowMethod {
    Fixed,
    StepExactP1,
    CoordinateDescent,
    Skipped,
}

impl RowMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RowMethod::Fixed => "fixed",
            RowMethod::StepExactP1 => "step_exact_p1",
            RowMethod::CoordinateDescent => "coordinate_descent",
            RowMethod::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub p: Real,
    pub alpha: Real,
    pub lambda_exp: Real,
    pub empirical_c: Option<Ratio>,
    pub method: RowMethod,
    pub exact: bool,
    /// Why the row was skipped.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

fn starts_at_one(id: FormId) -> bool {
    matches!(id, FormId::C5_1a | FormId::C5_1b | FormId::C5_2a | FormId::C5_2b)
}

fn sweep_row(spec: &SweepSpec, n: usize, prec: Precision) -> SweepRow {
    let m = spec.multiple * n;
    let mut row = SweepRow {
        n,
        m,
        p: spec.p.clone(),
        alpha: spec.alpha.clone(),
        lambda_exp: spec.lambda_exp.clone(),
        empirical_c: None,
        method: RowMethod::Skipped,
        exact: false,
        note: None,
    };
    let form_n = if starts_at_one(spec.id) { 1 } else { n };
    let outcome = (|| -> Result<(Ratio, RowMethod, bool)> {
        let fs = FormSpec::new(spec.id, spec.p.clone(), form_n, m)
            .alpha(spec.alpha.clone())
            .lambda_exp(spec.lambda_exp.clone())
            .weights(spec.weights.clone());
        let form = make_named_form(&fs, prec)?;
        if let Some(rule) = &spec.fixed {
            let r = eval_form(&form, &rule.generate(form.shape.extent(), prec))?;
            return Ok((r.ratio, RowMethod::Fixed, r.exact));
        }
        if form.p == Real::one() {
            let opt = exact_best_constant_p1(&form)?;
            let exact = opt.c_star.finite().is_none_or(Real::is_exact);
            return Ok((opt.c_star, RowMethod::StepExactP1, exact));
        }
        let r = search_best_constant(&form, spec.budget, spec.restarts, spec.seed)?;
        Ok((r.best_ratio, RowMethod::CoordinateDescent, false))
    })();
    match outcome {
        Ok((ratio, method, exact)) => {
            row.empirical_c = Some(ratio);
            row.method = method;
            row.exact = exact;
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// One row per `n`, in input order. Rows whose form cannot be built or
/// evaluated are kept with method `skipped` and a note.
pub fn sweep(spec: &SweepSpec, prec: Precision) -> Vec<SweepRow> {
    spec.n_values.par_iter().map(|&n| sweep_row(spec, n, prec)).collect()
}

pub const SWEEP_CSV_HEADER: &str = "n,m,p,alpha,lambda_exp,empirical_C,method,exact";

/// Significant digits for decimal columns in the CSV output.
pub const CSV_DIGITS: u32 = 20;

/// CSV rendering with decimal strings; exact values are available as `p/q`
/// through the JSON form of the rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let c = match &r.empirical_c {
            Some(Ratio::Finite(x)) => x.to_decimal(CSV_DIGITS),
            Some(other) => other.to_string(),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.m,
            r.p.to_decimal(CSV_DIGITS),
            r.alpha.to_decimal(CSV_DIGITS),
            r.lambda_exp.to_decimal(CSV_DIGITS),
            c,
            r.method.as_str(),
            r.exact
        );
    }
    out
}
