//! Explicit constants for the four general-weight forms, assembled from
//! per-step factors, and randomized validation of the resulting certificates.
//!
//! Notation: `lambda` has lacunary constants `(K1, K2)`, `gamma` has
//! `(G1, G2)`. For a monotone profile every value on a dyad `[2^j, 2^(j+1)]`
//! lies between `min(1, K1)` and `max(1, K2)` times the value at `2^j`; all
//! block factors below come from that observation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{
    check_holds, evaluate_sides, make_named_form, weight_len, FormId, FormSpec, InequalityForm, Relation, WeightSpec,
};
use crate::real::{Precision, Real};
use crate::sequence::{
    dyadic_doubling, geometric_constant, is_quasi_lacunary_monotone, sample_decreasing_f64, IncrementDist,
    Monotonicity, Sequence, SequenceProfile,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

/// Factor `c` with `c 2^j s_(2^j)` bounding the block sum `sum_{mu=2^j+1}^{2^(j+1)} s_mu`
/// from below (`min(1, K1)`) or above (`max(1, K2)`).
pub fn block_sum_factor(profile: &SequenceProfile, bound: Bound) -> Result<Real> {
    let (k1, k2) = profile.constants()?;
    let one = Real::one();
    Ok(match bound {
        Bound::Lower => Real::min_of(&one, k1),
        Bound::Upper => Real::max_of(&one, k2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFactors {
    pub lower: Real,
    pub upper: Real,
}

/// Lower and upper block factors for the inner weight `gamma`.
pub fn inner_block_factor(gamma: &SequenceProfile) -> Result<BlockFactors> {
    Ok(BlockFactors { lower: block_sum_factor(gamma, Bound::Lower)?, upper: block_sum_factor(gamma, Bound::Upper)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopTermMode {
    /// A sum of non-negative terms is at least its last term.
    LowerTrivial,
    /// `sum_{i<=j} 2^i lambda_(2^i) <= Kgeo 2^j lambda_(2^j)`.
    UpperGeo,
}

pub fn geometric_top_term_factor(kgeo: Option<&Real>, mode: TopTermMode) -> Result<Real> {
    match mode {
        TopTermMode::LowerTrivial => Ok(Real::one()),
        TopTermMode::UpperGeo => {
            let k = kgeo.ok_or_else(|| Error::BadK("the upper bound needs Kgeo".into()))?;
            if *k < Real::one() {
                return Err(Error::BadK(format!("Kgeo must be at least 1, got {k}")));
            }
            Ok(k.clone())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JensenDirection {
    /// `(sum x)^p >= sum x^p` for `p >= 1`.
    GePAtLeastOne,
    /// `(sum x)^p <= sum x^p` for `0 < p <= 1`.
    LePAtMostOne,
}

/// The power-sum comparison costs nothing; the factor is always 1 once `p`
/// is in range.
pub fn jensen_step_factor(p: &Real, direction: JensenDirection) -> Result<Real> {
    let one = Real::one();
    let ok = match direction {
        JensenDirection::GePAtLeastOne => *p >= one,
        JensenDirection::LePAtMostOne => p.is_positive() && *p <= one,
    };
    if !ok {
        return Err(Error::BadExponent(format!("p = {p} is outside the range for {direction:?}")));
    }
    Ok(one)
}

/// How the dyadic lower bound is matched against the right-hand side blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstitution {
    /// Tail GE form: the inner block sits two dyads above the outer anchor.
    TwoDyads,
    /// Head GE form: one dyad between inner anchor and outer anchor.
    OneDyadHead,
    /// LE forms: right-hand side dyad `(2^(j-1), 2^j]` bounds the term at `2^j`.
    OneDyadUpper,
}

/// Converts dyadic representatives `2^j lambda_(2^j) (2^j gamma_(2^j) a_(2^j))^p`
/// into right-hand side block sums.
///
/// With `hl = max(1, K2)`, `hg = max(1, G2)`:
/// two dyads `1 / (4 hl K2^2 (4 hg G2)^p)`, one dyad head `1 / (hl (4 hg G2)^p)`,
/// one dyad upper `2^(1+p) hl hg^p`.
pub fn block_reconstitution_factor(
    lambda: &SequenceProfile,
    gamma: &SequenceProfile,
    p: &Real,
    offset: Reconstitution,
    prec: Precision,
) -> Result<Real> {
    if !p.is_positive() {
        return Err(Error::BadExponent(format!("p must be positive, got {p}")));
    }
    let (_, k2) = lambda.constants()?;
    let (_, g2) = gamma.constants()?;
    let hl = block_sum_factor(lambda, Bound::Upper)?;
    let hg = block_sum_factor(gamma, Bound::Upper)?;
    let four = Real::int(4);
    Ok(match offset {
        Reconstitution::TwoDyads => {
            let gamma_part = (&four * &hg * g2).pow(p, prec);
            let denom = &four * &hl * &k2.powi(2) * &gamma_part;
            denom.recip()?
        }
        Reconstitution::OneDyadHead => {
            let gamma_part = (&four * &hg * g2).pow(p, prec);
            (&hl * &gamma_part).recip()?
        }
        Reconstitution::OneDyadUpper => Real::int(2).pow(&(p + &Real::one()), prec) * &hl * &hg.pow(p, prec),
    })
}

/// Bound on `sum_{k=j}^{M} 2^k lambda_(2^k)` by `K 2^j lambda_(2^j)` over the
/// profile's window: `1 / (1 - 2 K2)` when `2 K2 < 1`, and in any case the
/// finite geometric sum `sum_{t=0}^{nu_max-2} (2 K2)^t`.
pub fn tail_geometric_factor(lambda: &SequenceProfile) -> Result<Real> {
    let (_, k2) = lambda.constants()?;
    let q = Real::int(2) * k2;
    let window = lambda.dyadic_window();
    let mut finite = Real::zero();
    let mut term = Real::one();
    for _ in 0..window.saturating_sub(1).max(1) {
        finite += &term;
        term = &term * &q;
    }
    if q < Real::one() {
        let infinite = (Real::one() - &q).recip()?;
        return Ok(Real::min_of(&finite, &infinite));
    }
    Ok(finite)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateInputs {
    pub lambda: SequenceProfile,
    pub gamma: SequenceProfile,
    pub kgeo: Option<Real>,
    pub p: Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateStep {
    pub label: String,
    pub factor: Real,
    pub anchor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCertificate {
    pub id: FormId,
    pub inputs: CertificateInputs,
    pub steps: Vec<CertificateStep>,
    #[serde(rename = "C")]
    pub c: Real,
}

impl ConstantCertificate {
    pub fn product_of_steps(&self) -> Real {
        self.steps.iter().fold(Real::one(), |acc, s| acc * &s.factor)
    }
}

fn step(label: &str, factor: Real, anchor: &str) -> CertificateStep {
    CertificateStep { label: label.to_string(), factor, anchor: anchor.to_string() }
}

/// Assembles an admissible constant for a `T2_*` form from the weight profiles.
///
/// `Kgeo` is the quasi-geometric constant of `mu -> 2^mu lambda_(2^mu)`. It is
/// required for `T2_2` and `T2_4`, and ignored (not recorded) for `T2_1` and
/// `T2_3`.
pub fn derive_constant(
    id: FormId,
    lambda: &SequenceProfile,
    gamma: &SequenceProfile,
    kgeo: Option<&Real>,
    p: &Real,
    prec: Precision,
) -> Result<ConstantCertificate> {
    if !id.is_general() {
        return Err(Error::InvalidArgument(format!("certificates exist only for T2_1..T2_4, not {id}")));
    }
    let ge = id.relation() == Relation::Ge;
    let jensen_dir = if ge { JensenDirection::GePAtLeastOne } else { JensenDirection::LePAtMostOne };
    let jensen = jensen_step_factor(p, jensen_dir)?;
    lambda.constants()?;
    gamma.constants()?;
    let needs_kgeo = matches!(id, FormId::T2_2 | FormId::T2_4);
    let kgeo = if needs_kgeo {
        let k = kgeo.ok_or(Error::MissingKgeo(id))?;
        if *k < Real::one() {
            return Err(Error::BadK(format!("Kgeo must be at least 1, got {k}")));
        }
        Some(k.clone())
    } else {
        None
    };

    let inner = inner_block_factor(gamma)?;
    let steps = match id {
        FormId::T2_2 => vec![
            step(
                "outer_block_lower",
                block_sum_factor(lambda, Bound::Lower)?,
                "outer sum split into dyadic blocks [2^i, 2^(i+1)), i = N..M-2",
            ),
            step(
                "tail_top_term",
                geometric_top_term_factor(kgeo.as_ref(), TopTermMode::LowerTrivial)?,
                "tail from mu dominates the tail from 2^(i+1)",
            ),
            step(
                "inner_block_lower",
                inner.lower.pow(p, prec),
                "inner dyad [2^(i+1), 2^(i+2)) against 2^(i+1) gamma_(2^(i+1)), raised to p",
            ),
            step("jensen", jensen, "power of a sum vs sum of powers, p >= 1"),
            step(
                "reconstitution_two_dyads",
                block_reconstitution_factor(lambda, gamma, p, Reconstitution::TwoDyads, prec)?,
                "rhs dyad (2^k, 2^(k+1)] against the representative at i = k-2",
            ),
        ],
        FormId::T2_1 => vec![
            step(
                "outer_block_lower",
                block_sum_factor(lambda, Bound::Lower)?,
                "outer sum split into dyadic blocks [2^(i+1), 2^(i+2)), i = N..M-2",
            ),
            step(
                "head_dyad_lower",
                geometric_top_term_factor(None, TopTermMode::LowerTrivial)?,
                "head sum to mu dominates the dyad (2^i, 2^(i+1)]",
            ),
            step(
                "inner_block_lower",
                inner.lower.pow(p, prec),
                "inner dyad (2^i, 2^(i+1)] against 2^i gamma_(2^i), raised to p",
            ),
            step("jensen", jensen, "power of a sum vs sum of powers, p >= 1"),
            step(
                "reconstitution_one_dyad",
                block_reconstitution_factor(lambda, gamma, p, Reconstitution::OneDyadHead, prec)?,
                "rhs dyad (2^k, 2^(k+1)] against the representative at i = k-1",
            ),
            step(
                "top_block",
                Real::one(),
                "rhs block (2^M, m] bounded by the outer block [2^M, m] with the same factors",
            ),
        ],
        FormId::T2_4 | FormId::T2_3 => {
            let mut steps = vec![
                step(
                    "outer_block_upper",
                    block_sum_factor(lambda, Bound::Upper)?,
                    "outer sum split into dyadic blocks (2^k, 2^(k+1)], k = N+1..M",
                ),
                step("jensen", jensen, "power of a sum vs sum of powers, 0 < p <= 1"),
            ];
            if id == FormId::T2_4 {
                steps.push(step(
                    "geometric_sum_upper",
                    geometric_top_term_factor(kgeo.as_ref(), TopTermMode::UpperGeo)?,
                    "order of summation changed; sum_{k<=j} 2^k lambda_(2^k) <= Kgeo 2^j lambda_(2^j)",
                ));
            } else {
                steps.push(step(
                    "geometric_tail_upper",
                    tail_geometric_factor(lambda)?,
                    "order of summation changed; sum_{k>=j} 2^k lambda_(2^k) bounded through K2 over the window",
                ));
            }
            steps.push(step(
                "inner_block_upper",
                inner.upper.pow(p, prec),
                "inner dyad (2^j, 2^(j+1)] against 2^j gamma_(2^j), raised to p",
            ));
            steps.push(step(
                "reconstitution_one_dyad",
                block_reconstitution_factor(lambda, gamma, p, Reconstitution::OneDyadUpper, prec)?,
                "rhs dyad (2^(j-1), 2^j] against the representative at j",
            ));
            steps
        }
        _ => unreachable!("general forms only"),
    };
    let c = steps.iter().fold(Real::one(), |acc, s| acc * &s.factor);
    Ok(ConstantCertificate {
        id,
        inputs: CertificateInputs { lambda: lambda.clone(), gamma: gamma.clone(), kgeo, p: p.clone() },
        steps,
        c,
    })
}

/// Profiles of concrete weights over `1..=2^nu_max`, with `Kgeo` of the doubled
/// outer weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredWeights {
    pub lambda: SequenceProfile,
    pub gamma: SequenceProfile,
    pub kgeo: Real,
}

pub fn measure_weights(lambda: &Sequence, gamma: &Sequence, nu_max: u32) -> Result<MeasuredWeights> {
    let mut lp = is_quasi_lacunary_monotone(lambda, nu_max)?;
    let gp = is_quasi_lacunary_monotone(gamma, nu_max)?;
    let doubled = dyadic_doubling(lambda, nu_max)?;
    let kgeo = geometric_constant(&doubled, nu_max as usize)?;
    lp.kgeo = Some(kgeo.clone());
    Ok(MeasuredWeights { lambda: lp, gamma: gp, kgeo })
}

/// Draws a weight of length `2^nu_max` matching `profile`: dyadic ratios in
/// `[K1, K2]` (endpoints favored) and monotone values inside each dyad.
/// When `kgeo_cap` is given the doubled sequence must also respect it; returns
/// `None` if no such draw was found.
pub fn sample_profile_weight<R: Rng>(
    profile: &SequenceProfile,
    kgeo_cap: Option<f64>,
    rng: &mut R,
) -> Option<Vec<f64>> {
    let (k1, k2) = profile.constants().ok()?;
    let (k1, k2) = (k1.to_f64(), k2.to_f64());
    let nu_max = profile.dyadic_window();
    let len = 1usize << nu_max;
    for _ in 0..50 {
        let mut w = vec![0.0; len];
        w[0] = 1.0;
        for t in 0..nu_max {
            let r = match rng.gen_range(0..4) {
                0 => k1,
                1 => k2,
                _ => rng.gen_range(k1..=k2),
            };
            let lo = 1usize << t;
            let hi = lo << 1;
            let (left, right) = (w[lo - 1], w[lo - 1] * r);
            w[hi - 1] = right;
            let mode = rng.gen_range(0..3);
            let mut inside: Vec<f64> = (lo + 1..hi)
                .map(|_| match mode {
                    0 => left,
                    1 => right,
                    _ => left + (right - left) * rng.gen::<f64>(),
                })
                .collect();
            if right < left {
                inside.sort_by(|a, b| b.total_cmp(a));
            } else {
                inside.sort_by(|a, b| a.total_cmp(b));
            }
            w[lo..hi - 1].copy_from_slice(&inside);
        }
        match kgeo_cap {
            None => return Some(w),
            Some(cap) => {
                let mut partial = 0.0;
                let mut worst: f64 = 0.0;
                for mu in 1..=nu_max {
                    let term = (1u64 << mu) as f64 * w[(1usize << mu) - 1];
                    partial += term;
                    worst = worst.max(partial / term);
                }
                if worst <= cap * (1.0 - 1e-12) {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// Concrete weights used on a share of validation trials.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessWeights {
    pub lambda: Sequence,
    pub gamma: Sequence,
}

#[derive(Clone, Debug)]
pub struct ValidationConfig {
    pub trials: usize,
    pub seed: u64,
    /// `(n, m)` pairs; each trial picks one uniformly.
    pub sizes: Vec<(usize, usize)>,
    pub witness: Option<WitnessWeights>,
    pub precision: Precision,
}

impl ValidationConfig {
    /// Default sizes: `(1,16), (2,32), (4,64)` for GE forms and
    /// `(1,4), (2,8), (4,16)` for LE forms.
    pub fn new(id: FormId, trials: usize, seed: u64) -> Self {
        let sizes =
            if id.relation() == Relation::Ge { vec![(1, 16), (2, 32), (4, 64)] } else { vec![(1, 4), (2, 8), (4, 16)] };
        ValidationConfig { trials, seed, sizes, witness: None, precision: Precision::default() }
    }

    pub fn with_witness(mut self, witness: WitnessWeights) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_sizes(mut self, sizes: Vec<(usize, usize)>) -> Self {
        self.sizes = sizes;
        self
    }
}

/// A trial that violated the certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub ratio_over_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    /// Trials with `lhs = rhs0 = 0`, counted as passes.
    pub vacuous_count: usize,
    /// Trials whose random weights could not be drawn under the `Kgeo` cap.
    pub skipped_count: usize,
    /// Over trials with `rhs0 > 0`; `None` when there were none.
    pub min_ratio_over_c: Option<f64>,
    pub max_ratio_over_c: Option<f64>,
    pub first_failure: Option<Counterexample>,
}

#[derive(Clone, Debug)]
struct TrialOutcome {
    pass: bool,
    vacuous: bool,
    skipped: bool,
    ratio_over_c: Option<f64>,
    failure: Option<Counterexample>,
}

struct SizeContext {
    n: usize,
    m: usize,
    form: InequalityForm,
}

/// Runs `check_holds` on random admissible instances: decreasing `a` (random
/// increments, step sequences, occasionally zero) with weights alternating
/// between the witness and random draws matching the certificate's profiles.
///
/// Screening is done in `f64`; instances within `1e-9` of the bound are
/// re-checked in exact or high-precision arithmetic.
pub fn validate_certificate(cert: &ConstantCertificate, config: &ValidationConfig) -> Result<ValidationReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let window = cert.inputs.lambda.dyadic_window().min(cert.inputs.gamma.dyadic_window());
    let wlen = 1usize << window;
    let mut contexts = Vec::with_capacity(config.sizes.len());
    for &(n, m) in &config.sizes {
        if weight_len(m) > wlen {
            return Err(Error::InvalidArgument(format!(
                "size m = {m} needs weights through {} but the profiles cover 1..={wlen}",
                weight_len(m)
            )));
        }
        let spec = FormSpec::new(cert.id, cert.inputs.p.clone(), n, m).weights(WeightSpec::Unit);
        let form = make_named_form(&spec, config.precision)?;
        contexts.push(SizeContext { n, m, form });
    }
    if contexts.is_empty() {
        return Err(Error::InvalidArgument("no sizes to validate".into()));
    }
    if let Some(w) = &config.witness {
        if w.lambda.len() < wlen || w.gamma.len() < wlen {
            return Err(Error::InvalidArgument(format!("witness weights must cover 1..={wlen}")));
        }
    }
    let witness_f64 = config.witness.as_ref().map(|w| (w.lambda.to_f64_vec(), w.gamma.to_f64_vec()));
    let kgeo_cap = cert.inputs.kgeo.as_ref().map(Real::to_f64);

    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            run_trial(cert, config, &contexts, witness_f64.as_ref(), kgeo_cap, &mut rng)
        })
        .collect();

    let mut report = ValidationReport {
        trials: config.trials,
        pass_count: 0,
        fail_count: 0,
        vacuous_count: 0,
        skipped_count: 0,
        min_ratio_over_c: None,
        max_ratio_over_c: None,
        first_failure: None,
    };
    for o in outcomes {
        if o.skipped {
            report.skipped_count += 1;
            continue;
        }
        if o.pass {
            report.pass_count += 1;
        } else {
            report.fail_count += 1;
            if report.first_failure.is_none() {
                report.first_failure = o.failure;
            }
        }
        if o.vacuous {
            report.vacuous_count += 1;
        }
        if let Some(r) = o.ratio_over_c {
            report.min_ratio_over_c = Some(report.min_ratio_over_c.map_or(r, |x| x.min(r)));
            report.max_ratio_over_c = Some(report.max_ratio_over_c.map_or(r, |x| x.max(r)));
        }
    }
    Ok(report)
}

const DISTS: [IncrementDist; 4] = [
    IncrementDist::Uniform { max: 100 },
    IncrementDist::Uniform { max: 1 },
    IncrementDist::Sparse { max: 1000, density: 0.1 },
    IncrementDist::Sparse { max: 1_000_000, density: 0.03 },
];

fn sample_a<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    match rng.gen_range(0..100) {
        0..=1 => vec![0.0; m],
        2..=9 => {
            let k = rng.gen_range(1..=m);
            (1..=m).map(|nu| if nu <= k { 1.0 } else { 0.0 }).collect()
        }
        _ => {
            let dist = *DISTS.choose(rng).expect("non-empty");
            loop {
                let a = sample_decreasing_f64(m, dist, rng);
                if a[0] > 0.0 {
                    return a;
                }
            }
        }
    }
}

fn run_trial<R: Rng>(
    cert: &ConstantCertificate,
    config: &ValidationConfig,
    contexts: &[SizeContext],
    witness: Option<&(Vec<f64>, Vec<f64>)>,
    kgeo_cap: Option<f64>,
    rng: &mut R,
) -> TrialOutcome {
    let ctx = &contexts[rng.gen_range(0..contexts.len())];
    let a = sample_a(ctx.m, rng);
    let use_witness = witness.is_some() && rng.gen_bool(0.5);
    let weights = match witness {
        Some((l, g)) if use_witness => Some((l.clone(), g.clone())),
        _ => {
            let lambda = sample_profile_weight(&cert.inputs.lambda, kgeo_cap, rng);
            let gamma = sample_profile_weight(&cert.inputs.gamma, None, rng);
            match (lambda, gamma) {
                (Some(l), Some(g)) => Some((l, g)),
                _ => witness.cloned(),
            }
        }
    };
    let Some((lambda, gamma)) = weights else {
        return TrialOutcome { pass: true, vacuous: false, skipped: true, ratio_over_c: None, failure: None };
    };

    let p = &cert.inputs.p;
    let c = cert.c.to_f64();
    let (lhs, rhs) = evaluate_sides(&ctx.form.shape, &lambda, &gamma, &a, p, config.precision);
    if lhs == 0.0 && rhs == 0.0 {
        return TrialOutcome { pass: true, vacuous: true, skipped: false, ratio_over_c: None, failure: None };
    }
    let bound = c * rhs;
    let ge = cert.id.relation() == Relation::Ge;
    let screen_margin = 1e-9 * lhs.abs().max(bound.abs());
    let clear = if ge { lhs - bound > screen_margin } else { bound - lhs > screen_margin };
    let pass = clear || recheck(ctx, &lambda, &gamma, &a, &cert.c, config.precision);
    let ratio_over_c = (rhs > 0.0).then(|| lhs / bound);
    let failure = (!pass).then(|| Counterexample {
        n: ctx.n,
        m: ctx.m,
        a: a.clone(),
        lambda: lambda[..ctx.m].to_vec(),
        gamma: gamma[..ctx.m].to_vec(),
        ratio_over_c: ratio_over_c.unwrap_or(f64::INFINITY),
    });
    TrialOutcome { pass, vacuous: false, skipped: false, ratio_over_c, failure }
}

fn recheck(ctx: &SizeContext, lambda: &[f64], gamma: &[f64], a: &[f64], c: &Real, prec: Precision) -> bool {
    let exact = |v: &[f64]| Sequence::from_f64_exact(v).expect("finite non-negative samples");
    let mut form = ctx.form.clone();
    form.outer_weight = exact(lambda);
    form.inner_weight = exact(gamma);
    form.precision = prec;
    check_holds(&form, &exact(a), c).unwrap_or(false)
}

/// The profile of a sequence that is a pure power `mu^e`, as used by the
/// default weights of the named forms.
pub fn power_weight_profile(e: &Real, nu_max: u32, prec: Precision) -> Result<MeasuredWeights> {
    let len = 1usize << nu_max;
    let w = crate::sequence::power_sequence(e, len, prec);
    measure_weights(&w, &Sequence::ones(len), nu_max)
}

/// Direction implied by a lacunary pair, for profiles built from `(K1, K2)`.
pub fn direction_of(k1: &Real, k2: &Real) -> Monotonicity {
    let one = Real::one();
    if *k2 <= one {
        Monotonicity::Decreasing
    } else if *k1 >= one {
        Monotonicity::Increasing
    } else {
        Monotonicity::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::default()
    }

    fn unit7() -> SequenceProfile {
        SequenceProfile::unit(7)
    }

    #[test]
    fn trivial_step_factors() {
        assert_eq!(block_sum_factor(&unit7(), Bound::Lower).unwrap(), Real::one());
        let inc = SequenceProfile::lacunary(Monotonicity::Increasing, Real::one(), Real::one(), 4).unwrap();
        assert_eq!(block_sum_factor(&inc, Bound::Lower).unwrap(), Real::one());
        let dec = SequenceProfile::lacunary(Monotonicity::Decreasing, Real::ratio(1, 2), Real::ratio(1, 2), 4).unwrap();
        assert_eq!(block_sum_factor(&dec, Bound::Lower).unwrap(), Real::ratio(1, 2));
        let lin = SequenceProfile::lacunary(Monotonicity::Increasing, Real::int(2), Real::int(2), 4).unwrap();
        let f = inner_block_factor(&lin).unwrap();
        assert_eq!((f.lower, f.upper), (Real::one(), Real::int(2)));

        assert_eq!(geometric_top_term_factor(None, TopTermMode::LowerTrivial).unwrap(), Real::one());
        assert_eq!(geometric_top_term_factor(Some(&Real::int(2)), TopTermMode::UpperGeo).unwrap(), Real::int(2));
        assert!(matches!(
            geometric_top_term_factor(Some(&Real::ratio(1, 2)), TopTermMode::UpperGeo),
            Err(Error::BadK(_))
        ));
        assert_eq!(jensen_step_factor(&Real::one(), JensenDirection::GePAtLeastOne).unwrap(), Real::one());
        assert!(jensen_step_factor(&Real::ratio(1, 2), JensenDirection::GePAtLeastOne).is_err());
        assert!(jensen_step_factor(&Real::int(2), JensenDirection::LePAtMostOne).is_err());
    }

    #[test]
    fn incomplete_profile_is_rejected() {
        let mut broken = unit7();
        broken.k2 = None;
        assert!(matches!(block_sum_factor(&broken, Bound::Upper), Err(Error::ProfileIncomplete(_))));
        broken = unit7();
        broken.direction = Monotonicity::Neither;
        assert!(matches!(inner_block_factor(&broken), Err(Error::ProfileIncomplete(_))));
    }

    #[test]
    fn reconstitution_is_power_of_two_for_unit_profiles() {
        let u = unit7();
        let one = Real::one();
        let f = |o| block_reconstitution_factor(&u, &u, &one, o, prec()).unwrap();
        assert_eq!(f(Reconstitution::TwoDyads), Real::ratio(1, 16));
        assert_eq!(f(Reconstitution::OneDyadHead), Real::ratio(1, 4));
        assert_eq!(f(Reconstitution::OneDyadUpper), Real::int(4));
    }

    #[test]
    fn unit_certificates() {
        let u = unit7();
        let two = Real::int(2);
        let one = Real::one();
        let c22 = derive_constant(FormId::T2_2, &u, &u, Some(&two), &one, prec()).unwrap();
        assert_eq!(c22.c, Real::ratio(1, 16));
        assert!(c22.c <= Real::ratio(34, 27));
        assert_eq!(c22.c, c22.product_of_steps());

        let c21 = derive_constant(FormId::T2_1, &u, &u, Some(&two), &one, prec()).unwrap();
        assert_eq!(c21.c, Real::ratio(1, 4));
        assert!(c21.inputs.kgeo.is_none());
        assert!(c21.steps.iter().all(|s| !s.label.starts_with("geometric")));

        let c24 = derive_constant(FormId::T2_4, &u, &u, Some(&two), &one, prec()).unwrap();
        assert_eq!(c24.c, Real::int(8));

        // window 2^7: sum_{t=0}^{5} 2^t = 63
        let c23 = derive_constant(FormId::T2_3, &u, &u, None, &one, prec()).unwrap();
        assert_eq!(c23.c, Real::int(4 * 63));
    }

    #[test]
    fn derive_errors() {
        let u = unit7();
        assert!(matches!(
            derive_constant(FormId::T2_2, &u, &u, Some(&Real::int(2)), &Real::ratio(1, 2), prec()),
            Err(Error::BadExponent(_))
        ));
        assert!(matches!(
            derive_constant(FormId::T2_2, &u, &u, None, &Real::one(), prec()),
            Err(Error::MissingKgeo(FormId::T2_2))
        ));
        assert!(matches!(
            derive_constant(FormId::T2_4, &u, &u, None, &Real::one(), prec()),
            Err(Error::MissingKgeo(FormId::T2_4))
        ));
        assert!(derive_constant(FormId::T5_1a, &u, &u, None, &Real::one(), prec()).is_err());
    }

    #[test]
    fn certificate_json_shape() {
        let u = unit7();
        let cert = derive_constant(FormId::T2_2, &u, &u, Some(&Real::int(2)), &Real::one(), prec()).unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        assert_eq!(v["id"], "T2_2");
        assert_eq!(v["C"], "1/16");
        assert!(v["steps"][0]["label"].is_string() && v["steps"][0]["anchor"].is_string());
        let back: ConstantCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn tail_factor_closed_form_when_summable() {
        // mu^(-2): K2 = 1/4, so 2 K2 = 1/2; the window sum 1 + ... + 2^-5 beats 2.
        let m = power_weight_profile(&Real::int(-2), 7, prec()).unwrap();
        assert_eq!(tail_geometric_factor(&m.lambda).unwrap(), Real::ratio(63, 32));
        let long =
            SequenceProfile::lacunary(Monotonicity::Decreasing, Real::ratio(1, 4), Real::ratio(1, 4), 60).unwrap();
        assert_eq!(tail_geometric_factor(&long).unwrap(), Real::int(2) - Real::ratio(1, 1 << 58));
    }

    #[test]
    fn sampled_weights_match_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dec = SequenceProfile::lacunary(Monotonicity::Decreasing, Real::ratio(1, 3), Real::ratio(3, 4), 6).unwrap();
        for _ in 0..200 {
            let w = sample_profile_weight(&dec, None, &mut rng).unwrap();
            assert!(w.windows(2).all(|p| p[1] <= p[0]));
            for v in 0..6 {
                let r = w[(2 << v) - 1] / w[(1 << v) - 1];
                assert!((1.0 / 3.0 - 1e-12..=0.75 + 1e-12).contains(&r));
            }
        }
    }

    #[test]
    fn validation_of_unit_certificate_passes_and_inflated_fails() {
        let u = unit7();
        let w = WitnessWeights { lambda: Sequence::ones(128), gamma: Sequence::ones(128) };
        let cert = derive_constant(FormId::T2_2, &u, &u, Some(&Real::int(2)), &Real::one(), prec()).unwrap();
        let cfg = ValidationConfig::new(FormId::T2_2, 300, 1).with_witness(w.clone());
        let r = validate_certificate(&cert, &cfg).unwrap();
        assert_eq!(r.pass_count, 300);
        assert!(r.min_ratio_over_c.unwrap() >= 1.0);

        let mut inflated = cert.clone();
        inflated.c = Real::ratio(34, 27) * Real::int(10);
        let r = validate_certificate(&inflated, &cfg).unwrap();
        assert!(r.fail_count > 0);
        assert!(r.first_failure.is_some());
    }
}
