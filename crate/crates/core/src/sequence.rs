//! Finite 1-indexed non-negative sequences and the quasi-monotone classes.
//!
//! Class membership is always window-relative: a finite prefix cannot certify
//! a condition on an infinite sequence, so every minimal constant is computed
//! over an explicit index window that is recorded alongside it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{Precision, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// A finite non-negative sequence `s_1, ..., s_L` with a uniform arithmetic mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    values: Vec<Real>,
    mode: Mode,
}

impl Sequence {
    /// Builds a sequence, promoting every entry to float when any entry is a float.
    pub fn new(values: Vec<Real>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("a sequence needs at least one entry".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::InvalidArgument(format!("entry {} is negative ({v})", i + 1)));
        }
        if values.iter().all(Real::is_exact) {
            return Ok(Sequence { values, mode: Mode::Exact });
        }
        let bits = values
            .iter()
            .filter_map(|v| match v {
                Real::Float(f) => Some(f.prec()),
                Real::Exact(_) => None,
            })
            .max()
            .unwrap_or_else(|| Precision::default().bits());
        let values = values
            .into_iter()
            .map(|v| match v {
                Real::Exact(q) => Real::Float(rug::Float::with_val(bits, q)),
                f => f,
            })
            .collect();
        Ok(Sequence { values, mode: Mode::Float })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Sequence::new(values.iter().map(|&v| Real::int(v)).collect())
    }

    /// Exact sequence holding the binary expansions of `values`.
    pub fn from_f64_exact(values: &[f64]) -> Result<Self> {
        let reals = values
            .iter()
            .map(|&x| Real::from_f64_exact(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite"))))
            .collect::<Result<Vec<_>>>()?;
        Sequence::new(reals)
    }

    pub fn constant(value: Real, len: usize) -> Result<Self> {
        Sequence::new(vec![value; len])
    }

    pub fn ones(len: usize) -> Self {
        Sequence::constant(Real::one(), len.max(1)).expect("ones are non-negative")
    }

    pub fn zeros(len: usize) -> Self {
        Sequence::constant(Real::zero(), len.max(1)).expect("zeros are non-negative")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    /// 1-indexed access.
    pub fn at(&self, index: usize) -> &Real {
        &self.values[index - 1]
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(Real::to_f64).collect()
    }

    /// `c * s` for `c > 0`.
    pub fn scaled(&self, c: &Real) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidArgument(format!("scale factor {c} must be positive")));
        }
        Sequence::new(self.values.iter().map(|v| v * c).collect())
    }

    /// Pointwise sum of two sequences of equal length.
    pub fn plus(&self, other: &Sequence) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", self.len(), other.len())));
        }
        Sequence::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// The first `len` entries.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidRange { lo: 1, hi: len, len: self.len() });
        }
        Sequence::new(self.values[..len].to_vec())
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    digits: Option<u32>,
    values: Vec<String>,
}

impl Serialize for Sequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let digits = match (self.mode, self.values.first()) {
            (Mode::Float, Some(Real::Float(f))) => {
                Some(((f.prec().saturating_sub(8)) as f64 / std::f64::consts::LOG2_10) as u32)
            }
            _ => None,
        };
        SequenceRepr { mode: self.mode, digits, values: self.values.iter().map(Real::to_string).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SequenceRepr::deserialize(d)?;
        let values = match repr.mode {
            Mode::Exact => repr.values.iter().map(|v| v.parse::<Real>()).collect::<Result<Vec<_>>>(),
            Mode::Float => {
                let prec = match repr.digits {
                    Some(dg) => Precision::new(dg).map_err(D::Error::custom)?,
                    None => Precision::default(),
                };
                repr.values.iter().map(|v| Real::parse_float(v, prec)).collect()
            }
        }
        .map_err(D::Error::custom)?;
        Sequence::new(values).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Decreasing,
    Increasing,
    Neither,
}

/// `s_(v+1) <= s_v` for every `v` (entries are non-negative by construction).
pub fn is_nonneg_decreasing(s: &Sequence) -> bool {
    s.values.windows(2).all(|w| w[1] <= w[0])
}

pub fn is_nonneg_increasing(s: &Sequence) -> bool {
    s.values.windows(2).all(|w| w[1] >= w[0])
}

/// Monotonicity of the prefix `s_1..s_hi`. Constant prefixes report `Decreasing`.
pub fn monotonicity(s: &Sequence, hi: usize) -> Monotonicity {
    let prefix = &s.values[..hi.min(s.len())];
    if prefix.windows(2).all(|w| w[1] <= w[0]) {
        Monotonicity::Decreasing
    } else if prefix.windows(2).all(|w| w[1] >= w[0]) {
        Monotonicity::Increasing
    } else {
        Monotonicity::Neither
    }
}

/// Monotonicity plus the minimal quasi-lacunary and quasi-geometric constants
/// over an index window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceProfile {
    pub direction: Monotonicity,
    pub k1: Option<Real>,
    pub k2: Option<Real>,
    pub kgeo: Option<Real>,
    /// Index window `(1, 2^nu_max)` the dyadic ratios were taken over.
    pub range: (usize, usize),
}

impl SequenceProfile {
    /// A profile stated directly rather than measured; checks `0 < k1 <= k2`
    /// and the direction's constraint on the ratios.
    pub fn lacunary(direction: Monotonicity, k1: Real, k2: Real, nu_max: u32) -> Result<Self> {
        if !k1.is_positive() || k2 < k1 {
            return Err(Error::InvalidArgument(format!("need 0 < K1 <= K2, got ({k1}, {k2})")));
        }
        let one = Real::one();
        match direction {
            Monotonicity::Decreasing if k2 > one => {
                return Err(Error::InvalidArgument(format!("decreasing profile with K2 = {k2} > 1")))
            }
            Monotonicity::Increasing if k1 < one => {
                return Err(Error::InvalidArgument(format!("increasing profile with K1 = {k1} < 1")))
            }
            Monotonicity::Neither => return Err(Error::InvalidArgument("a lacunary profile must be monotone".into())),
            _ => {}
        }
        Ok(SequenceProfile { direction, k1: Some(k1), k2: Some(k2), kgeo: None, range: (1, 1usize << nu_max) })
    }

    /// Profile of the constant sequence (`K1 = K2 = 1`).
    pub fn unit(nu_max: u32) -> Self {
        SequenceProfile::lacunary(Monotonicity::Decreasing, Real::one(), Real::one(), nu_max)
            .expect("unit profile is valid")
    }

    /// Quasi lacunary monotone on the window: monotone with finite positive constants.
    pub fn is_member(&self) -> bool {
        self.direction != Monotonicity::Neither
            && matches!((&self.k1, &self.k2), (Some(a), Some(b)) if a.is_positive() && b.is_positive())
    }

    /// Number of dyadic ratios covered, i.e. `nu_max` with `range.1 = 2^nu_max`.
    pub fn dyadic_window(&self) -> u32 {
        self.range.1.max(1).ilog2()
    }

    /// `(K1, K2)`, or `ProfileIncomplete` when the profile is not a class member.
    pub fn constants(&self) -> Result<(&Real, &Real)> {
        match (&self.k1, &self.k2) {
            (Some(k1), Some(k2)) if self.is_member() => Ok((k1, k2)),
            _ => Err(Error::ProfileIncomplete(format!(
                "direction {:?} with K1 = {:?}, K2 = {:?}",
                self.direction,
                self.k1.as_ref().map(Real::to_string),
                self.k2.as_ref().map(Real::to_string)
            ))),
        }
    }
}

/// Minimal `K1` and `K2` with `K1 s[2^v] <= s[2^(v+1)] <= K2 s[2^v]` for `0 <= v < nu_max`.
///
/// Pairs where both entries vanish impose nothing and are skipped; if every
/// pair is skipped the result is `(0, 0)`.
pub fn lacunary_constants(s: &Sequence, nu_max: u32) -> Result<(Real, Real)> {
    if nu_max == 0 {
        return Err(Error::InvalidArgument("nu_max must be at least 1".into()));
    }
    let needed =
        1usize.checked_shl(nu_max).ok_or_else(|| Error::InvalidArgument(format!("nu_max = {nu_max} is too large")))?;
    if s.len() < needed {
        return Err(Error::InvalidRange { lo: 1, hi: needed, len: s.len() });
    }
    let mut bounds: Option<(Real, Real)> = None;
    for v in 0..nu_max {
        let lo = s.at(1 << v);
        let hi = s.at(1 << (v + 1));
        if lo.is_zero() {
            if hi.is_zero() {
                continue;
            }
            return Err(Error::DivisionByZero(format!(
                "s[{}] = 0 but s[{}] = {hi}; no finite K2",
                1usize << v,
                1usize << (v + 1)
            )));
        }
        let r = hi / lo;
        bounds = Some(match bounds {
            None => (r.clone(), r),
            Some((k1, k2)) => (Real::min_of(&k1, &r), Real::max_of(&k2, &r)),
        });
    }
    Ok(bounds.unwrap_or_else(|| (Real::zero(), Real::zero())))
}

/// Classifies `s` over the window `1..=2^nu_max`.
pub fn is_quasi_lacunary_monotone(s: &Sequence, nu_max: u32) -> Result<SequenceProfile> {
    let (k1, k2) = lacunary_constants(s, nu_max)?;
    let hi = 1usize << nu_max;
    let positive = |k: Real| if k.is_positive() { Some(k) } else { None };
    Ok(SequenceProfile {
        direction: monotonicity(s, hi),
        k1: positive(k1),
        k2: positive(k2),
        kgeo: None,
        range: (1, hi),
    })
}

/// Minimal `K` with `sum_(mu<=m) s_mu <= K s_m` for every `m <= mmax`.
pub fn geometric_constant(s: &Sequence, mmax: usize) -> Result<Real> {
    if mmax == 0 || mmax > s.len() {
        return Err(Error::InvalidRange { lo: 1, hi: mmax, len: s.len() });
    }
    let mut partial = Real::zero();
    let mut best: Option<Real> = None;
    for m in 1..=mmax {
        let term = s.at(m);
        partial += term;
        let ratio = partial.checked_div(term).map_err(|_| Error::DivisionByZero(format!("s[{m}] = 0")))?;
        best = Some(match best {
            Some(b) => Real::max_of(&b, &ratio),
            None => ratio,
        });
    }
    Ok(best.expect("mmax >= 1"))
}

/// The sequence `mu -> 2^mu s_(2^mu)` for `mu = 1..=count`, used for the
/// quasi-geometric hypothesis on the outer weight.
pub fn dyadic_doubling(s: &Sequence, count: u32) -> Result<Sequence> {
    let needed = 1usize << count;
    if s.len() < needed {
        return Err(Error::InvalidRange { lo: 1, hi: needed, len: s.len() });
    }
    Sequence::new((1..=count).map(|mu| s.at(1 << mu) * &Real::int(1i64 << mu)).collect())
}

/// Exponent of a power weight `mu -> mu^e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    pub exponent: Real,
}

impl PowerWeight {
    pub fn new(exponent: Real) -> Self {
        PowerWeight { exponent }
    }

    pub fn sequence(&self, len: usize, prec: Precision) -> Sequence {
        power_sequence(&self.exponent, len, prec)
    }
}

/// `mu -> mu^e` for `mu = 1..=len`; exact when `e` is an integer.
pub fn power_sequence(e: &Real, len: usize, prec: Precision) -> Sequence {
    let len = len.max(1);
    let values = (1..=len).map(|mu| Real::int(mu as i64).pow(e, prec)).collect();
    Sequence::new(values).expect("powers of positive integers are positive")
}

/// Distribution of the non-negative increments `a_v - a_(v+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncrementDist {
    /// All increments zero except the last, giving a constant sequence.
    Zero,
    /// Integers uniform on `0..=max`.
    Uniform { max: u32 },
    /// Integers uniform on `1..=max` with probability `density`, zero otherwise.
    Sparse { max: u32, density: f64 },
}

impl Default for IncrementDist {
    fn default() -> Self {
        IncrementDist::Uniform { max: 100 }
    }
}

impl IncrementDist {
    fn draw<R: Rng>(&self, rng: &mut R) -> u32 {
        match *self {
            IncrementDist::Zero => 0,
            IncrementDist::Uniform { max } => rng.gen_range(0..=max),
            IncrementDist::Sparse { max, density } => {
                if rng.gen_bool(density.clamp(0.0, 1.0)) {
                    rng.gen_range(1..=max.max(1))
                } else {
                    0
                }
            }
        }
    }
}

fn suffix_sums(increments: &[u64]) -> Vec<u64> {
    let mut acc = 0u64;
    let mut out: Vec<u64> = increments
        .iter()
        .rev()
        .map(|d| {
            acc += d;
            acc
        })
        .collect();
    out.reverse();
    out
}

/// Deterministic non-negative decreasing sequence: suffix sums of `len`
/// increments drawn from `dist`. The constant produced by [`IncrementDist::Zero`]
/// is `1`, so the result is never identically zero for that distribution.
pub fn random_decreasing(len: usize, seed: u64, dist: IncrementDist) -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let increments = draw_increments(len.max(1), dist, &mut rng);
    Sequence::new(suffix_sums(&increments).into_iter().map(|v| Real::int(v as i64)).collect())
        .expect("suffix sums are non-negative")
}

fn draw_increments<R: Rng>(len: usize, dist: IncrementDist, rng: &mut R) -> Vec<u64> {
    let mut increments: Vec<u64> = (0..len).map(|_| dist.draw(rng) as u64).collect();
    if dist == IncrementDist::Zero {
        increments[len - 1] = 1;
    }
    increments
}

/// `f64` counterpart of [`random_decreasing`] drawing from a caller-owned RNG.
pub fn sample_decreasing_f64<R: Rng>(len: usize, dist: IncrementDist, rng: &mut R) -> Vec<f64> {
    let increments = draw_increments(len.max(1), dist, rng);
    suffix_sums(&increments).into_iter().map(|v| v as f64).collect()
}

/// The dyadic exponents `(N, M)` with `2^(N-1) < n <= 2^N` and `2^M <= m < 2^(M+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicBracket {
    pub n_exp: u32,
    pub m_exp: u32,
}

pub fn dyadic_bracket(n: usize, m: usize) -> Result<DyadicBracket> {
    if n == 0 || n > m {
        return Err(Error::InvalidRange { lo: n, hi: m, len: m });
    }
    let n_exp = n.next_power_of_two().ilog2();
    let m_exp = m.ilog2();
    Ok(DyadicBracket { n_exp, m_exp })
}
