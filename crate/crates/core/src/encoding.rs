//! Code length functions.
//!
//! Only lengths are computed, in bits; nothing is actually encoded. A model
//! `H` is a set of patterns and the instantiation `I` assigns patterns to
//! pivot positions. The total description length is `L1(H) + L2(I)`.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::grid::{Matrix, Pattern};

/// Normalizing constant of the universal prior for the integers.
pub const RISSANEN_CONSTANT: f64 = 2.865064;

/// Pseudocount of the prequential plug-in code.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error("a model needs at least one pattern")]
    EmptyModel,
    #[error("inconsistent merge counts: {0}")]
    InconsistentState(String),
    #[error("pseudocount must be positive, got {0}")]
    InvalidEpsilon(f64),
}

/// How the element count and positions of a pattern are encoded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PositionCode {
    /// `L_N(C(M_X N_X, |X|))`: the universal integer code applied to the
    /// number of arrangements.
    #[default]
    Combined,
    /// `L_N(|X|) + log C(M_X N_X, |X|)`: the count first, then a uniform
    /// index over the arrangements.
    CountThenIndex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingParams {
    epsilon: f64,
    rows: usize,
    cols: usize,
    alphabet_size: u32,
    position_code: PositionCode,
}

impl EncodingParams {
    pub fn new(rows: usize, cols: usize, alphabet_size: u32) -> Self {
        EncodingParams { epsilon: DEFAULT_EPSILON, rows, cols, alphabet_size, position_code: PositionCode::Combined }
    }

    pub fn for_matrix(matrix: &Matrix) -> Self {
        EncodingParams::new(matrix.rows(), matrix.cols(), matrix.alphabet_size())
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, EncodingError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(EncodingError::InvalidEpsilon(epsilon));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_position_code(mut self, code: PositionCode) -> Self {
        self.position_code = code;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rissanen_constant(&self) -> f64 {
        RISSANEN_CONSTANT
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn position_code(&self) -> PositionCode {
        self.position_code
    }

    /// `log(MN)`: bits to address one matrix position.
    pub fn index_bits(&self) -> f64 {
        ((self.rows * self.cols) as f64).log2()
    }

    /// `log(|S|)`: bits per symbol under the uniform code.
    pub fn symbol_bits(&self) -> f64 {
        (self.alphabet_size as f64).log2()
    }
}

/// Summary of the two-part description length of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthReport {
    pub model_bits: f64,
    pub instantiation_bits: f64,
    pub total_bits: f64,
    pub baseline_bits: f64,
    pub ratio: f64,
}

impl LengthReport {
    pub fn new(model_bits: f64, instantiation_bits: f64, baseline_bits: f64) -> Self {
        let total_bits = model_bits + instantiation_bits;
        LengthReport { model_bits, instantiation_bits, total_bits, baseline_bits, ratio: total_bits / baseline_bits }
    }
}

/// Universal code length `L_N(n)` for a positive integer.
pub fn universal_integer(n: u64) -> Result<f64, EncodingError> {
    if n == 0 {
        return Err(EncodingError::DomainError("universal integer code needs n >= 1".into()));
    }
    Ok(universal_integer_log2((n as f64).log2()))
}

/// `L_N(n)` for an integer given by `log2(n)`, so that values far beyond
/// `u64` (binomial coefficients of large boxes) can be coded.
pub fn universal_integer_log2(log2_n: f64) -> f64 {
    let mut bits = RISSANEN_CONSTANT.log2();
    let mut term = log2_n;
    while term > 0.0 {
        bits += term;
        term = term.log2();
    }
    bits
}

/// Exact `C(n, k)` when it fits in 128 bits.
fn exact_binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

/// `log2 C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64, EncodingError> {
    if k > n {
        return Err(EncodingError::DomainError(format!("binomial with k={k} > n={n}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    if let Some(c) = exact_binomial(n, k) {
        return Ok((c as f64).log2());
    }
    let nats = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    Ok(nats / std::f64::consts::LN_2)
}

/// `log_G(a, b) = log Γ(a + bε) − log Γ(bε)`, in bits.
pub fn log_gamma_eps(a: u64, b: u64, epsilon: f64) -> f64 {
    if a == 0 {
        return 0.0;
    }
    let base = b as f64 * epsilon;
    (ln_gamma(a as f64 + base) - ln_gamma(base)) / std::f64::consts::LN_2
}

/// Bits for the element count and positions of a pattern with the given
/// bounding-box area and cardinality.
pub fn arrangement_length(area: u64, cardinality: u64, code: PositionCode) -> f64 {
    let log_c = log_binomial(area, cardinality).expect("cardinality never exceeds the bounding box area");
    match code {
        PositionCode::Combined => universal_integer_log2(log_c),
        PositionCode::CountThenIndex => universal_integer_log2((cardinality as f64).log2()) + log_c,
    }
}

/// `L_p` from the shape summary of a pattern.
pub fn shape_length(area: u64, cardinality: u64, params: &EncodingParams) -> f64 {
    params.index_bits()
        + arrangement_length(area, cardinality, params.position_code)
        + cardinality as f64 * params.symbol_bits()
}

/// `L_p(X)`: bounds, element count and positions, then the symbols.
pub fn pattern_length(pattern: &Pattern, params: &EncodingParams) -> f64 {
    shape_length(pattern.area(), pattern.cardinality() as u64, params)
}

/// `L1(H) = L_N(|H|) + Σ L_p(X)`.
pub fn model_length<'a, I>(patterns: I, params: &EncodingParams) -> Result<f64, EncodingError>
where
    I: IntoIterator<Item = &'a Pattern>,
{
    let mut count = 0u64;
    let mut bits = 0.0;
    for p in patterns {
        count += 1;
        bits += pattern_length(p, params);
    }
    if count == 0 {
        return Err(EncodingError::EmptyModel);
    }
    Ok(universal_integer(count)? + bits)
}

/// Prequential plug-in code length of an instantiation with the given
/// pattern usages. Zero usages are ignored: such patterns are not part of
/// the model.
pub fn prequential_length<I>(usages: I, epsilon: f64) -> f64
where
    I: IntoIterator<Item = u64>,
{
    let mut patterns = 0u64;
    let mut instances = 0u64;
    let mut per_pattern = 0.0;
    for u in usages.into_iter().filter(|&u| u > 0) {
        patterns += 1;
        instances += u;
        per_pattern += log_gamma_eps(u, 1, epsilon);
    }
    if patterns == 0 {
        return 0.0;
    }
    -per_pattern + log_gamma_eps(instances, patterns, epsilon)
}

/// `L2(I) = log(MN) + L_pp(I)`. The size of `I` itself is constant and
/// left out.
pub fn instantiation_length<I>(usages: I, params: &EncodingParams) -> f64
where
    I: IntoIterator<Item = u64>,
{
    params.index_bits() + prequential_length(usages, params.epsilon)
}

/// Usage counts around a candidate merge of `X` and `Y` into `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MergeCounts {
    pub usage_x: u64,
    pub usage_y: u64,
    /// Usage of `Z` before the merge; nonzero only when `Z` is already a
    /// model pattern.
    pub usage_z: u64,
    /// Number of `(x, y)` pairs replaced by `z`.
    pub support: u64,
    /// `X = Y`: every replacement consumes two instances of `X`.
    pub self_merge: bool,
    /// `|I|` before the merge.
    pub instances: u64,
    /// `|H|` before the merge.
    pub patterns: u64,
}

/// Pattern lengths `L_p` of the patterns involved in a merge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeBits {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Decrease in total description length from a merge (positive means the
/// description gets shorter).
///
/// Constant time: only the terms touched by the merge are evaluated.
/// Patterns whose usage drops to zero leave the model, and their `L_p`
/// becomes part of the gain.
pub fn merge_gain(counts: &MergeCounts, bits: &MergeBits, epsilon: f64) -> Result<f64, EncodingError> {
    merge_gain_with(counts, bits, &DirectTerms(epsilon))
}

/// The transcendental terms of a merge gain. Implementations may tabulate
/// or memoize them.
pub(crate) trait GainTerms {
    /// `log_G(a, b)` in bits.
    fn log_g(&self, a: u64, b: u64) -> f64;
    /// `L_N(n)` for `n >= 1`.
    fn universal(&self, n: u64) -> f64;
}

struct DirectTerms(f64);

impl GainTerms for DirectTerms {
    fn log_g(&self, a: u64, b: u64) -> f64 {
        log_gamma_eps(a, b, self.0)
    }

    fn universal(&self, n: u64) -> f64 {
        universal_integer_log2((n as f64).log2())
    }
}

pub(crate) fn merge_gain_with(
    counts: &MergeCounts,
    bits: &MergeBits,
    terms: &impl GainTerms,
) -> Result<f64, EncodingError> {
    let s = counts.support;
    if s == 0 {
        return Err(EncodingError::InconsistentState("support must be at least 1".into()));
    }
    let consumed_x = if counts.self_merge { 2 * s } else { s };
    if consumed_x > counts.usage_x || (!counts.self_merge && s > counts.usage_y) {
        return Err(EncodingError::InconsistentState(format!(
            "support {s} exceeds usages U(X)={} U(Y)={}",
            counts.usage_x, counts.usage_y
        )));
    }
    if s > counts.instances || counts.patterns == 0 {
        return Err(EncodingError::InconsistentState("usage totals do not cover the merge".into()));
    }

    let new_x = counts.usage_x - consumed_x;
    let new_y = if counts.self_merge { new_x } else { counts.usage_y - s };
    let new_z = counts.usage_z + s;
    let z_is_new = counts.usage_z == 0;

    let mut patterns_after = counts.patterns + z_is_new as u64;
    let mut model_gain = -if z_is_new { bits.z } else { 0.0 };
    if new_x == 0 {
        patterns_after -= 1;
        model_gain += bits.x;
    }
    if !counts.self_merge && new_y == 0 {
        patterns_after -= 1;
        model_gain += bits.y;
    }
    let count_gain = terms.universal(counts.patterns) - terms.universal(patterns_after);
    let log_g1 = |u| terms.log_g(u, 1);

    // L_pp(I) − L_pp(I'), only the touched terms.
    let mut usage_gain = log_g1(new_x) - log_g1(counts.usage_x) + log_g1(new_z) - log_g1(counts.usage_z);
    if !counts.self_merge {
        usage_gain += log_g1(new_y) - log_g1(counts.usage_y);
    }
    let total_gain = terms.log_g(counts.instances, counts.patterns) - terms.log_g(counts.instances - s, patterns_after);

    Ok(count_gain + model_gain + usage_gain + total_gain)
}
