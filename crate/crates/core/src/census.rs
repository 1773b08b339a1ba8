//! Monte-Carlo census of rational lines on random hypersurfaces.
//!
//! Sample i draws its form from the SplitMix64 substream `(seed, i)`; in
//! smooth-only mode rejected draws are replaced from the same substream. The
//! samples run on a dedicated thread pool and are gathered in index order, so
//! a report depends only on its configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bounds::expected_line_count;
use crate::fano::{count_lines, FanoError, LineTable};
use crate::formring::Form;
use crate::gf::Field;
use crate::rng::DeterministicRng;
use crate::smoothness::{is_smooth, SmoothnessError};

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("need at least one sample")]
    Empty,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("sample {sample}: smoothness test failed: {source}")]
    Smoothness { sample: u64, source: SmoothnessError },
    #[error(transparent)]
    Lines(#[from] FanoError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub field: Field,
    pub n: usize,
    pub d: u32,
    pub samples: u64,
    pub smooth_only: bool,
    pub seed: u64,
    pub threads: usize,
    /// Adds wall-clock time to the report, which then stops being reproducible.
    pub timing: bool,
}

impl CensusConfig {
    /// Cubic threefolds over `field` with one worker per core.
    pub fn new(field: &Field, samples: u64, seed: u64) -> Self {
        CensusConfig {
            field: field.clone(),
            n: 4,
            d: 3,
            samples,
            smooth_only: false,
            seed,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            timing: false,
        }
    }

    fn validate(&self) -> Result<(), CensusError> {
        if self.samples == 0 {
            return Err(CensusError::Empty);
        }
        if self.n < 1 || self.d < 1 || self.n + 1 > crate::formring::MAX_VARS {
            return Err(CensusError::BadConfig(format!("unsupported shape n={} d={}", self.n, self.d)));
        }
        if self.threads == 0 {
            return Err(CensusError::BadConfig("threads must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub q: u32,
    pub p: u32,
    pub e: u32,
    pub n: usize,
    pub d: u32,
    pub samples: u64,
    pub smooth_only: bool,
    pub seed: u64,
}

impl From<&CensusConfig> for ConfigEcho {
    fn from(c: &CensusConfig) -> Self {
        ConfigEcho {
            q: c.field.q(),
            p: c.field.p(),
            e: c.field.e(),
            n: c.n,
            d: c.d,
            samples: c.samples,
            smooth_only: c.smooth_only,
            seed: c.seed,
        }
    }
}

/// Summary of a list of counts. The median averages the two middle order
/// statistics; the variance uses the `count - 1` denominator and is zero for
/// a single sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleStats {
    pub count: u64,
    pub min: u64,
    pub max: u64,
    pub median: BigRational,
    pub mean: BigRational,
    pub variance: BigRational,
}

impl SampleStats {
    pub fn sd_f64(&self) -> f64 {
        self.variance.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    pub fn mean_decimal(&self) -> String {
        decimal_sig(&self.mean, 6)
    }

    pub fn median_decimal(&self) -> String {
        decimal_sig(&self.median, 6)
    }

    pub fn sd_decimal(&self) -> String {
        decimal_sig_sqrt(&self.variance, 6)
    }
}

impl Serialize for SampleStats {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SampleStats", 9)?;
        st.serialize_field("count", &self.count)?;
        st.serialize_field("min", &self.min)?;
        st.serialize_field("max", &self.max)?;
        st.serialize_field("median", &self.median_decimal())?;
        st.serialize_field("mean", &self.mean_decimal())?;
        st.serialize_field("sd", &self.sd_decimal())?;
        st.serialize_field("median_exact", &self.median.to_string())?;
        st.serialize_field("mean_exact", &self.mean.to_string())?;
        st.serialize_field("variance_exact", &self.variance.to_string())?;
        st.end()
    }
}

/// Exact frequency of each value.
pub fn histogram(counts: &[u64]) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for &c in counts {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

pub fn summarize(counts: &[u64]) -> Result<SampleStats, CensusError> {
    summarize_histogram(&histogram(counts))
}

fn rat(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// [`summarize`] computed from a frequency map.
pub fn summarize_histogram(h: &BTreeMap<u64, u64>) -> Result<SampleStats, CensusError> {
    let count: u64 = h.values().sum();
    if count == 0 {
        return Err(CensusError::Empty);
    }
    let min = *h.keys().next().expect("nonempty");
    let max = *h.keys().next_back().expect("nonempty");
    let order_stat = |k: u64| {
        let mut seen = 0;
        for (&v, &f) in h {
            seen += f;
            if seen > k {
                return v;
            }
        }
        unreachable!("k < count")
    };
    let median = (rat(order_stat((count - 1) / 2)) + rat(order_stat(count / 2))) / rat(2);
    let mut sum = BigInt::zero();
    let mut sq = BigInt::zero();
    for (&v, &f) in h {
        sum += BigInt::from(v) * BigInt::from(f);
        sq += BigInt::from(v) * BigInt::from(v) * BigInt::from(f);
    }
    let n = BigInt::from(count);
    let mean = BigRational::new(sum.clone(), n.clone());
    let variance = if count == 1 {
        BigRational::zero()
    } else {
        BigRational::new(&n * &sq - &sum * &sum, &n * (&n - 1))
    };
    Ok(SampleStats { count, min, max, median, mean, variance })
}

/// `stats.mean - expected_line_count(q)`.
pub fn compare_to_formula(stats: &SampleStats, q: u64) -> BigRational {
    &stats.mean - expected_line_count(q)
}

fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

/// `x * 10^s` for a possibly negative s.
fn shift(x: &BigRational, s: i64) -> BigRational {
    if s >= 0 {
        x * BigRational::from_integer(pow10(s as u32))
    } else {
        x / BigRational::from_integer(pow10((-s) as u32))
    }
}

/// Rounds half to even given the integer part and a three-way comparison of
/// the fractional part against one half.
fn round_half_even(floor: BigInt, vs_half: std::cmp::Ordering) -> BigInt {
    match vs_half {
        std::cmp::Ordering::Greater => floor + 1,
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Equal if floor.is_odd() => floor + 1,
        std::cmp::Ordering::Equal => floor,
    }
}

/// Renders `digits` significant digits of a positive value given a rounding
/// function for `value * 10^s`, without exponent notation and without
/// trailing zeros.
fn render_sig(digits: u32, estimate: f64, round_at: impl Fn(i64) -> BigInt) -> String {
    let lo = pow10(digits - 1);
    let hi = pow10(digits);
    let mut s = digits as i64 - 1 - estimate.log10().floor() as i64;
    let mut m = round_at(s);
    // the float estimate can be off by one either way; rounding up can spill into one more digit
    for _ in 0..4 {
        if m >= hi {
            s -= 1;
        } else if m < lo {
            s += 1;
        } else {
            break;
        }
        m = round_at(s);
    }
    let mut text = m.to_string();
    let mut out = String::new();
    if s <= 0 {
        text.push_str(&"0".repeat((-s) as usize));
        return text;
    }
    let s = s as usize;
    if text.len() <= s {
        out.push_str("0.");
        out.push_str(&"0".repeat(s - text.len()));
        out.push_str(&text);
    } else {
        let split = text.len() - s;
        let frac = text.split_off(split);
        let _ = write!(out, "{text}.{frac}");
    }
    let trimmed = out.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// Decimal rendering of an exact rational to `digits` significant digits,
/// rounded half to even.
pub fn decimal_sig(x: &BigRational, digits: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    let est = a.to_f64().unwrap_or(f64::MAX).max(f64::MIN_POSITIVE);
    let body = render_sig(digits, est, |s| {
        let v = shift(&a, s);
        let (fl, rem) = v.numer().div_rem(v.denom());
        round_half_even(fl, (rem * 2u32).cmp(v.denom()))
    });
    format!("{sign}{body}")
}

/// Decimal rendering of `sqrt(x)` for an exact nonnegative rational, to
/// `digits` significant digits, rounded half to even.
pub fn decimal_sig_sqrt(x: &BigRational, digits: u32) -> String {
    assert!(!x.is_negative(), "square root of a negative value");
    if x.is_zero() {
        return "0".into();
    }
    let est = x.to_f64().unwrap_or(f64::MAX).max(f64::MIN_POSITIVE).sqrt();
    render_sig(digits, est, |s| {
        // sqrt(x) * 10^s = sqrt(x * 10^(2s))
        let v = shift(x, 2 * s);
        let (num, den) = (v.numer().to_biguint().expect("nonneg"), v.denom().to_biguint().expect("pos"));
        let fl: BigUint = (&num / &den).sqrt();
        // sqrt(v) vs fl + 1/2  <=>  4 num vs (2 fl + 1)^2 den
        let twice = &fl * 2u32 + 1u32;
        let cmp = (num * 4u32).cmp(&(&twice * &twice * den));
        round_half_even(BigInt::from(fl), cmp)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormulaComparison {
    pub expected_exact: String,
    pub expected: String,
    pub deviation_exact: String,
    pub deviation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub config: ConfigEcho,
    pub stats: SampleStats,
    #[serde(serialize_with = "ser_histogram")]
    pub histogram: BTreeMap<u64, u64>,
    /// Draws rejected as singular; always zero unless smooth-only.
    pub rejected: u64,
    /// Deviation from the expected count, for cubic threefolds only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<FormulaComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    #[serde(skip)]
    pub counts: Vec<u64>,
}

/// Keys in numeric order as JSON strings.
fn ser_histogram<S: Serializer>(h: &BTreeMap<u64, u64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(h.len()))?;
    for (k, v) in h {
        m.serialize_entry(&k.to_string(), v)?;
    }
    m.end()
}

impl CensusReport {
    pub fn stats_csv(&self) -> String {
        let c = &self.config;
        let s = &self.stats;
        format!(
            "q,n,d,samples,smooth_only,seed,min,max,median,mean,sd\n{},{},{},{},{},{},{},{},{},{},{}\n",
            c.q,
            c.n,
            c.d,
            c.samples,
            c.smooth_only,
            c.seed,
            s.min,
            s.max,
            s.median_decimal(),
            s.mean_decimal(),
            s.sd_decimal()
        )
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("line_count,frequency\n");
        for (k, v) in &self.histogram {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

enum Counter {
    Table(LineTable),
    Direct,
}

impl Counter {
    fn count(&self, f: &Form) -> Result<u64, FanoError> {
        match self {
            Counter::Table(t) => Ok(t.count(f, false)?.count),
            Counter::Direct => Ok(count_lines(f, false).count),
        }
    }
}

/// Line count and number of rejected draws for sample `index`.
fn draw_sample(cfg: &CensusConfig, counter: &Counter, index: u64) -> Result<(u64, u64), CensusError> {
    let mut rng = DeterministicRng::substream(cfg.seed, index);
    let mut rejected = 0;
    loop {
        let f = Form::random(&cfg.field, cfg.n + 1, cfg.d, &mut rng);
        if cfg.smooth_only {
            match is_smooth(&f) {
                Ok(true) => {}
                Ok(false) => {
                    rejected += 1;
                    continue;
                }
                Err(source) => return Err(CensusError::Smoothness { sample: index, source }),
            }
        }
        return Ok((counter.count(&f)?, rejected));
    }
}

pub fn run_census(cfg: &CensusConfig) -> Result<CensusReport, CensusError> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CensusError::Pool(e.to_string()))?;
    let counter = pool.install(|| match LineTable::new(cfg.n, cfg.d, &cfg.field) {
        Ok(t) => Counter::Table(t),
        Err(_) => Counter::Direct,
    });
    let results: Vec<Result<(u64, u64), CensusError>> =
        pool.install(|| (0..cfg.samples).into_par_iter().map(|i| draw_sample(cfg, &counter, i)).collect());
    let mut counts = Vec::with_capacity(results.len());
    let mut rejected = 0;
    for r in results {
        let (c, rej) = r?;
        counts.push(c);
        rejected += rej;
    }
    let hist = histogram(&counts);
    let stats = summarize_histogram(&hist)?;
    let formula = (cfg.n == 4 && cfg.d == 3).then(|| {
        let q = cfg.field.q() as u64;
        let expected = expected_line_count(q);
        let dev = compare_to_formula(&stats, q);
        FormulaComparison {
            expected_exact: expected.to_string(),
            expected: decimal_sig(&expected, 6),
            deviation_exact: dev.to_string(),
            deviation: decimal_sig(&dev, 6),
        }
    });
    Ok(CensusReport {
        config: cfg.into(),
        stats,
        histogram: hist,
        rejected,
        formula,
        timing: cfg.timing.then(|| Timing { wall_seconds: start.elapsed().as_secs_f64() }),
        counts,
    })
}

impl CensusError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            CensusError::Empty => "census::empty",
            CensusError::BadConfig(_) => "census::bad-config",
            CensusError::Smoothness { source, .. } => source.code(),
            CensusError::Lines(e) => e.code(),
            CensusError::Pool(_) => "census::thread-pool",
        }
    }
}
