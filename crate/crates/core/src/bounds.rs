//! Exact evaluation of the existence inequalities, the effective Lang-Weil
//! constant and the expected line count. Every decision is made in integer
//! arithmetic; square roots are removed by squaring.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("n >= r + C(d+r, r+1) fails for n={n}, d={d}, r={r}; no field size is guaranteed")]
    Prop2Fails { n: u32, d: u32, r: u32 },
    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(u32),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
}

/// Exact `C(a, b)`, zero when `b > a`.
pub fn binomial(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc = acc * BigUint::from(a - i) / BigUint::from(i + 1);
    }
    acc
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

/// `n >= r + C(d+r, r+1)`: enough room for the lifting step to reach an
/// r-plane from an (r-1)-plane.
pub fn prop2_holds(n: u32, d: u32, r: u32) -> bool {
    n >= r && big((n - r) as u64) >= binomial((d + r) as u64, (r + 1) as u64)
}

/// Conditions of the existence theorem: `(n >= 2d-1 and n >= 4, n >= 2 C(d+r-1, r) + r)`.
pub fn main_thm_conditions(n: u32, d: u32, r: u32) -> (bool, bool) {
    let line_case = n as u64 + 1 >= 2 * d as u64 && n >= 4;
    let plane_case = n >= r
        && big((n - r) as u64) >= binomial((d + r - 1) as u64, r as u64) * 2u32;
    (line_case, plane_case)
}

/// `(r+1)(n-r) - C(d+r, r)`; may be negative.
pub fn fano_expected_dim(n: u32, d: u32, r: u32) -> BigInt {
    BigInt::from((r as i64 + 1) * (n as i64 - r as i64))
        - BigInt::from(binomial((d + r) as u64, r as u64))
}

/// `sum_{0 <= j < d} C(j+r-1, r-1) (d-j)`, the number of equations (with
/// multiplicity by degree) in one lifting step.
pub fn hockey_stick_lhs(d: u32, r: u32) -> BigUint {
    (0..d as u64)
        .map(|j| binomial(j + r as u64 - 1, r as u64 - 1) * big(d as u64 - j))
        .sum()
}

/// `9 * 2^m * (m delta + 3)^(N+1)`.
pub fn cplus_bound(m: u32, delta: u32, big_n: u32) -> BigUint {
    big(9) * (BigUint::one() << m) * big(m as u64 * delta as u64 + 3).pow(big_n + 1)
}

fn coeff_a(d: u32) -> BigUint {
    let d = d as u64;
    big(d.saturating_sub(1) * d.saturating_sub(2))
}

fn coeff_b(n: u32, d: u32) -> BigUint {
    cplus_bound(1, d, n) - 1u32
}

/// For a hypersurface of degree d in P^n: whether `q` satisfies
/// `sqrt(q) > (A + sqrt(A^2 + 4B)) / 2` with `A = (d-1)(d-2)`,
/// `B = 18(d+3)^(n+1) - 1`, together with [`prop2_holds`].
pub fn effective_guarantee(q: &BigUint, n: u32, d: u32, r: u32) -> bool {
    prop2_holds(n, d, r) && sqrt_inequality(q, n, d)
}

/// `q > B` and `(q - B)^2 > A^2 q`, equivalent to `s^2 - A s - B > 0` at `s = sqrt(q)`.
fn sqrt_inequality(q: &BigUint, n: u32, d: u32) -> bool {
    let a = coeff_a(d);
    let b = coeff_b(n, d);
    if q <= &b {
        return false;
    }
    let diff = q - &b;
    &diff * &diff > &a * &a * q
}

/// Least integer q for which [`effective_guarantee`] holds.
pub fn min_admissible_q(n: u32, d: u32, r: u32) -> Result<BigUint, BoundsError> {
    if d < 2 {
        return Err(BoundsError::DegreeTooSmall(d));
    }
    if !prop2_holds(n, d, r) {
        return Err(BoundsError::Prop2Fails { n, d, r });
    }
    // the predicate is monotone above B: both sides grow, the left quadratically
    let mut lo = coeff_b(n, d);
    let mut hi = &lo * 2u32 + 1u32;
    while !sqrt_inequality(&hi, n, d) {
        lo = hi.clone();
        hi *= 2u32;
    }
    // invariant: predicate false at lo, true at hi
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u32;
        if sqrt_inequality(&mid, n, d) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the first twelve prime bases: deterministic below
/// 3.3 * 10^24, probabilistic beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &big(2) {
        return false;
    }
    for &p in &MR_BASES {
        if n == &big(p) {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let t = &n1 >> s;
    'bases: for &a in &MR_BASES {
        let mut x = big(a).modpow(&t, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Whether `q = p^e` for a prime p and `e >= 1`.
pub fn is_prime_power(q: &BigUint) -> bool {
    if q < &big(2) {
        return false;
    }
    let bits = q.bits() as u32;
    (1..=bits).any(|e| {
        let root = q.nth_root(e);
        root.pow(e) == *q && is_probable_prime(&root)
    })
}

/// Smallest prime power `>= q`.
pub fn next_prime_power(q: &BigUint) -> BigUint {
    let mut c = q.max(&big(2)).clone();
    while !is_prime_power(&c) {
        c += 1u32;
    }
    c
}

/// `|P^k(F_q)|`.
pub fn projective_count(k: u32, q: &BigUint) -> BigUint {
    (0..=k).map(|i| q.pow(i)).sum()
}

/// The window `|P^{n-1}(F_q)| +- E` with
/// `E = A q^(n-3/2) + 18(d+3)^(n+1) q^(n-2)`, stored so membership is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlWindow {
    pub q: BigUint,
    pub center: BigUint,
    /// Coefficient of `sqrt(q)` in E, `A q^(n-2)`.
    pub sqrt_coeff: BigUint,
    /// The integral part of E, `C q^(n-2)`.
    pub rational_part: BigUint,
}

impl GlWindow {
    /// Whether `|count - center| <= E`.
    pub fn contains(&self, count: &BigUint) -> bool {
        let dev = if count >= &self.center { count - &self.center } else { &self.center - count };
        if dev <= self.rational_part {
            return true;
        }
        let rest = dev - &self.rational_part;
        &rest * &rest <= &self.sqrt_coeff * &self.sqrt_coeff * &self.q
    }

    /// E as a float, for display only.
    pub fn half_width_f64(&self) -> f64 {
        let s = self.q.to_f64().unwrap_or(f64::INFINITY).sqrt();
        self.sqrt_coeff.to_f64().unwrap_or(f64::INFINITY) * s
            + self.rational_part.to_f64().unwrap_or(f64::INFINITY)
    }

    /// `(lower, upper)` as floats, for display only.
    pub fn bounds_f64(&self) -> (f64, f64) {
        let c = self.center.to_f64().unwrap_or(f64::INFINITY);
        let e = self.half_width_f64();
        (c - e, c + e)
    }
}

/// Point-count window for a degree-d hypersurface in P^n(F_q), `n >= 2`.
pub fn gl_interval(q: u64, n: u32, d: u32) -> Result<GlWindow, BoundsError> {
    if n < 2 || q < 2 {
        return Err(BoundsError::BadParameters(format!("need n >= 2 and q >= 2, got n={n}, q={q}")));
    }
    let qb = big(q);
    let qn2 = qb.pow(n - 2);
    Ok(GlWindow {
        center: projective_count(n - 1, &qb),
        sqrt_coeff: coeff_a(d) * &qn2,
        rational_part: cplus_bound(1, d, n) * &qn2,
        q: qb,
    })
}

/// `q^2 + q + 2 + 2/q + 2/q^2 + 1/q^3 + 1/q^4`.
pub fn expected_line_count(q: u64) -> BigRational {
    let q = BigRational::from_integer(BigInt::from(q));
    let inv = q.recip();
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    &q * &q + &q + int(2) + int(2) * &inv + int(2) * inv.pow(2) + inv.pow(3) + inv.pow(4)
}

/// Big integers as JSON numbers when they fit in 53 bits, decimal strings otherwise.
fn ser_big<S: Serializer, T: ToString + ToPrimitive>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) if x.unsigned_abs() < 1 << 53 => s.serialize_i64(x),
        _ => s.serialize_str(&v.to_string()),
    }
}

fn ser_big_opt<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_big(x, s),
        None => s.serialize_none(),
    }
}

/// Everything derivable from `(n, d, r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub d: u32,
    pub r: u32,
    /// Number of coefficients minus one, `C(d+n, d) - 1`.
    #[serde(rename = "N", serialize_with = "ser_big")]
    pub big_n: BigUint,
    #[serde(rename = "A", serialize_with = "ser_big")]
    pub a: BigUint,
    #[serde(rename = "B", serialize_with = "ser_big")]
    pub b: BigUint,
    pub prop2_ok: bool,
    pub line_case: bool,
    pub plane_case: bool,
    pub main_thm_ok: bool,
    /// Whether the line-case argument would also produce planes; it only
    /// covers r = 1, so this is the general `n >= 2 C(d+r-1, r) + r` test.
    pub br_plane_ok: bool,
    #[serde(serialize_with = "ser_big")]
    pub fano_dim: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub hockey_stick: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub cplus: BigUint,
    /// Least q meeting the effective bound; null when the lifting inequality fails.
    #[serde(serialize_with = "ser_big_opt")]
    pub q_threshold: Option<BigUint>,
    /// Least prime power at or above `q_threshold`.
    #[serde(serialize_with = "ser_big_opt")]
    pub q_threshold_prime_power: Option<BigUint>,
    /// The effective bound needs X geometrically integral, which is not checked.
    pub integrality_assumed: bool,
}

/// Builds the report for r-planes on degree-d hypersurfaces in P^n.
pub fn bound_report(n: u32, d: u32, r: u32) -> Result<BoundReport, BoundsError> {
    if n < 1 || d < 1 || r < 1 || r > n {
        return Err(BoundsError::BadParameters(format!(
            "need n, d, r >= 1 and r <= n, got n={n}, d={d}, r={r}"
        )));
    }
    let (line_case, plane_case) = main_thm_conditions(n, d, r);
    let q_threshold = if d >= 2 { min_admissible_q(n, d, r).ok() } else { None };
    Ok(BoundReport {
        n,
        d,
        r,
        big_n: binomial((d + n) as u64, d as u64) - 1u32,
        a: coeff_a(d),
        b: coeff_b(n, d),
        prop2_ok: prop2_holds(n, d, r),
        line_case,
        plane_case,
        main_thm_ok: plane_case || (r == 1 && line_case),
        br_plane_ok: plane_case,
        fano_dim: fano_expected_dim(n, d, r),
        hockey_stick: hockey_stick_lhs(d, r),
        cplus: cplus_bound(1, d, n),
        q_threshold_prime_power: q_threshold.as_ref().map(next_prime_power),
        q_threshold,
        integrality_assumed: true,
    })
}

impl BoundsError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            BoundsError::Prop2Fails { .. } => "bounds::prop2-fails",
            BoundsError::DegreeTooSmall(_) => "bounds::degree-too-small",
            BoundsError::BadParameters(_) => "bounds::bad-parameters",
        }
    }
}
