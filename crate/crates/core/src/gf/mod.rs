//! Arithmetic in small finite fields F_q with q = p^e.
//!
//! An element is encoded as an integer in `[0, q)`: its coordinates
//! `(c_0, ..., c_{e-1})` in the power basis of the modulus root `t` are packed
//! as base-p digits, `idx = c_0 + c_1 p + ... + c_{e-1} p^{e-1}`. The prime
//! subfield therefore occupies `0..p`, `0` is the additive identity and `1` the
//! multiplicative identity.
//!
//! Extension fields are built on Conway polynomials. They are primitive, so `t`
//! generates the multiplicative group, and compatible across subfields, which
//! gives canonical embeddings `F_{p^e} -> F_{p^{ek}}`.

mod conway;
mod polymod;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conway::{conway_polynomial, table_entries, table_modulus};

/// Largest supported field size.
pub const MAX_FIELD_SIZE: u32 = 1 << 16;
/// Fields up to this size get full addition and multiplication tables.
pub const TABLE_LIMIT: u32 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {p}^{e} exceeds the supported maximum {max}")]
    TooLarge { p: u32, e: u32, max: u32 },
    #[error("no compiled-in modulus for {p}^{e} and generation is disabled")]
    Unsupported { p: u32, e: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("{idx} is not an element of F_{q}")]
    InvalidElement { idx: u64, q: u32 },
    #[error("cannot parse field size {0:?}")]
    BadFieldSpec(String),
    #[error("F_{from} does not embed into F_{to}")]
    NoEmbedding { from: String, to: String },
}

/// A field element, identified by its canonical encoding.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    /// Wraps an encoding without range checking; use [`Field::elem`] for
    /// untrusted input.
    #[inline]
    pub const fn from_idx(idx: u32) -> Self {
        Fq(idx)
    }

    #[inline]
    pub const fn idx(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

enum Arith {
    /// Full operation tables, row-major `a * q + b`.
    Tables {
        add: Vec<u16>,
        mul: Vec<u16>,
        neg: Vec<u16>,
        inv: Vec<u16>,
    },
    /// Discrete log / antilog tables; additions go through the digits.
    LogExp {
        exp: Vec<u16>,
        log: Vec<u32>,
        neg: Vec<u16>,
    },
}

struct FieldInner {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: u32,
    arith: Arith,
}

/// A finite field `F_{p^e}`. Cheap to clone, immutable, `Send + Sync`.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.e == other.0.e)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.label())
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, e)`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1 && p <= u32::MAX as u64).then_some((p as u32, e))
}

fn field_size(p: u32, e: u32) -> Result<u32, GfError> {
    let mut q: u64 = 1;
    for _ in 0..e {
        q *= p as u64;
        if q > MAX_FIELD_SIZE as u64 {
            return Err(GfError::TooLarge { p, e, max: MAX_FIELD_SIZE });
        }
    }
    Ok(q as u32)
}

fn least_primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let factors = polymod::prime_factors(p as u64 - 1);
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&l| polymod::pow_mod(g as u64, (p as u64 - 1) / l, p as u64) != 1)
        })
        .expect("every prime has a primitive root")
}

impl Field {
    /// Builds `F_{p^e}` from the compiled-in modulus table.
    pub fn new(p: u32, e: u32) -> Result<Self, GfError> {
        Self::build(p, e, false)
    }

    /// Like [`Field::new`], but searches for the Conway polynomial when the
    /// table has no entry.
    pub fn new_or_generate(p: u32, e: u32) -> Result<Self, GfError> {
        Self::build(p, e, true)
    }

    pub fn prime(p: u32) -> Result<Self, GfError> {
        Self::new(p, 1)
    }

    /// Accepts `"p"`, `"p^e"` or a prime power written out (`"9"`).
    pub fn parse(text: &str) -> Result<Self, GfError> {
        let bad = || GfError::BadFieldSpec(text.to_string());
        let text = text.trim();
        if let Some((p, e)) = text.split_once('^') {
            let p: u32 = p.trim().parse().map_err(|_| bad())?;
            let e: u32 = e.trim().parse().map_err(|_| bad())?;
            return Self::new(p, e);
        }
        let q: u64 = text.parse().map_err(|_| bad())?;
        let (p, e) = prime_power(q).ok_or_else(bad)?;
        Self::new(p, e)
    }

    fn build(p: u32, e: u32, generate: bool) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if e == 0 {
            return Err(GfError::ZeroDegree);
        }
        let q = field_size(p, e)?;
        let (modulus, generator) = if e == 1 {
            (Vec::new(), least_primitive_root(p))
        } else {
            let modulus = match table_modulus(p, e) {
                Some(m) => m.to_vec(),
                None if generate => conway_polynomial(p, e)?,
                None => return Err(GfError::Unsupported { p, e }),
            };
            (modulus, p)
        };

        let mut inner = FieldInner {
            p,
            e,
            q,
            modulus,
            generator,
            arith: Arith::LogExp { exp: Vec::new(), log: Vec::new(), neg: Vec::new() },
        };
        inner.arith = build_arith(&inner);
        Ok(Field(Arc::new(inner)))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.0.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Ascending coefficients of the monic modulus; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// `"p^e"`, or just `"p"` for a prime field.
    pub fn label(&self) -> String {
        if self.e() == 1 {
            format!("{}", self.p())
        } else {
            format!("{}^{}", self.p(), self.e())
        }
    }

    pub fn has_tables(&self) -> bool {
        matches!(self.0.arith, Arith::Tables { .. })
    }

    pub fn elem(&self, idx: u64) -> Result<Fq, GfError> {
        if idx < self.q() as u64 {
            Ok(Fq(idx as u32))
        } else {
            Err(GfError::InvalidElement { idx, q: self.q() })
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p() as i64) as u32)
    }

    /// The root `t` of the modulus (a primitive element); for prime fields
    /// the least primitive root.
    pub fn generator(&self) -> Fq {
        Fq(self.0.generator)
    }

    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }

    pub fn one(&self) -> Fq {
        Fq::ONE
    }

    /// All elements in increasing encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q()).map(Fq)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fq> {
        (1..self.q()).map(Fq)
    }

    /// Power-basis coordinates of `a`.
    pub fn coords(&self, a: Fq) -> Vec<u32> {
        let p = self.p();
        let mut x = a.0;
        (0..self.e())
            .map(|_| {
                let c = x % p;
                x /= p;
                c
            })
            .collect()
    }

    /// Inverse of [`Field::coords`]; coordinates are reduced mod p and
    /// missing high coordinates are zero.
    pub fn from_coords(&self, coords: &[u32]) -> Fq {
        let p = self.p();
        debug_assert!(coords.len() <= self.e() as usize);
        Fq(coords.iter().rev().fold(0, |acc, &c| acc * p + c % p))
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        if self.e() == 1 {
            return (a + b) % p;
        }
        if p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        match &self.0.arith {
            Arith::Tables { add, .. } => Fq(add[(a.0 * self.q() + b.0) as usize] as u32),
            Arith::LogExp { .. } => Fq(self.add_digits(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        match &self.0.arith {
            Arith::Tables { neg, .. } | Arith::LogExp { neg, .. } => Fq(neg[a.0 as usize] as u32),
        }
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        match &self.0.arith {
            Arith::Tables { mul, .. } => Fq(mul[(a.0 * self.q() + b.0) as usize] as u32),
            Arith::LogExp { exp, log, .. } => {
                if a.0 == 0 || b.0 == 0 {
                    Fq::ZERO
                } else {
                    Fq(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize] as u32)
                }
            }
        }
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, GfError> {
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        Ok(match &self.0.arith {
            Arith::Tables { inv, .. } => Fq(inv[a.0 as usize] as u32),
            Arith::LogExp { exp, log, .. } => {
                let l = log[a.0 as usize];
                Fq(exp[((self.q() - 1 - l) % (self.q() - 1)) as usize] as u32)
            }
        })
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k` with `0^0 = 1`.
    pub fn pow(&self, a: Fq, k: u64) -> Fq {
        let mut base = a;
        let mut k = k;
        let mut acc = Fq::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplies by the integer `k` (repeated addition).
    pub fn scale_int(&self, a: Fq, k: u64) -> Fq {
        self.mul(a, self.from_int((k % self.p() as u64) as i64))
    }

    /// `sum a_i b_i`.
    pub fn dot(&self, a: &[Fq], b: &[Fq]) -> Fq {
        debug_assert_eq!(a.len(), b.len());
        if self.e() == 1 {
            let p = self.p() as u64;
            let mut acc: u64 = 0;
            for (x, y) in a.iter().zip(b) {
                acc += x.0 as u64 * y.0 as u64;
                // keep well clear of overflow for any p < 2^16
                if acc >= 1 << 62 {
                    acc %= p;
                }
            }
            Fq((acc % p) as u32)
        } else {
            a.iter()
                .zip(b)
                .fold(Fq::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
        }
    }

    /// Canonical embedding of this field into `ext`, as a lookup table indexed
    /// by encoding. Requires `ext` to be an extension of the same
    /// characteristic built on a compatible (Conway) modulus.
    pub fn embedding_into(&self, ext: &Field) -> Result<Vec<Fq>, GfError> {
        let err = || GfError::NoEmbedding { from: self.label(), to: ext.label() };
        if ext.p() != self.p() || !ext.e().is_multiple_of(self.e()) {
            return Err(err());
        }
        if self.e() == 1 {
            return Ok(self.elements().collect());
        }
        let exponent = (ext.q() as u64 - 1) / (self.q() as u64 - 1);
        let beta = ext.pow(ext.generator(), exponent);
        // beta must be a root of our modulus
        let root_check = self
            .modulus()
            .iter()
            .rev()
            .fold(Fq::ZERO, |acc, &c| ext.add(ext.mul(acc, beta), ext.from_int(c as i64)));
        if !root_check.is_zero() {
            return Err(err());
        }
        let mut powers = vec![Fq::ONE];
        for i in 1..self.e() as usize {
            powers.push(ext.mul(powers[i - 1], beta));
        }
        Ok(self
            .elements()
            .map(|a| {
                self.coords(a)
                    .iter()
                    .zip(&powers)
                    .fold(Fq::ZERO, |acc, (&c, &b)| {
                        ext.add(acc, ext.mul(ext.from_int(c as i64), b))
                    })
            })
            .collect())
    }
}

impl FromStr for Field {
    type Err = GfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::parse(s)
    }
}

/// JSON description of a field: `{"q": "3^2", "p": 3, "e": 2, "modulus": [2, 2, 1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub q: String,
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u32>,
}

impl From<&Field> for FieldSpec {
    fn from(field: &Field) -> Self {
        FieldSpec {
            q: format!("{}^{}", field.p(), field.e()),
            p: field.p(),
            e: field.e(),
            modulus: field.modulus().to_vec(),
        }
    }
}

fn mul_by_generator(inner: &FieldInner, a: u32) -> u32 {
    let p = inner.p;
    if inner.e == 1 {
        return ((a as u64 * inner.generator as u64) % p as u64) as u32;
    }
    // shift coordinates up by one and fold the overflow through the modulus
    let e = inner.e as usize;
    let mut coords = vec![0u32; e + 1];
    let mut x = a;
    for c in coords.iter_mut().skip(1) {
        *c = x % p;
        x /= p;
    }
    let top = coords[e];
    for (c, &m) in coords[..e].iter_mut().zip(&inner.modulus) {
        *c = (*c + (p - top) * m) % p;
    }
    coords[..e].iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn build_arith(inner: &FieldInner) -> Arith {
    let q = inner.q as usize;
    let order = q - 1;
    let mut exp = vec![0u16; 2 * order.max(1)];
    let mut log = vec![0u32; q];
    let mut x = 1u32;
    for i in 0..order {
        exp[i] = x as u16;
        assert!(
            i == 0 || x != 1,
            "modulus for {}^{} is not primitive",
            inner.p,
            inner.e
        );
        log[x as usize] = i as u32;
        x = mul_by_generator(inner, x);
    }
    assert_eq!(x, 1, "generator order mismatch for {}^{}", inner.p, inner.e);
    for i in order..2 * order {
        exp[i] = exp[i - order];
    }

    let p = inner.p;
    let neg: Vec<u16> = (0..inner.q)
        .map(|a| {
            let mut a = a;
            let mut out = 0;
            let mut place = 1;
            while a > 0 {
                out += ((p - a % p) % p) * place;
                a /= p;
                place *= p;
            }
            out as u16
        })
        .collect();

    if inner.q > TABLE_LIMIT {
        return Arith::LogExp { exp, log, neg };
    }

    let mut mul = vec![0u16; q * q];
    let mut add = vec![0u16; q * q];
    let mut inv = vec![0u16; q];
    for a in 1..q {
        inv[a] = exp[(order - log[a] as usize) % order];
        for b in 1..q {
            mul[a * q + b] = exp[log[a] as usize + log[b] as usize];
        }
    }
    let e = inner.e;
    for a in 0..inner.q {
        for b in 0..inner.q {
            let s = if e == 1 {
                (a + b) % p
            } else if p == 2 {
                a ^ b
            } else {
                let (mut x, mut y, mut out, mut place) = (a, b, 0, 1);
                while x > 0 || y > 0 {
                    out += ((x % p + y % p) % p) * place;
                    x /= p;
                    y /= p;
                    place *= p;
                }
                out
            };
            add[(a * inner.q + b) as usize] = s as u16;
        }
    }
    Arith::Tables { add, mul, neg, inv }
}

impl GfError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            GfError::NotPrime(_) => "gf::not-prime",
            GfError::ZeroDegree => "gf::zero-degree",
            GfError::TooLarge { .. } => "gf::too-large",
            GfError::Unsupported { .. } => "gf::unsupported",
            GfError::ZeroInverse => "gf::zero-inverse",
            GfError::InvalidElement { .. } => "gf::invalid-element",
            GfError::BadFieldSpec(_) => "gf::bad-field-spec",
            GfError::NoEmbedding { .. } => "gf::no-embedding",
        }
    }
}
