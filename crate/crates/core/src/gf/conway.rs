//! Conway polynomials: compiled-in table and a brute-force generator.
//!
//! The Conway polynomial C_{p,e} is the least monic degree-e polynomial over
//! F_p (in the ordering below) that is primitive and whose root, raised to
//! (p^e - 1)/(p^m - 1), is a root of C_{p,m} for every proper divisor m of e.
//! Writing f = x^e + sum_i (-1)^(e-i) a_i x^i, polynomials are compared by the
//! sequence (a_{e-1}, ..., a_0) lexicographically.

use super::polymod::QuotientRing;
use super::{field_size, is_prime, GfError};

/// Ascending coefficients, every extension field with q <= 512.
const TABLE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (2, 9, &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (7, 3, &[4, 0, 6, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 2, &[2, 12, 1]),
    (17, 2, &[3, 16, 1]),
    (19, 2, &[2, 18, 1]),
];

pub fn table_modulus(p: u32, e: u32) -> Option<&'static [u32]> {
    TABLE.iter().find(|&&(tp, te, _)| tp == p && te == e).map(|&(_, _, m)| m)
}

/// Table entries, for exhaustive validation.
pub fn table_entries() -> impl Iterator<Item = (u32, u32, &'static [u32])> {
    TABLE.iter().copied()
}

fn subfield_modulus(p: u32, m: u32) -> Result<Vec<u32>, GfError> {
    match table_modulus(p, m) {
        Some(c) => Ok(c.to_vec()),
        None => conway_polynomial(p, m),
    }
}

/// Searches for C_{p,e} from its definition. Degree 1 gives x - g for the
/// least primitive root g.
pub fn conway_polynomial(p: u32, e: u32) -> Result<Vec<u32>, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if e == 0 {
        return Err(GfError::ZeroDegree);
    }
    field_size(p, e)?;
    let divisors: Vec<u32> = (1..e).filter(|m| e.is_multiple_of(*m)).collect();
    let subfields = divisors
        .iter()
        .map(|&m| subfield_modulus(p, m).map(|c| (m, c)))
        .collect::<Result<Vec<_>, _>>()?;

    let e_us = e as usize;
    let total = (p as u64).pow(e);
    let pe = total - 1;
    // code enumerates (a_{e-1}, ..., a_0) with a_0 varying fastest
    for code in 0..total {
        let mut a = vec![0u32; e_us];
        let mut c = code;
        for ai in a.iter_mut() {
            *ai = (c % p as u64) as u32;
            c /= p as u64;
        }
        // a[0] now holds a_0, a[e-1] holds a_{e-1}
        let mut coeffs = vec![0u32; e_us + 1];
        coeffs[e_us] = 1;
        for i in 0..e_us {
            let sign_negative = (e_us - i) % 2 == 1;
            coeffs[i] = if sign_negative { (p - a[i]) % p } else { a[i] };
        }
        if coeffs[0] == 0 {
            continue;
        }
        let ring = QuotientRing { p: p as u64, modulus: &coeffs };
        if !ring.x_is_primitive() {
            continue;
        }
        let compatible = subfields.iter().all(|(m, sub)| {
            let exponent = pe / ((p as u64).pow(*m) - 1);
            let beta = ring.pow(&ring.x(), exponent);
            QuotientRing::is_zero(&ring.eval(sub, &beta))
        });
        if compatible {
            return Ok(coeffs);
        }
    }
    unreachable!("Conway polynomials exist for every (p, e)")
}
