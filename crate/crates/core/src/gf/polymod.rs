//! Dense polynomial arithmetic in F_p[x] / (m), used to validate and
//! generate field moduli.

pub(crate) fn pow_mod(base: u64, exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut b = base % m;
    let mut k = exp;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        k >>= 1;
    }
    acc
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The quotient ring F_p[x] / (modulus) for a monic modulus of degree e.
pub(crate) struct QuotientRing<'a> {
    pub p: u64,
    pub modulus: &'a [u32],
}

impl QuotientRing<'_> {
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = 1 % self.p;
        v
    }

    pub fn x(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        if self.degree() == 1 {
            // x = -m_0 in F_p[x]/(x + m_0)
            v[0] = (self.p - self.modulus[0] as u64 % self.p) % self.p;
        } else {
            v[1] = 1;
        }
        v
    }

    pub fn constant(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = c % self.p;
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let e = self.degree();
        let p = self.p;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..e {
                let m = self.modulus[i] as u64;
                prod[k - e + i] = (prod[k - e + i] + (p - c) * m) % p;
            }
        }
        prod.truncate(e);
        prod
    }

    pub fn pow(&self, a: &[u64], mut k: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Evaluates the polynomial with ascending F_p-coefficients `poly` at `a`.
    pub fn eval(&self, poly: &[u32], a: &[u64]) -> Vec<u64> {
        poly.iter().rev().fold(vec![0; self.degree()], |acc, &c| {
            self.add(&self.mul(&acc, a), &self.constant(c as u64))
        })
    }

    pub fn is_zero(a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Whether x has multiplicative order exactly p^e - 1, which holds iff the
    /// modulus is primitive (in particular irreducible).
    pub fn x_is_primitive(&self) -> bool {
        let order = self.p.pow(self.degree() as u32) - 1;
        let x = self.x();
        if self.pow(&x, order) != self.one() {
            return false;
        }
        prime_factors(order)
            .into_iter()
            .all(|l| self.pow(&x, order / l) != self.one())
    }
}

/// For testing: is the degree-e monic `modulus` irreducible over F_p (by
/// exhaustive search for monic factors of degree at most e / 2)?
#[cfg(test)]
pub(crate) fn is_irreducible_brute(p: u32, modulus: &[u32]) -> bool {
    let e = modulus.len() - 1;
    for deg in 1..=e / 2 {
        let count = (p as u64).pow(deg as u32);
        for code in 0..count {
            let mut factor = Vec::with_capacity(deg + 1);
            let mut c = code;
            for _ in 0..deg {
                factor.push((c % p as u64) as u32);
                c /= p as u64;
            }
            factor.push(1);
            if divides(p, &factor, modulus) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
fn divides(p: u32, factor: &[u32], poly: &[u32]) -> bool {
    let p = p as i64;
    let mut rem: Vec<i64> = poly.iter().map(|&c| c as i64).collect();
    let df = factor.len() - 1;
    for k in (df..rem.len()).rev() {
        let c = rem[k].rem_euclid(p);
        if c == 0 {
            continue;
        }
        for (i, &f) in factor.iter().enumerate() {
            let idx = k - df + i;
            rem[idx] = (rem[idx] - c * f as i64).rem_euclid(p);
        }
    }
    rem[..df].iter().all(|&c| c.rem_euclid(p) == 0)
}
