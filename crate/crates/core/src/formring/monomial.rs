use std::cmp::Ordering;
use std::fmt::Write;

/// Most variables a form may have.
pub const MAX_VARS: usize = 16;
/// Largest exponent of a single variable.
pub const MAX_EXPONENT: u32 = u8::MAX as u32;

/// An exponent vector. Ordered by degrevlex: higher total degree first, ties
/// broken by the last differing variable, where the smaller exponent wins.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: [u8; MAX_VARS],
}

impl std::fmt::Debug for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.last_var().map_or(1, |v| v + 1);
        write!(f, "{:?}", &self.exps[..n])
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    /// Returns `None` if there are too many variables or an exponent exceeds
    /// [`MAX_EXPONENT`].
    pub fn new(exps: &[u32]) -> Option<Self> {
        if exps.len() > MAX_VARS {
            return None;
        }
        let mut m = Monomial::default();
        for (slot, &e) in m.exps.iter_mut().zip(exps) {
            *slot = u8::try_from(e).ok()?;
        }
        Some(m)
    }

    pub fn var(i: usize, e: u32) -> Self {
        let mut m = Monomial::default();
        m.exps[i] = e as u8;
        m
    }

    #[inline]
    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i] as u32
    }

    pub fn exps(&self, nvars: usize) -> Vec<u32> {
        self.exps[..nvars].iter().map(|&e| e as u32).collect()
    }

    pub fn with_exp(mut self, i: usize, e: u32) -> Self {
        self.exps[i] = e as u8;
        self
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn last_var(&self) -> Option<usize> {
        self.exps.iter().rposition(|&e| e > 0)
    }

    /// Index of the only variable present, if the monomial is a pure power
    /// (the constant monomial counts, with `Some(None)`).
    pub fn pure_power_var(&self) -> Option<Option<usize>> {
        let mut support = self.exps.iter().enumerate().filter(|(_, &e)| e > 0);
        match (support.next(), support.next()) {
            (None, _) => Some(None),
            (Some((i, _)), None) => Some(Some(i)),
            _ => None,
        }
    }

    /// Panics on exponent overflow.
    #[inline]
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for (a, &b) in out.exps.iter_mut().zip(&other.exps) {
            *a = a.checked_add(b).expect("exponent overflow");
        }
        out
    }

    pub fn checked_mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = *self;
        for (a, &b) in out.exps.iter_mut().zip(&other.exps) {
            *a = a.checked_add(b)?;
        }
        Some(out)
    }

    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Monomial::default();
        for i in 0..MAX_VARS {
            out.exps[i] = other.exps[i].checked_sub(self.exps[i])?;
        }
        Some(out)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for (a, &b) in out.exps.iter_mut().zip(&other.exps) {
            *a = (*a).max(b);
        }
        out
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(&a, &b)| a == 0 || b == 0)
    }

    /// Splits into the exponents of the first `r` variables and the remaining
    /// monomial, renumbered from 0.
    pub(crate) fn split_at(&self, r: usize) -> (Vec<u32>, Monomial) {
        let head = self.exps[..r].iter().map(|&e| e as u32).collect();
        let mut tail = Monomial::default();
        tail.exps[..MAX_VARS - r].copy_from_slice(&self.exps[r..]);
        (head, tail)
    }

    pub(crate) fn join(head: &[u32], tail: &Monomial, r: usize) -> Monomial {
        let mut out = Monomial::default();
        for (slot, &e) in out.exps.iter_mut().zip(head) {
            *slot = e as u8;
        }
        out.exps[r..].copy_from_slice(&tail.exps[..MAX_VARS - r]);
        out
    }

    /// `x0^2*x3`-style text; empty for the constant monomial.
    pub fn render(&self, nvars: usize) -> String {
        let mut s = String::new();
        for (i, &e) in self.exps[..nvars].iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push('*');
            }
            let _ = write!(s, "x{i}");
            if e > 1 {
                let _ = write!(s, "^{e}");
            }
        }
        s
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..MAX_VARS).rev() {
            match self.exps[i].cmp(&other.exps[i]) {
                Ordering::Equal => continue,
                ord => return ord.reverse(),
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every monomial of degree `d` in `nvars` variables, descending degrevlex.
/// This is the coefficient order of dense vectors and random draws.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    assert!(nvars <= MAX_VARS);
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial::one());
        }
        return out;
    }
    let mut exps = vec![0u32; nvars];
    fill(&mut exps, 0, d, &mut out);
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn fill(exps: &mut [u32], pos: usize, left: u32, out: &mut Vec<Monomial>) {
    if pos == exps.len() - 1 {
        exps[pos] = left;
        out.push(Monomial::new(exps).expect("degree fits"));
        return;
    }
    for e in 0..=left {
        exps[pos] = e;
        fill(exps, pos + 1, left - e, out);
    }
}
