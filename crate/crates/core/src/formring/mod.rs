//! Sparse homogeneous polynomials ("forms") over F_q.
//!
//! A [`Form`] stores its nonzero terms sorted in descending degrevlex order,
//! which is also the canonical rendering and iteration order.

mod monomial;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::gf::{Field, Fq};
use crate::matrix::Matrix;
use crate::rng::DeterministicRng;

pub use monomial::{monomials_of_degree, Monomial, MAX_EXPONENT, MAX_VARS};
pub use parse::parse_form;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("inhomogeneous input at byte {pos}: term of degree {found}, expected {expected}")]
    Inhomogeneous { pos: usize, expected: u32, found: u32 },
    #[error("variable x{index} at byte {pos} is out of range for {nvars} variables")]
    VariableOutOfRange { pos: usize, index: usize, nvars: usize },
    #[error("exponent too large (maximum {max} per variable)")]
    ExponentOverflow { max: u32 },
    #[error("at most {max} variables are supported, got {got}")]
    TooManyVariables { got: usize, max: usize },
    #[error("monomial of degree {found} in a form of degree {expected}")]
    WrongDegree { expected: u32, found: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("decomposition level {r} must lie in 1..={max}")]
    BadLevel { r: usize, max: usize },
}

#[derive(Clone, Debug)]
pub struct Form {
    field: Field,
    nvars: usize,
    degree: u32,
    terms: Vec<(Monomial, Fq)>,
}

impl PartialEq for Form {
    /// Zero forms compare equal regardless of their declared degree.
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.nvars == other.nvars
            && self.terms == other.terms
            && (self.terms.is_empty() || self.degree == other.degree)
    }
}

impl Eq for Form {}

fn check_nvars(nvars: usize) -> Result<(), FormError> {
    if nvars > MAX_VARS {
        Err(FormError::TooManyVariables { got: nvars, max: MAX_VARS })
    } else {
        Ok(())
    }
}

impl Form {
    pub fn zero(field: &Field, nvars: usize, degree: u32) -> Self {
        assert!(nvars <= MAX_VARS);
        Form { field: field.clone(), nvars, degree, terms: Vec::new() }
    }

    /// The constant form `c` (degree 0).
    pub fn constant(field: &Field, nvars: usize, c: Fq) -> Self {
        Self::from_sorted(field, nvars, 0, vec![(Monomial::one(), c)])
    }

    /// `c * x_i`.
    pub fn variable(field: &Field, nvars: usize, i: usize, c: Fq) -> Self {
        assert!(i < nvars);
        Self::from_sorted(field, nvars, 1, vec![(Monomial::var(i, 1), c)])
    }

    /// Builds a form from arbitrary terms: like terms are combined and zero
    /// coefficients dropped.
    pub fn from_terms<I>(field: &Field, nvars: usize, degree: u32, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (Monomial, Fq)>,
    {
        check_nvars(nvars)?;
        let mut acc: BTreeMap<Monomial, Fq> = BTreeMap::new();
        for (m, c) in terms {
            if m.degree() != degree {
                return Err(FormError::WrongDegree { expected: degree, found: m.degree() });
            }
            if m.last_var().is_some_and(|v| v >= nvars) {
                return Err(FormError::DimensionMismatch {
                    expected: nvars,
                    got: m.last_var().unwrap() + 1,
                });
            }
            let slot = acc.entry(m).or_insert(Fq::ZERO);
            *slot = field.add(*slot, c);
        }
        let terms = acc.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Form { field: field.clone(), nvars, degree, terms })
    }

    /// From a coefficient vector over [`monomials_of_degree`] order.
    pub fn from_dense(field: &Field, nvars: usize, degree: u32, coeffs: &[Fq]) -> Self {
        let monos = monomials_of_degree(nvars, degree);
        assert_eq!(monos.len(), coeffs.len());
        let terms = monos
            .into_iter()
            .zip(coeffs.iter().copied())
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self::from_sorted(field, nvars, degree, terms)
    }

    /// Terms must already be strictly descending with nonzero coefficients.
    pub(crate) fn from_sorted(field: &Field, nvars: usize, degree: u32, terms: Vec<(Monomial, Fq)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(m, c)| !c.is_zero() && m.degree() == degree));
        Form { field: field.clone(), nvars, degree, terms }
    }

    fn from_map(field: &Field, nvars: usize, degree: u32, acc: HashMap<Monomial, Fq>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        Self::from_sorted(field, nvars, degree, terms)
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Nonzero terms, descending degrevlex.
    #[inline]
    pub fn terms(&self) -> &[(Monomial, Fq)] {
        &self.terms
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_term(&self) -> Option<(Monomial, Fq)> {
        self.terms.first().copied()
    }

    pub fn coeff(&self, m: &Monomial) -> Fq {
        self.terms
            .binary_search_by(|(t, _)| m.cmp(t))
            .map_or(Fq::ZERO, |i| self.terms[i].1)
    }

    /// Coefficients over every monomial of the form's degree, in
    /// [`monomials_of_degree`] order.
    pub fn dense_coeffs(&self) -> Vec<Fq> {
        let monos = monomials_of_degree(self.nvars, self.degree);
        let mut out = vec![Fq::ZERO; monos.len()];
        let mut it = self.terms.iter().peekable();
        for (slot, m) in out.iter_mut().zip(&monos) {
            if let Some((tm, c)) = it.peek() {
                if tm == m {
                    *slot = *c;
                    it.next();
                }
            }
        }
        out
    }

    fn assert_compatible(&self, other: &Form) {
        assert!(self.field == other.field, "forms over different fields");
        assert_eq!(self.nvars, other.nvars, "forms in different numbers of variables");
    }

    pub fn add(&self, other: &Form) -> Form {
        self.assert_compatible(other);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "adding forms of different degrees");
        let f = &self.field;
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (self.terms[i], other.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = f.add(a.1, b.1);
                    if !c.is_zero() {
                        out.push((a.0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Form::from_sorted(f, self.nvars, self.degree, out)
    }

    pub fn neg(&self) -> Form {
        let f = &self.field;
        let terms = self.terms.iter().map(|&(m, c)| (m, f.neg(c))).collect();
        Form::from_sorted(f, self.nvars, self.degree, terms)
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fq) -> Form {
        if c.is_zero() {
            return Form::zero(&self.field, self.nvars, self.degree);
        }
        let f = &self.field;
        let terms = self.terms.iter().map(|&(m, a)| (m, f.mul(a, c))).collect();
        Form::from_sorted(f, self.nvars, self.degree, terms)
    }

    /// `c * m * self`; monomial multiplication preserves the order.
    pub fn mul_term(&self, m: Monomial, c: Fq) -> Form {
        let degree = self.degree + m.degree();
        if c.is_zero() {
            return Form::zero(&self.field, self.nvars, degree);
        }
        let f = &self.field;
        let terms = self.terms.iter().map(|&(t, a)| (t.mul(&m), f.mul(a, c))).collect();
        Form::from_sorted(f, self.nvars, degree, terms)
    }

    pub fn mul(&self, other: &Form) -> Form {
        self.assert_compatible(other);
        let f = &self.field;
        let degree = self.degree + other.degree;
        let mut acc: HashMap<Monomial, Fq> = HashMap::with_capacity(self.len() * other.len());
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                let slot = acc.entry(a.mul(&b)).or_insert(Fq::ZERO);
                *slot = f.add(*slot, f.mul(ca, cb));
            }
        }
        Form::from_map(f, self.nvars, degree, acc)
    }

    pub fn pow(&self, k: u32) -> Form {
        let mut acc = Form::constant(&self.field, self.nvars, Fq::ONE);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn evaluate(&self, point: &[Fq]) -> Fq {
        assert_eq!(point.len(), self.nvars, "point has the wrong length");
        let f = &self.field;
        let d = self.degree as usize;
        let powers: Vec<Vec<Fq>> = point
            .iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(d + 1);
                row.push(Fq::ONE);
                for k in 1..=d {
                    row.push(f.mul(row[k - 1], x));
                }
                row
            })
            .collect();
        let mut acc = Fq::ZERO;
        for &(m, c) in &self.terms {
            let mut v = c;
            for (i, row) in powers.iter().enumerate() {
                let e = m.exp(i) as usize;
                if e > 0 {
                    v = f.mul(v, row[e]);
                }
            }
            acc = f.add(acc, v);
        }
        acc
    }

    pub fn partial_derivative(&self, i: usize) -> Form {
        assert!(i < self.nvars, "variable index out of range");
        let f = &self.field;
        let degree = self.degree.saturating_sub(1);
        let mut terms = Vec::new();
        for &(m, c) in &self.terms {
            let e = m.exp(i);
            if e == 0 {
                continue;
            }
            let c = f.scale_int(c, e as u64);
            if !c.is_zero() {
                terms.push((m.with_exp(i, e - 1), c));
            }
        }
        // lowering one exponent can reorder terms under degrevlex
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        Form::from_sorted(f, self.nvars, degree, terms)
    }

    /// `f(s * M)`: substitutes `x_j = sum_i s_i M[i][j]`, giving a form of the
    /// same degree in `M.rows()` variables.
    pub fn substitute_linear(&self, m: &Matrix) -> Result<Form, FormError> {
        if m.cols() != self.nvars {
            return Err(FormError::DimensionMismatch { expected: self.nvars, got: m.cols() });
        }
        check_nvars(m.rows())?;
        let f = &self.field;
        let k = m.rows();
        if self.is_zero() {
            return Ok(Form::zero(f, k, self.degree));
        }
        let linear: Vec<Form> = (0..self.nvars)
            .map(|j| {
                let terms = (0..k)
                    .map(|i| (Monomial::var(i, 1), m.get(i, j)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                Form::from_sorted(f, k, 1, terms)
            })
            .collect();
        let mut powers: Vec<Vec<Form>> = linear
            .iter()
            .map(|l| vec![Form::constant(f, k, Fq::ONE), l.clone()])
            .collect();
        let mut acc: HashMap<Monomial, Fq> = HashMap::new();
        for &(mono, c) in &self.terms {
            let mut prod = Form::constant(f, k, c);
            for j in 0..self.nvars {
                let e = mono.exp(j) as usize;
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e {
                    let next = powers[j].last().unwrap().mul(&linear[j]);
                    powers[j].push(next);
                }
                prod = prod.mul(&powers[j][e]);
                if prod.is_zero() {
                    break;
                }
            }
            for &(t, v) in prod.terms() {
                let slot = acc.entry(t).or_insert(Fq::ZERO);
                *slot = f.add(*slot, v);
            }
        }
        Ok(Form::from_map(f, k, self.degree, acc))
    }

    /// Writes the form as `sum_{d} x_0^{d_0} ... x_{r-1}^{d_{r-1}} F_d(x_r, ..., x_n)`.
    pub fn decompose(&self, r: usize) -> Result<Decomposition, FormError> {
        if r == 0 || r > self.nvars.saturating_sub(1) {
            return Err(FormError::BadLevel { r, max: self.nvars.saturating_sub(1) });
        }
        let rest = self.nvars - r;
        let mut groups: BTreeMap<Vec<u32>, Vec<(Monomial, Fq)>> = BTreeMap::new();
        for &(m, c) in &self.terms {
            let (head, tail) = m.split_at(r);
            groups.entry(head).or_default().push((tail, c));
        }
        let parts = groups
            .into_iter()
            .map(|(key, terms)| {
                let deg = self.degree - key.iter().sum::<u32>();
                let form = Form::from_terms(&self.field, rest, deg, terms)
                    .expect("tails of a homogeneous form are homogeneous");
                (key, form)
            })
            .collect();
        Ok(Decomposition { r, nvars: self.nvars, degree: self.degree, field: self.field.clone(), parts })
    }

    /// Applies a coefficient map (typically a field embedding given as a
    /// lookup table) to move the form to `target`.
    pub fn map_field(&self, target: &Field, map: &[Fq]) -> Form {
        let terms = self.terms.iter().map(|&(m, c)| (m, map[c.idx() as usize])).collect();
        Form::from_sorted(target, self.nvars, self.degree, terms)
    }

    /// Uniform nonzero coefficient vector over [`monomials_of_degree`] order,
    /// each coefficient `next_u64 mod q`; all-zero draws are redrawn.
    pub fn random(field: &Field, nvars: usize, degree: u32, rng: &mut DeterministicRng) -> Form {
        let monos = monomials_of_degree(nvars, degree);
        let q = field.q() as u64;
        loop {
            let coeffs: Vec<Fq> = monos.iter().map(|_| Fq::from_idx(rng.below(q) as u32)).collect();
            if coeffs.iter().any(|c| !c.is_zero()) {
                return Form::from_dense(field, nvars, degree, &coeffs);
            }
        }
    }

    fn fmt_coeff(&self, c: Fq) -> String {
        let f = &self.field;
        if c.idx() < f.p() {
            return c.idx().to_string();
        }
        let coords = f.coords(c);
        let mut parts = Vec::new();
        for (i, &a) in coords.iter().enumerate().rev() {
            if a == 0 {
                continue;
            }
            let power = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            parts.push(match (a, i) {
                (_, 0) => a.to_string(),
                (1, _) => power,
                _ => format!("{a}*{power}"),
            });
        }
        format!("({})", parts.join("+"))
    }
}

impl fmt::Display for Form {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        for (k, &(m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(out, " + ")?;
            }
            let vars = m.render(self.nvars);
            match (c == Fq::ONE, vars.is_empty()) {
                (_, true) => write!(out, "{}", self.fmt_coeff(c))?,
                (true, false) => write!(out, "{vars}")?,
                (false, false) => write!(out, "{}*{vars}", self.fmt_coeff(c))?,
            }
        }
        Ok(())
    }
}

/// `f` written as a polynomial in `x_0, ..., x_{r-1}` with coefficients in
/// the remaining variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    r: usize,
    nvars: usize,
    degree: u32,
    field: Field,
    parts: BTreeMap<Vec<u32>, Form>,
}

impl Decomposition {
    pub fn r(&self) -> usize {
        self.r
    }

    /// The coefficient form of `x_0^{d_0} ... x_{r-1}^{d_{r-1}}`, in the
    /// variables `x_r, ..., x_n` (renumbered from 0); `None` means zero.
    pub fn part(&self, exps: &[u32]) -> Option<&Form> {
        self.parts.get(exps)
    }

    /// Nonzero parts keyed by exponent tuple, lexicographic.
    pub fn parts(&self) -> impl Iterator<Item = (&[u32], &Form)> {
        self.parts.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Whether every part with `sum d_i = d` vanishes, i.e. the original form
    /// vanishes on the plane `x_r = ... = x_n = 0`.
    pub fn vanishes_on_standard_plane(&self) -> bool {
        self.parts.keys().all(|k| k.iter().sum::<u32>() < self.degree)
    }

    /// Parts of positive degree, the equations cutting out the planes through
    /// the standard one.
    pub fn lifting_system(&self) -> Vec<&Form> {
        self.parts
            .iter()
            .filter(|(k, _)| k.iter().sum::<u32>() < self.degree)
            .map(|(_, v)| v)
            .collect()
    }

    /// Rebuilds the original form.
    pub fn reassemble(&self) -> Form {
        let mut acc = Form::zero(&self.field, self.nvars, self.degree);
        let mut terms = Vec::new();
        for (key, part) in &self.parts {
            for &(tail, c) in part.terms() {
                terms.push((Monomial::join(key, &tail, self.r), c));
            }
        }
        if !terms.is_empty() {
            acc = Form::from_terms(&self.field, self.nvars, self.degree, terms)
                .expect("parts reassemble to a homogeneous form");
        }
        acc
    }
}


impl FormError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            FormError::Syntax { .. } => "formring::syntax",
            FormError::Inhomogeneous { .. } => "formring::inhomogeneous",
            FormError::VariableOutOfRange { .. } => "formring::variable-out-of-range",
            FormError::ExponentOverflow { .. } => "formring::exponent-overflow",
            FormError::TooManyVariables { .. } => "formring::too-many-variables",
            FormError::WrongDegree { .. } => "formring::wrong-degree",
            FormError::DimensionMismatch { .. } => "formring::dimension-mismatch",
            FormError::BadLevel { .. } => "formring::bad-level",
        }
    }
}
