//! Smoothness of projective hypersurfaces over the algebraic closure.
//!
//! `V(f)` is smooth iff `f` and its partial derivatives have no common
//! projective zero. That is decided from a reduced degrevlex Groebner basis
//! of the Jacobian ideal: the zero set is empty iff every variable has a pure
//! power among the leading monomials.
//!
//! All ideals here are homogeneous, so each S-polynomial is reduced as a
//! dense vector over the monomials of a single degree.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::formring::{monomials_of_degree, Form, Monomial};
use crate::gf::{Field, Fq, GfError};
use crate::projgeom::PointEnumerator;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmoothnessError {
    #[error("Groebner basis exceeded {limit} elements")]
    TooManyElements { limit: usize },
    #[error("Groebner basis computation reached degree {degree}, over the cap of {limit}")]
    DegreeTooHigh { degree: u32, limit: u32 },
    #[error("generators must share one field and variable count")]
    Incompatible,
    #[error(transparent)]
    Field(#[from] GfError),
}

impl SmoothnessError {
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, SmoothnessError::TooManyElements { .. } | SmoothnessError::DegreeTooHigh { .. })
    }
}

/// Limits that turn a runaway computation into an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerCaps {
    pub max_elements: usize,
    pub max_degree: u32,
}

impl Default for GroebnerCaps {
    fn default() -> Self {
        GroebnerCaps { max_elements: 10_000, max_degree: 60 }
    }
}

/// Nonzero homogeneous generators without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealBasis {
    field: Field,
    nvars: usize,
    gens: Vec<Form>,
}

impl IdealBasis {
    /// Drops zero forms and repeats, keeping first occurrences in order.
    pub fn new(field: &Field, nvars: usize, gens: Vec<Form>) -> Result<Self, SmoothnessError> {
        let mut kept: Vec<Form> = Vec::new();
        for g in gens {
            if g.field() != field || g.nvars() != nvars {
                return Err(SmoothnessError::Incompatible);
            }
            if !g.is_zero() && !kept.contains(&g) {
                kept.push(g);
            }
        }
        Ok(IdealBasis { field: field.clone(), nvars, gens: kept })
    }

    pub fn gens(&self) -> &[Form] {
        &self.gens
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
}

/// `(f, df/dx_0, ..., df/dx_n)` with zero partials dropped. `f` itself is
/// always kept, which matters when the characteristic divides the degree.
pub fn jacobian_ideal(f: &Form) -> IdealBasis {
    let mut gens = vec![f.clone()];
    gens.extend((0..f.nvars()).map(|i| f.partial_derivative(i)));
    IdealBasis::new(f.field(), f.nvars(), gens).expect("partials share the form's ring")
}

/// Reduced Groebner basis: monic, leading monomials pairwise non-divisible,
/// sorted by degree and then by decreasing leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    field: Field,
    nvars: usize,
    elements: Vec<Form>,
}

impl GroebnerBasis {
    pub fn elements(&self) -> &[Form] {
        &self.elements
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().map(|g| g.leading_term().expect("nonzero").0).collect()
    }

    pub fn as_ideal(&self) -> IdealBasis {
        IdealBasis { field: self.field.clone(), nvars: self.nvars, gens: self.elements.clone() }
    }
}

#[derive(Clone, Debug)]
struct Poly {
    degree: u32,
    /// descending, leading coefficient 1
    terms: Vec<(Monomial, Fq)>,
}

impl Poly {
    fn lm(&self) -> Monomial {
        self.terms[0].0
    }
}

/// Monomials of each degree in descending order, with their positions.
struct Ring {
    field: Field,
    nvars: usize,
    by_degree: HashMap<u32, (Vec<Monomial>, HashMap<Monomial, usize>)>,
}

impl Ring {
    fn new(field: &Field, nvars: usize) -> Self {
        Ring { field: field.clone(), nvars, by_degree: HashMap::new() }
    }

    fn degree(&mut self, d: u32) -> &(Vec<Monomial>, HashMap<Monomial, usize>) {
        let nvars = self.nvars;
        self.by_degree.entry(d).or_insert_with(|| {
            let monos = monomials_of_degree(nvars, d);
            let index = monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
            (monos, index)
        })
    }

    fn monic(&self, terms: Vec<(Monomial, Fq)>, degree: u32) -> Option<Poly> {
        let lead = terms.first()?.1;
        let inv = self.field.inv(lead).expect("nonzero");
        let terms = terms.into_iter().map(|(m, c)| (m, self.field.mul(c, inv))).collect();
        Some(Poly { degree, terms })
    }

    /// Adds `c * mult * g` into the dense vector of degree `mult.deg + g.deg`.
    fn axpy(&mut self, dense: &mut [Fq], c: Fq, mult: &Monomial, g: &Poly) {
        let d = mult.degree() + g.degree;
        let field = self.field.clone();
        let (_, index) = self.degree(d);
        for &(t, a) in &g.terms {
            let k = index[&mult.mul(&t)];
            dense[k] = field.add(dense[k], field.mul(c, a));
        }
    }

    /// Complete reduction of a dense vector of degree `d` by `basis`, in
    /// place. Returns the surviving terms, descending.
    fn reduce(&mut self, d: u32, dense: &mut [Fq], basis: &[Poly], skip: Option<usize>) -> Vec<(Monomial, Fq)> {
        let field = self.field.clone();
        let monos = self.degree(d).0.clone();
        let mut out = Vec::new();
        for i in 0..dense.len() {
            let c = dense[i];
            if c.is_zero() {
                continue;
            }
            let m = monos[i];
            let reducer = basis
                .iter()
                .enumerate()
                .find(|(k, g)| Some(*k) != skip && g.degree <= d && g.lm().divides(&m));
            match reducer {
                Some((_, g)) => {
                    let mult = g.lm().quotient_of(&m).expect("divides");
                    self.axpy(dense, field.neg(c), &mult, g);
                    debug_assert!(dense[i].is_zero());
                }
                None => out.push((m, c)),
            }
        }
        out
    }

    fn dense_of(&mut self, p: &Poly) -> Vec<Fq> {
        let (monos, index) = self.degree(p.degree);
        let mut dense = vec![Fq::ZERO; monos.len()];
        for &(m, c) in &p.terms {
            dense[index[&m]] = c;
        }
        dense
    }

    fn to_form(&self, p: &Poly) -> Form {
        Form::from_sorted(&self.field, self.nvars, p.degree, p.terms.clone())
    }

    fn poly_of(&self, f: &Form) -> Option<Poly> {
        self.monic(f.terms().to_vec(), f.degree())
    }
}

/// [`buchberger_with`] under the default caps.
pub fn buchberger(basis: &IdealBasis) -> Result<GroebnerBasis, SmoothnessError> {
    buchberger_with(basis, GroebnerCaps::default())
}

/// Buchberger's algorithm with the normal selection strategy (least lcm
/// degree, then lexicographic pair indices), the coprime-leading-monomial
/// criterion and the chain criterion.
pub fn buchberger_with(basis: &IdealBasis, caps: GroebnerCaps) -> Result<GroebnerBasis, SmoothnessError> {
    let mut ring = Ring::new(&basis.field, basis.nvars);
    let mut g: Vec<Poly> = basis.gens.iter().filter_map(|f| ring.poly_of(f)).collect();
    if g.len() > caps.max_elements {
        return Err(SmoothnessError::TooManyElements { limit: caps.max_elements });
    }
    let mut pending: BTreeSet<(u32, usize, usize)> = BTreeSet::new();
    let mut pair_degree: HashMap<(usize, usize), u32> = HashMap::new();
    let push_pair = |pending: &mut BTreeSet<_>, pair_degree: &mut HashMap<_, _>, g: &[Poly], i: usize, j: usize| {
        let deg = g[i].lm().lcm(&g[j].lm()).degree();
        pending.insert((deg, i, j));
        pair_degree.insert((i, j), deg);
    };
    for j in 0..g.len() {
        for i in 0..j {
            push_pair(&mut pending, &mut pair_degree, &g, i, j);
        }
    }
    while let Some((deg, i, j)) = pending.pop_first() {
        pair_degree.remove(&(i, j));
        let (li, lj) = (g[i].lm(), g[j].lm());
        if li.is_coprime(&lj) {
            continue;
        }
        let lcm = li.lcm(&lj);
        let is_pending = |a: usize, b: usize| pair_degree.contains_key(&(a.min(b), a.max(b)));
        if (0..g.len()).any(|k| k != i && k != j && g[k].lm().divides(&lcm) && !is_pending(i, k) && !is_pending(j, k)) {
            continue;
        }
        if deg > caps.max_degree {
            return Err(SmoothnessError::DegreeTooHigh { degree: deg, limit: caps.max_degree });
        }
        let mut dense = vec![Fq::ZERO; ring.degree(deg).0.len()];
        let one = ring.field.one();
        let mi = li.quotient_of(&lcm).expect("divides");
        let mj = lj.quotient_of(&lcm).expect("divides");
        ring.axpy(&mut dense, one, &mi, &g[i]);
        let minus = ring.field.neg(one);
        ring.axpy(&mut dense, minus, &mj, &g[j]);
        let rem = ring.reduce(deg, &mut dense, &g, None);
        if let Some(p) = ring.monic(rem, deg) {
            if g.len() >= caps.max_elements {
                return Err(SmoothnessError::TooManyElements { limit: caps.max_elements });
            }
            g.push(p);
            let new = g.len() - 1;
            for i in 0..new {
                push_pair(&mut pending, &mut pair_degree, &g, i, new);
            }
        }
    }
    Ok(finalize(&mut ring, g))
}

/// Minimalizes, inter-reduces and sorts.
fn finalize(ring: &mut Ring, g: Vec<Poly>) -> GroebnerBasis {
    let mut minimal: Vec<Poly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let lm = p.lm();
        let dominated = g.iter().enumerate().any(|(l, o)| {
            l != k && o.lm().divides(&lm) && (o.lm() != lm || l < k)
        });
        if !dominated {
            minimal.push(p.clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let p = &minimal[k];
        let mut dense = ring.dense_of(p);
        let lead_idx = ring.degree(p.degree).1[&p.lm()];
        dense[lead_idx] = Fq::ZERO;
        let mut tail = ring.reduce(p.degree, &mut dense, &minimal, Some(k));
        let mut terms = vec![(p.lm(), Fq::ONE)];
        terms.append(&mut tail);
        reduced.push(Poly { degree: p.degree, terms });
    }
    reduced.sort_by(|a, b| a.degree.cmp(&b.degree).then(b.lm().cmp(&a.lm())));
    GroebnerBasis {
        field: ring.field.clone(),
        nvars: ring.nvars,
        elements: reduced.iter().map(|p| ring.to_form(p)).collect(),
    }
}

/// Remainder of `f` under complete division by `gb`; zero iff `f` lies in the ideal.
pub fn normal_form(f: &Form, gb: &GroebnerBasis) -> Form {
    assert!(f.field() == &gb.field && f.nvars() == gb.nvars, "form and basis live in different rings");
    if f.is_zero() {
        return f.clone();
    }
    let mut ring = Ring::new(&gb.field, gb.nvars);
    let basis: Vec<Poly> = gb.elements.iter().filter_map(|e| ring.poly_of(e)).collect();
    let poly = Poly { degree: f.degree(), terms: f.terms().to_vec() };
    let mut dense = ring.dense_of(&poly);
    let rem = ring.reduce(f.degree(), &mut dense, &basis, None);
    Form::from_sorted(&gb.field, gb.nvars, f.degree(), rem)
}

/// Whether the homogeneous ideal with Groebner basis `gb` has no projective
/// zero over the algebraic closure.
pub fn is_projectively_empty(gb: &GroebnerBasis, nvars: usize) -> bool {
    let mut covered = vec![false; nvars];
    for lm in gb.leading_monomials() {
        match lm.pure_power_var() {
            Some(None) => return true,
            Some(Some(i)) if i < nvars => covered[i] = true,
            _ => {}
        }
    }
    covered.into_iter().all(|c| c)
}

/// Whether `V(f)` is smooth over the algebraic closure.
pub fn is_smooth(f: &Form) -> Result<bool, SmoothnessError> {
    is_smooth_with(f, GroebnerCaps::default())
}

pub fn is_smooth_with(f: &Form, caps: GroebnerCaps) -> Result<bool, SmoothnessError> {
    let gb = buchberger_with(&jacobian_ideal(f), caps)?;
    Ok(is_projectively_empty(&gb, f.nvars()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularWitness {
    /// Degree of the extension of the base field the point is defined over.
    pub k: u32,
    /// The field `F_{q^k}` the coordinates are encoded in.
    pub field: String,
    pub point: Vec<Fq>,
}

/// First common zero of the Jacobian generators in `P^n(F_{q^k})`, trying
/// `k = 1, ..., k_max` in turn.
pub fn singular_point_search(f: &Form, k_max: u32) -> Result<Option<SingularWitness>, SmoothnessError> {
    let base = f.field();
    let ideal = jacobian_ideal(f);
    for k in 1..=k_max {
        let ext = if k == 1 { base.clone() } else { Field::new_or_generate(base.p(), base.e() * k)? };
        let emb = base.embedding_into(&ext)?;
        let gens: Vec<Form> = ideal.gens().iter().map(|g| g.map_field(&ext, &emb)).collect();
        let hit = PointEnumerator::new(f.nvars() - 1, &ext)
            .iter()
            .find(|p| gens.iter().all(|g| g.evaluate(p.coords()).is_zero()));
        if let Some(p) = hit {
            return Ok(Some(SingularWitness { k, field: ext.label(), point: p.into_coords() }));
        }
    }
    Ok(None)
}


impl SmoothnessError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            SmoothnessError::TooManyElements { .. } => "smoothness::resource-cap",
            SmoothnessError::DegreeTooHigh { .. } => "smoothness::resource-cap",
            SmoothnessError::Incompatible => "smoothness::incompatible",
            SmoothnessError::Field(e) => e.code(),
        }
    }
}
