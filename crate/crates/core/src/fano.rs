//! Linear subspaces on hypersurfaces: containment, line counting, point
//! search and the constructive lifting of a contained plane to one of higher
//! dimension.
//!
//! A line spanned by the RREF rows `a, b` lies on `V(f)` iff the binary form
//! `f(s a + t b) = sum_k c_k s^(d-k) t^k` is identically zero. Since `c_0 =
//! f(a)` and `c_d = f(b)` and both rows are canonical points, a table of point
//! values discards almost every line before any middle coefficient is
//! computed. [`LineTable`] additionally stores, per line, the linear
//! functionals sending a coefficient vector to `c_1, ..., c_{d-1}`, so a
//! census over many forms of the same shape reduces to dot products.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::prop2_holds;
use crate::formring::{monomials_of_degree, Form, FormError, Monomial};
use crate::gf::{Field, Fq};
use crate::matrix::Matrix;
use crate::projgeom::{
    complete_to_basis, projective_point_count, rref, vector_code, Plane, PointEnumerator, ProjPoint,
};

/// Default memory budget for a [`LineTable`], 2 GiB.
pub const DEFAULT_TABLE_CAP: usize = 2 << 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanoError {
    #[error("dimension mismatch: form has {expected} variables, plane has {got} columns")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the input plane is not contained in the hypersurface")]
    NotContained,
    #[error("cannot lift a {from}-plane to a {to}-plane in P^{n}")]
    BadTarget { from: usize, to: usize, n: usize },
    #[error("line table needs about {needed} bytes, over the cap of {cap}")]
    MemoryCap { needed: usize, cap: usize },
    #[error("line table was built for {expected}, form is {got}")]
    TableMismatch { expected: String, got: String },
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineCountResult {
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<Plane>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LiftStatus {
    Found,
    NotFound,
    GuaranteeViolated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftOutcome {
    pub status: LiftStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane: Option<Plane>,
}

fn check_dims(f: &Form, plane: &Plane) -> Result<(), FanoError> {
    if plane.ambient_dim() + 1 != f.nvars() {
        return Err(FanoError::DimensionMismatch { expected: f.nvars(), got: plane.ambient_dim() + 1 });
    }
    Ok(())
}

/// Whether the plane lies on `V(f)`: every coefficient of `f` restricted to
/// the plane vanishes. Exact for any q, including q <= d.
pub fn plane_contained(f: &Form, plane: &Plane) -> Result<bool, FanoError> {
    check_dims(f, plane)?;
    Ok(f.substitute_linear(plane.matrix())?.is_zero())
}

/// Lines of P^n(F_q) in enumeration order, as pairs of base-q row codes.
///
/// For pivots `i < j` the block holds `q^(2n-i-j-1)` lines. Its offset splits
/// as `idx0 * q^(n-j) + idx1`, where `idx1` is the tail of the second row and
/// `idx0` the free entries of the first row with column j skipped.
#[derive(Clone, Debug)]
struct LineBlocks {
    q: u64,
    n: usize,
    /// (i, j, first index, count)
    blocks: Vec<(usize, usize, u64, u64)>,
    total: u64,
}

impl LineBlocks {
    fn new(n: usize, q: u64) -> Self {
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 0..=n {
            for j in i + 1..=n {
                let count = q.pow((2 * n - i - j - 1) as u32);
                blocks.push((i, j, start, count));
                start += count;
            }
        }
        LineBlocks { q, n, blocks, total: start }
    }

    fn for_each(&self, lo: u64, hi: u64, mut visit: impl FnMut(u64, u64, u64)) {
        let (q, n) = (self.q, self.n);
        let hi = hi.min(self.total);
        for &(i, j, start, count) in &self.blocks {
            if start + count <= lo || start >= hi {
                continue;
            }
            let tail = q.pow((n - j) as u32);
            let lead0 = q.pow((n - i) as u32);
            let from = lo.max(start) - start;
            let to = hi.min(start + count) - start;
            for off in from..to {
                let (idx0, idx1) = (off / tail, off % tail);
                let code0 = lead0 + (idx0 / tail) * tail * q + idx0 % tail;
                let code1 = tail + idx1;
                visit(start + off, code0, code1);
            }
        }
    }
}

fn decode(code: u64, len: usize, q: u64) -> Vec<Fq> {
    let mut v = vec![Fq::ZERO; len];
    let mut rest = code;
    for slot in v.iter_mut().rev() {
        *slot = Fq::from_idx((rest % q) as u32);
        rest /= q;
    }
    v
}

fn line_from_codes(c0: u64, c1: u64, len: usize, q: u64) -> Plane {
    Plane::from_rref_unchecked(Matrix::from_rows(vec![decode(c0, len, q), decode(c1, len, q)]))
}

/// `f` at every canonical point, indexed by vector code (other slots unused).
fn point_values_direct(f: &Form) -> Vec<Fq> {
    let field = f.field();
    let q = field.q() as u64;
    let n = f.nvars() - 1;
    let mut vals = vec![Fq::ONE; q.pow(n as u32 + 1) as usize];
    for p in PointEnumerator::new(n, field).iter() {
        vals[vector_code(p.coords(), q) as usize] = f.evaluate(p.coords());
    }
    vals
}

fn degenerate_count(f: &Form, list: bool) -> Option<LineCountResult> {
    let n = f.nvars() - 1;
    if n == 0 || (f.degree() == 0 && !f.is_zero()) {
        return Some(LineCountResult { count: 0, lines: list.then(Vec::new) });
    }
    None
}

fn scan_lines(
    f: &Form,
    vals: &[Fq],
    blocks: &LineBlocks,
    lo: u64,
    hi: u64,
    list: bool,
    middle_vanishes: impl Fn(u64, u64, u64) -> bool,
) -> LineCountResult {
    let len = f.nvars();
    let q = blocks.q;
    let mut count = 0;
    let mut lines = Vec::new();
    blocks.for_each(lo, hi, |idx, c0, c1| {
        if vals[c0 as usize].is_zero() && vals[c1 as usize].is_zero() && middle_vanishes(idx, c0, c1) {
            count += 1;
            if list {
                lines.push(line_from_codes(c0, c1, len, q));
            }
        }
    });
    LineCountResult { count, lines: list.then_some(lines) }
}

/// Number of F_q-rational lines on `V(f)`, optionally listed in enumeration
/// order. Uses the endpoint filter and direct substitution for survivors.
pub fn count_lines(f: &Form, list: bool) -> LineCountResult {
    if let Some(r) = degenerate_count(f, list) {
        return r;
    }
    let q = f.field().q() as u64;
    let len = f.nvars();
    let blocks = LineBlocks::new(len - 1, q);
    let vals = point_values_direct(f);
    scan_lines(f, &vals, &blocks, 0, blocks.total, list, |_, c0, c1| {
        let m = Matrix::from_rows(vec![decode(c0, len, q), decode(c1, len, q)]);
        f.substitute_linear(&m).expect("shapes agree").is_zero()
    })
}

/// [`count_lines`] split over index ranges on the current rayon pool; the
/// result does not depend on the split.
pub fn count_lines_par(f: &Form, list: bool) -> LineCountResult {
    if let Some(r) = degenerate_count(f, list) {
        return r;
    }
    let q = f.field().q() as u64;
    let len = f.nvars();
    let blocks = LineBlocks::new(len - 1, q);
    let vals = point_values_direct(f);
    let chunk = (blocks.total / 256).max(1024);
    let parts: Vec<LineCountResult> = (0..blocks.total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            scan_lines(f, &vals, &blocks, c * chunk, (c + 1) * chunk, list, |_, c0, c1| {
                let m = Matrix::from_rows(vec![decode(c0, len, q), decode(c1, len, q)]);
                f.substitute_linear(&m).expect("shapes agree").is_zero()
            })
        })
        .collect();
    merge(parts, list)
}

fn merge(parts: Vec<LineCountResult>, list: bool) -> LineCountResult {
    let count = parts.iter().map(|p| p.count).sum();
    let lines = list.then(|| parts.into_iter().flat_map(|p| p.lines.unwrap_or_default()).collect());
    LineCountResult { count, lines }
}

/// Precomputed line data for every form of one shape `(n, d, q)`.
pub struct LineTable {
    field: Field,
    n: usize,
    d: u32,
    nmonos: usize,
    blocks: LineBlocks,
    /// Codes of the canonical points, in enumeration order.
    point_codes: Vec<u64>,
    /// Monomial values at each point, `point_codes.len() x nmonos`.
    point_monos: Vec<Fq>,
    /// Per line, `d - 1` rows of `nmonos` functionals for `c_1 .. c_{d-1}`.
    functionals: Vec<Fq>,
}

impl LineTable {
    pub fn new(n: usize, d: u32, field: &Field) -> Result<Self, FanoError> {
        Self::with_cap(n, d, field, DEFAULT_TABLE_CAP)
    }

    /// Bytes the table would occupy.
    pub fn estimate_bytes(n: usize, d: u32, q: u64) -> usize {
        let nmonos = monomials_of_degree(n + 1, d).len();
        let lines = LineBlocks::new(n, q).total as usize;
        let points = projective_point_count(n, q) as usize;
        let elem = std::mem::size_of::<Fq>();
        lines.saturating_mul(d.saturating_sub(1) as usize).saturating_mul(nmonos).saturating_mul(elem)
            + points * (nmonos + 2) * elem
            + (q as usize).pow(n as u32 + 1) * elem
    }

    pub fn with_cap(n: usize, d: u32, field: &Field, cap: usize) -> Result<Self, FanoError> {
        assert!(n >= 1 && d >= 1, "line tables need n >= 1 and d >= 1");
        let q = field.q() as u64;
        let needed = Self::estimate_bytes(n, d, q);
        if needed > cap {
            return Err(FanoError::MemoryCap { needed, cap });
        }
        let monos = monomials_of_degree(n + 1, d);
        let nmonos = monos.len();
        let blocks = LineBlocks::new(n, q);

        let mut point_codes = Vec::new();
        let mut point_monos = Vec::new();
        for p in PointEnumerator::new(n, field).iter() {
            point_codes.push(vector_code(p.coords(), q));
            point_monos.extend(monos.iter().map(|m| monomial_value(field, m, p.coords())));
        }

        let width = (d as usize - 1) * nmonos;
        let mut functionals = vec![Fq::ZERO; blocks.total as usize * width];
        if width > 0 {
            let per_chunk = 4096usize;
            functionals.par_chunks_mut(per_chunk * width).enumerate().for_each(|(c, out)| {
                let lo = (c * per_chunk) as u64;
                let hi = lo + (out.len() / width) as u64;
                let mut k = 0;
                blocks.for_each(lo, hi, |_, c0, c1| {
                    let a = decode(c0, n + 1, q);
                    let b = decode(c1, n + 1, q);
                    middle_functionals(field, &monos, d, &a, &b, &mut out[k * width..(k + 1) * width]);
                    k += 1;
                });
            });
        }
        Ok(LineTable { field: field.clone(), n, d, nmonos, blocks, point_codes, point_monos, functionals })
    }

    pub fn line_count(&self) -> u64 {
        self.blocks.total
    }

    fn check(&self, f: &Form) -> Result<(), FanoError> {
        if f.field() != &self.field || f.nvars() != self.n + 1 || f.degree() != self.d {
            return Err(FanoError::TableMismatch {
                expected: format!("q={} n={} d={}", self.field.label(), self.n, self.d),
                got: format!("q={} n={} d={}", f.field().label(), f.nvars() - 1, f.degree()),
            });
        }
        Ok(())
    }

    fn point_values(&self, coeffs: &[Fq]) -> Vec<Fq> {
        let q = self.field.q() as u64;
        let mut vals = vec![Fq::ONE; q.pow(self.n as u32 + 1) as usize];
        for (k, &code) in self.point_codes.iter().enumerate() {
            let row = &self.point_monos[k * self.nmonos..(k + 1) * self.nmonos];
            vals[code as usize] = self.field.dot(coeffs, row);
        }
        vals
    }

    /// Lines with index in `[lo, hi)` lying on `V(f)`.
    pub fn count_range(&self, f: &Form, lo: u64, hi: u64, list: bool) -> Result<LineCountResult, FanoError> {
        self.check(f)?;
        if f.is_zero() {
            let count = hi.min(self.blocks.total).saturating_sub(lo);
            let lines = list.then(|| {
                let mut v = Vec::new();
                self.blocks.for_each(lo, hi, |_, c0, c1| {
                    v.push(line_from_codes(c0, c1, self.n + 1, self.blocks.q))
                });
                v
            });
            return Ok(LineCountResult { count, lines });
        }
        let coeffs = f.dense_coeffs();
        let vals = self.point_values(&coeffs);
        Ok(self.scan_with(f, &coeffs, &vals, lo, hi, list))
    }

    fn scan_with(&self, f: &Form, coeffs: &[Fq], vals: &[Fq], lo: u64, hi: u64, list: bool) -> LineCountResult {
        let width = (self.d as usize - 1) * self.nmonos;
        scan_lines(f, vals, &self.blocks, lo, hi, list, |idx, _, _| {
            let base = idx as usize * width;
            (0..self.d as usize - 1).all(|k| {
                let row = &self.functionals[base + k * self.nmonos..base + (k + 1) * self.nmonos];
                self.field.dot(coeffs, row).is_zero()
            })
        })
    }

    pub fn count(&self, f: &Form, list: bool) -> Result<LineCountResult, FanoError> {
        self.count_range(f, 0, self.blocks.total, list)
    }

    /// Count with the line range split across the current rayon pool.
    pub fn count_par(&self, f: &Form, list: bool) -> Result<LineCountResult, FanoError> {
        self.check(f)?;
        if f.is_zero() {
            return self.count(f, list);
        }
        let coeffs = f.dense_coeffs();
        let vals = self.point_values(&coeffs);
        let total = self.blocks.total;
        let chunk = (total / 256).max(1024);
        let parts: Vec<LineCountResult> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| self.scan_with(f, &coeffs, &vals, c * chunk, (c + 1) * chunk, list))
            .collect();
        Ok(merge(parts, list))
    }
}

fn monomial_value(field: &Field, m: &Monomial, point: &[Fq]) -> Fq {
    point
        .iter()
        .enumerate()
        .fold(Fq::ONE, |acc, (i, &x)| field.mul(acc, field.pow(x, m.exp(i) as u64)))
}

/// Writes, for `k = 1 .. d-1` and each monomial, the coefficient of
/// `s^(d-k) t^k` in `m(s a + t b)`.
fn middle_functionals(field: &Field, monos: &[Monomial], d: u32, a: &[Fq], b: &[Fq], out: &mut [Fq]) {
    let d = d as usize;
    let nmonos = monos.len();
    // powers[j][e] = (a_j s + b_j t)^e as coefficients by t-degree
    let powers: Vec<Vec<Vec<Fq>>> = a
        .iter()
        .zip(b)
        .map(|(&aj, &bj)| {
            let mut pw = vec![vec![Fq::ONE]];
            for e in 1..=d {
                let prev = &pw[e - 1];
                let mut next = vec![Fq::ZERO; e + 1];
                for (k, &c) in prev.iter().enumerate() {
                    next[k] = field.add(next[k], field.mul(c, aj));
                    next[k + 1] = field.add(next[k + 1], field.mul(c, bj));
                }
                pw.push(next);
            }
            pw
        })
        .collect();
    let mut prod = Vec::with_capacity(d + 1);
    for (mi, m) in monos.iter().enumerate() {
        prod.clear();
        prod.push(Fq::ONE);
        for (j, pw) in powers.iter().enumerate() {
            let e = m.exp(j) as usize;
            if e == 0 {
                continue;
            }
            let factor = &pw[e];
            let mut next = vec![Fq::ZERO; prod.len() + e];
            for (x, &u) in prod.iter().enumerate() {
                if u.is_zero() {
                    continue;
                }
                for (y, &v) in factor.iter().enumerate() {
                    next[x + y] = field.add(next[x + y], field.mul(u, v));
                }
            }
            prod = next;
        }
        for k in 1..d {
            out[(k - 1) * nmonos + mi] = prod[k];
        }
    }
}

/// Independent count: every contained line has at least three rational
/// points, so it is spanned by some pair of rational points of `V(f)`.
pub fn count_lines_pointpair_oracle(f: &Form) -> u64 {
    let field = f.field();
    let pts: Vec<ProjPoint> = PointEnumerator::new(f.nvars() - 1, field)
        .iter()
        .filter(|p| f.evaluate(p.coords()).is_zero())
        .collect();
    let mut seen: HashSet<Plane> = HashSet::new();
    let mut on: HashSet<Plane> = HashSet::new();
    for (i, p) in pts.iter().enumerate() {
        for r in &pts[i + 1..] {
            let m = Matrix::from_rows(vec![p.coords().to_vec(), r.coords().to_vec()]);
            let line = rref(field, &m).expect("distinct points span a line");
            if seen.insert(line.clone()) && plane_contained(f, &line).expect("shapes agree") {
                on.insert(line);
            }
        }
    }
    on.len() as u64
}

/// First rational zero of `f` in point enumeration order.
pub fn find_point(f: &Form) -> Option<ProjPoint> {
    PointEnumerator::new(f.nvars() - 1, f.field()).iter().find(|p| f.evaluate(p.coords()).is_zero())
}

/// `|V(f)(F_q)|`.
pub fn point_count(f: &Form) -> u64 {
    PointEnumerator::new(f.nvars() - 1, f.field())
        .iter()
        .filter(|p| f.evaluate(p.coords()).is_zero())
        .count() as u64
}

/// Extends the contained plane `plane` to a contained r-plane through it,
/// one dimension at a time. Each step moves the current plane to the span of
/// the first unit vectors, writes the form as a polynomial in those
/// coordinates, and looks for the first common zero of the coefficient forms
/// of degree below d.
pub fn lift_plane(f: &Form, plane: &Plane, r: usize) -> Result<LiftOutcome, FanoError> {
    check_dims(f, plane)?;
    let n = f.nvars() - 1;
    if plane.dim() >= r || r > n {
        return Err(FanoError::BadTarget { from: plane.dim(), to: r, n });
    }
    if !plane_contained(f, plane)? {
        return Err(FanoError::NotContained);
    }
    let field = f.field();
    let mut current = plane.clone();
    while current.dim() < r {
        let rp = current.dim();
        let basis = complete_to_basis(&current);
        let g = f.substitute_linear(&basis)?;
        let dec = g.decompose(rp + 1)?;
        assert!(dec.vanishes_on_standard_plane(), "contained plane must be standard after the change");
        let system = dec.lifting_system();
        let found = PointEnumerator::new(n - rp - 1, field)
            .iter()
            .find(|v| system.iter().all(|part| part.evaluate(v.coords()).is_zero()));
        let Some(v) = found else {
            let status = if prop2_holds(n as u32, f.degree(), rp as u32 + 1) {
                LiftStatus::GuaranteeViolated
            } else {
                LiftStatus::NotFound
            };
            return Ok(LiftOutcome { status, plane: None });
        };
        let mut std = Matrix::zeros(rp + 2, n + 1);
        for i in 0..=rp {
            std.set(i, i, Fq::ONE);
        }
        for (k, &c) in v.coords().iter().enumerate() {
            std.set(rp + 1, rp + 1 + k, c);
        }
        current = rref(field, &std.mul(&basis, field)).expect("basis is invertible");
    }
    Ok(LiftOutcome { status: LiftStatus::Found, plane: Some(current) })
}


impl FanoError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            FanoError::DimensionMismatch { .. } => "fano::dimension-mismatch",
            FanoError::NotContained => "fano::not-contained",
            FanoError::BadTarget { .. } => "fano::bad-target",
            FanoError::MemoryCap { .. } => "fano::memory-cap",
            FanoError::TableMismatch { .. } => "fano::table-mismatch",
            FanoError::Form(e) => e.code(),
        }
    }
}
