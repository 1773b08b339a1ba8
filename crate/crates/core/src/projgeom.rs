//! Points and r-planes of P^n(F_q): canonical representatives, exhaustive
//! enumeration in a fixed order, and basis completion.
//!
//! A point is scaled so its first nonzero coordinate is 1. An r-plane is the
//! reduced row echelon basis of its (r+1)-dimensional row space, which is
//! unique, so planes compare by matrix equality.
//!
//! Points enumerate in lexicographic order of their coordinate encodings,
//! which is the increasing order of [`vector_code`]. Planes enumerate block by
//! block over pivot-column sets in lexicographic order; inside a block the
//! free entries, read row-major, count up in base q with the last one fastest.
//! Both orders support random access so scans can be split into index ranges.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, Fq};
use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjError {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("matrix has rank {rank}, expected full row rank {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is not representable as a field element")]
    BadEntry(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjPoint {
    coords: Vec<Fq>,
}

impl ProjPoint {
    pub fn coords(&self) -> &[Fq] {
        &self.coords
    }

    /// Projective dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn into_coords(self) -> Vec<Fq> {
        self.coords
    }
}

/// Scales `v` so that its first nonzero coordinate is 1.
pub fn canonical_point(field: &Field, v: &[Fq]) -> Result<ProjPoint, ProjError> {
    let lead = v.iter().find(|c| !c.is_zero()).ok_or(ProjError::ZeroVector)?;
    let inv = field.inv(*lead).expect("nonzero");
    Ok(ProjPoint { coords: v.iter().map(|&c| field.mul(c, inv)).collect() })
}

/// Base-q integer with the first coordinate most significant.
#[inline]
pub fn vector_code(v: &[Fq], q: u64) -> u64 {
    v.iter().fold(0, |acc, c| acc * q + c.idx() as u64)
}

/// `|P^n(F_q)| = (q^{n+1} - 1) / (q - 1)`.
pub fn projective_point_count(n: usize, q: u64) -> u64 {
    (0..=n as u32).map(|i| q.pow(i)).sum()
}

/// Random access to the points of P^n(F_q) in enumeration order.
#[derive(Clone, Debug)]
pub struct PointEnumerator {
    field: Field,
    n: usize,
    total: u64,
}

impl PointEnumerator {
    pub fn new(n: usize, field: &Field) -> Self {
        PointEnumerator { field: field.clone(), n, total: projective_point_count(n, field.q() as u64) }
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point_at(&self, idx: u64) -> ProjPoint {
        assert!(idx < self.total, "point index out of range");
        let q = self.field.q() as u64;
        // the block led by coordinate `lead` holds q^(n - lead) points, last
        // coordinate first
        let mut rest = idx;
        let mut lead = self.n;
        loop {
            let size = q.pow((self.n - lead) as u32);
            if rest < size {
                break;
            }
            rest -= size;
            lead -= 1;
        }
        let mut coords = vec![Fq::ZERO; self.n + 1];
        coords[lead] = Fq::ONE;
        for slot in coords[lead + 1..].iter_mut().rev() {
            *slot = Fq::from_idx((rest % q) as u32);
            rest /= q;
        }
        ProjPoint { coords }
    }

    pub fn range(&self, lo: u64, hi: u64) -> impl Iterator<Item = ProjPoint> + '_ {
        (lo..hi.min(self.total)).map(move |i| self.point_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        self.range(0, self.total)
    }
}

/// Every point of P^n(F_q), in enumeration order.
pub fn enumerate_points(n: usize, field: &Field) -> impl Iterator<Item = ProjPoint> {
    let e = PointEnumerator::new(n, field);
    (0..e.len()).map(move |i| e.point_at(i))
}

/// An r-plane in P^n, stored as its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Plane {
    mat: Matrix,
}

impl Plane {
    /// Caller guarantees `mat` is in reduced row echelon form with full rank.
    pub(crate) fn from_rref_unchecked(mat: Matrix) -> Self {
        Plane { mat }
    }

    /// Canonicalizes any full-rank basis.
    pub fn from_matrix(field: &Field, m: &Matrix) -> Result<Self, ProjError> {
        rref(field, m)
    }

    /// Parses `[[...], ...]` of element encodings and canonicalizes it.
    pub fn from_json(field: &Field, text: &str) -> Result<Self, serde_json::Error> {
        let m: Matrix = serde_json::from_str(text)?;
        for i in 0..m.rows() {
            for &c in m.row(i) {
                if c.idx() >= field.q() {
                    return Err(serde::de::Error::custom(ProjError::BadEntry(c.idx())));
                }
            }
        }
        rref(field, &m).map_err(serde::de::Error::custom)
    }

    /// The point `p` as a 0-plane.
    pub fn from_point(p: &ProjPoint) -> Self {
        Plane { mat: Matrix::from_rows(vec![p.coords.clone()]) }
    }

    /// Projective dimension r.
    pub fn dim(&self) -> usize {
        self.mat.rows() - 1
    }

    /// Ambient projective dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.mat.cols() - 1
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        self.mat.row(i)
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.mat.rows())
            .map(|i| self.mat.row(i).iter().position(|c| !c.is_zero()).expect("full rank"))
            .collect()
    }

    /// Whether the vector `v` lies in the row space.
    pub fn contains_vector(&self, v: &[Fq], field: &Field) -> bool {
        // reduce v by the echelon rows; in RREF the coefficient of row i is v[pivot_i]
        let mut w = v.to_vec();
        for (i, piv) in self.pivots().into_iter().enumerate() {
            let c = w[piv];
            if c.is_zero() {
                continue;
            }
            for (slot, &a) in w.iter_mut().zip(self.mat.row(i)) {
                *slot = field.sub(*slot, field.mul(c, a));
            }
        }
        w.iter().all(|c| c.is_zero())
    }

    pub fn contains_plane(&self, other: &Plane, field: &Field) -> bool {
        other.ambient_dim() == self.ambient_dim()
            && (0..other.mat.rows()).all(|i| self.contains_vector(other.row(i), field))
    }

    pub fn contains_point(&self, p: &ProjPoint, field: &Field) -> bool {
        self.contains_vector(p.coords(), field)
    }
}

impl From<Plane> for Matrix {
    fn from(p: Plane) -> Matrix {
        p.mat
    }
}

impl<'de> Deserialize<'de> for Plane {
    /// Accepts only matrices already in reduced row echelon form; use
    /// [`Plane::from_json`] to canonicalize arbitrary input.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mat = Matrix::deserialize(d)?;
        if !is_rref(&mat) {
            return Err(serde::de::Error::custom("matrix is not in reduced row echelon form"));
        }
        Ok(Plane { mat })
    }
}

/// Checks the echelon shape: strictly increasing pivots equal to 1 with zeros
/// elsewhere in pivot columns, and no zero rows.
pub fn is_rref(m: &Matrix) -> bool {
    let mut last: Option<usize> = None;
    for i in 0..m.rows() {
        let Some(piv) = m.row(i).iter().position(|c| !c.is_zero()) else {
            return false;
        };
        if last.is_some_and(|l| piv <= l) || m.get(i, piv) != Fq::ONE {
            return false;
        }
        if (0..m.rows()).any(|k| k != i && !m.get(k, piv).is_zero()) {
            return false;
        }
        last = Some(piv);
    }
    true
}

/// Canonical plane spanned by the rows of `m`, which must be independent.
pub fn rref(field: &Field, m: &Matrix) -> Result<Plane, ProjError> {
    let mut a = m.clone();
    let pivots = a.rref_in_place(field);
    if pivots.len() < m.rows() || m.rows() == 0 {
        return Err(ProjError::RankDeficient { rank: pivots.len(), rows: m.rows() });
    }
    Ok(Plane { mat: a })
}

/// Exact Gaussian binomial `[a choose b]_q`, the number of b-dimensional
/// subspaces of F_q^a.
pub fn gaussian_binomial(a: u32, b: u32, q: u64) -> BigUint {
    if b > a {
        return BigUint::from(0u32);
    }
    let q = BigUint::from(q);
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..b {
        num *= q.pow(a - i) - &one;
        den *= q.pow(i + 1) - &one;
    }
    num / den
}

#[derive(Clone, Debug)]
struct PivotBlock {
    pivots: Vec<usize>,
    /// (row, column) of each free entry, row-major.
    free: Vec<(usize, usize)>,
    start: u64,
    count: u64,
}

/// Random access to the r-planes of P^n(F_q) in enumeration order.
#[derive(Clone, Debug)]
pub struct PlaneEnumerator {
    field: Field,
    r: usize,
    n: usize,
    blocks: Vec<PivotBlock>,
    total: u64,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl PlaneEnumerator {
    /// Panics unless `r <= n`.
    pub fn new(r: usize, n: usize, field: &Field) -> Self {
        assert!(r <= n, "plane dimension exceeds ambient dimension");
        let q = field.q() as u64;
        let mut blocks = Vec::new();
        let mut start = 0u64;
        for pivots in combinations(n + 1, r + 1) {
            let mut free = Vec::new();
            for (row, &piv) in pivots.iter().enumerate() {
                for col in piv + 1..=n {
                    if !pivots.contains(&col) {
                        free.push((row, col));
                    }
                }
            }
            let count = q
                .checked_pow(free.len() as u32)
                .expect("too many planes to enumerate");
            blocks.push(PivotBlock { pivots, free, start, count });
            start = start.checked_add(count).expect("too many planes to enumerate");
        }
        PlaneEnumerator { field: field.clone(), r, n, blocks, total: start }
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn plane_at(&self, idx: u64) -> Plane {
        assert!(idx < self.total, "plane index out of range");
        let b = self.blocks.partition_point(|b| b.start + b.count <= idx);
        let block = &self.blocks[b];
        let q = self.field.q() as u64;
        let mut mat = Matrix::zeros(self.r + 1, self.n + 1);
        for (row, &piv) in block.pivots.iter().enumerate() {
            mat.set(row, piv, Fq::ONE);
        }
        let mut rest = idx - block.start;
        for &(row, col) in block.free.iter().rev() {
            mat.set(row, col, Fq::from_idx((rest % q) as u32));
            rest /= q;
        }
        Plane { mat }
    }

    pub fn range(&self, lo: u64, hi: u64) -> impl Iterator<Item = Plane> + '_ {
        (lo..hi.min(self.total)).map(move |i| self.plane_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Plane> + '_ {
        self.range(0, self.total)
    }
}

/// Every r-plane of P^n(F_q), in enumeration order.
pub fn enumerate_planes(r: usize, n: usize, field: &Field) -> impl Iterator<Item = Plane> {
    let e = PlaneEnumerator::new(r, n, field);
    (0..e.len()).map(move |i| e.plane_at(i))
}

/// Extends the basis of `plane` to a basis of F_q^{n+1} by appending the unit
/// vectors at its non-pivot columns in increasing order. The map `y -> y B`
/// sends the span of `e_0, ..., e_r` onto the plane.
pub fn complete_to_basis(plane: &Plane) -> Matrix {
    let n1 = plane.ambient_dim() + 1;
    let pivots = plane.pivots();
    let mut b = plane.matrix().clone();
    for col in (0..n1).filter(|c| !pivots.contains(c)) {
        let mut row = vec![Fq::ZERO; n1];
        row[col] = Fq::ONE;
        b = b.vstack(&Matrix::from_rows(vec![row]));
    }
    b
}

impl ProjError {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            ProjError::ZeroVector => "projgeom::zero-vector",
            ProjError::RankDeficient { .. } => "projgeom::rank-deficient",
            ProjError::DimensionMismatch { .. } => "projgeom::dimension-mismatch",
            ProjError::BadEntry(_) => "projgeom::bad-entry",
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::rng::DeterministicRng;

    fn el(i: u32) -> Fq {
        Fq::from_idx(i)
    }

    fn v(x: &[u32]) -> Vec<Fq> {
        x.iter().map(|&i| el(i)).collect()
    }

    fn unit(i: usize, len: usize) -> Vec<Fq> {
        let mut e = vec![Fq::ZERO; len];
        e[i] = Fq::ONE;
        e
    }

    #[test]
    fn canonical_point_examples() {
        let f7 = Field::prime(7).unwrap();
        assert_eq!(canonical_point(&f7, &v(&[0, 3, 6])).unwrap().coords(), &v(&[0, 1, 2])[..]);
        assert_eq!(canonical_point(&f7, &v(&[1, 0, 0])).unwrap().coords(), &v(&[1, 0, 0])[..]);
        assert_eq!(canonical_point(&f7, &v(&[0, 0])), Err(ProjError::ZeroVector));
    }

    #[test]
    fn canonical_point_well_defined() {
        let f4 = Field::new(2, 2).unwrap();
        for x in 0..64u32 {
            let vec = v(&[x % 4, (x / 4) % 4, x / 16]);
            if x == 0 {
                continue;
            }
            let p = canonical_point(&f4, &vec).unwrap();
            assert_eq!(canonical_point(&f4, p.coords()).unwrap(), p);
            for l in f4.nonzero_elements() {
                let scaled: Vec<Fq> = vec.iter().map(|&c| f4.mul(l, c)).collect();
                assert_eq!(canonical_point(&f4, &scaled).unwrap(), p);
            }
        }
    }

    #[test]
    fn point_enumeration() {
        let f2 = Field::prime(2).unwrap();
        let pts: Vec<_> = enumerate_points(1, &f2).map(ProjPoint::into_coords).collect();
        assert_eq!(pts, vec![v(&[0, 1]), v(&[1, 0]), v(&[1, 1])]);
        assert_eq!(enumerate_points(4, &f2).count(), 31);
        // (7^5 - 1) / 6, computed independently
        let f7 = Field::prime(7).unwrap();
        assert_eq!((7u64.pow(5) - 1) / 6, 2801);
        assert_eq!(enumerate_points(4, &f7).count(), 2801);
    }

    #[test]
    fn point_order_is_lexicographic_and_canonical() {
        for field in [Field::prime(3).unwrap(), Field::new(2, 2).unwrap()] {
            let q = field.q() as u64;
            let pts: Vec<_> = enumerate_points(3, &field).collect();
            let codes: Vec<u64> = pts.iter().map(|p| vector_code(p.coords(), q)).collect();
            assert!(codes.windows(2).all(|w| w[0] < w[1]));
            for p in &pts {
                assert_eq!(&canonical_point(&field, p.coords()).unwrap(), p);
            }
        }
    }

    #[test]
    fn rref_examples() {
        let f2 = Field::prime(2).unwrap();
        let m = Matrix::from_rows(vec![unit(1, 5), unit(0, 5)]);
        let p = rref(&f2, &m).unwrap();
        assert_eq!(p.matrix(), &Matrix::from_rows(vec![unit(0, 5), unit(1, 5)]));
        let m = Matrix::from_rows(vec![v(&[1, 1, 0]), v(&[0, 1, 1])]);
        assert_eq!(
            rref(&f2, &m).unwrap().matrix(),
            &Matrix::from_rows(vec![v(&[1, 0, 1]), v(&[0, 1, 1])])
        );
        let bad = Matrix::from_rows(vec![v(&[1, 1, 0]), v(&[1, 1, 0])]);
        assert_eq!(rref(&f2, &bad), Err(ProjError::RankDeficient { rank: 1, rows: 2 }));
    }

    #[test]
    fn rref_preserves_row_space() {
        // membership oracle: a point lies in the row space iff adding it does not raise the rank
        let f2 = Field::prime(2).unwrap();
        let mut rng = DeterministicRng::new(8);
        for _ in 0..50 {
            let rows: Vec<Vec<Fq>> =
                (0..2).map(|_| (0..5).map(|_| el(rng.below(2) as u32)).collect()).collect();
            let m = Matrix::from_rows(rows);
            let Ok(p) = rref(&f2, &m) else { continue };
            assert!(is_rref(p.matrix()));
            assert_eq!(rref(&f2, p.matrix()).unwrap(), p);
            for pt in enumerate_points(4, &f2) {
                let extended = m.vstack(&Matrix::from_rows(vec![pt.coords().to_vec()]));
                let in_span = extended.rank(&f2) == 2;
                assert_eq!(p.contains_point(&pt, &f2), in_span);
            }
        }
    }

    #[test]
    fn gaussian_binomial_examples() {
        assert_eq!(gaussian_binomial(5, 1, 2), BigUint::from(31u32));
        assert_eq!(gaussian_binomial(5, 2, 2), BigUint::from(155u32));
        assert_eq!(gaussian_binomial(4, 2, 4), BigUint::from(357u32));
        assert_eq!(gaussian_binomial(4, 5, 4), BigUint::from(0u32));
        assert_eq!(gaussian_binomial(4, 0, 4), BigUint::from(1u32));
    }

    #[test]
    fn plane_counts_match_gaussian_binomial() {
        for q in [2u32, 3, 4, 5, 7] {
            let field = Field::parse(&q.to_string()).unwrap();
            for n in 1..=4usize {
                for r in 0..=n.min(2) {
                    if q == 7 && n == 4 && r >= 1 {
                        continue;
                    }
                    let e = PlaneEnumerator::new(r, n, &field);
                    let expected = gaussian_binomial(n as u32 + 1, r as u32 + 1, q as u64);
                    assert_eq!(BigUint::from(e.len()), expected, "q={q} n={n} r={r}");
                    if e.len() < 20_000 {
                        assert_eq!(BigUint::from(e.iter().count()), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn line_counts_in_p4() {
        let count = |q: u32| PlaneEnumerator::new(1, 4, &Field::parse(&q.to_string()).unwrap()).len();
        assert_eq!(count(2), 155);
        assert_eq!(count(3), 1210);
        assert_eq!(count(7), 140050);
        assert_eq!((16806u64 * 2400) / 288, 140050);
    }

    #[test]
    fn planes_are_distinct_canonical() {
        for q in [2u32, 3] {
            let field = Field::prime(q).unwrap();
            for r in 0..=2 {
                let planes: Vec<_> = enumerate_planes(r, 4, &field).collect();
                let set: HashSet<_> = planes.iter().cloned().collect();
                assert_eq!(set.len(), planes.len());
                for p in &planes {
                    assert!(is_rref(p.matrix()));
                    assert_eq!(&rref(&field, p.matrix()).unwrap(), p);
                }
            }
        }
    }

    #[test]
    fn plane_ranges_partition() {
        let f3 = Field::prime(3).unwrap();
        let e = PlaneEnumerator::new(1, 4, &f3);
        let all: Vec<_> = e.iter().collect();
        let mut pieces = Vec::new();
        for lo in (0..e.len()).step_by(97) {
            pieces.extend(e.range(lo, lo + 97));
        }
        assert_eq!(all, pieces);
        // first block: pivots {0, 1}, free entries count up last-fastest
        assert_eq!(all[0].matrix(), &Matrix::from_rows(vec![unit(0, 5), unit(1, 5)]));
        assert_eq!(
            all[1].matrix(),
            &Matrix::from_rows(vec![unit(0, 5), v(&[0, 1, 0, 0, 1])])
        );
    }

    #[test]
    fn complete_to_basis_examples() {
        let f2 = Field::prime(2).unwrap();
        let std_line = rref(&f2, &Matrix::from_rows(vec![unit(0, 5), unit(1, 5)])).unwrap();
        assert_eq!(complete_to_basis(&std_line), Matrix::identity(5));
        let line = rref(&f2, &Matrix::from_rows(vec![v(&[0, 1, 0]), v(&[0, 0, 1])])).unwrap();
        let b = complete_to_basis(&line);
        assert_eq!(b, Matrix::from_rows(vec![v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, 0, 0])]));
        assert!(b.is_invertible(&f2));
    }

    #[test]
    fn complete_to_basis_random_lines() {
        let f3 = Field::prime(3).unwrap();
        let e = PlaneEnumerator::new(1, 4, &f3);
        let mut rng = DeterministicRng::new(17);
        for _ in 0..100 {
            let line = e.plane_at(rng.below(e.len()));
            let b = complete_to_basis(&line);
            assert!(b.is_invertible(&f3));
            let head = Matrix::from_rows(vec![b.row(0).to_vec(), b.row(1).to_vec()]);
            assert_eq!(rref(&f3, &head).unwrap(), line);
        }
    }

    #[test]
    fn json_roundtrip() {
        let f3 = Field::prime(3).unwrap();
        let p = PlaneEnumerator::new(1, 3, &f3).plane_at(40);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Plane>(&text).unwrap(), p);
        assert!(serde_json::from_str::<Plane>("[[0,1],[1,0]]").is_err());
        assert_eq!(
            Plane::from_json(&f3, "[[0,1,0],[1,0,0]]").unwrap().matrix(),
            &Matrix::from_rows(vec![v(&[1, 0, 0]), v(&[0, 1, 0])])
        );
        assert!(Plane::from_json(&f3, "[[5,0,0]]").is_err());
    }
}
