//! Subspaces of F2^v in canonical form and enumeration of whole Grassmannians.
//!
//! A subspace is stored as the reduced row-echelon basis of its span: pivots
//! are the leftmost nonzero coordinates, rows are ordered by pivot column and
//! every pivot column is zero outside its own row. With the bit layout of
//! [`crate::gf2`], the rows of such a basis are strictly decreasing as
//! integers, and comparing two bases row by row is the same as comparing
//! their row-major bit strings lexicographically. That comparison is the
//! enumeration order of [`GrassmannianIndex`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Matrix, Gf2Vector};

/// Gaussian binomial coefficient `[v r]_q`.
pub fn gaussian_binomial(v: u64, r: u64, q: u64) -> Result<BigUint> {
    if r > v {
        return Err(Error::OutOfRange(format!("r = {r} exceeds v = {v}")));
    }
    if q < 2 {
        return Err(Error::OutOfRange(format!("q = {q} must be at least 2")));
    }
    let q = BigUint::from(q);
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= q.pow((v - i) as u32) - &one;
        den *= q.pow((i + 1) as u32) - &one;
    }
    Ok(num / den)
}

pub(crate) fn binary_count(v: usize, r: usize) -> usize {
    let n = gaussian_binomial(v as u64, r as u64, 2).expect("valid range");
    usize::try_from(n).expect("Grassmannian too large to index")
}

#[inline]
fn top_bit(x: u64) -> u64 {
    1u64 << (63 - x.leading_zeros())
}

/// Reduce `rows` in place to reduced row-echelon form and return the rank.
fn rref(rows: &mut Vec<u64>) {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &r in rows.iter() {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            let pos = basis.partition_point(|&b| b > x);
            basis.insert(pos, x);
        }
    }
    // back-substitute so pivot columns are clear in every other row
    for i in (0..basis.len()).rev() {
        let p = top_bit(basis[i]);
        for j in 0..i {
            if basis[j] & p != 0 {
                basis[j] ^= basis[i];
            }
        }
    }
    *rows = basis;
}

/// An `r`-dimensional subspace of F2^v in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<u64>,
}

impl Subspace {
    /// The span of the given packed vectors in F2^`ambient`.
    pub fn span(ambient: usize, vectors: &[u64]) -> Result<Self> {
        if ambient == 0 || ambient > gf2::MAX_DIM {
            return Err(Error::UnsupportedDimension(ambient));
        }
        if vectors.iter().any(|&x| x & !gf2::mask(ambient) != 0) {
            return Err(Error::OutOfRange("vector does not fit the ambient dimension".into()));
        }
        Ok(Self::span_unchecked(ambient, vectors.to_vec()))
    }

    pub(crate) fn span_unchecked(ambient: usize, mut rows: Vec<u64>) -> Self {
        rref(&mut rows);
        Self { ambient, basis: rows }
    }

    pub fn zero(ambient: usize) -> Result<Self> {
        Self::span(ambient, &[])
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis rows, packed.
    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Gf2Vector> {
        self.basis
            .iter()
            .map(|&b| Gf2Vector::new(self.ambient, b).expect("basis fits ambient"))
            .collect()
    }

    /// Pivot coordinates (0-based, first coordinate = 0), strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|&b| self.ambient - 1 - (63 - b.leading_zeros() as usize)).collect()
    }

    /// Remainder of `x` after reduction against the basis.
    #[inline]
    pub fn reduce(&self, mut x: u64) -> u64 {
        for &b in &self.basis {
            if x & top_bit(b) != 0 {
                x ^= b;
            }
        }
        x
    }

    pub fn contains_vector(&self, x: u64) -> bool {
        self.reduce(x) == 0
    }

    /// Whether `other` is a subspace of `self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { left: self.ambient, right: other.ambient });
        }
        if other.dim() > self.dim() {
            return Ok(false);
        }
        Ok(other.basis.iter().all(|&x| self.contains_vector(x)))
    }

    /// Image `{xA : x in S}` in canonical form.
    pub fn image(&self, a: &Gf2Matrix) -> Result<Subspace> {
        if self.ambient != a.dim() {
            return Err(Error::DimensionMismatch { left: self.ambient, right: a.dim() });
        }
        Ok(self.image_unchecked(a))
    }

    pub(crate) fn image_unchecked(&self, a: &Gf2Matrix) -> Subspace {
        Self::span_unchecked(self.ambient, self.basis.iter().map(|&x| a.apply(x)).collect())
    }

    /// The subspace spanned by `self` and `x`.
    pub(crate) fn extend(&self, x: u64) -> Subspace {
        let mut rows = self.basis.clone();
        rows.push(x);
        Self::span_unchecked(self.ambient, rows)
    }

    /// All nonzero vectors of the subspace, in increasing order.
    pub fn points(&self) -> Vec<u64> {
        let r = self.basis.len();
        let mut out: Vec<u64> = (1u64..(1u64 << r))
            .map(|m| {
                (0..r).filter(|i| m >> i & 1 == 1).fold(0, |acc, i| acc ^ self.basis[i])
            })
            .collect();
        out.sort_unstable();
        out
    }
}

impl fmt::Display for Subspace {
    /// One basis row per line as `0`/`1` characters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.basis.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            gf2::write_bits(f, b, self.ambient)?;
        }
        Ok(())
    }
}

/// Canonical form of the span of `generators`; an empty list is the zero
/// subspace of dimension `ambient`.
pub fn canonical_subspace(ambient: usize, generators: &[Gf2Vector]) -> Result<Subspace> {
    if let Some(g) = generators.iter().find(|g| g.dim() != ambient) {
        return Err(Error::DimensionMismatch { left: ambient, right: g.dim() });
    }
    let rows: Vec<u64> = generators.iter().map(|g| g.bits()).collect();
    Subspace::span(ambient, &rows)
}

fn push_rref_patterns(v: usize, r: usize, out: &mut Vec<Subspace>) {
    // choose pivot columns, then fill every free position
    fn pivots(v: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for c in start..v {
            if v - c < r - cur.len() {
                break;
            }
            cur.push(c);
            pivots(v, r, c + 1, cur, out);
            cur.pop();
        }
    }
    let mut pivot_sets = Vec::new();
    pivots(v, r, 0, &mut Vec::new(), &mut pivot_sets);
    for ps in pivot_sets {
        let mut free: Vec<(usize, u64)> = Vec::new();
        for (row, &p) in ps.iter().enumerate() {
            for c in p + 1..v {
                if !ps.contains(&c) {
                    free.push((row, gf2::coord_bit(v, c)));
                }
            }
        }
        let base: Vec<u64> = ps.iter().map(|&p| gf2::coord_bit(v, p)).collect();
        for m in 0u64..(1u64 << free.len()) {
            let mut rows = base.clone();
            for (i, &(row, bit)) in free.iter().enumerate() {
                if m >> i & 1 == 1 {
                    rows[row] |= bit;
                }
            }
            out.push(Subspace { ambient: v, basis: rows });
        }
    }
}

/// All `r`-subspaces of F2^v, in canonical order.
pub fn enumerate_subspaces(v: usize, r: usize) -> Result<impl Iterator<Item = Subspace>> {
    Ok(GrassmannianIndex::new(v, r)?.subspaces.into_iter())
}

/// Dense ranking of one Grassmannian layer.
#[derive(Clone, Debug)]
pub struct GrassmannianIndex {
    v: usize,
    r: usize,
    subspaces: Vec<Subspace>,
}

impl GrassmannianIndex {
    pub fn new(v: usize, r: usize) -> Result<Self> {
        if v == 0 || v > 16 {
            // 2^(v^2/4) subspaces in the middle layer; beyond this nothing fits in memory
            return Err(Error::UnsupportedDimension(v));
        }
        if r > v {
            return Err(Error::OutOfRange(format!("r = {r} exceeds v = {v}")));
        }
        let mut subspaces = Vec::with_capacity(binary_count(v, r));
        push_rref_patterns(v, r, &mut subspaces);
        subspaces.sort_unstable();
        Ok(Self { v, r, subspaces })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn rank(&self, s: &Subspace) -> Option<usize> {
        if s.ambient != self.v || s.dim() != self.r {
            return None;
        }
        self.subspaces.binary_search(s).ok()
    }

    pub fn unrank(&self, i: usize) -> &Subspace {
        &self.subspaces[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Subspace> {
        self.subspaces.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::involution_normal_form;
    use std::collections::HashSet;

    fn vecs(bits: &[&str]) -> Vec<Gf2Vector> {
        bits.iter()
            .map(|s| {
                let c: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
                Gf2Vector::from_coords(&c).unwrap()
            })
            .collect()
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(7, 1, 2).unwrap(), BigUint::from(127u32));
        assert_eq!(gaussian_binomial(9, 0, 3).unwrap(), BigUint::one());
        assert_eq!(gaussian_binomial(7, 3, 2).unwrap(), BigUint::from(11811u32));
        assert_eq!(gaussian_binomial(7, 3, 2).unwrap(), BigUint::from(5u32 * 2362 + 1));
        assert_eq!(gaussian_binomial(7, 2, 2).unwrap(), BigUint::from(2667u32));
        assert_eq!(gaussian_binomial(4, 2, 3).unwrap(), BigUint::from(130u32));
        assert!(gaussian_binomial(3, 4, 2).is_err());
        assert!(gaussian_binomial(3, 1, 1).is_err());
        assert_eq!(gaussian_binomial(3, 1, 2).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn canonical_examples() {
        let s = canonical_subspace(3, &vecs(&["110", "010"])).unwrap();
        assert_eq!(s.to_string(), "100\n010");
        let d = canonical_subspace(3, &vecs(&["101", "101"])).unwrap();
        assert_eq!(d.dim(), 1);
        let full = canonical_subspace(3, &vecs(&["111", "011", "001"])).unwrap();
        assert_eq!(full.dim(), 3);
        assert_eq!(full.to_string(), "100\n010\n001");
        let z = canonical_subspace(5, &[]).unwrap();
        assert_eq!(z.dim(), 0);
        assert_eq!(z.pivots(), Vec::<usize>::new());
    }

    #[test]
    fn enumeration_counts_match_brute_force() {
        assert_eq!(enumerate_subspaces(3, 1).unwrap().count(), 7);
        // oracle: canonical forms of all pairs of vectors of F2^7
        let mut seen = HashSet::new();
        for a in 1u64..128 {
            for b in 1u64..128 {
                let s = Subspace::span(7, &[a, b]).unwrap();
                if s.dim() == 2 {
                    seen.insert(s);
                }
            }
        }
        assert_eq!(seen.len(), 2667);
        let idx = GrassmannianIndex::new(7, 2).unwrap();
        assert_eq!(idx.len(), 2667);
        assert!(idx.iter().all(|s| seen.contains(s)));
        assert_eq!(enumerate_subspaces(7, 3).unwrap().count(), 11811);
    }

    #[test]
    fn enumeration_is_sorted_and_ranked() {
        for v in 1..=7 {
            for r in 0..=v.min(3) {
                let idx = GrassmannianIndex::new(v, r).unwrap();
                assert_eq!(idx.len(), binary_count(v, r));
                for (i, s) in idx.iter().enumerate() {
                    assert_eq!(idx.rank(s), Some(i));
                    assert_eq!(Subspace::span(v, s.basis()).unwrap(), *s);
                    if i > 0 {
                        assert!(idx.unrank(i - 1) < s);
                    }
                }
            }
        }
    }

    #[test]
    fn containment() {
        let k = Subspace::span(7, &[0b1000000, 0b0100000, 0b0010000]).unwrap();
        let zero = Subspace::zero(7).unwrap();
        assert!(k.contains(&zero).unwrap());
        let line = Subspace::span(7, &[0b1000000, 0b0110000]).unwrap();
        assert!(k.contains(&line).unwrap());
        assert!(!line.contains(&k).unwrap());
        let plane = line.extend(0b0000001);
        assert!(plane.contains(&line).unwrap());
        let other = Subspace::span(6, &[1]).unwrap();
        assert!(k.contains(&other).is_err());
    }

    #[test]
    fn containment_agrees_with_point_sets() {
        let layers: Vec<GrassmannianIndex> =
            (0..=5).map(|r| GrassmannianIndex::new(5, r).unwrap()).collect();
        for lt in &layers {
            for lk in &layers {
                for t in lt.iter() {
                    let tp: HashSet<u64> = t.points().into_iter().collect();
                    for k in lk.iter() {
                        let kp: HashSet<u64> = k.points().into_iter().collect();
                        assert_eq!(k.contains(t).unwrap(), tp.is_subset(&kp));
                    }
                }
            }
        }
    }

    #[test]
    fn images_under_involution() {
        let a31 = involution_normal_form(3, 1).unwrap();
        let p = canonical_subspace(3, &vecs(&["100"])).unwrap();
        assert_eq!(p.image(&a31).unwrap().to_string(), "010");
        let q = canonical_subspace(3, &vecs(&["110"])).unwrap();
        assert_eq!(q.image(&a31).unwrap(), q);
        let id = Gf2Matrix::identity(3).unwrap();
        assert_eq!(q.image(&id).unwrap(), q);
    }
}
