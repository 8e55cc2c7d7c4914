//! Bit-packed vectors and square matrices over GF(2).
//!
//! A vector of dimension `v` is stored in the low `v` bits of a `u64`, with
//! the first coordinate in the most significant of those bits. Integer
//! comparison of two vectors therefore agrees with lexicographic comparison
//! of their `0`/`1` strings.
//!
//! Matrices act on row vectors from the right: `x ↦ xA`.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 64;

#[inline]
pub(crate) fn mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

#[inline]
pub(crate) fn coord_bit(dim: usize, i: usize) -> u64 {
    1u64 << (dim - 1 - i)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// A vector in F2^v.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Gf2Vector {
    bits: u64,
    dim: usize,
}

impl Gf2Vector {
    pub fn new(dim: usize, bits: u64) -> Result<Self> {
        check_dim(dim)?;
        if bits & !mask(dim) != 0 {
            return Err(Error::OutOfRange(format!(
                "bits {bits:#x} do not fit dimension {dim}"
            )));
        }
        Ok(Self { bits, dim })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, 0)
    }

    /// Builds a vector from its coordinates, first coordinate first.
    pub fn from_coords(coords: &[u8]) -> Result<Self> {
        check_dim(coords.len())?;
        let dim = coords.len();
        let mut bits = 0;
        for (i, &c) in coords.iter().enumerate() {
            match c {
                0 => {}
                1 => bits |= coord_bit(dim, i),
                _ => return Err(Error::OutOfRange(format!("coordinate {c} is not 0 or 1"))),
            }
        }
        Ok(Self { bits, dim })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits & coord_bit(self.dim, i) != 0
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(Self { bits: self.bits ^ other.bits, dim: self.dim })
    }

    /// The product `xA`.
    pub fn mul_matrix(&self, a: &Gf2Matrix) -> Result<Self> {
        if self.dim != a.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: a.dim });
        }
        Ok(Self { bits: a.apply(self.bits), dim: self.dim })
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, self.bits, self.dim)
    }
}

pub(crate) fn write_bits(f: &mut impl fmt::Write, bits: u64, dim: usize) -> fmt::Result {
    for i in 0..dim {
        f.write_char(if bits & coord_bit(dim, i) != 0 { '1' } else { '0' })?;
    }
    Ok(())
}

/// A square matrix over GF(2), stored as one packed word per row.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Gf2Matrix {
    dim: usize,
    rows: Vec<u64>,
}

impl Gf2Matrix {
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, rows: (0..dim).map(|i| coord_bit(dim, i)).collect() })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, rows: vec![0; dim] })
    }

    pub fn from_rows(dim: usize, rows: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        if rows.len() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: rows.len() });
        }
        if rows.iter().any(|r| r & !mask(dim) != 0) {
            return Err(Error::OutOfRange("row has bits beyond the dimension".into()));
        }
        Ok(Self { dim, rows })
    }

    pub fn from_vectors(rows: &[Gf2Vector]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(bad) = rows.iter().find(|r| r.dim != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.dim });
        }
        Ok(Self { dim, rows: rows.iter().map(|r| r.bits).collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Gf2Vector {
        Gf2Vector { bits: self.rows[i], dim: self.dim }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] & coord_bit(self.dim, j) != 0
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == coord_bit(self.dim, i))
    }

    /// Image of the packed row vector `x` under `x ↦ xA`.
    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        let mut acc = 0;
        let mut rest = x;
        while rest != 0 {
            let b = 63 - rest.leading_zeros() as usize;
            acc ^= self.rows[self.dim - 1 - b];
            rest &= !(1u64 << b);
        }
        acc
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        Self { dim: self.dim, rows: self.rows.iter().map(|&r| other.apply(r)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut rows = vec![0u64; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in 0..n {
                if self.get(j, i) {
                    *row |= coord_bit(n, j);
                }
            }
        }
        Self { dim: n, rows }
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.rows)
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.dim
    }

    /// Gauss-Jordan inversion on the augmented matrix `[A | I]`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut left = self.rows.clone();
        let mut right: Vec<u64> = (0..n).map(|i| coord_bit(n, i)).collect();
        for col in 0..n {
            let bit = coord_bit(n, col);
            let pivot = (col..n).find(|&r| left[r] & bit != 0).ok_or(Error::SingularMatrix)?;
            left.swap(col, pivot);
            right.swap(col, pivot);
            for r in 0..n {
                if r != col && left[r] & bit != 0 {
                    left[r] ^= left[col];
                    right[r] ^= right[col];
                }
            }
        }
        Ok(Self { dim: n, rows: right })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self { dim: self.dim, rows: (0..self.dim).map(|i| coord_bit(self.dim, i)).collect() };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Smallest `n >= 1` with `A^n = I`.
    pub fn element_order(&self, cap: u64) -> Result<u64> {
        if !self.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        let mut power = self.clone();
        let mut n = 1u64;
        while !power.is_identity() {
            if n >= cap {
                return Err(Error::OrderExceedsCap(cap));
            }
            power = power.mul_unchecked(self);
            n += 1;
        }
        Ok(n)
    }

    /// `P⁻¹ A P`.
    pub fn conjugate_by(&self, p: &Self) -> Result<Self> {
        let p_inv = p.inverse()?;
        p_inv.mul(self)?.mul(p)
    }
}

impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write_bits(f, r, self.dim)?;
        }
        Ok(())
    }
}

/// Rank of a set of packed vectors.
pub(crate) fn rank_of_rows(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::with_capacity(rows.len());
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Conjugacy class of an element of order 2 in GL(v,2), identified by the
/// number `s` of 2×2 swap blocks in its normal form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub struct InvolutionType {
    pub v: usize,
    pub s: usize,
}

impl fmt::Display for InvolutionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A_{{{},{}}}", self.v, self.s)
    }
}

/// Type of an involution: `s = rank(A + I)`.
pub fn involution_type(a: &Gf2Matrix) -> Result<InvolutionType> {
    if a.is_identity() || !a.mul_unchecked(a).is_identity() {
        return Err(Error::NotAnInvolution);
    }
    let id = Gf2Matrix::identity(a.dim)?;
    let s = a.add(&id)?.rank();
    Ok(InvolutionType { v: a.dim, s })
}

/// The block-diagonal matrix with `s` blocks `(0 1; 1 0)` followed by the
/// identity on the remaining `v - 2s` coordinates.
pub fn involution_normal_form(v: usize, s: usize) -> Result<Gf2Matrix> {
    check_dim(v)?;
    if s < 1 || s > v / 2 {
        return Err(Error::OutOfRange(format!("s = {s} not in 1..={}", v / 2)));
    }
    let mut rows: Vec<u64> = (0..v).map(|i| coord_bit(v, i)).collect();
    for b in 0..s {
        rows.swap(2 * b, 2 * b + 1);
    }
    Ok(Gf2Matrix { dim: v, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Gf2Matrix {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let dim = lines.len();
        let rows = lines.iter().map(|l| u64::from_str_radix(l, 2).unwrap()).collect();
        Gf2Matrix::from_rows(dim, rows).unwrap()
    }

    // Plain row reduction over a Vec<Vec<bool>>, independent of the packed path.
    fn brute_rank(m: &Gf2Matrix) -> usize {
        let n = m.dim();
        let mut a: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
        let mut rank = 0;
        for col in 0..n {
            if let Some(p) = (rank..n).find(|&r| a[r][col]) {
                a.swap(rank, p);
                for r in 0..n {
                    if r != rank && a[r][col] {
                        let pivot = a[rank].clone();
                        for (x, p) in a[r].iter_mut().zip(pivot) {
                            *x ^= p;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn identity_products() {
        let i7 = Gf2Matrix::identity(7).unwrap();
        assert_eq!(i7.mul(&i7).unwrap(), i7);
        let a73 = involution_normal_form(7, 3).unwrap();
        assert_eq!(a73.mul(&a73).unwrap(), i7);
    }

    #[test]
    fn cyclic_order_four_generator() {
        let g = parse(
            "1100000\n0110000\n0010000\n0001100\n0000110\n0000011\n0000001",
        );
        assert_eq!(g.pow(4), Gf2Matrix::identity(7).unwrap());
        assert_eq!(g.element_order(1000).unwrap(), 4);
    }

    #[test]
    fn ranks() {
        assert_eq!(Gf2Matrix::zero(7).unwrap().rank(), 0);
        assert_eq!(Gf2Matrix::identity(7).unwrap().rank(), 7);
        let m = involution_normal_form(7, 3).unwrap().add(&Gf2Matrix::identity(7).unwrap()).unwrap();
        assert_eq!(brute_rank(&m), 3);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn inverses() {
        let i7 = Gf2Matrix::identity(7).unwrap();
        assert_eq!(i7.inverse().unwrap(), i7);
        let a72 = involution_normal_form(7, 2).unwrap();
        assert_eq!(a72.inverse().unwrap(), a72);
        let ones = Gf2Matrix::from_rows(7, vec![0x7f; 7]).unwrap();
        assert_eq!(ones.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn element_orders() {
        let i7 = Gf2Matrix::identity(7).unwrap();
        assert_eq!(i7.element_order(10).unwrap(), 1);
        let g5 = parse("0001000\n1001000\n0101000\n0011000\n0000100\n0000010\n0000001");
        assert_eq!(g5.element_order(1000).unwrap(), 5);
        let g31 = parse("1000000\n0100000\n0001000\n0000100\n0000010\n0000001\n0010010");
        assert_eq!(g31.element_order(1000).unwrap(), 31);
        assert_eq!(g31.element_order(30), Err(Error::OrderExceedsCap(30)));
    }

    #[test]
    fn involution_types() {
        let a71 = involution_normal_form(7, 1).unwrap();
        assert_eq!(involution_type(&a71).unwrap().s, 1);
        assert_eq!(
            involution_type(&Gf2Matrix::identity(7).unwrap()),
            Err(Error::NotAnInvolution)
        );
        let theorem_b = parse("0100000\n1000000\n0001000\n0010000\n0000010\n0000100\n0000001");
        assert_eq!(theorem_b, involution_normal_form(7, 3).unwrap());
        assert_eq!(involution_type(&theorem_b).unwrap().s, 3);
    }

    #[test]
    fn normal_form_shapes() {
        let a31 = involution_normal_form(3, 1).unwrap();
        assert_eq!(a31.to_string(), "010\n100\n001");
        let a72 = involution_normal_form(7, 2).unwrap();
        assert_eq!(
            a72.to_string(),
            "0100000\n1000000\n0001000\n0010000\n0000100\n0000010\n0000001"
        );
        assert!(involution_normal_form(7, 4).is_err());
        assert!(involution_normal_form(7, 0).is_err());
    }

    #[test]
    fn vector_times_matrix() {
        let a31 = involution_normal_form(3, 1).unwrap();
        let x = Gf2Vector::from_coords(&[1, 0, 0]).unwrap();
        assert_eq!(x.mul_matrix(&a31).unwrap().to_string(), "010");
        let y = Gf2Vector::from_coords(&[1, 1, 0]).unwrap();
        assert_eq!(y.mul_matrix(&a31).unwrap(), y);
    }

    #[test]
    fn dimension_checks() {
        let a = Gf2Matrix::identity(3).unwrap();
        let b = Gf2Matrix::identity(4).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(Gf2Matrix::identity(65).is_err());
        assert!(Gf2Vector::new(3, 0b1000).is_err());
    }
}
