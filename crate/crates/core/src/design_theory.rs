//! Parameter arithmetic for subspace designs and the counting formulas for
//! involutions acting on binary q-Steiner triple systems.
//!
//! Everything here is exact: integrality of these quantities is what rules
//! out automorphism types, so no floating point is involved.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::grassmannian::{gaussian_binomial, GrassmannianIndex, Subspace};

/// Parameters `t-(v,k,λ)_q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize)]
pub struct DesignParams {
    pub t: u64,
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub q: u64,
}

impl DesignParams {
    pub fn new(t: u64, v: u64, k: u64, lambda: u64, q: u64) -> Result<Self> {
        if !(t <= k && k <= v) {
            return Err(Error::OutOfRange(format!("need t <= k <= v, got t={t} k={k} v={v}")));
        }
        if lambda == 0 {
            return Err(Error::OutOfRange("lambda must be positive".into()));
        }
        if q < 2 {
            return Err(Error::OutOfRange(format!("q = {q} must be at least 2")));
        }
        Ok(Self { t, v, k, lambda, q })
    }

    /// The q-Steiner triple system parameters `2-(v,3,1)_2`.
    pub fn steiner_triple(v: u64) -> Result<Self> {
        Self::new(2, v, 3, 1, 2)
    }

    /// Number of blocks `λ_0`, if integral.
    pub fn block_count(&self) -> Option<BigUint> {
        let l0 = lambda_s(self, 0).ok()?;
        l0.is_integer().then(|| l0.to_integer().to_biguint().expect("nonnegative"))
    }
}

fn gauss_rat(v: u64, r: u64, q: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(gaussian_binomial(v, r, q).expect("valid range")))
}

/// `λ_s = λ · [v−s, t−s]_q / [k−s, t−s]_q`.
pub fn lambda_s(p: &DesignParams, s: u64) -> Result<BigRational> {
    if s > p.t {
        return Err(Error::OutOfRange(format!("s = {s} exceeds t = {}", p.t)));
    }
    let lam = BigRational::from_integer(BigInt::from(p.lambda));
    Ok(lam * gauss_rat(p.v - s, p.t - s, p.q) / gauss_rat(p.k - s, p.t - s, p.q))
}

/// All integrality conditions hold.
pub fn is_admissible(p: &DesignParams) -> bool {
    (0..=p.t).all(|s| lambda_s(p, s).map(|l| l.is_integer()).unwrap_or(false))
}

/// `v ≡ 1, 3 (mod 6)` and `v ≥ 7`.
pub fn steiner_triple_admissible(v: u64) -> bool {
    v >= 7 && matches!(v % 6, 1 | 3)
}

/// Residue class of an admissible Steiner triple dimension modulo 6.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SteinerClass {
    OneMod6,
    ThreeMod6,
}

impl SteinerClass {
    pub fn of(v: u64) -> Option<Self> {
        match v % 6 {
            1 => Some(Self::OneMod6),
            3 => Some(Self::ThreeMod6),
            _ => None,
        }
    }

    fn v_mod3(self) -> i64 {
        match self {
            Self::OneMod6 => 1,
            Self::ThreeMod6 => 0,
        }
    }
}

/// Point and block census of an involution of type `A_{v,s}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InvolutionCensus {
    pub v: u64,
    pub s: u64,
    pub fixed_points: BigUint,
    pub two_orbits: BigUint,
    /// Fixed blocks with exactly 3 fixed points.
    pub f3: BigUint,
    /// Fixed blocks with all 7 points fixed; non-integral when no
    /// `S_2[2,3,v]` can carry this involution.
    pub f7: BigRational,
}

impl InvolutionCensus {
    pub fn is_integral(&self) -> bool {
        self.f7.is_integer()
    }

    /// `3 F3 + 21 F7`, the number of fixed planes counted by their fixed lines.
    pub fn weighted_fixed_blocks(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.f3.clone()) * 3) + &self.f7 * BigRational::from_integer(21.into())
    }
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << e
}

pub fn involution_census(v: u64, s: u64) -> Result<InvolutionCensus> {
    if s < 1 || s > v / 2 {
        return Err(Error::OutOfRange(format!("s = {s} not in 1..={}", v / 2)));
    }
    let one = BigUint::one();
    let fixed_points = pow2(v - s) - &one;
    let two_orbits = pow2(v - s - 1) * (pow2(s) - &one);
    // F3 = 2^(v-s-2) (2^s - 1); v-s-2 < 0 only for v <= 3
    let f3_rat = BigRational::new(BigInt::from(pow2(s) - &one) * BigInt::from(pow2(v - s)), BigInt::from(4));
    let f3 = f3_rat.to_integer().to_biguint().unwrap_or_default();
    let numerator = BigRational::from_integer(BigInt::from(pow2(2 * v - 2 * s - 1) + &one))
        - BigRational::new(BigInt::from(3u32) * BigInt::from(pow2(v - s)) * BigInt::from(pow2(s) + &one), BigInt::from(4));
    let f7 = numerator / BigRational::from_integer(BigInt::from(21));
    Ok(InvolutionCensus { v, s, fixed_points, two_orbits, f3, f7 })
}

/// Residue of the `F7` numerator modulo 7, in `-3..=3`. Since 2 has order 3
/// modulo 7, it depends only on the class of `v` and on `s mod 3`.
pub fn f7_residue_mod7(class: SteinerClass, s_mod3: u64) -> Result<i64> {
    if s_mod3 > 2 {
        return Err(Error::OutOfRange(format!("s mod 3 = {s_mod3}")));
    }
    let v = class.v_mod3();
    let s = s_mod3 as i64;
    let p2 = |e: i64| -> i64 { [1, 2, 4][e.rem_euclid(3) as usize] };
    let n = p2(2 * v - 2 * s - 1) + 1 - 3 * p2(v - s - 2) * (p2(s) + 1);
    let r = n.rem_euclid(7);
    Ok(if r > 3 { r - 7 } else { r })
}

/// Involution types `s` that survive the integrality of `F7`, read off the
/// residue table: `3 | s` for `v ≡ 1`, `s ≢ 2 (mod 3)` for `v ≡ 3 (mod 6)`.
pub fn admissible_involution_types(v: u64) -> Result<BTreeSet<u64>> {
    if !steiner_triple_admissible(v) {
        return Err(Error::OutOfRange(format!("v = {v} is not an admissible Steiner triple dimension")));
    }
    let class = SteinerClass::of(v).expect("admissible");
    Ok((1..=v / 2)
        .filter(|&s| match class {
            SteinerClass::OneMod6 => s % 3 == 0,
            SteinerClass::ThreeMod6 => s % 3 != 2,
        })
        .collect())
}

/// Exhaustive check that `blocks` form a `t-(v,k,λ)_2` design.
pub fn verify_design(blocks: &[Subspace], p: &DesignParams) -> Result<bool> {
    if p.q != 2 {
        return Err(Error::OutOfRange("verify_design supports q = 2 only".into()));
    }
    let v = p.v as usize;
    for b in blocks {
        if b.ambient_dim() != v {
            return Err(Error::DimensionMismatch { left: v, right: b.ambient_dim() });
        }
        if b.dim() != p.k as usize {
            return Err(Error::WrongBlockDimension { expected: p.k as usize, found: b.dim() });
        }
    }
    let distinct: BTreeSet<&Subspace> = blocks.iter().collect();
    if distinct.len() != blocks.len() {
        return Ok(false);
    }
    match p.block_count().and_then(|n| n.to_usize()) {
        Some(n) if n == blocks.len() => {}
        _ => return Ok(false),
    }
    let layer = GrassmannianIndex::new(v, p.t as usize)?;
    for t in layer.iter() {
        let mut hits = 0u64;
        for b in blocks {
            if b.contains(t)? {
                hits += 1;
            }
        }
        if hits != p.lambda {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn lambda_values() {
        let p = DesignParams::steiner_triple(7).unwrap();
        assert_eq!(lambda_s(&p, 0).unwrap(), rat(381));
        assert_eq!(lambda_s(&p, 1).unwrap(), rat(21));
        assert_eq!(lambda_s(&p, 2).unwrap(), rat(1));
        assert!(lambda_s(&p, 3).is_err());
        assert_eq!(p.block_count().unwrap(), BigUint::from(381u32));
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(&DesignParams::steiner_triple(7).unwrap()));
        assert!(!is_admissible(&DesignParams::steiner_triple(8).unwrap()));
        assert!(is_admissible(&DesignParams::steiner_triple(13).unwrap()));
        assert!(steiner_triple_admissible(7));
        assert!(steiner_triple_admissible(9));
        assert!(!steiner_triple_admissible(11));
        assert!(!steiner_triple_admissible(3));
        // v = 3 passes the integrality test with the trivial design, hence the bound.
        assert!(is_admissible(&DesignParams::steiner_triple(3).unwrap()));
        for v in 4..=40 {
            let p = DesignParams::steiner_triple(v).unwrap();
            assert_eq!(is_admissible(&p), steiner_triple_admissible(v), "v = {v}");
        }
    }

    #[test]
    fn census_examples() {
        let c = involution_census(7, 3).unwrap();
        assert_eq!(c.fixed_points, BigUint::from(15u32));
        assert_eq!(c.two_orbits, BigUint::from(56u32));
        assert_eq!(c.f3, BigUint::from(28u32));
        assert_eq!(c.f7, rat(1));
        let c = involution_census(7, 1).unwrap();
        assert_eq!(c.fixed_points, BigUint::from(63u32));
        assert_eq!(c.two_orbits, BigUint::from(32u32));
        let c = involution_census(7, 2).unwrap();
        assert_eq!(c.f7, BigRational::new(BigInt::from(393), BigInt::from(21)));
        assert!(!c.is_integral());
        assert!(involution_census(7, 4).is_err());
    }

    #[test]
    fn residue_table() {
        use SteinerClass::*;
        let table = [(OneMod6, [0, 1, 1]), (ThreeMod6, [0, 0, -1])];
        for (class, row) in table {
            for (s, want) in row.iter().enumerate() {
                assert_eq!(f7_residue_mod7(class, s as u64).unwrap(), *want);
            }
        }
        assert!(f7_residue_mod7(OneMod6, 3).is_err());
    }

    #[test]
    fn involution_types_by_dimension() {
        let v7: Vec<u64> = admissible_involution_types(7).unwrap().into_iter().collect();
        assert_eq!(v7, vec![3]);
        let v13: Vec<u64> = admissible_involution_types(13).unwrap().into_iter().collect();
        assert_eq!(v13, vec![3, 6]);
        let v9: Vec<u64> = admissible_involution_types(9).unwrap().into_iter().collect();
        assert_eq!(v9, vec![1, 3, 4]);
        assert!(admissible_involution_types(8).is_err());
    }

    #[test]
    fn verify_design_rejections() {
        let p = DesignParams::steiner_triple(7).unwrap();
        assert!(!verify_design(&[], &p).unwrap());
        let all: Vec<Subspace> = crate::grassmannian::enumerate_subspaces(7, 3).unwrap().collect();
        assert!(!verify_design(&all, &p).unwrap());
        let line = Subspace::span(7, &[1, 2]).unwrap();
        assert!(matches!(verify_design(&[line], &p), Err(Error::WrongBlockDimension { .. })));
    }

    #[test]
    fn spread_of_f2_4() {
        // line spread found by backtracking over point-disjoint lines
        let p = DesignParams::new(1, 4, 2, 1, 2).unwrap();
        let mut used = 0u32;
        let mut blocks = Vec::new();
        let lines = GrassmannianIndex::new(4, 2).unwrap();
        fn search(lines: &GrassmannianIndex, used: &mut u32, blocks: &mut Vec<Subspace>) -> bool {
            let Some(x) = (1u64..16).find(|&x| *used & (1 << x) == 0) else {
                return true;
            };
            for l in lines.iter() {
                let pts = l.points();
                if pts.contains(&x) && pts.iter().all(|&y| *used & (1 << y) == 0) {
                    pts.iter().for_each(|&y| *used |= 1 << y);
                    blocks.push(l.clone());
                    if search(lines, used, blocks) {
                        return true;
                    }
                    blocks.pop();
                    pts.iter().for_each(|&y| *used &= !(1 << y));
                }
            }
            false
        }
        assert!(search(&lines, &mut used, &mut blocks));
        assert_eq!(blocks.len(), 5);
        assert!(verify_design(&blocks, &p).unwrap());
    }
}
