//! Finite matrix groups and their orbits on Grassmannian layers.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::gf2::Gf2Matrix;
use crate::grassmannian::{GrassmannianIndex, Subspace};

pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// A subgroup of GL(v,2) given by generators together with its full element list.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    dim: usize,
    generators: Vec<Gf2Matrix>,
    elements: Vec<Gf2Matrix>,
}

impl MatrixGroup {
    /// Breadth-first closure of `generators` under right multiplication.
    /// Elements appear in discovery order, identity first.
    pub fn closure(dim: usize, generators: &[Gf2Matrix], cap: usize) -> Result<Self> {
        for g in generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: g.dim() });
            }
            if !g.is_invertible() {
                return Err(Error::SingularMatrix);
            }
        }
        let id = Gf2Matrix::identity(dim)?;
        let mut seen: HashSet<Gf2Matrix> = HashSet::new();
        let mut elements = vec![id.clone()];
        seen.insert(id);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let next = elements[i].mul_unchecked(g);
                if seen.insert(next.clone()) {
                    if elements.len() >= cap {
                        return Err(Error::ClosureExceedsCap(cap));
                    }
                    elements.push(next);
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        Ok(Self { dim, generators: generators.to_vec(), elements })
    }

    pub fn trivial(dim: usize) -> Result<Self> {
        Self::closure(dim, &[], 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Gf2Matrix] {
        &self.generators
    }

    pub fn elements(&self) -> &[Gf2Matrix] {
        &self.elements
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().enumerate().all(|(i, a)| {
            self.generators[i + 1..]
                .iter()
                .all(|b| a.mul_unchecked(b) == b.mul_unchecked(a))
        })
    }

    /// Number of elements of each order.
    pub fn order_profile(&self) -> BTreeMap<u64, usize> {
        let cap = self.order() as u64;
        let mut out = BTreeMap::new();
        for e in &self.elements {
            let n = e.element_order(cap).expect("element order divides the group order");
            *out.entry(n).or_insert(0) += 1;
        }
        out
    }

    /// Isomorphism type for the small orders that occur in the catalog, using
    /// the labels `Z/nZ`, `(Z/pZ)^2`, `S_3` and `Q`.
    pub fn iso_label(&self) -> Option<String> {
        let n = self.order();
        let profile = self.order_profile();
        if profile.contains_key(&(n as u64)) {
            return Some(format!("Z/{n}Z"));
        }
        let abelian = self.is_abelian();
        match n {
            4 if abelian => Some("(Z/2Z)^2".into()),
            9 if abelian && profile.get(&3) == Some(&8) => Some("(Z/3Z)^2".into()),
            6 if !abelian => Some("S_3".into()),
            8 if !abelian && profile.get(&2) == Some(&1) => Some("Q".into()),
            _ => None,
        }
    }

    /// `P⁻¹ G P`, generator by generator.
    pub fn conjugate_by(&self, p: &Gf2Matrix) -> Result<Self> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.conjugate_by(p))
            .collect::<Result<Vec<_>>>()?;
        Self::closure(self.dim, &gens, self.order().max(1))
    }
}

/// Orbit lengths with multiplicities, printed as in `4^644 2^42 1^7`.
#[derive(Clone, PartialEq, Eq, Default, Debug, serde::Serialize)]
pub struct OrbitSignature(pub BTreeMap<usize, usize>);

impl OrbitSignature {
    pub fn from_lengths(lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut m = BTreeMap::new();
        for l in lengths {
            *m.entry(l).or_insert(0) += 1;
        }
        Self(m)
    }

    pub fn orbit_count(&self) -> usize {
        self.0.values().sum()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|(l, c)| l * c).sum()
    }

    pub fn count_of(&self, length: usize) -> usize {
        self.0.get(&length).copied().unwrap_or(0)
    }
}

impl fmt::Display for OrbitSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().rev().map(|(l, c)| format!("{l}^{c}")).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for OrbitSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for tok in s.split_whitespace() {
            let (l, c) = tok
                .split_once('^')
                .ok_or_else(|| parse_err(1, format!("bad signature token {tok:?}")))?;
            let l: usize = l.parse().map_err(|_| parse_err(1, format!("bad length in {tok:?}")))?;
            let c: usize = c.parse().map_err(|_| parse_err(1, format!("bad count in {tok:?}")))?;
            *m.entry(l).or_insert(0) += c;
        }
        Ok(Self(m))
    }
}

impl serde::Serialize for Orbit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Orbit", 2)?;
        st.serialize_field("representative", &self.representative)?;
        st.serialize_field("length", &self.members.len())?;
        st.end()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Orbit {
    /// Dense index of the least member.
    pub representative: usize,
    /// Dense indices of all members, ascending.
    pub members: Vec<usize>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Partition of the `r`-subspaces of F2^v into orbits, ordered by representative.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrbitPartition {
    v: usize,
    r: usize,
    orbit_of: Vec<u32>,
    orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn layer(&self) -> usize {
        self.r
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Orbit id of the subspace with the given dense index.
    pub fn orbit_of(&self, index: usize) -> usize {
        self.orbit_of[index] as usize
    }

    pub fn signature(&self) -> OrbitSignature {
        OrbitSignature::from_lengths(self.orbits.iter().map(Orbit::len))
    }

    fn from_labels(v: usize, r: usize, labels: Vec<u32>) -> Self {
        let n_orbits = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut orbits: Vec<Orbit> =
            (0..n_orbits).map(|_| Orbit { representative: usize::MAX, members: Vec::new() }).collect();
        for (i, &l) in labels.iter().enumerate() {
            let o = &mut orbits[l as usize];
            if o.members.is_empty() {
                o.representative = i;
            }
            o.members.push(i);
        }
        Self { v, r, orbit_of: labels, orbits }
    }

    /// Writes the cache format: a header line `<v> <r> <group> <order>`
    /// followed by the orbit id of every subspace index, one per line.
    pub fn write_cache(&self, mut w: impl Write, group_name: &str, group_order: usize) -> Result<()> {
        writeln!(w, "{} {} {} {}", self.v, self.r, group_name, group_order)?;
        for &l in &self.orbit_of {
            writeln!(w, "{l}")?;
        }
        Ok(())
    }

    /// Reads a cache written by [`OrbitPartition::write_cache`]; returns the
    /// partition with the group name and order from the header.
    pub fn read_cache(r: impl BufRead) -> Result<(Self, String, usize)> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty orbit cache"))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(parse_err(1, "expected header `<v> <r> <group> <order>`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(1, format!("bad number {s:?}")));
        let (v, layer, name, order) = (num(h[0])?, num(h[1])?, h[2].to_string(), num(h[3])?);
        let expected = crate::grassmannian::binary_count(v, layer);
        let mut labels = Vec::with_capacity(expected);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            labels.push(t.parse::<u32>().map_err(|_| parse_err(i + 2, format!("bad orbit id {t:?}")))?);
        }
        if labels.len() != expected {
            return Err(parse_err(
                labels.len() + 1,
                format!("expected {expected} orbit ids, found {}", labels.len()),
            ));
        }
        // ids must be numbered in order of first appearance
        let mut next = 0u32;
        for (i, &l) in labels.iter().enumerate() {
            if l > next {
                return Err(parse_err(i + 2, "orbit ids are not in first-appearance order"));
            }
            if l == next {
                next += 1;
            }
        }
        Ok((Self::from_labels(v, layer, labels), name, order))
    }
}

/// Orbits of `group` on the layer described by `index`.
pub fn orbits_on(group: &MatrixGroup, index: &GrassmannianIndex) -> Result<OrbitPartition> {
    if group.dim() != index.v() {
        return Err(Error::DimensionMismatch { left: group.dim(), right: index.v() });
    }
    const UNSEEN: u32 = u32::MAX;
    let mut labels = vec![UNSEEN; index.len()];
    let mut next = 0u32;
    let non_identity = &group.elements()[1..];
    for i in 0..index.len() {
        if labels[i] != UNSEEN {
            continue;
        }
        labels[i] = next;
        let s = index.unrank(i);
        for g in non_identity {
            let j = index.rank(&s.image_unchecked(g)).expect("image lies in the same layer");
            labels[j] = next;
        }
        next += 1;
    }
    Ok(OrbitPartition::from_labels(index.v(), index.r(), labels))
}

/// Orbits of `group` on the `r`-subspaces of F2^v.
pub fn orbits(group: &MatrixGroup, v: usize, r: usize) -> Result<OrbitPartition> {
    let index = GrassmannianIndex::new(v, r)?;
    orbits_on(group, &index)
}

/// All `r`-subspaces fixed by every element of `group`.
pub fn fixed_subspaces(group: &MatrixGroup, v: usize, r: usize) -> Result<Vec<Subspace>> {
    if group.dim() != v {
        return Err(Error::DimensionMismatch { left: group.dim(), right: v });
    }
    let index = GrassmannianIndex::new(v, r)?;
    Ok(index
        .iter()
        .filter(|s| group.generators().iter().all(|g| s.image_unchecked(g) == **s))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::involution_normal_form;

    fn parse(text: &str) -> Gf2Matrix {
        let rows: Vec<u64> = text.split_whitespace().map(|l| u64::from_str_radix(l, 2).unwrap()).collect();
        Gf2Matrix::from_rows(rows.len(), rows).unwrap()
    }

    #[test]
    fn closure_of_identity() {
        let g = MatrixGroup::closure(7, &[Gf2Matrix::identity(7).unwrap()], 10).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn closure_cap_and_singular() {
        let g31 = parse("1000000 0100000 0001000 0000100 0000010 0000001 0010010");
        assert_eq!(MatrixGroup::closure(7, &[g31], 10).unwrap_err(), Error::ClosureExceedsCap(10));
        let zero = Gf2Matrix::zero(7).unwrap();
        assert_eq!(MatrixGroup::closure(7, &[zero], 10).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn fano_involution_points() {
        let a = involution_normal_form(3, 1).unwrap();
        let g = MatrixGroup::closure(3, &[a], 10).unwrap();
        let fixed: Vec<String> = fixed_subspaces(&g, 3, 1).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(fixed, vec!["001", "110", "111"]);
        let p = orbits(&g, 3, 1).unwrap();
        assert_eq!(p.signature().to_string(), "2^2 1^3");
    }

    #[test]
    fn involution_on_points_of_f2_7() {
        let g = MatrixGroup::closure(7, &[involution_normal_form(7, 3).unwrap()], 10).unwrap();
        assert_eq!(fixed_subspaces(&g, 7, 1).unwrap().len(), 15);
        assert_eq!(orbits(&g, 7, 1).unwrap().signature().to_string(), "2^56 1^15");
    }

    #[test]
    fn trivial_group_points() {
        let g = MatrixGroup::trivial(7).unwrap();
        assert_eq!(orbits(&g, 7, 1).unwrap().signature().to_string(), "1^127");
    }

    #[test]
    fn signature_parse_and_format() {
        let s: OrbitSignature = "4^644 2^42 1^7".parse().unwrap();
        assert_eq!(s.to_string(), "4^644 2^42 1^7");
        assert_eq!(s.total(), 2667);
        assert_eq!(s.orbit_count(), 693);
        assert!("4x3".parse::<OrbitSignature>().is_err());
    }

    #[test]
    fn cache_round_trip() {
        let g = MatrixGroup::closure(5, &[involution_normal_form(5, 2).unwrap()], 10).unwrap();
        let p = orbits(&g, 5, 2).unwrap();
        let mut buf = Vec::new();
        p.write_cache(&mut buf, "A52", g.order()).unwrap();
        let (q, name, order) = OrbitPartition::read_cache(&buf[..]).unwrap();
        assert_eq!(q, p);
        assert_eq!((name.as_str(), order), ("A52", 2));
        assert!(OrbitPartition::read_cache(&b"5 2 x 2\n0\n"[..]).is_err());
    }
}
