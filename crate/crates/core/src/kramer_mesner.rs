//! Orbit incidence matrices `M^G_{t,k}`, their reduction by λ, the cheap
//! infeasibility screens, and translation to exact cover.
//!
//! Rows are indexed by the G-orbits on t-subspaces, columns by the G-orbits
//! on k-subspaces, both in ascending order of representative index. The
//! entry at `(T^G, K^G)` is the number of members of `K^G` that contain the
//! representative `T`.

use std::io::Write;

use num_traits::ToPrimitive;

use crate::design_theory::{lambda_s, DesignParams};
use crate::error::{Error, Result};
use crate::exact_cover::{CountConstraint, CoverProblem};
use crate::grassmannian::{GrassmannianIndex, Subspace};
use crate::group_action::{orbits_on, MatrixGroup, OrbitPartition, OrbitSignature};

#[derive(Clone, Debug)]
pub struct KmMatrix {
    pub group_name: String,
    pub t: usize,
    pub k: usize,
    pub v: usize,
    pub row_orbits: OrbitPartition,
    pub col_orbits: OrbitPartition,
    /// Nonzero entries of each row as `(column, value)`, ascending by column.
    pub entries: Vec<Vec<(u32, u32)>>,
}

/// All k-subspaces containing `base`, as dense indices into `index`.
fn superspaces(base: &Subspace, index: &GrassmannianIndex) -> Vec<usize> {
    let v = base.ambient_dim();
    let mut layer = vec![base.clone()];
    for _ in base.dim()..index.r() {
        let mut next: Vec<Subspace> = Vec::new();
        for s in &layer {
            // one extension per nonzero coset of s, using reduced representatives
            for x in 1u64..(1u64 << v) {
                if s.reduce(x) == x {
                    next.push(s.extend(x));
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        layer = next;
    }
    let mut out: Vec<usize> =
        layer.iter().map(|s| index.rank(s).expect("superspace lies in the target layer")).collect();
    out.sort_unstable();
    out
}

impl KmMatrix {
    pub fn build(group: &MatrixGroup, group_name: &str, t: usize, k: usize, v: usize) -> Result<Self> {
        if !(t <= k && k <= v) {
            return Err(Error::OutOfRange(format!("need t <= k <= v, got t={t} k={k} v={v}")));
        }
        let t_index = GrassmannianIndex::new(v, t)?;
        let k_index = GrassmannianIndex::new(v, k)?;
        let row_orbits = orbits_on(group, &t_index)?;
        let col_orbits = orbits_on(group, &k_index)?;
        Ok(Self::from_orbits(group_name, &t_index, &k_index, row_orbits, col_orbits))
    }

    /// Assembles the matrix from precomputed orbit partitions of the two layers.
    pub fn from_orbits(
        group_name: &str,
        t_index: &GrassmannianIndex,
        k_index: &GrassmannianIndex,
        row_orbits: OrbitPartition,
        col_orbits: OrbitPartition,
    ) -> Self {
        let entries = row_orbits
            .orbits()
            .iter()
            .map(|o| {
                let rep = t_index.unrank(o.representative);
                let mut cols: Vec<u32> = superspaces(rep, k_index)
                    .into_iter()
                    .map(|j| col_orbits.orbit_of(j) as u32)
                    .collect();
                cols.sort_unstable();
                let mut row: Vec<(u32, u32)> = Vec::new();
                for c in cols {
                    match row.last_mut() {
                        Some((last, n)) if *last == c => *n += 1,
                        _ => row.push((c, 1)),
                    }
                }
                row
            })
            .collect();
        Self {
            group_name: group_name.to_string(),
            t: t_index.r(),
            k: k_index.r(),
            v: t_index.v(),
            row_orbits,
            col_orbits,
            entries,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.entries.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_orbits.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        let r = &self.entries[row];
        r.binary_search_by_key(&(col as u32), |&(c, _)| c).map(|i| r[i].1).unwrap_or(0)
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.entries[row].iter().map(|&(_, n)| n as u64).sum()
    }

    /// Largest entry of every column.
    pub fn column_maxima(&self) -> Vec<u32> {
        let mut max = vec![0u32; self.n_cols()];
        for row in &self.entries {
            for &(c, n) in row {
                max[c as usize] = max[c as usize].max(n);
            }
        }
        max
    }

    /// Writes the header `t k v group rows cols lambda`, then `row col value`
    /// for every nonzero entry of the full matrix.
    pub fn write_dump(&self, mut w: impl Write, lambda: u64) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {} {} {} {}",
            self.t,
            self.k,
            self.v,
            self.group_name,
            self.n_rows(),
            self.n_cols(),
            lambda
        )?;
        for (r, row) in self.entries.iter().enumerate() {
            for &(c, n) in row {
                writeln!(w, "{r} {c} {n}")?;
            }
        }
        Ok(())
    }
}

/// The system after dropping every column with an entry above λ.
#[derive(Clone, Debug)]
pub struct ReducedKm<'a> {
    pub base: &'a KmMatrix,
    pub lambda: u64,
    pub kept_columns: Vec<usize>,
    pub zero_rows: Vec<usize>,
}

impl ReducedKm<'_> {
    pub fn size(&self) -> (usize, usize) {
        (self.base.n_rows(), self.kept_columns.len())
    }

    /// Orbit lengths of the kept columns.
    pub fn signature(&self) -> OrbitSignature {
        let orbits = self.base.col_orbits.orbits();
        OrbitSignature::from_lengths(self.kept_columns.iter().map(|&c| orbits[c].len()))
    }

    /// Kept columns whose orbit is a single fixed k-subspace.
    pub fn fixed_columns(&self) -> Vec<usize> {
        let orbits = self.base.col_orbits.orbits();
        self.kept_columns.iter().copied().filter(|&c| orbits[c].len() == 1).collect()
    }
}

pub fn reduce_km(m: &KmMatrix, lambda: u64) -> Result<ReducedKm<'_>> {
    if lambda == 0 {
        return Err(Error::OutOfRange("lambda must be positive".into()));
    }
    let max = m.column_maxima();
    let kept_columns: Vec<usize> = (0..m.n_cols()).filter(|&c| max[c] as u64 <= lambda).collect();
    let mut keep = vec![false; m.n_cols()];
    for &c in &kept_columns {
        keep[c] = true;
    }
    let zero_rows = (0..m.n_rows())
        .filter(|&r| !m.entries[r].iter().any(|&(c, _)| keep[c as usize]))
        .collect();
    Ok(ReducedKm { base: m, lambda, kept_columns, zero_rows })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum ScreenKind {
    ZeroRow,
    OrbitSum,
    Unknown,
}

#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize)]
pub struct FeasibilityVerdict {
    pub kind: ScreenKind,
    pub witness: String,
}

/// Whether some sub-multiset of `sig`'s orbit lengths sums to `target`.
pub fn orbit_sum_reachable(sig: &OrbitSignature, target: usize) -> bool {
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    for (&len, &count) in &sig.0 {
        if len == 0 {
            continue;
        }
        // bounded multiplicity via binary splitting of the count
        let mut remaining = count;
        let mut chunk = 1usize;
        while remaining > 0 {
            let take = chunk.min(remaining);
            let w = take * len;
            if w <= target {
                for s in (w..=target).rev() {
                    if reach[s - w] {
                        reach[s] = true;
                    }
                }
            }
            remaining -= take;
            chunk *= 2;
        }
    }
    reach[target]
}

/// Whether the block count is a sum of kept orbit lengths, then zero rows.
/// The orbit-length test goes first so that a group whose orbits cannot add
/// up to the block count is reported as such even when a zero row exists too.
pub fn feasibility_screen(r: &ReducedKm<'_>) -> Result<FeasibilityVerdict> {
    let zero_row = r.zero_rows.first().map(|&row| {
        let rep = r.base.row_orbits.orbits()[row].representative;
        format!("row {row} (t-orbit of subspace #{rep}) has no admissible column")
    });
    let m = r.base;
    let params = DesignParams::new(m.t as u64, m.v as u64, m.k as u64, r.lambda, 2)?;
    let blocks = lambda_s(&params, 0)?;
    let sig = r.signature();
    let sum_failure = if !blocks.is_integer() {
        Some(format!("block count {blocks} is not an integer"))
    } else {
        let target = blocks.to_integer().to_usize().expect("block count fits usize");
        (!orbit_sum_reachable(&sig, target)).then(|| format!("{target} is not a sum of kept orbit lengths {sig}"))
    };
    Ok(match (sum_failure, zero_row) {
        (Some(w), None) => FeasibilityVerdict { kind: ScreenKind::OrbitSum, witness: w },
        (Some(w), Some(z)) => FeasibilityVerdict { kind: ScreenKind::OrbitSum, witness: format!("{w}; also {z}") },
        (None, Some(z)) => FeasibilityVerdict { kind: ScreenKind::ZeroRow, witness: z },
        (None, None) => FeasibilityVerdict { kind: ScreenKind::Unknown, witness: String::new() },
    })
}

/// Extra conditions on the selected k-orbits, by column orbit id.
#[derive(Clone, Debug, Default)]
pub struct SideConstraints {
    pub force: Vec<usize>,
    pub forbid: Vec<usize>,
    /// Exactly `count` of `columns` must be selected.
    pub counts: Vec<(Vec<usize>, usize)>,
}

/// An exact-cover instance together with the k-orbit behind each cover row.
#[derive(Clone, Debug)]
pub struct KmCover {
    pub problem: CoverProblem,
    /// Column orbit id of each cover row.
    pub row_orbit: Vec<usize>,
}

impl KmCover {
    /// Union of the selected k-orbits, as subspaces.
    pub fn blocks(&self, m: &KmMatrix, rows: &[usize], k_index: &GrassmannianIndex) -> Vec<Subspace> {
        let orbits = m.col_orbits.orbits();
        let mut out: Vec<Subspace> = rows
            .iter()
            .flat_map(|&r| orbits[self.row_orbit[r]].members.iter().map(|&i| k_index.unrank(i).clone()))
            .collect();
        out.sort();
        out
    }
}

/// Cover columns are the t-orbits, cover rows are the kept k-orbits.
pub fn to_cover_problem(r: &ReducedKm<'_>, side: &SideConstraints) -> Result<KmCover> {
    if r.lambda != 1 {
        return Err(Error::UnsupportedLambda(r.lambda));
    }
    let m = r.base;
    let mut position = vec![usize::MAX; m.n_cols()];
    for (i, &c) in r.kept_columns.iter().enumerate() {
        position[c] = i;
    }
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); r.kept_columns.len()];
    for (t_orbit, row) in m.entries.iter().enumerate() {
        for &(c, n) in row {
            let p = position[c as usize];
            if p != usize::MAX {
                debug_assert_eq!(n, 1);
                rows[p].push(t_orbit);
            }
        }
    }
    let lookup = |c: usize| -> Result<usize> {
        match position.get(c) {
            Some(&p) if p != usize::MAX => Ok(p),
            _ => Err(Error::OutOfRange(format!("column orbit {c} is not in the reduced system"))),
        }
    };
    let orbits = m.col_orbits.orbits();
    let mut problem = CoverProblem {
        n_cols: m.n_rows(),
        weights: r.kept_columns.iter().map(|&c| orbits[c].len()).collect(),
        rows,
        ..Default::default()
    };
    for &c in &side.force {
        problem.forced.insert(lookup(c)?);
    }
    for &c in &side.forbid {
        problem.forbidden.insert(lookup(c)?);
    }
    for (cols, count) in &side.counts {
        let rows = cols.iter().map(|&c| lookup(c)).collect::<Result<Vec<_>>>()?;
        problem.count_constraints.push(CountConstraint { rows, count: *count });
    }
    Ok(KmCover { problem, row_orbit: r.kept_columns.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group_points_in_lines() {
        let g = MatrixGroup::trivial(4).unwrap();
        let m = KmMatrix::build(&g, "1", 1, 2, 4).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (15, 35));
        assert!((0..15).all(|r| m.row_sum(r) == 7));
        assert!(m.entries.iter().flatten().all(|&(_, n)| n == 1));
        // oracle: point-in-line incidence from point sets
        let pts = GrassmannianIndex::new(4, 1).unwrap();
        let lines = GrassmannianIndex::new(4, 2).unwrap();
        for (i, p) in pts.iter().enumerate() {
            for (j, l) in lines.iter().enumerate() {
                let inc = l.points().contains(&p.basis()[0]) as u32;
                assert_eq!(m.entry(i, j), inc);
            }
        }
        let red = reduce_km(&m, 1).unwrap();
        assert_eq!(red.kept_columns.len(), 35);
        assert!(red.zero_rows.is_empty());
    }

    #[test]
    fn superspaces_of_a_line() {
        let planes = GrassmannianIndex::new(7, 3).unwrap();
        let line = Subspace::span(7, &[0b1000000, 0b0000011]).unwrap();
        let sup = superspaces(&line, &planes);
        assert_eq!(sup.len(), 31);
        assert!(sup.iter().all(|&i| planes.unrank(i).contains(&line).unwrap()));
    }

    #[test]
    fn subset_sums() {
        let sig: OrbitSignature = "31^270".parse().unwrap();
        assert!(!orbit_sum_reachable(&sig, 381));
        let sig: OrbitSignature = "7^1620 1^2".parse().unwrap();
        assert!(!orbit_sum_reachable(&sig, 381));
        let sig: OrbitSignature = "5^2107 1^1".parse().unwrap();
        assert!(orbit_sum_reachable(&sig, 381));
        let sig: OrbitSignature = "7^1620 1^3".parse().unwrap();
        assert!(orbit_sum_reachable(&sig, 381));
        assert!(orbit_sum_reachable(&OrbitSignature::default(), 0));
    }

    #[test]
    fn double_counting_identity() {
        let a = crate::gf2::involution_normal_form(5, 2).unwrap();
        let g = MatrixGroup::closure(5, &[a], 10).unwrap();
        let m = KmMatrix::build(&g, "A52", 2, 3, 5).unwrap();
        let lines = GrassmannianIndex::new(5, 2).unwrap();
        let planes = GrassmannianIndex::new(5, 3).unwrap();
        for (r, ro) in m.row_orbits.orbits().iter().enumerate() {
            for (c, co) in m.col_orbits.orbits().iter().enumerate() {
                let k = planes.unrank(co.representative);
                let inside = ro.members.iter().filter(|&&i| k.contains(lines.unrank(i)).unwrap()).count();
                assert_eq!(m.entry(r, c) as usize * ro.len(), co.len() * inside);
            }
        }
    }

    #[test]
    fn lambda_other_than_one_is_rejected() {
        let g = MatrixGroup::trivial(4).unwrap();
        let m = KmMatrix::build(&g, "1", 1, 2, 4).unwrap();
        let red = reduce_km(&m, 2).unwrap();
        assert_eq!(to_cover_problem(&red, &SideConstraints::default()).unwrap_err(), Error::UnsupportedLambda(2));
        assert!(reduce_km(&m, 0).is_err());
    }

    fn screen(name: &str) -> FeasibilityVerdict {
        let g = crate::catalog::load_group(name).unwrap().group().unwrap();
        let m = KmMatrix::build(&g, name, 2, 3, 7).unwrap();
        feasibility_screen(&reduce_km(&m, 1).unwrap()).unwrap()
    }

    #[test]
    fn screens_on_catalog_groups() {
        assert_eq!(screen("G_{4,5}").kind, ScreenKind::ZeroRow);
        let g72 = screen("G_{7,2}");
        assert_eq!(g72.kind, ScreenKind::OrbitSum);
        assert!(!g72.witness.contains("also"));
        // the fixed line of G_31 also leaves a zero row
        let g31 = screen("G_{31}");
        assert_eq!(g31.kind, ScreenKind::OrbitSum);
        assert!(g31.witness.contains("also row"), "{}", g31.witness);
    }

    #[test]
    fn fixed_plane_of_g5_can_be_forced() {
        let g = crate::catalog::load_group("G_5").unwrap().group().unwrap();
        let m = KmMatrix::build(&g, "G_5", 2, 3, 7).unwrap();
        let r = reduce_km(&m, 1).unwrap();
        let fixed = r.fixed_columns();
        assert_eq!(fixed.len(), 1);
        let side = SideConstraints { force: fixed.clone(), ..Default::default() };
        let cover = to_cover_problem(&r, &side).unwrap();
        let forced = crate::exact_cover::apply_forcing(&cover.problem).unwrap();
        assert_eq!(forced.preselected.len(), 1);
        assert_eq!(cover.row_orbit[forced.preselected[0]], fixed[0]);
        // the fixed plane covers its 7 lines, which are 7 fixed t-orbits
        assert_eq!(forced.problem.n_cols, cover.problem.n_cols - 7);
    }
}
