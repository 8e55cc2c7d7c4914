#![allow(dead_code)]

use std::collections::BTreeSet;

use qfano::exact_cover::{dlx_solve, CountConstraint, CoverProblem, SolveConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Include/exclude enumeration over rows with column bitmasks; checks the
/// side constraints only at the leaves.
pub fn brute_force(p: &CoverProblem) -> BTreeSet<Vec<usize>> {
    let masks: Vec<u64> = p.rows.iter().map(|r| r.iter().fold(0u64, |m, &c| m | 1 << c)).collect();
    let full = if p.n_cols == 64 { u64::MAX } else { (1u64 << p.n_cols) - 1 };
    let mut out = BTreeSet::new();
    let mut chosen = Vec::new();
    fn go(
        i: usize,
        covered: u64,
        full: u64,
        masks: &[u64],
        p: &CoverProblem,
        chosen: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if i == masks.len() {
            let ok = covered == full
                && p.forced.iter().all(|r| chosen.contains(r))
                && p.count_constraints
                    .iter()
                    .all(|cc| cc.rows.iter().filter(|r| chosen.contains(r)).count() == cc.count);
            if ok {
                out.insert(chosen.clone());
            }
            return;
        }
        go(i + 1, covered, full, masks, p, chosen, out);
        if covered & masks[i] == 0 && !p.forbidden.contains(&i) {
            chosen.push(i);
            go(i + 1, covered | masks[i], full, masks, p, chosen, out);
            chosen.pop();
        }
    }
    go(0, 0, full, &masks, p, &mut chosen, &mut out);
    out
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> CoverProblem {
    let n_cols = rng.gen_range(1..=12);
    let n_rows = rng.gen_range(1..=20);
    let density = rng.gen_range(0.1..0.6);
    let rows: Vec<Vec<usize>> = (0..n_rows)
        .map(|_| {
            let mut r: Vec<usize> = (0..n_cols).filter(|_| rng.gen_bool(density)).collect();
            if r.is_empty() {
                r.push(rng.gen_range(0..n_cols));
            }
            r
        })
        .collect();
    let mut p = CoverProblem::new(n_cols, rows);
    if rng.gen_bool(0.2) {
        p.forced.insert(rng.gen_range(0..n_rows));
    }
    if rng.gen_bool(0.2) {
        let r = rng.gen_range(0..n_rows);
        if !p.forced.contains(&r) {
            p.forbidden.insert(r);
        }
    }
    if rng.gen_bool(0.2) {
        let rows: Vec<usize> = (0..n_rows).filter(|_| rng.gen_bool(0.5)).collect();
        let count = rng.gen_range(0..=rows.len().min(3));
        p.count_constraints.push(CountConstraint { rows, count });
    }
    p
}

/// Runs `trials` seeded random instances; returns the first disagreement.
pub fn oracle_trials(seed: u64, trials: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = SolveConfig { max_solutions: None, ..Default::default() };
    let mut with_solutions = 0;
    for t in 0..trials {
        let p = random_problem(&mut rng);
        let want = brute_force(&p);
        let got = dlx_solve(&p, &config).map_err(|e| format!("trial {t}: {e}"))?;
        let got: BTreeSet<Vec<usize>> = got.solutions.into_iter().collect();
        if got != want {
            return Err(format!("trial {t}: dlx {got:?}, brute force {want:?}\n{}", p.to_text()));
        }
        with_solutions += usize::from(!want.is_empty());
    }
    Ok(with_solutions)
}
