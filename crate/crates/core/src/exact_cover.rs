//! Exact cover by dancing links (Knuth's Algorithm X), with forced and
//! forbidden rows, exact-count side constraints and a wall-clock deadline.
//!
//! Terminology follows the incidence matrix: *columns* are the items that
//! must be covered exactly once, *rows* are the candidate sets.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use crate::error::{parse_err, Error, Result};

/// Exactly `count` of `rows` must be selected.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CountConstraint {
    pub rows: Vec<usize>,
    pub count: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CoverProblem {
    pub n_cols: usize,
    pub rows: Vec<Vec<usize>>,
    pub forced: BTreeSet<usize>,
    pub forbidden: BTreeSet<usize>,
    pub count_constraints: Vec<CountConstraint>,
    /// Reporting weight per row (the orbit length for Kramer-Mesner rows).
    pub weights: Vec<usize>,
}

impl CoverProblem {
    pub fn new(n_cols: usize, rows: Vec<Vec<usize>>) -> Self {
        let weights = vec![1; rows.len()];
        Self { n_cols, rows, weights, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedProblem(m));
        if self.weights.len() != self.rows.len() {
            return bad(format!("{} weights for {} rows", self.weights.len(), self.rows.len()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                return bad(format!("row {i} is empty"));
            }
            let mut seen = BTreeSet::new();
            for &c in row {
                if c >= self.n_cols {
                    return bad(format!("row {i} names column {c} >= {}", self.n_cols));
                }
                if !seen.insert(c) {
                    return bad(format!("row {i} repeats column {c}"));
                }
            }
        }
        let n = self.rows.len();
        for &r in self.forced.iter().chain(&self.forbidden) {
            if r >= n {
                return bad(format!("row {r} out of range"));
            }
        }
        if let Some(r) = self.forced.intersection(&self.forbidden).next() {
            return bad(format!("row {r} is both forced and forbidden"));
        }
        for cc in &self.count_constraints {
            if let Some(&r) = cc.rows.iter().find(|&&r| r >= n) {
                return bad(format!("count constraint names row {r} out of range"));
            }
        }
        Ok(())
    }

    /// Forced rows must be pairwise column-disjoint.
    fn check_forced(&self) -> Result<()> {
        let mut owner = vec![usize::MAX; self.n_cols];
        for &r in &self.forced {
            for &c in &self.rows[r] {
                if owner[c] != usize::MAX {
                    return Err(Error::ForcedConflict(owner[c], r));
                }
                owner[c] = r;
            }
        }
        Ok(())
    }

    /// Parses the text format: a header `p cover <n_cols> <n_rows>`, one line
    /// of 0-based column indices per row, then optional `f <row>` and
    /// `c <count> <row>...` lines. Blank lines and `#` comments are ignored.
    pub fn parse(input: impl BufRead) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut p = CoverProblem::default();
        let mut last_line = 1;
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            last_line = lineno;
            let line = line?;
            let t = line.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            let toks: Vec<&str> = t.split_whitespace().collect();
            let num = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| parse_err(lineno, format!("expected an integer, found {s:?}")))
            };
            let Some((n_cols, n_rows)) = header else {
                if toks.len() != 4 || toks[0] != "p" || toks[1] != "cover" {
                    return Err(parse_err(lineno, "expected header `p cover <n_cols> <n_rows>`"));
                }
                let h = (num(toks[2])?, num(toks[3])?);
                header = Some(h);
                p.n_cols = h.0;
                continue;
            };
            match toks[0] {
                "f" => {
                    if toks.len() != 2 {
                        return Err(parse_err(lineno, "expected `f <row>`"));
                    }
                    p.forced.insert(num(toks[1])?);
                }
                "c" => {
                    if toks.len() < 2 {
                        return Err(parse_err(lineno, "expected `c <count> <row>...`"));
                    }
                    let count = num(toks[1])?;
                    let rows = toks[2..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                    p.count_constraints.push(CountConstraint { rows, count });
                }
                _ => {
                    if p.rows.len() == n_rows {
                        return Err(parse_err(lineno, format!("more than {n_rows} rows")));
                    }
                    let row = toks.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                    if let Some(&c) = row.iter().find(|&&c| c >= n_cols) {
                        return Err(parse_err(lineno, format!("column {c} out of range")));
                    }
                    p.rows.push(row);
                }
            }
        }
        let Some((_, n_rows)) = header else {
            return Err(parse_err(1, "missing header `p cover <n_cols> <n_rows>`"));
        };
        if p.rows.len() != n_rows {
            return Err(parse_err(last_line, format!("expected {n_rows} rows, found {}", p.rows.len())));
        }
        p.weights = vec![1; n_rows];
        p.validate().map_err(|e| parse_err(last_line, e.to_string()))?;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("p cover {} {}\n", self.n_cols, self.rows.len());
        for row in &self.rows {
            let cols: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "{}", cols.join(" "));
        }
        for f in &self.forced {
            let _ = writeln!(s, "f {f}");
        }
        for cc in &self.count_constraints {
            let rows: Vec<String> = cc.rows.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(s, "c {} {}", cc.count, rows.join(" "));
        }
        s
    }
}

/// Result of pre-selecting the forced rows.
#[derive(Clone, Debug)]
pub struct ForcedProblem {
    /// Residual instance on the columns the forced rows leave uncovered.
    pub problem: CoverProblem,
    /// Original index of each residual row.
    pub row_origin: Vec<usize>,
    /// Original index of each residual column.
    pub col_origin: Vec<usize>,
    pub preselected: Vec<usize>,
    /// Set when a count constraint is already violated by the forced rows.
    pub contradiction: Option<String>,
}

/// Selects the forced rows, removes their columns and every row meeting
/// them, and lowers count-constraint targets accordingly.
pub fn apply_forcing(p: &CoverProblem) -> Result<ForcedProblem> {
    p.validate()?;
    p.check_forced()?;
    let mut covered = vec![false; p.n_cols];
    for &r in &p.forced {
        for &c in &p.rows[r] {
            covered[c] = true;
        }
    }
    let col_origin: Vec<usize> = (0..p.n_cols).filter(|&c| !covered[c]).collect();
    let mut col_new = vec![usize::MAX; p.n_cols];
    for (i, &c) in col_origin.iter().enumerate() {
        col_new[c] = i;
    }
    let mut row_new = vec![usize::MAX; p.rows.len()];
    let mut row_origin = Vec::new();
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for (r, row) in p.rows.iter().enumerate() {
        if p.forced.contains(&r) || row.iter().any(|&c| covered[c]) {
            continue;
        }
        row_new[r] = rows.len();
        row_origin.push(r);
        rows.push(row.iter().map(|&c| col_new[c]).collect());
        weights.push(p.weights[r]);
    }
    let forbidden = p.forbidden.iter().filter_map(|&r| (row_new[r] != usize::MAX).then_some(row_new[r])).collect();
    let mut contradiction = None;
    let mut count_constraints = Vec::new();
    for cc in &p.count_constraints {
        let already = cc.rows.iter().filter(|r| p.forced.contains(r)).count();
        if already > cc.count {
            contradiction = Some(format!("{already} forced rows exceed count {}", cc.count));
            continue;
        }
        count_constraints.push(CountConstraint {
            rows: cc.rows.iter().filter_map(|&r| (row_new[r] != usize::MAX).then_some(row_new[r])).collect(),
            count: cc.count - already,
        });
    }
    Ok(ForcedProblem {
        problem: CoverProblem {
            n_cols: col_origin.len(),
            rows,
            forced: BTreeSet::new(),
            forbidden,
            count_constraints,
            weights,
        },
        row_origin,
        col_origin,
        preselected: p.forced.iter().copied().collect(),
        contradiction,
    })
}

/// Independent verifier: `rows` partition the columns and honour every
/// forced, forbidden and count constraint.
pub fn check_solution(p: &CoverProblem, rows: &[usize]) -> bool {
    let mut hits = vec![0u32; p.n_cols];
    let mut chosen = BTreeSet::new();
    for &r in rows {
        if r >= p.rows.len() || !chosen.insert(r) || p.forbidden.contains(&r) {
            return false;
        }
        for &c in &p.rows[r] {
            if c >= p.n_cols {
                return false;
            }
            hits[c] += 1;
        }
    }
    hits.iter().all(|&h| h == 1)
        && p.forced.is_subset(&chosen)
        && p
            .count_constraints
            .iter()
            .all(|cc| cc.rows.iter().filter(|r| chosen.contains(r)).count() == cc.count)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ColumnHeuristic {
    /// Fewest remaining candidates, ties to the lowest column index.
    #[default]
    MinRemaining,
    /// Lowest uncovered column index.
    FirstColumn,
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Stop after this many solutions; `None` enumerates all.
    pub max_solutions: Option<usize>,
    pub timeout: Option<Duration>,
    pub column_heuristic: ColumnHeuristic,
    /// Split the root branching across this many worker threads.
    pub threads: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { max_solutions: Some(1), timeout: None, column_heuristic: ColumnHeuristic::default(), threads: 1 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Each solution as ascending row indices, in discovery order.
    pub solutions: Vec<Vec<usize>>,
    /// Rows tried during the search.
    pub nodes: u64,
    pub elapsed: Duration,
    /// Whether the search space was exhausted.
    pub complete: bool,
}

const NIL: u32 = u32::MAX;
const DEADLINE_CHECK_MASK: u64 = (1 << 16) - 1;

/// Sparse dancing-links matrix. Nodes `0..=n_cols` are the root and the
/// column headers; row nodes follow, each row stored contiguously.
struct Links {
    nodes: Vec<Node>,
    left: Vec<u32>,
    right: Vec<u32>,
    len: Vec<u32>,
    row_of: Vec<u32>,
    row_start: Vec<u32>,
    row_end: Vec<u32>,
    /// Count-constraint ids of each row.
    row_constraints: Vec<Vec<u32>>,
    has_constraints: bool,
    target: Vec<usize>,
    chosen: Vec<usize>,
    avail: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Node {
    up: u32,
    down: u32,
    col: u32,
}

impl Links {
    fn build(p: &CoverProblem) -> Self {
        let n = p.n_cols;
        let n_nodes = n + 1 + p.rows.iter().map(Vec::len).sum::<usize>();
        let mut nodes: Vec<Node> = (0..=n as u32).map(|i| Node { up: i, down: i, col: i }).collect();
        nodes.reserve(n_nodes);
        let mut l = Links {
            nodes,
            left: (0..=n as u32).map(|i| if i == 0 { n as u32 } else { i - 1 }).collect(),
            right: (0..=n as u32).map(|i| if i as usize == n { 0 } else { i + 1 }).collect(),
            len: vec![0; n + 1],
            row_of: vec![NIL; n + 1],
            row_start: vec![0; p.rows.len()],
            row_end: vec![0; p.rows.len()],
            row_constraints: vec![Vec::new(); p.rows.len()],
            has_constraints: !p.count_constraints.is_empty(),
            target: p.count_constraints.iter().map(|c| c.count).collect(),
            chosen: vec![0; p.count_constraints.len()],
            avail: vec![0; p.count_constraints.len()],
        };
        for (k, cc) in p.count_constraints.iter().enumerate() {
            for &r in cc.rows.iter().collect::<BTreeSet<_>>() {
                l.row_constraints[r].push(k as u32);
            }
        }
        for (r, row) in p.rows.iter().enumerate() {
            let start = l.nodes.len() as u32;
            l.row_start[r] = start;
            if p.forbidden.contains(&r) {
                l.row_end[r] = start;
                continue;
            }
            let mut cols: Vec<usize> = row.clone();
            cols.sort_unstable();
            for c in cols {
                let c1 = (c + 1) as u32;
                let x = l.nodes.len() as u32;
                let last = l.nodes[c1 as usize].up;
                l.nodes.push(Node { up: last, down: c1, col: c1 });
                l.nodes[last as usize].down = x;
                l.nodes[c1 as usize].up = x;
                l.row_of.push(r as u32);
                l.len[c1 as usize] += 1;
            }
            l.row_end[r] = l.nodes.len() as u32;
            for &k in &l.row_constraints[r] {
                l.avail[k as usize] += 1;
            }
        }
        l
    }

    #[inline]
    fn down(&self, x: u32) -> u32 {
        self.nodes[x as usize].down
    }

    #[inline]
    fn col(&self, x: u32) -> u32 {
        self.nodes[x as usize].col
    }

    #[inline]
    fn row_span(&self, x: u32) -> (u32, u32) {
        let r = self.row_of[x as usize] as usize;
        (self.row_start[r], self.row_end[r])
    }

    #[inline]
    fn adjust_avail(&mut self, x: u32, up: bool) {
        if self.has_constraints {
            let r = self.row_of[x as usize] as usize;
            for &k in &self.row_constraints[r] {
                if up {
                    self.avail[k as usize] += 1;
                } else {
                    self.avail[k as usize] -= 1;
                }
            }
        }
    }

    #[inline]
    fn unlink(&mut self, p: u32) {
        let Node { up, down, col } = self.nodes[p as usize];
        self.nodes[up as usize].down = down;
        self.nodes[down as usize].up = up;
        self.len[col as usize] -= 1;
    }

    #[inline]
    fn relink(&mut self, p: u32) {
        let Node { up, down, col } = self.nodes[p as usize];
        self.nodes[up as usize].down = p;
        self.nodes[down as usize].up = p;
        self.len[col as usize] += 1;
    }

    /// Unlinks the row through `x` from every column except that of `x`.
    #[inline]
    fn hide_row(&mut self, x: u32) {
        self.adjust_avail(x, false);
        let (s, e) = self.row_span(x);
        for p in x + 1..e {
            self.unlink(p);
        }
        for p in s..x {
            self.unlink(p);
        }
    }

    #[inline]
    fn unhide_row(&mut self, x: u32) {
        self.adjust_avail(x, true);
        let (s, e) = self.row_span(x);
        for p in (s..x).rev() {
            self.relink(p);
        }
        for p in (x + 1..e).rev() {
            self.relink(p);
        }
    }

    fn cover(&mut self, c: u32) {
        let (l, r) = (self.left[c as usize], self.right[c as usize]);
        self.right[l as usize] = r;
        self.left[r as usize] = l;
        let mut x = self.down(c);
        while x != c {
            self.hide_row(x);
            x = self.down(x);
        }
    }

    fn uncover(&mut self, c: u32) {
        let mut x = self.nodes[c as usize].up;
        while x != c {
            self.unhide_row(x);
            x = self.nodes[x as usize].up;
        }
        let (l, r) = (self.left[c as usize], self.right[c as usize]);
        self.right[l as usize] = c;
        self.left[r as usize] = c;
    }

    fn adjust_chosen(&mut self, x: u32, up: bool) {
        if self.has_constraints {
            let r = self.row_of[x as usize] as usize;
            for &k in &self.row_constraints[r] {
                if up {
                    self.chosen[k as usize] += 1;
                } else {
                    self.chosen[k as usize] -= 1;
                }
            }
        }
    }

    /// Cover the other columns of the row through `x` (the column of `x`
    /// itself is already covered).
    fn select(&mut self, x: u32) {
        self.adjust_chosen(x, true);
        let (s, e) = self.row_span(x);
        for p in x + 1..e {
            self.cover(self.col(p));
        }
        for p in s..x {
            self.cover(self.col(p));
        }
    }

    fn deselect(&mut self, x: u32) {
        let (s, e) = self.row_span(x);
        for p in (s..x).rev() {
            self.uncover(self.col(p));
        }
        for p in (x + 1..e).rev() {
            self.uncover(self.col(p));
        }
        self.adjust_chosen(x, false);
    }

    #[inline]
    fn constraints_ok(&self) -> bool {
        !self.has_constraints
            || self
                .target
                .iter()
                .zip(&self.chosen)
                .zip(&self.avail)
                .all(|((&t, &c), &a)| c <= t && c + a >= t)
    }

    fn choose_column(&self, h: ColumnHeuristic) -> u32 {
        let first = self.right[0];
        if h == ColumnHeuristic::FirstColumn {
            return first;
        }
        let mut best = first;
        let mut best_len = u32::MAX;
        let mut c = first;
        while c != 0 {
            let l = self.len[c as usize];
            if l < best_len {
                best = c;
                best_len = l;
                if l <= 1 {
                    break;
                }
            }
            c = self.right[c as usize];
        }
        best
    }
}

/// Restricts the root branching to every `stride`-th candidate.
#[derive(Clone, Copy)]
struct RootShare {
    stride: usize,
    offset: usize,
}

struct Search<'a> {
    links: Links,
    config: &'a SolveConfig,
    deadline: Option<Instant>,
    abort: Option<&'a AtomicBool>,
    share: Option<RootShare>,
    nodes: u64,
    solutions: Vec<Vec<usize>>,
    timed_out: bool,
    stopped: bool,
}

impl<'a> Search<'a> {
    fn new(p: &CoverProblem, config: &'a SolveConfig, deadline: Option<Instant>) -> Self {
        Self {
            links: Links::build(p),
            config,
            deadline,
            abort: None,
            share: None,
            nodes: 0,
            solutions: Vec::new(),
            timed_out: false,
            stopped: false,
        }
    }

    /// Pre-selects forced rows; false if that already violates a constraint.
    fn force(&mut self, p: &CoverProblem) -> bool {
        for &r in &p.forced {
            let x = self.links.row_start[r];
            self.links.cover(self.links.col(x));
            self.links.select(x);
        }
        self.links.constraints_ok()
    }

    fn record(&mut self, stack: &[u32], forced: &BTreeSet<usize>) {
        let mut sol: Vec<usize> = stack.iter().map(|&x| self.links.row_of[x as usize] as usize).collect();
        sol.extend(forced.iter().copied());
        sol.sort_unstable();
        self.solutions.push(sol);
        if let Some(m) = self.config.max_solutions {
            if self.solutions.len() >= m {
                self.stopped = true;
            }
        }
    }

    fn interrupted(&mut self) -> bool {
        if self.nodes & DEADLINE_CHECK_MASK == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return true;
                }
            }
            if let Some(a) = self.abort {
                if a.load(Ordering::Relaxed) {
                    self.stopped = true;
                    return true;
                }
            }
        }
        false
    }

    /// Iterative Algorithm X. Returns normally when the search is exhausted,
    /// stopped by the solution limit, or interrupted.
    fn run(&mut self, forced: &BTreeSet<usize>) {
        let h = self.config.column_heuristic;
        // choice node per level, and the column covered at that level
        let mut stack: Vec<u32> = Vec::new();
        let mut cols: Vec<u32> = Vec::new();
        let mut root_ordinal = 0usize;
        'enter: loop {
            // X2
            if self.links.right[0] == 0 {
                if self.links.constraints_ok() {
                    self.record(&stack, forced);
                }
                if self.stopped {
                    return;
                }
                let Some(&px) = stack.last() else { return };
                self.links.deselect(px);
                *stack.last_mut().unwrap() = self.links.down(px);
            } else {
                // X3-X4
                let c = self.links.choose_column(h);
                self.links.cover(c);
                cols.push(c);
                stack.push(self.links.down(c));
            }
            // X5/X6: try the current choice at the deepest open level
            loop {
                let Some(&x) = stack.last() else { return };
                let level = stack.len() - 1;
                let c = cols[level];
                if x == c {
                    // X7
                    self.links.uncover(c);
                    stack.pop();
                    cols.pop();
                    // X8: undo the parent's choice and advance it
                    let Some(&px) = stack.last() else { return };
                    self.links.deselect(px);
                    *stack.last_mut().unwrap() = self.links.down(px);
                    continue;
                }
                if level == 0 {
                    if let Some(share) = self.share {
                        let ord = root_ordinal;
                        root_ordinal += 1;
                        if ord % share.stride != share.offset {
                            *stack.last_mut().unwrap() = self.links.down(x);
                            continue;
                        }
                    }
                }
                self.nodes += 1;
                if self.interrupted() {
                    return;
                }
                self.links.select(x);
                if self.links.constraints_ok() {
                    continue 'enter;
                }
                self.links.deselect(x);
                *stack.last_mut().unwrap() = self.links.down(x);
            }
        }
    }
}

impl Search<'_> {
    // `run` leaves the root level open when it returns early; that state is discarded.
    fn finish(self, start: Instant) -> SolveResult {
        let complete = !self.timed_out && !self.stopped;
        let status = if !self.solutions.is_empty() {
            SolveStatus::Sat
        } else if self.timed_out {
            SolveStatus::Timeout
        } else {
            SolveStatus::Unsat
        };
        SolveResult { status, solutions: self.solutions, nodes: self.nodes, elapsed: start.elapsed(), complete }
    }
}

/// Solves `p` by dancing links.
pub fn dlx_solve(p: &CoverProblem, config: &SolveConfig) -> Result<SolveResult> {
    p.validate()?;
    p.check_forced()?;
    let start = Instant::now();
    let deadline = config.timeout.map(|t| start + t);
    if config.threads <= 1 {
        let mut s = Search::new(p, config, deadline);
        if s.force(p) {
            s.run(&p.forced);
        }
        return Ok(s.finish(start));
    }
    let abort = AtomicBool::new(false);
    let threads = config.threads;
    let parts: Vec<SolveResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|offset| {
                let abort = &abort;
                scope.spawn(move || {
                    let mut s = Search::new(p, config, deadline);
                    s.abort = Some(abort);
                    s.share = Some(RootShare { stride: threads, offset });
                    if s.force(p) {
                        s.run(&p.forced);
                    }
                    if s.stopped {
                        abort.store(true, Ordering::Relaxed);
                    }
                    s.finish(start)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver worker panicked")).collect()
    });
    let mut solutions: Vec<Vec<usize>> = parts.iter().flat_map(|r| r.solutions.iter().cloned()).collect();
    if let Some(m) = config.max_solutions {
        solutions.truncate(m);
    }
    let timed_out = parts.iter().any(|r| r.status == SolveStatus::Timeout);
    let complete = parts.iter().all(|r| r.complete);
    let status = if !solutions.is_empty() {
        SolveStatus::Sat
    } else if timed_out || !complete {
        SolveStatus::Timeout
    } else {
        SolveStatus::Unsat
    };
    Ok(SolveResult {
        status,
        solutions,
        nodes: parts.iter().map(|r| r.nodes).sum(),
        elapsed: start.elapsed(),
        complete: complete && status != SolveStatus::Timeout,
    })
}
