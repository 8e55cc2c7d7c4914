//! The 25 subgroups of GL(7,2) whose Kramer-Mesner systems are tabulated,
//! with their published generators and expected orbit data.
//!
//! The data lives in `data/` as plain text and is embedded at build time.
//! `data/MANIFEST.sha256` pins every file.

use std::fmt;
use std::io::BufRead;
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{parse_err, Error, Result};
use crate::gf2::Gf2Matrix;
use crate::group_action::{MatrixGroup, OrbitSignature, DEFAULT_CLOSURE_CAP};

macro_rules! data_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/", $name)))),*]
    };
}

static DATA: &[(&str, &str)] = data_files!(
    "expected.txt",
    "groups/INDEX",
    "groups/G_2.grp",
    "groups/G_3_1.grp",
    "groups/G_3_2.grp",
    "groups/G_3_3.grp",
    "groups/G_4_1.grp",
    "groups/G_4_2.grp",
    "groups/G_4_3.grp",
    "groups/G_4_4.grp",
    "groups/G_4_5.grp",
    "groups/G_4_6.grp",
    "groups/G_4_7.grp",
    "groups/G_4_8.grp",
    "groups/G_5.grp",
    "groups/G_6_1.grp",
    "groups/G_6_2.grp",
    "groups/G_6_3.grp",
    "groups/G_7_1.grp",
    "groups/G_7_2.grp",
    "groups/G_7_3.grp",
    "groups/G_8_1.grp",
    "groups/G_8_2.grp",
    "groups/G_8_3.grp",
    "groups/G_9_1.grp",
    "groups/G_9_2.grp",
    "groups/G_31.grp",
);

static MANIFEST: &str = include_str!("../data/MANIFEST.sha256");

fn data(name: &str) -> &'static str {
    DATA.iter().find(|(n, _)| *n == name).map(|(_, c)| *c).expect("embedded data file")
}

/// Recomputes the SHA-256 of every embedded data file and compares it with
/// the manifest.
pub fn verify_manifest() -> Result<()> {
    let mut listed = 0;
    for (i, line) in MANIFEST.lines().enumerate() {
        let Some((hash, file)) = line.split_once("  ") else {
            return Err(parse_err(i + 1, "manifest line is not `<sha256>  <file>`"));
        };
        let content = DATA
            .iter()
            .find(|(n, _)| *n == file)
            .map(|(_, c)| *c)
            .ok_or_else(|| parse_err(i + 1, format!("{file} is not embedded")))?;
        let actual = format!("{:x}", Sha256::digest(content.as_bytes()));
        if actual != hash {
            return Err(parse_err(i + 1, format!("checksum mismatch for {file}")));
        }
        listed += 1;
    }
    if listed != DATA.len() {
        return Err(parse_err(0, format!("manifest lists {listed} of {} files", DATA.len())));
    }
    Ok(())
}

/// Parses `v` lines of `v` characters `0`/`1`.
pub fn parse_matrix(text: &str) -> Result<Gf2Matrix> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    parse_matrix_lines(&lines, 1)
}

fn parse_matrix_lines(lines: &[&str], first_line: usize) -> Result<Gf2Matrix> {
    let dim = lines.len();
    if dim == 0 {
        return Err(parse_err(first_line, "empty matrix"));
    }
    let mut rows = Vec::with_capacity(dim);
    for (i, l) in lines.iter().enumerate() {
        let lineno = first_line + i;
        if l.len() != dim {
            return Err(parse_err(lineno, format!("row has {} characters, expected {dim}", l.len())));
        }
        let mut bits = 0u64;
        for ch in l.chars() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                other => return Err(parse_err(lineno, format!("invalid character {other:?}"))),
            }
        }
        rows.push(bits);
    }
    Gf2Matrix::from_rows(dim, rows).map_err(|e| parse_err(first_line, e.to_string()))
}

/// What the published table reports for a group's system.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExpectedOutcome {
    ZeroRow,
    OrbitSum,
    /// Shown infeasible by the solver in the stated time (`< 1s` is stored as 1).
    Unsat { seconds: u64 },
    /// No result within the authors' time limit.
    Open,
}

impl ExpectedOutcome {
    fn parse(s: &str, line: usize) -> Result<Self> {
        match s.trim() {
            "zero row!" => Ok(Self::ZeroRow),
            "orbits!" => Ok(Self::OrbitSum),
            "open" => Ok(Self::Open),
            "< 1s" => Ok(Self::Unsat { seconds: 1 }),
            other => {
                let mut secs = 0u64;
                for part in other.split_whitespace() {
                    let (n, unit) = part.split_at(part.len() - 1);
                    let n: u64 = n.parse().map_err(|_| parse_err(line, format!("bad runtime {other:?}")))?;
                    secs += match unit {
                        "m" => 60 * n,
                        "s" => n,
                        _ => return Err(parse_err(line, format!("bad runtime {other:?}"))),
                    };
                }
                Ok(Self::Unsat { seconds: secs })
            }
        }
    }

    pub fn reference_runtime(&self) -> Option<Duration> {
        match self {
            Self::Unsat { seconds } => Some(Duration::from_secs(*seconds)),
            _ => None,
        }
    }
}

impl fmt::Display for ExpectedOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroRow => f.write_str("zero-row"),
            Self::OrbitSum => f.write_str("orbit-sum"),
            Self::Open => f.write_str("open"),
            Self::Unsat { seconds: 1 } => f.write_str("solved-unsat, < 1s"),
            Self::Unsat { seconds } if *seconds < 60 => write!(f, "solved-unsat, {seconds}s"),
            Self::Unsat { seconds } => write!(f, "solved-unsat, {}m {}s", seconds / 60, seconds % 60),
        }
    }
}

/// One row of the published table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExpectedRow {
    pub t_orbits: OrbitSignature,
    pub k_orbits: OrbitSignature,
    pub reduced_k_orbits: OrbitSignature,
    pub size: (usize, usize),
    pub outcome: ExpectedOutcome,
}

#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub name: String,
    pub generators: Vec<Gf2Matrix>,
    pub expected_order: usize,
    pub iso_type: String,
    pub expected: Option<ExpectedRow>,
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        self.generators.first().map(Gf2Matrix::dim).unwrap_or(7)
    }

    /// Closes the generators and checks the order against `expected_order`.
    pub fn group(&self) -> Result<MatrixGroup> {
        let g = MatrixGroup::closure(self.dim(), &self.generators, DEFAULT_CLOSURE_CAP)?;
        if g.order() != self.expected_order {
            return Err(Error::OutOfRange(format!(
                "{} generates a group of order {}, expected {}",
                self.name,
                g.order(),
                self.expected_order
            )));
        }
        Ok(g)
    }

    /// Whether the fixed k-orbits are forced into any solution by the
    /// orbit-length residue argument (only the order-5 group relies on it).
    pub fn forces_fixed_blocks(&self) -> bool {
        self.name == "G_5"
    }
}

/// Parses the group file format: `group <name>`, `order <n>`, `type <label>`,
/// then per generator a `gen` line followed by the matrix rows.
pub fn parse_group_file(input: impl BufRead) -> Result<GroupSpec> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut name = None;
    let mut order = None;
    let mut iso_type = None;
    let mut generators = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(' ').map(|(k, r)| (k, r.trim())).unwrap_or((line, ""));
        match key {
            "group" if !rest.is_empty() => name = Some(rest.to_string()),
            "order" => {
                order = Some(rest.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad order {rest:?}")))?)
            }
            "type" if !rest.is_empty() => iso_type = Some(rest.to_string()),
            "gen" if rest.is_empty() => {
                let start = i;
                while i < lines.len() && !lines[i].trim().is_empty() && lines[i].trim().chars().all(|c| c == '0' || c == '1') {
                    i += 1;
                }
                let rows: Vec<&str> = lines[start..i].iter().map(|l| l.trim()).collect();
                let m = parse_matrix_lines(&rows, start + 1)?;
                if let Some(first) = generators.first() {
                    let first: &Gf2Matrix = first;
                    if first.dim() != m.dim() {
                        return Err(parse_err(start + 1, "generators differ in dimension"));
                    }
                }
                generators.push(m);
            }
            _ => return Err(parse_err(lineno, format!("unexpected line {line:?}"))),
        }
    }
    let missing = |what: &str| parse_err(lines.len().max(1), format!("missing `{what}` line"));
    Ok(GroupSpec {
        name: name.ok_or_else(|| missing("group"))?,
        expected_order: order.ok_or_else(|| missing("order"))?,
        iso_type: iso_type.ok_or_else(|| missing("type"))?,
        generators,
        expected: None,
    })
}

fn expected_rows() -> Result<Vec<(String, String, ExpectedRow)>> {
    let mut out = Vec::new();
    for (i, line) in data("expected.txt").lines().enumerate() {
        let lineno = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('|').collect();
        if f.len() != 7 {
            return Err(parse_err(lineno, "expected 7 fields"));
        }
        let sig = |s: &str| s.parse::<OrbitSignature>().map_err(|_| parse_err(lineno, "bad signature"));
        let (r, c) = f[5].split_once('x').ok_or_else(|| parse_err(lineno, "bad size"))?;
        let size = (
            r.parse().map_err(|_| parse_err(lineno, "bad size"))?,
            c.parse().map_err(|_| parse_err(lineno, "bad size"))?,
        );
        out.push((
            f[0].to_string(),
            f[1].to_string(),
            ExpectedRow {
                t_orbits: sig(f[2])?,
                k_orbits: sig(f[3])?,
                reduced_k_orbits: sig(f[4])?,
                size,
                outcome: ExpectedOutcome::parse(f[6], lineno)?,
            },
        ));
    }
    Ok(out)
}

/// `G_{4,1}` and `G_4_1` name the same entry; `G_{31}` and `G_{3,1}` do not.
fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '{' && *c != '}')
        .map(|c| if c == ',' { '_' } else { c.to_ascii_uppercase() })
        .collect()
}

/// Catalog entry by name, with its table row attached.
pub fn load_group(name: &str) -> Result<GroupSpec> {
    let want = normalize(name);
    let rows = expected_rows()?;
    let (table_name, table_type, row) = rows
        .into_iter()
        .find(|(n, _, _)| normalize(n) == want)
        .ok_or_else(|| Error::UnknownGroup(name.to_string()))?;
    let file = format!("groups/{}", group_file_name(&table_name));
    let mut spec = parse_group_file(data(&file).as_bytes())?;
    if spec.name != table_name || spec.iso_type != table_type {
        return Err(Error::OutOfRange(format!("{file} disagrees with the table on name or type")));
    }
    spec.expected = Some(row);
    Ok(spec)
}

fn group_file_name(name: &str) -> String {
    let mut s: String = name.chars().filter(|&c| c != '{' && c != '}').map(|c| if c == ',' { '_' } else { c }).collect();
    s.push_str(".grp");
    s
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub order: usize,
    pub iso_type: String,
    pub verdict_class: String,
}

/// All catalog entries in table order.
pub fn list_groups() -> Result<Vec<GroupSummary>> {
    expected_rows()?
        .into_iter()
        .map(|(name, _, row)| {
            let spec = load_group(&name)?;
            Ok(GroupSummary {
                name,
                order: spec.expected_order,
                iso_type: spec.iso_type,
                verdict_class: row.outcome.to_string(),
            })
        })
        .collect()
}

pub fn group_names() -> Result<Vec<String>> {
    Ok(expected_rows()?.into_iter().map(|(n, _, _)| n).collect())
}
