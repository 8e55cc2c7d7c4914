use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use qfano::catalog::{self, load_group, parse_group_file, GroupSpec};
use qfano::exact_cover::{dlx_solve, CoverProblem, SolveConfig, SolveStatus};
use qfano::grassmannian::GrassmannianIndex;
use qfano::kramer_mesner::KmMatrix;
use qfano::pipeline::{layer_orbits, run_group, verify_theory, RunOptions, RunReport};
use qfano::Error;

#[derive(Parser)]
#[command(name = "qfano", version, about = "Kramer-Mesner searches for binary q-Steiner triple systems")]
struct Cli {
    /// Machine-readable output, one JSON document per line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline for one catalog group (e.g. `G_{8,1}` or `G_8_1`).
    TableRow {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every catalog group in table order.
    TableAll {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check the census formulas and residue table up to `v_max`.
    VerifyTheory {
        #[arg(long, default_value_t = 31)]
        v_max: u64,
    },
    /// Solve an exact cover problem file.
    Solve {
        path: PathBuf,
        #[arg(long, value_parser = humantime::parse_duration)]
        timeout: Option<Duration>,
        /// Maximum number of solutions; 0 enumerates all.
        #[arg(long, default_value_t = 1)]
        max_solutions: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Print the orbit signature of a group on the r-subspaces.
    Orbits {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        orbit_cache: Option<PathBuf>,
    },
    /// Build the Kramer-Mesner matrix and write it as `row col value` triples.
    KmBuild {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 2)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Output path; standard output when omitted.
        #[arg(long)]
        dump_km: Option<PathBuf>,
        #[arg(long)]
        orbit_cache: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GroupArg {
    /// Catalog group name.
    name: Option<String>,
    /// Group file (`group`/`order`/`type`/`gen` format).
    #[arg(long)]
    group_file: Option<PathBuf>,
}

impl GroupArg {
    fn load(&self) -> qfano::Result<GroupSpec> {
        match (&self.name, &self.group_file) {
            (Some(n), _) => load_group(n),
            (None, Some(p)) => parse_group_file(BufReader::new(File::open(p)?)),
            (None, None) => unreachable!("clap requires one of them"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Solver time limit, e.g. `90s` or `10m`.
    #[arg(long, value_parser = humantime::parse_duration)]
    timeout: Option<Duration>,
    /// Lift all default time limits.
    #[arg(long, conflicts_with = "timeout")]
    no_timeout: bool,
    #[arg(long, default_value_t = 1)]
    max_solutions: usize,
    /// Require the number of fixed blocks an order-2 group forces.
    #[arg(long)]
    force_fixed_blocks: bool,
    #[arg(long)]
    dump_km: Option<PathBuf>,
    #[arg(long)]
    orbit_cache: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            timeout: self.timeout,
            no_timeout: self.no_timeout,
            max_solutions: (self.max_solutions > 0).then_some(self.max_solutions),
            force_fixed_blocks: self.force_fixed_blocks,
            threads: self.threads,
            dump_km: self.dump_km.clone(),
            orbit_cache: self.orbit_cache.clone(),
            ..RunOptions::default()
        }
    }
}

fn print_report(out: &mut impl Write, r: &RunReport, json: bool) -> io::Result<()> {
    if json {
        return writeln!(out, "{}", serde_json::to_string(r).expect("report serializes"));
    }
    writeln!(out, "{} ({}, order {})", r.group, r.iso_type, r.order)?;
    writeln!(out, "  T-orbits  {}", r.t_orbits)?;
    writeln!(out, "  K-orbits  {}", r.k_orbits)?;
    writeln!(out, "  reduced   {}", r.reduced_k_orbits)?;
    writeln!(out, "  size      {}x{}", r.size.0, r.size.1)?;
    write!(out, "  verdict   {:?}", r.verdict)?;
    if let Some(n) = r.nodes {
        write!(out, " after {n} nodes")?;
    }
    writeln!(out, " in {:.2}s", r.elapsed_secs)?;
    for n in &r.notes {
        writeln!(out, "  note      {n}")?;
    }
    for s in &r.solutions {
        writeln!(out, "  solution  {s:?}")?;
    }
    if let Some(e) = &r.expected {
        writeln!(out, "  table     {e}")?;
    }
    for m in &r.mismatches {
        writeln!(out, "  MISMATCH  {m}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> qfano::Result<bool> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let ok = match cli.cmd {
        Cmd::TableRow { name, run } => {
            let r = run_group(&load_group(&name)?, &run.options())?;
            print_report(&mut out, &r, cli.json)?;
            r.expectation_match
        }
        Cmd::TableAll { run } => {
            if run.dump_km.is_some() {
                return Err(Error::OutOfRange("--dump-km takes a single group; use table-row".into()));
            }
            let options = run.options();
            let mut all = true;
            for name in catalog::group_names()? {
                let r = run_group(&load_group(&name)?, &options)?;
                print_report(&mut out, &r, cli.json)?;
                out.flush()?;
                all &= r.expectation_match;
            }
            all
        }
        Cmd::VerifyTheory { v_max } => {
            let r = verify_theory(v_max)?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string(&r).expect("report serializes"))?;
            } else {
                for (v, types) in &r.involution_types {
                    writeln!(out, "v = {v}: involution types {types:?}")?;
                }
                for c in &r.checks {
                    let mark = if c.passed { "PASS" } else { "FAIL" };
                    writeln!(out, "{mark} {}{}", c.name, if c.passed { String::new() } else { format!(": {}", c.detail) })?;
                }
            }
            r.passed()
        }
        Cmd::Solve { path, timeout, max_solutions, threads } => {
            let p = CoverProblem::parse(BufReader::new(File::open(&path)?))?;
            let config = SolveConfig {
                max_solutions: (max_solutions > 0).then_some(max_solutions),
                timeout,
                threads,
                ..Default::default()
            };
            let res = dlx_solve(&p, &config)?;
            if cli.json {
                let doc = serde_json::json!({
                    "status": res.status,
                    "solutions": res.solutions,
                    "nodes": res.nodes,
                    "elapsed_secs": res.elapsed.as_secs_f64(),
                    "complete": res.complete,
                });
                writeln!(out, "{doc}")?;
            } else {
                for s in &res.solutions {
                    let line: Vec<String> = s.iter().map(usize::to_string).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
                eprintln!("{:?}: {} solution(s), {} nodes", res.status, res.solutions.len(), res.nodes);
            }
            res.status != SolveStatus::Timeout
        }
        Cmd::Orbits { group, r, orbit_cache } => {
            let spec = group.load()?;
            let g = spec.group()?;
            let index = GrassmannianIndex::new(g.dim(), r)?;
            let p = layer_orbits(&g, &spec.name, &index, orbit_cache.as_deref())?;
            if cli.json {
                let doc = serde_json::json!({
                    "group": spec.name,
                    "order": g.order(),
                    "r": r,
                    "signature": p.signature().to_string(),
                    "orbits": p.orbits(),
                });
                writeln!(out, "{doc}")?;
            } else {
                writeln!(out, "{}", p.signature())?;
            }
            true
        }
        Cmd::KmBuild { group, t, k, dump_km, orbit_cache } => {
            let spec = group.load()?;
            let g = spec.group()?;
            let t_index = GrassmannianIndex::new(g.dim(), t)?;
            let k_index = GrassmannianIndex::new(g.dim(), k)?;
            let cache = orbit_cache.as_deref();
            let rows = layer_orbits(&g, &spec.name, &t_index, cache)?;
            let cols = layer_orbits(&g, &spec.name, &k_index, cache)?;
            let m = KmMatrix::from_orbits(&spec.name, &t_index, &k_index, rows, cols);
            match dump_km {
                Some(path) => m.write_dump(BufWriter::new(File::create(path)?), 1)?,
                None => m.write_dump(&mut out, 1)?,
            }
            true
        }
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
