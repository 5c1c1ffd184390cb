use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use auter_core::format::{parse, serialize};
use auter_core::ideal::{d_set, enumerate_ideal_edges, inverse};
use auter_core::moves::{greedy_reduce, reductivity};
use auter_core::norms::index_labels;
use auter_core::selftest::{self, Suite};
use auter_core::star::RetractOptions;
use auter_core::{
    reduced_homology, run_retractions, whitehead, DartSet, Error, Family, IdealEdge, MarkedGGraph, NormKind, Norms,
    Result, Star, WhiteheadMove,
};

#[derive(Parser)]
#[command(name = "auter", version, about = "Marked G-graphs, norms, Whitehead moves and star complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an instance file.
    Validate {
        file: PathBuf,
        /// Write the graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print a truncated norm vector with its index legend.
    Norm {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, default_value = "out")]
        kind: NormKind,
    },
    /// List ideal edge orbits with reductivity verdicts.
    IdealEdges {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
    },
    /// Apply one Whitehead move.
    Move {
        file: PathBuf,
        #[arg(long)]
        vertex: String,
        /// Comma-separated darts of the ideal edge, `~e` for a reversed edge.
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        collapse: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce by maximally reductive moves.
    Reduce {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, default_value_t = 500)]
        max_steps: usize,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Build the star complex of a family of ideal edges.
    Star {
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, default_value = "R")]
        family: Family,
        #[arg(long)]
        homology: bool,
        #[arg(long)]
        retract: bool,
        /// Write the Hasse diagram of the forest poset in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run the property suites over fixtures and seeded random instances.
    Selftest {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        horizon: usize,
        /// Number of random instances besides the fixtures.
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<MarkedGGraph> {
    let inst = parse(&read_text(path)?)?;
    for w in &inst.warnings {
        eprintln!("warning: {w}");
    }
    inst.into_marked()
}

fn validate(file: &Path, dot: Option<&Path>) -> Result<String> {
    let m = load(file)?;
    let g = m.graph();
    if let Some(p) = dot {
        write_text(p, &g.to_dot())?;
    }
    Ok(format!(
        "ok: rank {} |G|={} vertices={} edges={} reduced={}\n",
        m.rank(),
        g.group().order(),
        g.vertex_count(),
        g.edge_count(),
        if g.is_reduced() { "yes" } else { "no" }
    ))
}

fn norm_report(file: &Path, horizon: usize, kind: NormKind) -> Result<String> {
    let m = load(file)?;
    let v = Norms::new(&m, horizon)?.norm(kind)?;
    let mut out = format!("{v}\n");
    for (i, (label, c)) in index_labels(kind, m.rank(), horizon).iter().zip(&v.coords).enumerate() {
        writeln!(out, "  {i:>4}  {label}  {c}").unwrap();
    }
    Ok(out)
}

fn ideal_edges_report(file: &Path, horizon: usize) -> Result<String> {
    let m = load(file)?;
    let g = m.graph();
    let ns = Norms::new(&m, horizon)?;
    let mut out = String::new();
    for alpha in enumerate_ideal_edges(g) {
        let d = d_set(g, &alpha);
        writeln!(
            out,
            "{} : {} stab={} D={} inv={}",
            g.vertex_name(alpha.vertex),
            g.set_name(alpha.edges),
            alpha.stab.order(),
            g.set_name(d),
            if inverse(g, &alpha).is_some() { "yes" } else { "no" }
        )
        .unwrap();
        for a in d.iter() {
            let verdicts: Vec<String> = [NormKind::Out, NormKind::Aut, NormKind::Tot]
                .into_iter()
                .map(|k| reductivity(&ns, &alpha, a, k).map(|r| format!("{k}: {}", r.verdict)))
                .collect::<Result<_>>()?;
            writeln!(out, "  a={} {}", g.dart_name(a), verdicts.join("; ")).unwrap();
        }
    }
    Ok(out)
}

fn apply_move(file: &Path, vertex: &str, alpha: &str, collapse: &str, out: &Path) -> Result<String> {
    let m = load(file)?;
    let g = m.graph();
    let v = g.vertex_by_name(vertex)?;
    let darts = alpha.split(',').map(|n| g.dart_by_name(n.trim())).collect::<Result<Vec<_>>>()?;
    let alpha = IdealEdge::new(g, DartSet::from_darts(darts))?;
    if alpha.vertex != v {
        return Err(Error::Validation(format!(
            "{} ends at {}, not {vertex}",
            g.set_name(alpha.edges),
            g.vertex_name(alpha.vertex)
        )));
    }
    let mv = WhiteheadMove { alpha, collapse: g.dart_by_name(collapse)? };
    let shown = mv.display(&m);
    let next = whitehead(&m, &mv)?;
    write_text(out, &serialize(&next))?;
    Ok(format!("applied {shown}, wrote {}\n", out.display()))
}

fn reduce(file: &Path, horizon: usize, max_steps: usize, log: Option<&Path>) -> Result<String> {
    let m = load(file)?;
    let r = greedy_reduce(&m, horizon, max_steps)?;
    let lines: String = r.log.iter().map(|e| e.line() + "\n").collect();
    let mut out = serialize(&r.result);
    match log {
        Some(p) => write_text(p, &lines)?,
        None => out.push_str(&lines),
    }
    Ok(out)
}

fn star_report(file: &Path, horizon: usize, family: Family, homology: bool, retract: bool, dot: Option<&Path>) -> Result<String> {
    let m = load(file)?;
    let s = Star::new(&m, horizon)?;
    let c = s.family(family)?;
    let sc = s.star_complex(c)?;
    let mut out = format!("{} = {}\n", family.name(), s.forest_name(c));
    writeln!(out, "vertices: {}", sc.forests.len()).unwrap();
    for (i, f) in sc.forests.iter().enumerate() {
        writeln!(out, "  {i}: {}", s.forest_name(*f)).unwrap();
    }
    let faces = sc.complex.maximal_faces();
    writeln!(out, "maximal faces: {}", faces.len()).unwrap();
    for f in &faces {
        let ids: Vec<String> = f.iter().map(usize::to_string).collect();
        writeln!(out, "  [{}]", ids.join(" ")).unwrap();
    }
    if homology {
        let betti = reduced_homology(&sc.complex)?;
        writeln!(out, "reduced betti: {betti:?}").unwrap();
    }
    if let Some(p) = dot {
        write_text(p, &s.hasse_dot(c))?;
    }
    if retract {
        let t = run_retractions(&s, RetractOptions { betti_each_step: homology })?;
        out.push_str(&t.render(&s));
    }
    Ok(out)
}

fn selftest_report(suite: Suite, seed: u64, horizon: usize, count: usize) -> Result<String> {
    let results = selftest::run(suite, seed, horizon, count)?;
    let mut out = String::new();
    let mut failed = Vec::new();
    for r in &results {
        writeln!(out, "{}", r.line()).unwrap();
        if !r.report.ok() {
            failed.push(r);
        }
    }
    print!("{out}");
    if failed.is_empty() {
        return Ok(String::new());
    }
    let mut msg = String::new();
    for r in &failed {
        for f in r.report.failures.iter().take(5) {
            writeln!(msg, "{}: {f}", r.name).unwrap();
        }
        if let Some(w) = &r.witness {
            writeln!(msg, "minimal witness for {}:\n{w}", r.name).unwrap();
        }
    }
    Err(Error::Violation(format!("{} check(s) failed\n{msg}", failed.len())))
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Validate { file, dot } => validate(&file, dot.as_deref()),
        Command::Norm { file, horizon, kind } => norm_report(&file, horizon, kind),
        Command::IdealEdges { file, horizon } => ideal_edges_report(&file, horizon),
        Command::Move { file, vertex, alpha, collapse, out } => apply_move(&file, &vertex, &alpha, &collapse, &out),
        Command::Reduce { file, horizon, max_steps, log } => reduce(&file, horizon, max_steps, log.as_deref()),
        Command::Star { file, horizon, family, homology, retract, dot } => {
            star_report(&file, horizon, family, homology, retract, dot.as_deref())
        }
        Command::Selftest { suite, seed, horizon, count } => selftest_report(suite, seed, horizon, count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.command {
        Command::Validate { file, .. }
        | Command::Norm { file, .. }
        | Command::IdealEdges { file, .. }
        | Command::Move { file, .. }
        | Command::Reduce { file, .. }
        | Command::Star { file, .. } => Some(file.clone()),
        Command::Selftest { .. } => None,
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == 4 {
                if let Some(f) = file {
                    eprintln!("witness: {}", f.display());
                }
            }
            ExitCode::from(code as u8)
        }
    }
}
