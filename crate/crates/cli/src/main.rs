//! Command-line driver: validate triangulation files, inspect derived
//! combinatorics (exchange matrix, puncture profile, surface counts), and
//! run exact block decompositions of local representations.
//!
//! Exit codes: 0 on success, 1 when a structural invariant or a verified
//! mathematical identity fails, 2 for usage and I/O errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qteich::decomposer::{decompose, DecomposeOptions, Decomposition};
use qteich::par::Parallelism;
use qteich::trianglerep::LocalRep;
use qteich::triangulation::{SurfaceMode, Triangulation};

#[derive(Parser)]
#[command(name = "qteich", version, about = "Exact decomposition of local representations of surface quantum tori at roots of unity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a triangulation file against all structural invariants.
    Validate {
        path: PathBuf,
        /// Allow boundary edges (edges glued on only one side).
        #[arg(long)]
        open_surface: bool,
    },
    /// Print genus, punctures, edge/face counts, the exchange matrix, and
    /// the puncture profile.
    Info {
        #[command(flatten)]
        source: Source,
        /// Allow boundary edges (edges glued on only one side).
        #[arg(long)]
        open_surface: bool,
        /// Emit a machine-readable JSON object.
        #[arg(long)]
        json: bool,
    },
    /// Build the local representation at an odd root of unity and decompose
    /// it into joint eigenspaces of the puncture invariants.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// A built-in surface: torus-1p, torus-2p, or genus2-1p.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// A triangulation file.
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    source: Source,
    /// Odd root-of-unity order, at least 3.
    #[arg(long = "N", value_name = "INT")]
    n: u64,
    /// Edge weights as q-exponents, e.g. `--weights 0=1,2=4` for
    /// x_0 = q, x_2 = q^4 (unlisted edges default to 1).
    #[arg(long, value_name = "SPEC")]
    weights: Option<String>,
    /// Per-face charge twists relative to the canonical charge, as N-th
    /// root exponents, e.g. `--charges 0=2` for c_0 -> c_0 zeta_N^2.
    #[arg(long, value_name = "SPEC")]
    charges: Option<String>,
    /// Verify each block's commutant dimension (expected N^{2g}).
    #[arg(long)]
    check_commutant: bool,
    /// Re-derive each block rank by exact row reduction.
    #[arg(long)]
    cross_check_rank: bool,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
    /// Emit the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

/// A failure routed to a specific exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }
    fn io(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }
    fn invalid(msg: impl Into<String>) -> Self {
        Failure { code: 1, message: msg.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, open_surface } => cmd_validate(&path, open_surface),
        Command::Info { source, open_surface, json } => cmd_info(&source, open_surface, json),
        Command::Decompose(args) => cmd_decompose(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn mode_of(open: bool) -> SurfaceMode {
    if open {
        SurfaceMode::Open
    } else {
        SurfaceMode::Closed
    }
}

fn load_file(path: &PathBuf, mode: SurfaceMode) -> Result<Triangulation, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {}", path.display(), e)))?;
    Triangulation::parse_with_mode(&text, mode)
        .map_err(|e| Failure::invalid(format!("{}: {}", path.display(), e)))
}

fn load_source(source: &Source, mode: SurfaceMode) -> Result<Triangulation, Failure> {
    match (&source.builtin, &source.file) {
        (Some(name), None) => Triangulation::builtin(name).map_err(|_| {
            Failure::usage(format!(
                "unknown builtin `{}` (available: {})",
                name,
                Triangulation::builtin_names().join(", ")
            ))
        }),
        (None, Some(path)) => load_file(path, mode),
        _ => unreachable!("clap enforces exactly one source"),
    }
}

fn cmd_validate(path: &PathBuf, open_surface: bool) -> Result<(), Failure> {
    let tri = load_file(path, mode_of(open_surface))?;
    match tri.counts() {
        Some(c) => println!(
            "OK: closed surface, genus {}, {} punctures, {} edges, {} faces",
            c.genus, c.punctures, c.edges, c.faces
        ),
        None => println!(
            "OK: open surface, {} punctures, {} edges, {} faces",
            tri.n_punctures(),
            tri.n_edges(),
            tri.n_faces()
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct InfoReport {
    mode: &'static str,
    g: Option<usize>,
    s: usize,
    n: usize,
    m: usize,
    sigma: Vec<Vec<i64>>,
    profile: Vec<Vec<u64>>,
}

fn cmd_info(source: &Source, open_surface: bool, json: bool) -> Result<(), Failure> {
    let tri = load_source(source, mode_of(open_surface))?;
    let sigma = tri.sigma();
    let profile = tri.puncture_profile();
    let report = InfoReport {
        mode: match tri.mode() {
            SurfaceMode::Closed => "closed",
            SurfaceMode::Open => "open",
        },
        g: tri.genus(),
        s: tri.n_punctures(),
        n: tri.n_edges(),
        m: tri.n_faces(),
        sigma: sigma.rows().to_vec(),
        profile: profile.rows().to_vec(),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(());
    }
    match report.g {
        Some(g) => println!(
            "closed surface: genus {}, {} punctures, {} edges, {} faces",
            g, report.s, report.n, report.m
        ),
        None => println!(
            "open surface: {} punctures, {} edges, {} faces",
            report.s, report.n, report.m
        ),
    }
    println!("exchange matrix sigma:");
    for row in &report.sigma {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>3}", v)).collect();
        println!("  {}", cells.join(" "));
    }
    println!("puncture profile k_je (rows = punctures, columns = edges):");
    for (j, row) in report.profile.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        println!("  puncture {}: {}", j, cells.join(" "));
    }
    Ok(())
}

fn parse_assignments(
    spec: &str,
    n: u64,
    what: &str,
    max: usize,
    max_name: &str,
) -> Result<BTreeMap<usize, i64>, Failure> {
    let mut map = BTreeMap::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| {
            Failure::usage(format!(
                "invalid {} entry `{}`: expected INDEX=EXPONENT",
                what, part
            ))
        })?;
        let idx: usize = k.trim().parse().map_err(|_| {
            Failure::usage(format!("invalid {} index `{}`", what, k.trim()))
        })?;
        let exp: i64 = v.trim().parse().map_err(|_| {
            Failure::usage(format!("invalid {} exponent `{}`", what, v.trim()))
        })?;
        if idx >= max {
            return Err(Failure::usage(format!(
                "{} index {} out of range: the surface has {} {}",
                what, idx, max, max_name
            )));
        }
        if map.insert(idx, exp.rem_euclid(n as i64)).is_some() {
            return Err(Failure::usage(format!("duplicate {} index {}", what, idx)));
        }
    }
    Ok(map)
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<(), Failure> {
    if args.n < 3 || args.n % 2 == 0 {
        return Err(Failure::usage("N must be odd and at least 3"));
    }
    let tri = load_source(&args.source, SurfaceMode::Closed)?;
    let edges = tri.n_edges();
    let faces = tri.n_faces();
    let weight_map = match &args.weights {
        Some(spec) => parse_assignments(spec, args.n, "weight", edges, "edges")?,
        None => BTreeMap::new(),
    };
    let weight_exps: Vec<i64> = (0..edges)
        .map(|e| weight_map.get(&e).copied().unwrap_or(0))
        .collect();
    let twists = match &args.charges {
        Some(spec) => parse_assignments(spec, args.n, "charge", faces, "faces")?,
        None => BTreeMap::new(),
    };

    let rep = LocalRep::build_with_twists(&tri, args.n, &weight_exps, &twists)
        .map_err(|e| Failure::invalid(e.to_string()))?;
    let opts = DecomposeOptions {
        check_commutant: args.check_commutant,
        cross_check_rank: args.cross_check_rank,
        parallelism: if args.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::Auto
        },
    };
    let dec = decompose(&rep, &opts).map_err(|e| Failure::invalid(e.to_string()))?;

    let rendered = if args.json {
        serde_json::to_string_pretty(&dec.report()).expect("serializable") + "\n"
    } else {
        render_text(&dec)
    };
    match &args.output {
        Some(path) => fs::write(path, &rendered)
            .map_err(|e| Failure::io(format!("cannot write {}: {}", path.display(), e)))?,
        None => print!("{}", rendered),
    }

    if dec.passed() {
        Ok(())
    } else {
        Err(Failure::invalid(format!(
            "verification failed:\n  {}",
            dec.failures.join("\n  ")
        )))
    }
}

fn render_text(dec: &Decomposition) -> String {
    let mut out = String::new();
    let c = &dec.counts;
    out.push_str(&format!(
        "surface: genus {}, {} punctures, {} edges, {} faces\n",
        c.genus, c.punctures, c.edges, c.faces
    ));
    out.push_str(&format!(
        "N = {}, carrier dimension {}\n",
        dec.n,
        dec.blocks.iter().map(|b| b.rank).sum::<u64>()
    ));
    let weights: Vec<String> = dec.weights.iter().map(|w| w.render(dec.n)).collect();
    out.push_str(&format!("weights: {}\n", weights.join(" ")));
    out.push_str(&format!("central charge c = {}\n", dec.charge.render(dec.n)));
    out.push_str(&format!(
        "irreducible dimension N^(3g-3+s) = {}, expected rank {} and multiplicity {} per block\n",
        dec.irrep_dim, dec.expected_block_rank, dec.expected_multiplicity
    ));
    out.push_str(&format!("blocks: {}\n", dec.blocks.len()));
    for (i, b) in dec.blocks.iter().enumerate() {
        let p: Vec<String> = b.scalars.iter().map(|x| x.render(dec.n)).collect();
        let mut line = format!(
            "  block {}: p = ({})  rank {}  multiplicity {}",
            i,
            p.join(", "),
            b.rank,
            b.multiplicity
        );
        if let Some(d) = b.commutant_dim {
            line.push_str(&format!("  commutant {}", d));
        }
        if let Some(r) = b.elimination_rank {
            line.push_str(&format!("  elimination rank {}", r));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("verdicts:\n");
    for (name, verdict) in dec.verdicts.entries() {
        let word = match verdict {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "skipped",
        };
        out.push_str(&format!("  {:<26} {}\n", name, word));
    }
    out.push_str(&format!(
        "result: {}\n",
        if dec.passed() { "PASS" } else { "FAIL" }
    ));
    out
}
