//! `oprank`: batch front end for the relative-rank library.
//!
//! Exit codes: 0 when every row passes, 1 when any row fails, 2 on usage or
//! parse errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oprank::verify::{self, Grid, Report, Scope, YFilter};
use oprank::{
    binomial, canonical_b_t_mod_op, enumerate_all, enumerate_p, enumerate_q, enumerate_r,
    factor_op_over_o, factor_t_over_op, relrank_op_mod_o, relrank_t_mod_op, stirling2,
    ChainContext, Partition, Transformation, Word,
};

#[derive(Parser)]
#[command(
    name = "oprank",
    version,
    about = "Relative ranks of OP(X,Y) modulo O(X,Y) and of T(X,Y) modulo OP(X,Y)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the rank formulas, generating sets and factorizations over a grid of (n, Y).
    Verify(VerifyArgs),
    /// Write a transformation as a word over the canonical generators.
    Factor(FactorArgs),
    /// List the partitions of one family.
    Enumerate(EnumerateArgs),
    /// Print the closed-form values for one context.
    Formulas(FormulasArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated scopes: thm5, thm6, thm11, thm12, lemma-eta, prop2, lemma7, counts, or all.
    scope: String,
    /// Largest chain length visited.
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    /// Smallest chain length visited.
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    /// Visit only this Y, e.g. "2,4".
    #[arg(long, conflicts_with_all = ["y_all", "y_contains"])]
    y: Option<String>,
    /// Visit every nonempty Y (the default).
    #[arg(long)]
    y_all: bool,
    /// Visit every Y containing these points; `n` stands for the top, e.g. "1,n".
    #[arg(long, conflicts_with = "y_all")]
    y_contains: Option<String>,
    /// Write the report as JSON.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Write the report as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Print only failing rows and the summary.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// β ∈ OP(X,Y) over O(X,Y) ∪ A.
    OverO,
    /// γ ∈ T(X,Y) over OP(X,Y) ∪ B.
    OverOp,
}

#[derive(Args)]
struct FactorArgs {
    /// Chain context, e.g. "n=4 Y=2,3".
    #[arg(long)]
    ctx: String,
    /// Image sequence, e.g. "[3,2,2,3]".
    #[arg(long)]
    map: String,
    mode: Mode,
    /// Also write the word as JSON.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Q,
    P,
    R,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Count,
}

#[derive(Args)]
struct EnumerateArgs {
    what: What,
    #[arg(long)]
    n: usize,
    /// Number of blocks.
    #[arg(long)]
    l: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct FormulasArgs {
    #[arg(long)]
    n: usize,
    /// The range Y, e.g. "1,5".
    #[arg(long)]
    y: String,
}

/// A user-facing mistake: reported and mapped to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<E: std::fmt::Display>(e: E) -> anyhow::Error {
    Usage(e.to_string()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Factor(args) => cmd_factor(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Formulas(args) => cmd_formulas(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_y(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad point {t:?} in Y list {s:?}")))
        })
        .collect()
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let scopes = Scope::parse_list(&args.scope).map_err(usage)?;
    let mut grid = Grid::new(args.n_max);
    grid.n_min = args.n_min;
    grid.y = match (&args.y, &args.y_contains) {
        (Some(y), _) => YFilter::Exact(parse_y(y)?),
        (None, Some(c)) => YFilter::parse_contains(c).map_err(usage)?,
        (None, None) => YFilter::All,
    };
    if args.y_all && args.n_max > 7 {
        return Err(usage(
            "--y-all sweeps every subset and is limited to --n-max <= 7",
        ));
    }
    let report = verify::run(&scopes, &grid);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    for row in &report.rows {
        if !args.quiet || row.status == verify::Status::Fail {
            writeln!(out, "{:<9} {row}", row.scope.name())?;
        }
    }
    writeln!(out, "{}", report.summary())?;
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.csv {
        write_csv(path, &report)?;
    }
    Ok(report.all_pass())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

fn write_csv(path: &Path, report: &Report) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "n",
        "m",
        "y",
        "check",
        "formula_value",
        "brute_value",
        "universe_size",
        "millis",
        "status",
    ])?;
    let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.y_literal(),
            r.check.to_string(),
            opt(r.formula_value),
            opt(r.brute_value),
            opt(r.universe_size),
            r.millis.to_string(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_factor(args: FactorArgs) -> Result<bool> {
    let ctx = ChainContext::parse(&args.ctx).map_err(usage)?;
    let map = Transformation::parse(&ctx, &args.map).map_err(usage)?;
    let word: Word = match args.mode {
        Mode::OverO => factor_op_over_o(&map).map_err(usage)?,
        Mode::OverOp => {
            let (b, _) = canonical_b_t_mod_op(&ctx).map_err(usage)?;
            factor_t_over_op(&map, &b).map_err(usage)?
        }
    };
    let product = word.product();
    let verified = product.as_ref() == Some(&map);
    println!("{word}");
    for (i, f) in word.factors().iter().enumerate() {
        let tag = match f.tag {
            oprank::FactorTag::EtaPower(k) => format!("EtaPower({k})"),
            t => t.name().to_string(),
        };
        println!(
            "  {:>2}. {tag:<12} {:<18} {}",
            i + 1,
            f.to_string(),
            f.value()
        );
    }
    println!("product == input: {verified}");
    if let Some(path) = &args.json {
        write_json(path, &word)?;
    }
    Ok(verified)
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<bool> {
    let (n, l) = (args.n, args.l);
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let parts: Vec<Partition> = match args.what {
        What::Q => enumerate_q(n, l).collect(),
        What::P => enumerate_p(n, l).map_err(usage)?.collect(),
        What::R => enumerate_r(n, l).collect(),
        What::All => enumerate_all(n, l).collect(),
    };
    match args.format {
        Format::Count => println!("{}", parts.len()),
        Format::Json => println!("{}", serde_json::to_string(&parts)?),
        Format::Text => {
            for p in &parts {
                match args.what {
                    What::All => println!("{p}\t{}", p.family()),
                    _ => println!("{p}"),
                }
            }
        }
    }
    Ok(true)
}

fn cmd_formulas(args: FormulasArgs) -> Result<bool> {
    let ctx: Arc<ChainContext> = ChainContext::new(args.n, &parse_y(&args.y)?).map_err(usage)?;
    let (n, m) = (ctx.n() as u64, ctx.m() as u64);
    let or_scope = |v: oprank::Result<u64>| match v {
        Ok(v) => v.to_string(),
        Err(oprank::Error::HypothesisViolation(_)) => "out of theorem scope".to_string(),
        Err(e) => format!("error: {e}"),
    };
    let count = |v: usize| v.to_string();
    let rows = [
        ("context", ctx.to_string()),
        ("m", m.to_string()),
        ("relrank(OP:O)", or_scope(relrank_op_mod_o(&ctx))),
        ("relrank(T:OP)", or_scope(relrank_t_mod_op(&ctx))),
        (
            "|P_m|",
            // P_l is empty outside 2 <= l < n.
            enumerate_p(ctx.n(), ctx.m()).map_or_else(|_| count(0), |it| count(it.count())),
        ),
        ("|Q_m|", count(enumerate_q(ctx.n(), ctx.m()).count())),
        ("|R_m|", count(enumerate_r(ctx.n(), ctx.m()).count())),
        ("S(n,m)", or_scope(stirling2(n, m))),
        ("C(n,m)", or_scope(binomial(n, m))),
    ];
    for (name, value) in rows {
        println!("{name:<14} {value}");
    }
    Ok(true)
}
