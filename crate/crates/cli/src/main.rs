//! `xclab`: generate polytopes, compute exact slack matrices and nonnegative
//! rank bounds, and check the product/pyramid extension complexity identity.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 internal
//! contradiction (a verdict that should be impossible).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use xclab_core::format::{
    parse_decomposition, parse_matrix, parse_polytope, write_decomposition, write_matrix,
    write_polytope,
};
use xclab_core::{
    audit_decomposition, bounds, cartesian_product, drop_redundant_rows, make_cube, make_polygon,
    make_pyramid, make_simplex, parse_rational, slack_matrix, validate, verify_theorem,
    BoundsConfig, Polytope, Rational, RegionMap, SearchConfig, VRep,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_CONTRADICTION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "xclab",
    version,
    about = "Exact slack matrices and extension complexity certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a polytope file.
    Gen(GenArgs),
    /// Write the exact slack matrix of a polytope file.
    Slack {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Drop rows without a zero entry.
        #[arg(long)]
        irredundant: bool,
        /// Also write row/column labels as JSON.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Bracket the nonnegative rank of a matrix file.
    Bounds {
        matrix: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write the best factorization found.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check xc(P x Q) = xc(P) + xc(Q) where one factor is a pyramid.
    VerifyTheorem {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write A.mat, A.json (labels and regions), witness.decomp here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Audit a small factorization of an assembled matrix claim by claim.
    Audit {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
        /// Region map JSON (bare, or the `regions` field of A.json).
        #[arg(long)]
        regions: PathBuf,
        #[arg(long = "r-s")]
        r_s: usize,
        #[arg(long = "r-tprime")]
        r_tprime: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long)]
    dim: Option<usize>,
    /// Polygon vertices, e.g. "0,0;2,0;1,1/2".
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    base: Option<PathBuf>,
    /// Apex coordinates, comma separated; defaults to the base centroid lifted by 1.
    #[arg(long)]
    apex: Option<String>,
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Simplex,
    Cube,
    Polygon,
    Pyramid,
    Product,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000_000)]
    bb_budget: u64,
    /// Report file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// JSON report instead of text.
    #[arg(long)]
    json: bool,
}

impl RunArgs {
    fn config(&self) -> BoundsConfig {
        BoundsConfig {
            search: SearchConfig {
                seed: self.seed,
                restarts: self.restarts,
                iters: self.iters,
                epsilon: self.epsilon,
                ..SearchConfig::default()
            },
            bb_budget: self.bb_budget,
        }
    }
}

/// Failure carrying its exit code and a JSON body.
struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl From<xclab_core::Error> for Failure {
    fn from(e: xclab_core::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            body: json!({ "error": e.to_string() }),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            body: json!({ "error": format!("{e:#}") }),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        body: json!({ "error": msg.into() }),
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(f) = configure_threads() {
        return report_failure(f);
    }
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Slack {
            file,
            output,
            irredundant,
            labels,
        } => cmd_slack(&file, output.as_deref(), irredundant, labels.as_deref()),
        Command::Bounds {
            matrix,
            run,
            witness,
        } => cmd_bounds(&matrix, &run, witness.as_deref()),
        Command::VerifyTheorem {
            left,
            right,
            run,
            out_dir,
        } => cmd_verify(&left, &right, &run, out_dir.as_deref()),
        Command::Audit {
            matrix,
            decomp,
            regions,
            r_s,
            r_tprime,
            output,
            json,
        } => cmd_audit(
            &matrix,
            &decomp,
            &regions,
            r_s,
            r_tprime,
            output.as_deref(),
            json,
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    println!(
        "{}",
        serde_json::to_string_pretty(&f.body).expect("json value")
    );
    ExitCode::from(f.code)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("XCLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "XCLAB_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::from(anyhow::anyhow!(e)))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn load_polytope(path: &Path) -> Result<Polytope, Failure> {
    let p = parse_polytope(&read(path)?)?;
    let report = validate(&p);
    if !report.passed() {
        return Err(Failure {
            code: EXIT_INVALID,
            body: json!({
                "error": format!("{} failed validation", path.display()),
                "violations": report.violations,
            }),
        });
    }
    Ok(p)
}

fn parse_coords(text: &str) -> Result<Vec<Rational>, Failure> {
    text.split(',')
        .map(|t| parse_rational(t.trim()).map_err(usage))
        .collect()
}

fn required<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    value.ok_or_else(|| usage(format!("`gen {kind}` requires --{flag}")))
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let p = match args.kind {
        GenKind::Simplex => make_simplex(required(args.dim, "dim", "simplex")?),
        GenKind::Cube => make_cube(required(args.dim, "dim", "cube")?)?,
        GenKind::Polygon => {
            let text = required(args.points, "points", "polygon")?;
            let pts = text
                .split(';')
                .map(parse_coords)
                .collect::<Result<Vec<_>, _>>()?;
            make_polygon(&VRep::from_points(2, pts)?)?
        }
        GenKind::Pyramid => {
            let base = load_polytope(&required(args.base, "base", "pyramid")?)?;
            let apex = args.apex.as_deref().map(parse_coords).transpose()?;
            make_pyramid(&base, apex.as_deref())?
        }
        GenKind::Product => {
            let l = load_polytope(&required(args.left, "left", "product")?)?;
            let r = load_polytope(&required(args.right, "right", "product")?)?;
            cartesian_product(&l, &r)
        }
    };
    emit(args.output.as_deref(), &write_polytope(&p))?;
    Ok(0)
}

fn cmd_slack(
    file: &Path,
    output: Option<&Path>,
    irredundant: bool,
    labels: Option<&Path>,
) -> CmdResult {
    let p = load_polytope(file)?;
    let mut s = slack_matrix(&p)?;
    if irredundant {
        s = drop_redundant_rows(&s);
    }
    emit(output, &write_matrix(&s.mat))?;
    if let Some(path) = labels {
        let body = json!({ "rows": s.row_labels, "cols": s.col_labels });
        emit(Some(path), &to_json(&body))?;
    }
    Ok(0)
}

fn cmd_bounds(matrix: &Path, run: &RunArgs, witness: Option<&Path>) -> CmdResult {
    let m = parse_matrix(&read(matrix)?)?;
    let report = bounds(&m, &run.config())?;
    if let Some(path) = witness {
        emit(Some(path), &write_decomposition(&report.witness))?;
    }
    let text = if run.json {
        to_json(&report)
    } else {
        let lb = |v: Option<usize>| v.map_or("budget exceeded".to_string(), |v| v.to_string());
        format!(
            "rank_lb       {}\nrectcover_lb  {}\nbest_ub       {}\ncertified     {}\n",
            report.rank_lb,
            lb(report.rectcover_lb),
            report.best_ub,
            report.certified
        )
    };
    emit(run.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_verify(left: &Path, right: &Path, run: &RunArgs, out_dir: Option<&Path>) -> CmdResult {
    let p = load_polytope(left)?;
    let q = load_polytope(right)?;
    let verdict = verify_theorem(&p, &q, &run.config())?;

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("A.mat"), write_matrix(&verdict.a.mat)).context("writing A.mat")?;
        let sidecar = json!({
            "rows": verdict.a.row_labels,
            "cols": verdict.a.col_labels,
            "regions": verdict.regions,
        });
        fs::write(dir.join("A.json"), to_json(&sidecar)).context("writing A.json")?;
        if let Some(w) = &verdict.ub_witness {
            fs::write(dir.join("witness.decomp"), write_decomposition(w))
                .context("writing witness.decomp")?;
        }
    }

    let text = if run.json {
        to_json(&verdict)
    } else {
        let mut t = format!("instance      {}\n", verdict.instance);
        let show = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        t += &format!("r+(S)         {}\n", show(verdict.r_plus_s.value()));
        t += &format!("r+(T')        {}\n", show(verdict.r_plus_tprime.value()));
        t += &format!("predicted     {}\n", show(verdict.predicted));
        t += &format!("ub verified   {}\n", verdict.ub_verified);
        t += &format!("rectcover lb  {}\n", show(verdict.rectcover_lb));
        t += &format!(
            "lb status     {}\n",
            to_json(&verdict.lb_status).trim().trim_matches('"')
        );
        if let Some(f) = &verdict.falsification {
            t += &format!("falsification size {} found {}\n", f.target, f.found);
        }
        if let Some(c) = &verdict.contradiction {
            t += &format!("PAPER CONTRADICTION: {c}\n");
        }
        t
    };
    emit(run.output.as_deref(), &text)?;

    if verdict.contradiction.is_some() {
        Ok(EXIT_CONTRADICTION)
    } else if verdict.ub_verified {
        Ok(0)
    } else {
        // component ranks were not certified, so there is nothing to compare
        Ok(EXIT_INVALID)
    }
}

fn load_regions(path: &Path) -> Result<RegionMap, Failure> {
    let value: serde_json::Value =
        serde_json::from_str(&read(path)?).context("parsing region map")?;
    let inner = value.get("regions").cloned().unwrap_or(value);
    Ok(serde_json::from_value(inner).context("parsing region map")?)
}

fn cmd_audit(
    matrix: &Path,
    decomp: &Path,
    regions: &Path,
    r_s: usize,
    r_tprime: usize,
    output: Option<&Path>,
    json: bool,
) -> CmdResult {
    let a = parse_matrix(&read(matrix)?)?;
    let d = parse_decomposition(&read(decomp)?)?;
    let regions = load_regions(regions)?;
    let report = audit_decomposition(&d, &a, &regions, r_s, r_tprime)?;

    let text = if json {
        to_json(&report)
    } else {
        let mut t = format!(
            "factors {} predicted {} outcome {}\n",
            report.factors,
            report.predicted,
            to_json(&report.outcome).trim()
        );
        for c in &report.claims {
            t += &format!("claim {} {:?}: {}\n", c.claim_id, c.status, c.narrative);
        }
        if report.is_contradiction() {
            t += "PAPER CONTRADICTION\n";
        }
        t
    };
    emit(output, &text)?;
    Ok(if report.is_contradiction() {
        EXIT_CONTRADICTION
    } else {
        0
    })
}
