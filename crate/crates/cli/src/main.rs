use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cpslab::analysis::{
    brute_force_max_matching, fit_power_law, running_sums, water_fill_matching, DensityTrace, DEFAULT_BRUTE_FORCE_BOUND,
};
use cpslab::experiment::{parse_spec, read_snapshots_jsonl, run_experiment, ExperimentSpec};
use cpslab::lattice::{parse_edges, Coloring};
use cpslab::raster::render_spacetime;
use cpslab::verify::{run_suite, Suite};

/// Cyclic particle systems, cellular automata and ballistic annihilation on a
/// ring. Set CPSLAB_THREADS to cap replica parallelism.
#[derive(Parser)]
#[command(name = "cpslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec (any model); without --spec, a CPS run built from flags.
    Simulate(RunArgs),
    /// Run the synchronous cyclic cellular automaton.
    Cca(RunArgs),
    /// Run ballistic annihilation; --n-sites is the particle count.
    Ba(RunArgs),
    /// Water-filling matching of an edge string such as "R.LRL".
    Matching(MatchingArgs),
    /// Fit r(t) ≈ c·t^(−α) to a densities.csv.
    RateFit(RateFitArgs),
    /// Run the verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Render snapshots.jsonl as a space-time PPM raster.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment spec.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Used only without --spec.
    #[arg(long, default_value_t = 3)]
    kappa: u8,
    /// Used only without --spec.
    #[arg(long, default_value_t = 1000)]
    n_sites: usize,
    /// Used only without --spec.
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
}

#[derive(Args)]
struct MatchingArgs {
    /// Edge kinds left to right: R, L, B or '.'.
    #[arg(long)]
    edges: String,
    /// Also write the result as matching.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RateFitArgs {
    /// densities.csv to fit.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    /// Defaults to the last sampled time.
    #[arg(long)]
    t_max: Option<f64>,
    /// Also write fits.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    suite: SuiteArg,
    /// Path of the JSON report.
    #[arg(long, default_value = "verify-report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// snapshots.jsonl written by a run with "write_snapshots": true.
    #[arg(long)]
    input: PathBuf,
    /// Path of the PPM image.
    #[arg(long, default_value = "raster.ppm")]
    out: PathBuf,
}

fn load_spec(args: &RunArgs, model: &str) -> Result<ExperimentSpec> {
    let mut value: Value = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("malformed spec JSON in {}", path.display()))?
        }
        None => {
            let mut v = json!({ "model": model, "n_sites": args.n_sites, "seed": 1, "t_max": args.t_max });
            if model != "BA" {
                v["kappa"] = json!(args.kappa);
            }
            v
        }
    };
    let Some(obj) = value.as_object_mut() else { bail!("spec must be a JSON object") };
    if model != "any" {
        let found = obj.get("model").and_then(Value::as_str).unwrap_or("");
        if found != model {
            bail!("this subcommand runs model {model}, but the spec has model `{found}`");
        }
    }
    if let Some(seed) = args.seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Some(r) = args.replicas {
        obj.insert("replicas".into(), json!(r));
    }
    if let Some(out) = &args.out {
        obj.insert("output_dir".into(), json!(out));
    }
    Ok(parse_spec(&value.to_string())?)
}

fn simulate(args: &RunArgs, model: &str) -> Result<()> {
    let model = if model == "CPS" && args.spec.is_some() { "any" } else { model };
    let spec = load_spec(args, model)?;
    let outcome = run_experiment(&spec)?;
    print!("{}", outcome.summary);
    println!("output  {}", spec.output_dir.display());
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn matching(args: &MatchingArgs) -> Result<()> {
    let Some(xi) = parse_edges(&args.edges) else {
        bail!("edge string may only contain R, L, B and '.'");
    };
    let m = water_fill_matching(&xi);
    let profile = running_sums(&xi);
    let brute = (xi.len() <= DEFAULT_BRUTE_FORCE_BOUND).then(|| brute_force_max_matching(&xi)).transpose()?;
    let out = json!({
        "edges": args.edges,
        "pairs": m.pairs,
        "size": m.len(),
        "formula_matched_particles": profile.matched_particles(),
        "brute_force_maximum": brute,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(dir) = &args.out {
        write_json(dir, "matching.json", &out)?;
    }
    Ok(())
}

fn rate_fit(args: &RateFitArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let trace = DensityTrace::read_csv(BufReader::new(file))?;
    let t_max = args.t_max.or_else(|| trace.rows.last().map(|r| r.t)).unwrap_or(0.0);
    let fit = fit_power_law(&trace, (args.t_min, t_max))?;
    let out = serde_json::to_value([fit])?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(dir) = &args.out {
        write_json(dir, "fits.json", &out)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let suite = match args.suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let report = run_suite(suite)?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(&args.out)?);
    serde_json::to_writer_pretty(&mut w, &report)?;
    w.write_all(b"\n")?;
    println!("{} ({})", if report.passed { "all checks passed" } else { "some checks failed" }, args.out.display());
    Ok(report.passed)
}

fn render(args: &RenderArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let rows: Vec<Coloring> = read_snapshots_jsonl(BufReader::new(file))?.into_iter().map(|s| s.coloring).collect();
    if rows.is_empty() {
        bail!("{} holds no snapshots", args.input.display());
    }
    render_spacetime(&rows, BufWriter::new(File::create(&args.out)?))?;
    println!("wrote {}x{} raster to {}", rows[0].len(), rows.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, "CPS").map(|_| true),
        Command::Cca(a) => simulate(a, "CCA").map(|_| true),
        Command::Ba(a) => simulate(a, "BA").map(|_| true),
        Command::Matching(a) => matching(a).map(|_| true),
        Command::RateFit(a) => rate_fit(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Render(a) => render(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
