use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lossyx::expansion::audit_small_sets;
use lossyx::gadget::{construct_pipeline, gadget_from_regular, write_splice};
use lossyx::graph::{read_edge_list, write_edge_list, Graph};
use lossyx::harness::{
    preset, preset_names, run_experiment, run_preset, sweep, ExperimentConfig, GammaSpec, SweepGrid,
};
use lossyx::hosts::{lps_graph, random_regular};
use lossyx::linkage::{encoding_bound, quadratic_form, EncodingBoundParams};
use lossyx::par::Execution;
use lossyx::spectral::{adjacency_spectrum, ihara_bass_check, nb_spectrum, verify_x_radius, AdjMode, NbMode};

#[derive(Parser)]
#[command(name = "lossyx", version, about = "High-girth near-Ramanujan graphs with a planted lossy set")]
struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a host graph.
    #[command(subcommand)]
    Hosts(HostCmd),
    /// Splice a gadget into a host: H̃ → H′ → G′.
    Construct(ConstructArgs),
    /// Adjacency, nonbacktracking, Ihara–Bass, or X-truncation checks.
    Spectra(SpectraArgs),
    /// ⟨1_e, (B^ℓ B*^ℓ)^k 1_e⟩ for one arc.
    Linkage(LinkageArgs),
    #[command(subcommand)]
    Audit(AuditCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum HostCmd {
    Lps {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConstructArgs {
    /// Host edge list.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    d: usize,
    /// Even integer, or n^(1/3) for 2⌊n^{1/3}/2⌋.
    #[arg(long, default_value = "n^(1/3)")]
    gamma: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge list of G′.
    #[arg(long)]
    out: PathBuf,
    /// Sidecar with the matching and planted set; defaults to <out>.json.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectraKind {
    Adj,
    Nb,
    Ihara,
    Xcheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dense,
    Extremal,
    RadiusOnly,
}

#[derive(Args)]
struct SpectraArgs {
    kind: SpectraKind,
    /// Edge list. For xcheck this is H̃, a (d-1)-regular graph.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    mode: ModeArg,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// xcheck only.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 3)]
    depth: usize,
}

#[derive(Args)]
struct LinkageArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Arc as u,v.
    #[arg(long)]
    edge: String,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    ell: usize,
    /// Compare against the encoding bound with d = max degree.
    #[arg(long)]
    check_bound: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AuditCmd {
    SmallSets {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        kappa: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Second eigenvalue; computed densely when omitted.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    Run {
        /// TOML or JSON config.
        #[arg(long)]
        config: PathBuf,
    },
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid file; the inline lists below are used when it is absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        host_n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        host_seed: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
    },
    /// Run named presets, one per acceptance criterion. No names runs all.
    Preset {
        names: Vec<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match dispatch(cli.cmd, exec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Graph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn save(g: &Graph, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_edge_list(g, BufWriter::new(f))?;
    Ok(())
}

/// Pretty JSON to the file, or to stdout without one.
fn emit(v: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_gamma(s: &str) -> Result<GammaSpec> {
    if s == "n^(1/3)" {
        return Ok(GammaSpec::CubeRoot);
    }
    let g: usize = s.parse().with_context(|| format!("gamma {s:?} is neither an integer nor n^(1/3)"))?;
    Ok(GammaSpec::Fixed(g))
}

fn dispatch(cmd: Cmd, exec: Execution) -> Result<bool> {
    match cmd {
        Cmd::Hosts(h) => {
            let (g, out) = match h {
                HostCmd::Lps { p, q, out } => (lps_graph(p, q)?, out),
                HostCmd::Random { n, d, seed, out } => (random_regular(n, d, seed)?, out),
            };
            save(&g, &out)?;
            eprintln!("wrote {} vertices, {} edges to {}", g.n(), g.m(), out.display());
            Ok(true)
        }
        Cmd::Construct(a) => construct(a),
        Cmd::Spectra(a) => spectra(a),
        Cmd::Linkage(a) => linkage(a),
        Cmd::Audit(AuditCmd::SmallSets { input, kappa, trials, seed, lambda, json }) => {
            let g = load(&input)?;
            let lambda = match lambda {
                Some(l) => l,
                None => adjacency_spectrum(&g, AdjMode::Dense)?.lambda,
            };
            let a = audit_small_sets(&g, lambda, kappa, trials, seed, exec)?;
            eprintln!(
                "{} sets: {} violations, {} identity failures, min margin {:.4}",
                a.trials, a.violations, a.identity_failures, a.min_margin
            );
            emit(&serde_json::to_value(&a)?, json.as_deref())?;
            Ok(a.passed)
        }
        Cmd::Experiment(e) => experiment(e, exec),
    }
}

fn construct(a: ConstructArgs) -> Result<bool> {
    let host = load(&a.input)?;
    let gamma = parse_gamma(&a.gamma)?.resolve(host.n());
    let c = construct_pipeline(a.d, &host, gamma, a.seed)?;
    let sidecar = a.sidecar.unwrap_or_else(|| a.out.with_extension("json"));
    let g = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    let s = BufWriter::new(File::create(&sidecar).with_context(|| format!("creating {}", sidecar.display()))?);
    write_splice(&c.splice, g, s)?;
    eprintln!("G′: {} vertices, γ = {gamma}, k = {}", c.report.n, c.report.k);
    emit(&serde_json::to_value(&c.report)?, a.json.as_deref())?;
    Ok(true)
}

fn spectra(a: SpectraArgs) -> Result<bool> {
    let g = load(&a.input)?;
    let (report, passed) = match a.kind {
        SpectraKind::Adj => {
            let mode = match a.mode {
                ModeArg::Dense => AdjMode::Dense,
                ModeArg::Extremal => AdjMode::Extremal,
                ModeArg::RadiusOnly => bail!("radius-only applies to nb"),
            };
            let r = adjacency_spectrum(&g, mode)?;
            let margin = g.regular_degree().map(|d| 2.0 * ((d - 1) as f64).sqrt() - r.lambda);
            (json!({"spectrum": r, "ramanujan_margin": margin}), true)
        }
        SpectraKind::Nb => {
            let mode = match a.mode {
                ModeArg::Dense => NbMode::Dense,
                ModeArg::RadiusOnly | ModeArg::Extremal => NbMode::RadiusOnly,
            };
            (serde_json::to_value(nb_spectrum(&g, mode)?)?, true)
        }
        SpectraKind::Ihara => {
            let r = ihara_bass_check(&g, a.tol)?;
            let ok = r.passed;
            (serde_json::to_value(r)?, ok)
        }
        SpectraKind::Xcheck => {
            let d = match a.d {
                Some(d) => d,
                None => g.regular_degree().context("H̃ is not regular; pass --d")? + 1,
            };
            let gadget = gadget_from_regular(&g, d)?;
            let mut depths = Vec::new();
            let mut ok = true;
            for depth in 0..=a.depth {
                let r = verify_x_radius(&gadget, depth, 1e-9, 1e-5)?;
                ok &= r.adjacency_passed && r.nb_passed;
                depths.push(r);
            }
            (json!({"d": d, "h_prime_n": gadget.graph.n(), "depths": depths, "passed": ok}), ok)
        }
    };
    emit(&report, a.json.as_deref())?;
    Ok(passed)
}

fn linkage(a: LinkageArgs) -> Result<bool> {
    let g = load(&a.input)?;
    let (u, v) = a.edge.split_once(',').context("--edge takes u,v")?;
    let e = (u.trim().parse::<usize>()?, v.trim().parse::<usize>()?);
    let q = quadratic_form(&g, e, a.k, a.ell)?;
    let mut out = json!({"edge": e, "k": a.k, "ell": a.ell, "quadratic_form": q.to_string()});
    let mut ok = true;
    if a.check_bound {
        let d = g.degrees().max().unwrap_or(0);
        let b = encoding_bound(EncodingBoundParams { k: a.k, ell: a.ell, d })?;
        ok = (q as f64) <= b.value;
        out["bound"] = serde_json::to_value(b)?;
        out["d"] = json!(d);
        out["passed"] = json!(ok);
    }
    emit(&out, a.json.as_deref())?;
    Ok(ok)
}

fn experiment(cmd: ExperimentCmd, exec: Execution) -> Result<bool> {
    match cmd {
        ExperimentCmd::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if exec == Execution::Sequential {
                cfg.execution = exec;
            }
            let b = run_experiment(&cfg)?;
            for r in &b.runs {
                let fails: Vec<&str> = r
                    .checks
                    .iter()
                    .filter(|(_, o)| o.status == lossyx::harness::CheckStatus::Failed)
                    .map(|(k, _)| k.as_str())
                    .collect();
                eprintln!("seed {}: passed={} failed={fails:?} errors={}", r.seed, r.passed, r.errors.len());
            }
            if cfg.output.json.is_none() {
                println!("{}", b.to_json());
            }
            Ok(b.passed)
        }
        ExperimentCmd::Sweep { config, grid, host_n, d, gamma, host_seed, seed } => {
            let cfg = ExperimentConfig::load(&config)?;
            let grid = match grid {
                Some(p) => SweepGrid::parse(&std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?,
                None => SweepGrid {
                    host_n,
                    d,
                    gamma: gamma.iter().map(|s| parse_gamma(s)).collect::<Result<_>>()?,
                    host_seed,
                    seed,
                },
            };
            let r = sweep(&cfg, &grid, exec)?;
            let mut out = std::io::stdout().lock();
            for row in &r.rows {
                writeln!(
                    out,
                    "point {:>3}  n={:<6} d={} γ={:<3} seed={:<3} λ-2√(d-1)={:<10} passed={}{}",
                    row.point,
                    row.host_n,
                    row.d,
                    row.gamma,
                    row.seed,
                    row.lambda_excess.map(|x| format!("{x:.5}")).unwrap_or_default(),
                    row.passed,
                    if row.error.is_empty() { String::new() } else { format!("  error: {}", row.error) }
                )?;
            }
            if let Some(t) = r.lambda_excess_nonincreasing {
                writeln!(out, "λ-2√(d-1) nonincreasing in n: {t}")?;
            }
            Ok(!r.failed)
        }
        ExperimentCmd::Preset { names, list, json } => {
            if list {
                for n in preset_names() {
                    let p = preset(n).expect("listed");
                    println!("{:>2}  {:<18} {}", p.criterion, p.name, p.description);
                }
                return Ok(true);
            }
            let names: Vec<String> =
                if names.is_empty() { preset_names().into_iter().map(String::from).collect() } else { names };
            let mut all = true;
            let mut outcomes = Vec::new();
            for n in &names {
                let o = run_preset(n, exec)?;
                println!("[{}] {:>2} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.criterion, o.name, o.summary);
                all &= o.passed;
                outcomes.push(o);
            }
            if let Some(p) = json {
                emit(&serde_json::to_value(&outcomes)?, Some(&p))?;
            }
            Ok(all)
        }
    }
}
