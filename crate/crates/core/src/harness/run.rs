use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Check, ExperimentConfig, LambdaMode};
use super::HarnessError;
use crate::expansion::{
    audit_small_sets, expander_mixing_audit, moore_bound_check_with, vertex_expansion, ExpansionError,
};
use crate::gadget::{construct_pipeline, write_splice, Construction, ConstructionReport};
use crate::graph::{girth_with, Girth, Graph};
use crate::linkage::verify_trace_bound;
use crate::par::derive_seed;
use crate::spectral::{
    adjacency_spectrum, ihara_bass_check_capped, kahale_vector, verify_subsolution, verify_x_radius, AdjMode,
    SpectralError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// A precondition of the check does not hold on this instance (or the
    /// instance is above a size cap); never counts as a pass or a failure.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub status: CheckStatus,
    pub reason: Option<String>,
    pub report: Value,
}

impl CheckOutcome {
    fn from_flag(passed: bool, report: Value) -> Self {
        let status = if passed { CheckStatus::Passed } else { CheckStatus::Failed };
        CheckOutcome { status, reason: None, report }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        CheckOutcome { status: CheckStatus::Skipped, reason: Some(reason.into()), report: Value::Null }
    }

    fn failed(reason: impl Into<String>) -> Self {
        CheckOutcome { status: CheckStatus::Failed, reason: Some(reason.into()), report: Value::Null }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Headline numbers, the ones that go into the CSV summary.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: Option<usize>,
    pub girth: Option<Girth>,
    pub lambda: Option<f64>,
    /// λ(G′) - 2√(d-1).
    pub lambda_excess: Option<f64>,
    pub lambda_host: Option<f64>,
    pub psi_u: Option<f64>,
    pub xradius_lambda_max: Option<f64>,
    pub xradius_nb_max: Option<f64>,
    pub trace_ratio_max: Option<f64>,
    pub small_set_bound: Option<f64>,
    pub small_set_min_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub d: usize,
    pub gamma: usize,
    pub host_n: usize,
    pub construction: Option<ConstructionReport>,
    pub summary: RunSummary,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub errors: Vec<StageError>,
    pub passed: bool,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditBundle {
    pub name: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    /// Every run has no errors and no failed check.
    pub passed: bool,
    pub elapsed_ms: f64,
}

impl AuditBundle {
    /// The bundle with every wall-clock field zeroed, so equal configs give
    /// byte-identical output.
    pub fn without_timings(&self) -> AuditBundle {
        let mut b = self.clone();
        b.elapsed_ms = 0.0;
        for r in &mut b.runs {
            for t in r.timings_ms.values_mut() {
                *t = 0.0;
            }
        }
        b
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AuditBundle, HarnessError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let host = cfg.host.build().map_err(|e| HarnessError::stage("host", e));
    let mut bundle = match host {
        Ok(h) => run_experiment_with_host(cfg, &h)?,
        Err(e) => {
            let runs = cfg
                .seeds
                .iter()
                .map(|&seed| failed_run(seed, cfg.d, 0, 0, StageError { stage: "host".into(), message: e.to_string() }))
                .collect();
            AuditBundle { name: cfg.name.clone(), config: cfg.clone(), runs, passed: false, elapsed_ms: 0.0 }
        }
    };
    bundle.elapsed_ms = ms(t0);
    write_outputs(cfg, &bundle)?;
    Ok(bundle)
}

/// Runs every seed on an already built host. Does not write outputs.
pub fn run_experiment_with_host(cfg: &ExperimentConfig, host: &Graph) -> Result<AuditBundle, HarnessError> {
    let t0 = Instant::now();
    let gamma = cfg.gamma.resolve(host.n());
    if !gamma.is_multiple_of(2) {
        return Err(HarnessError::Config(format!("gamma {gamma} is odd")));
    }
    let runs: Vec<RunReport> = cfg.seeds.iter().map(|&seed| run_seed(cfg, host, gamma, seed)).collect();
    let passed = runs.iter().all(|r| r.passed);
    Ok(AuditBundle { name: cfg.name.clone(), config: cfg.clone(), runs, passed, elapsed_ms: ms(t0) })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn failed_run(seed: u64, d: usize, gamma: usize, host_n: usize, e: StageError) -> RunReport {
    RunReport {
        seed,
        d,
        gamma,
        host_n,
        construction: None,
        summary: RunSummary::default(),
        checks: BTreeMap::new(),
        errors: vec![e],
        passed: false,
        timings_ms: BTreeMap::new(),
    }
}

fn write_outputs(cfg: &ExperimentConfig, bundle: &AuditBundle) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    if let Some(p) = &cfg.output.json {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut w = BufWriter::new(File::create(p).map_err(io)?);
        w.write_all(bundle.to_json().as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
    }
    if let Some(p) = &cfg.output.csv {
        super::sweep::write_csv(p, &super::sweep::rows_of(bundle))?;
    }
    Ok(())
}

/// Values shared between checks of one run, computed on first use.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    host: &'a Graph,
    c: &'a Construction,
    seed: u64,
    lambda: Option<Result<f64, String>>,
    girth: Option<Girth>,
}

impl Context<'_> {
    fn g(&self) -> &Graph {
        &self.c.splice.graph
    }

    fn lambda_mode(&self, n: usize) -> AdjMode {
        match self.cfg.options.lambda_mode {
            LambdaMode::Dense => AdjMode::Dense,
            LambdaMode::Extremal => AdjMode::Extremal,
            LambdaMode::Auto if n <= self.cfg.options.dense_limit => AdjMode::Dense,
            LambdaMode::Auto => AdjMode::Extremal,
        }
    }

    fn lambda(&mut self) -> Result<f64, String> {
        if self.lambda.is_none() {
            let mode = self.lambda_mode(self.g().n());
            self.lambda = Some(adjacency_spectrum(self.g(), mode).map(|r| r.lambda).map_err(|e| e.to_string()));
        }
        self.lambda.clone().unwrap()
    }

    fn girth(&mut self) -> Girth {
        *self.girth.get_or_insert_with(|| girth_with(&self.c.splice.graph, self.cfg.execution))
    }
}

fn run_seed(cfg: &ExperimentConfig, host: &Graph, gamma: usize, seed: u64) -> RunReport {
    let mut timings = BTreeMap::new();
    let t = Instant::now();
    let built = construct_pipeline(cfg.d, host, gamma, seed);
    timings.insert("construct".to_string(), ms(t));
    let c = match built {
        Ok(c) => c,
        Err(e) => {
            let mut r =
                failed_run(seed, cfg.d, gamma, host.n(), StageError { stage: "construct".into(), message: e.to_string() });
            r.timings_ms = timings;
            return r;
        }
    };
    let mut errors = Vec::new();
    if let Some(dir) = &cfg.output.graphs {
        if let Err(e) = write_graph_files(dir, &c, seed) {
            errors.push(StageError { stage: "write_graph".into(), message: e.to_string() });
        }
    }
    let mut ctx = Context { cfg, host, c: &c, seed, lambda: None, girth: None };
    let mut summary = RunSummary { n: Some(c.splice.graph.n()), ..Default::default() };
    let mut checks = BTreeMap::new();
    for &check in &cfg.checks {
        let t = Instant::now();
        let outcome = run_check(&mut ctx, check, &mut summary);
        timings.insert(check.name().to_string(), ms(t));
        checks.insert(check.name().to_string(), outcome);
    }
    let passed = errors.is_empty() && checks.values().all(|o| o.status != CheckStatus::Failed);
    RunReport {
        seed,
        d: cfg.d,
        gamma,
        host_n: host.n(),
        construction: Some(c.report.clone()),
        summary,
        checks,
        errors,
        passed,
        timings_ms: timings,
    }
}

fn write_graph_files(dir: &std::path::Path, c: &Construction, seed: u64) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let g = BufWriter::new(File::create(dir.join(format!("gprime_seed{seed}.el")))?);
    let s = BufWriter::new(File::create(dir.join(format!("gprime_seed{seed}.json")))?);
    write_splice(&c.splice, g, s).map_err(std::io::Error::other)
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn run_check(ctx: &mut Context, check: Check, summary: &mut RunSummary) -> CheckOutcome {
    let opts = &ctx.cfg.options;
    let exec = ctx.cfg.execution;
    let d = ctx.cfg.d;
    let ramanujan = 2.0 * ((d - 1) as f64).sqrt();
    match check {
        Check::Girth => {
            let gi = ctx.girth();
            summary.girth = Some(gi);
            let host_girth = girth_with(ctx.host, exec);
            let moore_g = moore_bound_check_with(ctx.g(), exec);
            let moore_h = moore_bound_check_with(ctx.host, exec);
            match (moore_g, moore_h) {
                (Ok(a), Ok(b)) => CheckOutcome::from_flag(
                    a.passed && b.passed,
                    json!({
                        "girth": gi,
                        "girth_host": host_girth,
                        "girth_h_tilde": ctx.c.report.girth_h_tilde,
                        "girth_h": ctx.c.report.girth_h,
                        "girth_lower_bound": ctx.c.report.girth_lower_bound,
                        "moore": a,
                        "moore_host": b,
                    }),
                ),
                (Err(e), _) | (_, Err(e)) => CheckOutcome::failed(e.to_string()),
            }
        }
        Check::Lambda => {
            let lam = match ctx.lambda() {
                Ok(l) => l,
                Err(e) => return CheckOutcome::failed(e),
            };
            let host_mode = ctx.lambda_mode(ctx.host.n());
            let lam_host = match adjacency_spectrum(ctx.host, host_mode) {
                Ok(r) => r.lambda,
                Err(e) => return CheckOutcome::failed(e.to_string()),
            };
            summary.lambda = Some(lam);
            summary.lambda_excess = Some(lam - ramanujan);
            summary.lambda_host = Some(lam_host);
            let mixing = match expander_mixing_audit(ctx.g(), lam, opts.mixing_trials, derive_seed(ctx.seed, 10), exec) {
                Ok(m) => m,
                Err(e) => return CheckOutcome::failed(e.to_string()),
            };
            let over_host = opts.max_lambda_over_host.map(|s| lam <= lam_host + s);
            let over_ram = opts.max_lambda_over_ramanujan.map(|s| lam <= ramanujan + s);
            let passed = mixing.passed && over_host.unwrap_or(true) && over_ram.unwrap_or(true);
            CheckOutcome::from_flag(
                passed,
                json!({
                    "lambda": lam,
                    "lambda_host": lam_host,
                    "ramanujan": ramanujan,
                    "excess": lam - ramanujan,
                    "margin_over_host": opts.max_lambda_over_host.map(|s| lam_host + s - lam),
                    "margin_over_ramanujan": opts.max_lambda_over_ramanujan.map(|s| ramanujan + s - lam),
                    "within_host_slack": over_host,
                    "within_ramanujan_slack": over_ram,
                    "mixing": mixing,
                }),
            )
        }
        Check::Psi => {
            let u = &ctx.c.splice.planted_u;
            match vertex_expansion(ctx.g(), u) {
                Ok(mut r) => {
                    // Exact: 2|Γ(U)| = (d+1)|U|.
                    let exact = 2 * r.neighborhood_size == (d + 1) * r.set_size;
                    r.bound_value = Some((d + 1) as f64 / 2.0);
                    r.passed = Some(exact);
                    summary.psi_u = Some(r.psi);
                    CheckOutcome::from_flag(exact, to_value(&r))
                }
                Err(e) => CheckOutcome::failed(e.to_string()),
            }
        }
        Check::Ihara => {
            let h = &ctx.c.gadget.graph;
            let arcs = 2 * h.m();
            if arcs > opts.ihara_max_arcs {
                return CheckOutcome::skipped(format!("H′ has {arcs} arcs, cap is {}", opts.ihara_max_arcs));
            }
            match ihara_bass_check_capped(h, opts.ihara_tol, opts.ihara_max_arcs) {
                Ok(r) => CheckOutcome::from_flag(
                    r.passed,
                    json!({"graph": "H′", "n": r.n, "m": r.m, "max_deviation": r.max_deviation, "tolerance": r.tolerance}),
                ),
                Err(e) => CheckOutcome::failed(e.to_string()),
            }
        }
        Check::Xradius => {
            let mut reports = Vec::new();
            for depth in 0..=opts.xradius_depth {
                match verify_x_radius(&ctx.c.gadget, depth, opts.xradius_tol, opts.nb_tol) {
                    Ok(r) => reports.push(r),
                    Err(e) => return CheckOutcome::failed(format!("depth {depth}: {e}")),
                }
            }
            summary.xradius_lambda_max = reports.iter().map(|r| r.lambda_max).reduce(f64::max);
            summary.xradius_nb_max = reports.iter().map(|r| r.nb_radius).reduce(f64::max);
            CheckOutcome::from_flag(reports.iter().all(|r| r.passed), to_value(&reports))
        }
        Check::Linkage => {
            let mut reports = Vec::new();
            for &(k, ell) in &opts.linkage {
                match verify_trace_bound(&ctx.c.gadget, k * (ell + 1), k, ell, exec) {
                    Ok(r) => reports.push(r),
                    Err(e) => return CheckOutcome::failed(format!("k={k}, ell={ell}: {e}")),
                }
            }
            summary.trace_ratio_max = reports.iter().map(|r| r.ratio).reduce(f64::max);
            CheckOutcome::from_flag(reports.iter().all(|r| r.passed), to_value(&reports))
        }
        Check::SmallSets => {
            let lam = match ctx.lambda() {
                Ok(l) => l,
                Err(e) => return CheckOutcome::failed(e),
            };
            let seed = derive_seed(ctx.seed, 11);
            match audit_small_sets(ctx.g(), lam, opts.small_set_kappa, opts.small_set_trials, seed, exec) {
                Ok(a) => {
                    summary.small_set_bound = Some(a.bound_at_kappa);
                    summary.small_set_min_margin = Some(a.min_margin);
                    CheckOutcome::from_flag(a.passed, to_value(&a))
                }
                Err(ExpansionError::InvalidParams(msg)) => CheckOutcome::skipped(msg),
                Err(e) => CheckOutcome::failed(e.to_string()),
            }
        }
        Check::Kahale => {
            let Some(r) = ctx.girth().finite() else {
                return CheckOutcome::skipped("G′ is a forest");
            };
            let h_max = r / 2;
            if h_max < 1 {
                return CheckOutcome::skipped(format!("girth {r} leaves no layers"));
            }
            let s = match kahale_vector(&ctx.c.splice, h_max) {
                Ok(s) => s,
                Err(e @ SpectralError::GirthTooSmall { .. }) => return CheckOutcome::skipped(e.to_string()),
                Err(e) => return CheckOutcome::failed(e.to_string()),
            };
            let gamma = ctx.c.report.gamma as f64;
            let k = (d - 1) as f64;
            let expected = gamma / k + 2.0 * gamma * (d as f64 - 2.0) / k;
            let sums = s.layer_sums();
            let deviation = sums[1..].iter().map(|x| (x - expected).abs()).fold(0.0, f64::max);
            let sub = verify_subsolution(ctx.g(), &s, ramanujan);
            let passed = deviation <= opts.kahale_tol && sub.passed && sub.slack_pattern_ok;
            CheckOutcome::from_flag(
                passed,
                json!({
                    "girth": r,
                    "h_max": h_max,
                    "layer_sums": sums,
                    "expected_layer_sum": expected,
                    "max_deviation": deviation,
                    "subsolution": sub,
                }),
            )
        }
    }
}
