use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Check, ExperimentConfig, GammaSpec, OutputPaths};
use super::run::{run_experiment_with_host, AuditBundle, CheckStatus, RunReport};
use super::HarnessError;
use crate::graph::Girth;
use crate::hosts::HostSpec;
use crate::par::{map_slice, Execution};

/// Values to vary. Empty lists keep the template's value. Points are the
/// cartesian product in the order host_n, d, gamma, host_seed, seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub host_n: Vec<usize>,
    pub d: Vec<usize>,
    pub gamma: Vec<GammaSpec>,
    pub host_seed: Vec<u64>,
    pub seed: Vec<u64>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.host_n.is_empty() && self.d.is_empty() && self.gamma.is_empty() && self.host_seed.is_empty() && self.seed.is_empty()
    }

    /// TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let grid: SweepGrid = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?
        };
        Ok(grid)
    }

    fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    }

    /// One config per grid point, or the reason it cannot be formed.
    pub fn points(&self, template: &ExperimentConfig) -> Vec<Result<ExperimentConfig, String>> {
        let mut out = Vec::new();
        for n in Self::axis(&self.host_n) {
            for d in Self::axis(&self.d) {
                for gamma in Self::axis(&self.gamma) {
                    for hs in Self::axis(&self.host_seed) {
                        for s in Self::axis(&self.seed) {
                            out.push(apply(template, n, d, gamma, hs, s));
                        }
                    }
                }
            }
        }
        out
    }
}

fn apply(
    template: &ExperimentConfig,
    n: Option<usize>,
    d: Option<usize>,
    gamma: Option<GammaSpec>,
    host_seed: Option<u64>,
    seed: Option<u64>,
) -> Result<ExperimentConfig, String> {
    let mut cfg = template.clone();
    cfg.output = OutputPaths::default();
    match &mut cfg.host {
        HostSpec::RandomRegular { n: hn, d: hd, seed: hs } | HostSpec::HighGirthRegular { n: hn, d: hd, seed: hs, .. } => {
            *hn = n.unwrap_or(*hn);
            *hd = d.unwrap_or(*hd);
            *hs = host_seed.unwrap_or(*hs);
        }
        HostSpec::Lps { .. } => {
            if n.is_some() || d.is_some() || host_seed.is_some() {
                return Err("an LPS host has no n, d or seed to vary".into());
            }
        }
    }
    cfg.d = d.unwrap_or(cfg.d);
    cfg.gamma = gamma.unwrap_or(cfg.gamma);
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub name: String,
    pub point: usize,
    pub host_n: usize,
    pub n: Option<usize>,
    pub d: usize,
    pub gamma: usize,
    pub seed: u64,
    /// Number, "inf", or empty when not measured.
    pub girth: String,
    pub lambda: Option<f64>,
    pub lambda_excess: Option<f64>,
    pub lambda_host: Option<f64>,
    pub psi_u: Option<f64>,
    pub xradius_lambda_max: Option<f64>,
    pub xradius_nb_max: Option<f64>,
    pub trace_ratio_max: Option<f64>,
    pub small_set_bound: Option<f64>,
    pub small_set_min_margin: Option<f64>,
    pub girth_check: String,
    pub lambda_check: String,
    pub psi_check: String,
    pub ihara_check: String,
    pub xradius_check: String,
    pub linkage_check: String,
    pub small_sets_check: String,
    pub kahale_check: String,
    pub passed: bool,
    pub error: String,
}

fn status(r: &RunReport, c: Check) -> String {
    match r.checks.get(c.name()).map(|o| o.status) {
        Some(CheckStatus::Passed) => "pass".into(),
        Some(CheckStatus::Failed) => "fail".into(),
        Some(CheckStatus::Skipped) => "skip".into(),
        None => String::new(),
    }
}

fn row(name: &str, point: usize, r: &RunReport) -> CsvRow {
    let s = &r.summary;
    CsvRow {
        name: name.to_string(),
        point,
        host_n: r.host_n,
        n: s.n,
        d: r.d,
        gamma: r.gamma,
        seed: r.seed,
        girth: match s.girth {
            Some(Girth::Finite(g)) => g.to_string(),
            Some(Girth::Infinite) => "inf".into(),
            None => String::new(),
        },
        lambda: s.lambda,
        lambda_excess: s.lambda_excess,
        lambda_host: s.lambda_host,
        psi_u: s.psi_u,
        xradius_lambda_max: s.xradius_lambda_max,
        xradius_nb_max: s.xradius_nb_max,
        trace_ratio_max: s.trace_ratio_max,
        small_set_bound: s.small_set_bound,
        small_set_min_margin: s.small_set_min_margin,
        girth_check: status(r, Check::Girth),
        lambda_check: status(r, Check::Lambda),
        psi_check: status(r, Check::Psi),
        ihara_check: status(r, Check::Ihara),
        xradius_check: status(r, Check::Xradius),
        linkage_check: status(r, Check::Linkage),
        small_sets_check: status(r, Check::SmallSets),
        kahale_check: status(r, Check::Kahale),
        passed: r.passed,
        error: r.errors.iter().map(|e| format!("{}: {}", e.stage, e.message)).collect::<Vec<_>>().join("; "),
    }
}

pub(crate) fn rows_of(bundle: &AuditBundle) -> Vec<CsvRow> {
    bundle.runs.iter().map(|r| row(&bundle.name, 0, r)).collect()
}

fn error_row(template: &ExperimentConfig, point: usize, stage: &str, msg: &str) -> CsvRow {
    CsvRow {
        name: template.name.clone(),
        point,
        host_n: 0,
        n: None,
        d: template.d,
        gamma: 0,
        seed: 0,
        girth: String::new(),
        lambda: None,
        lambda_excess: None,
        lambda_host: None,
        psi_u: None,
        xradius_lambda_max: None,
        xradius_nb_max: None,
        trace_ratio_max: None,
        small_set_bound: None,
        small_set_min_margin: None,
        girth_check: String::new(),
        lambda_check: String::new(),
        psi_check: String::new(),
        ihara_check: String::new(),
        xradius_check: String::new(),
        linkage_check: String::new(),
        small_sets_check: String::new(),
        kahale_check: String::new(),
        passed: false,
        error: format!("{stage}: {msg}"),
    }
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// One per grid point, in grid order; None where the point failed
    /// before any run started.
    pub bundles: Vec<Option<AuditBundle>>,
    pub rows: Vec<CsvRow>,
    /// Mean λ(G′) - 2√(d-1) per host size, ascending in n.
    pub lambda_excess_by_n: Vec<(usize, f64)>,
    /// Whether that column never increases with n. Reported, not asserted.
    pub lambda_excess_nonincreasing: Option<bool>,
    pub failed: bool,
}

/// Runs every grid point (in a worker pool under `exec`) and merges the
/// results in grid order. Failing points become error rows; the sweep
/// carries on.
pub fn sweep(template: &ExperimentConfig, grid: &SweepGrid, exec: Execution) -> Result<SweepResult, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::Config("sweep grid is empty".into()));
    }
    let points = grid.points(template);
    let results = map_slice(exec, &points, |p| -> Result<AuditBundle, (String, String)> {
        let cfg = p.as_ref().map_err(|e| ("config".to_string(), e.clone()))?;
        let host = cfg.host.build().map_err(|e| ("host".to_string(), e.to_string()))?;
        run_experiment_with_host(cfg, &host).map_err(|e| ("run".to_string(), e.to_string()))
    });
    let mut rows = Vec::new();
    let mut bundles = Vec::new();
    let mut failed = false;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(b) => {
                failed |= !b.passed;
                rows.extend(b.runs.iter().map(|run| row(&b.name, i, run)));
                bundles.push(Some(b));
            }
            Err((stage, msg)) => {
                failed = true;
                rows.push(error_row(template, i, &stage, &msg));
                bundles.push(None);
            }
        }
    }
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        if let Some(x) = r.lambda_excess {
            by_n.entry(r.host_n).or_default().push(x);
        }
    }
    let lambda_excess_by_n: Vec<(usize, f64)> =
        by_n.into_iter().map(|(n, v)| (n, v.iter().sum::<f64>() / v.len() as f64)).collect();
    let lambda_excess_nonincreasing =
        (lambda_excess_by_n.len() >= 2).then(|| lambda_excess_by_n.windows(2).all(|w| w[1].1 <= w[0].1));
    if let Some(p) = &template.output.csv {
        write_csv(p, &rows)?;
    }
    let result = SweepResult { bundles, rows, lambda_excess_by_n, lambda_excess_nonincreasing, failed };
    if let Some(p) = &template.output.json {
        let text = serde_json::to_string_pretty(&result).expect("sweep serializes");
        std::fs::write(p, text + "\n").map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    Ok(result)
}
