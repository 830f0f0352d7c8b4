use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::hosts::HostSpec;
use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum CubeRootTag {
    #[serde(rename = "n^(1/3)")]
    Tag,
}

/// γ as a number, or the string `"n^(1/3)"` for 2⌊n^{1/3}/2⌋.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Fixed(usize),
    #[serde(with = "cube_root")]
    CubeRoot,
}

mod cube_root {
    use super::CubeRootTag;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        CubeRootTag::Tag.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        CubeRootTag::deserialize(d).map(|_| ())
    }
}

impl GammaSpec {
    /// The largest even integer at most n^{1/3} for the rule form.
    pub fn resolve(self, host_n: usize) -> usize {
        match self {
            GammaSpec::Fixed(g) => g,
            GammaSpec::CubeRoot => {
                let mut c = (host_n as f64).cbrt().floor() as usize;
                // Guard against cbrt rounding either way.
                while (c + 1).pow(3) <= host_n {
                    c += 1;
                }
                while c > 0 && c.pow(3) > host_n {
                    c -= 1;
                }
                2 * (c / 2)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Girth,
    Lambda,
    Psi,
    Ihara,
    Xradius,
    Linkage,
    SmallSets,
    Kahale,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Girth,
        Check::Lambda,
        Check::Psi,
        Check::Ihara,
        Check::Xradius,
        Check::Linkage,
        Check::SmallSets,
        Check::Kahale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Girth => "girth",
            Check::Lambda => "lambda",
            Check::Psi => "psi",
            Check::Ihara => "ihara",
            Check::Xradius => "xradius",
            Check::Linkage => "linkage",
            Check::SmallSets => "small_sets",
            Check::Kahale => "kahale",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// Dense up to `dense_limit` vertices, Lanczos above.
    #[default]
    Auto,
    Dense,
    Extremal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    pub lambda_mode: LambdaMode,
    pub dense_limit: usize,
    /// Asserted when set: λ(G′) <= λ(host) + this.
    pub max_lambda_over_host: Option<f64>,
    /// Asserted when set: λ(G′) <= 2√(d-1) + this.
    pub max_lambda_over_ramanujan: Option<f64>,
    pub mixing_trials: usize,
    pub xradius_depth: usize,
    pub xradius_tol: f64,
    pub nb_tol: f64,
    /// Skip the Ihara–Bass comparison when 2m exceeds this.
    pub ihara_max_arcs: usize,
    pub ihara_tol: f64,
    /// (k, ℓ) pairs for the trace bound.
    pub linkage: Vec<(usize, usize)>,
    pub small_set_kappa: f64,
    pub small_set_trials: usize,
    pub kahale_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            lambda_mode: LambdaMode::Auto,
            dense_limit: 2048,
            max_lambda_over_host: None,
            max_lambda_over_ramanujan: None,
            mixing_trials: 200,
            xradius_depth: 3,
            xradius_tol: 1e-9,
            nb_tol: 1e-5,
            ihara_max_arcs: 1200,
            ihara_tol: 1e-6,
            linkage: vec![(1, 1), (1, 2)],
            small_set_kappa: 0.2,
            small_set_trials: 1000,
            kahale_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Directory for the G′ edge list and sidecar, one pair per seed.
    pub graphs: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub host: HostSpec,
    pub d: usize,
    pub gamma: GammaSpec,
    pub seeds: Vec<u64>,
    pub checks: BTreeSet<Check>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub options: CheckOptions,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.host.degree() != self.d {
            return Err(HarnessError::Config(format!(
                "host degree {} differs from d = {}",
                self.host.degree(),
                self.d
            )));
        }
        self.host.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if let GammaSpec::Fixed(g) = self.gamma {
            if g % 2 != 0 {
                return Err(HarnessError::Config(format!("gamma {g} is odd")));
            }
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("no seeds".into()));
        }
        let kappa = self.options.small_set_kappa;
        if !(0.0..1.0).contains(&kappa) {
            return Err(HarnessError::Config(format!("small_set_kappa {kappa} outside [0, 1)")));
        }
        Ok(())
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }
}
