//! Experiment configuration: JSON schema, parsing with field diagnostics, and
//! resolution of the model into a state on its window.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use entanglab::generators::{self, GibbsSpec, PairTerm};
use entanglab::ising::{Coupling, IsingSpec};
use entanglab::lattice::{Region, RegionSpec, Window};
use entanglab::registry::AuditSettings;
use entanglab::states::{qpsv, PureState};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub regions: RegionsConfig,
    #[serde(default)]
    pub widths: Vec<usize>,
    #[serde(default)]
    pub audits: Vec<String>,
    #[serde(default)]
    pub settings: AuditSettings,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit() -> f64 {
    1.0
}

fn qubit() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Transverse-field Ising ground state; nearest-neighbour bonds of
    /// strength `j` unless `couplings` is given.
    Ising {
        dims: Vec<usize>,
        #[serde(default = "unit")]
        j: f64,
        b: f64,
        #[serde(default)]
        hz: f64,
        #[serde(default)]
        couplings: Vec<Coupling>,
        #[serde(default)]
        allow_degenerate: bool,
    },
    /// Square root of a classical Gibbs measure, with an optional additive phase.
    Gibbs {
        dims: Vec<usize>,
        /// Uniform nearest-neighbour coupling, used when `pairs` is empty.
        #[serde(default)]
        j: Option<f64>,
        #[serde(default)]
        pairs: Vec<PairTerm>,
        #[serde(default)]
        fields: Vec<f64>,
        #[serde(default)]
        phase_pairs: Vec<PairTerm>,
        #[serde(default)]
        phase_fields: Vec<f64>,
    },
    Ghz {
        dims: Vec<usize>,
    },
    /// Gaussian random amplitudes drawn from the run seed.
    Random {
        dims: Vec<usize>,
        #[serde(default = "qubit")]
        nu: usize,
    },
    /// A QPSV state file; relative paths are taken from the config directory.
    StateFile {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub a: Option<RegionSpec>,
    /// Explicit buffer; otherwise the width-`width` shell around `a`.
    pub b: Option<RegionSpec>,
    pub width: Option<usize>,
    pub blocks: Option<BlockFamily>,
    pub a1: Option<RegionSpec>,
    pub a2: Option<RegionSpec>,
    #[serde(default)]
    pub offsets: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum BlockFamily {
    /// `"end"`: the blocks of the first `k` sites, `k = 1..N−1`.
    Named(String),
    List(Vec<RegionSpec>),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem for outputs; defaults to the subcommand name.
    pub stem: Option<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let text = inner.to_string();
            CliError::Config(format!(
                "field `{path}`: {} (line {}, column {})",
                strip_position(&text),
                inner.line(),
                inner.column()
            ))
        })
    }
}

fn strip_position(msg: &str) -> &str {
    msg.find(" at line ").map_or(msg, |i| &msg[..i])
}

pub fn config_error(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {e}"))
}

/// Capacity failures keep their own exit code; anything else raised while
/// resolving a field is a config error naming that field.
pub fn field_error(field: &str, e: entanglab::Error) -> CliError {
    match e {
        entanglab::Error::Capacity { .. } => CliError::Core(e),
        other => config_error(field, other),
    }
}

pub fn resolve_region(window: &Window, spec: &Option<RegionSpec>, field: &str) -> Result<Region, CliError> {
    let spec = spec.as_ref().ok_or_else(|| config_error(field, "required for this subcommand"))?;
    let r = spec.resolve(window).map_err(|e| field_error(field, e))?;
    if r.is_empty() {
        return Err(config_error(field, "region is empty"));
    }
    Ok(r)
}

impl ModelConfig {
    pub fn ising_spec(&self) -> Option<(IsingSpec, bool)> {
        match self {
            ModelConfig::Ising { dims, j, b, hz, couplings, allow_degenerate } => {
                let mut spec = IsingSpec::nearest_neighbor(dims, *j, *b);
                if !couplings.is_empty() {
                    spec.couplings = couplings.clone();
                }
                spec.hz = *hz;
                Some((spec, *allow_degenerate))
            }
            _ => None,
        }
    }

    pub fn window(&self, base: &Path) -> Result<Window, CliError> {
        match self {
            ModelConfig::Ising { dims, .. }
            | ModelConfig::Gibbs { dims, .. }
            | ModelConfig::Ghz { dims }
            | ModelConfig::Random { dims, .. } => Window::new(dims).map_err(|e| field_error("model.dims", e)),
            ModelConfig::StateFile { .. } => Ok(self.load_file(base)?.window().clone()),
        }
    }

    fn load_file(&self, base: &Path) -> Result<PureState, CliError> {
        let ModelConfig::StateFile { path } = self else { unreachable!("only called for state files") };
        let full = if path.is_absolute() { path.clone() } else { base.join(path) };
        qpsv::read(&full).map_err(|e| config_error("model.path", format!("{}: {e}", full.display())))
    }

    /// The state for every subcommand except `ground`, which solves the
    /// Ising model itself.
    pub fn build(&self, base: &Path, seed: u64) -> Result<PureState, CliError> {
        Ok(match self {
            ModelConfig::Ising { .. } => {
                let (spec, allow) = self.ising_spec().expect("ising model");
                crate::commands::solve(&spec, allow)?.state
            }
            ModelConfig::Gibbs { dims, j, pairs, fields, phase_pairs, phase_fields } => {
                let w = Window::new(dims).map_err(|e| field_error("model.dims", e))?;
                let pairs = if pairs.is_empty() {
                    generators::nearest_neighbor_bonds(&w, |_, _| j.unwrap_or(1.0))
                } else {
                    pairs.clone()
                };
                let spec = GibbsSpec {
                    pairs,
                    fields: fields.clone(),
                    phase_pairs: phase_pairs.clone(),
                    phase_fields: phase_fields.clone(),
                };
                spec.state(&w).map_err(|e| field_error("model", e))?
            }
            ModelConfig::Ghz { dims } => generators::ghz(&Window::new(dims).map_err(|e| field_error("model.dims", e))?),
            ModelConfig::Random { dims, nu } => {
                let w = Window::new(dims).map_err(|e| field_error("model.dims", e))?;
                if *nu < 2 {
                    return Err(config_error("model.nu", "local dimension must be at least 2"));
                }
                check_state_capacity(&w, *nu)?;
                generators::random_state(&w, *nu, seed)
            }
            ModelConfig::StateFile { .. } => self.load_file(base)?,
        })
    }
}

/// Largest window for which exact state vectors are built.
pub const MAX_STATE_SITES: usize = 24;

pub fn check_state_capacity(w: &Window, nu: usize) -> Result<(), CliError> {
    let bits = (w.site_count() as f64) * (nu as f64).log2();
    if bits > MAX_STATE_SITES as f64 {
        return Err(CliError::Core(entanglab::Error::Capacity {
            what: "state sites",
            got: w.site_count(),
            limit: MAX_STATE_SITES,
        }));
    }
    Ok(())
}
