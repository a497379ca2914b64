//! Run configuration: defaults, then a JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hamiltonian::{ModelParams, Waveform};

/// Environment variable that overrides `--out`.
pub const OUT_ENV: &str = "FLOQUET_RABI_OUT";

/// One layer of settings; unset fields leave lower layers in place.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub omega_c: Option<f64>,
    pub omega_a: Option<f64>,
    pub eta0: Option<f64>,
    pub eta_m: Option<f64>,
    pub omega_m: Option<f64>,
    pub gamma: Option<f64>,
    pub n_fock: Option<usize>,
    pub n_j: Option<usize>,
    pub m_max: Option<usize>,
    pub l_max: Option<usize>,
    pub waveform: Option<Waveform>,
    pub out: Option<PathBuf>,
    pub points: Option<usize>,
    pub workers: Option<usize>,
    /// Reserved: nothing in the engine is random.
    pub seed: Option<u64>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "omega_c", "omega_a", "eta0", "eta_m", "omega_m", "gamma", "n_fock", "n_j", "m_max", "l_max",
    "waveform", "out", "points", "workers", "seed",
];

impl ConfigLayer {
    /// Parses a JSON object. Every unknown key is reported at once.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("malformed config file: {e}")))?;
        let Value::Object(map) = &value else {
            return Err(Error::Config("config file must hold a JSON object".into()));
        };
        let mut unknown: Vec<&str> = map
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            unknown.sort_unstable();
            return Err(Error::Config(format!(
                "unknown keys in config file: {}",
                unknown.join(", ")
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn apply_to(&self, p: &mut ModelParams) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(omega_c, omega_a, eta0, eta_m, omega_m, gamma, n_fock, n_j, m_max, l_max, waveform);
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub out: PathBuf,
    /// Grid override for sweeps and time series.
    pub points: Option<usize>,
    pub workers: usize,
    pub seed: Option<u64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    /// `defaults ⊕ file ⊕ flags`; `env_out`, when set, replaces the output directory.
    pub fn resolve(file: Option<&ConfigLayer>, flags: &ConfigLayer, env_out: Option<PathBuf>) -> Result<Self> {
        let mut params = ModelParams::default();
        let mut out = PathBuf::from(".");
        let mut points = None;
        let mut workers = None;
        let mut seed = None;
        for layer in file.into_iter().chain(std::iter::once(flags)) {
            layer.apply_to(&mut params);
            if let Some(o) = &layer.out {
                out = o.clone();
            }
            points = layer.points.or(points);
            workers = layer.workers.or(workers);
            seed = layer.seed.or(seed);
        }
        if let Some(o) = env_out {
            out = o;
        }
        params.validate()?;
        if let Some(p) = points {
            if p < 2 {
                return Err(Error::Config(format!("points must be >= 2, got {p}")));
            }
        }
        let workers = workers.unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(Self {
            params,
            out,
            points,
            workers,
            seed,
        })
    }

    /// Header lines shared by every CSV of this run.
    pub fn header(&self, command: &str) -> Vec<String> {
        vec![
            format!("floquet-rabi {}", crate::VERSION),
            format!("command: {command}"),
            format!(
                "config: {}",
                serde_json::to_string(self).expect("config serialises")
            ),
        ]
    }
}
