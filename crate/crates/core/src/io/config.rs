//! Run configuration: a flat `key = value` file merged with command-line
//! flags, flags winning.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use clap::Parser;

use crate::analysis::uniform_grid;
use crate::error::{Error, Result};
use crate::estimation::EstimatorChoice;
use crate::fock::InputState;
use crate::protocol::{default_config_for, NoiseOp, NoisePlacement, ProtocolConfig};

/// Keys accepted in config files and manifests, in emission order.
pub const CONFIG_KEYS: &[&str] = &[
    "experiment",
    "input",
    "n",
    "noise",
    "gamma",
    "delta",
    "j",
    "tbs-first",
    "tbs-second",
    "noise-placement",
    "dt",
    "convergence-check",
    "estimator",
    "thold-min",
    "thold-max",
    "thold-step",
    "n-list",
    "gammas",
    "out-dir",
    "format",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Sweep,
    Figure(u8),
    AppendixA,
    Invariance,
    Density,
    Crossover,
    Scaling,
}

impl Experiment {
    pub const ALL: [&'static str; 13] = [
        "sweep", "figure1", "figure2", "figure3", "figure4", "figure5", "figure6", "figure7", "appendixA",
        "invariance", "density", "crossover", "scaling",
    ];

    pub fn from_key(key: &str) -> Option<Self> {
        Some(match key {
            "sweep" => Self::Sweep,
            "appendixA" | "appendixa" | "appendix-a" => Self::AppendixA,
            "invariance" => Self::Invariance,
            "density" => Self::Density,
            "crossover" => Self::Crossover,
            "scaling" => Self::Scaling,
            _ => {
                let k: u8 = key.strip_prefix("figure")?.parse().ok()?;
                if !(1..=7).contains(&k) {
                    return None;
                }
                Self::Figure(k)
            }
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sweep => f.write_str("sweep"),
            Self::Figure(k) => write!(f, "figure{k}"),
            Self::AppendixA => f.write_str("appendixA"),
            Self::Invariance => f.write_str("invariance"),
            Self::Density => f.write_str("density"),
            Self::Crossover => f.write_str("crossover"),
            Self::Scaling => f.write_str("scaling"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 0.5,
            max: 4.0 * PI,
            step: 0.02,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        uniform_grid(self.min, self.max, self.step)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Usage(format!("thold-step: must be positive, got {}", self.step)));
        }
        if !(self.min >= 0.0 && self.min.is_finite()) {
            return Err(Error::Usage(format!("thold-min: must be non-negative, got {}", self.min)));
        }
        if !(self.max >= self.min && self.max.is_finite()) {
            return Err(Error::Usage(format!(
                "thold-max: must be at least thold-min ({}), got {}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub protocol: ProtocolConfig,
    pub estimator: EstimatorChoice,
    pub grid: GridSpec,
    pub n_list: Option<Vec<usize>>,
    pub gammas: Option<Vec<f64>>,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Keys that were set explicitly, by file or flag.
    pub explicit: BTreeSet<String>,
}

impl RunConfig {
    pub fn is_set(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }
}

fn bad(key: &str, what: &str, value: &str) -> Error {
    Error::Usage(format!("{key}: expected {what}, got `{value}`"))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, "a number", v))?;
    if x.is_nan() {
        return Err(bad(key, "a number", v));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| bad(key, "a non-negative integer", v))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, "true or false", v)),
    }
}

/// `2:20:2` (inclusive range with step) or a comma list.
pub fn parse_n_list(key: &str, v: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = v.split(':').collect();
    let list = match parts.as_slice() {
        [a, b] | [a, b, _] => {
            let (a, b) = (parse_usize(key, a.trim())?, parse_usize(key, b.trim())?);
            let s = match parts.get(2) {
                Some(s) => parse_usize(key, s.trim())?,
                None => 1,
            };
            if s == 0 || b < a {
                return Err(bad(key, "lo:hi:step with lo <= hi and step >= 1", v));
            }
            (a..=b).step_by(s).collect()
        }
        _ => v
            .split(',')
            .map(|x| parse_usize(key, x.trim()))
            .collect::<Result<Vec<_>>>()?,
    };
    if list.is_empty() || list.contains(&0) {
        return Err(bad(key, "a non-empty list of positive integers", v));
    }
    Ok(list)
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let list = v
        .split(',')
        .map(|x| parse_f64(key, x.trim()))
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(bad(key, "a comma-separated list of numbers", v));
    }
    Ok(list)
}

fn parse_formats(key: &str, v: &str) -> Result<Vec<OutputFormat>> {
    let mut out = BTreeSet::new();
    for part in v.split(',').map(str::trim) {
        match part {
            "csv" => {
                out.insert(OutputFormat::Csv);
            }
            "json" => {
                out.insert(OutputFormat::Json);
            }
            "svg" => {
                out.insert(OutputFormat::Svg);
            }
            "all" => out.extend([OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg]),
            _ => return Err(bad(key, "csv, json, svg or all", v)),
        }
    }
    Ok(out.into_iter().collect())
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Parses a flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)))?;
        pairs.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds a run configuration from `(key, value)` pairs; later pairs win.
pub fn config_from_pairs(pairs: &[(String, String)]) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (k, v) in pairs {
        let k = normalize_key(k);
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(Error::Usage(format!("unknown key `{k}`")));
        }
        map.insert(k, v.clone());
    }
    let get = |k: &str| map.get(k).map(String::as_str);

    let experiment = match get("experiment") {
        Some(v) => Experiment::from_key(v).ok_or_else(|| bad("experiment", &Experiment::ALL.join(", "), v))?,
        None => Experiment::Sweep,
    };
    let input = match get("input") {
        Some(v) => InputState::from_key(v).ok_or_else(|| bad("input", "n0, tf or noon", v))?,
        None => InputState::N0,
    };
    let n = match get("n") {
        Some(v) => parse_usize("n", v)?,
        None if input == InputState::TwinFock => 2,
        None => 1,
    };
    let mut p = default_config_for(input, n).map_err(|e| Error::Usage(format!("n: {}", strip_kind(&e))))?;
    if let Some(v) = get("noise") {
        p.noise_op = NoiseOp::from_key(v).ok_or_else(|| bad("noise", "sz, s-, s+, alpha or none", v))?;
    }
    if let Some(v) = get("gamma") {
        p.gamma = parse_f64("gamma", v)?;
        if get("noise").is_none() && p.noise_op == NoiseOp::None && p.gamma > 0.0 {
            p.noise_op = NoiseOp::Sz;
        }
    }
    if let Some(v) = get("delta") {
        p.delta = parse_f64("delta", v)?;
    }
    if let Some(v) = get("j") {
        p.j = parse_f64("j", v)?;
    }
    if let Some(v) = get("tbs-first") {
        p.t_bs_first = parse_f64("tbs-first", v)?;
    }
    if let Some(v) = get("tbs-second") {
        p.t_bs_second = parse_f64("tbs-second", v)?;
    }
    if let Some(v) = get("noise-placement") {
        p.noise_placement =
            NoisePlacement::from_key(v).ok_or_else(|| bad("noise-placement", "hold or whole", v))?;
    }
    if let Some(v) = get("dt") {
        p.integrator.dt = parse_f64("dt", v)?;
    }
    if let Some(v) = get("convergence-check") {
        p.integrator.convergence_check = parse_bool("convergence-check", v)?;
    }
    p.validate().map_err(|e| Error::Usage(strip_kind(&e)))?;

    let estimator = match get("estimator") {
        Some(v) => EstimatorChoice::from_key(v).ok_or_else(|| bad("estimator", "imbalance or parity", v))?,
        None => EstimatorChoice::default_for(input),
    };
    let mut grid = GridSpec::default();
    if let Some(v) = get("thold-min") {
        grid.min = parse_f64("thold-min", v)?;
    }
    if let Some(v) = get("thold-max") {
        grid.max = parse_f64("thold-max", v)?;
    }
    if let Some(v) = get("thold-step") {
        grid.step = parse_f64("thold-step", v)?;
    }
    grid.validate()?;
    let n_list = get("n-list").map(|v| parse_n_list("n-list", v)).transpose()?;
    let gammas = get("gammas").map(|v| parse_f64_list("gammas", v)).transpose()?;
    if let Some(g) = &gammas {
        if g.iter().any(|x| *x < 0.0) {
            return Err(Error::Usage("gammas: rates must be non-negative".into()));
        }
    }
    let formats = match get("format") {
        Some(v) => parse_formats("format", v)?,
        None => vec![OutputFormat::Csv, OutputFormat::Svg],
    };
    Ok(RunConfig {
        experiment,
        protocol: p,
        estimator,
        grid,
        n_list,
        gammas,
        out_dir: PathBuf::from(get("out-dir").unwrap_or("lindey-out")),
        formats,
        explicit: map.into_keys().collect(),
    })
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::InvalidArgument(m) | Error::Usage(m) => m.clone(),
        other => other.to_string(),
    }
}

/// The protocol and grid keys for `cfg`, with exactly reproducible values.
pub fn protocol_pairs(p: &ProtocolConfig) -> Vec<(String, String)> {
    vec![
        ("input".into(), p.input.key().into()),
        ("n".into(), p.n.to_string()),
        ("noise".into(), p.noise_op.key().into()),
        ("gamma".into(), format_number(p.gamma)),
        ("delta".into(), format_number(p.delta)),
        ("j".into(), format_number(p.j)),
        ("tbs-first".into(), format_number(p.t_bs_first)),
        ("tbs-second".into(), format_number(p.t_bs_second)),
        ("noise-placement".into(), p.noise_placement.key().into()),
        ("dt".into(), format_number(p.integrator.dt)),
        ("convergence-check".into(), p.integrator.convergence_check.to_string()),
    ]
}

pub fn grid_pairs(g: &GridSpec) -> Vec<(String, String)> {
    vec![
        ("thold-min".into(), format_number(g.min)),
        ("thold-max".into(), format_number(g.max)),
        ("thold-step".into(), format_number(g.step)),
    ]
}

/// Shortest round-tripping text for a float; `inf` / `-inf` / `nan` for the
/// non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

const ABOUT: &str = "Open-system two-mode atom interferometer: sensitivity sweeps, insensitivity points and figure reproduction.";

const AFTER_HELP: &str = "\
Experiments: sweep, figure1..figure7, appendixA, invariance, density, crossover, scaling.
A config file holds the same keys as the flags (without dashes prefix), one `key = value` per line;
flags override the file. LINDEY_THREADS caps the worker threads (0 = automatic).";

/// Command-line flags. Every value is kept as text so that type errors are
/// reported with the key that caused them, the same way as for files.
#[derive(Parser, Debug, Default)]
#[command(name = "lindey", version, about = ABOUT, after_help = AFTER_HELP)]
pub struct Cli {
    /// Flat key = value configuration file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Experiment to run
    #[arg(long)]
    pub experiment: Option<String>,
    /// Input state: n0, tf or noon
    #[arg(long)]
    pub input: Option<String>,
    /// Particle number
    #[arg(long)]
    pub n: Option<String>,
    /// Lindblad operator: sz, s-, s+, alpha or none
    #[arg(long, allow_hyphen_values = true)]
    pub noise: Option<String>,
    /// Noise rate
    #[arg(long)]
    pub gamma: Option<String>,
    /// Energy shift during the hold
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Tunnelling amplitude
    #[arg(long)]
    pub j: Option<String>,
    /// Duration of the first beam splitter
    #[arg(long = "tbs-first")]
    pub tbs_first: Option<String>,
    /// Duration of the second beam splitter
    #[arg(long = "tbs-second")]
    pub tbs_second: Option<String>,
    /// Where noise acts: hold or whole
    #[arg(long = "noise-placement")]
    pub noise_placement: Option<String>,
    /// RK4 time step
    #[arg(long)]
    pub dt: Option<String>,
    /// Repeat each stage at dt/2 and compare
    #[arg(long = "convergence-check")]
    pub convergence_check: Option<String>,
    /// Readout: imbalance or parity
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long = "thold-min")]
    pub thold_min: Option<String>,
    #[arg(long = "thold-max")]
    pub thold_max: Option<String>,
    #[arg(long = "thold-step")]
    pub thold_step: Option<String>,
    /// Particle numbers, `lo:hi:step` or a comma list
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// Comma-separated noise rates
    #[arg(long)]
    pub gammas: Option<String>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<String>,
    /// csv, json, svg, all, or a comma list
    #[arg(long)]
    pub format: Option<String>,
}

impl Cli {
    pub fn pairs(&self) -> Vec<(String, String)> {
        let fields: [(&str, &Option<String>); 20] = [
            ("experiment", &self.experiment),
            ("input", &self.input),
            ("n", &self.n),
            ("noise", &self.noise),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("j", &self.j),
            ("tbs-first", &self.tbs_first),
            ("tbs-second", &self.tbs_second),
            ("noise-placement", &self.noise_placement),
            ("dt", &self.dt),
            ("convergence-check", &self.convergence_check),
            ("estimator", &self.estimator),
            ("thold-min", &self.thold_min),
            ("thold-max", &self.thold_max),
            ("thold-step", &self.thold_step),
            ("n-list", &self.n_list),
            ("gammas", &self.gammas),
            ("out-dir", &self.out_dir),
            ("format", &self.format),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    /// Reads the config file, if any, and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Usage(format!("config: cannot read {}: {e}", path.display())))?;
                parse_key_values(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend(self.pairs());
        config_from_pairs(&pairs)
    }
}

/// Parses command-line arguments (including the program name).
pub fn parse_args<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    cli.resolve()
}
