//! Run manifests and the CSV / JSON serializations of sensitivity curves.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use super::config::{config_from_pairs, format_number, grid_pairs, normalize_key, protocol_pairs, GridSpec, CONFIG_KEYS};
use crate::dynamics::EvolutionStats;
use crate::error::{Error, Result};
use crate::estimation::{EstimatorChoice, SensitivityCurve, SensitivityPoint};
use crate::fock::InputState;
use crate::protocol::{default_config_for, ProtocolConfig};

pub const CSV_COLUMNS: &str = "t_hold,mean,variance,dmean_ddelta,sensitivity,qfi,crlb,divergent";

/// Everything needed to reproduce one emitted file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub config: ProtocolConfig,
    pub estimator: EstimatorChoice,
    pub grid: GridSpec,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp: u64,
    pub diagnostics: Option<EvolutionStats>,
    pub notes: Vec<String>,
    /// Experiment-specific parameters, echoed verbatim.
    pub extra: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(experiment: impl Into<String>, config: ProtocolConfig, estimator: EstimatorChoice, grid: GridSpec) -> Self {
        Self {
            experiment: experiment.into(),
            config,
            estimator,
            grid,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            diagnostics: None,
            notes: config.notes(),
            extra: Vec::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.to_string(), value.into()));
        self
    }

    pub fn with_diagnostics(mut self, stats: EvolutionStats) -> Self {
        self.diagnostics = Some(stats);
        self
    }

    fn pairs(&self) -> Vec<(String, String)> {
        let mut p = vec![
            ("tool-version".to_string(), self.tool_version.clone()),
            ("timestamp".to_string(), self.timestamp.to_string()),
            ("experiment".to_string(), self.experiment.clone()),
        ];
        p.extend(protocol_pairs(&self.config));
        p.push(("estimator".into(), self.estimator.key().into()));
        p.extend(grid_pairs(&self.grid));
        p.extend(self.extra.iter().cloned());
        if !self.outputs.is_empty() {
            p.push(("outputs".into(), self.outputs.join(",")));
        }
        if let Some(d) = &self.diagnostics {
            p.push(("steps".into(), d.steps.to_string()));
            p.push(("max-trace-drift".into(), format_number(d.max_trace_drift)));
            p.push(("min-eigenvalue".into(), format_number(d.min_eigenvalue)));
        }
        for n in &self.notes {
            p.push(("note".into(), n.clone()));
        }
        p
    }

    /// `# key = value` lines.
    pub fn header(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in self.pairs() {
            if k == "note" {
                let notes = m.entry("notes").or_insert_with(|| Value::Array(Vec::new()));
                if let Value::Array(a) = notes {
                    a.push(Value::String(v));
                }
            } else {
                m.insert(k, Value::String(v));
            }
        }
        Value::Object(m)
    }

    /// Reads the leading `# key = value` block of an emitted CSV (or a bare
    /// header). Stops at the first line that is not part of the block.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config_pairs = Vec::new();
        let mut m = RunManifest::new(
            "sweep",
            default_config_for(InputState::N0, 1).expect("single-particle default is valid"),
            EstimatorChoice::Imbalance,
            GridSpec::default(),
        );
        m.notes.clear();
        m.timestamp = 0;
        m.tool_version.clear();
        let mut stats = EvolutionStats::default();
        let mut have_stats = false;
        for line in text.lines() {
            let Some(body) = line.strip_prefix('#') else { break };
            let Some((k, v)) = body.split_once('=') else { break };
            let (k, v) = (normalize_key(k), v.trim().to_string());
            match k.as_str() {
                "curve" => break,
                "tool-version" => m.tool_version = v,
                "timestamp" => m.timestamp = v.parse().map_err(|_| Error::Usage(format!("timestamp: bad value `{v}`")))?,
                "outputs" => m.outputs = v.split(',').map(str::to_string).collect(),
                "note" => m.notes.push(v),
                "steps" => {
                    have_stats = true;
                    stats.steps = v.parse().map_err(|_| Error::Usage(format!("steps: bad value `{v}`")))?;
                }
                "max-trace-drift" => {
                    have_stats = true;
                    stats.max_trace_drift = parse_num(&k, &v)?;
                }
                "min-eigenvalue" => {
                    have_stats = true;
                    stats.min_eigenvalue = parse_num(&k, &v)?;
                }
                key if CONFIG_KEYS.contains(&key) => config_pairs.push((k, v)),
                _ => m.extra.push((k, v)),
            }
        }
        if config_pairs.is_empty() {
            return Err(Error::Usage("manifest: no configuration keys found".into()));
        }
        let run = config_from_pairs(&config_pairs)?;
        m.experiment = run.experiment.to_string();
        m.config = run.protocol;
        m.estimator = run.estimator;
        m.grid = run.grid;
        m.diagnostics = have_stats.then_some(stats);
        Ok(m)
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::Usage(format!("{key}: bad value `{v}`")))
}

/// Exact key-value description of a curve's configuration, used to label
/// blocks in multi-curve files.
pub fn curve_label(cfg: &ProtocolConfig, o: EstimatorChoice) -> String {
    let mut s: Vec<String> = protocol_pairs(cfg).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    s.push(format!("estimator={}", o.key()));
    s.join(" ")
}

fn csv_row(out: &mut String, p: &SensitivityPoint) {
    let sens = if p.divergent { "inf".to_string() } else { format_number(p.sensitivity) };
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        format_number(p.t_hold),
        format_number(p.mean),
        format_number(p.variance),
        format_number(p.dmean_ddelta),
        sens,
        format_number(p.qfi),
        format_number(p.crlb),
        u8::from(p.divergent)
    );
}

pub fn curve_csv(curve: &SensitivityCurve, manifest: &RunManifest) -> Result<String> {
    if curve.points.is_empty() {
        return Err(Error::invalid("cannot emit an empty curve"));
    }
    let mut s = manifest.header();
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for p in &curve.points {
        csv_row(&mut s, p);
    }
    Ok(s)
}

/// Several curves in one file; each block starts with `# curve = <label>`.
pub fn panel_csv(manifest: &RunManifest, curves: &[(String, &SensitivityCurve)]) -> Result<String> {
    let mut s = manifest.header();
    for (label, c) in curves {
        if c.points.is_empty() {
            return Err(Error::invalid(format!("curve `{label}` is empty")));
        }
        let _ = writeln!(s, "# curve = {label}");
        s.push_str(CSV_COLUMNS);
        s.push('\n');
        for p in &c.points {
            csv_row(&mut s, p);
        }
    }
    Ok(s)
}

fn point_json(p: &SensitivityPoint) -> Value {
    let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    json!({
        "t_hold": p.t_hold,
        "mean": p.mean,
        "variance": p.variance,
        "dmean_ddelta": p.dmean_ddelta,
        "sensitivity": if p.divergent { Value::Null } else { num(p.sensitivity) },
        "qfi": num(p.qfi),
        "crlb": num(p.crlb),
        "divergent": p.divergent,
    })
}

pub fn curve_json(curve: &SensitivityCurve, manifest: &RunManifest) -> Result<String> {
    if curve.points.is_empty() {
        return Err(Error::invalid("cannot emit an empty curve"));
    }
    let v = json!({
        "manifest": manifest.to_json(),
        "points": curve.points.iter().map(point_json).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn panel_json(manifest: &RunManifest, curves: &[(String, &SensitivityCurve)]) -> Result<String> {
    let v = json!({
        "manifest": manifest.to_json(),
        "curves": curves
            .iter()
            .map(|(label, c)| json!({
                "label": label,
                "points": c.points.iter().map(point_json).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Plain table with a manifest header.
pub fn table_csv(manifest: &RunManifest, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = manifest.header();
    s.push_str(&columns.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Drops the timestamp line so that two emissions can be compared.
pub fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp = "))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::sweep_sensitivity;
    use crate::protocol::NoiseOp;

    fn curve(grid: &[f64]) -> SensitivityCurve {
        let cfg = default_config_for(InputState::N0, 1).unwrap().with_noise(NoiseOp::Sz, 0.05);
        sweep_sensitivity(&cfg, grid, EstimatorChoice::Imbalance).unwrap()
    }

    #[test]
    fn one_point_curve_gives_one_row() {
        let c = curve(&[1.0]);
        let m = RunManifest::new("sweep", c.config, c.estimator, GridSpec { min: 1.0, max: 1.0, step: 0.1 });
        let text = curve_csv(&c, &m).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec![CSV_COLUMNS, body[1]]);
        assert_eq!(body[1].split(',').count(), 8);
    }

    #[test]
    fn manifest_round_trips_config() {
        let mut cfg = default_config_for(InputState::Noon, 3).unwrap().with_noise(NoiseOp::SPlus, 0.07).with_delta(0.3);
        cfg.t_bs_second = 0.123456789;
        cfg.integrator.dt = 5e-4;
        let m = RunManifest::new("sweep", cfg, EstimatorChoice::ParityB, GridSpec::default())
            .with_extra("panel", "figure5_tf_gamma")
            .with_diagnostics(EvolutionStats { steps: 12, max_trace_drift: 3e-15, min_eigenvalue: -1e-17 });
        let back = RunManifest::parse(&(m.header() + CSV_COLUMNS + "\n")).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(back.estimator, EstimatorChoice::ParityB);
        assert_eq!(back.grid, GridSpec::default());
        assert_eq!(back.diagnostics, m.diagnostics);
        assert_eq!(back.extra, m.extra);
        assert_eq!(back.notes, m.notes);
        assert!(!back.notes.is_empty());
    }

    #[test]
    fn divergent_points_serialize_as_sentinels() {
        let mut c = curve(&[1.0, 2.0]);
        c.points[1].divergent = true;
        c.points[1].sensitivity = f64::INFINITY;
        let m = RunManifest::new("sweep", c.config, c.estimator, GridSpec::default());
        let csv = curve_csv(&c, &m).unwrap();
        let last = csv.lines().last().unwrap();
        assert_eq!(last.split(',').nth(4), Some("inf"));
        assert!(last.ends_with(",1"));
        let v: Value = serde_json::from_str(&curve_json(&c, &m).unwrap()).unwrap();
        assert_eq!(v["points"][1]["sensitivity"], Value::Null);
        assert_eq!(v["points"][1]["divergent"], Value::Bool(true));
        assert_eq!(v["points"][0]["divergent"], Value::Bool(false));
    }

    #[test]
    fn empty_curve_is_rejected() {
        let mut c = curve(&[1.0]);
        c.points.clear();
        let m = RunManifest::new("sweep", c.config, c.estimator, GridSpec::default());
        assert!(curve_csv(&c, &m).is_err());
    }
}
