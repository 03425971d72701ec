//! Flat sectioned key-value config files and map-spec strings.
//!
//! Grammar (see docs/config.md for the full description):
//!
//! ```text
//! file    := { line }
//! line    := section | binding | blank | comment
//! section := '[' name ']'
//! binding := key '=' value        # attached to the current section
//! comment := '#' ...
//! ```
//!
//! Bindings are addressed as `section.key`; bindings before any section
//! header live in the `run` section. Command-line flags override config
//! keys of the same name.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use circlemap::LiftMap;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = "run".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {}: unterminated section header", lineno + 1))?;
                section = name.trim().to_string();
                if section.is_empty() {
                    bail!("line {}: empty section name", lineno + 1);
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            if key.is_empty() {
                bail!("line {}: empty key", lineno + 1);
            }
            values.insert(format!("{section}.{key}"), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

}

/// Map specs: `power:d=2`, `trig:d=2,eps=0.5`, `pl:s=0.3`, `fs:s=0.7,M=4`,
/// `sampled:file=lift.csv`.
pub fn parse_map_spec(spec: &str) -> Result<LiftMap> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params: BTreeMap<&str, &str> = BTreeMap::new();
    if !rest.is_empty() {
        for pair in rest.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("map spec parameter {pair:?} is not key=value"))?;
            params.insert(k.trim(), v.trim());
        }
    }
    let f64_param = |name: &str| -> Result<f64> {
        params
            .get(name)
            .ok_or_else(|| anyhow!("map spec {spec:?} is missing parameter {name}"))?
            .parse::<f64>()
            .map_err(|e| anyhow!("map spec parameter {name}: {e}"))
    };
    let map = match kind {
        "power" | "q" => {
            let d = f64_param("d")? as u32;
            LiftMap::power(d)?
        }
        "trig" | "trig-perturbed" => {
            let d = params.get("d").map_or(Ok(2.0), |v| v.parse::<f64>().map_err(|e| anyhow!("{e}")))? as u32;
            LiftMap::trig_perturbed(d, f64_param("eps")?)?
        }
        "pl" | "piecewise-linear" => LiftMap::piecewise_linear(f64_param("s")?)?,
        "fs" | "fs-smooth" => LiftMap::fs_smooth(f64_param("s")?, f64_param("M")?)?,
        "sampled" => {
            let file = params
                .get("file")
                .ok_or_else(|| anyhow!("sampled map spec needs file=..."))?;
            let d = params.get("d").map_or(Ok(2.0), |v| v.parse::<f64>().map_err(|e| anyhow!("{e}")))? as u32;
            let (xs, ys) = load_samples_csv(Path::new(file))?;
            LiftMap::sampled(d, xs, ys)?
        }
        other => bail!("unknown map kind {other:?}"),
    };
    Ok(map)
}

/// Two-column CSV (x, F(x)) with a header line.
pub fn load_samples_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading samples {}", path.display()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut cols = line.split(',');
        let x: f64 = cols
            .next()
            .ok_or_else(|| anyhow!("line {}: missing x", i + 1))?
            .trim()
            .parse()?;
        let y: f64 = cols
            .next()
            .ok_or_else(|| anyhow!("line {}: missing F(x)", i + 1))?
            .trim()
            .parse()?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

/// Comma-separated floats such as `0.5,0.25,0.125`.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad number {s:?}: {e}")))
        .collect()
}
