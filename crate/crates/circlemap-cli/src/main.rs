mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use circlemap::LiftMap;
use config::Config;
use report::Reporter;

/// Numerical laboratory for degree-d expanding circle endomorphisms.
#[derive(Parser)]
#[command(name = "circlemap", version, about)]
struct Cli {
    /// Config file with defaults for the flags (flags win)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for summary.json and CSV tables
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Write a golden file from this run's summary
    #[arg(long, global = true)]
    pin: Option<PathBuf>,

    /// Compare this run's summary against a golden file
    #[arg(long, global = true)]
    verify: Option<PathBuf>,

    /// Absolute tolerance stored when pinning
    #[arg(long, global = true, default_value_t = 1e-9)]
    pin_tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// Map spec, e.g. power:d=2 | trig:d=2,eps=0.5 | pl:s=0.3 | fs:s=0.7,M=4 | sampled:file=F
    #[arg(long)]
    map: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion, symmetry-modulus, and nearby-geometry diagnostics
    MapReport {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        /// Scales t for the symmetry modulus, comma separated
        #[arg(long)]
        scales: Option<String>,
    },
    /// Dual-derivative table and optional single-word convergence study
    DualDeriv {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        /// Dual word (rightmost digits), e.g. 011
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Summation condition at every depth and the compatibility product
    CheckConditions {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        terms: Option<u32>,
        /// Base words for the compatibility product, comma separated
        #[arg(long)]
        bases: Option<String>,
    },
    /// Conjugacy knots between --map (f) and --other (g), f o h = h o g
    Conjugacy {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        other: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        scales: Option<String>,
    },
    /// Invariant measure, dual cylinder masses, Gibbs and Radon-Nikodym checks
    Measure {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        cesaro_terms: Option<u32>,
        /// Number of sampled words in the Radon-Nikodym report
        #[arg(long)]
        samples: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Cylinder and Rohlin entropies
    Entropy {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Multiplier, theta knots, linear model, and reconstruction check
    LinearModel {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<u32>,
        /// Knot range [0, d^K]
        #[arg(long)]
        range: Option<u32>,
    },
    /// Beltrami field of a Beurling-Ahlfors extension
    BaField {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        other: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
        /// Named line map instead of a conjugacy: identity | two-slope | affine:a=..,b=..
        #[arg(long)]
        line: Option<String>,
        /// Heights y, comma separated
        #[arg(long)]
        ys: Option<String>,
        /// Number of x samples on [0, 1)
        #[arg(long)]
        xs: Option<u32>,
    },
    /// Rohlin entropy of the smooth Lebesgue-preserving family over s
    EntropyScanFs {
        /// Breakpoints, comma separated
        #[arg(long)]
        s: Option<String>,
        /// Bump ceiling M
        #[arg(long = "M")]
        m_bound: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Maximum-metric distance between the dual derivatives of two maps
    Dmax {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        other: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::MapReport { .. } => "map-report",
            Command::DualDeriv { .. } => "dual-deriv",
            Command::CheckConditions { .. } => "check-conditions",
            Command::Conjugacy { .. } => "conjugacy",
            Command::Measure { .. } => "measure",
            Command::Entropy { .. } => "entropy",
            Command::LinearModel { .. } => "linear-model",
            Command::BaField { .. } => "ba-field",
            Command::EntropyScanFs { .. } => "entropy-scan-fs",
            Command::Dmax { .. } => "dmax",
        }
    }
}

struct Resolver {
    cfg: Config,
    command: &'static str,
}

impl Resolver {
    fn lookup(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.cfg.get(&format!("{}.{key}", self.command)).map(str::to_string))
            .or_else(|| self.cfg.get(&format!("run.{key}")).map(str::to_string))
    }

    fn required_map(&self, flag: Option<String>, key: &str) -> Result<LiftMap> {
        let spec = self
            .lookup(key, flag)
            .ok_or_else(|| anyhow!("missing --{key} (or a `{key}` config binding)"))?;
        config::parse_map_spec(&spec)
    }

    fn u32_or(&self, key: &str, flag: Option<u32>, default: u32) -> Result<u32> {
        match self.lookup(key, flag.map(|v| v.to_string())) {
            Some(s) => Ok(s.parse()?),
            None => Ok(default),
        }
    }

    fn u64_or(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        match self.lookup(key, flag.map(|v| v.to_string())) {
            Some(s) => Ok(s.parse()?),
            None => Ok(default),
        }
    }

    fn usize_or(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        match self.lookup(key, flag.map(|v| v.to_string())) {
            Some(s) => Ok(s.parse()?),
            None => Ok(default),
        }
    }

    fn f64_or(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        match self.lookup(key, flag.map(|v| v.to_string())) {
            Some(s) => Ok(s.parse()?),
            None => Ok(default),
        }
    }

    fn f64_list_or(&self, key: &str, flag: Option<String>, default: &[f64]) -> Result<Vec<f64>> {
        match self.lookup(key, flag) {
            Some(s) => config::parse_f64_list(&s),
            None => Ok(default.to_vec()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };
    let command = cli.command.name();
    let resolver = Resolver { cfg, command };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| resolver.lookup("out_dir", None).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let reporter = match Reporter::new(&out_dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    match run(&cli, &resolver, &reporter) {
        Ok((config_echo, results)) => {
            let summary = Reporter::envelope(command, config_echo, results);
            if let Err(e) = reporter.write_summary(&summary) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if let Some(pin) = &cli.pin {
                if let Err(e) = report::pin(pin, &summary, cli.pin_tol) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            if let Some(golden) = &cli.verify {
                if let Err(e) = report::verify(golden, &summary) {
                    eprintln!("{e:#}");
                    return ExitCode::from(1);
                }
                println!("verify: OK against {}", golden.display());
            }
            println!("wrote {}", out_dir.join("summary.json").display());
            ExitCode::SUCCESS
        }
        Err(e) if commands::is_nonconvergence(&e) => {
            // diagnostic report still gets written
            let summary = Reporter::envelope(command, json!({}), json!({"error": format!("{e:#}")}));
            let _ = reporter.write_summary(&summary);
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, r: &Resolver, rep: &Reporter) -> Result<(serde_json::Value, serde_json::Value)> {
    match &cli.command {
        Command::MapReport { map, depth, scales } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 8)?;
            let scales = r.f64_list_or("scales", scales.clone(), &[0.5, 0.25, 0.1, 0.05])?;
            let echo = json!({"map": m.kind_name(), "depth": depth, "scales": scales});
            Ok((echo, commands::map_report(rep, &m, depth, &scales)?))
        }
        Command::DualDeriv { map, depth, word, tol } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 10)?;
            let tol = r.f64_or("tol", *tol, 1e-10)?;
            let word = r.lookup("word", word.clone());
            let echo = json!({"map": m.kind_name(), "depth": depth, "tol": tol, "word": word});
            Ok((echo, commands::dual_deriv(rep, &m, depth, word.as_deref(), tol)?))
        }
        Command::CheckConditions { map, depth, terms, bases } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 12)?;
            let terms = r.u32_or("terms", *terms, 8)?;
            let bases = r.lookup("bases", bases.clone());
            let echo = json!({"map": m.kind_name(), "depth": depth, "terms": terms});
            Ok((echo, commands::check_conditions(rep, &m, depth, terms, bases.as_deref())?))
        }
        Command::Conjugacy { map, other, depth, scales } => {
            let f = r.required_map(map.map.clone(), "map")?;
            let g = r.required_map(other.clone(), "other")?;
            let depth = r.u32_or("depth", *depth, 10)?;
            let scales = r.f64_list_or("scales", scales.clone(), &[0.5, 0.25, 0.125, 0.0625])?;
            let echo = json!({"map": f.kind_name(), "other": g.kind_name(), "depth": depth});
            Ok((echo, commands::conjugacy_cmd(rep, &f, &g, depth, &scales)?))
        }
        Command::Measure { map, depth, grid, cesaro_terms, samples, seed, tol } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 10)?;
            let grid = r.usize_or("grid", *grid, 1 << 14)?;
            let cesaro_terms = r.u32_or("cesaro_terms", *cesaro_terms, 10)?;
            let samples = r.u32_or("samples", *samples, 20)?;
            let seed = r.u64_or("seed", *seed, 1)?;
            let tol = r.f64_or("tol", *tol, 1e-11)?;
            let echo = json!({
                "map": m.kind_name(), "depth": depth, "grid": grid,
                "cesaro_terms": cesaro_terms, "samples": samples, "seed": seed, "tol": tol,
            });
            Ok((echo, commands::measure_cmd(rep, &m, depth, grid, cesaro_terms, samples, seed, tol)?))
        }
        Command::Entropy { map, depth, grid, tol } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 12)?;
            let grid = r.usize_or("grid", *grid, 1 << 14)?;
            let tol = r.f64_or("tol", *tol, 1e-11)?;
            let echo = json!({"map": m.kind_name(), "depth": depth, "grid": grid, "tol": tol});
            Ok((echo, commands::entropy_cmd(rep, &m, depth, grid, tol)?))
        }
        Command::LinearModel { map, depth, range } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let depth = r.u32_or("depth", *depth, 14)?;
            let range = r.u32_or("range", *range, 2)?;
            let echo = json!({"map": m.kind_name(), "depth": depth, "range": range});
            Ok((echo, commands::linear_model_cmd(rep, &m, depth, range)?))
        }
        Command::BaField { map, other, depth, line, ys, xs } => {
            let line_name = r.lookup("line", line.clone());
            let depth = r.u32_or("depth", *depth, 10)?;
            let f = match &map.map {
                Some(_) => Some(r.required_map(map.map.clone(), "map")?),
                None => None,
            };
            let g = match other {
                Some(_) => Some(r.required_map(other.clone(), "other")?),
                None => None,
            };
            let (lm, label) = commands::resolve_line_map(line_name.as_deref(), f.as_ref(), g.as_ref(), depth)?;
            let ys = r.f64_list_or("ys", ys.clone(), &[0.1, 0.05, 0.02, 0.01])?;
            let xs = r.u32_or("xs", *xs, 64)?;
            let echo = json!({"line": label, "ys": ys, "xs": xs, "depth": depth});
            Ok((echo, commands::ba_field(rep, &lm, &label, &ys, xs)?))
        }
        Command::EntropyScanFs { s, m_bound, grid, tol } => {
            let s_values = r.f64_list_or("s", s.clone(), &[0.5, 0.7, 0.9, 0.97])?;
            let m_bound = r.f64_or("M", *m_bound, 4.0)?;
            let grid = r.usize_or("grid", *grid, 1 << 13)?;
            let tol = r.f64_or("tol", *tol, 1e-10)?;
            let echo = json!({"s": s_values, "M": m_bound, "grid": grid, "tol": tol});
            Ok((echo, commands::entropy_scan_fs(rep, &s_values, m_bound, grid, tol)?))
        }
        Command::Dmax { map, other, depth } => {
            let m = r.required_map(map.map.clone(), "map")?;
            let g = r.required_map(other.clone(), "other")?;
            let depth = r.u32_or("depth", *depth, 8)?;
            let echo = json!({"map": m.kind_name(), "other": g.kind_name(), "depth": depth});
            Ok((echo, commands::dmax_cmd(&m, &g, depth)?))
        }
    }
}
