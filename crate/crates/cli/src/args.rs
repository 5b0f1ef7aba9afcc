use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "wvqkd", version, about = "Security analysis of weak-measurement QKD")]
pub struct Cli {
    pub command: Command,

    /// Noise range lo:hi:step (or a single value)
    #[arg(long)]
    pub eta: Option<String>,

    /// Interaction strength(s), comma separated
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,

    /// Pointer width
    #[arg(long)]
    pub delta: Option<f64>,

    /// Bin centre(s), comma separated
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Bin width (default 0.1 δ)
    #[arg(long)]
    pub bin_width: Option<f64>,

    #[arg(long, value_enum)]
    pub regime: Option<RegimeChoice>,

    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Also write an SVG plot next to the output file
    #[arg(long)]
    pub plot: bool,

    /// Monte Carlo seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo rounds
    #[arg(long)]
    pub rounds: Option<u64>,

    /// JSON file with defaults for any of the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Log more (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Scan,
    Tolerance,
    Discriminate,
    Compare,
    Montecarlo,
    Qber,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Tolerance => "tolerance",
            Command::Discriminate => "discriminate",
            Command::Compare => "compare",
            Command::Montecarlo => "montecarlo",
            Command::Qber => "qber",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    Wma,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum EtaSpec {
    Text(String),
    Value(f64),
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eta: Option<EtaSpec>,
    gamma: Option<OneOrMany>,
    delta: Option<f64>,
    alpha: Option<OneOrMany>,
    bin_width: Option<f64>,
    regime: Option<RegimeChoice>,
    out: Option<PathBuf>,
    format: Option<Format>,
    plot: Option<bool>,
    seed: Option<u64>,
    rounds: Option<u64>,
}

fn load_config(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `lo:hi:step` with `0 ≤ lo ≤ hi ≤ ½`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl EtaRange {
    pub fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::Usage(format!("--eta expects lo:hi:step or a single value, got {s:?}"));
        let parts: Vec<f64> =
            s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<CliResult<_>>()?;
        let range = match parts.as_slice() {
            [v] => Self { lo: *v, hi: *v, step: 1.0 },
            [lo, hi, step] => Self { lo: *lo, hi: *hi, step: *step },
            _ => return Err(bad()),
        };
        range.validate()?;
        Ok(range)
    }

    fn validate(&self) -> CliResult<()> {
        if !(0.0 <= self.lo && self.lo <= self.hi && self.hi <= 0.5) {
            return Err(CliError::Usage(format!(
                "eta range must satisfy 0 ≤ lo ≤ hi ≤ 0.5, got {}:{}",
                self.lo, self.hi
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Usage(format!("eta step must be > 0, got {}", self.step)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| (self.lo + k as f64 * self.step).min(self.hi)).collect()
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub eta: Option<EtaRange>,
    pub gammas: Vec<f64>,
    pub delta: f64,
    pub alphas: Option<Vec<f64>>,
    pub bin_width: Option<f64>,
    pub regime: RegimeChoice,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub plot: bool,
    pub seed: u64,
    pub rounds: Option<u64>,
}

pub const DEFAULT_SEED: u64 = 42;

impl RunConfig {
    /// Merges the config file (if any) under the command-line flags.
    pub fn resolve(cli: Cli) -> CliResult<Self> {
        let file = match &cli.config {
            Some(p) => load_config(p)?,
            None => FileConfig::default(),
        };
        let eta = match (cli.eta, file.eta) {
            (Some(s), _) | (None, Some(EtaSpec::Text(s))) => Some(EtaRange::parse(&s)?),
            (None, Some(EtaSpec::Value(v))) => Some(EtaRange::parse(&v.to_string())?),
            (None, None) => None,
        };
        let gammas = cli.gamma.or(file.gamma.map(OneOrMany::into_vec)).unwrap_or_else(|| vec![0.1]);
        let alphas = cli.alpha.or(file.alpha.map(OneOrMany::into_vec));
        if gammas.is_empty() || alphas.as_ref().is_some_and(|a| a.is_empty()) {
            return Err(CliError::Usage("--gamma and --alpha need at least one value".into()));
        }
        Ok(Self {
            command: cli.command,
            eta,
            gammas,
            delta: cli.delta.or(file.delta).unwrap_or(1.0),
            alphas,
            bin_width: cli.bin_width.or(file.bin_width),
            regime: cli.regime.or(file.regime).unwrap_or(RegimeChoice::Both),
            out: cli.out.or(file.out),
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
            plot: cli.plot || file.plot.unwrap_or(false),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            rounds: cli.rounds.or(file.rounds),
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width.unwrap_or(0.1 * self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_ranges() {
        let r = EtaRange::parse("0:0.5:0.005").unwrap();
        let v = r.values();
        assert_eq!(v.len(), 101);
        assert_eq!(*v.last().unwrap(), 0.5);
        assert_eq!(EtaRange::parse("0.2:0.2:0.01").unwrap().values(), vec![0.2]);
        assert_eq!(EtaRange::parse("0.1").unwrap().values(), vec![0.1]);
        assert!(EtaRange::parse("0.3:0.2:0.01").is_err());
        assert!(EtaRange::parse("0:0.6:0.1").is_err());
        assert!(EtaRange::parse("0:0.5:0").is_err());
        assert!(EtaRange::parse("a:b").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"gamma": 0.2, "alpha": [10, 20], "delta": 2.0, "eta": "0:0.1:0.05"}"#).unwrap();
        let cli = Cli::parse_from(["wvqkd", "scan", "--config", path.to_str().unwrap(), "--alpha", "30"]);
        let cfg = RunConfig::resolve(cli).unwrap();
        assert_eq!(cfg.gammas, vec![0.2]);
        assert_eq!(cfg.alphas, Some(vec![30.0]));
        assert_eq!(cfg.delta, 2.0);
        assert_eq!(cfg.eta.unwrap().values().len(), 3);
        assert!((cfg.bin_width() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"gama": 0.2}"#).unwrap();
        let cli = Cli::parse_from(["wvqkd", "scan", "--config", path.to_str().unwrap()]);
        assert!(matches!(RunConfig::resolve(cli), Err(CliError::Usage(_))));
    }
}
