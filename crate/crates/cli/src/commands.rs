use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use wvqkd::discrimination::{helstrom_error, threshold_error, GaussianPair, ThresholdScheme};
use wvqkd::montecarlo::{validate, wma_discrepancy_probe, DiscrepancyProbe, SimConfig, ValidationReport};
use wvqkd::protocol::ProtocolParams;
use wvqkd::security::exact::{joint_prob_exact, secret_fraction_exact, tolerance_exact, wma_vs_exact_report};
use wvqkd::security::wma::{qber_wma, secret_fraction_wma, tolerance_wma};
use wvqkd::security::{Regime, SecurityReport};
use wvqkd::table::{fmt_sig, write_csv};

use crate::args::{Command, EtaRange, Format, RegimeChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::svg::{Chart, Series};

pub const SCHEMA_VERSION: u32 = 1;
const DEFAULT_ALPHAS: [f64; 7] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];
const DEFAULT_ETA: &str = "0:0.5:0.005";
const DEFAULT_MC_ETA: f64 = 0.1;
const DEFAULT_MC_ALPHA: f64 = 2.0;
const DEFAULT_MC_ROUNDS: u64 = 1_000_000;

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn num(&self) -> f64 {
        match self {
            Cell::Num(v) => *v,
            Cell::Int(v) => *v as f64,
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub schema_version: u32,
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(command: Command, columns: &[&'static str]) -> Self {
        Self { schema_version: SCHEMA_VERSION, command: command.name(), columns: columns.to_vec(), rows: Vec::new() }
    }

    fn column(&self, name: &str) -> usize {
        self.columns.iter().position(|c| *c == name).expect("known column")
    }
}

/// What a command produced.
pub enum Output {
    Table(Table),
    Json(serde_json::Value),
}

pub struct Artifacts {
    pub output: Output,
    pub chart: Option<Chart>,
    /// Set when the command ran but one of its checks failed.
    pub failure: Option<String>,
}

pub fn write_output<W: Write>(out: W, output: &Output, format: Format) -> CliResult<()> {
    match (output, format) {
        (Output::Table(t), Format::Csv) => {
            write_csv(out, &t.columns, t.rows.iter().map(|r| r.iter().map(Cell::csv).collect::<Vec<_>>()))?;
        }
        (Output::Table(t), Format::Json) => write_json(out, t)?,
        (Output::Json(v), _) => write_json(out, v)?,
    }
    Ok(())
}

fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Failed(format!("JSON encoding failed: {e}"))
        }
    })?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn run(cfg: &RunConfig) -> CliResult<Artifacts> {
    match cfg.command {
        Command::Scan => scan(cfg),
        Command::Tolerance => tolerance(cfg),
        Command::Discriminate => discriminate(cfg),
        Command::Compare => compare(cfg),
        Command::Montecarlo => montecarlo(cfg),
        Command::Qber => qber(cfg),
    }
}

fn etas(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    Ok(match cfg.eta {
        Some(r) => r.values(),
        None => EtaRange::parse(DEFAULT_ETA)?.values(),
    })
}

fn alphas(cfg: &RunConfig) -> Vec<f64> {
    cfg.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec())
}

fn regimes(cfg: &RunConfig) -> Vec<Regime> {
    match cfg.regime {
        RegimeChoice::Wma => vec![Regime::Wma],
        RegimeChoice::Exact => vec![Regime::Exact],
        RegimeChoice::Both => vec![Regime::Wma, Regime::Exact],
    }
}

/// Parameter sets in (γ, α) order.
fn param_grid(cfg: &RunConfig) -> CliResult<Vec<ProtocolParams>> {
    let mut out = Vec::new();
    for &gamma in &cfg.gammas {
        for alpha in alphas(cfg) {
            out.push(ProtocolParams::new(gamma, cfg.delta, alpha, cfg.bin_width())?);
        }
    }
    Ok(out)
}

fn report(regime: Regime, eta: f64, p: &ProtocolParams) -> wvqkd::Result<SecurityReport> {
    match regime {
        Regime::Wma => secret_fraction_wma(eta, p),
        Regime::Exact => secret_fraction_exact(eta, p),
    }
}

fn series_label(prefix: &str, p: &ProtocolParams, many_gammas: bool) -> String {
    if many_gammas {
        format!("{prefix} α={} γ={}", fmt_sig(p.alpha), fmt_sig(p.gamma))
    } else {
        format!("{prefix} α={}", fmt_sig(p.alpha))
    }
}

fn scan(cfg: &RunConfig) -> CliResult<Artifacts> {
    let etas = etas(cfg)?;
    let grid = param_grid(cfg)?;
    let mut tasks = Vec::new();
    for regime in regimes(cfg) {
        for p in &grid {
            for &eta in &etas {
                tasks.push((regime, *p, eta));
            }
        }
    }
    let reports: Vec<SecurityReport> =
        tasks.par_iter().map(|(regime, p, eta)| report(*regime, *eta, p)).collect::<wvqkd::Result<_>>()?;
    let mut table =
        Table::new(cfg.command, &["eta", "regime", "alpha", "gamma", "delta", "qber", "mi", "holevo", "f_sec"]);
    for r in &reports {
        table.rows.push(vec![
            Cell::Num(r.eta),
            Cell::Text(r.regime.to_string()),
            Cell::Num(r.params.alpha),
            Cell::Num(r.params.gamma),
            Cell::Num(r.params.delta),
            Cell::Num(r.qber),
            Cell::Num(r.mi),
            Cell::Num(r.holevo),
            Cell::Num(r.secret_fraction),
        ]);
    }
    let many = cfg.gammas.len() > 1;
    let series = reports
        .chunks(etas.len())
        .map(|chunk| Series {
            label: series_label(chunk[0].regime.as_str(), &chunk[0].params, many),
            points: chunk.iter().map(|r| (r.eta, r.secret_fraction)).collect(),
        })
        .collect();
    let chart = Chart { title: "Secret fraction".into(), x_label: "η".into(), y_label: "F_sec (bits)".into(), series };
    Ok(Artifacts { output: Output::Table(table), chart: Some(chart), failure: None })
}

fn tolerance(cfg: &RunConfig) -> CliResult<Artifacts> {
    if cfg.eta.is_some() {
        log::warn!("--eta is ignored by the tolerance search");
    }
    let grid = param_grid(cfg)?;
    let mut tasks = Vec::new();
    for regime in regimes(cfg) {
        for p in &grid {
            tasks.push((regime, *p));
        }
    }
    let results = tasks
        .iter()
        .map(|(regime, p)| match regime {
            Regime::Wma => tolerance_wma(p),
            Regime::Exact => tolerance_exact(p),
        })
        .collect::<wvqkd::Result<Vec<_>>>()?;
    let mut table =
        Table::new(cfg.command, &["regime", "alpha", "gamma", "delta", "eta_tol", "grid_step", "bisection_iterations"]);
    for t in results {
        table.rows.push(vec![
            Cell::Text(t.regime.to_string()),
            Cell::Num(t.params.alpha),
            Cell::Num(t.params.gamma),
            Cell::Num(t.params.delta),
            Cell::Num(t.eta_tol),
            Cell::Num(t.grid_step),
            Cell::Int(t.bisection_iterations as u64),
        ]);
    }
    Ok(Artifacts { output: Output::Table(table), chart: None, failure: None })
}

fn discriminate(cfg: &RunConfig) -> CliResult<Artifacts> {
    let [gamma] = cfg.gammas[..] else {
        return Err(CliError::Usage("discriminate takes a single --gamma (the separation ε)".into()));
    };
    let pair = GaussianPair::new(gamma, cfg.delta)?;
    let helstrom = helstrom_error(&pair);
    let alphas = cfg.alphas.clone().unwrap_or_else(|| (0..=100).map(|k| 0.5 * k as f64).collect());
    let mut table = Table::new(cfg.command, &["alpha", "p_err", "helstrom"]);
    for alpha in alphas {
        if !(alpha >= 0.0) {
            return Err(CliError::Usage(format!("alpha must be ≥ 0, got {alpha}")));
        }
        let scheme = ThresholdScheme { alpha, bin_width: cfg.bin_width() };
        table.rows.push(vec![Cell::Num(alpha), Cell::Num(threshold_error(&scheme, &pair)), Cell::Num(helstrom)]);
    }
    let col = |name: &str| {
        let (i, j) = (table.column("alpha"), table.column(name));
        table.rows.iter().map(|r| (r[i].num(), r[j].num())).collect::<Vec<_>>()
    };
    let chart = Chart {
        title: format!("Threshold discrimination, ε/δ² = {}", fmt_sig(gamma / (cfg.delta * cfg.delta))),
        x_label: "α".into(),
        y_label: "P_err".into(),
        series: vec![
            Series { label: "threshold".into(), points: col("p_err") },
            Series { label: "Helstrom".into(), points: col("helstrom") },
        ],
    };
    Ok(Artifacts { output: Output::Table(table), chart: Some(chart), failure: None })
}

fn compare(cfg: &RunConfig) -> CliResult<Artifacts> {
    let etas = etas(cfg)?;
    let grid = param_grid(cfg)?;
    let per_params = grid.par_iter().map(|p| wma_vs_exact_report(&etas, p)).collect::<wvqkd::Result<Vec<_>>>()?;
    let mut table =
        Table::new(cfg.command, &["eta", "alpha", "gamma", "delta", "f_wma", "f_exact", "gap", "conclusion_flips"]);
    let many = cfg.gammas.len() > 1;
    let mut series = Vec::new();
    for (p, rows) in grid.iter().zip(&per_params) {
        for r in rows {
            table.rows.push(vec![
                Cell::Num(r.eta),
                Cell::Num(p.alpha),
                Cell::Num(p.gamma),
                Cell::Num(p.delta),
                Cell::Num(r.f_wma),
                Cell::Num(r.f_exact),
                Cell::Num(r.gap),
                Cell::Bool(r.conclusion_flips),
            ]);
        }
        series.push(Series {
            label: series_label("gap", p, many),
            points: rows.iter().map(|r| (r.eta, r.gap)).collect(),
        });
    }
    let chart = Chart {
        title: "First-order minus exact secret fraction".into(),
        x_label: "η".into(),
        y_label: "gap (bits)".into(),
        series,
    };
    Ok(Artifacts { output: Output::Table(table), chart: Some(chart), failure: None })
}

fn qber(cfg: &RunConfig) -> CliResult<Artifacts> {
    let etas = etas(cfg)?;
    let grid = param_grid(cfg)?;
    let mut table = Table::new(cfg.command, &["eta", "alpha", "gamma", "delta", "qber_wma", "qber_exact"]);
    for p in &grid {
        for &eta in &etas {
            table.rows.push(vec![
                Cell::Num(eta),
                Cell::Num(p.alpha),
                Cell::Num(p.gamma),
                Cell::Num(p.delta),
                Cell::Num(qber_wma(eta, p)?),
                Cell::Num(joint_prob_exact(eta, p)?.qber()),
            ]);
        }
    }
    Ok(Artifacts { output: Output::Table(table), chart: None, failure: None })
}

#[derive(Serialize)]
struct MonteCarloOutput {
    schema_version: u32,
    command: &'static str,
    validation: ValidationReport,
    probe: DiscrepancyProbe,
    passed: bool,
}

fn montecarlo(cfg: &RunConfig) -> CliResult<Artifacts> {
    if cfg.format == Format::Csv && cfg.out.is_some() {
        log::info!("montecarlo always writes JSON");
    }
    let eta = cfg.eta.map(|r| r.lo).unwrap_or(DEFAULT_MC_ETA);
    let alpha = cfg.alphas.as_ref().map(|a| a[0]).unwrap_or(DEFAULT_MC_ALPHA);
    let params = ProtocolParams::new(cfg.gammas[0], cfg.delta, alpha, cfg.bin_width())?;
    let sim = SimConfig::new(eta, params, cfg.rounds.unwrap_or(DEFAULT_MC_ROUNDS), cfg.seed)?;
    let validation = validate(&sim)?;
    let probe = wma_discrepancy_probe(&sim)?;
    let passed = validation.passed && probe.agrees_with_exact;
    let failure = (!passed).then(|| {
        let failed: Vec<_> = validation.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        format!("validation failed: {failed:?}, oracle agrees with closed form: {}", probe.agrees_with_exact)
    });
    let out =
        MonteCarloOutput { schema_version: SCHEMA_VERSION, command: cfg.command.name(), validation, probe, passed };
    let value = serde_json::to_value(&out).map_err(|e| CliError::Failed(format!("JSON encoding failed: {e}")))?;
    Ok(Artifacts { output: Output::Json(value), chart: None, failure })
}
