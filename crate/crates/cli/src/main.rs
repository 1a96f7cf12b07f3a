//! `stockrank` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 configuration or usage
//! error.

mod config;
mod score;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stockrank::backtest::{run_backtest, BacktestReport, PeriodStatus};
use stockrank::panel::Panel;
use stockrank::par;
use stockrank::synth::generate_panel;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "stockrank", version, about = "Cross-sectional stock ranking backtests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel CSV and its ground-truth JSON.
    Synth {
        /// Run config holding a `synth` section.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (receives panel.csv and ground_truth.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the configured seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Run a walk-forward backtest and write the report and predictions.
    Backtest {
        /// Run config holding a `pipeline` section.
        #[arg(long)]
        config: PathBuf,
        /// Challenge-format panel CSV; defaults to the config's `data`, or
        /// else a panel generated from its `synth` section.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory (report.json, report.csv, predictions/).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core. Output does not depend on it.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Replace the seed of a generated panel.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Score a prediction CSV against a truth CSV; prints JSON.
    Score {
        /// CSV with period_label, obs_id, score.
        #[arg(long)]
        pred: PathBuf,
        /// CSV with period_label, obs_id and target (or Norm_Ret_F6M; rows
        /// with Train=1 are ignored).
        #[arg(long)]
        truth: PathBuf,
    },
    /// Re-render a report JSON as CSV tables and plot-ready series.
    Report {
        /// Report JSON written by `backtest`.
        #[arg(long)]
        data: PathBuf,
        /// Output directory (report.csv, series.csv).
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { config, out, seed_override } => cmd_synth(&config, out, seed_override),
        Command::Backtest { config, data, out, jobs, seed_override } => cmd_backtest(&config, data, out, jobs, seed_override),
        Command::Score { pred, truth } => cmd_score(&pred, &truth),
        Command::Report { data, out } => cmd_report(&data, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| config.out.clone())
        .ok_or_else(|| Failure::Usage("no output directory: pass --out or set `out`".into()))?;
    fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::load(path).map_err(Failure::Usage)
}

fn cmd_synth(config_path: &Path, out: Option<PathBuf>, seed_override: Option<u64>) -> Result<(), Failure> {
    let config = load_config(config_path)?;
    let mut synth = config.synth.clone().ok_or_else(|| Failure::Usage("config has no `synth` section".into()))?;
    if let Some(seed) = seed_override {
        synth.seed = seed;
    }
    let (panel, truth) = generate_panel(&synth).map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = out_dir(out, &config)?;
    let mut csv = Vec::new();
    panel.write_csv(&mut csv).map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&dir.join("panel.csv"), csv)?;
    let mut json = serde_json::to_string_pretty(&truth).expect("ground truth serializes");
    json.push('\n');
    write(&dir.join("ground_truth.json"), json)
}

fn cmd_backtest(
    config_path: &Path,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    jobs: usize,
    seed_override: Option<u64>,
) -> Result<(), Failure> {
    let config = load_config(config_path)?;
    let spec = config.pipeline.clone().ok_or_else(|| Failure::Usage("config has no `pipeline` section".into()))?;
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let panel = match data.or_else(|| config.data.clone()) {
        Some(path) => Panel::load_csv(&path, config.column_schema())
            .map_err(|e| Failure::Runtime(format!("cannot load {}: {e}", path.display())))?,
        None => {
            let mut synth = config
                .synth
                .clone()
                .ok_or_else(|| Failure::Usage("no data: pass --data or set `data` or `synth`".into()))?;
            if let Some(seed) = seed_override {
                synth.seed = seed;
            }
            generate_panel(&synth).map_err(|e| Failure::Usage(e.to_string()))?.0
        }
    };
    let dir = out_dir(out, &config)?;
    let output = par::with_jobs(jobs, || run_backtest(&panel, &spec)).map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&dir.join("report.json"), output.report.to_json())?;
    write(&dir.join("report.csv"), output.report.to_csv())?;
    let pred_dir = dir.join("predictions");
    fs::create_dir_all(&pred_dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", pred_dir.display())))?;
    for p in &output.predictions {
        write(&pred_dir.join(format!("{}.csv", p.period)), p.to_csv())?;
    }
    if output.report.n_succeeded() == 0 {
        return Err(Failure::Runtime("every evaluated period failed; see report.json".into()));
    }
    Ok(())
}

fn cmd_score(pred: &Path, truth: &Path) -> Result<(), Failure> {
    let summary = score::score_files(pred, truth).map_err(Failure::Usage)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn cmd_report(data: &Path, out: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(data).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", data.display())))?;
    let report = BacktestReport::from_json(&text).map_err(|e| Failure::Usage(format!("{} is not a report: {e}", data.display())))?;
    fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;
    write(&out.join("report.csv"), report.to_csv())?;
    write(&out.join("series.csv"), series_csv(&report))
}

/// `ordinal,period,spearman,ndcg,combined,cumulative_spearman` for scored
/// periods.
fn series_csv(report: &BacktestReport) -> String {
    let mut out = String::from("ordinal,period,spearman,ndcg,combined,cumulative_spearman\n");
    let (mut sum, mut n) = (0.0, 0usize);
    for r in report.records.iter().filter(|r| r.status == PeriodStatus::Scored) {
        let (Some(s), Some(g), Some(c)) = (r.spearman, r.ndcg, r.combined) else { continue };
        sum += s;
        n += 1;
        out.push_str(&format!("{},{},{s},{g},{c},{}\n", r.ordinal, r.period, sum / n as f64));
    }
    out
}
