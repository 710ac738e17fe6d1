//! `prefixtomo`: verification, budget sweeps, single-point runs and bound
//! tables for the prefix/tree family.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prefixtomo::analysis::{budget_formulas, separation_shapes};
use prefixtomo::harness::{
    budget_curve_with_progress, emit_outputs, estimate_success, verify_all, AdaptiveAllocation,
    BudgetCurve, ExperimentConfig, Protocol, ORACLE_MAX_N,
};
use prefixtomo::protocols::theorem1_stage_budget;
use prefixtomo::{BasisString, CoefficientProfile};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<prefixtomo::Error> for CliError {
    fn from(e: prefixtomo::Error) -> Self {
        match e {
            prefixtomo::Error::Io { .. } | prefixtomo::Error::Csv { .. } => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "prefixtomo", version, about = "Prefix/tree family simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-check closed forms against the dense oracle and the sampler.
    Verify {
        /// Largest qubit count checked against the dense oracle.
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Minimal-budget sweep over n, with fits, CSV, SVG and metadata.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated protocols.
        #[arg(long, value_delimiter = ',')]
        protocol: Option<Vec<Protocol>>,
        /// Comma-separated qubit counts.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success rate of one protocol at one total shot budget.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        protocol: Option<Protocol>,
        #[arg(long)]
        n: usize,
        /// Total shots. Adaptive runs use the largest knob that fits.
        #[arg(long)]
        budget: u64,
    },
    /// Stage budgets and closed-form budget shapes; no sampling.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale adaptive stages by the per-stage bound instead of equal `m`.
    #[arg(long)]
    theorem1_allocation: bool,
    /// Pin the hidden string instead of drawing one per trial.
    #[arg(long)]
    hidden: Option<BasisString>,
}

impl CommonArgs {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.epsilon {
            config.epsilon = v;
        }
        if let Some(v) = self.eta {
            config.eta = v;
        }
        if let Some(v) = self.threshold {
            config.success_threshold = v;
        }
        if let Some(v) = self.trials {
            config.trials_per_point = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if self.theorem1_allocation {
            config.adaptive_allocation = AdaptiveAllocation::Theorem1;
        }
        if let Some(h) = &self.hidden {
            config.fixed_hidden = Some(h.clone());
        }
        Ok(config)
    }
}

fn print_json(value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn verify(max_n: usize, seed: u64) -> CliResult<()> {
    if max_n == 0 || max_n > ORACLE_MAX_N {
        return Err(CliError::Config(format!("--max-n must lie in 1..={ORACLE_MAX_N}")));
    }
    let report = verify_all(max_n, seed)?;
    print_json(&json!(report))?;
    let c = report.counts;
    eprintln!(
        "verify: {} pass, {} fail, {} flagged, {} skipped",
        c.pass, c.fail, c.flagged, c.skipped
    );
    for f in report.failures() {
        eprintln!("FAIL {} (n = {:?}): {}", f.name, f.n, f.detail);
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(c.fail))
    }
}

fn sweep(
    common: &CommonArgs,
    protocols: Option<Vec<Protocol>>,
    n_list: Option<Vec<usize>>,
    out: &Path,
) -> CliResult<()> {
    let base = common.load()?;
    let protocols = protocols.unwrap_or_else(|| vec![base.protocol]);
    let mut curves: Vec<BudgetCurve> = Vec::new();
    for protocol in protocols {
        let mut config = ExperimentConfig {
            protocol,
            ..base.clone()
        };
        if let Some(ns) = &n_list {
            config.n_values = Some(ns.clone());
        }
        if !protocol.is_adaptive() {
            let requested = config.n_values();
            let (kept, dropped): (Vec<usize>, Vec<usize>) =
                requested.into_iter().partition(|&n| n <= config.nonadaptive_max_n);
            if !dropped.is_empty() {
                eprintln!(
                    "{protocol}: skipping n = {dropped:?} above nonadaptive_max_n = {}",
                    config.nonadaptive_max_n
                );
            }
            config.n_values = Some(kept);
        }
        config.validate()?;
        let curve = budget_curve_with_progress(&config, |s| {
            eprintln!(
                "{protocol} n = {:>2}: budget {:>10} (knob {}, rate {:.3}, {} evaluations){}",
                s.n,
                s.chosen.budget,
                s.chosen.knob,
                s.chosen.rate,
                s.evaluations.len(),
                if s.reached { "" } else { " ceiling reached" }
            );
        })?;
        curves.push(curve);
    }
    let written = emit_outputs(&curves, &base, out)?;
    let summary: Vec<_> = curves
        .iter()
        .map(|c| {
            json!({
                "protocol": c.protocol,
                "fit": c.fit,
                "fit_error": c.fit_error,
                "monotonicity_violations": c.monotonicity_violations(),
            })
        })
        .collect();
    print_json(&json!({ "curves": summary, "files": written }))
}

/// Largest knob whose total budget fits within `budget`.
fn knob_for_budget(config: &ExperimentConfig, n: usize, budget: u64) -> CliResult<u64> {
    if !config.protocol.is_adaptive() {
        return Ok(budget);
    }
    if config.total_budget(n, 1)? > budget {
        return Err(CliError::Config(format!(
            "budget {budget} is below the minimum {} for n = {n}",
            config.total_budget(n, 1)?
        )));
    }
    let (mut lo, mut hi) = (1u64, budget.max(1));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if config.total_budget(n, mid)? <= budget {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

fn run(common: &CommonArgs, protocol: Option<Protocol>, n: usize, budget: u64) -> CliResult<()> {
    let mut config = common.load()?;
    if let Some(p) = protocol {
        config.protocol = p;
    }
    config.n_values = Some(vec![n]);
    config.validate()?;
    let knob = knob_for_budget(&config, n, budget)?;
    let estimate = estimate_success(&config, n, knob)?;
    print_json(&json!({ "protocol": config.protocol, "estimate": estimate }))
}

fn bounds(n: usize, epsilon: f64, eta: f64) -> CliResult<()> {
    let profile = CoefficientProfile::corollary(n, epsilon)?;
    let stages = (1..=n)
        .map(|k| theorem1_stage_budget(&profile, k, eta))
        .collect::<prefixtomo::Result<Vec<u64>>>()?;
    let total: u64 = 3 * stages.iter().sum::<u64>();
    print_json(&json!({
        "n": n,
        "epsilon": epsilon,
        "eta": eta,
        "alpha": profile.alpha(),
        "betas": profile.betas(),
        "stage_budgets": stages,
        "adaptive_total": total,
        "formulas": budget_formulas(&profile, eta)?,
        "separation_shapes": separation_shapes(n, epsilon, eta)?,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { max_n, seed } => verify(*max_n, *seed),
        Command::Sweep {
            common,
            protocol,
            n_list,
            out,
        } => sweep(common, protocol.clone(), n_list.clone(), out),
        Command::Run {
            common,
            protocol,
            n,
            budget,
        } => run(common, *protocol, *n, *budget),
        Command::Bounds { n, epsilon, eta } => bounds(*n, *epsilon, *eta),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
