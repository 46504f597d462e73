//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{run_analysis, AnalysisConfig, Threshold};
use crate::error::{Error, Result};
use crate::estimators::report::Method;
use crate::io::output::{emit, write_analysis, write_harmonization_log, write_sim_reports, Format};
use crate::io::{harmonize, read_gwas, SnpAction};
use crate::selection::{DEFAULT_ETA, DEFAULT_HARD_LAMBDA, DEFAULT_LAMBDA};
use crate::simulation::{oracle_efficiency_bench, run_monte_carlo, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "magic-mr", version, about = "Mediation analysis from GWAS summary statistics with rerandomized instrument selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate direct and indirect effects from three GWAS files.
    Analyze(AnalyzeArgs),
    /// Monte Carlo study of all estimators under a configured design.
    Simulate(SimArgs),
    /// Oracle MAGIC versus oracle DMVMR efficiency under an ORACLE_SPLIT design.
    OracleBench(SimArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub exposure: PathBuf,
    #[arg(long)]
    pub mediator: PathBuf,
    #[arg(long)]
    pub outcome: PathBuf,
    /// Two-sided p-value threshold for selection; converted to a z cutoff.
    #[arg(long, conflicts_with = "lambda")]
    pub p_threshold: Option<f64>,
    /// Selection cutoff on the z scale [default: 4.06].
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Seed of the selection pseudo-noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hard-threshold cutoff used by mvmr, dmvmr and twostep.
    #[arg(long, default_value_t = DEFAULT_HARD_LAMBDA)]
    pub hard_lambda: f64,
    /// Comma-separated subset of magic, plugin, mvmr, dmvmr, twostep.
    #[arg(long, value_delimiter = ',', default_value = "magic,plugin,mvmr,dmvmr,twostep")]
    pub methods: Vec<String>,
    /// Join on SNP id only; betas are used as given.
    #[arg(long)]
    pub no_harmonize: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-SNP harmonization decisions [default: <out>.harmonization.tsv when --out is set].
    #[arg(long)]
    pub harmonization_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// TOML file of simulation settings.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn analysis_config(&self) -> Result<AnalysisConfig> {
        let threshold = match (self.p_threshold, self.lambda) {
            (Some(p), None) => Threshold::PValue(p),
            (None, Some(l)) => Threshold::Lambda(l),
            (None, None) => Threshold::Lambda(DEFAULT_LAMBDA),
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give either --p-threshold or --lambda, not both".into())),
        };
        let mut methods = Vec::new();
        for m in &self.methods {
            let m = Method::parse(m)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        Ok(AnalysisConfig {
            threshold,
            eta: self.eta,
            seed: self.seed,
            hard_lambda: self.hard_lambda,
            methods,
        })
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = args.analysis_config()?;
    let exposure = read_gwas(&args.exposure)?;
    let mediator = read_gwas(&args.mediator)?;
    let outcome = read_gwas(&args.outcome)?;
    eprintln!("warning: inputs are assumed LD-clumped (independent SNPs); no clumping is performed");

    let (panel, log) = harmonize(&exposure, &mediator, &outcome, !args.no_harmonize)?;
    eprintln!(
        "harmonization: {} kept, {} flipped ({} mediator, {} outcome), dropped {} missing, {} palindromic, {} allele mismatch",
        log.count(SnpAction::Kept),
        log.count(SnpAction::Flipped),
        log.flipped_mediator(),
        log.flipped_outcome(),
        log.count(SnpAction::DroppedMissing),
        log.count(SnpAction::DroppedPalindromic),
        log.count(SnpAction::DroppedAlleleMismatch),
    );
    let log_path = args.harmonization_log.clone().or_else(|| args.out.as_deref().map(|o| sibling(o, ".harmonization.tsv")));
    if let Some(p) = &log_path {
        write_harmonization_log(p, &log)?;
    }

    let out = run_analysis(&panel, &cfg)?;
    let (nx, nm) = out.negative_varsigma;
    if nx + nm > 0 {
        eprintln!("note: {nx} exposure and {nm} mediator SNPs have negative corrected variance estimates");
    }
    emit(args.out.as_deref(), |w| write_analysis(w, &out, args.format))
}

pub fn simulate(args: &SimArgs) -> Result<()> {
    let cfg = SimConfig::from_path(&args.config)?;
    let reports = cfg.expand().iter().map(run_monte_carlo).collect::<Result<Vec<_>>>()?;
    emit(args.out.as_deref(), |w| write_sim_reports(w, &reports, args.format))
}

pub fn oracle_bench(args: &SimArgs) -> Result<()> {
    let cfg = SimConfig::from_path(&args.config)?;
    let reports = cfg.expand().iter().map(oracle_efficiency_bench).collect::<Result<Vec<_>>>()?;
    emit(args.out.as_deref(), |w| write_sim_reports(w, &reports, args.format))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::OracleBench(a) => oracle_bench(a),
    }
}

/// Single-line JSON diagnostic written to stderr on failure.
pub fn diagnostic(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "code": err.code(),
            "exit_code": err.exit_code(),
            "message": err.to_string(),
        }
    })
    .to_string()
}
