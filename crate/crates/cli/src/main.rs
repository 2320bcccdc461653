//! `rmstat`: spectral statistics of random-matrix ensembles from the
//! command line. Every command is deterministic given its configuration
//! (seeds included) and produces identical output files on repeated runs.
//! The exit code is 0 only when the internal self-convergence checks pass;
//! failures emit machine-readable JSON on stderr.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{EnsembleChoice, ExperimentConfig, OutFormat, PartialConfig};

#[derive(Parser, Debug)]
#[command(
    name = "rmstat",
    about = "Distribution functions, means and variances of linear eigenvalue \
             statistics: exact finite-N kernels, Fredholm determinants of \
             sine/Bessel-kernel operators, Gaussian limit formulas, and \
             Monte Carlo cross-validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Ensemble regime driving the operators.
    #[arg(long, global = true, value_parser = parse_ensemble)]
    ensemble: Option<EnsembleChoice>,

    /// Test function id from the catalog (gaussian | cauchy | bump | zero).
    #[arg(long = "f", global = true)]
    f_id: Option<String>,

    /// Hard-edge order parameter.
    #[arg(long, global = true, allow_negative_numbers = true)]
    nu: Option<f64>,

    /// Comma-separated truncation scales.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,

    /// Comma-separated Fourier-dual parameters.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    k: Option<Vec<f64>>,

    /// Comma-separated ensemble sizes.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Monte Carlo replicate count.
    #[arg(long = "mc-replicates", global = true)]
    mc_replicates: Option<usize>,

    /// Master seed for everything stochastic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Operator quadrature grid size.
    #[arg(long = "quad-n", global = true)]
    quad_n: Option<usize>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutFormat>,

    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Emit the fully resolved configuration beside the results.
    #[arg(long, global = true)]
    manifest: bool,

    /// Trace powers to evaluate (trace-powers command).
    #[arg(long, global = true, value_delimiter = ',')]
    power: Option<Vec<u32>>,

    /// Worker threads for Monte Carlo (0 = library default).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Operator traces against the closed-form mean.
    Mean,
    /// Operator variances against both closed-form variance routes.
    Variance,
    /// Fredholm-determinant characteristic function against its Gaussian
    /// limit.
    Cf,
    /// Trace powers against the alpha-independent correction term.
    TracePowers,
    /// Product/inverse identity residuals plus exact combinatorial checks.
    Identities,
    /// Monte Carlo estimates against finite-N operator predictions.
    Montecarlo,
    /// Sup-norm distance of rescaled finite-N kernels to their limits.
    KernelConvergence,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Mean => "mean",
            Command::Variance => "variance",
            Command::Cf => "cf",
            Command::TracePowers => "trace-powers",
            Command::Identities => "identities",
            Command::Montecarlo => "montecarlo",
            Command::KernelConvergence => "kernel-convergence",
        }
    }
}

fn parse_ensemble(s: &str) -> Result<EnsembleChoice, String> {
    match s {
        "sine" => Ok(EnsembleChoice::Sine),
        "bessel" => Ok(EnsembleChoice::Bessel),
        other => Err(format!("unknown ensemble '{other}' (expected sine|bessel)")),
    }
}

fn parse_format(s: &str) -> Result<OutFormat, String> {
    match s {
        "csv" => Ok(OutFormat::Csv),
        "json" => Ok(OutFormat::Json),
        other => Err(format!("unknown format '{other}' (expected csv|json)")),
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    let cfg = ExperimentConfig {
        command: cli.command.name().to_string(),
        ensemble: cli
            .ensemble
            .or(file.ensemble)
            .unwrap_or(EnsembleChoice::Bessel),
        f_id: cli
            .f_id
            .clone()
            .or(file.f_id)
            .unwrap_or_else(|| "gaussian".to_string()),
        nu: cli.nu.or(file.nu).unwrap_or(0.0),
        alpha_list: cli
            .alpha
            .clone()
            .or(file.alpha_list)
            .unwrap_or_else(|| vec![10.0, 20.0, 40.0]),
        k_list: cli.k.clone().or(file.k_list).unwrap_or_else(|| vec![0.2]),
        n_list: cli
            .n
            .clone()
            .or(file.n_list)
            .unwrap_or_else(|| vec![25, 50, 100, 200]),
        mc_replicates: cli.mc_replicates.or(file.mc_replicates).unwrap_or(20_000),
        seed: cli.seed.or(file.seed).unwrap_or(1),
        quad_n: cli.quad_n.or(file.quad_n).unwrap_or(200),
        out_format: cli.format.or(file.out_format).unwrap_or(OutFormat::Csv),
        out_path: cli.out.clone().or(file.out_path),
        power_list: cli
            .power
            .clone()
            .or(file.power_list)
            .unwrap_or_else(|| vec![2, 3]),
        workers: cli.workers.or(file.workers).unwrap_or(0),
        manifest: cli.manifest,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(cfg: &ExperimentConfig, output: &commands::CommandOutput) -> anyhow::Result<()> {
    match &cfg.out_path {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("creating output file {}", path.display()))?;
            output.report.write(cfg.out_format, &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output.report.write(cfg.out_format, &mut lock)?;
        }
    }
    if cfg.manifest {
        let path = cfg
            .out_path
            .as_ref()
            .expect("validated: manifest requires out");
        let manifest_path = path.with_extension(match path.extension() {
            Some(ext) => format!("{}.manifest.json", ext.to_string_lossy()),
            None => "manifest.json".to_string(),
        });
        let mut file = std::fs::File::create(&manifest_path)
            .with_context(|| format!("creating manifest {}", manifest_path.display()))?;
        writeln!(file, "{}", serde_json::to_string_pretty(cfg)?)?;
    }
    Ok(())
}

fn fail(kind: &str, message: String) -> ! {
    let doc = json!({"error": {"kind": kind, "message": message}});
    eprintln!("{doc}");
    std::process::exit(1);
}

fn main() {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => fail("config", format!("{e:#}")),
    };
    let output = match commands::run(&cfg) {
        Ok(out) => out,
        Err(e) => fail("runtime", format!("{e:#}")),
    };
    if let Err(e) = write_outputs(&cfg, &output) {
        fail("io", format!("{e:#}"));
    }
    let failed: Vec<&commands::SelfCheck> =
        output.checks.iter().filter(|c| !c.passed()).collect();
    if !failed.is_empty() {
        let details: Vec<_> = failed
            .iter()
            .map(|c| {
                json!({
                    "check": c.label,
                    "fine_grid": c.fine,
                    "coarse_grid": c.coarse,
                    "tolerance": c.tolerance,
                })
            })
            .collect();
        let doc = json!({"error": {"kind": "self_convergence", "checks": details}});
        eprintln!("{doc}");
        std::process::exit(1);
    }
}
