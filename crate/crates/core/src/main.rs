use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use spectrum_auction::harness::{
    audit_truthfulness, derive_seed, generate_instance, generate_values, measure_psi, report,
    welfare_experiment, AuditConfig, AuditReport, GeneratorSpec, WelfareConfig, MIN_DEVIATIONS,
};
use spectrum_auction::mechanism::{run_mechanism_seeded, BidProfile, DEFAULT_EPSILON};
use spectrum_auction::model::{check_feasible, EnvironmentKind, Instance, DEFAULT_TOLERANCE};
use spectrum_auction::oracle::{brute_force_max_welfare, OracleLimits};
use spectrum_auction::packing::{Packer, PackerSpec};
use spectrum_auction::Error;

#[derive(Parser)]
#[command(
    name = "spectrum-auction",
    version,
    about = "Truthful random-sampling spectrum auctions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run the mechanism once and print the outcome.
    Run(RunArgs),
    /// Check that no bidder gains by misreporting.
    Audit(AuditArgs),
    /// Monte Carlo welfare and revenue experiment.
    Bench(BenchArgs),
    /// Compare a packer's winner count to the exact optimum.
    Psi(PsiArgs),
    /// Solve an instance exactly.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct GenParams {
    /// sinr-power-control, sinr-fixed-power, conflict-graph or secondary-network
    #[arg(long, default_value = "sinr-power-control", value_parser = parse_kind)]
    env: EnvironmentKind,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 100.0)]
    area: f64,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
}

impl GenParams {
    fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            alpha: self.alpha,
            beta: self.beta,
            noise: self.noise,
            area: self.area,
            density: self.density,
            ..GeneratorSpec::new(self.env, self.n, self.k)
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    params: GenParams,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// pc, conflict, fixed-power, secondary, oracle or extend:<packer>
    #[arg(long, value_parser = parse_packer)]
    packer: Option<PackerSpec>,
    /// Bids as a comma-separated list or a path to a JSON array; drawn from the seed if absent.
    #[arg(long)]
    bids: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Tapes per instance.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = MIN_DEVIATIONS)]
    deviations: usize,
    /// Without --instance, audit this many generated instances.
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[command(flatten)]
    params: GenParams,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Compare against the exact optimum.
    #[arg(long)]
    oracle: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsiArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_packer)]
    packer: Option<PackerSpec>,
    /// Without --instance, measure on this many generated instances.
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[command(flatten)]
    params: GenParams,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Bids as for `run`; unit bids (maximum winner count) if absent.
    #[arg(long)]
    bids: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<EnvironmentKind, String> {
    EnvironmentKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown environment '{s}'"))
}

fn parse_packer(s: &str) -> std::result::Result<PackerSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::from_json(&text)?)
}

fn require_instance(common: &Common) -> Result<Instance> {
    let path = common
        .instance
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--instance is required".into()))?;
    load_instance(path)
}

fn load_bids(arg: Option<&str>, n: usize, seed: u64) -> Result<Vec<f64>> {
    let Some(arg) = arg else {
        return Ok(generate_values(n, seed));
    };
    let bids: Vec<f64> = if Path::new(arg).is_file() {
        serde_json::from_str(&fs::read_to_string(arg)?)?
    } else {
        arg.split(',')
            .map(|b| b.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad bid list '{arg}': {e}")))?
    };
    if bids.len() != n {
        return Err(Error::InvalidInput(format!("{} bids for {n} bidders", bids.len())).into());
    }
    Ok(BidProfile::new(bids)?.into_inner())
}

fn build_packer(spec: Option<&PackerSpec>, instance: &Instance) -> Result<Box<dyn Packer>> {
    let spec = spec
        .cloned()
        .unwrap_or_else(|| PackerSpec::default_for(instance.kind()));
    let packer = spec.build();
    if !packer.supports(instance.kind()) {
        return Err(Error::InvalidInput(format!(
            "packer {spec} does not support {}",
            instance.kind()
        ))
        .into());
    }
    Ok(packer)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn out_dir(out: Option<&Path>) -> Result<Option<&Path>> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(out)
}

fn gen(args: GenArgs) -> Result<bool> {
    let instance = generate_instance(&args.params.spec(), args.seed)?;
    write_output(args.out.as_deref(), &(instance.to_json()? + "\n"))?;
    Ok(true)
}

fn run(args: RunArgs) -> Result<bool> {
    let c = &args.common;
    let instance = require_instance(c)?;
    let bids = load_bids(c.bids.as_deref(), instance.num_bidders(), c.seed)?;
    let packer = build_packer(c.packer.as_ref(), &instance)?;
    let outcome = run_mechanism_seeded(
        &instance,
        &BidProfile::new(bids.clone())?,
        c.epsilon,
        packer.as_ref(),
        c.seed,
    )?;
    let feasible = check_feasible(&instance, &outcome.allocation, DEFAULT_TOLERANCE)?.is_feasible();
    let rational = outcome.payments.iter().zip(&bids).all(|(p, b)| p <= b);
    write_output(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&outcome)? + "\n"),
    )?;
    if !feasible {
        eprintln!("outcome is infeasible");
    }
    if !rational {
        eprintln!("a payment exceeds its bid");
    }
    Ok(feasible && rational)
}

fn audit(args: AuditArgs) -> Result<bool> {
    let c = &args.common;
    let config = |seed| AuditConfig {
        epsilon: c.epsilon,
        tapes: args.trials,
        deviations: args.deviations,
        seed,
    };
    let report = if c.instance.is_some() {
        let instance = require_instance(c)?;
        let values = load_bids(c.bids.as_deref(), instance.num_bidders(), c.seed)?;
        let packer = build_packer(c.packer.as_ref(), &instance)?;
        audit_truthfulness(&instance, &values, packer.as_ref(), &config(c.seed))?
    } else {
        let spec = args.params.spec();
        let reports: Vec<AuditReport> = (0..args.count as u64)
            .into_par_iter()
            .map(|i| -> Result<AuditReport> {
                let seed = derive_seed(c.seed, i);
                let instance = generate_instance(&spec, seed)?;
                let values = generate_values(instance.num_bidders(), seed);
                let packer = build_packer(c.packer.as_ref(), &instance)?;
                Ok(audit_truthfulness(
                    &instance,
                    &values,
                    packer.as_ref(),
                    &config(seed),
                )?)
            })
            .collect::<Result<_>>()?;
        reports
            .into_iter()
            .fold(AuditReport::default(), |mut acc, r| {
                acc.merge(r);
                acc
            })
    };
    let summary = report::audit_summary(&report);
    print!("{summary}");
    if let Some(dir) = out_dir(args.out.as_deref())? {
        report::write_text(&dir.join("audit_summary.txt"), &summary)?;
        report::write_csv(&dir.join("audit_entries.csv"), &report.entries)?;
        report::write_csv(&dir.join("audit_violations.csv"), &report.violations)?;
    }
    Ok(report.passed())
}

fn bench(args: BenchArgs) -> Result<bool> {
    let c = &args.common;
    let instance = require_instance(c)?;
    let values = load_bids(c.bids.as_deref(), instance.num_bidders(), c.seed)?;
    let packer = build_packer(c.packer.as_ref(), &instance)?;
    let config = WelfareConfig {
        epsilon: c.epsilon,
        trials: args.trials,
        seed: c.seed,
        oracle: args.oracle,
    };
    let (stats, trials) = welfare_experiment(&instance, &values, packer.as_ref(), &config)?;
    let summary = report::welfare_summary(&stats);
    print!("{summary}");
    if let Some(dir) = out_dir(args.out.as_deref())? {
        report::write_text(&dir.join("bench_summary.txt"), &summary)?;
        report::write_text(
            &dir.join("bench_stats.json"),
            &(serde_json::to_string_pretty(&stats)? + "\n"),
        )?;
        report::write_csv(&dir.join("bench_trials.csv"), &trials)?;
        let welfare: Vec<f64> = trials.iter().map(|t| t.welfare).collect();
        let svg = report::line_chart(
            "Running mean welfare",
            "welfare",
            &report::running_mean(&welfare),
            stats.floor.map(|f| (f, "floor")),
        );
        report::write_text(&dir.join("bench_welfare.svg"), &svg)?;
    }
    Ok(stats.passed())
}

fn psi(args: PsiArgs) -> Result<bool> {
    let instances = match &args.instance {
        Some(path) => vec![load_instance(path)?],
        None => {
            let spec = args.params.spec();
            (0..args.count as u64)
                .map(|i| generate_instance(&spec, derive_seed(args.seed, i)))
                .collect::<spectrum_auction::Result<_>>()?
        }
    };
    let packer = build_packer(args.packer.as_ref(), &instances[0])?;
    let table = measure_psi(packer.as_ref(), &instances, OracleLimits::default())?;
    let summary = report::psi_summary(&table);
    print!("{summary}");
    if let Some(dir) = out_dir(args.out.as_deref())? {
        report::write_text(&dir.join("psi_summary.txt"), &summary)?;
        report::write_csv(&dir.join("psi_table.csv"), &table.rows)?;
        let ratios: Vec<f64> = table.rows.iter().map(|r| r.ratio).collect();
        let svg = report::line_chart(
            "Packer size over optimum",
            "ratio",
            &ratios,
            table.advertised.map(|p| (p, "advertised psi")),
        );
        report::write_text(&dir.join("psi_ratios.svg"), &svg)?;
    }
    Ok(table.passed())
}

fn oracle(args: OracleArgs) -> Result<bool> {
    let instance = load_instance(&args.instance)?;
    let n = instance.num_bidders();
    let bids = match args.bids.as_deref() {
        Some(b) => load_bids(Some(b), n, 0)?,
        None => vec![1.0; n],
    };
    let result = brute_force_max_welfare(&instance, &bids, OracleLimits::default())?;
    write_output(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&result)? + "\n"),
    )?;
    Ok(true)
}

fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<Error>()
            .is_some_and(|e| e.is_input_error() || matches!(e, Error::Io(_)))
            || cause.is::<std::io::Error>()
            || cause.is::<serde_json::Error>()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Audit(a) => audit(a),
        Command::Bench(a) => bench(a),
        Command::Psi(a) => psi(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_input_error(&err) { 2 } else { 1 })
        }
    }
}
