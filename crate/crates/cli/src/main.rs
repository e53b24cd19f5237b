mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::{RunManifest, Source};
use multisteer::optimize::{
    default_triple, loss_regime_scan, optimize_reflectivity, sweep, Objective, OptimizationResult, OptimizeOptions,
    SweepParameter,
};
use multisteer::oracle::{sample, verify_state, OracleReport};
use multisteer::{
    build, collective_steering_report, inject_asymmetric_loss, random_chain_specs, tripartite_criteria, Error,
    NetworkSpec, Preset, SteeringReport, TripartiteVerdict,
};

#[derive(Parser)]
#[command(
    name = "multisteer",
    version,
    about = "Multimode Gaussian steering networks: simulate, sweep, optimise, verify"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Built-in chain network, n2 through n8
    #[arg(long, global = true, conflicts_with = "spec")]
    preset: Option<Preset>,
    /// Network spec file (JSON)
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Reflectivity override in percent, e.g. `--set VBS_12=51.1`; repeatable
    #[arg(long = "set", global = true, value_name = "NAME=PERCENT", value_parser = parse_override)]
    overrides: Vec<(String, f64)>,
    /// Asymmetric loss fraction after the first splitter
    #[arg(long, global = true)]
    loss: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Steering report of one network
    Simulate,
    /// Metric sweep of one splitter reflectivity (fraction) or of the loss
    Sweep {
        /// Splitter name or `loss`
        #[arg(long)]
        param: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
    /// Optimise one splitter reflectivity
    Optimize {
        #[arg(long, default_value = "VBS_12")]
        bs: String,
        #[arg(long, default_value = "mean-steering")]
        objective: Objective,
        #[arg(long, default_value_t = multisteer::optimize::DEFAULT_COARSE_POINTS)]
        coarse_points: usize,
        #[arg(long, default_value_t = multisteer::optimize::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Steering-regime scan over the asymmetric loss
    Regimes {
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 0.4)]
        to: f64,
        #[arg(long, default_value_t = 81)]
        steps: usize,
    },
    /// Monte Carlo check of every analytic inferred variance
    Verify {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Additional random networks drawn from the seed
        #[arg(long, default_value_t = 0)]
        random_specs: usize,
        /// Failure threshold in standard errors
        #[arg(long, default_value_t = 4.0)]
        sigmas: f64,
        /// Also write the raw sample batch of the selected network
        #[arg(long)]
        export_batch: bool,
    },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=PERCENT, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("`{value}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

#[derive(Debug)]
enum Failure {
    Verification(String),
    InvalidSpec(String),
    Unphysical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) | Failure::Io(_) => 1,
            Failure::InvalidSpec(_) => 2,
            Failure::Unphysical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::InvalidSpec(m) | Failure::Unphysical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unphysical(_) => Failure::Unphysical(e.to_string()),
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::InvalidSpec(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// The network selected by the global flags, with overrides applied.
struct Selected {
    spec: NetworkSpec,
    manifest: RunManifest,
}

fn load_spec(path: &Path) -> Outcome<NetworkSpec> {
    let text = fs::read_to_string(path).map_err(|e| Failure::InvalidSpec(format!("{}: {e}", path.display())))?;
    NetworkSpec::from_json_str(&text).map_err(|e| match Failure::from(e) {
        Failure::InvalidSpec(m) => Failure::InvalidSpec(format!("{}: {m}", path.display())),
        Failure::Unphysical(m) => Failure::Unphysical(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn select(global: &Global, command: &str) -> Outcome<Option<Selected>> {
    let (spec, source) = match (&global.preset, &global.spec) {
        (Some(p), _) => (p.spec(), Source::Preset(p.to_string())),
        (None, Some(path)) => (load_spec(path)?, Source::Spec(path.display().to_string())),
        (None, None) => return Ok(None),
    };
    let mut manifest = RunManifest::new(command, source);
    manifest.seed = global.seed;
    let mut spec = spec;
    for (name, percent) in &global.overrides {
        spec = spec.with_reflectivity(name, *percent)?;
        manifest.reflectivity_overrides_percent.insert(name.clone(), *percent);
    }
    if let Some(loss) = global.loss {
        spec = inject_asymmetric_loss(&spec, loss)?;
        manifest.loss_fraction = Some(loss);
    }
    Ok(Some(Selected { spec, manifest }))
}

fn require(selected: Option<Selected>) -> Outcome<Selected> {
    selected.ok_or_else(|| Failure::InvalidSpec("either --preset or --spec is required".into()))
}

fn write_output(dir: &Path, name: &str, contents: &str, manifest: &mut RunManifest) -> Outcome<()> {
    fs::write(dir.join(name), contents)?;
    manifest.outputs.push(name.to_string());
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Serialize)]
struct SimulateOutput {
    n_modes: usize,
    report: SteeringReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    tripartite: Option<TripartiteVerdict>,
}

fn report_csv(report: &SteeringReport) -> String {
    let mut out = String::from("mode,inferred_var_x,inferred_var_p,s,steering_number,steerable,singular\n");
    for e in &report.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.steered_mode + 1,
            e.inferred_var_x,
            e.inferred_var_p,
            e.s,
            e.steering_number,
            e.steerable,
            e.singular
        );
    }
    out
}

fn cmd_simulate(global: &Global) -> Outcome<()> {
    let Selected { spec, mut manifest } = require(select(global, "simulate")?)?;
    let built = build(&spec)?;
    let report = collective_steering_report(&built.state, &built.active_modes)?;
    let tripartite = match default_triple(&built.active_modes) {
        Some(triple) if built.active_modes.len() == 3 => Some(tripartite_criteria(&built.state, triple)?),
        _ => None,
    };
    for e in &report.entries {
        eprintln!(
            "mode {}: S^2 = {:.6}{}",
            e.steered_mode + 1,
            e.steering_number,
            if e.steerable { " (steerable)" } else { "" }
        );
    }
    match global.format.unwrap_or(Format::Json) {
        Format::Json => {
            let payload = SimulateOutput {
                n_modes: built.state.n_modes(),
                report,
                tripartite,
            };
            write_output(&global.out, "simulate.json", &to_json(&payload)?, &mut manifest)?;
        }
        Format::Csv => write_output(&global.out, "simulate.csv", &report_csv(&report), &mut manifest)?,
    }
    manifest.write(&global.out)?;
    Ok(())
}

fn cmd_sweep(global: &Global, param: &str, from: f64, to: f64, steps: usize) -> Outcome<()> {
    let Selected { spec, mut manifest } = require(select(global, "sweep")?)?;
    let parameter = SweepParameter::parse(&spec, param)?;
    let result = sweep(&spec, &parameter, from, to, steps)?;
    match global.format.unwrap_or(Format::Csv) {
        Format::Csv => write_output(&global.out, "sweep.csv", &result.to_csv(), &mut manifest)?,
        Format::Json => write_output(&global.out, "sweep.json", &to_json(&result)?, &mut manifest)?,
    }
    manifest.write(&global.out)?;
    Ok(())
}

fn optimization_csv(r: &OptimizationResult) -> String {
    format!(
        "parameter,R_star,objective_kind,objective_value,evaluations\n{},{},{},{},{}\n",
        r.parameter, r.r_star, r.objective_kind, r.objective_value, r.evaluations
    )
}

fn cmd_optimize(global: &Global, bs: &str, objective: Objective, options: OptimizeOptions) -> Outcome<()> {
    let Selected { spec, mut manifest } = require(select(global, "optimize")?)?;
    let result = optimize_reflectivity(&spec, bs, objective, options)?;
    eprintln!(
        "{}: R* = {:.5} ({} = {:.6})",
        result.parameter, result.r_star, result.objective_kind, result.objective_value
    );
    match global.format.unwrap_or(Format::Json) {
        Format::Json => write_output(&global.out, "optimize.json", &to_json(&result)?, &mut manifest)?,
        Format::Csv => write_output(&global.out, "optimize.csv", &optimization_csv(&result), &mut manifest)?,
    }
    manifest.write(&global.out)?;
    Ok(())
}

fn cmd_regimes(global: &Global, from: f64, to: f64, steps: usize) -> Outcome<()> {
    let Selected { spec, mut manifest } = require(select(global, "regimes")?)?;
    if manifest.loss_fraction.is_some() {
        return Err(Failure::InvalidSpec(
            "regimes scans the loss itself; drop --loss".into(),
        ));
    }
    let scan = loss_regime_scan(&spec, from, to, steps)?;
    eprintln!(
        "{} distinct regimes: {:?}",
        scan.distinct_regime_count, scan.regimes_visited
    );
    match global.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            write_output(&global.out, "regimes.csv", &scan.sweep.to_csv(), &mut manifest)?;
            write_output(&global.out, "transitions.csv", &scan.transitions_csv(), &mut manifest)?;
        }
        Format::Json => write_output(&global.out, "regimes.json", &to_json(&scan)?, &mut manifest)?,
    }
    manifest.write(&global.out)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifiedNetwork {
    label: String,
    report: OracleReport,
}

#[derive(Serialize)]
struct VerifyOutput {
    n_samples: usize,
    seed: u64,
    threshold_sigmas: f64,
    max_deviation_sigma: f64,
    passed: bool,
    networks: Vec<VerifiedNetwork>,
}

fn cmd_verify(global: &Global, samples: usize, random_specs: usize, sigmas: f64, export_batch: bool) -> Outcome<()> {
    let selected = select(global, "verify")?;
    if selected.is_none() && random_specs == 0 {
        return Err(Failure::InvalidSpec(
            "verify needs --preset, --spec or --random-specs".into(),
        ));
    }
    let mut manifest = match &selected {
        Some(s) => s.manifest.clone(),
        None => {
            let mut m = RunManifest::new("verify", Source::Preset("random".into()));
            m.seed = global.seed;
            m
        }
    };
    let mut targets = Vec::new();
    if let Some(s) = &selected {
        let label = match &s.manifest.source {
            Source::Preset(p) => p.clone(),
            Source::Spec(p) => p.clone(),
        };
        targets.push((label, s.spec.clone()));
    }
    for (i, spec) in random_chain_specs(global.seed, random_specs).into_iter().enumerate() {
        targets.push((format!("random[{i}]"), spec));
    }
    let mut networks = Vec::new();
    for (k, (label, spec)) in targets.into_iter().enumerate() {
        let built = build(&spec)?;
        let seed = global.seed.wrapping_add(k as u64);
        if export_batch && k == 0 {
            let batch = sample(&built.state, samples, seed)?;
            let name = "batch.bin";
            batch.write_binary(std::io::BufWriter::new(fs::File::create(global.out.join(name))?))?;
            manifest.outputs.push(name.to_string());
        }
        let report = verify_state(&built.state, &built.active_modes, samples, seed)?;
        eprintln!("{label}: max deviation {:.3} sigma", report.max_deviation_sigma);
        networks.push(VerifiedNetwork { label, report });
    }
    let max_deviation_sigma = networks
        .iter()
        .map(|n| n.report.max_deviation_sigma)
        .fold(0.0, f64::max);
    let passed = max_deviation_sigma <= sigmas;
    let payload = VerifyOutput {
        n_samples: samples,
        seed: global.seed,
        threshold_sigmas: sigmas,
        max_deviation_sigma,
        passed,
        networks,
    };
    write_output(&global.out, "verify.json", &to_json(&payload)?, &mut manifest)?;
    manifest.write(&global.out)?;
    println!("max deviation {max_deviation_sigma:.3} sigma");
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "max deviation {max_deviation_sigma:.3} sigma exceeds {sigmas} sigma"
        )))
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let global = &cli.global;
    if let Some(n) = global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    fs::create_dir_all(&global.out)?;
    match cli.command {
        Command::Simulate => cmd_simulate(global),
        Command::Sweep { param, from, to, steps } => cmd_sweep(global, &param, from, to, steps),
        Command::Optimize {
            bs,
            objective,
            coarse_points,
            tolerance,
        } => cmd_optimize(
            global,
            &bs,
            objective,
            OptimizeOptions {
                coarse_points,
                tolerance,
            },
        ),
        Command::Regimes { from, to, steps } => cmd_regimes(global, from, to, steps),
        Command::Verify {
            samples,
            random_specs,
            sigmas,
            export_batch,
        } => cmd_verify(global, samples, random_specs, sigmas, export_batch),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn override_parsing() {
        assert_eq!(parse_override("VBS_12=51.1").unwrap(), ("VBS_12".into(), 51.1));
        assert!(parse_override("VBS_12").is_err());
        assert!(parse_override("VBS_12=abc").is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::Unphysical("x".into())).code(), 3);
        let spec = Error::InvalidSpec {
            path: "inputs".into(),
            msg: "x".into(),
        };
        assert_eq!(Failure::from(spec).code(), 2);
        assert_eq!(Failure::Verification(String::new()).code(), 1);
    }
}
