use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use constellation_spares::optimizer::{self, ProblemKind};
use constellation_spares::report::{self, ErrorThresholds, RunMetadata, ValidationRow};
use constellation_spares::scenario::{ScenarioFile, ValidationSuite};
use constellation_spares::simulator::{self, SimConfig};
use constellation_spares::system::{self, SingleChannelPolicy, SystemPolicy};
use constellation_spares::Error;

#[derive(Parser, Debug)]
#[command(name = "cspares", version, about = "Spare-satellite inventory model: evaluate, simulate, validate, optimize")]
struct Cli {
    /// Seed for the simulator or the optimizer; overrides the scenario's own.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for replications and fitness evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state metrics and cost of the scenario's policy.
    Evaluate {
        scenario: PathBuf,
        /// Evaluate with the auxiliary channel removed.
        #[arg(long)]
        single_channel: bool,
        #[command(flatten)]
        overrides: PolicyOverrides,
    },
    /// Monte Carlo replications of the scenario's policy, compared with the model.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        years: Option<u32>,
        #[arg(long)]
        single_channel: bool,
    },
    /// Model-versus-simulation errors over a suite of instances.
    Validate {
        suite: PathBuf,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        years: Option<u32>,
    },
    /// Genetic-algorithm search over the scenario's problem bounds.
    Optimize {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        problem: Option<Problem>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Problem {
    Or,
    Va,
}

#[derive(Args, Debug, Default)]
struct PolicyOverrides {
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<i32>,
    #[arg(long)]
    q1: Option<u32>,
    #[arg(long)]
    q2: Option<u32>,
    #[arg(long)]
    alpha_w: Option<f64>,
    #[arg(long)]
    k_r: Option<u32>,
    #[arg(long)]
    k_q: Option<u32>,
    #[arg(long)]
    n_parking: Option<u32>,
    #[arg(long)]
    h_parking_km: Option<f64>,
    /// Holding cost per satellite-year, M$.
    #[arg(long)]
    h_s: Option<f64>,
}

impl PolicyOverrides {
    fn apply(&self, file: &mut ScenarioFile) {
        let p = &mut file.policy;
        if let Some(v) = self.r1 {
            p.r1 = v;
        }
        if self.r2.is_some() {
            p.r2 = self.r2;
        }
        if let Some(v) = self.q1 {
            p.q1 = v;
        }
        if self.q2.is_some() {
            p.q2 = self.q2;
        }
        if self.alpha_w.is_some() {
            p.alpha_w = self.alpha_w;
        }
        if let Some(v) = self.k_r {
            p.k_r = v;
        }
        if let Some(v) = self.k_q {
            p.k_q = v;
        }
        if let Some(v) = self.n_parking {
            file.parking.n_parking = v;
        }
        if let Some(v) = self.h_parking_km {
            file.parking.h_parking_km = v;
        }
        if let Some(v) = self.h_s {
            file.costs.h_s_musd_per_sat_year = v;
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(Error::Config(_)) => 2,
            CliError::Model(Error::NoFeasibleSolution { .. }) => 4,
            CliError::Model(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Output<'a> {
    dir: &'a Path,
    quiet: bool,
}

impl Output<'_> {
    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::create_dir_all(self.dir)
            .and_then(|_| std::fs::write(&path, contents))
            .map_err(|source| CliError::Io { path, source })
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> CliResult<()> {
        self.write(name, &(serde_json::to_string_pretty(value).expect("reports serialize") + "\n"))
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn single_channel(file: &ScenarioFile) -> (constellation_spares::system::ScenarioConfig, SystemPolicy) {
    let mut config = file.config();
    config.dual_channel_enabled = false;
    let p = file.policy();
    let sp = SingleChannelPolicy {
        r1: p.plane.r1,
        q1: p.plane.q1,
        parking: p.parking,
        n_parking: p.n_parking,
        h_parking_km: p.h_parking_km,
    };
    (config, sp.to_system())
}

fn print_metrics(out: &Output, m: &system::SteadyStateMetrics) {
    out.say(format!(
        "TESSAC {:.2} M$/yr (manufacturing {:.2}, launch {:.2}, maneuvering {:.2}, holding {:.2})",
        m.cost.tessac, m.cost.manufacturing, m.cost.launch, m.cost.maneuvering, m.cost.holding
    ));
    out.say(format!(
        "rho_plane {:.2}%  rho_parking {:.2}%  SL_plane {:.3}  SL_parking {:.3}  p2 {:.3}%",
        m.plane.rho_plane * 100.0,
        m.parking.rho_parking * 100.0,
        m.plane.sl_plane,
        m.parking.sl_parking,
        m.plane.p2 * 100.0
    ));
}

fn flags() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn cmd_evaluate(cli: &Cli, out: &Output, path: &Path, single: bool, overrides: &PolicyOverrides) -> CliResult<()> {
    let started = Instant::now();
    let mut file = ScenarioFile::load(path)?;
    overrides.apply(&mut file);
    file.validate()?;
    let (config, policy, metrics) = if single {
        let (config, policy) = single_channel(&file);
        let m = system::evaluate(&config, &policy)?;
        (config, policy, m)
    } else {
        let (config, policy) = (file.config(), file.policy());
        let m = system::evaluate(&config, &policy)?;
        (config, policy, m)
    };
    let mut meta = RunMetadata::new("evaluate", &path.display().to_string(), cli.seed, flags());
    meta.wall_time_s = started.elapsed().as_secs_f64();
    out.write_json(
        "evaluate.json",
        &json!({ "metadata": meta, "scenario": file, "single_channel": single, "policy": policy, "metrics": metrics }),
    )?;
    out.write("cost_breakdown.csv", &report::cost_breakdown_csv(&metrics)?)?;
    out.write("policy_table.csv", &report::policy_table_csv(&[(file.name.clone(), config, policy, metrics.clone())])?)?;
    print_metrics(out, &metrics);
    Ok(())
}

fn sim_config(base: Option<SimConfig>, seed: Option<u64>, reps: Option<u32>, years: Option<u32>) -> CliResult<SimConfig> {
    let mut sim = base.unwrap_or_default();
    if let Some(s) = seed {
        sim.master_seed = s;
    }
    if let Some(r) = reps {
        sim.replications = r;
    }
    if let Some(y) = years {
        sim.horizon_years = y;
    }
    sim.validate()?;
    Ok(sim)
}

fn cmd_simulate(
    cli: &Cli,
    out: &Output,
    path: &Path,
    reps: Option<u32>,
    years: Option<u32>,
    single: bool,
) -> CliResult<()> {
    let started = Instant::now();
    let file = ScenarioFile::load(path)?;
    let sim = sim_config(file.simulation, cli.seed, reps, years)?;
    let (config, policy) = if single { single_channel(&file) } else { (file.config(), file.policy()) };
    let stats = simulator::run(&config, &policy, &sim)?;
    let model = system::evaluate(&config, &policy).ok();
    let errors = model.as_ref().map(|m| simulator::error_metrics(&stats.pooled, m));
    let mut meta = RunMetadata::new("simulate", &path.display().to_string(), Some(sim.master_seed), flags());
    meta.wall_time_s = started.elapsed().as_secs_f64();
    out.write_json(
        "simulate.json",
        &json!({ "metadata": meta, "scenario": file, "simulation": sim, "stats": stats, "model": model, "errors": errors }),
    )?;
    out.write("replications.csv", &report::replications_csv(&stats, config.time_unit)?)?;
    out.write("summary.csv", &report::pooled_summary_csv(&stats, config.time_unit, model.as_ref())?)?;
    let p = &stats.pooled;
    out.say(format!(
        "{} replications x {} years: TESSAC {:.2} M$/yr, rho_plane {:.2}%, rho_parking {:.2}%, p2 {:.3}%",
        sim.replications,
        sim.horizon_years,
        p.tessac,
        p.rho_plane * 100.0,
        p.rho_parking * 100.0,
        p.p2 * 100.0
    ));
    if let Some(e) = errors {
        out.say(format!(
            "model error: TESSAC {:.2}%, SL_plane {:.2}%, SL_parking {:.2}%, rho_plane {:.3}pp, rho_parking {:.3}pp, p2 {:.3}pp",
            e.tessac_rel.unwrap_or(f64::NAN),
            e.sl_plane_rel.unwrap_or(f64::NAN),
            e.sl_parking_rel.unwrap_or(f64::NAN),
            e.rho_plane_abs,
            e.rho_parking_abs,
            e.p2_abs
        ));
    }
    Ok(())
}

fn cmd_validate(cli: &Cli, out: &Output, path: &Path, reps: Option<u32>, years: Option<u32>) -> CliResult<()> {
    let started = Instant::now();
    let suite = ValidationSuite::load(path)?;
    let sim = sim_config(Some(suite.simulation), cli.seed, reps, years)?;
    let thresholds = ErrorThresholds::default();
    let mut rows = Vec::with_capacity(suite.instances.len());
    for inst in &suite.instances {
        let (config, policy) = (inst.config(), inst.policy());
        let model = system::evaluate(&config, &policy)?;
        let stats = simulator::run(&config, &policy, &sim)?;
        let errors = simulator::error_metrics(&stats.pooled, &model);
        let flagged: Vec<String> = thresholds.exceeded(&errors).into_iter().map(String::from).collect();
        if !flagged.is_empty() {
            log::warn!("{}: errors above threshold for {}", inst.name, flagged.join(", "));
        }
        rows.push(ValidationRow { instance: inst.name.clone(), errors, flagged });
    }
    let mean = report::average_errors(&rows);
    let mut meta = RunMetadata::new("validate", &path.display().to_string(), Some(sim.master_seed), flags());
    meta.wall_time_s = started.elapsed().as_secs_f64();
    out.write_json(
        "validate.json",
        &json!({ "metadata": meta, "suite": suite, "simulation": sim, "thresholds": thresholds, "rows": rows, "mean": mean }),
    )?;
    out.write("validation.csv", &report::validation_csv(&rows)?)?;
    out.say(format!(
        "{} instances; mean errors: lambda_parking {:.2}%, SL_plane {:.2}%, SL_parking {:.2}%, TESSAC {:.2}%, rho_plane {:.3}pp, rho_parking {:.3}pp, p2 {:.3}pp",
        rows.len(),
        mean.lambda_parking_rel.unwrap_or(f64::NAN),
        mean.sl_plane_rel.unwrap_or(f64::NAN),
        mean.sl_parking_rel.unwrap_or(f64::NAN),
        mean.tessac_rel.unwrap_or(f64::NAN),
        mean.rho_plane_abs,
        mean.rho_parking_abs,
        mean.p2_abs
    ));
    Ok(())
}

fn cmd_optimize(
    cli: &Cli,
    out: &Output,
    path: &Path,
    problem: Option<Problem>,
    generations: Option<usize>,
    population: Option<usize>,
) -> CliResult<()> {
    let file = ScenarioFile::load(path)?;
    let mut spec = file
        .problem
        .clone()
        .ok_or_else(|| CliError::Usage(format!("{} has no problem section", path.display())))?;
    if let Some(p) = problem {
        spec.kind = match p {
            Problem::Or => ProblemKind::Or,
            Problem::Va => ProblemKind::Va,
        };
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(g) = generations {
        spec.ga.generations = g;
    }
    if let Some(p) = population {
        spec.ga.population = p;
    }
    spec.validate()?;
    let config = file.config();
    let solved = match spec.kind {
        ProblemKind::Or => optimizer::solve_or(&config, &spec),
        ProblemKind::Va => optimizer::solve_va(&config, &spec),
    };
    let solved = solved.inspect_err(|e| {
        if let Error::NoFeasibleSolution { best_violation } = e {
            eprintln!("no feasible solution; best scaled constraint violation {best_violation:.6e}");
        }
    })?;
    let mut meta = RunMetadata::new("optimize", &path.display().to_string(), Some(spec.seed), flags());
    meta.wall_time_s = solved.wall_time_s;
    let mut best_file = file.clone();
    best_file.set_policy(&solved.best.policy());
    if let Some(c) = solved.best.c_auxiliary {
        best_file.launch.auxiliary.cost_musd = c;
    }
    out.write_json("optimize.json", &json!({ "metadata": meta, "scenario": file, "problem": spec, "report": solved }))?;
    out.write("trace.csv", &report::trace_csv(&solved)?)?;
    out.write("best_scenario.json", &(best_file.to_json() + "\n"))?;
    out.write(
        "policy_table.csv",
        &report::policy_table_csv(&[(file.name.clone(), best_file.config(), solved.best.policy(), solved.metrics.clone())])?,
    )?;
    let b = &solved.best;
    out.say(format!(
        "best: N_parking {} h_parking {} km R1 {} R2 {} Q1 {} Q2 {} alpha_w {} k_R {} k_Q {}{}",
        b.n_parking,
        b.h_parking_km,
        b.r1,
        b.r2,
        b.q1,
        b.q2,
        b.alpha_w,
        b.k_r,
        b.k_q,
        b.c_auxiliary.map(|c| format!(" c_auxiliary {c:.1} M$")).unwrap_or_default()
    ));
    print_metrics(out, &solved.metrics);
    out.say(format!("{} evaluations in {:.1} s", solved.evaluations, solved.wall_time_s));
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let out = Output { dir: &cli.out, quiet: cli.quiet };
    match &cli.command {
        Command::Evaluate { scenario, single_channel, overrides } => {
            cmd_evaluate(cli, &out, scenario, *single_channel, overrides)
        }
        Command::Simulate { scenario, reps, years, single_channel } => {
            cmd_simulate(cli, &out, scenario, *reps, *years, *single_channel)
        }
        Command::Validate { suite, reps, years } => cmd_validate(cli, &out, suite, *reps, *years),
        Command::Optimize { scenario, problem, generations, population } => {
            cmd_optimize(cli, &out, scenario, *problem, *generations, *population)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // the search visits many poor policies; their model warnings are noise
    let level = match (&cli.command, cli.quiet) {
        (_, true) => "error",
        (Command::Optimize { .. }, false) => "warn,constellation_spares=error",
        _ => "warn",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
