use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use labsched::harness::{anova_effects_at, read_csv, run_experiment, write_csv, Algorithm};
use labsched::rules::{MachinePolicy, Rule, RuleParams};
use labsched::sa::{run_sa_detailed, write_trace, SaParams, Structure};
use labsched::{
    generate_design, generate_instance, run_lta, validate_schedule, GenConfig, Instance, Schedule,
};

/// Total-tardiness scheduling for laboratory machines with family setups,
/// operator windows and limited columns.
#[derive(Parser)]
#[command(name = "labsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate(GenerateArgs),
    /// Solve an instance with the list treatment heuristic or simulated annealing.
    Solve(SolveArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
    /// Run algorithms over a generated factorial design and write a results CSV.
    Experiment(ExperimentArgs),
    /// Analyse a results CSV: factor effects, interactions and F-tests.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 140)]
    jobs: usize,
    #[arg(long, default_value_t = 20)]
    routings: usize,
    /// Setup share of each operation's total duration.
    #[arg(long, default_value_t = 0.75)]
    setup_ratio: f64,
    /// Mean number of eligible machines per routing operation.
    #[arg(long, default_value_t = 4)]
    flex_mean: u32,
    #[arg(long, default_value_t = 10)]
    machines: usize,
    #[arg(long, default_value_t = 20)]
    column_types: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow values outside the experimental levels.
    #[arg(long)]
    off_design: bool,
    /// Instance JSON path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Lta,
    Sa,
}

#[derive(Args)]
struct RuleArgs {
    /// Priority rule; also builds the starting schedule for sa.
    #[arg(long, default_value_t = Rule::Atcoee)]
    rule: Rule,
    #[arg(long, default_value_t = 10.0)]
    k1: f64,
    #[arg(long, default_value_t = 1.0)]
    k2: f64,
    #[arg(long, default_value_t = 10.0)]
    k3: f64,
    #[arg(long, default_value_t = MachinePolicy::Ffm)]
    machine_policy: MachinePolicy,
}

impl RuleArgs {
    fn params(&self) -> anyhow::Result<RuleParams<f64>> {
        let p = RuleParams::new(self.rule, self.machine_policy).with_k(self.k1, self.k2, self.k3);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SaArgs {
    #[arg(long, default_value_t = Structure::OpPa)]
    structure: Structure,
    #[arg(long, default_value_t = 0.95)]
    cooling: f64,
    /// Main-loop iteration cap; 0 runs until the dead-level rule stops.
    #[arg(long, default_value_t = 15_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 100)]
    descent_iters: usize,
    /// Iterations before the temperature drops.
    #[arg(long, default_value_t = 400)]
    plateau_iters: usize,
    /// Acceptances before the temperature drops.
    #[arg(long, default_value_t = 80)]
    plateau_accepts: usize,
    #[arg(long, default_value_t = 0.8)]
    initial_accept: f64,
    /// Consecutive levels without acceptance that stop the search.
    #[arg(long, default_value_t = 3)]
    dead_levels: usize,
    /// First-item draws per proposal before it counts as failed.
    #[arg(long, default_value_t = 50)]
    resample_limit: usize,
}

impl SaArgs {
    fn params(&self) -> anyhow::Result<SaParams> {
        let p = SaParams {
            structure: self.structure,
            mechanisms: None,
            cooling: self.cooling,
            descent_iterations: self.descent_iters,
            plateau_iterations: self.plateau_iters,
            plateau_acceptances: self.plateau_accepts,
            initial_accept_prob: self.initial_accept,
            max_iterations: (self.max_iters > 0).then_some(self.max_iters),
            dead_levels: self.dead_levels,
            resample_limit: self.resample_limit,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Solver::Lta)]
    algorithm: Solver,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    sa: SaArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule JSON path [default: stdout, metrics then go to stderr].
    #[arg(long)]
    out: Option<PathBuf>,
    /// SA trace CSV path (iteration, temperature, current, best).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// SA statistics JSON path.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Job counts, one design per load.
    #[arg(long, value_delimiter = ',', default_value = "140")]
    loads: Vec<usize>,
    /// Number of design cells per load to run, in design order [default: all 16].
    #[arg(long)]
    cells: Option<usize>,
    /// Replicates per cell.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Master seed from which every instance seed is drawn.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated algorithms, e.g. atcoee, atcs.1.1, lfm_lfo, random, simple_sa, op_sa, op_pa_sa.0.98.
    #[arg(long, value_delimiter = ',', default_value = "atcoee,op_pa_sa")]
    algorithms: Vec<Algorithm>,
    /// Iteration cap applied to every SA algorithm; 0 = unlimited.
    #[arg(long, default_value_t = 15_000)]
    max_iters: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Write 0 in the runtimeMs column so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Results CSV path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV written by `experiment`.
    #[arg(long)]
    input: PathBuf,
    /// Significance level of the F-tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Effect report CSV path; the text tables always go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code 1: bad arguments or unreadable input. Exit code 2: solving or validation failed.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn failed(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Instance::from_json(&read(path)?)
        .with_context(|| format!("parsing instance {}", path.display()))
        .map_err(usage)
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(failed),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(failed)
}

fn generate(args: GenerateArgs) -> Outcome {
    let mut cfg = GenConfig::new(
        args.jobs,
        args.routings,
        args.setup_ratio,
        args.flex_mean,
        args.seed,
    );
    cfg.machines = args.machines;
    cfg.column_types = args.column_types;
    cfg.unchecked = args.off_design;
    cfg.validate().map_err(usage)?;
    let instance = generate_instance(&cfg).map_err(failed)?;
    emit(args.out.as_deref(), &(instance.to_json() + "\n"))
}

fn solve(args: SolveArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let rule = args.rule.params().map_err(usage)?;
    let sa = match args.algorithm {
        Solver::Sa => Some(args.sa.params().map_err(usage)?),
        Solver::Lta => None,
    };
    let initial = run_lta(&instance, &rule, args.seed).map_err(failed)?;
    let (schedule, sa_line) = match sa {
        None => (initial, None),
        Some(params) => {
            let report =
                run_sa_detailed(&instance, &initial, &params, args.seed).map_err(failed)?;
            if let Some(path) = &args.trace {
                write_trace(create(path)?, &report.trace).map_err(failed)?;
            }
            if let Some(path) = &args.stats {
                let json = serde_json::to_string_pretty(&report.stats).map_err(failed)?;
                emit(Some(path), &(json + "\n"))?;
            }
            let s = &report.stats;
            let line = format!(
                "initial_tardiness={} iterations={} accepted={} improved={} failed={} levels={} t0={:.3} stop={:?}",
                s.initial_tardiness,
                s.iterations,
                s.accepted,
                s.improved,
                s.failed_proposals + s.decode_failures,
                s.levels,
                s.initial_temperature,
                s.stop_reason
            );
            (report.schedule, Some(line))
        }
    };
    let schedule = schedule.sorted();
    let violations = validate_schedule(&instance, &schedule);
    if let Some(v) = violations.first() {
        return Err(failed(anyhow!(
            "solver produced {} violations, first: {v}",
            violations.len()
        )));
    }
    let metrics = schedule.metrics(&instance).map_err(failed)?;
    emit(args.out.as_deref(), &(schedule.to_json() + "\n"))?;
    let lines = std::iter::once(metrics.to_string()).chain(sa_line);
    for line in lines {
        if args.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let schedule = Schedule::from_json(&read(&args.schedule)?)
        .with_context(|| format!("parsing schedule {}", args.schedule.display()))
        .map_err(usage)?;
    let violations = validate_schedule(&instance, &schedule);
    if violations.is_empty() {
        println!("ok {}", schedule.metrics(&instance).map_err(failed)?);
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(failed(anyhow!("{} violations", violations.len())))
}

fn experiment(args: ExperimentArgs) -> Outcome {
    if args.seeds == 0 || args.loads.is_empty() {
        return Err(usage(anyhow!(
            "need at least one load and one seed per cell"
        )));
    }
    let per_load = args.cells.unwrap_or(16);
    if per_load == 0 || per_load > 16 {
        return Err(usage(anyhow!("--cells must be between 1 and 16")));
    }
    let mut design = Vec::new();
    for block in generate_design(&args.loads, args.seeds, args.seed).chunks(16 * args.seeds) {
        design.extend_from_slice(&block[..per_load * args.seeds]);
    }
    let cap = (args.max_iters > 0).then_some(args.max_iters);
    let algorithms: Vec<Algorithm> = args
        .algorithms
        .into_iter()
        .map(|mut a| {
            if let Algorithm::Sa { params, .. } = &mut a {
                params.max_iterations = cap;
            }
            a
        })
        .collect();
    let mut rows = run_experiment(&design, &algorithms, args.parallel).map_err(usage)?;
    if args.no_timing {
        rows.iter_mut().for_each(|r| r.runtime_ms = 0.0);
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(failed)?;
    emit(
        args.out.as_deref(),
        &String::from_utf8(buf).map_err(failed)?,
    )?;
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} rows, {errors} failed", rows.len());
    if errors > 0 {
        return Err(failed(anyhow!(
            "{errors} runs failed; see the error column"
        )));
    }
    Ok(())
}

fn report(args: ReportArgs) -> Outcome {
    let rows = read_csv(read(&args.input)?.as_bytes())
        .with_context(|| format!("parsing {}", args.input.display()))
        .map_err(usage)?;
    let report = anova_effects_at(&rows, args.alpha).map_err(usage)?;
    print!("{}", report.to_text());
    if let Some(path) = &args.out {
        report.write_csv(create(path)?).map_err(failed)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
