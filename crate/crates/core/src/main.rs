use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oblivion::acceptance::{self, CRITERIA};
use oblivion::dsl;
use oblivion::pointer::CouplingStrength;
use oblivion::report::{emit, Format, RunInfo};
use oblivion::scenarios::{self, GSweep, RecombineOption, ScenarioResult, WeakFixture, SCENARIO_IDS};
use oblivion::DEFAULT_SEED;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIAGNOSTICS: u8 = 3;
const EXIT_IO: u8 = 4;

const DEFAULT_TRIALS: usize = 10_000;

#[derive(Parser, Debug)]
#[command(
    name = "oblivion",
    version,
    about = "Simulate pre- and post-selected quantum experiments"
)]
#[command(args_conflicts_with_subcommands = true, arg_required_else_help = true)]
struct Cli {
    /// List built-in scenarios and exit.
    #[arg(long)]
    list: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a built-in scenario or a .scn description.
    Run(RunArgs),
    /// List built-in scenarios.
    List,
    /// Run the reproduction checks.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Built-in scenario id or path to a .scn file.
    scenario: String,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Monte Carlo trials [default: 10000].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,

    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,

    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Pointer sweep `g_min:g_max:steps[:log]`.
    #[arg(long, value_name = "SPEC", value_parser = parse_sweep)]
    g_sweep: Option<GSweep>,

    /// Observable to sweep; defaults to the scenario's headline observable.
    #[arg(long, requires = "g_sweep")]
    observable: Option<String>,

    /// Recombination for three_path_photon: recombine_all or recombine_two.
    #[arg(long, value_parser = parse_option)]
    option: Option<RecombineOption>,

    /// Pointer coupling for three_path_photon.
    #[arg(long, value_parser = parse_g)]
    g: Option<f64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Run only these criteria (1-9); repeatable.
    #[arg(long = "criterion", value_parser = clap::value_parser!(u8).range(1..=9))]
    criteria: Vec<u8>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Table,
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

fn parse_sweep(s: &str) -> Result<GSweep, String> {
    s.parse().map_err(|e: oblivion::Error| e.to_string())
}

fn parse_option(s: &str) -> Result<RecombineOption, String> {
    s.parse().map_err(|e: oblivion::Error| e.to_string())
}

fn parse_g(s: &str) -> Result<f64, String> {
    let g: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    CouplingStrength::new(g)
        .map(|c| c.value())
        .map_err(|e| e.to_string())
}

/// Validated run parameters.
#[derive(Debug)]
struct RunConfig {
    scenario: Source,
    seed: u64,
    trials: usize,
    g_sweep: Option<GSweep>,
    output: Format,
    out_path: Option<PathBuf>,
}

#[derive(Debug)]
enum Source {
    Builtin(&'static str),
    File(PathBuf),
}

/// Failure with its exit code; the message is printed to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn resolve(scenario: &str) -> Result<Source, Failure> {
    if let Some(id) = SCENARIO_IDS.iter().find(|id| **id == scenario) {
        return Ok(Source::Builtin(id));
    }
    let path = Path::new(scenario);
    if path.extension().is_some_and(|e| e == "scn") || path.exists() {
        return Ok(Source::File(path.to_owned()));
    }
    Err(Failure::new(
        EXIT_USAGE,
        format!(
            "unknown scenario `{scenario}`; expected one of {} or a .scn file",
            SCENARIO_IDS.join(", ")
        ),
    ))
}

fn load(path: &Path) -> Result<dsl::ScenarioSpec, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let spec = dsl::parse_bytes(&bytes).map_err(|d| {
        let lines: Vec<String> = d
            .errors()
            .iter()
            .map(|e| format!("{}:{e}", path.display()))
            .collect();
        Failure::new(EXIT_DIAGNOSTICS, lines.join("\n"))
    })?;
    for w in &spec.warnings {
        eprintln!("{}:{w}", path.display());
    }
    Ok(spec)
}

fn scenario_error(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_DIAGNOSTICS, format!("error: {e}"))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = RunConfig {
        scenario: resolve(&args.scenario)?,
        seed: args.seed,
        trials: args.trials.map_or(DEFAULT_TRIALS, |t| t as usize),
        g_sweep: args.g_sweep,
        output: args.format.into(),
        out_path: args.out,
    };
    let three_path = matches!(cfg.scenario, Source::Builtin("three_path_photon"));
    if (args.option.is_some() || args.g.is_some()) && !three_path {
        return Err(Failure::new(
            EXIT_USAGE,
            "--option and --g apply only to three_path_photon",
        ));
    }
    let mut uses_trials = false;
    let (mut result, fixture): (ScenarioResult, Option<(WeakFixture, String)>) = match &cfg.scenario {
        Source::Builtin(id) => {
            let result = if three_path {
                let g =
                    CouplingStrength::new(args.g.unwrap_or(scenarios::DEFAULT_G)).map_err(scenario_error)?;
                scenarios::run_three_path_photon(args.option.unwrap_or(RecombineOption::RecombineAll), g)
            } else {
                uses_trials = *id == "four_mirror";
                scenarios::run_builtin(id, cfg.trials, cfg.seed).expect("known id")
            }
            .map_err(scenario_error)?;
            let fixture = match cfg.g_sweep {
                None => None,
                Some(_) => {
                    let (f, default) = scenarios::sweep_fixture(id)
                        .ok_or_else(|| {
                            Failure::new(
                                EXIT_USAGE,
                                format!("scenario `{id}` has no weak-value fixture to sweep"),
                            )
                        })?
                        .map_err(scenario_error)?;
                    Some((f, args.observable.clone().unwrap_or_else(|| default.to_owned())))
                }
            };
            (result, fixture)
        }
        Source::File(path) => {
            let spec = load(path)?;
            let name = path
                .file_stem()
                .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
            let at = |e: dsl::DslError| Failure::new(EXIT_DIAGNOSTICS, format!("{}:{e}", path.display()));
            let result = dsl::evaluate(&spec, &name).map_err(at)?;
            let fixture = match cfg.g_sweep {
                None => None,
                Some(_) => Some(dsl::weak_fixture(&spec, args.observable.as_deref()).map_err(at)?),
            };
            (result, fixture)
        }
    };
    if let (Some(sweep), Some((fixture, observable))) = (&cfg.g_sweep, &fixture) {
        if fixture.observable(observable).is_none() {
            let names: Vec<&str> = fixture.observables.iter().filter_map(|o| o.name()).collect();
            return Err(Failure::new(
                EXIT_USAGE,
                format!("no observable `{observable}`; available: {}", names.join(", ")),
            ));
        }
        result.sweep = scenarios::weak_sweep(fixture, observable, sweep).map_err(scenario_error)?;
    }

    let color = cfg.output == Format::Table
        && cfg.out_path.is_none()
        && std::env::var_os("NO_COLOR").is_none()
        && std::io::stdout().is_terminal();
    let info = RunInfo {
        seed: cfg.seed,
        trials: uses_trials.then_some(cfg.trials),
        color,
    };
    let text = emit(&result, cfg.output, &info);
    match &cfg.out_path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))),
        None => write_stdout(&text),
    }
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write to stdout: {e}")))
}

fn list() -> Result<(), Failure> {
    let width = SCENARIO_IDS.iter().map(|id| id.len()).max().unwrap_or(0);
    let mut text = String::new();
    for id in SCENARIO_IDS {
        let (description, reproduces) = scenarios::describe(id).expect("described");
        text.push_str(&format!(
            "{id:<width$}  {description}\n{:<width$}  reproduces: {reproduces}\n",
            ""
        ));
    }
    write_stdout(&text)
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let ids: Vec<u8> = if args.criteria.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        args.criteria
    };
    let mut failed = 0;
    for id in &ids {
        let r = acceptance::run_criterion(*id, args.seed).expect("id validated by clap");
        failed += usize::from(!r.passed);
        write_stdout(&format!("{r}\n"))?;
    }
    write_stdout(&format!(
        "{} of {} criteria passed\n",
        ids.len() - failed,
        ids.len()
    ))?;
    if failed > 0 {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            format!("{failed} criteria failed"),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        _ if cli.list => list(),
        Some(Command::List) => list(),
        Some(Command::Run(args)) => run(args),
        Some(Command::Check(args)) => check(args),
        None => Err(Failure::new(EXIT_USAGE, "missing command; try --help")),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
