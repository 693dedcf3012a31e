use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hcsf_cli::config::{self, Suite, VerifySetup};
use hcsf_cli::verify::{verify_suite, write_report};
use hcsf_cli::{run_scenario, RunError, ScenarioConfig, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    Analytic,
    Evolve,
    Soliton,
    Intrinsic,
    Verify,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Analytic => "analytic",
            Scenario::Evolve => "evolve",
            Scenario::Soliton => "soliton",
            Scenario::Intrinsic => "intrinsic",
            Scenario::Verify => "verify",
        }
    }
}

/// Curve shortening flow in the hyperbolic plane: scenario runner and
/// verification suite.
#[derive(Debug, Parser)]
#[command(name = "hcsf", version)]
struct Cli {
    scenario: Scenario,
    /// JSON configuration; repeat to run several scenarios concurrently,
    /// each in `<out>/<config stem>`.
    #[arg(long, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Verify suites to run (default: all); overrides the config's `suites`.
    #[arg(long, value_parser = parse_suite)]
    suite: Vec<Suite>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<_> = std::iter::once(Suite::All)
            .chain(Suite::EACH)
            .map(Suite::name)
            .collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

fn fail(e: &RunError, out: Option<&Path>) -> u8 {
    let report = serde_json::to_string_pretty(&e.report()).expect("report serializes");
    eprintln!("{report}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{report}\n"));
        }
    }
    e.exit_code() as u8
}

fn load(path: &Path, want: Scenario) -> Result<ScenarioConfig, RunError> {
    let cfg = config::load(path).map_err(|e| RunError::Config(vec![e]))?;
    if cfg.name() != want.name() {
        return Err(RunError::Usage(format!(
            "{} is a `{}` configuration, not `{}`",
            path.display(),
            cfg.name(),
            want.name()
        )));
    }
    Ok(cfg)
}

fn verify(cli: &Cli) -> u8 {
    let mut setup = VerifySetup::default();
    if let Some(path) = cli.config.first() {
        if cli.config.len() > 1 {
            return fail(&RunError::Usage("verify takes one --config".into()), None);
        }
        match load(path, Scenario::Verify) {
            Ok(ScenarioConfig::Verify(s)) => setup = s,
            Ok(_) => unreachable!("scenario checked"),
            Err(e) => return fail(&e, cli.out.as_deref()),
        }
    }
    if !cli.suite.is_empty() {
        setup.suites = cli.suite.clone();
    }
    if let Some(seed) = cli.seed {
        setup.seed = seed;
    }
    let out = cli.out.clone().or(setup.output.clone());
    let cfg = ScenarioConfig::Verify(setup.clone());
    let errors = cfg.validate();
    if !errors.is_empty() {
        return fail(&RunError::Config(errors), out.as_deref());
    }
    let report = verify_suite(&setup.suites, setup.seed);
    print!("{}", report.to_text());
    if let Some(dir) = &out {
        if let Err(e) = write_report(&report, dir) {
            return fail(&e.into(), None);
        }
    }
    if report.all_passed() {
        0
    } else {
        1
    }
}

/// Loads, overrides and runs one configuration.
fn run_one(cli: &Cli, path: &Path, many: bool) -> Result<Summary, (RunError, Option<PathBuf>)> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let flag_out = cli
        .out
        .as_ref()
        .map(|d| if many { d.join(&stem) } else { d.clone() });
    let mut cfg = load(path, cli.scenario).map_err(|e| (e, flag_out.clone()))?;
    if let Some(dir) = flag_out {
        cfg.set_output(dir);
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let Some(out) = cfg.output().map(Path::to_path_buf) else {
        return Err((
            RunError::Usage(format!(
                "{}: no output directory; set `output` or pass --out",
                path.display()
            )),
            None,
        ));
    };
    run_scenario(&cfg, &out).map_err(|e| (e, Some(out)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.scenario == Scenario::Verify {
        return ExitCode::from(verify(&cli));
    }
    if cli.config.is_empty() {
        let e = RunError::Usage(format!("`{}` needs --config PATH", cli.scenario.name()));
        return ExitCode::from(fail(&e, None));
    }
    let many = cli.config.len() > 1;
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = cli
            .config
            .iter()
            .map(|path| s.spawn(|| run_one(&cli, path, many)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    let mut code = 0u8;
    let mut stdout = std::io::stdout().lock();
    for r in results {
        match r {
            Ok(summary) => {
                let _ = writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(&summary).expect("summary serializes")
                );
            }
            Err((e, out)) => code = code.max(fail(&e, out.as_deref())),
        }
    }
    ExitCode::from(code)
}
