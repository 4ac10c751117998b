use std::path::PathBuf;
use std::process::ExitCode;

use squeeze_qnd_cli::commands::{self, CliError, CommandOutcome, CommonOpts};
use squeeze_qnd_cli::config::RunConfig;

const USAGE: &str = "\
sqnd - two-mode squeezed microwave concentration/purification simulator

USAGE:
  sqnd <COMMAND> [OPTIONS]

COMMANDS:
  params-check   Effective cross-Kerr strength, regime ratios, measurement
                 window, and imperfection bounds for a circuit configuration
  qnd-verify     Drive the time-domain oracle against the exact cascade and
                 the first-order homodyne signal over photon-number sectors
  concentrate    Ideal outcome table plus a seeded Monte Carlo concentration
                 run with noisy QND readout
  purify         Branch weights and a seeded batch of two-sided
                 compare-and-keep purification trials

OPTIONS:
  --config PATH     Flat key = value config file (# comments allowed)
  --set KEY=VALUE   Override one config key (repeatable)
  --seed N          Random seed (overrides the `seed` config key)
  --trials N        Trial count (overrides the `trials` config key)
  --format FMT      json | csv; csv covers the histogram tables of
                    concentrate and purify only
  --out PATH        Write the json/csv document to PATH instead of stdout
  --no-noise        Disable homodyne vacuum noise
  --help            Show this help

Without --format the human-readable report is printed; with --format and no
--out the document goes to stdout. Identical (config, seed) runs produce
byte-identical documents.

EXIT CODES:
  0  success, all checks passed
  1  usage or input error
  2  physical-regime violation (failed feasibility check, loss model out
     of range, non-adiabatic readout)
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
struct Args {
    command: String,
    config_path: Option<PathBuf>,
    sets: Vec<String>,
    opts: CommonOpts,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn parse_args() -> Result<Args, String> {
    let mut it = std::env::args().skip(1);
    let Some(command) = it.next() else {
        return Err("missing command".into());
    };
    if command == "--help" || command == "-h" {
        print!("{USAGE}");
        std::process::exit(0);
    }
    let mut args = Args {
        command,
        config_path: None,
        sets: Vec::new(),
        opts: CommonOpts::default(),
        format: None,
        out: None,
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--help" | "-h" => {
                print!("{USAGE}");
                std::process::exit(0);
            }
            "--config" => {
                let v = it.next().ok_or("missing value for --config")?;
                args.config_path = Some(PathBuf::from(v));
            }
            "--set" => {
                let v = it.next().ok_or("missing value for --set")?;
                args.sets.push(v);
            }
            "--seed" => {
                let v = it.next().ok_or("missing value for --seed")?;
                args.opts.seed =
                    Some(v.parse().map_err(|_| format!("invalid --seed `{v}`"))?);
            }
            "--trials" => {
                let v = it.next().ok_or("missing value for --trials")?;
                args.opts.trials =
                    Some(v.parse().map_err(|_| format!("invalid --trials `{v}`"))?);
            }
            "--format" => {
                let v = it.next().ok_or("missing value for --format")?;
                args.format = Some(match v.as_str() {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    other => return Err(format!("invalid --format `{other}` (json|csv)")),
                });
            }
            "--out" => {
                let v = it.next().ok_or("missing value for --out")?;
                args.out = Some(PathBuf::from(v));
            }
            "--no-noise" => args.opts.no_noise = true,
            other => return Err(format!("unknown option `{other}`")),
        }
    }
    Ok(args)
}

fn run(args: &Args) -> Result<CommandOutcome, CliError> {
    let mut cfg = match &args.config_path {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Input(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse_str(&text).map_err(CliError::from)?
        }
    };
    for spec in &args.sets {
        cfg.apply_override(spec).map_err(CliError::from)?;
    }
    match args.command.as_str() {
        "params-check" => commands::params_check(&cfg, &args.opts),
        "qnd-verify" => commands::qnd_verify(&cfg, &args.opts),
        "concentrate" => commands::concentrate(&cfg, &args.opts),
        "purify" => commands::purify(&cfg, &args.opts),
        other => Err(CliError::Input(format!("unknown command `{other}`"))),
    }
}

fn emit(args: &Args, outcome: &CommandOutcome) -> Result<(), CliError> {
    let document = match args.format {
        None => None,
        Some(Format::Json) => Some(outcome.doc.to_json_string()),
        Some(Format::Csv) => match &outcome.csv {
            Some(csv) => Some(csv.clone()),
            None => {
                return Err(CliError::Input(format!(
                    "csv output is not available for {}",
                    args.command
                )))
            }
        },
    };
    match (&args.out, document) {
        (None, None) => print!("{}", outcome.human),
        (None, Some(doc)) => print!("{doc}"),
        (Some(path), doc) => {
            let doc = doc.unwrap_or_else(|| outcome.doc.to_json_string());
            std::fs::write(path, doc).map_err(|e| {
                CliError::Input(format!("cannot write {}: {e}", path.display()))
            })?;
            print!("{}", outcome.human);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            return ExitCode::from(1);
        }
    };
    match run(&args) {
        Ok(outcome) => {
            if let Err(e) = emit(&args, &outcome) {
                eprintln!("error: {}", e.message());
                return ExitCode::from(e.exit_code() as u8);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
