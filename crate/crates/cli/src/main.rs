use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coquat_cli::config::{parse_assignment, Param};
use coquat_cli::{experiments, report, RawConfig};

#[derive(Parser)]
#[command(name = "coquat", version, about = "Verification experiments for split quaternionic analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its table plus a `.meta.json` sidecar.
    Run {
        /// Flat TOML file with `experiment`, `out`, `format` and parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        experiment: Option<String>,
        /// Parameter override `key=value`; lists are comma separated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json; defaults to the output extension.
        #[arg(long)]
        format: Option<String>,
        /// Worker threads for the quadrature.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiments and their parameters with defaults.
    List,
}

const EXIT_TOLERANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            for name in experiments::NAMES {
                println!("{name}");
                for (key, default) in experiments::schema(name).unwrap_or_default() {
                    match &default {
                        Param::Choice(v, allowed) => println!("    {key} = {v}  (one of {})", allowed.join(", ")),
                        p => println!("    {key} = {}", p.to_json()),
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, experiment, set, out, format, threads } => {
            let resolved = (|| {
                let mut raw = match &config {
                    Some(path) => RawConfig::from_file(path)?,
                    None => RawConfig::default(),
                };
                raw.experiment = experiment.or(raw.experiment);
                raw.output_path = out.or(raw.output_path);
                raw.format = format.or(raw.format);
                for s in &set {
                    raw.set.push(parse_assignment(s)?);
                }
                raw.resolve()
            })();
            let cfg = match resolved {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: thread pool: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            let rep = match experiments::run(&cfg) {
                Ok(rep) => rep,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Err(e) = report::emit(&cfg, &rep) {
                eprintln!("error: writing {}: {e}", cfg.output_path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
            let failed = rep.failures();
            eprintln!("{}: {} cases, {failed} outside tolerance", cfg.experiment, rep.rows.len());
            if failed > 0 {
                ExitCode::from(EXIT_TOLERANCE)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
