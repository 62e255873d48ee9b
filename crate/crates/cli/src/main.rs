use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use taxrisk::config::{parse_seed, ExperimentConfig};
use taxrisk::experiment::{estimate_records, run_experiment, RunOutput};
use taxrisk::records::{read_rows, write_rows, RecordRow};
use taxrisk::report::fmt_num;
use taxrisk::runner::{batch_seed, Runner, WORKERS_ENV};
use taxrisk_core::asymptotics::{predict_edpf, predict_ruin_constant, predict_ruin_ratio, predict_tax_value, Prediction};
use taxrisk_core::engine::{Event, ScriptedJumps, Simulator};
use taxrisk_core::{TaxPolicy, Upsilon};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "taxrisk", version, about = "Ruin under loss-carried-forward tax: simulation, estimates, limits")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed (decimal or 0x-hex).
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Worker threads; 0 means the environment default.
    #[arg(long, global = true, env = WORKERS_ENV, default_value_t = 0)]
    workers: usize,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Large-u limits only, no simulation.
    Predict,
    /// Dump raw ruin records for every level.
    Simulate,
    /// Estimates from a record file written by `simulate`.
    Estimate {
        #[arg(long)]
        records: PathBuf,
    },
    /// Simulate, estimate and compare with the limits.
    Validate,
    /// Event log of a single path.
    Trace {
        /// Level; defaults to the first of the grid.
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, default_value_t = 0)]
        replica: u64,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
    let mut c = ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(s) = cli.seed {
        c.seed.0 = s;
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let config = load(cli)?;
    match &cli.command {
        Command::Predict => predict(cli, &config),
        Command::Simulate => simulate(cli, &config),
        Command::Estimate { records } => {
            let rows = read_rows(fs::File::open(records)?)?;
            let mut levels: Vec<(f64, Vec<_>)> = Vec::new();
            for row in rows {
                let rec = row.to_record().map_err(Failure::Runtime)?;
                match levels.iter_mut().find(|(u, _)| *u == row.u) {
                    Some((_, v)) => v.push(rec),
                    None => levels.push((row.u, vec![rec])),
                }
            }
            emit(cli, &estimate_records(&config, levels))
        }
        Command::Validate => emit(cli, &run_experiment(&config, &Runner::new(cli.workers))),
        Command::Trace { u, replica } => trace(&config, u.unwrap_or(config.u[0]), *replica),
    }
}

fn emit(cli: &Cli, out: &RunOutput) -> Result<ExitCode, Failure> {
    let report = &out.report;
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), report.to_json())?;
            report.write_csv(fs::File::create(dir.join("table.csv"))?)?;
            fs::write(dir.join("timing.json"), out.timing.to_json())?;
            for h in &out.histograms {
                h.write_csv(fs::File::create(dir.join(h.file_name()))?)?;
            }
        }
        None => match cli.format {
            Format::Json => print!("{}", report.to_json()),
            Format::Csv => print!("{}", report.to_csv()),
        },
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    for t in &report.trends {
        eprintln!("trend {} {:?}: {}", t.quantity, t.direction, if t.holds { "holds" } else { "violated" });
    }
    Ok(if report.has_errors() {
        ExitCode::from(EXIT_RUNTIME)
    } else if !report.passed {
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct PredictionLine {
    quantity: &'static str,
    value: Option<String>,
    formula: Option<&'static str>,
    condition: Option<String>,
    error: Option<String>,
}

fn line(quantity: &'static str, p: taxrisk_core::Result<Prediction>) -> PredictionLine {
    match p {
        Ok(p) => PredictionLine {
            quantity,
            value: Some(fmt_num(Some(p.value))),
            formula: Some(p.formula.as_str()),
            condition: Some(p.condition),
            error: None,
        },
        Err(e) => PredictionLine { quantity, value: None, formula: None, condition: None, error: Some(e.to_string()) },
    }
}

fn predict(cli: &Cli, config: &ExperimentConfig) -> Result<ExitCode, Failure> {
    let model = config.model_spec();
    let policy = config.tax_policy();
    let mut lines = Vec::new();
    let lx = model.ladder_exponents().map_err(|e| Failure::Runtime(e.to_string()))?;
    let scalar = |q, v: f64| PredictionLine { quantity: q, value: Some(fmt_num(Some(v))), formula: None, condition: None, error: None };
    lines.push(scalar("alpha", lx.alpha()));
    lines.push(scalar("q", lx.q()));
    if let Upsilon::Exact(y) = model.cramer_upsilon() {
        lines.push(scalar("upsilon", y));
    }
    lines.push(line("ruin_constant", predict_ruin_constant(&model, &policy)));
    if let TaxPolicy::Constant { gamma } = policy {
        lines.push(line("ruin_ratio", predict_ruin_ratio(&model, gamma)));
    }
    lines.push(line("edpf", predict_edpf(&model, config.penalty.into())));
    lines.push(line("tax_value", predict_tax_value(&model, &policy, config.discount)));
    let mut stdout = io::stdout().lock();
    match cli.format {
        Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&lines).expect("serializes"))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(stdout);
            for l in &lines {
                w.serialize(l)?;
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(cli: &Cli, config: &ExperimentConfig) -> Result<ExitCode, Failure> {
    let runner = Runner::new(cli.workers);
    let mut rows = Vec::new();
    for &u in &config.u {
        let sim = Simulator::new(config.model_spec(), config.tax_policy(), u, config.measure(), config.sim_options())
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        let seed = batch_seed(config.seed.0, u, 0);
        let recs = runner.records(&sim, config.n, seed);
        rows.extend(recs.iter().enumerate().map(|(i, r)| RecordRow::new(u, i as u64, r)));
    }
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_rows(fs::File::create(dir.join("records.csv"))?, rows)?;
        }
        None => write_rows(io::stdout().lock(), rows)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn trace(config: &ExperimentConfig, u: f64, replica: u64) -> Result<ExitCode, Failure> {
    let sim = Simulator::new(config.model_spec(), config.tax_policy(), u, config.measure(), config.sim_options())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut events: Vec<Event> = Vec::new();
    let record = match &config.trace {
        Some(t) if !t.jumps.is_empty() => sim.run_with_source(&mut ScriptedJumps::new(t.jumps.clone()), &mut events),
        _ => sim.run_replica_logged(batch_seed(config.seed.0, u, 0), replica, &mut events),
    };
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["time", "kind", "x", "xmin", "rgamma", "tax"])?;
    for e in &events {
        w.write_record([
            fmt_num(Some(e.time)),
            e.kind.as_str().to_string(),
            fmt_num(Some(e.x)),
            fmt_num(Some(e.xmin)),
            fmt_num(Some(e.rgamma)),
            fmt_num(Some(e.tax)),
        ])?;
    }
    w.flush()?;
    drop(w);
    let row = RecordRow::new(u, replica, &record);
    let mut summary = Vec::new();
    write_rows(&mut summary, [row])?;
    eprint!("{}", String::from_utf8_lossy(&summary));
    Ok(ExitCode::SUCCESS)
}

