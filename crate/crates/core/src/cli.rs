//! The `parity-cal` command-line tool.
//!
//! ```text
//! parity-cal synthetic --horizon 10000 --seed 7 --output forecasts.csv
//! parity-cal calibrate --input forecasts.csv --method ops --output records.csv
//! parity-cal evaluate  --input records.csv --forecasts forecasts.csv --output report.json
//! parity-cal decide    --input records.csv --loss builtin --output policy.json
//! ```
//!
//! Exit status: 0 on success, 1 on invalid input, 2 on unparseable files,
//! 64 on bad usage.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calibrate::{run_stream, Method};
use crate::decision::simulate_policy;
use crate::distributions::{implied_records, ProbabilitySource};
use crate::error::{Error, Result};
use crate::io::{self as pio, Preset};
use crate::metrics::{qce, quantile_reliability, MetricsReport, DEFAULT_BINS, DEFAULT_LEVELS};
use crate::svg::reliability_svg;
use crate::synthetic::{generate, SyntheticStream};

pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "parity-cal", version, about = "Parity calibration of sequential forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the alternating half-normal stream as a forecast CSV.
    Synthetic(SyntheticArgs),
    /// Turn a forecast CSV into recalibrated parity records.
    Calibrate(CalibrateArgs),
    /// Score parity records (and optionally the forecasts behind them).
    Evaluate(EvaluateArgs),
    /// Run the Bayes-optimal restriction policy on parity records.
    Decide(DecideArgs),
}

#[derive(Debug, Args)]
struct SyntheticArgs {
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    None,
    Mw,
    Iw,
    Ops,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::None => Method::None,
            MethodArg::Mw => Method::MovingWindow,
            MethodArg::Iw => Method::IncreasingWindow,
            MethodArg::Ops => Method::Ops,
        }
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ops")]
    method: MethodArg,
    /// Refit every N observations (mw, iw).
    #[arg(long)]
    uf: Option<usize>,
    /// Moving-window size (mw).
    #[arg(long)]
    ws: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "cap-d")]
    cap_d: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Column {
    Cal,
    Raw,
}

impl From<Column> for ProbabilitySource {
    fn from(c: Column) -> Self {
        match c {
            Column::Cal => ProbabilitySource::Calibrated,
            Column::Raw => ProbabilitySource::Raw,
        }
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Parity records CSV.
    #[arg(long)]
    input: PathBuf,
    /// Forecast CSV the records came from; enables QCE.
    #[arg(long)]
    forecasts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cal")]
    column: Column,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    /// Report JSON; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Reliability diagram CSV; defaults to `<output>.diagram.csv`.
    #[arg(long)]
    diagram: Option<PathBuf>,
    /// Optional SVG reliability plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecideArgs {
    #[arg(long)]
    input: PathBuf,
    /// `builtin` or a path to a 2x3 JSON/CSV loss matrix.
    #[arg(long, default_value = "builtin")]
    loss: String,
    #[arg(long, value_enum, default_value = "cal")]
    column: Column,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("parity-cal: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synthetic(a) => synthetic(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Decide(a) => decide(a),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn synthetic(a: SyntheticArgs) -> Result<()> {
    let stream = generate(a.horizon, a.seed)?;
    let times: Vec<i64> = (1..=a.horizon as i64).collect();
    let forecasts = vec![SyntheticStream::gaussian_equivalent(); a.horizon];
    pio::write_forecasts(sink(a.output.as_deref())?, &times, &stream.outcomes, &forecasts)
}

fn calibrate(a: CalibrateArgs) -> Result<()> {
    let preset = Preset::from_env()?;
    let mut schedule = preset.schedule(a.method.into());
    if let Some(uf) = a.uf {
        schedule.update_every = uf;
    }
    if let Some(ws) = a.ws {
        schedule.window = ws;
    }
    if let Some(g) = a.gamma {
        schedule.ons.gamma = g;
    }
    if let Some(d) = a.cap_d {
        schedule.ons.d = d;
    }

    let table = pio::ingest(&a.input)?;
    let prehoc = implied_records(&table.forecasts, &table.outcomes)?;
    let mut records = run_stream(&schedule, prehoc.iter().map(|r| (r.p_raw, r.outcome)))?;
    for (r, &t) in records.iter_mut().zip(&table.times[1..]) {
        r.t = usize::try_from(t)
            .map_err(|_| Error::validation(format!("time index {t} is negative")))?;
    }
    pio::write_records(sink(a.output.as_deref())?, &records)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let records = pio::read_records_file(&a.input)?;
    let (mut report, diagram) = MetricsReport::from_records(&records, a.column.into(), a.bins)?;
    if let Some(path) = &a.forecasts {
        let table = pio::ingest(path)?;
        let qd = quantile_reliability(&table.forecasts, &table.outcomes, a.levels)?;
        report = report.with_qce(qce(&qd));
    }

    let mut out = sink(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;

    let diagram_path = a
        .diagram
        .clone()
        .or_else(|| a.output.as_ref().map(|p| p.with_extension("diagram.csv")));
    if let Some(p) = diagram_path {
        pio::write_diagram(BufWriter::new(File::create(p)?), &diagram)?;
    }
    if let Some(p) = &a.svg {
        let title = match a.column {
            Column::Cal => "Parity calibration (posthoc)",
            Column::Raw => "Parity calibration (prehoc)",
        };
        std::fs::write(p, reliability_svg(&diagram, title))?;
    }
    Ok(())
}

fn decide(a: DecideArgs) -> Result<()> {
    let loss = pio::load_loss(&a.loss)?;
    let records = pio::read_records_file(&a.input)?;
    let result = simulate_policy(&records, &loss, a.column.into())?;
    let mut out = sink(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &result).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
