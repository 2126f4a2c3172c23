//! File formats: forecast CSV, parity record CSV, reliability diagram CSV,
//! loss matrices and configuration presets.
//!
//! Every CSV is UTF-8 with LF line endings and a header row. Floats are
//! written in shortest round-trip form, so reading a file back yields the
//! same bits.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::calibrate::{Method, OnsConfig, ScheduleConfig};
use crate::decision::LossMatrix;
use crate::distributions::{ForecastDistribution, ParityRecord};
use crate::error::{Error, Result};
use crate::metrics::ReliabilityDiagram;

/// Environment variable naming a hyperparameter preset.
pub const PRESET_ENV: &str = "PARITY_CAL_PRESET";

/// Forecast columns of a forecast CSV, declared by its header.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoding {
    /// `t,y,mu,sigma`
    Gaussian,
    /// `t,y,q_<level>,...`
    Quantiles(Vec<f64>),
    /// `t,y,p`
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastTable {
    pub encoding: Encoding,
    pub times: Vec<i64>,
    pub outcomes: Vec<f64>,
    pub forecasts: Vec<ForecastDistribution>,
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("column `{column}`: `{field}` is not a number")))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(line, format!("{other:?}")),
    }
}

fn header_encoding(headers: &csv::StringRecord) -> Result<Encoding> {
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != "t" || cols[1] != "y" {
        return Err(Error::parse(1, "header must start with `t,y` followed by forecast columns"));
    }
    let rest = &cols[2..];
    match rest {
        ["mu", "sigma"] => Ok(Encoding::Gaussian),
        ["p"] => Ok(Encoding::Direct),
        _ if rest.iter().all(|c| c.starts_with("q_")) => {
            let levels = rest
                .iter()
                .map(|c| {
                    c[2..]
                        .parse::<f64>()
                        .map_err(|_| Error::parse(1, format!("bad quantile column `{c}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(1, "quantile columns must be ordered by level"));
            }
            Ok(Encoding::Quantiles(levels))
        }
        _ => Err(Error::parse(
            1,
            format!("unrecognized forecast columns {rest:?}; expected mu,sigma or p or q_<level>"),
        )),
    }
}

pub fn ingest(path: impl AsRef<Path>) -> Result<ForecastTable> {
    read_forecasts(BufReader::new(File::open(path)?))
}

pub fn read_forecasts<R: Read>(reader: R) -> Result<ForecastTable> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let encoding = header_encoding(&headers)?;
    let names: Vec<String> = headers.iter().map(str::to_owned).collect();

    let mut table = ForecastTable {
        encoding,
        times: Vec::new(),
        outcomes: Vec::new(),
        forecasts: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != names.len() {
            return Err(Error::parse(line, format!("expected {} fields, found {}", names.len(), rec.len())));
        }
        let t: i64 = rec[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("column `t`: `{}` is not an integer", &rec[0])))?;
        let y = parse_f64(&rec[1], line, "y")?;
        let mut vals = Vec::with_capacity(rec.len() - 2);
        for (field, name) in rec.iter().zip(&names).skip(2) {
            vals.push(parse_f64(field, line, name)?);
        }
        if let Some(&prev) = table.times.last() {
            if t <= prev {
                return Err(Error::validation(format!(
                    "line {line}: t = {t} does not increase (previous {prev})"
                )));
            }
        }
        if !y.is_finite() {
            return Err(Error::validation(format!("line {line}: y is not finite")));
        }
        let forecast = match &table.encoding {
            Encoding::Gaussian => ForecastDistribution::gaussian(vals[0], vals[1]),
            Encoding::Direct => ForecastDistribution::direct(vals[0]),
            Encoding::Quantiles(levels) => ForecastDistribution::quantiles(levels.clone(), vals),
        }
        .map_err(|e| match e {
            Error::Validation(m) => Error::validation(format!("line {line}: {m}")),
            Error::Domain(p) => Error::validation(format!("line {line}: probability {p} outside [0, 1]")),
            other => other,
        })?;
        table.times.push(t);
        table.outcomes.push(y);
        table.forecasts.push(forecast);
    }
    if table.times.len() < 2 {
        return Err(Error::validation(format!(
            "a forecast file needs at least 2 rows, found {}",
            table.times.len()
        )));
    }
    Ok(table)
}

/// Writes a forecast table; all forecasts must share one CSV encoding.
pub fn write_forecasts<W: Write>(
    mut w: W,
    times: &[i64],
    outcomes: &[f64],
    forecasts: &[ForecastDistribution],
) -> Result<()> {
    if times.len() != outcomes.len() || times.len() != forecasts.len() {
        return Err(Error::validation("times, outcomes and forecasts differ in length"));
    }
    let encoding = match forecasts.first() {
        Some(ForecastDistribution::Gaussian { .. }) => Encoding::Gaussian,
        Some(ForecastDistribution::DirectProbability(_)) => Encoding::Direct,
        Some(ForecastDistribution::QuantileSet(q)) => Encoding::Quantiles(q.levels().to_vec()),
        Some(ForecastDistribution::TruncatedMixture(_)) => {
            return Err(Error::validation("mixture forecasts have no CSV encoding"))
        }
        None => return Err(Error::validation("no forecasts to write")),
    };
    let mut header = String::from("t,y");
    match &encoding {
        Encoding::Gaussian => header.push_str(",mu,sigma"),
        Encoding::Direct => header.push_str(",p"),
        Encoding::Quantiles(levels) => {
            for l in levels {
                write!(header, ",q_{}", fmt_f64(*l)).expect("string write");
            }
        }
    }
    writeln!(w, "{header}")?;
    for ((t, y), f) in times.iter().zip(outcomes).zip(forecasts) {
        let cols = match (f, &encoding) {
            (ForecastDistribution::Gaussian { mu, sigma }, Encoding::Gaussian) => {
                format!("{},{}", fmt_f64(*mu), fmt_f64(*sigma))
            }
            (ForecastDistribution::DirectProbability(p), Encoding::Direct) => fmt_f64(*p),
            (ForecastDistribution::QuantileSet(q), Encoding::Quantiles(levels)) if q.levels() == levels.as_slice() => {
                q.values().iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
            }
            _ => return Err(Error::validation(format!("forecast at t = {t} does not match the file encoding"))),
        };
        writeln!(w, "{t},{},{cols}", fmt_f64(*y))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_forecasts_file(
    path: impl AsRef<Path>,
    times: &[i64],
    outcomes: &[f64],
    forecasts: &[ForecastDistribution],
) -> Result<()> {
    write_forecasts(BufWriter::new(File::create(path)?), times, outcomes, forecasts)
}

pub const RECORDS_HEADER: &str = "t,p_raw,p_cal,outcome";

pub fn write_records<W: Write>(mut w: W, records: &[ParityRecord]) -> Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            r.t,
            fmt_f64(r.p_raw),
            fmt_f64(r.p_cal),
            u8::from(r.outcome)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_file(path: impl AsRef<Path>, records: &[ParityRecord]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<ParityRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?;
    if headers.iter().collect::<Vec<_>>() != RECORDS_HEADER.split(',').collect::<Vec<_>>() {
        return Err(Error::parse(1, format!("records header must be `{RECORDS_HEADER}`")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 4 {
            return Err(Error::parse(line, format!("expected 4 fields, found {}", rec.len())));
        }
        let t: usize = rec[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("column `t`: `{}` is not an index", &rec[0])))?;
        let p_raw = parse_f64(&rec[1], line, "p_raw")?;
        let p_cal = parse_f64(&rec[2], line, "p_cal")?;
        let outcome = match &rec[3] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(line, format!("outcome must be 0 or 1, got `{other}`"))),
        };
        for p in [p_raw, p_cal] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("line {line}: probability {p} outside [0, 1]")));
            }
        }
        out.push(ParityRecord {
            t,
            p_raw,
            p_cal,
            outcome,
        });
    }
    Ok(out)
}

pub fn read_records_file(path: impl AsRef<Path>) -> Result<Vec<ParityRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

pub const DIAGRAM_HEADER: &str = "bin_lo,bin_hi,pred_avg,obs_avg,count";

/// Empty bins leave the average columns blank.
pub fn write_diagram<W: Write>(mut w: W, diagram: &ReliabilityDiagram) -> Result<()> {
    writeln!(w, "{DIAGRAM_HEADER}")?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for b in &diagram.bins {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(b.lo),
            fmt_f64(b.hi),
            opt(b.pred_avg),
            opt(b.obs_avg),
            b.count
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Keywords naming [`LossMatrix::restrictions`].
pub const BUILTIN_LOSS: [&str; 2] = ["builtin", "paper"];

/// A built-in keyword, otherwise a path to a JSON (`[[..3..],[..3..]]`)
/// or CSV (two rows of three numbers) file.
pub fn load_loss(source: &str) -> Result<LossMatrix> {
    if BUILTIN_LOSS.contains(&source) {
        return Ok(LossMatrix::restrictions());
    }
    let text = std::fs::read_to_string(source)?;
    parse_loss(&text)
}

pub fn parse_loss(text: &str) -> Result<LossMatrix> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let rows: [[f64; 3]; 2] = serde_json::from_str(trimmed).map_err(|e| Error::parse(e.line() as u64, e.to_string()))?;
        return LossMatrix::new(rows);
    }
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 3 => rows.push([v[0], v[1], v[2]]),
            Ok(v) => return Err(Error::parse(line_no, format!("expected 3 losses, found {}", v.len()))),
            // tolerate one header line
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(_) => return Err(Error::parse(line_no, format!("`{line}` is not a row of numbers"))),
        }
    }
    if rows.len() != 2 {
        return Err(Error::parse(0, format!("loss matrix needs 2 rows, found {}", rows.len())));
    }
    LossMatrix::new([rows[0], rows[1]])
}

/// Named hyperparameter settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub ons: OnsConfig,
    pub iw_update_every: usize,
    pub mw_update_every: usize,
    pub mw_window: usize,
}

pub const PRESETS: [Preset; 3] = [
    Preset {
        name: "default",
        ons: OnsConfig { gamma: 0.1, d: 1.0 },
        iw_update_every: 10,
        mw_update_every: 10,
        mw_window: 100,
    },
    Preset {
        name: "covid",
        ons: OnsConfig::COVID,
        iw_update_every: 5,
        mw_update_every: 1,
        mw_window: 10,
    },
    Preset {
        name: "fusion",
        ons: OnsConfig { gamma: 5e-3, d: 150.0 },
        iw_update_every: 8,
        mw_update_every: 1,
        mw_window: 60,
    },
];

impl Preset {
    pub fn by_name(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(name.trim()))
            .copied()
            .ok_or_else(|| Error::validation(format!("unknown preset `{name}`")))
    }

    /// The preset named by [`PRESET_ENV`], or `default`.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRESET_ENV) {
            Ok(name) if !name.trim().is_empty() => Self::by_name(&name),
            _ => Ok(PRESETS[0]),
        }
    }

    pub fn schedule(&self, method: Method) -> ScheduleConfig {
        let update_every = match method {
            Method::MovingWindow => self.mw_update_every,
            _ => self.iw_update_every,
        };
        ScheduleConfig {
            method,
            update_every,
            window: self.mw_window,
            ons: self.ons,
        }
    }
}

/// Everything a CLI run can be configured with.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: ScheduleConfig,
    pub n_bins: usize,
    pub n_levels: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schedule: PRESETS[0].schedule(Method::Ops),
            n_bins: crate::metrics::DEFAULT_BINS,
            n_levels: crate::metrics::DEFAULT_LEVELS,
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_header() {
        let text = "t,y,mu,sigma\n1,0.5,0,1\n2,0.7,0.1,2\n3,1,0,1\n";
        let t = read_forecasts(text.as_bytes()).unwrap();
        assert_eq!(t.encoding, Encoding::Gaussian);
        assert_eq!(t.forecasts.len(), 3);
        assert_eq!(t.forecasts[1], ForecastDistribution::Gaussian { mu: 0.1, sigma: 2.0 });
    }

    #[test]
    fn covid_quantile_header() {
        let text = "t,y,q_0.025,q_0.1,q_0.25,q_0.5,q_0.75,q_0.9,q_0.975\n\
                    1,50,10,20,30,40,50,60,70\n\
                    2,45,11,21,31,41,51,61,71\n";
        let t = read_forecasts(text.as_bytes()).unwrap();
        assert_eq!(
            t.encoding,
            Encoding::Quantiles(vec![0.025, 0.1, 0.25, 0.5, 0.75, 0.9, 0.975])
        );
        assert!(matches!(t.forecasts[0], ForecastDistribution::QuantileSet(_)));
    }

    #[test]
    fn zero_sigma_is_a_validation_error() {
        let text = "t,y,mu,sigma\n1,0.5,0,1\n2,0.7,0.1,0\n";
        let err = read_forecasts(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("line 3")), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_forecasts("t,y,mu,sigma\n1,0.5,0,1\n2,abc,0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_forecasts("t,y,foo\n1,0.5,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn non_increasing_time_rejected() {
        let err = read_forecasts("t,y,p\n2,0.5,0.4\n2,0.7,0.3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let err = read_forecasts("t,y,p\n1,0.5,0.4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn records_header_checked() {
        assert!(read_records("a,b,c,d\n".as_bytes()).is_err());
        let recs = read_records("t,p_raw,p_cal,outcome\n2,0.25,0.5,1\n".as_bytes()).unwrap();
        assert_eq!(recs[0].p_cal, 0.5);
        assert!(recs[0].outcome);
        assert!(read_records("t,p_raw,p_cal,outcome\n2,0.25,0.5,2\n".as_bytes()).is_err());
    }

    #[test]
    fn loss_formats() {
        assert_eq!(parse_loss("[[0.3,0.6,1],[0.5,0.2,0]]").unwrap(), LossMatrix::restrictions());
        assert_eq!(parse_loss("0.3,0.6,1.0\n0.5,0.2,0.0\n").unwrap(), LossMatrix::restrictions());
        assert_eq!(parse_loss("tight,mild,none\n0.3,0.6,1.0\n0.5,0.2,0.0\n").unwrap(), LossMatrix::restrictions());
        assert!(parse_loss("0.3,0.6\n0.5,0.2\n").is_err());
        assert!(matches!(parse_loss("1,0,0\n0,0,0\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn presets() {
        let covid = Preset::by_name("covid").unwrap();
        assert_eq!(covid.ons, OnsConfig { gamma: 0.001, d: 10.0 });
        assert_eq!(covid.schedule(Method::MovingWindow).window, 10);
        assert_eq!(covid.schedule(Method::IncreasingWindow).update_every, 5);
        assert!(Preset::by_name("nope").is_err());
        assert_eq!(RunConfig::default().n_bins, 30);
        assert_eq!(RunConfig::default().n_levels, 100);
        assert_eq!(RunConfig::default().schedule.ons, OnsConfig::default());
    }
}
