//! `edm`: command-line front end for metering, reconstruction, comparison,
//! duration-of-use tariff evaluation and demand-response baselines.
//!
//! Exit status is 0 on success, 2 for invalid invocations and 1 when the
//! input data or configuration is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edm_core::{
    adjusted_baseline, apply_penalty, compare, duration_curve, excess_energy, initial_baseline, metrics,
    reconstruct_from_events, reconstruct_from_intervals, reference_day_spec, run_edm, sample_tdm, BaselineConfig,
    BaselineMode, DailyProfileSet, DemandPattern, DouLimitSchedule, EdmConfig, EventStream, IntervalSeries, LineModel,
    LoadSpec,
};
use serde::Serialize;

type Pattern = DemandPattern<f64>;

#[derive(Parser, Debug)]
#[command(name = "edm", version, about = "Event-driven and interval energy metering toolkit")]
#[command(after_help = "\
CSV layouts (comma separated, one header row, `\\n` line endings):
  pattern    t_s,p_w                          interval start, average power
  events     t_end_s,energy_ws,triggers       triggers: D1, D2, BILL joined by `+`
  intervals  t_end_s,energy_ws,partial        partial: 1 on a short trailing step
  report     label,points,peak_w,peak_pct,rms_w,loss_pct
  curve      rank_s,p_w
  limits     t_end_s,p_w                      limit applies on (previous t_end_s, t_end_s]
  dou        segment_end_s,limit_w,excess_wh  plus a trailing `summary` row
  history    day_index,interval_index,p_w,is_event_day
  baseline   interval_index,p_w")]
struct Cli {
    /// Write a JSON description of the run (inputs, parameters, outputs).
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic demand pattern.
    Synth(SynthArgs),
    /// Run the event-driven meter over a pattern.
    Meter(MeterArgs),
    /// Sample a pattern with a fixed metering step.
    Sample(SampleArgs),
    /// Rebuild a piecewise-constant pattern from events or intervals.
    Reconstruct(ReconstructArgs),
    /// Compare metering representations against the source pattern.
    Compare(CompareArgs),
    /// Sort a pattern into its demand duration curve.
    Duration(DurationArgs),
    /// Evaluate excess energy above duration-of-use limits.
    Dou(DouArgs),
    /// Compute an X-of-Y customer baseline.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Load description file; the built-in reference day is used when absent.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Overrides the seed of the load description.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MeterArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Change-of-value threshold in W (`inf` disables it).
    #[arg(long, value_parser = non_negative)]
    d1: f64,
    /// Accumulated-deviation threshold in Ws (`inf` disables it).
    #[arg(long, value_parser = non_negative)]
    d2: f64,
    /// Billing period in s; defaults to the pattern horizon.
    #[arg(long)]
    billing: Option<i64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Metering step in s; must be a multiple of the pattern step.
    #[arg(long)]
    step: i64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["events", "intervals"])))]
struct ReconstructArgs {
    #[arg(long, value_name = "FILE")]
    events: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    intervals: Option<PathBuf>,
    /// Elementary interval of the output pattern in s.
    #[arg(long, default_value_t = 1)]
    tau: i64,
    /// Start of the metered horizon in s.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    start: i64,
    /// Interval step in s; inferred from the first row when absent.
    #[arg(long)]
    step: Option<i64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Interval metering steps in s, e.g. `60,900,3600`.
    #[arg(long, value_delimiter = ',', default_value = "3600,1800,900,60")]
    tdm: Vec<i64>,
    /// Event-driven threshold pairs `d1:d2`, e.g. `500:500,120:500`.
    #[arg(long, value_delimiter = ',', value_parser = threshold_pair, default_value = "500:500")]
    edm: Vec<(f64, f64)>,
    /// Billing period in s for the event-driven meters; defaults to the horizon.
    #[arg(long)]
    billing: Option<i64>,
    /// Line resistance in ohm used for the loss estimate.
    #[arg(long, default_value_t = 0.58, value_parser = non_negative)]
    resistance: f64,
    /// Supply voltage in V used for the loss estimate.
    #[arg(long, default_value_t = 230.0, value_parser = non_negative)]
    voltage: f64,
    /// Report file; written to stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DurationArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DouArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    limits: PathBuf,
    /// Read limit powers as per cent of this power in W.
    #[arg(long, value_name = "W", value_parser = non_negative)]
    percent_of: Option<f64>,
    /// Fraction of the area under the limits tolerated before pricing.
    #[arg(long, value_parser = non_negative)]
    tolerance: Option<f64>,
    /// Price per kWh of penalised excess energy.
    #[arg(long, value_parser = non_negative, requires = "tolerance")]
    price: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long, value_name = "FILE")]
    history: PathBuf,
    /// Length of one profile interval in s.
    #[arg(long, default_value_t = 3600)]
    interval: i64,
    /// Day selection: high, low or mid.
    #[arg(long, default_value = "high")]
    mode: BaselineMode,
    #[arg(long)]
    x: usize,
    #[arg(long)]
    y: usize,
    /// Day the baseline is computed for.
    #[arg(long)]
    event_day: i64,
    /// Adjust with the event day's own readings from the history file.
    #[arg(long, requires = "notification")]
    adjust: bool,
    /// Notification time in s after midnight of the event day.
    #[arg(long)]
    notification: Option<i64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_nan() || v < 0.0 {
        return Err(format!("`{s}` must be >= 0"));
    }
    Ok(v)
}

fn threshold_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not of the form d1:d2"))?;
    Ok((non_negative(a)?, non_negative(b)?))
}

/// Failure of a run, split by exit status.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<edm_core::Error> for Failure {
    fn from(e: edm_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Vec<String>,
    parameters: BTreeMap<&'static str, String>,
    outputs: Vec<String>,
    summary: BTreeMap<&'static str, String>,
}

impl RunManifest {
    fn new(command: &'static str) -> Self {
        Self {
            tool: "edm",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    fn output(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }

    fn param(&mut self, key: &'static str, value: impl ToString) {
        self.parameters.insert(key, value.to_string());
    }

    fn note(&mut self, key: &'static str, value: impl ToString) {
        self.summary.insert(key, value.to_string());
    }
}

fn read_pattern(path: &Path, m: &mut RunManifest) -> Result<Pattern, Failure> {
    m.input(path);
    Ok(DemandPattern::read_csv(path)?)
}

fn edm_config(d1: f64, d2: f64, pattern: &Pattern, billing: Option<i64>) -> Result<EdmConfig<f64>, Failure> {
    let billing = billing.unwrap_or_else(|| pattern.horizon_s());
    EdmConfig::new(d1, d2, pattern.tau_s(), billing).map_err(|e| Failure::Usage(e.to_string()))
}

fn synth(a: &SynthArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let mut spec = match &a.spec {
        Some(path) => {
            m.input(path);
            LoadSpec::read(path)?
        }
        None => reference_day_spec(a.seed.unwrap_or(42)),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    m.param("seed", spec.seed);
    let pattern: Pattern = edm_core::generate(&spec)?;
    pattern.write_csv(&a.out)?;
    m.output(&a.out);
    m.note("samples", pattern.len());
    m.note("energy_kwh", format!("{:.6}", pattern.total_energy().kwh()));
    Ok(())
}

fn meter(a: &MeterArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let pattern = read_pattern(&a.input, m)?;
    let cfg = edm_config(a.d1, a.d2, &pattern, a.billing)?;
    m.param("d1_w", cfg.delta1_w);
    m.param("d2_ws", cfg.delta2_ws);
    m.param("billing_s", cfg.billing_period_s);
    let stream = run_edm(&pattern, &cfg)?;
    stream.write_csv(&a.out)?;
    m.output(&a.out);
    m.note("events", stream.len());
    Ok(())
}

fn sample(a: &SampleArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let pattern = read_pattern(&a.input, m)?;
    m.param("step_s", a.step);
    let series = sample_tdm(&pattern, a.step).map_err(|e| Failure::Usage(e.to_string()))?;
    series.write_csv(&a.out)?;
    m.output(&a.out);
    m.note("intervals", series.len());
    Ok(())
}

fn reconstruct(a: &ReconstructArgs, m: &mut RunManifest) -> Result<(), Failure> {
    m.param("tau_s", a.tau);
    m.param("start_s", a.start);
    let pattern = if let Some(path) = &a.events {
        m.input(path);
        reconstruct_from_events(&EventStream::<f64>::read_csv(path, a.tau, a.start)?)
    } else {
        let path = a.intervals.as_ref().expect("clap enforces one source");
        m.input(path);
        let series = IntervalSeries::<f64>::read_csv(path, a.start, a.step)?;
        reconstruct_from_intervals(&series, a.tau)?
    };
    pattern.write_csv(&a.out)?;
    m.output(&a.out);
    m.note("samples", pattern.len());
    Ok(())
}

fn compare_cmd(a: &CompareArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let pattern = read_pattern(&a.input, m)?;
    let configs = a
        .edm
        .iter()
        .map(|&(d1, d2)| edm_config(d1, d2, &pattern, a.billing))
        .collect::<Result<Vec<_>, _>>()?;
    let line = LineModel::new(a.resistance, a.voltage).map_err(|e| Failure::Usage(e.to_string()))?;
    m.param("tdm_s", join(a.tdm.iter()));
    m.param("edm", join(a.edm.iter().map(|(d1, d2)| format!("{d1}:{d2}"))));
    m.param("resistance_ohm", a.resistance);
    m.param("voltage_v", a.voltage);
    let reports = compare(&pattern, &a.tdm, &configs, &line)?;
    match &a.out {
        Some(path) => {
            metrics::write_report_csv(&reports, path)?;
            m.output(path);
        }
        None => metrics::write_report(&reports, std::io::stdout().lock())?,
    }
    m.note("rows", reports.len());
    Ok(())
}

fn duration(a: &DurationArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let pattern = read_pattern(&a.input, m)?;
    duration_curve(&pattern).write_csv(&a.out)?;
    m.output(&a.out);
    Ok(())
}

fn dou(a: &DouArgs, m: &mut RunManifest) -> Result<(), Failure> {
    let pattern = read_pattern(&a.input, m)?;
    m.input(&a.limits);
    let mut limits = DouLimitSchedule::<f64>::read_csv(&a.limits)?;
    if let Some(reference) = a.percent_of {
        m.param("percent_of_w", reference);
        limits = limits.from_percent(reference)?;
    }
    let mut eval = excess_energy(&duration_curve(&pattern), &limits)?;
    if let Some(tol) = a.tolerance {
        if tol > 1.0 {
            return Err(Failure::Usage(format!("--tolerance must lie in [0, 1], got {tol}")));
        }
        let price = a.price.unwrap_or(0.0);
        m.param("tolerance", tol);
        m.param("price_per_kwh", price);
        eval = apply_penalty(&eval, tol, price)?;
    }
    eval.write_csv(&a.out)?;
    m.output(&a.out);
    m.note("total_excess_wh", eval.total_excess_wh);
    Ok(())
}

fn baseline(a: &BaselineArgs, m: &mut RunManifest) -> Result<(), Failure> {
    if a.x == 0 || a.x > a.y {
        return Err(Failure::Usage(format!(
            "--x must lie in [1, --y], got x={} y={}",
            a.x, a.y
        )));
    }
    m.input(&a.history);
    let history = DailyProfileSet::<f64>::read_csv(&a.history, a.interval)?;
    let cfg = BaselineConfig::new(a.mode, a.x, a.y).map_err(|e| Failure::Usage(e.to_string()))?;
    m.param("mode", a.mode);
    m.param("x", a.x);
    m.param("y", a.y);
    m.param("event_day", a.event_day);
    let mut profile = initial_baseline(&history, &cfg, a.event_day)?;
    if a.adjust {
        let notification = a.notification.expect("clap enforces --notification");
        m.param("notification_s", notification);
        let observed = history
            .profile_of(a.event_day)
            .ok_or_else(|| Failure::Data(format!("history has no readings for event day {}", a.event_day)))?;
        profile = adjusted_baseline(&profile, &observed, notification, &cfg)?;
    }
    profile.write_csv(&a.out)?;
    m.output(&a.out);
    Ok(())
}

fn join<I: IntoIterator<Item = T>, T: ToString>(items: I) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let name = match &cli.command {
        Command::Synth(_) => "synth",
        Command::Meter(_) => "meter",
        Command::Sample(_) => "sample",
        Command::Reconstruct(_) => "reconstruct",
        Command::Compare(_) => "compare",
        Command::Duration(_) => "duration",
        Command::Dou(_) => "dou",
        Command::Baseline(_) => "baseline",
    };
    let mut m = RunManifest::new(name);
    match &cli.command {
        Command::Synth(a) => synth(a, &mut m),
        Command::Meter(a) => meter(a, &mut m),
        Command::Sample(a) => sample(a, &mut m),
        Command::Reconstruct(a) => reconstruct(a, &mut m),
        Command::Compare(a) => compare_cmd(a, &mut m),
        Command::Duration(a) => duration(a, &mut m),
        Command::Dou(a) => dou(a, &mut m),
        Command::Baseline(a) => baseline(a, &mut m),
    }?;
    if let Some(path) = &cli.manifest {
        let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
        std::fs::write(path, json + "\n")
            .map_err(|e| Failure::Data(format!("{}: cannot write manifest: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("edm: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("edm: error: {msg}");
            ExitCode::from(1)
        }
    }
}
