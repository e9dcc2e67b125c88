//! `triland` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 internal invariant. Relative
//! `--out`, `--trace` and `--metrics` paths resolve against `TRILAND_OUT_DIR`
//! when it is set. Output files and streams always end with a newline.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::design::{cone_half_angle, design_table, tracking_boundary, DEFAULT_PHASE_LIMIT};
use crate::detection::VoltageTriplet;
use crate::error::{Error, Result};
use crate::format::{round9, sig9};
use crate::geometry::{ArrayGeometry, SPEED_OF_LIGHT};
use crate::guidance::{classify, zero, CalibrationRefs, Frame, GuidanceConfig};
use crate::scenario::load_scenario;
use crate::sim::{calibrate_fixture, run_seeds, run_with, Scenario};

pub const OUT_DIR_ENV: &str = "TRILAND_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

pub const TRACE_HEADER: [&str; 15] = [
    "t_s",
    "lp_x_m",
    "lp_y_m",
    "lp_z_m",
    "yaw_deg",
    "v12",
    "v23",
    "v31",
    "q12",
    "q23",
    "q31",
    "sector",
    "rotation",
    "translation",
    "locked",
];

/// In-memory CSV sink; `finish` yields the newline-terminated text.
struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.into_iter().map(|h| h.as_ref().to_owned()))
            .expect("in-memory write");
        Csv(w)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        self.0.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        let bytes = self.0.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

fn version() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), " (format ", "1", ")")
}

#[derive(Debug, Parser)]
#[command(name = "triland", version = version(), about = "Tri-antenna phase-shift landing guidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tracking boundary radius against LP azimuth.
    DesignBoundary(BoundaryArgs),
    /// Radii, sensitivity and ADC resolution across array spacings.
    DesignTable(TableArgs),
    /// Cone half angle across array spacings.
    Cone(ConeArgs),
    /// Sector decision for one voltage triplet.
    Classify(ClassifyArgs),
    /// One closed-loop landing episode.
    Simulate(SimulateArgs),
    /// Zeroing references from a centred acquisition.
    CalibrateFixture(CalibrateArgs),
    /// LOCK rate against transmit power.
    PowerSweep(SweepArgs),
}

#[derive(Debug, Args)]
struct BoundaryArgs {
    /// m
    #[arg(long, default_value_t = 0.07)]
    spacing: f64,
    /// m
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    altitude: f64,
    /// Hz
    #[arg(long, default_value_t = 2.46e9)]
    freq: f64,
    /// deg
    #[arg(long, default_value_t = DEFAULT_PHASE_LIMIT)]
    phase_limit: f64,
    /// Azimuth step, deg.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// `start:stop:step` or a comma list, m.
    #[arg(long, default_value = "0.04:0.20:0.01")]
    spacing_range: String,
    /// m
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    altitude: f64,
    /// Hz
    #[arg(long, default_value_t = 2.46e9)]
    freq: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
    bits: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConeArgs {
    /// `start:stop:step` or a comma list, m.
    #[arg(long, default_value = "0.035:0.20:0.005")]
    spacing_range: String,
    /// Hz
    #[arg(long, default_value_t = 2.45e9)]
    freq: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    v12: f64,
    #[arg(long, allow_negative_numbers = true)]
    v23: f64,
    #[arg(long, allow_negative_numbers = true)]
    v31: f64,
    /// Raw-voltage references `r12,r23,r31`; inputs are taken as zeroed without it.
    #[arg(long, value_parser = parse_refs, allow_hyphen_values = true)]
    refs: Option<CalibrationRefs>,
    /// V
    #[arg(long, default_value_t = 0.1)]
    lock_threshold: f64,
    /// Report commands for the moving drone instead of the moving LP.
    #[arg(long)]
    drone_frame: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Metrics JSON; printed to stdout when absent.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario cycle count.
    #[arg(long)]
    cycles: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Transmit powers, `start:stop:step` or a comma list, dBm.
    #[arg(long, default_value = "-14:-4:1", allow_hyphen_values = true)]
    tx_range: String,
    /// Episodes per power level.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("bad range '{text}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| round9(start + i as f64 * step)).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn parse_refs(text: &str) -> std::result::Result<CalibrationRefs, String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;
    match v[..] {
        [ref12, ref23, ref31] => Ok(CalibrationRefs {
            ref12,
            ref23,
            ref31,
        }),
        _ => Err(format!(
            "expected three comma-separated voltages, got {}",
            v.len()
        )),
    }
}

/// Resolves a relative output path against `TRILAND_OUT_DIR`.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let p = resolve_out(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// JSON with every float rounded to 9 significant digits, newline-terminated.
pub fn to_json<T: Serialize>(value: &T) -> String {
    fn round(v: &mut Value) {
        match v {
            Value::Number(n) if n.is_f64() => {
                if let Some(x) = n
                    .as_f64()
                    .and_then(|f| serde_json::Number::from_f64(round9(f)))
                {
                    *n = x;
                }
            }
            Value::Array(a) => a.iter_mut().for_each(round),
            Value::Object(o) => o.values_mut().for_each(round),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(value).expect("serializable");
    round(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn design_boundary(a: &BoundaryArgs) -> Result<String> {
    let geom = ArrayGeometry::with_speed(a.spacing, a.freq, SPEED_OF_LIGHT)?;
    let b = tracking_boundary(&geom, a.altitude, a.phase_limit, a.step)?;
    let mut csv = Csv::new(["phi_deg", "r_max_m"]);
    for (phi, r) in &b.samples {
        csv.row([sig9(*phi), sig9(*r)]);
    }
    Ok(csv.finish())
}

fn design_table_csv(a: &TableArgs) -> Result<String> {
    let d = parse_range(&a.spacing_range)?;
    let rows = design_table(&d, a.altitude, a.freq, &a.bits)?;
    let header = ["d_m", "r_min_m", "r_max_m", "sens_mv_per_cm"]
        .map(String::from)
        .into_iter()
        .chain(a.bits.iter().map(|b| format!("step_cm_b{b}")));
    let mut csv = Csv::new(header);
    for row in rows {
        let fixed = [row.spacing_d, row.r_min, row.r_max, row.sensitivity];
        let steps = row.adc_step_distance.iter().map(|(_, step)| *step);
        csv.row(fixed.into_iter().chain(steps).map(sig9));
    }
    Ok(csv.finish())
}

fn cone_csv(a: &ConeArgs) -> Result<String> {
    let mut csv = Csv::new(["d_m", "half_angle_deg"]);
    for d in parse_range(&a.spacing_range)? {
        let geom = ArrayGeometry::new(d, a.freq)?;
        csv.row([sig9(d), sig9(cone_half_angle(&geom, DEFAULT_PHASE_LIMIT)?)]);
    }
    Ok(csv.finish())
}

fn classify_json(a: &ClassifyArgs) -> Result<String> {
    let config = GuidanceConfig {
        lock_threshold: a.lock_threshold,
        frame: if a.drone_frame {
            Frame::DroneMoves
        } else {
            Frame::LpMoves
        },
    };
    config.validate()?;
    let v = VoltageTriplet::new(a.v12, a.v23, a.v31);
    if !v.as_array().iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidParameter("voltages must be finite".into()));
    }
    let zeroed = match &a.refs {
        Some(r) => zero(&v, r),
        None => v,
    };
    Ok(to_json(&classify(&zeroed, &config)))
}

fn scenario_with_seed(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let mut s = load_scenario(path)?;
    if let Some(seed) = seed {
        s.rng_seed = seed;
    }
    Ok(s)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let scenario = scenario_with_seed(&a.scenario, a.seed)?;
    let mut trace = a.trace.as_ref().map(|_| Csv::new(TRACE_HEADER));
    let (_, metrics) = run_with(&scenario, |r| {
        if let Some(t) = trace.as_mut() {
            let lp = r.pose.lp_offset();
            let nums = [
                r.time,
                lp.x,
                lp.y,
                lp.z,
                r.pose.drone_yaw(),
                r.raw.v12,
                r.raw.v23,
                r.raw.v31,
            ];
            let d = &r.decision;
            let tail = [
                r.codes[0].to_string(),
                r.codes[1].to_string(),
                r.codes[2].to_string(),
                d.sector.as_str().to_owned(),
                d.rotation.as_str().to_owned(),
                d.translation.as_str().to_owned(),
                d.locked.to_string(),
            ];
            t.row(nums.into_iter().map(sig9).chain(tail));
        }
    })?;
    if let (Some(path), Some(csv)) = (&a.trace, trace) {
        emit(Some(path), &csv.finish())?;
    }
    emit(a.metrics.as_deref(), &to_json(&metrics))
}

fn calibrate(a: &CalibrateArgs) -> Result<String> {
    let scenario = scenario_with_seed(&a.scenario, a.seed)?;
    scenario.validate()?;
    let refs = calibrate_fixture(&scenario, a.cycles.unwrap_or(scenario.calibration_cycles))?;
    Ok(to_json(&refs))
}

fn power_sweep(a: &SweepArgs) -> Result<String> {
    let base = load_scenario(&a.scenario)?;
    if a.seeds == 0 {
        return Err(Error::InvalidParameter("--seeds must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..a.seeds)
        .map(|k| base.rng_seed.wrapping_add(k))
        .collect();
    let mut csv = Csv::new(["tx_dbm", "episodes", "locked", "on_target", "on_target_rate"]);
    for tx in parse_range(&a.tx_range)? {
        let mut sc = base.clone();
        sc.budget.tx_power = tx;
        let rep = run_seeds(&sc, &seeds)?;
        let m = &rep.summary;
        csv.row([
            sig9(tx),
            m.episodes.to_string(),
            m.locked.to_string(),
            m.on_target.to_string(),
            sig9(m.on_target_rate),
        ]);
    }
    Ok(csv.finish())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Invariant(_) | Error::EmptyCalibration => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DesignBoundary(a) => emit(a.out.as_deref(), &design_boundary(&a)?),
        Command::DesignTable(a) => emit(a.out.as_deref(), &design_table_csv(&a)?),
        Command::Cone(a) => emit(a.out.as_deref(), &cone_csv(&a)?),
        Command::Classify(a) => emit(None, &classify_json(&a)?),
        Command::Simulate(a) => simulate(&a),
        Command::CalibrateFixture(a) => emit(a.out.as_deref(), &calibrate(&a)?),
        Command::PowerSweep(a) => emit(a.out.as_deref(), &power_sweep(&a)?),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("triland: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_cli(std::env::args_os())
}
