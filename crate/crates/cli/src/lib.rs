//! Command-line driver: `run`, `check` and `table` subcommands.
//!
//! Exit codes: 0 for a clean run, 2 when the run detected timing
//! violations, 1 for usage, I/O or parse errors.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sramsim_core::sram::Diagnostic;
use sramsim_core::{
    simulate, AccessMeasurement, BitVector, SimTime, SimulationReport, SramConfig, Stimulus,
    VcdWriter, Violation,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sramsim", version, about = "Timing-annotated synchronous SRAM simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a stimulus file, write a VCD trace and print a report.
    Run {
        stimulus: PathBuf,
        /// VCD output path [default: stimulus path with a .vcd extension]
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
        #[command(flatten)]
        device: DeviceArgs,
    },
    /// Parse and validate a stimulus file without simulating it.
    Check {
        stimulus: PathBuf,
        #[command(flatten)]
        device: DeviceArgs,
    },
    /// Print the device's operating-mode table.
    Table {
        #[command(flatten)]
        device: DeviceArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    JsonLines,
}

/// Device geometry, contents and timing. Delays are in picoseconds.
#[derive(Debug, Clone, Args)]
pub struct DeviceArgs {
    #[arg(long, default_value_t = 16)]
    pub words: usize,
    #[arg(long, default_value_t = 2)]
    pub bits: usize,
    /// Initial contents of output-bit column N as `N=LITERAL`; also
    /// accepted as `--init-NN LITERAL`.
    #[arg(long = "init", value_name = "N=LITERAL")]
    pub init: Vec<String>,
    /// Write on the falling WCLK edge.
    #[arg(long)]
    pub active_low: bool,
    #[arg(long, default_value_t = sramsim_core::sram::DEFAULT_T_SETUP)]
    pub t_setup: u64,
    #[arg(long, default_value_t = sramsim_core::sram::DEFAULT_T_HOLD)]
    pub t_hold: u64,
    #[arg(long, default_value_t = sramsim_core::sram::DEFAULT_T_AC)]
    pub t_ac: u64,
    /// [default: same as --t-ac]
    #[arg(long)]
    pub t_cko: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub t_ibuf: u64,
    #[arg(long, default_value_t = 0)]
    pub t_obuf: u64,
}

impl Default for DeviceArgs {
    fn default() -> Self {
        DeviceArgs::parse_from(["device"])
    }
}

#[derive(Debug, Parser)]
struct DeviceOnly {
    #[command(flatten)]
    device: DeviceArgs,
}

impl DeviceArgs {
    fn parse_from<I: IntoIterator<Item = &'static str>>(args: I) -> Self {
        DeviceOnly::parse_from(args).device
    }

    pub fn to_config(&self) -> Result<SramConfig, String> {
        let mut cfg = SramConfig::with_geometry(self.words, self.bits);
        cfg.clock_active_rising = !self.active_low;
        cfg.t_setup = self.t_setup;
        cfg.t_hold = self.t_hold;
        cfg.t_ac = self.t_ac;
        cfg.t_cko = self.t_cko.unwrap_or(self.t_ac);
        cfg.t_ibuf = self.t_ibuf;
        cfg.t_obuf = self.t_obuf;
        cfg.validate().map_err(|e| e.to_string())?;
        for entry in &self.init {
            let (index, literal) = entry
                .split_once('=')
                .ok_or_else(|| format!("--init expects N=LITERAL, got `{entry}`"))?;
            let index: usize = index
                .parse()
                .map_err(|_| format!("bad INIT column `{index}`"))?;
            if index >= self.bits {
                return Err(format!(
                    "INIT column {index} out of range for a {}-bit device",
                    self.bits
                ));
            }
            cfg.init[index] = BitVector::parse(literal, self.words)
                .map_err(|e| format!("INIT_{index:02}: {e}"))?;
        }
        Ok(cfg)
    }
}

/// Rewrites `--init-NN X` / `--init-NN=X` into `--init NN=X`.
pub fn normalize_args(args: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(rest) = arg.strip_prefix("--init-") else {
            out.push(arg);
            continue;
        };
        let (index, inline) = match rest.split_once('=') {
            Some((i, v)) => (i.to_string(), Some(v.to_string())),
            None => (rest.to_string(), None),
        };
        if index.is_empty() || !index.chars().all(|c| c.is_ascii_digit()) {
            out.push(arg);
            continue;
        }
        let value = inline.or_else(|| it.next()).unwrap_or_default();
        out.push("--init".into());
        out.push(format!("{index}={value}"));
    }
    out
}

/// Entry point shared by the binary and the tests.
pub fn main_with(
    args: impl IntoIterator<Item = String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            stimulus,
            output,
            report,
            device,
        } => {
            let output = output.unwrap_or_else(|| stimulus.with_extension("vcd"));
            cmd_run(&stimulus, &output, &device, report, out)
        }
        Command::Check { stimulus, device } => cmd_check(&stimulus, &device, out),
        Command::Table { device } => device.to_config().map(|cfg| {
            let _ = write!(out, "{}", render_table(&cfg));
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn load(path: &Path, device: &DeviceArgs) -> Result<(SramConfig, Stimulus), String> {
    let cfg = device.to_config()?;
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let stim = Stimulus::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    stim.check_ports(&cfg)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((cfg, stim))
}

pub fn cmd_run(
    stimulus: &Path,
    output: &Path,
    device: &DeviceArgs,
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<i32, String> {
    let (cfg, stim) = load(stimulus, device)?;
    let file = fs::File::create(output).map_err(|e| format!("{}: {e}", output.display()))?;
    let mut vcd = VcdWriter::for_device(BufWriter::new(file), &cfg).map_err(|e| e.to_string())?;
    let (_, report) = simulate(&cfg, &stim, &mut vcd).map_err(|e| e.to_string())?;
    vcd.into_inner().map_err(|e| e.to_string())?;

    let rendered = match format {
        ReportFormat::Text => render_text(&report),
        ReportFormat::JsonLines => render_json_lines(&report),
    };
    write!(out, "{rendered}").map_err(|e| e.to_string())?;
    Ok(if report.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    })
}

pub fn cmd_check(stimulus: &Path, device: &DeviceArgs, out: &mut dyn Write) -> Result<i32, String> {
    let (_, stim) = load(stimulus, device)?;
    let events = stim
        .expand()
        .map_err(|e| format!("{}: {e}", stimulus.display()))?;
    writeln!(
        out,
        "ok: {} events, run until {}",
        events.len(),
        stim.run_until
    )
    .map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

/// `12345` ps as `12.345ns`.
pub fn format_ns(ps: u64) -> String {
    format!("{}.{:03}ns", ps / 1000, ps % 1000)
}

fn format_ns_f64(ps: f64) -> String {
    format!("{:.3}ns", ps / 1000.0)
}

pub fn violation_line(v: &Violation) -> String {
    format!(
        "VIOLATION {} signal={} edge={}ps stable={}ps required={}ps",
        v.kind,
        v.signal,
        v.edge_time.ps(),
        v.actual_stable,
        v.required
    )
}

pub fn access_line(m: &AccessMeasurement) -> String {
    format!(
        "ACCESS cause={} trigger={}ps settle={}ps latency={}",
        m.cause,
        m.trigger_time.ps(),
        m.settle_time.ps(),
        format_ns(m.latency)
    )
}

pub fn access_summary(measurements: &[AccessMeasurement]) -> String {
    let latencies: Vec<u64> = measurements.iter().map(|m| m.latency).collect();
    match (latencies.iter().min(), latencies.iter().max()) {
        (Some(&min), Some(&max)) => {
            let avg = latencies.iter().sum::<u64>() as f64 / latencies.len() as f64;
            format!(
                "access_time: min={} avg={} max={}",
                format_ns(min),
                format_ns_f64(avg),
                format_ns(max)
            )
        }
        _ => "access_time: none".to_string(),
    }
}

pub fn render_text(report: &SimulationReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("final_time: {}\n", format_ns(report.final_time.ps())));
    s.push_str(&format!("events: {}\n", report.events_processed));
    s.push_str(&format!("writes: {}\n", report.writes_committed));
    s.push_str(&format!("violations: {}\n", report.violations.len()));
    for v in &report.violations {
        s.push_str(&violation_line(v));
        s.push('\n');
    }
    for d in &report.diagnostics {
        s.push_str(&format!("NOTE t={}ps {}\n", d.time.ps(), d.message));
    }
    for m in &report.access_times {
        s.push_str(&access_line(m));
        s.push('\n');
    }
    s.push_str(&access_summary(&report.access_times));
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Summary {
    final_time: SimTime,
    events: u64,
    writes: u64,
    violations: usize,
    measurements: usize,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record<'a> {
    Violation(&'a Violation),
    Access(&'a AccessMeasurement),
    Diagnostic(&'a Diagnostic),
    Summary(Summary),
}

pub fn render_json_lines(report: &SimulationReport) -> String {
    let records = report
        .violations
        .iter()
        .map(Record::Violation)
        .chain(report.diagnostics.iter().map(Record::Diagnostic))
        .chain(report.access_times.iter().map(Record::Access))
        .chain(std::iter::once(Record::Summary(Summary {
            final_time: report.final_time,
            events: report.events_processed,
            writes: report.writes_committed,
            violations: report.violations.len(),
            measurements: report.access_times.len(),
        })));
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(&r).expect("serializable"));
        s.push('\n');
    }
    s
}

fn bus(prefix: char, width: usize) -> String {
    if width == 1 {
        format!("{prefix}0")
    } else {
        format!("{prefix}{}:{prefix}0", width - 1)
    }
}

/// The operating-mode table for `cfg`'s polarity and geometry.
pub fn render_table(cfg: &SramConfig) -> String {
    let (write_edge, read_edge) = if cfg.clock_active_rising {
        ("↑", "↓")
    } else {
        ("↓", "↑")
    };
    let d = bus('D', cfg.data_bits);
    let o = bus('O', cfg.data_bits);
    let rows = [
        ["WE (mode)", "WCLK", d.as_str(), o.as_str()],
        ["0 (read)", "X", "X", "Data"],
        ["1 (read)", "0", "X", "Data"],
        ["1 (read)", "1", "X", "Data"],
        ["1 (write)", write_edge, d.as_str(), d.as_str()],
        ["1 (read)", read_edge, "X", "Data"],
    ];
    let mut widths = [0usize; 4];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut s = format!("{}-word by {}-bit static RAM\n", cfg.words, cfg.data_bits);
    for row in &rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            line.push_str(cell);
            if i + 1 < row.len() {
                let pad = widths[i] - cell.chars().count() + 2;
                line.push_str(&" ".repeat(pad));
            }
        }
        s.push_str(&line);
        s.push('\n');
    }
    s.push_str(&format!(
        "Data = word addressed by bits {}\n",
        bus('A', cfg.addr_bits())
    ));
    s
}

/// Runs the CLI against the real process streams.
pub fn main_from_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}
