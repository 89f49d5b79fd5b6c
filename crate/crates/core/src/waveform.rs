//! Value Change Dump output.
//!
//! The emitted subset is `$timescale 1ps $end`, one `$var wire` per signal,
//! `$enddefinitions $end`, a `$dumpvars` block with all-`x` initial values,
//! then `#<time>` markers and value changes.

use std::io::{self, Write};

use thiserror::Error;

use crate::kernel::{Signal, SimTime};
use crate::logic::BitVector;
use crate::sram::SramConfig;

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("duplicate signal name `{0}`")]
    DuplicateName(String),
    #[error("undeclared signal `{0}`")]
    Undeclared(String),
    #[error("time {at} is before the current marker {now}")]
    TimeRegression { at: SimTime, now: SimTime },
    #[error("value for `{name}` has width {actual}, declared {declared}")]
    Width {
        name: String,
        declared: usize,
        actual: usize,
    },
}

/// Receiver of the pin-level change stream produced by the kernel.
pub trait WaveformSink {
    fn change(&mut self, time: SimTime, signal: Signal, value: &BitVector) -> Result<(), WaveformError>;

    /// Called once when the run ends at `end`.
    fn finish(&mut self, _end: SimTime) -> Result<(), WaveformError> {
        Ok(())
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl WaveformSink for NullSink {
    fn change(&mut self, _: SimTime, _: Signal, _: &BitVector) -> Result<(), WaveformError> {
        Ok(())
    }
}

/// Keeps every value change in memory, suppressing repeats like the VCD
/// writer does.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct TraceRecorder {
    pub changes: Vec<(SimTime, Signal, BitVector)>,
}

impl TraceRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_value(&self, signal: Signal) -> Option<&BitVector> {
        self.changes
            .iter()
            .rev()
            .find(|(_, s, _)| *s == signal)
            .map(|(_, _, v)| v)
    }

    pub fn of(&self, signal: Signal) -> impl Iterator<Item = (SimTime, &BitVector)> {
        self.changes
            .iter()
            .filter(move |(_, s, _)| *s == signal)
            .map(|(t, _, v)| (*t, v))
    }
}

impl WaveformSink for TraceRecorder {
    fn change(&mut self, time: SimTime, signal: Signal, value: &BitVector) -> Result<(), WaveformError> {
        if self.last_value(signal) != Some(value) {
            self.changes.push((time, signal, value.clone()));
        }
        Ok(())
    }
}

#[derive(Debug)]
struct VarDecl {
    name: String,
    code: String,
    last: BitVector,
}

/// Identifier code for the `index`-th declared signal: printable ASCII from
/// `!` upward, spilling into more characters after `~`.
pub fn id_code(mut index: usize) -> String {
    const FIRST: u8 = b'!';
    const RADIX: usize = (b'~' - b'!' + 1) as usize;
    let mut code = Vec::new();
    loop {
        code.push(FIRST + (index % RADIX) as u8);
        index /= RADIX;
        if index == 0 {
            break;
        }
        index -= 1;
    }
    String::from_utf8(code).expect("ascii")
}

pub struct VcdWriter<W: Write> {
    out: W,
    vars: Vec<VarDecl>,
    marker: Option<SimTime>,
}

impl<W: Write> VcdWriter<W> {
    /// Writes the header and the initial `$dumpvars` block.
    pub fn begin(mut out: W, signals: &[(&str, usize)]) -> Result<Self, WaveformError> {
        let mut vars: Vec<VarDecl> = Vec::with_capacity(signals.len());
        for (i, &(name, width)) in signals.iter().enumerate() {
            if vars.iter().any(|v| v.name == name) {
                return Err(WaveformError::DuplicateName(name.to_string()));
            }
            vars.push(VarDecl {
                name: name.to_string(),
                code: id_code(i),
                last: BitVector::unknown(width),
            });
        }

        writeln!(out, "$timescale 1ps $end")?;
        for v in &vars {
            writeln!(out, "$var wire {} {} {} $end", v.last.width(), v.code, v.name)?;
        }
        writeln!(out, "$enddefinitions $end")?;
        writeln!(out, "$dumpvars")?;
        for v in &vars {
            write_value(&mut out, &v.last, &v.code)?;
        }
        writeln!(out, "$end")?;
        Ok(VcdWriter {
            out,
            vars,
            marker: None,
        })
    }

    /// Declares the device pins `WE WCLK A D O` in that order.
    pub fn for_device(out: W, config: &SramConfig) -> Result<Self, WaveformError> {
        let decls: Vec<(&str, usize)> = Signal::ALL
            .iter()
            .map(|&s| (s.name(), config.width_of(s)))
            .collect();
        Self::begin(out, &decls)
    }

    pub fn change_named(&mut self, time: SimTime, name: &str, value: &BitVector) -> Result<(), WaveformError> {
        if let Some(now) = self.marker {
            if time < now {
                return Err(WaveformError::TimeRegression { at: time, now });
            }
        }
        let var = self
            .vars
            .iter_mut()
            .find(|v| v.name == name)
            .ok_or_else(|| WaveformError::Undeclared(name.to_string()))?;
        if var.last.width() != value.width() {
            return Err(WaveformError::Width {
                name: name.to_string(),
                declared: var.last.width(),
                actual: value.width(),
            });
        }
        if var.last == *value {
            return Ok(());
        }
        var.last = value.clone();
        if self.marker != Some(time) {
            writeln!(self.out, "#{}", time.ps())?;
            self.marker = Some(time);
        }
        write_value(&mut self.out, value, &var.code)?;
        Ok(())
    }

    pub fn into_inner(mut self) -> Result<W, WaveformError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> WaveformSink for VcdWriter<W> {
    fn change(&mut self, time: SimTime, signal: Signal, value: &BitVector) -> Result<(), WaveformError> {
        self.change_named(time, signal.name(), value)
    }

    /// Closes the trace with a final time marker so viewers show the whole run.
    fn finish(&mut self, end: SimTime) -> Result<(), WaveformError> {
        if self.marker.is_none_or(|m| end > m) {
            writeln!(self.out, "#{}", end.ps())?;
            self.marker = Some(end);
        }
        self.out.flush()?;
        Ok(())
    }
}

fn write_value<W: Write>(out: &mut W, value: &BitVector, code: &str) -> io::Result<()> {
    if value.width() == 1 {
        writeln!(out, "{}{}", value.bit(0).to_char(), code)
    } else {
        writeln!(out, "b{} {}", value.to_bit_string(), code)
    }
}
