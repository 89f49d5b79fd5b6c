//! Line-oriented testbench format (`.stim`).
//!
//! ```text
//! # comment
//! signal <name> <width>
//! clock <name> period <ps> [duty <a>/<b>] [start <0|1>] [from <ps>]
//! at <ps> <name> <literal>
//! run <ps>
//! ```
//!
//! Signal names are the device inputs `WE`, `WCLK`, `A` and `D`. Times are
//! absolute picoseconds.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::kernel::{Event, Signal, SimTime};
use crate::logic::{Bit, BitVector, LiteralError};
use crate::sram::SramConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StimulusErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("malformed `{directive}` line: {reason}")]
    Syntax {
        directive: &'static str,
        reason: String,
    },
    #[error("`{0}` is not a device input (expected WE, WCLK, A or D)")]
    NotAnInput(String),
    #[error("signal `{0}` declared twice")]
    DuplicateSignal(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("{signal}: {source}")]
    Literal {
        signal: Signal,
        #[source]
        source: LiteralError,
    },
    #[error("clock on `{0}` must be 1 bit wide")]
    ClockWidth(Signal),
    #[error("duplicate clock on `{0}`")]
    DuplicateClock(Signal),
    #[error("duty {num}/{den} leaves an empty clock phase for period {period}")]
    Duty { num: u64, den: u64, period: u64 },
    #[error("two events on `{signal}` at {time}")]
    DuplicateEvent { signal: Signal, time: SimTime },
    #[error("event on `{signal}` at {time} collides with a generated clock edge")]
    ClockCollision { signal: Signal, time: SimTime },
    #[error("`run` given more than once")]
    DuplicateRun,
    #[error("missing `run` directive")]
    MissingRun,
    #[error("event at {time} is after the end of the run at {until}")]
    AfterRun { time: SimTime, until: SimTime },
    #[error("`{signal}` is {actual} bit(s) wide, the device expects {expected}")]
    PortWidth {
        signal: Signal,
        expected: usize,
        actual: usize,
    },
}

/// A stimulus error, with the 1-based line it was found on when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct StimulusError {
    pub line: Option<usize>,
    pub kind: StimulusErrorKind,
}

impl fmt::Display for StimulusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl From<StimulusErrorKind> for StimulusError {
    fn from(kind: StimulusErrorKind) -> Self {
        StimulusError { line: None, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clock {
    pub signal: Signal,
    pub period: u64,
    pub duty_num: u64,
    pub duty_den: u64,
    pub start: Bit,
    pub from: SimTime,
}

impl Clock {
    /// Length of the high phase: `floor(period * num / den)`.
    pub fn high_time(&self) -> u64 {
        (u128::from(self.period) * u128::from(self.duty_num) / u128::from(self.duty_den)) as u64
    }

    fn validate(&self) -> Result<(), StimulusErrorKind> {
        let high = self.high_time();
        if self.period == 0 || self.duty_den == 0 || high == 0 || high >= self.period {
            return Err(StimulusErrorKind::Duty {
                num: self.duty_num,
                den: self.duty_den,
                period: self.period,
            });
        }
        Ok(())
    }

    /// Level changes up to and including `until`, starting with the initial
    /// level at `from`.
    pub fn edges(&self, until: SimTime) -> Vec<(SimTime, Bit)> {
        let high = self.high_time();
        let first_phase = if self.start == Bit::One {
            high
        } else {
            self.period - high
        };
        let mut out = Vec::new();
        if self.from > until {
            return out;
        }
        let mut level = self.start;
        out.push((self.from, level));
        let mut cycle_start = self.from.ps();
        loop {
            let mid = cycle_start + first_phase;
            if mid > until.ps() {
                break;
            }
            level = !level;
            out.push((SimTime(mid), level));
            let next = cycle_start + self.period;
            if next > until.ps() {
                break;
            }
            level = !level;
            out.push((SimTime(next), level));
            cycle_start = next;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimEvent {
    pub time: SimTime,
    pub signal: Signal,
    pub value: BitVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stimulus {
    pub declarations: Vec<(Signal, usize)>,
    pub events: Vec<StimEvent>,
    pub clocks: Vec<Clock>,
    pub run_until: SimTime,
}

fn syntax(directive: &'static str, reason: impl Into<String>) -> StimulusErrorKind {
    StimulusErrorKind::Syntax {
        directive,
        reason: reason.into(),
    }
}

fn parse_ps(directive: &'static str, what: &str, tok: Option<&str>) -> Result<u64, StimulusErrorKind> {
    let tok = tok.ok_or_else(|| syntax(directive, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(directive, format!("bad {what} `{tok}`")))
}

impl Stimulus {
    pub fn parse(text: &str) -> Result<Self, StimulusError> {
        let mut st = Stimulus::default();
        let mut run = None;
        let mut event_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            let Some(&directive) = toks.first() else {
                continue;
            };
            let at_line = |kind| StimulusError {
                line: Some(line),
                kind,
            };
            match directive {
                "signal" => st.parse_signal(&toks).map_err(at_line)?,
                "clock" => st.parse_clock(&toks).map_err(at_line)?,
                "at" => {
                    st.parse_at(&toks).map_err(at_line)?;
                    event_lines.push(line);
                }
                "run" => {
                    if toks.len() != 2 {
                        return Err(at_line(syntax("run", "expected `run <ps>`")));
                    }
                    if run.is_some() {
                        return Err(at_line(StimulusErrorKind::DuplicateRun));
                    }
                    run = Some((line, parse_ps("run", "time", toks.get(1).copied()).map_err(at_line)?));
                }
                other => return Err(at_line(StimulusErrorKind::UnknownDirective(other.to_string()))),
            }
        }
        let (run_line, until) = run.ok_or(StimulusErrorKind::MissingRun)?;
        st.run_until = SimTime(until);
        if let Err((index, kind)) = st.check_events() {
            let line = index.map_or(run_line, |i| event_lines[i]);
            return Err(StimulusError {
                line: Some(line),
                kind,
            });
        }
        Ok(st)
    }

    fn width(&self, name: &str) -> Result<(Signal, usize), StimulusErrorKind> {
        let signal = Signal::from_name(name)
            .filter(|s| s.is_input())
            .ok_or_else(|| StimulusErrorKind::UnknownSignal(name.to_string()))?;
        self.declarations
            .iter()
            .find(|(s, _)| *s == signal)
            .copied()
            .ok_or_else(|| StimulusErrorKind::UnknownSignal(name.to_string()))
    }

    fn parse_signal(&mut self, toks: &[&str]) -> Result<(), StimulusErrorKind> {
        let [_, name, width] = toks else {
            return Err(syntax("signal", "expected `signal <name> <width>`"));
        };
        let signal = Signal::from_name(name)
            .filter(|s| s.is_input())
            .ok_or_else(|| StimulusErrorKind::NotAnInput(name.to_string()))?;
        let width: usize = width
            .parse()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| syntax("signal", format!("bad width `{width}`")))?;
        if self.declarations.iter().any(|(s, _)| *s == signal) {
            return Err(StimulusErrorKind::DuplicateSignal(name.to_string()));
        }
        self.declarations.push((signal, width));
        Ok(())
    }

    fn parse_clock(&mut self, toks: &[&str]) -> Result<(), StimulusErrorKind> {
        let name = toks.get(1).ok_or_else(|| syntax("clock", "missing signal"))?;
        let (signal, width) = self.width(name)?;
        if width != 1 {
            return Err(StimulusErrorKind::ClockWidth(signal));
        }
        if toks.get(2) != Some(&"period") {
            return Err(syntax("clock", "expected `period <ps>` after the signal"));
        }
        let period = parse_ps("clock", "period", toks.get(3).copied())?;
        let mut clock = Clock {
            signal,
            period,
            duty_num: 1,
            duty_den: 2,
            start: Bit::Zero,
            from: SimTime::ZERO,
        };
        let mut rest = toks[4.min(toks.len())..].iter();
        while let Some(&key) = rest.next() {
            let val = rest.next().copied();
            match key {
                "duty" => {
                    let val = val.ok_or_else(|| syntax("clock", "missing duty ratio"))?;
                    let (a, b) = val
                        .split_once('/')
                        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                        .ok_or_else(|| syntax("clock", format!("bad duty `{val}`")))?;
                    clock.duty_num = a;
                    clock.duty_den = b;
                }
                "start" => {
                    clock.start = match val {
                        Some("0") => Bit::Zero,
                        Some("1") => Bit::One,
                        _ => return Err(syntax("clock", "start must be 0 or 1")),
                    }
                }
                "from" => clock.from = SimTime(parse_ps("clock", "start time", val)?),
                other => return Err(syntax("clock", format!("unexpected `{other}`"))),
            }
        }
        clock.validate()?;
        if self.clocks.iter().any(|c| c.signal == signal) {
            return Err(StimulusErrorKind::DuplicateClock(signal));
        }
        self.clocks.push(clock);
        Ok(())
    }

    fn parse_at(&mut self, toks: &[&str]) -> Result<(), StimulusErrorKind> {
        let [_, time, name, literal] = toks else {
            return Err(syntax("at", "expected `at <ps> <signal> <literal>`"));
        };
        let time = parse_ps("at", "time", Some(time))?;
        let (signal, width) = self.width(name)?;
        let value = BitVector::parse(literal, width)
            .map_err(|source| StimulusErrorKind::Literal { signal, source })?;
        self.events.push(StimEvent {
            time: SimTime(time),
            signal,
            value,
        });
        Ok(())
    }

    /// Event-level validation; the error carries the offending event index
    /// (`None` for run-level problems).
    fn check_events(&self) -> Result<(), (Option<usize>, StimulusErrorKind)> {
        for (i, ev) in self.events.iter().enumerate() {
            if ev.time > self.run_until {
                return Err((
                    Some(i),
                    StimulusErrorKind::AfterRun {
                        time: ev.time,
                        until: self.run_until,
                    },
                ));
            }
            if self.events[..i]
                .iter()
                .any(|e| e.signal == ev.signal && e.time == ev.time)
            {
                return Err((
                    Some(i),
                    StimulusErrorKind::DuplicateEvent {
                        signal: ev.signal,
                        time: ev.time,
                    },
                ));
            }
        }
        for clock in &self.clocks {
            let edges = clock.edges(self.run_until);
            if let Some((i, ev)) = self
                .events
                .iter()
                .enumerate()
                .find(|(_, e)| e.signal == clock.signal && edges.iter().any(|(t, _)| *t == e.time))
            {
                return Err((
                    Some(i),
                    StimulusErrorKind::ClockCollision {
                        signal: ev.signal,
                        time: ev.time,
                    },
                ));
            }
        }
        Ok(())
    }

    /// Explicit events merged with generated clock edges, sorted by time and
    /// signal rank.
    pub fn expand(&self) -> Result<Vec<Event>, StimulusError> {
        self.check_events().map_err(|(_, kind)| StimulusError::from(kind))?;
        let mut events: Vec<Event> = self
            .events
            .iter()
            .map(|e| Event::new(e.time, e.signal, e.value.clone()))
            .collect();
        for clock in &self.clocks {
            events.extend(
                clock
                    .edges(self.run_until)
                    .into_iter()
                    .map(|(t, b)| Event::new(t, clock.signal, BitVector::filled(1, b))),
            );
        }
        events.sort_by_key(|e| (e.time, e.signal.rank()));
        Ok(events)
    }

    /// Checks declared widths against the device ports.
    pub fn check_ports(&self, config: &SramConfig) -> Result<(), StimulusError> {
        for &(signal, actual) in &self.declarations {
            let expected = config.width_of(signal);
            if actual != expected {
                return Err(StimulusErrorKind::PortWidth {
                    signal,
                    expected,
                    actual,
                }
                .into());
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse(render(s)) == s`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (s, w) in &self.declarations {
            let _ = writeln!(out, "signal {s} {w}");
        }
        for c in &self.clocks {
            let _ = writeln!(
                out,
                "clock {} period {} duty {}/{} start {} from {}",
                c.signal,
                c.period,
                c.duty_num,
                c.duty_den,
                c.start,
                c.from.ps()
            );
        }
        for e in &self.events {
            let _ = writeln!(out, "at {} {} {}", e.time.ps(), e.signal, e.value.to_literal());
        }
        let _ = writeln!(out, "run {}", self.run_until.ps());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kind(text: &str) -> StimulusErrorKind {
        Stimulus::parse(text).unwrap_err().kind
    }

    #[test]
    fn minimal() {
        let st = Stimulus::parse("signal WE 1\nat 0 WE 0b1\nrun 1000").unwrap();
        assert_eq!(st.declarations, vec![(Signal::We, 1)]);
        assert_eq!(st.events.len(), 1);
        assert_eq!(st.run_until, SimTime(1000));
    }

    #[test]
    fn comments_and_blank_lines() {
        let st = Stimulus::parse("# header\n\nsignal A 4  # address\nat 5 A 3\nrun 10\n").unwrap();
        assert_eq!(st.events[0].value.to_index(), Some(3));
    }

    #[test]
    fn default_clock_edges() {
        let st = Stimulus::parse("signal WCLK 1\nclock WCLK period 10000\nrun 25000").unwrap();
        let edges = st.clocks[0].edges(st.run_until);
        let times: Vec<u64> = edges.iter().map(|(t, _)| t.ps()).collect();
        assert_eq!(times, vec![0, 5000, 10000, 15000, 20000, 25000]);
        assert_eq!(edges[0].1, Bit::Zero);
        assert_eq!(edges[1].1, Bit::One);
    }

    #[test]
    fn two_toggles_in_one_period() {
        let st = Stimulus::parse("signal WCLK 1\nclock WCLK period 10000\nrun 10000").unwrap();
        let events = st.expand().unwrap();
        assert_eq!(events.len(), 3);
        assert_eq!(events.iter().filter(|e| e.time > SimTime(0)).count(), 2);
    }

    #[test]
    fn duty_start_and_offset() {
        let st = Stimulus::parse(
            "signal WCLK 1\nclock WCLK period 1000 duty 1/3 start 1 from 100\nrun 2100",
        )
        .unwrap();
        let edges = st.clocks[0].edges(st.run_until);
        // high phase floor(1000/3) = 333
        let expected = [
            (100, Bit::One),
            (433, Bit::Zero),
            (1100, Bit::One),
            (1433, Bit::Zero),
            (2100, Bit::One),
        ];
        assert_eq!(edges, expected.map(|(t, b)| (SimTime(t), b)).to_vec());
    }

    #[test]
    fn expand_sorts_by_time_then_rank() {
        let st = Stimulus::parse(
            "signal WE 1\nsignal D 2\nsignal WCLK 1\nat 5 D 1\nat 5 WCLK 1\nat 1 WE 1\nrun 10",
        )
        .unwrap();
        let order: Vec<(u64, Signal)> = st.expand().unwrap().iter().map(|e| (e.time.ps(), e.signal)).collect();
        assert_eq!(order, vec![(1, Signal::We), (5, Signal::Wclk), (5, Signal::Data)]);
    }

    #[test]
    fn errors() {
        assert!(matches!(kind("signal A 4\nat 10 A 0x1F\nrun 20"), StimulusErrorKind::Literal { .. }));
        assert!(Stimulus::parse("signal A 4\nat 10 A 0b10\nrun 20").is_ok());
        assert!(matches!(kind("at 0 WE 1\nrun 5"), StimulusErrorKind::UnknownSignal(_)));
        assert!(matches!(kind("signal Q 1\nrun 5"), StimulusErrorKind::NotAnInput(_)));
        assert!(matches!(kind("signal O 2\nrun 5"), StimulusErrorKind::NotAnInput(_)));
        assert!(matches!(kind("signal WE 1\nsignal WE 1\nrun 5"), StimulusErrorKind::DuplicateSignal(_)));
        assert!(matches!(kind(""), StimulusErrorKind::MissingRun));
        assert!(matches!(kind("run 5\nrun 6"), StimulusErrorKind::DuplicateRun));
        assert!(matches!(kind("bogus\nrun 5"), StimulusErrorKind::UnknownDirective(_)));
        assert!(matches!(
            kind("signal WCLK 1\nclock WCLK period 10\nclock WCLK period 20\nrun 5"),
            StimulusErrorKind::DuplicateClock(_)
        ));
        assert!(matches!(kind("signal A 4\nclock A period 10\nrun 5"), StimulusErrorKind::ClockWidth(_)));
        assert!(matches!(
            kind("signal WCLK 1\nclock WCLK period 10 duty 1/1\nrun 5"),
            StimulusErrorKind::Duty { .. }
        ));
        assert!(matches!(kind("signal WE 1\nat 10 WE 1\nrun 5"), StimulusErrorKind::AfterRun { .. }));
        assert!(matches!(
            kind("signal WE 1\nat 1 WE 1\nat 1 WE 0\nrun 5"),
            StimulusErrorKind::DuplicateEvent { .. }
        ));
    }

    #[test]
    fn line_numbers() {
        let err = Stimulus::parse("signal WE 1\n\nat 3 Q 1\nrun 5").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().starts_with("line 3: "));
        assert_eq!(Stimulus::parse("").unwrap_err().line, None);
    }

    #[test]
    fn clock_collision() {
        let err = Stimulus::parse(
            "signal WCLK 1\nclock WCLK period 10000\nat 5000 WCLK 1\nrun 20000",
        )
        .unwrap_err();
        assert!(matches!(err.kind, StimulusErrorKind::ClockCollision { .. }));
        assert_eq!(err.line, Some(3));

        // A programmatically built stimulus is re-checked by expand.
        let mut st = Stimulus::parse("signal WCLK 1\nclock WCLK period 10000\nrun 20000").unwrap();
        st.events.push(StimEvent {
            time: SimTime(5000),
            signal: Signal::Wclk,
            value: BitVector::filled(1, Bit::One),
        });
        assert!(st.expand().is_err());
    }

    #[test]
    fn port_widths() {
        let st = Stimulus::parse("signal A 3\nrun 5").unwrap();
        assert!(st.check_ports(&SramConfig::default()).is_err());
        assert!(st.check_ports(&SramConfig::with_geometry(8, 2)).is_ok());
    }

    fn naive_edge_count(period: u64, high: u64, start_high: bool, from: u64, until: u64) -> usize {
        if from > until {
            return 0;
        }
        let mut count = 0;
        let mut level = start_high;
        let mut last = None;
        for t in from..=until {
            let phase = (t - from) % period;
            let first = if start_high { high } else { period - high };
            let now = if phase < first { start_high } else { !start_high };
            if last != Some(now) {
                count += 1;
                level = now;
            }
            last = Some(level);
        }
        count
    }

    proptest! {
        #[test]
        fn expand_count_matches_naive(
            period in 2u64..60, num in 1u64..8, den in 2u64..9,
            start_high in any::<bool>(), from in 0u64..50, until in 0u64..300,
        ) {
            let clock = Clock {
                signal: Signal::Wclk, period, duty_num: num, duty_den: den,
                start: Bit::from_bool(start_high), from: SimTime(from),
            };
            prop_assume!(clock.validate().is_ok());
            let naive = naive_edge_count(period, clock.high_time(), start_high, from, until);
            prop_assert_eq!(clock.edges(SimTime(until)).len(), naive);
        }

        #[test]
        fn render_parse_identity(
            times in prop::collection::btree_set(0u64..10_000, 0..20),
            period in 100u64..2000, with_clock in any::<bool>(),
        ) {
            let mut text = String::from("signal WE 1\nsignal A 4\nsignal WCLK 1\n");
            if with_clock {
                text.push_str(&format!("clock WCLK period {period} duty 1/4 start 1 from 3\n"));
            }
            for (i, t) in times.iter().enumerate() {
                text.push_str(&format!("at {t} A {}\n", i % 16));
            }
            text.push_str("run 10000\n");
            let st = Stimulus::parse(&text).unwrap();
            let again = Stimulus::parse(&st.render()).unwrap();
            prop_assert_eq!(&again, &st);
            prop_assert_eq!(again.render(), st.render());
        }
    }
}
