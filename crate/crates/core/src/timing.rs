//! Setup/hold checking around write edges, violation-driven corruption and
//! access-time measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Signal, SimTime};
use crate::logic::BitVector;
use crate::sram::{Sram, SramError};

/// Inputs whose stability is required around a write edge.
pub const CHECKED_SIGNALS: [Signal; 3] = [Signal::We, Signal::Addr, Signal::Data];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("{signal} transition at {at} is not after the last recorded one at {last}")]
    NonMonotonic {
        signal: Signal,
        at: SimTime,
        last: SimTime,
    },
}

/// Per-signal transition log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignalHistory {
    log: BTreeMap<Signal, Vec<(SimTime, BitVector)>>,
}

impl SignalHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a transition; recording the current value again is a no-op.
    /// Returns whether a transition was appended.
    pub fn record(
        &mut self,
        signal: Signal,
        time: SimTime,
        value: BitVector,
    ) -> Result<bool, HistoryError> {
        let entries = self.log.entry(signal).or_default();
        if let Some((last, prev)) = entries.last() {
            if time <= *last {
                return Err(HistoryError::NonMonotonic {
                    signal,
                    at: time,
                    last: *last,
                });
            }
            if *prev == value {
                return Ok(false);
            }
        }
        entries.push((time, value));
        Ok(true)
    }

    pub fn transitions(&self, signal: Signal) -> &[(SimTime, BitVector)] {
        self.log.get(&signal).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Bits that changed on `signal` at transitions in `(after, until]`.
    /// `after == None` means from the beginning of time. The first-ever
    /// transition counts as changing every bit.
    pub fn changed_bits(&self, signal: Signal, after: Option<SimTime>, until: SimTime) -> Vec<usize> {
        let entries = self.transitions(signal);
        let mut bits = Vec::new();
        for (i, (t, v)) in entries.iter().enumerate() {
            if after.is_some_and(|a| *t <= a) || *t > until {
                continue;
            }
            let diff = match i.checked_sub(1) {
                Some(p) => entries[p].1.differing_bits(v),
                None => (0..v.width()).collect(),
            };
            bits.extend(diff);
        }
        bits.sort_unstable();
        bits.dedup();
        bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Setup,
    Hold,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Setup => "setup",
            ViolationKind::Hold => "hold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub signal: Signal,
    pub edge_time: SimTime,
    /// Observed stable interval in ps; always below `required`.
    pub actual_stable: u64,
    pub required: u64,
    /// Data bits that moved inside the window; empty for `WE`/`A`.
    pub bits: Vec<usize>,
}

/// Setup and hold violations for a write edge at `edge_time`, judged against
/// the transitions present in `history`.
pub fn check_edge(
    history: &SignalHistory,
    edge_time: SimTime,
    t_setup: u64,
    t_hold: u64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let setup_start = edge_time.0.checked_sub(t_setup).map(SimTime);
    for signal in CHECKED_SIGNALS {
        let entries = history.transitions(signal);
        if let Some((tx, _)) = entries.iter().rev().find(|(t, _)| *t <= edge_time) {
            let stable = edge_time.since(*tx);
            if stable < t_setup {
                out.push(Violation {
                    kind: ViolationKind::Setup,
                    signal,
                    edge_time,
                    actual_stable: stable,
                    required: t_setup,
                    bits: data_bits(history, signal, setup_start, edge_time),
                });
            }
        }
    }
    if t_hold > 0 {
        let hold_end = edge_time + t_hold;
        for signal in CHECKED_SIGNALS {
            let entries = history.transitions(signal);
            if let Some((tx, _)) = entries.iter().find(|(t, _)| *t > edge_time && *t <= hold_end) {
                out.push(Violation {
                    kind: ViolationKind::Hold,
                    signal,
                    edge_time,
                    actual_stable: tx.since(edge_time),
                    required: t_hold,
                    bits: data_bits(history, signal, Some(edge_time), hold_end),
                });
            }
        }
    }
    out
}

fn data_bits(history: &SignalHistory, signal: Signal, after: Option<SimTime>, until: SimTime) -> Vec<usize> {
    if signal == Signal::Data {
        history.changed_bits(signal, after, until)
    } else {
        Vec::new()
    }
}

/// Applies the corruption model for one violation of a write to
/// `sampled_word`: unstable data bits become `Unknown`; an unstable address
/// or write enable makes the whole word `Unknown`. Returns whether the
/// stored word changed.
pub fn corrupt_on_violation(
    sram: &mut Sram,
    violation: &Violation,
    sampled_word: Option<usize>,
) -> Result<bool, SramError> {
    let Some(word) = sampled_word else {
        return Ok(false);
    };
    match violation.signal {
        Signal::Data => sram.invalidate(word, Some(&violation.bits)),
        Signal::Addr | Signal::We => sram.invalidate(word, None),
        Signal::Wclk | Signal::Out => Ok(false),
    }
}

/// A write edge whose hold window is still open.
#[derive(Debug, Clone)]
struct OpenWindow {
    edge_time: SimTime,
    word: Option<usize>,
    output_time: SimTime,
    flagged: Vec<Signal>,
}

/// A hold violation detected by [`TimingChecker::observe`], with the write
/// it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldHit {
    pub violation: Violation,
    pub word: Option<usize>,
    /// Output time of the original write-first update.
    pub write_output_time: SimTime,
}

/// Incremental checker owned by the kernel.
///
/// Setup checks run when a write edge is evaluated. Hold violations are
/// flagged as soon as the offending transition is recorded, which yields the
/// same set as evaluating [`check_edge`] after the window closes while
/// letting corruption land before any later read.
#[derive(Debug, Clone)]
pub struct TimingChecker {
    t_setup: u64,
    t_hold: u64,
    history: SignalHistory,
    open: Vec<OpenWindow>,
    violations: Vec<Violation>,
}

impl TimingChecker {
    pub fn new(t_setup: u64, t_hold: u64) -> Self {
        TimingChecker {
            t_setup,
            t_hold,
            history: SignalHistory::new(),
            open: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn history(&self) -> &SignalHistory {
        &self.history
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn t_setup(&self) -> u64 {
        self.t_setup
    }

    pub fn t_hold(&self) -> u64 {
        self.t_hold
    }

    /// Records an input value; returns hold violations it causes.
    pub fn observe(
        &mut self,
        signal: Signal,
        time: SimTime,
        value: &BitVector,
    ) -> Result<Vec<HoldHit>, HistoryError> {
        self.open.retain(|w| w.edge_time + self.t_hold >= time);
        if !self.history.record(signal, time, value.clone())? || !CHECKED_SIGNALS.contains(&signal)
        {
            return Ok(Vec::new());
        }
        let mut hits = Vec::new();
        for w in self.open.iter_mut().filter(|w| time > w.edge_time) {
            let first = !w.flagged.contains(&signal);
            // Repeat data transitions in an already flagged window widen the
            // corrupted bit set without adding a second violation.
            if !first && signal != Signal::Data {
                continue;
            }
            let violation = Violation {
                kind: ViolationKind::Hold,
                signal,
                edge_time: w.edge_time,
                actual_stable: time.since(w.edge_time),
                required: self.t_hold,
                bits: data_bits(&self.history, signal, Some(w.edge_time), time),
            };
            if first {
                w.flagged.push(signal);
                self.violations.push(violation.clone());
            } else if let Some(v) = self.violations.iter_mut().find(|v| {
                v.kind == ViolationKind::Hold && v.signal == signal && v.edge_time == w.edge_time
            }) {
                v.bits = violation.bits.clone();
            }
            hits.push(HoldHit {
                violation,
                word: w.word,
                write_output_time: w.output_time,
            });
        }
        Ok(hits)
    }

    /// Setup check for a write edge; opens its hold window.
    pub fn write_edge(
        &mut self,
        edge_time: SimTime,
        word: Option<usize>,
        output_time: SimTime,
    ) -> Vec<Violation> {
        let setup: Vec<Violation> = check_edge(&self.history, edge_time, self.t_setup, 0);
        self.violations.extend(setup.iter().cloned());
        if self.t_hold > 0 {
            self.open.push(OpenWindow {
                edge_time,
                word,
                output_time,
                flagged: Vec::new(),
            });
        }
        setup
    }

    /// Violations sorted by edge, kind and signal.
    pub fn sorted_violations(&self) -> Vec<Violation> {
        let mut v = self.violations.clone();
        v.sort_by_key(|v| (v.edge_time, v.kind, v.signal));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessCause {
    AddressChange,
    ClockEdge,
}

impl fmt::Display for AccessCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessCause::AddressChange => "address-change",
            AccessCause::ClockEdge => "clock-edge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccessMeasurement {
    pub trigger_time: SimTime,
    pub settle_time: SimTime,
    /// `settle_time - trigger_time` in ps.
    pub latency: u64,
    pub cause: AccessCause,
}

/// Entries of the access trace collected by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    AddressChange(SimTime),
    /// Clock edge that changed or rewrote the addressed word.
    ClockEdge(SimTime),
    /// An output update landing on the pin (including ones that leave the
    /// value unchanged), tagged with the time of the input evaluation that
    /// scheduled it.
    Output { at: SimTime, cause: SimTime },
}

/// Pairs each access trigger with the last output update it scheduled.
/// A simultaneous address change and clock edge form one clock-edge trigger.
/// Triggers whose updates were all superseded yield no measurement.
pub fn measure_access(trace: &[TraceEvent]) -> Vec<AccessMeasurement> {
    let mut triggers: Vec<(SimTime, AccessCause)> = Vec::new();
    let mut settle: BTreeMap<SimTime, SimTime> = BTreeMap::new();
    for ev in trace {
        let (t, cause) = match *ev {
            TraceEvent::AddressChange(t) => (t, AccessCause::AddressChange),
            TraceEvent::ClockEdge(t) => (t, AccessCause::ClockEdge),
            TraceEvent::Output { at, cause } => {
                let slot = settle.entry(cause).or_insert(at);
                *slot = (*slot).max(at);
                continue;
            }
        };
        match triggers.iter_mut().find(|(tt, _)| *tt == t) {
            Some((_, existing)) => {
                if cause == AccessCause::ClockEdge {
                    *existing = cause;
                }
            }
            None => triggers.push((t, cause)),
        }
    }
    triggers
        .into_iter()
        .filter_map(|(trigger, cause)| {
            let settle = *settle.get(&trigger)?;
            (settle > trigger).then(|| AccessMeasurement {
                trigger_time: trigger,
                settle_time: settle,
                latency: settle.since(trigger),
                cause,
            })
        })
        .collect()
}
