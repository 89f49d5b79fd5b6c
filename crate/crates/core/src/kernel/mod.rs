//! Deterministic discrete-event kernel driving one SRAM device.
//!
//! At each distinct timestamp the kernel
//! 1. applies all input transitions (recording them for timing checks and the sink),
//! 2. evaluates the device once on the resulting input snapshot,
//! 3. runs setup checks for a write edge and applies violation corruption,
//! 4. enqueues the resulting output updates,
//! 5. lands output updates due at this time.

mod event;
mod schedule;

pub use event::{Event, Signal, SimTime};
pub use schedule::{Schedule, ScheduleError};

use std::collections::HashMap;

use thiserror::Error;

use crate::logic::{Bit, BitVector};
use crate::sram::{Diagnostic, PortUpdate, Sram, SramError};
use crate::timing::{
    corrupt_on_violation, measure_access, AccessMeasurement, HistoryError, TimingChecker,
    TraceEvent, Violation,
};
use crate::waveform::{WaveformError, WaveformSink};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Device(#[from] SramError),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub final_time: SimTime,
    /// Input and output events popped from the schedule.
    pub events_processed: u64,
    pub writes_committed: u64,
    pub violations: Vec<Violation>,
    pub access_times: Vec<AccessMeasurement>,
    pub diagnostics: Vec<Diagnostic>,
    /// Value on the output pin when the run ended.
    pub final_output: BitVector,
}

struct Inputs {
    we: Bit,
    wclk: Bit,
    addr: BitVector,
    data: BitVector,
}

impl Inputs {
    fn set(&mut self, signal: Signal, value: &BitVector) {
        match signal {
            Signal::We => self.we = value.bit(0),
            Signal::Wclk => self.wclk = value.bit(0),
            Signal::Addr => self.addr = value.clone(),
            Signal::Data => self.data = value.clone(),
            Signal::Out => unreachable!("output is not an input"),
        }
    }
}

/// Builds a schedule from a list of events.
pub fn schedule_all(events: impl IntoIterator<Item = Event>) -> Result<Schedule, ScheduleError> {
    let mut sch = Schedule::new();
    for e in events {
        sch.schedule(e)?;
    }
    Ok(sch)
}

/// Runs the simulation until `until` (inclusive).
pub fn run(
    mut schedule: Schedule,
    device: &mut Sram,
    timing: &mut TimingChecker,
    sink: &mut dyn WaveformSink,
    until: SimTime,
) -> Result<SimulationReport, SimError> {
    let cfg = device.config().clone();
    let mut inputs = Inputs {
        we: Bit::Unknown,
        wclk: Bit::Unknown,
        addr: BitVector::unknown(cfg.addr_bits()),
        data: BitVector::unknown(cfg.data_bits),
    };
    let mut out_pin = BitVector::unknown(cfg.data_bits);
    let mut trace = Vec::new();
    // Output time -> evaluation time that scheduled the live update there.
    let mut out_cause: HashMap<SimTime, SimTime> = HashMap::new();
    let mut events_processed = 0u64;
    let mut writes_committed = 0u64;

    while let Some(now) = schedule.peek_time() {
        if now > until {
            break;
        }
        // (word, output time, cause) for words whose stored value was corrupted.
        let mut refresh: Vec<(usize, SimTime, SimTime)> = Vec::new();
        let mut saw_input = false;

        while let Some(ev) = schedule.pop_input_at(now) {
            events_processed += 1;
            saw_input = true;
            let expected = cfg.width_of(ev.signal);
            if ev.value.width() != expected {
                return Err(SramError::Width {
                    signal: ev.signal,
                    expected,
                    actual: ev.value.width(),
                }
                .into());
            }
            sink.change(now, ev.signal, &ev.value)?;
            inputs.set(ev.signal, &ev.value);
            for hit in timing.observe(ev.signal, now, &ev.value)? {
                if corrupt_on_violation(device, &hit.violation, hit.word)? {
                    if let Some(word) = hit.word {
                        // Replace the pending write-first update if it has not landed.
                        refresh.push(if hit.write_output_time > now {
                            (word, hit.write_output_time, hit.violation.edge_time)
                        } else {
                            (word, now + cfg.clock_path(), now)
                        });
                    }
                }
            }
        }

        let mut updates: Vec<(PortUpdate, SimTime)> = Vec::new();
        if saw_input {
            let applied = device.apply(now, inputs.we, inputs.wclk, &inputs.addr, &inputs.data)?;
            let clock_caused = !applied.updates.is_empty();
            updates.extend(applied.updates.into_iter().map(|u| (u, now)));
            if let Some(write) = &applied.write {
                trace.push(TraceEvent::ClockEdge(now));
                if write.word.is_some() {
                    writes_committed += 1;
                }
                for v in timing.write_edge(now, write.word, write.output_time) {
                    if corrupt_on_violation(device, &v, write.word)? {
                        if let Some(word) = write.word {
                            refresh.push((word, write.output_time, now));
                        }
                    }
                }
            } else if applied.address_changed {
                trace.push(TraceEvent::AddressChange(now));
            } else if clock_caused {
                trace.push(TraceEvent::ClockEdge(now));
            }
        }
        // Scheduled after the device's own updates so a same-time refresh
        // replaces them.
        for (word, time, cause) in refresh {
            updates.extend(device.refresh_output(time, word).map(|u| (u, cause)));
        }
        for (u, cause) in updates {
            out_cause.insert(u.time, cause);
            schedule.schedule(Event::new(u.time, u.port, u.value))?;
        }

        while let Some(ev) = schedule.pop_at(now) {
            events_processed += 1;
            sink.change(now, ev.signal, &ev.value)?;
            out_pin = ev.value;
            let cause = out_cause.remove(&now).unwrap_or(now);
            trace.push(TraceEvent::Output { at: now, cause });
        }
    }
    sink.finish(until)?;

    Ok(SimulationReport {
        final_time: until,
        events_processed,
        writes_committed,
        violations: timing.sorted_violations(),
        access_times: measure_access(&trace),
        diagnostics: device.diagnostics().to_vec(),
        final_output: out_pin,
    })
}
