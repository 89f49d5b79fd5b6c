//! Timing-annotated behavioral simulation of synchronous-write /
//! asynchronous-read static RAM.
//!
//! The crate is organised around the pieces of one simulation run:
//!
//! * [`logic`]: three-valued bits and bit vectors,
//! * [`sram`]: the device model,
//! * [`kernel`]: event scheduling and the run loop,
//! * [`timing`]: setup/hold checks and access-time measurement,
//! * [`stimulus`]: the `.stim` testbench format,
//! * [`waveform`]: VCD output.

pub mod kernel;
pub mod logic;
pub mod sram;
pub mod stimulus;
pub mod timing;
pub mod waveform;

pub use kernel::{run, schedule_all, Event, Schedule, SimError, SimTime, Signal, SimulationReport};
pub use logic::{Bit, BitVector, LiteralError};
pub use sram::{Sram, SramConfig};
pub use stimulus::{Stimulus, StimulusError};
pub use timing::{AccessCause, AccessMeasurement, TimingChecker, Violation, ViolationKind};
pub use waveform::{NullSink, TraceRecorder, VcdWriter, WaveformSink};

/// Runs `stimulus` on a fresh device built from `config`.
pub fn simulate(
    config: &SramConfig,
    stimulus: &Stimulus,
    sink: &mut dyn WaveformSink,
) -> Result<(Sram, SimulationReport), SimulateError> {
    stimulus.check_ports(config)?;
    let mut device = Sram::new(config.clone())?;
    let mut timing = TimingChecker::new(config.t_setup, config.t_hold);
    let schedule = schedule_all(stimulus.expand()?)?;
    let report = run(schedule, &mut device, &mut timing, sink, stimulus.run_until)?;
    Ok((device, report))
}

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error(transparent)]
    Config(#[from] sram::ConfigError),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error(transparent)]
    Schedule(#[from] kernel::ScheduleError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
