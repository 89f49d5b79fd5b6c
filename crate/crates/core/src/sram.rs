//! Behavioral model of a synchronous-write, asynchronous-read static RAM.
//!
//! The default geometry is the classic 16-word by 2-bit primitive with ports
//! `WE`, `WCLK`, `A[addr_bits]`, `D[data_bits]` and `O[data_bits]`. Reads are
//! combinational: the output follows the addressed word after `t_ac`.
//! Writes happen on the active `WCLK` edge while `WE` is high and the output
//! shows the written data after `t_cko` (write-first).

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Signal, SimTime};
use crate::logic::{Bit, BitVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("word count {0} is not a power of two >= 2")]
    Words(usize),
    #[error("data width must be positive")]
    DataBits,
    #[error("expected {expected} INIT vectors, got {actual}")]
    InitCount { expected: usize, actual: usize },
    #[error("INIT vector {index} has width {actual}, expected {expected}")]
    InitWidth {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("{0} must be strictly positive")]
    ZeroDelay(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SramError {
    #[error("{signal} width {actual} does not match expected {expected}")]
    Width {
        signal: Signal,
        expected: usize,
        actual: usize,
    },
    #[error("word {word} out of range (device has {words} words)")]
    WordOutOfRange { word: usize, words: usize },
    #[error("bit {bit} out of range (data width {width})")]
    BitOutOfRange { bit: usize, width: usize },
}

pub const DEFAULT_T_SETUP: u64 = 1000;
pub const DEFAULT_T_HOLD: u64 = 500;
pub const DEFAULT_T_AC: u64 = 3000;

/// Geometry, clock polarity, initial contents and timing of one device.
/// All delays are picoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SramConfig {
    pub words: usize,
    pub data_bits: usize,
    /// `false` models an inverter on `WCLK` absorbed into the block.
    pub clock_active_rising: bool,
    /// `init[b]` holds output-bit column `b` across all words (bit `w` of the
    /// vector is the initial value of `mem[w].bit(b)`).
    pub init: Vec<BitVector>,
    pub t_setup: u64,
    pub t_hold: u64,
    /// Address-to-output access time.
    pub t_ac: u64,
    /// Active-clock-edge-to-output delay.
    pub t_cko: u64,
    pub t_ibuf: u64,
    pub t_obuf: u64,
}

impl Default for SramConfig {
    fn default() -> Self {
        Self::with_geometry(16, 2)
    }
}

impl SramConfig {
    /// Default timing and all-zero INIT for a `words` x `data_bits` device.
    pub fn with_geometry(words: usize, data_bits: usize) -> Self {
        SramConfig {
            words,
            data_bits,
            clock_active_rising: true,
            init: (0..data_bits)
                .map(|_| BitVector::zeros(words.max(1)))
                .collect(),
            t_setup: DEFAULT_T_SETUP,
            t_hold: DEFAULT_T_HOLD,
            t_ac: DEFAULT_T_AC,
            t_cko: DEFAULT_T_AC,
            t_ibuf: 0,
            t_obuf: 0,
        }
    }

    pub fn addr_bits(&self) -> usize {
        self.words.trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.words < 2 || !self.words.is_power_of_two() {
            return Err(ConfigError::Words(self.words));
        }
        if self.data_bits == 0 {
            return Err(ConfigError::DataBits);
        }
        if self.init.len() != self.data_bits {
            return Err(ConfigError::InitCount {
                expected: self.data_bits,
                actual: self.init.len(),
            });
        }
        if let Some((index, v)) = self
            .init
            .iter()
            .enumerate()
            .find(|(_, v)| v.width() != self.words)
        {
            return Err(ConfigError::InitWidth {
                index,
                expected: self.words,
                actual: v.width(),
            });
        }
        if self.t_ac == 0 {
            return Err(ConfigError::ZeroDelay("t_ac"));
        }
        if self.t_cko == 0 {
            return Err(ConfigError::ZeroDelay("t_cko"));
        }
        Ok(())
    }

    pub fn width_of(&self, signal: Signal) -> usize {
        match signal {
            Signal::We | Signal::Wclk => 1,
            Signal::Addr => self.addr_bits(),
            Signal::Data | Signal::Out => self.data_bits,
        }
    }

    /// Pin-to-pin delay for an address-caused output change.
    pub fn address_path(&self) -> u64 {
        self.t_ibuf + self.t_ac + self.t_obuf
    }

    /// Pin-to-pin delay for a clock-caused output change.
    pub fn clock_path(&self) -> u64 {
        self.t_ibuf + self.t_cko + self.t_obuf
    }
}

/// Scheduled transition of the output port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortUpdate {
    pub time: SimTime,
    pub port: Signal,
    pub value: BitVector,
}

/// How a `WCLK` sample relates to the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    None,
    Active,
    Inactive,
    /// A transition involving `Unknown`; `may_be_active` if it could be the
    /// active edge once resolved.
    Indeterminate { may_be_active: bool },
}

/// A committed synchronous write (active edge with `WE` high).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WriteOp {
    pub edge_time: SimTime,
    /// Decoded address at the edge; `None` when the address was indeterminate.
    pub word: Option<usize>,
    pub data: BitVector,
    /// When the write-first output update lands.
    pub output_time: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub time: SimTime,
    pub message: String,
}

/// Result of one evaluation of the device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub updates: Vec<PortUpdate>,
    pub edge: Edge,
    pub write: Option<WriteOp>,
    pub address_changed: bool,
}

#[derive(Debug, Clone)]
pub struct Sram {
    config: SramConfig,
    mem: Vec<BitVector>,
    last_wclk: Bit,
    /// Set once `WCLK` has carried a defined level; transitions out of the
    /// power-up `Unknown` are not edges.
    wclk_defined: bool,
    we: Bit,
    addr: BitVector,
    data: BitVector,
    /// Value the output settles to once all scheduled updates land.
    output: BitVector,
    diagnostics: Vec<Diagnostic>,
}

impl Sram {
    pub fn new(config: SramConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mem = (0..config.words)
            .map(|w| {
                BitVector::from_bits(config.init.iter().map(|col| col.bit(w)).collect())
                    .expect("data_bits > 0")
            })
            .collect();
        Ok(Sram {
            addr: BitVector::unknown(config.addr_bits()),
            data: BitVector::unknown(config.data_bits),
            output: BitVector::unknown(config.data_bits),
            mem,
            last_wclk: Bit::Unknown,
            wclk_defined: false,
            we: Bit::Unknown,
            diagnostics: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &SramConfig {
        &self.config
    }

    pub fn peek(&self, word: usize) -> Result<BitVector, SramError> {
        self.mem
            .get(word)
            .cloned()
            .ok_or(SramError::WordOutOfRange {
                word,
                words: self.config.words,
            })
    }

    pub fn memory(&self) -> &[BitVector] {
        &self.mem
    }

    /// Word currently selected by the address pins.
    pub fn addressed_word(&self) -> Option<usize> {
        self.addr.to_index().map(|i| i as usize)
    }

    pub fn settled_output(&self) -> &BitVector {
        &self.output
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    fn classify(&self, next: Bit) -> Edge {
        if !self.wclk_defined || next == self.last_wclk {
            return Edge::None;
        }
        let (from, to) = if self.config.clock_active_rising {
            (Bit::Zero, Bit::One)
        } else {
            (Bit::One, Bit::Zero)
        };
        match (self.last_wclk, next) {
            (a, b) if a == from && b == to => Edge::Active,
            (a, b) if a.is_known() && b.is_known() => Edge::Inactive,
            // X->to could have been from->to; from->X could resolve to `to`.
            (a, b) => Edge::Indeterminate {
                may_be_active: b == to || a == from,
            },
        }
    }

    fn read_word(&self, word: Option<usize>) -> BitVector {
        word.map(|w| self.mem[w].clone())
            .unwrap_or_else(|| BitVector::unknown(self.config.data_bits))
    }

    fn check_width(&self, signal: Signal, v: &BitVector) -> Result<(), SramError> {
        let expected = self.config.width_of(signal);
        if v.width() != expected {
            return Err(SramError::Width {
                signal,
                expected,
                actual: v.width(),
            });
        }
        Ok(())
    }

    /// Evaluates the device with the input snapshot present at pin time `t`.
    pub fn apply(
        &mut self,
        t: SimTime,
        we: Bit,
        wclk: Bit,
        addr: &BitVector,
        data: &BitVector,
    ) -> Result<Applied, SramError> {
        self.check_width(Signal::Addr, addr)?;
        self.check_width(Signal::Data, data)?;

        let edge = self.classify(wclk);
        self.last_wclk = wclk;
        self.wclk_defined |= wclk.is_known();

        let address_changed = *addr != self.addr;
        let word = addr.to_index().map(|i| i as usize);
        self.we = we;
        self.addr = addr.clone();
        self.data = data.clone();

        let mut write = None;
        let mut content_changed = false;
        match (we, edge) {
            (Bit::One, Edge::Active) => {
                match word {
                    Some(w) => {
                        content_changed = self.mem[w] != *data;
                        self.mem[w] = data.clone();
                    }
                    None => self.diagnose(
                        t,
                        "write with indeterminate address ignored; output forced unknown",
                    ),
                }
                write = Some(WriteOp {
                    edge_time: t,
                    word,
                    data: data.clone(),
                    output_time: t + self.config.clock_path(),
                });
            }
            (Bit::Unknown, Edge::Active)
            | (Bit::One | Bit::Unknown, Edge::Indeterminate { may_be_active: true }) => {
                let why = if we == Bit::Unknown {
                    "write enable unknown at clock edge"
                } else {
                    "indeterminate clock edge with write enabled"
                };
                match word {
                    Some(w) => {
                        let x = BitVector::unknown(self.config.data_bits);
                        content_changed = self.mem[w] != x;
                        self.mem[w] = x;
                        self.diagnose(t, &format!("{why}; word {w} corrupted"));
                    }
                    None => self.diagnose(t, &format!("{why}; address indeterminate")),
                }
            }
            _ => {}
        }

        let mut updates = Vec::new();
        if write.is_some() {
            updates.push(self.output_update(t + self.config.clock_path(), word));
        } else if address_changed {
            updates.push(self.output_update(t + self.config.address_path(), word));
        } else if content_changed {
            updates.push(self.output_update(t + self.config.clock_path(), word));
        }

        Ok(Applied {
            updates,
            edge,
            write,
            address_changed,
        })
    }

    fn output_update(&mut self, time: SimTime, word: Option<usize>) -> PortUpdate {
        let value = self.read_word(word);
        self.output = value.clone();
        PortUpdate {
            time,
            port: Signal::Out,
            value,
        }
    }

    fn diagnose(&mut self, time: SimTime, message: &str) {
        self.diagnostics.push(Diagnostic {
            time,
            message: message.to_string(),
        });
    }

    /// Forces bits of `word` to `Unknown` (all bits when `bits` is `None`).
    /// Returns whether the stored word changed.
    pub fn invalidate(&mut self, word: usize, bits: Option<&[usize]>) -> Result<bool, SramError> {
        let words = self.config.words;
        let width = self.config.data_bits;
        let stored = self
            .mem
            .get_mut(word)
            .ok_or(SramError::WordOutOfRange { word, words })?;
        let before = stored.clone();
        match bits {
            None => *stored = BitVector::unknown(width),
            Some(bits) => {
                for &b in bits {
                    if b >= width {
                        return Err(SramError::BitOutOfRange { bit: b, width });
                    }
                    stored.set_bit(b, Bit::Unknown);
                }
            }
        }
        Ok(*stored != before)
    }

    /// Re-reads the addressed word into the settled output, returning the
    /// update to schedule at `time` if `word` is currently addressed.
    pub fn refresh_output(&mut self, time: SimTime, word: usize) -> Option<PortUpdate> {
        (self.addressed_word() == Some(word)).then(|| self.output_update(time, Some(word)))
    }
}
