use std::fmt;
use std::ops::Add;

use serde::Serialize;

use crate::logic::BitVector;

/// Absolute simulation time in integer picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn ps(self) -> u64 {
        self.0
    }

    pub fn from_ns(ns: u64) -> Self {
        SimTime(ns * 1000)
    }

    /// Picoseconds elapsed since `earlier`; zero if `earlier` is later.
    pub fn since(self, earlier: SimTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;

    fn add(self, ps: u64) -> SimTime {
        SimTime(self.0 + ps)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ps", self.0)
    }
}

/// Device pins. Declaration order is the same-timestamp processing rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Signal {
    #[serde(rename = "WE")]
    We,
    #[serde(rename = "WCLK")]
    Wclk,
    #[serde(rename = "A")]
    Addr,
    #[serde(rename = "D")]
    Data,
    #[serde(rename = "O")]
    Out,
}

impl Signal {
    pub const ALL: [Signal; 5] = [
        Signal::We,
        Signal::Wclk,
        Signal::Addr,
        Signal::Data,
        Signal::Out,
    ];

    pub const INPUTS: [Signal; 4] = [Signal::We, Signal::Wclk, Signal::Addr, Signal::Data];

    pub fn name(self) -> &'static str {
        match self {
            Signal::We => "WE",
            Signal::Wclk => "WCLK",
            Signal::Addr => "A",
            Signal::Data => "D",
            Signal::Out => "O",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Signal::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn is_input(self) -> bool {
        self != Signal::Out
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub signal: Signal,
    pub value: BitVector,
}

impl Event {
    pub fn new(time: SimTime, signal: Signal, value: BitVector) -> Self {
        Event {
            time,
            signal,
            value,
        }
    }
}
