use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use super::event::{Event, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("event on {signal} at {at} is before the current time {now}")]
    InPast {
        signal: &'static str,
        at: SimTime,
        now: SimTime,
    },
}

#[derive(Debug)]
struct Entry {
    seq: u64,
    event: Event,
}

impl Entry {
    fn key(&self) -> (SimTime, u8, u64) {
        (self.event.time, self.event.signal.rank(), self.seq)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Pending events ordered by (time, signal rank, insertion sequence).
///
/// Output events scheduled for a time that already has a pending output
/// event replace it: the last write wins.
#[derive(Debug, Default)]
pub struct Schedule {
    heap: BinaryHeap<Reverse<Entry>>,
    now: SimTime,
    next_seq: u64,
    /// Live sequence number of the pending output event per timestamp.
    live_outputs: HashMap<SimTime, u64>,
    cancelled: usize,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len() - self.cancelled
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn schedule(&mut self, event: Event) -> Result<(), ScheduleError> {
        if event.time < self.now {
            return Err(ScheduleError::InPast {
                signal: event.signal.name(),
                at: event.time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        if !event.signal.is_input() && self.live_outputs.insert(event.time, seq).is_some() {
            self.cancelled += 1;
        }
        self.heap.push(Reverse(Entry { seq, event }));
        Ok(())
    }

    fn is_live(&self, entry: &Entry) -> bool {
        entry.event.signal.is_input()
            || self.live_outputs.get(&entry.event.time) == Some(&entry.seq)
    }

    fn drop_cancelled(&mut self) {
        while let Some(Reverse(top)) = self.heap.peek() {
            if self.is_live(top) {
                break;
            }
            self.heap.pop();
            self.cancelled -= 1;
        }
    }

    /// Time of the next live event.
    pub fn peek_time(&mut self) -> Option<SimTime> {
        self.drop_cancelled();
        self.heap.peek().map(|Reverse(e)| e.event.time)
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.drop_cancelled();
        let Reverse(entry) = self.heap.pop()?;
        if !entry.event.signal.is_input() {
            self.live_outputs.remove(&entry.event.time);
        }
        self.now = entry.event.time;
        Some(entry.event)
    }

    /// Pops the next event only if it is an input event at `time`.
    pub fn pop_input_at(&mut self, time: SimTime) -> Option<Event> {
        self.drop_cancelled();
        match self.heap.peek() {
            Some(Reverse(e)) if e.event.time == time && e.event.signal.is_input() => self.pop(),
            _ => None,
        }
    }

    /// Pops the next event only if it is at `time`.
    pub fn pop_at(&mut self, time: SimTime) -> Option<Event> {
        match self.peek_time() {
            Some(t) if t == time => self.pop(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Signal;
    use crate::logic::BitVector;

    fn ev(t: u64, s: Signal, v: u64) -> Event {
        let width = if matches!(s, Signal::We | Signal::Wclk) { 1 } else { 4 };
        Event::new(SimTime(t), s, BitVector::from_u64(v, width).unwrap())
    }

    #[test]
    fn schedule_into_empty() {
        let mut sch = Schedule::new();
        sch.schedule(ev(0, Signal::We, 1)).unwrap();
        assert_eq!(sch.len(), 1);
    }

    #[test]
    fn same_time_orders_by_rank() {
        let mut sch = Schedule::new();
        sch.schedule(ev(1000, Signal::Data, 3)).unwrap();
        sch.schedule(ev(1000, Signal::Wclk, 1)).unwrap();
        assert_eq!(sch.pop().unwrap().signal, Signal::Wclk);
        assert_eq!(sch.pop().unwrap().signal, Signal::Data);
        assert!(sch.pop().is_none());
    }

    #[test]
    fn past_event_rejected() {
        let mut sch = Schedule::new();
        sch.schedule(ev(1000, Signal::We, 1)).unwrap();
        sch.pop();
        assert!(matches!(
            sch.schedule(ev(500, Signal::We, 0)),
            Err(ScheduleError::InPast { .. })
        ));
    }

    #[test]
    fn insertion_order_breaks_ties() {
        let mut sch = Schedule::new();
        sch.schedule(ev(10, Signal::Addr, 1)).unwrap();
        sch.schedule(ev(10, Signal::Addr, 2)).unwrap();
        assert_eq!(sch.pop().unwrap().value.to_index(), Some(1));
        assert_eq!(sch.pop().unwrap().value.to_index(), Some(2));
    }

    #[test]
    fn later_output_replaces_pending_one() {
        let mut sch = Schedule::new();
        sch.schedule(ev(3000, Signal::Out, 1)).unwrap();
        sch.schedule(ev(3000, Signal::Out, 2)).unwrap();
        sch.schedule(ev(4000, Signal::Out, 3)).unwrap();
        assert_eq!(sch.len(), 2);
        assert_eq!(sch.peek_time(), Some(SimTime(3000)));
        assert_eq!(sch.pop().unwrap().value.to_index(), Some(2));
        assert_eq!(sch.pop().unwrap().value.to_index(), Some(3));
        assert!(sch.is_empty());
    }

    #[test]
    fn pop_input_at_skips_outputs() {
        let mut sch = Schedule::new();
        sch.schedule(ev(10, Signal::Out, 1)).unwrap();
        sch.schedule(ev(10, Signal::We, 1)).unwrap();
        assert_eq!(sch.pop_input_at(SimTime(10)).unwrap().signal, Signal::We);
        assert!(sch.pop_input_at(SimTime(10)).is_none());
        assert_eq!(sch.pop_at(SimTime(10)).unwrap().signal, Signal::Out);
    }
}
