use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::ids::{SwitchId, Tick};
use crate::sim::message::SignalingMessage;
use crate::switching::TimerKind;

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Deliver(SignalingMessage),
    /// Index into the scenario's trigger script.
    Trigger(usize),
    Timer { switch: SwitchId, kind: TimerKind },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub seq: u64,
    pub at: Tick,
    pub payload: EventPayload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot schedule at t={at}: clock is already at t={clock}")]
pub struct SchedulingError {
    pub at: Tick,
    pub clock: Tick,
}

struct Entry(SimEvent);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        (self.0.at, self.0.seq).cmp(&(other.0.at, other.0.seq))
    }
}

/// Pending events, dequeued in (at, seq) order.
#[derive(Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    clock: Tick,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> Tick {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Hands out the next sequence number without queueing anything.
    pub fn next_seq(&mut self) -> u64 {
        self.next_seq += 1;
        self.next_seq
    }

    pub fn schedule(&mut self, at: Tick, payload: EventPayload) -> Result<u64, SchedulingError> {
        if at < self.clock {
            return Err(SchedulingError { at, clock: self.clock });
        }
        let seq = self.next_seq();
        self.heap.push(Reverse(Entry(SimEvent { seq, at, payload })));
        Ok(seq)
    }

    /// Removes the earliest event and moves the clock to it.
    pub fn pop(&mut self) -> Option<SimEvent> {
        let Reverse(Entry(ev)) = self.heap.pop()?;
        self.clock = ev.at;
        Some(ev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trig(i: usize) -> EventPayload {
        EventPayload::Trigger(i)
    }

    #[test]
    fn clock_reaches_scheduled_time() {
        let mut q = EventQueue::new();
        q.schedule(3, trig(0)).unwrap();
        q.pop();
        q.schedule(5, trig(1)).unwrap();
        while q.pop().is_some() {}
        assert!(q.now() >= 5);
    }

    #[test]
    fn same_tick_lower_seq_first() {
        let mut q = EventQueue::new();
        let a = q.schedule(4, trig(0)).unwrap();
        let b = q.schedule(4, trig(1)).unwrap();
        assert!(a < b);
        assert_eq!(q.pop().unwrap().seq, a);
        assert_eq!(q.pop().unwrap().seq, b);
    }

    #[test]
    fn past_is_rejected() {
        let mut q = EventQueue::new();
        q.schedule(3, trig(0)).unwrap();
        q.pop();
        assert_eq!(q.schedule(2, trig(1)), Err(SchedulingError { at: 2, clock: 3 }));
    }

    proptest! {
        #[test]
        fn dequeues_in_at_seq_order(ats in proptest::collection::vec(0u64..20, 1..60)) {
            let mut q = EventQueue::new();
            for (i, at) in ats.iter().enumerate() {
                q.schedule(*at, trig(i)).unwrap();
            }
            let mut last = (0, 0);
            while let Some(ev) = q.pop() {
                prop_assert!((ev.at, ev.seq) > last);
                last = (ev.at, ev.seq);
            }
        }
    }
}
