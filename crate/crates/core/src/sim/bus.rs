use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ids::{MsgId, NfId, Tick};
use crate::nf::Emit;
use crate::sim::message::SignalingMessage;

/// Point-to-point signaling transport with per-link latency.
#[derive(Debug, Clone)]
pub struct Bus {
    default_latency: Tick,
    links: BTreeMap<(NfId, NfId), Tick>,
    jitter: Tick,
    rng: ChaCha8Rng,
    next_id: u64,
}

impl Bus {
    pub fn new(default_latency: Tick, jitter: Tick, seed: u64) -> Self {
        Self {
            default_latency,
            links: BTreeMap::new(),
            jitter,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_id: 0,
        }
    }

    /// Links are symmetric.
    pub fn set_link(&mut self, a: NfId, b: NfId, latency: Tick) {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.links.insert(key, latency);
    }

    pub fn latency(&self, a: &NfId, b: &NfId) -> Tick {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.links.get(&key).copied().unwrap_or(self.default_latency)
    }

    pub(crate) fn stamp(&mut self, src: &NfId, emit: Emit, now: Tick) -> SignalingMessage {
        let mut delay = self.latency(src, &emit.dst);
        if self.jitter > 0 {
            delay += self.rng.gen_range(0..=self.jitter);
        }
        self.next_id += 1;
        SignalingMessage {
            msg_id: MsgId(self.next_id),
            name: emit.name,
            src: src.clone(),
            dst: emit.dst,
            ue: emit.ue,
            sent_at: now,
            delivered_at: now + delay,
            correlates: emit.run,
            payload: emit.payload,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::message::{MessageName, Payload};

    fn emit(dst: &str) -> Emit {
        Emit {
            name: MessageName::RegistrationRequest,
            dst: dst.into(),
            ue: "u1".into(),
            run: None,
            payload: Payload::None,
        }
    }

    #[test]
    fn default_and_override() {
        let mut bus = Bus::new(1, 0, 0);
        bus.set_link("amf1".into(), "u1".into(), 5);
        assert_eq!(bus.latency(&"u1".into(), &"amf1".into()), 5);
        assert_eq!(bus.latency(&"u1".into(), &"smf".into()), 1);
        let m = bus.stamp(&"u1".into(), emit("amf1"), 3);
        assert_eq!((m.sent_at, m.delivered_at, m.msg_id), (3, 8, MsgId(1)));
    }

    #[test]
    fn jitter_is_bounded_and_seeded() {
        let run = |seed| {
            let mut bus = Bus::new(2, 3, seed);
            (0..50)
                .map(|_| bus.stamp(&"a".into(), emit("b"), 0).delivered_at)
                .collect::<Vec<_>>()
        };
        let a = run(7);
        assert_eq!(a, run(7));
        assert!(a.iter().all(|d| (2..=5).contains(d)));
    }
}
