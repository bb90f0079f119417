//! State invariants checked at event boundaries.

use std::collections::BTreeSet;

use crate::ids::SessionId;
use crate::nf::{amf_can_serve, Network, NfStore};
use crate::procedures::Procedure;
use crate::slice::SessionState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breach {
    pub invariant: &'static str,
    pub detail: String,
}

fn breach(invariant: &'static str, detail: String) -> Breach {
    Breach { invariant, detail }
}

/// Checks NSSAI, session and resource invariants across the whole network.
pub fn check_network(net: &Network) -> Result<(), Breach> {
    let mut holding: BTreeSet<SessionId> = BTreeSet::new();
    let mut active: BTreeSet<SessionId> = BTreeSet::new();
    for ue in net.ues() {
        if let Some(v) = ue.nssai.violations().into_iter().next() {
            return Err(breach(v.invariant(), format!("UE {}: {v}", ue.ue_id)));
        }
        for s in ue.sessions.values() {
            let has_prefix = s.ip_prefix.is_some();
            let expects_prefix = matches!(s.state, SessionState::Active | SessionState::Releasing);
            if has_prefix != expects_prefix {
                return Err(breach(
                    "ip-prefix-lifecycle",
                    format!("session {} is {:?} with prefix {:?}", s.session_id, s.state, s.ip_prefix),
                ));
            }
            if s.state == SessionState::Active {
                if !ue.nssai.allowed.contains(&s.snssai) {
                    return Err(breach(
                        "active-session-allowed",
                        format!("session {} is Active on {} outside the Allowed NSSAI", s.session_id, s.snssai),
                    ));
                }
                if s.snssai.sst != ue.service_type {
                    return Err(breach(
                        "service-type",
                        format!("session {} is on {} but UE is {}", s.session_id, s.snssai, ue.service_type),
                    ));
                }
                active.insert(s.session_id.clone());
            }
            if s.state.holds_resources() {
                holding.insert(s.session_id.clone());
            }
        }
        let serving: Vec<_> = net
            .nfs()
            .filter(|n| matches!(&n.store, NfStore::Amf(a) if a.registered.contains(&ue.ue_id)))
            .collect();
        if serving.len() > 1 {
            return Err(breach("single-serving-amf", format!("UE {} registered at {} AMFs", ue.ue_id, serving.len())));
        }
        if !net.runs().in_flight(&ue.ue_id, Procedure::Registration) {
            if let Some(amf) = net.directory().profile(&ue.serving_amf) {
                if !amf_can_serve(amf, &ue.nssai.allowed) {
                    return Err(breach(
                        "amf-serves-allowed",
                        format!("{} cannot serve the Allowed NSSAI of {}", amf.nf_id, ue.ue_id),
                    ));
                }
            }
        }
    }

    let mut prefixes = BTreeSet::new();
    let mut tokens = BTreeSet::new();
    let mut n4 = BTreeSet::new();
    for nf in net.nfs() {
        let leaked = match &nf.store {
            NfStore::Upf(s) => {
                n4.extend(s.n4.keys().cloned());
                s.n4.keys().find(|k| !holding.contains(*k))
            }
            NfStore::Smf(s) => {
                prefixes.extend(s.prefixes.keys().cloned());
                n4.extend(s.n4.keys().cloned());
                s.n4.keys().chain(s.prefixes.keys()).find(|k| !holding.contains(*k))
            }
            NfStore::Ran(s) => {
                tokens.extend(s.tokens.keys().cloned());
                s.tokens.keys().find(|k| !holding.contains(*k))
            }
            _ => None,
        };
        if let Some(sid) = leaked {
            return Err(breach(
                "resource-conservation",
                format!("{} still holds resources of released session {sid}", nf.profile.nf_id),
            ));
        }
    }
    if let Some(sid) = active
        .iter()
        .find(|s| !prefixes.contains(*s) || !tokens.contains(*s) || !n4.contains(*s))
    {
        return Err(breach(
            "resource-conservation",
            format!("Active session {sid} is missing N4, prefix or RAN resources"),
        ));
    }
    Ok(())
}

/// Counts of session resources held anywhere in the network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResourceCount {
    pub n4_sessions: usize,
    pub prefixes: usize,
    pub ran_tokens: usize,
}

pub fn resources_of(net: &Network, session: &SessionId) -> ResourceCount {
    let mut c = ResourceCount::default();
    for nf in net.nfs() {
        match &nf.store {
            NfStore::Upf(s) => c.n4_sessions += usize::from(s.n4.contains_key(session)),
            NfStore::Smf(s) => {
                c.n4_sessions += s.n4.get(session).map_or(0, Vec::len);
                c.prefixes += usize::from(s.prefixes.contains_key(session));
            }
            NfStore::Ran(s) => c.ran_tokens += usize::from(s.tokens.contains_key(session)),
            _ => {}
        }
    }
    c
}
