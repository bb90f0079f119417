//! Slice identities, NSSAI set algebra and the PDU session lifecycle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{NfId, SessionId, UeId};

/// Upper bound on the size of an Allowed NSSAI.
pub const MAX_ALLOWED_SLICES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("requested NSSAI is empty")]
    InvalidRequest,
    #[error("allowed NSSAI would hold {size} slices, more than the limit of {MAX_ALLOWED_SLICES}")]
    AllowedNssaiOverflow { size: usize },
    #[error("invalid slice differentiator {0:?}: expected 1 to 6 hex digits")]
    InvalidDifferentiator(String),
    #[error("invalid S-NSSAI {0:?}: expected <sst>:<sd>")]
    InvalidSnssai(String),
    #[error("unknown service type {0:?}")]
    UnknownServiceType(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ServiceType {
    #[serde(rename = "URLLC")]
    Urllc,
    #[serde(rename = "V2X")]
    V2x,
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "MIoT")]
    Miot,
}

impl ServiceType {
    pub const ALL: [ServiceType; 4] = [Self::Urllc, Self::V2x, Self::Embb, Self::Miot];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Urllc => "URLLC",
            Self::V2x => "V2X",
            Self::Embb => "eMBB",
            Self::Miot => "MIoT",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ServiceType {
    type Err = SliceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| SliceError::UnknownServiceType(s.to_owned()))
    }
}

/// Opaque slice differentiator: 1 to 6 hex digits, stored upper-case.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SliceDifferentiator(String);

impl SliceDifferentiator {
    pub fn new(sd: &str) -> Result<Self, SliceError> {
        let valid = (1..=6).contains(&sd.len()) && sd.chars().all(|c| c.is_ascii_hexdigit());
        if !valid {
            return Err(SliceError::InvalidDifferentiator(sd.to_owned()));
        }
        Ok(Self(sd.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SliceDifferentiator {
    type Error = SliceError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value)
    }
}

impl From<SliceDifferentiator> for String {
    fn from(sd: SliceDifferentiator) -> Self {
        sd.0
    }
}

/// Identity of one network slice.
///
/// Ordering is by service type first, then by differentiator, so sets of
/// slices iterate deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SNssai {
    pub sst: ServiceType,
    pub sd: SliceDifferentiator,
}

impl SNssai {
    pub fn new(sst: ServiceType, sd: &str) -> Result<Self, SliceError> {
        Ok(Self {
            sst,
            sd: SliceDifferentiator::new(sd)?,
        })
    }
}

impl fmt::Display for SNssai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.sst, self.sd.as_str())
    }
}

impl FromStr for SNssai {
    type Err = SliceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sst, sd) = s
            .split_once(':')
            .ok_or_else(|| SliceError::InvalidSnssai(s.to_owned()))?;
        SNssai::new(sst.parse()?, sd)
    }
}

/// A UE's four NSSAI sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NssaiView {
    /// PLMN-wide Configured NSSAI.
    pub configured: BTreeSet<SNssai>,
    /// Subscribed S-NSSAIs mapped to their default flag.
    pub subscribed: BTreeMap<SNssai, bool>,
    pub allowed: BTreeSet<SNssai>,
    pub requested: Option<BTreeSet<SNssai>>,
}

/// A broken [`NssaiView`] invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NssaiViolation {
    AllowedNotConfigured(SNssai),
    AllowedNotSubscribed(SNssai),
    AllowedTooLarge(usize),
    NoDefaultSubscription,
}

impl NssaiViolation {
    /// Short name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Self::AllowedNotConfigured(_) => "allowed-subset-configured",
            Self::AllowedNotSubscribed(_) => "allowed-subset-subscribed",
            Self::AllowedTooLarge(_) => "allowed-max-8",
            Self::NoDefaultSubscription => "default-subscription",
        }
    }
}

impl fmt::Display for NssaiViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AllowedNotConfigured(s) => write!(f, "allowed slice {s} is not configured"),
            Self::AllowedNotSubscribed(s) => write!(f, "allowed slice {s} is not subscribed"),
            Self::AllowedTooLarge(n) => {
                write!(f, "allowed set holds {n} slices (limit {MAX_ALLOWED_SLICES})")
            }
            Self::NoDefaultSubscription => f.write_str("no subscribed slice is marked default"),
        }
    }
}

impl NssaiView {
    pub fn is_subscribed(&self, snssai: &SNssai) -> bool {
        self.subscribed.contains_key(snssai)
    }

    pub fn violations(&self) -> Vec<NssaiViolation> {
        let mut out = Vec::new();
        for s in &self.allowed {
            if !self.configured.contains(s) {
                out.push(NssaiViolation::AllowedNotConfigured(s.clone()));
            }
            if !self.subscribed.contains_key(s) {
                out.push(NssaiViolation::AllowedNotSubscribed(s.clone()));
            }
        }
        if self.allowed.len() > MAX_ALLOWED_SLICES {
            out.push(NssaiViolation::AllowedTooLarge(self.allowed.len()));
        }
        if !self.subscribed.values().any(|&default| default) {
            out.push(NssaiViolation::NoDefaultSubscription);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    NotSubscribed,
    NotConfigured,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verification {
    pub accepted: BTreeSet<SNssai>,
    pub rejected: BTreeMap<SNssai, RejectReason>,
}

/// Splits a Requested NSSAI into the slices the network can grant and the
/// ones it must refuse. A slice outside the Configured NSSAI is reported as
/// `NotConfigured` even when it is also unsubscribed.
pub fn verify_requested_nssai(
    requested: &BTreeSet<SNssai>,
    subscribed: &BTreeMap<SNssai, bool>,
    configured: &BTreeSet<SNssai>,
) -> Result<Verification, SliceError> {
    if requested.is_empty() {
        return Err(SliceError::InvalidRequest);
    }
    let mut v = Verification::default();
    for s in requested {
        if !configured.contains(s) {
            v.rejected.insert(s.clone(), RejectReason::NotConfigured);
        } else if !subscribed.contains_key(s) {
            v.rejected.insert(s.clone(), RejectReason::NotSubscribed);
        } else {
            v.accepted.insert(s.clone());
        }
    }
    Ok(v)
}

/// New Allowed NSSAI after a registration-driven update.
///
/// The result is `accepted`, plus `current_active` when the caller asked to
/// keep it and it is currently allowed. Overflowing the max-8 rule is an
/// error; nothing is truncated.
pub fn compute_allowed_nssai(
    current_allowed: &BTreeSet<SNssai>,
    accepted: &BTreeSet<SNssai>,
    remove_current: bool,
    current_active: Option<&SNssai>,
) -> Result<BTreeSet<SNssai>, SliceError> {
    let mut next = accepted.clone();
    if !remove_current {
        if let Some(active) = current_active.filter(|a| current_allowed.contains(*a)) {
            next.insert(active.clone());
        }
    }
    if next.len() > MAX_ALLOWED_SLICES {
        return Err(SliceError::AllowedNssaiOverflow { size: next.len() });
    }
    Ok(next)
}

/// Chooses one slice out of a candidate list.
pub trait SelectionPolicy {
    fn choose(&self, view: &NssaiView, candidates: &[SNssai]) -> Option<SNssai>;
}

/// Lowest declared priority index wins; ties (and undeclared slices, which
/// rank last) fall back to lexicographic differentiator order.
#[derive(Debug, Clone, Copy)]
pub struct LowestPriorityIndex<'a> {
    pub priorities: &'a BTreeMap<SNssai, u32>,
}

impl LowestPriorityIndex<'_> {
    fn rank(&self, s: &SNssai) -> (u32, String) {
        let prio = self.priorities.get(s).copied().unwrap_or(u32::MAX);
        (prio, s.sd.as_str().to_owned())
    }
}

impl SelectionPolicy for LowestPriorityIndex<'_> {
    fn choose(&self, _view: &NssaiView, candidates: &[SNssai]) -> Option<SNssai> {
        candidates.iter().min_by_key(|s| self.rank(s)).cloned()
    }
}

/// Candidates already in the Allowed NSSAI first, then [`LowestPriorityIndex`].
#[derive(Debug, Clone, Copy)]
pub struct PreferAllowed<'a>(pub LowestPriorityIndex<'a>);

impl SelectionPolicy for PreferAllowed<'_> {
    fn choose(&self, view: &NssaiView, candidates: &[SNssai]) -> Option<SNssai> {
        candidates
            .iter()
            .min_by_key(|s| (!view.allowed.contains(*s), self.0.rank(s)))
            .cloned()
    }
}

/// Picks an alternate slice of the same service type from the subscribed and
/// configured slices. `None` means there is no candidate at all.
pub fn select_alternate_snssai(
    view: &NssaiView,
    service_type: ServiceType,
    exclude: &SNssai,
    policy: &dyn SelectionPolicy,
) -> Option<SNssai> {
    let candidates: Vec<SNssai> = view
        .subscribed
        .keys()
        .filter(|s| *s != exclude && s.sst == service_type && view.configured.contains(*s))
        .cloned()
        .collect();
    policy.choose(view, &candidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SessionType {
    #[default]
    #[serde(rename = "IP")]
    Ip,
    Ethernet,
    Unstructured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionState {
    Inactive,
    Establishing,
    Active,
    Releasing,
    Released,
}

impl SessionState {
    pub fn can_transition_to(self, next: SessionState) -> bool {
        use SessionState::*;
        matches!(
            (self, next),
            (Inactive, Establishing)
                | (Establishing, Active)
                | (Establishing, Released)
                | (Active, Releasing)
                | (Releasing, Released)
        )
    }

    /// States in which the session holds network resources.
    pub fn holds_resources(self) -> bool {
        matches!(self, Self::Establishing | Self::Active | Self::Releasing)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("session {session}: illegal transition {from:?} -> {to:?}")]
pub struct IllegalTransition {
    pub session: SessionId,
    pub from: SessionState,
    pub to: SessionState,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IpPrefix(pub String);

impl IpPrefix {
    pub fn for_session(session: &SessionId) -> Self {
        IpPrefix(format!("pfx-{session}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PduSession {
    pub session_id: SessionId,
    pub snssai: SNssai,
    pub dn_name: String,
    pub session_type: SessionType,
    pub state: SessionState,
    pub ip_prefix: Option<IpPrefix>,
    pub smf: Option<NfId>,
    pub upfs: Vec<NfId>,
    pub policy_ref: Option<String>,
}

impl PduSession {
    pub fn new(
        session_id: SessionId,
        snssai: SNssai,
        dn_name: impl Into<String>,
        session_type: SessionType,
    ) -> Self {
        Self {
            session_id,
            snssai,
            dn_name: dn_name.into(),
            session_type,
            state: SessionState::Inactive,
            ip_prefix: None,
            smf: None,
            upfs: Vec::new(),
            policy_ref: None,
        }
    }

    pub fn transition(&mut self, next: SessionState) -> Result<(), IllegalTransition> {
        if !self.state.can_transition_to(next) {
            return Err(IllegalTransition {
                session: self.session_id.clone(),
                from: self.state,
                to: next,
            });
        }
        self.state = next;
        if next == SessionState::Released {
            self.ip_prefix = None;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegistrationState {
    Deregistered,
    Registered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UeContext {
    pub ue_id: UeId,
    pub service_type: ServiceType,
    pub serving_amf: NfId,
    pub nssai: NssaiView,
    pub sessions: BTreeMap<SessionId, PduSession>,
    pub registration_state: RegistrationState,
    /// Slice-priority table consulted by the selection policy.
    pub priorities: BTreeMap<SNssai, u32>,
    next_session: u32,
}

impl UeContext {
    pub fn new(ue_id: UeId, service_type: ServiceType, serving_amf: NfId, nssai: NssaiView) -> Self {
        Self {
            ue_id,
            service_type,
            serving_amf,
            nssai,
            sessions: BTreeMap::new(),
            registration_state: RegistrationState::Registered,
            priorities: BTreeMap::new(),
            next_session: 0,
        }
    }

    pub fn allocate_session_id(&mut self) -> SessionId {
        self.next_session += 1;
        SessionId::new(format!("{}-s{}", self.ue_id, self.next_session))
    }

    /// First Active session on `snssai`, in session-id order.
    pub fn active_session_on(&self, snssai: &SNssai) -> Option<&PduSession> {
        self.sessions
            .values()
            .find(|s| s.state == SessionState::Active && &s.snssai == snssai)
    }

    pub fn session(&self, id: &SessionId) -> Option<&PduSession> {
        self.sessions.get(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(sd: &str) -> SNssai {
        SNssai::new(ServiceType::Embb, sd).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<SNssai> {
        items.iter().map(|i| s(i)).collect()
    }

    fn subs(items: &[&str]) -> BTreeMap<SNssai, bool> {
        items.iter().enumerate().map(|(i, x)| (s(x), i == 0)).collect()
    }

    #[test]
    fn differentiator_validation() {
        assert!(SliceDifferentiator::new("00a1f").is_ok());
        assert_eq!(SliceDifferentiator::new("ff").unwrap().as_str(), "FF");
        assert!(SliceDifferentiator::new("").is_err());
        assert!(SliceDifferentiator::new("1234567").is_err());
        assert!(SliceDifferentiator::new("xyz").is_err());
    }

    #[test]
    fn snssai_text_form() {
        let a: SNssai = "URLLC:0A".parse().unwrap();
        assert_eq!(a.sst, ServiceType::Urllc);
        assert_eq!(a.to_string(), "URLLC:0A");
        assert!("eMBB".parse::<SNssai>().is_err());
        assert!("LTE:01".parse::<SNssai>().is_err());
    }

    #[test]
    fn verify_subset_request() {
        let v = verify_requested_nssai(&set(&["A"]), &subs(&["A", "B"]), &set(&["A", "B", "C"]))
            .unwrap();
        assert_eq!(v.accepted, set(&["A"]));
        assert!(v.rejected.is_empty());
    }

    #[test]
    fn verify_unsubscribed_slice() {
        let v = verify_requested_nssai(&set(&["D"]), &subs(&["A", "B"]), &set(&["A", "B", "C", "D"]))
            .unwrap();
        assert!(v.accepted.is_empty());
        assert_eq!(v.rejected.get(&s("D")), Some(&RejectReason::NotSubscribed));
    }

    #[test]
    fn verify_rejects_empty_request() {
        assert_eq!(
            verify_requested_nssai(&BTreeSet::new(), &subs(&["A"]), &set(&["A"])),
            Err(SliceError::InvalidRequest)
        );
    }

    #[test]
    fn allowed_update_removes_or_keeps_active_slice() {
        let current = set(&["A"]);
        let accepted = set(&["B"]);
        let a = s("A");
        assert_eq!(
            compute_allowed_nssai(&current, &accepted, true, Some(&a)).unwrap(),
            set(&["B"])
        );
        assert_eq!(
            compute_allowed_nssai(&current, &accepted, false, Some(&a)).unwrap(),
            set(&["A", "B"])
        );
    }

    #[test]
    fn allowed_update_overflow_is_rejected() {
        let eight = set(&["A", "B", "C", "D", "E", "F", "AA", "AB"]);
        let mut nine = eight.clone();
        nine.insert(s("AC"));
        let a = s("A");
        // cardinality oracle: nine distinct slices plus a retained member of them
        assert_eq!(nine.len(), 9);
        assert_eq!(
            compute_allowed_nssai(&eight, &nine, false, Some(&a)),
            Err(SliceError::AllowedNssaiOverflow { size: 9 })
        );
    }

    #[test]
    fn alternate_selection() {
        let mut view = NssaiView {
            configured: set(&["A", "B", "C"]),
            subscribed: subs(&["A", "B"]),
            ..Default::default()
        };
        let empty = BTreeMap::new();
        let policy = LowestPriorityIndex { priorities: &empty };
        assert_eq!(
            select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &policy),
            Some(s("B"))
        );

        view.subscribed = subs(&["A"]);
        assert_eq!(select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &policy), None);

        view.subscribed = subs(&["A", "B", "C"]);
        let prio: BTreeMap<_, _> = [(s("B"), 2), (s("C"), 1)].into_iter().collect();
        let policy = LowestPriorityIndex { priorities: &prio };
        // oracle: linear scan of the priority table for the minimum entry
        let mut best = None;
        for (slice, p) in &prio {
            if best.as_ref().is_none_or(|(_, bp): &(SNssai, &u32)| p < *bp) {
                best = Some((slice.clone(), p));
            }
        }
        let expected = best.unwrap().0;
        assert_eq!(expected, s("C"));
        assert_eq!(
            select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &policy),
            Some(expected)
        );
    }

    #[test]
    fn alternate_selection_skips_other_service_types_and_unconfigured() {
        let urllc = SNssai::new(ServiceType::Urllc, "B").unwrap();
        let mut subscribed = subs(&["A", "D"]);
        subscribed.insert(urllc.clone(), false);
        let view = NssaiView {
            configured: [s("A"), urllc].into_iter().collect(),
            subscribed,
            ..Default::default()
        };
        let empty = BTreeMap::new();
        let policy = LowestPriorityIndex { priorities: &empty };
        assert_eq!(select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &policy), None);
    }

    #[test]
    fn prefer_allowed_policy_ranks_allowed_first() {
        let view = NssaiView {
            configured: set(&["A", "B", "C"]),
            subscribed: subs(&["A", "B", "C"]),
            allowed: set(&["A", "C"]),
            requested: None,
        };
        let prio: BTreeMap<_, _> = [(s("B"), 1), (s("C"), 5)].into_iter().collect();
        let base = LowestPriorityIndex { priorities: &prio };
        assert_eq!(select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &base), Some(s("B")));
        assert_eq!(
            select_alternate_snssai(&view, ServiceType::Embb, &s("A"), &PreferAllowed(base)),
            Some(s("C"))
        );
    }

    #[test]
    fn session_lifecycle() {
        let mut p = PduSession::new("u1-s1".into(), s("A"), "internet", SessionType::Ip);
        assert!(p.transition(SessionState::Active).is_err());
        p.transition(SessionState::Establishing).unwrap();
        p.transition(SessionState::Active).unwrap();
        p.ip_prefix = Some(IpPrefix::for_session(&p.session_id));
        p.transition(SessionState::Releasing).unwrap();
        assert!(p.ip_prefix.is_some());
        p.transition(SessionState::Released).unwrap();
        assert!(p.ip_prefix.is_none());
        assert!(p.transition(SessionState::Releasing).is_err());

        let mut q = PduSession::new("u1-s2".into(), s("A"), "internet", SessionType::Ip);
        q.transition(SessionState::Establishing).unwrap();
        q.transition(SessionState::Released).unwrap();
    }

    #[test]
    fn view_violations() {
        let mut view = NssaiView {
            configured: set(&["A", "B"]),
            subscribed: subs(&["A"]),
            allowed: set(&["A", "B", "C"]),
            requested: None,
        };
        let v = view.violations();
        assert!(v.contains(&NssaiViolation::AllowedNotConfigured(s("C"))));
        assert!(v.contains(&NssaiViolation::AllowedNotSubscribed(s("B"))));
        view.subscribed.insert(s("A"), false);
        view.allowed = set(&["A"]);
        assert_eq!(view.violations(), vec![NssaiViolation::NoDefaultSubscription]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const UNIVERSE: [&str; 10] = ["01", "02", "03", "04", "05", "06", "07", "08", "09", "0A"];

        fn subset() -> impl Strategy<Value = BTreeSet<SNssai>> {
            proptest::collection::btree_set(0usize..UNIVERSE.len(), 0..UNIVERSE.len())
                .prop_map(|idx| idx.into_iter().map(|i| s(UNIVERSE[i])).collect())
        }

        proptest! {
            #[test]
            fn verification_is_idempotent(req in subset(), sub in subset(), conf in subset()) {
                prop_assume!(!req.is_empty());
                let subscribed: BTreeMap<_, _> = sub.into_iter().map(|x| (x, false)).collect();
                let first = verify_requested_nssai(&req, &subscribed, &conf).unwrap();
                prop_assume!(!first.accepted.is_empty());
                let again = verify_requested_nssai(&first.accepted, &subscribed, &conf).unwrap();
                prop_assert_eq!(again.accepted, first.accepted);
                prop_assert!(again.rejected.is_empty());
            }

            #[test]
            fn keeping_the_active_slice_never_drops_it(
                current in subset(), accepted in subset(), pick in 0usize..UNIVERSE.len()
            ) {
                let active = s(UNIVERSE[pick]);
                if let Ok(next) = compute_allowed_nssai(&current, &accepted, false, Some(&active)) {
                    prop_assert!(next.len() <= MAX_ALLOWED_SLICES);
                    if current.contains(&active) {
                        prop_assert!(next.contains(&active));
                    }
                }
            }

            #[test]
            fn alternate_is_never_excluded_or_foreign(
                sub in subset(), conf in subset(), pick in 0usize..UNIVERSE.len(), urllc in any::<bool>()
            ) {
                let exclude = s(UNIVERSE[pick]);
                let mut subscribed: BTreeMap<_, _> = sub.into_iter().map(|x| (x, true)).collect();
                let foreign = SNssai::new(ServiceType::Urllc, "0B").unwrap();
                let mut configured = conf;
                if urllc {
                    subscribed.insert(foreign.clone(), false);
                    configured.insert(foreign);
                }
                let view = NssaiView { configured, subscribed, ..Default::default() };
                let empty = BTreeMap::new();
                let policy = LowestPriorityIndex { priorities: &empty };
                if let Some(alt) = select_alternate_snssai(&view, ServiceType::Embb, &exclude, &policy) {
                    prop_assert_ne!(&alt, &exclude);
                    prop_assert_eq!(alt.sst, ServiceType::Embb);
                }
            }
        }
    }
}
