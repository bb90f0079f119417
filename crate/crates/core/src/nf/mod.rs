//! Network functions: profiles, per-kind state stores and AMF selection.
//!
//! Every node on the signaling bus, UEs included, is an [`NfInstance`]. The
//! message-driven behaviour lives in [`Network::nf_handle`]; the steps it
//! dispatches to are organised per procedure under [`crate::procedures`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{NfId, SessionId, Tick, UeId};
use crate::slice::{IpPrefix, SNssai, SessionType};

mod network;
pub(crate) mod responders;

pub use network::{Network, NetworkOptions, ReleaseOrder};
pub(crate) use network::{Emit, Note, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NfKind {
    #[serde(rename = "AMF")]
    Amf,
    #[serde(rename = "SMF")]
    Smf,
    #[serde(rename = "NSSF")]
    Nssf,
    #[serde(rename = "UDM")]
    Udm,
    #[serde(rename = "UDR")]
    Udr,
    #[serde(rename = "PCF")]
    Pcf,
    #[serde(rename = "UPF")]
    Upf,
    #[serde(rename = "NWDAF")]
    Nwdaf,
    #[serde(rename = "RAN")]
    Ran,
    #[serde(rename = "DN")]
    Dn,
    #[serde(rename = "UE")]
    Ue,
}

impl fmt::Display for NfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Amf => "AMF",
            Self::Smf => "SMF",
            Self::Nssf => "NSSF",
            Self::Udm => "UDM",
            Self::Udr => "UDR",
            Self::Pcf => "PCF",
            Self::Upf => "UPF",
            Self::Nwdaf => "NWDAF",
            Self::Ran => "RAN",
            Self::Dn => "DN",
            Self::Ue => "UE",
        };
        f.write_str(s)
    }
}

/// Static identity of a network function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfProfile {
    pub nf_id: NfId,
    pub kind: NfKind,
    /// Slices this instance can serve. Empty for slice-agnostic functions.
    pub serving_snssais: BTreeSet<SNssai>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfInstance {
    pub profile: NfProfile,
    pub store: NfStore,
}

impl NfInstance {
    pub fn new(nf_id: NfId, kind: NfKind, serving: BTreeSet<SNssai>, store: NfStore) -> Self {
        Self {
            profile: NfProfile {
                nf_id,
                kind,
                serving_snssais: serving,
            },
            store,
        }
    }
}

/// Kind-specific state.
#[derive(Debug, Clone, PartialEq)]
pub enum NfStore {
    Amf(AmfStore),
    Smf(SmfStore),
    Upf(UpfStore),
    Ran(RanStore),
    Pcf(PolicyStore),
    Dn(DnStore),
    Nwdaf(AnalyticsStore),
    /// UDM, UDR, NSSF and UE nodes keep no private state. Subscription data
    /// lives in the [`Directory`]'s repository.
    Stateless,
}

impl NfStore {
    pub fn empty_for(kind: NfKind) -> Self {
        match kind {
            NfKind::Amf => Self::Amf(AmfStore::default()),
            NfKind::Smf => Self::Smf(SmfStore::default()),
            NfKind::Upf => Self::Upf(UpfStore::default()),
            NfKind::Ran => Self::Ran(RanStore::default()),
            NfKind::Pcf => Self::Pcf(PolicyStore::default()),
            NfKind::Dn => Self::Dn(DnStore::default()),
            NfKind::Nwdaf => Self::Nwdaf(AnalyticsStore::default()),
            NfKind::Udm | NfKind::Udr | NfKind::Nssf | NfKind::Ue => Self::Stateless,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AmfStore {
    /// UEs for which this AMF is the serving AMF.
    pub registered: BTreeSet<UeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct N4Rules {
    pub detection: String,
    pub enforcement: String,
    pub reporting: String,
}

impl N4Rules {
    pub fn for_session(session: &SessionId) -> Self {
        Self {
            detection: format!("pdr-{session}"),
            enforcement: format!("far-{session}"),
            reporting: format!("urr-{session}"),
        }
    }
}

/// SMF-UPF control association of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct N4Session {
    pub session_id: SessionId,
    pub smf: NfId,
    pub upf: NfId,
    pub rules: N4Rules,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmfStore {
    pub n4: BTreeMap<SessionId, Vec<N4Session>>,
    pub prefixes: BTreeMap<SessionId, IpPrefix>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpfStore {
    pub n4: BTreeMap<SessionId, N4Session>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RanToken(pub String);

impl RanToken {
    pub fn for_session(session: &SessionId) -> Self {
        RanToken(format!("ran-{session}"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RanStore {
    pub tokens: BTreeMap<SessionId, RanToken>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyRecord {
    pub qos_profile: String,
    pub charging_profile: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyStore {
    pub records: BTreeMap<(SNssai, String), PolicyRecord>,
}

impl PolicyStore {
    pub fn reference(snssai: &SNssai, dn: &str) -> String {
        format!("pol-{snssai}-{dn}")
    }
}

/// DN authentication outcome rule. `ue = None` denies every UE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenyRule {
    pub ue: Option<UeId>,
    pub dn: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DnStore {
    pub deny: Vec<DenyRule>,
}

impl DnStore {
    pub fn authorizes(&self, ue: &UeId, dn: &str) -> bool {
        !self
            .deny
            .iter()
            .any(|r| r.dn == dn && r.ue.as_ref().is_none_or(|u| u == ue))
    }
}

/// Scalars written by the scenario and served back on request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceAnalytics {
    pub load: f64,
    pub delay: Tick,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalyticsStore {
    pub slices: BTreeMap<SNssai, SliceAnalytics>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmSubscriptionData {
    pub snssai: SNssai,
    /// `None` matches any data network.
    pub dn: Option<String>,
    /// Empty means every session type.
    pub session_types: Vec<SessionType>,
    /// Whether secondary authentication with the DN is part of establishment.
    pub dn_authorization: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscriptionRecord {
    pub ue_id: UeId,
    pub subscribed: BTreeMap<SNssai, bool>,
    pub sm_data: Vec<SmSubscriptionData>,
}

impl SubscriptionRecord {
    pub fn sm_lookup(&self, snssai: &SNssai, dn: &str, session_type: SessionType) -> Option<&SmSubscriptionData> {
        self.sm_data.iter().find(|d| {
            &d.snssai == snssai
                && d.dn.as_deref().is_none_or(|x| x == dn)
                && (d.session_types.is_empty() || d.session_types.contains(&session_type))
        })
    }
}

/// Subscription data held on behalf of UDR and served by UDM.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataRepository {
    pub subscriptions: BTreeMap<UeId, SubscriptionRecord>,
}

/// Read-only view of the deployment used for selections and routing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Directory {
    pub configured: BTreeSet<SNssai>,
    pub profiles: BTreeMap<NfId, NfProfile>,
    pub repository: DataRepository,
}

impl Directory {
    pub fn of_kind(&self, kind: NfKind) -> impl Iterator<Item = &NfProfile> {
        self.profiles.values().filter(move |p| p.kind == kind)
    }

    /// First instance of `kind` in id order.
    pub fn first(&self, kind: NfKind) -> Option<&NfId> {
        self.of_kind(kind).next().map(|p| &p.nf_id)
    }

    pub fn profile(&self, id: &NfId) -> Option<&NfProfile> {
        self.profiles.get(id)
    }

    /// One SMF per slice: the first SMF that serves `snssai`.
    pub fn smf_for(&self, snssai: &SNssai) -> Option<&NfId> {
        self.of_kind(NfKind::Smf)
            .find(|p| p.serving_snssais.contains(snssai))
            .map(|p| &p.nf_id)
    }

    pub fn upfs_for(&self, snssai: &SNssai) -> Vec<NfId> {
        self.of_kind(NfKind::Upf)
            .filter(|p| p.serving_snssais.contains(snssai))
            .map(|p| p.nf_id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("no AMF can serve the allowed NSSAI")]
    NoServingAmf,
}

/// True iff the AMF can serve every slice of `allowed`.
pub fn amf_can_serve(amf: &NfProfile, allowed: &BTreeSet<SNssai>) -> bool {
    debug_assert_eq!(amf.kind, NfKind::Amf);
    allowed.is_subset(&amf.serving_snssais)
}

/// NSSF-side AMF selection: the first AMF in id order that can serve `allowed`.
pub fn select_amf<'a>(
    nssf: &NfProfile,
    allowed: &BTreeSet<SNssai>,
    amfs: impl IntoIterator<Item = &'a NfProfile>,
) -> Result<NfId, NfError> {
    debug_assert_eq!(nssf.kind, NfKind::Nssf);
    let mut candidates: Vec<&NfProfile> = amfs.into_iter().filter(|a| a.kind == NfKind::Amf).collect();
    candidates.sort_by(|a, b| a.nf_id.cmp(&b.nf_id));
    candidates
        .into_iter()
        .find(|a| amf_can_serve(a, allowed))
        .map(|a| a.nf_id.clone())
        .ok_or(NfError::NoServingAmf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::ServiceType;

    fn s(sd: &str) -> SNssai {
        SNssai::new(ServiceType::Embb, sd).unwrap()
    }

    fn amf(id: &str, serving: &[&str]) -> NfProfile {
        NfProfile {
            nf_id: id.into(),
            kind: NfKind::Amf,
            serving_snssais: serving.iter().map(|x| s(x)).collect(),
        }
    }

    fn nssf() -> NfProfile {
        NfProfile {
            nf_id: "nssf".into(),
            kind: NfKind::Nssf,
            serving_snssais: BTreeSet::new(),
        }
    }

    fn set(items: &[&str]) -> BTreeSet<SNssai> {
        items.iter().map(|x| s(x)).collect()
    }

    #[test]
    fn can_serve_is_subset() {
        assert!(amf_can_serve(&amf("amf1", &["A", "B"]), &set(&["A"])));
        assert!(!amf_can_serve(&amf("amf1", &["A"]), &set(&["A", "B"])));
        assert!(amf_can_serve(&amf("amf1", &[]), &set(&[])));
    }

    #[test]
    fn amf_selection() {
        let amfs = [amf("amf1", &["A"]), amf("amf2", &["A", "B"])];
        assert_eq!(select_amf(&nssf(), &set(&["B"]), &amfs).unwrap(), NfId::from("amf2"));
        assert_eq!(
            select_amf(&nssf(), &set(&["A"]), &[amf("amf1", &["A"])]).unwrap(),
            NfId::from("amf1")
        );
    }

    #[test]
    fn amf_selection_without_candidate() {
        let amfs = [amf("amf1", &["A"]), amf("amf2", &["A", "B"])];
        let want = set(&["C"]);
        // exhaustive scan oracle
        let oracle = amfs.iter().find(|a| want.iter().all(|x| a.serving_snssais.contains(x)));
        assert!(oracle.is_none());
        assert_eq!(select_amf(&nssf(), &want, &amfs), Err(NfError::NoServingAmf));
    }

    #[test]
    fn amf_selection_uses_id_order() {
        let amfs = [amf("amf9", &["A"]), amf("amf3", &["A"])];
        assert_eq!(select_amf(&nssf(), &set(&["A"]), &amfs).unwrap(), NfId::from("amf3"));
    }

    #[test]
    fn dn_deny_rules() {
        let dn = DnStore {
            deny: vec![
                DenyRule { ue: Some("u2".into()), dn: "internet".into() },
                DenyRule { ue: None, dn: "ims".into() },
            ],
        };
        assert!(dn.authorizes(&"u1".into(), "internet"));
        assert!(!dn.authorizes(&"u2".into(), "internet"));
        assert!(!dn.authorizes(&"u1".into(), "ims"));
    }

    #[test]
    fn sm_lookup_matches_wildcards() {
        let rec = SubscriptionRecord {
            ue_id: "u1".into(),
            subscribed: BTreeMap::new(),
            sm_data: vec![
                SmSubscriptionData {
                    snssai: s("A"),
                    dn: Some("internet".into()),
                    session_types: vec![SessionType::Ip],
                    dn_authorization: true,
                },
                SmSubscriptionData {
                    snssai: s("B"),
                    dn: None,
                    session_types: vec![],
                    dn_authorization: false,
                },
            ],
        };
        assert!(rec.sm_lookup(&s("A"), "internet", SessionType::Ip).is_some());
        assert!(rec.sm_lookup(&s("A"), "internet", SessionType::Ethernet).is_none());
        assert!(rec.sm_lookup(&s("A"), "ims", SessionType::Ip).is_none());
        assert!(!rec.sm_lookup(&s("B"), "ims", SessionType::Unstructured).unwrap().dn_authorization);
    }
}
