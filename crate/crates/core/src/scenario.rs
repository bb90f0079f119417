//! Scenario files: TOML schema, validation and construction of a ready-to-run
//! [`Simulator`].
//!
//! Slices are declared once under `[plmn]` with a short name and referred to
//! by that name everywhere else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::ids::{NfId, Tick, UeId};
use crate::nf::{
    AnalyticsStore, DenyRule, DnStore, Network, NetworkOptions, NfInstance, NfKind, NfStore, PolicyRecord,
    PolicyStore, ReleaseOrder, SliceAnalytics, SmSubscriptionData, SubscriptionRecord,
};
use crate::procedures::Initiator;
use crate::sim::bus::Bus;
use crate::sim::{SelectionPolicyKind, SimConfig, Simulator};
use crate::slice::{NssaiView, PduSession, SNssai, ServiceType, SessionType, UeContext, MAX_ALLOWED_SLICES};
use crate::switching::{ReleaseTiming, TentativeDecision};
use crate::trigger::{validate_initiation, CauseGroup, Initiation, NetworkVia, TriggerName, TriggerSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub plmn: PlmnDecl,
    pub nfs: Vec<NfDecl>,
    #[serde(default)]
    pub links: Vec<LinkDecl>,
    #[serde(default)]
    pub policies: Vec<PolicyDecl>,
    #[serde(default)]
    pub ues: Vec<UeDecl>,
    #[serde(default)]
    pub triggers: Vec<TriggerDecl>,
    #[serde(default)]
    pub options: OptionsDecl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlmnDecl {
    pub slices: Vec<SliceDecl>,
    /// Configured NSSAI, by slice name.
    pub configured: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDecl {
    pub name: String,
    pub sst: ServiceType,
    pub sd: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfDecl {
    pub id: String,
    pub kind: NfKind,
    #[serde(default)]
    pub serving: Vec<String>,
    /// DN only.
    #[serde(default)]
    pub deny: Vec<DenyDecl>,
    /// NWDAF only.
    #[serde(default)]
    pub analytics: Vec<AnalyticsDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenyDecl {
    #[serde(default)]
    pub ue: Option<String>,
    pub dn: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsDecl {
    pub slice: String,
    pub load: f64,
    pub delay: Tick,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDecl {
    pub a: String,
    pub b: String,
    pub latency: Tick,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDecl {
    pub slice: String,
    pub dn: String,
    pub qos_profile: String,
    pub charging_profile: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeDecl {
    pub ue_id: String,
    pub service_type: ServiceType,
    pub serving_amf: String,
    pub subscriptions: Vec<SubscriptionDecl>,
    /// Defaults to one wildcard record per subscribed slice, with DN authorization.
    #[serde(default)]
    pub sm_data: Option<Vec<SmDataDecl>>,
    pub allowed: Vec<String>,
    #[serde(default)]
    pub sessions: Vec<SessionDecl>,
    #[serde(default)]
    pub priorities: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubscriptionDecl {
    pub slice: String,
    #[serde(default)]
    pub default: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmDataDecl {
    pub slice: String,
    #[serde(default)]
    pub dn: Option<String>,
    #[serde(default)]
    pub session_types: Vec<SessionType>,
    #[serde(default = "yes")]
    pub dn_authorization: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionDecl {
    pub slice: String,
    pub dn: String,
    #[serde(default)]
    pub session_type: SessionType,
}

fn smf() -> Initiator {
    Initiator::Smf
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerDecl {
    pub trigger_name: TriggerName,
    #[serde(default)]
    pub cause_group: Option<CauseGroup>,
    #[serde(default)]
    pub initiation: Option<Initiation>,
    /// Picks a side for triggers whose typical initiation is `Either`.
    #[serde(default)]
    pub initiation_override: Option<Initiation>,
    pub fire_at: Tick,
    pub ue_id: String,
    pub snssai: String,
    #[serde(default)]
    pub via: NetworkVia,
    #[serde(default = "smf")]
    pub release_initiator: Initiator,
    #[serde(default)]
    pub tentative: bool,
    #[serde(default)]
    pub release_timing: Option<ReleaseTiming>,
    #[serde(default)]
    pub target: Option<String>,
}

impl TriggerDecl {
    pub fn effective_initiation(&self) -> Initiation {
        self.initiation_override
            .or(self.initiation)
            .unwrap_or(self.trigger_name.typical_initiation())
    }
}

fn one() -> Tick {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDecl {
    #[serde(default)]
    pub nssf_assist: bool,
    #[serde(default)]
    pub release_timing: ReleaseTiming,
    #[serde(default)]
    pub tentative_decision: TentativeDecision,
    #[serde(default)]
    pub invariant_checks: bool,
    #[serde(default = "one")]
    pub default_latency: Tick,
    #[serde(default = "one")]
    pub selection_ticks: Tick,
    #[serde(default)]
    pub decision_ticks: Tick,
    #[serde(default)]
    pub registration_release_order: ReleaseOrder,
    #[serde(default)]
    pub selection_policy: SelectionPolicyKind,
    /// Extra per-message delay drawn uniformly from `0..=latency_jitter` using the run seed.
    #[serde(default)]
    pub latency_jitter: Tick,
}

impl Default for OptionsDecl {
    fn default() -> Self {
        Self {
            nssf_assist: false,
            release_timing: ReleaseTiming::default(),
            tentative_decision: TentativeDecision::default(),
            invariant_checks: false,
            default_latency: 1,
            selection_ticks: 1,
            decision_ticks: 0,
            registration_release_order: ReleaseOrder::default(),
            selection_policy: SelectionPolicyKind::default(),
            latency_jitter: 0,
        }
    }
}

/// One problem found by validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scenario has {} violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

struct Checker<'a> {
    slices: BTreeMap<&'a str, SNssai>,
    out: Vec<Violation>,
}

impl<'a> Checker<'a> {
    fn push(&mut self, code: &'static str, message: impl Into<String>) {
        self.out.push(Violation {
            code,
            message: message.into(),
        });
    }

    fn slice(&mut self, name: &str, ctx: &str) -> Option<SNssai> {
        let s = self.slices.get(name).cloned();
        if s.is_none() {
            self.push("referential-integrity", format!("{ctx}: unknown slice {name:?}"));
        }
        s
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    (line, column)
                })
                .unwrap_or((0, 0));
            ScenarioError::Parse {
                line,
                column,
                message: e.message().to_owned(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut sc = Self::parse(&text)?;
        if sc.name.is_none() {
            sc.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(sc)
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }

    fn slice_map(&self) -> BTreeMap<&str, SNssai> {
        self.plmn
            .slices
            .iter()
            .filter_map(|s| SNssai::new(s.sst, &s.sd).ok().map(|n| (s.name.as_str(), n)))
            .collect()
    }

    /// Every integrity and invariant problem of the scenario. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker {
            slices: self.slice_map(),
            out: Vec::new(),
        };
        self.check_plmn(&mut c);
        self.check_nfs(&mut c);
        self.check_ues(&mut c);
        self.check_triggers(&mut c);
        if self.options.selection_ticks == 0 {
            c.push("options", "selection_ticks must be at least 1");
        }
        c.out
    }

    fn check_plmn(&self, c: &mut Checker<'_>) {
        let mut names = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for s in &self.plmn.slices {
            if !names.insert(s.name.as_str()) {
                c.push("duplicate-slice", format!("slice name {:?} declared twice", s.name));
            }
            match SNssai::new(s.sst, &s.sd) {
                Ok(id) => {
                    if !ids.insert(id.clone()) {
                        c.push("duplicate-slice", format!("S-NSSAI {id} declared twice"));
                    }
                }
                Err(e) => c.push("invalid-slice", format!("slice {:?}: {e}", s.name)),
            }
        }
        for name in &self.plmn.configured {
            c.slice(name, "configured NSSAI");
        }
    }

    fn nf_kinds(&self) -> BTreeMap<&str, NfKind> {
        self.nfs.iter().map(|n| (n.id.as_str(), n.kind)).collect()
    }

    fn configured(&self, c: &Checker<'_>) -> BTreeSet<SNssai> {
        self.plmn
            .configured
            .iter()
            .filter_map(|n| c.slices.get(n.as_str()).cloned())
            .collect()
    }

    fn check_nfs(&self, c: &mut Checker<'_>) {
        let mut seen = BTreeSet::new();
        for nf in &self.nfs {
            if !seen.insert(nf.id.as_str()) {
                c.push("duplicate-id", format!("network function id {:?} declared twice", nf.id));
            }
            if nf.kind == NfKind::Ue {
                c.push("nf-kind", format!("{}: UEs are declared under [[ues]]", nf.id));
            }
            for s in &nf.serving {
                c.slice(s, &format!("NF {}", nf.id));
            }
            if nf.kind == NfKind::Upf && nf.serving.len() != 1 {
                c.push(
                    "upf-single-slice",
                    format!("UPF {} serves {} slices; it must serve exactly one", nf.id, nf.serving.len()),
                );
            }
            if !nf.deny.is_empty() && nf.kind != NfKind::Dn {
                c.push("nf-kind", format!("{}: deny rules belong to the DN", nf.id));
            }
            if !nf.analytics.is_empty() && nf.kind != NfKind::Nwdaf {
                c.push("nf-kind", format!("{}: analytics belong to the NWDAF", nf.id));
            }
            for d in &nf.deny {
                if let Some(ue) = &d.ue {
                    if !self.ues.iter().any(|u| &u.ue_id == ue) {
                        c.push("referential-integrity", format!("DN {}: deny rule for unknown UE {ue:?}", nf.id));
                    }
                }
            }
            for a in &nf.analytics {
                c.slice(&a.slice, &format!("NWDAF {}", nf.id));
            }
        }
        for kind in [NfKind::Nssf, NfKind::Udm, NfKind::Udr, NfKind::Pcf, NfKind::Ran, NfKind::Dn] {
            let n = self.nfs.iter().filter(|x| x.kind == kind).count();
            if n != 1 {
                c.push("nf-cardinality", format!("expected exactly one {kind}, found {n}"));
            }
        }
        if !self.nfs.iter().any(|x| x.kind == NfKind::Amf) {
            c.push("nf-cardinality", "at least one AMF is required");
        }
        let kinds = self.nf_kinds();
        let ue_ids: BTreeSet<&str> = self.ues.iter().map(|u| u.ue_id.as_str()).collect();
        for l in &self.links {
            for end in [&l.a, &l.b] {
                if !kinds.contains_key(end.as_str()) && !ue_ids.contains(end.as_str()) {
                    c.push("referential-integrity", format!("link endpoint {end:?} does not exist"));
                }
            }
        }
        for p in &self.policies {
            c.slice(&p.slice, &format!("policy for DN {}", p.dn));
        }
    }

    fn check_ues(&self, c: &mut Checker<'_>) {
        let kinds = self.nf_kinds();
        let configured = self.configured(c);
        let mut seen = BTreeSet::new();
        for ue in &self.ues {
            let ctx = format!("UE {}", ue.ue_id);
            if !seen.insert(ue.ue_id.as_str()) || kinds.contains_key(ue.ue_id.as_str()) {
                c.push("duplicate-id", format!("{ctx}: id already in use"));
            }
            let amf = self.nfs.iter().find(|n| n.id == ue.serving_amf);
            match amf {
                Some(a) if a.kind == NfKind::Amf => {}
                Some(_) => c.push("referential-integrity", format!("{ctx}: serving_amf {} is not an AMF", ue.serving_amf)),
                None => c.push("referential-integrity", format!("{ctx}: unknown serving_amf {:?}", ue.serving_amf)),
            }
            let mut subscribed = BTreeSet::new();
            for s in &ue.subscriptions {
                if let Some(id) = c.slice(&s.slice, &ctx) {
                    subscribed.insert(id);
                }
            }
            if !ue.subscriptions.iter().any(|s| s.default) {
                c.push("default-subscription", format!("{ctx}: no subscribed S-NSSAI is marked default"));
            }
            for d in ue.sm_data.iter().flatten() {
                c.slice(&d.slice, &format!("{ctx} sm_data"));
            }
            let mut allowed = BTreeSet::new();
            for name in &ue.allowed {
                if let Some(id) = c.slice(name, &ctx) {
                    if !configured.contains(&id) {
                        c.push("allowed-subset-configured", format!("{ctx}: allowed slice {name} is not configured"));
                    }
                    if !subscribed.contains(&id) {
                        c.push("allowed-subset-subscribed", format!("{ctx}: allowed slice {name} is not subscribed"));
                    }
                    allowed.insert(id);
                }
            }
            if allowed.len() > MAX_ALLOWED_SLICES {
                c.push(
                    "allowed-max-8",
                    format!("{ctx}: Allowed NSSAI has {} slices, at most {MAX_ALLOWED_SLICES}", allowed.len()),
                );
            }
            if let Some(a) = amf.filter(|a| a.kind == NfKind::Amf) {
                let serving: BTreeSet<SNssai> = a.serving.iter().filter_map(|n| c.slices.get(n.as_str()).cloned()).collect();
                if !allowed.is_subset(&serving) {
                    c.push("amf-serves-allowed", format!("{ctx}: {} cannot serve the Allowed NSSAI", a.id));
                }
            }
            for name in ue.priorities.keys() {
                c.slice(name, &format!("{ctx} priorities"));
            }
            let mut pairs = BTreeSet::new();
            for s in &ue.sessions {
                let Some(id) = c.slice(&s.slice, &format!("{ctx} session")) else {
                    continue;
                };
                if !pairs.insert((id.clone(), s.dn.clone())) {
                    c.push("duplicate-session", format!("{ctx}: two sessions on {}/{}", s.slice, s.dn));
                }
                if !allowed.contains(&id) {
                    c.push("session-slice-not-allowed", format!("{ctx}: session on {} outside the Allowed NSSAI", s.slice));
                }
                if id.sst != ue.service_type {
                    c.push("service-type", format!("{ctx}: session on {} has a different service type", s.slice));
                }
                if !self.policies.iter().any(|p| p.slice == s.slice && p.dn == s.dn) {
                    c.push("missing-policy", format!("{ctx}: no policy for {}/{}", s.slice, s.dn));
                }
                let serves = |k: NfKind| self.nfs.iter().any(|n| n.kind == k && n.serving.contains(&s.slice));
                if !serves(NfKind::Smf) {
                    c.push("missing-smf", format!("{ctx}: no SMF serves {}", s.slice));
                }
                if !serves(NfKind::Upf) {
                    c.push("missing-upf", format!("{ctx}: no UPF serves {}", s.slice));
                }
            }
        }
    }

    fn check_triggers(&self, c: &mut Checker<'_>) {
        for (i, t) in self.triggers.iter().enumerate() {
            let ctx = format!("trigger #{} ({})", i + 1, t.trigger_name);
            let ue = self.ues.iter().find(|u| u.ue_id == t.ue_id);
            if ue.is_none() {
                c.push("referential-integrity", format!("{ctx}: unknown UE {:?}", t.ue_id));
            }
            c.slice(&t.snssai, &ctx);
            if let Some(target) = &t.target {
                if let (Some(id), Some(ue)) = (c.slice(target, &ctx), ue) {
                    if id.sst != ue.service_type {
                        c.push("target-service-type", format!("{ctx}: target {target} has a different service type"));
                    }
                }
            }
            if let Some(g) = t.cause_group {
                if g != t.trigger_name.cause_group() {
                    c.push("trigger-cause-group", format!("{ctx}: belongs to {:?}, not {g:?}", t.trigger_name.cause_group()));
                }
            }
            if let Some(i) = t.initiation {
                if !validate_initiation(t.trigger_name, i) {
                    c.push("trigger-initiation", format!("{ctx}: initiation {i:?} does not match the cause table"));
                }
            }
            let eff = t.effective_initiation();
            if eff == Initiation::Either {
                c.push("trigger-initiation", format!("{ctx}: initiation is Either; set initiation_override"));
            } else if !validate_initiation(t.trigger_name, eff) {
                c.push("trigger-initiation", format!("{ctx}: initiation {eff:?} does not match the cause table"));
            }
            if t.tentative && eff != Initiation::UeInitiated {
                c.push("tentative-initiation", format!("{ctx}: tentative switching must be UE-initiated"));
            }
            if eff == Initiation::NetworkTriggered && t.via == NetworkVia::Release && t.release_initiator == Initiator::Ue {
                c.push("release-initiator", format!("{ctx}: a network release cannot be UE-initiated"));
            }
        }
    }

    /// Validates and builds the simulator. The seed only drives latency jitter.
    pub fn build(&self, seed: u64) -> Result<Simulator, ScenarioError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(ScenarioError::Invalid(violations));
        }
        let slices = self.slice_map();
        let s = |name: &String| slices[name.as_str()].clone();
        let o = &self.options;

        let mut bus = Bus::new(o.default_latency, o.latency_jitter, seed);
        for l in &self.links {
            bus.set_link(NfId::new(&l.a), NfId::new(&l.b), l.latency);
        }
        let mut net = Network::new(
            NetworkOptions {
                nssf_assist: o.nssf_assist,
                registration_release_order: o.registration_release_order,
            },
            bus,
        );
        net.set_configured(self.plmn.configured.iter().map(s));

        for nf in &self.nfs {
            let mut store = NfStore::empty_for(nf.kind);
            match &mut store {
                NfStore::Dn(d) => {
                    *d = DnStore {
                        deny: nf
                            .deny
                            .iter()
                            .map(|r| DenyRule {
                                ue: r.ue.as_deref().map(UeId::from),
                                dn: r.dn.clone(),
                            })
                            .collect(),
                    }
                }
                NfStore::Nwdaf(a) => {
                    *a = AnalyticsStore {
                        slices: nf
                            .analytics
                            .iter()
                            .map(|x| {
                                (
                                    s(&x.slice),
                                    SliceAnalytics {
                                        load: x.load,
                                        delay: x.delay,
                                    },
                                )
                            })
                            .collect(),
                    }
                }
                NfStore::Pcf(p) => {
                    *p = PolicyStore {
                        records: self
                            .policies
                            .iter()
                            .map(|x| {
                                (
                                    (s(&x.slice), x.dn.clone()),
                                    PolicyRecord {
                                        qos_profile: x.qos_profile.clone(),
                                        charging_profile: x.charging_profile.clone(),
                                    },
                                )
                            })
                            .collect(),
                    }
                }
                _ => {}
            }
            net.add_nf(NfInstance::new(
                NfId::new(&nf.id),
                nf.kind,
                nf.serving.iter().map(s).collect(),
                store,
            ));
        }

        let configured: BTreeSet<SNssai> = self.plmn.configured.iter().map(s).collect();
        for ue in &self.ues {
            let ue_id = UeId::new(&ue.ue_id);
            let subscribed: BTreeMap<SNssai, bool> = ue.subscriptions.iter().map(|x| (s(&x.slice), x.default)).collect();
            let view = NssaiView {
                configured: configured.clone(),
                subscribed: subscribed.clone(),
                allowed: ue.allowed.iter().map(s).collect(),
                requested: None,
            };
            let mut ctx = UeContext::new(ue_id.clone(), ue.service_type, NfId::new(&ue.serving_amf), view);
            ctx.priorities = ue.priorities.iter().map(|(k, v)| (s(k), *v)).collect();
            let sm_data = match &ue.sm_data {
                Some(list) => list
                    .iter()
                    .map(|d| SmSubscriptionData {
                        snssai: s(&d.slice),
                        dn: d.dn.clone(),
                        session_types: d.session_types.clone(),
                        dn_authorization: d.dn_authorization,
                    })
                    .collect(),
                None => subscribed
                    .keys()
                    .map(|k| SmSubscriptionData {
                        snssai: k.clone(),
                        dn: None,
                        session_types: Vec::new(),
                        dn_authorization: true,
                    })
                    .collect(),
            };
            let sessions: Vec<PduSession> = ue
                .sessions
                .iter()
                .map(|d| PduSession::new(ctx.allocate_session_id(), s(&d.slice), d.dn.clone(), d.session_type))
                .collect();
            net.add_ue(
                ctx,
                SubscriptionRecord {
                    ue_id: ue_id.clone(),
                    subscribed,
                    sm_data,
                },
            );
            for session in sessions {
                net.install_active_session(&ue_id, session)
                    .expect("validated scenario has SMF and UPF for every session");
            }
        }

        let triggers = self
            .triggers
            .iter()
            .map(|t| {
                let mut spec = TriggerSpec::new(t.trigger_name, t.fire_at, UeId::new(&t.ue_id), s(&t.snssai));
                spec.initiation = t.effective_initiation();
                spec.via = t.via;
                spec.release_initiator = t.release_initiator;
                spec.tentative = t.tentative;
                spec.release_timing = t.release_timing;
                spec.target = t.target.as_ref().map(s);
                spec
            })
            .collect();
        let cfg = SimConfig {
            release_timing: o.release_timing,
            tentative_decision: o.tentative_decision,
            invariant_checks: o.invariant_checks,
            selection_ticks: o.selection_ticks,
            decision_ticks: o.decision_ticks,
            selection_policy: o.selection_policy,
        };
        Ok(Simulator::new(net, triggers, cfg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[plmn]
slices = [
  { name = "A", sst = "eMBB", sd = "000001" },
  { name = "B", sst = "eMBB", sd = "000002" },
]
configured = ["A", "B"]

[[nfs]]
id = "amf1"
kind = "AMF"
serving = ["A", "B"]
[[nfs]]
id = "smf-a"
kind = "SMF"
serving = ["A"]
[[nfs]]
id = "upf-a"
kind = "UPF"
serving = ["A"]
[[nfs]]
id = "nssf"
kind = "NSSF"
[[nfs]]
id = "udm"
kind = "UDM"
[[nfs]]
id = "udr"
kind = "UDR"
[[nfs]]
id = "pcf"
kind = "PCF"
[[nfs]]
id = "ran"
kind = "RAN"
[[nfs]]
id = "dn"
kind = "DN"

[[policies]]
slice = "A"
dn = "internet"
qos_profile = "q"
charging_profile = "c"

[[ues]]
ue_id = "u1"
service_type = "eMBB"
serving_amf = "amf1"
subscriptions = [{ slice = "A", default = true }, { slice = "B" }]
allowed = ["A"]
sessions = [{ slice = "A", dn = "internet" }]
"#;

    fn codes(text: &str) -> Vec<&'static str> {
        Scenario::parse(text).unwrap().validate().into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn base_is_valid_and_builds() {
        assert!(codes(BASE).is_empty());
        let sim = Scenario::parse(BASE).unwrap().build(0).unwrap();
        let ue = sim.network().ue(&"u1".into()).unwrap();
        assert_eq!(ue.sessions.len(), 1);
    }

    #[test]
    fn unknown_trigger_ue() {
        let text = format!(
            "{BASE}\n[[triggers]]\ntrigger_name = \"SliceDelay\"\nfire_at = 1\nue_id = \"ghost\"\nsnssai = \"A\"\n"
        );
        assert!(codes(&text).contains(&"referential-integrity"));
    }

    #[test]
    fn wrong_initiation() {
        let text = format!(
            "{BASE}\n[[triggers]]\ntrigger_name = \"MonetaryCosts\"\ninitiation = \"NetworkTriggered\"\nfire_at = 1\nue_id = \"u1\"\nsnssai = \"A\"\n"
        );
        assert!(codes(&text).contains(&"trigger-initiation"));
    }

    #[test]
    fn either_needs_override() {
        let t = "\n[[triggers]]\ntrigger_name = \"SliceStability\"\nfire_at = 1\nue_id = \"u1\"\nsnssai = \"A\"\n";
        assert!(codes(&format!("{BASE}{t}")).contains(&"trigger-initiation"));
        let t2 = format!("{t}initiation_override = \"UeInitiated\"\n");
        assert!(codes(&format!("{BASE}{t2}")).is_empty());
    }

    #[test]
    fn parse_error_has_line() {
        let err = Scenario::parse("[plmn]\nslices = 3\n").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(matches!(
            Scenario::parse(&format!("{BASE}\n[options]\nbogus = 1\n")),
            Err(ScenarioError::Parse { .. })
        ));
    }
}
