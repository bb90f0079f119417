use std::collections::BTreeMap;

use serde::Deserialize;

use super::{AmfStore, Directory, NfInstance, NfKind, NfProfile, NfStore, SmfStore, SubscriptionRecord};
use crate::ids::{NfId, RunId, SessionId, Tick, UeId};
use crate::procedures::{
    establishment, registration, release, ucu, Milestone, Procedure, ProcedureError, ProcedureRun, RunLog, RunOutcome,
};
use crate::sim::bus::Bus;
use crate::sim::message::{MessageName, Payload, SignalingMessage};
use crate::slice::{PduSession, UeContext};

use super::{N4Rules, N4Session, RanToken};
use crate::procedures::FailureReason;
use crate::slice::SessionState;

/// Where a registration that removes the active slice places Accept
/// relative to the release it starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub enum ReleaseOrder {
    #[default]
    BeforeAccept,
    AfterAccept,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkOptions {
    pub nssf_assist: bool,
    pub registration_release_order: ReleaseOrder,
}

/// Outbound message before the bus stamps it.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Emit {
    pub name: MessageName,
    pub dst: NfId,
    pub ue: UeId,
    pub run: Option<RunId>,
    pub payload: Payload,
}

/// Side observations handed to the switching layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Note {
    RunFinished(RunId),
    SessionReleased { ue: UeId, session: SessionId, at: Tick },
    SessionActive { ue: UeId, session: SessionId, at: Tick },
}

/// Everything a handler may touch while one NF processes one message.
pub(crate) struct Step<'a> {
    pub now: Tick,
    pub me: &'a NfProfile,
    pub store: &'a mut NfStore,
    pub ues: &'a mut BTreeMap<UeId, UeContext>,
    pub runs: &'a mut RunLog,
    pub dir: &'a Directory,
    pub opts: &'a NetworkOptions,
    pub notes: &'a mut Vec<Note>,
    pub out: Vec<Emit>,
}

impl Step<'_> {
    pub fn send(&mut self, name: MessageName, dst: NfId, ue: &UeId, run: Option<RunId>, payload: Payload) {
        self.out.push(Emit {
            name,
            dst,
            ue: ue.clone(),
            run,
            payload,
        });
    }

    pub fn ue(&self, id: &UeId) -> Result<&UeContext, ProcedureError> {
        self.ues.get(id).ok_or_else(|| ProcedureError::UnknownUe(id.clone()))
    }

    pub fn ue_mut(&mut self, id: &UeId) -> Result<&mut UeContext, ProcedureError> {
        self.ues.get_mut(id).ok_or_else(|| ProcedureError::UnknownUe(id.clone()))
    }

    pub fn session(&self, ue: &UeId, id: &SessionId) -> Result<&PduSession, ProcedureError> {
        self.ue(ue)?
            .sessions
            .get(id)
            .ok_or_else(|| ProcedureError::UnknownSession(id.clone()))
    }

    pub fn session_mut(&mut self, ue: &UeId, id: &SessionId) -> Result<&mut PduSession, ProcedureError> {
        self.ue_mut(ue)?
            .sessions
            .get_mut(id)
            .ok_or_else(|| ProcedureError::UnknownSession(id.clone()))
    }

    pub fn serving_amf(&self, ue: &UeId) -> Result<NfId, ProcedureError> {
        Ok(self.ue(ue)?.serving_amf.clone())
    }

    pub fn run(&self, id: RunId) -> Result<&ProcedureRun, ProcedureError> {
        self.runs.get(id).ok_or(ProcedureError::UnknownRun(id))
    }

    pub fn run_mut(&mut self, id: RunId) -> Result<&mut ProcedureRun, ProcedureError> {
        self.runs.get_mut(id)
    }

    /// The run a message belongs to and the session that run works on.
    pub fn run_session(&self, id: RunId) -> Result<SessionId, ProcedureError> {
        self.run(id)?.session.clone().ok_or(ProcedureError::UnknownRun(id))
    }

    pub fn milestone(&mut self, id: RunId, m: Milestone) -> Result<(), ProcedureError> {
        self.runs.milestone(id, m, self.now)
    }

    pub fn finish(&mut self, id: RunId, outcome: RunOutcome) -> Result<(), ProcedureError> {
        if self.runs.finish(id, outcome, self.now)? {
            self.notes.push(Note::RunFinished(id));
        }
        Ok(())
    }

    pub fn amf(&mut self) -> &mut AmfStore {
        match self.store {
            NfStore::Amf(s) => s,
            _ => unreachable!("{} is not an AMF", self.me.nf_id),
        }
    }

    pub fn smf(&mut self) -> &mut SmfStore {
        match self.store {
            NfStore::Smf(s) => s,
            _ => unreachable!("{} is not an SMF", self.me.nf_id),
        }
    }
}

fn correlated(msg: &SignalingMessage) -> Result<RunId, ProcedureError> {
    msg.correlates.ok_or(ProcedureError::UnknownRun(RunId(0)))
}

/// The simulated deployment: every NF instance, every UE context, and the
/// log of procedure runs.
#[derive(Debug, Clone)]
pub struct Network {
    pub(crate) nfs: BTreeMap<NfId, NfInstance>,
    pub(crate) ues: BTreeMap<UeId, UeContext>,
    pub(crate) runs: RunLog,
    pub(crate) dir: Directory,
    pub(crate) opts: NetworkOptions,
    pub(crate) bus: Bus,
    pub(crate) notes: Vec<Note>,
}

impl Network {
    pub fn new(opts: NetworkOptions, bus: Bus) -> Self {
        Self {
            nfs: BTreeMap::new(),
            ues: BTreeMap::new(),
            runs: RunLog::default(),
            dir: Directory::default(),
            opts,
            bus,
            notes: Vec::new(),
        }
    }

    pub fn set_configured(&mut self, configured: impl IntoIterator<Item = crate::slice::SNssai>) {
        self.dir.configured = configured.into_iter().collect();
    }

    pub fn add_nf(&mut self, nf: NfInstance) {
        self.dir.profiles.insert(nf.profile.nf_id.clone(), nf.profile.clone());
        self.nfs.insert(nf.profile.nf_id.clone(), nf);
    }

    /// Adds a UE node, its context and its subscription, and registers it
    /// with its serving AMF.
    pub fn add_ue(&mut self, ue: UeContext, subscription: SubscriptionRecord) {
        let node = NfId::from(&ue.ue_id);
        self.add_nf(NfInstance::new(node, NfKind::Ue, Default::default(), NfStore::Stateless));
        if let Some(NfStore::Amf(amf)) = self.nfs.get_mut(&ue.serving_amf).map(|n| &mut n.store) {
            amf.registered.insert(ue.ue_id.clone());
        }
        self.dir.repository.subscriptions.insert(ue.ue_id.clone(), subscription);
        self.ues.insert(ue.ue_id.clone(), ue);
    }

    /// Installs an already Active session with its SMF, N4, prefix and RAN
    /// resources, as if it had been established before the simulation began.
    pub fn install_active_session(
        &mut self,
        ue: &UeId,
        mut session: PduSession,
    ) -> Result<SessionId, ProcedureError> {
        let smf = self
            .dir
            .smf_for(&session.snssai)
            .cloned()
            .ok_or_else(|| ProcedureError::UnknownNf(NfId::new(format!("smf for {}", session.snssai))))?;
        let upfs = self.dir.upfs_for(&session.snssai);
        let sid = session.session_id.clone();
        let prefix = crate::slice::IpPrefix::for_session(&sid);
        for upf in &upfs {
            let n4 = N4Session {
                session_id: sid.clone(),
                smf: smf.clone(),
                upf: upf.clone(),
                rules: N4Rules::for_session(&sid),
            };
            if let Some(NfStore::Upf(s)) = self.nfs.get_mut(upf).map(|n| &mut n.store) {
                s.n4.insert(sid.clone(), n4.clone());
            }
            if let Some(NfStore::Smf(s)) = self.nfs.get_mut(&smf).map(|n| &mut n.store) {
                s.n4.entry(sid.clone()).or_default().push(n4);
            }
        }
        if let Some(NfStore::Smf(s)) = self.nfs.get_mut(&smf).map(|n| &mut n.store) {
            s.prefixes.insert(sid.clone(), prefix.clone());
        }
        if let Some(ran) = self.dir.first(NfKind::Ran).cloned() {
            if let Some(NfStore::Ran(s)) = self.nfs.get_mut(&ran).map(|n| &mut n.store) {
                s.tokens.insert(sid.clone(), RanToken::for_session(&sid));
            }
        }
        session.state = SessionState::Active;
        session.ip_prefix = Some(prefix);
        session.policy_ref = Some(super::PolicyStore::reference(&session.snssai, &session.dn_name));
        session.smf = Some(smf);
        session.upfs = upfs;
        let ctx = self.ues.get_mut(ue).ok_or_else(|| ProcedureError::UnknownUe(ue.clone()))?;
        ctx.sessions.insert(sid.clone(), session);
        Ok(sid)
    }

    pub fn nf(&self, id: &NfId) -> Option<&NfInstance> {
        self.nfs.get(id)
    }

    pub fn nfs(&self) -> impl Iterator<Item = &NfInstance> {
        self.nfs.values()
    }

    pub fn ue(&self, id: &UeId) -> Option<&UeContext> {
        self.ues.get(id)
    }

    pub fn ues(&self) -> impl Iterator<Item = &UeContext> {
        self.ues.values()
    }

    pub fn runs(&self) -> &RunLog {
        &self.runs
    }

    pub fn directory(&self) -> &Directory {
        &self.dir
    }

    pub fn options(&self) -> &NetworkOptions {
        &self.opts
    }

    pub fn bus(&self) -> &Bus {
        &self.bus
    }

    pub(crate) fn take_notes(&mut self) -> Vec<Note> {
        std::mem::take(&mut self.notes)
    }

    /// Runs `f` as network function `nf` at time `now` and stamps whatever it sends.
    pub(crate) fn with_step<R>(
        &mut self,
        nf: &NfId,
        now: Tick,
        f: impl FnOnce(&mut Step<'_>) -> Result<R, ProcedureError>,
    ) -> Result<(R, Vec<SignalingMessage>), ProcedureError> {
        let Network {
            nfs,
            ues,
            runs,
            dir,
            opts,
            bus,
            notes,
        } = self;
        let NfInstance { profile, store } = nfs.get_mut(nf).ok_or_else(|| ProcedureError::UnknownNf(nf.clone()))?;
        let mut step = Step {
            now,
            me: profile,
            store,
            ues,
            runs,
            dir,
            opts,
            notes,
            out: Vec::new(),
        };
        let r = f(&mut step)?;
        let out = step.out;
        let msgs = out.into_iter().map(|e| bus.stamp(nf, e, now)).collect();
        Ok((r, msgs))
    }

    /// Delivers `msg` to its destination and returns what that NF sends in response.
    pub fn nf_handle(&mut self, msg: &SignalingMessage, now: Tick) -> Result<Vec<SignalingMessage>, ProcedureError> {
        let dst = msg.dst.clone();
        self.with_step(&dst, now, |step| dispatch(step, msg)).map(|(_, m)| m)
    }
}

fn dispatch(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    use MessageName::*;
    use NfKind::*;
    match (step.me.kind, msg.name) {
        (_, ProcedureFailure) => on_failure(step, msg),

        (Ue, UeConfigurationUpdateCommand) => ucu::ue_on_command(step, msg),
        (Amf, UeConfigurationUpdateComplete) => ucu::amf_on_complete(step, msg),

        (Amf, RegistrationRequest) => registration::amf_on_request(step, msg),
        (Udm, SubscriptionDataRequest) => super::responders::udm_subscription(step, msg),
        (Amf, SubscriptionDataResponse) => registration::amf_on_subscription(step, msg),
        (Nssf, NssaiSelectionRequest) => super::responders::nssf_selection(step, msg),
        (Amf, NssaiSelectionResponse) => registration::amf_on_nssf(step, msg),
        (Amf, AmfContextTransfer) => registration::amf_on_context_transfer(step, msg),
        (Ue, RegistrationAccept | RegistrationReject) => registration::ue_on_result(step, msg),

        (Amf, PduSessionReleaseRequest) => release::amf_on_request(step, msg),
        (Smf, SmContextReleaseRequest | PolicyTerminationNotify) => release::smf_on_request(step, msg),
        (Upf, N4SessionReleaseRequest) => release::upf_on_n4_release(step, msg),
        (Smf, N4SessionReleaseResponse) => release::smf_on_n4_released(step, msg),
        (Amf, N1N2MessageTransfer) => {
            let run = correlated(msg)?;
            match step.run(run)?.procedure {
                Procedure::PduSessionRelease => release::amf_on_n1n2(step, msg),
                Procedure::PduSessionEstablishment => establishment::amf_on_n1n2(step, msg),
                _ => unknown(step, msg),
            }
        }
        (Ran, N2PduSessionResourceReleaseCommand) => release::ran_on_release(step, msg),
        (Ue, PduSessionReleaseCommand) => release::ue_on_command(step, msg),
        (Amf, PduSessionReleaseComplete) => release::amf_on_complete(step, msg),

        (Amf, PduSessionEstablishmentRequest) => establishment::amf_on_request(step, msg),
        (Smf, SmContextCreateRequest) => establishment::smf_on_create(step, msg),
        (Udm, SmSubscriptionDataRequest) => super::responders::udm_sm_subscription(step, msg),
        (Smf, SmSubscriptionDataResponse) => establishment::smf_on_subscription(step, msg),
        (Amf, SmContextCreateResponse) => establishment::amf_on_create_response(step, msg),
        (Dn, DnAuthRequest) => super::responders::dn_auth(step, msg),
        (Smf, DnAuthResponse) => establishment::smf_on_dn_auth(step, msg),
        (Pcf, PolicyRetrievalRequest) => super::responders::pcf_policy(step, msg),
        (Smf, PolicyRetrievalResponse) => establishment::smf_on_policy(step, msg),
        (Upf, N4SessionEstablishmentRequest) => establishment::upf_on_n4(step, msg),
        (Smf, N4SessionEstablishmentResponse) => establishment::smf_on_n4(step, msg),
        (Ran, N2PduSessionResourceSetupRequest) => establishment::ran_on_setup(step, msg),
        (Ue, PduSessionEstablishmentAccept) => establishment::ue_on_accept(step, msg),
        (Ran, RrcReconfigurationComplete) => establishment::ran_on_rrc_complete(step, msg),
        (Amf, N2PduSessionResourceSetupResponse) => establishment::amf_on_setup_response(step, msg),
        (Smf, SmContextUpdateRequest) => establishment::smf_on_update(step, msg),
        (Upf, RouterAdvertisement) => establishment::upf_on_ra(step, msg),
        (Ue, RouterAdvertisement) => establishment::ue_on_ra(step, msg),

        (Nwdaf, AnalyticsRequest) => super::responders::nwdaf_query(step, msg),
        (Ue, AnalyticsResponse) => Ok(()),

        _ => unknown(step, msg),
    }
}

fn unknown(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    step.send(
        MessageName::ProcedureFailure,
        msg.src.clone(),
        &msg.ue,
        msg.correlates,
        Payload::Failure(FailureReason::UnknownMessage),
    );
    Ok(())
}

fn on_failure(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let reason = match msg.payload {
        Payload::Failure(r) => r,
        _ => FailureReason::UnknownMessage,
    };
    let Some(run) = msg.correlates else {
        return Ok(());
    };
    let Some(r) = step.runs.get(run) else {
        return Ok(());
    };
    if r.is_finished() {
        return Ok(());
    }
    match (step.me.kind, r.procedure) {
        (NfKind::Amf, Procedure::Registration) => registration::reject(step, run, reason),
        (NfKind::Amf | NfKind::Smf, Procedure::PduSessionEstablishment) => establishment::fail(step, run, reason),
        (NfKind::Amf | NfKind::Ue, _) => step.finish(run, RunOutcome::Failure(reason)),
        _ => Ok(()),
    }
}
