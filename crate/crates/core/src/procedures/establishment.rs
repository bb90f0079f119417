//! PDU Session Establishment.
//!
//! UE  -> AMF  PduSessionEstablishmentRequest
//! AMF -> SMF  SmContextCreateRequest                 SMF selected for the slice
//! SMF -> UDM  SmSubscriptionDataRequest
//! UDM -> SMF  SmSubscriptionDataResponse
//! SMF -> AMF  SmContextCreateResponse
//! SMF -> DN   DnAuthRequest                          (a) DN authentication
//! DN  -> SMF  DnAuthResponse
//! SMF -> PCF  PolicyRetrievalRequest                 (b) policy retrieval
//! PCF -> SMF  PolicyRetrievalResponse
//! SMF -> UPF  N4SessionEstablishmentRequest          (c) once per UPF
//! UPF -> SMF  N4SessionEstablishmentResponse
//! SMF -> AMF  N1N2MessageTransfer                    (d) prefix allocated
//! AMF -> RAN  N2PduSessionResourceSetupRequest       (e) SM parameters
//! RAN -> UE   PduSessionEstablishmentAccept
//! UE  -> RAN  RrcReconfigurationComplete
//! RAN -> AMF  N2PduSessionResourceSetupResponse
//! AMF -> SMF  SmContextUpdateRequest                 session Active
//! SMF -> UPF  RouterAdvertisement
//! UPF -> UE   RouterAdvertisement
//!
//! The SmContextCreateResponse and DnAuthRequest leave the SMF in the same
//! step. Without DN authorization in the SM subscription, (a) is skipped.

use std::collections::VecDeque;

use super::{release, FailureReason, Initiator, Milestone, NewRun, Procedure, ProcedureError, RunDetail, RunOutcome};
use crate::ids::{NfId, RunId, SessionId, SwitchId, UeId};
use crate::nf::{N4Rules, N4Session, NfKind, NfStore, Note, PolicyStore, RanToken, Step};
use crate::sim::message::{MessageName, Payload, SignalingMessage};
use crate::slice::{IpPrefix, PduSession, RegistrationState, SNssai, SessionState, SessionType};

fn msg_run(msg: &SignalingMessage) -> Result<RunId, ProcedureError> {
    msg.correlates.ok_or(ProcedureError::UnknownRun(RunId(0)))
}

/// Parameters of a new session.
#[derive(Debug, Clone)]
pub(crate) struct SessionRequest {
    pub snssai: SNssai,
    pub dn: String,
    pub session_type: SessionType,
    /// Old session the AMF releases once the SMF accepts the new context.
    pub release_old: Option<SessionId>,
}

/// Creates the session in Establishing state and sends the request from the UE node.
pub(crate) fn start(
    step: &mut Step<'_>,
    ue_id: &UeId,
    req: SessionRequest,
    switch: Option<SwitchId>,
) -> Result<RunId, ProcedureError> {
    if step.me.kind != NfKind::Ue || step.me.nf_id != NfId::from(ue_id) {
        return Err(ProcedureError::WrongInitiator(step.me.nf_id.clone()));
    }
    let ue = step.ue(ue_id)?;
    if ue.registration_state != RegistrationState::Registered {
        return Err(ProcedureError::NotRegistered(ue_id.clone()));
    }
    if let Some(s) = ue.sessions.values().find(|s| {
        s.snssai == req.snssai
            && s.dn_name == req.dn
            && matches!(s.state, SessionState::Active | SessionState::Establishing)
    }) {
        return Err(ProcedureError::InvalidSessionState {
            session: s.session_id.clone(),
            state: s.state,
        });
    }
    let amf = ue.serving_amf.clone();
    let ue = step.ue_mut(ue_id)?;
    let sid = ue.allocate_session_id();
    let mut session = PduSession::new(sid.clone(), req.snssai.clone(), req.dn, req.session_type);
    session.transition(SessionState::Establishing)?;
    ue.sessions.insert(sid.clone(), session);
    let run = step.runs.create(
        NewRun {
            procedure: Procedure::PduSessionEstablishment,
            initiator: Initiator::Ue,
            ue_id: ue_id.clone(),
            target_snssai: Some(req.snssai),
            session: Some(sid),
            parent: None,
            switch,
            detail: RunDetail::Establishment {
                release_old: req.release_old,
                upfs_remaining: VecDeque::new(),
            },
        },
        step.now,
    );
    step.send(MessageName::PduSessionEstablishmentRequest, amf, ue_id, Some(run), Payload::None);
    Ok(run)
}

/// Ends the run as failed and drops the half-built session. Failures happen
/// before any N4 session, prefix or RAN token exists.
pub(crate) fn fail(step: &mut Step<'_>, run: RunId, reason: FailureReason) -> Result<(), ProcedureError> {
    let ue_id = step.run(run)?.ue_id.clone();
    let sid = step.run_session(run)?;
    let session = step.session_mut(&ue_id, &sid)?;
    if session.state == SessionState::Establishing {
        session.transition(SessionState::Released)?;
    }
    step.finish(run, RunOutcome::Failure(reason))
}

pub(crate) fn amf_on_request(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let ue = step.ue(&msg.ue)?;
    let snssai = step.session(&msg.ue, &sid)?.snssai.clone();
    if !ue.nssai.allowed.contains(&snssai) {
        return fail(step, run, FailureReason::SliceNotAllowed);
    }
    if snssai.sst != ue.service_type {
        return fail(step, run, FailureReason::ServiceTypeMismatch);
    }
    let Some(smf) = step.dir.smf_for(&snssai).cloned() else {
        return fail(step, run, FailureReason::NoSmf);
    };
    step.milestone(run, Milestone::SmfSelected)?;
    step.session_mut(&msg.ue, &sid)?.smf = Some(smf.clone());
    step.send(MessageName::SmContextCreateRequest, smf, &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn smf_on_create(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let udm = step
        .dir
        .first(NfKind::Udm)
        .cloned()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("udm")))?;
    step.send(MessageName::SmSubscriptionDataRequest, udm, &msg.ue, msg.correlates, Payload::None);
    Ok(())
}

pub(crate) fn smf_on_subscription(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let (found, dn_authorization) = match msg.payload {
        Payload::SmSubscription {
            found,
            dn_authorization,
        } => (found, dn_authorization),
        _ => (false, false),
    };
    if !found {
        return fail(step, run, FailureReason::NoSmSubscription);
    }
    step.milestone(run, Milestone::SmSubscriptionVerified)?;
    let amf = step.serving_amf(&msg.ue)?;
    step.send(MessageName::SmContextCreateResponse, amf, &msg.ue, Some(run), Payload::None);
    if dn_authorization {
        let dn = step
            .dir
            .first(NfKind::Dn)
            .cloned()
            .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("dn")))?;
        step.send(MessageName::DnAuthRequest, dn, &msg.ue, Some(run), Payload::None);
        Ok(())
    } else {
        step.milestone(run, Milestone::DnAuthorized)?;
        request_policy(step, &msg.ue, run)
    }
}

pub(crate) fn amf_on_create_response(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let r = step.run(run)?;
    let switch = r.switch;
    let old = match &r.detail {
        RunDetail::Establishment { release_old, .. } => release_old.clone(),
        _ => None,
    };
    if let Some(old) = old {
        if step.session(&msg.ue, &old)?.state == SessionState::Active {
            release::start(step, &msg.ue, &old, Initiator::Amf, Some(run), switch)?;
        }
    }
    Ok(())
}

pub(crate) fn smf_on_dn_auth(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    if msg.payload != Payload::Verdict(true) {
        return fail(step, run, FailureReason::DnAuthRejected);
    }
    step.milestone(run, Milestone::DnAuthorized)?;
    request_policy(step, &msg.ue, run)
}

fn request_policy(step: &mut Step<'_>, ue: &UeId, run: RunId) -> Result<(), ProcedureError> {
    let pcf = step
        .dir
        .first(NfKind::Pcf)
        .cloned()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("pcf")))?;
    step.send(MessageName::PolicyRetrievalRequest, pcf, ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn smf_on_policy(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    if msg.payload != Payload::Verdict(true) {
        return fail(step, run, FailureReason::NoPolicy);
    }
    step.milestone(run, Milestone::PolicyRetrieved)?;
    let sid = step.run_session(run)?;
    let session = step.session(&msg.ue, &sid)?;
    let snssai = session.snssai.clone();
    let policy = PolicyStore::reference(&snssai, &session.dn_name);
    let upfs = step.dir.upfs_for(&snssai);
    if upfs.is_empty() {
        return fail(step, run, FailureReason::NoUpf);
    }
    step.milestone(run, Milestone::UpfSelected)?;
    let session = step.session_mut(&msg.ue, &sid)?;
    session.policy_ref = Some(policy);
    session.upfs = upfs.clone();
    if let RunDetail::Establishment { upfs_remaining, .. } = &mut step.run_mut(run)?.detail {
        *upfs_remaining = upfs.into();
    }
    smf_next(step, &msg.ue, run)
}

/// SMF: establish the next N4 session, or allocate the prefix and move on to (e).
fn smf_next(step: &mut Step<'_>, ue: &UeId, run: RunId) -> Result<(), ProcedureError> {
    let next = match &mut step.run_mut(run)?.detail {
        RunDetail::Establishment { upfs_remaining, .. } => upfs_remaining.pop_front(),
        _ => None,
    };
    if let Some(upf) = next {
        step.send(MessageName::N4SessionEstablishmentRequest, upf, ue, Some(run), Payload::None);
        return Ok(());
    }
    step.milestone(run, Milestone::N4Established)?;
    let sid = step.run_session(run)?;
    step.smf().prefixes.insert(sid.clone(), IpPrefix::for_session(&sid));
    step.milestone(run, Milestone::IpAllocated)?;
    let amf = step.serving_amf(ue)?;
    step.send(MessageName::N1N2MessageTransfer, amf, ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn upf_on_n4(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let n4 = N4Session {
        session_id: sid.clone(),
        smf: msg.src.clone(),
        upf: step.me.nf_id.clone(),
        rules: N4Rules::for_session(&sid),
    };
    if let NfStore::Upf(s) = step.store {
        s.n4.insert(sid, n4);
    }
    step.send(
        MessageName::N4SessionEstablishmentResponse,
        msg.src.clone(),
        &msg.ue,
        Some(run),
        Payload::None,
    );
    Ok(())
}

pub(crate) fn smf_on_n4(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let n4 = N4Session {
        session_id: sid.clone(),
        smf: step.me.nf_id.clone(),
        upf: msg.src.clone(),
        rules: N4Rules::for_session(&sid),
    };
    step.smf().n4.entry(sid).or_default().push(n4);
    smf_next(step, &msg.ue, run)
}

pub(crate) fn amf_on_n1n2(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let ran = step
        .dir
        .first(NfKind::Ran)
        .cloned()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("ran")))?;
    step.send(
        MessageName::N2PduSessionResourceSetupRequest,
        ran,
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ran_on_setup(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    if let NfStore::Ran(s) = step.store {
        s.tokens.insert(sid.clone(), RanToken::for_session(&sid));
    }
    step.send(
        MessageName::PduSessionEstablishmentAccept,
        NfId::from(&msg.ue),
        &msg.ue,
        Some(run),
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ue_on_accept(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    step.send(
        MessageName::RrcReconfigurationComplete,
        msg.src.clone(),
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ran_on_rrc_complete(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let amf = step.serving_amf(&msg.ue)?;
    step.send(
        MessageName::N2PduSessionResourceSetupResponse,
        amf,
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn amf_on_setup_response(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    step.milestone(run, Milestone::SmParametersConfigured)?;
    let sid = step.run_session(run)?;
    let smf = step
        .session(&msg.ue, &sid)?
        .smf
        .clone()
        .ok_or_else(|| ProcedureError::UnknownNf(NfId::new("smf")))?;
    step.send(MessageName::SmContextUpdateRequest, smf, &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn smf_on_update(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    let run = msg_run(msg)?;
    let sid = step.run_session(run)?;
    let prefix = step.smf().prefixes.get(&sid).cloned();
    let session = step.session_mut(&msg.ue, &sid)?;
    session.transition(SessionState::Active)?;
    session.ip_prefix = prefix;
    let upf = session.upfs.first().cloned().ok_or_else(|| ProcedureError::UnknownNf(NfId::new("upf")))?;
    step.milestone(run, Milestone::SessionActive)?;
    step.notes.push(Note::SessionActive {
        ue: msg.ue.clone(),
        session: sid,
        at: step.now,
    });
    step.send(MessageName::RouterAdvertisement, upf, &msg.ue, Some(run), Payload::None);
    Ok(())
}

pub(crate) fn upf_on_ra(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    step.send(
        MessageName::RouterAdvertisement,
        NfId::from(&msg.ue),
        &msg.ue,
        msg.correlates,
        Payload::None,
    );
    Ok(())
}

pub(crate) fn ue_on_ra(step: &mut Step<'_>, msg: &SignalingMessage) -> Result<(), ProcedureError> {
    step.finish(msg_run(msg)?, RunOutcome::Success)
}
